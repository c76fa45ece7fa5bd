//! Spectra of symmetric matrices and their spacing-ratio statistics.

mod eigen;
mod ratios;
mod stats;

pub use eigen::{eigenvalues, symmetric_eigen, symmetric_eigenvalues, EigenDecomposition, Spectrum};
pub use ratios::{ratios_of, spacing_ratios, RatioSample, SourceMeta, DEGENERATE_SPACING};
pub use stats::{
    fit_alpha, histogram, ks_distance, ks_distance_sorted, AlphaFitter, AlphaGrid,
    EmpiricalHistogram, FitResult, DEFAULT_BIN_WIDTH, DEFAULT_SUPPORT_CUT,
};
