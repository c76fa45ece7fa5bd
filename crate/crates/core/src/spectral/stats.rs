use alloc::vec;
use alloc::vec::Vec;

use super::RatioSample;
use crate::analytics::AnalyticCurve;
use crate::{Error, Result};

pub const DEFAULT_BIN_WIDTH: f64 = 0.1;
pub const DEFAULT_SUPPORT_CUT: f64 = 5.0;

/// Uniform-bin density estimate on `[0, support_cut]`.
///
/// Densities are normalized by the total sample count, so they overlay an
/// analytic density directly and the bins sum to the in-range fraction.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmpiricalHistogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub n_samples: usize,
    pub support_cut: f64,
}

impl EmpiricalHistogram {
    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }

    /// `Σ density · width`.
    pub fn mass(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.bin_width()
    }
}

/// Histogram of `sample` with bins of (about) `bin_width` on
/// `[0, support_cut]`. The bin count is `ceil(support_cut / bin_width)` and
/// the width is adjusted so the bins tile the support exactly.
pub fn histogram(sample: &RatioSample, bin_width: f64, support_cut: f64) -> Result<EmpiricalHistogram> {
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(Error::Domain {
            what: "bin width must be positive",
            value: bin_width,
        });
    }
    if !(support_cut > 0.0) || !support_cut.is_finite() {
        return Err(Error::Domain {
            what: "support cut must be positive",
            value: support_cut,
        });
    }
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let bins = libm::ceil(support_cut / bin_width - 1e-9).max(1.0) as usize;
    let width = support_cut / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in sample.values() {
        if v <= support_cut {
            let i = ((v / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
    }
    let total = sample.len() as f64;
    Ok(EmpiricalHistogram {
        bin_edges: (0..=bins).map(|i| i as f64 * width).collect(),
        densities: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
        n_samples: sample.len(),
        support_cut,
    })
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `sample` and
/// the CSRD of `curve`.
pub fn ks_distance(sample: &RatioSample, curve: &AnalyticCurve) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(ks_distance_sorted(&sample.sorted(), curve))
}

/// KS distance for an ascending, non-empty slice.
pub fn ks_distance_sorted(sorted: &[f64], curve: &AnalyticCurve) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = curve.csrd_fast(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max(hi - f).max(f - lo);
    }
    d
}

/// Search range for [`fit_alpha`]: `start, start + step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlphaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid {
            start: 0.0,
            stop: 14.0,
            step: 0.05,
        }
    }
}

impl AlphaGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::Domain {
                what: "alpha grid step must be positive",
                value: self.step,
            });
        }
        if !(self.stop >= self.start) {
            return Err(Error::Domain {
                what: "alpha grid stop must not precede start",
                value: self.stop,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        libm::round((self.stop - self.start) / self.step) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid points, computed as `start + i·step` to avoid drift.
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| {
            let a = self.start + i as f64 * self.step;
            // Snap to 1e-12 so 0.05-step grids hit 1.0, 2.0, 4.0 exactly.
            libm::round(a * 1e12) / 1e12
        })
    }
}

/// Outcome of fitting α by minimum KS distance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub alpha_hat: f64,
    /// KS distance at `alpha_hat`.
    pub distance: f64,
    pub alpha_grid: AlphaGrid,
    /// The minimum sits on the first or last grid point.
    pub at_boundary: bool,
    pub n_samples: usize,
}

// Distances closer than this count as a tie.
const TIE_TOLERANCE: f64 = 1e-12;

/// Analytic curves for every point of an α grid, built once and reused.
#[derive(Debug, Clone)]
pub struct AlphaFitter {
    grid: AlphaGrid,
    curves: Vec<AnalyticCurve>,
}

impl AlphaFitter {
    pub fn new(grid: AlphaGrid) -> Result<Self> {
        grid.validate()?;
        let curves = grid.points().map(AnalyticCurve::new).collect::<Result<_>>()?;
        Ok(AlphaFitter { grid, curves })
    }

    pub fn grid(&self) -> AlphaGrid {
        self.grid
    }

    /// Grid point minimizing the KS distance; ties go to the smaller α.
    pub fn fit(&self, sample: &RatioSample) -> Result<FitResult> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let sorted = sample.sorted();
        let mut best = (0usize, f64::INFINITY);
        for (i, curve) in self.curves.iter().enumerate() {
            let d = ks_distance_sorted(&sorted, curve);
            if d < best.1 - TIE_TOLERANCE {
                best = (i, d);
            }
        }
        Ok(FitResult {
            alpha_hat: self.curves[best.0].alpha(),
            distance: best.1,
            alpha_grid: self.grid,
            at_boundary: best.0 == 0 || best.0 + 1 == self.curves.len(),
            n_samples: sample.len(),
        })
    }
}

/// Fits α over `grid`; see [`AlphaFitter`] to reuse curves across samples.
pub fn fit_alpha(sample: &RatioSample, grid: AlphaGrid) -> Result<FitResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    AlphaFitter::new(grid)?.fit(sample)
}
