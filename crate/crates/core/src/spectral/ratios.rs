use alloc::vec::Vec;

use super::Spectrum;
use crate::{Error, Result};

/// Relative threshold below which a spacing counts as degenerate.
pub const DEGENERATE_SPACING: f64 = 1e-12;

/// Where a pooled sample came from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SourceMeta {
    /// Number of layers of the generating network.
    pub layers: usize,
    pub spec_hash: u64,
    pub realizations: usize,
}

/// Pooled k-th order spacing ratios.
///
/// Every stored value is finite and strictly positive. Ratios whose
/// spacings fall below the degeneracy threshold are counted in
/// [`dropped`](Self::dropped) instead.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioSample {
    k: usize,
    values: Vec<f64>,
    dropped: usize,
    pub meta: SourceMeta,
}

impl RatioSample {
    pub fn new(k: usize) -> Self {
        RatioSample {
            k,
            values: Vec::new(),
            dropped: 0,
            meta: SourceMeta::default(),
        }
    }

    /// Builds a sample from raw values; non-positive or non-finite values
    /// are counted as dropped.
    pub fn from_values(k: usize, values: impl IntoIterator<Item = f64>) -> Self {
        let mut s = RatioSample::new(k);
        for v in values {
            if v.is_finite() && v > 0.0 {
                s.values.push(v);
            } else {
                s.dropped += 1;
            }
        }
        s
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Appends `other` (same `k`). Realization counts add up.
    pub fn merge(&mut self, other: &RatioSample) {
        debug_assert_eq!(self.k, other.k);
        self.values.extend_from_slice(&other.values);
        self.dropped += other.dropped;
        self.meta.realizations += other.meta.realizations;
    }

    /// Values sorted ascending.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// k-th order spacing ratios
/// `r_i = (λ_{i+2k} − λ_{i+k}) / (λ_{i+k} − λ_i)`, `i = 1 … n − 2k`.
///
/// The window slides by one eigenvalue. Ratios with either spacing below
/// `1e-12 · (λ_n − λ_1)` are dropped and counted.
pub fn spacing_ratios(spectrum: &Spectrum, k: usize) -> Result<RatioSample> {
    ratios_of(spectrum.eigenvalues(), k)
}

/// [`spacing_ratios`] on an ascending slice.
pub fn ratios_of(values: &[f64], k: usize) -> Result<RatioSample> {
    if k == 0 {
        return Err(Error::Size {
            what: "ratio order k",
            required: 1,
            got: 0,
        });
    }
    let n = values.len();
    if n < 2 * k + 1 {
        return Err(Error::Size {
            what: "spectrum length for this ratio order (2k + 1)",
            required: 2 * k + 1,
            got: n,
        });
    }
    let span = values[n - 1] - values[0];
    let threshold = DEGENERATE_SPACING * span;
    let mut sample = RatioSample::new(k);
    sample.values.reserve(n - 2 * k);
    for i in 0..n - 2 * k {
        let num = values[i + 2 * k] - values[i + k];
        let den = values[i + k] - values[i];
        if den <= threshold || num <= threshold {
            sample.dropped += 1;
        } else {
            sample.values.push(num / den);
        }
    }
    Ok(sample)
}
