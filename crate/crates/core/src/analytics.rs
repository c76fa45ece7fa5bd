//! The spacing-ratio distribution family
//!
//! ```text
//! P(α, r) = C_α (r + r²)^α / (1 + r + r²)^(1 + 3α/2),   r ≥ 0
//! ```
//!
//! together with its cumulative form (CSRD) and the table mapping ratio
//! order `k` and block count `m` to the index `α`.
//!
//! The density obeys `P(α, r) = P(α, 1/r) / r²`, so the CSRD satisfies
//! `F(1/s) = 1 - F(s)` and `F(1) = 1/2` for every α.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::quadrature::{self, Tolerance};
use crate::{Error, Result};

/// Largest supported index.
pub const MAX_ALPHA: f64 = 20.0;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// How [`AnalyticCurve::csrd`] is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EvalMode {
    /// Closed-form cumulative expression, available for α ∈ {1, 2, 4, 8}.
    ClosedForm,
    Quadrature,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= -1.0 || alpha > MAX_ALPHA {
        return Err(Error::Domain {
            what: "alpha must be finite and in (-1, 20]",
            value: alpha,
        });
    }
    Ok(())
}

/// `(r + r²)^α / (1 + r + r²)^(1 + 3α/2)` written so that neither factor
/// overflows for large `r`.
#[inline]
fn unnormalized(alpha: f64, r: f64) -> f64 {
    if r == 0.0 {
        return if alpha > 0.0 {
            0.0
        } else if alpha == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
    }
    let q = 1.0 + r + r * r;
    let base = (r + r * r) / q;
    libm::pow(base, alpha) * libm::pow(q, -1.0 - 0.5 * alpha)
}

/// Integral of the unnormalized density over `[0, s]` through `r = t/(1-t)`.
fn unnormalized_integral(alpha: f64, s: f64, tol: Tolerance) -> f64 {
    if alpha < 0.0 {
        return if s <= 1.0 {
            singular_head(alpha, s, tol)
        } else {
            // reflection: ∫₀^s = 2∫₀¹ − ∫₀^{1/s}
            2.0 * singular_head(alpha, 1.0, tol) - singular_head(alpha, 1.0 / s, tol)
        };
    }
    let upper = if s.is_infinite() { 1.0 } else { s / (1.0 + s) };
    let integrand = |t: f64| {
        let om = 1.0 - t;
        unnormalized(alpha, t / om) / (om * om)
    };
    quadrature::integrate(integrand, 0.0, upper, tol).value
}

/// `∫₀^s` for α < 0 and `s ≤ 1`. With `r = u^p`, `p = 1/(1+α)`, the factor
/// `r^α dr` becomes `p du` and the integrand is smooth.
fn singular_head(alpha: f64, s: f64, tol: Tolerance) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let p = 1.0 / (1.0 + alpha);
    let integrand = |u: f64| {
        let r = libm::pow(u, p);
        p * libm::pow(1.0 + r, alpha) * libm::pow(1.0 + r + r * r, -1.0 - 1.5 * alpha)
    };
    quadrature::integrate(integrand, 0.0, libm::pow(s, 1.0 + alpha), tol).value
}

const NORM_TOL: Tolerance = Tolerance {
    abs: 0.0,
    rel: 1e-13,
    max_intervals: 4096,
};

/// `C_α`, the constant making `P(α, ·)` integrate to one over `[0, ∞)`.
pub fn normalization_constant(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(1.0 / unnormalized_integral(alpha, f64::INFINITY, NORM_TOL))
}

/// `P(α, r)`.
pub fn density(alpha: f64, r: f64) -> Result<f64> {
    AnalyticCurve::new(alpha)?.density(r)
}

/// Cumulative spacing-ratio distribution `∫₀^s P(α, r) dr`.
///
/// Uses the closed forms for α ∈ {1, 2, 4, 8} and adaptive quadrature
/// otherwise.
pub fn csrd(alpha: f64, s: f64) -> Result<f64> {
    AnalyticCurve::new(alpha)?.csrd(s)
}

/// CSRD by quadrature only, regardless of whether a closed form exists.
pub fn csrd_quadrature(alpha: f64, s: f64) -> Result<f64> {
    AnalyticCurve::new(alpha)?.csrd_by_quadrature(s)
}

/// Closed-form CSRD for α ∈ {1, 2, 4, 8}; `None` for any other α.
pub fn csrd_closed_form(alpha: f64, s: f64) -> Option<f64> {
    let alpha = closed_form_index(alpha)?;
    Some(closed_form(alpha, s))
}

fn closed_form_index(alpha: f64) -> Option<u8> {
    [1u8, 2, 4, 8].into_iter().find(|&a| f64::from(a) == alpha)
}

fn closed_form(alpha: u8, s: f64) -> f64 {
    let q = 1.0 + s + s * s;
    if alpha == 1 {
        return 0.25 * (2.0 + (1.0 + 2.0 * s) * (-2.0 + s + s * s) / (q * libm::sqrt(q)));
    }
    // Shared pieces of the α = 2, 4, 8 expressions.
    let poly = 3.0 * SQRT3 * (-1.0 + s) * s * (1.0 + s) * (2.0 + s) * (1.0 + 2.0 * s);
    let arctan = 3.0 * libm::atan((1.0 + 2.0 * s) / SQRT3) / PI;
    let x = s * (1.0 + s);
    let middle = match alpha {
        2 => poly / (4.0 * PI * q * q * q),
        4 => {
            let inner = 2.0 + x * (6.0 + x * (15.0 + 2.0 * x));
            poly * inner / (8.0 * PI * libm::pow(q, 6.0))
        }
        8 => {
            let inner = 140.0
                + x * (1260.0
                    + x * (5670.0
                        + x * (15540.0
                            + x * (30492.0
                                + x * (40446.0
                                    + x * (51099.0
                                        + 14.0 * x * (873.0 + 5.0 * x * (27.0 + 2.0 * x))))))));
            poly * inner / (560.0 * PI * libm::pow(q, 12.0))
        }
        _ => unreachable!("closed forms exist only for alpha in {{1, 2, 4, 8}}"),
    };
    -0.5 + middle + arctan
}

// Mesh for the tabulated CSRD: nodes r_i = (i / N)² on [0, 1].
const TABLE_CELLS: usize = 512;

/// One member of the `P(α, r)` family with its normalization precomputed.
///
/// Besides the exact [`csrd`](Self::csrd), the curve keeps a tabulation of
/// the CSRD on `[0, 1]` (cubic Hermite on a graded mesh, with the density
/// as slope) for fast bulk evaluation in [`csrd_fast`](Self::csrd_fast).
#[derive(Debug, Clone)]
pub struct AnalyticCurve {
    alpha: f64,
    c_alpha: f64,
    eval_mode: EvalMode,
    // (cdf, density) at the mesh nodes; empty for closed-form curves.
    table: Vec<(f64, f64)>,
}

impl AnalyticCurve {
    pub fn new(alpha: f64) -> Result<Self> {
        let c_alpha = normalization_constant(alpha)?;
        let eval_mode = if closed_form_index(alpha).is_some() {
            EvalMode::ClosedForm
        } else {
            EvalMode::Quadrature
        };
        let mut curve = AnalyticCurve {
            alpha,
            c_alpha,
            eval_mode,
            table: Vec::new(),
        };
        if eval_mode == EvalMode::Quadrature {
            curve.table = curve.tabulate();
        }
        Ok(curve)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }

    pub fn eval_mode(&self) -> EvalMode {
        self.eval_mode
    }

    pub fn density(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Domain {
                what: "ratio must be non-negative",
                value: r,
            });
        }
        Ok(self.density_unchecked(r))
    }

    #[inline]
    fn density_unchecked(&self, r: f64) -> f64 {
        self.c_alpha * unnormalized(self.alpha, r)
    }

    fn check_s(s: f64) -> Result<()> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::Domain {
                what: "upper limit must be non-negative",
                value: s,
            });
        }
        Ok(())
    }

    pub fn csrd(&self, s: f64) -> Result<f64> {
        Self::check_s(s)?;
        match closed_form_index(self.alpha) {
            Some(a) if s.is_finite() => Ok(closed_form(a, s)),
            Some(_) => Ok(1.0),
            None => self.csrd_by_quadrature(s),
        }
    }

    pub fn csrd_by_quadrature(&self, s: f64) -> Result<f64> {
        Self::check_s(s)?;
        let tol = Tolerance {
            abs: 1e-13 / self.c_alpha,
            rel: 1e-13,
            max_intervals: 4096,
        };
        let v = self.c_alpha * unnormalized_integral(self.alpha, s, tol);
        Ok(v.clamp(0.0, 1.0))
    }

    /// CSRD for bulk evaluation; accurate to better than 1e-8.
    ///
    /// `s` must be non-negative (not checked).
    pub fn csrd_fast(&self, s: f64) -> f64 {
        if let Some(a) = closed_form_index(self.alpha) {
            return if s.is_finite() { closed_form(a, s) } else { 1.0 };
        }
        if s <= 1.0 {
            self.lookup(s)
        } else {
            1.0 - self.lookup(1.0 / s)
        }
    }

    fn tabulate(&self) -> Vec<(f64, f64)> {
        let tol = Tolerance {
            abs: 1e-15 / self.c_alpha,
            rel: 1e-14,
            max_intervals: 256,
        };
        let f = |r: f64| unnormalized(self.alpha, r);
        let mut out = Vec::with_capacity(TABLE_CELLS + 1);
        let mut acc = 0.0;
        let mut prev = 0.0;
        out.push((0.0, self.density_unchecked(0.0)));
        for i in 1..=TABLE_CELLS {
            let r = node(i);
            acc += if i == 1 && self.alpha < 0.0 {
                singular_head(self.alpha, r, tol)
            } else {
                quadrature::integrate(f, prev, r, tol).value
            };
            out.push((self.c_alpha * acc, self.density_unchecked(r)));
            prev = r;
        }
        // F(1) = 1/2 exactly; remove the accumulated rounding.
        let last = out[TABLE_CELLS].0;
        for entry in &mut out {
            entry.0 *= 0.5 / last;
        }
        out[TABLE_CELLS].0 = 0.5;
        out
    }

    fn lookup(&self, s: f64) -> f64 {
        let i = ((libm::sqrt(s) * TABLE_CELLS as f64) as usize).min(TABLE_CELLS - 1);
        if i == 0 && self.alpha < 0.0 {
            // Density is unbounded at 0; no Hermite slope there.
            return self.csrd_by_quadrature(s).unwrap_or(0.0);
        }
        let (r0, r1) = (node(i), node(i + 1));
        let (f0, d0) = self.table[i];
        let (f1, d1) = self.table[i + 1];
        let h = r1 - r0;
        let t = (s - r0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1
    }
}

#[inline]
fn node(i: usize) -> f64 {
    let x = i as f64 / TABLE_CELLS as f64;
    x * x
}

/// One entry of the `(k, m) -> α` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaEntry {
    pub alpha: f64,
    /// The tabulated value is an approximation ("∼") rather than exact.
    pub approximate: bool,
}

/// Rows are ratio order k = 1..4, columns block count m = 1..4.
const ALPHA_TABLE: [[AlphaEntry; 4]; 4] = {
    const fn e(alpha: f64) -> AlphaEntry {
        AlphaEntry {
            alpha,
            approximate: false,
        }
    }
    const fn approx(alpha: f64) -> AlphaEntry {
        AlphaEntry {
            alpha,
            approximate: true,
        }
    }
    [
        [e(1.0), approx(0.0), approx(0.0), approx(0.0)],
        [e(4.0), e(2.0), approx(1.25), e(1.0)],
        [e(8.0), e(4.0), e(3.0), approx(2.5)],
        [e(13.0), e(7.0), e(5.0), e(4.0)],
    ]
};

/// Table entry for ratio order `k` and `m` superposed GOE blocks.
pub fn alpha_entry(k: usize, m: usize) -> Result<AlphaEntry> {
    if !(1..=4).contains(&k) || !(1..=4).contains(&m) {
        return Err(Error::Lookup { k, m });
    }
    Ok(ALPHA_TABLE[k - 1][m - 1])
}

/// α for ratio order `k` and `m` superposed GOE blocks.
pub fn alpha_for(k: usize, m: usize) -> Result<f64> {
    alpha_entry(k, m).map(|e| e.alpha)
}
