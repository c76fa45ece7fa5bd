//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! iteration with Wilkinson-style shifts (EISPACK `tql2`). The reduction keeps
//! only the lower triangle of the trailing block up to date and works row by
//! row, so both the matrix-vector product and the rank-2 update run over
//! contiguous slices.

use alloc::vec;
use alloc::vec::Vec;

use crate::netgen::BlockMatrix;
use crate::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Wraps values, sorting them ascending. Fails on non-finite input.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: i });
        }
        values.sort_by(f64::total_cmp);
        Ok(Spectrum {
            eigenvalues: values,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.eigenvalues
    }
}

/// Eigenvalues with orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub spectrum: Spectrum,
    /// Row `i` holds the unit eigenvector for `spectrum.eigenvalues()[i]`.
    pub vectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn vector(&self, i: usize) -> &[f64] {
        let n = self.spectrum.len();
        &self.vectors[i * n..(i + 1) * n]
    }

    /// `‖A v_i − λ_i v_i‖₂` for eigenpair `i` of the decomposed matrix `a`
    /// (row-major, `n × n`).
    pub fn residual(&self, a: &[f64], i: usize) -> f64 {
        let n = self.spectrum.len();
        let v = self.vector(i);
        let lambda = self.spectrum.eigenvalues()[i];
        let sq: f64 = (0..n)
            .map(|r| {
                let av: f64 = a[r * n..(r + 1) * n].iter().zip(v).map(|(x, y)| x * y).sum();
                let d = av - lambda * v[r];
                d * d
            })
            .sum();
        libm::sqrt(sq)
    }
}

fn check_input(n: usize, a: &[f64]) -> Result<()> {
    if n < 2 {
        return Err(Error::Size {
            what: "matrix dimension",
            required: 2,
            got: n,
        });
    }
    if a.len() != n * n {
        return Err(Error::Size {
            what: "matrix entries",
            required: n * n,
            got: a.len(),
        });
    }
    for i in 0..n {
        for j in 0..=i {
            let (x, y) = (a[i * n + j], a[j * n + i]);
            if !x.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if !y.is_finite() {
                return Err(Error::NonFinite { row: j, col: i });
            }
            if x != y {
                return Err(Error::NotSymmetric {
                    row: i,
                    col: j,
                    diff: (x - y).abs(),
                });
            }
        }
    }
    Ok(())
}

/// All eigenvalues of a block matrix, ascending.
pub fn eigenvalues(matrix: &BlockMatrix) -> Result<Spectrum> {
    symmetric_eigenvalues(matrix.dim(), matrix.entries())
}

/// All eigenvalues of the symmetric row-major `n × n` matrix `a`.
///
/// Any asymmetry (`a[i][j] != a[j][i]`) is rejected.
pub fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Result<Spectrum> {
    check_input(n, a)?;
    let mut work = a.to_vec();
    let (mut d, mut e) = tridiagonalize(n, &mut work);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(Spectrum { eigenvalues: d })
}

/// Eigenvalues and eigenvectors of the symmetric row-major matrix `a`.
pub fn symmetric_eigen(n: usize, a: &[f64]) -> Result<EigenDecomposition> {
    check_input(n, a)?;
    let mut work = a.to_vec();
    let (mut d, mut e) = tridiagonalize(n, &mut work);
    // Rows of `qt` are columns of Q, so QL rotations touch contiguous rows.
    let mut qt = accumulate_q(n, &work);
    ql_implicit(&mut d, &mut e, Some(&mut qt))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        vectors[dst * n..(dst + 1) * n].copy_from_slice(&qt[src * n..(src + 1) * n]);
    }
    let values = order.iter().map(|&i| d[i]).collect();
    Ok(EigenDecomposition {
        spectrum: Spectrum {
            eigenvalues: values,
        },
        vectors,
    })
}

/// Reduces `a` in place to tridiagonal form `Qᵀ A Q = T`.
///
/// Returns `(diagonal, subdiagonal)` with `sub[i] = T[i+1][i]` and
/// `sub[n-1] = 0`. On return, column `k` of `a` below row `k + 1` holds the
/// tail of Householder vector `k` (its leading 1 is implicit) and
/// `a[k][k]` holds its `β`.
fn tridiagonalize(n: usize, a: &mut [f64]) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let base = k + 1;
        // x = a[k+1.., k]
        let x0 = a[base * n + k];
        let mut sigma = 0.0;
        for i in 1..len {
            let x = a[(base + i) * n + k];
            sigma += x * x;
        }
        d[k] = a[k * n + k];
        let beta;
        if sigma == 0.0 {
            // Column already reduced.
            e[k] = x0;
            beta = 0.0;
        } else {
            let mu = libm::sqrt(x0 * x0 + sigma);
            let v0 = if x0 <= 0.0 { x0 - mu } else { -sigma / (x0 + mu) };
            beta = 2.0 * v0 * v0 / (sigma + v0 * v0);
            v[0] = 1.0;
            for i in 1..len {
                v[i] = a[(base + i) * n + k] / v0;
            }
            e[k] = mu;

            // p = β S v using the lower triangle of the trailing block S.
            let p = &mut w[..len];
            p.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..len {
                let row = &a[(base + i) * n + base..(base + i) * n + base + i + 1];
                let vi = v[i];
                let mut acc = row[i] * vi;
                for (j, (&s, &vj)) in row[..i].iter().zip(&v[..i]).enumerate() {
                    acc += s * vj;
                    p[j] += s * vi;
                }
                p[i] += acc;
            }
            let mut pv = 0.0;
            for i in 0..len {
                p[i] *= beta;
                pv += p[i] * v[i];
            }
            // w = p - (β/2)(pᵀv) v
            let half = 0.5 * beta * pv;
            for i in 0..len {
                p[i] -= half * v[i];
            }
            // S -= v wᵀ + w vᵀ on the lower triangle.
            for i in 0..len {
                let (vi, wi) = (v[i], w[i]);
                let row = &mut a[(base + i) * n + base..(base + i) * n + base + i + 1];
                for ((s, &vj), &wj) in row.iter_mut().zip(&v[..=i]).zip(&w[..=i]) {
                    *s -= vi * wj + wi * vj;
                }
            }
            for i in 1..len {
                a[(base + i) * n + k] = v[i];
            }
        }
        a[k * n + k] = beta;
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2];
        d[n - 1] = a[(n - 1) * n + n - 1];
        e[n - 2] = a[(n - 1) * n + n - 2];
    } else if n == 1 {
        d[0] = a[0];
    }
    e[n - 1] = 0.0;
    (d, e)
}

/// Qᵀ from the Householder vectors stored by [`tridiagonalize`].
fn accumulate_q(n: usize, a: &[f64]) -> Vec<f64> {
    // Build Q = H_0 H_1 … H_{n-3} right to left, then transpose.
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let mut v = vec![0.0; n];
    let mut u = vec![0.0; n];
    for k in (0..n.saturating_sub(2)).rev() {
        let beta = a[k * n + k];
        if beta == 0.0 {
            continue;
        }
        let base = k + 1;
        let len = n - base;
        v[0] = 1.0;
        for i in 1..len {
            v[i] = a[(base + i) * n + k];
        }
        // u = vᵀ Q[base.., base..]
        let u = &mut u[..len];
        u.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..len {
            let vi = v[i];
            let row = &q[(base + i) * n + base..(base + i) * n + n];
            for (uj, &qij) in u.iter_mut().zip(row) {
                *uj += vi * qij;
            }
        }
        for i in 0..len {
            let f = beta * v[i];
            let row = &mut q[(base + i) * n + base..(base + i) * n + n];
            for (qij, &uj) in row.iter_mut().zip(u.iter()) {
                *qij -= f * uj;
            }
        }
    }
    let mut qt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            qt[j * n + i] = q[i * n + j];
        }
    }
    qt
}

/// Implicit QL on the symmetric tridiagonal matrix `(d, e)`; `e[i]` couples
/// `i` and `i + 1`. Eigenvalues are left unsorted in `d`. When `zt` is given
/// its rows are rotated alongside, turning Qᵀ into the eigenvector rows.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut Vec<f64>>) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence { index: l });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    let r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..];
                        let zi1 = &mut hi[..n];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let h = *b;
                            *b = s * *a + c * h;
                            *a = c * *a - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn two_by_two() {
        let s = symmetric_eigenvalues(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-15);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity() {
        let n = 7;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        let s = symmetric_eigenvalues(n, &a).unwrap();
        assert!(s.eigenvalues().iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn complete_graph_k4() {
        let mut a = vec![1.0; 16];
        for i in 0..4 {
            a[i * 4 + i] = 0.0;
        }
        let s = symmetric_eigenvalues(4, &a).unwrap();
        let expected = [-1.0, -1.0, -1.0, 3.0];
        for (x, y) in s.eigenvalues().iter().zip(expected) {
            assert!((x - y).abs() < 1e-13, "{:?}", s.eigenvalues());
        }
    }

    #[test]
    fn path_graph_spectrum() {
        // Adjacency of the path P_n: eigenvalues 2 cos(πj/(n+1)).
        let n = 60;
        let mut a = vec![0.0; n * n];
        for i in 0..n - 1 {
            a[i * n + i + 1] = 1.0;
            a[(i + 1) * n + i] = 1.0;
        }
        let s = symmetric_eigenvalues(n, &a).unwrap();
        let mut expected: Vec<f64> = (1..=n)
            .map(|j| 2.0 * libm::cos(PI * j as f64 / (n as f64 + 1.0)))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (x, y) in s.eigenvalues().iter().zip(&expected) {
            assert!((x - y).abs() <= 1e-10 * y.abs().max(1e-3), "{x} vs {y}");
        }
    }

    #[test]
    fn rejects_asymmetry_and_nan() {
        let err = symmetric_eigenvalues(2, &[0.0, 1.0, 1.0 + 1e-15, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
        let err = symmetric_eigenvalues(2, &[f64::NAN, 0.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
        assert!(matches!(
            symmetric_eigenvalues(1, &[1.0]),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn eigenvectors_have_small_residuals() {
        let n = 40;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x = libm::sin((i * 31 + j * 17) as f64) * 0.5;
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        let dec = symmetric_eigen(n, &a).unwrap();
        let norm = libm::sqrt(a.iter().map(|x| x * x).sum::<f64>());
        for i in 0..n {
            assert!(dec.residual(&a, i) <= 1e-8 * norm);
        }
        let plain = symmetric_eigenvalues(n, &a).unwrap();
        for (x, y) in plain.eigenvalues().iter().zip(dec.spectrum.eigenvalues()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
