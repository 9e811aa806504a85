//! Laguerre polynomials and the Fourier–Laguerre transform in time.
//!
//! A time signal `u(t)` is represented by coefficients
//! `uₙ = ∫₀^∞ e^{-κt} Lₙ(κt) u(t) dt` and re-expanded as
//! `u(t) = κ Σ uₙ Lₙ(κt)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of Gauss–Laguerre nodes used by the forward transform.
pub const MIN_TRANSFORM_NODES: usize = 40;

/// A length-`N+1` sequence of Laguerre coefficients, scalars or nodal vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaguerreSeq<T> {
    pub kappa: f64,
    pub coeffs: Vec<T>,
}

impl<T> LaguerreSeq<T> {
    pub fn new(kappa: f64, coeffs: Vec<T>) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::Parameter(format!("kappa must be positive, got {kappa}")));
        }
        if coeffs.is_empty() {
            return Err(Error::Parameter("a Laguerre sequence needs at least one order".into()));
        }
        Ok(Self { kappa, coeffs })
    }

    /// Highest order `N`.
    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// `Lₙ(t)` by the three-term recurrence.
pub fn laguerre_poly(n: usize, t: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 - t;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - t) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `(L₀(t), …, L_N(t))` in one recurrence sweep.
pub fn laguerre_all(n_max: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max >= 1 {
        out.push(1.0 - t);
    }
    for k in 1..n_max {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - t) * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Gauss–Laguerre nodes and weights for the weight `e^{-x}` on `[0, ∞)`.
///
/// Nodes come from the Golub–Welsch eigenproblem and are then polished by
/// Newton steps on `Lₙ`; weights use `xᵢ / ((n+1)² L_{n+1}(xᵢ)²)`.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "at least one node required");
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * i as f64 + 1.0
        } else if i + 1 == j || j + 1 == i {
            i.max(j) as f64
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let nf = n as f64;
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let l = laguerre_all(n, *x);
            // x Lₙ'(x) = n (Lₙ(x) − L_{n−1}(x))
            let dl = nf * (l[n] - l[n - 1]) / *x;
            *x -= l[n] / dl;
        }
        let next = laguerre_poly(n + 1, *x);
        weights.push(*x / ((nf + 1.0) * (nf + 1.0) * next * next));
    }
    (nodes, weights)
}

fn transform_nodes(n_max: usize) -> usize {
    MIN_TRANSFORM_NODES.max(2 * (n_max + 1))
}

/// Forward transform of a scalar time signal.
pub fn laguerre_transform<F>(f: F, kappa: f64, n_max: usize) -> Result<LaguerreSeq<f64>>
where
    F: Fn(f64) -> f64,
{
    let seq = laguerre_transform_nodal(|t| vec![f(t)], 1, kappa, n_max)?;
    let coeffs = seq.coeffs.into_iter().map(|v| v[0]).collect();
    LaguerreSeq::new(kappa, coeffs)
}

/// Forward transform of a vector-valued signal (e.g. boundary values at
/// `len` nodes).
pub fn laguerre_transform_nodal<F>(
    f: F,
    len: usize,
    kappa: f64,
    n_max: usize,
) -> Result<LaguerreSeq<Vec<f64>>>
where
    F: Fn(f64) -> Vec<f64>,
{
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Parameter(format!("kappa must be positive, got {kappa}")));
    }
    let (nodes, weights) = gauss_laguerre(transform_nodes(n_max));
    let mut coeffs = vec![vec![0.0; len]; n_max + 1];
    for (&x, &w) in nodes.iter().zip(&weights) {
        let t = x / kappa;
        let sample = f(t);
        if sample.len() != len {
            return Err(Error::Shape {
                expected: len,
                got: sample.len(),
            });
        }
        if let Some(bad) = sample.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("signal value {bad} at t = {t}")));
        }
        let l = laguerre_all(n_max, x);
        for (c, &ln) in coeffs.iter_mut().zip(&l) {
            for (ci, &si) in c.iter_mut().zip(&sample) {
                *ci += w * ln * si / kappa;
            }
        }
    }
    LaguerreSeq::new(kappa, coeffs)
}

/// `κ Σₙ uₙ Lₙ(κt)` for a scalar sequence.
pub fn laguerre_expand(seq: &LaguerreSeq<f64>, t: f64) -> f64 {
    let l = laguerre_all(seq.n_max(), seq.kappa * t);
    seq.kappa * seq.coeffs.iter().zip(&l).map(|(u, l)| u * l).sum::<f64>()
}

/// `κ Σₙ uₙ Lₙ(κt)` for a nodal sequence.
pub fn laguerre_expand_nodal(seq: &LaguerreSeq<Vec<f64>>, t: f64) -> Vec<f64> {
    let l = laguerre_all(seq.n_max(), seq.kappa * t);
    let len = seq.coeffs.first().map_or(0, Vec::len);
    let mut out = vec![0.0; len];
    for (c, &ln) in seq.coeffs.iter().zip(&l) {
        for (o, &ci) in out.iter_mut().zip(c) {
            *o += seq.kappa * ln * ci;
        }
    }
    out
}
