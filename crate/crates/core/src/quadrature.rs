//! Trapezoidal and logarithmic-weight trigonometric quadrature on the
//! uniform grid `s_k = kπ/M`, `k = 0..2M−1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid together with the weights `R_k(s_i)` for the
/// kernel `ln((4/e) sin²((s−σ)/2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    m: usize,
    nodes: Vec<f64>,
    /// `R` indexed by `(i − k) mod 2M`.
    r_by_offset: Vec<f64>,
}

impl QuadGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Parameter(format!("quadrature needs M ≥ 2, got {m}")));
        }
        let len = 2 * m;
        let mf = m as f64;
        let nodes = (0..len).map(|k| k as f64 * PI / mf).collect();
        let r_by_offset = (0..len)
            .map(|offset| {
                let t = offset as f64 * PI / mf;
                let series: f64 = (1..m).map(|j| (j as f64 * t).cos() / j as f64).sum();
                -(1.0 + 2.0 * series + (mf * t).cos() / mf) / (2.0 * mf)
            })
            .collect();
        Ok(Self {
            m,
            nodes,
            r_by_offset,
        })
    }

    /// Half the number of nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of nodes `2M`.
    pub fn len(&self) -> usize {
        2 * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `R_k(s_i)`.
    #[inline]
    pub fn weight(&self, i: usize, k: usize) -> f64 {
        let len = self.len();
        self.r_by_offset[(i + len - k % len) % len]
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::Shape {
                expected: self.len(),
                got: f.len(),
            });
        }
        Ok(())
    }

    /// `(1/2π)∫f ≈ (1/2M) Σ f(s_k)`.
    pub fn integrate_smooth(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        Ok(f.iter().sum::<f64>() / self.len() as f64)
    }

    /// `(1/2π)∫ ln((4/e) sin²((s_i−σ)/2)) f(σ) dσ ≈ Σ R_k(s_i) f(s_k)`.
    pub fn integrate_log(&self, f: &[f64], i: usize) -> Result<f64> {
        self.check_len(f)?;
        if i >= self.len() {
            return Err(Error::Shape {
                expected: self.len(),
                got: i,
            });
        }
        Ok(f.iter()
            .enumerate()
            .map(|(k, &fk)| self.weight(i, k) * fk)
            .sum())
    }
}
