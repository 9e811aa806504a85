//! Fundamental sequence `Φₙ` of the chain
//! `ΔΦₙ − γ²Φₙ = β Σ_{m<n} Φₘ`, built from `K₀`, `K₁` and the polynomial
//! families `vₙ, wₙ` (for `Φₙ`) and `ṽₙ, w̃ₙ` (for `Φ̃ₙ = −dΦₙ/dr`).

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::fmt_f64;
use crate::specfun::bessel_set;

/// Triangular coefficient table `a_{n,k}`, `0 ≤ k ≤ n ≤ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundTable {
    pub gamma: f64,
    pub beta: f64,
    n_max: usize,
    a: Vec<Vec<f64>>,
}

/// `vₙ, wₙ, ṽₙ, w̃ₙ` at one radius for all orders `0..=N`.
#[derive(Debug, Clone, Default)]
pub struct PolyValues {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub vt: Vec<f64>,
    pub wt: Vec<f64>,
}

/// `Φₙ` and `Φ̃ₙ` at one distance for all orders.
#[derive(Debug, Clone, Default)]
pub struct PhiValues {
    pub phi: Vec<f64>,
    pub phi_tilde: Vec<f64>,
}

impl FundTable {
    /// Fills the table for `β = κ/α`, `γ = √β`.
    pub fn build(kappa: f64, alpha: f64, n_max: usize) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Parameter(format!("kappa must be positive, got {kappa}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
        }
        let beta = kappa / alpha;
        let gamma = beta.sqrt();
        let mut a: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
        a.push(vec![1.0]);
        for n in 1..=n_max {
            let mut row = vec![0.0; n + 1];
            row[0] = 1.0;
            row[n] = -beta * a[n - 1][n - 1] / (2.0 * gamma * n as f64);
            for k in (1..n).rev() {
                let floor = k.div_ceil(2) as f64;
                let tail: f64 = (k - 1..n).map(|m| a[m].get(k - 1).copied().unwrap_or(0.0)).sum();
                row[k] = (4.0 * floor * floor * row[k + 1] - beta * tail) / (2.0 * gamma * k as f64);
            }
            a.push(row);
        }
        Ok(Self {
            gamma,
            beta,
            n_max,
            a,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `a_{n,k}`, zero outside the triangle.
    pub fn coef(&self, n: usize, k: usize) -> f64 {
        self.a
            .get(n)
            .and_then(|row| row.get(k))
            .copied()
            .unwrap_or(0.0)
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            Err(Error::Order {
                requested: n,
                max: self.n_max,
            })
        } else {
            Ok(())
        }
    }

    /// `vₙ(r) = Σ a_{n,2k} r^{2k}`.
    pub fn poly_v(&self, n: usize, r: f64) -> Result<f64> {
        self.check_order(n)?;
        Ok((0..=n).step_by(2).map(|k| self.a[n][k] * r.powi(k as i32)).sum())
    }

    /// `wₙ(r) = Σ a_{n,2k+1} r^{2k+1}`, with `w₀ = 0`.
    pub fn poly_w(&self, n: usize, r: f64) -> Result<f64> {
        self.check_order(n)?;
        Ok((1..=n).step_by(2).map(|k| self.a[n][k] * r.powi(k as i32)).sum())
    }

    /// `ṽₙ(r) = γ Σ_{m≤⌊n/2⌋} a_{n,2m} r^{2m} − 2 Σ_{m=1}^{⌊(n−1)/2⌋} m a_{n,2m+1} r^{2m}`.
    pub fn poly_vt(&self, n: usize, r: f64) -> Result<f64> {
        self.check_order(n)?;
        let first: f64 = (0..=n / 2).map(|m| self.coef(n, 2 * m) * r.powi(2 * m as i32)).sum();
        let second: f64 = (1..=n.saturating_sub(1) / 2)
            .map(|m| m as f64 * self.coef(n, 2 * m + 1) * r.powi(2 * m as i32))
            .sum();
        Ok(self.gamma * first - 2.0 * second)
    }

    /// `w̃ₙ(r) = γ Σ_{m≤⌊(n−1)/2⌋} a_{n,2m+1} r^{2m+1} − 2 Σ_{m=1}^{⌊n/2⌋} m a_{n,2m} r^{2m−1}`.
    pub fn poly_wt(&self, n: usize, r: f64) -> Result<f64> {
        self.check_order(n)?;
        let first: f64 = if n == 0 {
            0.0
        } else {
            (0..=(n - 1) / 2)
                .map(|m| self.coef(n, 2 * m + 1) * r.powi(2 * m as i32 + 1))
                .sum()
        };
        let second: f64 = (1..=n / 2)
            .map(|m| m as f64 * self.coef(n, 2 * m) * r.powi(2 * m as i32 - 1))
            .sum();
        Ok(self.gamma * first - 2.0 * second)
    }

    /// All four polynomial families at `r` for every order, in one pass.
    pub fn polys(&self, r: f64, out: &mut PolyValues) {
        let len = self.n_max + 1;
        for buf in [&mut out.v, &mut out.w, &mut out.vt, &mut out.wt] {
            buf.clear();
            buf.resize(len, 0.0);
        }
        let mut powers = Vec::with_capacity(len);
        let mut p = 1.0;
        for _ in 0..len {
            powers.push(p);
            p *= r;
        }
        for n in 0..len {
            let row = &self.a[n];
            let (mut v, mut w, mut dv, mut dw) = (0.0, 0.0, 0.0, 0.0);
            for (k, &c) in row.iter().enumerate() {
                if k % 2 == 0 {
                    v += c * powers[k];
                    if k >= 2 {
                        // the m = k/2 term of the second w̃ sum
                        dw += k as f64 * c * powers[k - 1];
                    }
                } else {
                    w += c * powers[k];
                    if k >= 3 {
                        // the m = (k−1)/2 term of the second ṽ sum
                        dv += (k - 1) as f64 * c * powers[k - 1];
                    }
                }
            }
            out.v[n] = v;
            out.w[n] = w;
            out.vt[n] = self.gamma * v - dv;
            out.wt[n] = self.gamma * w - dw;
        }
    }

    /// `Φₙ(d) = K₀(γd) vₙ(d) + K₁(γd) wₙ(d)`.
    pub fn phi(&self, n: usize, d: f64) -> Result<f64> {
        self.check_order(n)?;
        Ok(self.phi_all(d)?.phi[n])
    }

    /// `Φ̃ₙ(d) = K₁(γd) ṽₙ(d) + K₀(γd) w̃ₙ(d)`.
    pub fn phi_tilde(&self, n: usize, d: f64) -> Result<f64> {
        self.check_order(n)?;
        Ok(self.phi_all(d)?.phi_tilde[n])
    }

    /// `Φₙ(d)` and `Φ̃ₙ(d)` for all orders.
    pub fn phi_all(&self, d: f64) -> Result<PhiValues> {
        if !(d > 0.0) {
            return Err(Error::Singularity { distance: d });
        }
        let b = bessel_set(self.gamma * d)?;
        let mut polys = PolyValues::default();
        self.polys(d, &mut polys);
        let phi = (0..=self.n_max)
            .map(|n| b.k0 * polys.v[n] + b.k1 * polys.w[n])
            .collect();
        let phi_tilde = (0..=self.n_max)
            .map(|n| b.k1 * polys.vt[n] + b.k0 * polys.wt[n])
            .collect();
        Ok(PhiValues { phi, phi_tilde })
    }

    /// Writes `(n, k, a_{n,k})` rows for cross-checking.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["n", "k", "a"])?;
        for (n, row) in self.a.iter().enumerate() {
            for (k, &c) in row.iter().enumerate() {
                writer.write_record([n.to_string(), k.to_string(), fmt_f64(c)])?;
            }
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}
