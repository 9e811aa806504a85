//! The linearised data equation `A(n) q = b(n)` for a radial update of the
//! inner curve, and its Tikhonov-regularised least-squares solution.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_solver::{DensitySet, InnerOperators, OuterOperators};
use crate::geometry::basis;
use crate::kernels::OrderTables;
use crate::quadrature::QuadGrid;

/// Which Laguerre orders enter the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Only the highest order `n = N`.
    FinalStep,
    /// All orders `0..=N` stacked.
    MultiStep,
}

impl Mode {
    /// Final-step for exact data, multi-step for noisy data.
    pub fn for_noise(delta: f64) -> Self {
        if delta > 0.0 {
            Mode::MultiStep
        } else {
            Mode::FinalStep
        }
    }
}

/// Penalty used by the iteration's regularised solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TikhonovNorm {
    /// Mean squared misfit plus `λ` times the mean square of the radial
    /// update over a period, i.e. `q₀² + ½Σ(aⱼ² + bⱼ²)`.
    #[default]
    L2,
    /// `‖Aq − b‖² + λ‖q‖²` on raw coefficients.
    Euclidean,
}

/// Stacked matrix, right-hand side and regularisation parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub lambda: f64,
}

impl LinearizedSystem {
    pub fn solve(&self) -> Result<DVector<f64>> {
        solve_tikhonov(&self.a, &self.b, self.lambda)
    }

    pub fn solve_with(&self, norm: TikhonovNorm) -> Result<DVector<f64>> {
        match norm {
            TikhonovNorm::Euclidean => self.solve(),
            TikhonovNorm::L2 => solve_tikhonov_l2(&self.a, &self.b, self.lambda),
        }
    }

    /// Root-mean-square of `b`, the data misfit before the update.
    pub fn misfit_rms(&self) -> f64 {
        if self.b.is_empty() {
            0.0
        } else {
            self.b.norm() / (self.b.len() as f64).sqrt()
        }
    }
}

/// `T(k, j) = τⱼ(s_k)` for the degree-`J` basis.
pub fn basis_matrix(grid: &QuadGrid, degree: usize) -> DMatrix<f64> {
    DMatrix::from_fn(grid.len(), 2 * degree + 1, |k, j| basis(j, degree, grid.nodes()[k]))
}

/// `A(n)ᵢⱼ = (1/2M) Σ_k τⱼ(s_k) Σ_{m≤n} φ¹_{m,k} D_{n−m}(sᵢ, s_k)`.
pub fn assemble_a(n: usize, densities: &DensitySet, frechet: &OrderTables, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if n >= densities.orders() || n >= frechet.len() {
        return Err(Error::Order {
            requested: n,
            max: densities.orders().min(frechet.len()).saturating_sub(1),
        });
    }
    let len = frechet[0].nrows();
    if basis.nrows() != len {
        return Err(Error::Shape {
            expected: len,
            got: basis.nrows(),
        });
    }
    let mut weighted = DMatrix::zeros(len, len);
    for m in 0..=n {
        let phi = &densities.phi1[m];
        let table = &frechet[n - m];
        for k in 0..len {
            let pk = phi[k];
            if pk != 0.0 {
                weighted.column_mut(k).axpy(pk, &table.column(k), 1.0);
            }
        }
    }
    Ok(weighted * basis / len as f64)
}

/// `b(n) = fₙ − Σ_{m≤n}(H²¹_{n−m} φ¹_m + H²²_{n−m} φ²_m)`: the Dirichlet
/// misfit on the outer curve of the current field.
pub fn assemble_b(
    n: usize,
    densities: &DensitySet,
    inner: &InnerOperators,
    outer: &OuterOperators,
    f: &DVector<f64>,
) -> Result<DVector<f64>> {
    if n >= densities.orders() || n >= inner.h21.len() {
        return Err(Error::Order {
            requested: n,
            max: densities.orders().min(inner.h21.len()).saturating_sub(1),
        });
    }
    if f.len() != outer.curve.len() {
        return Err(Error::Shape {
            expected: outer.curve.len(),
            got: f.len(),
        });
    }
    let mut b = f.clone();
    for m in 0..=n {
        b.gemv(-1.0, &inner.h21[n - m], &densities.phi1[m], 1.0);
        b.gemv(-1.0, &outer.h22[n - m], &densities.phi2[m], 1.0);
    }
    Ok(b)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("Tikhonov parameter must be > 0, got {lambda}")))
    }
}

fn spd_solve(mut normal: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    // Symmetrise against round-off before the Cholesky factorisation.
    normal = (&normal + normal.transpose()) * 0.5;
    let chol = normal
        .cholesky()
        .ok_or_else(|| Error::Singular("normal equations are not positive definite".into()))?;
    let q = chol.solve(&rhs);
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Tikhonov solution".into()));
    }
    Ok(q)
}

/// Minimiser of `‖Aq − b‖² + λ‖q‖²` via `(AᵀA + λI) q = Aᵀb`.
pub fn solve_tikhonov(a: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    check_lambda(lambda)?;
    if a.nrows() != b.len() {
        return Err(Error::Shape {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let mut normal = a.tr_mul(a);
    for i in 0..normal.nrows() {
        normal[(i, i)] += lambda;
    }
    spd_solve(normal, a.tr_mul(b))
}

/// Minimiser of `(1/rows)‖Aq − b‖² + λ qᵀPq` with `P = diag(1, ½, …, ½)`,
/// so that both terms are mean squares independent of grid size and order
/// count.
pub fn solve_tikhonov_l2(a: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    check_lambda(lambda)?;
    if a.nrows() != b.len() || a.nrows() == 0 {
        return Err(Error::Shape {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let rows = a.nrows() as f64;
    let mut normal = a.tr_mul(a) / rows;
    for i in 0..normal.nrows() {
        normal[(i, i)] += if i == 0 { lambda } else { 0.5 * lambda };
    }
    spd_solve(normal, a.tr_mul(b) / rows)
}

/// Picks the final block or stacks all of them, `blocks[n] = (A(n), b(n))`.
pub fn build_system(mode: Mode, blocks: &[(DMatrix<f64>, DVector<f64>)], lambda: f64) -> Result<LinearizedSystem> {
    let (last_a, last_b) = blocks
        .last()
        .ok_or_else(|| Error::Parameter("no linearised blocks".into()))?;
    match mode {
        Mode::FinalStep => Ok(LinearizedSystem {
            a: last_a.clone(),
            b: last_b.clone(),
            lambda,
        }),
        Mode::MultiStep => {
            let cols = last_a.ncols();
            let rows: usize = blocks.iter().map(|(a, _)| a.nrows()).sum();
            let mut a = DMatrix::zeros(rows, cols);
            let mut b = DVector::zeros(rows);
            let mut offset = 0;
            for (block_a, block_b) in blocks {
                if block_a.ncols() != cols || block_b.len() != block_a.nrows() {
                    return Err(Error::Shape {
                        expected: cols,
                        got: block_a.ncols(),
                    });
                }
                a.rows_mut(offset, block_a.nrows()).copy_from(block_a);
                b.rows_mut(offset, block_b.len()).copy_from(block_b);
                offset += block_a.nrows();
            }
            Ok(LinearizedSystem { a, b, lambda })
        }
    }
}
