//! Nyström solution of the well-posed boundary system for the single-layer
//! densities `φ¹ₙ, φ²ₙ`, `n = 0..N`.
//!
//! Each order couples to all lower orders through the kernels of order
//! `n − m`, but the left-hand side only involves order-0 kernels, so one LU
//! factorization serves every order.

use std::path::Path;

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{Error, Result};
use crate::fundseq::FundTable;
use crate::geometry::{fmt_f64, Curve, NodalCurve, Point};
use crate::kernels::{
    normal_derivative_cross, normal_derivative_self, single_layer_cross, single_layer_self,
    OrderTables,
};
use crate::quadrature::QuadGrid;

/// Nodal densities `φ^ℓ_{n,j}` for all orders.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySet {
    pub phi1: Vec<DVector<f64>>,
    pub phi2: Vec<DVector<f64>>,
}

impl DensitySet {
    pub fn zeros(orders: usize, len: usize) -> Self {
        Self {
            phi1: vec![DVector::zeros(len); orders],
            phi2: vec![DVector::zeros(len); orders],
        }
    }

    pub fn orders(&self) -> usize {
        self.phi1.len()
    }

    /// Writes `(n, j, φ¹, φ²)` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["n", "j", "phi1", "phi2"])?;
        for (n, (p1, p2)) in self.phi1.iter().zip(&self.phi2).enumerate() {
            for j in 0..p1.len() {
                writer.write_record([n.to_string(), j.to_string(), fmt_f64(p1[j]), fmt_f64(p2[j])])?;
            }
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Operators that only depend on the outer curve; computed once per run.
#[derive(Debug, Clone)]
pub struct OuterOperators {
    pub curve: NodalCurve,
    /// `R∘H₁ + H₂/(2M)` on `Γ₂ × Γ₂`.
    pub h22: OrderTables,
    /// `R∘Q₁ + Q₂/(2M)` on `Γ₂ × Γ₂`.
    pub q22: OrderTables,
    /// `1/|x₂′(s_i)|`.
    pub jump: DVector<f64>,
}

impl OuterOperators {
    pub fn new(fund: &FundTable, grid: &QuadGrid, outer: &Curve) -> Result<Self> {
        let curve = outer.discretize(grid.m())?;
        Self::from_nodal(fund, grid, curve)
    }

    pub fn from_nodal(fund: &FundTable, grid: &QuadGrid, curve: NodalCurve) -> Result<Self> {
        let h22 = single_layer_self(fund, grid, &curve)?;
        let q22 = normal_derivative_self(fund, grid, &curve)?;
        let jump = DVector::from_iterator(curve.len(), curve.samples.iter().map(|c| 1.0 / c.speed));
        Ok(Self {
            curve,
            h22,
            q22,
            jump,
        })
    }
}

/// Operators involving the inner curve; recomputed whenever it moves.
#[derive(Debug, Clone)]
pub struct InnerOperators {
    pub curve: NodalCurve,
    pub h11: OrderTables,
    /// Targets on `Γ₁`, sources on `Γ₂`.
    pub h12: OrderTables,
    /// Targets on `Γ₂`, sources on `Γ₁`.
    pub h21: OrderTables,
    pub q21: OrderTables,
}

impl InnerOperators {
    pub fn new(fund: &FundTable, grid: &QuadGrid, curve: NodalCurve, outer: &OuterOperators) -> Result<Self> {
        check_nested(&curve, &outer.curve)?;
        Ok(Self {
            h11: single_layer_self(fund, grid, &curve)?,
            h12: single_layer_cross(fund, grid, &curve, &outer.curve)?,
            h21: single_layer_cross(fund, grid, &outer.curve, &curve)?,
            q21: normal_derivative_cross(fund, grid, &outer.curve, &curve)?,
            curve,
        })
    }
}

/// Requires every inner node to lie strictly inside the outer polygon.
fn check_nested(inner: &NodalCurve, outer: &NodalCurve) -> Result<()> {
    if let Some(bad) = inner.samples.iter().find(|c| !outer.encloses(c.point)) {
        return Err(Error::Geometry(format!(
            "inner curve point ({:.6}, {:.6}) is not inside the outer curve",
            bad.point.x, bad.point.y
        )));
    }
    Ok(())
}

/// A 2×2 block operator family `B[k]`, `k = 0..N`, acting on `(φ¹, φ²)`,
/// plus diagonal terms added to the diagonal blocks at every order.
pub(crate) struct BlockFamily<'a> {
    pub blocks: [[&'a OrderTables; 2]; 2],
    pub diag: [Option<&'a DVector<f64>>; 2],
}

impl BlockFamily<'_> {
    fn len(&self) -> usize {
        self.blocks[0][0][0].nrows()
    }

    /// Applies `B[k]` to `(φ¹, φ²)`, accumulating into `(top, bottom)`.
    pub fn apply_add(&self, k: usize, phi1: &DVector<f64>, phi2: &DVector<f64>, out: [&mut DVector<f64>; 2]) {
        for (row, target) in out.into_iter().enumerate() {
            target.gemv(1.0, &self.blocks[row][0][k], phi1, 1.0);
            target.gemv(1.0, &self.blocks[row][1][k], phi2, 1.0);
            if let Some(d) = self.diag[row] {
                let phi = if row == 0 { phi1 } else { phi2 };
                target.zip_apply(&d.component_mul(phi), |t, v| *t += v);
            }
        }
    }

    /// Dense `B[0]` including the diagonal terms.
    pub fn lhs(&self) -> DMatrix<f64> {
        let len = self.len();
        let mut m = DMatrix::zeros(2 * len, 2 * len);
        for r in 0..2 {
            for c in 0..2 {
                m.view_mut((r * len, c * len), (len, len))
                    .copy_from(&self.blocks[r][c][0]);
            }
            if let Some(d) = self.diag[r] {
                for i in 0..len {
                    m[(r * len + i, r * len + i)] += d[i];
                }
            }
        }
        m
    }
}

/// Dense system matrix and its LU factorization.
#[derive(Debug, Clone)]
pub struct FieldMatrix {
    pub matrix: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl FieldMatrix {
    pub(crate) fn factor(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("system matrix has non-finite entries".into()));
        }
        let lu = matrix.clone().lu();
        if !lu.is_invertible() {
            let cond = condition_number(&matrix);
            return Err(Error::Singular(format!(
                "boundary system is singular (condition estimate {cond:e})"
            )));
        }
        Ok(Self { matrix, lu })
    }

    /// 2-norm condition number from the singular values.
    pub fn condition_number(&self) -> f64 {
        condition_number(&self.matrix)
    }

    fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu
            .solve(rhs)
            .ok_or_else(|| Error::Singular("LU solve failed".into()))
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `Σ_{m≤n} B[n−m] φ_m = rhs_n` for `n = 0..N` in increasing order.
pub(crate) fn solve_block_sequence(
    family: &BlockFamily,
    matrix: &FieldMatrix,
    rhs: &[[DVector<f64>; 2]],
) -> Result<DensitySet> {
    let len = family.len();
    let mut dens = DensitySet {
        phi1: Vec::with_capacity(rhs.len()),
        phi2: Vec::with_capacity(rhs.len()),
    };
    for (n, [top, bottom]) in rhs.iter().enumerate() {
        if top.iter().chain(bottom.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("right-hand side of order {n}")));
        }
        let mut history = [DVector::zeros(len), DVector::zeros(len)];
        for m in 0..n {
            let [t, b] = &mut history;
            family.apply_add(n - m, &dens.phi1[m], &dens.phi2[m], [t, b]);
        }
        let mut full = DVector::zeros(2 * len);
        full.rows_mut(0, len).copy_from(&(top - &history[0]));
        full.rows_mut(len, len).copy_from(&(bottom - &history[1]));
        let sol = matrix.solve(&full)?;
        dens.phi1.push(sol.rows(0, len).into_owned());
        dens.phi2.push(sol.rows(len, len).into_owned());
    }
    Ok(dens)
}

/// Dirichlet rows on `Γ₁`, Neumann rows on `Γ₂`.
pub(crate) fn field_family<'a>(inner: &'a InnerOperators, outer: &'a OuterOperators) -> BlockFamily<'a> {
    BlockFamily {
        blocks: [[&inner.h11, &inner.h12], [&inner.q21, &outer.q22]],
        diag: [None, Some(&outer.jump)],
    }
}

/// Assembles and factors the `4M × 4M` mixed-condition system.
pub fn assemble_field(inner: &InnerOperators, outer: &OuterOperators) -> Result<FieldMatrix> {
    FieldMatrix::factor(field_family(inner, outer).lhs())
}

/// Densities for zero Dirichlet data on `Γ₁` and fluxes `gₙ` on `Γ₂`.
pub fn solve_field_sequence(
    matrix: &FieldMatrix,
    inner: &InnerOperators,
    outer: &OuterOperators,
    g: &[DVector<f64>],
) -> Result<DensitySet> {
    let len = outer.curve.len();
    if let Some(bad) = g.iter().find(|v| v.len() != len) {
        return Err(Error::Shape {
            expected: len,
            got: bad.len(),
        });
    }
    let rhs: Vec<[DVector<f64>; 2]> = g.iter().map(|gn| [DVector::zeros(len), gn.clone()]).collect();
    solve_block_sequence(&field_family(inner, outer), matrix, &rhs)
}

/// Everything needed to solve the field system on a fixed pair of curves.
#[derive(Debug, Clone)]
pub struct FieldSystem {
    pub fund: FundTable,
    pub grid: QuadGrid,
    pub outer: OuterOperators,
    pub inner: InnerOperators,
    pub matrix: FieldMatrix,
}

impl FieldSystem {
    pub fn new(fund: FundTable, m: usize, inner: &Curve, outer: &Curve) -> Result<Self> {
        let grid = QuadGrid::new(m)?;
        let outer = OuterOperators::new(&fund, &grid, outer)?;
        let inner = InnerOperators::new(&fund, &grid, inner.discretize(m)?, &outer)?;
        let matrix = assemble_field(&inner, &outer)?;
        Ok(Self {
            fund,
            grid,
            outer,
            inner,
            matrix,
        })
    }

    pub fn solve(&self, g: &[DVector<f64>]) -> Result<DensitySet> {
        solve_field_sequence(&self.matrix, &self.inner, &self.outer, g)
    }

    pub fn eval_potential(&self, densities: &DensitySet, x: Point, n: usize) -> Result<f64> {
        eval_potential(&self.fund, &self.inner.curve, &self.outer.curve, densities, x, n)
    }
}

/// `uₙ(x) = Σ_ℓ Σ_{m≤n} (1/2M) Σ_j φ^ℓ_{m,j} 2Φ_{n−m}(|x − x_ℓ(s_j)|)` for
/// `x` strictly between the curves.
pub fn eval_potential(
    fund: &FundTable,
    inner: &NodalCurve,
    outer: &NodalCurve,
    densities: &DensitySet,
    x: Point,
    n: usize,
) -> Result<f64> {
    if n >= densities.orders() || n > fund.n_max() {
        return Err(Error::Order {
            requested: n,
            max: densities.orders().min(fund.n_max() + 1).saturating_sub(1),
        });
    }
    let inside = outer.encloses(x) && !inner.encloses(x);
    if !inside || inner.min_node_distance(x) == 0.0 || outer.min_node_distance(x) == 0.0 {
        return Err(Error::EvaluationDomain { point: [x.x, x.y] });
    }
    let mut total = 0.0;
    for (curve, phis) in [(inner, &densities.phi1), (outer, &densities.phi2)] {
        let weight = 1.0 / curve.len() as f64;
        for (j, c) in curve.samples.iter().enumerate() {
            let vals = fund.phi_all((x - c.point).norm())?;
            for (m, phi) in phis.iter().enumerate().take(n + 1) {
                total += weight * phi[j] * 2.0 * vals.phi[n - m];
            }
        }
    }
    Ok(total)
}
