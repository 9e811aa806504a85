//! Boundary kernels built from the fundamental sequence.
//!
//! * `H^{k,ℓ}ₙ(s,σ) = 2Φₙ(|x_k(s) − x_ℓ(σ)|)` (single layer),
//! * `Q^{k,ℓ}ₙ(s,σ) = 2 ∂Φₙ/∂ν(x_k(s))` (normal derivative at the target),
//! * `Dₙ(s,σ)`, the derivative of the single-layer trace on the outer curve
//!   with respect to a radial perturbation of the inner curve.
//!
//! Same-curve kernels are split as `K = K₁·ln((4/e) sin²((s−σ)/2)) + K₂`
//! with analytic diagonal values for `K₂`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fundseq::{FundTable, PolyValues};
use crate::geometry::{Curve, CurveSample, NodalCurve, Point};
use crate::quadrature::QuadGrid;
use crate::specfun::{bessel_set, EULER_GAMMA};

/// One `2M × 2M` matrix per Laguerre order.
pub type OrderTables = Vec<DMatrix<f64>>;

/// Which of the two boundary curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `Γ₁`, the curve to be reconstructed.
    Inner,
    /// `Γ₂`, where Cauchy data are given.
    Outer,
}

/// `ln((4/e) sin²(t/2))`.
#[inline]
pub fn log_weight(t: f64) -> f64 {
    let s = (0.5 * t).sin();
    (4.0 * s * s).ln() - 1.0
}

/// `h_{k,ℓ} = ((x − y)₁ x′₂ − (x − y)₂ x′₁)/|x − y|` with `x = x_k(s)`.
#[inline]
pub fn h_factor(x: &CurveSample, y: Point) -> f64 {
    let diff = x.point - y;
    (diff.x * x.d1.y - diff.y * x.d1.x) / diff.norm()
}

/// Scratch space for evaluating all orders of a kernel at one point pair.
struct PairScratch {
    polys: PolyValues,
}

impl PairScratch {
    fn new() -> Self {
        Self {
            polys: PolyValues::default(),
        }
    }
}

fn distance_checked(x: Point, y: Point) -> Result<f64> {
    let d = (x - y).norm();
    if !(d > 0.0) {
        return Err(Error::Singularity { distance: d });
    }
    Ok(d)
}

/// `H` for all orders at a pair of distinct points.
fn h_all(fund: &FundTable, x: Point, y: Point, scratch: &mut PairScratch, out: &mut [f64]) -> Result<()> {
    let d = distance_checked(x, y)?;
    let b = bessel_set(fund.gamma * d)?;
    fund.polys(d, &mut scratch.polys);
    let p = &scratch.polys;
    for (n, o) in out.iter_mut().enumerate() {
        *o = 2.0 * (b.k0 * p.v[n] + b.k1 * p.w[n]);
    }
    Ok(())
}

/// `(H₁, H₂)` for all orders at two nodes of the same curve, `t = s − σ`.
fn h_split_all(
    fund: &FundTable,
    x: &CurveSample,
    y: &CurveSample,
    t: f64,
    diagonal: bool,
    scratch: &mut PairScratch,
    h1: &mut [f64],
    h2: &mut [f64],
) -> Result<()> {
    if diagonal {
        let base = -2.0 * EULER_GAMMA - 1.0 - 2.0 * (0.5 * fund.gamma * x.speed).ln();
        for n in 0..h1.len() {
            h1[n] = -1.0;
            h2[n] = base + 2.0 * fund.coef(n, 1) / fund.gamma;
        }
        return Ok(());
    }
    let d = distance_checked(x.point, y.point)?;
    let b = bessel_set(fund.gamma * d)?;
    fund.polys(d, &mut scratch.polys);
    let p = &scratch.polys;
    let lw = log_weight(t);
    for n in 0..h1.len() {
        let full = 2.0 * (b.k0 * p.v[n] + b.k1 * p.w[n]);
        h1[n] = -b.i0 * p.v[n] + b.i1 * p.w[n];
        h2[n] = full - h1[n] * lw;
    }
    Ok(())
}

/// `Q` for all orders; the target `x` carries the normal.
fn q_all(fund: &FundTable, x: &CurveSample, y: Point, scratch: &mut PairScratch, out: &mut [f64]) -> Result<()> {
    let d = distance_checked(x.point, y)?;
    let b = bessel_set(fund.gamma * d)?;
    fund.polys(d, &mut scratch.polys);
    let p = &scratch.polys;
    let scale = -2.0 * h_factor(x, y) / x.speed;
    for (n, o) in out.iter_mut().enumerate() {
        *o = scale * (b.k1 * p.vt[n] + b.k0 * p.wt[n]);
    }
    Ok(())
}

/// `(Q₁, Q₂)` for all orders at two nodes of the same curve.
fn q_split_all(
    fund: &FundTable,
    x: &CurveSample,
    y: &CurveSample,
    t: f64,
    diagonal: bool,
    scratch: &mut PairScratch,
    q1: &mut [f64],
    q2: &mut [f64],
) -> Result<()> {
    if diagonal {
        let curvature = (x.d1.y * x.d2.x - x.d1.x * x.d2.y) / x.speed.powi(3);
        q1.fill(0.0);
        q2.fill(curvature);
        return Ok(());
    }
    let d = distance_checked(x.point, y.point)?;
    let b = bessel_set(fund.gamma * d)?;
    fund.polys(d, &mut scratch.polys);
    let p = &scratch.polys;
    let h = h_factor(x, y.point) / x.speed;
    let lw = log_weight(t);
    for n in 0..q1.len() {
        let full = -2.0 * h * (b.k1 * p.vt[n] + b.k0 * p.wt[n]);
        q1[n] = -h * (b.i1 * p.vt[n] - b.i0 * p.wt[n]);
        q2[n] = full - q1[n] * lw;
    }
    Ok(())
}

/// `D` for all orders: target `x` on the outer curve, source `y` on the
/// inner curve at parameter `σ` (radial direction `(cos σ, sin σ)`).
fn d_all(fund: &FundTable, x: Point, y: Point, sigma: f64, scratch: &mut PairScratch, out: &mut [f64]) -> Result<()> {
    let d = distance_checked(x, y)?;
    let b = bessel_set(fund.gamma * d)?;
    fund.polys(d, &mut scratch.polys);
    let p = &scratch.polys;
    let (sin, cos) = sigma.sin_cos();
    let diff = x - y;
    let scale = 2.0 * (diff.x * cos + diff.y * sin) / d;
    for (n, o) in out.iter_mut().enumerate() {
        *o = scale * (b.k1 * p.vt[n] + b.k0 * p.wt[n]);
    }
    Ok(())
}

fn new_tables(orders: usize, len: usize) -> OrderTables {
    vec![DMatrix::zeros(len, len); orders]
}

fn check_grid(grid: &QuadGrid, curves: &[&NodalCurve]) -> Result<()> {
    for c in curves {
        if c.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                got: c.len(),
            });
        }
    }
    Ok(())
}

/// Weighted same-curve single-layer tables `R_j(s_i) H₁ + H₂/(2M)`.
pub fn single_layer_self(fund: &FundTable, grid: &QuadGrid, curve: &NodalCurve) -> Result<OrderTables> {
    check_grid(grid, &[curve])?;
    let len = grid.len();
    let orders = fund.n_max() + 1;
    let mut tables = new_tables(orders, len);
    let (mut h1, mut h2) = (vec![0.0; orders], vec![0.0; orders]);
    let mut scratch = PairScratch::new();
    let inv = 1.0 / len as f64;
    for j in 0..len {
        for i in 0..len {
            let t = grid.nodes()[i] - grid.nodes()[j];
            h_split_all(fund, &curve.samples[i], &curve.samples[j], t, i == j, &mut scratch, &mut h1, &mut h2)?;
            let r = grid.weight(i, j);
            for n in 0..orders {
                tables[n][(i, j)] = r * h1[n] + inv * h2[n];
            }
        }
    }
    Ok(tables)
}

/// Weighted cross-curve single-layer tables `H/(2M)`, targets on `target`.
pub fn single_layer_cross(
    fund: &FundTable,
    grid: &QuadGrid,
    target: &NodalCurve,
    source: &NodalCurve,
) -> Result<OrderTables> {
    check_grid(grid, &[target, source])?;
    let len = grid.len();
    let orders = fund.n_max() + 1;
    let mut tables = new_tables(orders, len);
    let mut vals = vec![0.0; orders];
    let mut scratch = PairScratch::new();
    let inv = 1.0 / len as f64;
    for j in 0..len {
        for i in 0..len {
            h_all(fund, target.samples[i].point, source.samples[j].point, &mut scratch, &mut vals)
                .map_err(touching)?;
            for n in 0..orders {
                tables[n][(i, j)] = inv * vals[n];
            }
        }
    }
    Ok(tables)
}

/// Weighted same-curve normal-derivative tables `R_j(s_i) Q₁ + Q₂/(2M)`.
pub fn normal_derivative_self(fund: &FundTable, grid: &QuadGrid, curve: &NodalCurve) -> Result<OrderTables> {
    check_grid(grid, &[curve])?;
    let len = grid.len();
    let orders = fund.n_max() + 1;
    let mut tables = new_tables(orders, len);
    let (mut q1, mut q2) = (vec![0.0; orders], vec![0.0; orders]);
    let mut scratch = PairScratch::new();
    let inv = 1.0 / len as f64;
    for j in 0..len {
        for i in 0..len {
            let t = grid.nodes()[i] - grid.nodes()[j];
            q_split_all(fund, &curve.samples[i], &curve.samples[j], t, i == j, &mut scratch, &mut q1, &mut q2)?;
            let r = grid.weight(i, j);
            for n in 0..orders {
                tables[n][(i, j)] = r * q1[n] + inv * q2[n];
            }
        }
    }
    Ok(tables)
}

/// Weighted cross-curve normal-derivative tables `Q/(2M)`.
pub fn normal_derivative_cross(
    fund: &FundTable,
    grid: &QuadGrid,
    target: &NodalCurve,
    source: &NodalCurve,
) -> Result<OrderTables> {
    check_grid(grid, &[target, source])?;
    let len = grid.len();
    let orders = fund.n_max() + 1;
    let mut tables = new_tables(orders, len);
    let mut vals = vec![0.0; orders];
    let mut scratch = PairScratch::new();
    let inv = 1.0 / len as f64;
    for j in 0..len {
        for i in 0..len {
            q_all(fund, &target.samples[i], source.samples[j].point, &mut scratch, &mut vals)
                .map_err(touching)?;
            for n in 0..orders {
                tables[n][(i, j)] = inv * vals[n];
            }
        }
    }
    Ok(tables)
}

/// Unweighted Fréchet tables `Dₙ(s_i, s_k)`, rows on the outer curve.
pub fn frechet_tables(
    fund: &FundTable,
    grid: &QuadGrid,
    outer: &NodalCurve,
    inner: &NodalCurve,
) -> Result<OrderTables> {
    check_grid(grid, &[outer, inner])?;
    let len = grid.len();
    let orders = fund.n_max() + 1;
    let mut tables = new_tables(orders, len);
    let mut vals = vec![0.0; orders];
    let mut scratch = PairScratch::new();
    for k in 0..len {
        let sigma = grid.nodes()[k];
        for i in 0..len {
            d_all(fund, outer.samples[i].point, inner.samples[k].point, sigma, &mut scratch, &mut vals)
                .map_err(touching)?;
            for n in 0..orders {
                tables[n][(i, k)] = vals[n];
            }
        }
    }
    Ok(tables)
}

fn touching(e: Error) -> Error {
    match e {
        Error::Singularity { distance } => Error::Geometry(format!(
            "the two boundary curves touch (node distance {distance:e})"
        )),
        other => other,
    }
}

/// Pointwise kernel evaluation on a pair of parametrized curves.
#[derive(Debug, Clone)]
pub struct KernelContext {
    pub inner: Curve,
    pub outer: Curve,
    pub fund: FundTable,
    pub grid: QuadGrid,
}

impl KernelContext {
    pub fn new(inner: Curve, outer: Curve, fund: FundTable, m: usize) -> Result<Self> {
        Ok(Self {
            inner,
            outer,
            fund,
            grid: QuadGrid::new(m)?,
        })
    }

    fn curve(&self, which: Boundary) -> &Curve {
        match which {
            Boundary::Inner => &self.inner,
            Boundary::Outer => &self.outer,
        }
    }

    fn orders_buf(&self, n: usize) -> Result<Vec<f64>> {
        if n > self.fund.n_max() {
            return Err(Error::Order {
                requested: n,
                max: self.fund.n_max(),
            });
        }
        Ok(vec![0.0; self.fund.n_max() + 1])
    }

    /// `H^{k,ℓ}ₙ(s,σ)`; fails at coincident points.
    pub fn h(&self, k: Boundary, l: Boundary, n: usize, s: f64, sigma: f64) -> Result<f64> {
        let mut out = self.orders_buf(n)?;
        let x = self.curve(k).eval(s)?;
        let y = self.curve(l).eval(sigma)?;
        h_all(&self.fund, x.point, y.point, &mut PairScratch::new(), &mut out)?;
        Ok(out[n])
    }

    /// `(H₁, H₂)` of `H^{ℓ,ℓ}ₙ(s,σ)`, including the diagonal `s ≡ σ (mod 2π)`.
    pub fn h_split(&self, l: Boundary, n: usize, s: f64, sigma: f64) -> Result<(f64, f64)> {
        let (mut h1, mut h2) = (self.orders_buf(n)?, self.orders_buf(n)?);
        let x = self.curve(l).eval(s)?;
        let y = self.curve(l).eval(sigma)?;
        let t = s - sigma;
        let diagonal = same_parameter(s, sigma);
        h_split_all(&self.fund, &x, &y, t, diagonal, &mut PairScratch::new(), &mut h1, &mut h2)?;
        Ok((h1[n], h2[n]))
    }

    /// `Q^{k,ℓ}ₙ(s,σ)`; fails at coincident points.
    pub fn q(&self, k: Boundary, l: Boundary, n: usize, s: f64, sigma: f64) -> Result<f64> {
        let mut out = self.orders_buf(n)?;
        let x = self.curve(k).eval(s)?;
        let y = self.curve(l).eval(sigma)?;
        q_all(&self.fund, &x, y.point, &mut PairScratch::new(), &mut out).map_err(|e| {
            if k != l {
                touching(e)
            } else {
                e
            }
        })?;
        Ok(out[n])
    }

    /// `(Q₁, Q₂)` of `Q^{ℓ,ℓ}ₙ(s,σ)`, including the diagonal.
    pub fn q_split(&self, l: Boundary, n: usize, s: f64, sigma: f64) -> Result<(f64, f64)> {
        let (mut q1, mut q2) = (self.orders_buf(n)?, self.orders_buf(n)?);
        let x = self.curve(l).eval(s)?;
        let y = self.curve(l).eval(sigma)?;
        let diagonal = same_parameter(s, sigma);
        q_split_all(&self.fund, &x, &y, s - sigma, diagonal, &mut PairScratch::new(), &mut q1, &mut q2)?;
        Ok((q1[n], q2[n]))
    }

    /// `Dₙ(s,σ)` between the outer curve at `s` and the inner curve at `σ`.
    pub fn d(&self, n: usize, s: f64, sigma: f64) -> Result<f64> {
        let mut out = self.orders_buf(n)?;
        let x = self.outer.eval(s)?;
        let y = self.inner.eval(sigma)?;
        d_all(&self.fund, x.point, y.point, sigma, &mut PairScratch::new(), &mut out).map_err(touching)?;
        Ok(out[n])
    }
}

fn same_parameter(s: f64, sigma: f64) -> bool {
    let t = (s - sigma).rem_euclid(2.0 * PI);
    t == 0.0 || (2.0 * PI - t) == 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_shape, ShapeParams};
    use crate::specfun::{bessel_k, Order};

    fn circle(radius: f64) -> Curve {
        make_shape(
            "circle",
            &ShapeParams {
                radius,
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn annulus_ctx(n: usize) -> KernelContext {
        KernelContext::new(circle(0.5), circle(1.0), FundTable::build(1.0, 1.0, n).unwrap(), 8).unwrap()
    }

    #[test]
    fn h_cross_value() {
        let ctx = annulus_ctx(2);
        let got = ctx.h(Boundary::Outer, Boundary::Inner, 0, 0.0, 0.0).unwrap();
        let expected = 2.0 * bessel_k(Order::Zero, 0.5).unwrap();
        assert!((got - expected).abs() < 1e-14);
    }

    #[test]
    fn h_symmetry_and_coincidence() {
        let ctx = annulus_ctx(2);
        let a = ctx.h(Boundary::Inner, Boundary::Inner, 1, 0.3, 1.9).unwrap();
        let b = ctx.h(Boundary::Inner, Boundary::Inner, 1, 1.9, 0.3).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            ctx.h(Boundary::Inner, Boundary::Inner, 0, 0.4, 0.4),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn h_diagonal_on_unit_circle() {
        let ctx = annulus_ctx(1);
        let (h1, h2) = ctx.h_split(Boundary::Outer, 0, 1.0, 1.0).unwrap();
        assert_eq!(h1, -1.0);
        assert!((h2 - (-2.0 * EULER_GAMMA - 1.0 + 2.0 * 2f64.ln())).abs() < 1e-14);
        assert!((h2 + 0.768_137).abs() < 1e-6);
    }

    #[test]
    fn splits_reconstruct_kernels() {
        let ctx = annulus_ctx(3);
        for n in 0..=3 {
            let (s, sigma) = (1.1, 0.8);
            let lw = log_weight(s - sigma);
            let (h1, h2) = ctx.h_split(Boundary::Inner, n, s, sigma).unwrap();
            let h = ctx.h(Boundary::Inner, Boundary::Inner, n, s, sigma).unwrap();
            assert!((h1 * lw + h2 - h).abs() < 1e-12);
            let (q1, q2) = ctx.q_split(Boundary::Outer, n, s, sigma).unwrap();
            let q = ctx.q(Boundary::Outer, Boundary::Outer, n, s, sigma).unwrap();
            assert!((q1 * lw + q2 - q).abs() < 1e-12);
        }
    }

    #[test]
    fn q_diagonal_on_unit_circle() {
        let ctx = annulus_ctx(2);
        for n in 0..=2 {
            let (q1, q2) = ctx.q_split(Boundary::Outer, n, 0.7, 0.7).unwrap();
            assert_eq!(q1, 0.0);
            assert!((q2 + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn q_split_continuous_at_diagonal() {
        let shape = make_shape("apple", &ShapeParams::default()).unwrap();
        let ctx = KernelContext::new(shape.clone(), shape, FundTable::build(1.0, 1.0, 2).unwrap(), 8).unwrap();
        for n in 0..=2 {
            let (_, diag) = ctx.q_split(Boundary::Inner, n, 0.9, 0.9).unwrap();
            let (_, near) = ctx.q_split(Boundary::Inner, n, 0.9, 0.9 + 1e-4).unwrap();
            assert!((diag - near).abs() < 1e-3, "n = {n}: {diag} vs {near}");
            let (_, hd) = ctx.h_split(Boundary::Inner, n, 0.9, 0.9).unwrap();
            let (_, hn) = ctx.h_split(Boundary::Inner, n, 0.9, 0.9 + 1e-4).unwrap();
            assert!((hd - hn).abs() < 1e-3, "n = {n}: {hd} vs {hn}");
        }
    }

    #[test]
    fn h_factor_concentric() {
        let outer = circle(1.0).eval(0.0).unwrap();
        let inner = circle(0.5).eval(0.0).unwrap();
        assert!((h_factor(&outer, inner.point) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn q_is_normal_derivative_of_h() {
        let shape = make_shape("peanut", &ShapeParams::default()).unwrap();
        let outer = circle(1.0);
        let ctx = KernelContext::new(shape.clone(), outer.clone(), FundTable::build(1.3, 0.8, 3).unwrap(), 8).unwrap();
        let x = outer.eval(0.4).unwrap();
        let y = shape.eval(2.2).unwrap().point;
        let eps = 1e-6;
        for n in 0..=3 {
            let mut plus = vec![0.0; 4];
            let mut minus = vec![0.0; 4];
            let mut scratch = PairScratch::new();
            h_all(&ctx.fund, x.point + eps * x.normal, y, &mut scratch, &mut plus).unwrap();
            h_all(&ctx.fund, x.point - eps * x.normal, y, &mut scratch, &mut minus).unwrap();
            let fd = (plus[n] - minus[n]) / (2.0 * eps);
            let q = ctx.q(Boundary::Outer, Boundary::Inner, n, 0.4, 2.2).unwrap();
            assert!((fd - q).abs() < 1e-7 * q.abs().max(1.0), "n = {n}: {fd} vs {q}");
        }
    }

    #[test]
    fn d_concentric_value() {
        let ctx = annulus_ctx(1);
        let got = ctx.d(0, 0.0, 0.0).unwrap();
        let expected = 2.0 * bessel_k(Order::One, 0.5).unwrap();
        assert!((got - expected).abs() < 1e-13);
    }

    #[test]
    fn biperiodic() {
        let ctx = annulus_ctx(2);
        let tau = 2.0 * PI;
        let a = ctx.h_split(Boundary::Inner, 2, 0.3, 1.7).unwrap();
        let b = ctx.h_split(Boundary::Inner, 2, 0.3 + tau, 1.7 + tau).unwrap();
        assert!((a.0 - b.0).abs() < 1e-13 && (a.1 - b.1).abs() < 1e-12);
        let a = ctx.q_split(Boundary::Outer, 2, 0.3, 0.3).unwrap();
        let b = ctx.q_split(Boundary::Outer, 2, 0.3 + tau, 0.3 + tau).unwrap();
        assert!((a.0 - b.0).abs() < 1e-13 && (a.1 - b.1).abs() < 1e-12);
    }

    #[test]
    fn tables_have_grid_shape() {
        let fund = FundTable::build(1.0, 1.0, 2).unwrap();
        let grid = QuadGrid::new(8).unwrap();
        let inner = circle(0.5).discretize(8).unwrap();
        let outer = circle(1.0).discretize(8).unwrap();
        let t = single_layer_self(&fund, &grid, &inner).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[0].shape(), (16, 16));
        let d = frechet_tables(&fund, &grid, &outer, &inner).unwrap();
        assert!(d.iter().all(|m| m.iter().all(|v| v.is_finite())));
        let bad = circle(1.0).discretize(4).unwrap();
        assert!(single_layer_cross(&fund, &grid, &bad, &inner).is_err());
    }
}
