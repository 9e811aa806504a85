//! Synthetic Cauchy data: a forward Dirichlet–Dirichlet solve on a refined
//! grid, flux extraction through the jump relation, and relative L² noise.

use std::path::Path;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_solver::{
    field_family, solve_block_sequence, BlockFamily, DensitySet, FieldMatrix, InnerOperators,
    OuterOperators,
};
use crate::fundseq::FundTable;
use crate::geometry::{fmt_f64, Curve};
use crate::laguerre::LaguerreSeq;
use crate::quadrature::QuadGrid;

/// Temperature `f` and flux `g` on the outer-curve nodes for every order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyData {
    pub alpha: f64,
    pub m: usize,
    pub f: LaguerreSeq<Vec<f64>>,
    pub g: LaguerreSeq<Vec<f64>>,
    pub delta: f64,
    pub seed: u64,
}

impl CauchyData {
    pub fn kappa(&self) -> f64 {
        self.f.kappa
    }

    pub fn n_max(&self) -> usize {
        self.f.n_max()
    }

    pub fn f_vectors(&self) -> Vec<DVector<f64>> {
        self.f.coeffs.iter().map(|v| DVector::from_column_slice(v)).collect()
    }

    pub fn g_vectors(&self) -> Vec<DVector<f64>> {
        self.g.coeffs.iter().map(|v| DVector::from_column_slice(v)).collect()
    }

    /// Writes `(n, i, f, g)` rows with round-trip precision.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["n", "i", "f", "g"])?;
        for (n, (f, g)) in self.f.coeffs.iter().zip(&self.g.coeffs).enumerate() {
            for (i, (fi, gi)) in f.iter().zip(g).enumerate() {
                writer.write_record([n.to_string(), i.to_string(), fmt_f64(*fi), fmt_f64(*gi)])?;
            }
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads data written by [`CauchyData::write_csv`], checking that it
    /// covers exactly orders `0..=n_max` on `2M` nodes.
    pub fn read_csv(path: &Path, kappa: f64, alpha: f64, m: usize, n_max: usize, delta: f64, seed: u64) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            n: usize,
            i: usize,
            f: f64,
            g: f64,
        }
        let len = 2 * m;
        let mut f = vec![vec![f64::NAN; len]; n_max + 1];
        let mut g = vec![vec![f64::NAN; len]; n_max + 1];
        let mut rows = 0;
        let mut reader = csv::Reader::from_path(path)?;
        for row in reader.deserialize() {
            let row: Row = row?;
            if row.n > n_max || row.i >= len {
                return Err(Error::Config(format!(
                    "data row (n = {}, i = {}) does not fit N = {n_max}, M = {m}",
                    row.n, row.i
                )));
            }
            f[row.n][row.i] = row.f;
            g[row.n][row.i] = row.g;
            rows += 1;
        }
        let expected = (n_max + 1) * len;
        let complete = f.iter().chain(&g).all(|v| v.iter().all(|x| !x.is_nan()));
        if rows != expected || !complete {
            return Err(Error::Config(format!(
                "data file has {rows} rows; N = {n_max}, M = {m} needs {expected} distinct (n, i) rows"
            )));
        }
        Ok(Self {
            alpha,
            m,
            f: LaguerreSeq::new(kappa, f)?,
            g: LaguerreSeq::new(kappa, g)?,
            delta,
            seed,
        })
    }
}

/// `f₁ₙ = 0` and `f₂ₙ = e(2 + κn(κ(n−1) − 4)) / (4(κ+1)^{n+3})`.
pub fn default_boundary_data(kappa: f64, n_max: usize) -> (Vec<f64>, Vec<f64>) {
    let f1 = vec![0.0; n_max + 1];
    let f2 = (0..=n_max)
        .map(|n| {
            let nf = n as f64;
            std::f64::consts::E * (2.0 + kappa * nf * (kappa * (nf - 1.0) - 4.0))
                / (4.0 * (kappa + 1.0).powi(n as i32 + 3))
        })
        .collect();
    (f1, f2)
}

/// Densities of the Dirichlet–Dirichlet problem and the operators used to
/// obtain them, on the forward grid.
#[derive(Debug, Clone)]
pub struct DirectSolution {
    pub fund: FundTable,
    pub grid: QuadGrid,
    pub outer: OuterOperators,
    pub inner: InnerOperators,
    pub densities: DensitySet,
}

fn dirichlet_family<'a>(inner: &'a InnerOperators, outer: &'a OuterOperators) -> BlockFamily<'a> {
    BlockFamily {
        blocks: [[&inner.h11, &inner.h12], [&inner.h21, &outer.h22]],
        diag: [None, None],
    }
}

/// Solves `uₙ = f₁ₙ` on `Γ₁`, `uₙ = f₂ₙ` on `Γ₂` for every order, with
/// nodal data given on the `2·m_fwd` forward nodes.
pub fn solve_direct(
    inner: &Curve,
    outer: &Curve,
    f1: &[DVector<f64>],
    f2: &[DVector<f64>],
    kappa: f64,
    alpha: f64,
    m_fwd: usize,
) -> Result<DirectSolution> {
    if f1.len() != f2.len() || f1.is_empty() {
        return Err(Error::Shape {
            expected: f1.len(),
            got: f2.len(),
        });
    }
    let len = 2 * m_fwd;
    if let Some(bad) = f1.iter().chain(f2).find(|v| v.len() != len) {
        return Err(Error::Shape {
            expected: len,
            got: bad.len(),
        });
    }
    let fund = FundTable::build(kappa, alpha, f1.len() - 1)?;
    let grid = QuadGrid::new(m_fwd)?;
    let outer_ops = OuterOperators::new(&fund, &grid, outer)?;
    let inner_ops = InnerOperators::new(&fund, &grid, inner.discretize(m_fwd)?, &outer_ops)?;
    let family = dirichlet_family(&inner_ops, &outer_ops);
    let matrix = FieldMatrix::factor(family.lhs()).map_err(|e| match e {
        Error::Singular(msg) => Error::Geometry(msg),
        other => other,
    })?;
    let rhs: Vec<[DVector<f64>; 2]> = f1.iter().zip(f2).map(|(a, b)| [a.clone(), b.clone()]).collect();
    let densities = solve_block_sequence(&family, &matrix, &rhs)?;
    Ok(DirectSolution {
        fund,
        grid,
        outer: outer_ops,
        inner: inner_ops,
        densities,
    })
}

/// Flux `gₙ` on the outer curve at the nodes of the coarse grid with
/// half-node-count `m`, which must divide the forward `M`.
pub fn extract_flux(solution: &DirectSolution, n: usize, m: usize) -> Result<DVector<f64>> {
    let m_fwd = solution.grid.m();
    if m == 0 || !m_fwd.is_multiple_of(m) {
        return Err(Error::Config(format!(
            "forward grid M = {m_fwd} is not a refinement of M = {m}"
        )));
    }
    let dens = &solution.densities;
    if n >= dens.orders() {
        return Err(Error::Order {
            requested: n,
            max: dens.orders() - 1,
        });
    }
    let family = field_family(&solution.inner, &solution.outer);
    let len = solution.grid.len();
    let mut unused = DVector::zeros(len);
    let mut flux = DVector::zeros(len);
    for k in 0..=n {
        family.apply_add(n - k, &dens.phi1[k], &dens.phi2[k], [&mut unused, &mut flux]);
    }
    let stride = m_fwd / m;
    Ok(DVector::from_iterator(2 * m, flux.iter().step_by(stride).copied()))
}

/// Exact-data recipe: default boundary functions, forward solve on
/// `2M` half-nodes, flux restricted to the inversion grid.
pub fn synthesize(inner: &Curve, outer: &Curve, kappa: f64, alpha: f64, n_max: usize, m: usize) -> Result<CauchyData> {
    synthesize_with_refinement(inner, outer, kappa, alpha, n_max, m, 2)
}

/// As [`synthesize`] with a forward grid `refinement` times finer.
pub fn synthesize_with_refinement(
    inner: &Curve,
    outer: &Curve,
    kappa: f64,
    alpha: f64,
    n_max: usize,
    m: usize,
    refinement: usize,
) -> Result<CauchyData> {
    let m_fwd = refinement * m;
    let (f1, f2) = default_boundary_data(kappa, n_max);
    let fine = 2 * m_fwd;
    let f1v: Vec<DVector<f64>> = f1.iter().map(|&v| DVector::from_element(fine, v)).collect();
    let f2v: Vec<DVector<f64>> = f2.iter().map(|&v| DVector::from_element(fine, v)).collect();
    let sol = solve_direct(inner, outer, &f1v, &f2v, kappa, alpha, m_fwd)?;
    let g = (0..=n_max)
        .map(|n| extract_flux(&sol, n, m).map(|v| v.as_slice().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let f = f2.iter().map(|&v| vec![v; 2 * m]).collect();
    Ok(CauchyData {
        alpha,
        m,
        f: LaguerreSeq::new(kappa, f)?,
        g: LaguerreSeq::new(kappa, g)?,
        delta: 0.0,
        seed: 0,
    })
}

fn perturb(values: &mut [f64], delta: f64, rng: &mut ChaCha8Rng) {
    let u: Vec<f64> = (0..values.len()).map(|_| StandardNormal.sample(rng)).collect();
    let norm_f = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_u = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_u == 0.0 {
        return;
    }
    let scale = delta * norm_f / norm_u;
    for (v, ui) in values.iter_mut().zip(&u) {
        *v += scale * ui;
    }
}

/// `f^δ = f + δ‖f‖₂/‖u‖₂ u` per order with independent standard-normal
/// vectors for `f` and `g`, drawn from a generator seeded by `seed`.
pub fn add_noise(data: &CauchyData, delta: f64, seed: u64) -> Result<CauchyData> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Parameter(format!("noise level must be ≥ 0, got {delta}")));
    }
    let mut out = data.clone();
    out.delta = delta;
    out.seed = seed;
    if delta == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (f, g) in out.f.coeffs.iter_mut().zip(out.g.coeffs.iter_mut()) {
        perturb(f, delta, &mut rng);
        perturb(g, delta, &mut rng);
    }
    Ok(out)
}
