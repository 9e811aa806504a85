//! Reconstruction of the inner curve from Cauchy data on the outer curve:
//! alternate a field solve on the current curve with a regularised radial
//! update from the linearised data equation.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::data_solver::{assemble_a, assemble_b, basis_matrix, build_system, Mode, TikhonovNorm};
use crate::error::{Error, Result};
use crate::field_solver::{assemble_field, solve_field_sequence, InnerOperators, OuterOperators};
use crate::fundseq::FundTable;
use crate::geometry::{Curve, RadialCurve};
use crate::kernels::frechet_tables;
use crate::quadrature::QuadGrid;
use crate::synthesis::CauchyData;

/// Number of update halvings tried before giving up on a step.
pub const MAX_HALVINGS: usize = 10;

/// Stop when the data misfit grows beyond this factor of the best seen.
pub const DIVERGENCE_FACTOR: f64 = 2.0;

/// Number of angles used by [`radial_error`].
pub const ERROR_GRID: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconConfig {
    pub kappa: f64,
    pub alpha: f64,
    pub n_max: usize,
    pub m: usize,
    /// Degree `J` of the radial trigonometric basis.
    pub degree: usize,
    pub r0: f64,
    pub lambda0: f64,
    pub lambda_decay: f64,
    pub mode: Mode,
    pub max_iters: usize,
    pub stop_tol: f64,
    pub tikhonov_norm: TikhonovNorm,
}

impl Default for ReconConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            alpha: 1.0,
            n_max: 10,
            m: 64,
            degree: 5,
            r0: 0.4,
            lambda0: 1e-4,
            lambda_decay: 0.9,
            mode: Mode::FinalStep,
            max_iters: 50,
            stop_tol: 1e-6,
            tikhonov_norm: TikhonovNorm::L2,
        }
    }
}

impl ReconConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(self.kappa > 0.0) {
            return bad(format!("kappa must be > 0, got {}", self.kappa));
        }
        if !(self.alpha > 0.0) {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if self.m < 4 {
            return bad(format!("M must be ≥ 4, got {}", self.m));
        }
        if self.degree >= self.m {
            return bad(format!("J = {} must be < M = {}", self.degree, self.m));
        }
        if !(self.r0 > 0.0) {
            return bad(format!("r0 must be > 0, got {}", self.r0));
        }
        if !(self.lambda0 > 0.0) || !self.lambda0.is_finite() {
            return bad(format!("lambda0 must be > 0, got {}", self.lambda0));
        }
        if !(self.lambda_decay > 0.0 && self.lambda_decay <= 1.0) {
            return bad(format!("lambda_decay must lie in (0, 1], got {}", self.lambda_decay));
        }
        if !(self.stop_tol >= 0.0) {
            return bad(format!("stop_tol must be ≥ 0, got {}", self.stop_tol));
        }
        Ok(())
    }

    /// `λ_k = λ₀ · decay^{k−1}` for `k ≥ 1`.
    pub fn lambda(&self, k: usize) -> f64 {
        self.lambda0 * self.lambda_decay.powi(k.saturating_sub(1) as i32)
    }
}

/// One pass of the iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub lambda: f64,
    /// RMS data misfit on the curve before this update.
    pub misfit_rms: f64,
    /// `‖q‖∞` of the update actually applied.
    pub update_inf: f64,
    pub halvings: usize,
    /// Errors of the updated curve against the truth, when known.
    pub error_inf: Option<f64>,
    pub error_rms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// The misfit grew; the best earlier curve is returned.
    Diverged,
    /// No damped update kept the curve admissible.
    Inadmissible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    /// The returned curve.
    pub curve: RadialCurve,
    /// The initial circle followed by every accepted iterate.
    pub snapshots: Vec<RadialCurve>,
    pub history: Vec<IterationRecord>,
    pub stop: StopReason,
    /// Index into `snapshots` of the returned curve.
    pub selected: usize,
}

impl Reconstruction {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }
}

/// `(max, rms)` of `r_rec(θ) − r_true(θ)` over [`ERROR_GRID`] polar angles.
pub fn radial_error(reconstructed: &Curve, truth: &Curve) -> Result<(f64, f64)> {
    let thetas: Vec<f64> = (0..ERROR_GRID).map(|i| 2.0 * PI * i as f64 / ERROR_GRID as f64).collect();
    let a = reconstructed.polar_radii(&thetas)?;
    let b = truth.polar_radii(&thetas)?;
    let (mut max, mut sq) = (0.0f64, 0.0);
    for (x, y) in a.iter().zip(&b) {
        let d = (x - y).abs();
        max = max.max(d);
        sq += d * d;
    }
    Ok((max, (sq / ERROR_GRID as f64).sqrt()))
}

fn admissible(curve: &Curve, m: usize, outer: &OuterOperators) -> bool {
    let Curve::Radial(radial) = curve else {
        return false;
    };
    let grid_ok = (0..2 * m).all(|k| radial.radius(k as f64 * PI / m as f64) > 0.0);
    grid_ok
        && curve
            .discretize(m)
            .map(|nodal| nodal.samples.iter().all(|s| outer.curve.encloses(s.point)))
            .unwrap_or(false)
}

/// Runs the iteration from the circle of radius `r₀` against Cauchy data
/// on `outer`.
pub fn reconstruct(config: &ReconConfig, outer: &Curve, data: &CauchyData, truth: Option<&Curve>) -> Result<Reconstruction> {
    config.validate()?;
    if data.m != config.m || data.n_max() != config.n_max {
        return Err(Error::Config(format!(
            "data has M = {}, N = {} but the configuration asks for M = {}, N = {}",
            data.m,
            data.n_max(),
            config.m,
            config.n_max
        )));
    }
    let m = config.m;
    let fund = FundTable::build(config.kappa, config.alpha, config.n_max)?;
    let grid = QuadGrid::new(m)?;
    let outer_ops = OuterOperators::new(&fund, &grid, outer)?;
    let basis = basis_matrix(&grid, config.degree);
    let f = data.f_vectors();
    let g = data.g_vectors();

    let mut coeffs = RadialCurve::circle(config.r0, config.degree);
    let mut snapshots = vec![coeffs.clone()];
    let mut history = Vec::new();
    let mut best: Option<(f64, usize)> = None;
    let mut stop = StopReason::MaxIterations;

    for k in 1..=config.max_iters {
        let curve = Curve::Radial(coeffs.clone());
        let inner_ops = InnerOperators::new(&fund, &grid, curve.discretize(m)?, &outer_ops)?;
        let matrix = assemble_field(&inner_ops, &outer_ops).map_err(|e| Error::Reconstruction {
            iteration: k,
            reason: e.to_string(),
        })?;
        let densities = solve_field_sequence(&matrix, &inner_ops, &outer_ops, &g)?;
        let frechet = frechet_tables(&fund, &grid, &outer_ops.curve, &inner_ops.curve)?;
        let orders: Vec<usize> = match config.mode {
            Mode::FinalStep => vec![config.n_max],
            Mode::MultiStep => (0..=config.n_max).collect(),
        };
        let blocks = orders
            .iter()
            .map(|&n| {
                Ok((
                    assemble_a(n, &densities, &frechet, &basis)?,
                    assemble_b(n, &densities, &inner_ops, &outer_ops, &f[n])?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let lambda = config.lambda(k);
        let system = build_system(config.mode, &blocks, lambda)?;
        let misfit = system.misfit_rms();

        let current = snapshots.len() - 1;
        match best {
            Some((best_misfit, _)) if misfit > DIVERGENCE_FACTOR * best_misfit => {
                log::warn!("misfit {misfit:.3e} exceeds {DIVERGENCE_FACTOR}× the best {best_misfit:.3e}; stopping at iteration {k}");
                stop = StopReason::Diverged;
                break;
            }
            Some((best_misfit, _)) if misfit >= best_misfit => {}
            _ => best = Some((misfit, current)),
        }

        let q = system.solve_with(config.tikhonov_norm)?;
        let mut step = q;
        let mut accepted = None;
        for halvings in 0..=MAX_HALVINGS {
            let candidate: Vec<f64> = coeffs.coeffs.iter().zip(step.iter()).map(|(c, d)| c + d).collect();
            let candidate = RadialCurve::from_coeffs(candidate)?;
            if admissible(&Curve::Radial(candidate.clone()), m, &outer_ops) {
                accepted = Some((candidate, halvings));
                break;
            }
            step *= 0.5;
        }
        let Some((next, halvings)) = accepted else {
            log::warn!("no admissible update at iteration {k}");
            stop = StopReason::Inadmissible;
            break;
        };
        let update_inf = step.amax();
        let (error_inf, error_rms) = match truth {
            Some(t) => {
                let (a, b) = radial_error(&Curve::Radial(next.clone()), t)?;
                (Some(a), Some(b))
            }
            None => (None, None),
        };
        log::info!("iteration {k}: λ = {lambda:.3e}, misfit = {misfit:.3e}, ‖q‖∞ = {update_inf:.3e}");
        history.push(IterationRecord {
            iter: k,
            lambda,
            misfit_rms: misfit,
            update_inf,
            halvings,
            error_inf,
            error_rms,
        });
        coeffs = next;
        snapshots.push(coeffs.clone());
        if update_inf < config.stop_tol {
            stop = StopReason::Converged;
            break;
        }
    }

    let selected = match stop {
        StopReason::Diverged => best.map(|(_, i)| i).unwrap_or(0),
        _ => snapshots.len() - 1,
    };
    Ok(Reconstruction {
        curve: snapshots[selected].clone(),
        snapshots,
        history,
        stop,
        selected,
    })
}

/// Radial coefficients of the update applied at each iteration, mainly for
/// diagnostics.
pub fn updates(recon: &Reconstruction) -> Vec<DVector<f64>> {
    recon
        .snapshots
        .windows(2)
        .map(|w| DVector::from_iterator(w[1].coeffs.len(), w[1].coeffs.iter().zip(&w[0].coeffs).map(|(a, b)| a - b)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_shape, ShapeParams};
    use crate::synthesis::synthesize;

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

    #[test]
    fn lambda_schedule() {
        let c = ReconConfig::default();
        assert_eq!(c.lambda(1), 1e-4);
        assert!((c.lambda(2) - 0.9e-4).abs() < 1e-20);
        assert!((c.lambda(4) - 1e-4 * 0.729).abs() < 1e-18);
    }

    #[test]
    fn radial_error_values() {
        let peanut = make_shape("peanut", &ShapeParams::default()).unwrap();
        assert_eq!(radial_error(&peanut, &peanut).unwrap(), (0.0, 0.0));
        let (a, b) = radial_error(&circle(0.5), &circle(0.4)).unwrap();
        assert!((a - 0.1).abs() < 1e-15 && (b - 0.1).abs() < 1e-15);
        let (a, _) = radial_error(&peanut, &circle(0.4)).unwrap();
        assert!((a - 0.15).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let ok = ReconConfig::default();
        assert!(ok.validate().is_ok());
        for broken in [
            ReconConfig { m: 3, ..ok.clone() },
            ReconConfig { degree: 64, ..ok.clone() },
            ReconConfig { r0: 0.0, ..ok.clone() },
            ReconConfig { lambda0: -1.0, ..ok.clone() },
        ] {
            assert!(matches!(broken.validate(), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn zero_iterations_returns_initial_circle() {
        let config = ReconConfig {
            m: 8,
            n_max: 1,
            degree: 2,
            max_iters: 0,
            ..Default::default()
        };
        let data = synthesize(&circle(0.5), &circle(1.0), 1.0, 1.0, 1, 8).unwrap();
        let rec = reconstruct(&config, &circle(1.0), &data, None).unwrap();
        assert_eq!(rec.curve, RadialCurve::circle(0.4, 2));
        assert!(rec.history.is_empty());
    }

    #[test]
    fn grid_mismatch_is_config_error() {
        let config = ReconConfig {
            m: 8,
            n_max: 2,
            degree: 2,
            ..Default::default()
        };
        let data = synthesize(&circle(0.5), &circle(1.0), 1.0, 1.0, 1, 8).unwrap();
        assert!(matches!(
            reconstruct(&config, &circle(1.0), &data, None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn start_at_truth_barely_moves() {
        let config = ReconConfig {
            m: 32,
            n_max: 3,
            degree: 3,
            r0: 0.5,
            max_iters: 1,
            ..Default::default()
        };
        let data = synthesize(&circle(0.5), &circle(1.0), 1.0, 1.0, 3, 32).unwrap();
        let rec = reconstruct(&config, &circle(1.0), &data, None).unwrap();
        assert!(rec.history[0].update_inf <= 1e-4, "{}", rec.history[0].update_inf);
    }

    #[test]
    fn circle_recovered_from_smaller_guess() {
        let config = ReconConfig {
            m: 32,
            n_max: 10,
            degree: 2,
            r0: 0.4,
            max_iters: 30,
            ..Default::default()
        };
        let data = synthesize(&circle(0.5), &circle(1.0), 1.0, 1.0, 10, 32).unwrap();
        let rec = reconstruct(&config, &circle(1.0), &data, Some(&circle(0.5))).unwrap();
        let (err, _) = radial_error(&Curve::Radial(rec.curve.clone()), &circle(0.5)).unwrap();
        assert!(err < 1e-3, "{err}");
    }
}
