use heatbie::data_solver::{assemble_a, assemble_b, basis_matrix, Mode};
use heatbie::field_solver::FieldSystem;
use heatbie::fundseq::FundTable;
use heatbie::geometry::{make_shape, Curve, RadialCurve, ShapeParams};
use heatbie::inversion::{reconstruct, ReconConfig};
use heatbie::kernels::frechet_tables;
use heatbie::laguerre::LaguerreSeq;
use heatbie::quadrature::QuadGrid;
use heatbie::synthesis::{add_noise, synthesize, synthesize_with_refinement, CauchyData};

fn unit_circle() -> Curve {
    make_shape("circle", &ShapeParams::default()).unwrap()
}

fn wobbly(degree: usize) -> RadialCurve {
    let mut coeffs = vec![0.0; 2 * degree + 1];
    coeffs[0] = 0.45;
    coeffs[2] = 0.05;
    coeffs[degree + 1] = 0.03;
    RadialCurve::from_coeffs(coeffs).unwrap()
}

#[test]
fn forward_refinement_does_not_change_data() {
    let truth = make_shape("peanut", &ShapeParams::default()).unwrap();
    let a = synthesize_with_refinement(&truth, &unit_circle(), 1.0, 1.0, 4, 32, 2).unwrap();
    let b = synthesize_with_refinement(&truth, &unit_circle(), 1.0, 1.0, 4, 32, 4).unwrap();
    let diff = a
        .g
        .coeffs
        .iter()
        .zip(&b.g.coeffs)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max);
    assert!(diff <= 1e-9, "{diff}");
}

#[test]
fn data_residual_vanishes_on_the_true_curve() {
    let (m, n_max, degree) = (64, 10, 2);
    let truth = wobbly(degree);
    let data = synthesize(&Curve::Radial(truth.clone()), &unit_circle(), 1.0, 1.0, n_max, m).unwrap();
    let fund = FundTable::build(1.0, 1.0, n_max).unwrap();
    let system = FieldSystem::new(fund, m, &Curve::Radial(truth), &unit_circle()).unwrap();
    let dens = system.solve(&data.g_vectors()).unwrap();
    let f = data.f_vectors();
    for (n, fn_) in f.iter().enumerate() {
        let b = assemble_b(n, &dens, &system.inner, &system.outer, fn_).unwrap();
        assert_eq!(b.len(), 2 * m);
        assert!(b.amax() <= 1e-6, "n = {n}: {}", b.amax());
    }
}

#[test]
fn first_update_from_the_truth_is_tiny() {
    let (m, n_max, degree) = (64, 10, 2);
    let truth = wobbly(degree);
    let data = synthesize(&Curve::Radial(truth.clone()), &unit_circle(), 1.0, 1.0, n_max, m).unwrap();
    // The iteration starts from a circle, so the consistent start needs circle data.
    let circle_truth = RadialCurve::circle(0.45, degree);
    let circle_data = synthesize(&Curve::Radial(circle_truth), &unit_circle(), 1.0, 1.0, n_max, m).unwrap();
    let config = ReconConfig {
        degree,
        r0: 0.45,
        max_iters: 1,
        ..Default::default()
    };
    let rec = reconstruct(&config, &unit_circle(), &circle_data, None).unwrap();
    assert!(rec.history[0].update_inf <= 1e-4, "{}", rec.history[0].update_inf);
    let far = reconstruct(&config, &unit_circle(), &data, None).unwrap();
    assert!(far.history[0].update_inf > 1e-3);
}

#[test]
fn constant_column_is_smooth_quadrature() {
    let (m, n_max, degree) = (16, 2, 3);
    let fund = FundTable::build(1.0, 1.0, n_max).unwrap();
    let inner = Curve::Radial(RadialCurve::circle(0.4, degree));
    let system = FieldSystem::new(fund.clone(), m, &inner, &unit_circle()).unwrap();
    let data = synthesize(&make_shape("peanut", &ShapeParams::default()).unwrap(), &unit_circle(), 1.0, 1.0, n_max, m).unwrap();
    let dens = system.solve(&data.g_vectors()).unwrap();
    let grid = QuadGrid::new(m).unwrap();
    let tables = frechet_tables(&fund, &grid, &system.outer.curve, &system.inner.curve).unwrap();
    let a = assemble_a(n_max, &dens, &tables, &basis_matrix(&grid, degree)).unwrap();
    assert_eq!(a.shape(), (2 * m, 2 * degree + 1));
    for i in 0..2 * m {
        let integrand: Vec<f64> = (0..2 * m)
            .map(|k| (0..=n_max).map(|j| dens.phi1[j][k] * tables[n_max - j][(i, k)]).sum())
            .collect();
        let expected = grid.integrate_smooth(&integrand).unwrap();
        assert!((a[(i, 0)] - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }
}

fn rotate_coeffs(c: &[f64], degree: usize, theta: f64) -> Vec<f64> {
    let mut out = c.to_vec();
    for j in 1..=degree {
        let (s, co) = (j as f64 * theta).sin_cos();
        let (a, b) = (c[j], c[degree + j]);
        out[j] = a * co - b * s;
        out[degree + j] = a * s + b * co;
    }
    out
}

#[test]
fn reconstruction_commutes_with_rotation() {
    let (m, n_max, degree, shift) = (16, 3, 2, 3);
    let truth = wobbly(degree);
    let data = synthesize(&Curve::Radial(truth), &unit_circle(), 1.0, 1.0, n_max, m).unwrap();
    let len = 2 * m;
    let rotate = |seq: &LaguerreSeq<Vec<f64>>| {
        let coeffs = seq
            .coeffs
            .iter()
            .map(|v| (0..len).map(|i| v[(i + len - shift) % len]).collect())
            .collect();
        LaguerreSeq::new(seq.kappa, coeffs).unwrap()
    };
    let rotated = CauchyData {
        f: rotate(&data.f),
        g: rotate(&data.g),
        ..data.clone()
    };
    let config = ReconConfig {
        m,
        n_max,
        degree,
        max_iters: 6,
        ..Default::default()
    };
    let a = reconstruct(&config, &unit_circle(), &data, None).unwrap();
    let b = reconstruct(&config, &unit_circle(), &rotated, None).unwrap();
    let theta = shift as f64 * std::f64::consts::PI / m as f64;
    let expected = rotate_coeffs(&a.curve.coeffs, degree, theta);
    let diff = expected
        .iter()
        .zip(&b.curve.coeffs)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-8, "{diff}");
}

#[test]
fn noisy_multi_step_stays_bounded() {
    let truth = make_shape("peanut", &ShapeParams::default()).unwrap();
    let exact = synthesize(&truth, &unit_circle(), 1.0, 1.0, 10, 64).unwrap();
    let data = add_noise(&exact, 0.03, 2024).unwrap();
    let config = ReconConfig {
        lambda0: 1e-3,
        mode: Mode::MultiStep,
        max_iters: 30,
        ..Default::default()
    };
    let rec = reconstruct(&config, &unit_circle(), &data, Some(&truth)).unwrap();
    // L² norm of the true radial function is below its maximum, 0.5.
    for snapshot in &rec.snapshots {
        let norm = snapshot.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!(norm <= 10.0 * 0.5, "{norm}");
    }
}
