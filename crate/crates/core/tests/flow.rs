use loewner::flow::{
    reparametrize, reverse_endpoint, reverse_endpoint_on_grid, solve_forward, solve_reverse,
    trace_curve, trace_point, DerivativeMode, SolverOptions,
};
use loewner::{Driver, DrivingFunction};
use num_complex::Complex64;

fn fixed_tip(y: f64) -> SolverOptions {
    SolverOptions {
        y_tip: Some(y),
        richardson: false,
        ..SolverOptions::default()
    }
}

#[test]
fn halving_tol_shrinks_the_error() {
    let d = Driver::sqrt_forward(1.0, 1.0).unwrap();
    let z = Complex64::new(0.0, 1e-2);
    let at = |tol: f64| {
        reverse_endpoint(&d, 1.0, z, &fixed_tip(1e-2).with_tol(tol))
            .unwrap()
            .h()
    };
    let reference = at(1e-3 / 64.0);
    let coarse = (at(1e-3) - reference).norm();
    let fine = (at(5e-4) - reference).norm();
    assert!(coarse / fine >= 1.5, "error ratio {}", coarse / fine);
}

#[test]
fn derivative_matches_finite_difference() {
    let d = Driver::sqrt_forward(1.5, 1.0).unwrap();
    let opts = SolverOptions::default();
    let y = 1e-2;
    let grid = solve_reverse(&d, 1.0, y, &opts).unwrap().grid();
    let z = Complex64::new(0.0, y);
    let h = 1e-6 * y;
    let at = |z: Complex64| reverse_endpoint_on_grid(&d, 1.0, z, &grid, &opts).unwrap();
    let fd = (at(z + h).h() - at(z - h).h()) / (2.0 * h);
    let exact = at(z).derivative();
    assert!(
        (fd - exact).norm() <= 1e-4 * exact.norm(),
        "fd {fd} vs {exact}"
    );
}

#[test]
fn quadrature_derivative_agrees() {
    for (sigma, family) in [(1.0, "forward"), (2.0, "backward")] {
        let d = match family {
            "forward" => Driver::sqrt_forward(sigma, 1.0).unwrap(),
            _ => Driver::sqrt_backward(sigma, 1.0).unwrap(),
        };
        let z = Complex64::new(0.0, 1e-3);
        let exact = reverse_endpoint(&d, 1.0, z, &SolverOptions::default()).unwrap();
        let quad = SolverOptions {
            derivative: DerivativeMode::IntegralQuadrature,
            ..SolverOptions::default()
        };
        let q = reverse_endpoint(&d, 1.0, z, &quad).unwrap();
        assert!((q.log_abs_deriv - exact.log_abs_deriv).abs() <= 1e-3 * exact.log_abs_deriv.abs());
        assert!((q.arg_deriv - exact.arg_deriv).abs() <= 1e-3 * exact.arg_deriv.abs().max(1.0));
    }
}

#[test]
fn reparametrized_time_solves_its_equation() {
    let d = Driver::random_walk(3.0, 1.0, 256, 7).unwrap();
    let opts = SolverOptions::default();
    let traj = solve_reverse(&d, 1.0, 1e-2, &opts).unwrap();
    let rep = reparametrize(&traj).unwrap();
    assert!(
        rep.max_theta_residual() < 10.0 * opts.tol,
        "{}",
        rep.max_theta_residual()
    );
    let last = rep.samples.last().unwrap();
    assert!((last.theta - 1.0).abs() < 1e-12);
}

#[test]
fn hydrodynamic_normalization() {
    // g_t(z) = z + 2t/z + b/z² + O(z⁻³) with b = 2∫λ = 4σt^{3/2}/3.
    let (sigma, t) = (1.0, 1.0);
    let d = Driver::sqrt_forward(sigma, t).unwrap();
    let b = 4.0 * sigma * t.powf(1.5) / 3.0;
    let opts = SolverOptions {
        forward_rtol: 1e-13,
        forward_atol: 1e-15,
        ..SolverOptions::default()
    };
    let mut errs = Vec::new();
    for r in [25.0, 50.0, 100.0] {
        let z = Complex64::new(0.3 * r, r);
        let g = solve_forward(&d, z, t, &opts).unwrap();
        let coeff = (g - z - 2.0 * t / z) * z * z;
        errs.push((coeff - b).norm());
        assert!((coeff - b).norm() < 10.0 / r, "r = {r}: {coeff}");
    }
    // The next term is O(z⁻³), so the coefficient error is O(1/|z|).
    assert!(
        errs[0] / errs[1] > 1.6 && errs[1] / errs[2] > 1.6,
        "{errs:?}"
    );
}

#[test]
fn trace_is_deterministic() {
    let d = Driver::random_walk(2.0, 1.0, 512, 3).unwrap();
    let times: Vec<f64> = (1..=16).map(|i| i as f64 / 16.0).collect();
    let a = trace_curve(&d, &times, &SolverOptions::default()).unwrap();
    let b = trace_curve(&d, &times, &SolverOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn scaling_covariance() {
    // λ(t) = σ√t is self-similar: γ(t) = √t·γ(1).
    let d = Driver::sqrt_forward(2.0, 1.0).unwrap();
    let opts = SolverOptions::default();
    let g1 = trace_point(&d, 1.0, &opts).unwrap().gamma;
    let g = trace_point(&d, 0.25, &opts).unwrap().gamma;
    assert!((g - 0.5 * g1).norm() < 1e-5, "{g} vs {}", 0.5 * g1);
}

#[test]
fn reflection_symmetry() {
    // λ ↦ −λ reflects the curve in the imaginary axis.
    let d = Driver::random_walk(2.5, 1.0, 128, 11).unwrap();
    let (t, v) = d.knots().unwrap();
    let mirrored: Vec<(f64, f64)> = t.iter().zip(v).map(|(&t, &v)| (t, -v)).collect();
    let m = Driver::piecewise_linear(&mirrored).unwrap();
    let opts = SolverOptions::default();
    let a = trace_point(&d, 0.7, &opts).unwrap().gamma;
    let b = trace_point(&m, 0.7, &opts).unwrap().gamma;
    assert!((a.re + b.re).abs() < 1e-12 && (a.im - b.im).abs() < 1e-12);
    assert!(d.horizon() == m.horizon());
}
