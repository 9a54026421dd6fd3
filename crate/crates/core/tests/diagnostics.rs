mod common;

use common::escaped;
use plate_buckling::analysis::{
    convexity_g, empirical_delta0, gradient_flow_run, inflection_diagnostics, spectrum_along,
    GradientFlowState,
};
use plate_buckling::dynamics::{apply_symmetry, Symmetry};

#[test]
fn spectrum_signs_and_products_along_trajectories() {
    for eta in [1.4, 8.0] {
        let traj = escaped(eta);
        for (s, p) in spectrum_along(&traj).iter().zip(&traj.samples) {
            assert!(s.mu_plus > 0.0 && s.mu_minus < 0.0);
            let c = (4.0 * p.xi).exp();
            assert!((s.mu_plus * s.mu_minus / -c - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn real_root_decays_like_the_incoming_factor() {
    let traj = escaped(8.0);
    let spec = spectrum_along(&traj);
    let t_start = traj.first().t;
    // Fit ln lambda_real = ln C + rate * t over the first two time units.
    let pts: Vec<(f64, f64)> = spec
        .iter()
        .filter(|s| s.t <= t_start + 2.0)
        .map(|s| (s.t, s.lambda_real.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let rate = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((rate - 1.0).abs() < 1e-6, "{rate}");
    let c = (my - rate * mx).exp();
    // With xi1 = phi = xi the roots scale as e^{2 xi} / (eta + sqrt(eta^2 + 1)).
    let expected = 1.0 / (8.0 + 65f64.sqrt()).sqrt();
    assert!((c - expected).abs() < 1e-6, "{c}");
    for s in spec.iter().filter(|s| s.t <= t_start + 2.0) {
        assert!(s.lambda_real <= s.t.exp() * c * (1.0 + 1e-6));
    }
}

#[test]
fn spectrum_depends_only_on_positions() {
    let traj = escaped(3.0);
    let rev = apply_symmetry(&traj, Symmetry::TimeReverse);
    let a = spectrum_along(&traj);
    let mut b = spectrum_along(&rev);
    b.reverse();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.mu_plus, y.mu_plus);
        assert_eq!(x.mu_minus, y.mu_minus);
    }
}

#[test]
fn inflection_is_unique_and_below_the_incoming_level() {
    for eta in [1.4, 6.0, 8.0, 12.0] {
        let traj = escaped(eta);
        let r = inflection_diagnostics(&traj).unwrap();
        assert!((r.g_start - 1.0).abs() < 1e-6);
        assert_eq!(r.sign_changes, 1);
        assert!(r.eta_sim < eta);
        assert!(r.sign_pattern_ok && r.g_monotone, "{r:?}");
        let g_end = convexity_g(traj.last());
        assert!(g_end < 0.0);
    }
}

#[test]
fn flow_fixed_points_for_small_delta() {
    for mu0 in [-0.99, -0.8, -0.6, -0.3] {
        for delta in [1e-6, 1e-5, 1e-4] {
            let s = GradientFlowState::on_circle(mu0, delta, 0.1).unwrap();
            let r = gradient_flow_run(&s, 1e-10, 100_000).unwrap();
            let (mu, nu) = r.fixed_point;
            assert!(r.stayed_in_quadrant && r.grad_norm <= 1e-10);
            assert!(mu < 0.0 && nu < 0.0);
            assert!(mu > s.mu0 && nu < s.nu0, "mu0 {mu0}, delta {delta}");
        }
    }
}

#[test]
fn empirical_threshold_separates_behaviours() {
    let mu0 = -0.6;
    let d0 = empirical_delta0(mu0, 0.1, 1e-4).unwrap();
    assert!(d0 > 1e-3 * mu0.abs().powi(3));
    let below = GradientFlowState::on_circle(mu0, 0.9 * d0, 0.1).unwrap();
    assert!(gradient_flow_run(&below, 1e-10, 100_000).is_ok());
    let above = GradientFlowState::on_circle(mu0, 1.5 * d0, 0.1).unwrap();
    assert!(gradient_flow_run(&above, 1e-10, 100_000).is_err());
}
