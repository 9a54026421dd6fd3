use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;

use plate_buckling::analysis::{gradient_flow_run, linearization_spectrum, GradientFlowState};
use plate_buckling::closed_forms::{ln_cosh, xi0, xi_hat, AsymptoticData};
use plate_buckling::dynamics::{PhasePoint, Symmetry};
use plate_buckling::export::csv_float;
use plate_buckling::geometry::{pokhozaev_residual, theta_identities};
use plate_buckling::shooting::deflection_of;
use plate_buckling::SolverConfig;

fn state() -> impl Strategy<Value = PhasePoint> {
    (
        -5.0..5.0f64,
        -3.0..3.0f64,
        -10.0..10.0f64,
        -2.0..2.0f64,
        -2.0..2.0f64,
    )
        .prop_map(|(t, xi, eta, a, b)| PhasePoint::new(t, xi, eta, a, b))
}

proptest! {
    #[test]
    fn homologous_energy_scaling(p in state(), xi_h in -3.0..3.0f64) {
        let s = Symmetry::Homologous(xi_h);
        let q = s.apply(&p);
        let lhs = 2.0 * q.energy();
        let rhs = 2.0 * p.energy() * s.energy_factor();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn time_reverse_is_an_involution(p in state()) {
        let s = Symmetry::TimeReverse;
        prop_assert_eq!(s.apply(&s.apply(&p)), p);
        prop_assert_eq!(s.apply(&p).energy(), p.energy());
    }

    #[test]
    fn ln_cosh_matches_direct_formula(z in -20.0..20.0f64) {
        let direct = z.cosh().ln();
        prop_assert!((ln_cosh(z) - direct).abs() <= 1e-13 * direct.abs().max(1.0));
        prop_assert!(ln_cosh(z) >= 0.0);
    }

    #[test]
    fn spectrum_roots_have_opposite_signs(
        xi1 in -40.0..10.0f64, eta2 in -20.0..20.0f64, phi in -40.0..10.0f64,
    ) {
        let s = linearization_spectrum(xi1, eta2, phi);
        prop_assert!(s.mu_plus > 0.0 && s.mu_minus < 0.0);
        let c = (2.0 * phi + 2.0 * xi1).exp();
        prop_assert!((s.mu_plus * s.mu_minus / -c - 1.0).abs() <= 1e-12);
        // Each root satisfies the quadratic up to rounding.
        let b = eta2 * (2.0 * phi).exp();
        for mu in [s.mu_plus, s.mu_minus] {
            let scale = mu * mu + (2.0 * b * mu).abs() + c;
            prop_assert!((mu * mu + 2.0 * b * mu - c).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn small_delta_flow_stays_in_quadrant(
        angle in (PI + 0.05)..(1.5 * PI - 0.05), frac in 0.0..1.0f64, eps in 0.05..0.5f64,
    ) {
        let mu0 = angle.cos();
        let delta = frac * 1e-3 * mu0.abs().powi(3);
        let s = GradientFlowState::on_circle(mu0, delta, eps).unwrap();
        let r = gradient_flow_run(&s, 1e-10, 200_000).unwrap();
        prop_assert!(r.stayed_in_quadrant);
        prop_assert!(r.history.iter().all(|(m, n)| *m < 0.0 && *n < 0.0));
    }

    #[test]
    fn identities_satisfy_pokhozaev(theta in (-PI + 1e-6)..(-FRAC_PI_2 - 1e-6)) {
        let (k, a) = theta_identities(theta).unwrap();
        prop_assert!(pokhozaev_residual(k, a).abs() <= 1e-12 * 16.0 * PI * PI);
        prop_assert!(k > 2.0 * PI && k < 4.0 * PI);
        prop_assert!(a > 0.0 && a < 2f64.powf(1.5) * PI);
    }

    #[test]
    fn envelopes_are_ordered(t in -30.0..3.0f64, xi_in in -2.0..2.0f64, eta in 0.1..50.0f64) {
        let a = AsymptoticData::new(xi_in, eta);
        let (lo, hi) = (xi0(t, &a).unwrap(), xi_hat(t, &a).unwrap());
        // Far in the past both approach t + xi_in and the gap drops below one ulp.
        prop_assert!(lo <= hi + 4.0 * f64::EPSILON * hi.abs().max(1.0));
    }

    #[test]
    fn csv_floats_keep_twelve_digits(x in -1e12..1e12f64) {
        let y: f64 = csv_float(x).parse().unwrap();
        prop_assert!((y - x).abs() <= 5e-12 * x.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scattering_levels_deflect_into_range(eta in 1.31..40.0f64, xi_in in -2.0..2.0f64) {
        let out = deflection_of(eta, xi_in, &SolverConfig::default()).unwrap();
        let th = out.theta().unwrap();
        prop_assert!(th > -PI && th < -FRAC_PI_2);
    }

    #[test]
    fn deflection_decreases_with_level(eta in 1.31..20.0f64, ratio in 1.05..2.0f64) {
        let cfg = SolverConfig::default();
        let lo = deflection_of(eta, 0.0, &cfg).unwrap().theta().unwrap();
        let hi = deflection_of(eta * ratio, 0.0, &cfg).unwrap().theta().unwrap();
        // Evidence only: monotonicity is not a proven property of the map.
        prop_assert!(hi < lo);
    }
}
