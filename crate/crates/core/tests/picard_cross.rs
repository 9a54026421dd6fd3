mod common;

use common::escaped;
use plate_buckling::closed_forms::{eta1, explicit_bounds};
use plate_buckling::integrator::integrate_from;
use plate_buckling::picard::{
    iterate_future, iterate_past, monotonicity_report, monotonicity_report_with, ode_residual,
    past_zone_bound_violation,
};
use plate_buckling::verify::compare_on_grid;
use plate_buckling::{AsymptoticData, SolverConfig};

fn handoff(a: &AsymptoticData) -> f64 {
    explicit_bounds(a).unwrap().t0_lower - 1.0
}

#[test]
fn past_limit_matches_integrator() {
    let a = AsymptoticData::new(0.0, 8.0);
    let run = iterate_past(&a, handoff(&a), 1e-3, 1e-10, 50).unwrap();
    assert!(run.converged);
    let traj = escaped(8.0);
    let (ex, ee) = compare_on_grid(run.limit_xi(), run.limit_eta(), &traj.samples);
    assert!(ex < 1e-6 && ee < 1e-6, "{ex:e} {ee:e}");
}

#[test]
fn twenty_iterates_stay_ordered() {
    let a = AsymptoticData::new(0.0, 8.0);
    // A negative tolerance never stops early, so all 20 iterates are formed.
    let run = iterate_past(&a, handoff(&a), 1e-3, -1.0, 20).unwrap();
    assert_eq!(run.iterates_xi.len(), 21);
    let rep = monotonicity_report_with(&run, 10.0 * 1e-10);
    assert!(rep.ordered, "{rep:?}");
    assert!(past_zone_bound_violation(&run, &a) <= 1e-12);
}

#[test]
fn first_eta_iterate_converges_at_second_order() {
    let a = AsymptoticData::new(0.0, 8.0);
    let errs: Vec<f64> = [4e-3, 2e-3, 1e-3, 5e-4]
        .iter()
        .map(|&h| {
            let run = iterate_past(&a, handoff(&a), h, 0.0, 1).unwrap();
            run.iterates_eta[1]
                .iter()
                .map(|(t, v)| (v - eta1(t, &a).unwrap()).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!((3.5..4.5).contains(&r), "{errs:?}");
    }
}

#[test]
fn defect_against_integrator_quarters_with_step() {
    let a = AsymptoticData::new(0.0, 8.0);
    let cfg = SolverConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..Default::default()
    };
    let traj = plate_buckling::integrate(&a, &cfg).unwrap();
    let errs: Vec<f64> = [8e-3, 4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&h| {
            let run = iterate_past(&a, handoff(&a), h, 1e-13, 100).unwrap();
            let (ex, ee) = compare_on_grid(run.limit_xi(), run.limit_eta(), &traj.samples);
            ex.max(ee)
        })
        .collect();
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!((3.5..4.5).contains(&r), "{errs:?}");
    }
}

#[test]
fn discrete_residual_within_second_order_bound() {
    let a = AsymptoticData::new(0.0, 8.0);
    for h in [0.08, 0.04, 0.02, 0.01] {
        let run = iterate_past(&a, handoff(&a), h, 1e-13, 100).unwrap();
        let (rx, re) = ode_residual(&run);
        // Trapezoid composition makes the second difference exact, so only
        // rounding of order 1e-16 / h^2 remains.
        assert!(rx.max(re) <= 1e-3 * h * h, "h {h}: {rx:e} {re:e}");
    }
}

#[test]
fn future_limit_matches_integrator_near_critical() {
    // A level whose zero crossing lies in the interaction region.
    let traj = escaped(1.4);
    let mut p0 = traj.events.t0.unwrap().state;
    p0.eta = 0.0;
    let t_max = p0.t + 10.0;
    let run = iterate_future(&p0, 0.1, t_max, 1e-3, 1e-11, 5000).unwrap();
    assert!(run.converged);
    assert!(run.iterates_xi.len() > 5, "potential should matter here");
    let rep = monotonicity_report(&run);
    assert!(rep.ordered, "{rep:?}");
    let reference = integrate_from(p0, t_max, &SolverConfig::default()).unwrap();
    let (ex, ee) = compare_on_grid(run.limit_xi(), run.limit_eta(), &reference.samples);
    assert!(ex < 1e-6 && ee < 1e-6, "{ex:e} {ee:e}");
}

#[test]
fn future_contraction_rate_tracks_epsilon() {
    let traj = escaped(1.4);
    let mut p0 = traj.events.t0.unwrap().state;
    p0.eta = 0.0;
    for eps in [0.1, 0.3] {
        let run = iterate_future(&p0, eps, p0.t + 10.0, 2e-3, 1e-12, 5000).unwrap();
        let h = &run.sup_diff_history;
        let n = h.len();
        let rate = (h[n - 2] / h[n - 12]).powf(0.1);
        assert!((rate - (1.0 - eps)).abs() < 0.05, "eps {eps}: rate {rate}");
    }
}
