mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use common::escaped;
use plate_buckling::closed_forms::{explicit_bounds, zero_crossing_bounds};
use plate_buckling::dynamics::{classify_zone, Zone};
use plate_buckling::integrator::{chord_deflection, deflection, detect_events, Outcome};
use plate_buckling::{integrate, AsymptoticData, SolverConfig};

#[test]
fn eta8_run_has_ordered_events() {
    let traj = escaped(8.0);
    assert!(traj.max_energy_drift <= 1e-8);
    let ev = &traj.events;
    let (t0, th, tm) = (ev.t0().unwrap(), ev.t_half().unwrap(), ev.t_m().unwrap());
    assert!(th < t0 && tm < t0);
    let b = explicit_bounds(traj.asymptotics.as_ref().unwrap()).unwrap();
    assert!(t0 > b.t0_lower);
    assert!(th > b.t_half_lower);
}

#[test]
fn samples_increase_and_eta_decreases() {
    let traj = escaped(6.0);
    for w in traj.samples.windows(2) {
        assert!(w[1].t > w[0].t);
        assert!(w[1].eta < w[0].eta, "eta not decreasing at t = {}", w[1].t);
    }
}

#[test]
fn xi_dot_bounded_by_one_and_turns_with_eta() {
    let traj = escaped(8.0);
    for p in &traj.samples {
        assert!(p.xi_dot <= 1.0);
    }
    for w in traj.samples.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        if p.eta > 0.0 && q.eta > 0.0 {
            assert!(q.xi_dot <= p.xi_dot + 1e-15);
        }
        if p.eta < 0.0 && q.eta < 0.0 {
            assert!(q.xi_dot >= p.xi_dot - 1e-15);
        }
    }
}

#[test]
fn final_state_is_free_motion() {
    let cfg = SolverConfig::default();
    for eta in [1.4, 3.0, 12.0] {
        let traj = escaped(eta);
        let p = traj.last();
        assert!((p.speed() - 1.0).abs() <= cfg.escape_tol);
        let th = deflection(&traj).unwrap();
        assert!(th > -PI && th < -FRAC_PI_2, "eta {eta}: {th}");
        // Position-based slope over the last time unit.
        let chord = chord_deflection(&traj, 1.0).unwrap();
        assert!((chord - th).abs() < 1e-6, "{chord} vs {th}");
    }
}

#[test]
fn tightening_tolerance_moves_theta_within_estimate() {
    let a = AsymptoticData::new(0.0, 8.0);
    let theta_at = |rel: f64| {
        let cfg = SolverConfig {
            rel_tol: rel,
            abs_tol: rel * 1e-2,
            ..Default::default()
        };
        deflection(&integrate(&a, &cfg).unwrap()).unwrap()
    };
    let (t1, t2, t3) = (theta_at(1e-8), theta_at(1e-9), theta_at(1e-10));
    assert!((t3 - t2).abs() < (t2 - t1).abs().max(1e-13));
}

#[test]
fn nonpositive_levels_blow_up() {
    for eta in [-1.0, 0.0] {
        let traj = integrate(&AsymptoticData::new(0.0, eta), &SolverConfig::default()).unwrap();
        assert!(matches!(traj.outcome, Outcome::BlowUp | Outcome::NoEscape));
        assert!(deflection(&traj).is_err());
        // Without a positive level the particle never turns back.
        assert!(traj.samples.iter().all(|p| p.xi_dot >= 1.0 - 1e-12));
    }
}

#[test]
fn low_level_maximum_is_not_fabricated() {
    let traj = integrate(&AsymptoticData::new(0.0, 4.0), &SolverConfig::default()).unwrap();
    let ev = &traj.events;
    if let (Some(tm), Some(t0)) = (ev.t_m(), ev.t0()) {
        if tm < t0 {
            let before = traj.samples.iter().rfind(|p| p.t < tm).unwrap();
            assert!(before.xi_dot > 0.0);
        }
    }
    if let Some(tm) = ev.t_m() {
        let after = traj.samples.iter().find(|p| p.t > tm).unwrap();
        assert!(after.xi_dot <= 0.0);
    }
}

#[test]
fn recomputed_events_agree_with_dense_output() {
    let traj = escaped(8.0);
    let ev = detect_events(&traj);
    assert!((ev.t0().unwrap() - traj.events.t0().unwrap()).abs() < 1e-8);
    assert!((ev.t_half().unwrap() - traj.events.t_half().unwrap()).abs() < 1e-8);
    assert!((ev.t_m().unwrap() - traj.events.t_m().unwrap()).abs() < 1e-6);
}

#[test]
fn zero_crossing_state_respects_bounds() {
    for eta in [6.0, 8.0, 12.0, 30.0] {
        let traj = escaped(eta);
        let s = traj.events.t0.unwrap().state;
        let b = zero_crossing_bounds(eta).unwrap();
        assert!(s.xi < b.xi_upper && s.xi_dot < b.xi_dot_upper && s.eta_dot > b.eta_dot_lower);
        assert!(traj.events.t_m().unwrap() < traj.events.t0().unwrap());
    }
}

#[test]
fn samples_stay_out_of_forbidden_zone() {
    for eta in [1.35, 8.0] {
        let traj = escaped(eta);
        assert!(traj
            .samples
            .iter()
            .all(|p| classify_zone(p.xi, p.eta, 1e-9) == Zone::Allowed));
    }
}
