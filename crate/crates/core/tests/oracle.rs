mod common;

use common::{rk4_deflection, rk4_final, THETA_ORACLE_ETA8};
use plate_buckling::integrator::deflection;
use plate_buckling::shooting::deflection_of;
use plate_buckling::{integrate, AsymptoticData, SolverConfig};

#[test]
fn fixed_step_reference_reproduces_frozen_value() {
    let th = rk4_deflection(&AsymptoticData::new(0.0, 8.0), -15.0, 40.0, 1e-4);
    assert!((th - THETA_ORACLE_ETA8).abs() < 1e-12, "{th}");
}

#[test]
fn adaptive_deflection_matches_oracle() {
    let traj = integrate(&AsymptoticData::new(0.0, 8.0), &SolverConfig::default()).unwrap();
    let th = deflection(&traj).unwrap();
    assert!((th - THETA_ORACLE_ETA8).abs() < 1e-6, "{th}");
}

#[test]
fn adaptive_matches_fixed_step_at_other_levels() {
    for eta in [2.0, 5.0, 20.0] {
        let a = AsymptoticData::new(0.0, eta);
        let ours = deflection_of(eta, 0.0, &SolverConfig::default())
            .unwrap()
            .theta()
            .unwrap();
        // Long enough to pass the interaction region at each level.
        let reference = rk4_deflection(&a, -15.0, 40.0, 5e-4);
        assert!(
            (ours - reference).abs() < 1e-6,
            "eta {eta}: {ours} vs {reference}"
        );
    }
}

#[test]
fn fixed_step_reference_conserves_energy() {
    let y = rk4_final(&AsymptoticData::new(0.0, 8.0), -15.0, 40.0, 1e-4);
    let two_e = y[1] * y[1] + y[3] * y[3] + y[2] * (2.0 * y[0]).exp();
    assert!((two_e - 1.0).abs() < 1e-12);
}
