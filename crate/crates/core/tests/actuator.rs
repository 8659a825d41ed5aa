use usv_blf::actuator::*;
use usv_blf::linalg::{Mat3, Vec3};

fn paper_bounds() -> ActuatorBounds {
    ActuatorBounds::new(Vec3([4.0; 3]), Vec3([-3.5; 3])).unwrap()
}

fn state(zeta: Vec3, n: u32) -> ActuatorState {
    ActuatorState::new(zeta, Vec3([0.2; 3]), n).unwrap()
}

#[test]
fn q_switch_cases() {
    assert_eq!(q_switch(0.5), 1.0);
    assert_eq!(q_switch(0.0), 0.0);
    assert_eq!(q_switch(-3.0), 0.0);
}

#[test]
fn derivative_at_rest_passes_command_through() {
    let d = saturation_derivative(&state(Vec3::zeros(), 2), &paper_bounds(), Vec3([1.0; 3]));
    assert_eq!(d, Vec3([1.0; 3]));
}

#[test]
fn derivative_on_bounds_points_inward() {
    let b = paper_bounds();
    for tau_c in [-50.0, 0.0, 3.0, 100.0] {
        let d = saturation_derivative(&state(Vec3([4.0, -3.5, 0.0]), 2), &b, Vec3([tau_c; 3]));
        assert!((d[0] - (-0.2 * 4.0)).abs() < 1e-15);
        assert!(d[0] < 0.0);
        assert!((d[1] - 0.7).abs() < 1e-15);
        assert!(d[1] > 0.0);
    }
}

#[test]
fn effective_gain_values() {
    let b = paper_bounds();
    assert_eq!(
        effective_gain(&state(Vec3::zeros(), 2), &b),
        Mat3::identity()
    );
    let g = effective_gain_diag(&state(Vec3([2.0, 0.0, 0.0]), 2), &b);
    assert!((g[0] - 0.75).abs() < 1e-15);
    let g = effective_gain_diag(&state(Vec3([0.0, 0.9 * -3.5, 0.0]), 4), &b);
    assert!((g[1] - 0.3439).abs() < 1e-12);
}

#[test]
fn gain_is_continuous_through_zero() {
    let b = paper_bounds();
    for z in [-1e-12, 0.0, 1e-12] {
        let g = effective_gain_diag(&state(Vec3([z; 3]), 2), &b);
        assert!((g[0] - 1.0).abs() < 1e-20);
    }
}

#[test]
fn guard_floors_tiny_gains() {
    let b = paper_bounds();
    let (inv, guarded) = guarded_gain_inverse(&state(Vec3([4.0, 1.0, 0.0]), 2), &b);
    assert!(guarded);
    assert_eq!(inv[0], 1.0 / GAIN_FLOOR);
    assert!((inv[1] - 1.0 / (1.0 - 1.0 / 16.0)).abs() < 1e-12);
    let (_, guarded) = guarded_gain_inverse(&state(Vec3([3.9, 1.0, 0.0]), 2), &b);
    assert!(!guarded);
}

#[test]
fn invalid_configuration_rejected() {
    assert!(ActuatorBounds::new(Vec3([4.0, 0.0, 4.0]), Vec3([-3.5; 3])).is_err());
    assert!(ActuatorBounds::new(Vec3([4.0; 3]), Vec3([-3.5, 1.0, -3.5])).is_err());
    assert!(ActuatorState::new(Vec3::zeros(), Vec3([0.2, 0.0, 0.2]), 2).is_err());
    assert_eq!(
        ActuatorState::new(Vec3::zeros(), Vec3([0.2; 3]), 3),
        Err(ActuatorError::InvalidExponent(3))
    );
    assert!(ActuatorState::new(Vec3::zeros(), Vec3([0.2; 3]), 0).is_err());
}

#[test]
fn clamp_reports_active_axes() {
    let b = ActuatorBounds::symmetric(4.0).unwrap();
    let (c, hit) = b.clamp(Vec3([5.0, -1.0, -9.0]));
    assert_eq!(c, Vec3([4.0, -1.0, -4.0]));
    assert_eq!(hit, [true, false, true]);
}

fn fine_flow(b: &ActuatorBounds, z0: f64, c: f64, n: u32, t: f64) -> f64 {
    let f = |z: f64| effective_gain_diag(&state(Vec3([z; 3]), n), b)[0] * c - 0.2 * z;
    let steps = 500_000;
    let h = t / steps as f64;
    let mut z = z0;
    for _ in 0..steps {
        let k1 = f(z);
        let k2 = f(z + 0.5 * h * k1);
        let k3 = f(z + 0.5 * h * k2);
        let k4 = f(z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    z
}

#[test]
fn exact_flow_matches_fine_integration() {
    let b = paper_bounds();
    let cases = [
        (0.0, 3.0),
        (1.0, -2.0),
        (-3.0, 50.0),
        (3.9, 1e4),
        (-3.4, -1e3),
        (0.5, 0.0),
        (2.0, -40.0),
    ];
    for n in [2, 4] {
        for &(z0, c) in &cases {
            let exact = saturation_flow(&state(Vec3([z0; 3]), n), &b, Vec3([c; 3]), 0.5);
            let fine = fine_flow(&b, z0, c, n, 0.5);
            assert!(
                (exact[0] - fine).abs() < 1e-9 * (1.0 + fine.abs()),
                "n={n} {z0} {c}: {} vs {fine}",
                exact[0]
            );
            assert!(-3.5 < exact[0] && exact[0] < 4.0);
        }
    }
}

#[test]
fn huge_commands_stay_inside() {
    let b = paper_bounds();
    for c in [1e8, -1e8, 1e12, -1e12] {
        let st = state(Vec3([3.999999, -3.4999999, 0.0]), 2);
        let z = saturation_flow(&st, &b, Vec3([c; 3]), 0.01);
        assert!(b.contains_strictly(z), "{c}: {z:?}");
    }
}
