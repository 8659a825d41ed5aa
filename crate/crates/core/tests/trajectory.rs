use std::f64::consts::PI;
use usv_blf::linalg::Vec3;
use usv_blf::trajectory::*;
use usv_blf::vessel::Pose;

#[test]
fn ellipse_at_origin() {
    let d = desired_state(&TrajectorySpec::ellipse_paper(), 0.0);
    assert_eq!(d.eta_d, Vec3([0.0, 0.0, 0.5 * PI]));
    assert_eq!(d.eta_d_dot[0], 0.0);
    assert!((d.eta_d_dot[1] - 0.3).abs() < 1e-15);
}

#[test]
fn eight_at_origin() {
    let d = desired_state(&TrajectorySpec::eight_paper(), 0.0);
    assert_eq!(d.eta_d, Vec3([0.0, 0.0, 0.0]));
    let d = desired_state(&TrajectorySpec::eight_scenario(), 0.0);
    assert_eq!(d.eta_d[2], 0.5 * PI);
}

#[test]
fn ellipse_matches_closed_form_bitwise() {
    let spec = TrajectorySpec::ellipse_paper();
    for t in [0.0, 1.7, 33.3, 249.99] {
        let d = desired_state(&spec, t);
        assert_eq!(d.eta_d[0], 4.0 * (0.05 * t).cos() - 4.0);
        assert_eq!(d.eta_d[1], 6.0 * (0.05 * t).sin());
        assert_eq!(d.eta_d[2], 0.5 * PI * (0.02 * t).cos());
    }
    let spec = TrajectorySpec::eight_paper();
    for t in [0.0, 12.5, 199.0] {
        let d = desired_state(&spec, t);
        assert_eq!(d.eta_d[0], 4.0 * ((0.05 * t).cos() - 1.0));
        assert_eq!(d.eta_d[1], 2.5 * (0.1 * t).sin());
        assert_eq!(d.eta_d[2], 0.5 * PI * (0.02 * t).sin());
    }
}

#[test]
fn static_band_has_tube_derivatives_of_zero() {
    let spec = TrajectorySpec::ellipse_paper();
    let tube = EnvelopeSpec::Tube {
        upper: [
            AxisSignal::constant(2.0),
            AxisSignal::constant(8.0),
            AxisSignal::constant(3.0),
        ],
        lower: [
            AxisSignal::constant(-9.0),
            AxisSignal::constant(-8.0),
            AxisSignal::constant(-1.0),
        ],
    };
    for t in [0.0, 10.0, 77.0] {
        let d = desired_state(&spec, t);
        let s = envelope(&tube, &d, t).unwrap();
        for i in 0..3 {
            assert_eq!(s[i].k_a_dot, d.eta_d_dot[i]);
            assert_eq!(s[i].k_b_dot, -d.eta_d_dot[i]);
        }
    }
}

#[test]
fn paper_envelopes_at_origin() {
    let d = desired_state(&TrajectorySpec::ellipse_paper(), 0.0);
    let s = envelope(&EnvelopeSpec::ellipse_envelope_paper(), &d, 0.0).unwrap();
    assert!((s[0].k_b - 0.7071067811865475).abs() < 1e-15);

    let d = desired_state(&TrajectorySpec::eight_scenario(), 0.0);
    let s = envelope(&EnvelopeSpec::eight_envelope_paper(), &d, 0.0).unwrap();
    assert_eq!(s[1].k_a, 3.0);
    assert_eq!(s[1].k_b, 3.5);
}

#[test]
fn degenerate_envelope_fails_at_start() {
    let spec = TrajectorySpec::ellipse_paper();
    let EnvelopeSpec::Tube { lower, .. } = EnvelopeSpec::ellipse_envelope_paper() else {
        unreachable!()
    };
    let collapsed = EnvelopeSpec::Tube {
        upper: [spec.x.clone(), spec.y.clone(), spec.psi.clone()],
        lower,
    };
    let report = validate_scenario(&spec, &collapsed, Pose::new(0.0, 0.0, 0.5 * PI), 10.0, 0.01);
    match report.failure {
        Some(ValidationFailure::Envelope { t, k_b, .. }) => {
            assert_eq!(t, 0.0);
            assert_eq!(k_b, 0.0);
        }
        other => panic!("unexpected {other:?}"),
    }
    let d = desired_state(&spec, 0.0);
    assert!(envelope(&collapsed, &d, 0.0).is_err());
}

#[test]
fn paper_scenarios_validate() {
    let report = validate_scenario(
        &TrajectorySpec::ellipse_paper(),
        &EnvelopeSpec::ellipse_envelope_paper(),
        Pose::new(0.6, -1.0, deg(110.0)),
        250.0,
        0.01,
    );
    assert!(report.passed(), "{:?}", report.failure);
    assert_eq!(report.samples, 25001);

    let report = validate_scenario(
        &TrajectorySpec::eight_scenario(),
        &EnvelopeSpec::eight_envelope_paper(),
        Pose::new(0.99, 1.0, deg(95.0)),
        250.0,
        0.01,
    );
    assert!(report.passed(), "{:?}", report.failure);
}

#[test]
fn printed_eight_heading_is_incompatible_with_its_envelope() {
    let report = validate_scenario(
        &TrajectorySpec::eight_paper(),
        &EnvelopeSpec::eight_envelope_paper(),
        Pose::new(0.99, 1.0, deg(95.0)),
        250.0,
        0.01,
    );
    assert!(matches!(
        report.failure,
        Some(ValidationFailure::Envelope { axis: "psi", t, .. }) if t == 0.0
    ));
}

#[test]
fn initial_error_and_heading_checks() {
    let spec = TrajectorySpec::ellipse_paper();
    let band = EnvelopeSpec::static_paper();
    let r = validate_scenario(&spec, &band, Pose::new(1.2, 0.0, 0.5 * PI), 1.0, 0.01);
    assert!(matches!(
        r.failure,
        Some(ValidationFailure::InitialError { axis: "x", .. })
    ));
    let wide = EnvelopeSpec::ErrorBand {
        k_a: [1.0, 1.0, 10.0],
        k_b: [1.0, 1.0, 10.0],
    };
    let r = validate_scenario(&spec, &wide, Pose::new(0.0, 0.0, 0.5 * PI + 4.0), 1.0, 0.01);
    assert!(matches!(
        r.failure,
        Some(ValidationFailure::HeadingOffset { .. })
    ));
}
