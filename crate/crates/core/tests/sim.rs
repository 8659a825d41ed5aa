use usv_blf::control::Variant;
use usv_blf::scenario::{paper_preset, PaperPath};
use usv_blf::sim::*;
use usv_blf::trajectory::desired_state;

#[test]
fn rk4_exponential_decay() {
    let y = rk4_step(|_, y: &[f64; 1]| [-y[0]], 0.0, &[1.0], 0.1).unwrap();
    assert!((y[0] - 0.9048375).abs() < 1e-7);
    assert!((y[0] - (-0.1f64).exp()).abs() < 1e-7);
}

#[test]
fn rk4_zero_field_is_identity() {
    let y0 = [1.5, -2.0, 3.25];
    assert_eq!(
        rk4_step(|_, _: &[f64; 3]| [0.0; 3], 0.0, &y0, 0.3).unwrap(),
        y0
    );
}

#[test]
fn rk4_is_fourth_order() {
    let err = |n: usize| {
        let dt = 1.0 / n as f64;
        let mut y = [1.0];
        for k in 0..n {
            y = rk4_step(|_, y: &[f64; 1]| [-y[0]], k as f64 * dt, &y, dt).unwrap();
        }
        (y[0] - (-1.0f64).exp()).abs()
    };
    for n in [10, 20, 40] {
        let ratio = err(n) / err(2 * n);
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn rk4_reports_non_finite_component() {
    let e = rk4_step(|_, y: &[f64; 2]| [y[0], f64::NAN], 0.0, &[1.0, 1.0], 0.1).unwrap_err();
    assert_eq!(
        e,
        IntegrationError {
            component: 1,
            t: 0.0
        }
    );
}

#[test]
fn short_runs_are_deterministic_and_clean() {
    for variant in Variant::ALL {
        let s = paper_preset(variant, PaperPath::Ellipse, 1).with_horizon(2.0);
        let a = run_scenario(&s);
        let b = run_scenario(&s);
        assert!(a.ok(), "{:?}", a.halt);
        assert_eq!(a.trace.len(), 200);
        assert_eq!(a, b);
    }
}

#[test]
fn zero_error_start_settles_immediately() {
    let mut s = paper_preset(Variant::B, PaperPath::Ellipse, 1).with_horizon(1.0);
    let d = desired_state(&s.trajectory, 0.0);
    s.initial_pose = d.eta_d;
    s.initial_velocity = d.nu_d;
    let r = run_scenario(&s);
    assert!(r.ok());
    assert_eq!(r.summary.settling_time, Some(0.0));
}

#[test]
fn starting_on_the_trajectory_stays_on_it() {
    for path in PaperPath::ALL {
        let mut s = paper_preset(Variant::B, path, 1).with_horizon(10.0);
        let d = desired_state(&s.trajectory, 0.0);
        s.initial_pose = d.eta_d;
        s.initial_velocity = d.nu_d;
        let r = run_scenario(&s);
        assert!(r.ok());
        let worst = r.trace.iter().map(|x| x.e1.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-6, "{path:?}: {worst:e}");
    }
}

#[test]
fn saturated_actuator_does_not_chatter_between_bounds() {
    for variant in [Variant::A, Variant::C] {
        for path in PaperPath::ALL {
            for index in 1..=3 {
                let s = paper_preset(variant, path, index).with_horizon(100.0);
                let r = run_scenario(&s);
                assert!(r.ok(), "{}", s.name);
                // a reversal between samples that spans more than half the range
                let flips = r
                    .trace
                    .windows(2)
                    .filter(|w| {
                        (0..3).any(|i| (w[1].tau_applied[i] - w[0].tau_applied[i]).abs() > 3.75)
                    })
                    .count();
                assert!(flips <= 2, "{}: {flips} reversals", s.name);
            }
        }
    }
}
