use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use usv_blf::barrier::q_of_e;
use usv_blf::barrier::BarrierSample;
use usv_blf::control::*;
use usv_blf::linalg::Vec3;
use usv_blf::trajectory::*;
use usv_blf::trajectory::{deg, AxisSignal};
use usv_blf::vessel::{rotation_matrix, VesselModel};

fn band(k_a: f64, k_b: f64) -> [BarrierSample; 3] {
    [BarrierSample {
        k_a,
        k_b,
        k_a_dot: 0.0,
        k_b_dot: 0.0,
    }; 3]
}

fn paper_static_bars() -> [BarrierSample; 3] {
    let ka = [0.8, 0.4, deg(15.0)];
    let kb = [1.0, 0.5, deg(20.0)];
    std::array::from_fn(|i| BarrierSample {
        k_a: ka[i],
        k_b: kb[i],
        k_a_dot: 0.0,
        k_b_dot: 0.0,
    })
}

fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
    (a - b).max_abs() <= tol
}

#[test]
fn tracking_errors_cases() {
    let t = TrajectorySpec::ellipse_paper();
    let d = desired_state(&t, 0.0);
    let (e1, e2) = tracking_errors(d.eta_d, d.nu_d, &d);
    assert_eq!(e1, Vec3::zeros());
    assert_eq!(e2, Vec3::zeros());

    let eta = Vec3([0.6, 0.15, deg(105.0)]);
    let (e1, _) = tracking_errors(eta, Vec3::zeros(), &d);
    assert!(close(e1, Vec3([0.6, 0.15, deg(15.0)]), 1e-12));

    let mut shifted = d;
    shifted.eta_d[0] += 0.25;
    let (e1s, _) = tracking_errors(eta, Vec3::zeros(), &shifted);
    assert!((e1[0] - e1s[0] - 0.25).abs() < 1e-15);
}

#[test]
fn alpha_a_cases() {
    let g = GainsA {
        k1: Vec3([1.0; 3]),
        ..GainsA::paper()
    };
    let a = alpha_a(
        Vec3([0.5, 0.0, 0.0]),
        0.0,
        Vec3::zeros(),
        &g,
        &band(1.0, 1.0),
    )
    .unwrap();
    assert!(close(a, Vec3([-0.375, 0.0, 0.0]), 1e-15));

    let psi = 0.7;
    let ff = Vec3([0.3, -0.2, 0.05]);
    let a = alpha_a(Vec3::zeros(), psi, ff, &g, &band(1.0, 1.0)).unwrap();
    assert!(close(a, rotation_matrix(psi).tr_mul_vec(ff), 1e-15));

    assert!(matches!(
        alpha_a(Vec3([1.0, 0.0, 0.0]), 0.0, ff, &g, &band(1.0, 1.0)),
        Err(ControlError::Barrier { axis: "x", .. })
    ));
}

#[test]
fn alpha2_a_cases() {
    let model = VesselModel::cybership2();
    let g = GainsA::paper();
    let bars = paper_static_bars();
    let zero = Vec3::zeros();
    let a2 = alpha2_a(&model, 0.0, zero, zero, zero, zero, &g, &bars).unwrap();
    assert_eq!(a2, zero);

    let nu = Vec3([1.0, 0.0, 0.0]);
    let a2 = alpha2_a(&model, 0.0, nu, zero, zero, zero, &g, &bars).unwrap();
    // surge damping only: -X_u - X_|u|u at u = 1
    assert!(close(a2, Vec3([0.72253 + 1.32742, 0.0, 0.0]), 1e-12));

    assert!(matches!(
        alpha2_a(
            &model,
            0.0,
            nu,
            zero,
            Vec3([0.0, 1.0, 0.0]),
            zero,
            &g,
            &bars
        ),
        Err(ControlError::VelocityBarrier { axis: "y", .. })
    ));
}

/// Term-by-term re-implementation with explicit matrices and loops.
fn alpha2_a_literal(
    p: &usv_blf::vessel::VesselParams,
    psi: f64,
    nu: [f64; 3],
    e: [f64; 3],
    z: [f64; 3],
    alpha_dot: [f64; 3],
    g: &GainsA,
    ka: [f64; 3],
    kb: [f64; 3],
) -> [f64; 3] {
    let m = [
        [p.m - p.x_udot, 0.0, 0.0],
        [0.0, p.m - p.y_vdot, p.m * p.x_g - p.y_rdot],
        [0.0, p.m * p.x_g - p.n_vdot, p.i_z - p.n_rdot],
    ];
    let (u, v, r) = (nu[0], nu[1], nu[2]);
    let c = [
        [0.0, 0.0, -m[1][1] * v - m[1][2] * r],
        [0.0, 0.0, m[0][0] * u],
        [m[1][1] * v + m[1][2] * r, -m[0][0] * u, 0.0],
    ];
    let d = [
        [-p.x_u - p.x_absu_u * u.abs(), 0.0, 0.0],
        [
            0.0,
            -p.y_v - p.y_absv_v * v.abs() - p.y_absr_v * r.abs(),
            -p.y_r - p.y_absv_r * v.abs() - p.y_absr_r * r.abs(),
        ],
        [
            0.0,
            -p.n_v - p.n_absv_v * v.abs() - p.n_absr_v * r.abs(),
            -p.n_r - p.n_absv_r * v.abs() - p.n_absr_r * r.abs(),
        ],
    ];
    let jt = [
        [psi.cos(), psi.sin(), 0.0],
        [-psi.sin(), psi.cos(), 0.0],
        [0.0, 0.0, 1.0],
    ];
    let mut mu_e = [0.0; 3];
    for i in 0..3 {
        let q = q_of_e(e[i]);
        let mu = q / (kb[i] * kb[i] - e[i] * e[i]) + (1.0 - q) / (ka[i] * ka[i] - e[i] * e[i]);
        mu_e[i] = mu * e[i];
    }
    let mut out = [0.0; 3];
    for i in 0..3 {
        let mut acc = 0.0;
        for j in 0..3 {
            acc += c[i][j] * nu[j] + d[i][j] * nu[j] + m[i][j] * alpha_dot[j];
            let bracket = g.k2[j] * z[j] * (g.k2_bounds[j].powi(2) - z[j].powi(2));
            acc -= m[i][j] * bracket;
            let mut jt_mu = 0.0;
            for k in 0..3 {
                jt_mu += jt[j][k] * mu_e[k];
            }
            acc -= m[i][j] * (g.k2_bounds[j].powi(2) - z[j].powi(2)) * jt_mu;
        }
        out[i] = acc;
    }
    out
}

#[test]
fn alpha2_a_matches_literal_oracle() {
    let model = VesselModel::cybership2();
    let g = GainsA::paper();
    let ka = [0.8, 0.4, deg(15.0)];
    let kb = [1.0, 0.5, deg(20.0)];
    let bars = paper_static_bars();
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..500 {
        let psi = rng.gen_range(-4.0..4.0);
        let nu: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.5..1.5));
        let e: [f64; 3] = std::array::from_fn(|i| rng.gen_range(-0.99 * ka[i]..0.99 * kb[i]));
        let z: [f64; 3] = std::array::from_fn(|i| rng.gen_range(-0.99..0.99) * g.k2_bounds[i]);
        let ad: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let got = alpha2_a(&model, psi, Vec3(nu), Vec3(e), Vec3(z), Vec3(ad), &g, &bars).unwrap();
        let want = alpha2_a_literal(model.params(), psi, nu, e, z, ad, &g, ka, kb);
        for i in 0..3 {
            assert!(
                (got[i] - want[i]).abs() <= 1e-12 * (1.0 + want[i].abs()),
                "axis {i}: {} vs {}",
                got[i],
                want[i]
            );
        }
    }
}

#[test]
fn tauc_a_cases() {
    let model = VesselModel::cybership2();
    let g = GainsA::paper();
    let sat = SaturationConfig::paper();
    let rest = sat.state(Vec3::zeros());
    let zero = Vec3::zeros();
    let (tc, guard) = tauc_a(&model, zero, zero, zero, &rest, &sat.bounds, &g);
    assert_eq!(tc, zero);
    assert!(!guard);

    let (tc, _) = tauc_a(
        &model,
        zero,
        Vec3([1.0, 0.0, 0.0]),
        Vec3([1.0, 0.0, 0.0]),
        &rest,
        &sat.bounds,
        &g,
    );
    assert!(close(tc, Vec3([-1.0, 0.0, 0.0]), 1e-15));

    let (_, guard) = tauc_a(
        &model,
        zero,
        zero,
        zero,
        &sat.state(Vec3([4.0, 0.0, 0.0])),
        &sat.bounds,
        &g,
    );
    assert!(guard);
}

#[test]
fn alpha_b_on_constant_tube() {
    let traj = TrajectorySpec::ellipse_paper();
    let env = EnvelopeSpec::Tube {
        upper: [
            AxisSignal::constant(10.0),
            AxisSignal::constant(10.0),
            AxisSignal::constant(5.0),
        ],
        lower: [
            AxisSignal::constant(-10.0),
            AxisSignal::constant(-10.0),
            AxisSignal::constant(-5.0),
        ],
    };
    let t = 13.0;
    let d = desired_state(&traj, t);
    let bars = envelope(&env, &d, t).unwrap();
    for i in 0..3 {
        let want =
            ((d.eta_d_dot[i] / bars[i].k_a).powi(2) + (d.eta_d_dot[i] / bars[i].k_b).powi(2) + 0.1)
                .sqrt();
        assert!((laws::time_varying_gain(&bars[i], 0.1) - want).abs() < 1e-15);
    }
    let g = GainsBC::paper();
    let a = alpha_b(Vec3::zeros(), 0.4, d.eta_d_dot, &g, &bars).unwrap();
    assert!(close(
        a,
        rotation_matrix(0.4).tr_mul_vec(d.eta_d_dot),
        1e-15
    ));
}

#[test]
fn tau_b_cases() {
    let model = VesselModel::cybership2();
    let g = GainsBC::paper();
    let zero = Vec3::zeros();
    let bars = band(1.0, 1.0);
    assert_eq!(
        tau_b(&model, 0.0, zero, zero, zero, zero, &g, &bars).unwrap(),
        zero
    );
    let tau = tau_b(
        &model,
        0.0,
        zero,
        Vec3([0.5, 0.0, 0.0]),
        zero,
        zero,
        &g,
        &bars,
    )
    .unwrap();
    assert!((tau[0] + 0.5 / 0.75).abs() < 1e-12);
    assert!((tau[0] + 0.66667).abs() < 1e-5);
    assert_eq!(laws::barrier_gain(0.5, &bars[0], 1) * 0.5, 0.5 / 0.75);
}

#[test]
fn tauc_c_cases() {
    let g = GainsBC::paper();
    let sat = SaturationConfig::paper();
    let rest = sat.state(Vec3::zeros());
    let zero = Vec3::zeros();
    assert_eq!(tauc_c(zero, zero, zero, &rest, &sat.bounds, &g).0, zero);
    let (tc, _) = tauc_c(
        Vec3([1.0, 0.0, 0.0]),
        zero,
        Vec3([2.0, 0.0, 0.0]),
        &rest,
        &sat.bounds,
        &g,
    );
    assert!(close(tc, Vec3([1.0, 0.0, 0.0]), 1e-15));
}

fn paper_controller(variant: Variant) -> Controller {
    let (env, gains) = match variant {
        Variant::A => (EnvelopeSpec::static_paper(), Gains::Static(GainsA::paper())),
        _ => (
            EnvelopeSpec::ellipse_envelope_paper(),
            Gains::Dynamic(GainsBC::paper()),
        ),
    };
    Controller::new(
        variant,
        VesselModel::cybership2(),
        TrajectorySpec::ellipse_paper(),
        env,
        gains,
        SaturationConfig::paper(),
    )
}

fn sample_state(variant: Variant) -> (f64, Vec3, Vec3, Vec3) {
    let t = 17.3;
    let d = desired_state(&TrajectorySpec::ellipse_paper(), t);
    let off = match variant {
        Variant::A => Vec3([0.3, -0.1, 0.08]),
        _ => Vec3([0.4, -0.6, 0.2]),
    };
    (
        t,
        d.eta_d + off,
        d.nu_d + Vec3([0.05, -0.02, 0.03]),
        Vec3([0.5, -0.3, 0.2]),
    )
}

#[test]
fn alpha_rate_matches_central_difference() {
    for variant in Variant::ALL {
        let c = paper_controller(variant);
        let (t, eta, nu, zeta) = sample_state(variant);
        let (_, rate) = c.alpha_and_rate(t, eta, nu);
        let eta_dot = rotation_matrix(eta[2]).mul_vec(nu);
        let h = 1e-5;
        let fd = (c.alpha_at(t + h, eta + eta_dot * h) - c.alpha_at(t - h, eta - eta_dot * h))
            * (0.5 / h);
        assert!((rate - fd).norm() < 1e-4 * (1.0 + rate.norm()), "{variant}");

        let (_, rate2) = c.alpha2_and_rate(t, eta, nu, zeta);
        let nu_dot = c.model().acceleration(nu, zeta);
        let a2 = |s: f64| c.alpha2_at(t + s, eta + eta_dot * s, nu + nu_dot * s);
        let fd2 = (a2(h) - a2(-h)) * (0.5 / h);
        assert!(
            (rate2 - fd2).norm() < 1e-4 * (1.0 + rate2.norm()),
            "{variant}"
        );
    }
}

#[test]
fn backward_difference_first_step_is_zero_and_constant_alpha_gives_zero() {
    let mut c =
        paper_controller(Variant::A).with_derivative_mode(DerivativeMode::BackwardDifference);
    let (t, eta, nu, zeta) = sample_state(Variant::A);
    let d = c.decide(t, eta, nu, zeta).unwrap();
    assert_eq!(d.alpha_dot, Vec3::zeros());
    assert_eq!(d.alpha2_dot, Some(Vec3::zeros()));

    // a stationary target with the vessel at rest on it keeps α fixed
    let still = TrajectorySpec {
        x: AxisSignal::constant(1.0),
        y: AxisSignal::constant(2.0),
        psi: AxisSignal::constant(0.3),
        ..TrajectorySpec::ellipse_paper()
    };
    let mut c = Controller::new(
        Variant::A,
        VesselModel::cybership2(),
        still,
        EnvelopeSpec::static_paper(),
        Gains::Static(GainsA::paper()),
        SaturationConfig::paper(),
    )
    .with_derivative_mode(DerivativeMode::BackwardDifference);
    let eta = Vec3([1.1, 2.0, 0.3]);
    c.decide(0.0, eta, Vec3::zeros(), Vec3::zeros()).unwrap();
    let d = c.decide(0.01, eta, Vec3::zeros(), Vec3::zeros()).unwrap();
    assert_eq!(d.alpha_dot, Vec3::zeros());
}

#[test]
fn backward_difference_converges_at_first_order() {
    for variant in Variant::ALL {
        let exact = paper_controller(variant);
        let (t, eta, nu, zeta) = sample_state(variant);
        let (_, rate) = exact.alpha_and_rate(t, eta, nu);
        let eta_dot = rotation_matrix(eta[2]).mul_vec(nu);
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&dt| {
                let mut c = paper_controller(variant)
                    .with_derivative_mode(DerivativeMode::BackwardDifference);
                c.decide(t - dt, eta - eta_dot * dt, nu, zeta).unwrap();
                let d = c.decide(t, eta, nu, zeta).unwrap();
                (d.alpha_dot - rate).norm()
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((5.0..20.0).contains(&ratio), "{variant}: {errs:?}");
        }
    }
}

#[test]
fn decisions_at_paper_starts_are_finite() {
    for variant in Variant::ALL {
        let mut c = paper_controller(variant);
        let eta = match variant {
            Variant::A => Vec3([0.6, 0.15, deg(105.0)]),
            _ => Vec3([0.6, -1.0, deg(110.0)]),
        };
        let d = c
            .decide(0.0, eta, Vec3([0.1, 0.0, 0.0]), Vec3::zeros())
            .unwrap();
        assert!(d.command.is_finite() && d.lyapunov.is_finite() && d.closed_form_vdot <= 0.0);
        assert_eq!(d.alpha2.is_some(), variant.has_actuator_model());
        if variant == Variant::B {
            assert!(d.applied.max_abs() <= 4.0);
        }
    }
}

#[test]
fn gain_validation() {
    assert!(GainsA::paper().validate().is_ok());
    assert!(GainsBC::paper().validate().is_ok());
    let mut g = GainsA::paper();
    g.k1[0] = -1.0;
    assert!(matches!(
        g.validate(),
        Err(GainError::NonPositive {
            name: "k1",
            axis: 0,
            ..
        })
    ));
    let g = GainsBC {
        p: 0,
        ..GainsBC::paper()
    };
    assert_eq!(g.validate(), Err(GainError::ZeroExponent));
}

proptest! {
    #[test]
    fn q_invariant_under_positive_scaling(e in -10.0f64..10.0, c in 1e-3f64..1e3) {
        prop_assert_eq!(q_of_e(e), q_of_e(c * e));
    }

    #[test]
    fn alpha_a_odd_symmetry(
        ex in -0.9f64..0.9, ey in -0.9f64..0.9, ep in -0.9f64..0.9,
        psi in -3.2f64..3.2,
        fx in -1.0f64..1.0, fy in -1.0f64..1.0, fp in -1.0f64..1.0,
    ) {
        let g = GainsA::paper();
        let bars = band(1.0, 1.0);
        let ff = Vec3([fx, fy, fp]);
        let e = Vec3([ex, ey, ep]);
        let lhs = alpha_a(e, psi, ff, &g, &bars).unwrap();
        let rhs = -alpha_a(-e, psi, ff, &g, &bars).unwrap()
            + rotation_matrix(psi).tr_mul_vec(ff) * 2.0;
        prop_assert!((lhs - rhs).max_abs() < 1e-12);
    }

    #[test]
    fn time_varying_gain_at_least_sqrt_a(
        ka in 0.01f64..5.0, kb in 0.01f64..5.0,
        kad in -5.0f64..5.0, kbd in -5.0f64..5.0, a in 1e-4f64..2.0,
    ) {
        let b = BarrierSample { k_a: ka, k_b: kb, k_a_dot: kad, k_b_dot: kbd };
        let k = laws::time_varying_gain(&b, a);
        prop_assert!(k >= a.sqrt());
        prop_assert!(k + kad / ka >= 0.0 && k + kbd / kb >= 0.0);
    }
}
