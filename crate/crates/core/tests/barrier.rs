use usv_blf::barrier::*;

fn sb(k_a: f64, k_b: f64) -> StaticBarrier {
    StaticBarrier::new(k_a, k_b).unwrap()
}

#[test]
fn q_of_e_cases() {
    assert_eq!(q_of_e(0.2), 1.0);
    assert_eq!(q_of_e(0.0), 0.0);
    assert_eq!(q_of_e(-0.2), 0.0);
}

#[test]
fn log_blf_static_values() {
    assert_eq!(log_blf_static(0.0, &sb(0.8, 1.0)).unwrap(), 0.0);
    let v = log_blf_static(0.6, &sb(0.8, 1.0)).unwrap();
    assert!((v - 0.22314355131420976).abs() < 1e-12);
    let v = log_blf_static(-0.6, &sb(0.8, 1.0)).unwrap();
    assert!((v - 0.41333928659223396).abs() < 1e-12);
}

#[test]
fn log_blf_static_rejects_out_of_domain() {
    let err = log_blf_static(1.0, &sb(0.8, 1.0)).unwrap_err();
    assert_eq!(
        err,
        BarrierError::Violation {
            e: 1.0,
            k_a: 0.8,
            k_b: 1.0,
            t: None
        }
    );
    assert!(log_blf_static(-0.8, &sb(0.8, 1.0)).is_err());
    let err = err.at_time(3.5);
    assert!(err.to_string().contains("t = 3.5"));
    assert!(StaticBarrier::new(0.0, 1.0).is_err());
}

#[test]
fn normalized_error_values() {
    let b = BarrierSample {
        k_a: 2.0,
        k_b: 2.0,
        k_a_dot: 0.0,
        k_b_dot: 0.0,
    };
    assert_eq!(normalized_error(0.0, &b), 0.0);
    assert_eq!(normalized_error(0.5, &b), 0.25);
    assert_eq!(normalized_error(-0.5, &b), -0.25);
}

#[test]
fn log_blf_power_values() {
    assert_eq!(log_blf_power(0.0, 1).unwrap(), 0.0);
    assert!((log_blf_power(0.5, 1).unwrap() - 0.14384103622589042).abs() < 1e-12);
    assert!((log_blf_power(0.5, 2).unwrap() - 0.01613463028439279).abs() < 1e-12);
    assert_eq!(log_blf_power(1.0, 1), Err(BarrierError::Domain(1.0)));
}

#[test]
fn log_inequality_values() {
    assert_eq!(lemma2_gap(0.0, 1).unwrap(), (0.0, 0.0));
    let (l, r) = lemma2_gap(0.5, 1).unwrap();
    assert!((l - 0.28768207245178085).abs() < 1e-12);
    assert!((r - 1.0 / 3.0).abs() < 1e-12);
    assert!(l < r);
    let (l, r) = lemma2_gap(0.9, 3).unwrap();
    assert!((l - 0.7580932514012828).abs() < 1e-12);
    assert!((r - 1.1342029498953177).abs() < 1e-12);
    assert!(lemma2_gap(-1.0, 2).is_err());
}

#[test]
fn tan_blf_values() {
    assert_eq!(tan_blf_static(0.0, &sb(1.0, 1.0)).unwrap(), 0.0);
    let v = tan_blf_static(0.5, &sb(1.0, 3.0)).unwrap();
    assert!((v - 0.13184827189476236).abs() < 1e-12);
    let mut last = 0.0;
    for k in 1..12 {
        let e = 1.0 - 10f64.powi(-k);
        let v = tan_blf_static(e, &sb(1.0, 3.0)).unwrap();
        assert!(v > last);
        last = v;
    }
    assert!(last > 1e9);
    assert!(tan_blf_static(1.0, &sb(1.0, 3.0)).is_err());
}
