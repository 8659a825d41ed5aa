use usv_blf::scalar::*;

fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-6;
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[test]
fn elementary_derivatives_match_finite_differences() {
    let x = 0.7;
    let cases: Vec<(Box<dyn Fn(Dual<f64>) -> Dual<f64>>, Box<dyn Fn(f64) -> f64>)> = vec![
        (
            Box::new(|v| v.sin() * v.cos()),
            Box::new(|v| v.sin() * v.cos()),
        ),
        (
            Box::new(|v| (v * v + 1.0).ln()),
            Box::new(|v| (v * v + 1.0).ln()),
        ),
        (
            Box::new(|v| (v + 2.0).sqrt() / v),
            Box::new(|v| (v + 2.0).sqrt() / v),
        ),
        (
            Box::new(|v| v.powi(5) - v.powi(0)),
            Box::new(|v| v.powi(5) - 1.0),
        ),
        (Box::new(|v| (-v).abs() * 3.0), Box::new(|v| v.abs() * 3.0)),
    ];
    for (ad, plain) in cases {
        let d = derivative(ad, x);
        assert!((d - central(plain, x)).abs() < 1e-7);
    }
}

#[test]
fn nested_duals_give_second_derivative() {
    // f(x) = x^3 sin(x); f'' = 6x sin x + 6x^2 cos x - x^3 sin x
    let x = 1.3_f64;
    let xd = Dual::new(Dual::new(x, 1.0), Dual::new(1.0, 0.0));
    let y = xd.powi(3) * xd.sin();
    let expected = 6.0 * x * x.sin() + 6.0 * x * x * x.cos() - x.powi(3) * x.sin();
    assert!((y.eps.eps - expected).abs() < 1e-12);
    assert!((y.re.eps - y.eps.re).abs() < 1e-12);
}
