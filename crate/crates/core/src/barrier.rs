//! Barrier Lyapunov function terms.
//!
//! All asymmetric barriers share the switch `q(e)`: the upper bound `k_b`
//! governs `e > 0` and the lower bound `k_a` governs `e <= 0`.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum BarrierError {
    /// Error left the open interval `(-k_a, k_b)`.
    #[error("barrier violated: e = {e} not in (-{k_a}, {k_b}){}", fmt_time(.t))]
    Violation {
        e: f64,
        k_a: f64,
        k_b: f64,
        t: Option<f64>,
    },
    /// Normalized argument with `|ε| >= 1`.
    #[error("barrier argument |{0}| >= 1")]
    Domain(f64),
    #[error("barrier half-widths must be positive, got k_a = {k_a}, k_b = {k_b}")]
    NonPositive { k_a: f64, k_b: f64 },
}

fn fmt_time(t: &Option<f64>) -> String {
    t.map(|t| format!(" at t = {t}")).unwrap_or_default()
}

impl BarrierError {
    pub fn at_time(self, time: f64) -> Self {
        match self {
            BarrierError::Violation { e, k_a, k_b, .. } => BarrierError::Violation {
                e,
                k_a,
                k_b,
                t: Some(time),
            },
            other => other,
        }
    }
}

/// Constant asymmetric bounds: the error must stay in `(-k_a, k_b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticBarrier {
    pub k_a: f64,
    pub k_b: f64,
}

impl StaticBarrier {
    pub fn new(k_a: f64, k_b: f64) -> Result<Self, BarrierError> {
        if k_a > 0.0 && k_b > 0.0 && k_a.is_finite() && k_b.is_finite() {
            Ok(Self { k_a, k_b })
        } else {
            Err(BarrierError::NonPositive { k_a, k_b })
        }
    }

    pub fn contains(&self, e: f64) -> bool {
        -self.k_a < e && e < self.k_b
    }

    fn check(&self, e: f64) -> Result<(), BarrierError> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(BarrierError::Violation {
                e,
                k_a: self.k_a,
                k_b: self.k_b,
                t: None,
            })
        }
    }
}

/// Time-varying barrier evaluated at one instant, with its rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierSample<T = f64> {
    pub k_a: T,
    pub k_b: T,
    pub k_a_dot: T,
    pub k_b_dot: T,
}

impl BarrierSample {
    pub fn as_static(&self) -> StaticBarrier {
        StaticBarrier {
            k_a: self.k_a,
            k_b: self.k_b,
        }
    }
}

pub fn q_of_e(e: f64) -> f64 {
    if e > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Per-axis log-type asymmetric BLF `½ ln(k²/(k² − e²))`.
pub fn log_blf_static(e: f64, b: &StaticBarrier) -> Result<f64, BarrierError> {
    b.check(e)?;
    let k = if q_of_e(e) == 1.0 { b.k_b } else { b.k_a };
    let k2 = k * k;
    Ok(0.5 * (k2 / (k2 - e * e)).ln())
}

/// `ε = e/k_b` for `e > 0`, `e/k_a` otherwise.
pub fn normalized_error(e: f64, b: &BarrierSample) -> f64 {
    if q_of_e(e) == 1.0 {
        e / b.k_b
    } else {
        e / b.k_a
    }
}

/// `(1/2p) ln(1/(1 − ε^{2p}))`.
pub fn log_blf_power(eps: f64, p: u32) -> Result<f64, BarrierError> {
    if !(eps.abs() < 1.0) {
        return Err(BarrierError::Domain(eps));
    }
    let two_p = 2 * p as i32;
    Ok(-(1.0 - eps.powi(two_p)).ln() / two_p as f64)
}

/// Both sides of `ln(1/(1 − ζ^{2p})) < ζ^{2p}/(1 − ζ^{2p})`.
pub fn lemma2_gap(zeta: f64, p: u32) -> Result<(f64, f64), BarrierError> {
    if !(zeta.abs() < 1.0) {
        return Err(BarrierError::Domain(zeta));
    }
    let s = zeta.powi(2 * p as i32);
    let denom = 1.0 - s;
    // ln_1p keeps the left side accurate for tiny ζ^{2p}
    Ok((-(-s).ln_1p(), s / denom))
}

/// Tan-type asymmetric BLF, evaluated exactly as commonly printed:
/// `q(e)(k_a²/π) tan(πe²/2k_a²) + (1 − q(e))(k_b²/π) tan(πe²/2k_b²)`.
///
/// Note the pairing: `q(e)` selects `k_a` here, the reverse of the log type.
/// Kept only for comparison; no controller uses it.
pub fn tan_blf_static(e: f64, b: &StaticBarrier) -> Result<f64, BarrierError> {
    let k = if q_of_e(e) == 1.0 { b.k_a } else { b.k_b };
    if !(e.abs() < k) {
        return Err(BarrierError::Violation {
            e,
            k_a: b.k_a,
            k_b: b.k_b,
            t: None,
        });
    }
    let k2 = k * k;
    Ok(k2 / PI * (PI * e * e / (2.0 * k2)).tan())
}
