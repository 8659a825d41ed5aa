//! Smooth asymmetric input-saturation model.
//!
//! The actuator output `τ = ζ` follows
//! `ζ̇ = Q(I − G_M)τ_c − ρζ + (I − Q)(I − G_m)τ_c`, which keeps every
//! component strictly inside `(τ_min, τ_max)` for any bounded command.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Mat3, Vec3};

/// Floor applied to each effective-gain entry before inversion.
pub const GAIN_FLOOR: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActuatorError {
    #[error("actuator axis {axis}: need tau_min < 0 < tau_max, got ({min}, {max})")]
    InvalidBounds { axis: usize, min: f64, max: f64 },
    #[error("saturation shaping constant rho[{axis}] = {value} must be positive")]
    NonPositiveRho { axis: usize, value: f64 },
    #[error("saturation exponent n = {0} must be an even integer >= 2")]
    InvalidExponent(u32),
}

/// Forward (`tau_max`, positive) and reverse (`tau_min`, negative) limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorBounds {
    pub tau_max: Vec3Serde,
    pub tau_min: Vec3Serde,
}

/// Plain-array mirror of [`Vec3`] for configuration files.
pub type Vec3Serde = [f64; 3];

impl ActuatorBounds {
    pub fn new(tau_max: Vec3, tau_min: Vec3) -> Result<Self, ActuatorError> {
        let b = Self {
            tau_max: tau_max.0,
            tau_min: tau_min.0,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn symmetric(limit: f64) -> Result<Self, ActuatorError> {
        Self::new(Vec3([limit; 3]), Vec3([-limit; 3]))
    }

    pub fn validate(&self) -> Result<(), ActuatorError> {
        for axis in 0..3 {
            let (min, max) = (self.tau_min[axis], self.tau_max[axis]);
            if !(min < 0.0 && 0.0 < max) || !min.is_finite() || !max.is_finite() {
                return Err(ActuatorError::InvalidBounds { axis, min, max });
            }
        }
        Ok(())
    }

    pub fn max(&self) -> Vec3 {
        Vec3(self.tau_max)
    }

    pub fn min(&self) -> Vec3 {
        Vec3(self.tau_min)
    }

    /// Element-wise clamp into `[tau_min, tau_max]`; also reports which axes clamped.
    pub fn clamp(&self, tau: Vec3) -> (Vec3, [bool; 3]) {
        let mut out = tau;
        let mut hit = [false; 3];
        for i in 0..3 {
            let c = tau[i].clamp(self.tau_min[i], self.tau_max[i]);
            hit[i] = c != tau[i];
            out[i] = c;
        }
        (out, hit)
    }

    /// True when every component lies in the open interval.
    pub fn contains_strictly(&self, tau: Vec3) -> bool {
        (0..3).all(|i| self.tau_min[i] < tau[i] && tau[i] < self.tau_max[i])
    }
}

/// Internal state of the saturation model together with its shaping constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActuatorState {
    /// Equal to the applied output τ.
    pub zeta: Vec3,
    pub rho: Vec3,
    pub n: u32,
}

impl ActuatorState {
    pub fn new(zeta: Vec3, rho: Vec3, n: u32) -> Result<Self, ActuatorError> {
        for axis in 0..3 {
            if !(rho[axis] > 0.0) {
                return Err(ActuatorError::NonPositiveRho {
                    axis,
                    value: rho[axis],
                });
            }
        }
        if n < 2 || n % 2 != 0 {
            return Err(ActuatorError::InvalidExponent(n));
        }
        Ok(Self { zeta, rho, n })
    }

    /// Model at rest, `ζ(0) = 0`.
    pub fn at_rest(rho: Vec3, n: u32) -> Result<Self, ActuatorError> {
        Self::new(Vec3::zeros(), rho, n)
    }

    pub fn with_zeta(self, zeta: Vec3) -> Self {
        Self { zeta, ..self }
    }
}

/// `q_i(ζ_i)`: 1 on the forward side, 0 otherwise (including at zero).
pub fn q_switch(zeta_i: f64) -> f64 {
    if zeta_i > 0.0 {
        1.0
    } else {
        0.0
    }
}

fn gain_entry(zeta: f64, tau_max: f64, tau_min: f64, n: u32) -> f64 {
    let limit = if q_switch(zeta) == 1.0 {
        tau_max
    } else {
        tau_min
    };
    1.0 - (zeta / limit).powi(n as i32)
}

/// Diagonal of `Q(I − G_M) + (I − Q)(I − G_m)`.
pub fn effective_gain_diag(state: &ActuatorState, bounds: &ActuatorBounds) -> Vec3 {
    Vec3(std::array::from_fn(|i| {
        gain_entry(state.zeta[i], bounds.tau_max[i], bounds.tau_min[i], state.n)
    }))
}

pub fn effective_gain(state: &ActuatorState, bounds: &ActuatorBounds) -> Mat3 {
    Mat3::diag(effective_gain_diag(state, bounds))
}

/// Inverse of the effective gain with each entry floored at [`GAIN_FLOOR`].
/// The flag reports whether the floor was active on any axis.
pub fn guarded_gain_inverse(state: &ActuatorState, bounds: &ActuatorBounds) -> (Vec3, bool) {
    let g = effective_gain_diag(state, bounds);
    let guarded = g.0.iter().any(|&gi| gi < GAIN_FLOOR);
    (g.map(|gi| 1.0 / gi.max(GAIN_FLOOR)), guarded)
}

/// `ζ̇` for a commanded input `tau_c`.
pub fn saturation_derivative(state: &ActuatorState, bounds: &ActuatorBounds, tau_c: Vec3) -> Vec3 {
    let g = effective_gain_diag(state, bounds);
    Vec3(std::array::from_fn(|i| {
        g[i] * tau_c[i] - state.rho[i] * state.zeta[i]
    }))
}

/// Exact flow of one axis of `ζ̇ = g(ζ) c − ρζ` over `t` for a constant
/// command `c` and `n = 2`.
///
/// On each sign branch the equation is a Riccati equation with constant
/// coefficients; a crossing of zero switches branches once at most.
fn riccati_axis(zeta: f64, c: f64, rho: f64, tau_max: f64, tau_min: f64, t: f64) -> f64 {
    let positive = zeta > 0.0 || (zeta == 0.0 && c > 0.0);
    let limit = if positive { tau_max } else { tau_min.abs() };
    let a = c / (limit * limit);
    let s = (rho * rho + 4.0 * a * c).sqrt();
    // stable root, written without cancellation
    let r1 = 2.0 * c / (rho + s);
    let w0 = zeta - r1;
    let at = |tt: f64| {
        let e = (-s * tt).exp();
        let one_minus_e = -(-s * tt).exp_m1();
        r1 + w0 * e / (1.0 + w0 * a * one_minus_e / s)
    };
    let crosses = zeta != 0.0 && (r1 > 0.0) != positive;
    if !crosses {
        return at(t);
    }
    // time at which ζ reaches 0 on this branch
    let k = w0 * a / s;
    let e0 = -r1 * (1.0 + k) / (w0 * (1.0 - r1 * a / s));
    let t0 = -e0.ln() / s;
    if t0 >= t {
        at(t)
    } else {
        riccati_axis(0.0, c, rho, tau_max, tau_min, t - t0)
    }
}

/// Flow of one axis for general even `n`, by Runge-Kutta sub-steps sized
/// from the local stiffness.
fn substep_axis(zeta: f64, c: f64, rho: f64, tau_max: f64, tau_min: f64, n: u32, t: f64) -> f64 {
    let f = |z: f64| gain_entry(z, tau_max, tau_min, n) * c - rho * z;
    let mut z = zeta;
    let mut left = t;
    while left > 0.0 {
        let limit = if z > 0.0 { tau_max } else { tau_min.abs() };
        let slope = n as f64 * (z / limit).abs().powi(n as i32 - 1) / limit * c.abs() + rho;
        let h = left.min(0.25 / slope).min(1e-3);
        let k1 = f(z);
        let k2 = f(z + 0.5 * h * k1);
        let k3 = f(z + 0.5 * h * k2);
        let k4 = f(z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        left -= h;
    }
    z
}

/// State of the saturation model after holding `tau_c` for `t` seconds.
pub fn saturation_flow(
    state: &ActuatorState,
    bounds: &ActuatorBounds,
    tau_c: Vec3,
    t: f64,
) -> Vec3 {
    Vec3(std::array::from_fn(|i| {
        let (z, c, rho) = (state.zeta[i], tau_c[i], state.rho[i]);
        let (hi, lo) = (bounds.tau_max[i], bounds.tau_min[i]);
        if state.n == 2 {
            riccati_axis(z, c, rho, hi, lo, t)
        } else {
            substep_axis(z, c, rho, hi, lo, state.n, t)
        }
    }))
}

/// Interval of `ζ` on which every gain entry is at or above [`GAIN_FLOOR`].
pub fn floor_band(bounds: &ActuatorBounds, n: u32) -> (Vec3, Vec3) {
    let shrink = (1.0 - GAIN_FLOOR).powf(1.0 / n as f64);
    (Vec3(bounds.tau_min) * shrink, Vec3(bounds.tau_max) * shrink)
}
