//! Control-law building blocks, generic over [`Scalar`].
//!
//! Barrier switches `q(e)` are evaluated on the real part only, so their
//! derivative is zero everywhere.

use crate::barrier::BarrierSample;
use crate::linalg::Vec3;
use crate::scalar::Scalar;
use crate::vessel::{rotation_matrix, VesselModel};

/// Half-width selected by `q(e)`: `k_b` for `e > 0`, `k_a` otherwise.
pub fn active_width<T: Scalar>(e: T, b: &BarrierSample<T>) -> T {
    if e.re() > 0.0 {
        b.k_b
    } else {
        b.k_a
    }
}

/// Static-barrier position feedback `k1ᵢ eᵢ (kᵢ² − eᵢ²)`.
pub fn static_feedback<T: Scalar>(e: Vec3<T>, k1: Vec3, bars: &[BarrierSample<T>; 3]) -> Vec3<T> {
    Vec3(std::array::from_fn(|i| {
        let k = active_width(e[i], &bars[i]);
        e[i] * k1[i] * (k * k - e[i] * e[i])
    }))
}

/// `α = Jᵀ(ψ)(η̇_d − F(e))` for the static-barrier design.
pub fn alpha_static<T: Scalar>(
    psi: T,
    e: Vec3<T>,
    eta_d_dot: Vec3<T>,
    k1: Vec3,
    bars: &[BarrierSample<T>; 3],
) -> Vec3<T> {
    rotation_matrix(psi).tr_mul_vec(eta_d_dot - static_feedback(e, k1, bars))
}

/// `k̄₁ᵢ = sqrt((k̇_a/k_a)² + (k̇_b/k_b)² + aᵢ)`.
pub fn time_varying_gain<T: Scalar>(b: &BarrierSample<T>, a: f64) -> T {
    ((b.k_a_dot / b.k_a).powi(2) + (b.k_b_dot / b.k_b).powi(2) + a).sqrt()
}

/// `α = Jᵀ(ψ)(η̇_d − (K₁ + K̄(t)) e)` for the time-varying design.
pub fn alpha_dynamic<T: Scalar>(
    psi: T,
    e: Vec3<T>,
    eta_d_dot: Vec3<T>,
    k1: Vec3,
    a: Vec3,
    bars: &[BarrierSample<T>; 3],
) -> Vec3<T> {
    let fb = Vec3(std::array::from_fn(|i| {
        e[i] * (time_varying_gain(&bars[i], a[i]) + k1[i])
    }));
    rotation_matrix(psi).tr_mul_vec(eta_d_dot - fb)
}

/// `μᵢ = q/(k_b^{2p} − e^{2p}) + (1 − q)/(k_a^{2p} − e^{2p})`.
pub fn barrier_gain<T: Scalar>(e: T, b: &BarrierSample<T>, p: u32) -> T {
    let two_p = 2 * p as i32;
    let k = active_width(e, b);
    (k.powi(two_p) - e.powi(two_p)).recip()
}

/// Body-frame barrier coupling `Jᵀ(ψ) (μ ⊙ e^{2p−1})`.
pub fn barrier_coupling<T: Scalar>(
    psi: T,
    e: Vec3<T>,
    bars: &[BarrierSample<T>; 3],
    p: u32,
) -> Vec3<T> {
    let w = Vec3(std::array::from_fn(|i| {
        barrier_gain(e[i], &bars[i], p) * e[i].powi(2 * p as i32 - 1)
    }));
    rotation_matrix(psi).tr_mul_vec(w)
}

/// Second-stage virtual control of the static design:
///
/// `α₂ = Cν + Dν + M α̇ − M[K2ᵢ zᵢ (k2ᵢ² − zᵢ²)] − M diag(k2ᵢ² − zᵢ²) Jᵀ(μ ⊙ e)`.
#[allow(clippy::too_many_arguments)]
pub fn alpha2_static<T: Scalar>(
    model: &VesselModel,
    psi: T,
    nu: Vec3<T>,
    e: Vec3<T>,
    z: Vec3<T>,
    alpha_dot: Vec3<T>,
    k2_gain: Vec3,
    k2_bound: Vec3,
    bars: &[BarrierSample<T>; 3],
) -> Vec3<T> {
    let slack = Vec3(std::array::from_fn(|i| {
        T::from_f64(k2_bound[i] * k2_bound[i]) - z[i] * z[i]
    }));
    let velocity_term = Vec3(std::array::from_fn(|i| z[i] * k2_gain[i] * slack[i]));
    let coupling = slack.hadamard(barrier_coupling(psi, e, bars, 1));
    model.drift_force(nu) + model.mass_mul(alpha_dot - velocity_term - coupling)
}

/// Body-force law of the time-varying design; also the second-stage
/// virtual control when the saturation model is present:
///
/// `Cν + Dν + M α̇ − K₂ z − Jᵀ(μ ⊙ e^{2p−1})`.
#[allow(clippy::too_many_arguments)]
pub fn force_dynamic<T: Scalar>(
    model: &VesselModel,
    psi: T,
    nu: Vec3<T>,
    e: Vec3<T>,
    z: Vec3<T>,
    alpha_dot: Vec3<T>,
    k2_gain: Vec3,
    p: u32,
    bars: &[BarrierSample<T>; 3],
) -> Vec3<T> {
    let damping = Vec3(std::array::from_fn(|i| z[i] * k2_gain[i]));
    model.drift_force(nu) + model.mass_mul(alpha_dot) - damping - barrier_coupling(psi, e, bars, p)
}
