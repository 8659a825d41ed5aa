//! Backstepping controllers built on barrier Lyapunov functions.
//!
//! * Variant A: constant asymmetric error bounds, smooth saturation model.
//! * Variant B: time-varying asymmetric bounds, commanded force clamped.
//! * Variant C: time-varying asymmetric bounds, smooth saturation model.
//!
//! Rates of the virtual controls (`α̇`, `α̇₂`) are obtained by forward-mode
//! differentiation of the same generic code that evaluates them, or by a
//! backward difference over control steps.

pub mod laws;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actuator::{guarded_gain_inverse, ActuatorBounds, ActuatorState};
use crate::barrier::{log_blf_power, normalized_error, BarrierSample};
use crate::linalg::Vec3;
use crate::scalar::{Dual, Scalar};
use crate::trajectory::{
    desired_state, envelope, envelope_raw, DesiredState, EnvelopeSpec, ScenarioError,
    TrajectorySpec,
};
use crate::vessel::{rotation_matrix, VesselModel};

const AXES: [&str; 3] = ["x", "y", "psi"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    A,
    B,
    C,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::A, Variant::B, Variant::C];

    /// A and C drive the plant through the saturation model.
    pub fn has_actuator_model(self) -> bool {
        !matches!(self, Variant::B)
    }

    pub fn letter(self) -> char {
        match self {
            Variant::A => 'A',
            Variant::B => 'B',
            Variant::C => 'C',
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Variant::A),
            "B" | "b" => Ok(Variant::B),
            "C" | "c" => Ok(Variant::C),
            other => Err(format!("unknown variant {other:?}, expected A, B or C")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GainError {
    #[error("gain {name}[{axis}] = {value} must be positive and finite")]
    NonPositive {
        name: &'static str,
        axis: usize,
        value: f64,
    },
    #[error("barrier exponent p must be at least 1")]
    ZeroExponent,
}

fn check_positive(name: &'static str, v: Vec3) -> Result<(), GainError> {
    for axis in 0..3 {
        if !(v[axis] > 0.0 && v[axis].is_finite()) {
            return Err(GainError::NonPositive {
                name,
                axis,
                value: v[axis],
            });
        }
    }
    Ok(())
}

/// Gains of the static-constraint design. `k2`/`k3` hold the diagonals of K₂/K₃.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsA {
    pub k1: Vec3,
    pub k2: Vec3,
    pub k3: Vec3,
    /// Half-widths of the velocity-error barrier.
    pub k2_bounds: Vec3,
}

impl GainsA {
    pub fn paper() -> Self {
        Self {
            k1: Vec3([1.0, 2.0, 3.0]),
            k2: Vec3([1.0, 1.0, 3.0]),
            k3: Vec3([2.0, 3.0, 5.0]),
            k2_bounds: Vec3([1.0, 1.0, 3.0]),
        }
    }

    pub fn validate(&self) -> Result<(), GainError> {
        check_positive("k1", self.k1)?;
        check_positive("k2", self.k2)?;
        check_positive("k3", self.k3)?;
        check_positive("k2_bounds", self.k2_bounds)
    }
}

/// Gains of the time-varying designs. `k3` is used by variant C only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsBC {
    pub k1: Vec3,
    pub k2: Vec3,
    pub k3: Vec3,
    pub a: Vec3,
    pub p: u32,
}

impl GainsBC {
    pub fn paper() -> Self {
        Self {
            k1: Vec3([0.1, 0.4, 0.3]),
            k2: Vec3([1.0, 1.0, 3.0]),
            k3: Vec3([2.0, 3.0, 5.0]),
            a: Vec3([0.1; 3]),
            p: 1,
        }
    }

    pub fn validate(&self) -> Result<(), GainError> {
        check_positive("k1", self.k1)?;
        check_positive("k2", self.k2)?;
        check_positive("k3", self.k3)?;
        check_positive("a", self.a)?;
        if self.p == 0 {
            return Err(GainError::ZeroExponent);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gains {
    Static(GainsA),
    Dynamic(GainsBC),
}

impl Gains {
    pub fn validate(&self) -> Result<(), GainError> {
        match self {
            Gains::Static(g) => g.validate(),
            Gains::Dynamic(g) => g.validate(),
        }
    }

    pub fn k1(&self) -> Vec3 {
        match self {
            Gains::Static(g) => g.k1,
            Gains::Dynamic(g) => g.k1,
        }
    }

    pub fn k1_mut(&mut self) -> &mut Vec3 {
        match self {
            Gains::Static(g) => &mut g.k1,
            Gains::Dynamic(g) => &mut g.k1,
        }
    }

    fn k3(&self) -> Vec3 {
        match self {
            Gains::Static(g) => g.k3,
            Gains::Dynamic(g) => g.k3,
        }
    }
}

/// Saturation-model configuration shared by variants A and C.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaturationConfig {
    pub bounds: ActuatorBounds,
    pub rho: Vec3,
    #[serde(default = "default_n")]
    pub n: u32,
}

fn default_n() -> u32 {
    2
}

impl SaturationConfig {
    pub fn paper() -> Self {
        Self {
            bounds: ActuatorBounds {
                tau_max: [4.0; 3],
                tau_min: [-3.5; 3],
            },
            rho: Vec3([0.2; 3]),
            n: 2,
        }
    }

    pub fn state(&self, zeta: Vec3) -> ActuatorState {
        ActuatorState {
            zeta,
            rho: self.rho,
            n: self.n,
        }
    }
}

/// How `α̇` and `α̇₂` are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    /// Exact differentiation along the closed-loop vector field.
    #[default]
    Analytic,
    /// `(α_k − α_{k−1})/Δt`, zero on the first step.
    BackwardDifference,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("tracking error e1.{axis} = {e} left (-{k_a}, {k_b}) at t = {t}")]
    Barrier {
        axis: &'static str,
        e: f64,
        k_a: f64,
        k_b: f64,
        t: f64,
    },
    #[error("velocity error z.{axis} = {z} left (-{bound}, {bound}) at t = {t}")]
    VelocityBarrier {
        axis: &'static str,
        z: f64,
        bound: f64,
        t: f64,
    },
    #[error(transparent)]
    Envelope(#[from] ScenarioError),
    #[error("controller produced a non-finite {0} at t = {1}")]
    NonFinite(&'static str, f64),
}

/// `e1 = η − η_d`, `e2 = ν − ν_d`.
pub fn tracking_errors(eta: Vec3, nu: Vec3, desired: &DesiredState) -> (Vec3, Vec3) {
    (eta - desired.eta_d, nu - desired.nu_d)
}

/// Fails unless every `e1ᵢ ∈ (−k_aᵢ, k_bᵢ)`.
pub fn check_interior(e1: Vec3, bars: &[BarrierSample; 3], t: f64) -> Result<(), ControlError> {
    for (i, b) in bars.iter().enumerate() {
        if !(-b.k_a < e1[i] && e1[i] < b.k_b) {
            return Err(ControlError::Barrier {
                axis: AXES[i],
                e: e1[i],
                k_a: b.k_a,
                k_b: b.k_b,
                t,
            });
        }
    }
    Ok(())
}

fn check_velocity_interior(z: Vec3, bounds: Vec3, t: f64) -> Result<(), ControlError> {
    for i in 0..3 {
        if !(z[i].abs() < bounds[i]) {
            return Err(ControlError::VelocityBarrier {
                axis: AXES[i],
                z: z[i],
                bound: bounds[i],
                t,
            });
        }
    }
    Ok(())
}

/// Stabilising function of variant A.
pub fn alpha_a(
    e1: Vec3,
    psi: f64,
    eta_d_dot: Vec3,
    gains: &GainsA,
    bars: &[BarrierSample; 3],
) -> Result<Vec3, ControlError> {
    check_interior(e1, bars, f64::NAN)?;
    Ok(laws::alpha_static(psi, e1, eta_d_dot, gains.k1, bars))
}

/// Second-stage virtual control of variant A.
#[allow(clippy::too_many_arguments)]
pub fn alpha2_a(
    model: &VesselModel,
    psi: f64,
    nu: Vec3,
    e1: Vec3,
    z: Vec3,
    alpha_dot: Vec3,
    gains: &GainsA,
    bars: &[BarrierSample; 3],
) -> Result<Vec3, ControlError> {
    check_velocity_interior(z, gains.k2_bounds, f64::NAN)?;
    Ok(laws::alpha2_static(
        model,
        psi,
        nu,
        e1,
        z,
        alpha_dot,
        gains.k2,
        gains.k2_bounds,
        bars,
    ))
}

/// Commanded input of variant A. `actuator.zeta` is the applied τ.
/// The whole rate `ρτ + α̇₂ − K₃z₂ − M⁻ᵀ W z` is scaled by the inverse
/// saturation gain, so `ż₂ = −K₃z₂ − M⁻ᵀ W z` wherever the gain is above the floor.
/// The flag reports whether the gain-inversion floor was active.
pub fn tauc_a(
    model: &VesselModel,
    z: Vec3,
    z2: Vec3,
    alpha2_dot: Vec3,
    actuator: &ActuatorState,
    bounds: &ActuatorBounds,
    gains: &GainsA,
) -> (Vec3, bool) {
    let (g_inv, guard) = guarded_gain_inverse(actuator, bounds);
    let w = Vec3(std::array::from_fn(|i| {
        z[i] / (gains.k2_bounds[i] * gains.k2_bounds[i] - z[i] * z[i])
    }));
    let coupling = model.mass_inv().transpose().mul_vec(w);
    let rate = actuator.zeta.hadamard(actuator.rho) + alpha2_dot - z2.hadamard(gains.k3) - coupling;
    (rate.hadamard(g_inv), guard)
}

/// Stabilising function of variants B and C.
pub fn alpha_b(
    e1: Vec3,
    psi: f64,
    eta_d_dot: Vec3,
    gains: &GainsBC,
    bars: &[BarrierSample; 3],
) -> Result<Vec3, ControlError> {
    check_interior(e1, bars, f64::NAN)?;
    Ok(laws::alpha_dynamic(
        psi, e1, eta_d_dot, gains.k1, gains.a, bars,
    ))
}

/// Body-force law of variant B (before the clamp).
#[allow(clippy::too_many_arguments)]
pub fn tau_b(
    model: &VesselModel,
    psi: f64,
    nu: Vec3,
    e1: Vec3,
    z: Vec3,
    alpha_dot: Vec3,
    gains: &GainsBC,
    bars: &[BarrierSample; 3],
) -> Result<Vec3, ControlError> {
    check_interior(e1, bars, f64::NAN)?;
    Ok(laws::force_dynamic(
        model, psi, nu, e1, z, alpha_dot, gains.k2, gains.p, bars,
    ))
}

/// Second-stage virtual control of variant C; same form as [`tau_b`].
#[allow(clippy::too_many_arguments)]
pub fn alpha2_c(
    model: &VesselModel,
    psi: f64,
    nu: Vec3,
    e1: Vec3,
    z: Vec3,
    alpha_dot: Vec3,
    gains: &GainsBC,
    bars: &[BarrierSample; 3],
) -> Result<Vec3, ControlError> {
    tau_b(model, psi, nu, e1, z, alpha_dot, gains, bars)
}

/// Commanded input of variant C. `actuator.zeta` is the applied τ.
/// As in [`tauc_a`], the feedback terms sit inside the gain inverse.
pub fn tauc_c(
    z: Vec3,
    z2: Vec3,
    alpha2_dot: Vec3,
    actuator: &ActuatorState,
    bounds: &ActuatorBounds,
    gains: &GainsBC,
) -> (Vec3, bool) {
    let (g_inv, guard) = guarded_gain_inverse(actuator, bounds);
    let rate = actuator.zeta.hadamard(actuator.rho) + alpha2_dot - z - z2.hadamard(gains.k3);
    (rate.hadamard(g_inv), guard)
}

/// Barrier gains `μᵢ` at the current error.
pub fn barrier_gains(e1: Vec3, bars: &[BarrierSample; 3], p: u32) -> Vec3 {
    Vec3(std::array::from_fn(|i| {
        laws::barrier_gain(e1[i], &bars[i], p)
    }))
}

/// `V₃` of variant A.
pub fn lyapunov_a(e1: Vec3, bars: &[BarrierSample; 3], z: Vec3, k2_bounds: Vec3, z2: Vec3) -> f64 {
    let mut v = 0.0;
    for i in 0..3 {
        let k = laws::active_width(e1[i], &bars[i]);
        v += 0.5 * (k * k / (k * k - e1[i] * e1[i])).ln();
        let kz = k2_bounds[i] * k2_bounds[i];
        v += 0.5 * (kz / (kz - z[i] * z[i])).ln();
    }
    v + 0.5 * z2.dot(z2)
}

/// `V₂` of variant B, or `V₃` of variant C when `z2` is given.
pub fn lyapunov_bc(
    model: &VesselModel,
    e1: Vec3,
    bars: &[BarrierSample; 3],
    p: u32,
    z: Vec3,
    z2: Option<Vec3>,
) -> f64 {
    let mut v = 0.0;
    for i in 0..3 {
        v += log_blf_power(normalized_error(e1[i], &bars[i]), p).unwrap_or(f64::INFINITY);
    }
    v += 0.5 * z.dot(model.mass_mul(z));
    if let Some(z2) = z2 {
        v += 0.5 * z2.dot(z2);
    }
    v
}

/// Closed-form `V̇` of the nominal closed loop.
///
/// For B/C this is the exact value before the inequality step, i.e.
/// `−Σ μᵢ eᵢ^{2p}(k1ᵢ + k̄ᵢ + k̇ᵢ/kᵢ) − zᵀK₂z [− z₂ᵀK₃z₂]`.
pub fn closed_form_vdot(
    variant: Variant,
    gains: &Gains,
    e1: Vec3,
    bars: &[BarrierSample; 3],
    z: Vec3,
    z2: Option<Vec3>,
) -> f64 {
    let z2_term = z2.map_or(0.0, |z2| z2.hadamard(z2).dot(gains.k3()));
    match gains {
        Gains::Static(g) => -e1.hadamard(e1).dot(g.k1) - z.hadamard(z).dot(g.k2) - z2_term,
        Gains::Dynamic(g) => {
            let two_p = 2 * g.p as i32;
            let mut v = 0.0;
            for i in 0..3 {
                let b = &bars[i];
                let (k, k_dot) = if e1[i] > 0.0 {
                    (b.k_b, b.k_b_dot)
                } else {
                    (b.k_a, b.k_a_dot)
                };
                let mu = laws::barrier_gain(e1[i], b, g.p);
                let rate = g.k1[i] + laws::time_varying_gain(b, g.a[i]) + k_dot / k;
                v -= mu * e1[i].powi(two_p) * rate;
            }
            v -= z.hadamard(z).dot(g.k2);
            if variant == Variant::C {
                v -= z2_term;
            }
            v
        }
    }
}

/// Everything the controller computed at one control instant.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlDecision {
    pub t: f64,
    pub e1: Vec3,
    pub e2: Vec3,
    pub alpha: Vec3,
    pub alpha_dot: Vec3,
    /// `z = ν − α`.
    pub z: Vec3,
    /// Variants A and C.
    pub alpha2: Option<Vec3>,
    pub alpha2_dot: Option<Vec3>,
    pub z2: Option<Vec3>,
    /// `τ_c` for A/C, the unclamped τ for B.
    pub command: Vec3,
    /// Force reaching the hull at the decision instant: `ζ` for A/C,
    /// the clamped τ for B.
    pub applied: Vec3,
    pub clamped: [bool; 3],
    pub guard: bool,
    pub barriers: [BarrierSample; 3],
    pub mu: Vec3,
    pub lyapunov: f64,
    pub closed_form_vdot: f64,
}

#[derive(Clone, Copy, Debug)]
struct DiffCache {
    t: f64,
    alpha: Vec3,
    alpha2: Vec3,
}

/// One closed-loop controller instance. Holds the backward-difference cache,
/// so each run owns its own instance.
#[derive(Clone, Debug)]
pub struct Controller {
    variant: Variant,
    model: VesselModel,
    trajectory: TrajectorySpec,
    envelope: EnvelopeSpec,
    gains: Gains,
    saturation: Option<SaturationConfig>,
    clamp: Option<ActuatorBounds>,
    mode: DerivativeMode,
    cache: Option<DiffCache>,
}

impl Controller {
    /// Gains are not re-validated here so that faulty gains can be injected.
    pub fn new(
        variant: Variant,
        model: VesselModel,
        trajectory: TrajectorySpec,
        envelope: EnvelopeSpec,
        gains: Gains,
        actuator: SaturationConfig,
    ) -> Self {
        // variant B only uses the bounds, as a clamp
        let (saturation, clamp) = if variant.has_actuator_model() {
            (Some(actuator), None)
        } else {
            (None, Some(actuator.bounds))
        };
        Self {
            variant,
            model,
            trajectory,
            envelope,
            gains,
            saturation,
            clamp,
            mode: DerivativeMode::Analytic,
            cache: None,
        }
    }

    pub fn with_derivative_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn model(&self) -> &VesselModel {
        &self.model
    }

    pub fn saturation(&self) -> Option<&SaturationConfig> {
        self.saturation.as_ref()
    }

    pub fn clamp_bounds(&self) -> Option<&ActuatorBounds> {
        self.clamp.as_ref()
    }

    pub fn reset(&mut self) {
        self.cache = None;
    }

    fn alpha_gen<T: Scalar>(&self, eta: Vec3<T>, t: T) -> Vec3<T> {
        let d = desired_state(&self.trajectory, t);
        let bars = envelope_raw(&self.envelope, &d, t);
        let e = eta - d.eta_d;
        match &self.gains {
            Gains::Static(g) => laws::alpha_static(eta[2], e, d.eta_d_dot, g.k1, &bars),
            Gains::Dynamic(g) => laws::alpha_dynamic(eta[2], e, d.eta_d_dot, g.k1, g.a, &bars),
        }
    }

    /// `(α, α̇)` with `α̇` taken along `η̇ = J(ψ)ν`.
    fn alpha_rate_gen<T: Scalar>(&self, eta: Vec3<T>, nu: Vec3<T>, t: T) -> (Vec3<T>, Vec3<T>) {
        let eta_dot = rotation_matrix(eta[2]).mul_vec(nu);
        let a = self.alpha_gen(eta.zip_map(eta_dot, Dual::new), Dual::new(t, T::one()));
        (a.map(|x| x.re), a.map(|x| x.eps))
    }

    fn second_stage_gen<T: Scalar>(
        &self,
        eta: Vec3<T>,
        nu: Vec3<T>,
        t: T,
        alpha: Vec3<T>,
        alpha_dot: Vec3<T>,
    ) -> Vec3<T> {
        let d = desired_state(&self.trajectory, t);
        let bars = envelope_raw(&self.envelope, &d, t);
        let e = eta - d.eta_d;
        let z = nu - alpha;
        match &self.gains {
            Gains::Static(g) => laws::alpha2_static(
                &self.model,
                eta[2],
                nu,
                e,
                z,
                alpha_dot,
                g.k2,
                g.k2_bounds,
                &bars,
            ),
            Gains::Dynamic(g) => {
                laws::force_dynamic(&self.model, eta[2], nu, e, z, alpha_dot, g.k2, g.p, &bars)
            }
        }
    }

    /// `(α, α̇)` at a state, by exact differentiation.
    pub fn alpha_and_rate(&self, t: f64, eta: Vec3, nu: Vec3) -> (Vec3, Vec3) {
        self.alpha_rate_gen(eta, nu, t)
    }

    /// `α` alone, for finite-difference checks.
    pub fn alpha_at(&self, t: f64, eta: Vec3) -> Vec3 {
        self.alpha_gen(eta, t)
    }

    /// `α₂` (or the variant B force law) alone, for finite-difference checks.
    pub fn alpha2_at(&self, t: f64, eta: Vec3, nu: Vec3) -> Vec3 {
        let (alpha, alpha_dot) = self.alpha_rate_gen(eta, nu, t);
        self.second_stage_gen(eta, nu, t, alpha, alpha_dot)
    }

    /// `(α₂, α̇₂)` at a state, by exact differentiation along the plant
    /// driven by the applied force `zeta`.
    pub fn alpha2_and_rate(&self, t: f64, eta: Vec3, nu: Vec3, zeta: Vec3) -> (Vec3, Vec3) {
        let eta_dot = rotation_matrix(eta[2]).mul_vec(nu);
        let nu_dot = self.model.acceleration(nu, zeta);
        let eta_d = eta.zip_map(eta_dot, Dual::new);
        let nu_d = nu.zip_map(nu_dot, Dual::new);
        let t_d = Dual::new(t, 1.0);
        let (alpha, alpha_dot) = self.alpha_rate_gen(eta_d, nu_d, t_d);
        let a2 = self.second_stage_gen(eta_d, nu_d, t_d, alpha, alpha_dot);
        (a2.map(|x| x.re), a2.map(|x| x.eps))
    }

    /// Evaluates the control law at one instant and updates the
    /// backward-difference cache.
    pub fn decide(
        &mut self,
        t: f64,
        eta: Vec3,
        nu: Vec3,
        zeta: Vec3,
    ) -> Result<ControlDecision, ControlError> {
        let decision = self.evaluate(t, eta, nu, zeta)?;
        self.cache = Some(DiffCache {
            t,
            alpha: decision.alpha,
            alpha2: decision.alpha2.unwrap_or(decision.command),
        });
        Ok(decision)
    }

    /// Evaluates the control law without touching the cache.
    pub fn evaluate(
        &self,
        t: f64,
        eta: Vec3,
        nu: Vec3,
        zeta: Vec3,
    ) -> Result<ControlDecision, ControlError> {
        let desired = desired_state(&self.trajectory, t);
        let bars = envelope(&self.envelope, &desired, t)?;
        let (e1, e2) = tracking_errors(eta, nu, &desired);
        check_interior(e1, &bars, t)?;

        let prev = self.cache.filter(|c| t > c.t);
        let (alpha, alpha_dot) = match self.mode {
            DerivativeMode::Analytic => self.alpha_and_rate(t, eta, nu),
            DerivativeMode::BackwardDifference => {
                let alpha = self.alpha_at(t, eta);
                let rate = prev.map_or(Vec3::zeros(), |c| (alpha - c.alpha) * (1.0 / (t - c.t)));
                (alpha, rate)
            }
        };
        let z = nu - alpha;
        if let Gains::Static(g) = &self.gains {
            check_velocity_interior(z, g.k2_bounds, t)?;
        }
        let second = self.second_stage_gen(eta, nu, t, alpha, alpha_dot);

        let mut decision = ControlDecision {
            t,
            e1,
            e2,
            alpha,
            alpha_dot,
            z,
            alpha2: None,
            alpha2_dot: None,
            z2: None,
            command: second,
            applied: second,
            clamped: [false; 3],
            guard: false,
            barriers: bars,
            mu: Vec3::zeros(),
            lyapunov: 0.0,
            closed_form_vdot: 0.0,
        };

        if let Some(sat) = &self.saturation {
            let alpha2_dot = match self.mode {
                DerivativeMode::Analytic => self.alpha2_and_rate(t, eta, nu, zeta).1,
                DerivativeMode::BackwardDifference => {
                    prev.map_or(Vec3::zeros(), |c| (second - c.alpha2) * (1.0 / (t - c.t)))
                }
            };
            let z2 = zeta - second;
            let state = sat.state(zeta);
            let (tau_c, guard) = match &self.gains {
                Gains::Static(g) => tauc_a(&self.model, z, z2, alpha2_dot, &state, &sat.bounds, g),
                Gains::Dynamic(g) => tauc_c(z, z2, alpha2_dot, &state, &sat.bounds, g),
            };
            decision.alpha2 = Some(second);
            decision.alpha2_dot = Some(alpha2_dot);
            decision.z2 = Some(z2);
            decision.command = tau_c;
            decision.applied = zeta;
            decision.guard = guard;
        } else if let Some(bounds) = &self.clamp {
            let (applied, hit) = bounds.clamp(second);
            decision.applied = applied;
            decision.clamped = hit;
        }

        match &self.gains {
            Gains::Static(g) => {
                decision.mu = barrier_gains(e1, &bars, 1);
                decision.lyapunov = lyapunov_a(
                    e1,
                    &bars,
                    z,
                    g.k2_bounds,
                    decision.z2.unwrap_or(Vec3::zeros()),
                );
            }
            Gains::Dynamic(g) => {
                decision.mu = barrier_gains(e1, &bars, g.p);
                decision.lyapunov = lyapunov_bc(&self.model, e1, &bars, g.p, z, decision.z2);
            }
        }
        decision.closed_form_vdot =
            closed_form_vdot(self.variant, &self.gains, e1, &bars, z, decision.z2);

        if !decision.command.is_finite() {
            return Err(ControlError::NonFinite("command", t));
        }
        if !decision.lyapunov.is_finite() {
            return Err(ControlError::NonFinite("Lyapunov value", t));
        }

        Ok(decision)
    }
}
