//! Desired trajectories and constraint envelopes built from harmonic signals.
//!
//! Everything here is evaluated analytically and generically over
//! [`Scalar`], so controllers can differentiate through it.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::barrier::BarrierSample;
use crate::linalg::Vec3;
use crate::scalar::Scalar;
use crate::vessel::{rotation_matrix, Pose};

pub const AXIS_NAMES: [&str; 3] = ["x", "y", "psi"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wave {
    Cos,
    Sin,
}

/// `amplitude · wave(frequency·t + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default = "default_wave")]
    pub wave: Wave,
}

fn default_wave() -> Wave {
    Wave::Cos
}

impl Harmonic {
    pub fn cos(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase,
            wave: Wave::Cos,
        }
    }

    pub fn sin(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase,
            wave: Wave::Sin,
        }
    }

    /// Value and its first two time derivatives.
    fn eval<T: Scalar>(&self, t: T) -> [T; 3] {
        let arg = t * self.frequency + self.phase;
        let (s, c) = (arg.sin(), arg.cos());
        let (a, w) = (self.amplitude, self.frequency);
        match self.wave {
            Wave::Cos => [c * a, -(s * (a * w)), -(c * (a * w * w))],
            Wave::Sin => [s * a, c * (a * w), -(s * (a * w * w))],
        }
    }
}

/// Offset plus a sum of harmonics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSignal {
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub terms: Vec<Harmonic>,
}

impl AxisSignal {
    pub fn constant(offset: f64) -> Self {
        Self {
            offset,
            terms: Vec::new(),
        }
    }

    pub fn harmonic(offset: f64, term: Harmonic) -> Self {
        Self {
            offset,
            terms: vec![term],
        }
    }

    /// `[value, first derivative, second derivative]` at `t`.
    pub fn eval<T: Scalar>(&self, t: T) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for term in &self.terms {
            let v = term.eval(t);
            for k in 0..3 {
                out[k] += v[k];
            }
        }
        out[0] = out[0] + self.offset;
        out
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = !self.offset.is_finite()
            || self.terms.iter().any(|h| {
                !(h.amplitude.is_finite() && h.phase.is_finite() && h.frequency.is_finite())
                    || h.frequency < 0.0
            });
        if bad {
            Err(ScenarioError::BadSignal)
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryKind {
    Ellipse,
    Eight,
    CustomHarmonic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    pub x: AxisSignal,
    pub y: AxisSignal,
    pub psi: AxisSignal,
}

impl TrajectorySpec {
    /// Ellipse: `x = 4cos(0.05t) − 4`, `y = 6sin(0.05t)`, `ψ = 0.5π cos(0.02t)`.
    pub fn ellipse_paper() -> Self {
        Self {
            kind: TrajectoryKind::Ellipse,
            x: AxisSignal::harmonic(-4.0, Harmonic::cos(4.0, 0.05, 0.0)),
            y: AxisSignal::harmonic(0.0, Harmonic::sin(6.0, 0.05, 0.0)),
            psi: AxisSignal::harmonic(0.0, Harmonic::cos(0.5 * PI, 0.02, 0.0)),
        }
    }

    /// Eight: `x = 4(cos(0.05t) − 1)`, `y = 2.5 sin(0.1t)`, `ψ = 0.5π sin(0.02t)`.
    pub fn eight_paper() -> Self {
        Self {
            kind: TrajectoryKind::Eight,
            x: AxisSignal::harmonic(-4.0, Harmonic::cos(4.0, 0.05, 0.0)),
            y: AxisSignal::harmonic(0.0, Harmonic::sin(2.5, 0.1, 0.0)),
            psi: AxisSignal::harmonic(0.0, Harmonic::sin(0.5 * PI, 0.02, 0.0)),
        }
    }

    /// The eight-shaped path with heading `0.5π cos(0.02t)`, the heading
    /// profile that is consistent with the eight-shaped scenario envelopes
    /// and initial headings near 90°.
    pub fn eight_scenario() -> Self {
        Self {
            psi: AxisSignal::harmonic(0.0, Harmonic::cos(0.5 * PI, 0.02, 0.0)),
            ..Self::eight_paper()
        }
    }

    pub fn axes(&self) -> [&AxisSignal; 3] {
        [&self.x, &self.y, &self.psi]
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.axes().iter().try_for_each(|a| a.validate())
    }
}

/// Desired pose with derivatives and the matching body-frame rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesiredState<T = f64> {
    pub eta_d: Vec3<T>,
    pub eta_d_dot: Vec3<T>,
    pub eta_d_ddot: Vec3<T>,
    /// `Jᵀ(ψ_d) η̇_d`.
    pub nu_d: Vec3<T>,
}

impl DesiredState<f64> {
    pub fn pose(&self) -> Pose {
        Pose::from(self.eta_d)
    }
}

pub fn desired_state<T: Scalar>(spec: &TrajectorySpec, t: T) -> DesiredState<T> {
    let [x, y, psi] = spec.axes().map(|a| a.eval(t));
    let eta_d = Vec3([x[0], y[0], psi[0]]);
    let eta_d_dot = Vec3([x[1], y[1], psi[1]]);
    let eta_d_ddot = Vec3([x[2], y[2], psi[2]]);
    let nu_d = rotation_matrix(eta_d[2]).tr_mul_vec(eta_d_dot);
    DesiredState {
        eta_d,
        eta_d_dot,
        eta_d_ddot,
        nu_d,
    }
}

/// Constraint envelope on the pose tracking error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvelopeSpec {
    /// Constant error half-widths: `e ∈ (−k_a, k_b)`.
    ErrorBand { k_a: [f64; 3], k_b: [f64; 3] },
    /// Boundaries on the pose itself, `lower(t) < η < upper(t)`, giving
    /// `k_a = η_d − lower` and `k_b = upper − η_d`.
    Tube {
        upper: [AxisSignal; 3],
        lower: [AxisSignal; 3],
    },
}

impl EnvelopeSpec {
    /// Static error band for the static-constraint scenarios:
    /// `k_a = (0.8 m, 0.4 m, 15°)`, `k_b = (1 m, 0.5 m, 20°)`.
    pub fn static_paper() -> Self {
        Self::ErrorBand {
            k_a: [0.8, 0.4, 15f64.to_radians()],
            k_b: [1.0, 0.5, 20f64.to_radians()],
        }
    }

    /// Time-varying boundaries paired with the ellipse.
    pub fn ellipse_envelope_paper() -> Self {
        Self::Tube {
            upper: [
                AxisSignal::harmonic(0.0, Harmonic::sin(1.0, 0.05, FRAC_PI_4)),
                AxisSignal::harmonic(6.0, Harmonic::cos(2.0, 0.05, -PI / 6.0)),
                AxisSignal::harmonic(0.8, Harmonic::cos(0.4 * PI, 0.02, -PI / 10.0)),
            ],
            lower: [
                AxisSignal::harmonic(-8.0, Harmonic::sin(1.0, 0.05, FRAC_PI_4)),
                AxisSignal::harmonic(-6.0, Harmonic::sin(1.0, 0.05, 0.0)),
                AxisSignal::harmonic(-0.5, Harmonic::cos(0.6 * PI, 0.02, 0.0)),
            ],
        }
    }

    /// Time-varying boundaries paired with the eight.
    pub fn eight_envelope_paper() -> Self {
        Self::Tube {
            upper: [
                AxisSignal::harmonic(1.0, Harmonic::sin(1.0, 0.05, 0.0)),
                AxisSignal::harmonic(3.0, Harmonic::cos(0.5, 0.1, 0.0)),
                AxisSignal::harmonic(0.6, Harmonic::cos(0.4 * PI, 0.02, 0.0)),
            ],
            lower: [
                AxisSignal::harmonic(-9.0, Harmonic::cos(2.0, 0.05, 0.0)),
                AxisSignal::harmonic(-3.0, Harmonic::sin(1.0, 0.1, 0.0)),
                AxisSignal::harmonic(-0.5, Harmonic::cos(0.6 * PI, 0.02, 0.0)),
            ],
        }
    }

    pub fn is_time_varying(&self) -> bool {
        matches!(self, EnvelopeSpec::Tube { .. })
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        match self {
            EnvelopeSpec::ErrorBand { k_a, k_b } => {
                for axis in 0..3 {
                    if !(k_a[axis] > 0.0 && k_b[axis] > 0.0)
                        || !k_a[axis].is_finite()
                        || !k_b[axis].is_finite()
                    {
                        return Err(ScenarioError::NonPositiveBarrier {
                            axis: AXIS_NAMES[axis],
                            t: 0.0,
                            k_a: k_a[axis],
                            k_b: k_b[axis],
                        });
                    }
                }
                Ok(())
            }
            EnvelopeSpec::Tube { upper, lower } => upper
                .iter()
                .chain(lower.iter())
                .try_for_each(|s| s.validate()),
        }
    }

    /// Absolute pose boundaries `(lower, upper)` per axis at time `t`.
    pub fn boundaries(&self, desired: &DesiredState<f64>, t: f64) -> [(f64, f64); 3] {
        match self {
            EnvelopeSpec::ErrorBand { k_a, k_b } => {
                std::array::from_fn(|i| (desired.eta_d[i] - k_a[i], desired.eta_d[i] + k_b[i]))
            }
            EnvelopeSpec::Tube { upper, lower } => {
                std::array::from_fn(|i| (lower[i].eval(t)[0], upper[i].eval(t)[0]))
            }
        }
    }
}

/// Per-axis barrier half-widths and rates, without the positivity check.
pub fn envelope_raw<T: Scalar>(
    spec: &EnvelopeSpec,
    desired: &DesiredState<T>,
    t: T,
) -> [BarrierSample<T>; 3] {
    match spec {
        EnvelopeSpec::ErrorBand { k_a, k_b } => std::array::from_fn(|i| BarrierSample {
            k_a: T::from_f64(k_a[i]),
            k_b: T::from_f64(k_b[i]),
            k_a_dot: T::zero(),
            k_b_dot: T::zero(),
        }),
        EnvelopeSpec::Tube { upper, lower } => std::array::from_fn(|i| {
            let up = upper[i].eval(t);
            let lo = lower[i].eval(t);
            BarrierSample {
                k_a: desired.eta_d[i] - lo[0],
                k_b: up[0] - desired.eta_d[i],
                k_a_dot: desired.eta_d_dot[i] - lo[1],
                k_b_dot: up[1] - desired.eta_d_dot[i],
            }
        }),
    }
}

/// Barrier half-widths `(k_a, k_b)` with rates, failing if any is non-positive.
pub fn envelope(
    spec: &EnvelopeSpec,
    desired: &DesiredState<f64>,
    t: f64,
) -> Result<[BarrierSample; 3], ScenarioError> {
    let samples = envelope_raw(spec, desired, t);
    for (axis, s) in samples.iter().enumerate() {
        if !(s.k_a > 0.0 && s.k_b > 0.0) {
            return Err(ScenarioError::NonPositiveBarrier {
                axis: AXIS_NAMES[axis],
                t,
                k_a: s.k_a,
                k_b: s.k_b,
            });
        }
    }
    Ok(samples)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("non-positive barrier on axis {axis} at t = {t}: k_a = {k_a}, k_b = {k_b}")]
    NonPositiveBarrier {
        axis: &'static str,
        t: f64,
        k_a: f64,
        k_b: f64,
    },
    #[error("harmonic signal has a non-finite field or negative frequency")]
    BadSignal,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ValidationFailure {
    /// Envelope collapsed: the desired trajectory is not strictly inside.
    Envelope {
        axis: &'static str,
        t: f64,
        k_a: f64,
        k_b: f64,
    },
    /// Initial tracking error outside `(−k_a(0), k_b(0))`.
    InitialError {
        axis: &'static str,
        e: f64,
        k_a: f64,
        k_b: f64,
    },
    /// Initial heading more than half a turn from the desired heading.
    HeadingOffset {
        offset: f64,
    },
    BadSpec(String),
}

impl std::fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationFailure::Envelope { axis, t, k_a, k_b } => write!(
                f,
                "desired trajectory not strictly inside envelope on axis {axis} at t = {t} (k_a = {k_a}, k_b = {k_b})"
            ),
            ValidationFailure::InitialError { axis, e, k_a, k_b } => write!(
                f,
                "initial error on axis {axis} is {e}, outside (-{k_a}, {k_b})"
            ),
            ValidationFailure::HeadingOffset { offset } => {
                write!(f, "initial heading offset {offset} rad is not below pi")
            }
            ValidationFailure::BadSpec(msg) => write!(f, "{msg}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub min_k_a: [f64; 3],
    pub min_k_b: [f64; 3],
    pub failure: Option<ValidationFailure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Samples the envelope at every step of the horizon and checks the
/// initial pose against it.
pub fn validate_scenario(
    trajectory: &TrajectorySpec,
    envelope_spec: &EnvelopeSpec,
    initial_pose: Pose,
    horizon: f64,
    dt: f64,
) -> ValidationReport {
    let mut report = ValidationReport {
        samples: 0,
        min_k_a: [f64::INFINITY; 3],
        min_k_b: [f64::INFINITY; 3],
        failure: None,
    };
    if let Err(e) = trajectory.validate().and(envelope_spec.validate()) {
        report.failure = Some(ValidationFailure::BadSpec(e.to_string()));
        return report;
    }
    if !(dt > 0.0) || !(horizon >= 0.0) || !initial_pose.is_finite() {
        report.failure = Some(ValidationFailure::BadSpec(
            "dt must be positive, horizon non-negative, initial pose finite".into(),
        ));
        return report;
    }
    let steps = (horizon / dt).round() as usize;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let desired = desired_state(trajectory, t);
        let samples = envelope_raw(envelope_spec, &desired, t);
        report.samples += 1;
        for (i, s) in samples.iter().enumerate() {
            report.min_k_a[i] = report.min_k_a[i].min(s.k_a);
            report.min_k_b[i] = report.min_k_b[i].min(s.k_b);
            if report.failure.is_none() && !(s.k_a > 0.0 && s.k_b > 0.0) {
                report.failure = Some(ValidationFailure::Envelope {
                    axis: AXIS_NAMES[i],
                    t,
                    k_a: s.k_a,
                    k_b: s.k_b,
                });
            }
        }
        if k == 0 && report.failure.is_none() {
            let e = initial_pose.to_vec() - desired.eta_d;
            if !(e[2].abs() < PI) {
                report.failure = Some(ValidationFailure::HeadingOffset { offset: e[2] });
            }
            for (i, s) in samples.iter().enumerate() {
                if report.failure.is_none() && !(-s.k_a < e[i] && e[i] < s.k_b) {
                    report.failure = Some(ValidationFailure::InitialError {
                        axis: AXIS_NAMES[i],
                        e: e[i],
                        k_a: s.k_a,
                        k_b: s.k_b,
                    });
                }
            }
        }
    }
    report
}

pub fn deg(d: f64) -> f64 {
    d.to_radians()
}
