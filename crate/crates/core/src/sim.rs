//! Fixed-step closed-loop simulation.
//!
//! The augmented state is `[η, ν, ζ]`; `ζ` stays at zero for variant B.

use thiserror::Error;

use crate::actuator::{floor_band, saturation_derivative, saturation_flow};
use crate::barrier::BarrierSample;
use crate::control::{ControlDecision, ControlError, Controller, Variant};
use crate::linalg::Vec3;
use crate::scenario::{ControlUpdate, Scenario};
use crate::trajectory::{desired_state, envelope};
use crate::vessel::{rotation_matrix, ModelError, VesselModel};

/// Position error norm below which a run counts as settled.
pub const SETTLING_RADIUS: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("non-finite derivative in component {component} at t = {t}")]
pub struct IntegrationError {
    pub component: usize,
    pub t: f64,
}

fn check_finite<const N: usize>(d: [f64; N], t: f64) -> Result<[f64; N], IntegrationError> {
    match d.iter().position(|v| !v.is_finite()) {
        Some(component) => Err(IntegrationError { component, t }),
        None => Ok(d),
    }
}

fn axpy<const N: usize>(y: &[f64; N], k: &[f64; N], h: f64) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// One classical Runge-Kutta step of `ẏ = f(t, y)`.
pub fn rk4_step<const N: usize, F>(
    mut f: F,
    t: f64,
    y: &[f64; N],
    dt: f64,
) -> Result<[f64; N], IntegrationError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    assert!(dt > 0.0, "step size must be positive");
    let h = 0.5 * dt;
    let k1 = check_finite(f(t, y), t)?;
    let k2 = check_finite(f(t + h, &axpy(y, &k1, h)), t + h)?;
    let k3 = check_finite(f(t + h, &axpy(y, &k2, h)), t + h)?;
    let k4 = check_finite(f(t + dt, &axpy(y, &k3, dt)), t + dt)?;
    let next =
        std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    check_finite(next, t + dt)
}

/// One row of the closed-loop trace, taken at a control instant.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub eta: Vec3,
    pub nu: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    pub z: Vec3,
    pub z2: Option<Vec3>,
    pub tau_applied: Vec3,
    pub tau_commanded: Vec3,
    pub barriers: [BarrierSample; 3],
    pub lyapunov: f64,
    /// Central-difference estimate, filled in after the run.
    pub vdot: f64,
    pub closed_form_vdot: f64,
    pub clamped: [bool; 3],
    pub guard: bool,
    /// A barrier or actuator branch switch happened since the previous record.
    pub q_switch: bool,
}

impl TraceRecord {
    fn from_decision(d: &ControlDecision, eta: Vec3, nu: Vec3) -> Self {
        Self {
            t: d.t,
            eta,
            nu,
            e1: d.e1,
            e2: d.e2,
            z: d.z,
            z2: d.z2,
            tau_applied: d.applied,
            tau_commanded: d.command,
            barriers: d.barriers,
            lyapunov: d.lyapunov,
            vdot: f64::NAN,
            closed_form_vdot: d.closed_form_vdot,
            clamped: d.clamped,
            guard: d.guard,
            q_switch: false,
        }
    }

    pub fn position_error(&self) -> f64 {
        self.e1[0].hypot(self.e1[1])
    }

    fn branches(&self) -> [bool; 6] {
        let zeta = self.z2.map(|_| self.tau_applied).unwrap_or(Vec3::zeros());
        std::array::from_fn(|i| {
            if i < 3 {
                self.e1[i] > 0.0
            } else {
                zeta[i - 3] > 0.0
            }
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HaltReason {
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error("actuator output tau[{axis}] = {value} outside ({min}, {max}) at t = {t}")]
    ActuatorBound {
        axis: usize,
        value: f64,
        min: f64,
        max: f64,
        t: f64,
    },
    #[error("invalid vessel model: {0}")]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub steps: usize,
    pub completed: bool,
    pub max_abs_e1: Vec3,
    pub max_abs_z: Vec3,
    pub max_abs_nu: Vec3,
    /// Earliest time after which `‖e_pos‖ < SETTLING_RADIUS` held to the end.
    pub settling_time: Option<f64>,
    pub tau_max: Vec3,
    pub tau_min: Vec3,
    /// Extremes of `ζ` over every Runge-Kutta stage (A/C).
    pub stage_tau_max: Vec3,
    pub stage_tau_min: Vec3,
    pub clamp_count: usize,
    pub guard_count: usize,
    pub final_t: f64,
    pub final_eta: Vec3,
    pub final_nu: Vec3,
    pub final_e1: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub name: String,
    pub variant: Variant,
    pub trace: Vec<TraceRecord>,
    pub summary: Summary,
    pub halt: Option<HaltReason>,
}

impl SimResult {
    pub fn ok(&self) -> bool {
        self.halt.is_none()
    }
}

struct Augmented {
    eta: Vec3,
    nu: Vec3,
    zeta: Vec3,
}

fn split(y: &[f64; 9]) -> Augmented {
    Augmented {
        eta: Vec3([y[0], y[1], y[2]]),
        nu: Vec3([y[3], y[4], y[5]]),
        zeta: Vec3([y[6], y[7], y[8]]),
    }
}

fn join(eta: Vec3, nu: Vec3, zeta: Vec3) -> [f64; 9] {
    [
        eta[0], eta[1], eta[2], nu[0], nu[1], nu[2], zeta[0], zeta[1], zeta[2],
    ]
}

pub fn build_controller(s: &Scenario) -> Result<Controller, ModelError> {
    let model = VesselModel::new(s.vessel)?;
    Ok(Controller::new(
        s.variant,
        model,
        s.trajectory.clone(),
        s.envelope.clone(),
        s.gains,
        s.actuator,
    )
    .with_derivative_mode(s.derivative_mode))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum StepKind {
    /// Command held over the step; the actuator follows its exact flow.
    Held,
    /// Controller re-evaluated at every stage.
    Staged,
    /// As `Staged`, with `ζ` kept inside the band where the gain is above the
    /// inversion floor; at the band edge an outward `ζ̇` is dropped.
    Projected,
}

struct StepOutcome {
    next: Result<[f64; 9], IntegrationError>,
    fault: Option<HaltReason>,
    guard: bool,
    lo: Vec3,
    hi: Vec3,
}

#[allow(clippy::too_many_arguments)]
fn try_step(
    s: &Scenario,
    ctrl: &Controller,
    model: &VesselModel,
    kind: StepKind,
    t: f64,
    y: &[f64; 9],
    held: Vec3,
) -> StepOutcome {
    let saturated = s.variant.has_actuator_model();
    let bounds = s.actuator.bounds;
    let held_state = s.actuator.state(split(y).zeta);
    // Under a held command the actuator sub-block is decoupled from the hull
    // and is advanced by its exact flow; RK4 only sees it as a known input.
    let exact_actuator = saturated && kind == StepKind::Held;
    let mut fault: Option<HaltReason> = None;
    let mut guard = false;
    let mut lo = Vec3([f64::INFINITY; 3]);
    let mut hi = Vec3([f64::NEG_INFINITY; 3]);
    let (band_lo, band_hi) = floor_band(&bounds, s.actuator.n);
    let project = saturated && kind == StepKind::Projected;
    let deriv = |ts: f64, ys: &[f64; 9]| -> [f64; 9] {
        let mut st = split(ys);
        if exact_actuator {
            st.zeta = saturation_flow(&held_state, &bounds, held, ts - t);
        }
        if project {
            st.zeta = Vec3(std::array::from_fn(|i| {
                st.zeta[i].clamp(band_lo[i], band_hi[i])
            }));
        }
        let command = match kind {
            StepKind::Held => held,
            StepKind::Staged | StepKind::Projected => {
                match ctrl.evaluate(ts, st.eta, st.nu, st.zeta) {
                    Ok(d) => {
                        guard |= d.guard;
                        d.command
                    }
                    Err(e) => {
                        fault.get_or_insert(e.into());
                        held
                    }
                }
            }
        };
        let eta_dot = rotation_matrix(st.eta[2]).mul_vec(st.nu);
        let (tau, zeta_dot) = if saturated {
            for i in 0..3 {
                hi[i] = hi[i].max(st.zeta[i]);
                lo[i] = lo[i].min(st.zeta[i]);
                if !(bounds.tau_min[i] < st.zeta[i] && st.zeta[i] < bounds.tau_max[i]) {
                    fault.get_or_insert(HaltReason::ActuatorBound {
                        axis: i,
                        value: st.zeta[i],
                        min: bounds.tau_min[i],
                        max: bounds.tau_max[i],
                        t: ts,
                    });
                }
            }
            let state = s.actuator.state(st.zeta);
            let mut zeta_dot = saturation_derivative(&state, &bounds, command);
            if project {
                for i in 0..3 {
                    let outward = (st.zeta[i] >= band_hi[i] && zeta_dot[i] > 0.0)
                        || (st.zeta[i] <= band_lo[i] && zeta_dot[i] < 0.0);
                    if outward {
                        zeta_dot[i] = 0.0;
                    }
                }
            }
            (st.zeta, zeta_dot)
        } else {
            (bounds.clamp(command).0, Vec3::zeros())
        };
        join(eta_dot, model.acceleration(st.nu, tau), zeta_dot)
    };
    let mut next = rk4_step(deriv, t, y, s.dt);
    if exact_actuator {
        if let Ok(n) = next.as_mut() {
            let zeta = saturation_flow(&held_state, &bounds, held, s.dt);
            n[6..].copy_from_slice(&zeta.0);
        }
    }
    if project {
        if let Ok(n) = next.as_mut() {
            for i in 0..3 {
                n[6 + i] = n[6 + i].clamp(band_lo[i], band_hi[i]);
            }
        }
    }
    StepOutcome {
        next,
        fault,
        guard,
        lo,
        hi,
    }
}

/// Integrates the closed loop over the scenario horizon. Halts on the first
/// barrier violation, actuator-bound violation or non-finite value.
pub fn run_scenario(s: &Scenario) -> SimResult {
    let steps = s.steps();
    let mut trace = Vec::with_capacity(steps);
    let mut halt = None;
    let mut stage_max = Vec3([f64::NEG_INFINITY; 3]);
    let mut stage_min = Vec3([f64::INFINITY; 3]);
    let mut y = join(s.initial_pose, s.initial_velocity, s.initial_zeta);
    let mut t_end = 0.0;
    let saturated = s.variant.has_actuator_model();
    let bounds = s.actuator.bounds;

    match build_controller(s) {
        Err(e) => halt = Some(HaltReason::Model(e)),
        Ok(mut ctrl) => {
            let model = ctrl.model().clone();
            for k in 0..steps {
                let t = k as f64 * s.dt;
                t_end = t;
                let cur = split(&y);
                let decision = match ctrl.decide(t, cur.eta, cur.nu, cur.zeta) {
                    Ok(d) => d,
                    Err(e) => {
                        halt = Some(e.into());
                        break;
                    }
                };
                trace.push(TraceRecord::from_decision(&decision, cur.eta, cur.nu));

                let held = decision.command;
                let outcome = match s.control_update {
                    ControlUpdate::ZeroOrderHold => {
                        try_step(s, &ctrl, &model, StepKind::Held, t, &y, held)
                    }
                    ControlUpdate::PerStage => {
                        try_step(s, &ctrl, &model, StepKind::Staged, t, &y, held)
                    }
                    ControlUpdate::Adaptive => {
                        let staged = try_step(s, &ctrl, &model, StepKind::Staged, t, &y, held);
                        let resolved =
                            staged.fault.is_none() && !staged.guard && staged.next.is_ok();
                        if resolved || !saturated {
                            staged
                        } else {
                            try_step(s, &ctrl, &model, StepKind::Projected, t, &y, held)
                        }
                    }
                };
                for i in 0..3 {
                    stage_max[i] = stage_max[i].max(outcome.hi[i]);
                    stage_min[i] = stage_min[i].min(outcome.lo[i]);
                }
                match outcome.next {
                    Ok(next) => y = next,
                    Err(e) => {
                        halt = Some(e.into());
                        break;
                    }
                }
                if let Some(fault) = outcome.fault {
                    halt = Some(fault);
                    break;
                }
                t_end = (k + 1) as f64 * s.dt;
            }
            if halt.is_none() && saturated {
                let zeta = split(&y).zeta;
                if let Some(i) =
                    (0..3).find(|&i| !(bounds.tau_min[i] < zeta[i] && zeta[i] < bounds.tau_max[i]))
                {
                    halt = Some(HaltReason::ActuatorBound {
                        axis: i,
                        value: zeta[i],
                        min: bounds.tau_min[i],
                        max: bounds.tau_max[i],
                        t: t_end,
                    });
                }
            }
        }
    }

    let last = split(&y);
    let desired = desired_state(&s.trajectory, t_end);
    let final_e1 = last.eta - desired.eta_d;
    if halt.is_none() {
        match envelope(&s.envelope, &desired, t_end) {
            Err(e) => halt = Some(ControlError::from(e).into()),
            Ok(bars) => {
                if let Err(e) = crate::control::check_interior(final_e1, &bars, t_end) {
                    halt = Some(e.into());
                }
            }
        }
    }

    finish_trace(&mut trace);
    let summary = summarize(
        &trace,
        steps,
        halt.is_none(),
        (stage_max, stage_min),
        (t_end, last.eta, last.nu, final_e1),
    );
    SimResult {
        name: s.name.clone(),
        variant: s.variant,
        trace,
        summary,
        halt,
    }
}

fn finish_trace(trace: &mut [TraceRecord]) {
    let vdot = central_difference(trace);
    for (i, r) in trace.iter_mut().enumerate() {
        r.vdot = vdot[i];
    }
    for i in 1..trace.len() {
        let switched = trace[i].branches() != trace[i - 1].branches();
        trace[i].q_switch = switched;
    }
}

/// Central difference of `V` over the trace, one-sided at the ends.
fn central_difference(trace: &[TraceRecord]) -> Vec<f64> {
    let n = trace.len();
    (0..n)
        .map(|i| {
            if n < 2 {
                return 0.0;
            }
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (trace[b].lyapunov - trace[a].lyapunov) / (trace[b].t - trace[a].t)
        })
        .collect()
}

fn summarize(
    trace: &[TraceRecord],
    steps: usize,
    completed: bool,
    (stage_tau_max, stage_tau_min): (Vec3, Vec3),
    (final_t, final_eta, final_nu, final_e1): (f64, Vec3, Vec3, Vec3),
) -> Summary {
    let mut max_abs_e1: Vec3 = Vec3::zeros();
    let mut max_abs_z: Vec3 = Vec3::zeros();
    let mut max_abs_nu: Vec3 = Vec3::zeros();
    let mut tau_max = Vec3([f64::NEG_INFINITY; 3]);
    let mut tau_min = Vec3([f64::INFINITY; 3]);
    let mut clamp_count = 0;
    let mut guard_count = 0;
    for r in trace {
        for i in 0..3 {
            max_abs_e1[i] = max_abs_e1[i].max(r.e1[i].abs());
            max_abs_z[i] = max_abs_z[i].max(r.z[i].abs());
            max_abs_nu[i] = max_abs_nu[i].max(r.nu[i].abs());
            tau_max[i] = tau_max[i].max(r.tau_applied[i]);
            tau_min[i] = tau_min[i].min(r.tau_applied[i]);
        }
        clamp_count += usize::from(r.clamped.iter().any(|&c| c));
        guard_count += usize::from(r.guard);
    }
    let settling_time = if !completed || final_e1[0].hypot(final_e1[1]) >= SETTLING_RADIUS {
        None
    } else {
        match trace
            .iter()
            .rposition(|r| r.position_error() >= SETTLING_RADIUS)
        {
            None => trace.first().map(|r| r.t),
            Some(i) => Some(trace.get(i + 1).map_or(final_t, |r| r.t)),
        }
    };
    Summary {
        steps,
        completed,
        max_abs_e1,
        max_abs_z,
        max_abs_nu,
        settling_time,
        tau_max,
        tau_min,
        stage_tau_max,
        stage_tau_min,
        clamp_count,
        guard_count,
        final_t,
        final_eta,
        final_nu,
        final_e1,
    }
}

/// One point of the Lyapunov series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovPoint {
    pub t: f64,
    pub v: f64,
    pub vdot: f64,
    pub closed_form: f64,
    pub q_switch: bool,
}

/// `(t, V, V̇ by central difference, closed-form V̇)` along a trace.
pub fn lyapunov_trace(trace: &[TraceRecord]) -> Vec<LyapunovPoint> {
    let vdot = central_difference(trace);
    trace
        .iter()
        .zip(vdot)
        .map(|(r, vdot)| LyapunovPoint {
            t: r.t,
            v: r.lyapunov,
            vdot,
            closed_form: r.closed_form_vdot,
            q_switch: r.q_switch,
        })
        .collect()
}
