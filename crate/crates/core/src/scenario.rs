//! Resolved scenario definitions and the built-in presets.

use serde::{Deserialize, Serialize};

use crate::actuator::ActuatorBounds;
use crate::control::{DerivativeMode, Gains, GainsA, GainsBC, SaturationConfig, Variant};
use crate::linalg::Vec3;
use crate::trajectory::{deg, EnvelopeSpec, TrajectorySpec};
use crate::vessel::VesselParams;

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_HORIZON: f64 = 250.0;

/// When the controller is evaluated relative to the integrator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlUpdate {
    /// Once per step, held over the step.
    ZeroOrderHold,
    /// At every Runge-Kutta stage (continuous-time feedback).
    PerStage,
    /// Per stage, except that a step whose stages touch the gain-inversion
    /// floor or leave the actuator bounds is redone with the actuator state
    /// projected onto the band where the gain is above the floor.
    #[default]
    Adaptive,
}

/// A fully resolved closed-loop scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub variant: Variant,
    pub vessel: VesselParams,
    pub trajectory: TrajectorySpec,
    pub envelope: EnvelopeSpec,
    pub gains: Gains,
    /// Saturation model for A/C; for B only the bounds are used, as a clamp.
    pub actuator: SaturationConfig,
    pub initial_pose: Vec3,
    pub initial_velocity: Vec3,
    pub initial_zeta: Vec3,
    pub dt: f64,
    pub horizon: f64,
    pub derivative_mode: DerivativeMode,
    pub control_update: ControlUpdate,
}

impl Scenario {
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PaperPath {
    Ellipse,
    Eight,
}

impl PaperPath {
    pub const ALL: [PaperPath; 2] = [PaperPath::Ellipse, PaperPath::Eight];

    pub fn name(self) -> &'static str {
        match self {
            PaperPath::Ellipse => "ellipse",
            PaperPath::Eight => "eight",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "ellipse" => Some(PaperPath::Ellipse),
            "eight" => Some(PaperPath::Eight),
            _ => None,
        }
    }
}

/// Initial poses `(x, y, ψ in degrees)`, indexed `[variant group][path][P#]`.
const STATIC_POSES: [[f64; 3]; 3] = [[0.6, 0.15, 105.0], [-0.5, 0.20, 76.0], [0.4, -0.2, 80.0]];
const DYNAMIC_ELLIPSE_POSES: [[f64; 3]; 3] =
    [[0.6, -1.0, 110.0], [-1.0, 2.0, 100.0], [-2.0, -2.0, 80.0]];
const DYNAMIC_EIGHT_POSES: [[f64; 3]; 3] =
    [[-1.0, -1.0, 105.0], [0.99, 1.0, 95.0], [0.99, -2.0, 80.0]];

pub fn paper_initial_pose(variant: Variant, path: PaperPath, index: usize) -> Vec3 {
    let table = match (variant, path) {
        (Variant::A, _) => &STATIC_POSES,
        (_, PaperPath::Ellipse) => &DYNAMIC_ELLIPSE_POSES,
        (_, PaperPath::Eight) => &DYNAMIC_EIGHT_POSES,
    };
    let [x, y, psi] = table[index - 1];
    Vec3([x, y, deg(psi)])
}

pub fn paper_trajectory(path: PaperPath) -> TrajectorySpec {
    match path {
        PaperPath::Ellipse => TrajectorySpec::ellipse_paper(),
        PaperPath::Eight => TrajectorySpec::eight_scenario(),
    }
}

pub fn paper_envelope(variant: Variant, path: PaperPath) -> EnvelopeSpec {
    match (variant, path) {
        (Variant::A, _) => EnvelopeSpec::static_paper(),
        (_, PaperPath::Ellipse) => EnvelopeSpec::ellipse_envelope_paper(),
        (_, PaperPath::Eight) => EnvelopeSpec::eight_envelope_paper(),
    }
}

pub fn paper_gains(variant: Variant) -> Gains {
    match variant {
        Variant::A => Gains::Static(GainsA::paper()),
        _ => Gains::Dynamic(GainsBC::paper()),
    }
}

pub fn paper_actuator(variant: Variant) -> SaturationConfig {
    match variant {
        Variant::B => SaturationConfig {
            bounds: ActuatorBounds {
                tau_max: [4.0; 3],
                tau_min: [-4.0; 3],
            },
            ..SaturationConfig::paper()
        },
        _ => SaturationConfig::paper(),
    }
}

pub fn preset_name(variant: Variant, path: PaperPath, index: usize) -> String {
    format!("paper-{variant}-{}-P{index}", path.name())
}

/// One of the 18 built-in presets.
pub fn paper_preset(variant: Variant, path: PaperPath, index: usize) -> Scenario {
    assert!((1..=3).contains(&index), "initial pose index is 1, 2 or 3");
    Scenario {
        name: preset_name(variant, path, index),
        variant,
        vessel: VesselParams::cybership2(),
        trajectory: paper_trajectory(path),
        envelope: paper_envelope(variant, path),
        gains: paper_gains(variant),
        actuator: paper_actuator(variant),
        initial_pose: paper_initial_pose(variant, path, index),
        initial_velocity: Vec3([0.1, 0.0, 0.0]),
        initial_zeta: Vec3::zeros(),
        dt: DEFAULT_DT,
        horizon: DEFAULT_HORIZON,
        derivative_mode: DerivativeMode::Analytic,
        control_update: ControlUpdate::Adaptive,
    }
}

/// All 18 presets in a fixed order.
pub fn paper_presets() -> Vec<Scenario> {
    let mut out = Vec::with_capacity(18);
    for variant in Variant::ALL {
        for path in PaperPath::ALL {
            for index in 1..=3 {
                out.push(paper_preset(variant, path, index));
            }
        }
    }
    out
}

/// Resolves `paper-<A|B|C>-<ellipse|eight>-P<1-3>`.
pub fn preset_by_name(name: &str) -> Option<Scenario> {
    let (variant, path, index) = parse_preset_name(name)?;
    Some(paper_preset(variant, path, index))
}

fn parse_preset_name(name: &str) -> Option<(Variant, PaperPath, usize)> {
    let rest = name.strip_prefix("paper-")?;
    let mut parts = rest.split('-');
    let variant = parts.next()?.parse().ok()?;
    let path = PaperPath::parse(parts.next()?)?;
    let index: usize = parts.next()?.strip_prefix('P')?.parse().ok()?;
    if parts.next().is_some() || !(1..=3).contains(&index) {
        return None;
    }
    Some((variant, path, index))
}

/// Resolves a group name `paper-<A|B|C>-<ellipse|eight>` to its three presets.
pub fn preset_group(name: &str) -> Option<Vec<Scenario>> {
    let rest = name.strip_prefix("paper-")?;
    let (v, p) = rest.split_once('-')?;
    let variant: Variant = v.parse().ok()?;
    let path = PaperPath::parse(p)?;
    Some((1..=3).map(|i| paper_preset(variant, path, i)).collect())
}

pub fn preset_group_names() -> Vec<String> {
    let mut out = Vec::new();
    for variant in Variant::ALL {
        for path in PaperPath::ALL {
            out.push(format!("paper-{variant}-{}", path.name()));
        }
    }
    out
}
