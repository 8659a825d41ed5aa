//! TOML scenario files.
//!
//! A file either names a built-in `preset` and overrides some of its fields,
//! or spells out a full scenario. Unknown keys are rejected. Angles may be
//! written as plain radians or as strings with a `deg`/`rad` suffix:
//!
//! ```toml
//! variant = "A"
//! trajectory = "ellipse-paper"
//! envelope = "static-paper"
//!
//! [gains]
//! k1 = [1.0, 2.0, 3.0]
//! k2 = [1.0, 1.0, 3.0]
//! k3 = [2.0, 3.0, 5.0]
//! k2_bounds = [1.0, 1.0, 3.0]
//!
//! [actuator]
//! tau_max = [4.0, 4.0, 4.0]
//! tau_min = [-3.5, -3.5, -3.5]
//! rho = [0.2, 0.2, 0.2]
//!
//! [initial]
//! pose = [0.6, 0.15, "105deg"]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use thiserror::Error;

use crate::actuator::{ActuatorBounds, ActuatorError, ActuatorState};
use crate::control::{
    DerivativeMode, GainError, Gains, GainsA, GainsBC, SaturationConfig, Variant,
};
use crate::linalg::Vec3;
use crate::scenario::{preset_by_name, ControlUpdate, Scenario, DEFAULT_DT, DEFAULT_HORIZON};
use crate::trajectory::{validate_scenario, EnvelopeSpec, TrajectorySpec, ValidationFailure};
use crate::vessel::{ModelError, Pose, VesselModel, VesselParams};

/// A number in radians, or a string such as `"105deg"` or `"0.5rad"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle(pub f64);

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct AngleVisitor;
        impl Visitor<'_> for AngleVisitor {
            type Value = Angle;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an angle in radians or a string like \"105deg\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Angle, E> {
                Ok(Angle(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Angle, E> {
                Ok(Angle(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Angle, E> {
                Ok(Angle(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Angle, E> {
                parse_angle(v).map(Angle).map_err(E::custom)
            }
        }
        d.deserialize_any(AngleVisitor)
    }
}

/// Parses `"<number>deg"` or `"<number>rad"`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (num, to_rad) = if let Some(n) = s.strip_suffix("deg") {
        (n, true)
    } else if let Some(n) = s.strip_suffix("rad") {
        (n, false)
    } else {
        return Err(format!("angle {s:?} needs a \"deg\" or \"rad\" suffix"));
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("angle {s:?} does not start with a number"))?;
    Ok(if to_rad { v.to_radians() } else { v })
}

/// `[x, y, ψ]` with an angle in the last slot.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
struct PoseTriple(f64, f64, Angle);

impl PoseTriple {
    fn vec(self) -> Vec3 {
        Vec3([self.0, self.1, self.2 .0])
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum VesselEntry {
    Preset(String),
    Params(VesselParams),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TrajectoryEntry {
    Preset(String),
    Spec(TrajectorySpec),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
enum EnvelopeTable {
    ErrorBand {
        k_a: PoseTriple,
        k_b: PoseTriple,
    },
    Tube {
        upper: [crate::trajectory::AxisSignal; 3],
        lower: [crate::trajectory::AxisSignal; 3],
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum EnvelopeEntry {
    Preset(String),
    Spec(EnvelopeTable),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GainsFile {
    k1: Option<[f64; 3]>,
    k2: Option<[f64; 3]>,
    k3: Option<[f64; 3]>,
    k2_bounds: Option<[f64; 3]>,
    a: Option<[f64; 3]>,
    p: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActuatorFile {
    tau_max: Option<[f64; 3]>,
    tau_min: Option<[f64; 3]>,
    rho: Option<[f64; 3]>,
    n: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialFile {
    pose: Option<PoseTriple>,
    velocity: Option<[f64; 3]>,
    zeta: Option<[f64; 3]>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for artifacts; relative paths resolve against the config file.
    pub dir: Option<PathBuf>,
    /// Trace file name inside `dir`.
    pub trace: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    preset: Option<String>,
    name: Option<String>,
    variant: Option<Variant>,
    vessel: Option<VesselEntry>,
    trajectory: Option<TrajectoryEntry>,
    envelope: Option<EnvelopeEntry>,
    gains: Option<GainsFile>,
    actuator: Option<ActuatorFile>,
    initial: Option<InitialFile>,
    dt: Option<f64>,
    horizon: Option<f64>,
    derivative_mode: Option<DerivativeMode>,
    control_update: Option<ControlUpdate>,
    output: Option<OutputConfig>,
}

/// A resolved scenario plus where its artifacts go.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub output: OutputConfig,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("missing required field `{0}`")]
    Missing(&'static str),
    #[error("field `{field}` does not apply to variant {variant}")]
    NotApplicable {
        field: &'static str,
        variant: Variant,
    },
    #[error("unknown {kind} preset `{name}`")]
    UnknownPreset { kind: &'static str, name: String },
    #[error("invalid gains: {0}")]
    Gains(#[from] GainError),
    #[error("invalid actuator: {0}")]
    Actuator(#[from] ActuatorError),
    #[error("invalid vessel: {0}")]
    Vessel(#[from] ModelError),
    #[error("dt must be positive and the horizon at least dt (dt = {dt}, horizon = {horizon})")]
    Timing { dt: f64, horizon: f64 },
    #[error("scenario fails validation (positive-barrier and interior-start invariants): {0}")]
    Invalid(String),
}

impl From<ValidationFailure> for ConfigError {
    fn from(f: ValidationFailure) -> Self {
        ConfigError::Invalid(f.to_string())
    }
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn trajectory_preset(name: &str) -> Result<TrajectorySpec, ConfigError> {
    match name {
        "ellipse-paper" => Ok(TrajectorySpec::ellipse_paper()),
        "eight-paper" => Ok(TrajectorySpec::eight_scenario()),
        "eight-paper-sin-heading" => Ok(TrajectorySpec::eight_paper()),
        _ => Err(ConfigError::UnknownPreset {
            kind: "trajectory",
            name: name.into(),
        }),
    }
}

fn envelope_preset(name: &str) -> Result<EnvelopeSpec, ConfigError> {
    match name {
        "static-paper" => Ok(EnvelopeSpec::static_paper()),
        "ellipse-envelope-paper" => Ok(EnvelopeSpec::ellipse_envelope_paper()),
        "eight-envelope-paper" => Ok(EnvelopeSpec::eight_envelope_paper()),
        _ => Err(ConfigError::UnknownPreset {
            kind: "envelope",
            name: name.into(),
        }),
    }
}

fn vessel_preset(name: &str) -> Result<VesselParams, ConfigError> {
    match name {
        "cybership2" => Ok(VesselParams::cybership2()),
        _ => Err(ConfigError::UnknownPreset {
            kind: "vessel",
            name: name.into(),
        }),
    }
}

fn resolve_gains(
    variant: Variant,
    base: Option<Gains>,
    file: Option<GainsFile>,
) -> Result<Gains, ConfigError> {
    let f = file.unwrap_or_default();
    let pick = |v: Option<[f64; 3]>, base: Option<Vec3>, name| {
        v.map(Vec3).or(base).ok_or(ConfigError::Missing(name))
    };
    match variant {
        Variant::A => {
            if f.a.is_some() {
                return Err(ConfigError::NotApplicable {
                    field: "gains.a",
                    variant,
                });
            }
            if f.p.is_some() {
                return Err(ConfigError::NotApplicable {
                    field: "gains.p",
                    variant,
                });
            }
            let b = match base {
                Some(Gains::Static(g)) => Some(g),
                _ => None,
            };
            Ok(Gains::Static(GainsA {
                k1: pick(f.k1, b.map(|g| g.k1), "gains.k1")?,
                k2: pick(f.k2, b.map(|g| g.k2), "gains.k2")?,
                k3: pick(f.k3, b.map(|g| g.k3), "gains.k3")?,
                k2_bounds: pick(f.k2_bounds, b.map(|g| g.k2_bounds), "gains.k2_bounds")?,
            }))
        }
        Variant::B | Variant::C => {
            if f.k2_bounds.is_some() {
                return Err(ConfigError::NotApplicable {
                    field: "gains.k2_bounds",
                    variant,
                });
            }
            if variant == Variant::B && f.k3.is_some() {
                return Err(ConfigError::NotApplicable {
                    field: "gains.k3",
                    variant,
                });
            }
            let b = match base {
                Some(Gains::Dynamic(g)) => Some(g),
                _ => None,
            };
            let k3 = if variant == Variant::B {
                // Unused by B; the shared default keeps presets and files equal.
                b.map(|g| g.k3).unwrap_or(GainsBC::paper().k3)
            } else {
                pick(f.k3, b.map(|g| g.k3), "gains.k3")?
            };
            Ok(Gains::Dynamic(GainsBC {
                k1: pick(f.k1, b.map(|g| g.k1), "gains.k1")?,
                k2: pick(f.k2, b.map(|g| g.k2), "gains.k2")?,
                k3,
                a: pick(f.a, b.map(|g| g.a), "gains.a")?,
                p: f.p.or(b.map(|g| g.p)).unwrap_or(1),
            }))
        }
    }
}

fn resolve_actuator(
    variant: Variant,
    base: Option<SaturationConfig>,
    file: Option<ActuatorFile>,
) -> Result<SaturationConfig, ConfigError> {
    let f = file.unwrap_or_default();
    if !variant.has_actuator_model() {
        if f.rho.is_some() {
            return Err(ConfigError::NotApplicable {
                field: "actuator.rho",
                variant,
            });
        }
        if f.n.is_some() {
            return Err(ConfigError::NotApplicable {
                field: "actuator.n",
                variant,
            });
        }
    }
    let bounds = ActuatorBounds {
        tau_max: f
            .tau_max
            .or(base.map(|b| b.bounds.tau_max))
            .ok_or(ConfigError::Missing("actuator.tau_max"))?,
        tau_min: f
            .tau_min
            .or(base.map(|b| b.bounds.tau_min))
            .ok_or(ConfigError::Missing("actuator.tau_min"))?,
    };
    bounds.validate()?;
    let (rho, n) = if variant.has_actuator_model() {
        let rho = f
            .rho
            .map(Vec3)
            .or(base.map(|b| b.rho))
            .ok_or(ConfigError::Missing("actuator.rho"))?;
        let n = f.n.or(base.map(|b| b.n)).unwrap_or(2);
        ActuatorState::new(Vec3::zeros(), rho, n)?;
        (rho, n)
    } else {
        // The clamp of variant B ignores the shaping constants.
        (Vec3([0.2; 3]), 2)
    };
    Ok(SaturationConfig { bounds, rho, n })
}

/// Parses and fully resolves a scenario file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    resolve(file)
}

/// Reads, parses and resolves a scenario file. A relative output directory
/// is made relative to the file's directory.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut cfg = parse_config(&text)?;
    if let (Some(dir), Some(parent)) = (cfg.output.dir.as_mut(), path.parent()) {
        if dir.is_relative() {
            *dir = parent.join(&*dir);
        }
    }
    if cfg.scenario.name.is_empty() {
        cfg.scenario.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(cfg)
}

fn resolve(f: ConfigFile) -> Result<ScenarioConfig, ConfigError> {
    let base = match &f.preset {
        Some(name) => Some(
            preset_by_name(name).ok_or_else(|| ConfigError::UnknownPreset {
                kind: "scenario",
                name: name.clone(),
            })?,
        ),
        None => None,
    };
    let variant = f
        .variant
        .or(base.as_ref().map(|b| b.variant))
        .ok_or(ConfigError::Missing("variant"))?;
    // A base preset of another variant only contributes variant-neutral fields.
    let same = base.as_ref().filter(|b| b.variant == variant);

    let vessel = match f.vessel {
        Some(VesselEntry::Preset(name)) => vessel_preset(&name)?,
        Some(VesselEntry::Params(p)) => p,
        None => base
            .as_ref()
            .map_or(VesselParams::cybership2(), |b| b.vessel),
    };
    VesselModel::new(vessel)?;
    let trajectory = match f.trajectory {
        Some(TrajectoryEntry::Preset(name)) => trajectory_preset(&name)?,
        Some(TrajectoryEntry::Spec(s)) => s,
        None => base
            .as_ref()
            .map(|b| b.trajectory.clone())
            .ok_or(ConfigError::Missing("trajectory"))?,
    };
    let envelope = match f.envelope {
        Some(EnvelopeEntry::Preset(name)) => envelope_preset(&name)?,
        Some(EnvelopeEntry::Spec(EnvelopeTable::ErrorBand { k_a, k_b })) => {
            EnvelopeSpec::ErrorBand {
                k_a: k_a.vec().0,
                k_b: k_b.vec().0,
            }
        }
        Some(EnvelopeEntry::Spec(EnvelopeTable::Tube { upper, lower })) => {
            EnvelopeSpec::Tube { upper, lower }
        }
        None => same
            .map(|b| b.envelope.clone())
            .ok_or(ConfigError::Missing("envelope"))?,
    };
    let gains = resolve_gains(variant, same.map(|b| b.gains), f.gains)?;
    gains.validate()?;
    let actuator = resolve_actuator(variant, same.map(|b| b.actuator), f.actuator)?;

    let init = f.initial.unwrap_or_default();
    let initial_pose = init
        .pose
        .map(PoseTriple::vec)
        .or(base.as_ref().map(|b| b.initial_pose))
        .ok_or(ConfigError::Missing("initial.pose"))?;
    let initial_velocity = init
        .velocity
        .map(Vec3)
        .or(base.as_ref().map(|b| b.initial_velocity))
        .unwrap_or(Vec3([0.1, 0.0, 0.0]));
    if init.zeta.is_some() && !variant.has_actuator_model() {
        return Err(ConfigError::NotApplicable {
            field: "initial.zeta",
            variant,
        });
    }
    let initial_zeta = init.zeta.map(Vec3).unwrap_or(Vec3::zeros());
    if variant.has_actuator_model() && !actuator.bounds.contains_strictly(initial_zeta) {
        return Err(ConfigError::Invalid(
            "initial.zeta must lie strictly inside the actuator bounds".into(),
        ));
    }

    let dt = f.dt.or(base.as_ref().map(|b| b.dt)).unwrap_or(DEFAULT_DT);
    let horizon = f
        .horizon
        .or(base.as_ref().map(|b| b.horizon))
        .unwrap_or(DEFAULT_HORIZON);
    if !(dt > 0.0 && dt.is_finite() && horizon >= dt && horizon.is_finite()) {
        return Err(ConfigError::Timing { dt, horizon });
    }

    let report = validate_scenario(
        &trajectory,
        &envelope,
        Pose::from(initial_pose),
        horizon,
        dt,
    );
    if let Some(failure) = report.failure {
        return Err(failure.into());
    }

    let name = f
        .name
        .or_else(|| {
            base.as_ref()
                .filter(|b| b.variant == variant)
                .map(|b| b.name.clone())
        })
        .unwrap_or_default();
    let scenario = Scenario {
        name,
        variant,
        vessel,
        trajectory,
        envelope,
        gains,
        actuator,
        initial_pose,
        initial_velocity,
        initial_zeta,
        dt,
        horizon,
        derivative_mode: f
            .derivative_mode
            .or(base.as_ref().map(|b| b.derivative_mode))
            .unwrap_or_default(),
        control_update: f
            .control_update
            .or(base.as_ref().map(|b| b.control_update))
            .unwrap_or_default(),
    };
    Ok(ScenarioConfig {
        scenario,
        output: f.output.unwrap_or_default(),
    })
}

/// Renders a scenario as a self-contained config file (no preset reference).
pub fn render_config(s: &Scenario) -> String {
    let v3 = |v: [f64; 3]| format!("[{:?}, {:?}, {:?}]", v[0], v[1], v[2]);
    let mut out = String::new();
    out.push_str(&format!("name = {:?}\n", s.name));
    out.push_str(&format!("variant = \"{}\"\n", s.variant));
    out.push_str("vessel = \"cybership2\"\n");
    out.push_str(&format!(
        "trajectory = \"{}\"\n",
        if s.trajectory == TrajectorySpec::ellipse_paper() {
            "ellipse-paper"
        } else {
            "eight-paper"
        }
    ));
    let env = if s.envelope == EnvelopeSpec::static_paper() {
        "static-paper"
    } else if s.envelope == EnvelopeSpec::ellipse_envelope_paper() {
        "ellipse-envelope-paper"
    } else {
        "eight-envelope-paper"
    };
    out.push_str(&format!("envelope = \"{env}\"\n"));
    out.push_str(&format!("dt = {:?}\nhorizon = {:?}\n", s.dt, s.horizon));
    out.push_str("\n[gains]\n");
    match s.gains {
        Gains::Static(g) => {
            out.push_str(&format!(
                "k1 = {}\nk2 = {}\nk3 = {}\n",
                v3(g.k1.0),
                v3(g.k2.0),
                v3(g.k3.0)
            ));
            out.push_str(&format!("k2_bounds = {}\n", v3(g.k2_bounds.0)));
        }
        Gains::Dynamic(g) => {
            out.push_str(&format!("k1 = {}\nk2 = {}\n", v3(g.k1.0), v3(g.k2.0)));
            if s.variant == Variant::C {
                out.push_str(&format!("k3 = {}\n", v3(g.k3.0)));
            }
            out.push_str(&format!("a = {}\np = {}\n", v3(g.a.0), g.p));
        }
    }
    out.push_str("\n[actuator]\n");
    out.push_str(&format!(
        "tau_max = {}\ntau_min = {}\n",
        v3(s.actuator.bounds.tau_max),
        v3(s.actuator.bounds.tau_min)
    ));
    if s.variant.has_actuator_model() {
        out.push_str(&format!(
            "rho = {}\nn = {}\n",
            v3(s.actuator.rho.0),
            s.actuator.n
        ));
    }
    let p = s.initial_pose;
    out.push_str("\n[initial]\n");
    out.push_str(&format!(
        "pose = [{:?}, {:?}, \"{}deg\"]\n",
        p[0],
        p[1],
        round_degrees(p[2])
    ));
    out.push_str(&format!("velocity = {}\n", v3(s.initial_velocity.0)));
    out
}

/// Degrees with float noise from the radian round trip removed.
fn round_degrees(rad: f64) -> f64 {
    (rad.to_degrees() * 1e9).round() / 1e9
}
