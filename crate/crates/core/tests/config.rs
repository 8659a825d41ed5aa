use std::path::Path;

use usv_blf::config::*;
use usv_blf::control::{Gains, Variant};
use usv_blf::linalg::Vec3;
use usv_blf::scenario::{paper_presets, preset_by_name, ControlUpdate};
use usv_blf::trajectory::deg;

const PRESET_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../presets");

const CUSTOM: &str = r#"
name = "custom"
variant = "A"
vessel = "cybership2"
trajectory = "ellipse-paper"
envelope = { type = "error-band", k_a = [0.6, 0.3, "15deg"], k_b = [0.8, 0.25, "20deg"] }
dt = 0.01
horizon = 20.0

[gains]
k1 = [1.0, 2.0, 3.0]
k2 = [1.0, 1.0, 3.0]
k3 = [2.0, 3.0, 5.0]
k2_bounds = [1.0, 1.0, 3.0]

[actuator]
tau_max = [4.0, 4.0, 4.0]
tau_min = [-3.5, -3.5, -3.5]
rho = [0.2, 0.2, 0.2]

[initial]
pose = [0.6, 0.15, "105deg"]
"#;

#[test]
fn checked_in_presets_parse_to_the_builtin_presets() {
    let presets = paper_presets();
    assert_eq!(presets.len(), 18);
    for p in presets {
        let path = Path::new(PRESET_DIR).join(format!("{}.toml", p.name));
        let cfg = load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(cfg.scenario, p, "{}", p.name);
    }
}

#[test]
fn preset_reference_expands_paper_a_gains() {
    let s = parse_config("preset = \"paper-A-ellipse-P1\"")
        .unwrap()
        .scenario;
    assert_eq!(s.variant, Variant::A);
    let Gains::Static(g) = s.gains else {
        panic!("static gains expected")
    };
    assert_eq!(g.k1, Vec3([1.0, 2.0, 3.0]));
    assert_eq!(g.k2, Vec3([1.0, 1.0, 3.0]));
    assert_eq!(g.k3, Vec3([2.0, 3.0, 5.0]));
    assert_eq!(s.actuator.rho, Vec3([0.2; 3]));
    assert_eq!(s.control_update, ControlUpdate::Adaptive);
}

#[test]
fn preset_b_eight_p2_initial_pose() {
    let s = parse_config("preset = \"paper-B-eight-P2\"")
        .unwrap()
        .scenario;
    assert_eq!(s.initial_pose, Vec3([0.99, 1.0, deg(95.0)]));
}

#[test]
fn preset_fields_can_be_overridden() {
    let s = parse_config("preset = \"paper-C-eight-P3\"\nhorizon = 5.0\ndt = 0.005")
        .unwrap()
        .scenario;
    assert_eq!((s.horizon, s.dt), (5.0, 0.005));
    assert_eq!(s.gains, preset_by_name("paper-C-eight-P3").unwrap().gains);
}

#[test]
fn custom_config_resolves() {
    let s = parse_config(CUSTOM).unwrap().scenario;
    assert_eq!(s.name, "custom");
    assert_eq!(s.initial_pose[2], deg(105.0));
    assert_eq!(s.initial_velocity, Vec3([0.1, 0.0, 0.0]));
    assert_eq!(s.actuator.n, 2);
}

#[test]
fn angles_accept_unit_suffixes() {
    assert_eq!(parse_angle("105deg").unwrap(), 105f64.to_radians());
    assert_eq!(parse_angle("1.5rad").unwrap(), 1.5);
    assert_eq!(parse_angle(" -20 deg").unwrap(), (-20f64).to_radians());
    assert!(parse_angle("105").is_err());
    assert!(parse_angle("105grad").is_err());
}

#[test]
fn zero_barrier_width_is_rejected_as_invariant_failure() {
    let text = CUSTOM.replace(
        "k_b = [0.8, 0.25, \"20deg\"]",
        "k_b = [0.0, 0.25, \"20deg\"]",
    );
    let err = parse_config(&text).unwrap_err();
    assert!(matches!(err, ConfigError::Invalid(_)), "{err:?}");
    assert!(err.to_string().contains("positive-barrier"), "{err}");
}

#[test]
fn start_outside_envelope_is_rejected() {
    let text = CUSTOM.replace(
        "pose = [0.6, 0.15, \"105deg\"]",
        "pose = [0.6, 0.15, \"130deg\"]",
    );
    assert!(matches!(parse_config(&text), Err(ConfigError::Invalid(_))));
}

#[test]
fn unknown_keys_report_line_and_column() {
    let text = CUSTOM.replace("k2_bounds", "k2_bonds");
    match parse_config(&text) {
        Err(ConfigError::Parse {
            line,
            column,
            message,
        }) => {
            assert_eq!(line, 14, "{message}");
            assert_eq!(column, 1);
            assert!(message.contains("k2_bonds"), "{message}");
        }
        other => panic!("expected parse error, got {other:?}"),
    }
    match parse_config("variant = \"A\"\nspeed = 3\n") {
        Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn malformed_toml_reports_position() {
    let err = parse_config("variant = \"A\"\ndt = = 1\n").unwrap_err();
    assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err:?}");
}

#[test]
fn variant_specific_fields_are_enforced() {
    let b = "preset = \"paper-B-ellipse-P1\"\n";
    for extra in [
        "[gains]\nk3 = [1.0, 1.0, 1.0]",
        "[actuator]\nrho = [0.1, 0.1, 0.1]",
        "[initial]\nzeta = [0.0, 0.0, 0.0]",
    ] {
        assert!(
            matches!(
                parse_config(&format!("{b}{extra}")),
                Err(ConfigError::NotApplicable { .. })
            ),
            "{extra}"
        );
    }
    let a = "preset = \"paper-A-ellipse-P1\"\n[gains]\np = 2";
    assert!(matches!(
        parse_config(a),
        Err(ConfigError::NotApplicable { .. })
    ));
    let c = "preset = \"paper-C-ellipse-P1\"\n[gains]\nk2_bounds = [1.0, 1.0, 1.0]";
    assert!(matches!(
        parse_config(c),
        Err(ConfigError::NotApplicable { .. })
    ));
}

#[test]
fn missing_and_invalid_values() {
    assert!(matches!(
        parse_config("trajectory = \"ellipse-paper\""),
        Err(ConfigError::Missing("variant"))
    ));
    assert!(matches!(
        parse_config("preset = \"paper-A-ellipse-P1\"\n[gains]\nk1 = [1.0, -2.0, 3.0]"),
        Err(ConfigError::Gains(_))
    ));
    assert!(matches!(
        parse_config("preset = \"paper-A-ellipse-P1\"\n[actuator]\nn = 3"),
        Err(ConfigError::Actuator(_))
    ));
    assert!(matches!(
        parse_config("preset = \"paper-A-ellipse-P1\"\n[initial]\nzeta = [4.0, 0.0, 0.0]"),
        Err(ConfigError::Invalid(_))
    ));
    assert!(matches!(
        parse_config("preset = \"paper-A-ellipse-P1\"\ndt = 0.0"),
        Err(ConfigError::Timing { .. })
    ));
    assert!(matches!(
        parse_config("preset = \"paper-D-ellipse-P1\""),
        Err(ConfigError::UnknownPreset { .. })
    ));
}

#[test]
fn rendered_configs_round_trip() {
    for p in paper_presets() {
        let mut s = p.clone().with_horizon(12.5);
        s.initial_pose = Vec3([0.55, 0.1, deg(101.25)]);
        if s.variant == Variant::B {
            s.initial_pose = p.initial_pose;
        }
        let back = parse_config(&render_config(&s)).unwrap().scenario;
        assert_eq!(back, s, "{}", s.name);
    }
}

#[test]
fn load_config_resolves_output_relative_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mine.toml");
    std::fs::write(
        &path,
        "preset = \"paper-A-ellipse-P1\"\nname = \"\"\n[output]\ndir = \"traces\"\n",
    )
    .unwrap();
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg.output.dir, Some(dir.path().join("traces")));
    assert_eq!(cfg.scenario.name, "mine");
    assert!(matches!(
        load_config(&dir.path().join("absent.toml")),
        Err(ConfigError::Io { .. })
    ));
}
