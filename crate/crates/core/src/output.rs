//! CSV artifacts: per-run traces and per-panel figure data.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::control::Variant;
use crate::scenario::Scenario;
use crate::sim::{SimResult, TraceRecord};
use crate::trajectory::desired_state;

/// Column order of [`write_trace_csv`].
pub const TRACE_COLUMNS: [&str; 27] = [
    "t", "x", "y", "psi", "u", "v", "r", "e1x", "e1y", "e1psi", "e2u", "e2v", "e2r", "tau1",
    "tau2", "tau3", "tauc1", "tauc2", "tauc3", "ka_x", "kb_x", "ka_y", "kb_y", "ka_psi", "kb_psi",
    "V", "Vdot",
];

/// Figure panels emitted per scenario group.
pub const PANELS: [&str; 6] = ["path", "tau", "eta", "e1", "nu", "e2"];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("figure group is empty")]
    EmptyGroup,
    #[error("runs in one figure group must share dt")]
    MixedStep,
}

/// 17 significant digits, exponent form, locale independent.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, OutputError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| OutputError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    csv::Writer::from_path(path).map_err(|source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn trace_row(r: &TraceRecord, variant: Variant) -> Vec<String> {
    let tauc = if variant.has_actuator_model() {
        r.tau_commanded
    } else {
        r.tau_applied
    };
    let mut row = Vec::with_capacity(TRACE_COLUMNS.len());
    row.push(r.t);
    row.extend(r.eta.0);
    row.extend(r.nu.0);
    row.extend(r.e1.0);
    row.extend(r.e2.0);
    row.extend(r.tau_applied.0);
    row.extend(tauc.0);
    for b in &r.barriers {
        row.push(b.k_a);
        row.push(b.k_b);
    }
    row.push(r.lyapunov);
    row.push(r.vdot);
    row.into_iter().map(fmt_num).collect()
}

/// Writes one header row and one row per trace record.
pub fn write_trace_csv(result: &SimResult, path: &Path) -> Result<(), OutputError> {
    let mut w = csv_writer(path)?;
    let wrap = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(TRACE_COLUMNS).map_err(wrap)?;
    for r in &result.trace {
        w.write_record(trace_row(r, result.variant)).map_err(wrap)?;
    }
    w.flush().map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Files written by [`figure_bundle`], plus runs that halted early and
/// therefore leave blank cells after their halt time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FigureReport {
    pub files: Vec<PathBuf>,
    pub incomplete: Vec<String>,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(n: usize) -> Self {
        Self {
            header: vec!["t".into()],
            rows: vec![Vec::new(); n],
        }
    }

    fn column(&mut self, name: String, mut value: impl FnMut(usize) -> Option<f64>) {
        self.header.push(name);
        for (k, row) in self.rows.iter_mut().enumerate() {
            row.push(value(k).map(fmt_num).unwrap_or_default());
        }
    }

    fn flag_column(&mut self, name: String, mut value: impl FnMut(usize) -> Option<bool>) {
        self.header.push(name);
        for (k, row) in self.rows.iter_mut().enumerate() {
            row.push(
                value(k)
                    .map(|f| u8::from(f).to_string())
                    .unwrap_or_default(),
            );
        }
    }

    fn write(&self, times: &[f64], path: &Path) -> Result<(), OutputError> {
        let mut w = csv_writer(path)?;
        let wrap = |source| OutputError::Csv {
            path: path.to_path_buf(),
            source,
        };
        w.write_record(&self.header).map_err(wrap)?;
        for (t, row) in times.iter().zip(&self.rows) {
            let mut rec = vec![fmt_num(*t)];
            rec.extend(row.iter().cloned());
            w.write_record(&rec).map_err(wrap)?;
        }
        w.flush().map_err(|source| OutputError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Writes the six panel files `<group>_<panel>.csv` for one scenario group
/// (same variant, path and envelope; typically the three initial poses).
///
/// Every file carries the desired series and the bound curves, and one
/// column set per run, suffixed with the run's last name segment (`P1`, ...).
pub fn figure_bundle(
    group: &str,
    runs: &[(Scenario, SimResult)],
    dir: &Path,
) -> Result<FigureReport, OutputError> {
    let (first, _) = runs.first().ok_or(OutputError::EmptyGroup)?;
    if runs.iter().any(|(s, _)| s.dt != first.dt) {
        return Err(OutputError::MixedStep);
    }
    let n = first.steps();
    let times: Vec<f64> = (0..n).map(|k| k as f64 * first.dt).collect();
    let desired: Vec<_> = times
        .iter()
        .map(|&t| desired_state(&first.trajectory, t))
        .collect();
    let bounds: Vec<_> = desired
        .iter()
        .zip(&times)
        .map(|(d, &t)| first.envelope.boundaries(d, t))
        .collect();
    let tags: Vec<String> = runs
        .iter()
        .map(|(s, _)| s.name.rsplit('-').next().unwrap_or(&s.name).to_string())
        .collect();
    let rec = |i: usize, k: usize| runs[i].1.trace.get(k);
    let axes = ["x", "y", "psi"];
    let mut report = FigureReport {
        incomplete: runs
            .iter()
            .filter(|(_, r)| !r.ok())
            .map(|(s, _)| s.name.clone())
            .collect(),
        ..Default::default()
    };

    let mut path = Table::new(n);
    path.column("x_d".into(), |k| Some(desired[k].eta_d[0]));
    path.column("y_d".into(), |k| Some(desired[k].eta_d[1]));
    for a in 0..2 {
        path.column(format!("{}_lower", axes[a]), |k| Some(bounds[k][a].0));
        path.column(format!("{}_upper", axes[a]), |k| Some(bounds[k][a].1));
    }
    for (i, tag) in tags.iter().enumerate() {
        path.column(format!("x_{tag}"), |k| rec(i, k).map(|r| r.eta[0]));
        path.column(format!("y_{tag}"), |k| rec(i, k).map(|r| r.eta[1]));
    }

    let mut eta = Table::new(n);
    for a in 0..3 {
        eta.column(format!("{}_d", axes[a]), |k| Some(desired[k].eta_d[a]));
        eta.column(format!("{}_lower", axes[a]), |k| Some(bounds[k][a].0));
        eta.column(format!("{}_upper", axes[a]), |k| Some(bounds[k][a].1));
    }
    for (i, tag) in tags.iter().enumerate() {
        for a in 0..3 {
            eta.column(format!("{}_{tag}", axes[a]), |k| {
                rec(i, k).map(|r| r.eta[a])
            });
        }
    }

    let mut e1 = Table::new(n);
    for a in 0..3 {
        e1.column(format!("e1{}_lower", axes[a]), |k| {
            Some(bounds[k][a].0 - desired[k].eta_d[a])
        });
        e1.column(format!("e1{}_upper", axes[a]), |k| {
            Some(bounds[k][a].1 - desired[k].eta_d[a])
        });
    }
    for (i, tag) in tags.iter().enumerate() {
        for a in 0..3 {
            e1.column(format!("e1{}_{tag}", axes[a]), |k| {
                rec(i, k).map(|r| r.e1[a])
            });
        }
    }

    let vel = ["u", "v", "r"];
    let mut nu = Table::new(n);
    for a in 0..3 {
        nu.column(format!("{}_d", vel[a]), |k| Some(desired[k].nu_d[a]));
    }
    for (i, tag) in tags.iter().enumerate() {
        for a in 0..3 {
            nu.column(format!("{}_{tag}", vel[a]), |k| rec(i, k).map(|r| r.nu[a]));
        }
    }

    let mut e2 = Table::new(n);
    let k2_bounds = match first.gains {
        crate::control::Gains::Static(g) if first.variant == Variant::A => Some(g.k2_bounds),
        _ => None,
    };
    if let Some(kb) = k2_bounds {
        for a in 0..3 {
            e2.column(format!("z{}_bound", vel[a]), |_| Some(kb[a]));
        }
    }
    for (i, tag) in tags.iter().enumerate() {
        for a in 0..3 {
            e2.column(format!("e2{}_{tag}", vel[a]), |k| {
                rec(i, k).map(|r| r.e2[a])
            });
        }
        if k2_bounds.is_some() {
            for a in 0..3 {
                e2.column(format!("z{}_{tag}", vel[a]), |k| rec(i, k).map(|r| r.z[a]));
            }
        }
    }

    let mut tau = Table::new(n);
    let b = first.actuator.bounds;
    for a in 0..3 {
        tau.column(format!("tau{}_min", a + 1), |_| Some(b.tau_min[a]));
        tau.column(format!("tau{}_max", a + 1), |_| Some(b.tau_max[a]));
    }
    for (i, tag) in tags.iter().enumerate() {
        let variant = runs[i].0.variant;
        for a in 0..3 {
            tau.column(format!("tau{}_{tag}", a + 1), |k| {
                rec(i, k).map(|r| r.tau_applied[a])
            });
        }
        if variant.has_actuator_model() {
            for a in 0..3 {
                tau.column(format!("tauc{}_{tag}", a + 1), |k| {
                    rec(i, k).map(|r| r.tau_commanded[a])
                });
            }
        } else {
            tau.flag_column(format!("clamp_{tag}"), |k| {
                rec(i, k).map(|r| r.clamped.iter().any(|&c| c))
            });
        }
    }

    for (panel, table) in PANELS.iter().zip([&path, &tau, &eta, &e1, &nu, &e2]) {
        let file = dir.join(format!("{group}_{panel}.csv"));
        table.write(&times, &file)?;
        report.files.push(file);
    }
    Ok(report)
}
