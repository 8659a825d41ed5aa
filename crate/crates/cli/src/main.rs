use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use usv_blf::acceptance::{acceptance_run, constraint_report, AcceptOptions, RunReport, Suite};
use usv_blf::config::{load_config, ConfigError, ScenarioConfig};
use usv_blf::output::{figure_bundle, write_trace_csv};
use usv_blf::scenario::{preset_by_name, preset_group, preset_group_names, Scenario};
use usv_blf::sim::{run_scenario, SimResult};

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "usv-blf",
    version,
    about = "Constrained USV tracking: scenario runner and acceptance suite"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory; overrides any `[output] dir` in a config.
    #[arg(long, global = true, env = "USV_BLF_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Parallel scenario workers (default: available cores).
    #[arg(long, global = true, env = "USV_BLF_WORKERS")]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario file (or a preset name) and write its trace.
    Run { config: String },
    /// Simulate every `*.toml` scenario in a directory.
    Batch { dir: PathBuf },
    /// Run the acceptance suite.
    Accept {
        /// Every criterion (the default).
        #[arg(long, conflicts_with = "suite")]
        all: bool,
        /// `smoke` or a single criterion name.
        #[arg(long)]
        suite: Option<String>,
        /// Replace k1 of the x axis in every preset (fault injection).
        #[arg(long, allow_hyphen_values = true)]
        k11: Option<f64>,
    },
    /// Write figure panel CSVs for a preset group, or `all`.
    Figures { group: String },
    /// Parse and validate a scenario file without simulating.
    Validate { config: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run { config } => cmd_run(&cli.common, config),
        Command::Batch { dir } => cmd_batch(&cli.common, dir),
        Command::Accept { all: _, suite, k11 } => cmd_accept(&cli.common, suite.as_deref(), *k11),
        Command::Figures { group } => cmd_figures(&cli.common, group),
        Command::Validate { config } => cmd_validate(config),
    };
    ExitCode::from(code)
}

fn pool(common: &Common) -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.workers.filter(|&n| n > 0) {
        b = b.num_threads(n);
    }
    b.build().expect("thread pool")
}

fn run_all(pool: &rayon::ThreadPool, scenarios: &[Scenario]) -> Vec<SimResult> {
    pool.install(|| scenarios.par_iter().map(run_scenario).collect())
}

/// A config path, or the name of a built-in preset.
fn resolve_config(arg: &str) -> Result<ScenarioConfig, ConfigError> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(scenario) = preset_by_name(arg) {
            return Ok(ScenarioConfig {
                scenario,
                output: Default::default(),
            });
        }
    }
    load_config(path)
}

fn out_dir(common: &Common, cfg: Option<&ScenarioConfig>) -> PathBuf {
    common
        .out_dir
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn print_report(report: &RunReport) {
    for r in &report.runs {
        let status = match &r.halt {
            None => "completed".to_string(),
            Some(h) => format!("halted: {h}"),
        };
        println!(
            "run {}: {status}; max|e1| = [{:.4}, {:.4}, {:.4}]; tau in [{:.3}, {:.3}]",
            r.name,
            r.max_abs_e1[0],
            r.max_abs_e1[1],
            r.max_abs_e1[2],
            r.tau_min.iter().cloned().fold(f64::INFINITY, f64::min),
            r.tau_max.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
    }
    for line in report.lines() {
        println!("{line}");
    }
    for a in &report.artifacts {
        println!("wrote {}", a.display());
    }
}

fn write_report(report: &RunReport, path: &Path) -> Result<(), String> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    fs::write(path, report.to_toml()).map_err(|e| format!("{}: {e}", path.display()))
}

fn verdict(report: &RunReport) -> u8 {
    if report.passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn cmd_run(common: &Common, arg: &str) -> u8 {
    let cfg = match resolve_config(arg) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let start = Instant::now();
    let result = run_scenario(&cfg.scenario);
    let dir = out_dir(common, Some(&cfg));
    let trace = dir.join(
        cfg.output
            .trace
            .clone()
            .unwrap_or_else(|| format!("{}.csv", cfg.scenario.name)),
    );
    let mut report = constraint_report(
        &cfg.scenario.name,
        std::slice::from_ref(&cfg.scenario),
        std::slice::from_ref(&result),
        start.elapsed().as_secs_f64(),
    );
    if let Err(e) = write_trace_csv(&result, &trace) {
        eprintln!("error: {e}");
        return EXIT_FAIL;
    }
    report.artifacts.push(trace);
    print_report(&report);
    verdict(&report)
}

fn cmd_batch(common: &Common, dir: &Path) -> u8 {
    let mut files: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect(),
        Err(e) => {
            eprintln!("config error: {}: {e}", dir.display());
            return EXIT_CONFIG;
        }
    };
    files.sort();
    if files.is_empty() {
        eprintln!("config error: no .toml scenarios in {}", dir.display());
        return EXIT_CONFIG;
    }
    // strict mode: nothing runs unless every file is valid
    let mut configs = Vec::new();
    let mut bad = 0;
    for f in &files {
        match load_config(f) {
            Ok(c) => configs.push(c),
            Err(e) => {
                eprintln!("config error: {}: {e}", f.display());
                bad += 1;
            }
        }
    }
    if bad > 0 {
        return EXIT_CONFIG;
    }
    let start = Instant::now();
    let scenarios: Vec<Scenario> = configs.iter().map(|c| c.scenario.clone()).collect();
    let results = run_all(&pool(common), &scenarios);
    let base = common.out_dir.clone();
    let mut report =
        constraint_report("batch", &scenarios, &results, start.elapsed().as_secs_f64());
    for (cfg, result) in configs.iter().zip(&results) {
        let dir = base
            .clone()
            .or_else(|| cfg.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        let trace = dir.join(
            cfg.output
                .trace
                .clone()
                .unwrap_or_else(|| format!("{}.csv", cfg.scenario.name)),
        );
        if let Err(e) = write_trace_csv(result, &trace) {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
        report.artifacts.push(trace);
    }
    let path = base
        .unwrap_or_else(|| PathBuf::from("out"))
        .join("batch_report.toml");
    if let Err(e) = write_report(&report, &path) {
        eprintln!("error: {e}");
        return EXIT_FAIL;
    }
    report.artifacts.push(path);
    print_report(&report);
    verdict(&report)
}

fn cmd_accept(common: &Common, suite: Option<&str>, k11: Option<f64>) -> u8 {
    let name = suite.unwrap_or("all");
    let Some(suite) = Suite::by_name(name) else {
        eprintln!(
            "config error: unknown suite `{name}` (expected one of {})",
            Suite::names().join(", ")
        );
        return EXIT_CONFIG;
    };
    let dir = out_dir(common, None);
    let opts = AcceptOptions {
        k11,
        out_dir: Some(dir.join("figures")),
    };
    let pool = pool(common);
    let exec = |s: &[Scenario]| run_all(&pool, s);
    let report = acceptance_run(&suite, &opts, &exec);
    let path = dir.join(format!("accept_{}.toml", suite.name));
    if let Err(e) = write_report(&report, &path) {
        eprintln!("error: {e}");
        return EXIT_FAIL;
    }
    for line in report.lines() {
        println!("{line}");
    }
    println!(
        "{}: {} of {} checks passed in {:.1} s; report {}",
        suite.name,
        report.checks.iter().filter(|c| c.pass).count(),
        report.checks.len(),
        report.elapsed_s,
        path.display()
    );
    verdict(&report)
}

fn cmd_figures(common: &Common, group: &str) -> u8 {
    let groups: Vec<(String, Vec<Scenario>)> = if group == "all" {
        preset_group_names()
            .into_iter()
            .filter_map(|g| preset_group(&g).map(|s| (g, s)))
            .collect()
    } else {
        match preset_group(group) {
            Some(s) => vec![(group.to_string(), s)],
            None => {
                eprintln!(
                    "config error: unknown preset group `{group}` (expected `all` or one of {})",
                    preset_group_names().join(", ")
                );
                return EXIT_CONFIG;
            }
        }
    };
    let dir = out_dir(common, None);
    let pool = pool(common);
    let mut code = EXIT_PASS;
    for (name, scenarios) in groups {
        let results = run_all(&pool, &scenarios);
        let runs: Vec<_> = scenarios.into_iter().zip(results).collect();
        match figure_bundle(&name, &runs, &dir) {
            Ok(rep) => {
                for f in &rep.files {
                    println!("wrote {}", f.display());
                }
                for r in &rep.incomplete {
                    eprintln!("run {r} halted early; its columns end at the halt");
                    code = EXIT_FAIL;
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_FAIL;
            }
        }
    }
    code
}

fn cmd_validate(arg: &str) -> u8 {
    match resolve_config(arg) {
        Ok(c) => {
            let s = &c.scenario;
            println!(
                "ok: {} (variant {}, dt {}, horizon {}, {} steps)",
                s.name,
                s.variant,
                s.dt,
                s.horizon,
                s.steps()
            );
            EXIT_PASS
        }
        Err(e) => {
            eprintln!("config error: {e}");
            EXIT_CONFIG
        }
    }
}
