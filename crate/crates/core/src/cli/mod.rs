//! Command-line front end.
//!
//! Exit codes: 0 success, 1 an enabled invariant check failed, 2 bad
//! scenario/manifest or unusable output location, 3 a simulation aborted.

use clap::{Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis::{invariant_report, theta_rate, InvariantReport, MonitorConfig};
use crate::batch::{read_manifest, CompareManifest, SweepManifest};
use crate::error::{Error, Result};
use crate::io::svg::{Chart, Scale, Series};
use crate::law::GuidanceLaw;
use crate::io::{read_trajectory, write_atomic, write_trajectory};
use crate::sim::{Scenario, Trajectory, TrajectoryMeta};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(i32)]
pub enum Exit {
    Ok = 0,
    InvariantFailure = 1,
    Config = 2,
    Abort = 3,
}

#[derive(Parser, Debug)]
#[command(name = "botlc", version, about = "Bearing-only localization and circumnavigation simulator")]
pub struct Cli {
    /// Default output root when -o is not given.
    #[arg(long, env = "BOTLC_OUT", default_value = "botlc-out", global = true)]
    pub out_root: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Csv,
    Svg,
    Report,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate one scenario.
    Run {
        /// Scenario file or bundled name.
        scenario: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "csv,svg,report")]
        emit: Vec<Emit>,
    },
    /// Run several methods on shared settings.
    Compare {
        manifest: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(short, long, default_value_t = 1)]
        jobs: usize,
    },
    /// Sweep the initial estimate and tabulate settling times.
    Sweep {
        manifest: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(short, long, default_value_t = 1)]
        jobs: usize,
    },
    /// Re-run the invariant checks on a trajectory file.
    Check {
        trajectory: PathBuf,
        /// Scenario that produced the file. Defaults to `scenario.toml` next to it.
        #[arg(long)]
        scenario: Option<String>,
    },
}

struct Failure {
    code: Exit,
    message: String,
}

fn config(e: Error) -> Failure {
    Failure {
        code: Exit::Config,
        message: e.to_string(),
    }
}

fn io_err(e: impl Into<Error>) -> Failure {
    config(e.into())
}

type CmdResult = std::result::Result<Exit, Failure>;

pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    std::process::ExitCode::from(code as u8)
}

fn execute(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Run {
            scenario,
            output,
            emit,
        } => cmd_run(scenario, output.as_deref(), &cli.out_root, emit),
        Command::Compare {
            manifest,
            output,
            jobs,
        } => cmd_compare(manifest, output.as_deref(), &cli.out_root, *jobs),
        Command::Sweep {
            manifest,
            output,
            jobs,
        } => cmd_sweep(manifest, output.as_deref(), &cli.out_root, *jobs),
        Command::Check {
            trajectory,
            scenario,
        } => cmd_check(trajectory, scenario.as_deref()),
    }
}

fn csv_bytes(traj: &Trajectory) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_trajectory(traj, &mut buf)?;
    Ok(buf)
}

fn report_for(traj: &Trajectory, scenario: &Scenario) -> InvariantReport {
    let cfg = MonitorConfig::for_trajectory(traj, scenario.checks.clone());
    invariant_report(traj, &cfg)
}

fn write_report(dir: &Path, report: &InvariantReport, abort: Option<&str>) -> Result<()> {
    let mut text = report.to_text();
    let mut kv = report.to_key_values();
    if let Some(reason) = abort {
        let _ = writeln!(text, "aborted: {reason}");
        let _ = writeln!(kv, "abort = {reason}");
    }
    write_atomic(&dir.join("report.txt"), text.as_bytes())?;
    write_atomic(&dir.join("report.kv"), kv.as_bytes())
}

fn pts(traj: &Trajectory, f: impl Fn(&crate::sim::Sample) -> f64) -> Vec<(f64, f64)> {
    traj.samples.iter().map(|s| (s.t, f(s))).collect()
}

fn run_plots(traj: &Trajectory) -> Vec<(&'static str, String)> {
    let path = Chart {
        title: "agent path",
        x_label: "x [m]",
        y_label: "y [m]",
        y_scale: Scale::Linear,
        equal_aspect: true,
        series: vec![
            Series::new("agent", traj.samples.iter().map(|s| (s.agent.x, s.agent.y)).collect()),
            Series::new("estimate", traj.samples.iter().map(|s| (s.x_hat.x, s.x_hat.y)).collect()),
            Series::new("target", traj.samples.iter().map(|s| (s.target.x, s.target.y)).collect()),
        ],
    };
    let xt = Chart {
        title: "estimation error",
        x_label: "t [s]",
        y_label: "|x_tilde| [m]",
        y_scale: Scale::Log,
        equal_aspect: false,
        series: vec![Series::new("|x_tilde|", pts(traj, |s| s.xtilde_norm))],
    };
    let delta = Chart {
        title: "tracking error",
        x_label: "t [s]",
        y_label: "delta [m]",
        y_scale: Scale::Linear,
        equal_aspect: false,
        series: vec![Series::new("delta", pts(traj, |s| s.delta))],
    };
    let rate = theta_rate(traj);
    let theta = Chart {
        title: "bearing rate",
        x_label: "t [s]",
        y_label: "theta rate [rad/s]",
        y_scale: Scale::Linear,
        equal_aspect: false,
        series: vec![Series::new(
            "theta rate",
            traj.samples.iter().zip(&rate).map(|(s, r)| (s.t, *r)).collect(),
        )],
    };
    vec![
        ("agent_path.svg", path.render()),
        ("xtilde_norm.svg", xt.render()),
        ("delta.svg", delta.render()),
        ("theta_rate.svg", theta.render()),
    ]
}

fn out_dir(output: Option<&Path>, root: &Path, name: &str) -> PathBuf {
    output.map_or_else(|| root.join(name), Path::to_path_buf)
}

fn cmd_run(scenario: &str, output: Option<&Path>, root: &Path, emit: &[Emit]) -> CmdResult {
    let scenario = Scenario::load(scenario).map_err(config)?;
    let dir = out_dir(output, root, &scenario.name);
    let traj = scenario.run().map_err(config)?;

    write_atomic(&dir.join("scenario.toml"), scenario.to_toml_string().as_bytes()).map_err(io_err)?;
    if emit.contains(&Emit::Csv) {
        let bytes = csv_bytes(&traj).map_err(io_err)?;
        write_atomic(&dir.join("trajectory.csv"), &bytes).map_err(io_err)?;
    }
    if emit.contains(&Emit::Svg) {
        for (file, svg) in run_plots(&traj) {
            write_atomic(&dir.join("plots").join(file), svg.as_bytes()).map_err(io_err)?;
        }
    }
    let report = report_for(&traj, &scenario);
    let abort = traj.abort.as_ref().map(|a| format!("t = {} s: {}", a.t, a.reason));
    if emit.contains(&Emit::Report) {
        write_report(&dir, &report, abort.as_deref()).map_err(io_err)?;
    }
    print!("{}", report.to_text());
    println!("output: {}", dir.display());
    if let Some(reason) = abort {
        return Err(Failure {
            code: Exit::Abort,
            message: format!("simulation aborted at {reason}"),
        });
    }
    Ok(if report.all_passed() {
        Exit::Ok
    } else {
        Exit::InvariantFailure
    })
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v}"))
}

fn cmd_compare(manifest: &str, output: Option<&Path>, root: &Path, jobs: usize) -> CmdResult {
    let (text, base_dir) = read_manifest(manifest).map_err(config)?;
    let m = CompareManifest::from_toml_str(&text).map_err(config)?;
    let dir = out_dir(output, root, &m.name);
    let outcome = m.run(&base_dir, jobs).map_err(config)?;

    let mut labels: Vec<String> = Vec::new();
    for row in &outcome.rows {
        let base = row.method.to_string();
        let n = labels.iter().filter(|l| l.split('_').next() == Some(base.as_str())).count();
        labels.push(if n == 0 { base } else { format!("{base}_{}", n + 1) });
    }

    let mut code = Exit::Ok;
    for ((label, traj), scenario) in labels.iter().zip(&outcome.trajectories).zip(&outcome.scenarios) {
        let sub = dir.join(label);
        let bytes = csv_bytes(traj).map_err(io_err)?;
        write_atomic(&sub.join("trajectory.csv"), &bytes).map_err(io_err)?;
        write_atomic(&sub.join("scenario.toml"), scenario.to_toml_string().as_bytes()).map_err(io_err)?;
        let report = report_for(traj, scenario);
        let abort = traj.abort.as_ref().map(|a| format!("t = {} s: {}", a.t, a.reason));
        write_report(&sub, &report, abort.as_deref()).map_err(io_err)?;
        if abort.is_some() {
            code = Exit::Abort;
        } else if !report.all_passed() && code == Exit::Ok {
            code = Exit::InvariantFailure;
        }
    }

    let mut csv = String::from(
        "method,xtilde_settling_s,delta_settling_s,final_xtilde_m,final_delta_m,xhat_path_m,aborted\n",
    );
    let mut txt = format!(
        "comparison {} (settling threshold {} m)\n{:<12} {:>14} {:>14} {:>14} {:>14} {:>12}\n",
        m.name, m.settling_threshold_m, "method", "xtilde settle", "delta settle", "final xtilde", "final delta", "xhat path"
    );
    for (label, r) in labels.iter().zip(&outcome.rows) {
        let _ = writeln!(
            csv,
            "{label},{},{},{:e},{:e},{:e},{}",
            opt(r.estimator_settling_s),
            opt(r.tracking_settling_s),
            r.final_xtilde_m,
            r.final_delta_m,
            r.x_hat_path_m,
            r.abort.is_some()
        );
        let s = |v: Option<f64>| v.map_or("never".to_string(), |v| format!("{v:.4} s"));
        let _ = writeln!(
            txt,
            "{label:<12} {:>14} {:>14} {:>14.3e} {:>14.3e} {:>10.3} m",
            s(r.estimator_settling_s),
            s(r.tracking_settling_s),
            r.final_xtilde_m,
            r.final_delta_m,
            r.x_hat_path_m
        );
    }
    write_atomic(&dir.join("summary.csv"), csv.as_bytes()).map_err(io_err)?;
    write_atomic(&dir.join("summary.txt"), txt.as_bytes()).map_err(io_err)?;

    let each = |f: &dyn Fn(&Trajectory) -> Vec<(f64, f64)>| -> Vec<Series> {
        labels
            .iter()
            .zip(&outcome.trajectories)
            .map(|(l, t)| Series::new(l.clone(), f(t)))
            .collect()
    };
    let charts = [
        (
            "agent_path.svg",
            Chart {
                title: "agent paths",
                x_label: "x [m]",
                y_label: "y [m]",
                y_scale: Scale::Linear,
                equal_aspect: true,
                series: each(&|t| t.samples.iter().map(|s| (s.agent.x, s.agent.y)).collect()),
            },
        ),
        (
            "estimate_path.svg",
            Chart {
                title: "target estimate paths",
                x_label: "x [m]",
                y_label: "y [m]",
                y_scale: Scale::Linear,
                equal_aspect: true,
                series: each(&|t| t.samples.iter().map(|s| (s.x_hat.x, s.x_hat.y)).collect()),
            },
        ),
        (
            "delta.svg",
            Chart {
                title: "tracking error",
                x_label: "t [s]",
                y_label: "delta [m]",
                y_scale: Scale::Linear,
                equal_aspect: false,
                series: each(&|t| pts(t, |s| s.delta)),
            },
        ),
        (
            "xtilde_norm.svg",
            Chart {
                title: "estimation error",
                x_label: "t [s]",
                y_label: "|x_tilde| [m]",
                y_scale: Scale::Log,
                equal_aspect: false,
                series: each(&|t| pts(t, |s| s.xtilde_norm)),
            },
        ),
    ];
    for (file, chart) in charts {
        write_atomic(&dir.join("plots").join(file), chart.render().as_bytes()).map_err(io_err)?;
    }
    print!("{txt}");
    println!("output: {}", dir.display());
    Ok(code)
}

fn cmd_sweep(manifest: &str, output: Option<&Path>, root: &Path, jobs: usize) -> CmdResult {
    let (text, base_dir) = read_manifest(manifest).map_err(config)?;
    let m = SweepManifest::from_toml_str(&text).map_err(config)?;
    let dir = out_dir(output, root, &m.name);
    let outcome = m.run(&base_dir, jobs).map_err(config)?;

    let mut csv = String::from("offset_m,settling_s,aborted\n");
    let mut txt = format!(
        "sweep {} (threshold {} m, limit {} s)\n{:>12} {:>14}\n",
        m.name, m.settling_threshold_m, outcome.limit_s, "offset [m]", "settling [s]"
    );
    for r in &outcome.rows {
        let _ = writeln!(csv, "{},{},{}", r.offset_m, opt(r.settling_s), r.abort.is_some());
        let _ = writeln!(
            txt,
            "{:>12} {:>14}",
            r.offset_m,
            r.settling_s.map_or("never".into(), |v| format!("{v:.4}"))
        );
    }
    let _ = writeln!(
        txt,
        "spearman(offset, settling) = {}",
        outcome.spearman.map_or("undefined".into(), |r| format!("{r:.4}"))
    );
    let _ = writeln!(txt, "overall: {}", if outcome.passed { "PASS" } else { "FAIL" });
    write_atomic(&dir.join("sweep.csv"), csv.as_bytes()).map_err(io_err)?;
    write_atomic(&dir.join("sweep.txt"), txt.as_bytes()).map_err(io_err)?;
    print!("{txt}");
    println!("output: {}", dir.display());
    if outcome.rows.iter().any(|r| r.abort.is_some()) {
        return Ok(Exit::Abort);
    }
    Ok(if outcome.passed {
        Exit::Ok
    } else {
        Exit::InvariantFailure
    })
}

/// Metadata for a trajectory file without a scenario: step from the time
/// column, motion from the target columns, nothing else.
fn inferred_meta(traj: &Trajectory) -> TrajectoryMeta {
    let dt = match traj.samples.as_slice() {
        [a, b, ..] => b.t - a.t,
        _ => 0.0,
    };
    let stationary = traj.samples.windows(2).all(|w| w[0].target == w[1].target);
    TrajectoryMeta {
        method: "unknown".into(),
        dt,
        record_stride: 1,
        d_star: None,
        tangential_gain: None,
        timing: None,
        stationary_target: stationary,
    }
}

fn cmd_check(path: &Path, scenario: Option<&str>) -> CmdResult {
    let sibling = path.parent().map(|p| p.join("scenario.toml"));
    let scenario = match scenario {
        Some(s) => Some(Scenario::load(s).map_err(config)?),
        None => match sibling {
            Some(p) if p.exists() => Some(Scenario::load(&p.to_string_lossy()).map_err(config)?),
            _ => None,
        },
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut traj = read_trajectory(file, TrajectoryMeta::default()).map_err(config)?;
    let checks = match &scenario {
        Some(s) => {
            let law = s.law().map_err(config)?;
            traj.meta = TrajectoryMeta {
                method: law.label().into(),
                dt: s.integrator.dt_s,
                record_stride: s.integrator.record_stride,
                d_star: Some(law.d_star()),
                tangential_gain: Some(law.tangential_gain()),
                timing: law.timing(),
                stationary_target: s.target_motion.is_stationary(),
            };
            s.checks.clone()
        }
        None => {
            traj.meta = inferred_meta(&traj);
            Default::default()
        }
    };
    let report = invariant_report(&traj, &MonitorConfig::for_trajectory(&traj, checks));
    print!("{}", report.to_text());
    Ok(if report.all_passed() {
        Exit::Ok
    } else {
        Exit::InvariantFailure
    })
}
