//! Multi-run manifests: method comparison and initial-estimate sweeps.
//!
//! Runs are independent; with `jobs > 1` they are spread over a thread pool,
//! which changes wall-clock time only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::analysis::{estimator_settling, spearman, tracking_settling};
use crate::baselines::BaselineParams;
use crate::error::{Error, Result};
use crate::sim::{MethodKind, Scenario, Trajectory};

fn default_compare_threshold() -> f64 {
    1e-2
}

fn default_sweep_threshold() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareManifest {
    pub name: String,
    /// Scenario file (relative to the manifest) or bundled name.
    pub scenario: String,
    pub methods: Vec<MethodKind>,
    #[serde(default = "default_compare_threshold")]
    pub settling_threshold_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baselines: Option<BaselineParams>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepManifest {
    pub name: String,
    pub scenario: String,
    /// Norms of `x_hat(0) - x`.
    pub offsets_m: Vec<f64>,
    /// Offset direction; normalized before use. Defaults to `[1, 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<[f64; 2]>,
    #[serde(default = "default_sweep_threshold")]
    pub settling_threshold_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end_s: Option<f64>,
    /// Optional pass condition on the rank correlation between offset and
    /// settling time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_abs_spearman: Option<f64>,
}

/// Manifest source text and the directory relative paths resolve against.
pub fn read_manifest(path_or_name: &str) -> Result<(String, PathBuf)> {
    let path = Path::new(path_or_name);
    if path.exists() {
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((std::fs::read_to_string(path)?, dir))
    } else if let Some(text) = crate::sim::scenario::bundled(path_or_name) {
        Ok((text.to_string(), PathBuf::new()))
    } else {
        Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no manifest file or bundled manifest named {path_or_name:?}"),
        )))
    }
}

fn resolve_scenario(reference: &str, base_dir: &Path) -> Result<Scenario> {
    let local = base_dir.join(reference);
    if !base_dir.as_os_str().is_empty() && local.exists() {
        Scenario::load(&local.to_string_lossy())
    } else {
        Scenario::load(reference)
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub method: MethodKind,
    pub estimator_settling_s: Option<f64>,
    pub tracking_settling_s: Option<f64>,
    pub final_xtilde_m: f64,
    pub final_delta_m: f64,
    pub x_hat_path_m: f64,
    pub abort: Option<String>,
}

impl CompareRow {
    fn new(method: MethodKind, traj: &Trajectory, threshold: f64) -> Self {
        let last = traj.last();
        Self {
            method,
            estimator_settling_s: estimator_settling(traj, threshold).ok().flatten(),
            tracking_settling_s: tracking_settling(traj, threshold).ok().flatten(),
            final_xtilde_m: last.map_or(f64::NAN, |s| s.xtilde_norm),
            final_delta_m: last.map_or(f64::NAN, |s| s.delta),
            x_hat_path_m: traj.x_hat_path_length(),
            abort: traj.abort.as_ref().map(|a| a.reason.clone()),
        }
    }
}

pub struct CompareOutcome {
    /// Per-method scenario, in manifest order.
    pub scenarios: Vec<Scenario>,
    pub trajectories: Vec<Trajectory>,
    pub rows: Vec<CompareRow>,
}

impl CompareManifest {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let m: Self = toml::from_str(text)?;
        if m.methods.len() < 2 {
            return Err(Error::invalid(format!(
                "compare needs at least two methods, got {}",
                m.methods.len()
            )));
        }
        if !(m.settling_threshold_m > 0.0) {
            return Err(Error::invalid("settling_threshold_m must be > 0"));
        }
        Ok(m)
    }

    /// Per-method scenarios sharing initial conditions and settings.
    pub fn scenarios(&self, base_dir: &Path) -> Result<Vec<Scenario>> {
        let base = resolve_scenario(&self.scenario, base_dir)?;
        self.methods
            .iter()
            .map(|&kind| {
                let mut s = base.clone();
                s.method = kind;
                s.name = format!("{}_{}", self.name, kind);
                if let Some(t) = self.t_end_s {
                    s.integrator.t_end_s = t;
                }
                if let Some(b) = self.baselines {
                    s.baselines = b;
                }
                s.validate()?;
                Ok(s)
            })
            .collect()
    }

    pub fn run(&self, base_dir: &Path, jobs: usize) -> Result<CompareOutcome> {
        let scenarios = self.scenarios(base_dir)?;
        let trajectories = pool(jobs)?.install(|| {
            scenarios
                .par_iter()
                .map(|s| s.run())
                .collect::<Result<Vec<_>>>()
        })?;
        let rows = scenarios
            .iter()
            .zip(&trajectories)
            .map(|(s, t)| CompareRow::new(s.method, t, self.settling_threshold_m))
            .collect();
        Ok(CompareOutcome {
            scenarios,
            trajectories,
            rows,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub offset_m: f64,
    pub settling_s: Option<f64>,
    pub abort: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// `T_c1` plus the configured slack.
    pub limit_s: f64,
    pub spearman: Option<f64>,
    pub passed: bool,
}

impl SweepManifest {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let m: Self = toml::from_str(text)?;
        if m.offsets_m.is_empty() {
            return Err(Error::invalid("sweep needs at least one offset"));
        }
        if m.offsets_m.iter().any(|o| !(o.is_finite() && *o >= 0.0)) {
            return Err(Error::invalid("sweep offsets must be finite and >= 0"));
        }
        let d = m.direction.unwrap_or([1.0, 1.0]);
        if !(d[0].hypot(d[1]) > 0.0) {
            return Err(Error::invalid("sweep direction must be nonzero"));
        }
        Ok(m)
    }

    pub fn scenarios(&self, base_dir: &Path) -> Result<Vec<Scenario>> {
        let base = resolve_scenario(&self.scenario, base_dir)?;
        let d = self.direction.unwrap_or([1.0, 1.0]);
        let n = d[0].hypot(d[1]);
        self.offsets_m
            .iter()
            .enumerate()
            .map(|(i, &o)| {
                let mut s = base.clone();
                s.method = MethodKind::Proposed;
                s.name = format!("{}_{i}", self.name);
                let x = s.initial.target_m;
                s.initial.estimate_m = [x[0] + o * d[0] / n, x[1] + o * d[1] / n];
                if let Some(t) = self.t_end_s {
                    s.integrator.t_end_s = t;
                }
                s.validate()?;
                Ok(s)
            })
            .collect()
    }

    pub fn run(&self, base_dir: &Path, jobs: usize) -> Result<SweepOutcome> {
        let scenarios = self.scenarios(base_dir)?;
        let threshold = self.settling_threshold_m;
        let rows = pool(jobs)?.install(|| {
            scenarios
                .par_iter()
                .zip(&self.offsets_m)
                .map(|(s, &offset_m)| {
                    let traj = s.run()?;
                    Ok(SweepRow {
                        offset_m,
                        settling_s: estimator_settling(&traj, threshold).ok().flatten(),
                        abort: traj.abort.map(|a| a.reason),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let s0 = &scenarios[0];
        let limit_s = s0.proposed.t_c1_s + s0.checks.settling_slack_steps * s0.integrator.dt_s;
        let times: Vec<f64> = rows
            .iter()
            .map(|r| r.settling_s.unwrap_or(f64::INFINITY))
            .collect();
        let rho = spearman(&self.offsets_m, &times);
        let mut passed = rows.iter().all(|r| r.abort.is_none())
            && times.iter().all(|&t| t <= limit_s);
        if let (Some(max), Some(r)) = (self.max_abs_spearman, rho) {
            passed &= r.abs() < max;
        }
        Ok(SweepOutcome {
            rows,
            limit_s,
            spearman: rho,
            passed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_manifests_parse() {
        let (text, _) = read_manifest("sv_compare").unwrap();
        let m = CompareManifest::from_toml_str(&text).unwrap();
        assert_eq!(m.methods, MethodKind::ALL);
        let (text, _) = read_manifest("sv_sweep").unwrap();
        let m = SweepManifest::from_toml_str(&text).unwrap();
        assert_eq!(m.offsets_m, [0.1, 1.0, 10.0, 100.0]);
    }

    #[test]
    fn compare_rejects_single_method() {
        let text = "name = \"c\"\nscenario = \"sv_proposed\"\nmethods = [\"proposed\"]\n";
        assert!(CompareManifest::from_toml_str(text).is_err());
    }

    #[test]
    fn sweep_rejects_empty_offsets() {
        let text = "name = \"s\"\nscenario = \"sv_proposed\"\noffsets_m = []\n";
        assert!(SweepManifest::from_toml_str(text).is_err());
    }

    #[test]
    fn sweep_places_estimates_along_direction() {
        let text = "name = \"s\"\nscenario = \"sv_proposed\"\noffsets_m = [0.5]\ndirection = [0.0, 2.0]\n";
        let m = SweepManifest::from_toml_str(text).unwrap();
        let s = &m.scenarios(Path::new("")).unwrap()[0];
        assert_eq!(s.initial.estimate_m, [2.0, 3.5]);
    }
}
