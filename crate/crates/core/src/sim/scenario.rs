//! Scenario files: TOML with the unit in every key name.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::{simulate, IntegratorConfig, TargetMotion, Trajectory, WorldState};
use crate::analysis::CheckConfig;
use crate::baselines::{BaselineParams, Cao, Chen, ChenResidual, Deghat};
use crate::controller::ControllerParams;
use crate::error::{Error, Result};
use crate::estimator::EstimatorParams;
use crate::geometry::{Vec2, COINCIDENCE_THRESHOLD};
use crate::law::{GuidanceLaw, LawOutput, PredefinedTiming, Proposed, StageContext};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    #[default]
    Proposed,
    Deghat,
    Cao,
    Chen,
}

impl MethodKind {
    pub const ALL: [MethodKind; 4] = [
        MethodKind::Proposed,
        MethodKind::Deghat,
        MethodKind::Cao,
        MethodKind::Chen,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodKind::Proposed => "proposed",
            MethodKind::Deghat => "deghat",
            MethodKind::Cao => "cao",
            MethodKind::Chen => "chen",
        }
    }
}

impl std::fmt::Display for MethodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MethodKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MethodKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?}")))
    }
}

/// A configured law, dispatching to the concrete implementations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Proposed(Proposed),
    Deghat(Deghat),
    Cao(Cao),
    Chen(Chen),
}

impl Method {
    fn inner(&self) -> &dyn GuidanceLaw {
        match self {
            Method::Proposed(l) => l,
            Method::Deghat(l) => l,
            Method::Cao(l) => l,
            Method::Chen(l) => l,
        }
    }
}

impl GuidanceLaw for Method {
    fn label(&self) -> &'static str {
        self.inner().label()
    }
    fn d_star(&self) -> f64 {
        self.inner().d_star()
    }
    fn tangential_gain(&self) -> f64 {
        self.inner().tangential_gain()
    }
    fn singularity_threshold(&self) -> f64 {
        self.inner().singularity_threshold()
    }
    fn timing(&self) -> Option<PredefinedTiming> {
        self.inner().timing()
    }
    fn initialize(&self, state: &mut WorldState) {
        self.inner().initialize(state)
    }
    fn evaluate(&self, ctx: &StageContext<'_>) -> LawOutput {
        self.inner().evaluate(ctx)
    }
    fn synchronize(&self, state: &mut WorldState) {
        self.inner().synchronize(state)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConditions {
    pub agent_m: [f64; 2],
    pub target_m: [f64; 2],
    pub estimate_m: [f64; 2],
}

/// Orbit specification. Give exactly one of `omega_star_radps` and
/// `k_omega_mps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Guidance {
    pub d_star_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_star_radps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_omega_mps: Option<f64>,
}

impl Guidance {
    pub fn omega_star(&self) -> Result<f64> {
        match (self.omega_star_radps, self.k_omega_mps) {
            (Some(w), None) => Ok(w),
            (None, Some(k)) => Ok(k / self.d_star_m),
            _ => Err(Error::invalid(
                "[guidance] needs exactly one of omega_star_radps and k_omega_mps",
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProposedSection {
    pub alpha1: f64,
    pub alpha2: f64,
    pub t_c1_s: f64,
    pub t_c2_s: f64,
    pub singularity_threshold: f64,
    pub exp_arg_cap: f64,
}

impl Default for ProposedSection {
    fn default() -> Self {
        Self {
            alpha1: 0.5,
            alpha2: 0.5,
            t_c1_s: 0.2,
            t_c2_s: 0.4,
            singularity_threshold: 1e-8,
            exp_arg_cap: 50.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChenSection {
    pub residual: ChenResidual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt_s: f64,
    pub t_end_s: f64,
    pub record_stride: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            dt_s: 1e-4,
            t_end_s: 5.0,
            record_stride: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub method: MethodKind,
    pub initial: InitialConditions,
    #[serde(default)]
    pub target_motion: TargetMotion,
    pub guidance: Guidance,
    #[serde(default)]
    pub proposed: ProposedSection,
    #[serde(default)]
    pub baselines: BaselineParams,
    #[serde(default)]
    pub chen: ChenSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub checks: CheckConfig,
}

const BUNDLED: &[(&str, &str)] = &[
    ("sv_proposed", include_str!("../../scenarios/sv_proposed.toml")),
    ("sv_deghat", include_str!("../../scenarios/sv_deghat.toml")),
    ("sv_cao", include_str!("../../scenarios/sv_cao.toml")),
    ("sv_chen", include_str!("../../scenarios/sv_chen.toml")),
    ("sv_assumption", include_str!("../../scenarios/sv_assumption.toml")),
    ("exp1_stationary", include_str!("../../scenarios/exp1_stationary.toml")),
    ("exp2_drift", include_str!("../../scenarios/exp2_drift.toml")),
    ("sv_compare", include_str!("../../scenarios/sv_compare.toml")),
    ("sv_sweep", include_str!("../../scenarios/sv_sweep.toml")),
];

/// Source text of a bundled scenario or manifest.
pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

fn v(a: [f64; 2]) -> Vec2 {
    Vec2::new(a[0], a[1])
}

impl Scenario {
    /// Parse and validate.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// Load from a path, or from a bundled name when no such file exists.
    pub fn load(path_or_name: &str) -> Result<Self> {
        let path = Path::new(path_or_name);
        if path.exists() {
            Self::from_toml_str(&std::fs::read_to_string(path)?)
        } else if let Some(text) = bundled(path_or_name) {
            Self::from_toml_str(text)
        } else {
            Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("no scenario file or bundled scenario named {path_or_name:?}"),
            )))
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let i = &self.initial;
        for (name, p) in [
            ("agent_m", i.agent_m),
            ("target_m", i.target_m),
            ("estimate_m", i.estimate_m),
        ] {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::invalid(format!("[initial] {name} must be finite")));
            }
        }
        let d0 = (v(i.target_m) - v(i.agent_m)).norm();
        if !(d0 > COINCIDENCE_THRESHOLD) {
            return Err(Error::invalid(format!(
                "Assumption 1 violated: initial agent-target distance d(0) = {d0} must be > 0"
            )));
        }
        self.integrator().validate()?;
        self.baselines.validate()?;
        self.law()?;
        if self.method == MethodKind::Proposed {
            let p = &self.proposed;
            if !(p.t_c2_s > p.t_c1_s && p.t_c1_s > 0.0) {
                return Err(Error::invalid(format!(
                    "predefined times must satisfy t_c2 > t_c1 > 0, got t_c1 = {} s, t_c2 = {} s",
                    p.t_c1_s, p.t_c2_s
                )));
            }
        }
        self.checks.validate()?;
        Ok(())
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.integrator.dt_s,
            t_end: self.integrator.t_end_s,
            record_stride: self.integrator.record_stride,
        }
    }

    pub fn initial_state(&self) -> WorldState {
        WorldState::new(
            v(self.initial.agent_m),
            v(self.initial.target_m),
            v(self.initial.estimate_m),
        )
    }

    pub fn estimator_params(&self) -> EstimatorParams {
        EstimatorParams {
            alpha1: self.proposed.alpha1,
            t_c1: self.proposed.t_c1_s,
            singularity_threshold: self.proposed.singularity_threshold,
            exp_arg_cap: self.proposed.exp_arg_cap,
        }
    }

    pub fn controller_params(&self) -> Result<ControllerParams> {
        let mut c = ControllerParams::new(
            self.proposed.alpha2,
            self.proposed.t_c2_s,
            self.guidance.d_star_m,
            self.guidance.omega_star()?,
        );
        c.exp_arg_cap = self.proposed.exp_arg_cap;
        Ok(c)
    }

    /// Build the configured law.
    pub fn law(&self) -> Result<Method> {
        self.law_for(self.method)
    }

    /// Build a law of another kind on the same settings.
    pub fn law_for(&self, kind: MethodKind) -> Result<Method> {
        let d_star = self.guidance.d_star_m;
        let b = &self.baselines;
        let controller = self.controller_params()?;
        controller.validate()?;
        Ok(match kind {
            MethodKind::Proposed => {
                let estimator = self.estimator_params();
                estimator.validate()?;
                Method::Proposed(Proposed {
                    estimator,
                    controller,
                })
            }
            MethodKind::Deghat => Method::Deghat(Deghat {
                k_est: b.k_est,
                k_alpha: b.k_alpha,
                k_beta: b.k_beta,
                d_star,
            }),
            MethodKind::Cao => Method::Cao(Cao {
                k_e: b.k_e,
                kappa_alpha: b.kappa_alpha,
                kappa_beta: b.kappa_beta,
                d_star,
            }),
            MethodKind::Chen => Method::Chen(Chen {
                kappa_est: b.kappa_est,
                k_d: b.k_d,
                k_phi: b.k_phi,
                beta1: b.beta1,
                beta2: b.beta2,
                d_star,
                residual: self.chen.residual,
            }),
        })
    }

    pub fn run(&self) -> Result<Trajectory> {
        let law = self.law()?;
        Ok(simulate(
            &law,
            self.initial_state(),
            &self.target_motion,
            &self.integrator(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_scenarios_parse() {
        for name in ["sv_proposed", "sv_deghat", "sv_cao", "sv_chen", "sv_assumption", "exp1_stationary", "exp2_drift"] {
            let s = Scenario::load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name, name);
        }
    }

    #[test]
    fn sv_parameters() {
        let s = Scenario::load("sv_proposed").unwrap();
        assert_eq!(s.initial.target_m, [2.0, 3.0]);
        assert_eq!(s.initial.agent_m, [8.0, 9.0]);
        assert_eq!(s.initial.estimate_m, [5.0, 6.0]);
        let c = s.controller_params().unwrap();
        assert_eq!(c.k_omega(), 5.0);
        assert_eq!(c.omega_star(), 2.5);
        assert_eq!(s.integrator.dt_s, 1e-4);
    }

    #[test]
    fn round_trip() {
        let s = Scenario::load("exp2_drift").unwrap();
        let back = Scenario::from_toml_str(&s.to_toml_string()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn zero_distance_names_assumption() {
        let text = bundled("sv_proposed").unwrap().replace("agent_m = [8.0, 9.0]", "agent_m = [2.0, 3.0]");
        let err = Scenario::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("Assumption 1"), "{err}");
    }

    #[test]
    fn predefined_time_order_enforced() {
        let text = bundled("sv_proposed").unwrap().replace("t_c2_s = 0.4", "t_c2_s = 0.2");
        assert!(Scenario::from_toml_str(&text).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{}\nbogus = 1\n", bundled("sv_proposed").unwrap());
        assert!(Scenario::from_toml_str(&text).is_err());
    }

    #[test]
    fn guidance_needs_one_rate() {
        let g = Guidance {
            d_star_m: 2.0,
            omega_star_radps: Some(2.5),
            k_omega_mps: Some(5.0),
        };
        assert!(g.omega_star().is_err());
    }
}
