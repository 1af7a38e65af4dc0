//! JSON experiment configuration: schema, defaults, and conversion into
//! validated library objects.

use serde::{Deserialize, Serialize};

use fdl_core::{Domain, EigenConfig, Grid, PeriodicFn, Reaction, StepConfigF64};

use crate::error::CliError;

/// One Fourier mode of a shape profile.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    pub k: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Truncated Fourier series `mean + Σ cos·cos(2πks) + sin·sin(2πks)`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub mean: f64,
    #[serde(default)]
    pub harmonics: Vec<HarmonicConfig>,
}

impl ProfileConfig {
    fn build(&self) -> PeriodicFn {
        let mut f = PeriodicFn::constant(self.mean);
        for h in &self.harmonics {
            f = f.with_harmonic(h.k, h.cos, h.sin);
        }
        f
    }
}

/// Moving interval (A(t), A(t) + L(t)) with L = L0·l(ωt/2π), A = A0·a(ωt/2π).
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub l0: f64,
    #[serde(default)]
    pub a0: f64,
    pub omega: f64,
    pub length: ProfileConfig,
    pub position: ProfileConfig,
}

impl DomainConfig {
    pub fn build(&self) -> Result<Domain, CliError> {
        Domain::new(
            self.l0,
            self.a0,
            self.length.build(),
            self.position.build(),
            self.omega,
        )
        .map_err(|e| CliError::config(format!("domain: {e}")))
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ReactionKindConfig {
    Linear,
    Logistic,
}

fn one() -> f64 {
    1.0
}

/// Reaction term; also carries the diffusion constant D.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionConfig {
    pub kind: ReactionKindConfig,
    #[serde(default)]
    pub fprime0: f64,
    #[serde(default = "one")]
    pub carrying_capacity: f64,
    #[serde(default = "one")]
    pub diffusion: f64,
}

impl Default for ReactionConfig {
    fn default() -> Self {
        ReactionConfig {
            kind: ReactionKindConfig::Linear,
            fprime0: 0.0,
            carrying_capacity: 1.0,
            diffusion: 1.0,
        }
    }
}

impl ReactionConfig {
    pub fn build(&self) -> Result<Reaction, CliError> {
        let r = match self.kind {
            ReactionKindConfig::Linear => Reaction::linear(self.fprime0, self.diffusion),
            ReactionKindConfig::Logistic => {
                Reaction::logistic(self.fprime0, self.carrying_capacity, self.diffusion)
            }
        };
        r.map_err(|e| CliError::config(format!("reaction: {e}")))
    }
}

fn default_m() -> usize {
    200
}
fn default_nt() -> usize {
    800
}
fn default_theta() -> f64 {
    0.5
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_periods() -> usize {
    400
}

/// Discretization and iteration controls; omissions take the defaults.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// Interior spatial nodes.
    #[serde(default = "default_m")]
    pub m: usize,
    /// Time steps per period.
    #[serde(default = "default_nt")]
    pub nt: usize,
    /// θ-scheme weight: 0.5 trapezoidal, 1.0 fully implicit.
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Power-iteration gain tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Iteration cap, in periods.
    #[serde(default = "default_max_periods")]
    pub max_periods: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            m: default_m(),
            nt: default_nt(),
            theta: default_theta(),
            tol: default_tol(),
            max_periods: default_max_periods(),
        }
    }
}

impl NumericsConfig {
    /// Double spatial and temporal resolution `refine` times.
    pub fn refined(&self, refine: u32) -> Result<NumericsConfig, CliError> {
        let factor = 1usize
            .checked_shl(refine)
            .ok_or_else(|| CliError::config("refine: doubling overflows"))?;
        let m = self
            .m
            .checked_mul(factor)
            .ok_or_else(|| CliError::config("numerics.m: refine overflows"))?;
        let nt = self
            .nt
            .checked_mul(factor)
            .ok_or_else(|| CliError::config("numerics.nt: refine overflows"))?;
        Ok(NumericsConfig {
            m,
            nt,
            ..self.clone()
        })
    }

    pub fn grid(&self, l0: f64) -> Result<Grid, CliError> {
        Grid::new(l0, self.m).map_err(|e| CliError::config(format!("numerics.m: {e}")))
    }

    pub fn step(&self) -> Result<StepConfigF64, CliError> {
        StepConfigF64::new(self.nt, self.theta)
            .map_err(|e| CliError::config(format!("numerics: {e}")))
    }

    pub fn eigen(&self) -> Result<EigenConfig, CliError> {
        EigenConfig::new(self.tol, self.max_periods)
            .map_err(|e| CliError::config(format!("numerics: {e}")))
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Validate,
    Eigen,
    Bounds,
    Sweep,
    Nonlinear,
}

impl RunKind {
    pub fn name(self) -> &'static str {
        match self {
            RunKind::Validate => "validate",
            RunKind::Eigen => "eigen",
            RunKind::Bounds => "bounds",
            RunKind::Sweep => "sweep",
            RunKind::Nonlinear => "nonlinear",
        }
    }
}

/// What to run and its run-specific knobs.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: RunKind,
    /// Frequencies for `sweep` (strictly increasing, positive).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<f64>>,
    /// Horizon for `nonlinear`, in periods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_periods: Option<usize>,
    /// Initial amplitudes (fractions of K) of half-sine seeds for `nonlinear`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<f64>>,
}

/// Top-level experiment configuration file.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    #[serde(default)]
    pub reaction: ReactionConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// Validate by constructing every library object the run would use.
    pub fn check(&self) -> Result<(), CliError> {
        let domain = self.domain.build()?;
        self.reaction.build()?;
        self.numerics.grid(domain.l0())?;
        self.numerics.step()?;
        self.numerics.eigen()?;
        if self.run.kind == RunKind::Sweep {
            match &self.run.omegas {
                None => return Err(CliError::config("run.omegas: required for sweep")),
                Some(ws) if ws.is_empty() => {
                    return Err(CliError::config("run.omegas: must be non-empty"))
                }
                Some(_) => {}
            }
        }
        if let Some(seeds) = &self.run.seeds {
            if seeds.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
                return Err(CliError::config(
                    "run.seeds: amplitudes must lie in (0, 1]",
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(kind: &str) -> String {
        format!(
            r#"{{
              "domain": {{
                "l0": 3.141592653589793,
                "omega": 1.0,
                "length": {{ "mean": 1.0 }},
                "position": {{ "mean": 0.0 }}
              }},
              "run": {{ "kind": "{kind}" }}
            }}"#
        )
    }

    #[test]
    fn defaults_fill_omissions() {
        let cfg: ExperimentConfig = serde_json::from_str(&minimal("eigen")).unwrap();
        assert_eq!(cfg.numerics.m, 200);
        assert_eq!(cfg.numerics.nt, 800);
        assert_eq!(cfg.numerics.theta, 0.5);
        assert_eq!(cfg.numerics.tol, 1e-10);
        assert_eq!(cfg.numerics.max_periods, 400);
        assert_eq!(cfg.reaction.kind, ReactionKindConfig::Linear);
        assert_eq!(cfg.reaction.diffusion, 1.0);
        cfg.check().unwrap();
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = minimal("eigen").replace("\"run\"", "\"typo\": 1, \"run\"");
        assert!(serde_json::from_str::<ExperimentConfig>(&text).is_err());
    }

    #[test]
    fn sweep_requires_omegas() {
        let cfg: ExperimentConfig = serde_json::from_str(&minimal("sweep")).unwrap();
        let err = cfg.check().unwrap_err();
        assert_eq!(err.code(), 1);
        assert!(err.to_string().contains("run.omegas"));
    }

    #[test]
    fn refine_doubles_resolution() {
        let n = NumericsConfig::default().refined(2).unwrap();
        assert_eq!(n.m, 800);
        assert_eq!(n.nt, 3200);
    }

    #[test]
    fn bad_seed_amplitudes_are_rejected() {
        let mut cfg: ExperimentConfig = serde_json::from_str(&minimal("nonlinear")).unwrap();
        cfg.run.seeds = Some(vec![0.5, 0.0]);
        assert!(cfg.check().is_err());
    }

    #[test]
    fn profile_builds_the_series() {
        let p = ProfileConfig {
            mean: 1.0,
            harmonics: vec![HarmonicConfig {
                k: 1,
                cos: 0.0,
                sin: 0.5,
            }],
        };
        let f = p.build();
        assert!((f.value(0.25) - 1.5).abs() < 1e-15);
    }
}
