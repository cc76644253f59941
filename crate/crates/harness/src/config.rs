//! TOML run and sweep configurations.

use std::path::Path;

use axiring_core::grid::make_grid;
use axiring_core::{Grid, Profile, RingSpec, SimParams};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    pub center: [f64; 2],
    #[serde(default = "one")]
    pub intensity: f64,
    #[serde(default)]
    pub profile: Profile,
}

fn one() -> f64 {
    1.0
}

impl From<&RingConfig> for RingSpec {
    fn from(r: &RingConfig) -> Self {
        RingSpec { center: r.center, intensity: r.intensity, profile: r.profile }
    }
}

/// Window extents; `spacing` defaults to `ε/8`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub z: [f64; 2],
    pub r: [f64; 2],
    pub spacing: Option<f64>,
}

impl GridConfig {
    pub fn build(&self, eps: f64) -> Result<Grid, HarnessError> {
        let h = self.spacing.unwrap_or(eps / 8.0);
        make_grid([self.z[0], self.z[1], self.r[0], self.r[1]], h).map_err(|e| HarnessError::field("grid", e))
    }
}

/// Optional overrides of the simulation defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub nu: Option<f64>,
    pub dt: Option<f64>,
    pub chi: Option<f64>,
    pub r_hat: Option<f64>,
    pub sample_interval: Option<f64>,
    pub separation: Option<f64>,
    pub conc_eta: Option<f64>,
    pub tail_h: Option<Vec<f64>>,
    pub mollifier: Option<[f64; 2]>,
    pub cfl_max: Option<f64>,
    pub m_bound: Option<f64>,
    pub recenter: Option<bool>,
    pub self_induced: Option<bool>,
}

impl Options {
    fn apply(&self, p: &mut SimParams) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { p.$f = v; } )* };
        }
        set!(nu, chi, r_hat, sample_interval, separation, conc_eta, tail_h, cfl_max, m_bound, recenter, self_induced);
        if self.dt.is_some() {
            p.dt = self.dt;
        }
        if let Some([r, h]) = self.mollifier {
            p.mollifier = (r, h);
        }
    }
}

/// Uniform prescribed field `F = (speed, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrescribedConfig {
    pub uniform_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub epsilon: f64,
    pub gamma: f64,
    pub t_final: f64,
    pub grid: GridConfig,
    pub rings: Vec<RingConfig>,
    #[serde(default)]
    pub options: Options,
    pub prescribed: Option<PrescribedConfig>,
    /// Write field snapshots at every sample time.
    #[serde(default = "yes")]
    pub snapshots: bool,
}

fn yes() -> bool {
    true
}

impl RunConfig {
    pub fn specs(&self) -> Vec<RingSpec> {
        self.rings.iter().map(RingSpec::from).collect()
    }

    /// Simulation parameters after defaults, overrides and validation.
    pub fn params(&self) -> Result<SimParams, HarnessError> {
        if self.rings.is_empty() {
            return Err(HarnessError::Schema { path: "rings".into(), message: "at least one ring is required".into() });
        }
        let mut p = SimParams::new(self.epsilon, self.gamma, self.t_final).map_err(|e| HarnessError::field("", e))?;
        self.options.apply(&mut p);
        p.validate(&self.specs()).map_err(|e| HarnessError::field("options", e))?;
        Ok(p)
    }

    pub fn grid(&self) -> Result<Grid, HarnessError> {
        self.grid.build(self.epsilon)
    }
}

/// Per-`ε` replacements inside a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOverride {
    pub epsilon: f64,
    pub grid: Option<GridConfig>,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    pub gamma: f64,
    pub t_final: f64,
    pub grid: GridConfig,
    pub rings: Vec<RingConfig>,
    #[serde(default)]
    pub options: Options,
    #[serde(default)]
    pub overrides: Vec<SweepOverride>,
    #[serde(default)]
    pub snapshots: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.epsilons.is_empty() {
            return Err(HarnessError::Schema { path: "epsilons".into(), message: "ε list is empty".into() });
        }
        if self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(HarnessError::Schema { path: "epsilons".into(), message: "ε must be strictly decreasing".into() });
        }
        for (k, o) in self.overrides.iter().enumerate() {
            if !self.epsilons.contains(&o.epsilon) {
                return Err(HarnessError::Schema {
                    path: format!("overrides[{k}].epsilon"),
                    message: format!("{} is not in the ε list", o.epsilon),
                });
            }
        }
        for k in 0..self.epsilons.len() {
            self.member(k)?.params()?;
        }
        Ok(())
    }

    /// Run configuration of the `k`-th sweep member.
    pub fn member(&self, k: usize) -> Result<RunConfig, HarnessError> {
        let eps = self.epsilons[k];
        let mut cfg = RunConfig {
            epsilon: eps,
            gamma: self.gamma,
            t_final: self.t_final,
            grid: self.grid.clone(),
            rings: self.rings.clone(),
            options: self.options.clone(),
            prescribed: None,
            snapshots: self.snapshots,
        };
        if let Some(o) = self.overrides.iter().find(|o| o.epsilon == eps) {
            if let Some(g) = &o.grid {
                cfg.grid = g.clone();
            }
            if o.dt.is_some() {
                cfg.options.dt = o.dt;
            }
        }
        Ok(cfg)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, HarnessError> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| HarnessError::Schema {
        path: e.path().to_string(),
        message: e.inner().message().to_string(),
    })
}

pub fn parse_run(text: &str) -> Result<RunConfig, HarnessError> {
    let cfg: RunConfig = parse(text)?;
    cfg.params()?;
    cfg.grid()?;
    Ok(cfg)
}

pub fn parse_sweep(text: &str) -> Result<SweepConfig, HarnessError> {
    let cfg: SweepConfig = parse(text)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_run(path: &Path) -> Result<RunConfig, HarnessError> {
    parse_run(&std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?)
}

pub fn load_sweep(path: &Path) -> Result<SweepConfig, HarnessError> {
    parse_sweep(&std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
epsilon = 0.1
gamma = 0.5
t_final = 0.2

[grid]
z = [-0.5, 0.5]
r = [0.4, 1.6]

[[rings]]
center = [0.0, 1.0]
"#;

    #[test]
    fn minimal_config_parses() {
        let c = parse_run(BASE).unwrap();
        assert_eq!(c.rings[0].intensity, 1.0);
        assert_eq!(c.rings[0].profile, Profile::UniformDisk);
        assert_eq!(c.grid().unwrap().spacing, 0.1 / 8.0);
        assert!(c.snapshots);
    }

    #[test]
    fn gamma_out_of_range_is_reported_with_symbol() {
        let e = parse_run(&BASE.replace("gamma = 0.5", "gamma = 1.5")).unwrap_err();
        let text = e.to_string();
        assert!(text.contains("γ ∉ (0,1)"), "{text}");
        assert!(text.contains("gamma"), "{text}");
    }

    #[test]
    fn type_errors_carry_field_path() {
        let bad = BASE.replace("center = [0.0, 1.0]", "center = [0.0, \"one\"]");
        match parse_run(&bad).unwrap_err() {
            HarnessError::Schema { path, .. } => assert_eq!(path, "rings[0].center[1]"),
            other => panic!("unexpected {other:?}"),
        }
        let unknown = format!("{BASE}\n[options]\nnuu = 1.0\n");
        match parse_run(&unknown).unwrap_err() {
            HarnessError::Schema { path, .. } => assert!(path.starts_with("options"), "{path}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sweep_rejects_empty_and_unsorted() {
        let body = BASE.replace("epsilon = 0.1", "epsilons = []");
        match parse_sweep(&body).unwrap_err() {
            HarnessError::Schema { path, .. } => assert_eq!(path, "epsilons"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_sweep(&BASE.replace("epsilon = 0.1", "epsilons = [0.05, 0.1]")).is_err());
        let ok = parse_sweep(&BASE.replace("epsilon = 0.1", "epsilons = [0.1, 0.05]")).unwrap();
        assert_eq!(ok.member(1).unwrap().epsilon, 0.05);
    }
}
