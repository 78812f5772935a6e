//! Experiment configuration: a sectioned TOML file.

use std::path::PathBuf;

use phaseseg::grid::Grid;
use phaseseg::initdata::{InitialData, Profile};
use phaseseg::model::ModelSpec;
use phaseseg::sigma_solver::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub grid: GridBlock,
    pub time: TimeBlock,
    pub sigma: SigmaBlock,
    pub initial: InitialBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub tolerances: ToleranceBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_demo: Option<StopDemoBlock>,
    /// Results appended by `run`; ignored on input so a summary can be rerun.
    #[serde(default, skip_serializing)]
    pub summary: Option<toml::Table>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub dim: usize,
    /// Cells per axis, one entry per dimension.
    pub n: Vec<usize>,
    /// Box lengths per axis; defaults to 1.
    #[serde(default)]
    pub length: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    pub tau: f64,
    pub t_final: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitTag {
    Limit,
}

/// `value = 0.1`, `value = "limit"` or `value = [0.1, 0.01]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaValue {
    Limit(LimitTag),
    Single(f64),
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaBlock {
    pub value: SigmaValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBlock {
    pub mu: Profile,
    pub rho: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "one")]
    pub snapshot_stride: usize,
    #[serde(default = "yes")]
    pub snapshots: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: default_dir(), snapshot_stride: 1, snapshots: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceBlock {
    #[serde(default = "lin_tol")]
    pub lin_tol: f64,
    #[serde(default = "res_tol")]
    pub res_tol: f64,
    #[serde(default = "a_min")]
    pub a_min: f64,
    /// Samples per axis of the assumption checks.
    #[serde(default = "check_density")]
    pub check_density: usize,
    #[serde(default = "monitor_rel")]
    pub monitor_rel: f64,
    #[serde(default = "one_f")]
    pub monitor_c: f64,
}

impl Default for ToleranceBlock {
    fn default() -> Self {
        Self {
            lin_tol: lin_tol(),
            res_tol: res_tol(),
            a_min: a_min(),
            check_density: check_density(),
            monitor_rel: monitor_rel(),
            monitor_c: 1.0,
        }
    }
}

/// Piecewise-linear input for `stop-demo`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopDemoBlock {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub rho0: f64,
    #[serde(default)]
    pub lo: f64,
    #[serde(default = "one_f")]
    pub hi: f64,
    /// Insert obstacle contact times as extra nodes.
    #[serde(default)]
    pub refined: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn one() -> usize {
    1
}
fn one_f() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn lin_tol() -> f64 {
    1e-12
}
fn res_tol() -> f64 {
    1e-10
}
fn a_min() -> f64 {
    0.5
}
fn check_density() -> usize {
    101
}
fn monitor_rel() -> f64 {
    1e-6
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        self.model.validate().map_err(|e| CliError::Validation(format!("model: {e}")))?;
        self.build_grid()?;
        if !(self.time.tau > 0.0) || !(self.time.t_final >= 0.0) {
            return bad(format!("time: need tau > 0 and t_final >= 0, got {:?}", self.time));
        }
        if self.output.snapshot_stride == 0 {
            return bad("output.snapshot_stride must be >= 1".into());
        }
        if self.tolerances.check_density < 2 {
            return bad("tolerances.check_density must be >= 2".into());
        }
        let in_range = |s: f64| s > 0.0 && s <= 1.0;
        match &self.sigma.value {
            SigmaValue::Limit(_) => {}
            SigmaValue::Single(s) if in_range(*s) => {}
            SigmaValue::Single(s) => return bad(format!("sigma.value must lie in (0, 1], got {s}")),
            SigmaValue::List(list) => {
                if list.is_empty() {
                    return bad("sigma.value list is empty".into());
                }
                if let Some(s) = list.iter().find(|s| !in_range(**s)) {
                    return bad(format!("sigma.value entries must lie in (0, 1], got {s}"));
                }
                if list.windows(2).any(|p| !(p[1] < p[0])) {
                    return bad("sigma.value list must be strictly decreasing".into());
                }
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid, CliError> {
        let g = &self.grid;
        if g.n.len() != g.dim || !(g.length.is_empty() || g.length.len() == g.dim) {
            return Err(CliError::Validation(format!(
                "grid: n and length need {} entries, got {} and {}",
                g.dim,
                g.n.len(),
                g.length.len()
            )));
        }
        let len = |i: usize| g.length.get(i).copied().unwrap_or(1.0);
        let cells = [g.n[0], g.n.get(1).copied().unwrap_or(1)];
        Grid::new(g.dim, cells, [len(0), len(1)]).map_err(|e| CliError::Validation(format!("grid: {e}")))
    }

    pub fn initial_data(&self, grid: &Grid) -> Result<InitialData, CliError> {
        let mu0 = self.initial.mu.sample(grid);
        let rho0 = self.initial.rho.sample(grid);
        InitialData::new(grid, &self.model.graph, mu0, rho0).map_err(|e| CliError::Validation(format!("initial: {e}")))
    }

    pub fn solver_config(&self, sigma: f64) -> SolverConfig {
        let t = &self.tolerances;
        SolverConfig {
            tau: self.time.tau,
            t_final: self.time.t_final,
            sigma,
            lin_tol: t.lin_tol,
            res_tol: t.res_tol,
            a_min: t.a_min,
            snapshot_stride: self.output.snapshot_stride,
        }
    }

    /// Replaces the seeds of random profiles: `seed` for `mu`, `seed + 1` for `rho`.
    pub fn reseed(&mut self, seed: u64) {
        self.initial.mu = self.initial.mu.with_seed(seed);
        self.initial.rho = self.initial.rho.with_seed(seed.wrapping_add(1));
    }
}
