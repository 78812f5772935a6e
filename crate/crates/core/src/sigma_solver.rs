//! Time integration of the sigma > 0 system.
//!
//! Each step first advances the phase variable with an implicit monotone solve
//! (`rho - tau sigma Lap rho + tau xi = rho_prev + tau (mu g'(rho_prev) - pi(rho_prev))`),
//! then the chemical potential from the conservative form
//! `(1 + 2 g(rho)) mu - g'(rho) (rho - rho_prev) mu - tau div(kappa grad mu) = u_prev`,
//! a symmetric M-matrix system. Steps whose diagonal drops below `a_min` are
//! retried with half the step.
//!
//! Passing `sigma = 0` to [`run_from`] gives the limit problem: the phase step
//! decouples into cellwise resolvents.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{EstimateAccumulator, Extremes, RunTrace, Snapshot};
use crate::error::{Error, Result};
use crate::grid::{self, FaceCoefficients, Field, Grid};
use crate::initdata::{self, InitialData, ProcessedData};
use crate::model::ModelSpec;
use crate::monotone::{solve_inclusion, InclusionSolverOptions};

/// Maximal number of step halvings before a step fails.
pub const MAX_HALVINGS: u32 = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub mu: Field,
    pub rho: Field,
    pub xi: Field,
    pub u: Field,
}

fn u_of(spec: &ModelSpec, mu: &Field, rho: &Field) -> Field {
    mu.zip_map(rho, |m, r| (1.0 + 2.0 * spec.g(r)) * m)
}

impl State {
    /// Builds a state and its `u = (1 + 2 g(rho)) mu`.
    pub fn new(grid: &Grid, spec: &ModelSpec, t: f64, mu: Field, rho: Field, xi: Field) -> Result<Self> {
        grid.check(&mu)?;
        grid.check(&rho)?;
        grid.check(&xi)?;
        let u = u_of(spec, &mu, &rho);
        Ok(Self { t, mu, rho, xi, u })
    }

    pub fn from_data(grid: &Grid, spec: &ModelSpec, data: &ProcessedData) -> Result<Self> {
        Self::new(grid, spec, 0.0, data.mu0.clone(), data.rho0.clone(), data.xi0.clone())
    }

    /// Checks `mu >= -mu_tol`, `rho in D(f1)`, `xi in beta(rho)` and the `u` identity.
    pub fn check(&self, spec: &ModelSpec, mu_tol: f64) -> Result<()> {
        let dom = spec.graph.f1_domain();
        for k in 0..self.mu.len() {
            if self.mu[k] < -mu_tol {
                return Err(Error::Domain { value: self.mu[k], domain: "[0, inf)".into() });
            }
            if !dom.contains(self.rho[k]) {
                return Err(Error::Domain { value: self.rho[k], domain: dom.to_string() });
            }
            if !spec.graph.contains(self.rho[k], self.xi[k]) {
                return Err(Error::Evaluation {
                    what: "graph membership",
                    point: format!("cell {k}: rho = {}, xi = {}", self.rho[k], self.xi[k]),
                });
            }
            let defect = (self.u[k] - (1.0 + 2.0 * spec.g(self.rho[k])) * self.mu[k]).abs();
            if defect > 1e-12 * (1.0 + self.u[k].abs()) {
                return Err(Error::Evaluation { what: "u identity", point: format!("cell {k}: defect {defect}") });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tau: f64,
    pub t_final: f64,
    pub sigma: f64,
    #[serde(default = "default_lin_tol")]
    pub lin_tol: f64,
    #[serde(default = "default_res_tol")]
    pub res_tol: f64,
    #[serde(default = "default_a_min")]
    pub a_min: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
}

fn default_lin_tol() -> f64 {
    1e-12
}
fn default_res_tol() -> f64 {
    1e-10
}
fn default_a_min() -> f64 {
    0.5
}
fn default_stride() -> usize {
    1
}

impl SolverConfig {
    pub fn new(tau: f64, t_final: f64, sigma: f64) -> Self {
        Self {
            tau,
            t_final,
            sigma,
            lin_tol: default_lin_tol(),
            res_tol: default_res_tol(),
            a_min: default_a_min(),
            snapshot_stride: default_stride(),
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    /// Everything except `sigma`, which [`validate`](Self::validate) adds.
    pub fn validate_common(&self) -> Result<()> {
        let positive = [
            ("tau", self.tau),
            ("t_final", self.t_final),
            ("lin_tol", self.lin_tol),
            ("res_tol", self.res_tol),
            ("a_min", self.a_min),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Input(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Input("snapshot_stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_common()?;
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return Err(Error::Input(format!("sigma must lie in (0, 1], got {}", self.sigma)));
        }
        Ok(())
    }
}

/// Byproducts of an accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub tau_eff: f64,
    pub halvings: u32,
    pub inclusion_iterations: usize,
    /// Face diffusivities used in the chemical-potential solve.
    pub kappa_face: FaceCoefficients,
}

/// One step of the sigma > 0 system with `cfg.sigma`.
pub fn step(state: &State, cfg: &SolverConfig, grid: &Grid, spec: &ModelSpec) -> Result<(State, StepReport)> {
    cfg.validate()?;
    step_at(state, cfg.tau, cfg.sigma, cfg, grid, spec)
}

/// One step of length at most `tau` with diffusion `sigma >= 0`.
pub fn step_at(
    state: &State,
    tau: f64,
    sigma: f64,
    cfg: &SolverConfig,
    grid: &Grid,
    spec: &ModelSpec,
) -> Result<(State, StepReport)> {
    let graph = &spec.graph;
    let opts = InclusionSolverOptions { tol: cfg.res_tol, lin_tol: cfg.lin_tol, ..Default::default() };
    let n = state.rho.len();
    let mut tau_try = tau;
    let mut halvings = 0;
    loop {
        let b = Field::from_vec(
            (0..n)
                .map(|k| {
                    let r = state.rho[k];
                    r + tau_try * (state.mu[k] * spec.dg(r) - spec.pi(r))
                })
                .collect(),
        );
        let z0 = state.rho.zip_map(&state.xi, |r, x| r + tau_try * x);
        let warm = if z0.all_finite() { Some(&z0) } else { None };
        let inc = solve_inclusion(grid, tau_try * sigma, tau_try, &b, graph, warm, &opts)?;
        let rho = inc.rho;

        let diag = Field::from_vec(
            (0..n)
                .map(|k| {
                    let r = rho[k];
                    1.0 + 2.0 * spec.g(r) - spec.dg(r) * (r - state.rho[k])
                })
                .collect(),
        );
        if diag.min() < cfg.a_min {
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::StepFailure {
                    step: 0,
                    t: state.t,
                    reason: format!("diagonal below a_min = {} after {MAX_HALVINGS} halvings", cfg.a_min),
                });
            }
            tau_try *= 0.5;
            continue;
        }

        let (kappa_face, _) = grid::assemble_face_kappa(grid, &state.mu, &rho, |m, r| spec.kappa(m, r))?;
        // solve for the increment so that equilibria are reproduced exactly
        let flux = grid::div_kappa_grad(grid, &state.mu, &kappa_face)?;
        let defect = Field::from_vec((0..n).map(|k| state.u[k] - diag[k] * state.mu[k] + tau_try * flux[k]).collect());
        let (delta, _) = grid::solve_spd(grid, &diag, &kappa_face, tau_try, &defect, cfg.lin_tol)?;
        let mu = state.mu.zip_map(&delta, |m, d| m + d);
        let u = u_of(spec, &mu, &rho);
        let next = State { t: state.t + tau_try, mu, rho, xi: inc.xi, u };
        let report = StepReport { tau_eff: tau_try, halvings, inclusion_iterations: inc.iterations, kappa_face };
        return Ok((next, report));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trace: RunTrace,
    pub state: State,
}

/// A run that stopped early, with the trace up to the last accepted step.
#[derive(Debug, Clone)]
pub struct RunAborted {
    pub error: Error,
    pub step: usize,
    pub partial: Box<RunTrace>,
}

impl std::fmt::Display for RunAborted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "run aborted at step {}: {}", self.step, self.error)
    }
}

impl std::error::Error for RunAborted {}

impl From<RunAborted> for Error {
    fn from(a: RunAborted) -> Self {
        match a.error {
            Error::StepFailure { t, reason, .. } => Error::StepFailure { step: a.step, t, reason },
            other => other,
        }
    }
}

/// Processes `init` for `cfg.sigma` and integrates to `cfg.t_final`.
pub fn run(init: &InitialData, cfg: &SolverConfig, grid: &Grid, spec: &ModelSpec) -> std::result::Result<RunOutput, RunAborted> {
    let abort = |error| RunAborted { error, step: 0, partial: Box::new(empty_trace(grid, cfg.sigma, cfg.tau)) };
    cfg.validate().map_err(abort)?;
    let data = initdata::for_sigma(init, cfg.sigma, grid, &spec.graph, cfg.res_tol).map_err(abort)?;
    run_from(&data, cfg, cfg.sigma, grid, spec)
}

fn empty_trace(grid: &Grid, sigma: f64, tau: f64) -> RunTrace {
    RunTrace {
        grid: *grid,
        sigma,
        tau,
        rows: Vec::new(),
        snapshots: Vec::new(),
        extremes: Extremes::default(),
        steps: 0,
        halvings: 0,
    }
}

/// Integrates already processed data with diffusion `sigma >= 0`
/// (`cfg.sigma` is ignored).
pub fn run_from(
    data: &ProcessedData,
    cfg: &SolverConfig,
    sigma: f64,
    grid: &Grid,
    spec: &ModelSpec,
) -> std::result::Result<RunOutput, RunAborted> {
    let mut trace = empty_trace(grid, sigma, cfg.tau);
    let abort = |error, step, trace: &RunTrace| RunAborted { error, step, partial: Box::new(trace.clone()) };
    if let Err(e) = cfg.validate_common().and_then(|_| {
        if (0.0..=1.0).contains(&sigma) {
            Ok(())
        } else {
            Err(Error::Input(format!("sigma must lie in [0, 1], got {sigma}")))
        }
    }) {
        return Err(abort(e, 0, &trace));
    }
    let mut state = match State::from_data(grid, spec, data) {
        Ok(s) => s,
        Err(e) => return Err(abort(e, 0, &trace)),
    };
    let mut acc = EstimateAccumulator::new(grid, spec, sigma, &state);
    let row = acc.row(grid, spec, &state, None);
    trace.extremes.absorb(&row);
    trace.rows.push(row);
    trace.snapshots.push(Snapshot::of(&state));

    let t_end = cfg.t_final;
    let eps = 1e-9 * cfg.tau;
    let mut k = 0;
    while state.t < t_end - eps {
        let tau = cfg.tau.min(t_end - state.t);
        let (mut next, report) = match step_at(&state, tau, sigma, cfg, grid, spec) {
            Ok(r) => r,
            Err(e) => return Err(abort(e, k + 1, &trace)),
        };
        k += 1;
        if (t_end - next.t).abs() <= eps {
            next.t = t_end;
        } else {
            // keep times on the uniform mesh when no halving happened
            let lattice = (next.t / cfg.tau).round() * cfg.tau;
            if report.halvings == 0 && (lattice - next.t).abs() <= eps {
                next.t = lattice;
            }
        }
        acc.update(grid, spec, &state, &next, report.tau_eff, &report.kappa_face);
        trace.halvings += report.halvings as usize;
        let row = acc.row(grid, spec, &next, Some((&state, report.tau_eff)));
        trace.extremes.absorb(&row);
        let last = next.t >= t_end;
        if k % cfg.snapshot_stride == 0 || last {
            trace.rows.push(row);
            trace.snapshots.push(Snapshot::of(&next));
        }
        state = next;
    }
    trace.steps = k;
    Ok(RunOutput { trace, state })
}
