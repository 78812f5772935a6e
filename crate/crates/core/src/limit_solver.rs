//! The sigma = 0 limit problem and the scalar inclusion
//! `rho' + beta(rho) + pi(rho) - mu g'(rho) ∋ 0` driven by a given `mu`.

use crate::convexgraph::ConvexGraph;
use crate::diagnostics::RunTrace;
use crate::error::{Error, Result};
use crate::initdata::{self, InitialData};
use crate::grid::Grid;
use crate::model::ModelSpec;
use crate::sigma_solver::{self, RunAborted, RunOutput, SolverConfig, State, StepReport};

/// Solution of a scalar inclusion on a uniform mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPath {
    pub times: Vec<f64>,
    pub rho: Vec<f64>,
    pub xi: Vec<f64>,
    pub mu: Vec<f64>,
}

/// Uniform mesh `0, tau, ..., n tau`.
pub fn uniform_mesh(tau: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| k as f64 * tau).collect()
}

/// Implicit-in-`beta`, explicit-in-the-rest scheme
/// `rho_n = R_tau(rho_{n-1} + tau (mu_n g'(rho_{n-1}) - pi(rho_{n-1})))`.
///
/// `mu_path[n]` is the value on the step ending at node `n`; `mu_path[0]` is
/// only recorded. `xi[0]` is the minimal section of `beta(rho0)`.
pub fn scalar_inclusion_solve(mu_path: &[f64], rho0: f64, spec: &ModelSpec, tau: f64) -> Result<ScalarPath> {
    scalar_inclusion_with(mu_path, rho0, &spec.graph, tau, |r| spec.dg(r), |r| spec.pi(r))
}

/// [`scalar_inclusion_solve`] with explicit `g'` and `pi`.
pub fn scalar_inclusion_with(
    mu_path: &[f64],
    rho0: f64,
    graph: &ConvexGraph,
    tau: f64,
    dg: impl Fn(f64) -> f64,
    pi: impl Fn(f64) -> f64,
) -> Result<ScalarPath> {
    if mu_path.is_empty() {
        return Err(Error::Input("empty mu path".into()));
    }
    if let Some((i, m)) = mu_path.iter().enumerate().find(|(_, m)| !(**m >= 0.0)) {
        return Err(Error::Input(format!("mu must be nonnegative, node {i} has {m}")));
    }
    if !(tau > 0.0) {
        return Err(Error::Input(format!("tau must be positive, got {tau}")));
    }
    let xi0 = graph.min_section(rho0).ok_or_else(|| Error::Domain { value: rho0, domain: graph.domain().to_string() })?;
    let n = mu_path.len();
    let mut rho = Vec::with_capacity(n);
    let mut xi = Vec::with_capacity(n);
    rho.push(rho0);
    xi.push(xi0);
    for k in 1..n {
        let r = rho[k - 1];
        let input = r + tau * (mu_path[k] * dg(r) - pi(r));
        let next = graph.resolvent(input, tau)?;
        rho.push(next);
        xi.push((input - next) / tau);
    }
    Ok(ScalarPath { times: uniform_mesh(tau, n - 1), rho, xi, mu: mu_path.to_vec() })
}

/// `pi` and `g'` frozen above `rho_hi`: `pi*(r) = pi(min(r, rho_hi))`, same for `g'`.
pub fn cutoff(f: impl Fn(f64) -> f64, rho_hi: f64) -> impl Fn(f64) -> f64 {
    move |r| f(r.min(rho_hi))
}

/// Measured stability constant of two scalar solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    /// `max_t LHS / RHS`, with `0 / 0 = 0`.
    pub c_hat: f64,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
}

/// `LHS(t) = |rho1 - rho2|(t) + int_0^t |rho1' - rho2'|` against
/// `RHS(t) = |rho1(0) - rho2(0)| + int_0^t (1 + mu1) |rho1 - rho2| + |mu1 - mu2|`.
///
/// Quadrature matches the scheme: on step `n` the forcing uses `mu[n]` and the
/// difference at node `n - 1`.
pub fn lipschitz_check(a: &ScalarPath, b: &ScalarPath) -> Result<LipschitzReport> {
    if a.times.len() != b.times.len() || a.times.iter().zip(&b.times).any(|(x, y)| x != y) {
        return Err(Error::Comparability("scalar paths live on different meshes".into()));
    }
    let n = a.times.len();
    let e: Vec<f64> = (0..n).map(|k| a.rho[k] - b.rho[k]).collect();
    let mut lhs = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    let mut variation = 0.0;
    let mut forcing = 0.0;
    lhs.push(e[0].abs());
    rhs.push(e[0].abs());
    for k in 1..n {
        let dt = a.times[k] - a.times[k - 1];
        variation += (e[k] - e[k - 1]).abs();
        forcing += dt * ((1.0 + a.mu[k]) * e[k - 1].abs() + (a.mu[k] - b.mu[k]).abs());
        lhs.push(e[k].abs() + variation);
        rhs.push(e[0].abs() + forcing);
    }
    let c_hat = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| if *l == 0.0 { 0.0 } else { l / r })
        .fold(0.0, f64::max);
    Ok(LipschitzReport { c_hat, lhs, rhs })
}

/// Upper bound for [`LipschitzReport::c_hat`] implied by the declared constants:
/// `max(1, 2 max(L_pi, L_g'), 2 sup |g'|)` with the supremum over `[lo, hi]`.
pub fn lipschitz_cap(spec: &ModelSpec, lo: f64, hi: f64) -> f64 {
    let sup_dg = (0..=1000)
        .map(|i| spec.dg(lo + (hi - lo) * i as f64 / 1000.0).abs())
        .fold(0.0, f64::max);
    1.0_f64.max(2.0 * spec.lipschitz.pi.max(spec.lipschitz.dg)).max(2.0 * sup_dg)
}

/// One step of the limit problem.
pub fn limit_step(state: &State, cfg: &SolverConfig, grid: &Grid, spec: &ModelSpec) -> Result<(State, StepReport)> {
    cfg.validate_common()?;
    sigma_solver::step_at(state, cfg.tau, 0.0, cfg, grid, spec)
}

/// Integrates the limit problem from `(mu0, rho0)` with `xi0` the minimal section.
pub fn limit_run(
    init: &InitialData,
    cfg: &SolverConfig,
    grid: &Grid,
    spec: &ModelSpec,
) -> std::result::Result<RunOutput, RunAborted> {
    let data = initdata::for_limit(init, &spec.graph).map_err(|error| RunAborted {
        error,
        step: 0,
        partial: Box::new(RunTrace {
            grid: *grid,
            sigma: 0.0,
            tau: cfg.tau,
            rows: Vec::new(),
            snapshots: Vec::new(),
            extremes: Default::default(),
            steps: 0,
            halvings: 0,
        }),
    })?;
    sigma_solver::run_from(&data, cfg, 0.0, grid, spec)
}
