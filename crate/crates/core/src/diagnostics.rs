//! Discrete norms, run traces, energy and estimate monitors, sigma-sweep
//! comparison, and fixed-format CSV emission.
//!
//! Space: cell-sum quadrature; gradients are face differences weighted by the
//! cell volume. Time: left-endpoint quadrature.

use crate::error::{Error, Result};
use crate::grid::{self, FaceCoefficients, Field, Grid};
use crate::model::ModelSpec;
use crate::sigma_solver::State;

/// `||f||_L2`.
pub fn l2(grid: &Grid, f: &Field) -> f64 {
    grid::inner(grid, f, f).sqrt()
}

/// `||f||_Linf`.
pub fn linf(f: &Field) -> f64 {
    f.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `sum_faces w_f (a_q - a_p)(b_q - b_p) |cell| / h_axis^2`.
fn grad_pairing(grid: &Grid, a: &Field, b: &Field, weight: impl Fn(usize, usize) -> f64) -> f64 {
    let vol = grid.cell_volume();
    let inv = [1.0 / grid.spacing(0).powi(2), 1.0 / grid.spacing(1).powi(2)];
    grid.faces().map(|(p, q, axis)| weight(p, q) * (a[q] - a[p]) * (b[q] - b[p]) * inv[axis]).sum::<f64>() * vol
}

/// Discrete `||grad f||_L2` from face differences.
pub fn grad_l2(grid: &Grid, f: &Field) -> f64 {
    grad_pairing(grid, f, f, |_, _| 1.0).sqrt()
}

/// `sum_f kappa_f |grad f|^2` over faces, times the cell volume.
pub fn weighted_grad_sq(grid: &Grid, f: &Field, kappa_face: &FaceCoefficients) -> f64 {
    let vol = grid.cell_volume();
    let inv = [1.0 / grid.spacing(0).powi(2), 1.0 / grid.spacing(1).powi(2)];
    grid.faces().zip(kappa_face.iter()).map(|((p, q, axis), k)| k * (f[q] - f[p]).powi(2) * inv[axis]).sum::<f64>() * vol
}

fn check_series(grid: &Grid, times: &[f64], series: &[Field]) -> Result<()> {
    if times.len() != series.len() {
        return Err(Error::Shape { expected: times.len(), got: series.len() });
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("time mesh must be strictly increasing".into()));
    }
    series.iter().try_for_each(|f| grid.check(f))
}

/// `max_t ||f(t)||_L2`.
pub fn linf_l2(grid: &Grid, times: &[f64], series: &[Field]) -> Result<f64> {
    check_series(grid, times, series)?;
    Ok(series.iter().map(|f| l2(grid, f)).fold(0.0, f64::max))
}

/// `(int_0^T ||f||_L2^2)^(1/2)` with left-endpoint quadrature.
pub fn l2_l2(grid: &Grid, times: &[f64], series: &[Field]) -> Result<f64> {
    check_series(grid, times, series)?;
    Ok((0..series.len().saturating_sub(1))
        .map(|k| (times[k + 1] - times[k]) * l2(grid, &series[k]).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `(int_0^T ||f||_H1^2)^(1/2)` with left-endpoint quadrature.
pub fn l2_h1(grid: &Grid, times: &[f64], series: &[Field]) -> Result<f64> {
    check_series(grid, times, series)?;
    Ok((0..series.len().saturating_sub(1))
        .map(|k| (times[k + 1] - times[k]) * (l2(grid, &series[k]).powi(2) + grad_l2(grid, &series[k]).powi(2)))
        .sum::<f64>()
        .sqrt())
}

/// `||d_t f||_L2(Q)` from difference quotients.
pub fn dt_l2_l2(grid: &Grid, times: &[f64], series: &[Field]) -> Result<f64> {
    check_series(grid, times, series)?;
    Ok((0..series.len().saturating_sub(1))
        .map(|k| {
            let dt = times[k + 1] - times[k];
            let d = series[k + 1].zip_map(&series[k], |a, b| (a - b) / dt);
            dt * l2(grid, &d).powi(2)
        })
        .sum::<f64>()
        .sqrt())
}

/// `max over Q of |f|`.
pub fn linf_q(series: &[Field]) -> f64 {
    series.iter().map(linf).fold(0.0, f64::max)
}

/// One row of a run trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub tau_eff: f64,
    pub mu_linf: f64,
    pub mu_l2: f64,
    pub grad_mu_l2: f64,
    pub rho_l2: f64,
    pub grad_rho_l2: f64,
    pub drho_dt_l2: f64,
    pub xi_l2: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub slack_first: f64,
    pub slack_second: f64,
    pub slack_third: f64,
    pub min_mu: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    pub min_xi: f64,
    pub max_xi: f64,
    pub u_defect: f64,
}

pub const TRACE_COLUMNS: [&str; 20] = [
    "t",
    "tau_eff",
    "mu_linf",
    "mu_l2",
    "grad_mu_l2",
    "rho_l2",
    "grad_rho_l2",
    "drho_dt_l2",
    "xi_l2",
    "energy",
    "dissipation",
    "slack_first",
    "slack_second",
    "slack_third",
    "min_mu",
    "min_rho",
    "max_rho",
    "min_xi",
    "max_xi",
    "u_defect",
];

impl TraceRow {
    pub fn values(&self) -> [f64; 20] {
        [
            self.t,
            self.tau_eff,
            self.mu_linf,
            self.mu_l2,
            self.grad_mu_l2,
            self.rho_l2,
            self.grad_rho_l2,
            self.drho_dt_l2,
            self.xi_l2,
            self.energy,
            self.dissipation,
            self.slack_first,
            self.slack_second,
            self.slack_third,
            self.min_mu,
            self.min_rho,
            self.max_rho,
            self.min_xi,
            self.max_xi,
            self.u_defect,
        ]
    }
}

/// Fields at a recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub mu: Field,
    pub rho: Field,
    pub xi: Field,
    pub u: Field,
}

impl Snapshot {
    pub fn of(state: &State) -> Self {
        Self { t: state.t, mu: state.mu.clone(), rho: state.rho.clone(), xi: state.xi.clone(), u: state.u.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub grid: Grid,
    /// Zero for the limit problem.
    pub sigma: f64,
    pub tau: f64,
    pub rows: Vec<TraceRow>,
    pub snapshots: Vec<Snapshot>,
    /// Extremes over every accepted step, not only recorded rows.
    pub extremes: Extremes,
    pub steps: usize,
    pub halvings: usize,
}

/// Running minima and maxima over all steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremes {
    pub min_mu: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    pub min_xi: f64,
    pub max_xi: f64,
    pub max_u_defect: f64,
}

impl Default for Extremes {
    fn default() -> Self {
        Self {
            min_mu: f64::INFINITY,
            min_rho: f64::INFINITY,
            max_rho: f64::NEG_INFINITY,
            min_xi: f64::INFINITY,
            max_xi: f64::NEG_INFINITY,
            max_u_defect: 0.0,
        }
    }
}

impl Extremes {
    pub fn absorb(&mut self, row: &TraceRow) {
        self.min_mu = self.min_mu.min(row.min_mu);
        self.min_rho = self.min_rho.min(row.min_rho);
        self.max_rho = self.max_rho.max(row.max_rho);
        self.min_xi = self.min_xi.min(row.min_xi);
        self.max_xi = self.max_xi.max(row.max_xi);
        self.max_u_defect = self.max_u_defect.max(row.u_defect);
    }
}

impl RunTrace {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn max_slacks(&self) -> [f64; 3] {
        let m = |f: fn(&TraceRow) -> f64| self.rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        [m(|r| r.slack_first), m(|r| r.slack_second), m(|r| r.slack_third)]
    }
}

/// Running sums of the discrete energy and estimate identities.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateAccumulator {
    sigma: f64,
    energy0: f64,
    dissipation: f64,
    second_base: f64,
    dtrho_sq: f64,
    second_forcing: f64,
    third_base: f64,
    lap_sq: f64,
    third_forcing: f64,
}

fn energy(grid: &Grid, spec: &ModelSpec, s: &State) -> f64 {
    s.mu.iter().zip(s.rho.iter()).map(|(&m, &r)| (1.0 + 2.0 * spec.g(r)) * m * m).sum::<f64>() * grid.cell_volume()
}

/// `sigma/2 ||grad rho||^2 + int f1(rho) + int f2(rho)`.
fn phase_functional(grid: &Grid, spec: &ModelSpec, sigma: f64, rho: &Field) -> f64 {
    let pot: f64 = rho.iter().map(|&r| spec.graph.f1_value(r) + spec.f2(r)).sum::<f64>() * grid.cell_volume();
    0.5 * sigma * grad_l2(grid, rho).powi(2) + pot
}

impl EstimateAccumulator {
    pub fn new(grid: &Grid, spec: &ModelSpec, sigma: f64, initial: &State) -> Self {
        Self {
            sigma,
            energy0: energy(grid, spec, initial),
            dissipation: 0.0,
            second_base: phase_functional(grid, spec, sigma, &initial.rho),
            dtrho_sq: 0.0,
            second_forcing: 0.0,
            third_base: 0.5 * grad_l2(grid, &initial.rho).powi(2),
            lap_sq: 0.0,
            third_forcing: 0.0,
        }
    }

    /// Adds the contributions of one accepted step `prev -> next` of length `tau`
    /// with face diffusivities `kappa_face`.
    pub fn update(&mut self, grid: &Grid, spec: &ModelSpec, prev: &State, next: &State, tau: f64, kappa_face: &FaceCoefficients) {
        let vol = grid.cell_volume();
        self.dissipation += 2.0 * tau * weighted_grad_sq(grid, &next.mu, kappa_face);

        let drho = next.rho.zip_map(&prev.rho, |a, b| a - b);
        self.dtrho_sq += grid::inner(grid, &drho, &drho) / tau;
        self.second_forcing +=
            (0..drho.len()).map(|k| prev.mu[k] * spec.dg(prev.rho[k]) * drho[k]).sum::<f64>() * vol;

        if self.sigma > 0.0 {
            let lap = grid::neumann_laplacian(grid, &next.rho).expect("state on grid");
            self.lap_sq += self.sigma * tau * grid::inner(grid, &lap, &lap);
        }
        let (r, m) = (&prev.rho, &prev.mu);
        let avg = |f: &dyn Fn(usize) -> f64, p: usize, q: usize| 0.5 * (f(p) + f(q));
        let dpi = |k: usize| spec.pi.derivative(r[k]);
        let dg = |k: usize| spec.dg(r[k]);
        let mixed = |k: usize| spec.d2g(r[k]) * m[k];
        let forcing = -grad_pairing(grid, r, r, |p, q| avg(&dpi, p, q))
            + grad_pairing(grid, m, r, |p, q| avg(&dg, p, q))
            + grad_pairing(grid, r, r, |p, q| avg(&mixed, p, q));
        self.third_forcing += tau * forcing;
    }

    pub fn dissipation(&self) -> f64 {
        self.dissipation
    }

    pub fn energy0(&self) -> f64 {
        self.energy0
    }

    /// `(first, second, third)` slacks `LHS - RHS` at `state`.
    pub fn slacks(&self, grid: &Grid, spec: &ModelSpec, state: &State) -> [f64; 3] {
        let first = energy(grid, spec, state) + self.dissipation - self.energy0;
        let second = self.dtrho_sq + phase_functional(grid, spec, self.sigma, &state.rho)
            - self.second_base
            - self.second_forcing;
        let third = 0.5 * grad_l2(grid, &state.rho).powi(2) + self.lap_sq - self.third_base - self.third_forcing;
        [first, second, third]
    }

    /// Full diagnostic row at `state`.
    pub fn row(&self, grid: &Grid, spec: &ModelSpec, state: &State, prev: Option<(&State, f64)>) -> TraceRow {
        let [slack_first, slack_second, slack_third] = self.slacks(grid, spec, state);
        let (drho_dt_l2, tau_eff) = match prev {
            Some((p, tau)) => (l2(grid, &state.rho.zip_map(&p.rho, |a, b| (a - b) / tau)), tau),
            None => (0.0, 0.0),
        };
        let u_defect = (0..state.u.len())
            .map(|k| (state.u[k] - (1.0 + 2.0 * spec.g(state.rho[k])) * state.mu[k]).abs())
            .fold(0.0, f64::max);
        TraceRow {
            t: state.t,
            tau_eff,
            mu_linf: linf(&state.mu),
            mu_l2: l2(grid, &state.mu),
            grad_mu_l2: grad_l2(grid, &state.mu),
            rho_l2: l2(grid, &state.rho),
            grad_rho_l2: grad_l2(grid, &state.rho),
            drho_dt_l2,
            xi_l2: l2(grid, &state.xi),
            energy: energy(grid, spec, state),
            dissipation: self.dissipation,
            slack_first,
            slack_second,
            slack_third,
            min_mu: state.mu.min(),
            min_rho: state.rho.min(),
            max_rho: state.rho.max(),
            min_xi: state.xi.min(),
            max_xi: state.xi.max(),
            u_defect,
        }
    }
}

/// Allowed slack `rel * scale + c_abs * tau * T` of each monitor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorTolerance {
    pub rel: f64,
    pub c_abs: f64,
}

impl Default for MonitorTolerance {
    fn default() -> Self {
        Self { rel: 1e-6, c_abs: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorEntry {
    pub name: &'static str,
    pub max_slack: f64,
    /// `max_t slack(t) / (tau t)` over rows with `t > 0`.
    pub measured_c: f64,
    pub allowed: f64,
    pub flagged: bool,
}

/// Slack summary of the first (energy), second and third estimates.
pub fn estimate_monitors(trace: &RunTrace, tol: &MonitorTolerance) -> Vec<MonitorEntry> {
    let t_final = trace.rows.last().map_or(0.0, |r| r.t);
    let e0 = trace.rows.first().map_or(0.0, |r| r.energy);
    let names = ["first", "second", "third"];
    let pick = |r: &TraceRow, i: usize| [r.slack_first, r.slack_second, r.slack_third][i];
    (0..3)
        .map(|i| {
            let max_slack = trace.rows.iter().map(|r| pick(r, i)).fold(0.0, f64::max);
            let measured_c = trace
                .rows
                .iter()
                .filter(|r| r.t > 0.0)
                .map(|r| pick(r, i) / (trace.tau * r.t))
                .fold(0.0, f64::max);
            let scale = if i == 0 { e0.abs() } else { 1.0 };
            let allowed = tol.rel * scale + tol.c_abs * trace.tau * t_final;
            MonitorEntry { name: names[i], max_slack, measured_c, allowed, flagged: max_slack > allowed }
        })
        .collect()
}

/// One sigma of a sweep against the limit run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sigma: f64,
    /// `max_t ||rho_sigma - rho_limit||_L2` over snapshots.
    pub d_rho: f64,
    /// `||mu_sigma - mu_limit||_L2(Q)` over snapshots.
    pub d_mu: f64,
    /// `sigma max_t ||grad rho_sigma||^2`.
    pub sigma_grad_rho_sq: f64,
    pub max_slacks: [f64; 3],
}

fn comparable(a: &RunTrace, b: &RunTrace) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Comparability("runs use different grids".into()));
    }
    if a.tau != b.tau {
        return Err(Error::Comparability(format!("time steps differ: {} vs {}", a.tau, b.tau)));
    }
    if a.snapshots.len() != b.snapshots.len()
        || a.snapshots.iter().zip(&b.snapshots).any(|(x, y)| (x.t - y.t).abs() > 1e-12 * (1.0 + x.t.abs()))
    {
        return Err(Error::Comparability("snapshot times differ".into()));
    }
    Ok(())
}

/// Distances of each sigma run from the limit run.
pub fn sweep_compare(limit: &RunTrace, runs: &[&RunTrace]) -> Result<Vec<SweepRow>> {
    runs.iter()
        .map(|run| {
            comparable(limit, run)?;
            let g = &run.grid;
            let d_rho = run
                .snapshots
                .iter()
                .zip(&limit.snapshots)
                .map(|(a, b)| l2(g, &a.rho.zip_map(&b.rho, |x, y| x - y)))
                .fold(0.0, f64::max);
            let dmu: Vec<Field> =
                run.snapshots.iter().zip(&limit.snapshots).map(|(a, b)| a.mu.zip_map(&b.mu, |x, y| x - y)).collect();
            let d_mu = l2_l2(g, &run.times(), &dmu)?;
            let sigma_grad_rho_sq =
                run.sigma * run.snapshots.iter().map(|s| grad_l2(g, &s.rho).powi(2)).fold(0.0, f64::max);
            Ok(SweepRow { sigma: run.sigma, d_rho, d_mu, sigma_grad_rho_sq, max_slacks: run.max_slacks() })
        })
        .collect()
}

/// Fixed 17-significant-digit float format used by every CSV writer.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_line(values: impl IntoIterator<Item = f64>) -> String {
    let mut s = values.into_iter().map(fmt_num).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = TRACE_COLUMNS.join(",");
    out.push('\n');
    for row in &trace.rows {
        out += &csv_line(row.values());
    }
    out
}

/// Cell centers and fields of a snapshot: `x,y,mu,rho,xi,u`.
pub fn snapshot_csv(grid: &Grid, snap: &Snapshot) -> String {
    let mut out = String::from("x,y,mu,rho,xi,u\n");
    for k in 0..grid.cell_count() {
        let [x, y] = grid.center(k);
        out += &csv_line([x, y, snap.mu[k], snap.rho[k], snap.xi[k], snap.u[k]]);
    }
    out
}

pub const SWEEP_COLUMNS: [&str; 7] =
    ["sigma", "d_rho", "d_mu", "sigma_grad_rho_sq", "slack_first", "slack_second", "slack_third"];

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = SWEEP_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        out += &csv_line([r.sigma, r.d_rho, r.d_mu, r.sigma_grad_rho_sq, r.max_slacks[0], r.max_slacks[1], r.max_slacks[2]]);
    }
    out
}

/// Generic table with a header.
pub fn table_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out += &csv_line(r);
    }
    out
}
