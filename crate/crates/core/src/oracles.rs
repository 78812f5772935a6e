//! Brute-force reference computations for tests. Nothing here shares stepping
//! code with the solvers; everything favors simplicity over speed.

use crate::convexgraph::{ConvexGraph, Interval};
use crate::error::{Error, Result};
use crate::grid::{FaceCoefficients, Grid};
use crate::hysteresis::PwlInput;
use crate::model::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub substep_factor: usize,
    pub dense_cap: usize,
    pub bisection_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { substep_factor: 1000, dense_cap: 64, bisection_tol: 1e-14 }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.substep_factor < 10 {
            return Err(Error::Input(format!("substep factor must be at least 10, got {}", self.substep_factor)));
        }
        Ok(())
    }
}

/// `1 + exp(-pi^2 t) cos(pi x) / 2`, the decaying Neumann mode on `(0, 1)`.
pub fn heat_mode(x: f64, t: f64) -> f64 {
    let pi = std::f64::consts::PI;
    1.0 + 0.5 * (-pi * pi * t).exp() * (pi * x).cos()
}

/// Root of a sign-changing `f` on `[lo, hi]`.
pub fn bisection(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Input(format!("no sign change on [{lo}, {hi}]")));
    }
    while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Resolvent `(I + lambda beta)^-1 r` by bisection on the single-valued part.
pub fn resolvent_by_bisection(graph: &ConvexGraph, r: f64, lambda: f64, tol: f64) -> Result<f64> {
    match *graph {
        ConvexGraph::Zero => Ok(r),
        ConvexGraph::Indicator { lo, hi } => Ok(r.max(lo).min(hi)),
        ConvexGraph::LogPotential { c, lo, hi } => {
            // bisection in y = log((x - lo) / (hi - x)), where x = r - lambda c y
            let x_of = |y: f64| lo + (hi - lo) / (1.0 + (-y).exp());
            let f = |y: f64| x_of(y) + lambda * c * y - r;
            let y = bisection(f, (r - hi) / (lambda * c), (r - lo) / (lambda * c), tol)?;
            Ok(x_of(y))
        }
        ConvexGraph::Power { p } => {
            let f = |x: f64| x + lambda * x.abs().powf(p - 2.0) * x - r;
            bisection(f, r.min(0.0), r.max(0.0), tol)
        }
    }
}

/// LU factorization with partial pivoting of a dense square matrix.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn factor(matrix: &[Vec<f64>]) -> Result<Self> {
        let n = matrix.len();
        if matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Input("matrix must be square".into()));
        }
        let mut lu = matrix.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n).max_by(|&a, &b| lu[a][k].abs().total_cmp(&lu[b][k].abs())).unwrap();
            if lu[p][k] == 0.0 {
                return Err(Error::Solver { solver: "dense LU", iterations: k, detail: "singular matrix".into() });
            }
            lu.swap(k, p);
            perm.swap(k, p);
            for i in k + 1..n {
                let l = lu[i][k] / lu[k][k];
                lu[i][k] = l;
                for j in k + 1..n {
                    lu[i][j] -= l * lu[k][j];
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.lu.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[i][j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[i][j] * y[j];
            }
            y[i] /= self.lu[i][i];
        }
        y
    }
}

/// Solves `matrix x = rhs` by Gaussian elimination with partial pivoting.
pub fn dense_solve(matrix: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != matrix.len() {
        return Err(Error::Shape { expected: matrix.len(), got: rhs.len() });
    }
    Ok(DenseLu::factor(matrix)?.solve(rhs))
}

/// Dense `diag I - tau div(kappa grad)` assembled entry by entry.
pub fn dense_operator(grid: &Grid, diag: &[f64], kappa_face: &FaceCoefficients, tau: f64, cap: usize) -> Result<Vec<Vec<f64>>> {
    let n = grid.cell_count();
    if n > cap {
        return Err(Error::Input(format!("{n} cells exceed the dense cap {cap}")));
    }
    let mut m = vec![vec![0.0; n]; n];
    for (i, d) in diag.iter().enumerate() {
        m[i][i] = *d;
    }
    for ((a, b, axis), k) in grid.faces().zip(kappa_face.iter()) {
        let w = tau * k / grid.spacing(axis).powi(2);
        m[a][a] += w;
        m[b][b] += w;
        m[a][b] -= w;
        m[b][a] -= w;
    }
    Ok(m)
}

/// Reference for `rho - a Lap rho + gamma xi = b`, `xi in beta(rho)`, by ADMM on
/// the split `rho = q`: an exact dense solve alternates with the resolvent.
/// Returns `(rho, xi, iterations)`.
#[allow(clippy::too_many_arguments)]
pub fn inclusion_by_splitting(
    grid: &Grid,
    a: f64,
    gamma: f64,
    b: &[f64],
    graph: &ConvexGraph,
    tol: f64,
    max_iter: usize,
    cap: usize,
) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let n = grid.cell_count();
    let penalty = 1.0;
    let ones = grid.unit_faces();
    let lap = dense_operator(grid, &vec![0.0; n], &ones, a, cap)?;
    let shifted: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| lap[i][j] + if i == j { 1.0 + penalty } else { 0.0 }).collect()).collect();
    let lu = DenseLu::factor(&shifted)?;
    let mut q = b.to_vec();
    let mut dual = vec![0.0; n];
    for it in 1..=max_iter {
        let rhs: Vec<f64> = (0..n).map(|i| b[i] + penalty * (q[i] - dual[i])).collect();
        let rho = lu.solve(&rhs);
        let q_prev = q.clone();
        for i in 0..n {
            q[i] = graph.resolvent(rho[i] + dual[i], gamma / penalty)?;
        }
        let mut change = 0.0_f64;
        for i in 0..n {
            dual[i] += rho[i] - q[i];
            change = change.max((rho[i] - q[i]).abs()).max((q[i] - q_prev[i]).abs());
        }
        if change <= tol {
            // xi from the equation at rho = q
            let xi: Vec<f64> = (0..n)
                .map(|i| {
                    let lq: f64 = (0..n).map(|j| lap[i][j] * q[j]).sum();
                    (b[i] - q[i] - lq) / gamma
                })
                .collect();
            return Ok((q, xi, it));
        }
    }
    Err(Error::Solver { solver: "ADMM oracle", iterations: max_iter, detail: "no convergence".into() })
}

/// Path of the spatially homogeneous system
/// `rho' = P(mu g'(rho) - pi(rho) - beta0(rho))`, `(1 + 2 g(rho)) mu' = -mu g'(rho) rho'`
/// by Heun steps of size `tau_fine` with projection onto `D(beta)`, recorded every
/// `record_every` substeps. Returns `(times, mu, rho)`.
pub fn ode_oracle(
    spec: &ModelSpec,
    mu0: f64,
    rho0: f64,
    t_final: f64,
    tau_fine: f64,
    record_every: usize,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let (lo, hi) = match spec.graph {
        ConvexGraph::Indicator { lo, hi } => (lo, hi),
        _ => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let smooth = |r: f64| match spec.graph {
        ConvexGraph::Indicator { .. } | ConvexGraph::Zero => 0.0,
        ConvexGraph::LogPotential { c, lo, hi } => c * ((r - lo) / (hi - r)).ln(),
        ConvexGraph::Power { p } => r.abs().powf(p - 2.0) * r,
    };
    let rate = |m: f64, r: f64| {
        let v = m * spec.dg(r) - spec.pi(r) - smooth(r);
        if (r <= lo && v < 0.0) || (r >= hi && v > 0.0) {
            0.0
        } else {
            v
        }
    };
    let mu_rate = |m: f64, r: f64, dr: f64| -m * spec.dg(r) * dr / (1.0 + 2.0 * spec.g(r));
    let steps = (t_final / tau_fine).round() as usize;
    let (mut m, mut r) = (mu0, rho0);
    let mut times = vec![0.0];
    let mut mus = vec![m];
    let mut rhos = vec![r];
    for k in 1..=steps {
        let k1r = rate(m, r);
        let k1m = mu_rate(m, r, k1r);
        let rp = (r + tau_fine * k1r).clamp(lo, hi);
        let mp = m + tau_fine * k1m;
        let k2r = rate(mp, rp);
        let k2m = mu_rate(mp, rp, k2r);
        r = (r + 0.5 * tau_fine * (k1r + k2r)).clamp(lo, hi);
        m += 0.5 * tau_fine * (k1m + k2m);
        if k % record_every == 0 {
            times.push(k as f64 * tau_fine);
            mus.push(m);
            rhos.push(r);
        }
    }
    Ok((times, mus, rhos))
}

/// Stop operator by `factor` projected substeps per input segment. Returns the
/// values at the input nodes.
pub fn fine_step_stop(input: &PwlInput, rho0: f64, k: Interval, factor: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(input.len());
    let mut r = rho0;
    for i in 0..input.len() {
        if i > 0 {
            let dw = (input.w[i] - input.w[i - 1]) / factor as f64;
            for _ in 0..factor {
                r = (r + dw).max(k.lo).min(k.hi);
            }
        }
        out.push(r);
    }
    out
}

/// Scalar inclusion by projected explicit Euler substeps; `mu_path[n]` acts on
/// the coarse step ending at node `n`. Values at the coarse nodes.
pub fn fine_step_inclusion(
    mu_path: &[f64],
    rho0: f64,
    dg: impl Fn(f64) -> f64,
    pi: impl Fn(f64) -> f64,
    k: Interval,
    tau: f64,
    factor: usize,
) -> Vec<f64> {
    let dt = tau / factor as f64;
    let mut r = rho0;
    let mut out = vec![r];
    for &m in mu_path.iter().skip(1) {
        for _ in 0..factor {
            r = (r + dt * (m * dg(r) - pi(r))).max(k.lo).min(k.hi);
        }
        out.push(r);
    }
    out
}
