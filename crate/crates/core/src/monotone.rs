//! Implicit solve of the coupled monotone inclusion
//!
//! ```text
//! rho - a Lap_h rho + gamma xi = b,    xi in beta(rho)   (cellwise)
//! ```
//!
//! used both for the elliptic smoothing of the initial datum (`a = gamma = sigma`)
//! and for the phase substep of the time stepper (`a = tau sigma`, `gamma = tau`).
//!
//! The unknown is `z = rho + gamma xi`. Any `z` gives an admissible pair
//! `rho = R_gamma(z)`, `xi = (z - rho) / gamma`, and the equation becomes
//! `F(z) = z - a Lap_h R_gamma(z) - b = 0`. We run a semismooth Newton iteration on
//! `F` with step halving on residual increase. The Newton system
//! `(I - a Lap_h D) dz = -F` with `D = diag(R'_gamma(z))` is reduced to a symmetric
//! M-matrix system `(D^-1 - a Lap_h) w = -F` on the cells where `D > 0`.

use crate::convexgraph::ConvexGraph;
use crate::error::{Error, Result};
use crate::grid::{self, Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InclusionSolverOptions {
    /// Stop when the cellwise residual `max |rho - a Lap rho + gamma xi - b|` is below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative tolerance of the inner CG solves.
    pub lin_tol: f64,
}

impl Default for InclusionSolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500, lin_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionSolution {
    pub rho: Field,
    pub xi: Field,
    /// Final cellwise residual in the rho scale.
    pub residual: f64,
    pub iterations: usize,
    pub residual_trace: Vec<f64>,
}

fn residual(grid: &Grid, a: f64, z: &[f64], rho: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let lap = grid::neumann_laplacian(grid, &Field::from_vec(rho.to_vec()))?;
    Ok((0..z.len()).map(|k| z[k] - a * lap[k] - b[k]).collect())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn resolve(graph: &ConvexGraph, z: &[f64], gamma: f64) -> Result<Vec<f64>> {
    z.iter().map(|&zk| graph.resolvent(zk, gamma)).collect()
}

/// Solves `rho - a Lap_h rho + gamma xi = b`, `xi in beta(rho)`.
///
/// With `a == 0` the problem decouples and the answer is the cellwise resolvent
/// `rho = R_gamma(b)`, computed directly. `z0` is an optional warm start for
/// `rho + gamma xi`.
pub fn solve_inclusion(
    grid: &Grid,
    a: f64,
    gamma: f64,
    b: &Field,
    graph: &ConvexGraph,
    z0: Option<&Field>,
    opts: &InclusionSolverOptions,
) -> Result<InclusionSolution> {
    grid.check(b)?;
    if !(a >= 0.0) || !(gamma > 0.0) {
        return Err(Error::Input(format!("need a >= 0 and gamma > 0, got a = {a}, gamma = {gamma}")));
    }
    if a == 0.0 {
        let rho = resolve(graph, b.values(), gamma)?;
        let xi: Vec<f64> = b.iter().zip(&rho).map(|(bk, rk)| (bk - rk) / gamma).collect();
        return Ok(InclusionSolution {
            rho: Field::from_vec(rho),
            xi: Field::from_vec(xi),
            residual: 0.0,
            iterations: 0,
            residual_trace: vec![0.0],
        });
    }

    let n = b.len();
    let bv = b.values();
    let mut z: Vec<f64> = z0.map_or_else(|| bv.to_vec(), |z| z.values().to_vec());
    let mut rho = resolve(graph, &z, gamma)?;
    let mut f = residual(grid, a, &z, &rho, bv)?;
    let mut trace = vec![max_abs(&f)];
    let ones = grid.unit_faces();
    let wx = a / grid.spacing(0).powi(2);
    let wy = if grid.dim() == 2 { a / grid.spacing(1).powi(2) } else { 0.0 };

    let mut nonmonotone = 0;
    for it in 0..opts.max_iter {
        let res = *trace.last().unwrap();
        if res <= opts.tol {
            return Ok(finish(z, rho, gamma, res, it, trace));
        }
        // inverse slopes of the resolvent; infinite marks an active cell
        let mut inv_d = vec![f64::INFINITY; n];
        for k in 0..n {
            let d = graph.resolvent_derivative(z[k], gamma)?;
            let inv = 1.0 / d;
            if d > 0.0 && inv.is_finite() {
                inv_d[k] = inv;
            }
        }
        let active: Vec<bool> = inv_d.iter().map(|v| !v.is_finite()).collect();
        let mut pre = vec![1.0; n];
        for k in 0..n {
            if !active[k] {
                pre[k] = inv_d[k];
            }
        }
        for (p, q, axis) in grid.faces() {
            let w = if axis == 0 { wx } else { wy };
            if !active[p] {
                pre[p] += w;
            }
            if !active[q] {
                pre[q] += w;
            }
        }
        let rhs: Vec<f64> = (0..n).map(|k| if active[k] { 0.0 } else { -f[k] }).collect();
        let apply = |v: &[f64], out: &mut [f64]| {
            let masked: Vec<f64> = (0..n).map(|k| if active[k] { 0.0 } else { v[k] }).collect();
            let mut div = vec![0.0; n];
            grid_div(grid, &masked, &ones, &mut div);
            for k in 0..n {
                out[k] = if active[k] { v[k] } else { inv_d[k] * v[k] - a * div[k] };
            }
        };
        let (w, _) = grid::pcg(apply, &pre, &rhs, None, opts.lin_tol, grid::default_cg_iterations(grid))?;
        let lap_w = grid::neumann_laplacian(grid, &Field::from_vec(w))?;
        let dz: Vec<f64> = (0..n).map(|k| -f[k] + a * lap_w[k]).collect();

        // damped update: halve while the residual does not decrease
        let base = norm2(&f);
        let trial = |step: f64| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
            let z_try: Vec<f64> = (0..n).map(|k| z[k] + step * dz[k]).collect();
            let rho_try = resolve(graph, &z_try, gamma)?;
            let f_try = residual(grid, a, &z_try, &rho_try, bv)?;
            Ok((z_try, rho_try, f_try))
        };
        let full = trial(1.0)?;
        let mut accepted = None;
        if norm2(&full.2) < base {
            accepted = Some(full.clone());
        } else {
            let mut step = 0.5;
            for _ in 0..40 {
                let t = trial(step)?;
                if norm2(&t.2) < base || max_abs(&t.2) <= opts.tol {
                    accepted = Some(t);
                    break;
                }
                step *= 0.5;
            }
        }
        match accepted {
            Some((zn, rn, fn_)) => {
                z = zn;
                rho = rn;
                f = fn_;
                trace.push(max_abs(&f));
            }
            None => {
                let res = max_abs(&f);
                // stagnation at rounding level is convergence
                if res <= opts.tol * 10.0 {
                    return Ok(finish(z, rho, gamma, res, it, trace));
                }
                // active-set change without residual decrease: take the full step
                nonmonotone += 1;
                if nonmonotone > opts.max_iter / 4 {
                    return Err(stall(it, &trace));
                }
                let (zn, rn, fn_) = full;
                z = zn;
                rho = rn;
                f = fn_;
                trace.push(max_abs(&f));
            }
        }
    }
    let res = *trace.last().unwrap();
    if res <= opts.tol {
        return Ok(finish(z, rho, gamma, res, opts.max_iter, trace));
    }
    Err(stall(opts.max_iter, &trace))
}

fn grid_div(grid: &Grid, v: &[f64], faces: &grid::FaceCoefficients, out: &mut [f64]) {
    let d = grid::div_kappa_grad(grid, &Field::from_vec(v.to_vec()), faces).expect("unit faces on matching grid");
    out.copy_from_slice(d.values());
}

fn finish(z: Vec<f64>, rho: Vec<f64>, gamma: f64, residual: f64, iterations: usize, trace: Vec<f64>) -> InclusionSolution {
    let xi = z.iter().zip(&rho).map(|(zk, rk)| (zk - rk) / gamma).collect();
    InclusionSolution {
        rho: Field::from_vec(rho),
        xi: Field::from_vec(xi),
        residual,
        iterations,
        residual_trace: trace,
    }
}

fn stall(iterations: usize, trace: &[f64]) -> Error {
    let tail: Vec<String> = trace.iter().rev().take(6).rev().map(|r| format!("{r:.3e}")).collect();
    Error::Solver {
        solver: "monotone inclusion (semismooth Newton)",
        iterations,
        detail: format!("residual trace (last 6): [{}]", tail.join(", ")),
    }
}
