//! Initial data and its sigma-indexed approximating family.
//!
//! `mu0` is truncated at `1 / sigma`; `rho0` is smoothed by the elliptic
//! resolvent `rho - sigma Lap rho + sigma xi = rho0`, `xi in beta(rho)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convexgraph::ConvexGraph;
use crate::error::{Error, Result};
use crate::grid::{self, Field, Grid};
use crate::monotone::{solve_inclusion, InclusionSolverOptions};

/// Default residual tolerance of [`smooth_rho0`].
pub const SMOOTHING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub mu0: Field,
    pub rho0: Field,
    /// `integrate(f1(rho0))`.
    pub f1_mass: f64,
}

impl InitialData {
    /// Checks `mu0 >= 0` and `f1(rho0) < inf` cellwise.
    pub fn new(grid: &Grid, graph: &ConvexGraph, mu0: Field, rho0: Field) -> Result<Self> {
        grid.check(&mu0)?;
        grid.check(&rho0)?;
        if let Some((i, &m)) = mu0.iter().enumerate().find(|(_, m)| !(**m >= 0.0 && m.is_finite())) {
            return Err(Error::Input(format!("mu0 must be finite and nonnegative, cell {i} has {m}")));
        }
        let f1 = rho0.map(|r| graph.f1_value(r));
        if let Some((i, _)) = f1.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain { value: rho0[i], domain: graph.f1_domain().to_string() });
        }
        let f1_mass = grid::integrate(grid, &f1);
        Ok(Self { mu0, rho0, f1_mass })
    }
}

/// Data of the problem at a fixed `sigma`, or of the limit problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedData {
    pub mu0: Field,
    pub rho0: Field,
    pub xi0: Field,
}

/// `min(mu0, 1 / sigma)` cellwise.
pub fn truncate_mu0(mu0: &Field, sigma: f64) -> Result<Field> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::Input(format!("sigma must lie in (0, 1], got {sigma}")));
    }
    if let Some((i, &m)) = mu0.iter().enumerate().find(|(_, m)| !(**m >= 0.0)) {
        return Err(Error::Input(format!("mu0 must be nonnegative, cell {i} has {m}")));
    }
    let cap = 1.0 / sigma;
    Ok(mu0.map(|m| m.min(cap)))
}

/// Solves `rho - sigma Lap rho + sigma xi = rho0`, `xi in beta(rho)`.
pub fn smooth_rho0(rho0: &Field, sigma: f64, grid: &Grid, graph: &ConvexGraph, tol: f64) -> Result<(Field, Field)> {
    if !(sigma > 0.0) {
        return Err(Error::Input(format!("sigma must be positive, got {sigma}")));
    }
    if let Some((i, _)) = rho0.iter().enumerate().find(|(_, r)| !graph.f1_value(**r).is_finite()) {
        return Err(Error::Domain { value: rho0[i], domain: graph.f1_domain().to_string() });
    }
    let opts = InclusionSolverOptions { tol, ..Default::default() };
    let sol = solve_inclusion(grid, sigma, sigma, rho0, graph, None, &opts)?;
    Ok((sol.rho, sol.xi))
}

/// `||rho0_sigma - rho0||_L2` for each sigma of a strictly decreasing list.
pub fn convergence_of_data(
    rho0: &Field,
    sigmas: &[f64],
    grid: &Grid,
    graph: &ConvexGraph,
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    if sigmas.is_empty() {
        return Err(Error::Input("empty sigma list".into()));
    }
    if sigmas.iter().any(|s| !(*s > 0.0)) || sigmas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Input(format!("sigma list must be positive and strictly decreasing, got {sigmas:?}")));
    }
    sigmas
        .iter()
        .map(|&s| {
            let (rs, _) = smooth_rho0(rho0, s, grid, graph, tol)?;
            let diff = rs.zip_map(rho0, |a, b| a - b);
            Ok((s, grid::inner(grid, &diff, &diff).sqrt()))
        })
        .collect()
}

/// Family member at `sigma`: truncated `mu0`, smoothed `(rho0, xi0)`.
pub fn for_sigma(init: &InitialData, sigma: f64, grid: &Grid, graph: &ConvexGraph, tol: f64) -> Result<ProcessedData> {
    let mu0 = truncate_mu0(&init.mu0, sigma)?;
    let (rho0, xi0) = smooth_rho0(&init.rho0, sigma, grid, graph, tol)?;
    Ok(ProcessedData { mu0, rho0, xi0 })
}

/// Limit-problem data: `xi0` is the minimal section of `beta(rho0)`.
pub fn for_limit(init: &InitialData, graph: &ConvexGraph) -> Result<ProcessedData> {
    let xi0 = init
        .rho0
        .iter()
        .map(|&r| graph.min_section(r).ok_or_else(|| Error::Domain { value: r, domain: graph.domain().to_string() }))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ProcessedData { mu0: init.mu0.clone(), rho0: init.rho0.clone(), xi0: Field::from_vec(xi0) })
}

/// Built-in initial profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    /// `left` for `x < position * L_x`, `right` otherwise.
    Step { left: f64, right: f64, #[serde(default = "half")] position: f64 },
    /// `base + amplitude cos(modes pi x / L_x)`, times `cos(modes pi y / L_y)` in 2-D.
    CosineBump { base: f64, amplitude: f64, #[serde(default = "one")] modes: u32 },
    /// Independent uniform samples in `[lo, hi]` per cell.
    Random { lo: f64, hi: f64, seed: u64 },
}

fn half() -> f64 {
    0.5
}

fn one() -> u32 {
    1
}

impl Profile {
    pub fn sample(&self, grid: &Grid) -> Field {
        let [lx, ly] = grid.extent();
        match *self {
            Profile::Constant { value } => grid.constant(value),
            Profile::Step { left, right, position } => {
                grid.sample(|x, _| if x < position * lx { left } else { right })
            }
            Profile::CosineBump { base, amplitude, modes } => {
                let k = f64::from(modes) * std::f64::consts::PI;
                let two_d = grid.dim() == 2;
                grid.sample(|x, y| {
                    let c = (k * x / lx).cos();
                    base + amplitude * if two_d { c * (k * y / ly).cos() } else { c }
                })
            }
            Profile::Random { lo, hi, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Field::from_vec((0..grid.cell_count()).map(|_| rng.gen_range(lo..=hi)).collect())
            }
        }
    }

    /// Overrides the seed of a random profile.
    pub fn with_seed(self, new_seed: u64) -> Self {
        match self {
            Profile::Random { lo, hi, .. } => Profile::Random { lo, hi, seed: new_seed },
            other => other,
        }
    }
}
