//! Convex potentials `f1` and their subdifferentials as maximal monotone graphs.
//!
//! A graph is only ever touched through single-valued maps: the resolvent
//! `(I + lambda * beta)^-1`, the Yosida approximation and a membership test.
//! Multivalued sections are never materialized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residual tolerance of the scalar resolvent root solve.
pub const RESOLVENT_TOL: f64 = 1e-12;
/// Iteration cap of the scalar resolvent root solve.
pub const RESOLVENT_MAX_ITER: usize = 200;
/// Default tolerance of [`ConvexGraph::contains`] for smooth graphs.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexGraph {
    /// `f1 = I_[lo, hi]`, `beta` the normal cone of the interval.
    Indicator { lo: f64, hi: f64 },
    /// `f1(r) = c (r - lo) log(r - lo) + c (hi - r) log(hi - r)`, shifted so that `min f1 = 0`.
    LogPotential { c: f64, lo: f64, hi: f64 },
    /// `f1(r) = |r|^p / p` with `p >= 2`.
    Power { p: f64 },
    /// `f1 = 0`, `beta = 0`.
    Zero,
}

/// An interval of the real line with possibly open or infinite ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn real_line() -> Self {
        Self::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, r: f64) -> bool {
        let above = if self.lo_closed { r >= self.lo } else { r > self.lo };
        let below = if self.hi_closed { r <= self.hi } else { r < self.hi };
        above && below
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn sigmoid(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

impl ConvexGraph {
    pub fn indicator_unit() -> Self {
        ConvexGraph::Indicator { lo: 0.0, hi: 1.0 }
    }

    /// Rejects degenerate parameters.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ConvexGraph::Indicator { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                    return Err(Error::Structural(format!("indicator interval [{lo}, {hi}] is empty or unbounded")));
                }
            }
            ConvexGraph::LogPotential { c, lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
                    return Err(Error::Structural(format!("log potential needs lo < hi, got ({lo}, {hi})")));
                }
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::Structural(format!("log potential needs c > 0, got {c}")));
                }
            }
            ConvexGraph::Power { p } => {
                if !(p >= 2.0 && p.is_finite()) {
                    return Err(Error::Structural(format!("power potential needs p >= 2, got {p}")));
                }
            }
            ConvexGraph::Zero => {}
        }
        Ok(())
    }

    /// Effective domain of `f1`.
    pub fn f1_domain(&self) -> Interval {
        match *self {
            ConvexGraph::Indicator { lo, hi } | ConvexGraph::LogPotential { lo, hi, .. } => Interval::closed(lo, hi),
            ConvexGraph::Power { .. } | ConvexGraph::Zero => Interval::real_line(),
        }
    }

    /// Effective domain of `beta`.
    pub fn domain(&self) -> Interval {
        match *self {
            ConvexGraph::Indicator { lo, hi } => Interval::closed(lo, hi),
            ConvexGraph::LogPotential { lo, hi, .. } => Interval::open(lo, hi),
            ConvexGraph::Power { .. } | ConvexGraph::Zero => Interval::real_line(),
        }
    }

    /// `f1(r)`, `+inf` outside the domain.
    pub fn f1_value(&self, r: f64) -> f64 {
        match *self {
            ConvexGraph::Indicator { lo, hi } => {
                if (lo..=hi).contains(&r) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ConvexGraph::LogPotential { c, lo, hi } => {
                if !(lo..=hi).contains(&r) {
                    return f64::INFINITY;
                }
                let half = 0.5 * (hi - lo);
                let min = 2.0 * c * xlogx(half);
                (c * (xlogx(r - lo) + xlogx(hi - r)) - min).max(0.0)
            }
            ConvexGraph::Power { p } => r.abs().powf(p) / p,
            ConvexGraph::Zero => 0.0,
        }
    }

    /// Element of minimal norm of `beta(r)`; `None` outside `D(beta)`.
    pub fn min_section(&self, r: f64) -> Option<f64> {
        if !self.domain().contains(r) {
            return None;
        }
        Some(match *self {
            ConvexGraph::Indicator { .. } | ConvexGraph::Zero => 0.0,
            ConvexGraph::LogPotential { c, lo, hi } => c * ((r - lo) / (hi - r)).ln(),
            ConvexGraph::Power { p } => r.abs().powf(p - 2.0) * r,
        })
    }

    /// The resolvent `rho = (I + lambda beta)^-1 r`.
    pub fn resolvent(&self, r: f64, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Input(format!("resolvent step must be positive, got {lambda}")));
        }
        if !r.is_finite() {
            return Err(Error::Evaluation { what: "resolvent argument", point: format!("r = {r}") });
        }
        match *self {
            ConvexGraph::Indicator { lo, hi } => Ok(r.clamp(lo, hi)),
            ConvexGraph::Zero => Ok(r),
            ConvexGraph::LogPotential { c, lo, hi } => log_resolvent(c, lo, hi, r, lambda),
            ConvexGraph::Power { p } => power_resolvent(p, r, lambda),
        }
    }

    /// Derivative of the resolvent with respect to its argument, in `[0, 1]`.
    ///
    /// For the indicator the kink points are assigned the inactive (zero) slope.
    pub fn resolvent_derivative(&self, r: f64, lambda: f64) -> Result<f64> {
        match *self {
            ConvexGraph::Indicator { lo, hi } => Ok(if r > lo && r < hi { 1.0 } else { 0.0 }),
            ConvexGraph::Zero => Ok(1.0),
            ConvexGraph::LogPotential { c, lo, hi } => {
                let rho = self.resolvent(r, lambda)?;
                let denom = (rho - lo) * (hi - rho);
                if denom <= 0.0 {
                    return Ok(0.0);
                }
                Ok(1.0 / (1.0 + lambda * c * (hi - lo) / denom))
            }
            ConvexGraph::Power { p } => {
                let rho = self.resolvent(r, lambda)?;
                Ok(1.0 / (1.0 + lambda * (p - 1.0) * rho.abs().powf(p - 2.0)))
            }
        }
    }

    /// Yosida approximation `beta_lambda(r) = (r - R_lambda(r)) / lambda`.
    pub fn yosida(&self, r: f64, lambda: f64) -> Result<f64> {
        Ok((r - self.resolvent(r, lambda)?) / lambda)
    }

    /// `xi in beta(r)`, exact for the indicator, within [`MEMBERSHIP_TOL`] otherwise.
    pub fn contains(&self, r: f64, xi: f64) -> bool {
        self.contains_tol(r, xi, MEMBERSHIP_TOL)
    }

    pub fn contains_tol(&self, r: f64, xi: f64, tol: f64) -> bool {
        if !r.is_finite() || !xi.is_finite() {
            return false;
        }
        match *self {
            ConvexGraph::Indicator { lo, hi } => {
                if r < lo || r > hi {
                    false
                } else if lo == hi {
                    true
                } else if r == lo {
                    xi <= 0.0
                } else if r == hi {
                    xi >= 0.0
                } else {
                    xi == 0.0
                }
            }
            ConvexGraph::Zero => xi.abs() <= tol,
            ConvexGraph::LogPotential { c, lo, hi } => {
                if r < lo || r > hi {
                    return false;
                }
                // compare in the rho scale through the inverse graph, which is
                // well conditioned up to the endpoints
                let preimage = lo + (hi - lo) * sigmoid(xi / c);
                (preimage - r).abs() <= tol * (1.0 + r.abs())
            }
            ConvexGraph::Power { p } => {
                let forward = r.abs().powf(p - 2.0) * r;
                let preimage = xi.signum() * xi.abs().powf(1.0 / (p - 1.0));
                (forward - xi).abs() <= tol * (1.0 + xi.abs()) || (preimage - r).abs() <= tol * (1.0 + r.abs())
            }
        }
    }
}

/// Safeguarded Newton on an increasing scalar map with a sign-changing bracket.
fn bracketed_newton(
    mut lo: f64,
    mut hi: f64,
    scale: f64,
    f: impl Fn(f64) -> (f64, f64),
) -> Result<f64> {
    let tol = RESOLVENT_TOL * scale.max(1.0);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..RESOLVENT_MAX_ITER {
        let (fx, dfx) = f(x);
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= f64::EPSILON * x.abs().max(1.0) {
            return Ok(x);
        }
        let newton = x - fx / dfx;
        x = if dfx > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::Solver {
        solver: "scalar resolvent",
        iterations: RESOLVENT_MAX_ITER,
        detail: format!("bracket [{lo}, {hi}]"),
    })
}

fn log_resolvent(c: f64, lo: f64, hi: f64, r: f64, lambda: f64) -> Result<f64> {
    // unknown y = logit((rho - lo) / w), so that rho = lo + w sigmoid(y) and the
    // equation rho + lambda c y = r is strictly increasing in y on all of R
    let w = hi - lo;
    let lc = lambda * c;
    let y = bracketed_newton((r - hi) / lc, (r - lo) / lc, r.abs().max(w), |y| {
        let s = sigmoid(y);
        (lo + w * s + lc * y - r, w * s * (1.0 - s) + lc)
    })?;
    Ok(lo + w * sigmoid(y))
}

fn power_resolvent(p: f64, r: f64, lambda: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    let (lo, hi) = if r > 0.0 { (0.0, r) } else { (r, 0.0) };
    bracketed_newton(lo, hi, r.abs(), |x| {
        let ax = x.abs();
        (x + lambda * ax.powf(p - 2.0) * x - r, 1.0 + lambda * (p - 1.0) * ax.powf(p - 2.0))
    })
}
