//! Stop and play operators on piecewise-linear inputs, and the freezing-index
//! form of the scalar inclusion with `beta` the normal cone of `K = [lo, hi]`.

use crate::convexgraph::Interval;
use crate::error::{Error, Result};
use crate::limit_solver::{uniform_mesh, ScalarPath};
use crate::model::ModelSpec;

/// Piecewise-linear function given by its nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PwlInput {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
}

impl PwlInput {
    /// Requires `t[0] = 0`, strictly increasing times and finite values.
    pub fn new(t: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if t.len() != w.len() {
            return Err(Error::Shape { expected: t.len(), got: w.len() });
        }
        if let Some(&t0) = t.first() {
            if t0 != 0.0 {
                return Err(Error::Input(format!("input must start at t = 0, got {t0}")));
            }
        }
        if t.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::Input("input times must be strictly increasing".into()));
        }
        if t.iter().chain(&w).any(|v| !v.is_finite()) {
            return Err(Error::Input("input nodes must be finite".into()));
        }
        Ok(Self { t, w })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Linear interpolation; constant beyond the last node.
    pub fn eval(&self, s: f64) -> f64 {
        match self.t.iter().position(|&ti| ti >= s) {
            None => *self.w.last().unwrap_or(&0.0),
            Some(0) => self.w[0],
            Some(i) => {
                let f = (s - self.t[i - 1]) / (self.t[i] - self.t[i - 1]);
                self.w[i - 1] + f * (self.w[i] - self.w[i - 1])
            }
        }
    }
}

fn check_start(rho0: f64, k: &Interval) -> Result<()> {
    if k.is_empty() || !k.is_bounded() {
        return Err(Error::Input(format!("stop needs a nonempty bounded interval, got {k}")));
    }
    if !(rho0 >= k.lo && rho0 <= k.hi) {
        return Err(Error::Domain { value: rho0, domain: k.to_string() });
    }
    Ok(())
}

/// `S_K[w]` at the input nodes: `rho_i = clamp(rho_{i-1} + w_i - w_{i-1})`.
///
/// Exact: along a linear segment the stop output is monotone, so the value at
/// the segment end is the clamp of the unconstrained increment.
pub fn stop(input: &PwlInput, rho0: f64, k: Interval) -> Result<PwlInput> {
    check_start(rho0, &k)?;
    let mut rho: Vec<f64> = Vec::with_capacity(input.len());
    for i in 0..input.len() {
        let r = if i == 0 { rho0 } else { (rho[i - 1] + input.w[i] - input.w[i - 1]).clamp(k.lo, k.hi) };
        rho.push(r);
    }
    Ok(PwlInput { t: input.t.clone(), w: rho })
}

/// `S_K[w]` with the obstacle contact times inserted as extra nodes, so that the
/// result is the exact piecewise-linear output.
pub fn stop_refined(input: &PwlInput, rho0: f64, k: Interval) -> Result<PwlInput> {
    check_start(rho0, &k)?;
    if input.is_empty() {
        return Ok(PwlInput { t: vec![], w: vec![] });
    }
    let mut t = vec![input.t[0]];
    let mut rho = vec![rho0];
    for i in 1..input.len() {
        let r = *rho.last().unwrap();
        let dw = input.w[i] - input.w[i - 1];
        let free = r + dw;
        let target = if free > k.hi { Some(k.hi) } else if free < k.lo { Some(k.lo) } else { None };
        if let Some(obstacle) = target {
            let frac = (obstacle - r) / dw;
            if frac > 0.0 && frac < 1.0 {
                t.push(input.t[i - 1] + frac * (input.t[i] - input.t[i - 1]));
                rho.push(obstacle);
            }
        }
        t.push(input.t[i]);
        rho.push(free.clamp(k.lo, k.hi));
    }
    Ok(PwlInput { t, w: rho })
}

/// `w - S_K[w]` at the input nodes.
pub fn play(input: &PwlInput, rho0: f64, k: Interval) -> Result<PwlInput> {
    let s = stop(input, rho0, k)?;
    Ok(PwlInput { t: input.t.clone(), w: input.w.iter().zip(&s.w).map(|(w, r)| w - r).collect() })
}

/// Freezing-index form of the scalar inclusion with `beta = dI_K`:
/// `w' = -pi(S_K[w]) + mu g'(S_K[w])`, `rho = S_K[w]`, `w(0) = rho0`.
///
/// The forcing is frozen on each step at the left node, with `mu` taken at the
/// right node as in [`crate::limit_solver::scalar_inclusion_solve`].
pub fn freezing_index_solve(mu_path: &[f64], rho0: f64, spec: &ModelSpec, k: Interval, tau: f64) -> Result<(ScalarPath, PwlInput)> {
    check_start(rho0, &k)?;
    if mu_path.is_empty() {
        return Err(Error::Input("empty mu path".into()));
    }
    if !(tau > 0.0) {
        return Err(Error::Input(format!("tau must be positive, got {tau}")));
    }
    let n = mu_path.len();
    let times = uniform_mesh(tau, n - 1);
    let mut w = vec![rho0];
    let mut rho = vec![rho0];
    for i in 1..n {
        let r = rho[i - 1];
        let dw = tau * (-spec.pi(r) + mu_path[i] * spec.dg(r));
        w.push(w[i - 1] + dw);
        rho.push((r + dw).clamp(k.lo, k.hi));
    }
    // xi from the stop complementarity: w' - rho' in dI_K(rho)
    let mut xi = vec![0.0];
    for i in 1..n {
        xi.push(((w[i] - w[i - 1]) - (rho[i] - rho[i - 1])) / tau);
    }
    let index = PwlInput { t: times.clone(), w };
    Ok((ScalarPath { times, rho, xi, mu: mu_path.to_vec() }, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Interval {
        Interval::closed(0.0, 1.0)
    }

    #[test]
    fn ramp_saturates() {
        let t: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let input = PwlInput::new(t.clone(), t.clone()).unwrap();
        let s = stop(&input, 0.0, unit()).unwrap();
        let p = play(&input, 0.0, unit()).unwrap();
        for i in 0..t.len() {
            assert!((s.w[i] - t[i].min(1.0)).abs() < 1e-12);
            assert!((p.w[i] - (t[i] - 1.0).max(0.0)).abs() < 1e-12);
            assert_eq!(s.w[i] + p.w[i], input.w[i]);
        }
    }

    #[test]
    fn up_and_down() {
        let input = PwlInput::new(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0]).unwrap();
        assert_eq!(stop(&input, 0.0, unit()).unwrap().w, vec![0.0, 1.0, 0.0]);
        let r = stop_refined(&input, 0.0, unit()).unwrap();
        assert_eq!(r.t, vec![0.0, 0.5, 1.0, 2.0]);
        assert_eq!(r.w, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn constant_input() {
        let input = PwlInput::new(vec![0.0, 1.0, 3.0], vec![0.7; 3]).unwrap();
        let p = play(&input, 0.4, unit()).unwrap();
        assert!(p.w.iter().all(|&v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn empty_input() {
        let input = PwlInput::new(vec![], vec![]).unwrap();
        assert!(stop(&input, 0.5, unit()).unwrap().is_empty());
        assert!(stop_refined(&input, 0.5, unit()).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PwlInput::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(PwlInput::new(vec![1.0], vec![1.0]).is_err());
        let input = PwlInput::new(vec![0.0], vec![0.0]).unwrap();
        assert!(stop(&input, 1.5, unit()).is_err());
    }
}
