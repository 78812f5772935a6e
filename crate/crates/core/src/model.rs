//! The nonlinearity bundle `(g, pi = f2', beta, kappa)` and sampled checks of
//! its structural assumptions.
//!
//! Every built-in profile carries closed-form derivatives. Table profiles are
//! interpolated linearly and differentiated by centered differences with the
//! table spacing as step.

use serde::{Deserialize, Serialize};

use crate::convexgraph::{ConvexGraph, Interval};
use crate::error::{Error, Result};

/// Concave, nonnegative coupling profile `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GProfile {
    Zero,
    /// `g(r) = r (1 - r)`.
    Logistic,
    /// `g(r) = a r^2 + b r + c`.
    Quadratic { a: f64, b: f64, c: f64 },
    /// `min(intercept + slope r, cap)`, with the corner rounded by a parabola
    /// of half-width `width` in the affine variable.
    AffineCapped { slope: f64, intercept: f64, cap: f64, width: f64 },
    /// Values on a uniform table over `[lo, hi]`.
    Table { lo: f64, hi: f64, values: Vec<f64> },
}

/// Derivative `pi = f2'` of the smooth part of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PiProfile {
    Zero,
    /// `pi(r) = slope r + intercept`.
    Linear { slope: f64, intercept: f64 },
    /// `pi(r) = scale (r - center) ((r - center)^2 - radius^2)`, derivative of a
    /// quartic double well with minima at `center +- radius`.
    DoubleWell { scale: f64, center: f64, radius: f64 },
}

/// Diffusivity `kappa(m, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KappaProfile {
    Constant { k0: f64 },
    /// `k0 + k1 / (1 + m^2) + k2 tanh(r)`.
    Rational { k0: f64, k1: f64, k2: f64 },
}

/// Box constants `(rho_lo, rho_hi, xi_lo, xi_hi)` for the maximum principle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub xi_lo: f64,
    pub xi_hi: f64,
}

/// Declared Lipschitz constants of `pi`, `g` and `g'`. Infinite means undeclared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBounds {
    #[serde(default = "infinite")]
    pub pi: f64,
    #[serde(default = "infinite")]
    pub g: f64,
    #[serde(default = "infinite")]
    pub dg: f64,
}

fn infinite() -> f64 {
    f64::INFINITY
}

impl Default for LipschitzBounds {
    fn default() -> Self {
        Self { pi: f64::INFINITY, g: f64::INFINITY, dg: f64::INFINITY }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub g: GProfile,
    pub pi: PiProfile,
    pub graph: ConvexGraph,
    pub kappa: KappaProfile,
    /// `(kappa_min, kappa_max)`.
    pub kappa_bounds: (f64, f64),
    #[serde(default)]
    pub box_bounds: Option<BoxBounds>,
    #[serde(default)]
    pub lipschitz: LipschitzBounds,
}

impl GProfile {
    /// `(g, g', g'')` without any extension.
    fn raw(&self, r: f64) -> (f64, f64, f64) {
        match self {
            GProfile::Zero => (0.0, 0.0, 0.0),
            GProfile::Logistic => (r * (1.0 - r), 1.0 - 2.0 * r, -2.0),
            GProfile::Quadratic { a, b, c } => (a * r * r + b * r + c, 2.0 * a * r + b, 2.0 * a),
            GProfile::AffineCapped { slope, intercept, cap, width } => {
                let s = intercept + slope * r;
                if s <= cap - width {
                    (s, *slope, 0.0)
                } else if s >= cap + width {
                    (*cap, 0.0, 0.0)
                } else {
                    let d = cap + width - s;
                    (cap - d * d / (4.0 * width), slope * d / (2.0 * width), -slope * slope / (2.0 * width))
                }
            }
            GProfile::Table { lo, hi, values } => {
                let eval = |x: f64| table_interp(*lo, *hi, values, x);
                let h = (hi - lo) / (values.len() - 1) as f64;
                let (gm, g0, gp) = (eval(r - h), eval(r), eval(r + h));
                (g0, (gp - gm) / (2.0 * h), (gp - 2.0 * g0 + gm) / (h * h))
            }
        }
    }
}

/// Linear interpolation on a uniform table, extended by constant-plus-tangent.
fn table_interp(lo: f64, hi: f64, values: &[f64], x: f64) -> f64 {
    let n = values.len() - 1;
    let h = (hi - lo) / n as f64;
    if x <= lo {
        let slope = (values[1] - values[0]) / h;
        return values[0] + slope * (x - lo);
    }
    if x >= hi {
        let slope = (values[n] - values[n - 1]) / h;
        return values[n] + slope * (x - hi);
    }
    let s = (x - lo) / h;
    let i = (s.floor() as usize).min(n - 1);
    let frac = s - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

impl PiProfile {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            PiProfile::Zero => 0.0,
            PiProfile::Linear { slope, intercept } => slope * r + intercept,
            PiProfile::DoubleWell { scale, center, radius } => {
                let d = r - center;
                scale * d * (d * d - radius * radius)
            }
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match *self {
            PiProfile::Zero => 0.0,
            PiProfile::Linear { slope, .. } => slope,
            PiProfile::DoubleWell { scale, center, radius } => {
                let d = r - center;
                scale * (3.0 * d * d - radius * radius)
            }
        }
    }

    /// The antiderivative `f2` with `f2(0) = 0` (linear case) or `f2(center) = 0`.
    pub fn potential(&self, r: f64) -> f64 {
        match *self {
            PiProfile::Zero => 0.0,
            PiProfile::Linear { slope, intercept } => 0.5 * slope * r * r + intercept * r,
            PiProfile::DoubleWell { scale, center, radius } => {
                let d = r - center;
                0.25 * scale * (d * d - radius * radius).powi(2) - 0.25 * scale * radius.powi(4)
            }
        }
    }
}

impl KappaProfile {
    /// `(kappa, d_r kappa, d_r^2 kappa)` at `(m, r)`.
    pub fn eval(&self, m: f64, r: f64) -> (f64, f64, f64) {
        match *self {
            KappaProfile::Constant { k0 } => (k0, 0.0, 0.0),
            KappaProfile::Rational { k0, k1, k2 } => {
                let t = r.tanh();
                let sech2 = 1.0 - t * t;
                (k0 + k1 / (1.0 + m * m) + k2 * t, k2 * sech2, -2.0 * k2 * sech2 * t)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, KappaProfile::Constant { .. })
    }
}

impl ModelSpec {
    /// `(g, g', g'')` at `r`, extended outside a bounded `D(beta)` by the tangent
    /// line at the nearest endpoint.
    pub fn g_all(&self, r: f64) -> (f64, f64, f64) {
        let dom = self.graph.domain();
        if dom.lo.is_finite() && r < dom.lo {
            let (g0, g1, _) = self.g.raw(dom.lo);
            return (g0 + g1 * (r - dom.lo), g1, 0.0);
        }
        if dom.hi.is_finite() && r > dom.hi {
            let (g0, g1, _) = self.g.raw(dom.hi);
            return (g0 + g1 * (r - dom.hi), g1, 0.0);
        }
        self.g.raw(r)
    }

    pub fn g(&self, r: f64) -> f64 {
        self.g_all(r).0
    }

    pub fn dg(&self, r: f64) -> f64 {
        self.g_all(r).1
    }

    pub fn d2g(&self, r: f64) -> f64 {
        self.g_all(r).2
    }

    pub fn pi(&self, r: f64) -> f64 {
        self.pi.value(r)
    }

    pub fn f2(&self, r: f64) -> f64 {
        self.pi.potential(r)
    }

    /// `kappa` with the chemical potential clamped to `m >= 0`.
    pub fn kappa(&self, m: f64, r: f64) -> f64 {
        self.kappa.eval(m.max(0.0), r).0
    }

    /// Checks only the cheap well-formedness conditions (no sampling).
    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        let (kmin, kmax) = self.kappa_bounds;
        if !(kmin > 0.0 && kmin <= kmax && kmax.is_finite()) {
            return Err(Error::Structural(format!(
                "kappa bounds must satisfy 0 < kappa_min <= kappa_max < inf, got ({kmin}, {kmax})"
            )));
        }
        match &self.g {
            GProfile::Table { lo, hi, values } => {
                if values.len() < 3 || !(lo < hi) {
                    return Err(Error::Structural("table profile needs lo < hi and at least 3 values".into()));
                }
            }
            GProfile::AffineCapped { width, .. } if !(*width > 0.0) => {
                return Err(Error::Structural("affine_capped profile needs width > 0".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Sampling window used by [`verify_assumptions`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckWindow {
    pub m_max: f64,
    pub r_lo: f64,
    pub r_hi: f64,
}

impl CheckWindow {
    /// `m in [0, 1e3]`, `r` over `D(beta)` inflated by 10%, or `[-2, 2]` for an
    /// unbounded domain.
    pub fn default_for(graph: &ConvexGraph) -> Self {
        let dom = graph.domain();
        let (r_lo, r_hi) = if dom.is_bounded() {
            let pad = 0.1 * (dom.hi - dom.lo);
            (dom.lo - pad, dom.hi + pad)
        } else {
            (-2.0, 2.0)
        };
        Self { m_max: 1e3, r_lo, r_hi }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// Sample point, `(m, r)` or `(r, s)` for two-point quotients; unused slots are NaN.
    pub point: (f64, f64),
    pub value: f64,
    pub inequality: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Worst sampled point: the violation when failed, the closest call otherwise.
    pub witness: Option<Witness>,
}

/// Outcome of sampled assumption checks. A pass means no sampled violation,
/// not a proof.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub density: usize,
    pub window: CheckWindow,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl std::fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "# sampled assumption report (density {})", self.density)?;
        for c in &self.checks {
            write!(f, "{} = {}", c.name, if c.passed { "pass" } else { "FAIL" })?;
            if let Some(w) = &c.witness {
                write!(f, "  worst at ({:.6e}, {:.6e}): {} [{}]", w.point.0, w.point.1, w.value, w.inequality)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Tracks the sample with the largest violation measure `excess` (> 0 means violated).
struct Worst {
    name: &'static str,
    best: Option<(f64, Witness)>,
}

impl Worst {
    fn new(name: &'static str) -> Self {
        Self { name, best: None }
    }

    fn offer(&mut self, excess: f64, point: (f64, f64), value: f64, inequality: impl FnOnce() -> String) {
        if self.best.as_ref().is_none_or(|(e, _)| excess > *e) {
            self.best = Some((excess, Witness { point, value, inequality: inequality() }));
        }
    }

    fn finish(self) -> AssumptionCheck {
        let passed = self.best.as_ref().is_none_or(|(e, _)| *e <= 0.0);
        AssumptionCheck { name: self.name, passed, witness: self.best.map(|(_, w)| w) }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

fn finite(what: &'static str, x: f64, point: impl FnOnce() -> String) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Evaluation { what, point: point() })
    }
}

/// Samples the structural assumptions on a `density x density` grid of `(m, r)`.
pub fn verify_assumptions(spec: &ModelSpec, sample_density: usize) -> Result<AssumptionReport> {
    verify_assumptions_in(spec, sample_density, CheckWindow::default_for(&spec.graph))
}

pub fn verify_assumptions_in(spec: &ModelSpec, sample_density: usize, window: CheckWindow) -> Result<AssumptionReport> {
    if sample_density < 2 {
        return Err(Error::Input(format!("sample density must be >= 2, got {sample_density}")));
    }
    spec.validate()?;
    let dom = spec.graph.domain();
    if dom.is_empty() {
        return Err(Error::Structural(format!("empty domain {dom} for beta")));
    }
    let n = sample_density;
    let (kmin, kmax) = spec.kappa_bounds;
    const REL: f64 = 1e-12;

    let mut kb = Worst::new("kappa_bounds");
    let mut kd = Worst::new("kappa_dr_bound");
    let mut kdd = Worst::new("kappa_drr_bound");
    for m in linspace(0.0, window.m_max, n) {
        for r in linspace(window.r_lo, window.r_hi, n) {
            let (k, dk, ddk) = spec.kappa.eval(m, r);
            let pt = || format!("(m, r) = ({m}, {r})");
            finite("kappa", k, pt)?;
            let excess = (kmin - k).max(k - kmax);
            kb.offer(excess - REL * kmax, (m, r), k, || format!("{kmin} <= kappa = {k} <= {kmax}"));
            kd.offer(dk.abs() - kmax * (1.0 + REL), (m, r), dk, || format!("|d_r kappa| = {} <= {kmax}", dk.abs()));
            kdd.offer(ddk.abs() - kmax * (1.0 + REL), (m, r), ddk, || {
                format!("|d_r^2 kappa| = {} <= {kmax}", ddk.abs())
            });
        }
    }

    // g conditions on D(beta) intersected with the window
    let g_lo = dom.lo.max(window.r_lo);
    let g_hi = dom.hi.min(window.r_hi);
    let mut gnn = Worst::new("g_nonnegative");
    let mut gcc = Worst::new("g_concave");
    let mut f1nn = Worst::new("f1_nonnegative");
    for r in linspace(g_lo, g_hi, n) {
        if !dom.contains(r) {
            continue;
        }
        let (g, _, g2) = spec.g_all(r);
        finite("g", g, || format!("r = {r}"))?;
        finite("g''", g2, || format!("r = {r}"))?;
        gnn.offer(-g, (r, f64::NAN), g, || format!("g({r}) = {g} >= 0"));
        gcc.offer(g2 - 1e-9, (r, f64::NAN), g2, || format!("g''({r}) = {g2} <= 0"));
        let f1 = spec.graph.f1_value(r);
        if !f1.is_nan() {
            f1nn.offer(-f1, (r, f64::NAN), f1, || format!("f1({r}) = {f1} >= 0"));
        }
    }

    // sampled Lipschitz quotients over adjacent and far pairs of the window
    let lip = spec.lipschitz;
    let mut lpi = Worst::new("pi_lipschitz");
    let mut lg = Worst::new("g_lipschitz");
    let mut ldg = Worst::new("dg_lipschitz");
    let rs: Vec<f64> = linspace(window.r_lo, window.r_hi, n).collect();
    let mut pairs: Vec<(f64, f64)> = rs.windows(2).map(|w| (w[0], w[1])).collect();
    let stride = (n / 8).max(1);
    for i in (0..n).step_by(stride) {
        for j in (i + 1..n).step_by(stride) {
            pairs.push((rs[i], rs[j]));
        }
    }
    for (a, b) in pairs {
        let d = b - a;
        let (ga, dga, _) = spec.g_all(a);
        let (gb, dgb, _) = spec.g_all(b);
        let (pa, pb) = (spec.pi(a), spec.pi(b));
        finite("pi", pa, || format!("r = {a}"))?;
        for (w, q, bound, label) in [
            (&mut lpi, ((pb - pa) / d).abs(), lip.pi, "pi"),
            (&mut lg, ((gb - ga) / d).abs(), lip.g, "g"),
            (&mut ldg, ((dgb - dga) / d).abs(), lip.dg, "g'"),
        ] {
            w.offer(q - bound * (1.0 + 1e-9) - 1e-12, (a, b), q, || {
                format!("|{label}(r) - {label}(s)| / |r - s| = {q} <= {bound}")
            });
        }
    }

    let mut checks = vec![kb.finish(), kd.finish(), kdd.finish(), gnn.finish(), gcc.finish(), f1nn.finish()];
    checks.extend([lpi.finish(), lg.finish(), ldg.finish()]);
    if spec.box_bounds.is_some() {
        let bc = check_box_compat(spec)?;
        checks.push(AssumptionCheck {
            name: "box_compatibility",
            passed: bc.passed(),
            witness: bc.violations.first().map(|v| Witness {
                point: (f64::NAN, f64::NAN),
                value: f64::NAN,
                inequality: v.clone(),
            }),
        });
    }
    Ok(AssumptionReport { density: n, window, checks })
}

/// Result of [`check_box_compat`]; empty `violations` means pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoxCheck {
    pub violations: Vec<String>,
}

impl BoxCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that the box constants are compatible with `beta`, `pi` and `g'`.
pub fn check_box_compat(spec: &ModelSpec) -> Result<BoxCheck> {
    let b = spec
        .box_bounds
        .ok_or_else(|| Error::Input("box bounds are not set".into()))?;
    let dom: Interval = spec.graph.domain();
    for r in [b.rho_lo, b.rho_hi] {
        if !dom.contains(r) {
            return Err(Error::Domain { value: r, domain: dom.to_string() });
        }
    }
    let mut v = Vec::new();
    if b.rho_lo > b.rho_hi {
        v.push(format!("rho_lo = {} > rho_hi = {}", b.rho_lo, b.rho_hi));
    }
    if !spec.graph.contains(b.rho_lo, b.xi_lo) {
        v.push(format!("xi_lo = {} is not in beta({})", b.xi_lo, b.rho_lo));
    }
    if !spec.graph.contains(b.rho_hi, b.xi_hi) {
        v.push(format!("xi_hi = {} is not in beta({})", b.xi_hi, b.rho_hi));
    }
    let lo_sum = b.xi_lo + spec.pi(b.rho_lo);
    if lo_sum > 0.0 {
        v.push(format!("xi_lo + pi(rho_lo) = {lo_sum} > 0"));
    }
    let hi_sum = b.xi_hi + spec.pi(b.rho_hi);
    if hi_sum < 0.0 {
        v.push(format!("xi_hi + pi(rho_hi) = {hi_sum} < 0"));
    }
    let dg_lo = spec.dg(b.rho_lo);
    if dg_lo < 0.0 {
        v.push(format!("g'(rho_lo) = {dg_lo} < 0"));
    }
    let dg_hi = spec.dg(b.rho_hi);
    if dg_hi > 0.0 {
        v.push(format!("g'(rho_hi) = {dg_hi} > 0"));
    }
    Ok(BoxCheck { violations: v })
}
