//! Uniform cell-centered grids on `[0, L1] (x [0, L2])` with homogeneous
//! Neumann boundary conditions, the associated finite-volume operators and a
//! Jacobi-preconditioned conjugate gradient solver.
//!
//! Boundary faces carry zero flux, which is the same as a ghost cell holding
//! the value of its adjacent interior cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: [usize; 2],
    len: [f64; 2],
}

impl Grid {
    pub fn new_1d(n: usize, length: f64) -> Result<Self> {
        Self::new(1, [n, 1], [length, 1.0])
    }

    pub fn new_2d(n: [usize; 2], length: [f64; 2]) -> Result<Self> {
        Self::new(2, n, length)
    }

    pub fn new(dim: usize, n: [usize; 2], len: [f64; 2]) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Input(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        for axis in 0..dim {
            if n[axis] < 2 {
                return Err(Error::Input(format!("need at least 2 cells per axis, got {}", n[axis])));
            }
            if !(len[axis] > 0.0 && len[axis].is_finite()) {
                return Err(Error::Input(format!("domain extent must be positive, got {}", len[axis])));
            }
        }
        let (n, len) = if dim == 1 { ([n[0], 1], [len[0], 1.0]) } else { (n, len) };
        Ok(Self { dim, n, len })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> [usize; 2] {
        self.n
    }

    pub fn extent(&self) -> [f64; 2] {
        self.len
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.len[axis] / self.n[axis] as f64
    }

    pub fn cell_count(&self) -> usize {
        self.n[0] * self.n[1]
    }

    /// `h1 (* h2)`: the measure of one cell.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Measure of the whole domain.
    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|a| self.len[a]).product()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.n[0] * j
    }

    /// Cell-center coordinates.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let i = idx % self.n[0];
        let j = idx / self.n[0];
        let x = (i as f64 + 0.5) * self.spacing(0);
        let y = if self.dim == 2 { (j as f64 + 0.5) * self.spacing(1) } else { 0.0 };
        [x, y]
    }

    pub fn x_face_count(&self) -> usize {
        (self.n[0] - 1) * self.n[1]
    }

    pub fn y_face_count(&self) -> usize {
        if self.dim == 2 {
            self.n[0] * (self.n[1] - 1)
        } else {
            0
        }
    }

    /// Interior faces as `(left/lower cell, right/upper cell, axis)`, x faces first.
    pub fn faces(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let [nx, ny] = self.n;
        let xs = (0..ny).flat_map(move |j| (0..nx - 1).map(move |i| (i + nx * j, i + 1 + nx * j, 0)));
        let ys = (0..if self.dim == 2 { ny - 1 } else { 0 })
            .flat_map(move |j| (0..nx).map(move |i| (i + nx * j, i + nx * (j + 1), 1)));
        xs.chain(ys)
    }

    pub fn field(&self, values: Vec<f64>) -> Result<Field> {
        self.check_len(values.len())?;
        Ok(Field { values })
    }

    pub fn constant(&self, value: f64) -> Field {
        Field { values: vec![value; self.cell_count()] }
    }

    /// Samples `f(x, y)` at the cell centers.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        Field {
            values: (0..self.cell_count())
                .map(|k| {
                    let [x, y] = self.center(k);
                    f(x, y)
                })
                .collect(),
        }
    }

    pub fn check(&self, x: &Field) -> Result<()> {
        self.check_len(x.len())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.cell_count() {
            return Err(Error::Shape { expected: self.cell_count(), got });
        }
        Ok(())
    }

    pub fn unit_faces(&self) -> FaceCoefficients {
        FaceCoefficients { x: vec![1.0; self.x_face_count()], y: vec![1.0; self.y_face_count()] }
    }

    pub fn constant_faces(&self, value: f64) -> FaceCoefficients {
        FaceCoefficients { x: vec![value; self.x_face_count()], y: vec![value; self.y_face_count()] }
    }
}

/// One value per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn from_vec(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.len(), other.len());
        Field { values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<usize> for Field {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl std::ops::IndexMut<usize> for Field {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

/// Diffusivities on the interior faces, in the order of [`Grid::faces`].
#[derive(Debug, Clone, PartialEq)]
pub struct FaceCoefficients {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl FaceCoefficients {
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.x.iter().chain(&self.y).copied()
    }

    pub fn min(&self) -> f64 {
        self.iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.iter().fold(f64::NEG_INFINITY, f64::max)
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if self.x.len() != grid.x_face_count() || self.y.len() != grid.y_face_count() {
            return Err(Error::Shape {
                expected: grid.x_face_count() + grid.y_face_count(),
                got: self.x.len() + self.y.len(),
            });
        }
        for (index, value) in self.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Coefficient { index, value });
            }
        }
        Ok(())
    }
}

/// `out += div(k grad x)` with weights `k_f / h_axis^2`; shared by the operators below.
fn apply_div(grid: &Grid, x: &[f64], kx: &[f64], ky: &[f64], out: &mut [f64]) {
    let [nx, ny] = grid.cells();
    let wx = 1.0 / grid.spacing(0).powi(2);
    let mut f = 0;
    for j in 0..ny {
        let row = nx * j;
        for i in 0..nx - 1 {
            let (a, b) = (row + i, row + i + 1);
            let flux = kx[f] * wx * (x[b] - x[a]);
            out[a] += flux;
            out[b] -= flux;
            f += 1;
        }
    }
    if grid.dim() == 2 {
        let wy = 1.0 / grid.spacing(1).powi(2);
        let mut f = 0;
        for j in 0..ny - 1 {
            for i in 0..nx {
                let (a, b) = (i + nx * j, i + nx * (j + 1));
                let flux = ky[f] * wy * (x[b] - x[a]);
                out[a] += flux;
                out[b] -= flux;
                f += 1;
            }
        }
    }
}

/// Discrete Neumann Laplacian (3-point / 5-point stencil).
pub fn neumann_laplacian(grid: &Grid, x: &Field) -> Result<Field> {
    grid.check(x)?;
    let ones = grid.unit_faces();
    let mut out = vec![0.0; x.len()];
    apply_div(grid, x.values(), &ones.x, &ones.y, &mut out);
    Ok(Field::from_vec(out))
}

/// Conservative `div(kappa grad mu)` with zero flux through the boundary.
pub fn div_kappa_grad(grid: &Grid, mu: &Field, kappa_face: &FaceCoefficients) -> Result<Field> {
    grid.check(mu)?;
    kappa_face.check(grid)?;
    let mut out = vec![0.0; mu.len()];
    apply_div(grid, mu.values(), &kappa_face.x, &kappa_face.y, &mut out);
    Ok(Field::from_vec(out))
}

/// Face diffusivities: arithmetic mean of `kappa(max(mu, 0), rho)` at the two
/// adjacent cells. Also returns how many cells had `mu < 0` and were clamped.
pub fn assemble_face_kappa(
    grid: &Grid,
    mu: &Field,
    rho: &Field,
    kappa: impl Fn(f64, f64) -> f64,
) -> Result<(FaceCoefficients, usize)> {
    grid.check(mu)?;
    grid.check(rho)?;
    let clamped = mu.iter().filter(|&&m| m < 0.0).count();
    let cell: Vec<f64> = mu.iter().zip(rho.iter()).map(|(&m, &r)| kappa(m.max(0.0), r)).collect();
    let mut faces = FaceCoefficients { x: Vec::with_capacity(grid.x_face_count()), y: Vec::with_capacity(grid.y_face_count()) };
    for (a, b, axis) in grid.faces() {
        let k = 0.5 * (cell[a] + cell[b]);
        if axis == 0 {
            faces.x.push(k);
        } else {
            faces.y.push(k);
        }
    }
    Ok((faces, clamped))
}

/// Cell-sum quadrature `sum x_i |cell|`.
pub fn integrate(grid: &Grid, x: &Field) -> f64 {
    debug_assert_eq!(grid.cell_count(), x.len());
    x.iter().sum::<f64>() * grid.cell_volume()
}

/// Weighted inner product `sum x_i y_i |cell|`.
pub fn inner(grid: &Grid, x: &Field, y: &Field) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>() * grid.cell_volume()
}

/// Outcome of a conjugate gradient solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned CG for a symmetric positive definite operator given
/// as a matrix-free `apply(v, out)`. Relative residual is measured in the
/// Euclidean norm against `rhs`.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    rhs: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgStats)> {
    let n = rhs.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let bnorm = dot(rhs, rhs).sqrt();
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], CgStats { iterations: 0, relative_residual: 0.0 }));
    }
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut history = Vec::new();
    for it in 0..=max_iter {
        let rel = dot(&r, &r).sqrt() / bnorm;
        history.push(rel);
        if rel <= tol {
            return Ok((x, CgStats { iterations: it, relative_residual: rel }));
        }
        if it == max_iter {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver {
                solver: "conjugate gradient",
                iterations: it,
                detail: format!("operator not positive definite (p.Ap = {pap})"),
            });
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
            z[k] = r[k] / diag[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    let tail: Vec<String> = history.iter().rev().take(5).rev().map(|r| format!("{r:.3e}")).collect();
    Err(Error::Solver {
        solver: "conjugate gradient",
        iterations: max_iter,
        detail: format!("relative residual history (last 5): [{}]", tail.join(", ")),
    })
}

/// Default iteration cap for [`solve_spd`].
pub fn default_cg_iterations(grid: &Grid) -> usize {
    10 * grid.cell_count() + 100
}

/// Solves `(diag I - tau div(kappa grad)) x = rhs`: tridiagonal elimination in
/// 1-D, Jacobi-preconditioned CG in 2-D.
///
/// With positive `diag` and `kappa_face` the matrix is a symmetric M-matrix, so
/// a nonnegative right-hand side yields a nonnegative solution.
pub fn solve_spd(
    grid: &Grid,
    diag: &Field,
    kappa_face: &FaceCoefficients,
    tau: f64,
    rhs: &Field,
    tol: f64,
) -> Result<(Field, CgStats)> {
    solve_spd_from(grid, diag, kappa_face, tau, rhs, None, tol)
}

pub fn solve_spd_from(
    grid: &Grid,
    diag: &Field,
    kappa_face: &FaceCoefficients,
    tau: f64,
    rhs: &Field,
    x0: Option<&Field>,
    tol: f64,
) -> Result<(Field, CgStats)> {
    grid.check(diag)?;
    grid.check(rhs)?;
    kappa_face.check(grid)?;
    if !(tol > 0.0) {
        return Err(Error::Input(format!("CG tolerance must be positive, got {tol}")));
    }
    if !(tau >= 0.0) {
        return Err(Error::Input(format!("time step must be nonnegative, got {tau}")));
    }
    for (index, &value) in diag.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Coefficient { index, value });
        }
    }
    // Jacobi diagonal: diag + tau * sum of adjacent face weights
    let mut pre = diag.values().to_vec();
    let wx = tau / grid.spacing(0).powi(2);
    let wy = if grid.dim() == 2 { tau / grid.spacing(1).powi(2) } else { 0.0 };
    for ((a, b, axis), k) in grid.faces().zip(kappa_face.iter()) {
        let w = if axis == 0 { wx } else { wy } * k;
        pre[a] += w;
        pre[b] += w;
    }
    let apply = |v: &[f64], out: &mut [f64]| {
        let mut div = vec![0.0; v.len()];
        apply_div(grid, v, &kappa_face.x, &kappa_face.y, &mut div);
        for k in 0..v.len() {
            out[k] = diag[k] * v[k] - tau * div[k];
        }
    };
    if grid.dim() == 1 {
        let off: Vec<f64> = kappa_face.x.iter().map(|k| -wx * k).collect();
        let x = thomas(&pre, &off, rhs.values());
        let mut ax = vec![0.0; x.len()];
        apply(&x, &mut ax);
        let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rnorm = ax.iter().zip(rhs.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let relative_residual = if bnorm == 0.0 { rnorm } else { rnorm / bnorm };
        return Ok((Field::from_vec(x), CgStats { iterations: 0, relative_residual }));
    }
    let (x, stats) = pcg(apply, &pre, rhs.values(), x0.map(Field::values), tol, default_cg_iterations(grid))?;
    Ok((Field::from_vec(x), stats))
}

/// Symmetric tridiagonal solve with diagonal `d` and off-diagonal `e`
/// (`e[i]` couples rows `i` and `i + 1`). No pivoting: meant for diagonally
/// dominant M-matrices.
fn thomas(d: &[f64], e: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut piv = d[0];
    y[0] = rhs[0] / piv;
    for i in 1..n {
        c[i - 1] = e[i - 1] / piv;
        piv = d[i] - e[i - 1] * c[i - 1];
        y[i] = (rhs[i] - e[i - 1] * y[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new_1d(1, 1.0).is_err());
        assert!(Grid::new_1d(4, 0.0).is_err());
        assert!(Grid::new(3, [4, 4], [1.0, 1.0]).is_err());
    }

    #[test]
    fn spacing_and_count() {
        let g = Grid::new_2d([4, 5], [2.0, 1.0]).unwrap();
        assert_eq!(g.cell_count(), 20);
        assert_eq!(g.spacing(0), 0.5);
        assert_eq!(g.spacing(1), 0.2);
        assert_eq!(g.faces().count(), 3 * 5 + 4 * 4);
    }

    #[test]
    fn laplacian_stencil() {
        let g = Grid::new_1d(3, 3.0).unwrap();
        let lap = neumann_laplacian(&g, &g.field(vec![0.0, 1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(lap[1], -2.0);
        // boundary cells see a ghost equal to themselves
        assert_eq!(lap[0], 1.0);
        assert_eq!(lap.iter().sum::<f64>(), 0.0);

        let g2 = Grid::new_1d(2, 2.0).unwrap();
        let lap = neumann_laplacian(&g2, &g2.field(vec![1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(lap.values(), &[1.0, -1.0]);
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let g = Grid::new_2d([5, 3], [1.0, 0.7]).unwrap();
        let lap = neumann_laplacian(&g, &g.constant(3.5)).unwrap();
        assert!(lap.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_mismatch() {
        let g = Grid::new_1d(4, 1.0).unwrap();
        assert!(matches!(neumann_laplacian(&g, &Field::from_vec(vec![1.0; 3])), Err(Error::Shape { .. })));
    }

    #[test]
    fn flux_balance() {
        let g = Grid::new_1d(2, 2.0).unwrap();
        let k = FaceCoefficients { x: vec![2.0], y: vec![] };
        let out = div_kappa_grad(&g, &g.field(vec![0.0, 1.0]).unwrap(), &k).unwrap();
        assert_eq!(out.values(), &[2.0, -2.0]);
    }

    #[test]
    fn unit_kappa_is_laplacian() {
        let g = Grid::new_2d([4, 3], [1.0, 1.0]).unwrap();
        let x = g.sample(|x, y| (3.0 * x).sin() + y * y);
        let a = div_kappa_grad(&g, &x, &g.unit_faces()).unwrap();
        let b = neumann_laplacian(&g, &x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nonpositive_face_coefficient() {
        let g = Grid::new_1d(3, 1.0).unwrap();
        let k = FaceCoefficients { x: vec![1.0, 0.0], y: vec![] };
        assert!(matches!(div_kappa_grad(&g, &g.constant(1.0), &k), Err(Error::Coefficient { index: 1, .. })));
    }

    #[test]
    fn face_kappa_mean_and_clamp() {
        let g = Grid::new_1d(2, 1.0).unwrap();
        let mu = g.field(vec![-1.0, 1.0]).unwrap();
        let rho = g.constant(0.0);
        let (k, clamped) = assemble_face_kappa(&g, &mu, &rho, |m, _| 1.0 + m).unwrap();
        assert_eq!(k.x, vec![1.5]);
        assert_eq!(clamped, 1);
    }

    #[test]
    fn integrate_constants() {
        let g = Grid::new_1d(7, 1.0).unwrap();
        assert!((integrate(&g, &g.constant(1.0)) - 1.0).abs() < 1e-15);
        let g2 = Grid::new_2d([3, 5], [2.0, 1.0]).unwrap();
        assert!((integrate(&g2, &g2.constant(3.0)) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn spd_identity_and_constants() {
        let g = Grid::new_1d(6, 1.0).unwrap();
        let rhs = g.sample(|x, _| x * x);
        let k = g.constant_faces(2.0);
        let (x, _) = solve_spd(&g, &g.constant(1.0), &k, 0.0, &rhs, 1e-12).unwrap();
        for (a, b) in x.iter().zip(rhs.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let (x, _) = solve_spd(&g, &g.constant(4.0), &k, 0.3, &g.constant(2.0), 1e-12).unwrap();
        assert!(x.iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn spd_rejects_bad_diagonal() {
        let g = Grid::new_1d(3, 1.0).unwrap();
        let d = g.field(vec![1.0, 0.0, 1.0]).unwrap();
        assert!(solve_spd(&g, &d, &g.unit_faces(), 1.0, &g.constant(1.0), 1e-10).is_err());
    }

    #[test]
    fn cg_reports_nonconvergence() {
        let g = Grid::new_1d(50, 1.0).unwrap();
        let diag = g.constant(1e-6);
        let k = g.constant_faces(1.0);
        let apply = |v: &[f64], out: &mut [f64]| {
            let mut div = vec![0.0; v.len()];
            apply_div(&g, v, &k.x, &k.y, &mut div);
            for i in 0..v.len() {
                out[i] = diag[i] * v[i] - div[i];
            }
        };
        let rhs = g.sample(|x, _| x);
        let err = pcg(apply, &vec![1.0; 50], rhs.values(), None, 1e-14, 2).unwrap_err();
        assert!(matches!(err, Error::Solver { iterations: 2, .. }));
    }

    #[test]
    fn tridiagonal_path_matches_cg() {
        let g = Grid::new_1d(50, 1.0).unwrap();
        let diag = g.sample(|x, _| 1.0 + x);
        let k = FaceCoefficients { x: (0..49).map(|i| 1.0 + 0.1 * i as f64).collect(), y: vec![] };
        let rhs = g.sample(|x, _| (7.0 * x).cos());
        let (direct, stats) = solve_spd(&g, &diag, &k, 0.02, &rhs, 1e-13).unwrap();
        assert!(stats.relative_residual < 1e-13);
        let mut pre = diag.values().to_vec();
        let w = 0.02 / g.spacing(0).powi(2);
        for (f, (a, b, _)) in g.faces().enumerate() {
            pre[a] += w * k.x[f];
            pre[b] += w * k.x[f];
        }
        let apply = |v: &[f64], out: &mut [f64]| {
            let d = div_kappa_grad(&g, &Field::from_vec(v.to_vec()), &k).unwrap();
            for i in 0..v.len() {
                out[i] = diag[i] * v[i] - 0.02 * d[i];
            }
        };
        let (iter, _) = pcg(apply, &pre, rhs.values(), None, 1e-14, 2000).unwrap();
        for (a, b) in direct.iter().zip(&iter) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
