use serde::{Deserialize, Serialize};

use super::{CellResult, Diagnostics};
use crate::error::{invalid, Error, Result};
use crate::fields::{boundary_band, default_band_width, discrete_volume_energy, Field, Grid, GridFunction};
use crate::geometry::Cube;
use crate::integrands::VolumeIntegrand;
use crate::linalg::{dot, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Relative gradient tolerance of the nonlinear solver.
    pub gradient_tolerance: f64,
    /// Relative residual tolerance of the linear solver (p = 2).
    pub linear_tolerance: f64,
    /// Return `ℓ_ξ` directly when `f` is convex and independent of `x`.
    pub affine_shortcut: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 100_000,
            gradient_tolerance: 1e-6,
            linear_tolerance: 1e-13,
            affine_shortcut: true,
        }
    }
}

/// `min { F_h(u, Q_ρ(x)) : u = ℓ_ξ on the boundary band }`.
#[derive(Debug, Clone)]
pub struct VolumeCellSpec {
    pub f: VolumeIntegrand,
    pub xi: Matrix,
    pub center: Vec<f64>,
    pub side: f64,
    pub resolution: usize,
    pub band_width: usize,
    pub options: SolverOptions,
}

impl VolumeCellSpec {
    /// Spec with the default band width `max(1, ⌈N/8⌉)`.
    pub fn new(f: VolumeIntegrand, xi: Matrix, center: Vec<f64>, side: f64, resolution: usize) -> Self {
        VolumeCellSpec {
            f,
            xi,
            center,
            side,
            resolution,
            band_width: default_band_width(resolution),
            options: SolverOptions::default(),
        }
    }

    pub fn with_band(mut self, width: usize) -> Self {
        self.band_width = width;
        self
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(&Cube::new(self.center.clone(), self.side)?, self.resolution)
    }
}

struct Problem<'a> {
    f: &'a VolumeIntegrand,
    grid: Grid,
    m: usize,
    free: Vec<bool>,
    centers: Vec<Vec<f64>>,
}

pub fn solve_volume_cell(spec: &VolumeCellSpec) -> Result<CellResult> {
    let grid = spec.grid()?;
    let n = grid.dim();
    if spec.xi.cols != n {
        return Err(Error::Dimension {
            expected: n,
            got: spec.xi.cols,
        });
    }
    let m = spec.xi.rows;
    let band = boundary_band(&grid, spec.band_width)?;
    let free: Vec<bool> = band.nodes.iter().map(|b| !b).collect();

    // Start from ℓ_ξ everywhere; fixed nodes keep these values.
    let mut values = Vec::with_capacity(grid.num_nodes() * m);
    for k in 0..grid.num_nodes() {
        values.extend(spec.xi.mul_vec(&grid.node_position(k)));
    }
    let centers = (0..grid.num_cells()).map(|c| grid.cell_center(c)).collect();
    let problem = Problem {
        f: &spec.f,
        grid: grid.clone(),
        m,
        free,
        centers,
    };

    let diagnostics = if spec.options.affine_shortcut && spec.f.is_homogeneous_in_x() && is_convex_family(&spec.f) {
        // ℓ_ξ is optimal by Jensen; nothing to do.
        Diagnostics {
            method: "affine".into(),
            iterations: 0,
            residual: 0.0,
            certified: true,
            path_segments: None,
            path_length: None,
        }
    } else if spec.f.quadratic_coefficient().is_some() {
        solve_quadratic(&problem, &mut values, &spec.options)?
    } else {
        nonlinear_cg(&problem, &mut values, &spec.options)?
    };

    let u = GridFunction::new(grid, m, values)?;
    let value = discrete_volume_energy(&spec.f, &u)?;
    Ok(CellResult {
        value,
        minimiser: Some(Field::Nodal(u)),
        polyline: None,
        diagnostics,
    })
}

fn is_convex_family(f: &VolumeIntegrand) -> bool {
    matches!(f.family(), crate::integrands::VolumeFamily::Power { p, .. } if *p >= 1.0)
}

// ---------------------------------------------------------------------------
// p = 2: weighted graph Laplacian
// ---------------------------------------------------------------------------

/// Edge weights `a(x_c) h^{n-2}` of the edges leaving each node in the
/// positive lattice directions (0 where no cell owns the edge).
fn edge_weights(p: &Problem) -> Vec<[f64; 2]> {
    let grid = &p.grid;
    let n = grid.dim();
    let nn = grid.resolution();
    let h = grid.spacing();
    let scale = h.powi(n as i32 - 2);
    let unit = {
        let mut e = Matrix::zeros(1, n);
        e.set(0, 0, 1.0);
        e
    };
    let mut w = vec![[0.0; 2]; grid.num_nodes()];
    for c in 0..grid.num_cells() {
        let a = p.f.eval(&p.centers[c], &unit) * scale;
        let ij = grid.cell_coords(c);
        let base = grid.node_index(&ij);
        for axis in 0..n {
            debug_assert!(ij[axis] < nn);
            w[base][axis] = a;
        }
    }
    w
}

fn neighbours(grid: &Grid, k: usize, w: &[[f64; 2]]) -> Vec<(usize, f64)> {
    let ij = grid.node_coords(k);
    let nn = grid.resolution();
    let mut out = Vec::with_capacity(4);
    for axis in 0..grid.dim() {
        if ij[axis] < nn {
            let mut up = ij.clone();
            up[axis] += 1;
            out.push((grid.node_index(&up), w[k][axis]));
        }
        if ij[axis] > 0 {
            let mut dn = ij.clone();
            dn[axis] -= 1;
            let kd = grid.node_index(&dn);
            out.push((kd, w[kd][axis]));
        }
    }
    out
}

fn solve_quadratic(p: &Problem, values: &mut [f64], opts: &SolverOptions) -> Result<Diagnostics> {
    let grid = &p.grid;
    let w = edge_weights(p);
    let free_idx: Vec<usize> = (0..grid.num_nodes()).filter(|&k| p.free[k]).collect();
    if free_idx.is_empty() {
        return invalid("no free nodes: band covers the whole grid");
    }
    let mut pos = vec![usize::MAX; grid.num_nodes()];
    for (r, &k) in free_idx.iter().enumerate() {
        pos[k] = r;
    }
    // Sparse rows of the reduced system.
    let rows: Vec<Vec<(usize, f64)>> = free_idx.iter().map(|&k| neighbours(grid, k, &w)).collect();
    let diag: Vec<f64> = rows.iter().map(|r| r.iter().map(|e| e.1).sum()).collect();
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Internal("isolated free node in the volume problem".into()));
    }

    let mut worst = 0.0f64;
    let mut iters = 0;
    let mut certified = true;
    for comp in 0..p.m {
        let val = |k: usize| values[k * p.m + comp];
        let rhs: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().filter(|e| !p.free[e.0]).map(|&(j, a)| a * val(j)).sum())
            .collect();
        let x0: Vec<f64> = free_idx.iter().map(|&k| val(k)).collect();
        let apply = |x: &[f64], out: &mut [f64]| {
            for (r, row) in rows.iter().enumerate() {
                let mut s = diag[r] * x[r];
                for &(j, a) in row {
                    if p.free[j] {
                        s -= a * x[pos[j]];
                    }
                }
                out[r] = s;
            }
        };
        let (x, it, res) = if grid.dim() == 1 {
            let x = tridiagonal(&rows, &diag, &rhs, &pos, &p.free);
            let mut ax = vec![0.0; x.len()];
            apply(&x, &mut ax);
            (x, 1, relative_residual(&ax, &rhs))
        } else {
            pcg(apply, &diag, &rhs, x0, opts.linear_tolerance, opts.max_iterations)
        };
        iters += it;
        worst = worst.max(res);
        if res > opts.linear_tolerance.max(1e-10) {
            certified = false;
        }
        for (r, &k) in free_idx.iter().enumerate() {
            values[k * p.m + comp] = x[r];
        }
    }
    Ok(Diagnostics {
        method: if grid.dim() == 1 { "tridiagonal" } else { "pcg" }.into(),
        iterations: iters,
        residual: worst,
        certified,
        path_segments: None,
        path_length: None,
    })
}

fn relative_residual(ax: &[f64], b: &[f64]) -> f64 {
    let r: f64 = ax.iter().zip(b).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
    let nb = dot(b, b).sqrt();
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}

/// Thomas algorithm on the 1D reduced system (free nodes are consecutive).
fn tridiagonal(
    rows: &[Vec<(usize, f64)>],
    diag: &[f64],
    rhs: &[f64],
    pos: &[usize],
    free: &[bool],
) -> Vec<f64> {
    let len = rows.len();
    let mut lower = vec![0.0; len];
    let mut upper = vec![0.0; len];
    for (r, row) in rows.iter().enumerate() {
        for &(j, a) in row {
            if free[j] {
                if pos[j] + 1 == r {
                    lower[r] = -a;
                } else if pos[j] == r + 1 {
                    upper[r] = -a;
                }
            }
        }
    }
    let mut c = vec![0.0; len];
    let mut d = vec![0.0; len];
    for r in 0..len {
        let denom = diag[r] - if r > 0 { lower[r] * c[r - 1] } else { 0.0 };
        c[r] = upper[r] / denom;
        d[r] = (rhs[r] - if r > 0 { lower[r] * d[r - 1] } else { 0.0 }) / denom;
    }
    let mut x = vec![0.0; len];
    for r in (0..len).rev() {
        x[r] = d[r] - if r + 1 < len { c[r] * x[r + 1] } else { 0.0 };
    }
    x
}

/// Jacobi-preconditioned conjugate gradients. Returns `(x, iterations, relative residual)`.
fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    mut x: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize, f64) {
    let len = b.len();
    let nb = dot(b, b).sqrt();
    let mut ax = vec![0.0; len];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    if nb == 0.0 && dot(&r, &r) == 0.0 {
        return (x, 0, 0.0);
    }
    let scale = if nb > 0.0 { nb } else { 1.0 };
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut pdir = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; len];
    let mut it = 0;
    while it < max_iter {
        let rn = dot(&r, &r).sqrt() / scale;
        if rn <= tol {
            break;
        }
        it += 1;
        apply(&pdir, &mut ap);
        let alpha = rz / dot(&pdir, &ap);
        for i in 0..len {
            x[i] += alpha * pdir[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..len {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..len {
            pdir[i] = z[i] + beta * pdir[i];
        }
    }
    // true residual
    apply(&x, &mut ax);
    let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    (x, it, dot(&res, &res).sqrt() / scale)
}

// ---------------------------------------------------------------------------
// General p: nonlinear conjugate gradients
// ---------------------------------------------------------------------------

fn energy(p: &Problem, u: &[f64]) -> f64 {
    let grid = &p.grid;
    let vol = grid.cell_volume();
    let mut e = 0.0;
    for c in 0..grid.num_cells() {
        e += p.f.eval(&p.centers[c], &local_gradient(p, u, c)) * vol;
    }
    e
}

fn local_gradient(p: &Problem, u: &[f64], c: usize) -> Matrix {
    let grid = &p.grid;
    let h = grid.spacing();
    let ij = grid.cell_coords(c);
    let base = grid.node_index(&ij);
    let mut g = Matrix::zeros(p.m, grid.dim());
    for a in 0..grid.dim() {
        let mut nx = ij.clone();
        nx[a] += 1;
        let k = grid.node_index(&nx);
        for r in 0..p.m {
            g.set(r, a, (u[k * p.m + r] - u[base * p.m + r]) / h);
        }
    }
    g
}

/// Gradient of the energy with respect to nodal values; zero on fixed nodes.
fn energy_gradient(p: &Problem, u: &[f64]) -> Vec<f64> {
    let grid = &p.grid;
    let h = grid.spacing();
    let vol = grid.cell_volume();
    let mut out = vec![0.0; u.len()];
    for c in 0..grid.num_cells() {
        let xi = local_gradient(p, u, c);
        let d = p.f.grad_xi(&p.centers[c], &xi);
        let ij = grid.cell_coords(c);
        let base = grid.node_index(&ij);
        for a in 0..grid.dim() {
            let mut nx = ij.clone();
            nx[a] += 1;
            let k = grid.node_index(&nx);
            for r in 0..p.m {
                let v = d.get(r, a) * vol / h;
                out[k * p.m + r] += v;
                out[base * p.m + r] -= v;
            }
        }
    }
    for k in 0..grid.num_nodes() {
        if !p.free[k] {
            for r in 0..p.m {
                out[k * p.m + r] = 0.0;
            }
        }
    }
    out
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn nonlinear_cg(p: &Problem, u: &mut [f64], opts: &SolverOptions) -> Result<Diagnostics> {
    let mut e = energy(p, u);
    let mut g = energy_gradient(p, u);
    let g0 = norm2(&g);
    let free_count = p.free.iter().filter(|&&b| b).count().max(1);
    // Rounding floor for the gradient norm, relative to the energy scale.
    let floor = 1e-13 * (1.0 + e) / p.grid.spacing() * (free_count as f64).sqrt();
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut it = 0;
    let mut since_restart = 0;
    let mut gn = g0;
    let mut stalled = false;
    // Energy at the last iteration that made measurable progress.
    let mut mark = (e, 0usize);
    while it < opts.max_iterations {
        gn = norm2(&g);
        if gn <= opts.gradient_tolerance * g0 || gn <= floor {
            break;
        }
        it += 1;
        let mut gd = dot(&g, &d);
        if gd >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            gd = -gn * gn;
            since_restart = 0;
        }
        // Secant estimate of the step along d, then Armijo backtracking.
        let dmax = d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let umax = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let eps = 1e-7 * (1.0 + umax) / dmax;
        let probe: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + eps * b).collect();
        let gp = energy_gradient(p, &probe);
        let curv = (dot(&gp, &d) - gd) / eps;
        let mut alpha = if curv > 0.0 { -gd / curv } else { eps * 1e3 };
        let mut accepted = false;
        let mut trial = vec![0.0; u.len()];
        for _ in 0..60 {
            for i in 0..u.len() {
                trial[i] = u[i] + alpha * d[i];
            }
            let et = energy(p, &trial);
            if et <= e + 1e-4 * alpha * gd {
                e = et;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            if since_restart == 0 {
                stalled = true;
                break;
            }
            d = g.iter().map(|v| -v).collect();
            since_restart = 0;
            continue;
        }
        u.copy_from_slice(&trial);
        if mark.0 - e > 1e-13 * (1.0 + e.abs()) {
            mark = (e, it);
        } else if it - mark.1 >= 500 {
            stalled = true;
            break;
        }
        let g_new = energy_gradient(p, u);
        let num: f64 = g_new.iter().zip(&g).map(|(a, b)| a * (a - b)).sum();
        let beta = (num / dot(&g, &g)).max(0.0);
        since_restart += 1;
        if since_restart >= free_count {
            d = g_new.iter().map(|v| -v).collect();
            since_restart = 0;
        } else {
            for i in 0..d.len() {
                d[i] = -g_new[i] + beta * d[i];
            }
        }
        g = g_new;
    }
    let converged = gn <= opts.gradient_tolerance * g0 || gn <= floor;
    Ok(Diagnostics {
        method: "nonlinear-cg".into(),
        iterations: it,
        residual: if g0 > 0.0 { gn / g0 } else { 0.0 },
        certified: converged && !stalled,
        path_segments: None,
        path_length: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::{mumford_shah_volume, periodic_volume, Coefficient};

    fn laminate_1d() -> VolumeIntegrand {
        periodic_volume(
            Coefficient::Laminate {
                a: 1.0,
                b: 4.0,
                period: 1.0,
                normal: vec![1.0],
            },
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn constant_integrand_keeps_affine_field() {
        let f = mumford_shah_volume(3.0).unwrap();
        let xi = Matrix::from_rows(1, 2, vec![0.5, -1.0]);
        let r = solve_volume_cell(&VolumeCellSpec::new(f, xi.clone(), vec![0.0, 0.0], 2.0, 16)).unwrap();
        let exact = xi.norm().powi(3) * 4.0;
        assert!((r.value - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn harmonic_mean_in_1d() {
        // one period spans 16 cells; ρ = 8 periods
        let spec = VolumeCellSpec::new(laminate_1d(), Matrix::from_rows(1, 1, vec![1.0]), vec![4.0], 8.0, 128)
            .with_band(1);
        let r = solve_volume_cell(&spec).unwrap();
        let v = r.value / 8.0;
        assert!((v - 1.6).abs() < 0.05, "{v}");
        assert!(r.diagnostics.certified);
    }

    #[test]
    fn tridiagonal_matches_nonlinear_cg() {
        // p = 2 via the direct path versus a custom copy that forces NCG.
        let f = laminate_1d();
        let fc = f.clone();
        let custom = VolumeIntegrand::custom("copy", *f.constants(), move |x, xi| fc.eval(x, xi));
        let xi = Matrix::from_rows(1, 1, vec![2.0]);
        let a = solve_volume_cell(&VolumeCellSpec::new(f, xi.clone(), vec![0.3], 2.0, 32)).unwrap();
        let b = solve_volume_cell(&VolumeCellSpec::new(custom, xi, vec![0.3], 2.0, 32)).unwrap();
        assert!((a.value - b.value).abs() < 1e-6 * a.value, "{} {}", a.value, b.value);
        assert!(a.value <= b.value + 1e-12);
    }

    #[test]
    fn pcg_matches_nonlinear_cg_in_2d() {
        let f = periodic_volume(
            Coefficient::Checkerboard {
                a: 1.0,
                b: 3.0,
                period: 1.0,
            },
            2.0,
        )
        .unwrap();
        let fc = f.clone();
        let custom = VolumeIntegrand::custom("copy", *f.constants(), move |x, xi| fc.eval(x, xi));
        let xi = Matrix::from_rows(1, 2, vec![1.0, 0.5]);
        let a = solve_volume_cell(&VolumeCellSpec::new(f, xi.clone(), vec![0.1, 0.2], 2.0, 16)).unwrap();
        let b = solve_volume_cell(&VolumeCellSpec::new(custom, xi, vec![0.1, 0.2], 2.0, 16)).unwrap();
        assert!(a.diagnostics.certified && b.diagnostics.certified);
        assert!((a.value - b.value).abs() < 1e-6 * a.value);
    }

    #[test]
    fn zero_gradient_gives_zero() {
        let r = solve_volume_cell(&VolumeCellSpec::new(
            laminate_1d(),
            Matrix::zeros(1, 1),
            vec![0.0],
            1.0,
            16,
        ))
        .unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn p_laplacian_lower_bound() {
        let f = periodic_volume(
            Coefficient::SinSquared {
                base: 1.0,
                amplitude: 2.0,
                period: 1.0,
                axis: 1,
            },
            3.0,
        )
        .unwrap();
        let xi = Matrix::from_rows(1, 2, vec![1.0, 1.0]);
        let r = solve_volume_cell(&VolumeCellSpec::new(f, xi.clone(), vec![0.0, 0.0], 1.0, 12)).unwrap();
        assert!(r.diagnostics.certified, "{:?}", r.diagnostics);
        assert!(r.value >= xi.norm().powi(3) - 1e-12);
        assert!(r.value <= 3.0 * (1.0 + xi.norm().powi(3)));
    }
}
