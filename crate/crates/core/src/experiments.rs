//! One-dimensional Mumford–Shah denoising with oscillating integrands and the
//! Γ-convergence sweep against the homogenised problem.
//!
//! Discretisation: nodal values `u_0, …, u_N` on a uniform grid of `[lo, hi]`.
//! Every cell is either regular, costing `f(x_c, (u_{i+1} − u_i)/h)·h`, or
//! cracked, costing `g(x_c, u_{i+1} − u_i, e₁)`. The fidelity term is the
//! trapezoidal rule for `∫|u − h|^p`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::UnitVector;
use crate::homogenize::{estimate_f_hom, estimate_g_hom, EstimatorOptions, RadiusSchedule};
use crate::integrands::{perturb_surface, periodic_volume, toughness, Coefficient, SurfaceIntegrand, VolumeIntegrand};
use crate::linalg::{solve_dense, Matrix};

/// Largest grid accepted by [`solve_ms_1d_exhaustive`].
pub const EXHAUSTIVE_MAX_CELLS: usize = 12;

/// Levels of the initial amplitude ladder.
pub const LADDER_LEVELS: usize = 64;

/// Data term `h` of the denoising problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Datum {
    /// `height` for `x ≥ at`, 0 before.
    Step { at: f64, height: f64 },
    /// `amplitude · sin(2π periods (x − lo)/(hi − lo))`.
    Sine { amplitude: f64, periods: f64 },
    /// Sum of a step and a sine.
    StepSine {
        at: f64,
        height: f64,
        amplitude: f64,
        periods: f64,
    },
    Constant { value: f64 },
    /// Nodal values; the grid resolution is `values.len() − 1`.
    Samples { values: Vec<f64> },
}

impl Datum {
    pub fn sample(&self, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
        let h = (hi - lo) / n as f64;
        let sine = |x: f64, amplitude: f64, periods: f64| {
            amplitude * (2.0 * std::f64::consts::PI * periods * (x - lo) / (hi - lo)).sin()
        };
        let at = |i: usize| lo + i as f64 * h;
        let values = match self {
            Datum::Step { at: s, height } => (0..=n).map(|i| if at(i) >= *s { *height } else { 0.0 }).collect(),
            Datum::Sine { amplitude, periods } => (0..=n).map(|i| sine(at(i), *amplitude, *periods)).collect(),
            Datum::StepSine {
                at: s,
                height,
                amplitude,
                periods,
            } => (0..=n)
                .map(|i| sine(at(i), *amplitude, *periods) + if at(i) >= *s { *height } else { 0.0 })
                .collect(),
            Datum::Constant { value } => vec![*value; n + 1],
            Datum::Samples { values } => {
                if values.len() != n + 1 {
                    return Err(Error::Dimension {
                        expected: n + 1,
                        got: values.len(),
                    });
                }
                values.clone()
            }
        };
        Ok(values)
    }
}

/// `min E_k(v) + ‖v − h‖_p^p` on an interval, discretised as described in
/// the module docs.
#[derive(Debug, Clone)]
pub struct DenoiseProblem {
    pub lo: f64,
    pub hi: f64,
    /// Nodal datum, `N + 1` values.
    pub datum: Vec<f64>,
    pub f: VolumeIntegrand,
    pub g: SurfaceIntegrand,
    /// Fidelity exponent.
    pub p: f64,
}

impl DenoiseProblem {
    pub fn new(lo: f64, hi: f64, datum: Vec<f64>, f: VolumeIntegrand, g: SurfaceIntegrand, p: f64) -> Result<Self> {
        let pr = DenoiseProblem { lo, hi, datum, f, g, p };
        pr.validate()?;
        Ok(pr)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hi > self.lo && self.lo.is_finite() && self.hi.is_finite()) {
            return invalid("interval must satisfy lo < hi");
        }
        if self.datum.len() < 3 {
            return invalid("at least two cells are required");
        }
        if self.datum.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("datum".into()));
        }
        if !(self.p > 1.0) {
            return invalid("fidelity exponent must exceed 1");
        }
        Ok(())
    }

    pub fn resolution(&self) -> usize {
        self.datum.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.resolution() as f64
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.spacing()
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }

    fn weights(&self) -> Vec<f64> {
        let n = self.resolution();
        let h = self.spacing();
        (0..=n).map(|i| if i == 0 || i == n { 0.5 * h } else { h }).collect()
    }

    /// Coupling `k_i` with cell energy `k_i (u_{i+1} − u_i)²`, if the problem is quadratic.
    fn couplings(&self) -> Option<Vec<f64>> {
        if self.p != 2.0 || self.f.quadratic_coefficient().is_none() {
            return None;
        }
        let h = self.spacing();
        let one = Matrix::from_rows(1, 1, vec![1.0]);
        Some((0..self.resolution()).map(|i| self.f.eval(&[self.cell_center(i)], &one) / h).collect())
    }

    fn jump_cost(&self, cell: usize, jump: f64) -> f64 {
        self.g.eval(&[self.cell_center(cell)], &[jump], &[1.0])
    }
}

/// Discrete energy of `u` with the given cracked cells.
pub fn ms_energy(problem: &DenoiseProblem, u: &[f64], cracks: &[usize]) -> Result<f64> {
    let n = problem.resolution();
    if u.len() != n + 1 {
        return Err(Error::Dimension {
            expected: n + 1,
            got: u.len(),
        });
    }
    let h = problem.spacing();
    let mut cracked = vec![false; n];
    for &c in cracks {
        if c >= n {
            return invalid(format!("crack cell {c} out of range"));
        }
        cracked[c] = true;
    }
    let mut e = 0.0;
    for i in 0..n {
        let du = u[i + 1] - u[i];
        e += if cracked[i] {
            problem.jump_cost(i, du)
        } else {
            problem.f.eval(&[problem.cell_center(i)], &Matrix::from_rows(1, 1, vec![du / h])) * h
        };
    }
    for (i, w) in problem.weights().into_iter().enumerate() {
        e += w * (u[i] - problem.datum[i]).abs().powf(problem.p);
    }
    if !e.is_finite() {
        return Err(Error::NonFinite("denoising energy".into()));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub cell: usize,
    pub position: f64,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsSolution {
    /// Energy of the returned minimiser.
    pub value: f64,
    pub u: Vec<f64>,
    pub jumps: Vec<Jump>,
    pub method: String,
    /// The best configuration uses the full jump budget and beats every
    /// configuration with fewer jumps.
    pub budget_saturated: bool,
    /// Whether the value is the exact discrete optimum (up to rounding).
    pub exact: bool,
}

impl MsSolution {
    fn build(problem: &DenoiseProblem, u: Vec<f64>, cracks: Vec<usize>, method: &str, saturated: bool, exact: bool) -> Result<Self> {
        let value = ms_energy(problem, &u, &cracks)?;
        let jumps = cracks
            .iter()
            .map(|&c| Jump {
                cell: c,
                position: problem.cell_center(c),
                size: u[c + 1] - u[c],
            })
            .collect();
        Ok(MsSolution {
            value,
            u,
            jumps,
            method: method.into(),
            budget_saturated: saturated,
            exact,
        })
    }

    pub fn cracks(&self) -> Vec<usize> {
        self.jumps.iter().map(|j| j.cell).collect()
    }
}

// ---------------------------------------------------------------------------
// Segment solvers
// ---------------------------------------------------------------------------

/// Minimiser of the quadratic chain energy on nodes `a..=b` with optional
/// clamped end values.
fn segment_quadratic(k: &[f64], w: &[f64], d: &[f64], a: usize, b: usize, start: Option<f64>, end: Option<f64>) -> Vec<f64> {
    let m = b - a + 1;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for r in 0..m {
        let i = a + r;
        let clamp = if r == 0 { start } else { None }.or(if r == m - 1 { end } else { None });
        if let Some(v) = clamp {
            diag[r] = 1.0;
            rhs[r] = v;
            continue;
        }
        diag[r] = w[i];
        rhs[r] = w[i] * d[i];
        if r > 0 {
            diag[r] += k[i - 1];
            lower[r] = -k[i - 1];
        }
        if r + 1 < m {
            diag[r] += k[i];
            upper[r] = -k[i];
        }
    }
    // Thomas algorithm
    for r in 1..m {
        let factor = lower[r] / diag[r - 1];
        diag[r] -= factor * upper[r - 1];
        rhs[r] -= factor * rhs[r - 1];
    }
    let mut u = vec![0.0; m];
    u[m - 1] = rhs[m - 1] / diag[m - 1];
    for r in (0..m - 1).rev() {
        u[r] = (rhs[r] - upper[r] * u[r + 1]) / diag[r];
    }
    u
}

/// `S(a, b)` for `b = a, …, N` by forward elimination of a free-ended chain.
fn sweep_free(k: &[f64], w: &[f64], d: &[f64], a: usize, out: &mut [f64]) {
    let n = k.len();
    // V(u) = al u² + be u + ga: best energy of nodes a..=b given u_b = u
    let (mut al, mut be, mut ga) = (w[a], -2.0 * w[a] * d[a], w[a] * d[a] * d[a]);
    out[a] = ga - be * be / (4.0 * al);
    for b in a..n {
        let (kk, wn, dn) = (k[b], w[b + 1], d[b + 1]);
        let m = al + kk;
        let ga2 = ga - be * be / (4.0 * m) + wn * dn * dn;
        be = kk * be / m - 2.0 * wn * dn;
        al = kk * al / m + wn;
        ga = ga2;
        out[b + 1] = ga - be * be / (4.0 * al);
    }
}

/// `Q(s, t) = A s² + B s t + C t² + D s + E t + F`: least energy of a chain
/// segment with start value `s` and end value `t`.
#[derive(Debug, Clone, Copy)]
struct Quad2 {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    f: f64,
}

impl Quad2 {
    /// Two-node segment `a, a+1`.
    fn pair(k: f64, w0: f64, d0: f64, w1: f64, d1: f64) -> Self {
        Quad2 {
            a: w0 + k,
            b: -2.0 * k,
            c: k + w1,
            d: -2.0 * w0 * d0,
            e: -2.0 * w1 * d1,
            f: w0 * d0 * d0 + w1 * d1 * d1,
        }
    }

    /// Appends one cell with coupling `k` and a node with weight `w`, datum `d`.
    fn extend(&self, k: f64, w: f64, d: f64) -> Self {
        let m = self.c + k;
        Quad2 {
            a: self.a - self.b * self.b / (4.0 * m),
            b: k * self.b / m,
            c: k * self.c / m + w,
            d: self.d - self.b * self.e / (2.0 * m),
            e: k * self.e / m - 2.0 * w * d,
            f: self.f - self.e * self.e / (4.0 * m) + w * d * d,
        }
    }

    #[cfg(test)]
    fn eval(&self, s: f64, t: f64) -> f64 {
        self.a * s * s + self.b * s * t + self.c * t * t + self.d * s + self.e * t + self.f
    }

    fn min_over_s(&self, t: f64) -> f64 {
        let lin = self.b * t + self.d;
        self.c * t * t + self.e * t + self.f - lin * lin / (4.0 * self.a)
    }

    fn min_over_t(&self, s: f64) -> f64 {
        let lin = self.b * s + self.e;
        self.a * s * s + self.d * s + self.f - lin * lin / (4.0 * self.c)
    }
}

/// Convex segment energy for general `f` and fidelity exponent, minimised
/// by damped Newton on the tridiagonal Hessian. Ends are free.
fn segment_general(problem: &DenoiseProblem, w: &[f64], a: usize, b: usize) -> (f64, Vec<f64>) {
    let h = problem.spacing();
    let p = problem.p;
    let d = &problem.datum;
    let m = b - a + 1;
    let xc: Vec<f64> = (a..b).map(|i| problem.cell_center(i)).collect();
    let mat = |v: f64| Matrix::from_rows(1, 1, vec![v]);
    let energy = |u: &[f64]| -> f64 {
        let mut e = 0.0;
        for r in 0..m - 1 {
            e += problem.f.eval(&[xc[r]], &mat((u[r + 1] - u[r]) / h)) * h;
        }
        for r in 0..m {
            e += w[a + r] * (u[r] - d[a + r]).abs().powf(p);
        }
        e
    };
    let mut u: Vec<f64> = d[a..=b].to_vec();
    let mut e = energy(&u);
    for _ in 0..200 {
        let mut grad = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m.saturating_sub(1)];
        for r in 0..m - 1 {
            let xi = (u[r + 1] - u[r]) / h;
            let d1 = problem.f.grad_xi(&[xc[r]], &mat(xi)).data[0];
            let delta = 1e-6 * xi.abs().max(1.0);
            let d2 = (problem.f.grad_xi(&[xc[r]], &mat(xi + delta)).data[0]
                - problem.f.grad_xi(&[xc[r]], &mat(xi - delta)).data[0])
                / (2.0 * delta);
            let d2 = d2.max(1e-12) / h;
            grad[r] -= d1;
            grad[r + 1] += d1;
            diag[r] += d2;
            diag[r + 1] += d2;
            off[r] -= d2;
        }
        for r in 0..m {
            let res = u[r] - d[a + r];
            let ar = res.abs().max(1e-9);
            grad[r] += w[a + r] * p * ar.powf(p - 1.0) * res.signum();
            diag[r] += w[a + r] * p * (p - 1.0) * ar.powf(p - 2.0);
        }
        let gnorm = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        if gnorm <= 1e-11 * (1.0 + e) {
            break;
        }
        // Newton direction via Thomas on the (SPD) Hessian
        let mut dg = diag.clone();
        let mut rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
        for r in 1..m {
            let factor = off[r - 1] / dg[r - 1];
            dg[r] -= factor * off[r - 1];
            rhs[r] -= factor * rhs[r - 1];
        }
        let mut step = vec![0.0; m];
        step[m - 1] = rhs[m - 1] / dg[m - 1];
        for r in (0..m - 1).rev() {
            step[r] = (rhs[r] - off[r] * step[r + 1]) / dg[r];
        }
        let slope: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(x, s)| x + t * s).collect();
            let et = energy(&trial);
            if et <= e + 1e-4 * t * slope {
                u = trial;
                e = et;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (e, u)
}

// ---------------------------------------------------------------------------
// Dynamic programs
// ---------------------------------------------------------------------------

/// Best value over jump counts, with saturation flag.
fn pick_budget(best: &[f64]) -> (usize, bool) {
    let mut j_best = 0;
    for j in 1..best.len() {
        if best[j] < best[j_best] {
            j_best = j;
        }
    }
    let saturated = best.len() > 1 && j_best == best.len() - 1;
    (j_best, saturated)
}

/// Exact DP over crack positions for jump costs independent of the amplitude.
fn dp_independent(problem: &DenoiseProblem, budget: usize) -> Result<MsSolution> {
    let n = problem.resolution();
    let w = problem.weights();
    let d = &problem.datum;
    let couplings = problem.couplings();
    // seg[a][b] for a ≤ b
    let seg: Vec<Vec<f64>> = (0..=n)
        .into_par_iter()
        .map(|a| {
            let mut row = vec![f64::INFINITY; n + 1];
            match &couplings {
                Some(k) => sweep_free(k, &w, d, a, &mut row),
                None => {
                    for (b, slot) in row.iter_mut().enumerate().skip(a) {
                        *slot = segment_general(problem, &w, a, b).0;
                    }
                }
            }
            row
        })
        .collect();
    let kappa: Vec<f64> = (0..n).map(|c| problem.jump_cost(c, 1.0)).collect();

    let mut table = vec![seg[0].clone()];
    let mut back: Vec<Vec<usize>> = vec![vec![0; n + 1]];
    for j in 1..=budget.min(n) {
        let prev = &table[j - 1];
        let mut cur = vec![f64::INFINITY; n + 1];
        let mut arg = vec![usize::MAX; n + 1];
        for a in 1..=n {
            let base = prev[a - 1] + kappa[a - 1];
            if !base.is_finite() {
                continue;
            }
            for b in a..=n {
                let v = base + seg[a][b];
                if v < cur[b] {
                    cur[b] = v;
                    arg[b] = a;
                }
            }
        }
        table.push(cur);
        back.push(arg);
    }
    let best: Vec<f64> = table.iter().map(|row| row[n]).collect();
    let (j_best, saturated) = pick_budget(&best);

    // Segment boundaries, then nodal values per segment.
    let mut starts = Vec::new();
    let mut b = n;
    for j in (1..=j_best).rev() {
        let a = back[j][b];
        starts.push(a);
        b = a - 1;
    }
    starts.reverse();
    let cracks: Vec<usize> = starts.iter().map(|a| a - 1).collect();
    let mut bounds = vec![0];
    bounds.extend(&starts);
    bounds.push(n + 1);
    let mut u = Vec::with_capacity(n + 1);
    for s in bounds.windows(2) {
        let (a, b) = (s[0], s[1] - 1);
        let part = match &couplings {
            Some(k) => segment_quadratic(k, &w, d, a, b, None, None),
            None => segment_general(problem, &w, a, b).1,
        };
        u.extend(part);
    }
    let method = if couplings.is_some() { "dp-quadratic" } else { "dp-newton" };
    MsSolution::build(problem, u, cracks, method, saturated, true)
}

#[derive(Clone, Copy)]
enum Back {
    /// First segment `[0, b]` with free start.
    First,
    /// Segment `[a, b]` starting at level `s`.
    After { a: u32, s: u16 },
}

struct LadderOutcome {
    value: f64,
    /// `(a, b, start, end)` for each segment, left to right.
    segments: Vec<(usize, usize, Option<f64>, Option<f64>)>,
    saturated: bool,
}

/// DP over crack positions and amplitude levels at segment ends, for
/// quadratic problems with amplitude-dependent jump costs.
fn ladder_dp(problem: &DenoiseProblem, k: &[f64], levels: &[f64], budget: usize) -> LadderOutcome {
    let n = problem.resolution();
    let w = problem.weights();
    let d = &problem.datum;
    let nl = levels.len();
    let idx = |b: usize, t: usize| b * nl + t;

    // Layer 0: the first segment [0, b] ends at level t.
    let mut d0 = vec![f64::INFINITY; (n + 1) * nl];
    for t in 0..nl {
        d0[idx(0, t)] = w[0] * (levels[t] - d[0]).powi(2);
    }
    let mut q = Quad2::pair(k[0], w[0], d[0], w[1], d[1]);
    for b in 1..=n {
        if b > 1 {
            q = q.extend(k[b - 1], w[b], d[b]);
        }
        for t in 0..nl {
            d0[idx(b, t)] = q.min_over_s(levels[t]);
        }
    }
    let mut no_crack = vec![0.0; n + 1];
    sweep_free(k, &w, d, 0, &mut no_crack);

    let mut tables = vec![d0];
    let mut backs: Vec<Vec<Back>> = vec![vec![Back::First; (n + 1) * nl]];
    let mut mbacks: Vec<Vec<u16>> = vec![Vec::new()];
    // finals[j] = (value, a, s, single-node?)
    let mut finals: Vec<(f64, usize, usize)> = vec![(no_crack[n], 0, 0)];

    for j in 1..=budget.min(n) {
        let prev = &tables[j - 1];
        let mut cur = vec![f64::INFINITY; (n + 1) * nl];
        let mut back = vec![Back::First; (n + 1) * nl];
        let mut mback = vec![0u16; (n + 1) * nl];
        let mut fin = (f64::INFINITY, 0, 0);
        let mut mvals = vec![f64::INFINITY; nl];
        for a in 1..=n {
            // M[s]: best energy up to node a−1 plus the crack in cell a−1, given u_a = L_s.
            let cell = a - 1;
            for s in 0..nl {
                let mut best = f64::INFINITY;
                let mut arg = 0;
                for l in 0..nl {
                    let v = prev[idx(a - 1, l)];
                    if !v.is_finite() {
                        continue;
                    }
                    let c = v + problem.jump_cost(cell, levels[s] - levels[l]);
                    if c < best {
                        best = c;
                        arg = l;
                    }
                }
                mvals[s] = best;
                mback[idx(a, s)] = arg as u16;
            }
            if !mvals.iter().any(|v| v.is_finite()) {
                continue;
            }
            // single-node segment [a, a]
            for t in 0..nl {
                let v = mvals[t] + w[a] * (levels[t] - d[a]).powi(2);
                if v < cur[idx(a, t)] {
                    cur[idx(a, t)] = v;
                    back[idx(a, t)] = Back::After { a: a as u32, s: t as u16 };
                }
                if a == n && v < fin.0 {
                    fin = (v, a, t);
                }
            }
            if a == n {
                continue;
            }
            let mut q = Quad2::pair(k[a], w[a], d[a], w[a + 1], d[a + 1]);
            for b in a + 1..=n {
                if b > a + 1 {
                    q = q.extend(k[b - 1], w[b], d[b]);
                }
                let base: Vec<f64> = (0..nl)
                    .map(|s| mvals[s] + q.a * levels[s] * levels[s] + q.d * levels[s])
                    .collect();
                for t in 0..nl {
                    let lt = levels[t];
                    let rest = q.c * lt * lt + q.e * lt + q.f;
                    let mut best = f64::INFINITY;
                    let mut arg = 0;
                    for s in 0..nl {
                        let v = base[s] + q.b * levels[s] * lt;
                        if v < best {
                            best = v;
                            arg = s;
                        }
                    }
                    let v = best + rest;
                    if v < cur[idx(b, t)] {
                        cur[idx(b, t)] = v;
                        back[idx(b, t)] = Back::After { a: a as u32, s: arg as u16 };
                    }
                }
                if b == n {
                    for s in 0..nl {
                        let v = mvals[s] + q.min_over_t(levels[s]);
                        if v < fin.0 {
                            fin = (v, a, s);
                        }
                    }
                }
            }
        }
        tables.push(cur);
        backs.push(back);
        mbacks.push(mback);
        finals.push(fin);
    }

    let best: Vec<f64> = finals.iter().map(|f| f.0).collect();
    let (j_best, saturated) = pick_budget(&best);
    let mut segments = Vec::new();
    if j_best == 0 {
        segments.push((0, n, None, None));
    } else {
        let (_, a, s) = finals[j_best];
        segments.push((a, n, Some(levels[s]), if a == n { Some(levels[s]) } else { None }));
        let mut end_level = mbacks[j_best][idx(a, s)] as usize;
        let mut b = a - 1;
        for j in (0..j_best).rev() {
            match backs[j][idx(b, end_level)] {
                Back::First => {
                    segments.push((0, b, None, Some(levels[end_level])));
                }
                Back::After { a, s } => {
                    let (a, s) = (a as usize, s as usize);
                    segments.push((a, b, Some(levels[s]), Some(levels[end_level])));
                    end_level = mbacks[j][idx(a, s)] as usize;
                    b = a - 1;
                }
            }
        }
        segments.reverse();
    }
    LadderOutcome {
        value: best[j_best],
        segments,
        saturated,
    }
}

fn ladder(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

fn ladder_solution(problem: &DenoiseProblem, k: &[f64], levels: &[f64], budget: usize) -> Result<(MsSolution, Vec<f64>)> {
    let out = ladder_dp(problem, k, levels, budget);
    let w = problem.weights();
    let mut u = Vec::with_capacity(problem.resolution() + 1);
    let mut cracks = Vec::new();
    let mut used = Vec::new();
    for &(a, b, start, end) in &out.segments {
        if a > 0 {
            cracks.push(a - 1);
        }
        used.extend(start);
        used.extend(end);
        u.extend(segment_quadratic(k, &w, &problem.datum, a, b, start, end));
    }
    let sol = MsSolution::build(problem, u, cracks, "dp-ladder", out.saturated, false)?;
    debug_assert!((sol.value - out.value).abs() <= 1e-8 * (1.0 + out.value.abs()));
    Ok((sol, used))
}

/// Minimises the denoising energy with at most `budget` cracked cells.
///
/// Jump costs independent of the amplitude give the exact discrete optimum
/// (tridiagonal segment solves for quadratic problems, Newton otherwise).
/// Amplitude-dependent costs need a quadratic problem and are handled on an
/// amplitude ladder spanning the datum range, refined once around the
/// levels the first pass used.
pub fn solve_ms_1d(problem: &DenoiseProblem, budget: usize) -> Result<MsSolution> {
    problem.validate()?;
    if problem.g.is_amplitude_independent() {
        return dp_independent(problem, budget);
    }
    let k = problem
        .couplings()
        .ok_or_else(|| Error::InvalidParameter("amplitude-dependent jump costs need a quadratic problem (p = 2)".into()))?;
    let lo = problem.datum.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = problem.datum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi - lo < 1e-12 { (lo - 1.0, hi + 1.0) } else { (lo, hi) };
    let levels = ladder(lo, hi, LADDER_LEVELS);
    let (first, used) = ladder_solution(problem, &k, &levels, budget)?;

    let step = (hi - lo) / (LADDER_LEVELS - 1) as f64;
    let mut refined = levels.clone();
    for v in used {
        refined.extend((-8..=8).map(|i| v + step * i as f64 / 8.0));
    }
    refined.sort_by(f64::total_cmp);
    refined.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    let (second, _) = ladder_solution(problem, &k, &refined, budget)?;
    Ok(if second.value <= first.value { second } else { first })
}

fn combinations(n: usize, max: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, max, &mut Vec::new(), &mut out);
    out
}

/// Exact minimum over every set of at most `budget` cracked cells, by a
/// dense solve per configuration (and per sign pattern of the jumps when
/// the jump cost grows linearly in `|ζ|`). Needs `p = 2`, quadratic `f`,
/// `N ≤ 12` and jump costs of the form `c₀ + c₁|ζ|`.
pub fn solve_ms_1d_exhaustive(problem: &DenoiseProblem, budget: usize) -> Result<MsSolution> {
    problem.validate()?;
    let n = problem.resolution();
    if n > EXHAUSTIVE_MAX_CELLS {
        return invalid(format!("exhaustive enumeration is limited to {EXHAUSTIVE_MAX_CELLS} cells, got {n}"));
    }
    let k = problem
        .couplings()
        .ok_or_else(|| Error::InvalidParameter("exhaustive oracle needs a quadratic problem".into()))?;
    let w = problem.weights();
    let d = &problem.datum;
    // c₀ + c₁|ζ| per cell
    let slope: Vec<f64> = (0..n)
        .map(|c| {
            let c0 = problem.jump_cost(c, 0.0);
            let c1 = problem.jump_cost(c, 1.0) - c0;
            let probe = problem.jump_cost(c, -2.5);
            if (probe - (c0 + 2.5 * c1)).abs() > 1e-12 * (1.0 + probe.abs()) {
                return invalid("exhaustive oracle needs jump costs affine in |ζ|");
            }
            Ok(c1)
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
    for cracks in combinations(n, budget) {
        let linear = cracks.iter().any(|&c| slope[c] != 0.0);
        let patterns = if linear { 3usize.pow(cracks.len() as u32) } else { 1 };
        for pat in 0..patterns {
            // sign ∈ {−1, 0, +1}; 0 ties the two nodes of the cell.
            let signs: Vec<i32> = (0..cracks.len())
                .map(|i| if linear { (pat / 3usize.pow(i as u32) % 3) as i32 - 1 } else { 1 })
                .collect();
            let mut var = vec![0usize; n + 1];
            for i in 1..=n {
                let tied = cracks.iter().zip(&signs).any(|(&c, &s)| c == i - 1 && s == 0);
                var[i] = if tied { var[i - 1] } else { var[i - 1] + 1 };
            }
            let nv = var[n] + 1;
            let mut mat = vec![0.0; nv * nv];
            let mut rhs = vec![0.0; nv];
            for i in 0..=n {
                mat[var[i] * nv + var[i]] += w[i];
                rhs[var[i]] += w[i] * d[i];
            }
            for i in 0..n {
                let (p, q) = (var[i], var[i + 1]);
                if let Some(pos) = cracks.iter().position(|&c| c == i) {
                    // ½∇ of σ c₁ (u_q − u_p)
                    let lin = 0.5 * signs[pos] as f64 * slope[i];
                    if p != q {
                        rhs[q] -= lin;
                        rhs[p] += lin;
                    }
                } else {
                    mat[p * nv + p] += k[i];
                    mat[q * nv + q] += k[i];
                    mat[p * nv + q] -= k[i];
                    mat[q * nv + p] -= k[i];
                }
            }
            let Some(x) = solve_dense(mat, rhs) else { continue };
            let u: Vec<f64> = var.iter().map(|&v| x[v]).collect();
            let consistent = cracks.iter().zip(&signs).all(|(&c, &s)| {
                let jump = u[c + 1] - u[c];
                match s {
                    1 => jump >= 0.0 || !linear,
                    -1 => jump <= 0.0,
                    _ => true,
                }
            });
            if !consistent {
                continue;
            }
            let e = ms_energy(problem, &u, &cracks)?;
            if best.as_ref().is_none_or(|(b, _, _)| e < *b) {
                best = Some((e, u, cracks.clone()));
            }
        }
    }
    let (_, u, cracks) = best.ok_or_else(|| Error::Internal("no admissible configuration".into()))?;
    let saturated = cracks.len() == budget && budget > 0;
    MsSolution::build(problem, u, cracks, "exhaustive", saturated, true)
}

// ---------------------------------------------------------------------------
// Γ-convergence sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lo: f64,
    pub hi: f64,
    pub datum: Datum,
    /// Decreasing scales `ε_k`.
    pub eps: Vec<f64>,
    /// Grid cells per period of the rescaled integrands.
    pub density: usize,
    /// Maximum number of jumps.
    pub budget: usize,
    /// Schedule for the `f_hom`, `g_hom` estimates.
    pub hom_schedule: RadiusSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub resolution: usize,
    pub value: f64,
    pub jumps: Vec<Jump>,
    pub budget_saturated: bool,
    pub hom_value: f64,
    /// `|value − hom_value| / hom_value`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// `f̂_hom(1)`, the coefficient of `|ξ|^p`.
    pub f_hom: f64,
    /// `ĝ_hom(1, e₁)`.
    pub g_hom: f64,
    pub hom_resolution: usize,
    pub hom_value: f64,
    pub hom_jumps: Vec<Jump>,
    /// Whether the gap decreases along the schedule (reported only).
    pub gap_monotone: bool,
}

/// Homogenised integrands of one-dimensional built-in families: `f_hom(ξ) =
/// f̂(1)|ξ|^p` and `g_hom(ζ) = K h(|ζ|) + δ|ζ|` with `K` from `ĝ(1, e₁)`.
pub fn homogenised_1d(
    f: &VolumeIntegrand,
    g: &SurfaceIntegrand,
    schedule: &RadiusSchedule,
) -> Result<(VolumeIntegrand, SurfaceIntegrand, f64, f64)> {
    let opts = EstimatorOptions::default();
    let xi = Matrix::from_rows(1, 1, vec![1.0]);
    let fh = estimate_f_hom(f, &xi, &[vec![0.0]], schedule, &opts)?.limit;
    let gh = estimate_g_hom(g, &[1.0], &UnitVector::basis(1, 0), &[vec![0.0]], schedule, &opts)?.limit;
    let profile = g
        .profile()
        .ok_or_else(|| Error::InvalidParameter("homogenised surface term needs a toughness family".into()))?;
    let delta = g.perturbation();
    let kappa = (gh - delta) / profile.eval(1.0);
    let f_hom = periodic_volume(Coefficient::constant(fh), f.constants().p)?;
    let mut g_hom = toughness(Coefficient::constant(kappa), profile)?;
    if delta > 0.0 {
        g_hom = perturb_surface(&g_hom, delta)?;
    }
    Ok((f_hom, g_hom, fh, gh))
}

/// Solves the denoising problem for each `f(·/ε_k)`, `g(·/ε_k)` and for the
/// homogenised integrands, and reports the value gaps.
pub fn gamma_convergence_sweep(f: &VolumeIntegrand, g: &SurfaceIntegrand, cfg: &SweepConfig) -> Result<SweepResult> {
    if cfg.eps.is_empty() || cfg.eps.windows(2).any(|w| w[0] <= w[1]) || cfg.eps.iter().any(|e| *e <= 0.0) {
        return invalid("ε schedule must be positive and strictly decreasing");
    }
    let period = match (f.period(), g.period()) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => 1.0,
    };
    let resolution = |eps: f64| (((cfg.hi - cfg.lo) / (eps * period) * cfg.density as f64).ceil() as usize).max(16);
    let p = f.constants().p;

    let (f_hom, g_hom, fh, gh) = homogenised_1d(f, g, &cfg.hom_schedule)?;
    let hom_resolution = resolution(*cfg.eps.last().expect("nonempty"));
    let hom_problem = DenoiseProblem::new(
        cfg.lo,
        cfg.hi,
        cfg.datum.sample(cfg.lo, cfg.hi, hom_resolution)?,
        f_hom,
        g_hom,
        p,
    )?;
    let hom = solve_ms_1d(&hom_problem, cfg.budget)?;

    let rows = cfg
        .eps
        .par_iter()
        .map(|&eps| {
            let n = resolution(eps);
            let problem = DenoiseProblem::new(cfg.lo, cfg.hi, cfg.datum.sample(cfg.lo, cfg.hi, n)?, f.rescaled(eps), g.rescaled(eps), p)?;
            let sol = solve_ms_1d(&problem, cfg.budget)?;
            Ok(SweepRow {
                eps,
                resolution: n,
                value: sol.value,
                budget_saturated: sol.budget_saturated,
                gap: (sol.value - hom.value).abs() / hom.value.abs().max(f64::MIN_POSITIVE),
                jumps: sol.jumps,
                hom_value: hom.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gap_monotone = rows.windows(2).all(|w| w[1].gap <= w[0].gap);
    Ok(SweepResult {
        rows,
        f_hom: fh,
        g_hom: gh,
        hom_resolution,
        hom_value: hom.value,
        hom_jumps: hom.jumps,
        gap_monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::{laminate_toughness, mumford_shah_surface, mumford_shah_volume, JumpProfile};

    fn laminate_f() -> VolumeIntegrand {
        periodic_volume(
            Coefficient::Laminate {
                a: 1.0,
                b: 4.0,
                period: 0.25,
                normal: vec![1.0],
            },
            2.0,
        )
        .unwrap()
    }

    fn problem(n: usize, datum: Datum, f: VolumeIntegrand, g: SurfaceIntegrand) -> DenoiseProblem {
        DenoiseProblem::new(0.0, 1.0, datum.sample(0.0, 1.0, n).unwrap(), f, g, 2.0).unwrap()
    }

    #[test]
    fn constant_datum_is_its_own_minimiser() {
        let pr = problem(20, Datum::Constant { value: 0.7 }, laminate_f(), mumford_shah_surface(1.0).unwrap());
        let sol = solve_ms_1d(&pr, 2).unwrap();
        assert!(sol.value.abs() < 1e-14);
        assert!(sol.jumps.is_empty());
    }

    #[test]
    fn step_keeps_one_jump_when_cheap() {
        let step = Datum::Step { at: 0.5, height: 1.0 };
        let cheap = problem(64, step.clone(), mumford_shah_volume(2.0).unwrap(), mumford_shah_surface(0.05).unwrap());
        let sol = solve_ms_1d(&cheap, 3).unwrap();
        assert_eq!(sol.cracks(), vec![31]);
        assert!((sol.value - 0.05).abs() < 1e-12);
        let dear = problem(64, step, mumford_shah_volume(2.0).unwrap(), mumford_shah_surface(5.0).unwrap());
        assert!(solve_ms_1d(&dear, 3).unwrap().jumps.is_empty());
    }

    #[test]
    fn sweep_matches_tridiagonal_reconstruction() {
        let pr = problem(
            40,
            Datum::StepSine {
                at: 0.4,
                height: 1.0,
                amplitude: 0.3,
                periods: 2.0,
            },
            laminate_f(),
            mumford_shah_surface(0.1).unwrap(),
        );
        let sol = solve_ms_1d(&pr, 2).unwrap();
        let e = ms_energy(&pr, &sol.u, &sol.cracks()).unwrap();
        assert_eq!(e, sol.value);
    }

    #[test]
    fn dp_matches_exhaustive_for_constant_profile() {
        let g = toughness(
            Coefficient::Laminate {
                a: 0.3,
                b: 0.1,
                period: 0.3,
                normal: vec![1.0],
            },
            JumpProfile::Constant,
        )
        .unwrap();
        for n in [4, 7, 12] {
            let pr = problem(n, Datum::StepSine { at: 0.45, height: 1.0, amplitude: 0.5, periods: 1.5 }, laminate_f(), g.clone());
            for budget in 0..=2 {
                let a = solve_ms_1d(&pr, budget).unwrap().value;
                let b = solve_ms_1d_exhaustive(&pr, budget).unwrap().value;
                assert!((a - b).abs() <= 1e-12 * b, "n={n} J={budget}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ladder_is_close_to_exhaustive_for_affine_profile() {
        let g = laminate_toughness(0.2, 0.05, 0.3, vec![1.0]).unwrap();
        for n in [6, 10] {
            let pr = problem(n, Datum::Step { at: 0.5, height: 1.0 }, laminate_f(), g.clone());
            let a = solve_ms_1d(&pr, 2).unwrap().value;
            let b = solve_ms_1d_exhaustive(&pr, 2).unwrap().value;
            assert!(a >= b - 1e-12 && a <= b * 1.01, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn clamped_segment_forms_match_direct_solves() {
        let pr = problem(9, Datum::Sine { amplitude: 1.0, periods: 1.0 }, laminate_f(), mumford_shah_surface(1.0).unwrap());
        let k = pr.couplings().unwrap();
        let w = pr.weights();
        let d = &pr.datum;
        let chain = |a: usize, u: &[f64]| -> f64 {
            let mut e: f64 = u.iter().enumerate().map(|(r, v)| w[a + r] * (v - d[a + r]).powi(2)).sum();
            for r in 0..u.len() - 1 {
                e += k[a + r] * (u[r + 1] - u[r]).powi(2);
            }
            e
        };
        let (a, s, t) = (2, 0.3, -0.4);
        let mut q = Quad2::pair(k[a], w[a], d[a], w[a + 1], d[a + 1]);
        for b in a + 1..=9 {
            if b > a + 1 {
                q = q.extend(k[b - 1], w[b], d[b]);
            }
            let both = segment_quadratic(&k, &w, d, a, b, Some(s), Some(t));
            assert!((q.eval(s, t) - chain(a, &both)).abs() < 1e-12);
            let free_end = segment_quadratic(&k, &w, d, a, b, Some(s), None);
            assert!((q.min_over_t(s) - chain(a, &free_end)).abs() < 1e-12);
            let free_start = segment_quadratic(&k, &w, d, a, b, None, Some(t));
            assert!((q.min_over_s(t) - chain(a, &free_start)).abs() < 1e-12);
        }
    }

    #[test]
    fn newton_fallback_agrees_with_quadratic_path() {
        // p = 3 fidelity has no closed form; compare against the exhaustive-free general solver on p = 2.
        let g = mumford_shah_surface(0.2).unwrap();
        let datum = Datum::Step { at: 0.5, height: 1.0 };
        let quad = problem(16, datum.clone(), laminate_f(), g.clone());
        let w = quad.weights();
        let (e, _) = segment_general(&quad, &w, 0, 16);
        let mut s = vec![0.0; 17];
        sweep_free(&quad.couplings().unwrap(), &w, &quad.datum, 0, &mut s);
        assert!((e - s[16]).abs() < 1e-9 * s[16]);
        let cubic = DenoiseProblem::new(0.0, 1.0, datum.sample(0.0, 1.0, 16).unwrap(), mumford_shah_volume(3.0).unwrap(), g, 3.0).unwrap();
        let sol = solve_ms_1d(&cubic, 1).unwrap();
        assert_eq!(sol.method, "dp-newton");
        assert!(sol.value <= ms_energy(&cubic, &cubic.datum, &[]).unwrap());
    }
}
