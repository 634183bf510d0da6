//! Large-cell estimators of `f_hom` and `g_hom`, the `f′/f″/g′/g″`
//! diagnostics, the rescaling identities and the monotonicity profiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::{solve_surface_cell, solve_volume_cell, SolverOptions, Stencil, SurfaceCellSpec, VolumeCellSpec};
use crate::error::{invalid, Error, Result};
use crate::geometry::UnitVector;
use crate::integrands::{SurfaceIntegrand, VolumeIntegrand};
use crate::linalg::{norm, Matrix};

/// Increasing cube radii, measured in periods of the integrand, and the
/// number of grid cells per period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusSchedule {
    pub radii: Vec<f64>,
    pub density: usize,
}

impl RadiusSchedule {
    pub fn new(radii: Vec<f64>, density: usize) -> Result<Self> {
        let s = RadiusSchedule { radii, density };
        s.validate()?;
        Ok(s)
    }

    /// Powers of two `2^lo, …, 2^hi`.
    pub fn dyadic(lo: i32, hi: i32, density: usize) -> Result<Self> {
        Self::new((lo..=hi).map(|k| 2f64.powi(k)).collect(), density)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.len() < 3 {
            return invalid("a radius schedule needs at least three radii");
        }
        if self.density < 8 {
            return invalid(format!("density must be at least 8 cells per period, got {}", self.density));
        }
        if self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return invalid("radii must be positive and finite");
        }
        if self.radii.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("radii must be strictly increasing");
        }
        Ok(())
    }

    /// Grid resolution for radius `r`.
    pub fn resolution(&self, r: f64) -> usize {
        ((r * self.density as f64).round() as usize).max(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    /// Mean of the last two normalised values.
    #[default]
    Average,
    /// First order in `1/r` through the last two values.
    Richardson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorOptions {
    pub band_width: usize,
    pub extrapolation: Extrapolation,
    pub stencil: Stencil,
    pub solver: SolverOptions,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            band_width: 1,
            extrapolation: Extrapolation::Average,
            stencil: Stencil::Sixteen,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusSample {
    /// Index into [`HomEstimate::base_points`].
    pub point: usize,
    /// Radius in periods.
    pub r: f64,
    pub side: f64,
    pub resolution: usize,
    pub value: f64,
    pub normalised: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomEstimate {
    /// `"f_hom"` or `"g_hom"`.
    pub kind: String,
    pub base_points: Vec<Vec<f64>>,
    /// Sorted by base point, then radius.
    pub samples: Vec<RadiusSample>,
    /// Extrapolated limit per base point.
    pub point_limits: Vec<f64>,
    /// Mean of `point_limits`.
    pub limit: f64,
    /// `(max − min) / |mean|` of `point_limits`; 0 for a single base point.
    pub x_spread: f64,
    /// All inner solves certified.
    pub converged: bool,
}

impl HomEstimate {
    /// Normalised values at base point `point`, by increasing radius.
    pub fn values(&self, point: usize) -> Vec<f64> {
        self.samples.iter().filter(|s| s.point == point).map(|s| s.normalised).collect()
    }

    pub fn final_value(&self, point: usize) -> f64 {
        *self.values(point).last().expect("nonempty schedule")
    }
}

/// Extrapolated limit of `values` sampled at `radii`.
pub fn extrapolate(radii: &[f64], values: &[f64], method: Extrapolation) -> f64 {
    let k = values.len();
    if k == 1 {
        return values[0];
    }
    let (r1, r2, v1, v2) = (radii[k - 2], radii[k - 1], values[k - 2], values[k - 1]);
    match method {
        Extrapolation::Average => 0.5 * (v1 + v2),
        Extrapolation::Richardson => (r2 * v2 - r1 * v1) / (r2 - r1),
    }
}

fn spread(limits: &[f64]) -> f64 {
    if limits.len() < 2 {
        return 0.0;
    }
    let lo = limits.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = limits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = limits.iter().sum::<f64>() / limits.len() as f64;
    if mean == 0.0 {
        hi - lo
    } else {
        (hi - lo) / mean.abs()
    }
}

fn assemble(
    kind: &str,
    points: &[Vec<f64>],
    schedule: &RadiusSchedule,
    samples: Vec<RadiusSample>,
    method: Extrapolation,
) -> HomEstimate {
    let point_limits: Vec<f64> = (0..points.len())
        .map(|p| {
            let vals: Vec<f64> = samples.iter().filter(|s| s.point == p).map(|s| s.normalised).collect();
            extrapolate(&schedule.radii, &vals, method)
        })
        .collect();
    let limit = point_limits.iter().sum::<f64>() / point_limits.len() as f64;
    HomEstimate {
        kind: kind.into(),
        base_points: points.to_vec(),
        converged: samples.iter().all(|s| s.certified),
        samples,
        x_spread: spread(&point_limits),
        point_limits,
        limit,
    }
}

fn jobs(points: usize, schedule: &RadiusSchedule) -> Vec<(usize, f64)> {
    (0..points)
        .flat_map(|p| schedule.radii.iter().map(move |&r| (p, r)))
        .collect()
}

fn check_points(points: &[Vec<f64>], n: usize) -> Result<()> {
    if points.is_empty() {
        return invalid("at least one base point is required");
    }
    for x in points {
        if x.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: x.len(),
            });
        }
    }
    Ok(())
}

/// `m^{1,p}(ℓ_ξ, Q_r(r x)) / rⁿ` over the schedule, at each base point `x`.
/// Radii and base points are in units of the integrand's period (1 for
/// x-independent integrands).
pub fn estimate_f_hom(
    f: &VolumeIntegrand,
    xi: &Matrix,
    points: &[Vec<f64>],
    schedule: &RadiusSchedule,
    options: &EstimatorOptions,
) -> Result<HomEstimate> {
    schedule.validate()?;
    check_points(points, xi.cols)?;
    let period = f.period().unwrap_or(1.0);
    let n = xi.cols as i32;
    let samples = jobs(points.len(), schedule)
        .into_par_iter()
        .map(|(p, r)| {
            let side = r * period;
            let resolution = schedule.resolution(r);
            let center = points[p].iter().map(|c| c * side).collect();
            let mut spec = VolumeCellSpec::new(f.clone(), xi.clone(), center, side, resolution)
                .with_band(options.band_width);
            spec.options = options.solver.clone();
            let res = solve_volume_cell(&spec)?;
            Ok(RadiusSample {
                point: p,
                r,
                side,
                resolution,
                value: res.value,
                normalised: res.value / side.powi(n),
                certified: res.diagnostics.certified,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble("f_hom", points, schedule, samples, options.extrapolation))
}

/// `m^pc(u_{rx,ζ,ν}, Q^ν_r(r x)) / r^{n−1}` over the schedule.
pub fn estimate_g_hom(
    g: &SurfaceIntegrand,
    zeta: &[f64],
    nu: &UnitVector,
    points: &[Vec<f64>],
    schedule: &RadiusSchedule,
    options: &EstimatorOptions,
) -> Result<HomEstimate> {
    schedule.validate()?;
    check_points(points, nu.dim())?;
    let period = g.period().unwrap_or(1.0);
    let n = nu.dim() as i32;
    let stencil = if n == 1 { Stencil::Axis } else { options.stencil };
    let samples = jobs(points.len(), schedule)
        .into_par_iter()
        .map(|(p, r)| {
            let side = r * period;
            let resolution = schedule.resolution(r);
            let center = points[p].iter().map(|c| c * side).collect();
            let spec = SurfaceCellSpec::new(g.clone(), zeta.to_vec(), nu.clone(), center, side, resolution)
                .with_band(options.band_width)
                .with_stencil(stencil);
            let res = solve_surface_cell(&spec)?;
            Ok(RadiusSample {
                point: p,
                r,
                side,
                resolution,
                value: res.value,
                normalised: res.value / side.powi(n - 1),
                certified: res.diagnostics.certified,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble("g_hom", points, schedule, samples, options.extrapolation))
}

/// A cell problem posed for a whole family `f_k = f(·/ε_k)`.
#[derive(Debug, Clone)]
pub enum CellProblem {
    Volume {
        f: VolumeIntegrand,
        xi: Matrix,
    },
    Surface {
        g: SurfaceIntegrand,
        zeta: Vec<f64>,
        nu: UnitVector,
        stencil: Stencil,
    },
}

impl CellProblem {
    pub fn dim(&self) -> usize {
        match self {
            CellProblem::Volume { xi, .. } => xi.cols,
            CellProblem::Surface { nu, .. } => nu.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CellProblem::Volume { .. } => "volume",
            CellProblem::Surface { .. } => "surface",
        }
    }

    fn period(&self) -> f64 {
        match self {
            CellProblem::Volume { f, .. } => f.period(),
            CellProblem::Surface { g, .. } => g.period(),
        }
        .unwrap_or(1.0)
    }

    /// Power of the side length used for normalisation.
    fn homogeneity(&self) -> i32 {
        match self {
            CellProblem::Volume { xi, .. } => xi.cols as i32,
            CellProblem::Surface { nu, .. } => nu.dim() as i32 - 1,
        }
    }

    /// The same problem for the integrand rescaled by `eps`.
    pub fn rescaled(&self, eps: f64) -> CellProblem {
        match self {
            CellProblem::Volume { f, xi } => CellProblem::Volume {
                f: f.rescaled(eps),
                xi: xi.clone(),
            },
            CellProblem::Surface { g, zeta, nu, stencil } => CellProblem::Surface {
                g: g.rescaled(eps),
                zeta: zeta.clone(),
                nu: nu.clone(),
                stencil: *stencil,
            },
        }
    }

    /// Solves on the cube of side `side` centred at `center`; returns value
    /// and certification flag.
    pub fn solve(&self, center: Vec<f64>, side: f64, resolution: usize, band: usize) -> Result<(f64, bool)> {
        let res = match self {
            CellProblem::Volume { f, xi } => {
                solve_volume_cell(&VolumeCellSpec::new(f.clone(), xi.clone(), center, side, resolution).with_band(band))?
            }
            CellProblem::Surface { g, zeta, nu, stencil } => {
                let stencil = if nu.dim() == 1 { Stencil::Axis } else { *stencil };
                solve_surface_cell(
                    &SurfaceCellSpec::new(g.clone(), zeta.clone(), nu.clone(), center, side, resolution)
                        .with_band(band)
                        .with_stencil(stencil),
                )?
            }
        };
        Ok((res.value, res.diagnostics.certified))
    }

    /// `c₂(1 + |ξ|^p)` or `c₅(1 + |ζ|)`.
    pub fn growth_constant(&self) -> f64 {
        match self {
            CellProblem::Volume { f, xi } => {
                let c = f.constants();
                c.c2 * (1.0 + xi.norm().powf(c.p))
            }
            CellProblem::Surface { g, zeta, .. } => g.constants().c5 * (1.0 + norm(zeta)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSample {
    pub rho: f64,
    pub eps: f64,
    pub resolution: usize,
    pub normalised: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoBounds {
    pub rho: f64,
    /// Min over the tail of the `k` schedule (liminf proxy).
    pub lower: f64,
    /// Max over the tail of the `k` schedule (limsup proxy).
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitDiagnostics {
    pub samples: Vec<DiagnosticSample>,
    pub per_rho: Vec<RhoBounds>,
    /// Outer limsup proxy of the liminf bounds (`f′` or `g′`).
    pub lower: f64,
    /// Outer limsup proxy of the limsup bounds (`f″` or `g″`).
    pub upper: f64,
    pub gap: f64,
}

/// Settings of [`liminf_limsup_diagnostics`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSchedule {
    /// Decreasing cube sizes (physical units).
    pub rhos: Vec<f64>,
    /// Decreasing scales `ε_k`.
    pub eps: Vec<f64>,
    /// Grid cells per period of `f_k`.
    pub density: usize,
    /// How many of the largest `k` enter the inner min/max.
    pub k_tail: usize,
    /// How many of the smallest `ρ` enter the outer max.
    pub rho_tail: usize,
}

/// Normalised cell values of `f_k = f(·/ε_k)` on `Q_ρ(x)` over a grid of
/// `(ρ, ε_k)`, reduced to liminf/limsup proxies in `k` and a limsup proxy
/// in `ρ → 0`.
pub fn liminf_limsup_diagnostics(problem: &CellProblem, x: &[f64], schedule: &DiagnosticSchedule) -> Result<LimitDiagnostics> {
    if x.len() != problem.dim() {
        return Err(Error::Dimension {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    if schedule.rhos.is_empty() || schedule.eps.is_empty() {
        return invalid("diagnostic schedules must be nonempty");
    }
    if schedule.k_tail == 0 || schedule.rho_tail == 0 {
        return invalid("tails must be positive");
    }
    if schedule.rhos.windows(2).any(|w| w[0] <= w[1]) || schedule.eps.windows(2).any(|w| w[0] <= w[1]) {
        return invalid("ρ and ε schedules must be strictly decreasing");
    }
    let period = problem.period();
    let d = problem.homogeneity();
    let pairs: Vec<(f64, f64)> = schedule
        .rhos
        .iter()
        .flat_map(|&rho| schedule.eps.iter().map(move |&eps| (rho, eps)))
        .collect();
    let samples = pairs
        .into_par_iter()
        .map(|(rho, eps)| {
            let resolution = ((rho / (eps * period) * schedule.density as f64).round() as usize).max(3);
            let (value, certified) = problem.rescaled(eps).solve(x.to_vec(), rho, resolution, 1)?;
            Ok(DiagnosticSample {
                rho,
                eps,
                resolution,
                normalised: value / rho.powi(d),
                certified,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let kt = schedule.k_tail.min(schedule.eps.len());
    let per_rho: Vec<RhoBounds> = samples
        .chunks(schedule.eps.len())
        .map(|row| {
            let tail = &row[row.len() - kt..];
            RhoBounds {
                rho: row[0].rho,
                lower: tail.iter().map(|s| s.normalised).fold(f64::INFINITY, f64::min),
                upper: tail.iter().map(|s| s.normalised).fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    let rt = schedule.rho_tail.min(per_rho.len());
    let outer = &per_rho[per_rho.len() - rt..];
    let lower = outer.iter().map(|b| b.lower).fold(f64::NEG_INFINITY, f64::max);
    let upper = outer.iter().map(|b| b.upper).fold(f64::NEG_INFINITY, f64::max);
    Ok(LimitDiagnostics {
        samples,
        per_rho,
        lower,
        upper,
        gap: upper - lower,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    /// Value for `f(·/ε)` on the cube of side `ρ` at `x`.
    pub lhs: f64,
    /// `(ρ/r)^d` times the value for `f` on the cube of side `r = ρ/ε` at `r x/ρ`.
    pub rhs: f64,
    pub residual: f64,
}

/// Compares both sides of the change of variables `z = y/ε` for the cell
/// problem on `Q_ρ(x)` at resolution `N`; `d` is `n` for the volume and
/// `n − 1` for the surface problem.
pub fn scaling_identity_check(problem: &CellProblem, x: &[f64], rho: f64, eps: f64, resolution: usize) -> Result<ScalingCheck> {
    if !(rho > 0.0 && eps > 0.0 && rho.is_finite() && eps.is_finite()) {
        return invalid("ρ and ε must be positive and finite");
    }
    if x.len() != problem.dim() {
        return Err(Error::Dimension {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    let r = rho / eps;
    let far: Vec<f64> = x.iter().map(|c| r * c / rho).collect();
    // Both grids must be images of each other under y ↦ y/ε.
    let h_lhs = rho / resolution as f64;
    let h_rhs = r / resolution as f64;
    let aligned = (h_lhs / eps - h_rhs).abs() <= 1e-12 * h_rhs
        && far.iter().zip(x).all(|(f, c)| (f * eps - c).abs() <= 1e-12 * (1.0 + c.abs()));
    if !aligned {
        return Err(Error::IncompatibleGrids("rescaled grid does not align with the original".into()));
    }
    let d = problem.homogeneity();
    let (lhs, _) = problem.rescaled(eps).solve(x.to_vec(), rho, resolution, 1)?;
    let (base, _) = problem.solve(far, r, resolution, 1)?;
    let rhs = (rho / r).powi(d) * base;
    let residual = if lhs == 0.0 { (lhs - rhs).abs() } else { (lhs - rhs).abs() / lhs.abs() };
    Ok(ScalingCheck { lhs, rhs, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    /// Cube size in periods.
    pub rho: f64,
    pub resolution: usize,
    pub value: f64,
    /// `value − c ρ^d`.
    pub profile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub points: Vec<ProfilePoint>,
    /// Growth constant `c` (`c₂(1+|ξ|^p)` or `c₅(1+|ζ|)`).
    pub growth: f64,
    /// Largest increase between consecutive points (negative if strictly decreasing).
    pub max_increase: f64,
    /// Indices `i` where `profile[i+1] − profile[i] > δ(N_{i+1}) = 3c/N_{i+1}`.
    pub violations: Vec<usize>,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `ρ ↦ m̂(ρ) − c ρ^d` on cubes centred at `x` (in periods) for increasing
/// `ρ` (in periods), flagging increases above `3c/N`.
pub fn monotonicity_profile(problem: &CellProblem, x: &[f64], rhos: &[f64], density: usize) -> Result<MonotonicityReport> {
    if rhos.windows(2).any(|w| w[0] >= w[1]) || rhos.is_empty() {
        return invalid("ρ list must be nonempty and strictly increasing");
    }
    if x.len() != problem.dim() {
        return Err(Error::Dimension {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    let period = problem.period();
    let d = problem.homogeneity();
    let growth = problem.growth_constant();
    let points = rhos
        .par_iter()
        .map(|&rho| {
            let side = rho * period;
            let resolution = ((rho * density as f64).round() as usize).max(3);
            let center = x.iter().map(|c| c * period).collect();
            let (value, _) = problem.solve(center, side, resolution, 1)?;
            Ok(ProfilePoint {
                rho,
                resolution,
                value,
                profile: value - growth * side.powi(d),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_increase = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (i, w) in points.windows(2).enumerate() {
        let inc = w[1].profile - w[0].profile;
        max_increase = max_increase.max(inc);
        if inc > 3.0 * growth / w[1].resolution as f64 {
            violations.push(i);
        }
    }
    Ok(MonotonicityReport {
        points,
        growth,
        max_increase,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::{laminate_toughness, mumford_shah_surface, mumford_shah_volume, periodic_volume, Coefficient};

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
    fn constant_volume_is_exact_at_every_radius() {
        let f = mumford_shah_volume(2.0).unwrap();
        let xi = Matrix::from_rows(1, 2, vec![1.0, -2.0]);
        let est = estimate_f_hom(&f, &xi, &[vec![0.0, 0.0]], &RadiusSchedule::dyadic(0, 2, 8).unwrap(), &Default::default()).unwrap();
        for v in est.values(0) {
            assert!((v - 5.0).abs() < 1e-12);
        }
        assert!((est.limit - 5.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_mean_in_one_dimension() {
        let xi = Matrix::from_rows(1, 1, vec![1.5]);
        let est = estimate_f_hom(
            &laminate_1d(),
            &xi,
            &[vec![0.0], vec![0.37]],
            &RadiusSchedule::new(vec![8.0, 16.0, 32.0], 16).unwrap(),
            &Default::default(),
        )
        .unwrap();
        assert!((est.limit / (1.6 * 2.25) - 1.0).abs() < 1e-2, "{}", est.limit);
        assert!(est.x_spread < 1e-2);
    }

    #[test]
    fn averaging_stays_within_last_values() {
        let radii = [1.0, 2.0, 4.0];
        let values = [3.0, 2.0, 2.5];
        let l = extrapolate(&radii, &values, Extrapolation::Average);
        assert!((2.0..=3.0).contains(&l));
        assert_eq!(extrapolate(&radii, &values, Extrapolation::Richardson), 3.0);
    }

    #[test]
    fn crossing_laminate_gives_arithmetic_mean() {
        let g = laminate_toughness(2.0, 1.0, 1.0, vec![1.0, 0.0]).unwrap();
        let est = estimate_g_hom(
            &g,
            &[0.5],
            &UnitVector::basis(2, 1),
            &[vec![0.0, 0.0]],
            &RadiusSchedule::dyadic(1, 3, 8).unwrap(),
            &Default::default(),
        )
        .unwrap();
        assert!((est.limit - 1.5 * 1.5).abs() < 1e-9, "{}", est.limit);
    }

    #[test]
    fn constant_diagnostics_have_no_gap() {
        let problem = CellProblem::Surface {
            g: mumford_shah_surface(2.0).unwrap(),
            zeta: vec![1.0],
            nu: UnitVector::normalized(vec![1.0, 1.0]).unwrap(),
            stencil: Stencil::Eight,
        };
        let d = liminf_limsup_diagnostics(
            &problem,
            &[0.1, 0.2],
            &DiagnosticSchedule {
                rhos: vec![1.0, 0.5],
                eps: vec![0.25, 0.125],
                density: 8,
                k_tail: 2,
                rho_tail: 1,
            },
        )
        .unwrap();
        assert_eq!(d.gap, 0.0);
    }

    #[test]
    fn scaling_identity_on_dyadic_grids() {
        let problem = CellProblem::Volume {
            f: laminate_1d(),
            xi: Matrix::from_rows(1, 1, vec![1.0]),
        };
        let c = scaling_identity_check(&problem, &[0.25], 1.0, 0.5, 32).unwrap();
        assert!(c.residual <= 1e-10, "{c:?}");
        let same = scaling_identity_check(&problem, &[0.25], 1.0, 1.0, 32).unwrap();
        assert_eq!(same.residual, 0.0);
    }

    #[test]
    fn constant_profile_decreases() {
        let problem = CellProblem::Volume {
            f: mumford_shah_volume(2.0).unwrap(),
            xi: Matrix::from_rows(1, 2, vec![1.0, 0.0]),
        };
        let rep = monotonicity_profile(&problem, &[0.0, 0.0], &[2.0, 4.0, 8.0], 8).unwrap();
        assert!(rep.passed());
        assert!(rep.max_increase < 0.0);
    }
}
