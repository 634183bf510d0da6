//! Smooth radial truncations `ψ^λ` and the ladder/pigeonhole choice of a
//! truncation level that almost decreases the energy.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::{
    cell_volume_energies, discrete_energy, jump_edges, Field, GridFunction, LabelField,
};
use crate::integrands::{IntegrandConstants, SurfaceIntegrand, VolumeIntegrand};
use crate::linalg::{norm, Matrix};

/// The profile `φ`: identity up to 1, zero from 3, C¹ in between.
///
/// On `[1, 3]` it is piecewise polynomial:
///
/// ```text
/// φ(t) = 1 + (t−1) − 2(t−1)²   on [1, 3/2]   (slope 1 → −1)
/// φ(t) = 5/2 − t               on [3/2, 2]   (slope −1)
/// φ(t) = (3−t)²/2              on [2, 3]     (slope −1 → 0)
/// ```
///
/// so `0 ≤ φ ≤ 9/8`, `|φ'| ≤ 1` and `φ(t) ≤ t`.
pub fn profile(t: f64) -> f64 {
    if t <= 1.0 {
        t
    } else if t <= 1.5 {
        let s = t - 1.0;
        1.0 + s - 2.0 * s * s
    } else if t <= 2.0 {
        2.5 - t
    } else if t < 3.0 {
        let s = 3.0 - t;
        0.5 * s * s
    } else {
        0.0
    }
}

/// Derivative of [`profile`].
pub fn profile_derivative(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t <= 1.5 {
        1.0 - 4.0 * (t - 1.0)
    } else if t <= 2.0 {
        -1.0
    } else if t < 3.0 {
        t - 3.0
    } else {
        0.0
    }
}

/// `ψ^λ(ζ) = λ φ(|ζ|/λ) ζ/|ζ|`, with `ψ^λ(0) = 0`.
pub fn smooth_truncate(lambda: f64, zeta: &[f64]) -> Vec<f64> {
    let r = norm(zeta);
    if r == 0.0 {
        return vec![0.0; zeta.len()];
    }
    if r <= lambda {
        return zeta.to_vec();
    }
    let s = lambda * profile(r / lambda) / r;
    zeta.iter().map(|z| z * s).collect()
}

/// Applies `ψ^λ` to every value of a field. Label fields are canonicalised
/// afterwards, since distinct values may truncate to the same vector.
pub fn truncate_field(lambda: f64, u: &Field) -> Field {
    match u {
        Field::Nodal(w) => Field::Nodal(w.map_values(|v| smooth_truncate(lambda, v))),
        Field::Labels(w) => {
            Field::Labels(w.map_values(|v| smooth_truncate(lambda, v)).canonicalize())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationLadder {
    pub eta: f64,
    pub h: usize,
    pub alpha: f64,
    /// `λ_1 < … < λ_{h+1}`.
    pub levels: Vec<f64>,
    pub mu: f64,
}

/// Smallest `h` with `c₂/(c₁h) < η` and `2c₃/h < η`, `α = max(3, c₃+1)` and
/// `λ_i = λ α^{i−1}`.
pub fn build_ladder(lambda: f64, eta: f64, constants: &IntegrandConstants) -> Result<TruncationLadder> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return invalid(format!("λ must be positive, got {lambda}"));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return invalid(format!("η must be positive, got {eta}"));
    }
    let ok = |h: usize| {
        let h = h as f64;
        constants.c2 / (constants.c1 * h) < eta && 2.0 * constants.c3 / h < eta
    };
    let bound = (constants.c2 / (constants.c1 * eta)).max(2.0 * constants.c3 / eta);
    let mut h = (bound.floor() as usize).saturating_sub(1).max(1);
    while !ok(h) {
        h += 1;
    }
    let alpha = 3.0f64.max(constants.c3 + 1.0);
    let levels: Vec<f64> = (0..=h).map(|i| lambda * alpha.powi(i as i32)).collect();
    Ok(TruncationLadder {
        eta,
        h,
        alpha,
        mu: levels[h],
        levels,
    })
}

/// Both sides of `H(ψ_i(u)) ≤ (1+η) H(u) + c₂ |A ∩ {|u| ≥ λ}|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationCertificate {
    /// Selected index, 1-based as in the ladder `λ_1, …, λ_h`.
    pub index: usize,
    /// Annulus quantity for each `i = 1, …, h`.
    pub annulus: Vec<f64>,
    pub energy_before: f64,
    pub energy_after: f64,
    /// `c₂ |A ∩ {|u| ≥ λ}|`.
    pub correction: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationSelection {
    /// Index `ĵ` and certificate for the full energy `E = F + G`.
    pub energy: TruncationCertificate,
    /// Index `î` and certificate for the volume part `F` alone.
    pub volume: TruncationCertificate,
}

fn within(lo: f64, t: f64, hi: f64) -> bool {
    lo < t && t < hi
}

/// Per-cell `(min |u|, max |u|)` over the cell's nodes (label fields: the cell value).
fn cell_ranges(u: &Field) -> Vec<(f64, f64)> {
    match u {
        Field::Labels(w) => (0..w.grid().num_cells())
            .map(|c| {
                let r = norm(w.cell_value(c));
                (r, r)
            })
            .collect(),
        Field::Nodal(w) => (0..w.grid().num_cells())
            .map(|c| nodal_range(w, c))
            .collect(),
    }
}

fn nodal_range(w: &GridFunction, c: usize) -> (f64, f64) {
    crate::fields::cell_nodes(w.grid(), c)
        .into_iter()
        .map(|k| norm(w.value(k)))
        .fold((f64::INFINITY, 0.0), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

/// `f(x_c, 0) hⁿ` per cell: label fields have zero gradient.
fn label_volume_cells(f: &VolumeIntegrand, w: &LabelField) -> Vec<f64> {
    let grid = w.grid();
    let zero = Matrix::zeros(w.value_dim(), grid.dim());
    (0..grid.num_cells())
        .map(|c| f.eval(&grid.cell_center(c), &zero) * grid.cell_volume())
        .collect()
}

/// Chooses the truncation levels `ĵ` (for `E`) and `î` (for `F`) by the
/// pigeonhole argument over the annuli `{λ_i < |u| < λ_{i+1}}`, and
/// certifies both inequalities on the actual truncated fields.
///
/// Volume annuli use cells whose nodal range meets `(λ_i, λ_{i+1})`, i.e.
/// `max|u| > λ_i` and `min|u| < λ_{i+1}`; an edge of the jump set enters
/// annulus `i` once for each trace whose magnitude lies in the open interval.
/// For label fields the discrete inequality is exact; for nodal fields a
/// cell can straddle several annuli, and a violated certificate is
/// reported as [`Error::CertificateViolation`].
pub fn select_truncation_index(
    u: &Field,
    ladder: &TruncationLadder,
    f: &VolumeIntegrand,
    g: &SurfaceIntegrand,
) -> Result<TruncationSelection> {
    let c = f.constants();
    let (c1, c2) = (c.c1, c.c2);
    let c3 = g.constants().c3;
    let grid = u.grid();
    let lambda = ladder.levels[0];
    let h = ladder.h;

    let volume_cells = match u {
        Field::Nodal(w) => cell_volume_energies(f, w)?,
        Field::Labels(w) => label_volume_cells(f, w),
    };
    let ranges = cell_ranges(u);
    let edges = match u {
        Field::Labels(w) => {
            let edges = jump_edges(w)?;
            let vals: Vec<f64> = edges
                .iter()
                .map(|e| g.eval(&e.midpoint, &e.jump, &e.normal) * e.length)
                .collect();
            edges
                .into_iter()
                .zip(vals)
                .map(|(e, v)| (norm(w.cell_value(e.plus)), norm(w.cell_value(e.minus)), v))
                .collect()
        }
        Field::Nodal(_) => Vec::new(),
    };

    let mut vol_annulus = vec![0.0; h];
    let mut surf_annulus = vec![0.0; h];
    for i in 0..h {
        let (lo, hi) = (ladder.levels[i], ladder.levels[i + 1]);
        vol_annulus[i] = ranges
            .iter()
            .zip(&volume_cells)
            .filter(|((mn, mx), _)| *mx > lo && *mn < hi)
            .map(|(_, v)| v)
            .sum::<f64>()
            * (c2 / c1);
        surf_annulus[i] = edges
            .iter()
            .map(|&(up, um, v)| {
                let k = usize::from(within(lo, up, hi)) + usize::from(within(lo, um, hi));
                c3 * v * k as f64
            })
            .sum();
    }
    let big = ranges.iter().filter(|(_, mx)| *mx >= lambda).count();
    let correction = c2 * big as f64 * grid.cell_volume();

    let argmin = |q: &[f64]| {
        let mut best = 0;
        for (i, v) in q.iter().enumerate() {
            if *v < q[best] {
                best = i;
            }
        }
        best
    };
    let e_annulus: Vec<f64> = vol_annulus.iter().zip(&surf_annulus).map(|(a, b)| a + b).collect();
    let j = argmin(&e_annulus);
    let i = argmin(&vol_annulus);

    let before = discrete_energy(f, g, u, false)?;
    let certify = |idx: usize, annulus: Vec<f64>, volume_only: bool| -> Result<TruncationCertificate> {
        let v = truncate_field(ladder.levels[idx], u);
        let after = discrete_energy(f, g, &v, false)?;
        let (eb, ea) = if volume_only {
            (before.volume, after.volume)
        } else {
            (before.total, after.total)
        };
        let lhs = ea;
        let rhs = (1.0 + ladder.eta) * eb + correction;
        let holds = lhs <= rhs + 1e-12 * (1.0 + rhs.abs());
        Ok(TruncationCertificate {
            index: idx + 1,
            annulus,
            energy_before: eb,
            energy_after: ea,
            correction,
            lhs,
            rhs,
            holds,
        })
    };
    let energy = certify(j, e_annulus, false)?;
    let volume = certify(i, vol_annulus, true)?;
    for cert in [&energy, &volume] {
        if !cert.holds {
            return Err(Error::CertificateViolation {
                lhs: cert.lhs,
                rhs: cert.rhs,
            });
        }
    }
    Ok(TruncationSelection { energy, volume })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use crate::geometry::Cube;
    use crate::integrands::{mumford_shah_surface, mumford_shah_volume, Modulus};

    fn consts(c1: f64, c2: f64, c3: f64) -> IntegrandConstants {
        IntegrandConstants {
            p: 2.0,
            c1,
            c2,
            c3,
            c4: 1.0,
            c5: 1.0,
            sigma1: Modulus::linear(1.0),
            sigma2: Modulus::linear(1.0),
        }
    }

    #[test]
    fn profile_regression_values() {
        let table = [
            (0.5, 0.5),
            (1.0, 1.0),
            (1.25, 1.125),
            (1.5, 1.0),
            (1.75, 0.75),
            (2.0, 0.5),
            (2.5, 0.125),
            (3.0, 0.0),
            (7.0, 0.0),
        ];
        for (t, v) in table {
            assert!((profile(t) - v).abs() < 1e-15, "φ({t})");
        }
    }

    #[test]
    fn examples() {
        assert_eq!(smooth_truncate(1.0, &[0.5, 0.0]), vec![0.5, 0.0]);
        assert_eq!(smooth_truncate(1.0, &[3.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(smooth_truncate(1.0, &[2.0, 0.0]), vec![0.5, 0.0]);
        assert_eq!(smooth_truncate(2.0, &[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn profile_is_c1() {
        for knot in [1.0, 1.5, 2.0, 3.0] {
            let e = 1e-9;
            assert!((profile(knot + e) - profile(knot - e)).abs() < 3e-9);
            assert!((profile_derivative(knot + e) - profile_derivative(knot - e)).abs() < 1e-8);
        }
    }

    #[test]
    fn ladder_examples() {
        let l = build_ladder(1.0, 0.5, &consts(1.0, 1.0, 1.0)).unwrap();
        assert_eq!((l.h, l.alpha), (5, 3.0));
        let l = build_ladder(1.0, 10.0, &consts(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(l.h, 1);
        assert_eq!(l.levels, vec![1.0, 3.0]);
        let l = build_ladder(1.0, 1.0, &consts(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(l.h, 3);
        assert_eq!(l.levels, vec![1.0, 3.0, 9.0, 27.0]);
        let l = build_ladder(2.0, 1.0, &consts(1.0, 2.0, 4.0)).unwrap();
        assert_eq!(l.alpha, 5.0);
        assert_eq!(l.h, 9);
    }

    fn grid(n: usize) -> Grid {
        Grid::new(&Cube::new(vec![0.0, 0.0], 1.0).unwrap(), n).unwrap()
    }

    #[test]
    fn small_field_is_untouched() {
        let f = mumford_shah_volume(2.0).unwrap();
        let g = mumford_shah_surface(1.0).unwrap();
        let u = LabelField::new(grid(4), (0..16).map(|c| c % 3).collect(), vec![vec![0.1], vec![-0.5], vec![0.9]])
            .unwrap();
        let ladder = build_ladder(1.0, 2.0, f.constants()).unwrap();
        let sel = select_truncation_index(&Field::Labels(u), &ladder, &f, &g).unwrap();
        assert_eq!(sel.energy.energy_after, sel.energy.energy_before);
        assert_eq!(sel.energy.correction, 0.0);
    }

    #[test]
    fn far_field_has_an_empty_annulus() {
        let f = mumford_shah_volume(2.0).unwrap();
        let g = mumford_shah_surface(1.0).unwrap();
        let ladder = build_ladder(1.0, 1.5, f.constants()).unwrap();
        assert_eq!(ladder.levels, vec![1.0, 3.0, 9.0]);
        let labels: Vec<usize> = (0..16).map(|c| usize::from(c % 4 >= 2)).collect();
        for (far, charged) in [(10.0, None), (5.0, Some(1))] {
            let u = LabelField::new(grid(4), labels.clone(), vec![vec![0.0], vec![far]]).unwrap();
            let sel = select_truncation_index(&Field::Labels(u), &ladder, &f, &g).unwrap();
            assert_eq!(sel.energy.index, 1);
            assert_eq!(sel.energy.annulus[0], 0.0);
            match charged {
                None => assert_eq!(sel.energy.annulus[1], 0.0),
                Some(i) => assert!(sel.energy.annulus[i] > 0.0),
            }
            // everything at or above λ is counted in the correction
            assert_eq!(sel.energy.correction, 0.5);
            assert!(sel.energy.holds);
        }
    }
}
