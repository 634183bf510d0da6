use serde::{Deserialize, Serialize};

use super::{Grid, GridFunction, LabelField};
use crate::error::{Error, Result};
use crate::integrands::{SurfaceIntegrand, VolumeIntegrand};
use crate::linalg::{norm, sub, Matrix};

/// A discrete competitor of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Field {
    Nodal(GridFunction),
    Labels(LabelField),
}

impl Field {
    pub fn grid(&self) -> &Grid {
        match self {
            Field::Nodal(u) => u.grid(),
            Field::Labels(u) => u.grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub volume: f64,
    pub surface: f64,
    pub total: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_cell: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_edge: Option<Vec<f64>>,
}

/// Forward-difference gradient of `u` on cell `c`, in physical coordinates.
///
/// The local gradient uses the differences from the lower-left node along
/// each lattice axis; it is mapped to physical coordinates by `∇_s u · Rᵀ`.
pub fn cell_gradient(u: &GridFunction, c: usize) -> Matrix {
    let grid = u.grid();
    let n = grid.dim();
    let m = u.value_dim();
    let h = grid.spacing();
    let ij = grid.cell_coords(c);
    let base = grid.node_index(&ij);
    let mut local = Matrix::zeros(m, n);
    for a in 0..n {
        let mut next = ij.clone();
        next[a] += 1;
        let k = grid.node_index(&next);
        for r in 0..m {
            local.set(r, a, (u.value(k)[r] - u.value(base)[r]) / h);
        }
    }
    if grid.is_rotated() {
        local.mul(&grid.frame().matrix.transpose())
    } else {
        local
    }
}

/// `f(cell centre, ∇_h u) · hⁿ` for every cell.
pub fn cell_volume_energies(f: &VolumeIntegrand, u: &GridFunction) -> Result<Vec<f64>> {
    let grid = u.grid();
    let vol = grid.cell_volume();
    let out: Vec<f64> = (0..grid.num_cells())
        .map(|c| f.eval(&grid.cell_center(c), &cell_gradient(u, c)) * vol)
        .collect();
    if let Some(v) = out.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::NonFinite(format!("volume energy contribution {v}")));
    }
    Ok(out)
}

pub fn discrete_volume_energy(f: &VolumeIntegrand, u: &GridFunction) -> Result<f64> {
    Ok(cell_volume_energies(f, u)?.iter().sum())
}

/// An interior face between two differently labelled cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEdge {
    /// Cell on the side opposite to the normal.
    pub minus: usize,
    /// Cell the normal points into.
    pub plus: usize,
    pub midpoint: Vec<f64>,
    pub normal: Vec<f64>,
    /// `value(plus) − value(minus)`.
    pub jump: Vec<f64>,
    pub length: f64,
}

/// The jump set of `u`: faces between cells with different labels. The
/// normal of a face is the physical direction of the lattice axis it crosses.
pub fn jump_edges(u: &LabelField) -> Result<Vec<JumpEdge>> {
    let grid = u.grid();
    let n = grid.resolution();
    let len = grid.face_area();
    let mut out = Vec::new();
    for c in 0..grid.num_cells() {
        let ij = grid.cell_coords(c);
        for axis in 0..grid.dim() {
            if ij[axis] + 1 >= n {
                continue;
            }
            let mut nb = ij.clone();
            nb[axis] += 1;
            let d = grid.cell_index(&nb);
            if u.labels()[c] == u.labels()[d] {
                continue;
            }
            let jump = sub(u.cell_value(d), u.cell_value(c));
            if norm(&jump) == 0.0 {
                return Err(Error::ZeroJump(c, d));
            }
            let mid: Vec<f64> = ij
                .iter()
                .enumerate()
                .map(|(a, &v)| if a == axis { v as f64 + 1.0 } else { v as f64 + 0.5 })
                .collect();
            out.push(JumpEdge {
                minus: c,
                plus: d,
                midpoint: grid.lattice_point(&mid),
                normal: grid.axis_direction(axis),
                jump,
                length: len,
            });
        }
    }
    Ok(out)
}

fn edge_energies(g: &SurfaceIntegrand, edges: &[JumpEdge]) -> Result<Vec<f64>> {
    let out: Vec<f64> = edges
        .iter()
        .map(|e| g.eval(&e.midpoint, &e.jump, &e.normal) * e.length)
        .collect();
    if let Some(v) = out.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::NonFinite(format!("surface energy contribution {v}")));
    }
    Ok(out)
}

/// `Σ g(edge midpoint, [u], ν_edge) · edge length` over the jump set.
pub fn discrete_surface_energy(g: &SurfaceIntegrand, u: &LabelField) -> Result<f64> {
    Ok(edge_energies(g, &jump_edges(u)?)?.iter().sum())
}

/// `E_h = F_h + G_h`. Nodal fields have no jump set; label fields have zero
/// gradient, so their volume part is `Σ f(x_c, 0) hⁿ`.
pub fn discrete_energy(
    f: &VolumeIntegrand,
    g: &SurfaceIntegrand,
    u: &Field,
    keep_parts: bool,
) -> Result<EnergyBreakdown> {
    let (cells, edges) = match u {
        Field::Nodal(w) => (cell_volume_energies(f, w)?, Vec::new()),
        Field::Labels(w) => {
            let grid = w.grid();
            let zero = Matrix::zeros(w.value_dim(), grid.dim());
            let vol = grid.cell_volume();
            let cells = (0..grid.num_cells())
                .map(|c| f.eval(&grid.cell_center(c), &zero) * vol)
                .collect();
            (cells, edge_energies(g, &jump_edges(w)?)?)
        }
    };
    let volume: f64 = cells.iter().sum();
    let surface: f64 = edges.iter().sum();
    Ok(EnergyBreakdown {
        volume,
        surface,
        total: volume + surface,
        per_cell: keep_parts.then_some(cells),
        per_edge: keep_parts.then_some(edges),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_on_grid, Cube, FieldGenerator, UnitVector};
    use crate::integrands::{mumford_shah_surface, mumford_shah_volume, periodic_volume, toughness, Coefficient, JumpProfile};

    fn grid(n: usize, side: f64) -> Grid {
        Grid::new(&Cube::new(vec![0.0, 0.0], side).unwrap(), n).unwrap()
    }

    #[test]
    fn affine_field_energy_is_exact() {
        let f = mumford_shah_volume(2.0).unwrap();
        let xi = Matrix::from_rows(2, 2, vec![1.0, -2.0, 0.5, 3.0]);
        let nu = UnitVector::normalized(vec![1.0, 2.0]).unwrap();
        let g = Grid::over(vec![0.3, -0.1], 2.0, Some(&nu), 7).unwrap();
        let Field::Nodal(u) = generate_on_grid(&FieldGenerator::linear(xi.clone()), &g).unwrap() else {
            panic!()
        };
        let e = discrete_volume_energy(&f, &u).unwrap();
        let exact = xi.norm().powi(2) * 4.0;
        assert!((e - exact).abs() < 1e-12 * exact);
        for c in 0..g.num_cells() {
            assert!(cell_gradient(&u, c).max_abs_diff(&xi) < 1e-12);
        }
    }

    #[test]
    fn midpoint_quadrature_of_oscillating_coefficient() {
        let f = periodic_volume(
            Coefficient::SinSquared {
                base: 1.0,
                amplitude: 1.0,
                period: 1.0,
                axis: 0,
            },
            2.0,
        )
        .unwrap();
        let g = grid(64, 1.0);
        let xi = Matrix::from_rows(1, 2, vec![1.0, 1.0]);
        let Field::Nodal(u) = generate_on_grid(&FieldGenerator::linear(xi), &g).unwrap() else {
            panic!()
        };
        // ∫_{-1/2}^{1/2} (1 + sin²(2πs)) ds = 3/2, times |ξ|² = 2
        let e = discrete_volume_energy(&f, &u).unwrap();
        assert!((e - 3.0).abs() < 1e-3, "{e}");
    }

    #[test]
    fn flat_interface_energy() {
        let g = toughness(Coefficient::constant(2.0), JumpProfile::Affine).unwrap();
        let nu = UnitVector::normalized(vec![-1.0, 3.0]).unwrap();
        let grid = Grid::over(vec![0.0, 0.0], 3.0, Some(&nu), 6).unwrap();
        let gen = FieldGenerator::pure_jump(vec![0.0, 0.0], vec![1.5], nu).unwrap();
        let Field::Labels(u) = generate_on_grid(&gen, &grid).unwrap() else {
            panic!()
        };
        let e = discrete_surface_energy(&g, &u).unwrap();
        assert!((e - 2.0 * 2.5 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn staircase_diagonal_has_l1_length() {
        let g = mumford_shah_surface(1.0).unwrap();
        let grid = grid(8, 1.0);
        let labels = (0..64).map(|c| usize::from(c % 8 + c / 8 >= 8)).collect();
        let u = LabelField::new(grid, labels, vec![vec![0.0], vec![1.0]]).unwrap();
        // 7 vertical + 7 horizontal unit steps of length 1/8 inside the square
        let edges = jump_edges(&u).unwrap();
        assert_eq!(edges.len(), 14);
        let e = discrete_surface_energy(&g, &u).unwrap();
        assert!((e - 14.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn zero_jump_is_rejected() {
        let u = LabelField::new(grid(2, 1.0), vec![0, 1, 0, 0], vec![vec![1.0], vec![1.0]]).unwrap();
        let g = mumford_shah_surface(1.0).unwrap();
        assert!(matches!(discrete_surface_energy(&g, &u), Err(Error::ZeroJump(..))));
        assert_eq!(discrete_surface_energy(&g, &u.canonicalize()).unwrap(), 0.0);
    }

    #[test]
    fn breakdown_sums() {
        let f = mumford_shah_volume(2.0).unwrap();
        let g = mumford_shah_surface(1.0).unwrap();
        let u = LabelField::new(grid(2, 1.0), vec![0, 1, 0, 1], vec![vec![1.0], vec![-1.0]]).unwrap();
        let e = discrete_energy(&f, &g, &Field::Labels(u), true).unwrap();
        assert_eq!(e.volume, 0.0);
        assert_eq!(e.total, e.surface);
        assert_eq!(e.per_edge.unwrap().len(), 2);
    }
}
