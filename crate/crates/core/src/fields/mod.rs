//! Grids over (rotated) cubes, discrete competitors and the discrete energies.
//!
//! A grid with `N` cells per side over a cube of side `ρ` has spacing
//! `h = ρ/N`. Local coordinates `s ∈ [-ρ/2, ρ/2]ⁿ` are mapped to physical
//! points by `y = x + R s`, so lattice axes follow the frame columns. Nodes
//! are numbered `j (N+1) + i` and cells `j N + i` with `i` the first axis.

mod energy;


use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{rotation_frame, Cube, RotatedCube, RotationFrame, UnitVector};

pub use energy::{
    cell_gradient, cell_volume_energies, discrete_energy, discrete_surface_energy, discrete_volume_energy,
    jump_edges, EnergyBreakdown, Field, JumpEdge,
};

/// Cells-per-side of the default boundary band, `max(1, ⌈N/8⌉)`.
pub fn default_band_width(resolution: usize) -> usize {
    resolution.div_ceil(8).max(1)
}

/// Serialised form of a [`Grid`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub center: Vec<f64>,
    pub side: f64,
    pub resolution: usize,
    /// Normal of the rotated cube; absent for axis-aligned grids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridDescriptor", into = "GridDescriptor")]
pub struct Grid {
    center: Vec<f64>,
    side: f64,
    n: usize,
    frame: RotationFrame,
    rotated: bool,
}

impl TryFrom<GridDescriptor> for Grid {
    type Error = Error;
    fn try_from(d: GridDescriptor) -> Result<Self> {
        match d.normal {
            None => Grid::new(&Cube::new(d.center, d.side)?, d.resolution),
            Some(nu) => Grid::rotated(
                &RotatedCube::new(d.center, d.side, &UnitVector::new(nu)?)?,
                d.resolution,
            ),
        }
    }
}

impl From<Grid> for GridDescriptor {
    fn from(g: Grid) -> Self {
        GridDescriptor {
            normal: g.rotated.then(|| g.frame.normal.as_slice().to_vec()),
            center: g.center,
            side: g.side,
            resolution: g.n,
        }
    }
}

impl Grid {
    /// Grid over the axis-aligned cube.
    pub fn new(cube: &Cube, resolution: usize) -> Result<Self> {
        Self::build(cube, RotationFrame::identity(cube.dim()), false, resolution)
    }

    /// Grid over the rotated cube, with lattice axes along the frame columns.
    pub fn rotated(cube: &RotatedCube, resolution: usize) -> Result<Self> {
        Self::build(&cube.cube, cube.frame.clone(), true, resolution)
    }

    /// Convenience constructor: `Q_ρ(x)` if `nu` is `None`, else `Q^ν_ρ(x)`.
    pub fn over(center: Vec<f64>, side: f64, nu: Option<&UnitVector>, resolution: usize) -> Result<Self> {
        match nu {
            None => Grid::new(&Cube::new(center, side)?, resolution),
            Some(nu) => {
                if center.len() != nu.dim() {
                    return Err(Error::Dimension {
                        expected: center.len(),
                        got: nu.dim(),
                    });
                }
                let frame = rotation_frame(nu)?;
                Self::build(&Cube::new(center, side)?, frame, true, resolution)
            }
        }
    }

    fn build(cube: &Cube, frame: RotationFrame, rotated: bool, n: usize) -> Result<Self> {
        let dim = cube.dim();
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if n < 2 {
            return invalid(format!("grid resolution must be at least 2, got {n}"));
        }
        Ok(Grid {
            center: cube.center.clone(),
            side: cube.side,
            n,
            frame,
            rotated,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn frame(&self) -> &RotationFrame {
        &self.frame
    }

    pub fn is_rotated(&self) -> bool {
        self.rotated
    }

    pub fn spacing(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim() as i32)
    }

    /// `(n-1)`-dimensional measure of one cell face (1 when `n = 1`).
    pub fn face_area(&self) -> f64 {
        self.spacing().powi(self.dim() as i32 - 1)
    }

    pub fn nodes_per_side(&self) -> usize {
        self.n + 1
    }

    pub fn num_nodes(&self) -> usize {
        (self.n + 1).pow(self.dim() as u32)
    }

    pub fn num_cells(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    pub fn node_index(&self, ij: &[usize]) -> usize {
        match ij {
            [i] => *i,
            [i, j] => j * (self.n + 1) + i,
            _ => unreachable!("grids are one- or two-dimensional"),
        }
    }

    pub fn node_coords(&self, k: usize) -> Vec<usize> {
        match self.dim() {
            1 => vec![k],
            _ => vec![k % (self.n + 1), k / (self.n + 1)],
        }
    }

    pub fn cell_index(&self, ij: &[usize]) -> usize {
        match ij {
            [i] => *i,
            [i, j] => j * self.n + i,
            _ => unreachable!("grids are one- or two-dimensional"),
        }
    }

    pub fn cell_coords(&self, c: usize) -> Vec<usize> {
        match self.dim() {
            1 => vec![c],
            _ => vec![c % self.n, c / self.n],
        }
    }

    /// Local coordinates of lattice position `ij` (may be fractional).
    pub fn local_at(&self, ij: &[f64]) -> Vec<f64> {
        let h = self.spacing();
        ij.iter().map(|t| t * h - self.side / 2.0).collect()
    }

    /// Physical point of local coordinates `s`.
    pub fn to_physical(&self, local: &[f64]) -> Vec<f64> {
        let off = self.frame.apply(local);
        off.iter().zip(&self.center).map(|(o, c)| o + c).collect()
    }

    /// Physical point of fractional lattice position `ij`.
    pub fn lattice_point(&self, ij: &[f64]) -> Vec<f64> {
        self.to_physical(&self.local_at(ij))
    }

    pub fn node_position(&self, k: usize) -> Vec<f64> {
        let ij: Vec<f64> = self.node_coords(k).iter().map(|&v| v as f64).collect();
        self.lattice_point(&ij)
    }

    pub fn cell_center(&self, c: usize) -> Vec<f64> {
        let ij: Vec<f64> = self.cell_coords(c).iter().map(|&v| v as f64 + 0.5).collect();
        self.lattice_point(&ij)
    }

    /// Physical direction of lattice axis `axis`.
    pub fn axis_direction(&self, axis: usize) -> Vec<f64> {
        self.frame.matrix.column(axis)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

/// Cells and nodes within a band of the cube boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMask {
    pub width: usize,
    pub cells: Vec<bool>,
    pub nodes: Vec<bool>,
}

impl BandMask {
    pub fn masked_cells(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn masked_nodes(&self) -> usize {
        self.nodes.iter().filter(|&&b| b).count()
    }
}

/// Cells with some lattice coordinate `< w` or `≥ N - w`, and all nodes of
/// those cells (coordinate `≤ w` or `≥ N - w`).
pub fn boundary_band(grid: &Grid, width: usize) -> Result<BandMask> {
    let n = grid.resolution();
    if width == 0 || 2 * width >= n {
        return invalid(format!(
            "band width must satisfy 1 ≤ width < N/2, got {width} for N = {n}"
        ));
    }
    let cells = (0..grid.num_cells())
        .map(|c| grid.cell_coords(c).iter().any(|&i| i < width || i >= n - width))
        .collect();
    let nodes = (0..grid.num_nodes())
        .map(|k| grid.node_coords(k).iter().any(|&i| i <= width || i >= n - width))
        .collect();
    Ok(BandMask {
        width,
        cells,
        nodes,
    })
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{what} contains {v}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFunctionData {
    pub grid: Grid,
    pub value_dim: usize,
    pub values: Vec<f64>,
}

/// Nodal `ℝ^m` values on a grid, stored node-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFunctionData", into = "GridFunctionData")]
pub struct GridFunction {
    grid: Grid,
    m: usize,
    values: Vec<f64>,
}

impl TryFrom<GridFunctionData> for GridFunction {
    type Error = Error;
    fn try_from(d: GridFunctionData) -> Result<Self> {
        GridFunction::new(d.grid, d.value_dim, d.values)
    }
}

impl From<GridFunction> for GridFunctionData {
    fn from(u: GridFunction) -> Self {
        GridFunctionData {
            grid: u.grid,
            value_dim: u.m,
            values: u.values,
        }
    }
}

impl GridFunction {
    pub fn new(grid: Grid, m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return invalid("value dimension must be positive");
        }
        if values.len() != grid.num_nodes() * m {
            return Err(Error::Dimension {
                expected: grid.num_nodes() * m,
                got: values.len(),
            });
        }
        check_finite(&values, "grid function")?;
        Ok(GridFunction { grid, m, values })
    }

    pub fn zeros(grid: Grid, m: usize) -> Self {
        let len = grid.num_nodes() * m;
        GridFunction {
            grid,
            m,
            values: vec![0.0; len],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn value_dim(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.m..(k + 1) * self.m]
    }

    pub fn set_value(&mut self, k: usize, v: &[f64]) {
        self.values[k * self.m..(k + 1) * self.m].copy_from_slice(v);
    }

    /// Applies `map` to every nodal vector.
    pub fn map_values(&self, map: impl Fn(&[f64]) -> Vec<f64>) -> GridFunction {
        let mut out = self.clone();
        for k in 0..self.grid.num_nodes() {
            let v = map(self.value(k));
            out.set_value(k, &v);
        }
        out
    }

    /// Largest `|u|` over the nodes of cell `c`.
    pub fn cell_max_norm(&self, c: usize) -> f64 {
        cell_nodes(&self.grid, c)
            .into_iter()
            .map(|k| crate::linalg::norm(self.value(k)))
            .fold(0.0, f64::max)
    }
}

/// Node indices of the corners of cell `c`.
pub fn cell_nodes(grid: &Grid, c: usize) -> Vec<usize> {
    let ij = grid.cell_coords(c);
    match ij.as_slice() {
        [i] => vec![*i, i + 1],
        [i, j] => vec![
            grid.node_index(&[*i, *j]),
            grid.node_index(&[i + 1, *j]),
            grid.node_index(&[*i, j + 1]),
            grid.node_index(&[i + 1, j + 1]),
        ],
        _ => unreachable!(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelFieldData {
    pub grid: Grid,
    pub labels: Vec<usize>,
    pub table: Vec<Vec<f64>>,
}

/// Piecewise-constant field: one label per cell and a label → value table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LabelFieldData", into = "LabelFieldData")]
pub struct LabelField {
    grid: Grid,
    labels: Vec<usize>,
    table: Vec<Vec<f64>>,
}

impl TryFrom<LabelFieldData> for LabelField {
    type Error = Error;
    fn try_from(d: LabelFieldData) -> Result<Self> {
        LabelField::new(d.grid, d.labels, d.table)
    }
}

impl From<LabelField> for LabelFieldData {
    fn from(u: LabelField) -> Self {
        LabelFieldData {
            grid: u.grid,
            labels: u.labels,
            table: u.table,
        }
    }
}

impl LabelField {
    pub fn new(grid: Grid, labels: Vec<usize>, table: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != grid.num_cells() {
            return Err(Error::Dimension {
                expected: grid.num_cells(),
                got: labels.len(),
            });
        }
        let Some(m) = table.first().map(Vec::len) else {
            return invalid("label table must not be empty");
        };
        if m == 0 || table.iter().any(|v| v.len() != m) {
            return invalid("label table entries must share a positive dimension");
        }
        for v in &table {
            check_finite(v, "label table")?;
        }
        if let Some(l) = labels.iter().find(|&&l| l >= table.len()) {
            return invalid(format!("label {l} missing from the value table"));
        }
        Ok(LabelField {
            grid,
            labels,
            table,
        })
    }

    /// Single-valued field.
    pub fn constant(grid: Grid, value: Vec<f64>) -> Result<Self> {
        let len = grid.num_cells();
        LabelField::new(grid, vec![0; len], vec![value])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub fn value_dim(&self) -> usize {
        self.table[0].len()
    }

    pub fn cell_value(&self, c: usize) -> &[f64] {
        &self.table[self.labels[c]]
    }

    pub fn set_label(&mut self, c: usize, label: usize) -> Result<()> {
        if label >= self.table.len() {
            return invalid(format!("label {label} missing from the value table"));
        }
        self.labels[c] = label;
        Ok(())
    }

    /// Applies `map` to every table value.
    pub fn map_values(&self, map: impl Fn(&[f64]) -> Vec<f64>) -> LabelField {
        LabelField {
            grid: self.grid.clone(),
            labels: self.labels.clone(),
            table: self.table.iter().map(|v| map(v)).collect(),
        }
    }

    /// Merges labels carrying identical values and drops unused ones, so that
    /// every labelled edge carries a nonzero jump. Labels are renumbered in
    /// order of first use.
    pub fn canonicalize(&self) -> LabelField {
        let mut table: Vec<Vec<f64>> = Vec::new();
        let mut remap: Vec<Option<usize>> = vec![None; self.table.len()];
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if let Some(r) = remap[l] {
                    return r;
                }
                let v = &self.table[l];
                let r = match table.iter().position(|w| w == v) {
                    Some(r) => r,
                    None => {
                        table.push(v.clone());
                        table.len() - 1
                    }
                };
                remap[l] = Some(r);
                r
            })
            .collect();
        LabelField {
            grid: self.grid.clone(),
            labels,
            table,
        }
    }

    /// Restriction of the cells in `keep` to a fresh label field with the
    /// same grid; other cells take label `fill`.
    pub fn with_cells(&self, keep: &[bool], fill: usize) -> Result<LabelField> {
        let labels = self
            .labels
            .iter()
            .zip(keep)
            .map(|(&l, &k)| if k { l } else { fill })
            .collect();
        LabelField::new(self.grid.clone(), labels, self.table.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid {
        Grid::new(&Cube::new(vec![0.0, 0.0], 1.0).unwrap(), n).unwrap()
    }

    #[test]
    fn band_counts() {
        let b = boundary_band(&grid(4), 1).unwrap();
        assert_eq!(b.masked_cells(), 12);
        let b = boundary_band(&grid(8), 3).unwrap();
        assert_eq!(b.masked_cells(), 64 - 4);
        assert!(boundary_band(&grid(8), 4).is_err());
        assert_eq!(default_band_width(64), 8);
        assert_eq!(default_band_width(4), 1);
        assert_eq!(default_band_width(9), 2);
    }

    #[test]
    fn positions_follow_frame() {
        let nu = UnitVector::new(vec![1.0, 0.0]).unwrap();
        let g = Grid::over(vec![1.0, 2.0], 2.0, Some(&nu), 2).unwrap();
        // last lattice axis is ν
        let top = g.lattice_point(&[1.0, 2.0]);
        assert!((top[0] - 2.0).abs() < 1e-15 && (top[1] - 2.0).abs() < 1e-15);
        let c = g.cell_center(0);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn canonicalize_merges_equal_values() {
        let g = grid(2);
        let u = LabelField::new(g, vec![0, 1, 2, 1], vec![vec![1.0], vec![1.0], vec![3.0]]).unwrap();
        let c = u.canonicalize();
        assert_eq!(c.labels(), &[0, 0, 1, 0]);
        assert_eq!(c.table(), &[vec![1.0], vec![3.0]]);
    }

    #[test]
    fn json_round_trip() {
        let nu = UnitVector::new(vec![0.6, -0.8]).unwrap();
        let g = Grid::over(vec![0.5, 0.0], 3.0, Some(&nu), 3).unwrap();
        let u = LabelField::new(g.clone(), (0..9).map(|c| c % 2).collect(), vec![vec![0.0], vec![2.5]])
            .unwrap();
        let back: LabelField = serde_json::from_str(&serde_json::to_string(&u).unwrap()).unwrap();
        assert_eq!(back, u);
        let w = GridFunction::new(g, 1, (0..16).map(|k| k as f64).collect()).unwrap();
        let back: GridFunction = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(LabelField::new(grid(2), vec![0, 0, 0, 5], vec![vec![0.0]]).is_err());
        assert!(GridFunction::new(grid(2), 1, vec![f64::NAN; 9]).is_err());
        assert!(GridFunction::new(grid(2), 1, vec![0.0; 8]).is_err());
        assert!(Grid::new(&Cube::new(vec![0.0], 1.0).unwrap(), 1).is_err());
    }
}
