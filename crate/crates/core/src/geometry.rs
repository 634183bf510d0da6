//! Cubes, rotated cubes, rotation frames and the generator fields `ℓ_ξ`, `u_{x,ζ,ν}`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::{Field, Grid, GridFunction, LabelField};
use crate::linalg::{dot, norm, Matrix};

/// Tolerance on `| |ν| - 1 |` accepted by [`UnitVector::new`].
pub const UNIT_TOL: f64 = 1e-12;
/// Coordinates with magnitude at or below this are treated as zero when
/// locating the last nonzero entry of a normal.
pub const ZERO_COORD_TOL: f64 = 1e-14;

/// A point of the unit sphere `S^{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let nrm = norm(&coords);
        if coords.is_empty() || !nrm.is_finite() || (nrm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm: nrm });
        }
        Ok(UnitVector(coords))
    }

    /// Normalises `coords`; fails only for the zero vector.
    pub fn normalized(coords: Vec<f64>) -> Result<Self> {
        let nrm = norm(&coords);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::NotUnit { norm: nrm });
        }
        Ok(UnitVector(coords.into_iter().map(|c| c / nrm).collect()))
    }

    /// The canonical basis vector `e_i` (0-based index) of ℝⁿ.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        UnitVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        UnitVector(self.0.iter().map(|c| -c).collect())
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        UnitVector::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(v: UnitVector) -> Self {
        v.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hemisphere {
    Plus,
    Minus,
}

/// Which of the half-spheres `Ŝ^{n-1}_±` contains `nu`: the sign of the last
/// coordinate whose magnitude exceeds [`ZERO_COORD_TOL`].
pub fn hemisphere_of(nu: &[f64]) -> Result<Hemisphere> {
    match nu.iter().rposition(|c| c.abs() > ZERO_COORD_TOL) {
        Some(i) if nu[i] > 0.0 => Ok(Hemisphere::Plus),
        Some(_) => Ok(Hemisphere::Minus),
        None => Err(Error::NotUnit { norm: norm(nu) }),
    }
}

/// Orthogonal matrix `R_ν` with `R_ν e_n = ν`, built from the stereographic
/// charts so that `R_{-ν}` and `R_ν` share their first `n-1` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationFrame {
    pub matrix: Matrix,
    pub normal: UnitVector,
}

impl RotationFrame {
    pub fn identity(n: usize) -> Self {
        RotationFrame {
            matrix: Matrix::identity(n),
            normal: UnitVector::basis(n, n - 1),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    /// Maps local coordinates to physical offsets: `R · s`.
    pub fn apply(&self, local: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(local)
    }

    /// Maps physical offsets to local coordinates: `Rᵀ · y`.
    pub fn apply_transpose(&self, phys: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| self.matrix.get(i, j) * phys[i]).sum())
            .collect()
    }
}

/// Builds `R_ν`.
///
/// For `ν ∈ Ŝ_+` the tangent columns are `∂_iψ_-(φ_-(ν))` normalised, where
/// `φ_-` is the stereographic projection from `-e_n`; for `ν ∈ Ŝ_-` the
/// projection from `+e_n` is used. With `y = φ_∓(ν)` the normalised columns are
///
/// ```text
/// ν_i = ((1+|y|²) e_i − 2 y_i y , ∓2 y_i) / (1+|y|²)
/// ```
///
/// which reduces to `e_i` at `ν = ±e_n`. For `n = 1` the frame is the 1×1
/// matrix `(ν)`.
pub fn rotation_frame(nu: &UnitVector) -> Result<RotationFrame> {
    let n = nu.dim();
    let v = nu.as_slice();
    if n == 1 {
        return Ok(RotationFrame {
            matrix: Matrix::from_rows(1, 1, vec![v[0]]),
            normal: nu.clone(),
        });
    }
    let hemi = hemisphere_of(v)?;
    let last = v[n - 1];
    // y = φ_-(ν) = ν'/(1+ν_n) on Ŝ_+, y = φ_+(ν) = ν'/(1-ν_n) on Ŝ_-.
    let (denom, last_sign) = match hemi {
        Hemisphere::Plus => (1.0 + last, -1.0),
        Hemisphere::Minus => (1.0 - last, 1.0),
    };
    let y: Vec<f64> = v[..n - 1].iter().map(|c| c / denom).collect();
    let y2 = dot(&y, &y);
    let conf = 1.0 + y2;

    let mut m = Matrix::zeros(n, n);
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let delta = if i == j { conf } else { 0.0 };
            m.set(j, i, (delta - 2.0 * y[i] * y[j]) / conf);
        }
        m.set(n - 1, i, last_sign * 2.0 * y[i] / conf);
    }
    for j in 0..n {
        m.set(j, n - 1, v[j]);
    }
    Ok(RotationFrame {
        matrix: m,
        normal: nu.clone(),
    })
}

/// Axis-aligned open cube `Q_ρ(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub side: f64,
}

impl Cube {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        if !(side > 0.0) || !side.is_finite() {
            return invalid(format!("cube side must be positive, got {side}"));
        }
        if center.is_empty() {
            return invalid("cube center must have at least one coordinate");
        }
        Ok(Cube { center, side })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }
}

/// `Q^ν_ρ(x) = R_ν Q_ρ(0) + x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotatedCube {
    pub cube: Cube,
    pub frame: RotationFrame,
}

impl RotatedCube {
    pub fn new(center: Vec<f64>, side: f64, nu: &UnitVector) -> Result<Self> {
        if center.len() != nu.dim() {
            return Err(Error::Dimension {
                expected: center.len(),
                got: nu.dim(),
            });
        }
        Ok(RotatedCube {
            cube: Cube::new(center, side)?,
            frame: rotation_frame(nu)?,
        })
    }

    /// All `2^n` vertices, in sign-pattern order.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let n = self.cube.dim();
        let half = self.cube.side / 2.0;
        (0..1usize << n)
            .map(|mask| {
                let local: Vec<f64> = (0..n)
                    .map(|k| if mask >> k & 1 == 1 { half } else { -half })
                    .collect();
                let off = self.frame.apply(&local);
                off.iter().zip(&self.cube.center).map(|(o, c)| o + c).collect()
            })
            .collect()
    }
}

/// The boundary data of the two cell problems, plus constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldGenerator {
    /// `ℓ_ξ(y) = ξ y`.
    Linear { xi: Matrix },
    /// `u_{x,ζ,ν}(y) = ζ` if `(y-x)·ν ≥ 0`, else 0.
    PureJump {
        x: Vec<f64>,
        zeta: Vec<f64>,
        nu: UnitVector,
    },
    Constant { c: Vec<f64> },
}

impl FieldGenerator {
    pub fn linear(xi: Matrix) -> Self {
        FieldGenerator::Linear { xi }
    }

    pub fn pure_jump(x: Vec<f64>, zeta: Vec<f64>, nu: UnitVector) -> Result<Self> {
        if norm(&zeta) == 0.0 {
            return invalid("pure jump requires a nonzero jump vector");
        }
        if x.len() != nu.dim() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: nu.dim(),
            });
        }
        Ok(FieldGenerator::PureJump { x, zeta, nu })
    }

    pub fn value_dim(&self) -> usize {
        match self {
            FieldGenerator::Linear { xi } => xi.rows,
            FieldGenerator::PureJump { zeta, .. } => zeta.len(),
            FieldGenerator::Constant { c } => c.len(),
        }
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        match self {
            FieldGenerator::Linear { xi } => xi.mul_vec(y),
            FieldGenerator::PureJump { x, zeta, nu } => {
                let s: f64 = y
                    .iter()
                    .zip(x)
                    .zip(nu.as_slice())
                    .map(|((yi, xi), ni)| (yi - xi) * ni)
                    .sum();
                if s >= 0.0 {
                    zeta.clone()
                } else {
                    vec![0.0; zeta.len()]
                }
            }
            FieldGenerator::Constant { c } => c.clone(),
        }
    }
}

/// Samples `gen` on `grid`: nodal values for linear/constant generators, a
/// two-label field (label 0 ↦ 0, label 1 ↦ ζ) from cell centres for pure jumps.
pub fn generate_on_grid(gen: &FieldGenerator, grid: &Grid) -> Result<Field> {
    match gen {
        FieldGenerator::PureJump { zeta, .. } => {
            let m = zeta.len();
            let labels = (0..grid.num_cells())
                .map(|c| {
                    let y = grid.cell_center(c);
                    if norm(&gen.eval(&y)) > 0.0 {
                        1
                    } else {
                        0
                    }
                })
                .collect();
            Ok(Field::Labels(LabelField::new(
                grid.clone(),
                labels,
                vec![vec![0.0; m], zeta.clone()],
            )?))
        }
        _ => {
            let m = gen.value_dim();
            let mut values = Vec::with_capacity(grid.num_nodes() * m);
            for k in 0..grid.num_nodes() {
                values.extend(gen.eval(&grid.node_position(k)));
            }
            Ok(Field::Nodal(GridFunction::new(grid.clone(), m, values)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hemisphere_examples() {
        assert_eq!(hemisphere_of(&[0.0, 1.0]).unwrap(), Hemisphere::Plus);
        assert_eq!(hemisphere_of(&[1.0, 0.0]).unwrap(), Hemisphere::Plus);
        assert_eq!(hemisphere_of(&[0.6, -0.8]).unwrap(), Hemisphere::Minus);
        assert_eq!(hemisphere_of(&[-1.0, 1e-15]).unwrap(), Hemisphere::Minus);
        assert!(hemisphere_of(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn unit_vector_rejects_non_unit() {
        assert!(UnitVector::new(vec![1.0, 1.0]).is_err());
        assert!(UnitVector::new(vec![0.6, 0.8]).is_ok());
        assert!(UnitVector::normalized(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn frame_at_poles() {
        for n in 1..=4 {
            let e = UnitVector::basis(n, n - 1);
            let r = rotation_frame(&e).unwrap();
            assert!(r.matrix.max_abs_diff(&Matrix::identity(n)) < 1e-15);

            let r = rotation_frame(&e.neg()).unwrap();
            let mut expect = Matrix::identity(n);
            expect.set(n - 1, n - 1, -1.0);
            assert!(r.matrix.max_abs_diff(&expect) < 1e-15, "n={n}");
        }
    }

    #[test]
    fn frame_one_dimensional() {
        let r = rotation_frame(&UnitVector::new(vec![-1.0]).unwrap()).unwrap();
        assert_eq!(r.matrix.data, vec![-1.0]);
    }

    #[test]
    fn rotated_cube_vertex_symmetry() {
        let nu = UnitVector::normalized(vec![0.3, -0.7]).unwrap();
        let a = RotatedCube::new(vec![0.1, 0.2], 2.0, &nu).unwrap();
        let b = RotatedCube::new(vec![0.1, 0.2], 2.0, &nu.neg()).unwrap();
        for v in a.vertices() {
            assert!(b
                .vertices()
                .iter()
                .any(|w| w.iter().zip(&v).all(|(p, q)| (p - q).abs() < 1e-12)));
        }
    }

    #[test]
    fn pure_jump_tie_goes_to_zeta() {
        let g = FieldGenerator::pure_jump(
            vec![0.0, 0.0],
            vec![2.0],
            UnitVector::basis(2, 1),
        )
        .unwrap();
        assert_eq!(g.eval(&[5.0, 0.0]), vec![2.0]);
        assert_eq!(g.eval(&[5.0, -1e-300]), vec![0.0]);
        assert!(FieldGenerator::pure_jump(vec![0.0], vec![0.0], UnitVector::basis(1, 0)).is_err());
    }
}
