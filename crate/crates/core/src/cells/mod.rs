//! Discretised cell problems: the volume problem with affine boundary data
//! `ℓ_ξ` and the surface problem with pure-jump boundary data `u_{x,ζ,ν}`.

mod bruteforce;
mod surface;
mod volume;

use serde::{Deserialize, Serialize};

use crate::fields::Field;

pub use bruteforce::{surface_bruteforce, BRUTEFORCE_MAX_FREE_CELLS};
pub use surface::{polyline_energy, solve_surface_cell, Stencil, SurfaceCellSpec};
pub use volume::{solve_volume_cell, SolverOptions, VolumeCellSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Which algorithm produced the result.
    pub method: String,
    pub iterations: usize,
    /// Final (relative) residual or gradient norm; 0 for combinatorial solves.
    pub residual: f64,
    /// `false` when an iterative solve hit its budget before reaching tolerance.
    pub certified: bool,
    /// Number of segments of the optimal interface (surface problems).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_segments: Option<usize>,
    /// Euclidean length of the optimal interface (surface problems).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_length: Option<f64>,
}

/// Value and minimiser of a discrete cell problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub value: f64,
    /// Minimising field. Surface problems solved with diagonal stencils
    /// return the interface as [`polyline`](Self::polyline) instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimiser: Option<Field>,
    /// Physical vertices of the full interface, band segments included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polyline: Option<Vec<Vec<f64>>>,
    pub diagnostics: Diagnostics,
}

impl CellResult {
    /// Copy without the minimiser, for compact reporting.
    pub fn summary(&self) -> CellResult {
        CellResult {
            minimiser: None,
            polyline: None,
            ..self.clone()
        }
    }
}
