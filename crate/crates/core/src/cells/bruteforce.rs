use super::{CellResult, Diagnostics, SurfaceCellSpec};
use crate::error::{invalid, Result};
use crate::fields::{boundary_band, discrete_surface_energy, Field, LabelField};

/// Largest number of free cells [`surface_bruteforce`] will enumerate.
pub const BRUTEFORCE_MAX_FREE_CELLS: usize = 22;

/// Exhaustive two-label minimisation of the surface cell problem: every
/// assignment of {0, ζ} to the cells outside the band is tried. The stencil
/// of `spec` is ignored; the energy is that of label fields.
pub fn surface_bruteforce(spec: &SurfaceCellSpec) -> Result<CellResult> {
    let grid = spec.validate()?;
    let band = boundary_band(&grid, spec.band_width)?;
    let datum = spec.datum()?;
    let free: Vec<usize> = (0..grid.num_cells()).filter(|&c| !band.cells[c]).collect();
    if free.len() > BRUTEFORCE_MAX_FREE_CELLS {
        return invalid(format!(
            "{} free cells exceed the brute-force limit of {BRUTEFORCE_MAX_FREE_CELLS}",
            free.len()
        ));
    }
    let mut labels = datum.labels().to_vec();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let table = datum.table().to_vec();
    for mask in 0u64..1 << free.len() {
        for (b, &c) in free.iter().enumerate() {
            labels[c] = (mask >> b & 1) as usize;
        }
        let u = LabelField::new(grid.clone(), labels.clone(), table.clone())?;
        let e = discrete_surface_energy(&spec.g, &u)?;
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            best = Some((e, labels.clone()));
        }
    }
    let (value, labels) = best.expect("at least one assignment");
    Ok(CellResult {
        value,
        minimiser: Some(Field::Labels(LabelField::new(grid, labels, table)?)),
        polyline: None,
        diagnostics: Diagnostics {
            method: "bruteforce".into(),
            iterations: 1 << free.len(),
            residual: 0.0,
            certified: true,
            path_segments: None,
            path_length: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::solve_surface_cell;
    use crate::geometry::UnitVector;
    use crate::integrands::checkerboard_toughness;

    #[test]
    fn agrees_with_dijkstra_on_small_cells() {
        let g = checkerboard_toughness(1.0, 4.0, 1.0).unwrap();
        for (n, nu) in [(4, vec![0.0, 1.0]), (5, vec![0.6, 0.8]), (6, vec![-0.28, 0.96])] {
            let spec = SurfaceCellSpec::new(
                g.clone(),
                vec![1.0, -0.5],
                UnitVector::new(nu).unwrap(),
                vec![0.3, -0.2],
                2.5,
                n,
            )
            .with_band(1);
            let a = solve_surface_cell(&spec).unwrap().value;
            let b = surface_bruteforce(&spec).unwrap().value;
            assert!((a - b).abs() <= 1e-12 * b, "N={n}: {a} vs {b}");
        }
    }

    #[test]
    fn refuses_large_grids() {
        let g = checkerboard_toughness(1.0, 4.0, 1.0).unwrap();
        let spec = SurfaceCellSpec::new(g, vec![1.0], UnitVector::basis(2, 1), vec![0.0, 0.0], 1.0, 8).with_band(1);
        assert!(surface_bruteforce(&spec).is_err());
    }
}
