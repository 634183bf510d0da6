use num_rational::Ratio;
use proptest::prelude::*;

use fdhom::cells::{solve_surface_cell, solve_volume_cell, Stencil, SurfaceCellSpec, VolumeCellSpec};
use fdhom::experiments::{solve_ms_1d, solve_ms_1d_exhaustive, DenoiseProblem};
use fdhom::fields::{cell_volume_energies, discrete_surface_energy, discrete_volume_energy, Grid, GridFunction};
use fdhom::geometry::{rotation_frame, Cube, UnitVector};
use fdhom::homogenize::{extrapolate, Extrapolation};
use fdhom::integrands::{periodic_volume, toughness, Coefficient, JumpProfile};
use fdhom::linalg::Matrix;
use fdhom::truncation::smooth_truncate;

type Q = Ratio<i64>;

/// Inverse stereographic image of a rational `y`, on the upper or lower half-sphere.
fn rational_normal(y: &[Q], upper: bool) -> Vec<Q> {
    let y2: Q = y.iter().map(|c| c * c).sum();
    let one = Q::from_integer(1);
    let mut nu: Vec<Q> = y.iter().map(|c| Q::from_integer(2) * c / (one + y2)).collect();
    nu.push(if upper { (one - y2) / (one + y2) } else { (y2 - one) / (one + y2) });
    nu
}

/// The frame formula evaluated in exact arithmetic.
fn rational_frame(y: &[Q], nu: &[Q], upper: bool) -> Vec<Vec<Q>> {
    let n = nu.len();
    let one = Q::from_integer(1);
    let two = Q::from_integer(2);
    let conf = one + y.iter().map(|c| c * c).sum::<Q>();
    let sign = if upper { -one } else { one };
    let mut m = vec![vec![Q::from_integer(0); n]; n];
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let delta = if i == j { conf } else { Q::from_integer(0) };
            m[j][i] = (delta - two * y[i] * y[j]) / conf;
        }
        m[n - 1][i] = sign * two * y[i] / conf;
    }
    for j in 0..n {
        m[j][n - 1] = nu[j];
    }
    m
}

fn small_rational() -> impl Strategy<Value = Q> {
    (-9i64..=9, 10i64..=13).prop_map(|(a, b)| Q::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_frames_are_exactly_orthogonal(y in prop::collection::vec(small_rational(), 1..=2), upper in any::<bool>()) {
        let y2: Q = y.iter().map(|c| c * c).sum();
        prop_assume!(y2 < Q::from_integer(1));
        let nu = rational_normal(&y, upper);
        let m = rational_frame(&y, &nu, upper);
        let n = nu.len();
        for a in 0..n {
            for b in 0..n {
                let dot: Q = (0..n).map(|k| m[k][a] * m[k][b]).sum();
                prop_assert_eq!(dot, Q::from_integer(if a == b { 1 } else { 0 }));
            }
        }
        // the floating-point frame agrees with the exact one
        let to_f = |q: &Q| *q.numer() as f64 / *q.denom() as f64;
        let frame = rotation_frame(&UnitVector::normalized(nu.iter().map(to_f).collect()).unwrap()).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((frame.matrix.get(i, j) - to_f(&m[i][j])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn truncation_is_radial_and_idempotent_below_lambda(lambda in 0.01f64..100.0, z in prop::collection::vec(-300.0f64..300.0, 1..=3)) {
        let psi = smooth_truncate(lambda, &z);
        let nz: f64 = z.iter().map(|c| c * c).sum::<f64>().sqrt();
        let np: f64 = psi.iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assert!(np <= 2.0 * lambda * (1.0 + 1e-12));
        // ψ(ζ) is a nonnegative multiple of ζ
        if np > 0.0 {
            let cos: f64 = z.iter().zip(&psi).map(|(a, b)| a * b).sum::<f64>() / (nz * np);
            prop_assert!((cos - 1.0).abs() < 1e-12);
        }
        let again = smooth_truncate(lambda, &psi);
        if np <= lambda {
            prop_assert_eq!(again, psi);
        }
    }

    #[test]
    fn cell_energies_add_up(n in 1usize..=2, res in 2usize..=6, seed in 0u64..1000) {
        let grid = Grid::new(&Cube::new(vec![0.1; n], 1.3).unwrap(), res).unwrap();
        let values: Vec<f64> = (0..grid.num_nodes()).map(|k| ((k as u64 * 7919 + seed) % 97) as f64 / 13.0).collect();
        let u = GridFunction::new(grid, 1, values).unwrap();
        let f = periodic_volume(Coefficient::Checkerboard { a: 1.0, b: 2.5, period: 0.4 }, 2.0).unwrap();
        let parts: f64 = cell_volume_energies(&f, &u).unwrap().iter().sum();
        let total = discrete_volume_energy(&f, &u).unwrap();
        prop_assert!((parts - total).abs() <= 1e-12 * (1.0 + total));
    }

    #[test]
    fn quadratic_volume_cells_are_even_and_two_homogeneous(a in -2.0f64..2.0, b in -2.0f64..2.0, t in 0.1f64..4.0) {
        prop_assume!(a.abs() + b.abs() > 1e-3);
        let f = periodic_volume(Coefficient::Laminate { a: 1.0, b: 3.0, period: 0.5, normal: vec![0.6, 0.8] }, 2.0).unwrap();
        let solve = |s: f64| {
            let xi = Matrix::from_rows(1, 2, vec![s * a, s * b]);
            solve_volume_cell(&VolumeCellSpec::new(f.clone(), xi, vec![0.2, -0.3], 1.5, 12)).unwrap().value
        };
        let v = solve(1.0);
        prop_assert!((solve(-1.0) - v).abs() <= 1e-9 * v);
        prop_assert!((solve(t) - t * t * v).abs() <= 1e-9 * t * t * v);
    }

    #[test]
    fn surface_value_is_below_the_datum_energy_and_even_in_zeta(
        zeta in 0.1f64..3.0,
        angle in 0.0f64..std::f64::consts::TAU,
        res in 4usize..=12,
        stencil in prop::sample::select(vec![Stencil::Axis, Stencil::Eight, Stencil::Sixteen]),
    ) {
        let g = toughness(Coefficient::Checkerboard { a: 1.0, b: 2.0, period: 0.7 }, JumpProfile::Affine).unwrap();
        let nu = UnitVector::normalized(vec![angle.cos(), angle.sin()]).unwrap();
        let spec = |z: f64| SurfaceCellSpec::new(g.clone(), vec![z], nu.clone(), vec![0.3, 0.1], 2.0, res).with_stencil(stencil);
        let plus = solve_surface_cell(&spec(zeta)).unwrap().value;
        let minus = solve_surface_cell(&spec(-zeta)).unwrap().value;
        prop_assert!((plus - minus).abs() <= 1e-12 * plus);
        if stencil == Stencil::Axis {
            let datum = discrete_surface_energy(&g, &spec(zeta).datum().unwrap()).unwrap();
            prop_assert!(plus <= datum * (1.0 + 1e-12));
        }
    }

    #[test]
    fn extrapolation_fixes_constants(c in -10.0f64..10.0, k in 2usize..6) {
        let radii: Vec<f64> = (0..k).map(|i| 2f64.powi(i as i32 + 1)).collect();
        let values = vec![c; k];
        for method in [Extrapolation::Average, Extrapolation::Richardson] {
            prop_assert!((extrapolate(&radii, &values, method) - c).abs() <= 1e-12 * (1.0 + c.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dp_matches_exhaustive_and_ignores_datum_shifts(
        datum in prop::collection::vec(-1.0f64..1.0, 4..=11),
        kappa in 0.01f64..0.5,
        shift in -5.0f64..5.0,
        budget in 0usize..=2,
    ) {
        let f = periodic_volume(Coefficient::constant(0.3), 2.0).unwrap();
        let g = toughness(Coefficient::Laminate { a: kappa, b: 2.0 * kappa, period: 0.3, normal: vec![1.0] }, JumpProfile::Constant).unwrap();
        let problem = DenoiseProblem::new(0.0, 1.0, datum.clone(), f.clone(), g.clone(), 2.0).unwrap();
        let dp = solve_ms_1d(&problem, budget).unwrap();
        let ex = solve_ms_1d_exhaustive(&problem, budget).unwrap();
        prop_assert!((dp.value - ex.value).abs() <= 1e-12 * (1.0 + ex.value));
        let shifted = DenoiseProblem::new(0.0, 1.0, datum.iter().map(|v| v + shift).collect(), f, g, 2.0).unwrap();
        let sv = solve_ms_1d(&shifted, budget).unwrap().value;
        prop_assert!((sv - dp.value).abs() <= 1e-12 * (1.0 + dp.value) + 1e-13 * shift.abs());
    }
}
