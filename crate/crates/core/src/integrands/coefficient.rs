use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{dot, norm};

/// Scalar spatial coefficient `a(x)` (or toughness `κ(x)`) of a built-in family.
///
/// Periodic media use the cell `[0, period)ⁿ`; the value at the lower-left
/// corner of the cell is `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficient {
    Constant {
        value: f64,
    },
    /// `a` where `frac(x·normal / period) < 1/2`, `b` elsewhere.
    Laminate {
        a: f64,
        b: f64,
        period: f64,
        normal: Vec<f64>,
    },
    /// `a` where `Σ_i floor(2 x_i / period)` is even, `b` elsewhere.
    Checkerboard { a: f64, b: f64, period: f64 },
    /// `base + amplitude · sin²(2π x_axis / period)`.
    SinSquared {
        base: f64,
        amplitude: f64,
        period: f64,
        axis: usize,
    },
    /// Periodic piecewise-constant table of `size^n` values (row-major in
    /// `x_n, …, x_1`, so that `x_1` varies fastest).
    Pixels {
        period: f64,
        size: usize,
        values: Vec<f64>,
    },
}

impl Coefficient {
    pub fn constant(value: f64) -> Self {
        Coefficient::Constant { value }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                invalid(format!("{name} must be positive and finite, got {v}"))
            }
        };
        match self {
            Coefficient::Constant { value } => positive("coefficient value", *value),
            Coefficient::Laminate {
                a,
                b,
                period,
                normal,
            } => {
                positive("a", *a)?;
                positive("b", *b)?;
                positive("period", *period)?;
                if (norm(normal) - 1.0).abs() > 1e-12 {
                    return invalid("laminate normal must be a unit vector");
                }
                Ok(())
            }
            Coefficient::Checkerboard { a, b, period } => {
                positive("a", *a)?;
                positive("b", *b)?;
                positive("period", *period)
            }
            Coefficient::SinSquared {
                base,
                amplitude,
                period,
                ..
            } => {
                positive("base", *base)?;
                positive("period", *period)?;
                if !(*amplitude >= 0.0) {
                    return invalid("amplitude must be nonnegative");
                }
                Ok(())
            }
            Coefficient::Pixels {
                period,
                size,
                values,
            } => {
                positive("period", *period)?;
                if *size == 0 || values.is_empty() {
                    return invalid("pixel table must be nonempty");
                }
                let mut len = 1usize;
                let mut ok = false;
                for _ in 0..4 {
                    len *= size;
                    ok |= len == values.len();
                }
                if !ok {
                    return invalid("pixel table length must be size^n");
                }
                for v in values {
                    positive("pixel value", *v)?;
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Coefficient::Constant { value } => *value,
            Coefficient::Laminate {
                a,
                b,
                period,
                normal,
            } => {
                let s = dot(x, normal) / period;
                if s - s.floor() < 0.5 {
                    *a
                } else {
                    *b
                }
            }
            Coefficient::Checkerboard { a, b, period } => {
                let parity: i64 = x
                    .iter()
                    .map(|xi| (2.0 * xi / period).floor() as i64)
                    .sum();
                if parity.rem_euclid(2) == 0 {
                    *a
                } else {
                    *b
                }
            }
            Coefficient::SinSquared {
                base,
                amplitude,
                period,
                axis,
            } => {
                let s = (2.0 * std::f64::consts::PI * x[*axis] / period).sin();
                base + amplitude * s * s
            }
            Coefficient::Pixels {
                period,
                size,
                values,
            } => {
                let mut idx = 0usize;
                let mut stride = 1usize;
                for xi in x {
                    let s = xi / period;
                    let frac = s - s.floor();
                    let k = ((frac * *size as f64).floor() as usize).min(size - 1);
                    idx += k * stride;
                    stride *= size;
                }
                values[idx % values.len()]
            }
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            Coefficient::Constant { value } => *value,
            Coefficient::Laminate { a, b, .. } | Coefficient::Checkerboard { a, b, .. } => a.min(*b),
            Coefficient::SinSquared { base, .. } => *base,
            Coefficient::Pixels { values, .. } => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            Coefficient::Constant { value } => *value,
            Coefficient::Laminate { a, b, .. } | Coefficient::Checkerboard { a, b, .. } => a.max(*b),
            Coefficient::SinSquared {
                base, amplitude, ..
            } => base + amplitude,
            Coefficient::Pixels { values, .. } => values.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Spatial period, `None` for constants.
    pub fn period(&self) -> Option<f64> {
        match self {
            Coefficient::Constant { .. } => None,
            Coefficient::Laminate { period, .. }
            | Coefficient::Checkerboard { period, .. }
            | Coefficient::SinSquared { period, .. }
            | Coefficient::Pixels { period, .. } => Some(*period),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Coefficient::Constant { .. }) || self.min() == self.max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkerboard_parity_convention() {
        let c = Coefficient::Checkerboard {
            a: 1.0,
            b: 2.0,
            period: 1.0,
        };
        assert_eq!(c.eval(&[0.25, 0.25]), 1.0);
        assert_eq!(c.eval(&[0.75, 0.25]), 2.0);
        assert_eq!(c.eval(&[0.75, 0.75]), 1.0);
        assert_eq!(c.eval(&[-0.25, 0.25]), 2.0);
    }

    #[test]
    fn laminate_lower_left_is_a() {
        let c = Coefficient::Laminate {
            a: 1.0,
            b: 4.0,
            period: 1.0,
            normal: vec![1.0],
        };
        assert_eq!(c.eval(&[0.0]), 1.0);
        assert_eq!(c.eval(&[0.49]), 1.0);
        assert_eq!(c.eval(&[0.5]), 4.0);
        assert_eq!(c.eval(&[-0.25]), 4.0);
        assert_eq!(c.eval(&[3.1]), 1.0);
    }

    #[test]
    fn pixels_are_periodic() {
        let c = Coefficient::Pixels {
            period: 2.0,
            size: 2,
            values: vec![1.0, 2.0, 3.0, 4.0],
        };
        c.validate().unwrap();
        assert_eq!(c.eval(&[0.5, 0.5]), 1.0);
        assert_eq!(c.eval(&[1.5, 0.5]), 2.0);
        assert_eq!(c.eval(&[0.5, 1.5]), 3.0);
        assert_eq!(c.eval(&[-0.5, -0.5]), 4.0);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(Coefficient::Laminate {
            a: 0.0,
            b: 1.0,
            period: 1.0,
            normal: vec![1.0]
        }
        .validate()
        .is_err());
        assert!(Coefficient::constant(-1.0).validate().is_err());
    }
}
