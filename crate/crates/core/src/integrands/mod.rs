//! Volume integrands `f(x, ξ)` and surface integrands `g(x, ζ, ν)` with their
//! structural constants, the built-in periodic families, and the rescaling
//! and `ε|ζ|` perturbation operations.

mod check;
mod coefficient;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{norm, Matrix};

pub use check::{
    check_surface_fn, check_surface_integrand, check_volume_fn, check_volume_integrand,
    ConditionResult, PropertyReport, SamplePlan,
};
pub use coefficient::Coefficient;

/// Nondecreasing continuous modulus with `σ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulus {
    /// `σ(t) = lipschitz · t`.
    Linear { lipschitz: f64 },
}

impl Modulus {
    pub fn linear(lipschitz: f64) -> Self {
        Modulus::Linear { lipschitz }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Modulus::Linear { lipschitz } => lipschitz * t,
        }
    }

    fn add_linear(self, extra: f64) -> Self {
        match self {
            Modulus::Linear { lipschitz } => Modulus::Linear {
                lipschitz: lipschitz + extra,
            },
        }
    }
}

/// The constants `p, c₁, …, c₅` and moduli `σ₁, σ₂` of the classes F and G.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrandConstants {
    pub p: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub sigma1: Modulus,
    pub sigma2: Modulus,
}

impl IntegrandConstants {
    pub fn validate(&self) -> Result<()> {
        let c = self;
        if !(c.p > 1.0 && c.p.is_finite()) {
            return invalid(format!("p must satisfy 1 < p < ∞, got {}", c.p));
        }
        if !(0.0 < c.c1 && c.c1 <= c.c2 && c.c2.is_finite()) {
            return invalid(format!("need 0 < c1 ≤ c2, got {} and {}", c.c1, c.c2));
        }
        if !(c.c3 >= 1.0 && c.c3.is_finite()) {
            return invalid(format!("need c3 ≥ 1, got {}", c.c3));
        }
        if !(0.0 < c.c4 && c.c4 <= c.c5 && c.c5.is_finite()) {
            return invalid(format!("need 0 < c4 ≤ c5, got {} and {}", c.c4, c.c5));
        }
        for s in [c.sigma1, c.sigma2] {
            if s.eval(0.0).abs() > 1e-12 || !(s.eval(1.0) >= 0.0) {
                return invalid("moduli must vanish at 0 and be nondecreasing");
            }
        }
        Ok(())
    }

    /// Constants for a volume-only use; surface entries are set to 1.
    fn volume(p: f64, c1: f64, c2: f64, sigma1: Modulus) -> Self {
        IntegrandConstants {
            p,
            c1,
            c2,
            c3: 1.0,
            c4: 1.0,
            c5: 1.0,
            sigma1,
            sigma2: Modulus::linear(0.0),
        }
    }

    /// Constants for a surface-only use; volume entries are those of `|ξ|²`.
    fn surface(c3: f64, c4: f64, c5: f64, sigma2: Modulus) -> Self {
        IntegrandConstants {
            p: 2.0,
            c1: 1.0,
            c2: 1.0,
            c3,
            c4,
            c5,
            sigma1: Modulus::linear(2.0),
            sigma2,
        }
    }
}

type VolumeFn = dyn Fn(&[f64], &Matrix) -> f64 + Send + Sync;
type SurfaceFn = dyn Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync;

/// A user-supplied evaluator, used by tests and for wrapping computed
/// homogenised integrands. Not serialisable.
#[derive(Clone)]
pub struct CustomVolume {
    pub label: String,
    pub eval: Arc<VolumeFn>,
}

impl fmt::Debug for CustomVolume {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomVolume({})", self.label)
    }
}

#[derive(Clone)]
pub struct CustomSurface {
    pub label: String,
    pub eval: Arc<SurfaceFn>,
}

impl fmt::Debug for CustomSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomSurface({})", self.label)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum VolumeFamily {
    /// `f(x, ξ) = a(x) |ξ|^p`.
    Power { coefficient: Coefficient, p: f64 },
    #[serde(skip)]
    Custom(CustomVolume),
}

/// Dependence of a toughness-type surface integrand on the jump amplitude `t = |ζ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpProfile {
    /// `h(t) = 1` (Mumford–Shah).
    Constant,
    /// `h(t) = 1 + t`.
    Affine,
    /// `ĥ(t) = t` on `[0,1]`, `t/c₃` on `[c₃,∞)`, and on `[1,c₃]` the
    /// nonmonotone interpolant `t/c₃ + (1 − t/c₃)·|2(t−1)/(c₃−1) − 1|`, which
    /// stays in `[t/c₃, 1]` and touches `t/c₃` at the midpoint.
    Hat { c3: f64 },
}

impl JumpProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            JumpProfile::Constant => 1.0,
            JumpProfile::Affine => 1.0 + t,
            JumpProfile::Hat { c3 } => {
                if t <= 1.0 {
                    t
                } else if t >= c3 {
                    t / c3
                } else {
                    let lo = t / c3;
                    let s = (2.0 * (t - 1.0) / (c3 - 1.0) - 1.0).abs();
                    lo + (1.0 - lo) * s
                }
            }
        }
    }

    /// `(c₃, lower factor, upper factor, Lipschitz factor of σ₂ per unit κ)`.
    fn constants(&self) -> (f64, f64, f64, f64) {
        match *self {
            JumpProfile::Constant => (1.0, 1.0, 1.0, 0.0),
            // κ|t₂−t₁| ≤ (|t₂−t₁|/2)·κ(2 + t₁ + t₂)
            JumpProfile::Affine => (1.0, 1.0, 1.0, 0.5),
            // Bounds hold for |ζ| ≥ 1/c₃ only; below that (g5) and (g2) fail.
            JumpProfile::Hat { c3 } => {
                let lip = if c3 > 1.0 { (4.0 / c3).max(1.0) } else { 1.0 };
                (c3, 1.0 / c3, 1.0, lip * c3 / 2.0)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SurfaceFamily {
    /// `g(x, ζ, ν) = κ(x) · h(|ζ|)`.
    Toughness {
        coefficient: Coefficient,
        profile: JumpProfile,
    },
    #[serde(skip)]
    Custom(CustomSurface),
}

/// Serialisable description of a volume integrand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeDescriptor {
    #[serde(flatten)]
    pub family: VolumeFamily,
    #[serde(default = "one")]
    pub length_scale: f64,
}

/// Serialisable description of a surface integrand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceDescriptor {
    #[serde(flatten)]
    pub family: SurfaceFamily,
    #[serde(default = "one")]
    pub length_scale: f64,
    #[serde(default)]
    pub perturbation: f64,
}

fn one() -> f64 {
    1.0
}

/// Volume integrand `f(x/ε, ξ)` with its constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "VolumeDescriptor", into = "VolumeDescriptor")]
pub struct VolumeIntegrand {
    family: VolumeFamily,
    constants: IntegrandConstants,
    length_scale: f64,
}

impl TryFrom<VolumeDescriptor> for VolumeIntegrand {
    type Error = Error;
    fn try_from(d: VolumeDescriptor) -> Result<Self> {
        let base = match d.family {
            VolumeFamily::Power { coefficient, p } => periodic_volume(coefficient, p)?,
            VolumeFamily::Custom(_) => return invalid("custom integrands cannot be described"),
        };
        if !(d.length_scale > 0.0) {
            return invalid("length scale must be positive");
        }
        Ok(base.rescaled(d.length_scale))
    }
}

impl From<VolumeIntegrand> for VolumeDescriptor {
    fn from(f: VolumeIntegrand) -> Self {
        VolumeDescriptor {
            family: f.family,
            length_scale: f.length_scale,
        }
    }
}

impl VolumeIntegrand {
    pub fn custom(
        label: impl Into<String>,
        constants: IntegrandConstants,
        eval: impl Fn(&[f64], &Matrix) -> f64 + Send + Sync + 'static,
    ) -> Self {
        VolumeIntegrand {
            family: VolumeFamily::Custom(CustomVolume {
                label: label.into(),
                eval: Arc::new(eval),
            }),
            constants,
            length_scale: 1.0,
        }
    }

    pub fn constants(&self) -> &IntegrandConstants {
        &self.constants
    }

    pub fn family(&self) -> &VolumeFamily {
        &self.family
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn descriptor(&self) -> VolumeDescriptor {
        self.clone().into()
    }

    fn local(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|xi| xi / self.length_scale).collect()
    }

    pub fn eval(&self, x: &[f64], xi: &Matrix) -> f64 {
        match &self.family {
            VolumeFamily::Power { coefficient, p } => {
                let a = if coefficient.is_constant() {
                    coefficient.min()
                } else {
                    coefficient.eval(&self.local(x))
                };
                a * xi.norm().powf(*p)
            }
            VolumeFamily::Custom(c) => (c.eval)(&self.local(x), xi),
        }
    }

    /// `∂f/∂ξ` at `(x, ξ)`; central differences for custom integrands.
    pub fn grad_xi(&self, x: &[f64], xi: &Matrix) -> Matrix {
        match &self.family {
            VolumeFamily::Power { coefficient, p } => {
                let a = coefficient.eval(&self.local(x));
                let r = xi.norm();
                let mut g = xi.clone();
                let s = if r > 0.0 { a * p * r.powf(p - 2.0) } else { 0.0 };
                g.data.iter_mut().for_each(|v| *v *= s);
                g
            }
            VolumeFamily::Custom(_) => {
                let mut g = Matrix::zeros(xi.rows, xi.cols);
                let mut probe = xi.clone();
                for k in 0..xi.data.len() {
                    let h = 1e-6 * (1.0 + xi.data[k].abs());
                    probe.data[k] = xi.data[k] + h;
                    let fp = self.eval(x, &probe);
                    probe.data[k] = xi.data[k] - h;
                    let fm = self.eval(x, &probe);
                    probe.data[k] = xi.data[k];
                    g.data[k] = (fp - fm) / (2.0 * h);
                }
                g
            }
        }
    }

    /// For `a(x)|ξ|²` returns the coefficient, which lets solvers use a
    /// linear solve.
    pub fn quadratic_coefficient(&self) -> Option<&Coefficient> {
        match &self.family {
            VolumeFamily::Power { coefficient, p } if *p == 2.0 => Some(coefficient),
            _ => None,
        }
    }

    /// Whether `f` does not depend on `x`.
    pub fn is_homogeneous_in_x(&self) -> bool {
        match &self.family {
            VolumeFamily::Power { coefficient, .. } => coefficient.is_constant(),
            VolumeFamily::Custom(_) => false,
        }
    }

    /// Spatial period of the coefficient, in physical units.
    pub fn period(&self) -> Option<f64> {
        match &self.family {
            VolumeFamily::Power { coefficient, .. } => {
                coefficient.period().map(|p| p * self.length_scale)
            }
            VolumeFamily::Custom(_) => None,
        }
    }

    /// `f_k(x, ξ) := f(x/ε_k, ξ)`.
    pub fn rescaled(&self, eps: f64) -> Self {
        let mut out = self.clone();
        out.length_scale *= eps;
        out
    }
}

/// Surface integrand `g(x/ε, ζ, ν) + δ|ζ|` with its constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SurfaceDescriptor", into = "SurfaceDescriptor")]
pub struct SurfaceIntegrand {
    family: SurfaceFamily,
    constants: IntegrandConstants,
    length_scale: f64,
    perturbation: f64,
}

impl TryFrom<SurfaceDescriptor> for SurfaceIntegrand {
    type Error = Error;
    fn try_from(d: SurfaceDescriptor) -> Result<Self> {
        let base = match d.family {
            SurfaceFamily::Toughness {
                coefficient,
                profile,
            } => toughness(coefficient, profile)?,
            SurfaceFamily::Custom(_) => return invalid("custom integrands cannot be described"),
        };
        if !(d.length_scale > 0.0) {
            return invalid("length scale must be positive");
        }
        let g = base.rescaled(d.length_scale);
        if d.perturbation > 0.0 {
            perturb_surface(&g, d.perturbation)
        } else if d.perturbation == 0.0 {
            Ok(g)
        } else {
            invalid("perturbation must be nonnegative")
        }
    }
}

impl From<SurfaceIntegrand> for SurfaceDescriptor {
    fn from(g: SurfaceIntegrand) -> Self {
        SurfaceDescriptor {
            family: g.family,
            length_scale: g.length_scale,
            perturbation: g.perturbation,
        }
    }
}

impl SurfaceIntegrand {
    pub fn custom(
        label: impl Into<String>,
        constants: IntegrandConstants,
        eval: impl Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SurfaceIntegrand {
            family: SurfaceFamily::Custom(CustomSurface {
                label: label.into(),
                eval: Arc::new(eval),
            }),
            constants,
            length_scale: 1.0,
            perturbation: 0.0,
        }
    }

    pub fn constants(&self) -> &IntegrandConstants {
        &self.constants
    }

    pub fn family(&self) -> &SurfaceFamily {
        &self.family
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn perturbation(&self) -> f64 {
        self.perturbation
    }

    pub fn descriptor(&self) -> SurfaceDescriptor {
        self.clone().into()
    }

    pub fn eval(&self, x: &[f64], zeta: &[f64], nu: &[f64]) -> f64 {
        let t = norm(zeta);
        let base = match &self.family {
            SurfaceFamily::Toughness {
                coefficient,
                profile,
            } => {
                let k = if coefficient.is_constant() {
                    coefficient.min()
                } else {
                    let local: Vec<f64> = x.iter().map(|v| v / self.length_scale).collect();
                    coefficient.eval(&local)
                };
                k * profile.eval(t)
            }
            SurfaceFamily::Custom(c) => {
                let local: Vec<f64> = x.iter().map(|v| v / self.length_scale).collect();
                (c.eval)(&local, zeta, nu)
            }
        };
        if self.perturbation > 0.0 {
            base + self.perturbation * t
        } else {
            base
        }
    }

    /// Whether `g` depends on `ζ` only through a constant factor (Mumford–Shah type).
    pub fn is_amplitude_independent(&self) -> bool {
        self.perturbation == 0.0
            && matches!(
                self.family,
                SurfaceFamily::Toughness {
                    profile: JumpProfile::Constant,
                    ..
                }
            )
    }

    pub fn is_homogeneous_in_x(&self) -> bool {
        match &self.family {
            SurfaceFamily::Toughness { coefficient, .. } => coefficient.is_constant(),
            SurfaceFamily::Custom(_) => false,
        }
    }

    pub fn period(&self) -> Option<f64> {
        match &self.family {
            SurfaceFamily::Toughness { coefficient, .. } => {
                coefficient.period().map(|p| p * self.length_scale)
            }
            SurfaceFamily::Custom(_) => None,
        }
    }

    /// For toughness families, the amplitude profile `h`.
    pub fn profile(&self) -> Option<JumpProfile> {
        match &self.family {
            SurfaceFamily::Toughness { profile, .. } => Some(*profile),
            SurfaceFamily::Custom(_) => None,
        }
    }

    pub fn rescaled(&self, eps: f64) -> Self {
        let mut out = self.clone();
        out.length_scale *= eps;
        out
    }
}

/// `g^ε(x, ζ, ν) = g(x, ζ, ν) + ε|ζ|`. Updates `c₅ ← c₅ + ε` and
/// `σ₂(t) ← σ₂(t) + ε t / (2 c₄)`; `c₃` and `c₄` are unchanged.
pub fn perturb_surface(g: &SurfaceIntegrand, eps: f64) -> Result<SurfaceIntegrand> {
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid(format!("perturbation must be positive, got {eps}"));
    }
    let mut out = g.clone();
    out.perturbation += eps;
    out.constants.c5 += eps;
    out.constants.sigma2 = out
        .constants
        .sigma2
        .add_linear(eps / (2.0 * out.constants.c4));
    Ok(out)
}

/// Either kind of integrand, for code paths generic over both.
#[derive(Debug, Clone)]
pub enum Integrand {
    Volume(VolumeIntegrand),
    Surface(SurfaceIntegrand),
}

/// `x ↦ integrand(x/ε_k, ·)`; constants are unchanged.
pub fn rescale_integrand(f: &Integrand, eps: f64) -> Result<Integrand> {
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid(format!("rescaling factor must be positive, got {eps}"));
    }
    Ok(match f {
        Integrand::Volume(v) => Integrand::Volume(v.rescaled(eps)),
        Integrand::Surface(s) => Integrand::Surface(s.rescaled(eps)),
    })
}

// ---------------------------------------------------------------------------
// Built-in families
// ---------------------------------------------------------------------------

/// `f(x, ξ) = |ξ|^p`.
pub fn mumford_shah_volume(p: f64) -> Result<VolumeIntegrand> {
    periodic_volume(Coefficient::constant(1.0), p)
}

/// `f(x, ξ) = a(x)|ξ|^p` with `c₁ = min a`, `c₂ = max a` and
/// `σ₁(t) = p·max(1, max a)·t`.
pub fn periodic_volume(coefficient: Coefficient, p: f64) -> Result<VolumeIntegrand> {
    coefficient.validate()?;
    // |a|ξ₁|^p − a|ξ₂|^p| ≤ a p M^{p−1}|ξ₁−ξ₂| ≤ p max(1,a)(1 + aM^p)|ξ₁−ξ₂|.
    let lip = p * coefficient.max().max(1.0);
    let constants = IntegrandConstants::volume(
        p,
        coefficient.min(),
        coefficient.max(),
        Modulus::linear(lip),
    );
    constants.validate()?;
    Ok(VolumeIntegrand {
        family: VolumeFamily::Power { coefficient, p },
        constants,
        length_scale: 1.0,
    })
}

/// `g(x, ζ, ν) = κ(x) h(|ζ|)`.
pub fn toughness(coefficient: Coefficient, profile: JumpProfile) -> Result<SurfaceIntegrand> {
    coefficient.validate()?;
    if let JumpProfile::Hat { c3 } = profile {
        if !(c3 >= 1.0 && c3.is_finite()) {
            return invalid(format!("hat profile needs c3 ≥ 1, got {c3}"));
        }
    }
    let (c3, lo, hi, lip) = profile.constants();
    let c4 = coefficient.min() * lo;
    let c5 = coefficient.max() * hi;
    // For the hat profile the Lipschitz factor is relative to c4.
    let sigma = match profile {
        JumpProfile::Hat { .. } => Modulus::linear(lip * coefficient.max() / coefficient.min()),
        _ => Modulus::linear(lip),
    };
    let constants = IntegrandConstants::surface(c3, c4, c5, sigma);
    constants.validate()?;
    Ok(SurfaceIntegrand {
        family: SurfaceFamily::Toughness {
            coefficient,
            profile,
        },
        constants,
        length_scale: 1.0,
        perturbation: 0.0,
    })
}

/// `g ≡ κ` (Mumford–Shah surface term).
pub fn mumford_shah_surface(kappa: f64) -> Result<SurfaceIntegrand> {
    toughness(Coefficient::constant(kappa), JumpProfile::Constant)
}

/// Layered toughness `κ(x)(1 + |ζ|)` with `κ ∈ {a, b}` varying along `layer_normal`.
pub fn laminate_toughness(
    a: f64,
    b: f64,
    period: f64,
    layer_normal: Vec<f64>,
) -> Result<SurfaceIntegrand> {
    toughness(
        Coefficient::Laminate {
            a,
            b,
            period,
            normal: layer_normal,
        },
        JumpProfile::Affine,
    )
}

/// Checkerboard toughness `κ(x)(1 + |ζ|)`.
pub fn checkerboard_toughness(a: f64, b: f64, period: f64) -> Result<SurfaceIntegrand> {
    toughness(Coefficient::Checkerboard { a, b, period }, JumpProfile::Affine)
}

/// `g(x, ζ, ν) = ĥ(|ζ|)` with the nonmonotone hat profile.
pub fn hat_toughness(c3: f64) -> Result<SurfaceIntegrand> {
    toughness(Coefficient::constant(1.0), JumpProfile::Hat { c3 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hat_values() {
        let g = hat_toughness(2.0).unwrap();
        assert_eq!(g.eval(&[0.0], &[0.5], &[1.0]), 0.5);
        assert_eq!(g.eval(&[0.0], &[4.0], &[1.0]), 2.0);
        assert_eq!(g.eval(&[0.0], &[1.0], &[1.0]), 1.0);
        assert_eq!(g.eval(&[0.0], &[2.0], &[1.0]), 1.0);
        // midpoint of [1, c3] touches t/c3
        assert!((g.eval(&[0.0], &[1.5], &[1.0]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn perturbation_arithmetic() {
        let g = mumford_shah_surface(1.0).unwrap();
        let ge = perturb_surface(&g, 0.1).unwrap();
        assert!((ge.eval(&[0.0, 0.0], &[2.0, 0.0], &[0.0, 1.0]) - 1.2).abs() < 1e-15);
        assert_eq!(ge.constants().c5, 1.1);
        assert!(perturb_surface(&g, 0.0).is_err());
    }

    #[test]
    fn perturbation_is_additive() {
        let g = checkerboard_toughness(1.0, 3.0, 1.0).unwrap();
        let twice = perturb_surface(&perturb_surface(&g, 0.1).unwrap(), 0.25).unwrap();
        let once = perturb_surface(&g, 0.35).unwrap();
        for (x, z) in [([0.1, 0.7], [1.0, -2.0]), ([3.3, -0.2], [0.01, 0.0])] {
            let a = twice.eval(&x, &z, &[1.0, 0.0]);
            let b = once.eval(&x, &z, &[1.0, 0.0]);
            assert!((a - b).abs() <= 1e-14 * a.abs());
        }
    }

    #[test]
    fn rescale_by_one_is_identity_and_quarter_shrinks_period() {
        let g = laminate_toughness(1.0, 2.0, 1.0, vec![1.0, 0.0]).unwrap();
        let g1 = g.rescaled(1.0);
        let gq = g.rescaled(0.25);
        for x in [0.1, 0.3, 0.6, 0.9] {
            let z = [1.0, 0.0];
            let n = [0.0, 1.0];
            assert_eq!(g.eval(&[x, 0.0], &z, &n), g1.eval(&[x, 0.0], &z, &n));
            assert_eq!(gq.eval(&[x / 4.0, 0.0], &z, &n), g.eval(&[x, 0.0], &z, &n));
            assert_eq!(
                gq.eval(&[x / 4.0 + 0.25, 0.0], &z, &n),
                gq.eval(&[x / 4.0, 0.0], &z, &n)
            );
        }
        let f = periodic_volume(
            Coefficient::Laminate {
                a: 1.0,
                b: 4.0,
                period: 1.0,
                normal: vec![1.0],
            },
            2.0,
        )
        .unwrap();
        let fk = f.rescaled(0.25);
        let xi = Matrix::from_rows(1, 1, vec![1.0]);
        assert_eq!(fk.eval(&[0.2], &xi), f.eval(&[0.8], &xi));
        assert_eq!(fk.period(), Some(0.25));
    }

    #[test]
    fn laminate_constants() {
        let g = laminate_toughness(3.0, 2.0, 1.0, vec![0.0, 1.0]).unwrap();
        assert_eq!(g.constants().c4, 2.0);
        assert_eq!(g.constants().c5, 3.0);
        let same = laminate_toughness(2.0, 2.0, 1.0, vec![0.0, 1.0]).unwrap();
        assert!(same.is_homogeneous_in_x());
        assert!(laminate_toughness(0.0, 2.0, 1.0, vec![1.0, 0.0]).is_err());
        assert!(laminate_toughness(1.0, 2.0, -1.0, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let g = perturb_surface(
            &laminate_toughness(1.0, 2.0, 0.5, vec![1.0, 0.0]).unwrap().rescaled(0.5),
            0.2,
        )
        .unwrap();
        let json = serde_json::to_string(&g).unwrap();
        let back: SurfaceIntegrand = serde_json::from_str(&json).unwrap();
        assert_eq!(back.constants(), g.constants());
        assert_eq!(
            back.eval(&[0.3, 0.1], &[1.0, 1.0], &[0.0, 1.0]),
            g.eval(&[0.3, 0.1], &[1.0, 1.0], &[0.0, 1.0])
        );
        let f = periodic_volume(
            Coefficient::SinSquared {
                base: 1.0,
                amplitude: 1.0,
                period: 1.0,
                axis: 0,
            },
            3.0,
        )
        .unwrap();
        let back: VolumeIntegrand = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back.constants(), f.constants());
    }
}
