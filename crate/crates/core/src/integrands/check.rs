//! Sampled verification of the structural conditions of the classes F and G.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{IntegrandConstants, SurfaceIntegrand, VolumeIntegrand};
use crate::linalg::{norm, sub, Matrix};

/// Slack allowed on each inequality, relative to the size of its terms.
const REL_SLACK: f64 = 1e-12;

/// Where and how densely the conditions are sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub samples: usize,
    /// Spatial dimension n.
    pub dim: usize,
    /// Value dimension m.
    pub value_dim: usize,
    /// Points x are drawn from `[-x_extent, x_extent]^n`.
    pub x_extent: f64,
    /// Gradients are drawn with Frobenius norm up to this radius.
    pub xi_radius: f64,
    /// Jump amplitudes are drawn from `[zeta_min, zeta_max]`.
    pub zeta_min: f64,
    pub zeta_max: f64,
    pub seed: u64,
}

impl SamplePlan {
    pub fn new(dim: usize, value_dim: usize, samples: usize, seed: u64) -> Self {
        SamplePlan {
            samples,
            dim,
            value_dim,
            x_extent: 4.0,
            xi_radius: 10.0,
            zeta_min: 1e-3,
            zeta_max: 10.0,
            seed,
        }
    }
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan::new(2, 1, 10_000, 0)
    }
}

/// Outcome of one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: String,
    /// `false` for measurability, which cannot be decided by sampling.
    pub checkable: bool,
    /// Informational conditions are not part of the class and never fail the report.
    pub informational: bool,
    pub passed: bool,
    pub samples: usize,
    /// Largest amount by which the inequality was violated (≤ 0 when it held).
    pub max_violation: f64,
    /// The sample attaining `max_violation`, as a flat list of numbers.
    pub worst_sample: Vec<f64>,
}

impl ConditionResult {
    fn new(condition: &str) -> Self {
        ConditionResult {
            condition: condition.to_string(),
            checkable: true,
            informational: false,
            passed: true,
            samples: 0,
            max_violation: f64::NEG_INFINITY,
            worst_sample: Vec::new(),
        }
    }

    fn not_checkable(condition: &str) -> Self {
        ConditionResult {
            checkable: false,
            max_violation: 0.0,
            ..ConditionResult::new(condition)
        }
    }

    /// Records `lhs ≤ rhs` on one sample.
    fn record(&mut self, lhs: f64, rhs: f64, sample: impl FnOnce() -> Vec<f64>) {
        self.samples += 1;
        let violation = lhs - rhs;
        let slack = REL_SLACK * (1.0 + lhs.abs().max(rhs.abs()));
        if violation > self.max_violation {
            self.max_violation = violation;
            self.worst_sample = sample();
        }
        if violation > slack {
            self.passed = false;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub kind: String,
    pub conditions: Vec<ConditionResult>,
    /// Evaluations that were negative or non-finite.
    pub hard_failures: Vec<String>,
}

impl PropertyReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.condition == name)
    }

    pub fn passed(&self, name: &str) -> bool {
        self.condition(name).is_some_and(|c| c.passed)
    }

    /// No hard failures and every checkable, non-informational condition holds.
    pub fn all_passed(&self) -> bool {
        self.hard_failures.is_empty()
            && self
                .conditions
                .iter()
                .filter(|c| c.checkable && !c.informational)
                .all(|c| c.passed)
    }

    /// Like [`all_passed`](Self::all_passed) but restricted to `names`.
    pub fn passed_all_of(&self, names: &[&str]) -> bool {
        self.hard_failures.is_empty() && names.iter().all(|n| self.passed(n))
    }
}

struct Sampler {
    rng: ChaCha8Rng,
    plan: SamplePlan,
}

impl Sampler {
    fn new(plan: &SamplePlan) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(plan.seed),
            plan: plan.clone(),
        }
    }

    fn point(&mut self) -> Vec<f64> {
        let e = self.plan.x_extent;
        (0..self.plan.dim).map(|_| self.rng.gen_range(-e..=e)).collect()
    }

    fn direction(&mut self, len: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..len).map(|_| self.rng.gen_range(-1.0..=1.0)).collect();
            let r = norm(&v);
            if r > 1e-3 && r <= 1.0 {
                return v.into_iter().map(|c| c / r).collect();
            }
        }
    }

    /// A radius in `[lo, hi]`, half the time log-uniform so that small values are covered.
    fn radius(&mut self, lo: f64, hi: f64) -> f64 {
        if self.rng.gen_bool(0.5) || lo <= 0.0 {
            self.rng.gen_range(lo..=hi)
        } else {
            (self.rng.gen_range(lo.ln()..=hi.ln())).exp()
        }
    }

    fn matrix(&mut self) -> Matrix {
        let (m, n) = (self.plan.value_dim, self.plan.dim);
        let r = if self.rng.gen_bool(0.05) {
            0.0
        } else {
            self.radius(1e-3, self.plan.xi_radius)
        };
        let d = self.direction(m * n);
        Matrix::from_rows(m, n, d.into_iter().map(|c| c * r).collect())
    }

    fn jump_with_norm(&mut self, t: f64) -> Vec<f64> {
        let m = self.plan.value_dim;
        self.direction(m).into_iter().map(|c| c * t).collect()
    }

    fn amplitude(&mut self) -> f64 {
        self.radius(self.plan.zeta_min, self.plan.zeta_max)
    }

    fn normal(&mut self) -> Vec<f64> {
        self.direction(self.plan.dim)
    }
}

fn cat(parts: &[&[f64]]) -> Vec<f64> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn guard(value: f64, what: &str, hard: &mut Vec<String>) -> bool {
    if value.is_finite() && value >= 0.0 {
        true
    } else {
        if hard.len() < 16 {
            hard.push(format!("{what} evaluated to {value}"));
        }
        false
    }
}

/// Checks (f2)–(f4) for an arbitrary evaluator.
pub fn check_volume_fn(
    eval: impl Fn(&[f64], &Matrix) -> f64,
    constants: &IntegrandConstants,
    plan: &SamplePlan,
) -> PropertyReport {
    let mut s = Sampler::new(plan);
    let mut hard = Vec::new();
    let mut f2 = ConditionResult::new("f2");
    let mut f3 = ConditionResult::new("f3");
    let mut f4 = ConditionResult::new("f4");
    let p = constants.p;
    for _ in 0..plan.samples {
        let x = s.point();
        let xi1 = s.matrix();
        let v1 = eval(&x, &xi1);
        if !guard(v1, "f", &mut hard) {
            continue;
        }
        let r = xi1.norm().powf(p);
        f3.record(constants.c1 * r, v1, || cat(&[&x, &xi1.data]));
        f4.record(v1, constants.c2 * (1.0 + r), || cat(&[&x, &xi1.data]));

        // Second gradient: either a small perturbation or an independent draw.
        let xi2 = if s.rng.gen_bool(0.5) {
            let d = s.matrix();
            let scale = s.radius(1e-6, 1.0) / d.norm().max(1e-300);
            let data = xi1.data.iter().zip(&d.data).map(|(a, b)| a + scale * b).collect();
            Matrix::from_rows(xi1.rows, xi1.cols, data)
        } else {
            s.matrix()
        };
        let v2 = eval(&x, &xi2);
        if !guard(v2, "f", &mut hard) {
            continue;
        }
        let dist = norm(&sub(&xi1.data, &xi2.data));
        f2.record(
            (v1 - v2).abs(),
            constants.sigma1.eval(dist) * (1.0 + v1 + v2),
            || cat(&[&x, &xi1.data, &xi2.data]),
        );
    }
    PropertyReport {
        kind: "volume".into(),
        conditions: vec![ConditionResult::not_checkable("f1"), f2, f3, f4],
        hard_failures: hard,
    }
}

pub fn check_volume_integrand(f: &VolumeIntegrand, plan: &SamplePlan) -> PropertyReport {
    check_volume_fn(|x, xi| f.eval(x, xi), f.constants(), plan)
}

/// Checks (g2)–(g7) for an arbitrary evaluator, plus the informational
/// monotonicity in `|ζ|`.
pub fn check_surface_fn(
    eval: impl Fn(&[f64], &[f64], &[f64]) -> f64,
    constants: &IntegrandConstants,
    plan: &SamplePlan,
) -> PropertyReport {
    let mut s = Sampler::new(plan);
    let mut hard = Vec::new();
    let mut g2 = ConditionResult::new("g2");
    let mut g3 = ConditionResult::new("g3");
    let mut g4 = ConditionResult::new("g4");
    let mut g5 = ConditionResult::new("g5");
    let mut g6 = ConditionResult::new("g6");
    let mut g7 = ConditionResult::new("g7");
    let mut mono = ConditionResult::new("monotone");
    mono.informational = true;
    let c3 = constants.c3;
    for _ in 0..plan.samples {
        let x = s.point();
        let nu = s.normal();
        let t1 = s.amplitude();
        let z1 = s.jump_with_norm(t1);
        let v1 = eval(&x, &z1, &nu);
        if !guard(v1, "g", &mut hard) {
            continue;
        }
        g5.record(constants.c4, v1, || cat(&[&x, &z1, &nu]));
        g6.record(v1, constants.c5 * (1.0 + t1), || cat(&[&x, &z1, &nu]));

        let mz: Vec<f64> = z1.iter().map(|c| -c).collect();
        let mn: Vec<f64> = nu.iter().map(|c| -c).collect();
        let vs = eval(&x, &mz, &mn);
        if guard(vs, "g", &mut hard) {
            // equality: record both directions
            g7.record((v1 - vs).abs(), 0.0, || cat(&[&x, &z1, &nu]));
        }

        // (g2): nearby or independent second jump.
        let z2 = if s.rng.gen_bool(0.5) {
            let step = s.radius(1e-6, t1.max(1e-6));
            let d = s.jump_with_norm(step);
            let z: Vec<f64> = z1.iter().zip(&d).map(|(a, b)| a + b).collect();
            if norm(&z) < plan.zeta_min.max(1e-12) {
                z1.clone()
            } else {
                z
            }
        } else {
            let t = s.amplitude();
            s.jump_with_norm(t)
        };
        let v2 = eval(&x, &z2, &nu);
        if guard(v2, "g", &mut hard) {
            g2.record(
                (v2 - v1).abs(),
                constants.sigma2.eval(norm(&sub(&z1, &z2))) * (v1 + v2),
                || cat(&[&x, &z1, &z2, &nu]),
            );
        }

        // (g3) and monotonicity: |ζ_a| ≤ |ζ_b|.
        let (ta, tb) = {
            let u = s.amplitude();
            let w = s.amplitude();
            (u.min(w), u.max(w))
        };
        let za = s.jump_with_norm(ta);
        let zb = s.jump_with_norm(tb);
        let va = eval(&x, &za, &nu);
        let vb = eval(&x, &zb, &nu);
        if guard(va, "g", &mut hard) && guard(vb, "g", &mut hard) {
            g3.record(va, c3 * vb, || cat(&[&x, &za, &zb, &nu]));
            mono.record(va, vb, || cat(&[&x, &za, &zb, &nu]));
        }

        // (g4): c₃|ζ_a| ≤ |ζ_b|.
        let ta = s.amplitude();
        let tb = c3 * ta * s.rng.gen_range(1.0..=4.0);
        let za = s.jump_with_norm(ta);
        let zb = s.jump_with_norm(tb);
        let va = eval(&x, &za, &nu);
        let vb = eval(&x, &zb, &nu);
        if guard(va, "g", &mut hard) && guard(vb, "g", &mut hard) {
            g4.record(va, vb, || cat(&[&x, &za, &zb, &nu]));
        }
    }
    PropertyReport {
        kind: "surface".into(),
        conditions: vec![
            ConditionResult::not_checkable("g1"),
            g2,
            g3,
            g4,
            g5,
            g6,
            g7,
            mono,
        ],
        hard_failures: hard,
    }
}

pub fn check_surface_integrand(g: &SurfaceIntegrand, plan: &SamplePlan) -> PropertyReport {
    check_surface_fn(|x, z, n| g.eval(x, z, n), g.constants(), plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::{
        checkerboard_toughness, hat_toughness, laminate_toughness, mumford_shah_surface,
        mumford_shah_volume, perturb_surface, periodic_volume, Coefficient, Modulus,
    };

    fn plan(n: usize, m: usize) -> SamplePlan {
        SamplePlan::new(n, m, 2000, 7)
    }

    #[test]
    fn quadratic_passes() {
        let f = mumford_shah_volume(2.0).unwrap();
        let r = check_volume_integrand(&f, &plan(2, 2));
        assert!(r.all_passed(), "{r:?}");
        assert!(!r.condition("f1").unwrap().checkable);
    }

    #[test]
    fn shifted_quadratic_fails_lower_bound() {
        let c = IntegrandConstants::volume(2.0, 1.0, 1.0, Modulus::linear(10.0));
        let r = check_volume_fn(|_, xi| xi.norm().powi(2) - 1.0, &c, &plan(2, 1));
        assert!(!r.hard_failures.is_empty() || !r.passed("f3"));
    }

    #[test]
    fn periodic_quadratic_constants() {
        let f = periodic_volume(
            Coefficient::SinSquared {
                base: 1.0,
                amplitude: 3.0,
                period: 1.0,
                axis: 0,
            },
            2.0,
        )
        .unwrap();
        assert_eq!((f.constants().c1, f.constants().c2), (1.0, 4.0));
        assert!(check_volume_integrand(&f, &plan(2, 1)).all_passed());
    }

    #[test]
    fn toughness_families_pass() {
        for g in [
            mumford_shah_surface(2.0).unwrap(),
            laminate_toughness(1.0, 3.0, 1.0, vec![0.6, 0.8]).unwrap(),
            checkerboard_toughness(2.0, 1.0, 0.5).unwrap(),
        ] {
            let r = check_surface_integrand(&g, &plan(2, 2));
            assert!(r.all_passed(), "{r:?}");
            let gp = perturb_surface(&g, 0.3).unwrap();
            assert!(check_surface_integrand(&gp, &plan(2, 2)).all_passed());
        }
    }

    #[test]
    fn hat_is_nonmonotone_but_satisfies_g3_g4() {
        let g = hat_toughness(3.0).unwrap();
        let mut p = plan(2, 1);
        p.zeta_max = 6.0;
        let r = check_surface_integrand(&g, &p);
        assert!(r.passed_all_of(&["g3", "g4", "g6", "g7"]), "{r:?}");
        assert!(!r.passed("monotone"));
        // Away from ζ = 0 the remaining conditions hold too.
        p.zeta_min = 1.0 / 3.0;
        let r = check_surface_integrand(&g, &p);
        assert!(r.all_passed(), "{r:?}");
    }

    #[test]
    fn asymmetric_surface_fails_g7() {
        let c = IntegrandConstants::surface(1.0, 1.0, 3.0, Modulus::linear(1.0));
        let r = check_surface_fn(|_, _, nu| 2.0 + nu[0], &c, &plan(2, 1));
        assert!(!r.passed("g7"));
        assert!(r.passed("g5"));
    }
}
