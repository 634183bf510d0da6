//! Experiment configuration: a TOML document with one section per command.
//! A preset supplies every value; a config file overrides any subset of it.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::cells::{SolverOptions, Stencil};
use crate::error::{Error, Result};
use crate::experiments::Datum;
use crate::homogenize::{DiagnosticSchedule, Extrapolation};
use crate::integrands::{
    checkerboard_toughness, laminate_toughness, mumford_shah_surface, periodic_volume, toughness, Coefficient,
    JumpProfile, SurfaceIntegrand, VolumeIntegrand,
};
use crate::verify::{laminate_sweep_config, SuiteConfig};

pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Constant coefficients in 2D.
    Default,
    /// Layered media: 1D volume laminate, 2D layered toughness.
    Laminate,
    /// 2D checkerboard media.
    Checkerboard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Volume,
    Surface,
}

/// The cell problem shared by `homogenize`, `diagnostics`, `scaling-check`
/// and `monotonicity`; `xi` also drives `cell-volume`, and `zeta`, `nu`,
/// `stencil` drive `cell-surface`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    /// Rows of the `m × n` matrix ξ.
    pub xi: Vec<Vec<f64>>,
    pub zeta: Vec<f64>,
    /// Normalised on load.
    pub nu: Vec<f64>,
    pub stencil: Stencil,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub samples: usize,
    pub volume_dim: usize,
    pub surface_dim: usize,
    pub value_dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    /// Empty means the origin.
    pub center: Vec<f64>,
    pub side: f64,
    pub resolution: usize,
    /// Defaults to `max(1, ⌈N/8⌉)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_width: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogenizeConfig {
    /// Radii in periods.
    pub radii: Vec<f64>,
    pub density: usize,
    /// Base points in periods; empty means the origin.
    pub points: Vec<Vec<f64>>,
    pub band_width: usize,
    pub extrapolation: Extrapolation,
    /// Largest accepted x-spread when several base points are given.
    pub spread_tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Empty means the origin.
    pub x: Vec<f64>,
    pub schedule: DiagnosticSchedule,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub x: Vec<f64>,
    pub rho: f64,
    pub eps: f64,
    pub resolution: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotonicityConfig {
    /// In periods; empty means the origin.
    pub x: Vec<f64>,
    /// Increasing cube sizes in periods.
    pub rhos: Vec<f64>,
    pub density: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenoiseConfig {
    pub lo: f64,
    pub hi: f64,
    pub datum: Datum,
    pub resolution: usize,
    pub p: f64,
    pub budget: usize,
    /// Overrides the top-level integrands (which may be multi-dimensional).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<VolumeIntegrand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceIntegrand>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub lo: f64,
    pub hi: f64,
    pub datum: Datum,
    pub eps: Vec<f64>,
    pub density: usize,
    pub budget: usize,
    pub hom_radii: Vec<f64>,
    pub hom_density: usize,
    /// Largest accepted relative gap at the finest scale.
    pub gap_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<VolumeIntegrand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceIntegrand>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub volume: VolumeIntegrand,
    pub surface: SurfaceIntegrand,
    pub problem: ProblemConfig,
    pub solver: SolverOptions,
    pub check: CheckConfig,
    pub cell: CellConfig,
    pub homogenize: HomogenizeConfig,
    pub diagnostics: DiagnosticsConfig,
    pub scaling: ScalingConfig,
    pub monotonicity: MonotonicityConfig,
    pub denoise: DenoiseConfig,
    pub sweep: SweepSection,
    pub verify: SuiteConfig,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let sweep = laminate_sweep_config();
        let mut cfg = ExperimentConfig {
            seed: DEFAULT_SEED,
            jobs: 0,
            volume: periodic_volume(Coefficient::constant(1.0), 2.0).expect("valid"),
            surface: toughness(Coefficient::constant(1.0), JumpProfile::Affine).expect("valid"),
            problem: ProblemConfig {
                kind: ProblemKind::Volume,
                xi: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                zeta: vec![0.5],
                nu: vec![0.6, 0.8],
                stencil: Stencil::Sixteen,
            },
            solver: SolverOptions::default(),
            check: CheckConfig {
                samples: 2000,
                volume_dim: 2,
                surface_dim: 2,
                value_dim: 1,
            },
            cell: CellConfig {
                center: vec![],
                side: 2.0,
                resolution: 32,
                band_width: None,
            },
            homogenize: HomogenizeConfig {
                radii: vec![2.0, 4.0, 8.0],
                density: 8,
                points: vec![],
                band_width: 1,
                extrapolation: Extrapolation::Average,
                spread_tolerance: 1e-2,
            },
            diagnostics: DiagnosticsConfig {
                x: vec![],
                schedule: DiagnosticSchedule {
                    rhos: vec![1.0, 0.5, 0.25],
                    eps: vec![0.25, 0.125, 0.0625],
                    density: 8,
                    k_tail: 2,
                    rho_tail: 2,
                },
            },
            scaling: ScalingConfig {
                x: vec![0.25, 0.5],
                rho: 1.0,
                eps: 0.5,
                resolution: 32,
                tolerance: 1e-10,
            },
            monotonicity: MonotonicityConfig {
                x: vec![],
                rhos: vec![2.0, 4.0, 8.0, 16.0],
                density: 8,
            },
            denoise: DenoiseConfig {
                lo: 0.0,
                hi: 1.0,
                datum: Datum::Step { at: 0.5, height: 1.0 },
                resolution: 64,
                p: 2.0,
                budget: 2,
                volume: None,
                surface: Some(mumford_shah_surface(0.1).expect("valid")),
            },
            sweep: SweepSection {
                lo: sweep.lo,
                hi: sweep.hi,
                datum: sweep.datum,
                eps: sweep.eps,
                density: sweep.density,
                budget: sweep.budget,
                hom_radii: sweep.hom_schedule.radii,
                hom_density: sweep.hom_schedule.density,
                gap_tolerance: 5e-2,
                volume: None,
                surface: Some(mumford_shah_surface(0.02).expect("valid")),
            },
            verify: SuiteConfig::default(),
        };
        match preset {
            Preset::Default => {}
            Preset::Laminate => {
                let f = periodic_volume(
                    Coefficient::Laminate {
                        a: 1.0,
                        b: 4.0,
                        period: 1.0,
                        normal: vec![1.0],
                    },
                    2.0,
                )
                .expect("valid");
                cfg.volume = f;
                cfg.surface = laminate_toughness(2.0, 1.0, 1.0, vec![1.0, 0.0]).expect("valid");
                cfg.problem.xi = vec![vec![1.5]];
                cfg.problem.nu = vec![1.0, 0.0];
                cfg.check.volume_dim = 1;
                cfg.cell.resolution = 64;
                cfg.homogenize.radii = vec![8.0, 16.0, 32.0];
                cfg.homogenize.density = 16;
                cfg.scaling.x = vec![0.25];
            }
            Preset::Checkerboard => {
                cfg.volume = periodic_volume(
                    Coefficient::Checkerboard {
                        a: 1.0,
                        b: 3.0,
                        period: 1.0,
                    },
                    2.0,
                )
                .expect("valid");
                cfg.surface = checkerboard_toughness(1.0, 3.0, 1.0).expect("valid");
                cfg.problem.xi = vec![vec![1.0, 0.5]];
                cfg.problem.nu = vec![1.0, 1.0];
            }
        }
        cfg
    }

    /// Preset values overridden by the TOML document `text`.
    pub fn from_toml(preset: Preset, text: &str) -> Result<Self> {
        let overrides: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let base = toml::Table::try_from(ExperimentConfig::preset(preset)).map_err(|e| Error::Config(e.to_string()))?;
        let mut merged = toml::Value::Table(base);
        merge(&mut merged, toml::Value::Table(overrides));
        merged.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

const DESCRIPTORS: [&str; 3] = ["volume", "surface", "datum"];

/// Tables merge key by key; every other value replaces the base.
fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    // integrand and datum descriptors are tagged unions; replace them whole
                    Some(slot @ toml::Value::Table(_)) if !DESCRIPTORS.contains(&k.as_str()) => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}
