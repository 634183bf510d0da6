//! Command-line front end. Every command reads an [`ExperimentConfig`],
//! writes `<command>.json` and its CSV tables into the output directory, and
//! exits with 0 (all invariants hold), 1 (an asserted invariant failed) or 2
//! (error; `error.json` describes it).

pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::cells::{solve_surface_cell, solve_volume_cell, CellResult, SurfaceCellSpec, VolumeCellSpec};
use crate::error::{Error, Result};
use crate::experiments::{gamma_convergence_sweep, solve_ms_1d, DenoiseProblem, SweepConfig};
use crate::fields::Field;
use crate::geometry::UnitVector;
use crate::homogenize::{
    estimate_f_hom, estimate_g_hom, liminf_limsup_diagnostics, monotonicity_profile, scaling_identity_check,
    CellProblem, EstimatorOptions, HomEstimate, RadiusSchedule,
};
use crate::integrands::{check_surface_integrand, check_volume_integrand, SamplePlan, SurfaceIntegrand, VolumeIntegrand};
use crate::linalg::Matrix;
use crate::verify::{run_suite, SuiteConfig};

pub use config::{ExperimentConfig, Preset, ProblemKind};
use output::{num, nums, Invariant, Report, Table};

pub const CHECK_COLUMNS: &[&str] = &["integrand", "condition", "checkable", "informational", "passed", "samples", "max_violation"];
pub const CELL_VOLUME_COLUMNS: &[&str] = &[
    "family", "n", "xi", "center", "side", "N", "band_width", "value", "normalised", "method", "iterations", "residual",
    "certified",
];
pub const CELL_SURFACE_COLUMNS: &[&str] = &[
    "family", "n", "zeta", "nu", "stencil", "center", "side", "N", "band_width", "value", "normalised", "method",
    "path_segments", "path_length", "certified",
];
pub const MINIMISER_COLUMNS: &[&str] = &["node", "position", "value"];
pub const POLYLINE_COLUMNS: &[&str] = &["vertex", "position"];
pub const HOMOGENIZE_COLUMNS: &[&str] = &["family", "data", "x", "r", "N", "normalised", "certified"];
pub const DIAGNOSTIC_SAMPLE_COLUMNS: &[&str] = &["rho", "eps", "N", "normalised", "certified"];
pub const DIAGNOSTIC_BOUND_COLUMNS: &[&str] = &["rho", "lower", "upper"];
pub const SCALING_COLUMNS: &[&str] = &["problem", "x", "rho", "eps", "N", "lhs", "rhs", "residual"];
pub const MONOTONICITY_COLUMNS: &[&str] = &["rho", "N", "value", "profile", "increase", "delta"];
pub const DENOISE_COLUMNS: &[&str] = &["node", "x", "datum", "u"];
pub const JUMP_COLUMNS: &[&str] = &["cell", "position", "size"];
pub const SWEEP_COLUMNS: &[&str] = &["eps", "N", "value", "jump_count", "jump_positions", "hom_value", "gap"];
pub const VERIFY_COLUMNS: &[&str] = &["check", "passed", "measured", "tolerance", "detail"];

#[derive(Debug, Parser)]
#[command(name = "fdhom", version, about = "Cell problems and homogenised integrands for free-discontinuity energies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML file overriding the preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "default")]
    pub preset: Preset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sampled class conditions of the configured integrands.
    CheckIntegrand,
    /// Volume cell problem with affine boundary data.
    CellVolume,
    /// Surface cell problem with pure-jump boundary data.
    CellSurface,
    /// Normalised cell values over a radius schedule and their limit.
    Homogenize,
    /// liminf/limsup proxies of cell values of rescaled integrands.
    Diagnostics,
    /// Change-of-variables identity for the cell problem.
    ScalingCheck,
    /// Monotonicity profile of cell values in the cube size.
    Monotonicity,
    /// One-dimensional denoising by dynamic programming.
    #[command(name = "denoise-1d")]
    Denoise1d,
    /// Denoising at decreasing scales against the homogenised problem.
    GammaSweep,
    /// The full invariant suite.
    VerifyAll,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckIntegrand => "check-integrand",
            Command::CellVolume => "cell-volume",
            Command::CellSurface => "cell-surface",
            Command::Homogenize => "homogenize",
            Command::Diagnostics => "diagnostics",
            Command::ScalingCheck => "scaling-check",
            Command::Monotonicity => "monotonicity",
            Command::Denoise1d => "denoise-1d",
            Command::GammaSweep => "gamma-sweep",
            Command::VerifyAll => "verify-all",
        }
    }
}

/// Parses, runs and writes outputs; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let name = cli.command.name();
    match run_inner(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if let Err(w) = output::write_error(&cli.out, name, &e) {
                eprintln!("error: could not write error report: {w}");
            }
            2
        }
    }
}

fn run_inner(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let report = pool.install(|| execute(cli.command, &cfg))?;
    let preset = serde_json::to_value(cli.preset)?;
    // the thread count does not change any result, so it stays out of the envelope
    let mut echoed = serde_json::to_value(&cfg)?;
    if let Some(map) = echoed.as_object_mut() {
        map.remove("jobs");
    }
    output::write_report(
        &cli.out,
        cli.command.name(),
        preset.as_str().unwrap_or_default(),
        cfg.seed,
        &echoed,
        &report,
    )?;
    for inv in report.invariants.iter().filter(|i| !i.passed) {
        eprintln!("invariant failed: {}: {}", inv.name, inv.detail);
    }
    Ok(report.passed())
}

pub fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_toml(cli.preset, &std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::preset(cli.preset),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    Ok(cfg)
}

/// Runs one command without touching the file system.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<Report> {
    match command {
        Command::CheckIntegrand => check_integrand(cfg),
        Command::CellVolume => cell_volume(cfg),
        Command::CellSurface => cell_surface(cfg),
        Command::Homogenize => homogenize(cfg),
        Command::Diagnostics => diagnostics(cfg),
        Command::ScalingCheck => scaling_check(cfg),
        Command::Monotonicity => monotonicity(cfg),
        Command::Denoise1d => denoise(cfg),
        Command::GammaSweep => sweep(cfg),
        Command::VerifyAll => verify_all(cfg),
    }
}

fn xi_matrix(rows: &[Vec<f64>]) -> Result<Matrix> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if m == 0 || n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config("problem.xi must be a nonempty rectangular matrix".into()));
    }
    Ok(Matrix::from_rows(m, n, rows.concat()))
}

fn nu_vector(nu: &[f64]) -> Result<UnitVector> {
    UnitVector::normalized(nu.to_vec())
}

fn cell_problem(cfg: &ExperimentConfig) -> Result<CellProblem> {
    let p = &cfg.problem;
    Ok(match p.kind {
        ProblemKind::Volume => CellProblem::Volume {
            f: cfg.volume.clone(),
            xi: xi_matrix(&p.xi)?,
        },
        ProblemKind::Surface => CellProblem::Surface {
            g: cfg.surface.clone(),
            zeta: p.zeta.clone(),
            nu: nu_vector(&p.nu)?,
            stencil: p.stencil,
        },
    })
}

fn or_origin(x: &[f64], n: usize) -> Vec<f64> {
    if x.is_empty() {
        vec![0.0; n]
    } else {
        x.to_vec()
    }
}

fn family_name(descriptor: serde_json::Value) -> String {
    let family = descriptor["family"].as_str().unwrap_or("custom");
    match descriptor["coefficient"]["kind"].as_str() {
        Some(kind) => format!("{family}:{kind}"),
        None => family.to_string(),
    }
}

fn volume_family(f: &VolumeIntegrand) -> String {
    family_name(serde_json::to_value(f.descriptor()).unwrap_or_default())
}

fn surface_family(g: &SurfaceIntegrand) -> String {
    family_name(serde_json::to_value(g.descriptor()).unwrap_or_default())
}

fn check_integrand(cfg: &ExperimentConfig) -> Result<Report> {
    let c = &cfg.check;
    let volume = check_volume_integrand(&cfg.volume, &SamplePlan::new(c.volume_dim, c.value_dim, c.samples, cfg.seed));
    let surface = check_surface_integrand(
        &cfg.surface,
        &SamplePlan::new(c.surface_dim, c.value_dim, c.samples, cfg.seed.wrapping_add(1)),
    );
    let mut table = Table::new("check-integrand.csv", CHECK_COLUMNS);
    for (label, rep) in [("volume", &volume), ("surface", &surface)] {
        for cond in &rep.conditions {
            table.push(vec![
                label.into(),
                cond.condition.clone(),
                cond.checkable.to_string(),
                cond.informational.to_string(),
                cond.passed.to_string(),
                cond.samples.to_string(),
                num(cond.max_violation),
            ]);
        }
    }
    let describe = |rep: &crate::integrands::PropertyReport| {
        let failed: Vec<_> = rep
            .conditions
            .iter()
            .filter(|c| c.checkable && !c.informational && !c.passed)
            .map(|c| c.condition.clone())
            .chain(rep.hard_failures.iter().cloned())
            .collect();
        if failed.is_empty() {
            "all conditions hold".to_string()
        } else {
            format!("failing: {}", failed.join(", "))
        }
    };
    Ok(Report {
        result: json!({ "volume": volume, "surface": surface }),
        invariants: vec![
            Invariant::new("volume_class", volume.all_passed(), describe(&volume)),
            Invariant::new("surface_class", surface.all_passed(), describe(&surface)),
        ],
        tables: vec![table],
    })
}

fn cell_result_json(res: &CellResult) -> serde_json::Value {
    json!({
        "value": res.value,
        "diagnostics": res.diagnostics,
        "minimiser": res.minimiser,
        "polyline": res.polyline,
    })
}

fn cell_volume(cfg: &ExperimentConfig) -> Result<Report> {
    let xi = xi_matrix(&cfg.problem.xi)?;
    let c = &cfg.cell;
    let center = or_origin(&c.center, xi.cols);
    let mut spec = VolumeCellSpec::new(cfg.volume.clone(), xi.clone(), center.clone(), c.side, c.resolution);
    if let Some(w) = c.band_width {
        spec = spec.with_band(w);
    }
    spec.options = cfg.solver.clone();
    let res = solve_volume_cell(&spec)?;
    let n = xi.cols;
    let d = &res.diagnostics;
    let mut table = Table::new("cell-volume.csv", CELL_VOLUME_COLUMNS);
    table.push(vec![
        volume_family(&cfg.volume),
        n.to_string(),
        nums(&xi.data),
        nums(&center),
        num(c.side),
        c.resolution.to_string(),
        spec.band_width.to_string(),
        num(res.value),
        num(res.value / c.side.powi(n as i32)),
        d.method.clone(),
        d.iterations.to_string(),
        num(d.residual),
        d.certified.to_string(),
    ]);
    let mut nodes = Table::new("cell-volume-minimiser.csv", MINIMISER_COLUMNS);
    if let Some(Field::Nodal(u)) = &res.minimiser {
        for k in 0..u.grid().num_nodes() {
            nodes.push(vec![k.to_string(), nums(&u.grid().node_position(k)), nums(u.value(k))]);
        }
    }
    Ok(Report {
        result: cell_result_json(&res),
        invariants: vec![Invariant::new(
            "solver_certified",
            d.certified,
            format!("{} after {} iterations, residual {}", d.method, d.iterations, d.residual),
        )],
        tables: vec![table, nodes],
    })
}

fn cell_surface(cfg: &ExperimentConfig) -> Result<Report> {
    let p = &cfg.problem;
    let nu = nu_vector(&p.nu)?;
    let c = &cfg.cell;
    let n = nu.dim();
    let center = or_origin(&c.center, n);
    let mut spec = SurfaceCellSpec::new(cfg.surface.clone(), p.zeta.clone(), nu.clone(), center.clone(), c.side, c.resolution)
        .with_stencil(p.stencil);
    if let Some(w) = c.band_width {
        spec = spec.with_band(w);
    }
    let res = solve_surface_cell(&spec)?;
    let d = &res.diagnostics;
    let mut table = Table::new("cell-surface.csv", CELL_SURFACE_COLUMNS);
    table.push(vec![
        surface_family(&cfg.surface),
        n.to_string(),
        nums(&p.zeta),
        nums(nu.as_slice()),
        p.stencil.name().to_string(),
        nums(&center),
        num(c.side),
        c.resolution.to_string(),
        spec.band_width.to_string(),
        num(res.value),
        num(res.value / c.side.powi(n as i32 - 1)),
        d.method.clone(),
        d.path_segments.map_or(String::new(), |s| s.to_string()),
        d.path_length.map_or(String::new(), num),
        d.certified.to_string(),
    ]);
    let mut poly = Table::new("cell-surface-polyline.csv", POLYLINE_COLUMNS);
    for (i, v) in res.polyline.iter().flatten().enumerate() {
        poly.push(vec![i.to_string(), nums(v)]);
    }
    Ok(Report {
        result: cell_result_json(&res),
        invariants: vec![Invariant::new("solver_certified", d.certified, d.method.clone())],
        tables: vec![table, poly],
    })
}

fn homogenize(cfg: &ExperimentConfig) -> Result<Report> {
    let h = &cfg.homogenize;
    let schedule = RadiusSchedule::new(h.radii.clone(), h.density)?;
    let opts = EstimatorOptions {
        band_width: h.band_width,
        extrapolation: h.extrapolation,
        stencil: cfg.problem.stencil,
        solver: cfg.solver.clone(),
    };
    let problem = cell_problem(cfg)?;
    let points = if h.points.is_empty() { vec![vec![0.0; problem.dim()]] } else { h.points.clone() };
    let (est, family, data): (HomEstimate, String, String) = match &problem {
        CellProblem::Volume { f, xi } => (estimate_f_hom(f, xi, &points, &schedule, &opts)?, volume_family(f), nums(&xi.data)),
        CellProblem::Surface { g, zeta, nu, .. } => (
            estimate_g_hom(g, zeta, nu, &points, &schedule, &opts)?,
            surface_family(g),
            format!("{}|{}", nums(zeta), nums(nu.as_slice())),
        ),
    };
    let mut table = Table::new("homogenize.csv", HOMOGENIZE_COLUMNS);
    for s in &est.samples {
        table.push(vec![
            family.clone(),
            data.clone(),
            nums(&est.base_points[s.point]),
            num(s.r),
            s.resolution.to_string(),
            num(s.normalised),
            s.certified.to_string(),
        ]);
    }
    let mut invariants = vec![Invariant::new(
        "solves_certified",
        est.converged,
        if est.converged { "all inner solves certified" } else { "some inner solves not certified" },
    )];
    if points.len() > 1 {
        invariants.push(Invariant::new(
            "x_spread",
            est.x_spread <= h.spread_tolerance,
            format!("spread {} (tolerance {})", est.x_spread, h.spread_tolerance),
        ));
    }
    Ok(Report {
        result: serde_json::to_value(&est)?,
        tables: vec![table],
        invariants,
    })
}

fn x_independent(problem: &CellProblem) -> bool {
    match problem {
        CellProblem::Volume { f, .. } => f.is_homogeneous_in_x(),
        CellProblem::Surface { g, .. } => g.is_homogeneous_in_x(),
    }
}

fn diagnostics(cfg: &ExperimentConfig) -> Result<Report> {
    let problem = cell_problem(cfg)?;
    let x = or_origin(&cfg.diagnostics.x, problem.dim());
    let diag = liminf_limsup_diagnostics(&problem, &x, &cfg.diagnostics.schedule)?;
    let mut samples = Table::new("diagnostics.csv", DIAGNOSTIC_SAMPLE_COLUMNS);
    for s in &diag.samples {
        samples.push(vec![num(s.rho), num(s.eps), s.resolution.to_string(), num(s.normalised), s.certified.to_string()]);
    }
    let mut bounds = Table::new("diagnostics-bounds.csv", DIAGNOSTIC_BOUND_COLUMNS);
    for b in &diag.per_rho {
        bounds.push(vec![num(b.rho), num(b.lower), num(b.upper)]);
    }
    let mut invariants = Vec::new();
    if x_independent(&problem) {
        invariants.push(Invariant::new("zero_gap", diag.gap == 0.0, format!("gap {}", diag.gap)));
    }
    Ok(Report {
        result: serde_json::to_value(&diag)?,
        tables: vec![samples, bounds],
        invariants,
    })
}

fn scaling_check(cfg: &ExperimentConfig) -> Result<Report> {
    let s = &cfg.scaling;
    let problem = cell_problem(cfg)?;
    let x = or_origin(&s.x, problem.dim());
    let check = scaling_identity_check(&problem, &x, s.rho, s.eps, s.resolution)?;
    let mut table = Table::new("scaling-check.csv", SCALING_COLUMNS);
    table.push(vec![
        problem.kind().to_string(),
        nums(&x),
        num(s.rho),
        num(s.eps),
        s.resolution.to_string(),
        num(check.lhs),
        num(check.rhs),
        num(check.residual),
    ]);
    Ok(Report {
        result: serde_json::to_value(&check)?,
        invariants: vec![Invariant::new(
            "scaling_identity",
            check.residual <= s.tolerance,
            format!("residual {} (tolerance {})", check.residual, s.tolerance),
        )],
        tables: vec![table],
    })
}

fn monotonicity(cfg: &ExperimentConfig) -> Result<Report> {
    let m = &cfg.monotonicity;
    let problem = cell_problem(cfg)?;
    let x = or_origin(&m.x, problem.dim());
    let rep = monotonicity_profile(&problem, &x, &m.rhos, m.density)?;
    let mut table = Table::new("monotonicity.csv", MONOTONICITY_COLUMNS);
    for (i, p) in rep.points.iter().enumerate() {
        let (increase, delta) = if i == 0 {
            (String::new(), String::new())
        } else {
            (num(p.profile - rep.points[i - 1].profile), num(3.0 * rep.growth / p.resolution as f64))
        };
        table.push(vec![num(p.rho), p.resolution.to_string(), num(p.value), num(p.profile), increase, delta]);
    }
    Ok(Report {
        result: serde_json::to_value(&rep)?,
        invariants: vec![Invariant::new(
            "monotone_profile",
            rep.passed(),
            format!("largest increase {}, violations at {:?}", rep.max_increase, rep.violations),
        )],
        tables: vec![table],
    })
}

fn denoise(cfg: &ExperimentConfig) -> Result<Report> {
    let d = &cfg.denoise;
    let f = d.volume.clone().unwrap_or_else(|| cfg.volume.clone());
    let g = d.surface.clone().unwrap_or_else(|| cfg.surface.clone());
    let datum = d.datum.sample(d.lo, d.hi, d.resolution)?;
    let problem = DenoiseProblem::new(d.lo, d.hi, datum, f, g, d.p)?;
    let sol = solve_ms_1d(&problem, d.budget)?;
    let mut nodes = Table::new("denoise-1d.csv", DENOISE_COLUMNS);
    for (i, (h, u)) in problem.datum.iter().zip(&sol.u).enumerate() {
        nodes.push(vec![i.to_string(), num(problem.node(i)), num(*h), num(*u)]);
    }
    let mut jumps = Table::new("denoise-1d-jumps.csv", JUMP_COLUMNS);
    for j in &sol.jumps {
        jumps.push(vec![j.cell.to_string(), num(j.position), num(j.size)]);
    }
    Ok(Report {
        invariants: vec![Invariant::new("finite_value", sol.value.is_finite(), format!("value {}", sol.value))],
        result: serde_json::to_value(&sol)?,
        tables: vec![nodes, jumps],
    })
}

fn sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let s = &cfg.sweep;
    let f = s.volume.clone().unwrap_or_else(|| cfg.volume.clone());
    let g = s.surface.clone().unwrap_or_else(|| cfg.surface.clone());
    let sweep_cfg = SweepConfig {
        lo: s.lo,
        hi: s.hi,
        datum: s.datum.clone(),
        eps: s.eps.clone(),
        density: s.density,
        budget: s.budget,
        hom_schedule: RadiusSchedule::new(s.hom_radii.clone(), s.hom_density)?,
    };
    let res = gamma_convergence_sweep(&f, &g, &sweep_cfg)?;
    let mut table = Table::new("gamma-sweep.csv", SWEEP_COLUMNS);
    for r in &res.rows {
        let positions: Vec<f64> = r.jumps.iter().map(|j| j.position).collect();
        table.push(vec![
            num(r.eps),
            r.resolution.to_string(),
            num(r.value),
            r.jumps.len().to_string(),
            nums(&positions),
            num(r.hom_value),
            num(r.gap),
        ]);
    }
    let last = res.rows.last().ok_or_else(|| Error::Config("sweep.eps is empty".into()))?;
    Ok(Report {
        invariants: vec![Invariant::new(
            "final_gap",
            last.gap <= s.gap_tolerance,
            format!("gap {} at eps {} (tolerance {})", last.gap, last.eps, s.gap_tolerance),
        )],
        result: serde_json::to_value(&res)?,
        tables: vec![table],
    })
}

fn verify_all(cfg: &ExperimentConfig) -> Result<Report> {
    let suite = SuiteConfig {
        seed: cfg.seed,
        ..cfg.verify.clone()
    };
    let outcomes = run_suite(&suite)?;
    let mut table = Table::new("verify-all.csv", VERIFY_COLUMNS);
    for o in &outcomes {
        table.push(vec![o.name.clone(), o.passed.to_string(), num(o.measured), num(o.tolerance), o.detail.clone()]);
    }
    Ok(Report {
        invariants: outcomes.iter().map(|o| Invariant::new(&o.name, o.passed, o.detail.clone())).collect(),
        result: serde_json::to_value(&outcomes)?,
        tables: vec![table],
    })
}
