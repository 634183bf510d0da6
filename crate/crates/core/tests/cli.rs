use std::path::Path;
use std::process::Command as Process;

use fdhom::cli::{execute, Command, ExperimentConfig, Preset};

const BIN: &str = env!("CARGO_BIN_EXE_fdhom");

fn run(args: &[&str], out: &Path) -> i32 {
    Process::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .expect("binary runs")
        .code()
        .expect("exit code")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("file exists")).expect("valid json")
}

#[test]
fn config_round_trips_through_toml() {
    for preset in [Preset::Default, Preset::Laminate, Preset::Checkerboard] {
        let cfg = ExperimentConfig::preset(preset);
        let text = cfg.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(preset, &text).unwrap();
        assert_eq!(back.to_toml().unwrap(), text);
        // overriding a different preset with a full document yields the same config
        let other = ExperimentConfig::from_toml(Preset::Checkerboard, &text).unwrap();
        assert_eq!(other.to_toml().unwrap(), text);
    }
}

#[test]
fn partial_override_keeps_the_rest_of_a_section() {
    let cfg = ExperimentConfig::from_toml(Preset::Laminate, "[homogenize]\ndensity = 12\n").unwrap();
    assert_eq!(cfg.homogenize.density, 12);
    assert_eq!(cfg.homogenize.radii, vec![8.0, 16.0, 32.0]);
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(ExperimentConfig::from_toml(Preset::Default, "[cell]\nsides = 2.0\n").is_err());
    assert!(ExperimentConfig::from_toml(Preset::Default, "colour = 1\n").is_err());
}

#[test]
fn csv_headers_are_pinned() {
    let cfg = ExperimentConfig::preset(Preset::Default);
    let expected: [(Command, &[(&str, &str)]); 9] = [
        (
            Command::CheckIntegrand,
            &[("check-integrand.csv", "integrand,condition,checkable,informational,passed,samples,max_violation")],
        ),
        (
            Command::CellVolume,
            &[
                (
                    "cell-volume.csv",
                    "family,n,xi,center,side,N,band_width,value,normalised,method,iterations,residual,certified",
                ),
                ("cell-volume-minimiser.csv", "node,position,value"),
            ],
        ),
        (
            Command::CellSurface,
            &[
                (
                    "cell-surface.csv",
                    "family,n,zeta,nu,stencil,center,side,N,band_width,value,normalised,method,path_segments,path_length,certified",
                ),
                ("cell-surface-polyline.csv", "vertex,position"),
            ],
        ),
        (Command::Homogenize, &[("homogenize.csv", "family,data,x,r,N,normalised,certified")]),
        (
            Command::Diagnostics,
            &[("diagnostics.csv", "rho,eps,N,normalised,certified"), ("diagnostics-bounds.csv", "rho,lower,upper")],
        ),
        (Command::ScalingCheck, &[("scaling-check.csv", "problem,x,rho,eps,N,lhs,rhs,residual")]),
        (Command::Monotonicity, &[("monotonicity.csv", "rho,N,value,profile,increase,delta")]),
        (
            Command::Denoise1d,
            &[("denoise-1d.csv", "node,x,datum,u"), ("denoise-1d-jumps.csv", "cell,position,size")],
        ),
        (
            Command::GammaSweep,
            &[("gamma-sweep.csv", "eps,N,value,jump_count,jump_positions,hom_value,gap")],
        ),
    ];
    for (command, tables) in expected {
        let report = execute(command, &cfg).unwrap();
        let got: Vec<(String, String)> = report.tables.iter().map(|t| (t.file.clone(), t.header.join(","))).collect();
        let want: Vec<(String, String)> = tables.iter().map(|(f, h)| (f.to_string(), h.to_string())).collect();
        assert_eq!(got, want, "{}", command.name());
        assert!(report.passed(), "{}: {:?}", command.name(), report.invariants);
    }
    assert_eq!(fdhom::cli::VERIFY_COLUMNS.join(","), "check,passed,measured,tolerance,detail");
}

#[test]
fn cell_volume_with_identity_gradient() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["cell-volume"], dir.path()), 0);
    let env = read_json(&dir.path().join("cell-volume.json"));
    assert_eq!(env["schema_version"], 1);
    assert_eq!(env["status"], "ok");
    // f = |ξ|², ξ = I in 2D, cube of side 2
    let value = env["result"]["value"].as_f64().unwrap();
    assert!((value - 2.0 * 4.0).abs() < 1e-12);
}

#[test]
fn homogenize_laminate_preset() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["homogenize", "--preset", "laminate"], dir.path()), 0);
    let csv = std::fs::read_to_string(dir.path().join("homogenize.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
    let env = read_json(&dir.path().join("homogenize.json"));
    let limit = env["result"]["limit"].as_f64().unwrap();
    assert!((limit / 3.6 - 1.0).abs() < 1e-2);
}

#[test]
fn schema_violation_writes_error_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[cell]\nresolution = \"many\"\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["cell-volume", "--config", cfg.to_str().unwrap()], &out), 2);
    let env = read_json(&out.join("error.json"));
    assert_eq!(env["status"], "error");
    assert_eq!(env["error"]["kind"], "config");
}

#[test]
fn failed_invariant_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.toml");
    std::fs::write(&cfg, "[sweep]\ngap_tolerance = 0.0\neps = [0.25, 0.125]\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["gamma-sweep", "--preset", "laminate", "--config", cfg.to_str().unwrap()], &out), 1);
    let env = read_json(&out.join("gamma-sweep.json"));
    assert_eq!(env["status"], "invariant_failure");
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, jobs) in [(&a, "1"), (&b, "3")] {
        assert_eq!(run(&["homogenize", "--preset", "checkerboard", "--jobs", jobs], dir.path()), 0);
    }
    for file in ["homogenize.csv", "homogenize.json"] {
        assert_eq!(
            std::fs::read(a.path().join(file)).unwrap(),
            std::fs::read(b.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn readme_config_example_parses() {
    let readme = include_str!("../../../README.md");
    let start = readme.find("```toml\n").expect("toml block") + "```toml\n".len();
    let len = readme[start..].find("```").expect("closed block");
    let cfg = ExperimentConfig::from_toml(Preset::Default, &readme[start..start + len]).unwrap();
    assert_eq!(cfg.homogenize.radii, vec![8.0, 16.0, 32.0]);
    assert_eq!(cfg.problem.xi, vec![vec![1.5]]);
}
