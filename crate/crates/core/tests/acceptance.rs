//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fdhom::verify::{self, Outcome, SuiteConfig};

struct Line {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn timed(
    id: usize,
    name: &'static str,
    limit: Option<Duration>,
    run: impl FnOnce() -> fdhom::Result<Outcome>,
) -> Line {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    match outcome {
        Ok(o) => {
            let in_time = limit.is_none_or(|l| elapsed <= l);
            let mut detail = format!("measured {:e} vs tolerance {:e}; {}", o.measured, o.tolerance, o.detail);
            if let Some(l) = limit {
                detail.push_str(&format!("; {:.2}s (limit {}s)", elapsed.as_secs_f64(), l.as_secs()));
            }
            Line {
                id,
                name,
                passed: o.passed && in_time,
                detail,
            }
        }
        Err(e) => Line {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .expect("output directory")
        .map(|e| {
            let e = e.expect("dir entry");
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).expect("readable"))
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Line {
    let bin = env!("CARGO_BIN_EXE_fdhom");
    let dirs = [tempfile::tempdir().expect("tempdir"), tempfile::tempdir().expect("tempdir")];
    let mut codes = Vec::new();
    for (dir, jobs) in dirs.iter().zip(["1", "0"]) {
        let status = Command::new(bin)
            .args(["verify-all", "--seed", "7", "--jobs", jobs, "--out"])
            .arg(dir.path())
            .status()
            .expect("binary runs");
        codes.push(status.code());
    }
    let a = read_dir_bytes(dirs[0].path());
    let b = read_dir_bytes(dirs[1].path());
    let identical = a == b && !a.is_empty();
    Line {
        id: 12,
        name: "determinism",
        passed: identical && codes.iter().all(|c| *c == Some(0)),
        detail: format!(
            "exit codes {codes:?}; {} files, byte-identical: {identical}",
            a.len()
        ),
    }
}

fn main() {
    let cfg = SuiteConfig::default();
    let secs = Duration::from_secs;
    let lines = vec![
        timed(1, "jensen volume cell", Some(secs(1)), verify::jensen_volume_cell),
        timed(2, "harmonic-mean homogenisation", Some(secs(10)), verify::harmonic_mean),
        timed(3, "laminate toughness anisotropy", Some(secs(30)), verify::laminate_anisotropy),
        timed(4, "surface oracle equivalence", None, || verify::oracle_equivalence(&cfg)),
        timed(5, "rotation frames", None, || verify::rotation_frames(&cfg)),
        timed(6, "truncation", None, || verify::truncation(&cfg)),
        timed(7, "monotonicity profiles", None, verify::monotonicity),
        timed(8, "scaling identity", None, verify::scaling_identity),
        timed(9, "cell-value bounds", None, || verify::cell_bounds(&cfg)),
        timed(10, "homogenised integrand classes", None, || verify::homogenized_classes(&cfg)),
        timed(11, "gamma sweep", None, || verify::gamma_sweep(&cfg)),
        determinism(),
    ];
    let mut failed = 0;
    for l in &lines {
        println!("criterion {:>2} {:<32} {}  {}", l.id, l.name, if l.passed { "PASS" } else { "FAIL" }, l.detail);
        if !l.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
