//! One PASS/FAIL line per acceptance criterion.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use conifold_forge::checks::{check_names, criterion_of, run_check, Ctx};
use conifold_forge::config::Config;
use conifold_forge::report::ExperimentReport;

const TITLES: [&str; 12] = [
    "Ricci-flatness of the cone and smoothing metrics",
    "scaling identities",
    "decay of the pulled-back metric to the cone",
    "cutoff coefficients and bounds",
    "glued balanced form positive and closed",
    "glued HYM residual in three regions",
    "square-root algebra",
    "Uhlenbeck-Yau inequality",
    "linearized operator",
    "anomaly residual",
    "f1 asymptotics",
    "determinism of `run all --seed 7`",
];

/// Runtime budget in seconds per criterion, where one is stated.
fn budget(criterion: u8) -> Option<f64> {
    match criterion {
        1 => Some(60.0),
        3 => Some(120.0),
        6 => Some(300.0),
        _ => None,
    }
}

fn run_all_binary(dir: &std::path::Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_conifold-forge"))
        .args(["run", "all", "--seed", "7", "--out"])
        .arg(dir)
        .output()
        .expect("spawn conifold-forge");
    let code = out.status.code().unwrap_or(-1);
    (code, std::fs::read(dir.join("summary.json")).unwrap_or_default())
}

#[test]
fn acceptance() {
    let cfg = Config::default();
    let ctx = Ctx { cfg: &cfg, seed: 7, timing: false };
    let mut by_criterion: BTreeMap<u8, Vec<(ExperimentReport, f64)>> = BTreeMap::new();
    for name in check_names() {
        let start = Instant::now();
        let rep = run_check(name, &ctx).unwrap();
        let secs = start.elapsed().as_secs_f64();
        by_criterion.entry(criterion_of(name).unwrap()).or_default().push((rep, secs));
    }

    let mut failed = Vec::new();
    for k in 1..=11u8 {
        let reps = by_criterion.get(&k).map(Vec::as_slice).unwrap_or(&[]);
        let secs: f64 = reps.iter().map(|r| r.1).sum();
        let in_time = budget(k).is_none_or(|b| secs < b);
        let pass = !reps.is_empty() && reps.iter().all(|r| r.0.pass) && in_time;
        println!("{} criterion {k:>2}: {} ({secs:.1} s)", if pass { "PASS" } else { "FAIL" }, TITLES[k as usize - 1]);
        for (r, _) in reps {
            println!("    {}", r.line());
        }
        if !in_time {
            println!("    runtime {secs:.1} s exceeds {:.0} s", budget(k).unwrap());
        }
        if !pass {
            failed.push(k);
        }
    }

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let (c1, s1) = run_all_binary(dirs[0].path());
    let (c2, s2) = run_all_binary(dirs[1].path());
    let same = !s1.is_empty() && s1 == s2 && c1 == c2;
    println!("{} criterion 12: {} (exit codes {c1}, {c2}; {} bytes)", if same { "PASS" } else { "FAIL" }, TITLES[11], s1.len());
    if !same {
        failed.push(12);
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
