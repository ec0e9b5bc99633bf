//! Acceptance suite: runs `cliffpde all --seed 42` twice and grades the
//! report against the nine acceptance criteria, one PASS/FAIL line each.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

struct Run {
    report: Value,
    bytes: Vec<u8>,
    suite_secs: HashMap<String, f64>,
    total_secs: f64,
}

fn run_all(dir: &Path) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_cliffpde"))
        .args(["all", "--seed", "42", "--out", "report.json"])
        .current_dir(dir)
        .output()
        .unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(matches!(out.status.code(), Some(0 | 1)), "cliffpde failed to run:\n{stderr}");
    let mut suite_secs = HashMap::new();
    let mut total_secs = f64::NAN;
    for line in stderr.lines() {
        if let Some((suite, rest)) = line.split_once(" finished in ") {
            suite_secs.insert(suite.to_string(), rest.trim_end_matches(" s").parse().unwrap());
        } else if let Some(pos) = line.find(" s total)") {
            let start = line[..pos].rfind('(').unwrap() + 1;
            total_secs = line[start..pos].parse().unwrap();
        }
    }
    let bytes = std::fs::read(dir.join("report.json")).unwrap();
    Run { report: serde_json::from_slice(&bytes).unwrap(), bytes, suite_secs, total_secs }
}

/// `(passed, description)` of every check in `suite` whose name is listed,
/// or of all its checks when `names` is empty. A suite that errored out
/// carries a failed `suite_completed` check, which is always included.
fn checks(report: &Value, suite: &str, names: &[&str]) -> Vec<(bool, String)> {
    let s = report["suites"].as_array().unwrap().iter().find(|s| s["suite"] == suite);
    let Some(s) = s else { return vec![(false, format!("{suite}: missing from report"))] };
    let mut out = Vec::new();
    for c in s["checks"].as_array().unwrap() {
        let name = c["name"].as_str().unwrap();
        if names.is_empty() || names.contains(&name) || name == "suite_completed" {
            out.push((
                c["passed"].as_bool().unwrap(),
                format!("{suite}/{name} = {} ({} {})", c["measured"], c["comparison"].as_str().unwrap(), c["threshold"]),
            ));
        }
    }
    for n in names {
        if !s["checks"].as_array().unwrap().iter().any(|c| c["name"] == *n) {
            out.push((false, format!("{suite}/{n}: missing")));
        }
    }
    out
}

fn timed(secs: f64, limit: f64, what: &str) -> (bool, String) {
    (secs < limit, format!("{what} runtime {secs:.2} s (< {limit} s)"))
}

#[test]
fn acceptance_criteria() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_all(d1.path());
    let second = run_all(d2.path());
    let r = &first.report;
    let secs = |s: &str| first.suite_secs.get(s).copied().unwrap_or(f64::NAN);

    let mut criteria: Vec<(&str, Vec<(bool, String)>)> = Vec::new();

    let mut c1 = checks(r, "symbols", &[]);
    c1.push(timed(secs("symbols"), 1.0, "symbols"));
    criteria.push(("1 symbol identity", c1));

    let mut c2 = checks(r, "identities", &["left_dirac_factorizes_laplacian", "riemann_fueter_factorizes_laplacian"]);
    c2.push(timed(secs("identities"), 30.0, "identities"));
    criteria.push(("2 factorizations", c2));

    let mut c3 = checks(r, "gauge-solve", &[]);
    c3.extend(checks(r, "lorenz", &[]));
    c3.push(timed(secs("gauge-solve") + secs("lorenz"), 120.0, "gauge-solve + lorenz"));
    criteria.push(("3 gauge solver", c3));

    criteria.push((
        "4 algebraic identities",
        checks(r, "identities", &["gauged_identity_residual", "coupled_single_reduction", "e4_conjugation_defect"]),
    ));

    let mut c5 = checks(r, "hodge", &[]);
    c5.extend(checks(
        r,
        "nonlinear-hodge",
        &["unconverged_instances", "max_residual_ratio_small_gauge", "divergence_raised_at_large_gauge"],
    ));
    criteria.push(("5 hodge", c5));

    criteria.push(("6 b-component pipeline", checks(r, "nonlinear-hodge", &["b_divergence", "b_consistency", "b_dirac_equation"])));
    criteria.push(("7 kernel diagnostic", checks(r, "kernel", &[])));
    criteria.push(("8 compensation", checks(r, "compensation", &[])));

    criteria.push((
        "9 reproducibility",
        vec![
            (first.bytes == second.bytes, "two runs of `all --seed 42` byte-identical".to_string()),
            timed(first.total_secs, 300.0, "full suite (first run)"),
            timed(second.total_secs, 300.0, "full suite (second run)"),
        ],
    ));

    let mut failed = Vec::new();
    for (name, items) in &criteria {
        let ok = items.iter().all(|(p, _)| *p);
        println!("{} criterion {name}", if ok { "PASS" } else { "FAIL" });
        for (p, what) in items {
            println!("    {} {what}", if *p { "ok  " } else { "FAIL" });
        }
        if !ok {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed acceptance criteria: {failed:?}");
}
