//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion. Exits
//! nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use asmlab::config::ExperimentConfig;
use asmlab::experiments::{run, Outcome};
use asmlab_core::operator::Operator;
use asmlab_core::wick::{toeplitz, FockTrunc, Symbol};
use serde_json::{json, Value};

const GRID8: &str = "geometric:1,0.5,8";

struct Verdict {
    passed: bool,
    detail: String,
}

fn experiment(name: &str, grid: &str, seed: u64, params: Value) -> Outcome {
    let Value::Object(params) = params else {
        panic!("params must be an object")
    };
    let cfg = ExperimentConfig {
        experiment: name.into(),
        hbar_grid: grid.into(),
        params,
        seed,
        output: None,
    };
    run(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Pass iff every check passes; the detail lists failing checks, or all
/// checks when there are few.
fn from_checks(out: &Outcome) -> Verdict {
    let failing = out.failures();
    let shown: Vec<String> = if failing.is_empty() {
        out.checks
            .iter()
            .map(|c| format!("{} [{}]", c.name, c.detail))
            .collect()
    } else {
        failing
            .iter()
            .map(|c| format!("FAILED {} [{}]", c.name, c.detail))
            .collect()
    };
    Verdict {
        passed: failing.is_empty(),
        detail: shown.join("; "),
    }
}

/// Every check whose name starts with one of `prefixes`; each prefix must
/// match at least once.
fn only(out: &Outcome, prefixes: &[&str]) -> Verdict {
    for p in prefixes {
        assert!(
            out.checks.iter().any(|c| c.name.starts_with(p)),
            "no check {p:?} in {}",
            out.experiment
        );
    }
    let picked: Vec<_> = out
        .checks
        .iter()
        .filter(|c| prefixes.iter().any(|p| c.name.starts_with(p)))
        .collect();
    Verdict {
        passed: picked.iter().all(|c| c.passed),
        detail: picked
            .iter()
            .map(|c| format!("{}{} [{}]", if c.passed { "" } else { "FAILED " }, c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn c1() -> Verdict {
    from_checks(&experiment(
        "spin",
        GRID8,
        7,
        json!({"mode": "identities", "samples": 1000}),
    ))
}

fn c2() -> Verdict {
    only(
        &experiment("spin", GRID8, 0, json!({"mode": "asm-defects"})),
        &["roy-kar equals stochastic smearing"],
    )
}

fn c3() -> Verdict {
    only(
        &experiment("smear", GRID8, 1, json!({"cases": 200, "max_dim": 8, "max_atoms": 5})),
        &["proj_defect <= kernel_defect"],
    )
}

fn c4() -> Verdict {
    from_checks(&experiment(
        "quasi",
        GRID8,
        1,
        json!({"mode": "sweep", "cases": 500, "max_dim": 8}),
    ))
}

fn c5() -> Verdict {
    from_checks(&experiment("quasi", GRID8, 0, json!({"mode": "count"})))
}

/// `P(n+1, x) = 1 − e^{−x} Σ_{k≤n} x^k/k!`, summed directly.
fn poisson_cdf_complement(n: usize, x: f64) -> f64 {
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for k in 1..=n {
        term *= x / k as f64;
        sum += term;
    }
    1.0 - (-x).exp() * sum
}

fn c6() -> Verdict {
    let fock = FockTrunc::new(32).unwrap();
    let t = toeplitz(&Symbol::disk(1.0).unwrap(), &fock).unwrap();
    let d = fock.dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { poisson_cdf_complement(i, 1.0) } else { 0.0 };
            worst = worst.max((t.as_slice()[i * d + j].re - want).abs() + t.as_slice()[i * d + j].im.abs());
        }
    }
    let e0 = t.as_slice()[0].re;
    let e0_ok = (e0 - (1.0 - (-1.0f64).exp())).abs() <= 1e-8 && (e0 - 0.6321206).abs() <= 5e-8;
    let id = toeplitz(&Symbol::constant(1.0), &fock).unwrap() == Operator::identity(d);
    let wick = only(
        &experiment(
            "wick",
            GRID8,
            0,
            json!({"trunc": 32, "cells": "disks:1.0", "windings": "1"}),
        ),
        &["proj column vs incomplete-gamma oracle"],
    );
    Verdict {
        passed: worst <= 1e-8 && e0_ok && id && wick.passed,
        detail: format!(
            "entrywise gap {worst:.3e} <= 1e-8; entry0 {e0:.9}; toeplitz(1) == I: {id}; {}",
            wick.detail
        ),
    }
}

fn c7() -> Verdict {
    let out = experiment(
        "wick",
        "1,0.5,0.25,0.125",
        0,
        json!({"trunc": 64, "cells": "disks:1.0", "windings": "1", "check_decay": true}),
    );
    only(
        &out,
        &[
            "proj decreasing strictly",
            "proj(1/8) <= 0.25 proj(1/2)",
            "N vs N/2 sensitivity",
        ],
    )
}

fn c8() -> Verdict {
    let out = experiment(
        "wick",
        GRID8,
        0,
        json!({"trunc": 32, "cells": "disks:1.0", "windings": "-2,-1,1,2"}),
    );
    only(
        &out,
        &[
            "index_witness(-2)",
            "index_witness(-1)",
            "index_witness(1)",
            "index_witness(2)",
        ],
    )
}

fn c9() -> Verdict {
    only(
        &experiment("riesz", GRID8, 0, json!({"cases": 100})),
        &["round_trip", "riesz_bound"],
    )
}

fn c10() -> Verdict {
    from_checks(&experiment("spin", GRID8, 0, json!({"mode": "chsh-scan"})))
}

fn c11() -> Verdict {
    only(&experiment("riesz", GRID8, 0, json!({"cases": 100})), &["naimark"])
}

type Criterion = (&'static str, Duration, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("spin identity suite", Duration::from_secs(1), c1),
        ("spin equals stochastic smearing", Duration::from_secs(1), c2),
        ("smearing defect bound", Duration::from_secs(5), c3),
        ("quasiprojector straightening bound", Duration::from_secs(5), c4),
        ("semiclassical state count", Duration::from_secs(1), c5),
        ("wick radial oracle", Duration::from_secs(10), c6),
        ("wick asymptotic decay", Duration::from_secs(60), c7),
        ("index witness", Duration::from_secs(30), c8),
        ("riesz correspondence", Duration::from_secs(2), c9),
        ("chsh maximum and thresholds", Duration::from_secs(30), c10),
        ("naimark compression", Duration::from_secs(2), c11),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = f();
        let took = start.elapsed();
        let ok = v.passed && took <= *budget;
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] {:>2}. {name} ({:.3}s / {}s): {}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            took.as_secs_f64(),
            budget.as_secs(),
            v.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
