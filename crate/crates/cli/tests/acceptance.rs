//! Acceptance gate: every advertised identity of the engine at its stated
//! tolerance and scale, one test (and one printed pass/fail line) per
//! criterion. Run with `cargo test -p fncalc --test acceptance -- --nocapture`
//! to see the lines.

use std::process::Command;
use std::time::Duration;

use fncalc::suite::{run_suite, SuiteConfig};

fn cfg(name: &str, seed: u64) -> SuiteConfig {
    SuiteConfig::new(name, seed)
}

fn check_line(criterion: &str, residual: f64, tol: f64) {
    let verdict = if residual <= tol { "PASS" } else { "FAIL" };
    println!("{criterion}: {verdict} (max_residual={residual:.3e}, tol={tol:.1e})");
    assert!(
        residual <= tol,
        "{criterion}: residual {residual:.3e} exceeds tolerance {tol:.1e}"
    );
}

#[test]
fn criterion_01_general_jacobi_identity() {
    let tol = 1e-9;
    let mut worst = 0.0f64;
    let mut elapsed = Duration::ZERO;
    for m in 1..=4 {
        let mut c = cfg("general-jacobi", 42);
        c.dim = Some(m);
        c.trials = Some(1000);
        c.tol = Some(tol);
        let (report, wall) = run_suite(&c, false).expect("suite runs");
        worst = worst.max(report.max_residual);
        elapsed += wall;
    }
    println!(
        "criterion 1 runtime: {:.2}s (bound 5s)",
        elapsed.as_secs_f64()
    );
    assert!(
        elapsed < Duration::from_secs(5),
        "runtime {elapsed:?} exceeds 5 s"
    );
    check_line(
        "criterion 1 (general Jacobi, 1000 sextuples × m ∈ 1..4)",
        worst,
        tol,
    );
}

#[test]
fn criterion_02_pushforward_exchanges_with_strong_difference() {
    let tol = 1e-9;
    let mut c = cfg("map-strong-diff", 42);
    c.trials = Some(500);
    c.tol = Some(tol);
    let (report, _) = run_suite(&c, false).expect("suite runs");
    check_line(
        "criterion 2 (map/strong-difference exchange, 500 pairs)",
        report.max_residual,
        tol,
    );
}

#[test]
fn criterion_03_form_contracts_with_negative_control() {
    let tol = 1e-10;
    // 167 forms per degree p ∈ {0,1,2} ⇒ 501 kernel forms.
    let mut c = cfg("form-contracts", 42);
    c.trials = Some(167);
    c.tol = Some(tol);
    let (report, _) = run_suite(&c, false).expect("suite runs");
    check_line(
        "criterion 3 (form contracts, 501 kernel forms)",
        report.max_residual,
        tol,
    );

    let mut mutant = cfg("form-contracts", 42);
    mutant.trials = Some(20);
    mutant.tol = Some(tol);
    let (mut_report, _) = run_suite(&mutant, true).expect("mutant runs");
    println!(
        "criterion 3 negative control: {}",
        if mut_report.pass {
            "UNEXPECTED PASS"
        } else {
            "FAIL (as required)"
        }
    );
    assert!(!mut_report.pass, "planted alternation bug must be detected");
}

#[test]
fn criterion_04_graded_antisymmetry() {
    let tol = 1e-8;
    let mut worst = 0.0f64;
    for m in [2usize, 3] {
        for (p, q) in [(0usize, 0usize), (0, 1), (1, 1), (1, 2), (2, 2)] {
            let mut c = cfg("antisymmetry", 42);
            c.dim = Some(m);
            c.p = Some(p);
            c.q = Some(q);
            c.trials = Some(100);
            c.tol = Some(tol);
            let (report, _) = run_suite(&c, false).expect("suite runs");
            worst = worst.max(report.max_residual);
        }
    }
    check_line(
        "criterion 4 (graded antisymmetry, grid × m ∈ {2,3} × 100 trials)",
        worst,
        tol,
    );
}

#[test]
fn criterion_05_graded_jacobi_with_proof_identities() {
    let tol = 1e-7;
    let mut worst = 0.0f64;
    let mut heavy = Duration::ZERO;
    for m in [2usize, 3] {
        for (p, q, r) in [
            (0usize, 0usize, 0usize),
            (0, 0, 1),
            (0, 1, 1),
            (1, 1, 1),
            (1, 1, 2),
        ] {
            let mut c = cfg("graded-jacobi", 42);
            c.dim = Some(m);
            c.p = Some(p);
            c.q = Some(q);
            c.r = Some(r);
            c.trials = Some(25);
            c.tol = Some(tol);
            let (report, wall) = run_suite(&c, false).expect("suite runs");
            worst = worst.max(report.max_residual);
            // the residual already folds in the triple-composition identity
            // and the alternation-associativity equality
            for key in ["phi_identity_gap", "alternation_assoc_gap"] {
                worst = worst.max(*report.constants.get(key).expect("recorded"));
            }
            if (p, q, r) == (1, 1, 2) {
                heavy += wall;
            }
        }
    }
    println!(
        "criterion 5 (1,1,2) runtime: {:.2}s (bound 120s)",
        heavy.as_secs_f64()
    );
    assert!(
        heavy < Duration::from_secs(120),
        "(1,1,2) runtime {heavy:?} exceeds 120 s"
    );
    check_line(
        "criterion 5 (graded Jacobi + proof identities, grid × m ∈ {2,3} × 25 trials)",
        worst,
        tol,
    );
}

#[test]
fn criterion_06_lie_bracket_reduction() {
    let tol = 1e-10;
    let mut c = cfg("oracle-lie", 42);
    c.trials = Some(200);
    c.tol = Some(tol);
    let (report, _) = run_suite(&c, false).expect("suite runs");
    check_line(
        "criterion 6 (degree-0 bracket vs classical Lie bracket, 200 pairs)",
        report.max_residual,
        tol,
    );
}

#[test]
fn criterion_07_lie_decomposition() {
    let tol = 1e-9;
    let mut worst = 0.0f64;
    for m in [2usize, 3] {
        for (k, l) in [(0usize, 0usize), (0, 1), (1, 1), (1, 2), (2, 2)] {
            let mut c = cfg("lie-decomposition", 42);
            c.dim = Some(m);
            c.p = Some(k);
            c.q = Some(l);
            c.trials = Some(50); // alternates flat / nonflat symmetric
            c.tol = Some(tol);
            let (report, _) = run_suite(&c, false).expect("suite runs");
            worst = worst.max(report.max_residual);
        }
    }
    check_line(
        "criterion 7 (symmetric-connection decomposition, alternated + floor level)",
        worst,
        tol,
    );
}

#[test]
fn criterion_08_naturality_of_all_three_operators() {
    let tol = 1e-8;
    let mut worst = 0.0f64;
    for suite in ["fn-naturality", "interior-naturality", "lie-naturality"] {
        let mut c = cfg(suite, 42);
        c.dim = Some(2);
        c.trials = Some(100);
        c.tol = Some(tol);
        let (report, _) = run_suite(&c, false).expect("suite runs");
        worst = worst.max(report.max_residual);
    }
    check_line(
        "criterion 8 (naturality: bracket, interior, Lie derivation; triangular maps on R², 100 trials each)",
        worst,
        tol,
    );
}

#[test]
fn criterion_09_oracle_consistency_and_proportionality() {
    let tol = 1e-9;
    let mut c = cfg("oracle-fn", 42);
    c.trials = Some(100);
    c.tol = Some(tol);
    let (report, _) = run_suite(&c, false).expect("suite runs");
    let mut spread_worst = 0.0f64;
    for (key, value) in &report.constants {
        if key.starts_with("spread_") {
            spread_worst = spread_worst.max(*value);
        }
        println!("criterion 9 constant {key} = {value:.9e}");
    }
    assert!(
        spread_worst <= 1e-6,
        "proportionality spread {spread_worst:.3e} exceeds 1e-6"
    );
    println!("criterion 9 proportionality spread: {spread_worst:.3e} (bound 1e-6)");
    check_line(
        "criterion 9 (oracle self-consistency + engine proportionality)",
        report.max_residual,
        tol,
    );
}

#[test]
fn criterion_10_selftest_reports_are_byte_identical() {
    let run = || {
        let output = Command::new(env!("CARGO_BIN_EXE_fncalc"))
            .args(["selftest", "--seed", "7"])
            .output()
            .expect("selftest binary runs");
        assert!(
            output.status.success(),
            "selftest failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        output.stdout
    };
    let first = run();
    let second = run();
    let identical = first == second;
    println!(
        "criterion 10 (selftest determinism): {}",
        if identical {
            "PASS (byte-identical)"
        } else {
            "FAIL"
        }
    );
    assert!(identical, "two selftest runs with the same seed differ");
}
