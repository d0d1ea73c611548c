//! Acceptance gate: runs every verification criterion at its pinned
//! tolerance and prints one pass/fail line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use kbest::validate::{render_report, run, Level};

const SEED: u64 = 0xD1CE;

#[test]
fn acceptance_criteria() {
    let results = run(Level::Full, SEED);
    let mut all_passed = true;
    for r in &results {
        println!(
            "{} {} — {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all_passed &= r.passed;
    }

    // byte-identical reports from repeated full runs with the same seed
    let report_a = render_report(&results, SEED);
    let report_b = render_report(&run(Level::Full, SEED), SEED);
    let reproducible = report_a == report_b;
    println!(
        "{} full-report byte determinism — identical across reruns: {}",
        if reproducible { "PASS" } else { "FAIL" },
        reproducible
    );

    assert!(all_passed, "one or more acceptance criteria failed:\n{report_a}");
    assert!(reproducible, "full validation report not byte-identical across reruns");
}
