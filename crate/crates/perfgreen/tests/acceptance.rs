//! Acceptance suite: every criterion runs at its pinned tolerance and prints
//! one pass/fail line. Runs sequentially under its own harness so the
//! runtime budgets are measured without test-runner contention.

use perfgreen::study::criteria;

fn main() {
    let outcomes = criteria::run_all();
    let mut failures = 0usize;
    for outcome in &outcomes {
        println!("{}", outcome.line());
        if !outcome.passed {
            failures += 1;
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        outcomes.len() - failures,
        outcomes.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
