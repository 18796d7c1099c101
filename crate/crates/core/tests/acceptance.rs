//! Runs every acceptance criterion and prints one line per criterion.
//! Built without the libtest harness so the lines always reach the output.

use std::process::ExitCode;
use std::time::Instant;

use hypercone::verify::{run_criterion, CRITERIA};

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for id in 1..=CRITERIA {
        let start = Instant::now();
        let outcome = run_criterion(id, 0);
        println!("{outcome} [{:.1}s]", start.elapsed().as_secs_f64());
        if !outcome.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {CRITERIA} criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
