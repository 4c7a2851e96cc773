//! Runs every acceptance check and prints one PASS/FAIL line per check.
//! Built without the test harness so the lines always reach the output.

use std::process::ExitCode;

use splitqm_core::selftest::{run_criterion, SelftestOptions, CRITERIA};

fn main() -> ExitCode {
    let opts = SelftestOptions::default();
    let mut failed = Vec::new();
    for (id, _, _) in CRITERIA {
        let r = run_criterion(id, &opts).expect("known criterion");
        println!("{} ({:.2?})", r.line(), r.elapsed);
        if !r.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} checks passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing checks {failed:?}");
        ExitCode::FAILURE
    }
}
