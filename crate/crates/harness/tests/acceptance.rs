//! The acceptance suite: every criterion on the default configuration, one
//! line per criterion. Thresholds live in `primeq_harness::tolerances`.
//! Runs without the libtest harness so the lines always reach the output.

use std::process::ExitCode;

use primeq_harness::config::RunConfig;
use primeq_harness::suites::{run_criterion, CRITERIA};

fn main() -> ExitCode {
    let cfg = RunConfig::default();
    let mut failed = Vec::new();
    for (id, title) in CRITERIA {
        match run_criterion(id, &cfg) {
            Ok(outcome) => {
                println!("{outcome}");
                if !outcome.passed() {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("FAIL {id:>2} {title:<24} could not run: {e}");
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
