//! Acceptance criteria A1 to A10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails or cannot run.

use std::process::ExitCode;

use isospec::verify::{run_criterion, suite};

fn main() -> ExitCode {
    let mut failed = 0;
    let ids = suite("all").expect("suite `all` exists");
    for id in ids {
        match run_criterion(id) {
            Ok(result) => {
                println!("{}", result.line());
                failed += usize::from(!result.passed);
            }
            Err(e) => {
                println!("{id} FAIL error: {e}");
                failed += 1;
            }
        }
    }
    println!("acceptance: {}/{} passed", ids.len() - failed, ids.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
