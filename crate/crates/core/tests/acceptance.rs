//! One line per acceptance criterion; exits nonzero if any criterion fails.

use std::process::ExitCode;

use rhbundle::acceptance::run;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for id in 1..=13 {
        let r = run(id, None);
        println!("{r}");
        if !r.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: 13 of 13 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
