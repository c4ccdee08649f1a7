use std::process::ExitCode;

use fracbound::validation;

fn main() -> ExitCode {
    // `cargo test -- <filter>` passes extra arguments; only a bare numeric id narrows the run
    let ids: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let reports: Vec<_> = if ids.is_empty() {
        validation::run(&[], |r| println!("{r}"))
    } else {
        ids.iter()
            .filter_map(|&id| validation::run_criterion(id))
            .inspect(|r| println!("{r}"))
            .collect()
    };
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("\nacceptance: {} passed, {failed} failed", reports.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
