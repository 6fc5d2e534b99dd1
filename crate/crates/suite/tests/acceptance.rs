//! Runs every acceptance criterion and prints one verdict line for each.

use std::process::ExitCode;
use std::time::Instant;

use bruin_core::validation::{run_criterion, title, ValidationConfig, CRITERIA};

fn cli_stdout(args: &[&str]) -> Result<Vec<u8>, String> {
    let argv = std::iter::once("bruin").chain(args.iter().copied()).map(String::from).collect();
    let mut out = Vec::new();
    match bruin::run_to(argv, &mut out) {
        0 => Ok(out),
        code => Err(format!("bruin {} exited with {code}", args[0])),
    }
}

/// The same command line outputs with one worker and with four.
fn cli_worker_check() -> Result<Vec<String>, String> {
    let runs: [&[&str]; 2] = [
        &["validate", "--criteria", "3,5", "--seed", "1"],
        &[
            "simulate", "--kind", "cumulative", "--u", "1.5", "--a", "0.8", "--rho", "0.3",
            "--sweep", "L=0,0.1,0.3", "--n-paths", "20000", "--dt", "1e-3", "--batch-size", "700", "--seed", "1",
        ],
    ];
    let mut notes = Vec::new();
    for args in runs {
        let one = cli_stdout(&[args, &["--workers", "1"]].concat())?;
        let four = cli_stdout(&[args, &["--workers", "4"]].concat())?;
        if one != four {
            return Err(format!("bruin {} differs between 1 and 4 workers", args[0]));
        }
        notes.push(format!("ok   bruin {}: {} identical bytes at 1 and 4 workers", args[0], one.len()));
    }
    Ok(notes)
}

fn main() -> ExitCode {
    let vc = ValidationConfig::default();
    let mut failed = Vec::new();
    for id in CRITERIA {
        let start = Instant::now();
        let mut report = match run_criterion(id, &vc) {
            Ok(r) => r,
            Err(e) => {
                println!("criterion {id:>2} FAIL  {}\n    error: {e}", title(id));
                failed.push(id);
                continue;
            }
        };
        if id == 10 {
            match cli_worker_check() {
                Ok(notes) => report.details.extend(notes),
                Err(e) => {
                    report.passed = false;
                    report.details.push(format!("FAIL {e}"));
                }
            }
        }
        print!("{report}");
        println!("    [{:.1}s]", start.elapsed().as_secs_f64());
        if !report.passed {
            failed.push(id);
        }
    }
    println!(
        "\nacceptance: {} of {} criteria pass{}",
        CRITERIA.len() - failed.len(),
        CRITERIA.len(),
        if failed.is_empty() { String::new() } else { format!("; failing: {failed:?}") }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
