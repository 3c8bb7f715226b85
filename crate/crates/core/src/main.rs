use std::process::ExitCode;

use hyposym::config::{parse_config, ParseOutcome};
use hyposym::run::{run, write_report};

fn main() -> ExitCode {
    if let Some(n) = std::env::var("HYPOSYM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let cfg = match parse_config(std::env::args_os()) {
        Ok(c) => c,
        Err(ParseOutcome::Clap(e)) => e.exit(),
        Err(ParseOutcome::Usage(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = run(&cfg);
    let json = match serde_json::to_string_pretty(&report) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = write_report(&report, path) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => println!("{json}"),
    }
    for c in &report.summary.checks {
        eprintln!("{:<40} {}", c.name, if c.ok { "ok" } else { "MISMATCH" });
    }
    for e in &report.errors {
        eprintln!("error in {}: {}", e.component, e.message);
    }
    if report.summary.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
