mod config;
mod report;
mod run;

use std::process::ExitCode;

use clap::Parser;

use config::{validate_config, Cli, Format};
use report::{write_atomic, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match validate_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qcat: invalid configuration: {e}");
            return ExitCode::from(2);
        }
    };
    let setup = match run::setup(&cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("qcat: invalid configuration: {e}");
            return ExitCode::from(2);
        }
    };
    let report = run::run(&cfg, &setup);
    for c in &report.checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
            Status::Error => "ERROR",
        };
        let r = c.max_residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".into());
        eprintln!("{tag:5} {:14} max residual {r} ({:.2} s)", c.name, c.wall_time_s);
    }
    let text = match cfg.format {
        Format::Json => report.to_json().map_err(|e| e.to_string()),
        Format::Csv => report.to_csv().map_err(|e| e.to_string()),
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => {
            eprintln!("qcat: could not serialize report: {e}");
            return ExitCode::from(1);
        }
    };
    match &cfg.output {
        Some(path) => {
            if let Err(e) = write_atomic(path, &text) {
                eprintln!("qcat: could not write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
