//! Command-line front end.
//!
//! Usage:
//!   wolffkit run <config.json> [--threads N] [--output-dir PATH]
//!   wolffkit validate <config.json>
//!
//! Exit codes: 0 success, 2 config/schema violation, 3 admissibility
//! violation (the diagnostic cites the predicate), 4 divergence or
//! nonconvergence (the report is still written).

mod config;
mod report;
mod tasks;

use config::{parse_config, DiagnosticCategory};
use std::path::PathBuf;
use std::process::ExitCode;
use tasks::{execute, Outcome, TaskError};
use wolffkit_core::Error as CoreError;

struct Args {
    command: String,
    config_path: PathBuf,
    threads: Option<usize>,
    output_dir: PathBuf,
}

fn usage() -> String {
    "usage:\n  wolffkit run <config.json> [--threads N] [--output-dir PATH]\n  wolffkit validate <config.json>"
        .to_string()
}

fn parse_args(argv: &[String]) -> Result<Args, String> {
    let mut it = argv.iter();
    let command = it.next().ok_or_else(usage)?.clone();
    if command != "run" && command != "validate" {
        return Err(format!("unknown command `{command}`\n{}", usage()));
    }
    let config_path = PathBuf::from(it.next().ok_or_else(usage)?);
    let mut threads = None;
    let mut output_dir = PathBuf::from(".");
    while let Some(flag) = it.next() {
        match flag.as_str() {
            "--threads" => {
                let v = it.next().ok_or("--threads needs a value")?;
                threads = Some(v.parse::<usize>().map_err(|_| "--threads needs an integer")?);
            }
            "--output-dir" => {
                output_dir = PathBuf::from(it.next().ok_or("--output-dir needs a value")?);
            }
            other => return Err(format!("unknown flag `{other}`\n{}", usage())),
        }
    }
    Ok(Args {
        command,
        config_path,
        threads,
        output_dir,
    })
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let args = match parse_args(&argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };

    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("failed to configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    let text = match std::fs::read_to_string(&args.config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config_path.display());
            return ExitCode::from(2);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config schema violation: {e}");
            return ExitCode::from(2);
        }
    };

    let diagnostics = cfg.diagnostics();
    if args.command == "validate" {
        if diagnostics.is_empty() {
            println!("ok: configuration is valid");
            return ExitCode::SUCCESS;
        }
        for d in &diagnostics {
            if d.predicate.is_empty() {
                println!("{}: {}", d.field, d.message);
            } else {
                println!("{}: requires {} ({})", d.field, d.predicate, d.message);
            }
        }
        let exit = diagnostic_exit(&diagnostics);
        return ExitCode::from(exit);
    }

    if !diagnostics.is_empty() {
        for d in &diagnostics {
            if d.predicate.is_empty() {
                eprintln!("{}: {}", d.field, d.message);
            } else {
                eprintln!("{}: requires {} ({})", d.field, d.predicate, d.message);
            }
        }
        return ExitCode::from(diagnostic_exit(&diagnostics));
    }

    match execute(&cfg, &args.output_dir) {
        Ok(Outcome::Success) => {
            println!("ok: report written to {}", args.output_dir.join("report.json").display());
            ExitCode::SUCCESS
        }
        Ok(Outcome::Degraded(reason)) => {
            eprintln!("run degraded: {reason} (report written)");
            ExitCode::from(4)
        }
        Err(TaskError::Core(CoreError::Admissibility { predicate, detail })) => {
            eprintln!("admissibility violated: requires {predicate} ({detail})");
            ExitCode::from(3)
        }
        Err(TaskError::Core(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(TaskError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(1)
        }
    }
}

fn diagnostic_exit(diags: &[config::Diagnostic]) -> u8 {
    if diags
        .iter()
        .any(|d| d.category == DiagnosticCategory::Schema)
    {
        2
    } else {
        3
    }
}
