//! Command-line front end for `infocap`.

#![forbid(unsafe_code)]

pub mod args;
pub mod checks;
pub mod commands;
pub mod error;
pub mod output;

use args::{Cli, Command, Format};
use commands::{write_side_file, Report};
use error::{CliError, CliResult};
use output::{csv_string, emit, json_string};

/// Thread count from `INFOCAP_THREADS`; `0`, unset or unparsable means automatic.
pub fn configured_threads() -> Option<usize> {
    std::env::var("INFOCAP_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn paper_numbers(filter: Option<&str>, format: Format) -> CliResult<Report> {
    let outcomes = checks::run_checks(filter);
    if outcomes.is_empty() {
        return Err(CliError::Param("no check matches the filter".into()));
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.name)
        .collect();
    let text = match format {
        Format::Json => json_string(&outcomes),
        Format::Csv => {
            let header =
                ["id", "name", "passed", "seconds", "limit_seconds", "detail"].map(String::from);
            let rows: Vec<Vec<String>> = outcomes
                .iter()
                .map(|o| {
                    vec![
                        o.id.to_string(),
                        o.name.to_string(),
                        if o.passed { "pass" } else { "fail" }.to_string(),
                        format!("{:.3}", o.seconds),
                        format!("{:.0}", o.limit_seconds),
                        o.detail.clone(),
                    ]
                })
                .collect();
            csv_string(&header, &rows)?
        }
    };
    Ok(Report {
        text,
        failure: (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", "))),
    })
}

/// Runs one command, writing its output; returns the failure message, if any.
pub fn run(cli: &Cli) -> CliResult<Option<String>> {
    let (report, path) = match &cli.command {
        Command::Bound(a) => (commands::cmd_bound(a)?, a.out.output.clone()),
        Command::Oracle(a) => {
            let (report, povm) = commands::cmd_oracle(a)?;
            if let (Some(p), Some(text)) = (&a.povm_out, povm) {
                write_side_file(p, &text)?;
            }
            (report, a.output.clone())
        }
        Command::Certify(a) => (commands::cmd_certify(a)?, a.output.clone()),
        Command::Search(a) => {
            let (report, best) = commands::cmd_search(a)?;
            if let (Some(p), Some(text)) = (&a.best_out, best) {
                write_side_file(p, &text)?;
            }
            (report, a.out.output.clone())
        }
        Command::Sweep(a) => (commands::cmd_sweep(a)?, a.out.output.clone()),
        Command::PaperNumbers(a) => (
            paper_numbers(a.only.as_deref(), a.out.format.unwrap_or(Format::Csv))?,
            a.out.output.clone(),
        ),
        Command::SrDemo(a) => (commands::cmd_sr_demo(a)?, a.output.clone()),
    };
    emit(&report.text, path.as_deref())?;
    Ok(report.failure)
}
