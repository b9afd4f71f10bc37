use std::path::PathBuf;
use std::process::ExitCode;

use apery_core::apery::{case_series, exact_sequences, run_all, run_cases, CaseReport, Registry, RunOptions};
use apery_core::lfunc::{corollary_checks, verify_stabilizer_identity, Corollary, StabilizerCase};
use apery_core::par::Exec;
use apery_core::series::{QSeries, DEFAULT_ORDER};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod output;

use output::{Emitter, Format};

#[derive(Parser)]
#[command(name = "apery", version, about = "Apery limits from modular parameterizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline for one case or all of them.
    Verify(VerifyArgs),
    /// Check the L-value identities at cusps and their residue-class corollaries.
    Identities(IdentityArgs),
    /// Write sequences or q-series coefficients of a case.
    Dump(DumpArgs),
    /// List registered cases.
    List,
}

#[derive(Args)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Case id, or `all`.
    #[arg(long, default_value = "all")]
    case: String,
    /// Ratio index N; defaults to the case's registered index.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    /// Order through which the q-series identities are certified.
    #[arg(long, default_value_t = DEFAULT_ORDER as u64, value_parser = clap::value_parser!(u64).range(1..))]
    order: u64,
    #[arg(long, default_value_t = 25, value_parser = clap::value_parser!(u32).range(6..))]
    digits: u32,
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u32).range(64..))]
    prec_bits: u32,
    /// Run cases one after another instead of in parallel.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Mod12,
    Mod16,
    Stabilizer,
    All,
}

#[derive(Args)]
struct IdentityArgs {
    #[arg(long, value_enum, default_value_t = Which::All)]
    which: Which,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(6..))]
    digits: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum What {
    Sequences,
    Tseries,
    Aseries,
    Integrand,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    case: String,
    #[arg(long, value_enum, default_value_t = What::Sequences)]
    what: What,
    /// Last index (sequences) or truncation order (series).
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[command(flatten)]
    common: Common,
}

/// A failure that maps to a nonzero exit code.
enum Failure {
    Usage(String),
    Runtime(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Identities(a) => identities(a),
        Command::Dump(a) => dump(a),
        Command::List => list(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn registry() -> Result<Registry, Failure> {
    Registry::load().map_err(|e| Failure::Runtime(e.to_string()))
}

fn io(e: std::io::Error) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Columns of the verify summary.
#[derive(Serialize)]
struct Summary<'a> {
    case: &'a str,
    pass: bool,
    ode_verified_to: Option<usize>,
    integrand_match_order: Option<usize>,
    n_used: usize,
    limit_estimate: &'a str,
    target: &'a str,
    abs_error: f64,
    rate_model: &'a str,
    fitted_rate: f64,
}

impl<'a> From<&'a CaseReport> for Summary<'a> {
    fn from(r: &'a CaseReport) -> Self {
        Summary {
            case: &r.case,
            pass: r.pass,
            ode_verified_to: r.ode_verified_to,
            integrand_match_order: r.integrand_match_order,
            n_used: r.n_used,
            limit_estimate: &r.limit_estimate,
            target: &r.target,
            abs_error: r.abs_error,
            rate_model: &r.rate_model,
            fitted_rate: r.fitted_rate,
        }
    }
}

fn verify(a: VerifyArgs) -> Result<bool, Failure> {
    let reg = registry()?;
    let opts = RunOptions {
        series_order: a.order as usize,
        n: a.n.map(|n| n as usize),
        prec_bits: a.prec_bits,
        digits: a.digits,
    };
    let exec = if a.sequential { Exec::Sequential } else { Exec::Parallel };
    let reports = if a.case == "all" {
        run_all(exec, &reg, &opts)
    } else {
        let case = reg.get(&a.case).map_err(|e| Failure::Usage(e.to_string()))?;
        run_cases(exec, std::slice::from_ref(case), &opts)
    };
    let pass = reports.iter().all(|r| r.pass);
    let mut out = Emitter::open(a.common.out.as_deref()).map_err(io)?;
    match a.common.format {
        Format::Json if reports.len() == 1 => out.json(&reports[0]),
        Format::Json => out.json(&reports),
        Format::Csv => out.csv(reports.iter().map(Summary::from)),
        Format::Text => out.text(&output::verify_table(&reports)),
    }
    .map_err(io)?;
    Ok(pass)
}

#[derive(Serialize)]
struct IdentityReport {
    stabilizer: Vec<apery_core::lfunc::StabilizerReport>,
    corollaries: Vec<apery_core::lfunc::CorollaryReport>,
    pass: bool,
}

fn identities(a: IdentityArgs) -> Result<bool, Failure> {
    let run = |e: apery_core::Error| Failure::Runtime(e.to_string());
    let mut stabilizer = Vec::new();
    let mut corollaries = Vec::new();
    if matches!(a.which, Which::Stabilizer | Which::All) {
        for case in [StabilizerCase::level5_eisenstein(), StabilizerCase::level12()] {
            stabilizer.push(verify_stabilizer_identity(&case, None, a.digits).map_err(run)?);
        }
    }
    for (w, c) in [(Which::Mod12, Corollary::Mod12), (Which::Mod16, Corollary::Mod16)] {
        if a.which == w || a.which == Which::All {
            corollaries.push(corollary_checks(c, a.digits).map_err(run)?);
        }
    }
    let pass = stabilizer.iter().all(|r| r.pass) && corollaries.iter().all(|r| r.pass);
    let report = IdentityReport { stabilizer, corollaries, pass };
    let mut out = Emitter::open(a.common.out.as_deref()).map_err(io)?;
    match a.common.format {
        Format::Json => out.json(&report),
        Format::Csv => out.csv(output::identity_rows(&report.stabilizer, &report.corollaries)),
        Format::Text => out.text(&output::identity_table(&report.stabilizer, &report.corollaries)),
    }
    .map_err(io)?;
    Ok(pass)
}

#[derive(Serialize)]
struct SequenceRow {
    n: usize,
    a: String,
    b: String,
}

#[derive(Serialize)]
struct SeriesRow {
    exponent: String,
    coeff: String,
}

fn series_rows(s: &QSeries) -> Vec<SeriesRow> {
    s.coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| SeriesRow {
            exponent: apery_core::rat::format(&(s.lead_exp().clone() + i as u32)),
            coeff: apery_core::rat::format(c),
        })
        .collect()
}

fn dump(a: DumpArgs) -> Result<bool, Failure> {
    let reg = registry()?;
    let case = reg.get(&a.case).map_err(|e| Failure::Usage(e.to_string()))?;
    let run = |e: apery_core::Error| Failure::Runtime(e.to_string());
    let n = a.n as usize;
    let mut out = Emitter::open(a.common.out.as_deref()).map_err(io)?;
    let written = match a.what {
        What::Sequences => {
            let (_, pair) = exact_sequences(case, n).map_err(run)?;
            let rows: Vec<SequenceRow> = (0..=n)
                .map(|i| SequenceRow {
                    n: i,
                    a: apery_core::rat::format(&pair.a[i]),
                    b: apery_core::rat::format(&pair.b[i]),
                })
                .collect();
            match a.common.format {
                Format::Json => out.json(&rows),
                Format::Csv => out.csv(rows.iter()),
                Format::Text => out
                    .text(&output::sequence_text(&rows.iter().map(|r| (r.n, &r.a[..], &r.b[..])).collect::<Vec<_>>())),
            }
        }
        what => {
            let (t, a_series, f) = case_series(case, n).map_err(run)?;
            let s = match what {
                What::Tseries => t,
                What::Aseries => a_series,
                _ => f,
            };
            let rows = series_rows(&s);
            match a.common.format {
                Format::Json => out.json(&rows),
                Format::Csv => out.csv(rows.iter()),
                Format::Text => out.text(&format!("{s}\n")),
            }
        }
    };
    written.map_err(io)?;
    Ok(true)
}

fn list() -> Result<bool, Failure> {
    let reg = registry()?;
    for c in reg.cases() {
        println!("{:<10} {:<8} {:<10} {}", c.id, c.expected_rate.tag(), c.expected_limit.label(), c.title);
    }
    Ok(true)
}
