use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hsmetric::export;
use hsmetric::metric;
use hsmetric::scenarios::{self, DEFAULT_GRID};
use hsmetric::transport::{evolve, init_transport, reconstruct_eulerian, solution_surface};
use hsmetric::verify::{self, Suite};

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;

/// Conservative Hunter-Saxton solutions and their Lipschitz metric.
#[derive(Parser)]
#[command(name = "hsmetric", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario and export the transport surface and Eulerian piece tables.
    Solve {
        /// Scenario, e.g. `delta:alpha=1.5`, `wavebreak`, `translate:base=erf,h=0.1`.
        scenario: String,
        #[arg(long, value_delimiter = ',', value_parser = non_negative, allow_hyphen_values = true, default_value = "0")]
        times: Vec<f64>,
        /// Equispaced interior eta samples, added to the breakpoints.
        #[arg(long, default_value_t = DEFAULT_GRID)]
        eta_samples: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rescaled distance between two solutions against the (1 + t + t^2/8) bound.
    Metric {
        a: String,
        b: String,
        #[arg(long, value_delimiter = ',', value_parser = non_negative, allow_hyphen_values = true, default_value = "0")]
        times: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite and print one line per property.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Roundtrip,
    Ode,
    Conservation,
    Lipschitz,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Roundtrip => Suite::Roundtrip,
            SuiteArg::Ode => Suite::Ode,
            SuiteArg::Conservation => Suite::Conservation,
            SuiteArg::Lipschitz => Suite::Lipschitz,
            SuiteArg::All => Suite::All,
        }
    }
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    let t: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(format!("time {s} must be finite and nonnegative"))
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn solve(scenario: &str, times: &[f64], eta_samples: usize, format: Format, out: Option<&PathBuf>) -> Result<u8> {
    let s = scenarios::parse(scenario)?;
    let ts0 = init_transport(&s.initial)?;
    let surface = solution_surface(&ts0, times, eta_samples)?;
    let mut states = Vec::new();
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    for t in sorted {
        states.push((t, reconstruct_eulerian(&evolve(&ts0, t)?)?));
    }
    let text = match format {
        Format::Csv => {
            let rows: Vec<_> = states.iter().flat_map(|(t, st)| export::eulerian_rows(*t, st)).collect();
            format!("{}\n{}", export::surface_csv(&surface), export::eulerian_csv(&rows))
        }
        Format::Json => serde_json::to_string_pretty(&export::solve_json(&surface, &states))? + "\n",
    };
    emit(out, &text)?;
    Ok(0)
}

fn metric_cmd(a: &str, b: &str, times: &[f64], format: Format, out: Option<&PathBuf>) -> Result<u8> {
    let (sa, sb) = (scenarios::parse(a)?, scenarios::parse(b)?);
    let reports = metric::verify_lipschitz(&sa.initial, &sb.initial, times)?;
    let text = match format {
        Format::Csv => export::metric_csv(&reports),
        Format::Json => serde_json::to_string_pretty(&reports)? + "\n",
    };
    emit(out, &text)?;
    let violated: Vec<f64> = reports.iter().filter(|r| !r.satisfied).map(|r| r.t).collect();
    if violated.is_empty() {
        Ok(0)
    } else {
        eprintln!("bound violated at t = {violated:?}");
        Ok(EXIT_VIOLATION)
    }
}

fn verify_cmd(suite: Suite, seed: u64) -> Result<u8> {
    let results = verify::run(suite, seed)?;
    let mut out = String::new();
    for r in &results {
        out.push_str(&format!("{r}\n"));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    out.push_str(&format!("{} properties, {failed} failed\n", results.len()));
    emit(None, &out)?;
    Ok(if failed == 0 { 0 } else { EXIT_VIOLATION })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { scenario, times, eta_samples, format, out } => {
            solve(&scenario, &times, eta_samples, format, out.as_ref())
        }
        Command::Metric { a, b, times, format, out } => metric_cmd(&a, &b, &times, format, out.as_ref()),
        Command::Verify { suite, seed } => verify_cmd(suite.into(), seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<hsmetric::Error>().is_some() {
                ExitCode::from(EXIT_DOMAIN)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}
