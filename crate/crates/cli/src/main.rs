use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use faulty_oracle::config::{CommonArgs, NoiseArgs, Settings};
use faulty_oracle::output::{self, Format};
use faulty_oracle::simulate::{simulate, TRAJECTORY_HEADER};
use faulty_oracle::sweep::{fit_rows, run_sweep, verify_bounds, verify_rows, CsvRow, SweepResult, VerifyReport};
use faulty_oracle::unravel::unravel_check;
use faulty_oracle::{exit, CliError, Result};

#[derive(Parser)]
#[command(name = "faulty-oracle", version, about = "Continuous-time search with a dephasing oracle: runtimes, bounds and noise checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump one paired run (oracle vs oracle-free) sample by sample.
    Simulate(CommonArgs),
    /// Measure the threshold time over a grid of N and fit its scaling.
    Sweep(CommonArgs),
    /// Check measured threshold times against the runtime lower bound.
    VerifyBounds(VerifyArgs),
    /// Compare averaged fluctuating-oracle runs with the master equation.
    Unravel(UnravelArgs),
    /// Re-fit the N-scaling of an existing result CSV.
    Fit(FitArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Verify rows of an existing result CSV instead of running a sweep.
    #[arg(long)]
    from: Option<PathBuf>,
}

#[derive(Args)]
struct UnravelArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    noise: NoiseArgs,
}

#[derive(Args)]
struct FitArgs {
    /// Result CSV to fit.
    #[arg(long)]
    from: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn emit_sweep(s: &Settings, result: &SweepResult) -> Result<()> {
    match s.format {
        Format::Csv => {
            let rows: Vec<CsvRow> = result.rows.iter().map(CsvRow::from).collect();
            output::write_result_csv(s.out.as_deref(), &rows)?;
        }
        Format::Json => output::write_json(s.out.as_deref(), result)?,
    }
    if let Some(f) = &result.fit {
        eprintln!("fitted exponent {:.4} ± {:.4} over {} points", f.exponent, f.stderr, f.points);
    } else {
        eprintln!("fit skipped: fewer than 3 rows reached the threshold");
    }
    for c in result.cross_checks.iter().filter(|c| !c.agree) {
        eprintln!("cross-check disagreement at N = {}: reduced {:?} vs full {:?}", c.n, c.reduced.t_measured, c.full.t_measured);
    }
    let (violations, failures) = (result.violations(), result.failures());
    if violations > 0 {
        return Err(CliError::BoundViolation(violations));
    }
    if failures > 0 {
        return Err(CliError::RowFailures(failures));
    }
    Ok(())
}

fn emit_verify(out: Option<&std::path::Path>, format: Format, report: &VerifyReport) -> Result<()> {
    match format {
        Format::Json => output::write_json(out, report)?,
        Format::Csv => {
            #[derive(serde::Serialize)]
            struct Line<'a> {
                n: usize,
                gamma: f64,
                energy: f64,
                p: f64,
                t_measured: Option<f64>,
                t_bound: f64,
                ratio: Option<f64>,
                satisfied: bool,
                note: Option<&'a str>,
            }
            let lines: Vec<Line> = report
                .rows
                .iter()
                .map(|r| Line { n: r.n, gamma: r.gamma, energy: r.energy, p: r.p, t_measured: r.t_measured, t_bound: r.t_bound, ratio: r.ratio, satisfied: r.satisfied, note: r.note.as_deref() })
                .collect();
            output::write_csv(out, &lines, &["N", "gamma", "E", "p", "T_measured", "T_bound", "ratio", "satisfied", "note"])?;
        }
    }
    eprintln!("{} row(s), {} violation(s), {} failure(s)", report.rows.len(), report.violations, report.failures);
    if report.violations > 0 {
        return Err(CliError::BoundViolation(report.violations));
    }
    if report.failures > 0 {
        return Err(CliError::RowFailures(report.failures));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let s = Settings::resolve(&args, &NoiseArgs::default())?;
            let rows = simulate(&s.simulate_spec()?)?;
            match s.format {
                Format::Csv => output::write_csv(s.out.as_deref(), &rows, &TRAJECTORY_HEADER),
                Format::Json => output::write_json(s.out.as_deref(), &rows),
            }
        }
        Command::Sweep(args) => {
            let s = Settings::resolve(&args, &NoiseArgs::default())?;
            let result = run_sweep(&s.sweep_spec()?)?;
            emit_sweep(&s, &result)
        }
        Command::VerifyBounds(args) => {
            let s = Settings::resolve(&args.common, &NoiseArgs::default())?;
            let report = match &args.from {
                Some(path) => verify_rows(&output::read_csv::<CsvRow>(path)?)?,
                None => verify_bounds(&s.sweep_spec()?)?,
            };
            emit_verify(s.out.as_deref(), s.format, &report)
        }
        Command::Unravel(args) => {
            let s = Settings::resolve(&args.common, &args.noise)?;
            let report = unravel_check(&s.unravel_spec()?)?;
            eprintln!(
                "gamma {} | max Frobenius distance {:.3e} | decay rates: averaged {:?}, master equation {:?}",
                report.gamma, report.max_frobenius_distance, report.decay_rate_stochastic, report.decay_rate_lindblad
            );
            match s.format {
                Format::Json => output::write_json(s.out.as_deref(), &report),
                Format::Csv => output::write_csv(s.out.as_deref(), &report.coherence, &["t", "coherence_averaged", "coherence_master"]),
            }
        }
        Command::Fit(args) => {
            let rows: Vec<CsvRow> = output::read_csv(&args.from)?;
            let fit = fit_rows(rows.iter().map(|r| (r.n, r.t_measured))).ok_or_else(|| CliError::usage("fit needs at least 3 rows with T_measured"))?;
            match args.format {
                Format::Json => output::write_json(args.out.as_deref(), &fit),
                Format::Csv => output::write_csv(args.out.as_deref(), &[&fit], &["exponent", "stderr", "prefactor", "points"]),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::OK as u8 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
