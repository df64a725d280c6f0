use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thermoscale::config::load_config;
use thermoscale::experiments::{check_invariants, run_realization, run_sweep, ExperimentConfig, RealizationResult};
use thermoscale::oracle::run_checks;
use thermoscale::report::{emit_figure_data, format_float, summary_table, write_outputs, FigureId, Table};
use thermoscale::Error;

#[derive(Parser)]
#[command(name = "thermoscale", version, about = "Interaction scaling and local temperature in spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interaction strength, level width and their ratio per partition.
    Scaling(RealizationArgs),
    /// Overlap-distribution diagnostics per partition.
    Overlaps(RealizationArgs),
    /// Distance between the global and product canonical states.
    Distance(RealizationArgs),
    /// Spectral inverse temperature of the first group.
    SpectralTemp(RealizationArgs),
    /// Full seeded sweep; writes figure datasets, summary and plot scripts.
    Sweep(SweepArgs),
    /// Built-in self-check suite on fresh random chains.
    Check(CheckArgs),
}

#[derive(Args)]
struct Common {
    /// Experiment config file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `base_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, env = "THERMOSCALE_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct RealizationArgs {
    #[command(flatten)]
    common: Common,
    /// Realization index.
    #[arg(long, default_value_t = 0)]
    realization: usize,
    /// Also write the table as CSV into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Write only this figure's dataset (fig1..fig4) plus the summary.
    #[arg(long)]
    figure: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of random chains.
    #[arg(long, default_value_t = 10)]
    realizations: usize,
}

enum Failure {
    Usage(Error),
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotHermitian { .. } | Error::DegenerateOccupation { .. } | Error::Invariant { .. } => {
                Failure::Numerical(e)
            }
            other => Failure::Usage(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn load(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut config = match &common.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.base_seed = seed;
    }
    Ok(config)
}

fn emit(table: &Table, name: &str, out: Option<&Path>) -> Result<(), Failure> {
    let bytes = table.to_csv()?;
    std::io::stdout().write_all(&bytes)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        table.write_csv(&dir.join(format!("{name}.csv")))?;
    }
    Ok(())
}

fn realization(args: &RealizationArgs) -> Result<RealizationResult, Failure> {
    let config = load(&args.common)?;
    Ok(run_realization(&config, args.realization)?)
}

fn scaling(args: &RealizationArgs) -> Result<(), Failure> {
    let r = realization(args)?;
    let mut t = Table::new(&["N", "interaction", "level_width", "ratio", "bound"]);
    for p in &r.partitions {
        t.push(vec![
            p.group_size.to_string(),
            format_float(p.interaction),
            format_float(r.level_width),
            format_float(p.ratio),
            format_float(p.scaling_bound()),
        ]);
    }
    emit(&t, "scaling", args.out.as_deref())?;
    if let Some(p) = r.partitions.iter().find(|p| p.violates_scaling()) {
        return Err(Failure::Numerical(Error::Invariant {
            name: "scaling-bound".into(),
            detail: format!("N = {}: ratio {} exceeds {}", p.group_size, p.ratio, p.scaling_bound()),
        }));
    }
    Ok(())
}

fn overlaps(args: &RealizationArgs) -> Result<(), Failure> {
    let r = realization(args)?;
    let mut t = Table::new(&["N", "second_moment_residual", "decay_violation_fraction"]);
    for p in &r.partitions {
        t.push(vec![
            p.group_size.to_string(),
            format_float(p.second_moment_residual),
            format_float(p.decay_violation_fraction),
        ]);
    }
    emit(&t, "overlaps", args.out.as_deref())?;
    eprintln!(
        "superposed decay: {:.4} of tail points above envelope ({})",
        r.decay_violation_fraction,
        if r.decay_pass { "pass" } else { "fail" }
    );
    Ok(())
}

fn cells(args: &RealizationArgs, name: &str, header: &'static str) -> Result<(), Failure> {
    let r = realization(args)?;
    let mut t = Table::new(&["N", "beta_lambda", "beta", header]);
    for p in &r.partitions {
        for c in &p.cells {
            let value = if name == "distance" { c.distance } else { c.beta_spec };
            t.push(vec![
                p.group_size.to_string(),
                format_float(c.beta_lambda),
                format_float(c.beta),
                format_float(value),
            ]);
        }
    }
    emit(&t, name, args.out.as_deref())
}

fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let config = load(&args.common)?;
    let figure = args.figure.as_deref().map(str::parse::<FigureId>).transpose()?;
    let outcome = run_sweep(&config, args.common.threads)?;
    match figure {
        Some(which) => {
            std::fs::create_dir_all(&args.out)?;
            emit_figure_data(&outcome, which)?.write_csv(&args.out.join(format!("{which}.csv")))?;
            summary_table(&outcome.summary).write_csv(&args.out.join("summary.csv"))?;
        }
        None => {
            write_outputs(&outcome, &args.out)?;
        }
    }
    let s = &outcome.summary;
    println!("realizations           {}", s.realizations);
    println!("level width / lambda   {:.4} +- {:.4}", s.level_width_mean, s.level_width_std);
    for (n, ratio) in &s.mean_ratio {
        println!("mean I/dE  N = {n}        {ratio:.4} (1/sqrt(N) = {:.4})", 1.0 / (*n as f64).sqrt());
    }
    println!("scaling violations     {}", s.scaling_violations);
    println!("dist monotone in N     {:.2}", s.distance_monotone_fraction());
    println!("decay passes           {}", s.decay_passes);
    println!("output                 {}", args.out.display());
    check_invariants(s)?;
    Ok(())
}

fn check(args: &CheckArgs) -> Result<(), Failure> {
    let results = run_checks(args.seed, args.realizations)?;
    for r in &results {
        println!("{r}");
    }
    match results.iter().find(|r| !r.passed()) {
        Some(r) => Err(Failure::Numerical(Error::Invariant {
            name: r.name.into(),
            detail: format!("max residual {:e} >= {:e}", r.max_residual, r.tolerance),
        })),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Scaling(a) => scaling(a),
        Command::Overlaps(a) => overlaps(a),
        Command::Distance(a) => cells(a, "distance", "dist"),
        Command::SpectralTemp(a) => cells(a, "spectral_temp", "beta_spec"),
        Command::Sweep(a) => sweep(a),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
