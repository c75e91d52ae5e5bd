use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pibo_core::harness::{beta_sweep, plot, run_experiment, ExperimentConfig};
use pibo_core::theory::{bound_grid, BoundConvention};
use pibo_core::{Benchmark, Error};

#[derive(Parser)]
#[command(name = "pibo", version, about = "Prior-weighted Bayesian optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. `optimizer.iterations=30`. Repeatable.
        #[arg(long = "override", short = 'o', value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Repeat a pibo experiment for several values of beta.
    SweepBeta {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated values or `start:stop:step` ranges.
        #[arg(long, value_parser = parse_list)]
        betas: FloatList,
        #[arg(long = "override", short = 'o', value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Tabulate the bound constant for centered 1-D Gaussian priors.
    BoundGrid {
        /// Comma-separated values or `start:stop:step` ranges.
        #[arg(long, value_parser = parse_list)]
        sigmas: FloatList,
        #[arg(long, value_parser = parse_list)]
        betas: FloatList,
        #[arg(long, default_value_t = 50)]
        n: u64,
        #[arg(long, value_enum, default_value_t = Convention::Normalized)]
        convention: Convention,
        #[arg(long)]
        out: PathBuf,
    },
    /// Describe a benchmark.
    BenchInfo { name: String },
    /// Render regret curves from aggregate or per-run CSV files.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Normalized,
    Unnormalized,
}

impl From<Convention> for BoundConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Normalized => BoundConvention::Normalized,
            Convention::Unnormalized => BoundConvention::Unnormalized,
        }
    }
}

#[derive(Clone, Debug)]
struct FloatList(Vec<f64>);

fn parse_list(s: &str) -> Result<FloatList, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [a, b, step] => {
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                if !(step > 0.0) || b < a {
                    return Err(format!("bad range '{item}'"));
                }
                let count = ((b - a) / step + 1e-9).floor() as usize;
                out.extend((0..=count).map(|i| a + i as f64 * step));
            }
            _ => return Err(format!("bad list item '{item}'")),
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(FloatList(out))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        Error::Runtime(_) => 2,
        _ => 1,
    }
}

fn fmt_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn bench_info(name: &str) -> Result<(), Error> {
    let b = Benchmark::by_name(name)?;
    println!("name: {}", b.name());
    println!("dimension: {}", b.space().dim());
    println!("box:");
    for (i, (lo, hi)) in b.space().bounds().iter().enumerate() {
        println!("  x{i}: [{lo}, {hi}]");
    }
    println!("known_minimum: {:.10}", b.known_minimum());
    println!("minimizers:");
    for m in b.minimizers() {
        println!("  - {}", fmt_point(m));
    }
    let (x, v) = b.empirical_maximizer();
    println!("empirical_maximizer: {}", fmt_point(x));
    println!("empirical_maximum: {v:.6}");
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = ExperimentConfig::load(&config, &overrides)?;
            let report = run_experiment(&cfg)?;
            for (id, msg) in report.failures() {
                eprintln!("run {id} failed: {msg}");
            }
            if let Some(last) = report.aggregate.last() {
                println!(
                    "{} of {} runs succeeded; final mean log10 regret {:.4} +/- {:.4}",
                    last.runs,
                    cfg.experiment.repetitions,
                    last.mean_log10_regret,
                    last.stderr
                );
            }
            println!("wrote {} files to {}", report.files.len(), cfg.experiment.output_dir.display());
        }
        Command::SweepBeta {
            config,
            betas,
            overrides,
        } => {
            let cfg = ExperimentConfig::load(&config, &overrides)?;
            let report = beta_sweep(&cfg, &betas.0)?;
            for (beta, rows) in report.betas.iter().zip(&report.aggregates) {
                if let Some(last) = rows.last() {
                    println!("beta {beta}: final mean log10 regret {:.4} +/- {:.4}", last.mean_log10_regret, last.stderr);
                }
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::BoundGrid {
            sigmas,
            betas,
            n,
            convention,
            out,
        } => {
            let grid = bound_grid(&sigmas.0, &betas.0, n)?;
            std::fs::write(&out, grid.to_csv(convention.into())).map_err(|e| Error::io(&out, e))?;
            println!(
                "cells with C <= 1.25: normalized {:.1}%, unnormalized {:.1}%",
                100.0 * grid.fraction_at_most(1.25, BoundConvention::Normalized),
                100.0 * grid.fraction_at_most(1.25, BoundConvention::Unnormalized)
            );
            println!("wrote {}", out.display());
        }
        Command::BenchInfo { name } => bench_info(&name)?,
        Command::Plot { csv, out } => {
            plot(&csv, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
