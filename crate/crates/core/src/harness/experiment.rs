//! Repeated runs, CSV output and aggregation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Strategy};
use crate::benchmarks::{Benchmark, REGRET_LOG_FLOOR};
use crate::domain::{construct_synthetic_prior, Prior};
use crate::error::{Error, Result};
use crate::optimizer::{run, run_sampling, Phase, RegretTrace, Sampler};
use crate::stats::mean_and_stderr;

const PRIOR_STREAM: u64 = 0x7072_696f_725f_7331;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of repetition `rep` under `master`.
pub fn derive_seed(master: u64, rep: usize) -> u64 {
    splitmix64(master ^ splitmix64(rep as u64))
}

/// Prior used by one repetition. Synthetic priors are redrawn per repetition
/// from a stream tied to the repetition seed, so strategies sharing a master
/// seed see the same priors.
pub fn repetition_prior(config: &ExperimentConfig, bench: &Benchmark, seed: u64) -> Result<Option<Prior>> {
    let Some(section) = &config.prior else {
        return Ok(None);
    };
    if let Some(q) = section.quality {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ PRIOR_STREAM);
        let (emax, _) = bench.empirical_maximizer();
        construct_synthetic_prior(bench.space(), bench.prior_optimum(), emax, q, &mut rng).map(Some)
    } else {
        section.explicit_prior(bench.space()).map(Some)
    }
}

/// Runs one repetition.
pub fn run_repetition(config: &ExperimentConfig, bench: &Benchmark, seed: u64) -> Result<RegretTrace> {
    let prior = repetition_prior(config, bench, seed)?;
    let m = config.initial_design(bench);
    let n = config.optimizer.iterations;
    let timing = config.experiment.record_timing;
    match config.experiment.strategy {
        Strategy::Random => run_sampling(Sampler::Uniform, None, bench, m, n, seed, timing),
        Strategy::PriorSampling => run_sampling(Sampler::Prior, prior.as_ref(), bench, m, n, seed, timing),
        Strategy::VanillaBo | Strategy::Pibo => {
            let oc = config.optimizer_config(bench, prior.as_ref(), seed)?;
            run(&oc, prior.as_ref(), bench)
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub run_id: usize,
    pub seed: u64,
    pub result: Result<RegretTrace>,
}

/// Runs every repetition in parallel. Order of the output follows `run_id`.
pub fn run_repetitions(config: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    let bench = config.benchmark()?;
    bench.empirical_maximizer();
    Ok((0..config.experiment.repetitions)
        .into_par_iter()
        .map(|run_id| {
            let seed = derive_seed(config.experiment.seed, run_id);
            RunOutcome {
                run_id,
                seed,
                result: run_repetition(config, &bench, seed),
            }
        })
        .collect())
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

pub fn trace_header(dim: usize) -> String {
    let xs: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    format!("run_id,seed,phase,iter,{},y,incumbent,regret,elapsed_ms", xs.join(","))
}

/// Per-run CSV: one row per evaluation.
pub fn trace_csv(run_id: usize, trace: &RegretTrace, dim: usize) -> String {
    let mut out = trace_header(dim);
    out.push('\n');
    for r in &trace.records {
        let _ = write!(out, "{run_id},{},{},{},", trace.seed, r.phase.as_str(), r.iter);
        for x in &r.point {
            let _ = write!(out, "{},", fmt_f64(*x));
        }
        let regret = r.regret.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.value),
            fmt_f64(r.incumbent),
            regret,
            fmt_f64(r.elapsed_ms)
        );
    }
    out
}

/// `log10(max(regret, 0) + floor)`.
pub fn log10_regret(regret: f64) -> f64 {
    (regret.max(0.0) + REGRET_LOG_FLOOR).log10()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub iter: usize,
    pub phase: Phase,
    pub mean_log10_regret: f64,
    pub stderr: f64,
    pub runs: usize,
}

/// Mean and standard error of log10 regret per evaluation index. Runs
/// without a finite incumbent at an index are left out of that row.
pub fn aggregate(traces: &[&RegretTrace]) -> Vec<AggregateRow> {
    let len = traces.iter().map(|t| t.records.len()).max().unwrap_or(0);
    let mut rows = Vec::with_capacity(len);
    for i in 0..len {
        let mut vals = Vec::with_capacity(traces.len());
        let mut phase = Phase::Bo;
        for t in traces {
            if let Some(r) = t.records.get(i) {
                phase = r.phase;
                if let Some(g) = r.regret.filter(|g| g.is_finite()) {
                    vals.push(log10_regret(g));
                }
            }
        }
        let (mean, se) = if vals.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            mean_and_stderr(&vals)
        };
        rows.push(AggregateRow {
            iter: i + 1,
            phase,
            mean_log10_regret: mean,
            stderr: se,
            runs: vals.len(),
        });
    }
    rows
}

pub const AGGREGATE_HEADER: &str = "iter,phase,mean_log10_regret,stderr,runs";

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = format!("{AGGREGATE_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iter,
            r.phase.as_str(),
            fmt_f64(r.mean_log10_regret),
            fmt_f64(r.stderr),
            r.runs
        );
    }
    out
}

fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write_probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub outcomes: Vec<RunOutcome>,
    pub aggregate: Vec<AggregateRow>,
    pub files: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn traces(&self) -> Vec<&RegretTrace> {
        self.outcomes.iter().filter_map(|o| o.result.as_ref().ok()).collect()
    }

    pub fn failures(&self) -> Vec<(usize, String)> {
        self.outcomes
            .iter()
            .filter_map(|o| o.result.as_ref().err().map(|e| (o.run_id, e.to_string())))
            .collect()
    }
}

fn summarize(outcomes: &[RunOutcome]) -> Result<Vec<&RegretTrace>> {
    let traces: Vec<&RegretTrace> = outcomes.iter().filter_map(|o| o.result.as_ref().ok()).collect();
    if traces.is_empty() {
        let first = outcomes
            .iter()
            .find_map(|o| o.result.as_ref().err())
            .map(|e| e.to_string())
            .unwrap_or_default();
        return Err(Error::Runtime(format!(
            "all {} repetitions failed; first error: {first}",
            outcomes.len()
        )));
    }
    Ok(traces)
}

/// Runs the configured experiment and writes `run_XXX.csv`, `aggregate.csv`
/// and `failures.txt` (when some runs failed) into the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let dir = &config.experiment.output_dir;
    ensure_writable(dir)?;
    let dim = config.benchmark()?.space().dim();
    let outcomes = run_repetitions(config)?;
    let traces = summarize(&outcomes)?;
    let rows = aggregate(&traces);
    let mut files = Vec::new();
    for o in &outcomes {
        if let Ok(t) = &o.result {
            let path = dir.join(format!("run_{:03}.csv", o.run_id));
            write_file(&path, &trace_csv(o.run_id, t, dim))?;
            files.push(path);
        }
    }
    let agg = dir.join("aggregate.csv");
    write_file(&agg, &aggregate_csv(&rows))?;
    files.push(agg);
    let failed: Vec<String> = outcomes
        .iter()
        .filter_map(|o| o.result.as_ref().err().map(|e| format!("run {} (seed {}): {e}", o.run_id, o.seed)))
        .collect();
    if !failed.is_empty() {
        let path = dir.join("failures.txt");
        write_file(&path, &(failed.join("\n") + "\n"))?;
        files.push(path);
    }
    Ok(ExperimentReport {
        outcomes,
        aggregate: rows,
        files,
    })
}

#[derive(Debug)]
pub struct SweepReport {
    pub betas: Vec<f64>,
    pub aggregates: Vec<Vec<AggregateRow>>,
    pub files: Vec<PathBuf>,
}

/// Repeats a πBO experiment for each β and writes `sweep.csv` (per-run rows
/// with a leading `beta` column) and `sweep_aggregate.csv`.
pub fn beta_sweep(config: &ExperimentConfig, betas: &[f64]) -> Result<SweepReport> {
    if config.experiment.strategy != Strategy::Pibo {
        return Err(Error::Config("beta sweeps need strategy = \"pibo\"".into()));
    }
    if betas.is_empty() || betas.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
        return Err(Error::Config("betas must be a non-empty list of positive numbers".into()));
    }
    config.validate()?;
    let dir = &config.experiment.output_dir;
    ensure_writable(dir)?;
    let dim = config.benchmark()?.space().dim();
    let mut runs_csv = format!("beta,{}\n", trace_header(dim));
    let mut agg_csv = format!("beta,{AGGREGATE_HEADER}\n");
    let mut aggregates = Vec::with_capacity(betas.len());
    for &beta in betas {
        let mut c = config.clone();
        c.optimizer.beta = Some(beta);
        let outcomes = run_repetitions(&c)?;
        let traces = summarize(&outcomes)?;
        for o in &outcomes {
            if let Ok(t) = &o.result {
                for line in trace_csv(o.run_id, t, dim).lines().skip(1) {
                    let _ = writeln!(runs_csv, "{beta},{line}");
                }
            }
        }
        let rows = aggregate(&traces);
        for line in aggregate_csv(&rows).lines().skip(1) {
            let _ = writeln!(agg_csv, "{beta},{line}");
        }
        aggregates.push(rows);
    }
    let runs_path = dir.join("sweep.csv");
    let agg_path = dir.join("sweep_aggregate.csv");
    write_file(&runs_path, &runs_csv)?;
    write_file(&agg_path, &agg_csv)?;
    Ok(SweepReport {
        betas: betas.to_vec(),
        aggregates,
        files: vec![runs_path, agg_path],
    })
}
