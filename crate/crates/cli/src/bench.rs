//! `bench`: per-task work distribution, skew and a worker-count sweep.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Duration;

use anyhow::Context;
use clap::Args;
use serde::Serialize;

use hyperjoin_core::engine::{self, run_plan};
use hyperjoin_core::intersect::INSTRUMENTED;
use hyperjoin_core::{EngineOptions, ResultSet};

use crate::{load_job, ms, Overrides};

#[derive(Args, Clone)]
pub struct BenchArgs {
    job: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    /// Runs per worker count; timings are averaged.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Worker counts to sweep.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    sweep: Vec<usize>,
    /// Per-task CSV, sorted by descending steps.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Serialize)]
struct SweepPoint {
    workers: usize,
    preprocess_ms: f64,
    join_ms: f64,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    tasks: usize,
    shares: BTreeMap<String, u32>,
    count: u64,
    cumulative_steps: u64,
    skew_ratio: f64,
    /// Per-task steps at the 0th, 10th, ..., 100th percentile.
    step_deciles: Vec<u64>,
    cumulative_task_ms: f64,
    repeats: usize,
    sweep: Vec<SweepPoint>,
}

fn deciles(sorted: &[u64]) -> Vec<u64> {
    if sorted.is_empty() {
        return Vec::new();
    }
    (0..=10)
        .map(|d| sorted[(d * (sorted.len() - 1)) / 10])
        .collect()
}

fn mean(ds: &[Duration]) -> Duration {
    ds.iter().sum::<Duration>() / ds.len().max(1) as u32
}

fn write_csv(result: &ResultSet, path: &PathBuf) -> anyhow::Result<()> {
    let mut sorted = result.clone();
    sorted
        .tasks
        .sort_by(|a, b| b.steps.cmp(&a.steps).then(a.task.cmp(&b.task)));
    let f = File::create(path).with_context(|| format!("{}", path.display()))?;
    let mut w = BufWriter::new(f);
    sorted.write_task_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let job = load_job(&args.job, &args.overrides)?;
    if !INSTRUMENTED {
        log::warn!("built without the instrument feature; only wall-clock figures are meaningful");
    }
    let mut opts = EngineOptions::from_config(&job.config, &job.query)?;
    opts.exec.tuples = false;
    let (plan, _) = engine::explain(&job.query, &job.catalog, &opts.plan)?;
    let repeats = args.repeats.max(1);

    let mut first: Option<ResultSet> = None;
    let mut sweep = Vec::new();
    for &workers in &args.sweep {
        opts.exec.workers = workers.max(1);
        let mut pre = Vec::with_capacity(repeats);
        let mut join = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let eval = run_plan(&job.query, &job.catalog, plan.clone(), &opts)?;
            pre.push(eval.timings.preprocess);
            join.push(eval.timings.join);
            first.get_or_insert(eval.result);
        }
        sweep.push(SweepPoint {
            workers,
            preprocess_ms: ms(mean(&pre)),
            join_ms: ms(mean(&join)),
        });
    }
    let result = match first {
        Some(r) => r,
        None => run_plan(&job.query, &job.catalog, plan.clone(), &opts)?.result,
    };
    if let Some(path) = &args.csv {
        write_csv(&result, path)?;
    }

    let mut steps: Vec<u64> = result.tasks.iter().map(|t| t.steps).collect();
    steps.sort_unstable();
    let report = BenchReport {
        tasks: result.tasks.len(),
        shares: (0..job.query.num_vars())
            .map(|v| (job.query.var_name(v).to_string(), plan.shares.get(v)))
            .collect(),
        count: result.count,
        cumulative_steps: result.total_steps(),
        skew_ratio: result.skew_ratio(),
        step_deciles: deciles(&steps),
        cumulative_task_ms: result.tasks.iter().map(|t| t.wall_nanos).sum::<u64>() as f64 / 1e6,
        repeats,
        sweep,
    };

    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    let shares: Vec<String> = report
        .shares
        .iter()
        .map(|(v, p)| format!("{v}={p}"))
        .collect();
    println!("tasks: {} ({})", report.tasks, shares.join(","));
    println!("count: {}", report.count);
    println!("cumulative steps: {}", report.cumulative_steps);
    println!("skew ratio (max/min steps): {:.2}", report.skew_ratio);
    println!("step deciles: {:?}", report.step_deciles);
    println!("cumulative task time: {:.3} ms", report.cumulative_task_ms);
    println!("mean of {} runs:", report.repeats);
    println!("{:>8} {:>14} {:>12}", "workers", "preprocess_ms", "join_ms");
    for p in &report.sweep {
        println!(
            "{:>8} {:>14.3} {:>12.3}",
            p.workers, p.preprocess_ms, p.join_ms
        );
    }
    Ok(())
}
