mod bench;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hyperjoin_core::engine::{self, Timings};
use hyperjoin_core::io as relio;
use hyperjoin_core::job::{parse_job, NamedOutput};
use hyperjoin_core::oracle;
use hyperjoin_core::{
    Catalog, EngineOptions, Error, OutputMode, PlanReport, Query, RunConfig, Value,
};

#[derive(Parser)]
#[command(
    name = "hyperjoin",
    version,
    about = "Parallel worst-case-optimal joins"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a CSV file to the binary relation format.
    Convert {
        csv: PathBuf,
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        /// Add the reverse of every edge (binary relations only).
        #[arg(long)]
        symmetrize: bool,
    },
    /// Print the chosen variable order, shares, hoists and costs.
    Explain(JobArgs),
    /// Run a job and print the result with phase timings.
    Run(JobArgs),
    /// Per-task work distribution and a worker-count sweep.
    Bench(bench::BenchArgs),
    /// Evaluate a job with the brute-force reference evaluator.
    #[command(hide = true)]
    Oracle(JobArgs),
}

#[derive(Args, Clone)]
struct JobArgs {
    job: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone, Default)]
pub struct Overrides {
    /// Number of logical tasks P, a power of two.
    #[arg(long)]
    threads: Option<u64>,
    /// Worker threads executing the tasks.
    #[arg(long, env = "HC_WORKERS")]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Disable hoisting of loop-invariant intersections.
    #[arg(long)]
    no_rewrite: bool,
    /// Variable order, e.g. `X,Y,Z`.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<String>>,
    /// Shares, e.g. `X=32,Y=32,Z=1`. Unlisted variables get 1.
    #[arg(long, value_delimiter = ',', value_parser = parse_share)]
    shares: Option<Vec<(String, u64)>>,
    /// Report per-task step counts.
    #[arg(long)]
    instrument: bool,
}

fn parse_share(s: &str) -> Result<(String, u64), String> {
    let (var, p) = s
        .split_once('=')
        .ok_or_else(|| format!("expected VAR=SHARE, got {s}"))?;
    let p = p
        .trim()
        .parse()
        .map_err(|e| format!("share for {var}: {e}"))?;
    Ok((var.trim().to_string(), p))
}

impl Overrides {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(shares) = &self.shares {
            let map: BTreeMap<String, u64> = shares.iter().cloned().collect();
            if self.threads.is_none() {
                config.threads = map.values().product();
            }
            config.shares = Some(map);
        }
        if let Some(p) = self.threads {
            config.threads = p;
        }
        if let Some(w) = self.workers {
            config.workers = Some(w);
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if self.no_rewrite {
            config.rewrite = false;
        }
        if let Some(order) = &self.order {
            config.order = Some(order.clone());
        }
        config.instrument |= self.instrument;
    }
}

/// A loaded job with overrides applied.
pub struct Loaded {
    pub query: Query,
    pub catalog: Catalog,
    pub config: RunConfig,
    pub load: Duration,
}

pub fn load_job(path: &Path, overrides: &Overrides) -> anyhow::Result<Loaded> {
    let start = Instant::now();
    let (query, catalog, mut config) = parse_job(path)?;
    overrides.apply(&mut config);
    config.validate(&query)?;
    Ok(Loaded {
        query,
        catalog,
        config,
        load: start.elapsed(),
    })
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Serialize)]
struct TimingReport {
    load_ms: f64,
    optimize_ms: f64,
    preprocess_ms: f64,
    join_ms: f64,
    /// Excludes loading.
    total_ms: f64,
}

impl TimingReport {
    fn new(load: Duration, t: &Timings) -> Self {
        TimingReport {
            load_ms: ms(load),
            optimize_ms: ms(t.optimize),
            preprocess_ms: ms(t.preprocess),
            join_ms: ms(t.join),
            total_ms: ms(t.total()),
        }
    }

    fn print(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "load: {:.3} ms (not in total)", self.load_ms)?;
        writeln!(w, "optimize: {:.3} ms", self.optimize_ms)?;
        writeln!(w, "preprocess: {:.3} ms", self.preprocess_ms)?;
        writeln!(w, "join: {:.3} ms", self.join_ms)?;
        writeln!(w, "total: {:.3} ms", self.total_ms)
    }
}

#[derive(Serialize)]
struct RunReport {
    count: u64,
    order: Vec<String>,
    shares: BTreeMap<String, u32>,
    timings: TimingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    skew_ratio: Option<f64>,
}

fn write_rows(rows: &[Vec<Value>], w: &mut impl Write) -> io::Result<()> {
    for r in rows {
        let line: Vec<String> = r.iter().map(u64::to_string).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

fn write_tuples(output: &OutputMode, rows: &[Vec<Value>]) -> anyhow::Result<bool> {
    match output {
        OutputMode::File { file } => {
            let f = File::create(file).with_context(|| format!("{}", file.display()))?;
            let mut w = BufWriter::new(f);
            write_rows(rows, &mut w)?;
            w.flush()?;
            Ok(false)
        }
        OutputMode::Named(NamedOutput::Tuples) => {
            write_rows(rows, &mut io::stdout().lock())?;
            Ok(true)
        }
        OutputMode::Named(NamedOutput::Count) => Ok(false),
    }
}

fn cmd_run(args: &JobArgs) -> anyhow::Result<()> {
    let job = load_job(&args.job, &args.overrides)?;
    let opts = EngineOptions::from_config(&job.config, &job.query)?;
    let eval = engine::evaluate(&job.query, &job.catalog, &opts)?;
    let rows = eval.result.sorted_tuples().unwrap_or_default();
    let tuples_on_stdout = write_tuples(&job.config.output, &rows)?;

    let name = |v: usize| job.query.var_name(v).to_string();
    let instrument = job.config.instrument;
    let report = RunReport {
        count: eval.result.count,
        order: eval.plan.order.iter().map(|&v| name(v)).collect(),
        shares: (0..job.query.num_vars())
            .map(|v| (name(v), eval.plan.shares.get(v)))
            .collect(),
        timings: TimingReport::new(job.load, &eval.timings),
        steps: instrument.then(|| eval.result.total_steps()),
        skew_ratio: instrument.then(|| eval.result.skew_ratio()),
    };
    if instrument && !hyperjoin_core::intersect::INSTRUMENTED {
        log::warn!("built without the instrument feature; step counts are zero");
    }

    // Tuples already own stdout; the summary goes to stderr then.
    let mut out: Box<dyn Write> = if tuples_on_stdout {
        Box::new(io::stderr().lock())
    } else {
        Box::new(io::stdout().lock())
    };
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        writeln!(out, "count: {}", report.count)?;
        writeln!(out, "order: {}", report.order.join(","))?;
        let shares: Vec<String> = report
            .shares
            .iter()
            .map(|(v, p)| format!("{v}={p}"))
            .collect();
        writeln!(out, "shares: {}", shares.join(","))?;
        if let (Some(steps), Some(skew)) = (report.steps, report.skew_ratio) {
            writeln!(out, "steps: {steps}")?;
            writeln!(out, "skew ratio: {skew:.2}")?;
        }
        report.timings.print(&mut out)?;
    }
    Ok(())
}

fn cmd_explain(args: &JobArgs) -> anyhow::Result<()> {
    let job = load_job(&args.job, &args.overrides)?;
    let opts = EngineOptions::from_config(&job.config, &job.query)?;
    let (plan, search) = engine::explain(&job.query, &job.catalog, &opts.plan)?;
    let report = PlanReport::new(&job.query, &plan, &search);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{report}");
    }
    Ok(())
}

fn cmd_oracle(args: &JobArgs) -> anyhow::Result<()> {
    let job = load_job(&args.job, &args.overrides)?;
    let rows = oracle::evaluate(&job.query, &job.catalog)?;
    let tuples_on_stdout = write_tuples(&job.config.output, &rows)?;
    if args.json {
        let v = serde_json::json!({ "count": rows.len() });
        println!("{v}");
    } else if tuples_on_stdout {
        eprintln!("count: {}", rows.len());
    } else {
        println!("count: {}", rows.len());
    }
    Ok(())
}

fn cmd_convert(csv: &Path, out: &Path, arity: usize, symmetrize: bool) -> anyhow::Result<()> {
    if symmetrize && arity != 2 {
        bail!(Error::Config("--symmetrize needs --arity 2".into()));
    }
    let rel = relio::convert(csv, arity, out, symmetrize)?;
    println!(
        "{} rows of arity {} written to {}",
        rel.len(),
        rel.arity(),
        out.display()
    );
    Ok(())
}

/// 1 for usage and configuration problems, 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Query(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Convert {
            csv,
            out,
            arity,
            symmetrize,
        } => cmd_convert(csv, out, *arity, *symmetrize),
        Command::Explain(args) => cmd_explain(args),
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => bench::cmd_bench(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
