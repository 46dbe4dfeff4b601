//! End-to-end evaluation: optimize, partition and index, join, with the
//! duration of each phase.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::executor::{self, ExecOptions, ResultSet};
use crate::intersect::SearchConfig;
use crate::job::RunConfig;
use crate::model::{Catalog, Query};
use crate::optimizer::{choose_plan, Plan, PlanOptions, SearchStats, Statistics};
use crate::partition::{HashFamily, ShareVector};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Timings {
    pub optimize: Duration,
    pub preprocess: Duration,
    pub join: Duration,
}

impl Timings {
    /// Everything but loading and result output.
    pub fn total(&self) -> Duration {
        self.optimize + self.preprocess + self.join
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineOptions {
    pub plan: PlanOptions,
    pub seed: u64,
    pub exec: ExecOptions,
}

impl EngineOptions {
    pub fn new(threads: u64) -> Self {
        EngineOptions {
            plan: PlanOptions::new(threads),
            seed: crate::job::DEFAULT_SEED,
            exec: ExecOptions::default(),
        }
    }

    /// Resolves a run configuration's variable names against `query`.
    pub fn from_config(config: &RunConfig, query: &Query) -> Result<Self> {
        config.validate(query)?;
        let var = |name: &str| {
            query
                .var_id(name)
                .ok_or_else(|| Error::Config(format!("unknown variable {name}")))
        };
        let order = config
            .order
            .as_ref()
            .map(|o| o.iter().map(|v| var(v)).collect::<Result<Vec<_>>>())
            .transpose()?;
        let shares = match &config.shares {
            None => None,
            Some(map) => {
                let mut s = vec![1u32; query.num_vars()];
                for (name, &p) in map {
                    s[var(name)?] = u32::try_from(p)
                        .map_err(|_| Error::Config(format!("share {p} is too large")))?;
                }
                Some(ShareVector::new(s)?)
            }
        };
        Ok(EngineOptions {
            plan: PlanOptions {
                threads: config.threads,
                order,
                shares,
                rewrite: config.rewrite,
            },
            seed: config.seed,
            exec: ExecOptions {
                workers: config.effective_workers(),
                tuples: config.output.wants_tuples(),
                profile: false,
                rewrite: config.rewrite,
                search: SearchConfig::default(),
            },
        })
    }
}

#[derive(Debug)]
pub struct Evaluation {
    pub plan: Plan,
    pub search: SearchStats,
    pub result: ResultSet,
    pub timings: Timings,
}

/// Chooses a plan for `query` without running it.
pub fn explain(
    query: &Query,
    catalog: &Catalog,
    options: &PlanOptions,
) -> Result<(Plan, SearchStats)> {
    catalog.validate(query)?;
    let stats = Statistics::collect(catalog);
    choose_plan(query, &stats, options)
}

/// Plans, preprocesses and runs `query`.
pub fn evaluate(query: &Query, catalog: &Catalog, options: &EngineOptions) -> Result<Evaluation> {
    let start = Instant::now();
    let (plan, search) = explain(query, catalog, &options.plan)?;
    let optimized = Instant::now();
    let eval = run_plan(query, catalog, plan, options)?;
    Ok(Evaluation {
        search,
        timings: Timings {
            optimize: optimized - start,
            ..eval.timings
        },
        ..eval
    })
}

/// Preprocesses and runs a fixed plan.
pub fn run_plan(
    query: &Query,
    catalog: &Catalog,
    plan: Plan,
    options: &EngineOptions,
) -> Result<Evaluation> {
    let hash = HashFamily::new(query.num_vars(), options.seed);
    let start = Instant::now();
    let prepared = executor::prepare(query, catalog, &plan, &hash, options.exec.workers)?;
    let prepared_at = Instant::now();
    let result = executor::run(query, &plan, &prepared, &options.exec)?;
    let done = Instant::now();
    Ok(Evaluation {
        plan,
        search: SearchStats::default(),
        result,
        timings: Timings {
            optimize: Duration::ZERO,
            preprocess: prepared_at - start,
            join: done - prepared_at,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen;
    use crate::job::OutputMode;
    use crate::oracle;
    use std::collections::BTreeMap;

    #[test]
    fn config_overrides_resolve_by_name() {
        let q = Query::parse(crate::queries::TRIANGLE).unwrap();
        let config = RunConfig {
            threads: 8,
            workers: Some(2),
            order: Some(vec!["Z".into(), "X".into(), "Y".into()]),
            shares: Some(BTreeMap::from([("X".into(), 2), ("Z".into(), 4)])),
            output: OutputMode::TUPLES,
            ..RunConfig::default()
        };
        let opts = EngineOptions::from_config(&config, &q).unwrap();
        assert_eq!(opts.plan.order, Some(vec![2, 0, 1]));
        assert_eq!(opts.plan.shares.unwrap().as_slice(), &[2, 1, 4]);
        assert_eq!(opts.exec.workers, 2);
        assert!(opts.exec.tuples);
    }

    #[test]
    fn evaluates_against_oracle() {
        let q = Query::parse(crate::queries::TRIANGLE).unwrap();
        let g = datagen::random_graph(60, 600, 4);
        let cat = Catalog::new()
            .with("R", g.clone())
            .with("S", g.clone())
            .with("T", g);
        let mut opts = EngineOptions::new(16);
        opts.exec.tuples = true;
        opts.exec.workers = 2;
        let eval = evaluate(&q, &cat, &opts).unwrap();
        assert_eq!(
            eval.result.sorted_tuples().unwrap(),
            oracle::evaluate(&q, &cat).unwrap()
        );
        assert_eq!(eval.result.tasks.len(), 16);
    }
}
