//! JSON job files and the run configuration they carry.
//!
//! ```json
//! { "query": "Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(X,Z).",
//!   "relations": {"R": "e.bin", "S": "e.bin", "T": "e.bin"},
//!   "threads": 1024, "symmetrize": false, "output": "count",
//!   "order": ["X","Y","Z"], "shares": {"X": 32, "Y": 32, "Z": 1},
//!   "rewrite": true }
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::model::{Catalog, Query, Relation};

pub const DEFAULT_THREADS: u64 = 1024;
pub const DEFAULT_SEED: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutputMode {
    Named(NamedOutput),
    File { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedOutput {
    Count,
    Tuples,
}

impl OutputMode {
    pub const COUNT: OutputMode = OutputMode::Named(NamedOutput::Count);
    pub const TUPLES: OutputMode = OutputMode::Named(NamedOutput::Tuples);

    pub fn wants_tuples(&self) -> bool {
        !matches!(self, OutputMode::Named(NamedOutput::Count))
    }
}

impl Default for OutputMode {
    fn default() -> Self {
        OutputMode::COUNT
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    /// Number of logical tasks `P`; a power of two.
    pub threads: u64,
    /// Worker threads in the pool; `None` means one per available core.
    pub workers: Option<usize>,
    pub output: OutputMode,
    pub order: Option<Vec<String>>,
    pub shares: Option<BTreeMap<String, u64>>,
    pub rewrite: bool,
    pub instrument: bool,
    pub seed: u64,
    pub symmetrize: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            threads: DEFAULT_THREADS,
            workers: None,
            output: OutputMode::default(),
            order: None,
            shares: None,
            rewrite: true,
            instrument: false,
            seed: DEFAULT_SEED,
            symmetrize: false,
        }
    }
}

impl RunConfig {
    pub fn effective_workers(&self) -> usize {
        self.workers.unwrap_or_else(default_workers).max(1)
    }

    pub fn validate(&self, query: &Query) -> Result<()> {
        if !self.threads.is_power_of_two() {
            return Err(Error::Config(format!(
                "threads must be a power of two, got {}",
                self.threads
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if let Some(order) = &self.order {
            let mut seen: Vec<&str> = Vec::new();
            for v in order {
                if query.var_id(v).is_none() {
                    return Err(Error::Config(format!("order names unknown variable {v}")));
                }
                if seen.contains(&v.as_str()) {
                    return Err(Error::Config(format!("order repeats variable {v}")));
                }
                seen.push(v);
            }
            if order.len() != query.num_vars() {
                return Err(Error::Config(format!(
                    "order lists {} of {} variables",
                    order.len(),
                    query.num_vars()
                )));
            }
        }
        if let Some(shares) = &self.shares {
            let mut product: u64 = 1;
            for (v, &s) in shares {
                if query.var_id(v).is_none() {
                    return Err(Error::Config(format!("share for unknown variable {v}")));
                }
                if !s.is_power_of_two() {
                    return Err(Error::Config(format!(
                        "share {s} for {v} is not a power of two"
                    )));
                }
                product = product
                    .checked_mul(s)
                    .ok_or_else(|| Error::Config("share product overflows".into()))?;
            }
            if product != self.threads {
                return Err(Error::Config(format!(
                    "shares multiply to {product}, threads is {}",
                    self.threads
                )));
            }
        }
        Ok(())
    }
}

/// Physical core count when detectable, else 4.
pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(4)
}

#[derive(Debug, Serialize, Deserialize)]
struct JobFile {
    query: String,
    relations: BTreeMap<String, PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threads: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
    #[serde(default)]
    symmetrize: bool,
    #[serde(default)]
    output: OutputMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shares: Option<BTreeMap<String, u64>>,
    #[serde(default = "yes")]
    rewrite: bool,
    #[serde(default)]
    instrument: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn yes() -> bool {
    true
}

/// A parsed job: the query, where its relations live, and how to run it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub query: Query,
    pub relations: BTreeMap<String, PathBuf>,
    pub config: RunConfig,
}

impl Job {
    pub fn from_json(text: &str) -> Result<Job> {
        let file: JobFile =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("job file: {e}")))?;
        let query = Query::parse(&file.query)?;
        for name in query.relation_names() {
            if !file.relations.contains_key(name) {
                return Err(Error::Config(format!(
                    "atom references relation {name} absent from \"relations\""
                )));
            }
        }
        let config = RunConfig {
            threads: file.threads.unwrap_or(DEFAULT_THREADS),
            workers: file.workers,
            output: file.output,
            order: file.order,
            shares: file.shares,
            rewrite: file.rewrite,
            instrument: file.instrument,
            seed: file.seed.unwrap_or(DEFAULT_SEED),
            symmetrize: file.symmetrize,
        };
        config.validate(&query)?;
        Ok(Job {
            query,
            relations: file.relations,
            config,
        })
    }

    pub fn to_json(&self) -> String {
        let c = &self.config;
        let file = JobFile {
            query: self.query.to_string(),
            relations: self.relations.clone(),
            threads: Some(c.threads),
            workers: c.workers,
            symmetrize: c.symmetrize,
            output: c.output.clone(),
            order: c.order.clone(),
            shares: c.shares.clone(),
            rewrite: c.rewrite,
            instrument: c.instrument,
            seed: Some(c.seed),
        };
        serde_json::to_string_pretty(&file).expect("job serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Job> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Job::from_json(&text)
    }

    /// Loads every referenced relation. Relative paths resolve against
    /// `base`; a file referenced by several atoms is loaded once and shared.
    pub fn load_catalog(&self, base: &Path) -> Result<Catalog> {
        let mut cache: BTreeMap<(PathBuf, usize), Arc<Relation>> = BTreeMap::new();
        let mut catalog = Catalog::new();
        for name in self.query.relation_names() {
            let arity = self
                .query
                .atoms()
                .iter()
                .find(|a| a.relation == name)
                .map(|a| a.arity())
                .expect("name comes from an atom");
            if self
                .query
                .atoms()
                .iter()
                .any(|a| a.relation == name && a.arity() != arity)
            {
                return Err(Error::Schema(format!(
                    "relation {name} used with different arities"
                )));
            }
            let rel_path = &self.relations[name];
            let full = if rel_path.is_absolute() {
                rel_path.clone()
            } else {
                base.join(rel_path)
            };
            let rel = match cache.get(&(full.clone(), arity)) {
                Some(r) => r.clone(),
                None => {
                    let r = Arc::new(io::load_any(&full, arity, self.config.symmetrize)?);
                    cache.insert((full, arity), r.clone());
                    r
                }
            };
            catalog.insert(name, rel);
        }
        catalog.validate(&self.query)?;
        Ok(catalog)
    }
}

/// Reads a job file and loads its relations relative to the file's directory.
pub fn parse_job(path: impl AsRef<Path>) -> Result<(Query, Catalog, RunConfig)> {
    let path = path.as_ref();
    let job = Job::load(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let catalog = job.load_catalog(base)?;
    Ok((job.query, catalog, job.config))
}

pub fn emit_job(job: &Job) -> String {
    job.to_json()
}
