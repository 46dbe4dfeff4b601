//! Worst-case-optimal multiway joins over hash-partitioned, trie-indexed
//! relations.
//!
//! A query is planned by [`optimizer::choose_plan`], which fixes a variable
//! order, a share per variable and the intersections to hoist. Each atom is
//! then partitioned on the share grid ([`partition`]), every partition is
//! indexed as a compressed column trie ([`coco`]), and [`executor::run`]
//! evaluates one nested-loop join per grid point on a work-stealing pool.
//! [`engine::evaluate`] chains the three phases.

pub mod coco;
pub mod datagen;
pub mod engine;
pub mod error;
pub mod executor;
pub mod intersect;
pub mod io;
pub mod job;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod partition;
pub mod queries;
pub mod rows;

pub use coco::CocoIndex;
pub use engine::{evaluate, EngineOptions, Evaluation, Timings};
pub use error::{Error, Result};
pub use executor::{ExecOptions, ResultSet, TaskId};
pub use intersect::{SearchConfig, SearchStrategy, Steps};
pub use job::{Job, OutputMode, RunConfig};
pub use model::{Atom, Catalog, Query, Relation, Value, VarId};
pub use optimizer::{HoistedIntersection, Plan, PlanOptions, PlanReport, Statistics};
pub use partition::{HashFamily, PartitionHash, ShareVector};
