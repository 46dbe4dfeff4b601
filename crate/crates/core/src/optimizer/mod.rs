//! Statistics, cost model, rewriting and plan search.

pub mod cost;
pub mod plan;
pub mod rewrite;
pub mod stats;

pub use cost::{chain_bound, chain_bounds, level_cost, CostReport};
pub use plan::{choose_plan, Plan, PlanOptions, PlanReport, SearchStats};
pub use rewrite::{detect_rewrites, HoistedIntersection};
pub use stats::{RelationStats, Statistics};
