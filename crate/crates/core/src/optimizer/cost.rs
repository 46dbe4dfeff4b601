//! Degree-chain cardinality bounds and per-level intersection costs.

use serde::Serialize;

use super::rewrite::HoistedIntersection;
use super::stats::{mask_of, Statistics};
use crate::model::{Query, VarId};

/// Levels of the variables in `prefix`; unplaced variables get `usize::MAX`.
pub(crate) fn prefix_levels(num_vars: usize, prefix: &[VarId]) -> Vec<usize> {
    let mut out = vec![usize::MAX; num_vars];
    for (i, &v) in prefix.iter().enumerate() {
        out[v] = i;
    }
    out
}

/// Degree estimates of one atom's column at a level, given the variables
/// bound at shallower levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomEstimate {
    pub max_degree: u64,
    pub avg_degree: f64,
}

pub fn atom_estimate(
    query: &Query,
    stats: &Statistics,
    levels: &[usize],
    atom: usize,
    level: usize,
    var: VarId,
) -> AtomEstimate {
    let a = &query.atoms()[atom];
    let rs = stats.get(&a.relation);
    let attr = a.position_of(var).expect("atom contains the variable");
    let bound = mask_of(
        a.vars
            .iter()
            .enumerate()
            .filter(|(_, &v)| levels[v] < level)
            .map(|(p, _)| p),
    );
    AtomEstimate {
        max_degree: rs.max_degree(attr, bound),
        avg_degree: rs.avg_degree(attr, bound),
    }
}

/// `B_0..B_k` for the prefix: `B_0 = 1`, `B_i = B_{i-1} * min_j d_j` over the
/// atoms containing the `i`-th variable.
pub fn chain_bounds(query: &Query, stats: &Statistics, prefix: &[VarId]) -> Vec<f64> {
    let levels = prefix_levels(query.num_vars(), prefix);
    let mut out = Vec::with_capacity(prefix.len() + 1);
    out.push(1.0);
    for (level, &var) in prefix.iter().enumerate() {
        let d = query
            .atoms_with(var)
            .map(|j| atom_estimate(query, stats, &levels, j, level, var).max_degree)
            .min()
            .unwrap_or(0);
        let prev = *out.last().unwrap();
        out.push(prev * d as f64);
    }
    out
}

/// Upper bound on the size of the query restricted to the prefix.
pub fn chain_bound(query: &Query, stats: &Statistics, prefix: &[VarId]) -> f64 {
    *chain_bounds(query, stats, prefix).last().unwrap()
}

/// `|S| * Σmin * log2(1 + Σmax / Σmin)`, zero for an empty level.
pub fn level_cost(sources: usize, sum_min: f64, sum_max: f64) -> f64 {
    if sum_min <= 0.0 {
        return 0.0;
    }
    sources as f64 * sum_min * (1.0 + sum_max / sum_min).log2()
}

fn ratio(avgs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for a in avgs {
        lo = lo.min(a);
        hi = hi.max(a);
    }
    (lo > 0.0 && lo.is_finite()).then(|| hi / lo)
}

/// Unpartitioned per-level costs of an order with its hoists applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderCosts {
    /// `𝒞[X_σ(1:i)]`, including hoists placed after level `i` is bound.
    pub levels: Vec<f64>,
    /// Hoists built before the outermost loop.
    pub preamble: f64,
    /// Cost of each hoist, parallel to the hoist list.
    pub hoists: Vec<f64>,
}

impl OrderCosts {
    /// `ℂ[X_σ]`.
    pub fn total(&self) -> f64 {
        self.preamble + self.levels.iter().sum::<f64>()
    }
}

pub fn order_costs(
    query: &Query,
    stats: &Statistics,
    order: &[VarId],
    hoists: &[HoistedIntersection],
) -> OrderCosts {
    let levels = prefix_levels(query.num_vars(), order);
    let bounds = chain_bounds(query, stats, order);
    let mut out = OrderCosts {
        levels: vec![0.0; order.len()],
        preamble: 0.0,
        hoists: Vec::with_capacity(hoists.len()),
    };
    for (level, &var) in order.iter().enumerate() {
        let hoist = hoists.iter().find(|h| h.level == level);
        let est = |j| atom_estimate(query, stats, &levels, j, level, var);
        let direct: Vec<f64> = query
            .atoms_with(var)
            .filter(|j| hoist.is_none_or(|h| !h.sources.contains(j)))
            .map(|j| est(j).avg_degree)
            .collect();
        let mut members = direct.clone();
        if let Some(h) = hoist {
            let group: Vec<AtomEstimate> = h.sources.iter().map(|&j| est(j)).collect();
            let temp_avg = group
                .iter()
                .map(|e| e.avg_degree)
                .fold(f64::INFINITY, f64::min);
            members.push(temp_avg);
            let sum_min =
                bounds[h.placement] * group.iter().map(|e| e.max_degree).min().unwrap_or(0) as f64;
            let c = ratio(group.iter().map(|e| e.avg_degree))
                .map_or(0.0, |r| level_cost(group.len(), sum_min, sum_min * r));
            out.hoists.push(c);
            match h.placement {
                0 => out.preamble += c,
                d => out.levels[d - 1] += c,
            }
        }
        let sum_min = bounds[level + 1];
        out.levels[level] += ratio(members.iter().copied())
            .map_or(0.0, |r| level_cost(members.len(), sum_min, sum_min * r));
    }
    out
}

/// Cost of the last level of `prefix`, without hoists; used by the greedy
/// order search.
pub fn prefix_level_cost(query: &Query, stats: &Statistics, prefix: &[VarId]) -> f64 {
    let levels = prefix_levels(query.num_vars(), prefix);
    let level = prefix.len() - 1;
    let var = prefix[level];
    let avgs: Vec<f64> = query
        .atoms_with(var)
        .map(|j| atom_estimate(query, stats, &levels, j, level, var).avg_degree)
        .collect();
    let sum_min = chain_bound(query, stats, prefix);
    ratio(avgs.iter().copied()).map_or(0.0, |r| level_cost(avgs.len(), sum_min, sum_min * r))
}

/// `ℂ[X_σ, P_σ] = preamble * P + Σ_i (∏_{j>i} P_σ(j)) * 𝒞_i`, with
/// `shares` listed in order position.
pub fn partitioned_total(costs: &OrderCosts, shares: &[u32]) -> f64 {
    let mut suffix = 1.0;
    let mut total = 0.0;
    for (c, &p) in costs.levels.iter().zip(shares).rev() {
        total += suffix * c;
        suffix *= p as f64;
    }
    total + suffix * costs.preamble
}

/// `w(i) = max(1 - i/100, 3/4)` with 1-based `i`.
pub fn evenness_weight(i: usize) -> f64 {
    (1.0 - i as f64 / 100.0).max(0.75)
}

/// `E = Σ_i P_σ(i) * w(i)`, with `shares` listed in order position.
pub fn evenness(shares: &[u32]) -> f64 {
    shares
        .iter()
        .enumerate()
        .map(|(i, &p)| p as f64 * evenness_weight(i + 1))
        .sum()
}

/// Full cost summary of a plan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub level_costs: Vec<f64>,
    pub preamble: f64,
    pub hoist_costs: Vec<f64>,
    pub total: f64,
    pub partitioned_total: f64,
    pub evenness: f64,
}

impl CostReport {
    pub fn new(costs: &OrderCosts, shares_in_order: &[u32]) -> Self {
        CostReport {
            level_costs: costs.levels.clone(),
            preamble: costs.preamble,
            hoist_costs: costs.hoists.clone(),
            total: costs.total(),
            partitioned_total: partitioned_total(costs, shares_in_order),
            evenness: evenness(shares_in_order),
        }
    }
}
