//! Joint search over variable orders and share allocations.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use super::cost::{self, CostReport, OrderCosts};
use super::rewrite::{detect_rewrites, HoistedIntersection};
use super::stats::Statistics;
use crate::error::{Error, Result};
use crate::model::{Query, VarId};
use crate::partition::ShareVector;

/// Orders are enumerated exhaustively up to this many variables.
pub const EXHAUSTIVE_MAX_VARS: usize = 8;
/// Largest query the optimizer accepts.
pub const MAX_VARS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanOptions {
    /// Number of logical tasks `P`, a power of two.
    pub threads: u64,
    pub order: Option<Vec<VarId>>,
    pub shares: Option<ShareVector>,
    pub rewrite: bool,
}

impl PlanOptions {
    pub fn new(threads: u64) -> Self {
        PlanOptions {
            threads,
            order: None,
            shares: None,
            rewrite: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub order: Vec<VarId>,
    pub shares: ShareVector,
    pub hoists: Vec<HoistedIntersection>,
    pub cost: CostReport,
}

impl Plan {
    /// Shares listed by order position.
    pub fn shares_in_order(&self) -> Vec<u32> {
        self.order.iter().map(|&v| self.shares.get(v)).collect()
    }

    pub fn threads(&self) -> u64 {
        self.shares.total()
    }
}

/// Counters from one plan search.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub orders_considered: usize,
    /// Share allocations enumerated for each order.
    pub share_candidates: usize,
    /// Orders whose unpartitioned cost was already over twice the best.
    pub orders_skipped: usize,
    pub candidates_evaluated: usize,
    pub cost_pruned: usize,
    pub domain_pruned: usize,
    pub feasible: usize,
    pub fallback: bool,
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative
/// integers, in lexicographic order.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn go(rest: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in 0..=rest {
            cur.push(e);
            go(rest - e, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        go(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<VarId>> {
    let mut cur: Vec<VarId> = (0..n).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// Extends the order one variable at a time, always taking the variable with
/// the cheapest next level.
pub fn greedy_order(query: &Query, stats: &Statistics) -> Vec<VarId> {
    let n = query.num_vars();
    let mut order: Vec<VarId> = Vec::with_capacity(n);
    while order.len() < n {
        let remaining: Vec<VarId> = (0..n).filter(|v| !order.contains(v)).collect();
        let next = remaining
            .into_iter()
            .map(|v| {
                order.push(v);
                let c = cost::prefix_level_cost(query, stats, &order);
                order.pop();
                (c, v)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .unwrap()
            .1;
        order.push(next);
    }
    order
}

/// `|Dom(X)|`: the smallest distinct count of `X` over the atoms containing it.
pub fn domain_size(query: &Query, stats: &Statistics, var: VarId) -> u64 {
    query
        .atoms_with(var)
        .map(|j| {
            let a = &query.atoms()[j];
            stats.get(&a.relation).distinct(a.position_of(var).unwrap())
        })
        .min()
        .unwrap_or(0)
}

/// Smallest domain that may receive share `p`: `3 * p * log2 p`.
pub fn domain_threshold(p: u32) -> u64 {
    3 * p as u64 * p.trailing_zeros() as u64
}

struct OrderChoice {
    order: Vec<VarId>,
    hoists: Vec<HoistedIntersection>,
    costs: OrderCosts,
}

fn rewrite_choice(
    query: &Query,
    stats: &Statistics,
    order: Vec<VarId>,
    rewrite: bool,
) -> OrderChoice {
    let plain = cost::order_costs(query, stats, &order, &[]);
    if rewrite {
        let hoists = detect_rewrites(query, &order);
        if !hoists.is_empty() {
            let costs = cost::order_costs(query, stats, &order, &hoists);
            if costs.total() <= plain.total() {
                return OrderChoice {
                    order,
                    hoists,
                    costs,
                };
            }
        }
    }
    OrderChoice {
        order,
        hoists: Vec::new(),
        costs: plain,
    }
}

fn shares_from_positions(order: &[VarId], exps: &[u32]) -> ShareVector {
    let mut by_var = vec![0u32; order.len()];
    for (&v, &e) in order.iter().zip(exps) {
        by_var[v] = e;
    }
    ShareVector::from_exponents(&by_var).expect("exponents sum to log2 P")
}

struct Candidate<'a> {
    choice: &'a OrderChoice,
    in_order: Vec<u32>,
    evenness: f64,
    cost: f64,
}

/// Chooses the variable order, shares and hoists for `query` at `P` tasks.
///
/// Every order is costed unpartitioned first. Share allocations are then
/// enumerated as exponent compositions of `log2 P`; an allocation is dropped
/// when it more than doubles its order's cost or hands a variable a share its
/// domain cannot fill. Among the allocations within twice the cheapest order
/// the most even one wins, with ties going to the cheaper, then the
/// lexicographically smaller plan.
pub fn choose_plan(
    query: &Query,
    stats: &Statistics,
    options: &PlanOptions,
) -> Result<(Plan, SearchStats)> {
    let n = query.num_vars();
    let p = options.threads;
    if !p.is_power_of_two() || p > 1 << 30 {
        return Err(Error::Config(format!(
            "thread count {p} is not a power of two"
        )));
    }
    if n > MAX_VARS {
        return Err(Error::Query(format!(
            "{n} variables exceed the optimizer limit of {MAX_VARS}"
        )));
    }
    if let Some(order) = &options.order {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(Error::Config(
                "order is not a permutation of the variables".into(),
            ));
        }
    }
    if let Some(shares) = &options.shares {
        if shares.len() != n || shares.total() != p {
            return Err(Error::Config(format!(
                "shares must cover {n} variables with product {p}"
            )));
        }
    }

    let orders = match &options.order {
        Some(o) => vec![o.clone()],
        None if n <= EXHAUSTIVE_MAX_VARS => permutations(n),
        None => vec![greedy_order(query, stats)],
    };
    let choices: Vec<OrderChoice> = orders
        .into_iter()
        .map(|o| rewrite_choice(query, stats, o, options.rewrite))
        .collect();
    let best_base = choices
        .iter()
        .map(|c| c.costs.total())
        .fold(f64::INFINITY, f64::min);

    let log_p = p.trailing_zeros();
    let share_sets: Vec<Vec<u32>> = match &options.shares {
        Some(_) => Vec::new(),
        None => compositions(log_p, n),
    };
    let mut search = SearchStats {
        orders_considered: choices.len(),
        share_candidates: if options.shares.is_some() {
            1
        } else {
            share_sets.len()
        },
        ..SearchStats::default()
    };
    let domains: Vec<u64> = (0..n).map(|v| domain_size(query, stats, v)).collect();

    let mut best: Option<Candidate> = None;
    for choice in &choices {
        let base = choice.costs.total();
        if let Some(shares) = &options.shares {
            let in_order: Vec<u32> = choice.order.iter().map(|&v| shares.get(v)).collect();
            search.candidates_evaluated += 1;
            search.feasible += 1;
            let cand = Candidate {
                cost: cost::partitioned_total(&choice.costs, &in_order),
                evenness: cost::evenness(&in_order),
                in_order,
                choice,
            };
            if best
                .as_ref()
                .is_none_or(|b| by_cost(&cand, b) == Ordering::Less)
            {
                best = Some(cand);
            }
            continue;
        }
        if base > 2.0 * best_base {
            search.orders_skipped += 1;
            continue;
        }
        for exps in &share_sets {
            search.candidates_evaluated += 1;
            let in_order: Vec<u32> = exps.iter().map(|&e| 1u32 << e).collect();
            let total = cost::partitioned_total(&choice.costs, &in_order);
            if total > 2.0 * base {
                search.cost_pruned += 1;
                continue;
            }
            let starved = choice
                .order
                .iter()
                .zip(&in_order)
                .any(|(&v, &s)| s > 1 && domains[v] < domain_threshold(s));
            if starved {
                search.domain_pruned += 1;
                continue;
            }
            if total > 2.0 * best_base {
                continue;
            }
            search.feasible += 1;
            let cand = Candidate {
                evenness: cost::evenness(&in_order),
                cost: total,
                in_order,
                choice,
            };
            if best
                .as_ref()
                .is_none_or(|b| by_evenness(&cand, b) == Ordering::Less)
            {
                best = Some(cand);
            }
        }
    }

    let (choice, in_order) = match best {
        Some(c) => (c.choice, c.in_order),
        None => {
            search.fallback = true;
            let choice = choices
                .iter()
                .min_by(|a, b| {
                    a.costs
                        .total()
                        .total_cmp(&b.costs.total())
                        .then(a.order.cmp(&b.order))
                })
                .expect("at least one order");
            let mut in_order = vec![1u32; n];
            in_order[0] = p as u32;
            log::warn!(
                "every share allocation was pruned; placing all {p} tasks on {}",
                query.var_name(choice.order[0])
            );
            (choice, in_order)
        }
    };
    let exps: Vec<u32> = in_order.iter().map(|s| s.trailing_zeros()).collect();
    let plan = Plan {
        order: choice.order.clone(),
        shares: shares_from_positions(&choice.order, &exps),
        hoists: choice.hoists.clone(),
        cost: CostReport::new(&choice.costs, &in_order),
    };
    Ok((plan, search))
}

fn by_cost(a: &Candidate, b: &Candidate) -> Ordering {
    a.cost
        .total_cmp(&b.cost)
        .then_with(|| a.choice.order.cmp(&b.choice.order))
}

fn by_evenness(a: &Candidate, b: &Candidate) -> Ordering {
    a.evenness
        .total_cmp(&b.evenness)
        .then_with(|| a.cost.total_cmp(&b.cost))
        .then_with(|| a.choice.order.cmp(&b.choice.order))
        .then_with(|| a.in_order.cmp(&b.in_order))
}

/// Human- and machine-readable account of a chosen plan.
#[derive(Debug, Clone, Serialize)]
pub struct PlanReport {
    pub query: String,
    pub threads: u64,
    pub order: Vec<String>,
    pub shares: Vec<(String, u32)>,
    pub hoists: Vec<HoistReport>,
    pub level_costs: Vec<f64>,
    pub preamble_cost: f64,
    pub total_cost: f64,
    pub partitioned_cost: f64,
    pub evenness: f64,
    pub search: SearchStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct HoistReport {
    pub name: String,
    pub expression: String,
    pub placement: String,
    pub cost: f64,
}

impl PlanReport {
    pub fn new(query: &Query, plan: &Plan, search: &SearchStats) -> Self {
        let name = |v: VarId| query.var_name(v).to_string();
        PlanReport {
            query: query.to_string(),
            threads: plan.threads(),
            order: plan.order.iter().map(|&v| name(v)).collect(),
            shares: plan
                .order
                .iter()
                .map(|&v| (name(v), plan.shares.get(v)))
                .collect(),
            hoists: plan
                .hoists
                .iter()
                .zip(&plan.cost.hoist_costs)
                .map(|(h, &c)| HoistReport {
                    name: h.name(query),
                    expression: h.describe(query, &plan.order),
                    placement: match h.placement {
                        0 => "before the outermost loop".to_string(),
                        d => format!("after binding {}", name(plan.order[d - 1])),
                    },
                    cost: c,
                })
                .collect(),
            level_costs: plan.cost.level_costs.clone(),
            preamble_cost: plan.cost.preamble,
            total_cost: plan.cost.total,
            partitioned_cost: plan.cost.partitioned_total,
            evenness: plan.cost.evenness,
            search: search.clone(),
        }
    }
}

impl fmt::Display for PlanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "query: {}", self.query)?;
        writeln!(f, "threads: {}", self.threads)?;
        writeln!(f, "order: {}", self.order.join(", "))?;
        let shares: Vec<String> = self
            .shares
            .iter()
            .map(|(v, s)| format!("{v}={s}"))
            .collect();
        writeln!(f, "shares: {}", shares.join(" "))?;
        if self.hoists.is_empty() {
            writeln!(f, "hoists: none")?;
        } else {
            writeln!(f, "hoists:")?;
            for h in &self.hoists {
                writeln!(
                    f,
                    "  {}  [{}, cost {:.1}]",
                    h.expression, h.placement, h.cost
                )?;
            }
        }
        writeln!(f, "level costs:")?;
        if self.preamble_cost > 0.0 {
            writeln!(f, "  preamble: {:.1}", self.preamble_cost)?;
        }
        for (v, c) in self.order.iter().zip(&self.level_costs) {
            writeln!(f, "  {v}: {c:.1}")?;
        }
        writeln!(f, "total cost: {:.1}", self.total_cost)?;
        writeln!(f, "partitioned cost: {:.1}", self.partitioned_cost)?;
        writeln!(f, "evenness: {:.2}", self.evenness)?;
        let s = &self.search;
        writeln!(f, "orders considered: {}", s.orders_considered)?;
        writeln!(
            f,
            "{} share candidates enumerated per order",
            s.share_candidates
        )?;
        writeln!(
            f,
            "candidates evaluated: {} (orders skipped: {}, cost pruned: {}, domain pruned: {}, feasible: {})",
            s.candidates_evaluated, s.orders_skipped, s.cost_pruned, s.domain_pruned, s.feasible
        )?;
        if s.fallback {
            writeln!(
                f,
                "fallback: all allocations pruned, shares placed on the first variable"
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Catalog, Relation};

    fn graph_catalog(edges: &[[u64; 2]], names: &[&str]) -> Catalog {
        let rel = std::sync::Arc::new(Relation::from_rows("E", 2, edges).unwrap().deduplicate());
        let mut cat = Catalog::new();
        for n in names {
            cat.insert(*n, rel.clone());
        }
        cat
    }

    fn dense_edges(nodes: u64) -> Vec<[u64; 2]> {
        let mut out = Vec::new();
        for a in 0..nodes {
            for b in 0..nodes {
                if a != b && (a * 7 + b * 13) % 5 != 0 {
                    out.push([a, b]);
                }
            }
        }
        out
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(10, 3).len(), 66);
        assert_eq!(compositions(0, 4), vec![vec![0, 0, 0, 0]]);
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert!(compositions(6, 4)
            .iter()
            .all(|c| c.iter().sum::<u32>() == 6));
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn domain_threshold_arithmetic() {
        assert_eq!(domain_threshold(64), 1152);
        assert_eq!(domain_threshold(1), 0);
    }

    #[test]
    fn triangle_plan_is_valid_and_deterministic() {
        let q = Query::parse("Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(X,Z).").unwrap();
        let cat = graph_catalog(&dense_edges(60), &["R", "S", "T"]);
        let stats = Statistics::collect(&cat);
        let opts = PlanOptions::new(64);
        let (a, search) = choose_plan(&q, &stats, &opts).unwrap();
        let (b, _) = choose_plan(&q, &stats, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shares.total(), 64);
        assert!(a.hoists.is_empty());
        assert_eq!(search.orders_considered, 6);
        assert_eq!(search.share_candidates, 28);
        assert!(!search.fallback);
        assert!(a.cost.partitioned_total <= 2.0 * a.cost.total + 1e-9);
    }

    #[test]
    fn overrides_pass_through() {
        let q = Query::parse("Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(X,Z).").unwrap();
        let cat = graph_catalog(&dense_edges(30), &["R", "S", "T"]);
        let stats = Statistics::collect(&cat);
        let mut opts = PlanOptions::new(8);
        opts.order = Some(vec![2, 0, 1]);
        opts.shares = Some(ShareVector::new(vec![8, 1, 1]).unwrap());
        let (plan, _) = choose_plan(&q, &stats, &opts).unwrap();
        assert_eq!(plan.order, vec![2, 0, 1]);
        assert_eq!(plan.shares.as_slice(), &[8, 1, 1]);
    }

    #[test]
    fn tiny_domains_fall_back() {
        let q = Query::parse("Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(X,Z).").unwrap();
        let cat = graph_catalog(&[[0, 1], [1, 2], [0, 2]], &["R", "S", "T"]);
        let stats = Statistics::collect(&cat);
        let (plan, search) = choose_plan(&q, &stats, &PlanOptions::new(16)).unwrap();
        assert!(search.fallback);
        assert_eq!(plan.shares.get(plan.order[0]), 16);
    }

    #[test]
    fn four_clique_keeps_hoists_when_cheaper() {
        let q = Query::parse("Q(X,Y,Z,U) :- R1(X,Y), R2(X,Z), R3(X,U), R4(Y,Z), R5(Y,U), R6(Z,U).")
            .unwrap();
        let cat = graph_catalog(&dense_edges(40), &["R1", "R2", "R3", "R4", "R5", "R6"]);
        let stats = Statistics::collect(&cat);
        let mut opts = PlanOptions::new(1);
        opts.order = Some(vec![0, 1, 2, 3]);
        let (plan, _) = choose_plan(&q, &stats, &opts).unwrap();
        assert_eq!(plan.hoists.len(), 3);
        opts.rewrite = false;
        let (plain, _) = choose_plan(&q, &stats, &opts).unwrap();
        assert!(plain.hoists.is_empty());
        assert!(plan.cost.total <= plain.cost.total);
    }

    #[test]
    fn report_mentions_candidate_count() {
        let q = Query::parse("Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(X,Z).").unwrap();
        let cat = graph_catalog(&dense_edges(40), &["R", "S", "T"]);
        let stats = Statistics::collect(&cat);
        let (plan, search) = choose_plan(&q, &stats, &PlanOptions::new(1024)).unwrap();
        let text = PlanReport::new(&q, &plan, &search).to_string();
        assert!(text.contains("66 share candidates enumerated"), "{text}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let q = Query::parse("Q(X,Y) :- R(X,Y).").unwrap();
        let cat = graph_catalog(&[[0, 1]], &["R"]);
        let stats = Statistics::collect(&cat);
        assert!(choose_plan(&q, &stats, &PlanOptions::new(6)).is_err());
        let mut opts = PlanOptions::new(4);
        opts.order = Some(vec![0, 0]);
        assert!(choose_plan(&q, &stats, &opts).is_err());
        let mut opts = PlanOptions::new(4);
        opts.shares = Some(ShareVector::new(vec![2, 1]).unwrap());
        assert!(choose_plan(&q, &stats, &opts).is_err());
    }
}
