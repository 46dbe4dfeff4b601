//! Parallel Generic Join over partitioned trie indices.
//!
//! Every point of the share grid is one task. A task resolves, for each atom,
//! the single partition its coordinates select and runs the nested-loop
//! intersection plan over those partitions' tries. Tasks share nothing
//! mutable; a work-stealing pool runs them and the results are concatenated.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::coco::CocoIndex;
use crate::error::{Error, Result};
use crate::intersect::{intersect_count, intersect_into, SearchConfig, Steps};
use crate::model::{Catalog, Query, Value, VarId};
use crate::optimizer::Plan;
use crate::partition::{partition_atom, PartitionHash, PartitionedRelation};

/// Most inputs a single level may intersect.
pub const MAX_SOURCES: usize = 32;

/// One atom after partitioning: the scattered rows plus one trie per
/// partition, with trie levels following the plan's variable order.
#[derive(Debug)]
pub struct PreparedAtom {
    pub partitioned: PartitionedRelation,
    pub indices: Vec<CocoIndex>,
    /// Attribute positions in trie-level order.
    pub attr_order: Vec<usize>,
}

/// All atoms of a query, partitioned and indexed for one plan.
#[derive(Debug)]
pub struct Prepared {
    pub atoms: Vec<PreparedAtom>,
}

/// Attribute positions of `atom` ordered by their variables' levels.
pub fn attribute_order(query: &Query, atom: usize, level_of: &[usize]) -> Vec<usize> {
    let vars = &query.atoms()[atom].vars;
    let mut attrs: Vec<usize> = (0..vars.len()).collect();
    attrs.sort_by_key(|&a| level_of[vars[a]]);
    attrs
}

fn level_of(order: &[VarId]) -> Vec<usize> {
    let mut out = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        out[v] = i;
    }
    out
}

/// Partitions, sorts and indexes every atom. Atoms over the same physical
/// relation each get their own copy since their shares generally differ.
pub fn prepare(
    query: &Query,
    catalog: &Catalog,
    plan: &Plan,
    hasher: &dyn PartitionHash,
    workers: usize,
) -> Result<Prepared> {
    catalog.validate(query)?;
    let level_of = level_of(&plan.order);
    let atoms = query
        .atoms()
        .iter()
        .enumerate()
        .map(|(j, atom)| {
            let relation = catalog.relation(&atom.relation)?;
            let attr_order = attribute_order(query, j, &level_of);
            let partitioned =
                partition_atom(relation, atom, &plan.shares, hasher, &attr_order, workers);
            let omit = relation.is_deduplicated();
            let indices = (0..partitioned.num_partitions())
                .into_par_iter()
                .map(|t| {
                    CocoIndex::build_ordered(
                        partitioned.partition(t),
                        atom.arity(),
                        &attr_order,
                        omit,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(PreparedAtom {
                partitioned,
                indices,
                attr_order,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared { atoms })
}

/// Grid coordinates of a task, one per order position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TaskId(pub Vec<u32>);

impl TaskId {
    /// Row-major decoding of task number `t`; the last position varies fastest.
    pub fn from_index(mut t: u64, shares_in_order: &[u32]) -> Self {
        let mut coords = vec![0u32; shares_in_order.len()];
        for (c, &p) in coords.iter_mut().zip(shares_in_order).rev() {
            *c = (t % p as u64) as u32;
            t /= p as u64;
        }
        TaskId(coords)
    }

    pub fn index(&self, shares_in_order: &[u32]) -> u64 {
        self.0
            .iter()
            .zip(shares_in_order)
            .fold(0, |acc, (&c, &p)| acc * p as u64 + c as u64)
    }
}

/// Index of the partition of atom `atom` that task `task` reads.
pub fn resolve_partition(
    query: &Query,
    plan: &Plan,
    prepared: &Prepared,
    task: &TaskId,
    atom: usize,
) -> usize {
    let level_of = level_of(&plan.order);
    let coords: Vec<u32> = query.atoms()[atom]
        .vars
        .iter()
        .map(|&v| task.0[level_of[v]])
        .collect();
    prepared.atoms[atom].partitioned.partition_index(&coords)
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Atom { atom: usize, depth: usize },
    Temp(usize),
}

#[derive(Debug)]
struct HoistPlan {
    sources: Vec<(usize, usize)>,
}

/// The plan lowered to trie depths and per-level source lists.
#[derive(Debug)]
struct ExecPlan {
    n: usize,
    order: Vec<VarId>,
    level_of: Vec<usize>,
    levels: Vec<Vec<Source>>,
    hoists: Vec<HoistPlan>,
    /// Hoists whose cache goes stale when level `i` is rebound.
    invalidate: Vec<Vec<usize>>,
    /// Hoists built before the outermost loop.
    preamble: Vec<usize>,
    arities: Vec<usize>,
}

impl ExecPlan {
    fn compile(query: &Query, plan: &Plan, rewrite: bool) -> Result<Self> {
        let n = plan.order.len();
        let level_of = level_of(&plan.order);
        let depth_of = |atom: usize, var: VarId| {
            let vars = &query.atoms()[atom].vars;
            vars.iter()
                .filter(|&&v| level_of[v] < level_of[var])
                .count()
        };
        let hoists: &[_] = if rewrite { &plan.hoists } else { &[] };
        let mut levels: Vec<Vec<Source>> = Vec::with_capacity(n);
        for (level, &var) in plan.order.iter().enumerate() {
            let hoist = hoists.iter().position(|h| h.level == level);
            let mut sources: Vec<Source> = query
                .atoms_with(var)
                .filter(|j| hoist.is_none_or(|h| !hoists[h].sources.contains(j)))
                .map(|atom| Source::Atom {
                    atom,
                    depth: depth_of(atom, var),
                })
                .collect();
            if let Some(h) = hoist {
                sources.push(Source::Temp(h));
            }
            if sources.len() > MAX_SOURCES {
                return Err(Error::Query(format!(
                    "variable {} occurs in more than {MAX_SOURCES} atoms",
                    query.var_name(var)
                )));
            }
            levels.push(sources);
        }
        let mut invalidate = vec![Vec::new(); n];
        let mut preamble = Vec::new();
        for (h, hoist) in hoists.iter().enumerate() {
            match hoist.placement {
                0 => preamble.push(h),
                d => invalidate[d - 1].push(h),
            }
        }
        Ok(ExecPlan {
            n,
            order: plan.order.clone(),
            level_of: level_of.clone(),
            levels,
            hoists: hoists
                .iter()
                .map(|h| HoistPlan {
                    sources: h
                        .sources
                        .iter()
                        .map(|&j| (j, depth_of(j, plan.order[h.level])))
                        .collect(),
                })
                .collect(),
            invalidate,
            preamble,
            arities: query.atoms().iter().map(|a| a.arity()).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    pub workers: usize,
    pub tuples: bool,
    /// Record per-level intersection sizes for cost-model validation.
    pub profile: bool,
    /// Apply the plan's hoisted intersections.
    pub rewrite: bool,
    pub search: SearchConfig,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            workers: 1,
            tuples: false,
            profile: false,
            rewrite: true,
            search: SearchConfig::default(),
        }
    }
}

/// Exact sizes observed at one level, summed over every time the level's
/// intersection ran.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct LevelProfile {
    pub sources: usize,
    pub invocations: u64,
    /// Σ of the smallest input size per invocation.
    pub sum_min: f64,
    /// Σ of the largest input size per invocation.
    pub sum_max: f64,
    /// Σ of `|S| * min * log2(1 + max / min)` per invocation.
    pub sum_cost: f64,
    pub steps: u64,
}

impl LevelProfile {
    /// The level cost evaluated on the summed sizes.
    pub fn bound(&self) -> f64 {
        crate::optimizer::level_cost(self.sources, self.sum_min, self.sum_max)
    }

    fn merge(&mut self, other: &LevelProfile) {
        self.sources = self.sources.max(other.sources);
        self.invocations += other.invocations;
        self.sum_min += other.sum_min;
        self.sum_max += other.sum_max;
        self.sum_cost += other.sum_cost;
        self.steps += other.steps;
    }
}

/// Per-task work record, the rows of the instrumentation dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskStats {
    pub task: u64,
    pub steps: u64,
    pub emitted: u64,
    pub wall_nanos: u64,
}

#[derive(Debug, Clone, Default)]
pub struct ResultSet {
    pub arity: usize,
    pub count: u64,
    /// Row-major bindings in head-variable order, when tuples were requested.
    pub tuples: Option<Vec<Value>>,
    pub tasks: Vec<TaskStats>,
    pub profile: Option<Vec<LevelProfile>>,
}

impl ResultSet {
    pub fn total_steps(&self) -> u64 {
        self.tasks.iter().map(|t| t.steps).sum()
    }

    /// Maximum over minimum per-task steps; an idle task counts as one step.
    pub fn skew_ratio(&self) -> f64 {
        let max = self.tasks.iter().map(|t| t.steps).max().unwrap_or(0);
        let min = self.tasks.iter().map(|t| t.steps).min().unwrap_or(0);
        max as f64 / min.max(1) as f64
    }

    /// Bindings sorted lexicographically.
    pub fn sorted_tuples(&self) -> Option<Vec<Vec<Value>>> {
        let data = self.tuples.as_ref()?;
        let mut rows: Vec<Vec<Value>> = data.chunks_exact(self.arity).map(<[_]>::to_vec).collect();
        rows.sort_unstable();
        Some(rows)
    }

    /// `task_id,steps,emitted,wall_nanos` lines.
    pub fn write_task_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "task_id,steps,emitted,wall_nanos")?;
        for t in &self.tasks {
            writeln!(w, "{},{},{},{}", t.task, t.steps, t.emitted, t.wall_nanos)?;
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
struct LevelBuf {
    values: Vec<Value>,
    positions: Vec<u32>,
    bases: [usize; MAX_SOURCES],
}

#[derive(Debug, Default)]
struct TempCache {
    valid: bool,
    values: Vec<Value>,
    /// Absolute positions, one per source per value.
    positions: Vec<u32>,
}

struct Task<'a> {
    plan: &'a ExecPlan,
    opts: &'a ExecOptions,
    indices: Vec<&'a CocoIndex>,
    pos: Vec<Vec<usize>>,
    bufs: Vec<LevelBuf>,
    temps: Vec<TempCache>,
    binding: Vec<Value>,
    count: u64,
    tuples: Vec<Value>,
    steps: Steps,
    profile: Vec<LevelProfile>,
}

impl<'a> Task<'a> {
    fn new(plan: &'a ExecPlan, opts: &'a ExecOptions, indices: Vec<&'a CocoIndex>) -> Self {
        Task {
            pos: plan.arities.iter().map(|&k| vec![0; k]).collect(),
            bufs: (0..plan.n).map(|_| LevelBuf::default()).collect(),
            temps: plan.hoists.iter().map(|_| TempCache::default()).collect(),
            binding: vec![0; plan.n],
            count: 0,
            tuples: Vec::new(),
            steps: Steps::new(),
            profile: plan
                .levels
                .iter()
                .map(|s| LevelProfile {
                    sources: s.len(),
                    ..LevelProfile::default()
                })
                .collect(),
            plan,
            opts,
            indices,
        }
    }

    /// Trie column of `atom` at `depth` under the current bindings, with the
    /// absolute position of its first element.
    #[inline]
    fn atom_view(
        indices: &[&'a CocoIndex],
        pos: &[Vec<usize>],
        atom: usize,
        depth: usize,
    ) -> (&'a [Value], usize) {
        let idx = indices[atom];
        if depth == 0 {
            (idx.values(0), 0)
        } else {
            let (b, e) = idx.children(depth - 1, pos[atom][depth - 1]);
            (&idx.values(depth)[b..e], b)
        }
    }

    fn build_temp(&mut self, h: usize) {
        let hoist = &self.plan.hoists[h];
        let mut views: [&[Value]; MAX_SOURCES] = [&[]; MAX_SOURCES];
        let mut bases = [0usize; MAX_SOURCES];
        let k = hoist.sources.len();
        for (g, &(atom, depth)) in hoist.sources.iter().enumerate() {
            (views[g], bases[g]) = Self::atom_view(&self.indices, &self.pos, atom, depth);
        }
        let temp = &mut self.temps[h];
        temp.values.clear();
        temp.positions.clear();
        intersect_into(
            &views[..k],
            self.opts.search,
            &mut temp.values,
            &mut temp.positions,
            &mut self.steps,
        );
        for (i, p) in temp.positions.iter_mut().enumerate() {
            *p += bases[i % k] as u32;
        }
        temp.valid = true;
    }

    fn run(&mut self) {
        if self.indices.iter().any(|i| i.is_empty()) {
            return;
        }
        for &h in &self.plan.preamble {
            self.temps[h].valid = false;
        }
        self.level(0);
    }

    fn level(&mut self, level: usize) {
        let plan = self.plan;
        let sources = &plan.levels[level];
        for s in sources {
            if let Source::Temp(h) = *s {
                if !self.temps[h].valid {
                    self.build_temp(h);
                }
            }
        }

        let mut buf = std::mem::take(&mut self.bufs[level]);
        let k = sources.len();
        let last = level + 1 == plan.n;
        let before = self.steps.get();
        {
            let mut views: [&[Value]; MAX_SOURCES] = [&[]; MAX_SOURCES];
            for (i, s) in sources.iter().enumerate() {
                match *s {
                    Source::Atom { atom, depth } => {
                        (views[i], buf.bases[i]) =
                            Self::atom_view(&self.indices, &self.pos, atom, depth);
                    }
                    Source::Temp(h) => {
                        views[i] = &self.temps[h].values;
                        buf.bases[i] = 0;
                    }
                }
            }
            let views = &views[..k];
            if self.opts.profile {
                let lo = views.iter().map(|v| v.len()).min().unwrap_or(0) as f64;
                let hi = views.iter().map(|v| v.len()).max().unwrap_or(0) as f64;
                let p = &mut self.profile[level];
                p.invocations += 1;
                p.sum_min += lo;
                p.sum_max += hi;
                p.sum_cost += crate::optimizer::level_cost(k, lo, hi);
            }
            if last && !self.opts.tuples {
                self.count += intersect_count(views, self.opts.search, &mut self.steps) as u64;
                if self.opts.profile {
                    self.profile[level].steps += self.steps.get() - before;
                }
                self.bufs[level] = buf;
                return;
            }
            buf.values.clear();
            buf.positions.clear();
            intersect_into(
                views,
                self.opts.search,
                &mut buf.values,
                &mut buf.positions,
                &mut self.steps,
            );
        }
        if self.opts.profile {
            self.profile[level].steps += self.steps.get() - before;
        }

        for (m, &value) in buf.values.iter().enumerate() {
            self.binding[level] = value;
            for (i, s) in sources.iter().enumerate() {
                let rel = buf.positions[m * k + i] as usize;
                match *s {
                    Source::Atom { atom, depth } => {
                        self.pos[atom][depth] = buf.bases[i] + rel;
                    }
                    Source::Temp(h) => {
                        let g = plan.hoists[h].sources.len();
                        let temp = &self.temps[h];
                        for (t, &(atom, depth)) in plan.hoists[h].sources.iter().enumerate() {
                            self.pos[atom][depth] = temp.positions[rel * g + t] as usize;
                        }
                    }
                }
            }
            if last {
                self.count += 1;
                let n = plan.n;
                let start = self.tuples.len();
                self.tuples.resize(start + n, 0);
                for v in 0..n {
                    self.tuples[start + v] = self.binding[plan.level_of[v]];
                }
            } else {
                for &h in &plan.invalidate[level] {
                    self.temps[h].valid = false;
                }
                self.level(level + 1);
            }
        }
        self.bufs[level] = buf;
    }
}

/// Runs one task to completion.
pub fn run_task(
    query: &Query,
    plan: &Plan,
    prepared: &Prepared,
    task: &TaskId,
    opts: &ExecOptions,
) -> Result<ResultSet> {
    let exec = ExecPlan::compile(query, plan, opts.rewrite)?;
    let out = execute(query, plan, &exec, prepared, task, opts);
    Ok(ResultSet {
        arity: exec.n,
        count: out.0.emitted,
        tuples: opts.tuples.then_some(out.1),
        tasks: vec![out.0],
        profile: out.2,
    })
}

fn execute(
    query: &Query,
    plan: &Plan,
    exec: &ExecPlan,
    prepared: &Prepared,
    task: &TaskId,
    opts: &ExecOptions,
) -> (TaskStats, Vec<Value>, Option<Vec<LevelProfile>>) {
    let start = Instant::now();
    let indices: Vec<&CocoIndex> = (0..query.atoms().len())
        .map(|j| &prepared.atoms[j].indices[resolve_partition_with(query, exec, prepared, task, j)])
        .collect();
    let mut t = Task::new(exec, opts, indices);
    t.run();
    let stats = TaskStats {
        task: task.index(&plan.shares_in_order()),
        steps: t.steps.get(),
        emitted: t.count,
        wall_nanos: start.elapsed().as_nanos() as u64,
    };
    let profile = opts.profile.then_some(t.profile);
    (stats, t.tuples, profile)
}

fn resolve_partition_with(
    query: &Query,
    exec: &ExecPlan,
    prepared: &Prepared,
    task: &TaskId,
    atom: usize,
) -> usize {
    let coords: Vec<u32> = query.atoms()[atom]
        .vars
        .iter()
        .map(|&v| task.0[exec.level_of[v]])
        .collect();
    prepared.atoms[atom].partitioned.partition_index(&coords)
}

/// Runs all `P` tasks on a pool of `opts.workers` threads and merges their
/// results in task order.
pub fn run(
    query: &Query,
    plan: &Plan,
    prepared: &Prepared,
    opts: &ExecOptions,
) -> Result<ResultSet> {
    let exec = ExecPlan::compile(query, plan, opts.rewrite)?;
    debug_assert_eq!(exec.order, plan.order);
    let shares = plan.shares_in_order();
    let p = plan.threads();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let outputs: Vec<_> = pool.install(|| {
        (0..p)
            .into_par_iter()
            .map(|t| {
                let task = TaskId::from_index(t, &shares);
                execute(query, plan, &exec, prepared, &task, opts)
            })
            .collect()
    });

    let mut result = ResultSet {
        arity: exec.n,
        tuples: opts.tuples.then(Vec::new),
        profile: opts.profile.then(|| {
            exec.levels
                .iter()
                .map(|_| LevelProfile::default())
                .collect()
        }),
        ..ResultSet::default()
    };
    for (stats, tuples, profile) in outputs {
        result.count += stats.emitted;
        if let Some(all) = result.tuples.as_mut() {
            all.extend_from_slice(&tuples);
        }
        if let (Some(acc), Some(p)) = (result.profile.as_mut(), profile) {
            for (a, b) in acc.iter_mut().zip(&p) {
                a.merge(b);
            }
        }
        result.tasks.push(stats);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{choose_plan, PlanOptions, Statistics};
    use crate::partition::{HashFamily, ShareVector};
    use crate::Relation;

    fn triangle() -> (Query, Catalog) {
        let q = Query::parse("Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(X,Z).").unwrap();
        let e = std::sync::Arc::new(
            Relation::from_rows("E", 2, [[1u64, 2], [2, 3], [1, 3], [3, 1], [2, 1]])
                .unwrap()
                .deduplicate(),
        );
        let cat = Catalog::new()
            .with("R", e.clone())
            .with("S", e.clone())
            .with("T", e);
        (q, cat)
    }

    fn plan_for(q: &Query, cat: &Catalog, threads: u64, shares: Option<Vec<u32>>) -> Plan {
        let stats = Statistics::collect(cat);
        let mut opts = PlanOptions::new(threads);
        opts.shares = shares.map(|s| ShareVector::new(s).unwrap());
        choose_plan(q, &stats, &opts).unwrap().0
    }

    fn evaluate(q: &Query, cat: &Catalog, plan: &Plan, workers: usize) -> ResultSet {
        let hash = HashFamily::new(q.num_vars(), 7);
        let prepared = prepare(q, cat, plan, &hash, workers).unwrap();
        let opts = ExecOptions {
            workers,
            tuples: true,
            ..ExecOptions::default()
        };
        run(q, plan, &prepared, &opts).unwrap()
    }

    #[test]
    fn triangle_on_five_edges() {
        let (q, cat) = triangle();
        let plan = plan_for(&q, &cat, 1, None);
        let rs = evaluate(&q, &cat, &plan, 1);
        assert_eq!(rs.count, 3);
        assert_eq!(
            rs.sorted_tuples().unwrap(),
            vec![vec![1, 2, 3], vec![2, 1, 3], vec![2, 3, 1]]
        );
    }

    #[test]
    fn partitioned_triangle_matches() {
        let (q, cat) = triangle();
        for shares in [vec![2, 2, 2], vec![8, 1, 1], vec![1, 4, 2]] {
            let plan = plan_for(&q, &cat, 8, Some(shares));
            for workers in [1, 3] {
                let rs = evaluate(&q, &cat, &plan, workers);
                assert_eq!(rs.tasks.len(), 8);
                assert_eq!(
                    rs.sorted_tuples().unwrap(),
                    vec![vec![1, 2, 3], vec![2, 1, 3], vec![2, 3, 1]]
                );
            }
        }
    }

    #[test]
    fn task_ids_roundtrip() {
        let shares = [4, 1, 2];
        for t in 0..8 {
            let id = TaskId::from_index(t, &shares);
            assert_eq!(id.index(&shares), t);
        }
        assert_eq!(TaskId::from_index(5, &shares).0, vec![2, 0, 1]);
    }

    #[test]
    fn unit_shares_resolve_to_the_whole_relation() {
        let (q, cat) = triangle();
        let plan = plan_for(&q, &cat, 1, None);
        let hash = HashFamily::new(3, 1);
        let prepared = prepare(&q, &cat, &plan, &hash, 1).unwrap();
        for j in 0..3 {
            assert_eq!(
                resolve_partition(&q, &plan, &prepared, &TaskId(vec![0, 0, 0]), j),
                0
            );
            assert_eq!(prepared.atoms[j].partitioned.len(), 5);
        }
    }

    #[test]
    fn empty_atom_yields_nothing() {
        let (q, cat) = triangle();
        let cat = cat.with("T", Relation::new("T", 2, vec![]).unwrap());
        let plan = plan_for(&q, &cat, 4, None);
        let rs = evaluate(&q, &cat, &plan, 2);
        assert_eq!(rs.count, 0);
        assert!(rs.tuples.unwrap().is_empty());
    }

    #[test]
    fn count_mode_agrees_with_tuples() {
        let (q, cat) = triangle();
        let plan = plan_for(&q, &cat, 4, Some(vec![2, 1, 2]));
        let hash = HashFamily::new(3, 3);
        let prepared = prepare(&q, &cat, &plan, &hash, 1).unwrap();
        let rs = run(&q, &plan, &prepared, &ExecOptions::default()).unwrap();
        assert_eq!(rs.count, 3);
        assert!(rs.tuples.is_none());
        let mut csv = Vec::new();
        rs.write_task_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("task_id,steps,emitted,wall_nanos\n"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn single_task_equals_run() {
        let (q, cat) = triangle();
        let plan = plan_for(&q, &cat, 1, None);
        let hash = HashFamily::new(3, 3);
        let prepared = prepare(&q, &cat, &plan, &hash, 1).unwrap();
        let opts = ExecOptions {
            tuples: true,
            ..ExecOptions::default()
        };
        let a = run_task(&q, &plan, &prepared, &TaskId(vec![0, 0, 0]), &opts).unwrap();
        let b = run(&q, &plan, &prepared, &opts).unwrap();
        assert_eq!(a.tuples, b.tuples);
        assert_eq!(a.count, b.count);
    }
}
