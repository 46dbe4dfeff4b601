//! HyperCube partitioning of one atom's relation.
//!
//! Every query variable `X_i` gets a hash `h_i` reduced to its share `P_i`.
//! A row `(x_1..x_k)` of an atom over variables `(X_{i_1}..X_{i_k})` belongs to
//! partition `(h_{i_1}(x_1)..h_{i_k}(x_k))`. Partitions are flattened in
//! lexicographic order over the atom's attributes, counted, prefix-summed,
//! and the rows are scattered into one array of the same size as the input.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Atom, Relation, Value, VarId};
use crate::rows;

/// Per-variable shares, indexed by [`VarId`]. Each share is a power of two.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShareVector(Vec<u32>);

impl ShareVector {
    pub fn new(shares: Vec<u32>) -> Result<Self> {
        if shares.is_empty() {
            return Err(Error::Config("empty share vector".into()));
        }
        if let Some(s) = shares.iter().find(|s| !s.is_power_of_two()) {
            return Err(Error::Config(format!("share {s} is not a power of two")));
        }
        if shares.iter().map(|&s| s.trailing_zeros()).sum::<u32>() >= 32 {
            return Err(Error::Config("share product exceeds 2^31".into()));
        }
        Ok(ShareVector(shares))
    }

    pub fn ones(n: usize) -> Self {
        ShareVector(vec![1; n])
    }

    /// Shares `2^e_i` from per-variable exponents.
    pub fn from_exponents(exponents: &[u32]) -> Result<Self> {
        ShareVector::new(exponents.iter().map(|&e| 1u32 << e.min(31)).collect())
    }

    pub fn get(&self, var: VarId) -> u32 {
        self.0[var]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Product of all shares, the number of logical tasks.
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&s| s as u64).product()
    }

    /// Shares of the atom's attributes, in attribute order.
    pub fn for_atom(&self, atom: &Atom) -> Vec<u32> {
        atom.vars.iter().map(|&v| self.0[v]).collect()
    }
}

/// Maps a value of a variable to a bucket in `0..share`.
pub trait PartitionHash: Sync {
    fn bucket(&self, var: VarId, value: Value, share: u32) -> u32;
}

/// Seeded multiply-shift hashes, one per query variable.
///
/// `h_i(x) = ((a_i * x + b_i) mod 2^64) >> 32` with odd `a_i`, and the bucket
/// is `h_i(x) mod P_i`, a mask since shares are powers of two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashFamily {
    params: Vec<(u64, u64)>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl HashFamily {
    pub fn new(num_vars: usize, master_seed: u64) -> Self {
        let mut state = master_seed;
        let params = (0..num_vars)
            .map(|_| (splitmix64(&mut state) | 1, splitmix64(&mut state)))
            .collect();
        HashFamily { params }
    }

    pub fn params(&self, var: VarId) -> (u64, u64) {
        self.params[var]
    }

    pub fn hash(&self, var: VarId, value: Value) -> u32 {
        let (a, b) = self.params[var];
        (a.wrapping_mul(value).wrapping_add(b) >> 32) as u32
    }
}

impl PartitionHash for HashFamily {
    #[inline]
    fn bucket(&self, var: VarId, value: Value, share: u32) -> u32 {
        if share <= 1 {
            0
        } else {
            self.hash(var, value) & (share - 1)
        }
    }
}

/// Lexicographic strides for flattening per-attribute partition ids.
pub fn strides(atom_shares: &[u32]) -> Vec<u64> {
    let mut out = vec![1u64; atom_shares.len()];
    for r in (0..atom_shares.len().saturating_sub(1)).rev() {
        out[r] = out[r + 1] * atom_shares[r + 1] as u64;
    }
    out
}

/// The `A_j` array: one partition-id tuple per row, plus its flattened index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionIds {
    arity: usize,
    ids: Vec<u32>,
    linear: Vec<u32>,
}

impl PartitionIds {
    pub fn len(&self) -> usize {
        self.linear.len()
    }

    pub fn is_empty(&self) -> bool {
        self.linear.is_empty()
    }

    pub fn tuple(&self, row: usize) -> &[u32] {
        &self.ids[row * self.arity..(row + 1) * self.arity]
    }

    pub fn linear(&self) -> &[u32] {
        &self.linear
    }
}

const ROW_CHUNK: usize = 1 << 14;

/// Hashes every attribute of every row; data-parallel over row ranges.
pub fn compute_ids(
    relation: &Relation,
    atom: &Atom,
    shares: &ShareVector,
    hasher: &dyn PartitionHash,
) -> PartitionIds {
    let k = relation.arity();
    assert_eq!(k, atom.arity(), "atom/relation arity mismatch");
    let atom_shares = shares.for_atom(atom);
    let stride = strides(&atom_shares);
    let n = relation.len();
    let mut ids = vec![0u32; n * k];
    let mut linear = vec![0u32; n];
    ids.par_chunks_mut(ROW_CHUNK * k)
        .zip(linear.par_chunks_mut(ROW_CHUNK))
        .zip(relation.data().par_chunks(ROW_CHUNK * k))
        .for_each(|((ids, lin), data)| {
            for ((id_row, l), row) in ids
                .chunks_exact_mut(k)
                .zip(lin.iter_mut())
                .zip(data.chunks_exact(k))
            {
                let mut flat = 0u64;
                for r in 0..k {
                    let b = hasher.bucket(atom.vars[r], row[r], atom_shares[r]);
                    id_row[r] = b;
                    flat += b as u64 * stride[r];
                }
                *l = flat as u32;
            }
        });
    PartitionIds {
        arity: k,
        ids,
        linear,
    }
}

/// `B_j`: row count per flattened partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram(pub Vec<u64>);

/// `B^pref_j`: exclusive prefix sums of the histogram plus a final sentinel
/// equal to the row count, so partition `t` spans `[off[t], off[t+1])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetTable(pub Vec<u64>);

impl OffsetTable {
    pub fn num_partitions(&self) -> usize {
        self.0.len() - 1
    }

    pub fn range(&self, t: usize) -> std::ops::Range<usize> {
        self.0[t] as usize..self.0[t + 1] as usize
    }
}

/// Single-threaded count and prefix sum over the flattened partitions.
pub fn histogram_and_prefix(ids: &PartitionIds, atom_shares: &[u32]) -> (Histogram, OffsetTable) {
    let parts: usize = atom_shares.iter().map(|&s| s as usize).product();
    let mut hist = vec![0u64; parts];
    for &t in ids.linear() {
        hist[t as usize] += 1;
    }
    let mut offsets = Vec::with_capacity(parts + 1);
    let mut acc = 0u64;
    for &c in &hist {
        offsets.push(acc);
        acc += c;
    }
    offsets.push(acc);
    (Histogram(hist), OffsetTable(offsets))
}

/// `R̃_j`: the scattered rows and the offset table addressing each partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionedRelation {
    arity: usize,
    data: Vec<Value>,
    offsets: OffsetTable,
    shares: Vec<u32>,
    strides: Vec<u64>,
    /// Attribute permutation rows are sorted by; `None` until sorted.
    order: Option<Vec<usize>>,
}

impl PartitionedRelation {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn data(&self) -> &[Value] {
        &self.data
    }

    pub fn offsets(&self) -> &OffsetTable {
        &self.offsets
    }

    pub fn shares(&self) -> &[u32] {
        &self.shares
    }

    pub fn order(&self) -> Option<&[usize]> {
        self.order.as_deref()
    }

    pub fn num_partitions(&self) -> usize {
        self.offsets.num_partitions()
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Flattened index of the partition with per-attribute ids `coords`.
    pub fn partition_index(&self, coords: &[u32]) -> usize {
        coords
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c as u64 * s)
            .sum::<u64>() as usize
    }

    /// Row-major slice holding partition `t`.
    pub fn partition(&self, t: usize) -> &[Value] {
        let r = self.offsets.range(t);
        &self.data[r.start * self.arity..r.end * self.arity]
    }

    pub fn partition_len(&self, t: usize) -> usize {
        self.offsets.range(t).len()
    }
}

/// Contiguous blocks of partitions, balanced by row mass, one per worker.
fn assign_blocks(hist: &Histogram, workers: usize) -> Vec<std::ops::Range<usize>> {
    let parts = hist.0.len();
    let workers = workers.clamp(1, parts.max(1));
    let total: u64 = hist.0.iter().sum();
    let target = total.div_ceil(workers as u64).max(1);
    let mut blocks = Vec::with_capacity(workers);
    let mut start = 0;
    let mut mass = 0u64;
    for t in 0..parts {
        mass += hist.0[t];
        let remaining_parts = parts - t - 1;
        let remaining_workers = workers - blocks.len() - 1;
        if (mass >= target && remaining_workers > 0) || remaining_parts < remaining_workers {
            blocks.push(start..t + 1);
            start = t + 1;
            mass = 0;
        }
    }
    if start < parts || blocks.is_empty() {
        blocks.push(start..parts);
    }
    blocks
}

/// Copies each row into its partition. Every worker owns a contiguous block
/// of partitions (hence a disjoint output region), scans all of `A_j`, and
/// copies only its own rows, preserving input order within each partition.
pub fn scatter(
    relation: &Relation,
    ids: &PartitionIds,
    hist: &Histogram,
    offsets: &OffsetTable,
    atom_shares: &[u32],
    workers: usize,
) -> PartitionedRelation {
    let k = relation.arity();
    let mut data = vec![0 as Value; relation.data().len()];
    let blocks = assign_blocks(hist, workers);

    let mut regions: Vec<(std::ops::Range<usize>, &mut [Value])> = Vec::with_capacity(blocks.len());
    let mut rest: &mut [Value] = &mut data;
    for block in blocks {
        let lo = offsets.0[block.start] as usize;
        let hi = offsets.0[block.end] as usize;
        let (head, tail) = std::mem::take(&mut rest).split_at_mut((hi - lo) * k);
        regions.push((block, head));
        rest = tail;
    }

    regions.into_par_iter().for_each(|(block, out)| {
        let base = offsets.0[block.start];
        let mut cursors: Vec<usize> = offsets.0[block.clone()]
            .iter()
            .map(|&o| (o - base) as usize)
            .collect();
        for (row, &t) in relation.data().chunks_exact(k).zip(ids.linear()) {
            let t = t as usize;
            if block.contains(&t) {
                let c = &mut cursors[t - block.start];
                out[*c * k..(*c + 1) * k].copy_from_slice(row);
                *c += 1;
            }
        }
    });

    PartitionedRelation {
        arity: k,
        data,
        offsets: offsets.clone(),
        shares: atom_shares.to_vec(),
        strides: strides(atom_shares),
        order: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortStrategy {
    /// Each partition sorted on its own, partitions processed in parallel.
    PerPartition,
    /// One parallel sort over the whole array keyed by (partition, row).
    Joint,
}

impl SortStrategy {
    /// Per-partition sorting when there are at least as many partitions as
    /// workers; a joint keyed sort otherwise.
    pub fn choose(partitions: usize, workers: usize) -> Self {
        if partitions >= workers {
            SortStrategy::PerPartition
        } else {
            SortStrategy::Joint
        }
    }
}

pub fn sort_partitions(
    pr: PartitionedRelation,
    order: &[usize],
    workers: usize,
) -> PartitionedRelation {
    let strategy = SortStrategy::choose(pr.num_partitions(), workers);
    sort_partitions_with(pr, order, strategy)
}

/// Sorts every partition lexicographically on the attribute permutation
/// `order` (`order[0]` is compared first).
pub fn sort_partitions_with(
    mut pr: PartitionedRelation,
    order: &[usize],
    strategy: SortStrategy,
) -> PartitionedRelation {
    let k = pr.arity;
    assert_eq!(order.len(), k, "order must permute all attributes");
    match strategy {
        SortStrategy::PerPartition => {
            let mut slices: Vec<&mut [Value]> = Vec::with_capacity(pr.num_partitions());
            let mut rest: &mut [Value] = &mut pr.data;
            for t in 0..pr.offsets.num_partitions() {
                let len = pr.offsets.range(t).len() * k;
                let (head, tail) = std::mem::take(&mut rest).split_at_mut(len);
                slices.push(head);
                rest = tail;
            }
            slices
                .into_par_iter()
                .filter(|s| s.len() > k)
                .for_each(|s| rows::sort_rows(s, k, order));
        }
        SortStrategy::Joint => {
            let mut keys = vec![0u32; pr.len()];
            for t in 0..pr.offsets.num_partitions() {
                keys[pr.offsets.range(t)].fill(t as u32);
            }
            rows::par_sort_rows_keyed(&mut keys, &mut pr.data, k, order);
        }
    }
    pr.order = Some(order.to_vec());
    pr
}

/// The whole pipeline for one atom: ids, histogram, scatter, sort.
pub fn partition_atom(
    relation: &Relation,
    atom: &Atom,
    shares: &ShareVector,
    hasher: &dyn PartitionHash,
    order: &[usize],
    workers: usize,
) -> PartitionedRelation {
    let atom_shares = shares.for_atom(atom);
    let ids = compute_ids(relation, atom, shares, hasher);
    let (hist, offsets) = histogram_and_prefix(&ids, &atom_shares);
    let scattered = scatter(relation, &ids, &hist, &offsets, &atom_shares, workers);
    sort_partitions(scattered, order, workers)
}
