//! Compressed-column (CoCo) trie index over one sorted partition.
//!
//! Level `r` of the trie is a single sorted value array `V_r` plus an offset
//! array `O_r` of length `|V_r| + 1`: the children of node `p` at level `r`
//! are `V_{r+1}[O_r[p]..O_r[p+1]]`. The last level's offsets point into the
//! row array and may be omitted when the rows are known to be distinct.

use crate::error::{Error, Result};
use crate::model::Value;

/// Offsets are stored as `u32` when the partition is small enough.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Offsets {
    Narrow(Vec<u32>),
    Wide(Vec<u64>),
}

impl Offsets {
    fn with_capacity(cap: usize, wide: bool) -> Self {
        if wide {
            Offsets::Wide(Vec::with_capacity(cap))
        } else {
            Offsets::Narrow(Vec::with_capacity(cap))
        }
    }

    fn push(&mut self, v: usize) {
        match self {
            Offsets::Narrow(o) => o.push(v as u32),
            Offsets::Wide(o) => o.push(v as u64),
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        match self {
            Offsets::Narrow(o) => o[i] as usize,
            Offsets::Wide(o) => o[i] as usize,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Offsets::Narrow(o) => o.len(),
            Offsets::Wide(o) => o.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_vec(&self) -> Vec<usize> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    values: Vec<Value>,
    offsets: Option<Offsets>,
}

impl Level {
    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn offsets(&self) -> Option<&Offsets> {
        self.offsets.as_ref()
    }
}

/// Half-open range `[begin, end)` of positions at `level`. The level equal
/// to the arity denotes the row array itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelRange {
    pub level: usize,
    pub begin: usize,
    pub end: usize,
}

impl LevelRange {
    pub fn len(&self) -> usize {
        self.end - self.begin
    }

    pub fn is_empty(&self) -> bool {
        self.begin == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocoIndex {
    levels: Vec<Level>,
    rows: usize,
}

impl CocoIndex {
    /// An index with `arity` empty levels.
    pub fn empty(arity: usize) -> Self {
        CocoIndex {
            levels: (0..arity)
                .map(|_| Level {
                    values: Vec::new(),
                    offsets: Some(Offsets::Narrow(vec![0])),
                })
                .collect(),
            rows: 0,
        }
    }

    /// Builds the trie over rows sorted in attribute order.
    pub fn build(rows: &[Value], arity: usize, omit_last_offsets: bool) -> Result<Self> {
        let order: Vec<usize> = (0..arity).collect();
        Self::build_ordered(rows, arity, &order, omit_last_offsets)
    }

    /// Builds the trie with level `l` holding attribute `order[l]`; the rows
    /// must be sorted lexicographically on that permutation.
    ///
    /// The first pass counts the distinct `r`-prefixes `l_r` (and checks the
    /// sort order); the second pass compares adjacent rows, finds the first
    /// differing level `e`, and appends one entry to every level `>= e`.
    pub fn build_ordered(
        rows: &[Value],
        arity: usize,
        order: &[usize],
        omit_last_offsets: bool,
    ) -> Result<Self> {
        if arity == 0 || order.len() != arity {
            return Err(Error::Construction(format!(
                "order of length {} for arity {arity}",
                order.len()
            )));
        }
        if !rows.len().is_multiple_of(arity) {
            return Err(Error::Construction("ragged row buffer".into()));
        }
        let n = rows.len() / arity;
        if n == 0 {
            return Ok(Self::empty(arity));
        }
        let row = |i: usize| &rows[i * arity..(i + 1) * arity];

        // Pass 1.
        let mut counts = vec![1usize; arity];
        for i in 1..n {
            let (prev, cur) = (row(i - 1), row(i));
            match first_difference(prev, cur, order) {
                None => {}
                Some(e) => {
                    if cur[order[e]] < prev[order[e]] {
                        return Err(Error::Construction(format!(
                            "rows {} and {i} are out of order at level {e}",
                            i - 1
                        )));
                    }
                    for c in &mut counts[e..] {
                        *c += 1;
                    }
                }
            }
        }

        // Pass 2.
        let wide = n > u32::MAX as usize || counts.iter().any(|&c| c > u32::MAX as usize);
        let mut levels: Vec<Level> = counts
            .iter()
            .enumerate()
            .map(|(r, &l)| Level {
                values: Vec::with_capacity(l),
                offsets: if r + 1 == arity && omit_last_offsets {
                    None
                } else {
                    Some(Offsets::with_capacity(l + 1, wide))
                },
            })
            .collect();
        let push_from = |levels: &mut Vec<Level>, e: usize, i: usize, cur: &[Value]| {
            for r in e..arity {
                let child = if r + 1 < arity {
                    levels[r + 1].values.len()
                } else {
                    i
                };
                let level = &mut levels[r];
                level.values.push(cur[order[r]]);
                if let Some(o) = level.offsets.as_mut() {
                    o.push(child);
                }
            }
        };
        push_from(&mut levels, 0, 0, row(0));
        for i in 1..n {
            if let Some(e) = first_difference(row(i - 1), row(i), order) {
                push_from(&mut levels, e, i, row(i));
            }
        }
        for r in 0..arity {
            let end = if r + 1 < arity {
                levels[r + 1].values.len()
            } else {
                n
            };
            if let Some(o) = levels[r].offsets.as_mut() {
                o.push(end);
            }
        }
        debug_assert!(levels
            .iter()
            .zip(&counts)
            .all(|(l, &c)| l.values.len() == c));
        Ok(CocoIndex { levels, rows: n })
    }

    pub fn arity(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    /// Number of source rows, duplicates included.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn level(&self, r: usize) -> &Level {
        &self.levels[r]
    }

    #[inline]
    pub fn values(&self, r: usize) -> &[Value] {
        &self.levels[r].values
    }

    /// Range of the root level.
    pub fn root(&self) -> LevelRange {
        LevelRange {
            level: 0,
            begin: 0,
            end: self.levels[0].values.len(),
        }
    }

    /// Children of node `p` at level `r`: `[O_r[p], O_r[p+1])` at level `r+1`.
    pub fn child_range(&self, r: usize, p: usize) -> Result<LevelRange> {
        let level = self
            .levels
            .get(r)
            .ok_or_else(|| Error::Contract(format!("level {r} out of range")))?;
        if p >= level.values.len() {
            return Err(Error::Contract(format!(
                "position {p} past level {r} of length {}",
                level.values.len()
            )));
        }
        let offsets = level
            .offsets
            .as_ref()
            .ok_or_else(|| Error::Contract(format!("level {r} was built without offsets")))?;
        Ok(LevelRange {
            level: r + 1,
            begin: offsets.get(p),
            end: offsets.get(p + 1),
        })
    }

    /// Unchecked child bounds for the join loop; `r` must be below the last level.
    #[inline]
    pub fn children(&self, r: usize, p: usize) -> (usize, usize) {
        let o = self.levels[r]
            .offsets
            .as_ref()
            .expect("inner levels always carry offsets");
        (o.get(p), o.get(p + 1))
    }

    /// Depth-first expansion; rows come out in level order.
    pub fn enumerate(&self) -> Vec<Vec<Value>> {
        let mut out = Vec::new();
        if self.is_empty() {
            return out;
        }
        let mut prefix = Vec::with_capacity(self.arity());
        self.expand(0, 0, self.levels[0].values.len(), &mut prefix, &mut out);
        out
    }

    fn expand(
        &self,
        r: usize,
        begin: usize,
        end: usize,
        prefix: &mut Vec<Value>,
        out: &mut Vec<Vec<Value>>,
    ) {
        for p in begin..end {
            prefix.push(self.levels[r].values[p]);
            if r + 1 == self.arity() {
                out.push(prefix.clone());
            } else {
                let (b, e) = self.children(r, p);
                self.expand(r + 1, b, e, prefix, out);
            }
            prefix.pop();
        }
    }
}

fn first_difference(a: &[Value], b: &[Value], order: &[usize]) -> Option<usize> {
    order.iter().position(|&p| a[p] != b[p])
}
