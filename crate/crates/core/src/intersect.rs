//! Lower-bound search kernels and the min/max-cursor multiway intersection.
//!
//! All views are strictly increasing. Cursors only move forward, so every
//! search starts at the current cursor and pays for the gap since the last
//! match rather than for the whole view.

use serde::{Deserialize, Serialize};

use crate::model::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchStrategy {
    Linear,
    Quadratic,
    Exponential,
}

impl SearchStrategy {
    pub const ALL: [SearchStrategy; 3] = [
        SearchStrategy::Linear,
        SearchStrategy::Quadratic,
        SearchStrategy::Exponential,
    ];
}

/// Size thresholds choosing a strategy from the remaining view length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub linear_max: usize,
    pub quadratic_max: usize,
    /// Quadratic step, in values: one 64-byte line of `u64`s.
    pub stride: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            linear_max: 32,
            quadratic_max: 1024,
            stride: DEFAULT_STRIDE,
        }
    }
}

impl SearchConfig {
    #[inline]
    pub fn select(&self, remaining: usize) -> SearchStrategy {
        if remaining <= self.linear_max {
            SearchStrategy::Linear
        } else if remaining <= self.quadratic_max {
            SearchStrategy::Quadratic
        } else {
            SearchStrategy::Exponential
        }
    }
}

/// Comparator-step counter. Compiles to nothing without the `instrument`
/// feature.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Steps {
    #[cfg(feature = "instrument")]
    count: u64,
}

impl Steps {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline(always)]
    pub fn add(&mut self, _n: u64) {
        #[cfg(feature = "instrument")]
        {
            self.count += _n;
        }
    }

    #[inline]
    pub fn get(&self) -> u64 {
        #[cfg(feature = "instrument")]
        {
            self.count
        }
        #[cfg(not(feature = "instrument"))]
        {
            0
        }
    }

    pub fn merge(&mut self, other: Steps) {
        self.add(other.get());
    }
}

/// Whether step counting is compiled in.
pub const INSTRUMENTED: bool = cfg!(feature = "instrument");

/// Smallest `p` with `view[p] >= x`, or `view.len()`.
pub fn search(view: &[Value], x: Value, strategy: SearchStrategy) -> usize {
    search_from(view, 0, x, strategy, &mut Steps::new())
}

/// Smallest `p >= from` with `view[p] >= x`, or `view.len()`. Elements before
/// `from` are assumed to be below `x`.
#[inline]
pub fn search_from(
    view: &[Value],
    from: usize,
    x: Value,
    strategy: SearchStrategy,
    steps: &mut Steps,
) -> usize {
    match strategy {
        SearchStrategy::Linear => linear(view, from, x, steps),
        SearchStrategy::Quadratic => quadratic(view, from, x, DEFAULT_STRIDE, steps),
        SearchStrategy::Exponential => exponential(view, from, x, steps),
    }
}

const DEFAULT_STRIDE: usize = 8;

/// Strategy picked by `config` from the remaining length, with its stride.
#[inline]
pub fn search_adaptive(
    view: &[Value],
    from: usize,
    x: Value,
    config: &SearchConfig,
    steps: &mut Steps,
) -> usize {
    match config.select(view.len().saturating_sub(from)) {
        SearchStrategy::Linear => linear(view, from, x, steps),
        SearchStrategy::Quadratic => quadratic(view, from, x, config.stride.max(1), steps),
        SearchStrategy::Exponential => exponential(view, from, x, steps),
    }
}

#[inline]
fn linear(view: &[Value], mut p: usize, x: Value, steps: &mut Steps) -> usize {
    while p < view.len() {
        steps.add(1);
        if view[p] >= x {
            break;
        }
        p += 1;
    }
    p
}

/// Skips whole strides while the stride's last element is below `x`, then
/// finishes with a linear scan inside the stride.
#[inline]
fn quadratic(view: &[Value], mut p: usize, x: Value, stride: usize, steps: &mut Steps) -> usize {
    while p + stride <= view.len() {
        steps.add(1);
        if view[p + stride - 1] >= x {
            break;
        }
        p += stride;
    }
    linear(view, p, x, steps)
}

/// Galloping: probe `from + 1, from + 2, from + 4, ...` until overshooting,
/// then binary search the last doubling interval.
#[inline]
fn exponential(view: &[Value], from: usize, x: Value, steps: &mut Steps) -> usize {
    let n = view.len();
    if from >= n {
        return n;
    }
    steps.add(1);
    if view[from] >= x {
        return from;
    }
    // Invariant: view[lo] < x.
    let mut lo = from;
    let mut bound = 1;
    let hi = loop {
        let probe = from + bound;
        if probe >= n {
            break n;
        }
        steps.add(1);
        if view[probe] >= x {
            break probe;
        }
        lo = probe;
        bound <<= 1;
    };
    // Answer lies in (lo, hi].
    let (mut lo, mut hi) = (lo + 1, hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        steps.add(1);
        if view[mid] < x {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Multiway intersection over sorted views using one cursor per view.
///
/// While the minimum and maximum cursor values differ, the cursor holding
/// the minimum is advanced to `search(view, max)`. When they agree the common
/// value is emitted and every cursor steps forward.
pub struct Multiway<'a> {
    views: &'a [&'a [Value]],
    cursors: Vec<usize>,
    config: SearchConfig,
    steps: Steps,
    state: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Fresh,
    Emitted,
    Done,
}

impl<'a> Multiway<'a> {
    pub fn new(views: &'a [&'a [Value]]) -> Self {
        Self::with_config(views, SearchConfig::default())
    }

    pub fn with_config(views: &'a [&'a [Value]], config: SearchConfig) -> Self {
        assert!(
            !views.is_empty(),
            "multiway intersection needs at least one view"
        );
        let done = views.iter().any(|v| v.is_empty());
        Multiway {
            views,
            cursors: vec![0; views.len()],
            config,
            steps: Steps::new(),
            state: if done { State::Done } else { State::Fresh },
        }
    }

    /// Positions of the last emitted value in each view.
    pub fn positions(&self) -> &[usize] {
        &self.cursors
    }

    pub fn steps(&self) -> Steps {
        self.steps
    }

    pub fn next_value(&mut self) -> Option<Value> {
        match self.state {
            State::Done => return None,
            State::Emitted => {
                for (c, v) in self.cursors.iter_mut().zip(self.views) {
                    *c += 1;
                    if *c == v.len() {
                        self.state = State::Done;
                    }
                }
                if self.state == State::Done {
                    return None;
                }
            }
            State::Fresh => {}
        }
        loop {
            let mut min_j = 0;
            let mut min = self.views[0][self.cursors[0]];
            let mut max = min;
            for j in 1..self.views.len() {
                let v = self.views[j][self.cursors[j]];
                if v < min {
                    min = v;
                    min_j = j;
                }
                if v > max {
                    max = v;
                }
            }
            self.steps.add(1);
            if min == max {
                self.state = State::Emitted;
                return Some(min);
            }
            let view = self.views[min_j];
            let from = self.cursors[min_j];
            let c = search_adaptive(view, from, max, &self.config, &mut self.steps);
            if c == view.len() {
                self.state = State::Done;
                return None;
            }
            self.cursors[min_j] = c;
        }
    }
}

impl Iterator for Multiway<'_> {
    type Item = (Value, Vec<usize>);

    fn next(&mut self) -> Option<Self::Item> {
        self.next_value().map(|v| (v, self.cursors.clone()))
    }
}

/// Appends the intersection of `views` to `values` and, per match, the
/// position in every view to `positions` (`views.len()` entries per value).
/// Returns the number of matches.
pub fn intersect_into(
    views: &[&[Value]],
    config: SearchConfig,
    values: &mut Vec<Value>,
    positions: &mut Vec<u32>,
    steps: &mut Steps,
) -> usize {
    if views.iter().any(|v| v.is_empty()) {
        return 0;
    }
    if views.len() == 1 {
        let v = views[0];
        values.extend_from_slice(v);
        positions.extend(0..v.len() as u32);
        steps.add(v.len() as u64);
        return v.len();
    }
    let mut mw = Multiway::with_config(views, config);
    let mut n = 0;
    while let Some(v) = mw.next_value() {
        values.push(v);
        positions.extend(mw.positions().iter().map(|&p| p as u32));
        n += 1;
    }
    steps.merge(mw.steps());
    n
}

/// Size of the intersection without materializing it.
pub fn intersect_count(views: &[&[Value]], config: SearchConfig, steps: &mut Steps) -> usize {
    if views.iter().any(|v| v.is_empty()) {
        return 0;
    }
    if views.len() == 1 {
        steps.add(1);
        return views[0].len();
    }
    let mut mw = Multiway::with_config(views, config);
    let mut n = 0;
    while mw.next_value().is_some() {
        n += 1;
    }
    steps.merge(mw.steps());
    n
}
