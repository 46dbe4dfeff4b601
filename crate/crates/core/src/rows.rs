//! Sorting and deduplication of flat row-major buffers.
//!
//! Rows are compared lexicographically on the attribute permutation `perm`:
//! attribute `perm[0]` first, then `perm[1]`, and so on. Fixed small arities
//! are sorted as `[Value; K]` arrays; wider rows fall back to boxed slices.

use rayon::prelude::*;

use crate::model::Value;

fn gather<const K: usize>(data: &[Value], perm: &[usize]) -> Vec<[Value; K]> {
    data.chunks_exact(K)
        .map(|row| std::array::from_fn(|i| row[perm[i]]))
        .collect()
}

fn scatter_back<const K: usize>(keys: &[[Value; K]], data: &mut [Value], perm: &[usize]) {
    for (row, key) in data.chunks_exact_mut(K).zip(keys) {
        for i in 0..K {
            row[perm[i]] = key[i];
        }
    }
}

fn sort_fixed<const K: usize>(data: &mut [Value], perm: &[usize], parallel: bool) {
    let mut keys = gather::<K>(data, perm);
    if parallel {
        keys.par_sort_unstable();
    } else {
        keys.sort_unstable();
    }
    scatter_back(&keys, data, perm);
}

fn sort_wide(data: &mut [Value], arity: usize, perm: &[usize], parallel: bool) {
    let mut keys: Vec<Box<[Value]>> = data
        .chunks_exact(arity)
        .map(|row| perm.iter().map(|&p| row[p]).collect())
        .collect();
    if parallel {
        keys.par_sort_unstable();
    } else {
        keys.sort_unstable();
    }
    for (row, key) in data.chunks_exact_mut(arity).zip(&keys) {
        for (i, &p) in perm.iter().enumerate() {
            row[p] = key[i];
        }
    }
}

fn sort_impl(data: &mut [Value], arity: usize, perm: &[usize], parallel: bool) {
    debug_assert_eq!(perm.len(), arity);
    match arity {
        1 => sort_fixed::<1>(data, perm, parallel),
        2 => sort_fixed::<2>(data, perm, parallel),
        3 => sort_fixed::<3>(data, perm, parallel),
        4 => sort_fixed::<4>(data, perm, parallel),
        5 => sort_fixed::<5>(data, perm, parallel),
        6 => sort_fixed::<6>(data, perm, parallel),
        _ => sort_wide(data, arity, perm, parallel),
    }
}

pub fn sort_rows(data: &mut [Value], arity: usize, perm: &[usize]) {
    sort_impl(data, arity, perm, false)
}

pub fn par_sort_rows(data: &mut [Value], arity: usize, perm: &[usize]) {
    sort_impl(data, arity, perm, true)
}

fn keyed_fixed<const K: usize>(keys: &mut [u32], data: &mut [Value], perm: &[usize]) {
    let mut pairs: Vec<(u32, [Value; K])> = keys
        .iter()
        .zip(data.chunks_exact(K))
        .map(|(&k, row)| (k, std::array::from_fn(|i| row[perm[i]])))
        .collect();
    pairs.par_sort_unstable();
    for ((k, row), (pk, pr)) in keys.iter_mut().zip(data.chunks_exact_mut(K)).zip(&pairs) {
        *k = *pk;
        for i in 0..K {
            row[perm[i]] = pr[i];
        }
    }
}

fn keyed_wide(keys: &mut [u32], data: &mut [Value], arity: usize, perm: &[usize]) {
    let mut pairs: Vec<(u32, Box<[Value]>)> = keys
        .iter()
        .zip(data.chunks_exact(arity))
        .map(|(&k, row)| (k, perm.iter().map(|&p| row[p]).collect()))
        .collect();
    pairs.par_sort_unstable();
    for ((k, row), (pk, pr)) in keys
        .iter_mut()
        .zip(data.chunks_exact_mut(arity))
        .zip(&pairs)
    {
        *k = *pk;
        for (i, &p) in perm.iter().enumerate() {
            row[p] = pr[i];
        }
    }
}

/// Sorts `keys` and `data` together by `(key, permuted row)` with one parallel
/// sort, so rows sharing a key stay contiguous.
pub fn par_sort_rows_keyed(keys: &mut [u32], data: &mut [Value], arity: usize, perm: &[usize]) {
    debug_assert_eq!(keys.len() * arity, data.len());
    match arity {
        1 => keyed_fixed::<1>(keys, data, perm),
        2 => keyed_fixed::<2>(keys, data, perm),
        3 => keyed_fixed::<3>(keys, data, perm),
        4 => keyed_fixed::<4>(keys, data, perm),
        _ => keyed_wide(keys, data, arity, perm),
    }
}

/// Removes adjacent duplicate rows from a sorted buffer.
pub fn dedup_sorted_rows(data: &mut Vec<Value>, arity: usize) {
    let n = data.len() / arity;
    if n < 2 {
        return;
    }
    let mut write = 1;
    for read in 1..n {
        let (prev, cur) = (
            (write - 1) * arity..write * arity,
            read * arity..(read + 1) * arity,
        );
        if data[prev] != data[cur.clone()] {
            if write != read {
                data.copy_within(cur, write * arity);
            }
            write += 1;
        }
    }
    data.truncate(write * arity);
}

/// Lexicographic comparison of two rows on `perm`.
pub fn cmp_rows(a: &[Value], b: &[Value], perm: &[usize]) -> std::cmp::Ordering {
    for &p in perm {
        match a[p].cmp(&b[p]) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}
