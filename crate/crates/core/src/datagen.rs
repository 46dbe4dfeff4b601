//! Seeded synthetic relations for tests, benchmarks and examples.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::model::{Relation, Value};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn collect_distinct(
    name: &str,
    arity: usize,
    target: usize,
    mut draw: impl FnMut() -> Vec<Value>,
) -> Relation {
    let mut seen: HashSet<Vec<Value>> = HashSet::with_capacity(target);
    let mut data = Vec::with_capacity(target * arity);
    let mut misses = 0usize;
    while seen.len() < target && misses < 64 * target + 1024 {
        let row = draw();
        if seen.insert(row.clone()) {
            data.extend_from_slice(&row);
        } else {
            misses += 1;
        }
    }
    Relation::new(name, arity, data)
        .expect("rows have the declared arity")
        .deduplicate()
}

/// `edges` distinct directed edges without self-loops, endpoints uniform
/// over `0..nodes`.
pub fn random_graph(nodes: u64, edges: usize, seed: u64) -> Relation {
    assert!(nodes >= 2);
    let edges = edges.min((nodes * (nodes - 1)) as usize);
    let mut r = rng(seed);
    collect_distinct("E", 2, edges, || loop {
        let (a, b) = (r.gen_range(0..nodes), r.gen_range(0..nodes));
        if a != b {
            return vec![a, b];
        }
    })
}

/// Directed graph whose endpoints follow a Zipf law with the given exponent
/// over `nodes` ranks. Ranks are mapped to node ids through a seeded random
/// permutation so that popular nodes are spread over the id space.
pub fn zipf_graph(nodes: u64, edges: usize, exponent: f64, seed: u64) -> Relation {
    assert!(nodes >= 2);
    let mut r = rng(seed);
    let zipf = Zipf::new(nodes, exponent).expect("valid zipf parameters");
    let mut ids: Vec<Value> = (0..nodes).collect();
    ids.shuffle(&mut r);
    collect_distinct("E", 2, edges, || loop {
        let a = ids[zipf.sample(&mut r) as usize - 1];
        let b = ids[zipf.sample(&mut r) as usize - 1];
        if a != b {
            return vec![a, b];
        }
    })
}

/// `rows` distinct rows of the given arity over `0..domain`.
pub fn random_relation(name: &str, arity: usize, rows: usize, domain: u64, seed: u64) -> Relation {
    let capacity = (domain as f64).powi(arity as i32);
    let rows = if capacity < rows as f64 {
        capacity as usize
    } else {
        rows
    };
    let mut r = rng(seed);
    collect_distinct(name, arity, rows, || {
        (0..arity).map(|_| r.gen_range(0..domain)).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_graph_shape() {
        let g = random_graph(200, 2000, 1);
        assert_eq!(g.len(), 2000);
        assert!(g.is_deduplicated());
        assert!(g.rows().all(|r| r[0] != r[1] && r[0] < 200 && r[1] < 200));
        assert_eq!(g.data(), random_graph(200, 2000, 1).data());
        assert_ne!(g.data(), random_graph(200, 2000, 2).data());
    }

    #[test]
    fn zipf_graph_is_skewed() {
        let g = zipf_graph(10_000, 20_000, 1.2, 3);
        assert_eq!(g.len(), 20_000);
        let mut deg = std::collections::HashMap::<u64, usize>::new();
        for r in g.rows() {
            *deg.entry(r[0]).or_default() += 1;
        }
        let max = *deg.values().max().unwrap();
        assert!(max > 200, "max out-degree {max}");
    }

    #[test]
    fn random_relation_shape() {
        let r = random_relation("R", 3, 1000, 20, 9);
        assert_eq!(r.len(), 1000);
        assert!(r.data().iter().all(|&v| v < 20));
        assert_eq!(random_relation("R", 2, 100, 5, 0).len(), 25);
    }
}
