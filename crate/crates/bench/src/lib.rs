//! Fixtures shared by the criterion benches.

use hyperjoin_core::model::{Catalog, Query, Relation, Value};
use hyperjoin_core::{datagen, queries};

/// The triangle query with every atom over one graph.
pub fn triangle(graph: &Relation) -> (Query, Catalog) {
    let q = Query::parse(queries::TRIANGLE).expect("built-in query parses");
    let cat = q
        .relation_names()
        .into_iter()
        .fold(Catalog::new(), |c, n| c.with(n, graph.clone().with_name(n)));
    (q, cat)
}

pub fn uniform_triangle(nodes: u64, edges: usize) -> (Query, Catalog) {
    triangle(&datagen::random_graph(nodes, edges, 7))
}

pub fn zipf_triangle(nodes: u64, edges: usize) -> (Query, Catalog) {
    triangle(&datagen::zipf_graph(nodes, edges, 1.2, 7))
}

/// A strictly increasing run of `len` values with gaps of `1..=gap`.
pub fn sorted_view(len: usize, gap: u64, seed: u64) -> Vec<Value> {
    let mut state = seed | 1;
    let mut x = 0;
    (0..len)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            x += 1 + state % gap;
            x
        })
        .collect()
}
