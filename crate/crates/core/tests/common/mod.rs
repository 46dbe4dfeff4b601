#![allow(dead_code)]

use std::collections::BTreeSet;

use hyperjoin_core::datagen;
use hyperjoin_core::model::{Atom, Catalog, Query, Relation, Value, VarId};
use hyperjoin_core::queries::NamedQuery;
use hyperjoin_core::ShareVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One relation per distinct name in the body. Graph atoms get 2000 edges
/// over 200 nodes, ternary atoms 1000 rows over a 20-value domain.
pub fn random_instance(q: &NamedQuery, seed: u64) -> Catalog {
    let query = q.parse();
    let mut cat = Catalog::new();
    for (i, name) in query.relation_names().into_iter().enumerate() {
        let s = seed * 1_000 + i as u64;
        let rel = if q.ternary {
            datagen::random_relation(name, 3, 1000, 20, s)
        } else {
            datagen::random_graph(200, 2000, s).with_name(name)
        };
        cat.insert(name, rel);
    }
    cat
}

/// Every atom over the same graph.
pub fn self_join(query: &Query, graph: &Relation) -> Catalog {
    let mut cat = Catalog::new();
    for name in query.relation_names() {
        cat.insert(name, graph.clone().with_name(name));
    }
    cat
}

/// Three distinct share vectors with product `2^log_p` (one when `log_p` is
/// zero): everything on the first variable, everything on the last, and the
/// exponents dealt round-robin.
pub fn share_vectors(n: usize, log_p: u32) -> Vec<ShareVector> {
    if log_p == 0 {
        return vec![ShareVector::ones(n)];
    }
    let mut first = vec![0u32; n];
    first[0] = log_p;
    let mut last = vec![0u32; n];
    last[n - 1] = log_p;
    let mut spread = vec![0u32; n];
    for k in 0..log_p as usize {
        spread[k % n] += 1;
    }
    let mut out: Vec<ShareVector> = Vec::new();
    for e in [first, last, spread] {
        let sv = ShareVector::from_exponents(&e).unwrap();
        if !out.contains(&sv) {
            out.push(sv);
        }
    }
    out
}

/// The query restricted to `prefix`: every atom touching the prefix is
/// projected onto its prefix attributes.
pub fn prefix_query(query: &Query, catalog: &Catalog, prefix: &[VarId]) -> (Query, Catalog) {
    let names: Vec<String> = prefix
        .iter()
        .map(|&v| query.var_name(v).to_string())
        .collect();
    let local = |v: VarId| prefix.iter().position(|&p| p == v);
    let mut atoms = Vec::new();
    let mut cat = Catalog::new();
    for (j, atom) in query.atoms().iter().enumerate() {
        let keep: Vec<usize> = (0..atom.arity())
            .filter(|&p| local(atom.vars[p]).is_some())
            .collect();
        if keep.is_empty() {
            continue;
        }
        let name = format!("P{j}");
        let rel = catalog.relation(&atom.relation).unwrap();
        let data: Vec<Value> = rel
            .rows()
            .flat_map(|r| keep.iter().map(move |&p| r[p]))
            .collect();
        cat.insert(
            name.clone(),
            Relation::new(name.clone(), keep.len(), data)
                .unwrap()
                .deduplicate(),
        );
        atoms.push(Atom {
            relation: name,
            vars: keep.iter().map(|&p| local(atom.vars[p]).unwrap()).collect(),
        });
    }
    (Query::new("P", names, atoms).unwrap(), cat)
}

/// A random query over `n` variables with atoms of arity 1 to 3, each over
/// its own small random relation. Every variable is covered.
pub fn random_query(rng: &mut ChaCha8Rng, n: usize) -> (Query, Catalog) {
    let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut atoms: Vec<Atom> = Vec::new();
    let mut covered = BTreeSet::new();
    let extra = rng.gen_range(0..3);
    while covered.len() < n || atoms.len() < n.div_ceil(2) + extra {
        let arity = rng.gen_range(1..=n.min(3));
        let mut vars: Vec<VarId> = (0..n).collect();
        vars.shuffle(rng);
        vars.truncate(arity);
        covered.extend(vars.iter().copied());
        atoms.push(Atom {
            relation: format!("R{}", atoms.len()),
            vars,
        });
    }
    let mut cat = Catalog::new();
    for a in &atoms {
        let rows = rng.gen_range(0..40);
        let domain = rng.gen_range(2..8);
        let rel = datagen::random_relation(&a.relation, a.arity(), rows, domain, rng.gen());
        cat.insert(a.relation.clone(), rel);
    }
    (Query::new("Q", names, atoms).unwrap(), cat)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
