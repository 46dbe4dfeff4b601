//! Relation statistics: cardinalities, per-attribute distinct counts, and
//! lazily memoized projection sizes and conditional maximum degrees.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::model::{Catalog, Relation, Value};

/// Bitmask over a relation's attribute positions.
pub type AttrMask = u64;

pub fn mask_of(attrs: impl IntoIterator<Item = usize>) -> AttrMask {
    attrs.into_iter().fold(0, |m, a| m | (1 << a))
}

fn attrs_of(mask: AttrMask) -> Vec<usize> {
    (0..64).filter(|a| mask & (1 << a) != 0).collect()
}

#[derive(Debug)]
pub struct RelationStats {
    relation: Arc<Relation>,
    cardinality: u64,
    distinct: Vec<u64>,
    projections: Mutex<HashMap<AttrMask, u64>>,
    degrees: Mutex<HashMap<(usize, AttrMask), u64>>,
}

impl RelationStats {
    pub fn new(relation: Arc<Relation>) -> Self {
        let arity = relation.arity();
        let mut stats = RelationStats {
            cardinality: relation.len() as u64,
            distinct: Vec::new(),
            projections: Mutex::new(HashMap::new()),
            degrees: Mutex::new(HashMap::new()),
            relation,
        };
        stats.distinct = (0..arity)
            .map(|a| stats.projection_size(mask_of([a])))
            .collect();
        stats
    }

    pub fn cardinality(&self) -> u64 {
        self.cardinality
    }

    pub fn arity(&self) -> usize {
        self.distinct.len()
    }

    /// `|R.X|` for the attribute at position `attr`.
    pub fn distinct(&self, attr: usize) -> u64 {
        self.distinct[attr]
    }

    /// Projected rows sorted and deduplicated, attributes in mask order.
    fn projected(&self, attrs: &[usize]) -> Vec<Vec<Value>> {
        let mut rows: Vec<Vec<Value>> = self
            .relation
            .rows()
            .map(|r| attrs.iter().map(|&a| r[a]).collect())
            .collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    }

    /// Number of distinct tuples in the projection on `mask`. The empty
    /// projection has one tuple when the relation is nonempty.
    pub fn projection_size(&self, mask: AttrMask) -> u64 {
        if self.cardinality == 0 {
            return 0;
        }
        if mask == 0 {
            return 1;
        }
        if let Some(&v) = self.projections.lock().unwrap().get(&mask) {
            return v;
        }
        let v = self.projected(&attrs_of(mask)).len() as u64;
        self.projections.lock().unwrap().insert(mask, v);
        v
    }

    /// `maxdeg(R, attr | bound)`: the largest number of distinct `attr` values
    /// sharing one assignment of the `bound` attributes.
    pub fn max_degree(&self, attr: usize, bound: AttrMask) -> u64 {
        let bound = bound & !(1 << attr);
        if self.cardinality == 0 {
            return 0;
        }
        if bound == 0 {
            return self.distinct[attr];
        }
        if let Some(&v) = self.degrees.lock().unwrap().get(&(attr, bound)) {
            return v;
        }
        let mut attrs = attrs_of(bound);
        let key_len = attrs.len();
        attrs.push(attr);
        let rows = self.projected(&attrs);
        let mut best = 0u64;
        let mut run = 0u64;
        for i in 0..rows.len() {
            if i > 0 && rows[i][..key_len] == rows[i - 1][..key_len] {
                run += 1;
            } else {
                run = 1;
            }
            best = best.max(run);
        }
        self.degrees.lock().unwrap().insert((attr, bound), best);
        best
    }

    /// Average number of distinct `attr` values per assignment of `bound`:
    /// `|π_{bound ∪ attr} R| / |π_bound R|`.
    pub fn avg_degree(&self, attr: usize, bound: AttrMask) -> f64 {
        let bound = bound & !(1 << attr);
        let denom = self.projection_size(bound);
        if denom == 0 {
            return 0.0;
        }
        self.projection_size(bound | (1 << attr)) as f64 / denom as f64
    }
}

/// Statistics for every relation of a catalog, keyed by relation name.
#[derive(Debug, Default)]
pub struct Statistics {
    relations: BTreeMap<String, RelationStats>,
}

impl Statistics {
    pub fn collect(catalog: &Catalog) -> Self {
        let relations = catalog
            .names()
            .map(|name| {
                let rel = catalog.get(name).expect("name from catalog").clone();
                (name.to_string(), RelationStats::new(rel))
            })
            .collect();
        Statistics { relations }
    }

    pub fn get(&self, relation: &str) -> &RelationStats {
        self.relations
            .get(relation)
            .unwrap_or_else(|| panic!("no statistics for relation {relation}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RelationStats {
        RelationStats::new(Arc::new(
            Relation::from_rows("R", 2, [[1u64, 2], [1, 3], [2, 3]]).unwrap(),
        ))
    }

    #[test]
    fn hand_counts() {
        let s = small();
        assert_eq!(s.cardinality(), 3);
        assert_eq!(s.distinct(0), 2);
        assert_eq!(s.distinct(1), 2);
        assert_eq!(s.max_degree(1, mask_of([0])), 2);
        assert_eq!(s.max_degree(0, mask_of([1])), 2);
        assert_eq!(s.max_degree(1, 0), 2);
        assert!((s.avg_degree(1, mask_of([0])) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn average_degree_is_card_over_distinct() {
        let rows: Vec<[u64; 2]> = (0..100).map(|i| [i / 2, i]).collect();
        let s = RelationStats::new(Arc::new(Relation::from_rows("R", 2, rows).unwrap()));
        assert_eq!(s.cardinality(), 100);
        assert_eq!(s.distinct(0), 50);
        assert_eq!(s.avg_degree(1, mask_of([0])), 2.0);
    }

    #[test]
    fn empty_relation() {
        let s = RelationStats::new(Arc::new(Relation::new("R", 2, vec![]).unwrap()));
        assert_eq!(s.cardinality(), 0);
        assert_eq!(s.distinct(0), 0);
        assert_eq!(s.max_degree(1, mask_of([0])), 0);
        assert_eq!(s.projection_size(0), 0);
    }

    #[test]
    fn degree_monotone_in_bound_set() {
        let rows: Vec<[u64; 3]> = (0..60u64).map(|i| [i % 4, i % 7, i % 5]).collect();
        let s = RelationStats::new(Arc::new(Relation::from_rows("R", 3, rows).unwrap()));
        let none = s.max_degree(2, 0);
        let one = s.max_degree(2, mask_of([0]));
        let two = s.max_degree(2, mask_of([0, 1]));
        assert!(none >= one && one >= two && two >= 1);
    }
}
