//! Brute-force evaluator used as ground truth in differential tests.
//!
//! Backtracks over the atoms in body order. Each atom's rows are sorted once;
//! when its first attribute is already bound the scan is narrowed to the
//! matching run, otherwise all rows are tried. Shares no code with the join
//! engine.

use crate::error::{Error, Result};
use crate::model::{Catalog, Query, Value};

/// Default cap on rows examined.
pub const STEP_BUDGET: u64 = 1_000_000_000;

/// Sorted distinct bindings of all head variables, in head order.
pub fn evaluate(query: &Query, catalog: &Catalog) -> Result<Vec<Vec<Value>>> {
    evaluate_with_budget(query, catalog, STEP_BUDGET)
}

pub fn evaluate_with_budget(
    query: &Query,
    catalog: &Catalog,
    budget: u64,
) -> Result<Vec<Vec<Value>>> {
    let mut tables = Vec::with_capacity(query.atoms().len());
    for atom in query.atoms() {
        let rel = catalog.relation(&atom.relation)?;
        if rel.arity() != atom.arity() {
            return Err(Error::Schema(format!(
                "{} has arity {} but is used with {}",
                atom.relation,
                rel.arity(),
                atom.arity()
            )));
        }
        let mut rows: Vec<Vec<Value>> = rel.rows().map(<[_]>::to_vec).collect();
        rows.sort_unstable();
        tables.push(rows);
    }
    let mut search = Search {
        query,
        tables: &tables,
        binding: vec![None; query.num_vars()],
        out: Vec::new(),
        steps: 0,
        budget,
    };
    search.atom(0)?;
    let mut out = search.out;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

struct Search<'a> {
    query: &'a Query,
    tables: &'a [Vec<Vec<Value>>],
    binding: Vec<Option<Value>>,
    out: Vec<Vec<Value>>,
    steps: u64,
    budget: u64,
}

impl Search<'_> {
    fn atom(&mut self, j: usize) -> Result<()> {
        if j == self.tables.len() {
            self.out
                .push(self.binding.iter().map(|b| b.unwrap()).collect());
            return Ok(());
        }
        let vars = &self.query.atoms()[j].vars;
        let rows = &self.tables[j];
        let (lo, hi) = match self.binding[vars[0]] {
            Some(x) => (
                rows.partition_point(|r| r[0] < x),
                rows.partition_point(|r| r[0] <= x),
            ),
            None => (0, rows.len()),
        };
        for row in &rows[lo..hi] {
            self.steps += 1;
            if self.steps > self.budget {
                return Err(Error::OracleBudget(format!(
                    "more than {} rows examined",
                    self.budget
                )));
            }
            if vars
                .iter()
                .zip(row)
                .any(|(&v, &x)| self.binding[v].is_some_and(|b| b != x))
            {
                continue;
            }
            let newly: Vec<usize> = vars
                .iter()
                .copied()
                .filter(|&v| self.binding[v].is_none())
                .collect();
            for (&v, &x) in vars.iter().zip(row) {
                self.binding[v] = Some(x);
            }
            self.atom(j + 1)?;
            for v in newly {
                self.binding[v] = None;
            }
        }
        Ok(())
    }
}
