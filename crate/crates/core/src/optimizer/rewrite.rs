//! Detection of loop-invariant intersections that can be lifted out of
//! inner loops and cached.

use serde::Serialize;

use crate::model::{Query, VarId};

/// An intersection over `sources` (atom indices) for the variable at
/// `level`, computed once per binding of the first `placement` levels.
///
/// Levels are 0-based positions in the order; `placement == 0` means the
/// temporary is built before the outermost loop, `placement == d` means it is
/// built just after level `d - 1` is bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HoistedIntersection {
    pub target: VarId,
    pub level: usize,
    pub sources: Vec<usize>,
    pub placement: usize,
}

impl HoistedIntersection {
    pub fn name(&self, query: &Query) -> String {
        format!("tmp_{}", query.var_name(self.target))
    }

    /// `tmp_Y := R4.Y ∩ R5.Y`, with bound attributes shown as `R2[x]`.
    pub fn describe(&self, query: &Query, order: &[VarId]) -> String {
        let level_of = level_of(order);
        let target = query.var_name(self.target);
        let parts: Vec<String> = self
            .sources
            .iter()
            .map(|&j| {
                let atom = &query.atoms()[j];
                let bound: Vec<String> = atom
                    .vars
                    .iter()
                    .filter(|&&v| level_of[v] < self.level)
                    .map(|&v| query.var_name(v).to_lowercase())
                    .collect();
                if bound.is_empty() {
                    format!("{}.{target}", atom.relation)
                } else {
                    format!("{}[{}].{target}", atom.relation, bound.join(","))
                }
            })
            .collect();
        format!("{} := {}", self.name(query), parts.join(" ∩ "))
    }
}

/// Position of each variable in `order`.
pub fn level_of(order: &[VarId]) -> Vec<usize> {
    let mut out = vec![usize::MAX; order.len()];
    for (i, &v) in order.iter().enumerate() {
        out[v] = i;
    }
    out
}

/// Number of levels an atom's restriction at `level` depends on: one plus the
/// deepest bound level among its other variables, or 0 when none are bound.
pub fn dependency_depth(query: &Query, level_of: &[usize], atom: usize, level: usize) -> usize {
    query.atoms()[atom]
        .vars
        .iter()
        .map(|&v| level_of[v])
        .filter(|&l| l < level)
        .map(|l| l + 1)
        .max()
        .unwrap_or(0)
}

/// For each level, groups the sources that do not depend on the immediately
/// enclosing loop; two or more such sources form one hoisted intersection
/// placed right after their deepest dependency.
pub fn detect_rewrites(query: &Query, order: &[VarId]) -> Vec<HoistedIntersection> {
    let level_of = level_of(order);
    let mut out = Vec::new();
    for (level, &var) in order.iter().enumerate() {
        let group: Vec<(usize, usize)> = query
            .atoms_with(var)
            .map(|j| (j, dependency_depth(query, &level_of, j, level)))
            .filter(|&(_, dep)| dep < level)
            .collect();
        if group.len() >= 2 {
            out.push(HoistedIntersection {
                target: var,
                level,
                placement: group.iter().map(|&(_, d)| d).max().unwrap_or(0),
                sources: group.into_iter().map(|(j, _)| j).collect(),
            });
        }
    }
    out
}
