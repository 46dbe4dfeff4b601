//! Relations, atoms and full conjunctive queries.
//!
//! Values are dictionary-encoded `u64`s. Relations are stored row-major in a
//! single flat buffer; a relation loaded through [`crate::io`] is always a set.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rows;

pub type Value = u64;

/// Index of a query variable in [`Query::variables`].
pub type VarId = usize;

#[derive(Clone, PartialEq, Eq)]
pub struct Relation {
    name: String,
    arity: usize,
    data: Vec<Value>,
    deduplicated: bool,
}

impl Relation {
    pub fn new(name: impl Into<String>, arity: usize, data: Vec<Value>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Schema("relation arity must be at least 1".into()));
        }
        if !data.len().is_multiple_of(arity) {
            return Err(Error::Schema(format!(
                "data length {} is not a multiple of arity {arity}",
                data.len()
            )));
        }
        Ok(Relation {
            name: name.into(),
            arity,
            data,
            deduplicated: false,
        })
    }

    pub fn from_rows<R: AsRef<[Value]>>(
        name: impl Into<String>,
        arity: usize,
        rows: impl IntoIterator<Item = R>,
    ) -> Result<Self> {
        let mut data = Vec::new();
        for row in rows {
            let row = row.as_ref();
            if row.len() != arity {
                return Err(Error::Schema(format!(
                    "row of width {} in relation of arity {arity}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Relation::new(name, arity, data)
    }

    /// Sorts the rows and removes duplicates, turning the relation into a set.
    pub fn deduplicate(mut self) -> Self {
        if !self.deduplicated {
            let identity: Vec<usize> = (0..self.arity).collect();
            rows::sort_rows(&mut self.data, self.arity, &identity);
            rows::dedup_sorted_rows(&mut self.data, self.arity);
            self.deduplicated = true;
        }
        self
    }

    /// Adds the mirrored row `(b, a)` for every binary row `(a, b)`.
    pub fn symmetrize(self) -> Result<Self> {
        if self.arity != 2 {
            return Err(Error::Schema(format!(
                "symmetrize requires arity 2, relation {} has arity {}",
                self.name, self.arity
            )));
        }
        let mut data = Vec::with_capacity(self.data.len() * 2);
        for row in self.data.chunks_exact(2) {
            data.extend_from_slice(&[row[0], row[1], row[1], row[0]]);
        }
        Ok(Relation::new(self.name, 2, data)?.deduplicate())
    }

    pub(crate) fn with_flag(mut self, deduplicated: bool) -> Self {
        self.deduplicated = deduplicated;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Value] {
        &self.data
    }

    pub fn is_deduplicated(&self) -> bool {
        self.deduplicated
    }

    pub fn row(&self, i: usize) -> &[Value] {
        &self.data[i * self.arity..(i + 1) * self.arity]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, Value> {
        self.data.chunks_exact(self.arity)
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Relation")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("rows", &self.len())
            .field("deduplicated", &self.deduplicated)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub relation: String,
    pub vars: Vec<VarId>,
}

impl Atom {
    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Attribute position of `var` in this atom.
    pub fn position_of(&self, var: VarId) -> Option<usize> {
        self.vars.iter().position(|&v| v == var)
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.vars.contains(&var)
    }
}

/// A full conjunctive query `Q(X1..Xn) :- R1(..), ..., Rm(..)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    name: String,
    variables: Vec<String>,
    atoms: Vec<Atom>,
}

impl Query {
    pub fn new(name: impl Into<String>, variables: Vec<String>, atoms: Vec<Atom>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::Query("query has no variables".into()));
        }
        if atoms.is_empty() {
            return Err(Error::Query("query has no atoms".into()));
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                return Err(Error::Query(format!("variable {v} repeated in head")));
            }
        }
        for atom in &atoms {
            if atom.vars.is_empty() {
                return Err(Error::Query(format!(
                    "atom {} has no variables",
                    atom.relation
                )));
            }
            for (i, &v) in atom.vars.iter().enumerate() {
                if v >= variables.len() {
                    return Err(Error::Query(format!(
                        "atom {} references unknown variable id {v}",
                        atom.relation
                    )));
                }
                if atom.vars[..i].contains(&v) {
                    return Err(Error::Query(format!(
                        "variable {} repeated within atom {}",
                        variables[v], atom.relation
                    )));
                }
            }
        }
        for (v, name) in variables.iter().enumerate() {
            if !atoms.iter().any(|a| a.contains(v)) {
                return Err(Error::Query(format!("variable {name} occurs in no atom")));
            }
        }
        Ok(Query {
            name: name.into(),
            variables,
            atoms,
        })
    }

    /// Parses `Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(X,Z).`; `:=` and `=` are accepted
    /// in place of `:-` and the trailing period is optional.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim().trim_end_matches('.').trim();
        let (head, body) = [":-", ":=", "="]
            .iter()
            .find_map(|sep| text.split_once(sep))
            .ok_or_else(|| Error::Query(format!("missing ':-' in {text:?}")))?;
        let (name, head_vars) = parse_term(head)?;
        let mut variables: Vec<String> = Vec::new();
        for v in head_vars {
            if variables.contains(&v) {
                return Err(Error::Query(format!("variable {v} repeated in head")));
            }
            variables.push(v);
        }

        let mut atoms = Vec::new();
        for term in split_terms(body)? {
            let (relation, vars) = parse_term(&term)?;
            let vars = vars
                .into_iter()
                .map(|v| {
                    variables.iter().position(|h| *h == v).ok_or_else(|| {
                        Error::Query(format!(
                            "body variable {v} missing from the head of a full query"
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            atoms.push(Atom { relation, vars });
        }
        Query::new(name, variables, atoms)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn var_name(&self, var: VarId) -> &str {
        &self.variables[var]
    }

    /// Indices of the atoms that mention `var`.
    pub fn atoms_with(&self, var: VarId) -> impl Iterator<Item = usize> + '_ {
        self.atoms
            .iter()
            .enumerate()
            .filter(move |(_, a)| a.contains(var))
            .map(|(j, _)| j)
    }

    /// Distinct relation names referenced by the body, in first-use order.
    pub fn relation_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for atom in &self.atoms {
            if !out.contains(&atom.relation.as_str()) {
                out.push(&atom.relation);
            }
        }
        out
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) :- ", self.name, self.variables.join(","))?;
        for (j, atom) in self.atoms.iter().enumerate() {
            if j > 0 {
                f.write_str(", ")?;
            }
            let vars: Vec<&str> = atom
                .vars
                .iter()
                .map(|&v| self.variables[v].as_str())
                .collect();
            write!(f, "{}({})", atom.relation, vars.join(","))?;
        }
        f.write_str(".")
    }
}

fn split_terms(body: &str) -> Result<Vec<String>> {
    let mut terms = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in body.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| Error::Query("unbalanced ')'".into()))?;
                current.push(c);
            }
            ',' if depth == 0 => terms.push(std::mem::take(&mut current)),
            _ => current.push(c),
        }
    }
    if depth != 0 {
        return Err(Error::Query("unbalanced '('".into()));
    }
    terms.push(current);
    let terms: Vec<String> = terms
        .into_iter()
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect();
    if terms.is_empty() {
        return Err(Error::Query("query body is empty".into()));
    }
    Ok(terms)
}

fn parse_term(term: &str) -> Result<(String, Vec<String>)> {
    let term = term.trim();
    let open = term
        .find('(')
        .ok_or_else(|| Error::Query(format!("expected '(' in {term:?}")))?;
    if !term.ends_with(')') {
        return Err(Error::Query(format!("expected ')' at end of {term:?}")));
    }
    let name = term[..open].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Err(Error::Query(format!("bad relation name {name:?}")));
    }
    let vars: Vec<String> = term[open + 1..term.len() - 1]
        .split(',')
        .map(|v| v.trim().to_string())
        .collect();
    if vars
        .iter()
        .any(|v| v.is_empty() || !v.chars().all(|c| c.is_alphanumeric() || c == '_'))
    {
        return Err(Error::Query(format!("bad variable list in {term:?}")));
    }
    Ok((name.to_string(), vars))
}

/// Physical relations addressed by the names used in query atoms. Several
/// atoms may resolve to the same `Arc<Relation>`.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    relations: BTreeMap<String, Arc<Relation>>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, relation: impl Into<Arc<Relation>>) {
        self.relations.insert(name.into(), relation.into());
    }

    pub fn with(mut self, name: impl Into<String>, relation: impl Into<Arc<Relation>>) -> Self {
        self.insert(name, relation);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Relation>> {
        self.relations.get(name)
    }

    pub fn relation(&self, name: &str) -> Result<&Arc<Relation>> {
        self.get(name)
            .ok_or_else(|| Error::Config(format!("unknown relation {name}")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    /// Checks that every atom resolves to a relation of matching arity.
    pub fn validate(&self, query: &Query) -> Result<()> {
        for atom in query.atoms() {
            let rel = self.relation(&atom.relation)?;
            if rel.arity() != atom.arity() {
                return Err(Error::Schema(format!(
                    "atom {} has {} variables but the relation has arity {}",
                    atom.relation,
                    atom.arity(),
                    rel.arity()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_triangle() {
        let q = Query::parse("Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(X,Z).").unwrap();
        assert_eq!(q.variables(), ["X", "Y", "Z"]);
        assert_eq!(q.atoms().len(), 3);
        assert_eq!(q.atoms()[2].vars, vec![0, 2]);
        assert_eq!(q.to_string(), "Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(X,Z).");
    }

    #[test]
    fn accepts_assignment_syntax() {
        let q = Query::parse("Q(X,Y,Z,U) := R1(X,Y), R2(X,Z), R3(Y,U), R4(Z,U).").unwrap();
        assert_eq!(q.num_vars(), 4);
        assert_eq!(q.relation_names(), ["R1", "R2", "R3", "R4"]);
    }

    #[test]
    fn rejects_repeated_variable_in_atom() {
        let err = Query::parse("Q(X) :- R(X,X).").unwrap_err();
        assert!(matches!(err, Error::Query(_)), "{err}");
    }

    #[test]
    fn rejects_head_variable_without_atom() {
        assert!(Query::parse("Q(X,Y) :- R(X).").is_err());
    }

    #[test]
    fn rejects_projection() {
        assert!(Query::parse("Q(X) :- R(X,Y).").is_err());
    }

    #[test]
    fn relation_dedup_and_symmetrize() {
        let r = Relation::new("E", 2, vec![1, 2, 2, 3, 1, 2])
            .unwrap()
            .deduplicate();
        assert_eq!(r.data(), &[1, 2, 2, 3]);
        let s = Relation::new("E", 2, vec![1, 2, 2, 1, 3, 3])
            .unwrap()
            .symmetrize()
            .unwrap();
        assert_eq!(s.data(), &[1, 2, 2, 1, 3, 3]);
    }

    #[test]
    fn relation_rejects_ragged_data() {
        assert!(Relation::new("R", 2, vec![1, 2, 3]).is_err());
    }

    #[test]
    fn catalog_validates_arity() {
        let q = Query::parse("Q(X,Y) :- R(X,Y).").unwrap();
        let c = Catalog::new().with("R", Relation::new("R", 3, vec![]).unwrap());
        assert!(matches!(c.validate(&q), Err(Error::Schema(_))));
        assert!(matches!(Catalog::new().validate(&q), Err(Error::Config(_))));
    }
}
