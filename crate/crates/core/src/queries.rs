//! The benchmark query patterns.

use crate::model::Query;

pub const TRIANGLE: &str = "Q(X,Y,Z) :- R(X,Y), S(Y,Z), T(X,Z).";
pub const FOUR_LOOP: &str = "Q(X,Y,Z,U) :- R1(X,Y), R2(X,Z), R3(Y,U), R4(Z,U).";
pub const FOUR_DIAMOND: &str = "Q(X,Y,Z,U) :- R1(X,Y), R2(X,Z), R3(Y,U), R4(Z,U), R5(Y,Z).";
pub const FOUR_CLIQUE: &str = "Q(X,Y,Z,U) :- R1(X,Y), R2(X,Z), R3(Y,U), R4(Z,U), R5(Y,Z), R6(X,U).";
pub const TWO_TRIANGLE: &str =
    "Q(X,Y,Z,U,V) :- R1(X,Y), R2(X,Z), R3(Y,Z), R4(Z,U), R5(Z,V), R6(U,V).";
pub const LOOMIS_WHITNEY: &str = "Q(X,Y,Z,U) :- R1(X,Y,Z), R2(X,Y,U), R3(X,Z,U), R4(Y,Z,U).";
pub const CLOVER_TRIANGLE: &str = "Q(U,X,Y,Z) :- R5(U,X,Y), R6(U,X,Z), R7(U,Y,Z).";

/// A named benchmark query.
#[derive(Debug, Clone, Copy)]
pub struct NamedQuery {
    pub name: &'static str,
    pub text: &'static str,
    /// Atoms are ternary tensors rather than graph edges.
    pub ternary: bool,
}

impl NamedQuery {
    pub fn parse(&self) -> Query {
        Query::parse(self.text).expect("built-in queries parse")
    }
}

pub const ALL: [NamedQuery; 7] = [
    NamedQuery {
        name: "Q1",
        text: TRIANGLE,
        ternary: false,
    },
    NamedQuery {
        name: "Q2",
        text: FOUR_LOOP,
        ternary: false,
    },
    NamedQuery {
        name: "Q4",
        text: FOUR_DIAMOND,
        ternary: false,
    },
    NamedQuery {
        name: "Q6",
        text: FOUR_CLIQUE,
        ternary: false,
    },
    NamedQuery {
        name: "Q8",
        text: TWO_TRIANGLE,
        ternary: false,
    },
    NamedQuery {
        name: "LW",
        text: LOOMIS_WHITNEY,
        ternary: true,
    },
    NamedQuery {
        name: "CT",
        text: CLOVER_TRIANGLE,
        ternary: true,
    },
];

pub fn by_name(name: &str) -> Option<NamedQuery> {
    ALL.iter()
        .copied()
        .find(|q| q.name.eq_ignore_ascii_case(name))
}
