//! Monadic second-order logic over graphs: vertex variables, vertex-set
//! variables, the `edge` relation and two optional constants `a` and `b`.

mod builders;
mod eval;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::VertexId;

pub use builders::{build_gamma, build_gamma_prime, build_tau, build_tau_prime, TAU_ROOT_VAR};
pub use eval::{evaluate, evaluate_rooted, EvalOptions, DEFAULT_MAX_VERTICES};
pub use parser::parse;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    Edge(Term, Term),
    Eq(Term, Term),
    In(Term, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    ExistsSet(String, Box<Formula>),
    ForallSet(String, Box<Formula>),
}

/// Interpretation of the constants. Unassigned constants that occur in a
/// formula are an evaluation error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstantAssignment {
    pub a: Option<VertexId>,
    pub b: Option<VertexId>,
}

impl ConstantAssignment {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn pair(a: VertexId, b: VertexId) -> Self {
        Self {
            a: Some(a),
            b: Some(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MsoError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("sort error at byte {pos}: {msg}")]
    Sort { pos: usize, msg: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("structure has {size} vertices, evaluation cap is {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("constant `{0}` is used but not assigned")]
    UnassignedConstant(char),
    #[error("constant `{0}` is assigned to a vertex outside the structure")]
    ConstantOutsideStructure(char),
    #[error("depth must be at least 1, got {0}")]
    InvalidDepth(usize),
    #[error("formula is not of the form `exists v . body`")]
    NotExistential,
}

fn bx(f: Formula) -> Box<Formula> {
    Box::new(f)
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(bx(f))
    }
    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(bx(l), bx(r))
    }
    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(bx(l), bx(r))
    }
    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(bx(l), bx(r))
    }
    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), bx(body))
    }
    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(v.to_string(), bx(body))
    }
    pub fn exists_set(v: &str, body: Formula) -> Formula {
        Formula::ExistsSet(v.to_string(), bx(body))
    }
    pub fn forall_set(v: &str, body: Formula) -> Formula {
        Formula::ForallSet(v.to_string(), bx(body))
    }
    pub fn edge(x: Term, y: Term) -> Formula {
        Formula::Edge(x, y)
    }
    pub fn eq(x: Term, y: Term) -> Formula {
        Formula::Eq(x, y)
    }
    pub fn member(x: Term, set: &str) -> Formula {
        Formula::In(x, set.to_string())
    }

    /// Maximum nesting depth of quantifiers of either sort.
    pub fn quantifier_rank(&self) -> usize {
        use Formula::*;
        match self {
            Edge(..) | Eq(..) | In(..) => 0,
            Not(f) => f.quantifier_rank(),
            And(l, r) | Or(l, r) | Implies(l, r) => l.quantifier_rank().max(r.quantifier_rank()),
            Exists(_, f) | Forall(_, f) | ExistsSet(_, f) | ForallSet(_, f) => {
                1 + f.quantifier_rank()
            }
        }
    }

    /// Whether the constants `a` / `b` occur anywhere.
    pub fn uses_constants(&self) -> (bool, bool) {
        let mut out = (false, false);
        self.visit_terms(&mut |t| match t {
            Term::A => out.0 = true,
            Term::B => out.1 = true,
            Term::Var(_) => {}
        });
        out
    }

    fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        use Formula::*;
        match self {
            Edge(x, y) | Eq(x, y) => {
                f(x);
                f(y);
            }
            In(x, _) => f(x),
            Not(g) | Exists(_, g) | Forall(_, g) | ExistsSet(_, g) | ForallSet(_, g) => {
                g.visit_terms(f)
            }
            And(l, r) | Or(l, r) | Implies(l, r) => {
                l.visit_terms(f);
                r.visit_terms(f);
            }
        }
    }

    fn is_atom(&self) -> bool {
        matches!(self, Formula::Edge(..) | Formula::Eq(..) | Formula::In(..))
    }
}

/// Free-standing form of [`Formula::quantifier_rank`].
pub fn quantifier_rank(f: &Formula) -> usize {
    f.quantifier_rank()
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::A => f.write_str("a"),
            Term::B => f.write_str("b"),
        }
    }
}

struct Wrapped<'a>(&'a Formula);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_atom() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

/// Prints in the concrete grammar accepted by [`parse`]. Every compound
/// operand is parenthesized, so printing then parsing is the identity.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Formula::*;
        match self {
            Edge(x, y) => write!(f, "edge({x}, {y})"),
            Eq(x, y) => write!(f, "{x} = {y}"),
            In(x, s) => write!(f, "{x} in {s}"),
            Not(g) => write!(f, "not {}", Wrapped(g)),
            And(l, r) => write!(f, "{} and {}", Wrapped(l), Wrapped(r)),
            Or(l, r) => write!(f, "{} or {}", Wrapped(l), Wrapped(r)),
            Implies(l, r) => write!(f, "{} -> {}", Wrapped(l), Wrapped(r)),
            Exists(v, g) => write!(f, "exists {v} . {g}"),
            Forall(v, g) => write!(f, "forall {v} . {g}"),
            ExistsSet(v, g) => write!(f, "existsS {v} . {g}"),
            ForallSet(v, g) => write!(f, "forallS {v} . {g}"),
        }
    }
}
