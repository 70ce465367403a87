//! The prior-pmf specification language.
//!
//! A document declares events and random variables, states constraints on
//! the pmf, and lists stalk-valued queries:
//!
//! ```text
//! event RD; event NH;
//! P(RD) = 1/100000;
//! P(NH) = 0.4;
//! P(NH | RD) = 8/10;
//! eval P(RD | NH);
//! ```
//!
//! Inside `P(...)` the first top-level `|` separates the conditioning event;
//! a disjunction before the bar must be parenthesized, as in
//! `P((A = empty | B = empty)) > 0`. Everything after the bar is an ordinary
//! event expression, so `P(C = occ | A = empty | B = empty)` conditions on
//! the disjunction.

mod lexer;
mod lower;
mod parser;
mod render;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::event::{EventError, EventTerm, Generators};
use crate::meadow::Stalk;
use crate::pmf::RandomVariable;

pub use lower::{lower, LowerError};
pub use parser::{parse, parse_event_term, parse_stalk_expr};
pub use render::{render, render_event, render_stalk_expr};

/// Identifiers with a fixed meaning in the language.
pub const RESERVED: &[&str] = &[
    "event",
    "var",
    "in",
    "eval",
    "independent",
    "P",
    "TOP",
    "BOT",
    "s",
    "inv",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("{line}:{col}: syntax error: {message}{}", expected_hint(expected))]
    Syntax {
        line: usize,
        col: usize,
        message: String,
        expected: Vec<String>,
    },
    #[error("{line}:{col}: undeclared name `{name}`")]
    Undeclared {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: duplicate declaration of `{name}`")]
    Duplicate {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: {source}")]
    Event {
        line: usize,
        col: usize,
        source: EventError,
    },
}

fn expected_hint(expected: &[String]) -> String {
    match expected {
        [] => String::new(),
        [one] => format!(" (expected {one})"),
        many => format!(" (expected one of {})", many.join(", ")),
    }
}

/// A declaration in a specification document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Event(String),
    Var { name: String, domain: Vec<String> },
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Event(n) => n,
            Decl::Var { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }

    /// Whether `lhs rel rhs` holds, decided through the sign-defined order.
    pub fn holds(self, lhs: &Stalk, rhs: &Stalk) -> bool {
        match self {
            Rel::Lt => lhs.lt(rhs),
            Rel::Le => lhs.le(rhs),
            Rel::Gt => rhs.lt(lhs),
            Rel::Ge => rhs.le(lhs),
        }
    }
}

/// A constraint on the prior pmf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// `P(term) = value`
    ProbEq { term: EventTerm, value: Stalk },
    /// `P(x | y) = value`
    CondEq {
        x: EventTerm,
        y: EventTerm,
        value: Stalk,
    },
    /// `P(x1 | y1) = P(x2 | y2)`
    CondEqCond {
        x1: EventTerm,
        y1: EventTerm,
        x2: EventTerm,
        y2: EventTerm,
    },
    /// `P(term) rel value`
    ProbCmp {
        term: EventTerm,
        rel: Rel,
        value: Stalk,
    },
    /// `P(x, y) = value`
    JointEq {
        x: EventTerm,
        y: EventTerm,
        value: Stalk,
    },
    /// `independent(x, y)`
    Independent { x: EventTerm, y: EventTerm },
}

/// Stalk-valued expressions: meadow terms with probability atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StalkExpr {
    Const(Stalk),
    Var(String),
    Prob(EventTerm),
    Cond(EventTerm, EventTerm),
    Add(Box<StalkExpr>, Box<StalkExpr>),
    Sub(Box<StalkExpr>, Box<StalkExpr>),
    Mul(Box<StalkExpr>, Box<StalkExpr>),
    Div(Box<StalkExpr>, Box<StalkExpr>),
    Neg(Box<StalkExpr>),
    Inv(Box<StalkExpr>),
    Sign(Box<StalkExpr>),
}

impl StalkExpr {
    pub fn int(n: i64) -> Self {
        StalkExpr::Const(Stalk::from(n))
    }

    pub fn var(name: impl Into<String>) -> Self {
        StalkExpr::Var(name.into())
    }

    pub fn prob(t: EventTerm) -> Self {
        StalkExpr::Prob(t)
    }

    pub fn cond(x: EventTerm, y: EventTerm) -> Self {
        StalkExpr::Cond(x, y)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(l: StalkExpr, r: StalkExpr) -> Self {
        StalkExpr::Add(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(l: StalkExpr, r: StalkExpr) -> Self {
        StalkExpr::Sub(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(l: StalkExpr, r: StalkExpr) -> Self {
        StalkExpr::Mul(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(l: StalkExpr, r: StalkExpr) -> Self {
        StalkExpr::Div(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: StalkExpr) -> Self {
        StalkExpr::Neg(Box::new(e))
    }

    pub fn inv(e: StalkExpr) -> Self {
        StalkExpr::Inv(Box::new(e))
    }

    pub fn sign(e: StalkExpr) -> Self {
        StalkExpr::Sign(Box::new(e))
    }

    /// `1_e = e · e⁻¹`
    pub fn one_of(e: StalkExpr) -> Self {
        StalkExpr::mul(e.clone(), StalkExpr::inv(e))
    }

    /// `0_e = 1 − 1_e`
    pub fn zero_of(e: StalkExpr) -> Self {
        StalkExpr::sub(StalkExpr::int(1), StalkExpr::one_of(e))
    }

    /// Left-to-right sum; the empty sum is `0`.
    pub fn sum(terms: impl IntoIterator<Item = StalkExpr>) -> Self {
        let mut it = terms.into_iter();
        match it.next() {
            None => StalkExpr::int(0),
            Some(first) => it.fold(first, StalkExpr::add),
        }
    }

    /// Left-to-right product; the empty product is `1`.
    pub fn product(factors: impl IntoIterator<Item = StalkExpr>) -> Self {
        let mut it = factors.into_iter();
        match it.next() {
            None => StalkExpr::int(1),
            Some(first) => it.fold(first, StalkExpr::mul),
        }
    }

    /// Stalk variables in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let StalkExpr::Var(v) = e {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        });
        out
    }

    /// Generator names mentioned inside probability atoms.
    pub fn event_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.visit(&mut |e| {
            let terms: Vec<&EventTerm> = match e {
                StalkExpr::Prob(t) => vec![t],
                StalkExpr::Cond(x, y) => vec![x, y],
                _ => vec![],
            };
            for t in terms {
                for g in t.generators() {
                    if !out.contains(&g) {
                        out.push(g);
                    }
                }
            }
        });
        out
    }

    /// Pre-order traversal, left operand before right.
    pub fn visit<F: FnMut(&StalkExpr)>(&self, f: &mut F) {
        f(self);
        match self {
            StalkExpr::Add(l, r)
            | StalkExpr::Sub(l, r)
            | StalkExpr::Mul(l, r)
            | StalkExpr::Div(l, r) => {
                l.visit(f);
                r.visit(f);
            }
            StalkExpr::Neg(e) | StalkExpr::Inv(e) | StalkExpr::Sign(e) => e.visit(f),
            StalkExpr::Const(_) | StalkExpr::Var(_) | StalkExpr::Prob(_) | StalkExpr::Cond(..) => {}
        }
    }

    /// Rewrites `P(x | y)` into `P(x ∧ y) / P(y)`.
    pub fn desugar_cond(&self) -> StalkExpr {
        self.map_atoms(&mut |e| match e {
            StalkExpr::Cond(x, y) => Some(StalkExpr::div(
                StalkExpr::prob(EventTerm::and(x.clone(), y.clone())),
                StalkExpr::prob(y.clone()),
            )),
            _ => None,
        })
    }

    /// Rebuilds the tree, replacing leaves for which `f` returns `Some`.
    pub fn map_atoms<F: FnMut(&StalkExpr) -> Option<StalkExpr>>(&self, f: &mut F) -> StalkExpr {
        if let Some(e) = f(self) {
            return e;
        }
        match self {
            StalkExpr::Add(l, r) => StalkExpr::add(l.map_atoms(f), r.map_atoms(f)),
            StalkExpr::Sub(l, r) => StalkExpr::sub(l.map_atoms(f), r.map_atoms(f)),
            StalkExpr::Mul(l, r) => StalkExpr::mul(l.map_atoms(f), r.map_atoms(f)),
            StalkExpr::Div(l, r) => StalkExpr::div(l.map_atoms(f), r.map_atoms(f)),
            StalkExpr::Neg(e) => StalkExpr::neg(e.map_atoms(f)),
            StalkExpr::Inv(e) => StalkExpr::inv(e.map_atoms(f)),
            StalkExpr::Sign(e) => StalkExpr::sign(e.map_atoms(f)),
            leaf => leaf.clone(),
        }
    }
}

impl fmt::Display for StalkExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_stalk_expr(self, &Names::default()))
    }
}

/// Names visible to the parser: plain events and random variables.
#[derive(Debug, Clone, Default)]
pub struct Names {
    events: Vec<String>,
    vars: BTreeMap<String, RandomVariable>,
}

impl Names {
    pub fn from_events<I, S>(events: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Names {
            events: events.into_iter().map(Into::into).collect(),
            vars: BTreeMap::new(),
        }
    }

    pub fn is_event(&self, name: &str) -> bool {
        self.events.iter().any(|e| e == name)
    }

    pub fn var(&self, name: &str) -> Option<&RandomVariable> {
        self.vars.get(name)
    }

    pub fn vars(&self) -> impl Iterator<Item = &RandomVariable> {
        self.vars.values()
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.is_event(name) || self.vars.contains_key(name)
    }

    fn declare(&mut self, decl: &Decl) {
        match decl {
            Decl::Event(n) => self.events.push(n.clone()),
            Decl::Var { name, domain } => {
                let gens = RandomVariable::encoding_generators(name, domain.len());
                let rv = RandomVariable::encoded(name.clone(), domain.clone(), &gens);
                self.vars.insert(name.clone(), rv);
            }
        }
    }
}

/// A parsed prior-pmf specification.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecDocument {
    pub decls: Vec<Decl>,
    pub constraints: Vec<Constraint>,
    pub queries: Vec<StalkExpr>,
}

impl SpecDocument {
    pub fn names(&self) -> Names {
        let mut names = Names::default();
        for d in &self.decls {
            names.declare(d);
        }
        names
    }

    /// Generator names in declaration order; a random variable contributes
    /// the generators of its binary encoding.
    pub fn generator_names(&self) -> Vec<String> {
        self.decls
            .iter()
            .flat_map(|d| match d {
                Decl::Event(n) => vec![n.clone()],
                Decl::Var { name, domain } => {
                    RandomVariable::encoding_generators(name, domain.len())
                }
            })
            .collect()
    }

    pub fn generators(&self) -> Result<Generators, EventError> {
        Generators::new(self.generator_names())
    }

    pub fn random_variables(&self) -> Vec<RandomVariable> {
        let names = self.names();
        self.decls
            .iter()
            .filter_map(|d| match d {
                Decl::Var { name, .. } => names.var(name).cloned(),
                Decl::Event(_) => None,
            })
            .collect()
    }

    /// Event terms that must have probability zero: the unused codes of
    /// many-valued random variables.
    pub fn unused_codes(&self) -> Vec<EventTerm> {
        self.decls
            .iter()
            .flat_map(|d| match d {
                Decl::Var { name, domain } => {
                    let gens = RandomVariable::encoding_generators(name, domain.len());
                    RandomVariable::unused_codes(&gens, domain.len())
                }
                Decl::Event(_) => Vec::new(),
            })
            .collect()
    }
}
