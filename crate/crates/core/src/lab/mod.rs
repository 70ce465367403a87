//! Evaluation of stalk expressions, the atom decomposition with its guard,
//! random pmf-structures, and the axiom suite.

mod check;
mod decompose;
mod random;
mod suite;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::event::{EventError, EventTerm};
use crate::lang::StalkExpr;
use crate::meadow::Stalk;
use crate::pmf::PmfModel;

pub use check::{
    check_equation, check_equation_with, check_update_proposition, Counterexample,
    PropositionOutcome, UpdateWitness, Verdict,
};
pub use decompose::{atom_decompose, DecomposeError, GuardedEquation};
pub use random::{random_model, random_model_with, random_stalk, random_term, ModelConfig};
pub use suite::{axiom_suite, axiom_suite_with, ItemResult, SuiteReport};

/// A valuation of stalk variables and event variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    pub stalks: BTreeMap<String, Stalk>,
    pub events: BTreeMap<String, EventTerm>,
}

impl Env {
    pub fn with_stalk(mut self, name: impl Into<String>, value: Stalk) -> Self {
        self.stalks.insert(name.into(), value);
        self
    }

    pub fn with_event(mut self, name: impl Into<String>, term: EventTerm) -> Self {
        self.events.insert(name.into(), term);
        self
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .stalks
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .chain(self.events.iter().map(|(k, t)| format!("{k} = {t}")))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// The interpretation of the sign operator; everything else is fixed.
#[derive(Clone, Copy)]
pub struct Semantics {
    pub sign: fn(&Stalk) -> Stalk,
}

impl Default for Semantics {
    fn default() -> Self {
        Semantics { sign: Stalk::sign }
    }
}

impl fmt::Debug for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Semantics")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound stalk variable `{0}`")]
    Unbound(String),
    #[error("probability atom evaluated without a model")]
    NoModel,
    #[error(transparent)]
    Event(#[from] EventError),
}

/// Evaluates `e` exactly. Event variables inside probability atoms are
/// replaced by their terms in `env` and then resolved in `m`.
pub fn eval_expr(e: &StalkExpr, m: &PmfModel, env: &Env) -> Result<Stalk, EvalError> {
    eval_with(e, Some(m), env, &Semantics::default())
}

/// Evaluates an expression without probability atoms.
pub fn eval_meadow(e: &StalkExpr, env: &Env) -> Result<Stalk, EvalError> {
    eval_with(e, None, env, &Semantics::default())
}

pub fn eval_with(
    e: &StalkExpr,
    m: Option<&PmfModel>,
    env: &Env,
    sem: &Semantics,
) -> Result<Stalk, EvalError> {
    let go = |x: &StalkExpr| eval_with(x, m, env, sem);
    Ok(match e {
        StalkExpr::Const(c) => c.clone(),
        StalkExpr::Var(v) => env
            .stalks
            .get(v)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(v.clone()))?,
        StalkExpr::Prob(t) => m
            .ok_or(EvalError::NoModel)?
            .prob(&t.substitute(&env.events))?,
        StalkExpr::Cond(x, y) => m
            .ok_or(EvalError::NoModel)?
            .cond(&x.substitute(&env.events), &y.substitute(&env.events))?,
        StalkExpr::Add(l, r) => go(l)? + go(r)?,
        StalkExpr::Sub(l, r) => go(l)? - go(r)?,
        StalkExpr::Mul(l, r) => go(l)? * go(r)?,
        StalkExpr::Div(l, r) => go(l)? / go(r)?,
        StalkExpr::Neg(x) => -go(x)?,
        StalkExpr::Inv(x) => go(x)?.inv(),
        StalkExpr::Sign(x) => (sem.sign)(&go(x)?),
    })
}
