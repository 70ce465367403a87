//! Exact feasibility of linear systems over minterm weights.
//!
//! Equalities are substituted away first; the remaining inequalities go
//! through Fourier–Motzkin elimination. Case splits coming from conditional
//! constraints are explored one branch at a time.

mod fm;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::event::{EventTerm, Generators};
use crate::lang::{Constraint, SpecDocument};
use crate::meadow::Stalk;
use crate::pmf::{PmfError, PmfModel};

pub use fm::fm_eliminate;
use fm::{bound_counts, eliminate_rows, keep_tightest, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMode {
    /// `P(x | y) = c` presupposes `P(y) > 0`.
    #[default]
    Strict,
    /// `P(x | y) = c` also admits `P(y) = 0` when `c = 0`.
    Meadow,
}

impl SolverMode {
    pub fn name(self) -> &'static str {
        match self {
            SolverMode::Strict => "strict",
            SolverMode::Meadow => "meadow",
        }
    }
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(SolverMode::Strict),
            "meadow" => Ok(SolverMode::Meadow),
            other => Err(format!("unknown solver mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Gt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

/// `coeffs · u = rhs`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equality {
    pub coeffs: Vec<Stalk>,
    pub rhs: Stalk,
    pub label: String,
}

/// `coeffs · u ≥ rhs`, or `>` when strict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequality {
    pub coeffs: Vec<Stalk>,
    pub rhs: Stalk,
    pub strict: bool,
    pub label: String,
}

fn dot(coeffs: &[Stalk], values: &[Stalk]) -> Stalk {
    coeffs
        .iter()
        .zip(values)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, v)| c * v)
        .sum()
}

impl Equality {
    pub fn is_ground(&self) -> bool {
        self.coeffs.iter().all(Stalk::is_zero)
    }

    pub fn holds(&self, values: &[Stalk]) -> bool {
        dot(&self.coeffs, values) == self.rhs
    }
}

impl Inequality {
    pub fn is_ground(&self) -> bool {
        self.coeffs.iter().all(Stalk::is_zero)
    }

    pub fn holds(&self, values: &[Stalk]) -> bool {
        let lhs = dot(&self.coeffs, values);
        if self.strict {
            self.rhs.lt(&lhs)
        } else {
            self.rhs.le(&lhs)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearSystem {
    pub variables: Vec<String>,
    pub equalities: Vec<Equality>,
    pub inequalities: Vec<Inequality>,
}

impl LinearSystem {
    pub fn new(variables: Vec<String>) -> Self {
        LinearSystem {
            variables,
            equalities: Vec::new(),
            inequalities: Vec::new(),
        }
    }

    pub fn holds(&self, values: &[Stalk]) -> bool {
        self.equalities.iter().all(|e| e.holds(values))
            && self.inequalities.iter().all(|q| q.holds(values))
    }

    /// Whether `var` has a nonzero coefficient in some row.
    pub fn occurs(&self, var: usize) -> bool {
        self.equalities.iter().any(|e| !e.coeffs[var].is_zero())
            || self.inequalities.iter().any(|q| !q.coeffs[var].is_zero())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }
}

impl fmt::Display for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.equalities {
            writeln!(
                f,
                "{}",
                fmt_row(&e.coeffs, &self.variables, Relation::Eq, &e.rhs)
            )?;
        }
        for q in &self.inequalities {
            let rel = if q.strict { Relation::Gt } else { Relation::Ge };
            writeln!(f, "{}", fmt_row(&q.coeffs, &self.variables, rel, &q.rhs))?;
        }
        Ok(())
    }
}

fn fmt_sum(terms: &[(Stalk, &str)]) -> String {
    let mut s = String::new();
    for (c, name) in terms.iter().filter(|(c, _)| !c.is_zero()) {
        let mag = c.abs();
        if s.is_empty() {
            if c.is_negative() {
                s.push('-');
            }
        } else {
            s.push_str(if c.is_negative() { " - " } else { " + " });
        }
        if name.is_empty() {
            s.push_str(&mag.to_string());
        } else if mag.is_one() {
            s.push_str(name);
        } else {
            s.push_str(&format!("{mag} {name}"));
        }
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

pub(crate) fn fmt_row(coeffs: &[Stalk], vars: &[String], rel: Relation, rhs: &Stalk) -> String {
    let terms: Vec<(Stalk, &str)> = coeffs
        .iter()
        .cloned()
        .zip(vars.iter().map(String::as_str))
        .collect();
    format!("{} {} {rhs}", fmt_sum(&terms), rel.symbol())
}

/// A row solved for `var`, which has coefficient one: `rhs − Σ c_j u_j`.
fn fmt_solved(row: &Row, var: usize, vars: &[String]) -> String {
    let mut terms: Vec<(Stalk, &str)> = vec![(row.rhs(), "")];
    for (j, c) in row.coeffs.iter().enumerate() {
        if j != var {
            terms.push((-c, vars[j].as_str()));
        }
    }
    fmt_sum(&terms)
}

/// The alternatives for one conditional constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseSplit {
    pub constraint: String,
    pub cases: Vec<Case>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub label: String,
    pub equalities: Vec<Equality>,
    pub inequalities: Vec<Inequality>,
}

/// A lowered specification: rows shared by every branch plus case splits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub generators: Generators,
    pub mode: SolverMode,
    pub base: LinearSystem,
    pub splits: Vec<CaseSplit>,
}

impl ConstraintSystem {
    pub fn variables(&self) -> &[String] {
        &self.base.variables
    }

    pub fn branch_count(&self) -> usize {
        self.splits
            .iter()
            .fold(1usize, |n, s| n.saturating_mul(s.cases.len()))
    }

    /// The linear system of one branch, given one case index per split.
    pub fn branch(&self, choice: &[usize]) -> (LinearSystem, BTreeMap<String, String>) {
        let mut sys = self.base.clone();
        let mut labels = BTreeMap::new();
        for (split, &c) in self.splits.iter().zip(choice) {
            let case = &split.cases[c];
            sys.equalities.extend(case.equalities.iter().cloned());
            sys.inequalities.extend(case.inequalities.iter().cloned());
            labels.insert(split.constraint.clone(), case.label.clone());
        }
        (sys, labels)
    }

    fn choices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for split in &self.splits {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..split.cases.len()).map(move |c| {
                        let mut v = prefix.clone();
                        v.push(c);
                        v
                    })
                })
                .collect();
        }
        out
    }
}

/// Name of the weight variable of minterm `index`.
pub fn weight_var(gens: &Generators, index: usize) -> String {
    if gens.is_empty() {
        "u".into()
    } else {
        format!("u_{}", gens.bits(index))
    }
}

/// One weight per minterm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub generators: Generators,
    pub weights: Vec<Stalk>,
}

impl Witness {
    pub fn get(&self, bits: &str) -> Option<&Stalk> {
        self.generators.parse_bits(bits).map(|i| &self.weights[i])
    }

    pub fn to_model(&self) -> Result<PmfModel, PmfError> {
        PmfModel::new(self.generators.clone(), self.weights.clone())
    }

    pub fn to_json(&self) -> Value {
        let map: Map<String, Value> = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| (self.generators.bits(i), Value::String(w.to_string())))
            .collect();
        Value::Object(map)
    }

    pub fn from_json(generators: Generators, value: &Value) -> Option<Witness> {
        let map = value.as_object()?;
        let mut weights = vec![None; generators.minterm_count()];
        for (bits, w) in map {
            let i = generators.parse_bits(bits)?;
            weights[i] = Some(w.as_str()?.parse::<Stalk>().ok()?);
        }
        let weights = weights.into_iter().collect::<Option<Vec<_>>>()?;
        Some(Witness {
            generators,
            weights,
        })
    }
}

/// A false ground inequality `lhs rel rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundContradiction {
    pub lhs: Stalk,
    pub relation: Relation,
    pub rhs: Stalk,
}

impl GroundContradiction {
    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::Eq => self.lhs == self.rhs,
            Relation::Ge => self.rhs.le(&self.lhs),
            Relation::Gt => self.rhs.lt(&self.lhs),
        }
    }
}

impl fmt::Display for GroundContradiction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.relation.symbol(), self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceStep {
    Branch(BTreeMap<String, String>),
    Substitute { var: String, by: String },
    Eliminate { var: String, derived: Vec<String> },
    Contradiction(GroundContradiction),
}

impl TraceStep {
    pub fn to_json(&self) -> Value {
        match self {
            TraceStep::Branch(cases) => json!({"op": "branch", "cases": cases}),
            TraceStep::Substitute { var, by } => json!({"op": "substitute", "var": var, "by": by}),
            TraceStep::Eliminate { var, derived } => {
                json!({"op": "eliminate", "var": var, "derived": derived})
            }
            TraceStep::Contradiction(c) => json!({"contradiction": c.to_string()}),
        }
    }
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceStep::Branch(cases) => {
                let parts: Vec<String> = cases.iter().map(|(k, v)| format!("{k}: {v}")).collect();
                write!(f, "branch [{}]", parts.join("; "))
            }
            TraceStep::Substitute { var, by } => write!(f, "substitute {var} := {by}"),
            TraceStep::Eliminate { var, derived } => {
                write!(f, "eliminate {var}")?;
                for d in derived {
                    write!(f, "\n    {d}")?;
                }
                Ok(())
            }
            TraceStep::Contradiction(c) => write!(f, "contradiction: {c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat {
        witness: Witness,
        branch: BTreeMap<String, String>,
    },
    Unsat {
        trace: Vec<TraceStep>,
    },
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            SolveResult::Sat { witness, .. } => Some(witness),
            SolveResult::Unsat { .. } => None,
        }
    }

    /// The final contradiction of an infeasibility trace.
    pub fn contradiction(&self) -> Option<&GroundContradiction> {
        match self {
            SolveResult::Unsat { trace } => trace.iter().rev().find_map(|s| match s {
                TraceStep::Contradiction(c) => Some(c),
                _ => None,
            }),
            SolveResult::Sat { .. } => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            SolveResult::Sat { witness, branch } => {
                json!({"status": "sat", "witness": witness.to_json(), "branch": branch})
            }
            SolveResult::Unsat { trace } => {
                json!({"status": "unsat", "trace": trace.iter().map(TraceStep::to_json).collect::<Vec<_>>()})
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("internal solver error: {0}")]
    Internal(String),
}

/// Decides the system. The first feasible branch, in case order, supplies
/// the witness; an infeasible system yields the traces of all branches.
pub fn solve(cs: &ConstraintSystem) -> Result<SolveResult, SolveError> {
    let mut trace = Vec::new();
    for choice in cs.choices() {
        let (sys, labels) = cs.branch(&choice);
        match solve_system(&sys)? {
            Ok(values) => {
                let witness = Witness {
                    generators: cs.generators.clone(),
                    weights: values,
                };
                return Ok(SolveResult::Sat {
                    witness,
                    branch: labels,
                });
            }
            Err(steps) => {
                if !cs.splits.is_empty() {
                    trace.push(TraceStep::Branch(labels));
                }
                trace.extend(steps);
            }
        }
    }
    Ok(SolveResult::Unsat { trace })
}

/// Solves one linear system: a satisfying valuation, or the derivation of a
/// false ground row.
pub fn solve_system(sys: &LinearSystem) -> Result<Result<Vec<Stalk>, Vec<TraceStep>>, SolveError> {
    let n = sys.variables.len();
    let vars = &sys.variables;
    let mut steps = Vec::new();
    let mut eqs: Vec<Row> = sys
        .equalities
        .iter()
        .enumerate()
        .map(|(i, e)| Row::new(e.coeffs.clone(), Relation::Eq, e.rhs.clone(), i, &e.label))
        .collect();
    let offset = eqs.len();
    let mut ineqs: Vec<Row> = sys
        .inequalities
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let rel = if q.strict { Relation::Gt } else { Relation::Ge };
            Row::new(q.coeffs.clone(), rel, q.rhs.clone(), offset + i, &q.label)
        })
        .collect();

    let mut defs: Vec<(usize, Row)> = Vec::new();
    for k in 0..eqs.len() {
        let row = eqs[k].clone();
        if row.is_ground() {
            if !row.ground_holds() {
                steps.push(TraceStep::Contradiction(row.contradiction()));
                return Ok(Err(steps));
            }
            continue;
        }
        let occurrences = |v: usize| {
            eqs[k..].iter().filter(|r| r.mentions(v)).count()
                + ineqs.iter().filter(|r| r.mentions(v)).count()
        };
        let pivot = (0..n)
            .filter(|&v| row.mentions(v))
            .min_by_key(|&v| (occurrences(v), v))
            .expect("non-ground row");
        let mut def = row;
        let k_inv = def.coeff(pivot).inv();
        def.scale(&k_inv);
        steps.push(TraceStep::Substitute {
            var: vars[pivot].clone(),
            by: fmt_solved(&def, pivot, vars),
        });
        let targets = eqs[k + 1..]
            .iter_mut()
            .chain(ineqs.iter_mut())
            .chain(defs.iter_mut().map(|(_, r)| r));
        for r in targets {
            if r.mentions(pivot) {
                let c = -r.coeff(pivot);
                r.add_scaled(&def, &c);
                r.coeffs[pivot] = Stalk::zero();
            }
        }
        defs.push((pivot, def));
    }

    let mut rows = Vec::new();
    for mut r in ineqs {
        if r.is_ground() {
            if !r.ground_holds() {
                steps.push(TraceStep::Contradiction(r.contradiction()));
                return Ok(Err(steps));
            }
        } else {
            r.normalize();
            rows.push(r);
        }
    }
    let mut rows = keep_tightest(rows);

    let mut eliminated: Vec<(usize, Vec<Row>)> = Vec::new();
    loop {
        let next_var = (0..n)
            .filter(|&v| rows.iter().any(|r| r.mentions(v)))
            .min_by_key(|&v| {
                let (lo, up) = bound_counts(&rows, v);
                ((lo * up) as i64 - lo as i64 - up as i64, v)
            });
        let Some(var) = next_var else { break };
        let bounds: Vec<Row> = rows.iter().filter(|r| r.mentions(var)).cloned().collect();
        let passed = rows.len() - bounds.len();
        let mut next = eliminate_rows(&rows, var);
        let fresh = next.split_off(passed);
        let mut derived = Vec::new();
        for mut r in fresh {
            if r.is_ground() {
                if !r.ground_holds() {
                    steps.push(TraceStep::Eliminate {
                        var: vars[var].clone(),
                        derived,
                    });
                    steps.push(TraceStep::Contradiction(r.contradiction()));
                    return Ok(Err(steps));
                }
                continue;
            }
            r.normalize();
            derived.push(fmt_row(&r.coeffs, vars, r.rel, &r.rhs()));
            next.push(r);
        }
        steps.push(TraceStep::Eliminate {
            var: vars[var].clone(),
            derived,
        });
        rows = keep_tightest(next);
        eliminated.push((var, bounds));
    }

    let mut values = vec![Stalk::zero(); n];
    for (var, bounds) in eliminated.iter().rev() {
        values[*var] = pick_value(bounds, *var, &values);
    }
    for (p, def) in &defs {
        let rest: Stalk = def
            .coeffs
            .iter()
            .enumerate()
            .filter(|(j, c)| j != p && !c.is_zero())
            .map(|(j, c)| c * &values[j])
            .sum();
        values[*p] = def.rhs() - rest;
    }
    if !sys.holds(&values) {
        return Err(SolveError::Internal(
            "back-substituted valuation violates the system".into(),
        ));
    }
    Ok(Ok(values))
}

/// A value for `var` inside the interval cut out by `bounds`, given values
/// for every other variable they mention: the midpoint of a proper
/// interval, the point of a degenerate one, the endpoint of a half-line
/// (moved inward by one when the bound is strict), or zero when unbounded.
fn pick_value(bounds: &[Row], var: usize, values: &[Stalk]) -> Stalk {
    let mut lo: Option<(Stalk, bool)> = None;
    let mut hi: Option<(Stalk, bool)> = None;
    for r in bounds {
        let a = r.coeff(var);
        let rest: Stalk = r
            .coeffs
            .iter()
            .enumerate()
            .filter(|(j, c)| *j != var && !c.is_zero())
            .map(|(j, c)| c * &values[j])
            .sum();
        let b = (r.rhs() - rest) / a;
        let strict = r.rel == Relation::Gt;
        if a.is_positive() {
            lo = Some(match lo {
                Some((cur, s)) if cur == b => (cur, s || strict),
                Some((cur, s)) if b.lt(&cur) => (cur, s),
                _ => (b, strict),
            });
        } else {
            hi = Some(match hi {
                Some((cur, s)) if cur == b => (cur, s || strict),
                Some((cur, s)) if cur.lt(&b) => (cur, s),
                _ => (b, strict),
            });
        }
    }
    match (lo, hi) {
        (Some((l, _)), Some((h, _))) if l == h => l,
        (Some((l, _)), Some((h, _))) => l.midpoint(&h),
        (Some((l, strict)), None) => {
            if strict {
                l + Stalk::one()
            } else {
                l
            }
        }
        (None, Some((h, strict))) => {
            if strict {
                h - Stalk::one()
            } else {
                h
            }
        }
        (None, None) => Stalk::zero(),
    }
}

/// Checks a witness against a document by evaluating every constraint on
/// the model it defines. In strict mode a conditional constraint also needs
/// a conditioning event of positive probability.
pub fn verify_witness(doc: &SpecDocument, w: &Witness, mode: SolverMode) -> bool {
    if w.generators.names() != doc.generator_names().as_slice() {
        return false;
    }
    let Ok(m) = w.to_model() else { return false };
    let zero_codes = doc
        .unused_codes()
        .iter()
        .all(|t| m.prob(t).is_ok_and(|p| p.is_zero()));
    zero_codes
        && doc
            .constraints
            .iter()
            .all(|c| constraint_holds(&m, c, mode).unwrap_or(false))
}

fn constraint_holds(
    m: &PmfModel,
    c: &Constraint,
    mode: SolverMode,
) -> Result<bool, crate::event::EventError> {
    Ok(match c {
        Constraint::ProbEq { term, value } => m.prob(term)? == *value,
        Constraint::JointEq { x, y, value } => {
            m.prob(&EventTerm::and(x.clone(), y.clone()))? == *value
        }
        Constraint::ProbCmp { term, rel, value } => rel.holds(&m.prob(term)?, value),
        Constraint::CondEq { x, y, value } => {
            let positive = m.prob(y)?.is_positive();
            m.cond(x, y)? == *value && (positive || mode == SolverMode::Meadow)
        }
        Constraint::CondEqCond { x1, y1, x2, y2 } => m.cond(x1, y1)? == m.cond(x2, y2)?,
        Constraint::Independent { x, y } => m.independent(x, y)?,
    })
}

#[cfg(test)]
mod tests;
