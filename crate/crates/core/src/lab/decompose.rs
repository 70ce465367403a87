use std::fmt;

use thiserror::Error;

use crate::event::{minterms, EventError, EventTerm, Generators, MintermSet};
use crate::lang::StalkExpr;
use crate::pmf::PmfModel;

use super::Env;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("probability atom mentions `{0}`, which is not among the event variables")]
    UndeclaredEvent(String),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error("model generators {found:?} differ from the decomposition's {expected:?}")]
    GeneratorMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
}

/// `t = r` with every probability atom replaced by a fresh variable, plus
/// the guard that pins those variables to a genuine pmf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedEquation {
    pub lhs: StalkExpr,
    pub rhs: StalkExpr,
    pub guard: StalkExpr,
    /// One weight variable per minterm, in index order.
    pub u_vars: Vec<String>,
    /// `z_j` with the event it replaced and that event's minterms.
    pub z_defs: Vec<(String, EventTerm, MintermSet)>,
    pub generators: Generators,
}

/// Replaces the `j`-th probability atom of `lhs` then `rhs` (pre-order,
/// conditionals expanded first) by `z_j`, and builds
/// `F = 0_{1−U} · Π_j 0_{z_j − Σ_{ℓ∈H_j} u_ℓ} · Π_i 0_{1 − s(s(u_i)+1)}`.
pub fn atom_decompose(
    lhs: &StalkExpr,
    rhs: &StalkExpr,
    event_vars: &[String],
) -> Result<GuardedEquation, DecomposeError> {
    let gens = Generators::new(event_vars.iter().cloned())?;
    let (lhs, rhs) = (lhs.desugar_cond(), rhs.desugar_cond());

    let mut taken = lhs.variables();
    taken.extend(rhs.variables());
    let z_prefix = fresh_prefix("z", &taken);
    let u_prefix = fresh_prefix("u", &taken);

    let mut atoms: Vec<EventTerm> = Vec::new();
    for side in [&lhs, &rhs] {
        side.visit(&mut |e| {
            if let StalkExpr::Prob(t) = e {
                atoms.push(t.clone());
            }
        });
    }
    let mut z_defs = Vec::with_capacity(atoms.len());
    for (j, t) in atoms.iter().enumerate() {
        if let Some(g) = t.generators().into_iter().find(|g| !gens.contains(g)) {
            return Err(DecomposeError::UndeclaredEvent(g));
        }
        z_defs.push((
            format!("{z_prefix}_{}", j + 1),
            t.clone(),
            minterms(t, &gens)?,
        ));
    }

    let mut next = 0;
    let mut replace = |e: &StalkExpr| match e {
        StalkExpr::Prob(_) => {
            next += 1;
            Some(StalkExpr::var(format!("{z_prefix}_{next}")))
        }
        _ => None,
    };
    let lhs2 = lhs.map_atoms(&mut replace);
    let rhs2 = rhs.map_atoms(&mut replace);

    let u_vars: Vec<String> = (0..gens.minterm_count())
        .map(|i| format!("{u_prefix}_{}", gens.bits(i)))
        .collect();
    let u = |i: usize| StalkExpr::var(u_vars[i].clone());
    let one = || StalkExpr::int(1);

    let mut factors = vec![StalkExpr::zero_of(StalkExpr::sub(
        one(),
        StalkExpr::sum((0..u_vars.len()).map(u)),
    ))];
    for (z, _, set) in &z_defs {
        factors.push(StalkExpr::zero_of(StalkExpr::sub(
            StalkExpr::var(z.clone()),
            StalkExpr::sum(set.iter().map(u)),
        )));
    }
    for i in 0..u_vars.len() {
        let sign = StalkExpr::sign(StalkExpr::add(StalkExpr::sign(u(i)), one()));
        factors.push(StalkExpr::zero_of(StalkExpr::sub(one(), sign)));
    }
    let guard = StalkExpr::product(factors);

    Ok(GuardedEquation {
        lhs: lhs2,
        rhs: rhs2,
        guard,
        u_vars,
        z_defs,
        generators: gens,
    })
}

/// `u`, then `uu`, and so on, until no taken name starts with `<prefix>_`.
fn fresh_prefix(seed: &str, taken: &[String]) -> String {
    let mut p = seed.to_string();
    while taken.iter().any(|v| v.starts_with(&format!("{p}_"))) {
        p.push_str(seed);
    }
    p
}

impl GuardedEquation {
    /// `base` extended with `u_i ↦` weight of minterm `i` and `z_j ↦ P(f_j)`.
    pub fn canonical_env(&self, m: &PmfModel, base: &Env) -> Result<Env, DecomposeError> {
        if m.generators() != &self.generators {
            return Err(DecomposeError::GeneratorMismatch {
                expected: self.generators.names().to_vec(),
                found: m.generators().names().to_vec(),
            });
        }
        let mut env = base.clone();
        for (i, u) in self.u_vars.iter().enumerate() {
            env.stalks.insert(u.clone(), m.weight(i).clone());
        }
        for (z, t, _) in &self.z_defs {
            env.stalks.insert(z.clone(), m.prob(t)?);
        }
        Ok(env)
    }

    /// `F · t′` and `F · r′`.
    pub fn guarded_sides(&self) -> (StalkExpr, StalkExpr) {
        (
            StalkExpr::mul(self.guard.clone(), self.lhs.clone()),
            StalkExpr::mul(self.guard.clone(), self.rhs.clone()),
        )
    }
}

impl fmt::Display for GuardedEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "t' = {}", self.lhs)?;
        writeln!(f, "r' = {}", self.rhs)?;
        for (z, t, set) in &self.z_defs {
            let atom = StalkExpr::prob(t.clone());
            writeln!(f, "{z} := {atom}  H = {{{}}}", set.bit_strings().join(", "))?;
        }
        write!(f, "F = {}", self.guard)
    }
}
