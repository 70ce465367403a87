use std::collections::btree_map::Entry;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::event::{EventTerm, Generators};
use crate::lang::StalkExpr;
use crate::meadow::Stalk;
use crate::pmf::PmfModel;

use super::random::{random_model_with, random_stalk, random_term, ModelConfig};
use super::{eval_with, Env, Semantics};

/// Most generators a random model gets.
pub(crate) const MAX_TRIAL_GENERATORS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub model: PmfModel,
    pub env: Env,
    pub lhs: Stalk,
    pub rhs: Stalk,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lhs = {}, rhs = {} under {} in model {:?}",
            self.lhs, self.rhs, self.env, self.model
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds { trials: usize },
    Counterexample(Box<Counterexample>),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }
}

pub(crate) fn trial_generators<R: Rng + ?Sized>(rng: &mut R) -> Generators {
    let k = rng.gen_range(1..=MAX_TRIAL_GENERATORS);
    Generators::new((0..k).map(|i| format!("g{i}"))).expect("small generator list")
}

/// Samples a model and an environment binding every variable of `exprs`.
pub(crate) fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    exprs: &[&StalkExpr],
    config: &ModelConfig,
) -> (PmfModel, Env) {
    let gens = trial_generators(rng);
    let model = random_model_with(rng, &gens, config);
    let mut env = Env::default();
    for e in exprs {
        for v in e.variables() {
            if let Entry::Vacant(slot) = env.stalks.entry(v) {
                slot.insert(random_stalk(rng));
            }
        }
        for x in e.event_names() {
            if let Entry::Vacant(slot) = env.events.entry(x) {
                slot.insert(random_term(rng, gens.names(), 2));
            }
        }
    }
    (model, env)
}

/// Compares both sides on `trials` random models and valuations.
pub fn check_equation(lhs: &StalkExpr, rhs: &StalkExpr, trials: usize, seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    check_equation_with(
        lhs,
        rhs,
        trials,
        &mut rng,
        &Semantics::default(),
        &ModelConfig::default(),
    )
}

pub fn check_equation_with<R: Rng + ?Sized>(
    lhs: &StalkExpr,
    rhs: &StalkExpr,
    trials: usize,
    rng: &mut R,
    sem: &Semantics,
    config: &ModelConfig,
) -> Verdict {
    for _ in 0..trials.max(1) {
        let (model, env) = random_instance(rng, &[lhs, rhs], config);
        let l = eval_with(lhs, Some(&model), &env, sem).expect("valuation covers the expression");
        let r = eval_with(rhs, Some(&model), &env, sem).expect("valuation covers the expression");
        if l != r {
            return Verdict::Counterexample(Box::new(Counterexample {
                model,
                env,
                lhs: l,
                rhs: r,
            }));
        }
    }
    Verdict::Holds {
        trials: trials.max(1),
    }
}

/// One sampled instance where the two sides of the update proposition
/// disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateWitness {
    pub model: PmfModel,
    pub x: EventTerm,
    pub y: EventTerm,
    /// `P(x ∧ y) / (P(x) · P(y)) = P(x ∧ y) / P(x ∧ y)`
    pub ratio_condition: bool,
    /// `update_x(update_y(P)) = update_{x∧y}(P)`
    pub sequential_equals_joint: bool,
}

impl fmt::Display for UpdateWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x = {}, y = {}, ratio condition {}, sequential update {} joint update, model {:?}",
            self.x,
            self.y,
            if self.ratio_condition {
                "holds"
            } else {
                "fails"
            },
            if self.sequential_equals_joint {
                "equals"
            } else {
                "differs from"
            },
            self.model
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropositionOutcome {
    /// Triples with both updates defined.
    pub trials: usize,
    /// Degenerate triples that were discarded and resampled.
    pub resampled: usize,
    /// Triples where the ratio condition held.
    pub ratio_held: usize,
    /// Ratio condition holds but the updates differ.
    pub forward_failures: usize,
    /// Updates agree but the ratio condition fails.
    pub backward_failures: usize,
    pub first_failure: Option<UpdateWitness>,
}

impl PropositionOutcome {
    pub fn forward_holds(&self) -> bool {
        self.forward_failures == 0
    }

    pub fn backward_holds(&self) -> bool {
        self.backward_failures == 0
    }

    pub fn holds(&self) -> bool {
        self.forward_holds() && self.backward_holds()
    }
}

/// Tests the biconditional between the ratio condition and equality of the
/// sequential and joint updates on `trials` non-degenerate random triples.
/// Half the models are products with `x` and `y` over disjoint generators,
/// so the ratio condition is exercised on both sides.
pub fn check_update_proposition(trials: usize, seed: u64) -> PropositionOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = PropositionOutcome {
        trials: 0,
        resampled: 0,
        ratio_held: 0,
        forward_failures: 0,
        backward_failures: 0,
        first_failure: None,
    };
    while out.trials < trials {
        let (model, x, y) = update_triple(&mut rng);
        let Some((ratio, same)) = update_sides(&model, &x, &y) else {
            out.resampled += 1;
            continue;
        };
        out.trials += 1;
        out.ratio_held += usize::from(ratio);
        if ratio != same {
            if ratio {
                out.forward_failures += 1;
            } else {
                out.backward_failures += 1;
            }
            out.first_failure.get_or_insert(UpdateWitness {
                model,
                x,
                y,
                ratio_condition: ratio,
                sequential_equals_joint: same,
            });
        }
    }
    out
}

fn update_triple<R: Rng + ?Sized>(rng: &mut R) -> (PmfModel, EventTerm, EventTerm) {
    let k = rng.gen_range(2..=MAX_TRIAL_GENERATORS);
    let gens = Generators::new((0..k).map(|i| format!("g{i}"))).expect("small generator list");
    if rng.gen_bool(0.5) {
        let marginals: Vec<Stalk> = (0..k)
            .map(|_| Stalk::ratio(rng.gen_range(1..12), 12))
            .collect();
        let model = PmfModel::product(gens.clone(), &marginals).expect("marginals in (0, 1)");
        let cut = rng.gen_range(1..k);
        let x = random_term(rng, &gens.names()[..cut], 2);
        let y = random_term(rng, &gens.names()[cut..], 2);
        (model, x, y)
    } else {
        let model = random_model_with(rng, &gens, &ModelConfig::default());
        let x = random_term(rng, gens.names(), 2);
        let y = random_term(rng, gens.names(), 2);
        (model, x, y)
    }
}

/// `(ratio condition, sequential = joint)`, or `None` when an update is
/// undefined.
pub(crate) fn update_sides(m: &PmfModel, x: &EventTerm, y: &EventTerm) -> Option<(bool, bool)> {
    let xy = EventTerm::and(x.clone(), y.clone());
    let after_y = m.update(y).ok()?.ok()?;
    let sequential = after_y.update(x).ok()?.ok()?;
    let joint = m.update(&xy).ok()?.ok()?;
    let (px, py, pxy) = (m.prob(x).ok()?, m.prob(y).ok()?, m.prob(&xy).ok()?);
    let ratio = &pxy / &(&px * &py) == pxy.one_of();
    Some((ratio, sequential == joint))
}
