use thiserror::Error;

use crate::event::{minterms, EventError, EventTerm, Generators, MintermSet};
use crate::meadow::Stalk;
use crate::solver::{
    weight_var, Case, CaseSplit, ConstraintSystem, Equality, Inequality, LinearSystem, SolverMode,
};

use super::render::{render_constraint, render_event};
use super::{Constraint, Names, Rel, SpecDocument};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error(transparent)]
    Event(#[from] EventError),
    #[error("cannot lower `{constraint}`: {reason}")]
    Nonlinear { constraint: String, reason: String },
}

/// Lowers a document to linear rows over one weight variable per minterm:
/// the weights sum to one, unused random-variable codes weigh nothing, each
/// constraint contributes its rows in document order, and every weight is
/// nonnegative.
pub fn lower(doc: &SpecDocument, mode: SolverMode) -> Result<ConstraintSystem, LowerError> {
    let gens = doc.generators()?;
    let names = doc.names();
    let n = gens.minterm_count();
    let mut lw = Lowering {
        gens: gens.clone(),
        names,
        mode,
        base: LinearSystem::new((0..n).map(|i| weight_var(&gens, i)).collect()),
        splits: Vec::new(),
    };
    lw.base.equalities.push(Equality {
        coeffs: vec![Stalk::one(); n],
        rhs: Stalk::one(),
        label: "P(TOP) = 1".into(),
    });
    for code in doc.unused_codes() {
        let set = minterms(&code, &gens)?;
        lw.base.equalities.push(Equality {
            coeffs: lw.indicator(&set),
            rhs: Stalk::zero(),
            label: format!("P({code}) = 0"),
        });
    }
    for c in &doc.constraints {
        lw.constraint(c)?;
    }
    for i in 0..n {
        let mut coeffs = vec![Stalk::zero(); n];
        coeffs[i] = Stalk::one();
        lw.base.inequalities.push(Inequality {
            coeffs,
            rhs: Stalk::zero(),
            strict: false,
            label: format!("{} >= 0", weight_var(&gens, i)),
        });
    }
    Ok(ConstraintSystem {
        generators: gens,
        mode,
        base: lw.base,
        splits: lw.splits,
    })
}

struct Lowering {
    gens: Generators,
    names: Names,
    mode: SolverMode,
    base: LinearSystem,
    splits: Vec<CaseSplit>,
}

impl Lowering {
    fn indicator(&self, set: &MintermSet) -> Vec<Stalk> {
        (0..self.gens.minterm_count())
            .map(|i| {
                if set.contains(i) {
                    Stalk::one()
                } else {
                    Stalk::zero()
                }
            })
            .collect()
    }

    fn set(&self, t: &EventTerm) -> Result<MintermSet, EventError> {
        minterms(t, &self.gens)
    }

    fn equality(&self, t: &EventTerm, rhs: &Stalk, label: &str) -> Result<Equality, EventError> {
        Ok(Equality {
            coeffs: self.indicator(&self.set(t)?),
            rhs: rhs.clone(),
            label: label.into(),
        })
    }

    fn positive(&self, y: &MintermSet, yt: &EventTerm) -> Inequality {
        Inequality {
            coeffs: self.indicator(y),
            rhs: Stalk::zero(),
            strict: true,
            label: format!("P({}) > 0", render_event(yt, &self.names)),
        }
    }

    fn null(&self, y: &MintermSet, yt: &EventTerm) -> Equality {
        Equality {
            coeffs: self.indicator(y),
            rhs: Stalk::zero(),
            label: format!("P({}) = 0", render_event(yt, &self.names)),
        }
    }

    fn constraint(&mut self, c: &Constraint) -> Result<(), LowerError> {
        let label = render_constraint(c, &self.names);
        match c {
            Constraint::ProbEq { term, value } => {
                let e = self.equality(term, value, &label)?;
                self.base.equalities.push(e);
            }
            Constraint::JointEq { x, y, value } => {
                let e = self.equality(&EventTerm::and(x.clone(), y.clone()), value, &label)?;
                self.base.equalities.push(e);
            }
            Constraint::ProbCmp { term, rel, value } => {
                let ind = self.indicator(&self.set(term)?);
                let (coeffs, rhs) = match rel {
                    Rel::Ge | Rel::Gt => (ind, value.clone()),
                    Rel::Le | Rel::Lt => (ind.iter().map(|c| -c).collect(), -value),
                };
                let strict = matches!(rel, Rel::Gt | Rel::Lt);
                self.base.inequalities.push(Inequality {
                    coeffs,
                    rhs,
                    strict,
                    label,
                });
            }
            Constraint::CondEq { x, y, value } => {
                let ys = self.set(y)?;
                let xy = self.set(&EventTerm::and(x.clone(), y.clone()))?;
                let coeffs: Vec<Stalk> = self
                    .indicator(&xy)
                    .iter()
                    .zip(self.indicator(&ys))
                    .map(|(a, b)| a - &(value * &b))
                    .collect();
                let eq = Equality {
                    coeffs,
                    rhs: Stalk::zero(),
                    label: label.clone(),
                };
                let pos = self.positive(&ys, y);
                if self.mode == SolverMode::Strict || ys == MintermSet::full(&self.gens) {
                    self.base.equalities.push(eq);
                    self.base.inequalities.push(pos);
                } else {
                    let n = self.gens.minterm_count();
                    let pos_label = pos.label.clone();
                    let null = self.null(&ys, y);
                    let null_label = null.label.clone();
                    let forced = Equality {
                        coeffs: vec![Stalk::zero(); n],
                        rhs: value.clone(),
                        label: label.clone(),
                    };
                    self.splits.push(CaseSplit {
                        constraint: label,
                        cases: vec![
                            Case {
                                label: pos_label,
                                equalities: vec![eq],
                                inequalities: vec![pos],
                            },
                            Case {
                                label: null_label,
                                equalities: vec![null, forced],
                                inequalities: vec![],
                            },
                        ],
                    });
                }
            }
            Constraint::CondEqCond { x1, y1, x2, y2 } => {
                let ys = self.set(y1)?;
                if ys != self.set(y2)? {
                    return Err(LowerError::Nonlinear {
                        constraint: label,
                        reason: "the two sides must condition on the same event".into(),
                    });
                }
                let a = self.indicator(&self.set(&EventTerm::and(x1.clone(), y1.clone()))?);
                let b = self.indicator(&self.set(&EventTerm::and(x2.clone(), y1.clone()))?);
                let coeffs = a.iter().zip(&b).map(|(p, q)| p - q).collect();
                let eq = Equality {
                    coeffs,
                    rhs: Stalk::zero(),
                    label: label.clone(),
                };
                if ys == MintermSet::full(&self.gens) {
                    self.base.equalities.push(eq);
                } else {
                    let pos = self.positive(&ys, y1);
                    let null = self.null(&ys, y1);
                    self.splits.push(CaseSplit {
                        constraint: label,
                        cases: vec![
                            Case {
                                label: pos.label.clone(),
                                equalities: vec![eq],
                                inequalities: vec![pos],
                            },
                            Case {
                                label: null.label.clone(),
                                equalities: vec![null],
                                inequalities: vec![],
                            },
                        ],
                    });
                }
            }
            Constraint::Independent { .. } => {
                return Err(LowerError::Nonlinear {
                    constraint: label,
                    reason: "independence is quadratic in the minterm weights".into(),
                })
            }
        }
        Ok(())
    }
}
