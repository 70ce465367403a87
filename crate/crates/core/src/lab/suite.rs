use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::event::{equivalent, EventTerm, Generators};
use crate::lang::{parse_event_term, parse_stalk_expr, Names};
use crate::meadow::Stalk;
use crate::pmf::PmfModel;

use super::check::{
    check_equation_with, trial_generators, update_sides, Verdict, MAX_TRIAL_GENERATORS,
};
use super::random::{random_model_with, random_stalk, random_term, ModelConfig};
use super::Semantics;

type Trial = fn(&mut ChaCha8Rng, &Semantics) -> Result<(), String>;

enum Kind {
    /// Stalk equation; event variables are `x`, `y`, `z`, `a`.
    Stalk(&'static str, &'static str),
    /// Boolean-algebra equation over `x`, `y`, `z`.
    Event(&'static str, &'static str),
    Custom(Trial),
}

struct Item {
    id: &'static str,
    anchor: &'static str,
    kind: Kind,
}

const fn stalk(id: &'static str, anchor: &'static str, l: &'static str, r: &'static str) -> Item {
    Item {
        id,
        anchor,
        kind: Kind::Stalk(l, r),
    }
}

const fn event(id: &'static str, anchor: &'static str, l: &'static str, r: &'static str) -> Item {
    Item {
        id,
        anchor,
        kind: Kind::Event(l, r),
    }
}

const fn custom(id: &'static str, anchor: &'static str, f: Trial) -> Item {
    Item {
        id,
        anchor,
        kind: Kind::Custom(f),
    }
}

fn items() -> Vec<Item> {
    vec![
        event("ba.absorb-or", "(x ∨ y) ∧ y = y", "(x | y) & y", "y"),
        event("ba.absorb-and", "(x ∧ y) ∨ y = y", "(x & y) | y", "y"),
        event(
            "ba.distribute-and",
            "x ∧ (y ∨ z) = (y ∧ x) ∨ (z ∧ x)",
            "x & (y | z)",
            "(y & x) | (z & x)",
        ),
        event(
            "ba.distribute-or",
            "x ∨ (y ∧ z) = (y ∨ x) ∧ (z ∨ x)",
            "x | (y & z)",
            "(y | x) & (z | x)",
        ),
        event("ba.complement-and", "x ∧ ¬x = ⊥", "x & !x", "BOT"),
        event("ba.complement-or", "x ∨ ¬x = ⊤", "x | !x", "TOP"),
        stalk(
            "md.add-assoc",
            "(x + y) + z = x + (y + z)",
            "(x + y) + z",
            "x + (y + z)",
        ),
        stalk("md.add-comm", "x + y = y + x", "x + y", "y + x"),
        stalk("md.add-zero", "x + 0 = x", "x + 0", "x"),
        stalk("md.add-inverse", "x + (−x) = 0", "x + (-x)", "0"),
        stalk(
            "md.mul-assoc",
            "(x · y) · z = x · (y · z)",
            "(x * y) * z",
            "x * (y * z)",
        ),
        stalk("md.mul-comm", "x · y = y · x", "x * y", "y * x"),
        stalk("md.mul-one", "1 · x = x", "1 * x", "x"),
        stalk(
            "md.distribute",
            "x · (y + z) = x · y + x · z",
            "x * (y + z)",
            "x * y + x * z",
        ),
        stalk("md.inv-involution", "(x⁻¹)⁻¹ = x", "inv(inv(x))", "x"),
        stalk(
            "md.restricted-inverse",
            "x · (x · x⁻¹) = x",
            "x * (x * inv(x))",
            "x",
        ),
        stalk(
            "sign.one-indicator",
            "s(1_x) = 1_x",
            "s(x * inv(x))",
            "x * inv(x)",
        ),
        stalk(
            "sign.zero-indicator",
            "s(0_x) = 0_x",
            "s(1 - x * inv(x))",
            "1 - x * inv(x)",
        ),
        stalk("sign.minus-one", "s(−1) = −1", "s(-1)", "-1"),
        stalk("sign.inverse", "s(x⁻¹) = s(x)", "s(inv(x))", "s(x)"),
        stalk(
            "sign.product",
            "s(x · y) = s(x) · s(y)",
            "s(x * y)",
            "s(x) * s(y)",
        ),
        stalk(
            "sign.sum",
            "0_{s(x) − s(y)} · (s(x + y) − s(x)) = 0",
            "(1 - (s(x) - s(y)) * inv(s(x) - s(y))) * (s(x + y) - s(x))",
            "0",
        ),
        custom("inverse-law", "x ≠ 0 → x · x⁻¹ = 1", inverse_law),
        stalk("pmf.top", "P(⊤) = 1", "P(TOP)", "1"),
        stalk("pmf.bottom", "P(⊥) = 0", "P(BOT)", "0"),
        stalk(
            "pmf.nonnegative",
            "s(s(P(x)) + 1) = 1",
            "s(s(P(x)) + 1)",
            "1",
        ),
        stalk(
            "pmf.additive",
            "P(x ∨ y) = P(x) + P(y) − P(x ∧ y)",
            "P((x | y))",
            "P(x) + P(y) - P(x & y)",
        ),
        stalk(
            "pmf.cancel",
            "P(x ∧ y) · P(y) · P(y)⁻¹ = P(x ∧ y)",
            "P(x & y) * P(y) * inv(P(y))",
            "P(x & y)",
        ),
        custom("def.less", "x < y ⟺ s(y − x) = 1", def_less),
        custom(
            "def.less-equal",
            "x ≤ y ⟺ s(s(y − x) + 1) = 1",
            def_less_equal,
        ),
        stalk("def.division", "p / q = p · q⁻¹", "x / y", "x * inv(y)"),
        stalk("def.joint", "P(x, y) = P(x ∧ y)", "P(x, y)", "P(x & y)"),
        stalk(
            "def.conditional",
            "P(x | y) = P(x, y) / P(y)",
            "P(x | y)",
            "P(x, y) / P(y)",
        ),
        stalk("fact.nonnegative", "P(x) ≥ 0", "s(s(P(x) - 0) + 1)", "1"),
        stalk(
            "fact.self-conditional",
            "P(x) = P(x) · P(x | x)",
            "P(x)",
            "P(x) * P(x | x)",
        ),
        stalk(
            "fact.self-ratio",
            "P(x | x) = P(x) / P(x)",
            "P(x | x)",
            "P(x) / P(x)",
        ),
        stalk("thm.upper-bound", "P(x) ≤ 1", "s(s(1 - P(x)) + 1)", "1"),
        stalk(
            "thm.joint-factorization",
            "P(x, y) = P(x | y) · P(y)",
            "P(x, y)",
            "P(x | y) * P(y)",
        ),
        stalk(
            "thm.bayes",
            "P(x | y) = P(y | x) · P(x) / P(y)",
            "P(x | y)",
            "P(y | x) * P(x) / P(y)",
        ),
        custom(
            "thm.independence-left",
            "independent(x, y) ⟺ P(x | y) = P(x) · P(y | y)",
            independence_left,
        ),
        custom(
            "thm.independence-right",
            "independent(x, y) ⟺ P(y | x) = P(y) · P(x | x)",
            independence_right,
        ),
        stalk(
            "rational.self-quotient",
            "(2 · P(a)² − 1) / (2 · P(a)² − 1) = 1",
            "(2 * P(a) * P(a) - 1) / (2 * P(a) * P(a) - 1)",
            "1",
        ),
        custom(
            "update.prior-normalized-forward",
            "ratio condition → prior-normalized update = joint update",
            prior_normalized_forward,
        ),
        custom(
            "update.prior-normalized-backward",
            "prior-normalized update = joint update → ratio condition",
            prior_normalized_backward,
        ),
        custom(
            "update.sequential-joint",
            "update_x(update_y(P)) = update_{x∧y}(P) when either is defined",
            sequential_joint,
        ),
        custom("indicator.boolean", "1_x ∈ {0, 1}", indicator_boolean),
        stalk("indicator.zero", "1_0 = 0", "0 * inv(0)", "0"),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemResult {
    pub id: String,
    pub anchor: String,
    pub trials: usize,
    pub passed: bool,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub items: Vec<ItemResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn item(&self, id: &str) -> Option<&ItemResult> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ItemResult> {
        self.items.iter().filter(|i| !i.passed)
    }

    pub fn render_table(&self) -> String {
        let id_w = self
            .items
            .iter()
            .map(|i| i.id.len())
            .max()
            .unwrap_or(2)
            .max(2);
        let anchor_w = self
            .items
            .iter()
            .map(|i| i.anchor.chars().count())
            .max()
            .unwrap_or(6)
            .max(6);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<id_w$}  {:<anchor_w$}  {:>6}  result",
            "id", "anchor", "trials"
        );
        for i in &self.items {
            let pad = anchor_w - i.anchor.chars().count();
            let _ = write!(
                out,
                "{:<id_w$}  {}{}  {:>6}  {}",
                i.id,
                i.anchor,
                " ".repeat(pad),
                i.trials,
                if i.passed { "pass" } else { "FAIL" }
            );
            if let Some(c) = &i.counterexample {
                let _ = write!(out, "  {c}");
            }
            out.push('\n');
        }
        let passed = self.items.iter().filter(|i| i.passed).count();
        let _ = writeln!(out, "{passed}/{} items passed", self.items.len());
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "passed": self.all_passed(),
            "items": self.items.iter().map(|i| json!({
                "id": i.id,
                "anchor": i.anchor,
                "trials": i.trials,
                "passed": i.passed,
                "counterexample": i.counterexample,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Runs every item for `trials` random instances each.
pub fn axiom_suite(trials: usize, seed: u64) -> SuiteReport {
    axiom_suite_with(trials, seed, &Semantics::default())
}

pub fn axiom_suite_with(trials: usize, seed: u64, sem: &Semantics) -> SuiteReport {
    let trials = trials.max(1);
    let names = Names::from_events(["x", "y", "z", "a"]);
    let items = items()
        .into_iter()
        .enumerate()
        .map(|(n, item)| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (n as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            );
            let counterexample = match item.kind {
                Kind::Stalk(l, r) => {
                    let lhs = parse_stalk_expr(l, &names, true).expect("suite expression parses");
                    let rhs = parse_stalk_expr(r, &names, true).expect("suite expression parses");
                    match check_equation_with(
                        &lhs,
                        &rhs,
                        trials,
                        &mut rng,
                        sem,
                        &ModelConfig::default(),
                    ) {
                        Verdict::Holds { .. } => None,
                        Verdict::Counterexample(c) => Some(c.to_string()),
                    }
                }
                Kind::Event(l, r) => {
                    let lhs = parse_event_term(l, &names).expect("suite term parses");
                    let rhs = parse_event_term(r, &names).expect("suite term parses");
                    (0..trials).find_map(|_| event_trial(&mut rng, &lhs, &rhs).err())
                }
                Kind::Custom(f) => (0..trials).find_map(|_| f(&mut rng, sem).err()),
            };
            ItemResult {
                id: item.id.into(),
                anchor: item.anchor.into(),
                trials,
                passed: counterexample.is_none(),
                counterexample,
            }
        })
        .collect();
    SuiteReport { items }
}

fn event_trial(rng: &mut ChaCha8Rng, lhs: &EventTerm, rhs: &EventTerm) -> Result<(), String> {
    let gens = trial_generators(rng);
    let map = ["x", "y", "z"]
        .iter()
        .map(|v| (v.to_string(), random_term(rng, gens.names(), 2)))
        .collect();
    let (l, r) = (lhs.substitute(&map), rhs.substitute(&map));
    if equivalent(&l, &r) {
        Ok(())
    } else {
        Err(format!("{l} differs from {r}"))
    }
}

fn nonzero_stalk(rng: &mut ChaCha8Rng) -> Stalk {
    loop {
        let v = random_stalk(rng);
        if !v.is_zero() {
            return v;
        }
    }
}

fn inverse_law(rng: &mut ChaCha8Rng, _: &Semantics) -> Result<(), String> {
    let x = nonzero_stalk(rng);
    if (&x * &x.inv()).is_one() {
        Ok(())
    } else {
        Err(format!("x = {x}"))
    }
}

fn def_less(rng: &mut ChaCha8Rng, sem: &Semantics) -> Result<(), String> {
    let (x, y) = (random_stalk(rng), random_stalk(rng));
    if x.lt(&y) == (sem.sign)(&(&y - &x)).is_one() {
        Ok(())
    } else {
        Err(format!("x = {x}, y = {y}"))
    }
}

fn def_less_equal(rng: &mut ChaCha8Rng, sem: &Semantics) -> Result<(), String> {
    let (x, y) = (random_stalk(rng), random_stalk(rng));
    let s = |v: &Stalk| (sem.sign)(v);
    if x.le(&y) == s(&(s(&(&y - &x)) + Stalk::one())).is_one() {
        Ok(())
    } else {
        Err(format!("x = {x}, y = {y}"))
    }
}

fn indicator_boolean(rng: &mut ChaCha8Rng, _: &Semantics) -> Result<(), String> {
    let x = random_stalk(rng);
    let one_x = &x * &x.inv();
    if one_x.is_zero() || one_x.is_one() {
        Ok(())
    } else {
        Err(format!("x = {x}, 1_x = {one_x}"))
    }
}

/// A model with two events; half the time a product model with the events
/// over disjoint generators, so that they are independent.
fn event_pair(rng: &mut ChaCha8Rng) -> (PmfModel, EventTerm, EventTerm) {
    let k = rng.gen_range(2..=MAX_TRIAL_GENERATORS);
    let gens = Generators::new((0..k).map(|i| format!("g{i}"))).expect("small generator list");
    if rng.gen_bool(0.5) {
        let marginals: Vec<Stalk> = (0..k)
            .map(|_| Stalk::ratio(rng.gen_range(0..=8), 8))
            .collect();
        let model = PmfModel::product(gens.clone(), &marginals).expect("marginals in [0, 1]");
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

fn independence(rng: &mut ChaCha8Rng, swap: bool) -> Result<(), String> {
    let (m, x, y) = event_pair(rng);
    let (x, y) = if swap { (y, x) } else { (x, y) };
    let ind = m.independent(&x, &y).map_err(|e| e.to_string())?;
    let lhs = m.cond(&x, &y).map_err(|e| e.to_string())?;
    let rhs = m.prob(&x).map_err(|e| e.to_string())? * m.cond(&y, &y).map_err(|e| e.to_string())?;
    if ind == (lhs == rhs) {
        Ok(())
    } else {
        Err(format!(
            "x = {x}, y = {y}, independent = {ind}, model {m:?}"
        ))
    }
}

fn independence_left(rng: &mut ChaCha8Rng, _: &Semantics) -> Result<(), String> {
    independence(rng, false)
}

fn independence_right(rng: &mut ChaCha8Rng, _: &Semantics) -> Result<(), String> {
    independence(rng, true)
}

/// `(ratio condition, Q = R)` where `Q(α) = P(α ∧ x ∧ y) / (P(y) · P(x))`
/// divides by the prior `P(x)` and `R(α) = P(α ∧ x ∧ y) / P(x ∧ y)`, both
/// compared on every minterm and on `⊤`.
fn prior_normalized(m: &PmfModel, x: &EventTerm, y: &EventTerm) -> Result<(bool, bool), String> {
    let p = |t: &EventTerm| m.prob(t).map_err(|e| e.to_string());
    let xy = EventTerm::and(x.clone(), y.clone());
    let (px, py, pxy) = (p(x)?, p(y)?, p(&xy)?);
    let ratio = &pxy / &(&px * &py) == pxy.one_of();
    let gens = m.generators();
    let mut alphas: Vec<EventTerm> = (0..gens.minterm_count())
        .map(|i| gens.minterm_term(i))
        .collect();
    alphas.push(EventTerm::Top);
    let mut same = true;
    for a in &alphas {
        let num = p(&EventTerm::and(a.clone(), xy.clone()))?;
        same &= &num / &(&py * &px) == &num / &pxy;
    }
    Ok((ratio, same))
}

fn prior_normalized_forward(rng: &mut ChaCha8Rng, _: &Semantics) -> Result<(), String> {
    let (m, x, y) = event_pair(rng);
    match prior_normalized(&m, &x, &y)? {
        (true, false) => Err(format!("x = {x}, y = {y}, model {m:?}")),
        _ => Ok(()),
    }
}

fn prior_normalized_backward(rng: &mut ChaCha8Rng, _: &Semantics) -> Result<(), String> {
    let (m, x, y) = event_pair(rng);
    match prior_normalized(&m, &x, &y)? {
        (false, true) => Err(format!("x = {x}, y = {y}, model {m:?}")),
        _ => Ok(()),
    }
}

fn sequential_joint(rng: &mut ChaCha8Rng, _: &Semantics) -> Result<(), String> {
    let (m, x, y) = event_pair(rng);
    let xy = EventTerm::and(x.clone(), y.clone());
    let joint_defined = matches!(m.update(&xy), Ok(Ok(_)));
    let sequential_defined =
        matches!(m.update(&y), Ok(Ok(ref after)) if matches!(after.update(&x), Ok(Ok(_))));
    let agrees = match update_sides(&m, &x, &y) {
        Some((_, same)) => same,
        None => joint_defined == sequential_defined && !joint_defined,
    };
    if agrees {
        Ok(())
    } else {
        Err(format!("x = {x}, y = {y}, model {m:?}"))
    }
}
