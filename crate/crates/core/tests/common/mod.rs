#![allow(dead_code)]

use rand::Rng;

use meadowprob::event::{EventTerm, Generators};
use meadowprob::lab::{random_model_with, random_term, ModelConfig};
use meadowprob::lang::{render_event, Names};
use meadowprob::meadow::Stalk;
use meadowprob::pmf::PmfModel;

pub struct Fuzzed {
    pub text: String,
    pub model: PmfModel,
}

fn header(gens: &Generators) -> String {
    gens.names()
        .iter()
        .map(|g| format!("event {g};\n"))
        .collect()
}

fn term<R: Rng>(rng: &mut R, gens: &Generators) -> EventTerm {
    random_term(rng, gens.names(), 2)
}

/// Parenthesized, so that a disjunction is legal before the bar.
fn show(t: &EventTerm, names: &Names) -> String {
    format!("({})", render_event(t, names))
}

/// A value strictly between `lo` and `hi`, or `lo` itself when they meet.
fn between<R: Rng>(rng: &mut R, lo: &Stalk, hi: &Stalk) -> Stalk {
    let t = Stalk::ratio(rng.gen_range(1..8), 8);
    lo + &(&(hi - lo) * &t)
}

/// A constraint that `m` satisfies in strict mode.
pub fn true_constraint<R: Rng>(rng: &mut R, m: &PmfModel) -> String {
    let gens = m.generators();
    let names = Names::from_events(gens.names().iter().cloned());
    loop {
        let x = term(rng, gens);
        let px = m.prob(&x).unwrap();
        match rng.gen_range(0..7) {
            0 => return format!("P({}) = {px}", show(&x, &names)),
            1 => {
                let y = term(rng, gens);
                let pxy = m.prob(&EventTerm::and(x.clone(), y.clone())).unwrap();
                return format!("P({}, {}) = {pxy}", show(&x, &names), show(&y, &names));
            }
            2 => {
                let bound = between(rng, &Stalk::zero(), &px);
                let rel = if px.is_zero() {
                    ">="
                } else {
                    [">", ">="][rng.gen_range(0..2)]
                };
                return format!("P({}) {rel} {bound}", show(&x, &names));
            }
            3 => {
                let bound = between(rng, &px, &Stalk::one());
                let rel = if px.is_one() {
                    "<="
                } else {
                    ["<", "<="][rng.gen_range(0..2)]
                };
                return format!("P({}) {rel} {bound}", show(&x, &names));
            }
            4 | 5 => {
                let y = term(rng, gens);
                if m.prob(&y).unwrap().is_zero() {
                    continue;
                }
                let c = m.cond(&x, &y).unwrap();
                return format!("P({} | {}) = {c}", show(&x, &names), show(&y, &names));
            }
            _ => {
                let y = term(rng, gens);
                let x2 = term(rng, gens);
                if m.cond(&x, &y).unwrap() != m.cond(&x2, &y).unwrap() {
                    continue;
                }
                return format!(
                    "P({} | {}) = P({} | {})",
                    show(&x, &names),
                    show(&y, &names),
                    show(&x2, &names),
                    show(&y, &names)
                );
            }
        }
    }
}

pub fn fuzz_generators<R: Rng>(rng: &mut R) -> Generators {
    let k = rng.gen_range(1..=4);
    Generators::new((0..k).map(|i| format!("e{i}"))).unwrap()
}

/// A document built from constraints that a sampled model satisfies.
pub fn feasible_document<R: Rng>(rng: &mut R) -> Fuzzed {
    let gens = fuzz_generators(rng);
    let model = random_model_with(rng, &gens, &ModelConfig::default());
    let mut text = header(&gens);
    for _ in 0..rng.gen_range(1..=5) {
        text.push_str(&true_constraint(rng, &model));
        text.push_str(";\n");
    }
    Fuzzed { text, model }
}

/// A feasible document plus `P(x ∧ y) = b` and `P(x) = a` with `a < b`.
pub fn planted_document<R: Rng>(rng: &mut R) -> String {
    let mut text = feasible_document(rng).text;
    let gens = Generators::new(
        text.lines()
            .filter_map(|l| l.strip_prefix("event "))
            .map(|l| l.trim_end_matches(';').to_string()),
    )
    .unwrap();
    let names = Names::from_events(gens.names().iter().cloned());
    let x = term(rng, &gens);
    let y = term(rng, &gens);
    let b = Stalk::ratio(rng.gen_range(1..=12), 12);
    let a = between(rng, &Stalk::zero(), &b);
    let lines = [
        format!("P({}, {}) = {b};\n", show(&x, &names), show(&y, &names)),
        format!("P({}) = {a};\n", show(&x, &names)),
    ];
    for l in lines {
        text.push_str(&l);
    }
    text
}

/// A document of random constraints with no model behind them.
pub fn random_document<R: Rng>(rng: &mut R) -> String {
    let gens = fuzz_generators(rng);
    let names = Names::from_events(gens.names().iter().cloned());
    let mut text = header(&gens);
    for _ in 0..rng.gen_range(1..=4) {
        let x = term(rng, &gens);
        let v = Stalk::ratio(rng.gen_range(0..=6), 6);
        let line = match rng.gen_range(0..4) {
            0 => format!(
                "P({}) {} {v}",
                show(&x, &names),
                [">", ">=", "<", "<="][rng.gen_range(0..4)]
            ),
            1 => format!("P({}) = {v}", show(&x, &names)),
            2 => format!(
                "P({} | {}) = {v}",
                show(&x, &names),
                show(&term(rng, &gens), &names)
            ),
            _ => format!(
                "P({}, {}) = {v}",
                show(&x, &names),
                show(&term(rng, &gens), &names)
            ),
        };
        text.push_str(&line);
        text.push_str(";\n");
    }
    text
}
