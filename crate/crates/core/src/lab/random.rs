use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::event::{EventTerm, Generators};
use crate::meadow::Stalk;
use crate::pmf::PmfModel;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Weights are multiples of `1/d` for some `d` in `1..=max_denominator`.
    pub max_denominator: u64,
    /// Chance that a minterm is forced to weight zero.
    pub zero_probability: f64,
    /// Minterms that always get weight zero.
    pub forced_zero: BTreeSet<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            max_denominator: 24,
            zero_probability: 0.2,
            forced_zero: BTreeSet::new(),
        }
    }
}

/// A random model, deterministic in `seed`.
pub fn random_model(gens: &Generators, seed: u64) -> PmfModel {
    random_model_with(
        &mut ChaCha8Rng::seed_from_u64(seed),
        gens,
        &ModelConfig::default(),
    )
}

/// Stick-breaking over the minterms that are not zeroed: cut `[0, d]` at
/// sorted random integers and take the gaps, divided by `d`.
pub fn random_model_with<R: Rng + ?Sized>(
    rng: &mut R,
    gens: &Generators,
    config: &ModelConfig,
) -> PmfModel {
    let n = gens.minterm_count();
    let mut free: Vec<usize> = (0..n)
        .filter(|i| {
            !config.forced_zero.contains(i)
                && !rng.gen_bool(config.zero_probability.clamp(0.0, 1.0))
        })
        .collect();
    if free.is_empty() {
        let open: Vec<usize> = (0..n).filter(|i| !config.forced_zero.contains(i)).collect();
        assert!(!open.is_empty(), "every minterm is forced to zero");
        free.push(open[rng.gen_range(0..open.len())]);
    }
    let d = rng.gen_range(1..=config.max_denominator.max(1));
    let mut cuts: Vec<u64> = (0..free.len() - 1).map(|_| rng.gen_range(0..=d)).collect();
    cuts.sort_unstable();
    cuts.push(d);
    let mut weights = vec![Stalk::zero(); n];
    let mut prev = 0u64;
    for (cell, cut) in free.iter().zip(cuts) {
        weights[*cell] = Stalk::ratio((cut - prev) as i64, d as i64);
        prev = cut;
    }
    PmfModel::new(gens.clone(), weights).expect("stick-breaking yields a pmf")
}

/// A random event term over `names` of nesting depth at most `depth`.
pub fn random_term<R: Rng + ?Sized>(rng: &mut R, names: &[String], depth: u32) -> EventTerm {
    if depth == 0 || names.is_empty() || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0 => EventTerm::Top,
            1 => EventTerm::Bottom,
            _ if names.is_empty() => EventTerm::Top,
            _ => EventTerm::gen(names[rng.gen_range(0..names.len())].clone()),
        };
    }
    match rng.gen_range(0..3) {
        0 => EventTerm::not(random_term(rng, names, depth - 1)),
        1 => EventTerm::and(
            random_term(rng, names, depth - 1),
            random_term(rng, names, depth - 1),
        ),
        _ => EventTerm::or(
            random_term(rng, names, depth - 1),
            random_term(rng, names, depth - 1),
        ),
    }
}

/// A small random rational, zero and ±1 included with some weight.
pub fn random_stalk<R: Rng + ?Sized>(rng: &mut R) -> Stalk {
    match rng.gen_range(0..10) {
        0 => Stalk::zero(),
        1 => Stalk::one(),
        2 => Stalk::from(-1),
        _ => Stalk::ratio(rng.gen_range(-30..=30), rng.gen_range(1..=12)),
    }
}
