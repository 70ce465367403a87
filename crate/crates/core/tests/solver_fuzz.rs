mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use meadowprob::event::Generators;
use meadowprob::lab::{random_model_with, ModelConfig};
use meadowprob::lang::{lower, parse, SpecDocument};
use meadowprob::solver::{solve, verify_witness, SolveResult, SolverMode, Witness};

fn run(doc: &SpecDocument, mode: SolverMode) -> SolveResult {
    solve(&lower(doc, mode).unwrap()).unwrap()
}

#[test]
fn witnesses_of_generated_documents_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..150 {
        let fuzzed = common::feasible_document(&mut rng);
        let doc = parse(&fuzzed.text).unwrap_or_else(|e| panic!("{e}\n{}", fuzzed.text));
        let planted = Witness {
            generators: doc.generators().unwrap(),
            weights: fuzzed.model.weights().to_vec(),
        };
        assert!(
            verify_witness(&doc, &planted, SolverMode::Strict),
            "{}",
            fuzzed.text
        );
        for mode in [SolverMode::Strict, SolverMode::Meadow] {
            let result = run(&doc, mode);
            let w = result.witness().unwrap_or_else(|| {
                panic!("{mode} refuted a satisfiable document:\n{}", fuzzed.text)
            });
            assert!(verify_witness(&doc, w, mode), "{}", fuzzed.text);
        }
    }
}

#[test]
fn planted_contradictions_are_refuted_in_both_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..150 {
        let text = common::planted_document(&mut rng);
        let doc = parse(&text).unwrap();
        for mode in [SolverMode::Strict, SolverMode::Meadow] {
            let result = run(&doc, mode);
            assert!(!result.is_sat(), "{text}");
            assert!(!result.contradiction().unwrap().holds());
        }
    }
}

/// Whenever the solver refutes a document, none of 10,000 sampled models
/// satisfies it.
#[test]
fn refutations_survive_model_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut refuted = 0;
    let mut satisfied = 0;
    while refuted < 4 || satisfied == 0 {
        let text = common::random_document(&mut rng);
        let doc = parse(&text).unwrap();
        let gens: Generators = doc.generators().unwrap();
        let result = run(&doc, SolverMode::Strict);
        if let Some(w) = result.witness() {
            assert!(verify_witness(&doc, w, SolverMode::Strict));
            satisfied += 1;
            continue;
        }
        refuted += 1;
        let config = ModelConfig {
            zero_probability: 0.3,
            ..ModelConfig::default()
        };
        for _ in 0..10_000 {
            let m = random_model_with(&mut rng, &gens, &config);
            let w = Witness {
                generators: gens.clone(),
                weights: m.weights().to_vec(),
            };
            assert!(
                !verify_witness(&doc, &w, SolverMode::Strict),
                "model {m:?} satisfies refuted\n{text}"
            );
        }
    }
}
