use proptest::prelude::*;

use super::*;
use crate::lang::{lower, parse};

fn q(s: &str) -> Stalk {
    s.parse().unwrap()
}

fn example_one(nh: &str) -> SpecDocument {
    parse(&format!(
        "event RD; event NH; P(RD) = 1/100000; P(NH) = {nh}; P(NH | RD) = 8/10;"
    ))
    .unwrap()
}

fn run(doc: &SpecDocument, mode: SolverMode) -> SolveResult {
    solve(&lower(doc, mode).unwrap()).unwrap()
}

#[test]
fn example_one_p_is_satisfiable() {
    let doc = example_one("4/10");
    let result = run(&doc, SolverMode::Strict);
    let w = result.witness().expect("sat");
    assert!(verify_witness(&doc, w, SolverMode::Strict));
    let m = w.to_model().unwrap();
    assert_eq!(
        m.cond(&EventTerm::gen("RD"), &EventTerm::gen("NH"))
            .unwrap(),
        q("1/50000")
    );
}

#[test]
fn documented_witness_is_accepted() {
    let doc = example_one("2/5");
    let gens = doc.generators().unwrap();
    let mut weights = vec![Stalk::zero(); 4];
    for (bits, w) in [
        ("11", "1/125000"),
        ("10", "1/500000"),
        ("01", "49999/125000"),
    ] {
        weights[gens.parse_bits(bits).unwrap()] = q(w);
    }
    let total: Stalk = weights.iter().sum();
    weights[0] = Stalk::one() - total;
    let w = Witness {
        generators: gens.clone(),
        weights: weights.clone(),
    };
    assert!(verify_witness(&doc, &w, SolverMode::Strict));

    let mut short = weights;
    short[0] = &short[0] - &q("1/10");
    assert!(!verify_witness(
        &doc,
        &Witness {
            generators: gens,
            weights: short
        },
        SolverMode::Strict
    ));
}

#[test]
fn example_one_r_is_refuted_by_monotonicity() {
    let result = run(&example_one("1/1000000"), SolverMode::Strict);
    assert!(!result.is_sat());
    let c = result.contradiction().unwrap();
    assert_eq!(c.lhs, q("1/1000000"));
    assert_eq!(c.rhs, q("8/1000000"));
    assert_eq!(c.relation, Relation::Ge);
    assert!(!c.holds());
    assert_eq!(c.to_string(), "1/1000000 >= 1/125000");
    let json = result.to_json();
    assert_eq!(json["status"], "unsat");
    let trace = json["trace"].as_array().unwrap();
    assert_eq!(
        trace.last().unwrap()["contradiction"],
        "1/1000000 >= 1/125000"
    );
    assert!(trace.iter().any(|s| s["op"] == "substitute"));
}

#[test]
fn example_one_r_is_refuted_in_meadow_mode_too() {
    let result = run(&example_one("1/1000000"), SolverMode::Meadow);
    assert!(!result.is_sat());
    let SolveResult::Unsat { trace } = &result else {
        unreachable!()
    };
    let branches = trace
        .iter()
        .filter(|s| matches!(s, TraceStep::Branch(_)))
        .count();
    assert_eq!(branches, 2);
}

#[test]
fn single_generator_midpoint() {
    let doc = parse("event x;").unwrap();
    let result = run(&doc, SolverMode::Strict);
    let w = result.witness().unwrap();
    assert_eq!(w.weights, vec![q("1/2"), q("1/2")]);
    assert_eq!(
        result.to_json(),
        serde_json::json!({"status": "sat", "witness": {"0": "1/2", "1": "1/2"}, "branch": {}})
    );
    assert_eq!(
        Witness::from_json(w.generators.clone(), &w.to_json()).unwrap(),
        *w
    );
}

#[test]
fn strict_bounds_are_met() {
    let doc = parse("event x; event y; P(x) > 0; P(x & y) > 1/2; P(y) < 1;").unwrap();
    let w = run(&doc, SolverMode::Strict).witness().cloned().unwrap();
    assert!(verify_witness(&doc, &w, SolverMode::Strict));
    let doc = parse("event x; P(x) > 1/2; P(x) < 1/2;").unwrap();
    let result = run(&doc, SolverMode::Strict);
    assert_eq!(result.contradiction().unwrap().relation, Relation::Gt);
}

#[test]
fn meadow_mode_allows_null_conditioning() {
    let doc = parse("event a; event b; P(b) = 0; P(a | b) = 0;").unwrap();
    assert!(!run(&doc, SolverMode::Strict).is_sat());
    let result = run(&doc, SolverMode::Meadow);
    let w = result.witness().unwrap();
    assert!(verify_witness(&doc, w, SolverMode::Meadow));
    assert!(!verify_witness(&doc, w, SolverMode::Strict));
    let SolveResult::Sat { branch, .. } = &result else {
        unreachable!()
    };
    assert_eq!(
        branch.get("P(a | b) = 0").map(String::as_str),
        Some("P(b) = 0")
    );

    let doc = parse("event a; event b; P(b) = 0; P(a | b) = 1/2;").unwrap();
    let result = run(&doc, SolverMode::Meadow);
    assert!(!result.is_sat());
}

#[test]
fn boxes_requirements_are_consistent() {
    let doc = parse(
        "var A in {occ, empty}; var B in {occ, empty}; var C in {occ, empty};
         P(C = occ | A = empty) = P(A = empty | A = empty);
         P(C = occ | B = empty) = P(B = empty | B = empty);
         P(A = empty, B = empty) = 0;
         P((A = empty | B = empty)) > 0;",
    )
    .unwrap();
    for mode in [SolverMode::Strict, SolverMode::Meadow] {
        let w = run(&doc, mode).witness().cloned().unwrap();
        assert!(verify_witness(&doc, &w, mode));
    }
}

#[test]
fn unused_codes_carry_no_weight() {
    let doc = parse("var W in {p, q, r}; P(W = p) = 1/4;").unwrap();
    let w = run(&doc, SolverMode::Strict).witness().cloned().unwrap();
    assert_eq!(w.get("11"), Some(&Stalk::zero()));
    assert!(verify_witness(&doc, &w, SolverMode::Strict));
    let mut bad = w.clone();
    bad.weights = vec![q("1/4"), q("1/4"), q("1/4"), q("1/4")];
    assert!(!verify_witness(&doc, &bad, SolverMode::Strict));
}

fn system(vars: &[&str], ineqs: &[(&[i64], &str, bool)]) -> LinearSystem {
    let mut sys = LinearSystem::new(vars.iter().map(|v| v.to_string()).collect());
    for (coeffs, rhs, strict) in ineqs {
        sys.inequalities.push(Inequality {
            coeffs: coeffs.iter().map(|&c| Stalk::from(c)).collect(),
            rhs: q(rhs),
            strict: *strict,
            label: String::new(),
        });
    }
    sys
}

#[test]
fn fm_keeps_ground_truths() {
    // u ≥ 0, u ≤ 1/2
    let out = fm_eliminate(
        &system(&["u"], &[(&[1], "0", false), (&[-1], "-1/2", false)]),
        0,
    );
    assert_eq!(out.inequalities.len(), 1);
    let row = &out.inequalities[0];
    assert!(row.is_ground() && !row.strict);
    assert!(row.holds(&[Stalk::zero()]));
}

#[test]
fn fm_exposes_strict_contradiction() {
    // u > 1, u < 1
    let out = fm_eliminate(
        &system(&["u"], &[(&[1], "1", true), (&[-1], "-1", true)]),
        0,
    );
    assert_eq!(out.inequalities.len(), 1);
    let row = &out.inequalities[0];
    assert!(row.is_ground() && row.strict && row.rhs.is_zero());
    assert!(!row.holds(&[Stalk::zero()]));
}

#[test]
fn fm_pairs_bounds() {
    // u ≥ v, u ≤ 1, v ≥ 3/4
    let sys = system(
        &["u", "v"],
        &[
            (&[1, -1], "0", false),
            (&[-1, 0], "-1", false),
            (&[0, 1], "3/4", false),
        ],
    );
    let out = fm_eliminate(&sys, 0);
    let rows: Vec<(Vec<Stalk>, Stalk)> = out
        .inequalities
        .iter()
        .map(|r| (r.coeffs.clone(), r.rhs.clone()))
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.contains(&(vec![Stalk::zero(), Stalk::from(-1)], Stalk::from(-1))));
    assert!(rows.contains(&(vec![Stalk::zero(), Stalk::one()], q("3/4"))));
}

#[test]
fn fm_splits_equalities() {
    let mut sys = system(&["u", "v"], &[(&[0, 1], "0", false)]);
    sys.equalities.push(Equality {
        coeffs: vec![Stalk::one(), Stalk::one()],
        rhs: Stalk::one(),
        label: String::new(),
    });
    sys.inequalities.push(Inequality {
        coeffs: vec![Stalk::one(), Stalk::zero()],
        rhs: Stalk::zero(),
        strict: false,
        label: String::new(),
    });
    let out = fm_eliminate(&sys, 0);
    assert!(out.equalities.is_empty());
    assert!(!out.occurs(0));
    assert!(out.holds(&[Stalk::zero(), Stalk::one()]));
    assert!(!out.holds(&[Stalk::zero(), Stalk::from(2)]));
}

/// Whether some value of `var` satisfies `sys` with the other variables
/// fixed. The solution set in `var` is an interval whose ends are among the
/// critical values where a row becomes tight, so it suffices to try those,
/// the midpoints between neighbours, and one point beyond each extreme.
fn extends(sys: &LinearSystem, var: usize, values: &[Stalk]) -> bool {
    let mut critical: Vec<Stalk> = sys
        .inequalities
        .iter()
        .filter(|r| !r.coeffs[var].is_zero())
        .map(|r| {
            let rest: Stalk = r
                .coeffs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != var)
                .map(|(j, c)| c * &values[j])
                .sum();
            (&r.rhs - &rest) / &r.coeffs[var]
        })
        .collect();
    critical.sort();
    critical.dedup();
    let mut candidates = critical.clone();
    for pair in critical.windows(2) {
        candidates.push(pair[0].midpoint(&pair[1]));
    }
    match (critical.first(), critical.last()) {
        (Some(lo), Some(hi)) => {
            candidates.push(lo - Stalk::one());
            candidates.push(hi + Stalk::one());
        }
        _ => candidates.push(Stalk::zero()),
    }
    candidates.into_iter().any(|x| {
        let mut v = values.to_vec();
        v[var] = x;
        sys.holds(&v)
    })
}

fn small_system() -> impl Strategy<Value = LinearSystem> {
    let row = (
        proptest::collection::vec(-2i64..=2, 3),
        -3i64..=3,
        1i64..=2,
        any::<bool>(),
    );
    proptest::collection::vec(row, 1..6).prop_map(|rows| {
        let mut sys = LinearSystem::new(vec!["u".into(), "v".into(), "w".into()]);
        for (coeffs, n, d, strict) in rows {
            sys.inequalities.push(Inequality {
                coeffs: coeffs.into_iter().map(Stalk::from).collect(),
                rhs: Stalk::ratio(n, d),
                strict,
                label: String::new(),
            });
        }
        sys
    })
}

proptest! {
    #[test]
    fn fm_projection_matches_brute_force(sys in small_system(), var in 0usize..3) {
        let projected = fm_eliminate(&sys, var);
        prop_assert!(!projected.occurs(var));
        let lattice: Vec<Stalk> = (-6..=6).map(|n| Stalk::ratio(n, 2)).collect();
        for a in &lattice {
            for b in &lattice {
                let mut values = vec![Stalk::zero(); 3];
                let others: Vec<usize> = (0..3).filter(|&j| j != var).collect();
                values[others[0]] = a.clone();
                values[others[1]] = b.clone();
                prop_assert_eq!(projected.holds(&values), extends(&sys, var, &values));
            }
        }
    }

    #[test]
    fn solve_system_agrees_with_its_witness(sys in small_system()) {
        match solve_system(&sys).unwrap() {
            Ok(values) => prop_assert!(sys.holds(&values)),
            Err(steps) => {
                let last = steps.last().unwrap();
                prop_assert!(matches!(last, TraceStep::Contradiction(c) if !c.holds()));
            }
        }
    }
}
