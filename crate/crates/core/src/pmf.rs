//! Concrete pmf-structures over a finite generator list.
//!
//! A [`PmfModel`] assigns a nonnegative stalk to every minterm; the weights
//! sum to one. The probability of an event term is the sum of the weights
//! of its minterms. Conditional probability uses meadow division, so
//! conditioning on a null event yields zero rather than an error.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::event::{equivalent, minterms, EventError, EventTerm, Generators, MintermSet};
use crate::meadow::Stalk;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PmfError {
    #[error(transparent)]
    Event(#[from] EventError),
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("negative weight {weight} on minterm {bits}")]
    NegativeWeight { bits: String, weight: Stalk },
    #[error("weights sum to {0}, not 1")]
    NotNormalized(Stalk),
    #[error("unknown value `{label}` for random variable `{var}`")]
    UnknownLabel { var: String, label: String },
}

/// Evidence with probability zero: conditioning on it yields the all-zero
/// valuation, which is not a pmf.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("evidence `{evidence}` has probability 0")]
pub struct DegenerateUpdate {
    pub evidence: EventTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] PmfError),
}

/// A probability mass function given by its minterm weights.
#[derive(Clone, PartialEq, Eq)]
pub struct PmfModel {
    gens: Generators,
    weights: Vec<Stalk>,
}

impl PmfModel {
    /// Builds a model, checking nonnegativity and normalization.
    pub fn new(gens: Generators, weights: Vec<Stalk>) -> Result<Self, PmfError> {
        let model = Self::new_unchecked(gens, weights)?;
        model.check()?;
        Ok(model)
    }

    /// Builds a valuation without the pmf invariants. Used for candidate
    /// witnesses that still have to be verified.
    pub fn new_unchecked(gens: Generators, weights: Vec<Stalk>) -> Result<Self, PmfError> {
        let expected = gens.minterm_count();
        if weights.len() != expected {
            return Err(PmfError::WeightCount {
                expected,
                got: weights.len(),
            });
        }
        Ok(PmfModel { gens, weights })
    }

    pub fn uniform(gens: Generators) -> Self {
        let n = gens.minterm_count();
        let w = Stalk::ratio(1, n as i64);
        PmfModel {
            gens,
            weights: vec![w; n],
        }
    }

    /// Product model from independent marginals `P(g_j) = marginals[j]`.
    pub fn product(gens: Generators, marginals: &[Stalk]) -> Result<Self, PmfError> {
        if marginals.len() != gens.len() {
            return Err(PmfError::WeightCount {
                expected: gens.len(),
                got: marginals.len(),
            });
        }
        let weights = (0..gens.minterm_count())
            .map(|i| {
                marginals
                    .iter()
                    .enumerate()
                    .fold(Stalk::one(), |acc, (j, p)| {
                        if gens.is_positive(i, j) {
                            acc * p
                        } else {
                            acc * (Stalk::one() - p)
                        }
                    })
            })
            .collect();
        Self::new(gens, weights)
    }

    /// Checks the pmf invariants: every weight satisfies `s(s(w) + 1) = 1`
    /// and the weights sum to one.
    pub fn check(&self) -> Result<(), PmfError> {
        for (i, w) in self.weights.iter().enumerate() {
            if !(w.sign() + Stalk::one()).sign().is_one() {
                return Err(PmfError::NegativeWeight {
                    bits: self.gens.bits(i),
                    weight: w.clone(),
                });
            }
        }
        let total: Stalk = self.weights.iter().sum();
        if !total.is_one() {
            return Err(PmfError::NotNormalized(total));
        }
        Ok(())
    }

    pub fn generators(&self) -> &Generators {
        &self.gens
    }

    pub fn weights(&self) -> &[Stalk] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> &Stalk {
        &self.weights[index]
    }

    pub fn minterms(&self, t: &EventTerm) -> Result<MintermSet, EventError> {
        minterms(t, &self.gens)
    }

    /// `P(t)`: the sum of the weights of the minterms of `t`.
    pub fn prob(&self, t: &EventTerm) -> Result<Stalk, EventError> {
        let set = self.minterms(t)?;
        Ok(self.mass(&set))
    }

    pub fn mass(&self, set: &MintermSet) -> Stalk {
        set.iter().map(|i| &self.weights[i]).sum()
    }

    /// `P(x | y) = P(x ∧ y) · P(y)⁻¹`; zero when `P(y) = 0`.
    pub fn cond(&self, x: &EventTerm, y: &EventTerm) -> Result<Stalk, EventError> {
        let joint = self.prob(&EventTerm::and(x.clone(), y.clone()))?;
        let given = self.prob(y)?;
        Ok(joint / given)
    }

    /// Exact test of `P(x ∧ y) = P(x) · P(y)`.
    pub fn independent(&self, x: &EventTerm, y: &EventTerm) -> Result<bool, EventError> {
        let joint = self.prob(&EventTerm::and(x.clone(), y.clone()))?;
        Ok(joint == self.prob(x)? * self.prob(y)?)
    }

    /// Posterior model `P(· | y)`.
    pub fn update(&self, y: &EventTerm) -> Result<Result<PmfModel, DegenerateUpdate>, EventError> {
        let evidence = self.minterms(y)?;
        let mass = self.mass(&evidence);
        if mass.is_zero() {
            return Ok(Err(DegenerateUpdate {
                evidence: y.clone(),
            }));
        }
        let inv = mass.inv();
        let weights = (0..self.weights.len())
            .map(|i| {
                if evidence.contains(i) {
                    &self.weights[i] * &inv
                } else {
                    Stalk::zero()
                }
            })
            .collect();
        Ok(Ok(PmfModel {
            gens: self.gens.clone(),
            weights,
        }))
    }

    /// Text form: a `generators:` line, then one `bits: weight` line per
    /// minterm in index order.
    pub fn to_text(&self) -> String {
        let mut out = format!("generators: {}\n", self.gens.names().join(", "));
        for (i, w) in self.weights.iter().enumerate() {
            let bits = self.gens.bits(i);
            let bits = if bits.is_empty() {
                "-".to_string()
            } else {
                bits
            };
            out.push_str(&format!("{bits}: {w}\n"));
        }
        out
    }

    /// Parses the text form. Blank lines and `#` comments are ignored;
    /// minterm lines may come in any order but must cover every minterm once.
    pub fn from_text(text: &str) -> Result<PmfModel, ModelParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let syntax = |line, message: String| ModelParseError::Syntax { line, message };
        let (line_no, header) = lines
            .next()
            .ok_or_else(|| syntax(1, "missing `generators:` line".into()))?;
        let names = header
            .strip_prefix("generators:")
            .ok_or_else(|| syntax(line_no, "expected `generators:`".into()))?;
        let names: Vec<&str> = names
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        let gens = Generators::new(names).map_err(|e| syntax(line_no, e.to_string()))?;
        let mut weights: Vec<Option<Stalk>> = vec![None; gens.minterm_count()];
        for (line_no, line) in lines {
            let (bits, value) = line
                .split_once(':')
                .ok_or_else(|| syntax(line_no, "expected `bits: weight`".into()))?;
            let bits = bits.trim();
            let index = if bits == "-" && gens.is_empty() {
                Some(0)
            } else {
                gens.parse_bits(bits)
            };
            let index = index.ok_or_else(|| syntax(line_no, format!("bad minterm `{bits}`")))?;
            let value: Stalk = value
                .trim()
                .parse()
                .map_err(|e| syntax(line_no, format!("{e}")))?;
            if weights[index].replace(value).is_some() {
                return Err(syntax(line_no, format!("minterm `{bits}` given twice")));
            }
        }
        let mut out = Vec::with_capacity(weights.len());
        for (i, w) in weights.into_iter().enumerate() {
            match w {
                Some(w) => out.push(w),
                None => {
                    return Err(syntax(
                        0,
                        format!("missing weight for minterm `{}`", gens.bits(i)),
                    ))
                }
            }
        }
        Ok(PmfModel::new(gens, out)?)
    }
}

impl fmt::Debug for PmfModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (i, w) in self.weights.iter().enumerate() {
            map.entry(&self.gens.bits(i), w);
        }
        map.finish()
    }
}

/// A random variable: a name, a finite ordered domain, and one event term
/// per domain value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomVariable {
    pub name: String,
    pub domain: Vec<String>,
    pub events: BTreeMap<String, EventTerm>,
}

impl RandomVariable {
    pub fn new(name: impl Into<String>, family: Vec<(String, EventTerm)>) -> Self {
        let domain = family.iter().map(|(l, _)| l.clone()).collect();
        RandomVariable {
            name: name.into(),
            domain,
            events: family.into_iter().collect(),
        }
    }

    /// Binary encoding over `⌈log₂ n⌉` generators. Value `i` of the domain
    /// is the minterm whose bits spell `i`; codes at or past `n` are unused
    /// and must carry probability zero. A two-valued variable uses a single
    /// generator `g` with family `{g, ¬g}`.
    pub fn encoded(name: impl Into<String>, domain: Vec<String>, generators: &[String]) -> Self {
        let bits = generators.len();
        let family = domain
            .iter()
            .enumerate()
            .map(|(i, label)| {
                (
                    label.clone(),
                    code_term(generators, code_for(i, domain.len()), bits),
                )
            })
            .collect();
        Self::new(name, family)
    }

    /// Generator names for the binary encoding of an `n`-valued variable.
    pub fn encoding_generators(name: &str, n: usize) -> Vec<String> {
        match bits_for(n) {
            0 => Vec::new(),
            1 => vec![name.to_string()],
            b => (0..b).map(|i| format!("{name}.{i}")).collect(),
        }
    }

    /// Event terms for the codes not used by any domain value.
    pub fn unused_codes(generators: &[String], n: usize) -> Vec<EventTerm> {
        let b = generators.len();
        (n..(1usize << b))
            .map(|c| code_term(generators, c, b))
            .collect()
    }
}

fn bits_for(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// A two-valued variable maps its first value to `g`; the binary code of the
/// first value is therefore all ones.
fn code_for(i: usize, n: usize) -> usize {
    if n == 2 {
        1 - i
    } else {
        i
    }
}

fn code_term(generators: &[String], code: usize, bits: usize) -> EventTerm {
    let mut literals = generators.iter().enumerate().map(|(j, g)| {
        let atom = EventTerm::gen(g.clone());
        if code >> (bits - 1 - j) & 1 == 1 {
            atom
        } else {
            EventTerm::not(atom)
        }
    });
    match literals.next() {
        None => EventTerm::Top,
        Some(first) => literals.fold(first, EventTerm::and),
    }
}

/// `P(A = label)` is `P(rv_event(A, label))`.
pub fn rv_event(v: &RandomVariable, label: &str) -> Result<EventTerm, PmfError> {
    v.events
        .get(label)
        .cloned()
        .ok_or_else(|| PmfError::UnknownLabel {
            var: v.name.clone(),
            label: label.to_string(),
        })
}

/// Checks the random-variable theory in `m`: the events of distinct values
/// are disjoint and their probabilities sum to one.
pub fn validate_rv(m: &PmfModel, v: &RandomVariable) -> Result<bool, EventError> {
    let family: Vec<&EventTerm> = v.domain.iter().filter_map(|l| v.events.get(l)).collect();
    for (i, a) in family.iter().enumerate() {
        for b in &family[i + 1..] {
            let meet = EventTerm::and((*a).clone(), (*b).clone());
            if !equivalent(&meet, &EventTerm::Bottom) {
                return Ok(false);
            }
        }
    }
    let mut total = Stalk::zero();
    for t in family {
        total += &m.prob(t)?;
    }
    Ok(total.is_one())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: &str) -> EventTerm {
        EventTerm::gen(n)
    }

    fn q(s: &str) -> Stalk {
        s.parse().unwrap()
    }

    fn gens(names: &[&str]) -> Generators {
        Generators::new(names.iter().copied()).unwrap()
    }

    /// Model over `[RD, NH]` consistent with the rare-disease data.
    fn disease_model() -> PmfModel {
        // minterm order 00, 01, 10, 11 with RD first
        let w11 = q("1/125000");
        let w10 = q("1/500000");
        let w01 = q("2/5") - &w11;
        let w00 = Stalk::one() - &w11 - &w10 - &w01;
        PmfModel::new(gens(&["RD", "NH"]), vec![w00, w01, w10, w11]).unwrap()
    }

    #[test]
    fn prob_examples() {
        let m = PmfModel::uniform(gens(&["x", "y"]));
        assert_eq!(m.prob(&EventTerm::Top).unwrap(), Stalk::one());
        assert_eq!(m.prob(&EventTerm::Bottom).unwrap(), Stalk::zero());
        let disj = m.prob(&EventTerm::or(g("x"), g("y"))).unwrap();
        let incl_excl = m.prob(&g("x")).unwrap() + m.prob(&g("y")).unwrap()
            - m.prob(&EventTerm::and(g("x"), g("y"))).unwrap();
        assert_eq!(disj, q("3/4"));
        assert_eq!(disj, incl_excl);
        assert!(m.prob(&g("z")).is_err());
    }

    #[test]
    fn cond_examples() {
        let m = disease_model();
        assert_eq!(m.prob(&g("RD")).unwrap(), q("1/100000"));
        assert_eq!(m.prob(&g("NH")).unwrap(), q("2/5"));
        assert_eq!(m.cond(&g("NH"), &g("RD")).unwrap(), q("4/5"));
        assert_eq!(m.cond(&g("RD"), &g("NH")).unwrap(), q("1/50000"));
        assert_eq!(m.cond(&g("NH"), &g("NH")).unwrap(), Stalk::one());

        let point = PmfModel::new(
            gens(&["x", "y"]),
            vec![Stalk::zero(), Stalk::zero(), Stalk::one(), Stalk::zero()],
        )
        .unwrap();
        assert_eq!(point.prob(&g("y")).unwrap(), Stalk::zero());
        assert_eq!(point.cond(&g("x"), &g("y")).unwrap(), Stalk::zero());
    }

    #[test]
    fn independence_examples() {
        let m = PmfModel::product(gens(&["x", "y"]), &[q("1/3"), q("1/4")]).unwrap();
        assert!(m.independent(&g("x"), &g("y")).unwrap());

        let half = q("1/2");
        let m = PmfModel::new(
            gens(&["x", "y"]),
            vec![half.clone(), Stalk::zero(), Stalk::zero(), half],
        )
        .unwrap();
        assert!(!m.independent(&g("x"), &g("y")).unwrap());

        let m = PmfModel::new(
            gens(&["x", "y"]),
            vec![q("1/3"), Stalk::zero(), q("2/3"), Stalk::zero()],
        )
        .unwrap();
        assert_eq!(m.prob(&g("y")).unwrap(), Stalk::zero());
        assert!(m.independent(&g("x"), &g("y")).unwrap());
    }

    #[test]
    fn update_examples() {
        let m = PmfModel::uniform(gens(&["x"]));
        let post = m.update(&g("x")).unwrap().unwrap();
        assert_eq!(post.weights(), &[Stalk::zero(), Stalk::one()]);

        let post = disease_model().update(&g("NH")).unwrap().unwrap();
        post.check().unwrap();
        assert_eq!(post.prob(&g("RD")).unwrap(), q("1/50000"));

        let err = m.update(&EventTerm::Bottom).unwrap().unwrap_err();
        assert_eq!(err.evidence, EventTerm::Bottom);
    }

    #[test]
    fn model_invariants_are_enforced() {
        let gs = gens(&["x"]);
        assert!(matches!(
            PmfModel::new(gs.clone(), vec![q("1/2"), q("2/5")]),
            Err(PmfError::NotNormalized(_))
        ));
        assert!(matches!(
            PmfModel::new(gs.clone(), vec![q("-1/2"), q("3/2")]),
            Err(PmfError::NegativeWeight { .. })
        ));
        assert!(matches!(
            PmfModel::new(gs, vec![Stalk::one()]),
            Err(PmfError::WeightCount { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let m = disease_model();
        let text = m.to_text();
        assert!(text.starts_with("generators: RD, NH\n00: "));
        assert!(text.contains("\n11: 1/125000\n"));
        assert_eq!(PmfModel::from_text(&text).unwrap(), m);

        let empty = PmfModel::uniform(Generators::new(Vec::<String>::new()).unwrap());
        assert_eq!(PmfModel::from_text(&empty.to_text()).unwrap(), empty);
    }

    #[test]
    fn text_errors() {
        assert!(matches!(
            PmfModel::from_text(""),
            Err(ModelParseError::Syntax { .. })
        ));
        assert!(matches!(
            PmfModel::from_text("generators: a\n1: 1\n"),
            Err(ModelParseError::Syntax { .. })
        ));
        assert!(matches!(
            PmfModel::from_text("generators: a\n1: 1/2\n0: 1/3\n"),
            Err(ModelParseError::Invalid(PmfError::NotNormalized(_)))
        ));
        assert!(matches!(
            PmfModel::from_text("generators: a\n1: 1/2\n1: 1/2\n"),
            Err(ModelParseError::Syntax { line: 3, .. })
        ));
    }

    fn boxes() -> (Generators, RandomVariable) {
        let domain = vec!["occ".to_string(), "empty".to_string()];
        let names = RandomVariable::encoding_generators("A", 2);
        let rv = RandomVariable::encoded("A", domain, &names);
        (Generators::new(names).unwrap(), rv)
    }

    #[test]
    fn rv_event_examples() {
        let (_, a) = boxes();
        assert_eq!(rv_event(&a, "occ").unwrap(), g("A"));
        assert_eq!(rv_event(&a, "empty").unwrap(), EventTerm::not(g("A")));
        assert!(matches!(
            rv_event(&a, "full"),
            Err(PmfError::UnknownLabel { .. })
        ));
    }

    #[test]
    fn validate_rv_examples() {
        let (gs, a) = boxes();
        let m = PmfModel::new(gs, vec![q("1/3"), q("2/3")]).unwrap();
        assert!(validate_rv(&m, &a).unwrap());

        let m = PmfModel::uniform(gens(&["x", "y"]));
        let overlapping =
            RandomVariable::new("V", vec![("a".into(), g("x")), ("b".into(), g("y"))]);
        assert!(!validate_rv(&m, &overlapping).unwrap());

        let names = RandomVariable::encoding_generators("T", 3);
        assert_eq!(names, vec!["T.0", "T.1"]);
        let t = RandomVariable::encoded("T", vec!["a".into(), "b".into(), "c".into()], &names);
        // codes 00, 01, 10 are used; 11 is unused and carries 1/10
        let m = PmfModel::new(
            Generators::new(names.clone()).unwrap(),
            vec![q("3/10"), q("3/10"), q("3/10"), q("1/10")],
        )
        .unwrap();
        assert!(!validate_rv(&m, &t).unwrap());
        assert_eq!(
            RandomVariable::unused_codes(&names, 3),
            vec![EventTerm::and(g("T.0"), g("T.1"))]
        );
    }

    #[test]
    fn encoding_sizes() {
        assert_eq!(bits_for(1), 0);
        assert_eq!(bits_for(2), 1);
        assert_eq!(bits_for(3), 2);
        assert_eq!(bits_for(4), 2);
        assert_eq!(bits_for(5), 3);
        let single = RandomVariable::encoded("U", vec!["only".into()], &[]);
        assert_eq!(rv_event(&single, "only").unwrap(), EventTerm::Top);
    }
}
