//! Boolean event terms, minterm normalization and the set-notation embedding.
//!
//! Minterms over an ordered generator list `g_0 .. g_{k-1}` are numbered so
//! that generator `g_j` occupies bit `k - 1 - j` of the index. Rendering a
//! minterm index as a `k`-character bit string therefore lists the
//! generators in declaration order (`"10"` is `g_0 ∧ ¬g_1`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Generator cap used when `MEADOWPROB_MAX_GENERATORS` is unset.
pub const DEFAULT_MAX_GENERATORS: usize = 16;

/// Environment variable overriding [`DEFAULT_MAX_GENERATORS`].
pub const MAX_GENERATORS_ENV: &str = "MEADOWPROB_MAX_GENERATORS";

/// Hard ceiling; truth tables beyond this do not fit in memory anyway.
const ABSOLUTE_MAX_GENERATORS: usize = 26;

/// The active generator cap.
pub fn generator_cap() -> usize {
    std::env::var(MAX_GENERATORS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|n| n.min(ABSOLUTE_MAX_GENERATORS))
        .unwrap_or(DEFAULT_MAX_GENERATORS)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("invalid generator name `{0}`")]
    InvalidName(String),
    #[error("{count} generators exceed the cap of {cap} (set {MAX_GENERATORS_ENV} to raise it)")]
    TooManyGenerators { count: usize, cap: usize },
    #[error("unmapped base set `{0}`")]
    UnmappedBase(String),
}

/// Generator names may additionally contain `.` so that encodings of
/// many-valued random variables cannot collide with user identifiers.
pub fn is_generator_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// An ordered, duplicate-free list of generator names.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Generators(Arc<[String]>);

impl Generators {
    pub fn new<I, S>(names: I) -> Result<Self, EventError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for name in &names {
            if !is_generator_name(name) {
                return Err(EventError::InvalidName(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(EventError::DuplicateGenerator(name.clone()));
            }
        }
        let cap = generator_cap();
        if names.len() > cap {
            return Err(EventError::TooManyGenerators {
                count: names.len(),
                cap,
            });
        }
        Ok(Generators(names.into()))
    }

    /// Generators in lexicographic order.
    pub fn sorted<I, S>(names: I) -> Result<Self, EventError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = names.into_iter().map(Into::into).collect();
        Self::new(set)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|g| g == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn minterm_count(&self) -> usize {
        1usize << self.len()
    }

    /// Bit string of a minterm index, one character per generator.
    pub fn bits(&self, index: usize) -> String {
        let k = self.len();
        (0..k)
            .map(|j| {
                if index >> (k - 1 - j) & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    pub fn parse_bits(&self, bits: &str) -> Option<usize> {
        if bits.len() != self.len() {
            return None;
        }
        let mut index = 0usize;
        for c in bits.chars() {
            index <<= 1;
            match c {
                '1' => index |= 1,
                '0' => {}
                _ => return None,
            }
        }
        Some(index)
    }

    /// Whether generator `j` appears positively in minterm `index`.
    pub fn is_positive(&self, index: usize, j: usize) -> bool {
        index >> (self.len() - 1 - j) & 1 == 1
    }

    /// The conjunction of literals describing minterm `index`.
    pub fn minterm_term(&self, index: usize) -> EventTerm {
        let mut literals = self.0.iter().enumerate().map(|(j, g)| {
            let atom = EventTerm::gen(g.clone());
            if self.is_positive(index, j) {
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
}

impl fmt::Debug for Generators {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// A Boolean event expression over named generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventTerm {
    Generator(String),
    Or(Box<EventTerm>, Box<EventTerm>),
    And(Box<EventTerm>, Box<EventTerm>),
    Not(Box<EventTerm>),
    Top,
    Bottom,
}

impl EventTerm {
    pub fn gen(name: impl Into<String>) -> Self {
        EventTerm::Generator(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: EventTerm) -> Self {
        EventTerm::Not(Box::new(t))
    }

    pub fn and(l: EventTerm, r: EventTerm) -> Self {
        EventTerm::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: EventTerm, r: EventTerm) -> Self {
        EventTerm::Or(Box::new(l), Box::new(r))
    }

    /// Generator names in order of first occurrence.
    pub fn generators(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_generators(&mut out);
        out
    }

    fn collect_generators(&self, out: &mut Vec<String>) {
        match self {
            EventTerm::Generator(g) => {
                if !out.contains(g) {
                    out.push(g.clone());
                }
            }
            EventTerm::Or(l, r) | EventTerm::And(l, r) => {
                l.collect_generators(out);
                r.collect_generators(out);
            }
            EventTerm::Not(t) => t.collect_generators(out),
            EventTerm::Top | EventTerm::Bottom => {}
        }
    }

    /// Replaces generators by the terms in `map`; unmapped generators stay.
    pub fn substitute(&self, map: &BTreeMap<String, EventTerm>) -> EventTerm {
        match self {
            EventTerm::Generator(g) => map.get(g).cloned().unwrap_or_else(|| self.clone()),
            EventTerm::Or(l, r) => EventTerm::or(l.substitute(map), r.substitute(map)),
            EventTerm::And(l, r) => EventTerm::and(l.substitute(map), r.substitute(map)),
            EventTerm::Not(t) => EventTerm::not(t.substitute(map)),
            EventTerm::Top | EventTerm::Bottom => self.clone(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            EventTerm::Or(l, r) | EventTerm::And(l, r) => 1 + l.size() + r.size(),
            EventTerm::Not(t) => 1 + t.size(),
            _ => 1,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            EventTerm::Or(..) => 1,
            EventTerm::And(..) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for EventTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `|` and `&` are printed left-associatively; a right operand of the
        // same precedence gets parentheses so the printed form reparses to
        // the identical tree.
        fn child(f: &mut fmt::Formatter<'_>, t: &EventTerm, min: u8) -> fmt::Result {
            if t.precedence() < min {
                write!(f, "({t})")
            } else {
                write!(f, "{t}")
            }
        }
        match self {
            EventTerm::Generator(g) => write!(f, "{g}"),
            EventTerm::Top => write!(f, "TOP"),
            EventTerm::Bottom => write!(f, "BOT"),
            EventTerm::Not(t) => {
                write!(f, "!")?;
                child(f, t, 3)
            }
            EventTerm::And(l, r) => {
                child(f, l, 2)?;
                write!(f, " & ")?;
                child(f, r, 3)
            }
            EventTerm::Or(l, r) => {
                child(f, l, 1)?;
                write!(f, " | ")?;
                child(f, r, 2)
            }
        }
    }
}

/// A set of minterms over an ordered generator list, stored as a truth table.
#[derive(Clone, PartialEq, Eq)]
pub struct MintermSet {
    gens: Generators,
    table: Vec<u64>,
}

impl MintermSet {
    pub fn empty(gens: &Generators) -> Self {
        MintermSet {
            gens: gens.clone(),
            table: vec![0; words_for(gens.len())],
        }
    }

    pub fn full(gens: &Generators) -> Self {
        let mut set = Self::empty(gens);
        for i in 0..gens.minterm_count() {
            set.insert(i);
        }
        set
    }

    pub fn from_indices(gens: &Generators, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(gens);
        for i in indices {
            assert!(i < gens.minterm_count(), "minterm index out of range");
            set.insert(i);
        }
        set
    }

    fn insert(&mut self, i: usize) {
        self.table[i / 64] |= 1u64 << (i % 64);
    }

    pub fn generators(&self) -> &Generators {
        &self.gens
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.gens.minterm_count() && self.table[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.table.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.table.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.gens.minterm_count()).filter(move |&i| self.contains(i))
    }

    pub fn is_subset(&self, other: &MintermSet) -> bool {
        self.table
            .iter()
            .zip(&other.table)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersection(&self, other: &MintermSet) -> MintermSet {
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| a & b)
            .collect();
        MintermSet {
            gens: self.gens.clone(),
            table,
        }
    }

    /// Bit strings of the members, in increasing index order.
    pub fn bit_strings(&self) -> Vec<String> {
        self.iter().map(|i| self.gens.bits(i)).collect()
    }
}

impl fmt::Debug for MintermSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.bit_strings()).finish()
    }
}

fn words_for(k: usize) -> usize {
    (1usize << k).div_ceil(64)
}

/// Truth table of a single generator, with unused high bits cleared.
fn generator_table(k: usize, j: usize) -> Vec<u64> {
    let n = 1usize << k;
    let mut table = vec![0u64; words_for(k)];
    let shift = k - 1 - j;
    for i in 0..n {
        if i >> shift & 1 == 1 {
            table[i / 64] |= 1 << (i % 64);
        }
    }
    table
}

fn full_table(k: usize) -> Vec<u64> {
    let n = 1usize << k;
    let mut table = vec![u64::MAX; words_for(k)];
    if !n.is_multiple_of(64) {
        table[n / 64] = (1u64 << (n % 64)) - 1;
    }
    table
}

/// The set of minterms over `gens` whose conjunction implies `t`.
pub fn minterms(t: &EventTerm, gens: &Generators) -> Result<MintermSet, EventError> {
    let k = gens.len();
    let full = full_table(k);
    fn go(t: &EventTerm, gens: &Generators, full: &[u64]) -> Result<Vec<u64>, EventError> {
        Ok(match t {
            EventTerm::Top => full.to_vec(),
            EventTerm::Bottom => vec![0; full.len()],
            EventTerm::Generator(g) => {
                let j = gens
                    .position(g)
                    .ok_or_else(|| EventError::UnknownGenerator(g.clone()))?;
                generator_table(gens.len(), j)
            }
            EventTerm::Not(inner) => {
                let mut v = go(inner, gens, full)?;
                for (w, f) in v.iter_mut().zip(full) {
                    *w = !*w & f;
                }
                v
            }
            EventTerm::And(l, r) => {
                let mut a = go(l, gens, full)?;
                let b = go(r, gens, full)?;
                for (x, y) in a.iter_mut().zip(&b) {
                    *x &= y;
                }
                a
            }
            EventTerm::Or(l, r) => {
                let mut a = go(l, gens, full)?;
                let b = go(r, gens, full)?;
                for (x, y) in a.iter_mut().zip(&b) {
                    *x |= y;
                }
                a
            }
        })
    }
    let table = go(t, gens, &full)?;
    Ok(MintermSet {
        gens: gens.clone(),
        table,
    })
}

/// Boolean-algebra equality, decided by minterm expansion over the union of
/// both terms' generators.
pub fn equivalent(a: &EventTerm, b: &EventTerm) -> bool {
    let mut names = a.generators();
    for g in b.generators() {
        if !names.contains(&g) {
            names.push(g);
        }
    }
    names.sort();
    let gens = match Generators::new(names) {
        Ok(g) => g,
        Err(e) => panic!("cannot decide equivalence: {e}"),
    };
    let ma = minterms(a, &gens).expect("generators collected from term");
    let mb = minterms(b, &gens).expect("generators collected from term");
    ma == mb
}

/// Set-notation event expressions, embedded into event terms by [`embed`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetExpr {
    Base(String),
    Union(Box<SetExpr>, Box<SetExpr>),
    Intersect(Box<SetExpr>, Box<SetExpr>),
    Empty,
    Universe,
}

impl SetExpr {
    pub fn base(name: impl Into<String>) -> Self {
        SetExpr::Base(name.into())
    }

    pub fn union(l: SetExpr, r: SetExpr) -> Self {
        SetExpr::Union(Box::new(l), Box::new(r))
    }

    pub fn intersect(l: SetExpr, r: SetExpr) -> Self {
        SetExpr::Intersect(Box::new(l), Box::new(r))
    }
}

/// The embedding homomorphism from set expressions into event terms.
pub fn embed(s: &SetExpr, base_map: &BTreeMap<String, EventTerm>) -> Result<EventTerm, EventError> {
    Ok(match s {
        SetExpr::Empty => EventTerm::Bottom,
        SetExpr::Universe => EventTerm::Top,
        SetExpr::Base(name) => base_map
            .get(name)
            .cloned()
            .ok_or_else(|| EventError::UnmappedBase(name.clone()))?,
        SetExpr::Union(l, r) => EventTerm::or(embed(l, base_map)?, embed(r, base_map)?),
        SetExpr::Intersect(l, r) => EventTerm::and(embed(l, base_map)?, embed(r, base_map)?),
    })
}
