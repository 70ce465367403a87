use std::collections::{BTreeMap, HashMap};

use crate::meadow::Stalk;

use super::{GroundContradiction, Inequality, LinearSystem, Relation};

/// `coeffs · u rel rhs`, where the right-hand side is kept as a sum of
/// contributions from the input rows it was derived from.
#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coeffs: Vec<Stalk>,
    pub rel: Relation,
    pub parts: BTreeMap<usize, Stalk>,
    pub label: String,
}

impl Row {
    pub fn new(coeffs: Vec<Stalk>, rel: Relation, rhs: Stalk, origin: usize, label: &str) -> Self {
        let mut parts = BTreeMap::new();
        if !rhs.is_zero() {
            parts.insert(origin, rhs);
        }
        Row {
            coeffs,
            rel,
            parts,
            label: label.to_string(),
        }
    }

    pub fn rhs(&self) -> Stalk {
        self.parts.values().sum()
    }

    pub fn coeff(&self, var: usize) -> &Stalk {
        &self.coeffs[var]
    }

    pub fn mentions(&self, var: usize) -> bool {
        !self.coeffs[var].is_zero()
    }

    pub fn is_ground(&self) -> bool {
        self.coeffs.iter().all(Stalk::is_zero)
    }

    /// Truth of a ground row `0 rel rhs`.
    pub fn ground_holds(&self) -> bool {
        let rhs = self.rhs();
        match self.rel {
            Relation::Eq => rhs.is_zero(),
            Relation::Ge => !rhs.is_positive(),
            Relation::Gt => rhs.is_negative(),
        }
    }

    /// The ground row `0 rel Σ parts` written as `N rel P`, with the
    /// negative contributions moved to the left.
    pub fn contradiction(&self) -> GroundContradiction {
        let lhs: Stalk = self
            .parts
            .values()
            .filter(|p| p.is_negative())
            .map(|p| -p)
            .sum();
        let rhs: Stalk = self.parts.values().filter(|p| p.is_positive()).sum();
        GroundContradiction {
            lhs,
            relation: self.rel,
            rhs,
        }
    }

    pub fn scale(&mut self, k: &Stalk) {
        for c in &mut self.coeffs {
            *c *= k;
        }
        for p in self.parts.values_mut() {
            *p *= k;
        }
    }

    /// `self += k · other`
    pub fn add_scaled(&mut self, other: &Row, k: &Stalk) {
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !o.is_zero() {
                *c += &(o * k);
            }
        }
        for (id, p) in &other.parts {
            let entry = self.parts.entry(*id).or_insert_with(Stalk::zero);
            *entry += &(p * k);
            if entry.is_zero() {
                self.parts.remove(id);
            }
        }
    }

    /// Scales so the first nonzero coefficient has magnitude one.
    pub fn normalize(&mut self) {
        if let Some(c) = self.coeffs.iter().find(|c| !c.is_zero()).cloned() {
            let k = if self.rel == Relation::Eq {
                c.inv()
            } else {
                c.abs().inv()
            };
            if !k.is_one() {
                self.scale(&k);
            }
        }
    }
}

/// One Fourier–Motzkin step on inequality rows: every lower bound on `var`
/// is paired with every upper bound. Rows not mentioning `var` pass through.
pub(crate) fn eliminate_rows(rows: &[Row], var: usize) -> Vec<Row> {
    let mut out = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for r in rows {
        let c = r.coeff(var);
        if c.is_positive() {
            lower.push(r);
        } else if c.is_negative() {
            upper.push(r);
        } else {
            out.push(r.clone());
        }
    }
    for l in &lower {
        for u in &upper {
            let a = l.coeff(var).clone();
            let b = -u.coeff(var);
            let mut row = (*l).clone();
            row.scale(&b);
            row.add_scaled(u, &a);
            row.coeffs[var] = Stalk::zero();
            row.label = String::new();
            row.rel = if l.rel == Relation::Gt || u.rel == Relation::Gt {
                Relation::Gt
            } else {
                Relation::Ge
            };
            out.push(row);
        }
    }
    out
}

/// Counts of rows bounding `var` from below and from above.
pub(crate) fn bound_counts(rows: &[Row], var: usize) -> (usize, usize) {
    rows.iter().fold((0, 0), |(lo, up), r| {
        let c = r.coeff(var);
        (lo + c.is_positive() as usize, up + c.is_negative() as usize)
    })
}

/// Among parallel inequality rows only the tightest survives.
pub(crate) fn keep_tightest(rows: Vec<Row>) -> Vec<Row> {
    let mut index: HashMap<Vec<Stalk>, usize> = HashMap::new();
    let mut out: Vec<Row> = Vec::new();
    for r in rows {
        match index.get(&r.coeffs) {
            Some(&i) => {
                let (old, new) = (out[i].rhs(), r.rhs());
                if old.lt(&new) || (old == new && r.rel == Relation::Gt) {
                    out[i] = r;
                }
            }
            None => {
                index.insert(r.coeffs.clone(), out.len());
                out.push(r);
            }
        }
    }
    out
}

/// Projects `var` out of `sys`. Equalities mentioning `var` take part as
/// pairs of opposite inequalities; ground consequences are kept as rows
/// with all-zero coefficients, so a contradiction shows up as a false
/// ground row.
pub fn fm_eliminate(sys: &LinearSystem, var: usize) -> LinearSystem {
    assert!(var < sys.variables.len(), "variable index out of range");
    let mut rows = Vec::new();
    let mut kept_eqs = Vec::new();
    for (id, e) in sys.equalities.iter().enumerate() {
        if e.coeffs[var].is_zero() {
            kept_eqs.push(e.clone());
        } else {
            rows.push(Row::new(
                e.coeffs.clone(),
                Relation::Ge,
                e.rhs.clone(),
                id,
                &e.label,
            ));
            let neg: Vec<Stalk> = e.coeffs.iter().map(|c| -c).collect();
            rows.push(Row::new(neg, Relation::Ge, -&e.rhs, id, &e.label));
        }
    }
    let offset = sys.equalities.len();
    for (i, q) in sys.inequalities.iter().enumerate() {
        let rel = if q.strict { Relation::Gt } else { Relation::Ge };
        rows.push(Row::new(
            q.coeffs.clone(),
            rel,
            q.rhs.clone(),
            offset + i,
            &q.label,
        ));
    }
    let mut derived = eliminate_rows(&rows, var);
    for r in &mut derived {
        r.normalize();
    }
    let mut inequalities: Vec<Inequality> = Vec::new();
    for r in derived {
        let q = Inequality {
            coeffs: r.coeffs.clone(),
            rhs: r.rhs(),
            strict: r.rel == Relation::Gt,
            label: r.label.clone(),
        };
        if !inequalities
            .iter()
            .any(|p| p.coeffs == q.coeffs && p.rhs == q.rhs && p.strict == q.strict)
        {
            inequalities.push(q);
        }
    }
    LinearSystem {
        variables: sys.variables.clone(),
        equalities: kept_eqs,
        inequalities,
    }
}
