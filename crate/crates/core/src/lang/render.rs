use crate::event::EventTerm;
use crate::meadow::Stalk;

use super::{Constraint, Decl, Names, SpecDocument, StalkExpr};

/// Renders a document so that `parse(render(doc)) == doc`.
pub fn render(doc: &SpecDocument) -> String {
    let names = doc.names();
    let mut out = String::new();
    for d in &doc.decls {
        match d {
            Decl::Event(n) => out.push_str(&format!("event {n};\n")),
            Decl::Var { name, domain } => {
                out.push_str(&format!("var {name} in {{{}}};\n", domain.join(", ")))
            }
        }
    }
    for c in &doc.constraints {
        out.push_str(&render_constraint(c, &names));
        out.push_str(";\n");
    }
    for q in &doc.queries {
        out.push_str(&format!("eval {};\n", render_stalk_expr(q, &names)));
    }
    out
}

pub(crate) fn render_constraint(c: &Constraint, names: &Names) -> String {
    let r = Renderer::new(names);
    match c {
        Constraint::ProbEq { term, value } => format!("P({}) = {value}", r.operand(term)),
        Constraint::CondEq { x, y, value } => {
            format!("P({} | {}) = {value}", r.operand(x), r.event(y))
        }
        Constraint::CondEqCond { x1, y1, x2, y2 } => {
            format!("{} = {}", r.pterm(x1, y1), r.pterm(x2, y2))
        }
        Constraint::ProbCmp { term, rel, value } => {
            format!("P({}) {} {value}", r.operand(term), rel.symbol())
        }
        Constraint::JointEq { x, y, value } => {
            format!("P({}, {}) = {value}", r.operand(x), r.operand(y))
        }
        Constraint::Independent { x, y } => format!("independent({}, {})", r.event(x), r.event(y)),
    }
}

/// Renders an event term, writing random-variable events as `A = value`.
pub fn render_event(t: &EventTerm, names: &Names) -> String {
    Renderer::new(names).event(t)
}

pub fn render_stalk_expr(e: &StalkExpr, names: &Names) -> String {
    Renderer::new(names).stalk(e)
}

struct Renderer {
    sugar: Vec<(EventTerm, String)>,
}

impl Renderer {
    fn new(names: &Names) -> Self {
        let sugar = names
            .vars()
            .flat_map(|rv| {
                rv.domain
                    .iter()
                    .filter_map(|label| {
                        rv.events
                            .get(label)
                            .map(|t| (t.clone(), format!("{} = {label}", rv.name)))
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        Renderer { sugar }
    }

    fn sugared(&self, t: &EventTerm) -> Option<&str> {
        self.sugar
            .iter()
            .find(|(term, _)| term == t)
            .map(|(_, s)| s.as_str())
    }

    fn event(&self, t: &EventTerm) -> String {
        self.event_prec(t, 0)
    }

    /// An event in front of the conditioning bar: a top-level disjunction
    /// would be read as the bar, so it is parenthesized.
    fn operand(&self, t: &EventTerm) -> String {
        self.event_prec(t, 2)
    }

    fn pterm(&self, x: &EventTerm, y: &EventTerm) -> String {
        if *y == EventTerm::Top {
            format!("P({})", self.operand(x))
        } else {
            format!("P({} | {})", self.operand(x), self.event(y))
        }
    }

    fn event_prec(&self, t: &EventTerm, min: u8) -> String {
        let (prec, s) = match self.sugared(t) {
            Some(s) => (3, s.to_string()),
            None => match t {
                EventTerm::Generator(g) => (3, g.clone()),
                EventTerm::Top => (3, "TOP".into()),
                EventTerm::Bottom => (3, "BOT".into()),
                EventTerm::Not(inner) => (3, format!("!{}", self.event_prec(inner, 3))),
                EventTerm::And(l, r) => (
                    2,
                    format!("{} & {}", self.event_prec(l, 2), self.event_prec(r, 3)),
                ),
                EventTerm::Or(l, r) => (
                    1,
                    format!("{} | {}", self.event_prec(l, 1), self.event_prec(r, 2)),
                ),
            },
        };
        if prec < min {
            format!("({s})")
        } else {
            s
        }
    }

    fn stalk(&self, e: &StalkExpr) -> String {
        self.stalk_prec(e, 0)
    }

    fn stalk_prec(&self, e: &StalkExpr, min: u8) -> String {
        let (prec, s) = match e {
            StalkExpr::Const(c) => (if c.is_negative() { 3 } else { 4 }, c.to_string()),
            StalkExpr::Var(v) => (4, v.clone()),
            StalkExpr::Prob(t) => (4, format!("P({})", self.operand(t))),
            StalkExpr::Cond(x, y) => (4, format!("P({} | {})", self.operand(x), self.event(y))),
            StalkExpr::Add(l, r) => (
                1,
                format!("{} + {}", self.stalk_prec(l, 1), self.stalk_prec(r, 2)),
            ),
            StalkExpr::Sub(l, r) => (
                1,
                format!("{} - {}", self.stalk_prec(l, 1), self.stalk_prec(r, 2)),
            ),
            StalkExpr::Mul(l, r) => (
                2,
                format!("{} * {}", self.stalk_prec(l, 2), self.stalk_prec(r, 3)),
            ),
            StalkExpr::Div(l, r) => (
                2,
                format!("{} / {}", self.stalk_prec(l, 2), self.stalk_prec(r, 3)),
            ),
            StalkExpr::Neg(inner) => match inner.as_ref() {
                // `-c` would read back as a negative literal
                StalkExpr::Const(c) => (3, format!("-({})", render_const(c))),
                _ => (3, format!("-{}", self.stalk_prec(inner, 3))),
            },
            StalkExpr::Inv(inner) => (4, format!("inv({})", self.stalk(inner))),
            StalkExpr::Sign(inner) => (4, format!("s({})", self.stalk(inner))),
        };
        if prec < min {
            format!("({s})")
        } else {
            s
        }
    }
}

fn render_const(c: &Stalk) -> String {
    c.to_string()
}
