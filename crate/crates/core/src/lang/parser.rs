use crate::event::EventTerm;
use crate::meadow::Stalk;
use crate::pmf::rv_event;

use super::lexer::{lex, Tok, Token};
use super::{Constraint, Decl, LangError, Names, Rel, SpecDocument, StalkExpr, RESERVED};

/// Parses a specification document. Names must be declared before use.
pub fn parse(text: &str) -> Result<SpecDocument, LangError> {
    let mut p = Parser::new(text, Names::default(), false)?;
    let mut doc = SpecDocument::default();
    while !p.at_eof() {
        p.item(&mut doc)?;
    }
    Ok(doc)
}

/// Parses a standalone event expression against `names`.
pub fn parse_event_term(text: &str, names: &Names) -> Result<EventTerm, LangError> {
    let mut p = Parser::new(text, names.clone(), false)?;
    let t = p.disjunction()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses a standalone stalk expression. Identifiers inside `P(...)` are
/// events; outside they are stalk variables when `allow_vars` is set.
pub fn parse_stalk_expr(
    text: &str,
    names: &Names,
    allow_vars: bool,
) -> Result<StalkExpr, LangError> {
    let mut p = Parser::new(text, names.clone(), allow_vars)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    names: Names,
    allow_vars: bool,
}

/// `P(event, joint | given)` before it is classified.
struct PTerm {
    event: EventTerm,
    joint: Option<EventTerm>,
    given: Option<EventTerm>,
}

impl PTerm {
    fn conjoined(&self) -> EventTerm {
        match &self.joint {
            Some(j) => EventTerm::and(self.event.clone(), j.clone()),
            None => self.event.clone(),
        }
    }

    fn into_expr(self) -> StalkExpr {
        let event = self.conjoined();
        match self.given {
            Some(g) => StalkExpr::cond(event, g),
            None => StalkExpr::prob(event),
        }
    }
}

impl Parser {
    fn new(text: &str, names: Names, allow_vars: bool) -> Result<Self, LangError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            names,
            allow_vars,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn error(&self, message: impl Into<String>, expected: &[&str]) -> LangError {
        let (line, col) = self.here();
        LangError::Syntax {
            line,
            col,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn unexpected(&self, expected: &[&str]) -> LangError {
        self.error(format!("unexpected {}", self.peek().describe()), expected)
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<(), LangError> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{s}`")]))
        }
    }

    fn expect_keyword(&mut self, k: &str) -> Result<(), LangError> {
        if self.is_ident(k) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{k}`")]))
        }
    }

    fn expect_eof(&self) -> Result<(), LangError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected(&["end of input"]))
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), LangError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, line, col))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn new_name(&mut self, taken: &[String]) -> Result<String, LangError> {
        let (name, line, col) = self.ident()?;
        if RESERVED.contains(&name.as_str()) {
            return Err(LangError::Syntax {
                line,
                col,
                message: format!("`{name}` is reserved"),
                expected: vec!["identifier".into()],
            });
        }
        if taken.contains(&name) {
            return Err(LangError::Duplicate { line, col, name });
        }
        Ok(name)
    }

    fn item(&mut self, doc: &mut SpecDocument) -> Result<(), LangError> {
        if self.is_ident("event") {
            self.bump();
            let taken: Vec<String> = doc.decls.iter().map(|d| d.name().to_string()).collect();
            let name = self.new_name(&taken)?;
            self.expect_sym(";")?;
            let decl = Decl::Event(name);
            self.names.declare(&decl);
            doc.decls.push(decl);
        } else if self.is_ident("var") {
            self.bump();
            let taken: Vec<String> = doc.decls.iter().map(|d| d.name().to_string()).collect();
            let name = self.new_name(&taken)?;
            self.expect_keyword("in")?;
            self.expect_sym("{")?;
            let mut domain = vec![self.new_name(&[])?];
            while self.is_sym(",") {
                self.bump();
                let label = self.new_name(&domain)?;
                domain.push(label);
            }
            self.expect_sym("}")?;
            self.expect_sym(";")?;
            let decl = Decl::Var { name, domain };
            self.names.declare(&decl);
            doc.decls.push(decl);
        } else if self.is_ident("eval") {
            self.bump();
            let e = self.expr()?;
            self.expect_sym(";")?;
            doc.queries.push(e);
        } else if self.is_ident("independent") {
            self.bump();
            self.expect_sym("(")?;
            let x = self.disjunction()?;
            self.expect_sym(",")?;
            let y = self.disjunction()?;
            self.expect_sym(")")?;
            self.expect_sym(";")?;
            doc.constraints.push(Constraint::Independent { x, y });
        } else if self.is_ident("P") {
            let c = self.constraint()?;
            doc.constraints.push(c);
        } else {
            return Err(self.unexpected(&["`event`", "`var`", "`eval`", "`independent`", "`P`"]));
        }
        Ok(())
    }

    fn constraint(&mut self) -> Result<Constraint, LangError> {
        let lhs_pos = self.here();
        let lhs = self.pterm()?;
        let rel = match self.peek() {
            Tok::Sym("=") => None,
            Tok::Sym("<") => Some(Rel::Lt),
            Tok::Sym("<=") => Some(Rel::Le),
            Tok::Sym(">") => Some(Rel::Gt),
            Tok::Sym(">=") => Some(Rel::Ge),
            _ => return Err(self.unexpected(&["`=`", "`<`", "`<=`", "`>`", "`>=`"])),
        };
        self.bump();
        let constraint = match rel {
            None if self.is_ident("P") => {
                let rhs = self.pterm()?;
                Constraint::CondEqCond {
                    x1: lhs.conjoined(),
                    y1: lhs.given.clone().unwrap_or(EventTerm::Top),
                    x2: rhs.conjoined(),
                    y2: rhs.given.clone().unwrap_or(EventTerm::Top),
                }
            }
            None => {
                let value = self.number()?;
                match (&lhs.joint, &lhs.given) {
                    (_, Some(y)) => Constraint::CondEq {
                        x: lhs.conjoined(),
                        y: y.clone(),
                        value,
                    },
                    (Some(j), None) => Constraint::JointEq {
                        x: lhs.event.clone(),
                        y: j.clone(),
                        value,
                    },
                    (None, None) => Constraint::ProbEq {
                        term: lhs.event.clone(),
                        value,
                    },
                }
            }
            Some(rel) => {
                if lhs.given.is_some() {
                    return Err(LangError::Syntax {
                        line: lhs_pos.0,
                        col: lhs_pos.1,
                        message: "comparisons on conditional probabilities are not supported"
                            .into(),
                        expected: vec!["`=`".into()],
                    });
                }
                let value = self.number()?;
                Constraint::ProbCmp {
                    term: lhs.conjoined(),
                    rel,
                    value,
                }
            }
        };
        self.expect_sym(";")?;
        Ok(constraint)
    }

    /// `-`? NUMBER (`/` NUMBER)?
    fn number(&mut self) -> Result<Stalk, LangError> {
        let negative = if self.is_sym("-") {
            self.bump();
            true
        } else {
            false
        };
        let mut value = self.literal()?;
        if self.is_sym("/") && matches!(self.peek_at(1), Tok::Number(_)) {
            self.bump();
            let (line, col) = self.here();
            let den = self.literal()?;
            if den.is_zero() {
                return Err(LangError::Syntax {
                    line,
                    col,
                    message: "zero denominator".into(),
                    expected: vec![],
                });
            }
            value = &value / &den;
        }
        Ok(if negative { -value } else { value })
    }

    fn literal(&mut self) -> Result<Stalk, LangError> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Number(s) => {
                self.bump();
                s.parse::<Stalk>().map_err(|e| LangError::Syntax {
                    line,
                    col,
                    message: e.to_string(),
                    expected: vec![],
                })
            }
            _ => Err(self.unexpected(&["number"])),
        }
    }

    /// `P ( conj (, conj)? (| disj)? )`
    fn pterm(&mut self) -> Result<PTerm, LangError> {
        self.expect_keyword("P")?;
        self.expect_sym("(")?;
        let event = self.conjunction()?;
        let joint = if self.is_sym(",") {
            self.bump();
            Some(self.conjunction()?)
        } else {
            None
        };
        let given = if self.is_sym("|") {
            self.bump();
            Some(self.disjunction()?)
        } else {
            None
        };
        self.expect_sym(")")?;
        Ok(PTerm {
            event,
            joint,
            given,
        })
    }

    fn disjunction(&mut self) -> Result<EventTerm, LangError> {
        let mut t = self.conjunction()?;
        while self.is_sym("|") {
            self.bump();
            let r = self.conjunction()?;
            t = EventTerm::or(t, r);
        }
        Ok(t)
    }

    fn conjunction(&mut self) -> Result<EventTerm, LangError> {
        let mut t = self.negation()?;
        while self.is_sym("&") {
            self.bump();
            let r = self.negation()?;
            t = EventTerm::and(t, r);
        }
        Ok(t)
    }

    fn negation(&mut self) -> Result<EventTerm, LangError> {
        if self.is_sym("!") {
            self.bump();
            return Ok(EventTerm::not(self.negation()?));
        }
        self.event_atom()
    }

    fn event_atom(&mut self) -> Result<EventTerm, LangError> {
        if self.is_sym("(") {
            self.bump();
            let t = self.disjunction()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        if self.is_ident("TOP") {
            self.bump();
            return Ok(EventTerm::Top);
        }
        if self.is_ident("BOT") {
            self.bump();
            return Ok(EventTerm::Bottom);
        }
        let (name, line, col) = match self.peek() {
            Tok::Ident(_) => self.ident()?,
            _ => return Err(self.unexpected(&["event", "`(`", "`!`", "`TOP`", "`BOT`"])),
        };
        if self.is_sym("=") && matches!(self.peek_at(1), Tok::Ident(_)) {
            let rv = match self.names.var(&name) {
                Some(rv) => rv.clone(),
                None if self.names.is_event(&name) => {
                    return Err(LangError::Syntax {
                        line,
                        col,
                        message: format!("`{name}` is an event, not a random variable"),
                        expected: vec![],
                    })
                }
                None => return Err(LangError::Undeclared { line, col, name }),
            };
            self.bump();
            let (label, line, col) = self.ident()?;
            return rv_event(&rv, &label).map_err(|_| LangError::Undeclared {
                line,
                col,
                name: format!("{name} = {label}"),
            });
        }
        if self.names.is_event(&name) {
            Ok(EventTerm::Generator(name))
        } else if self.names.var(&name).is_some() {
            Err(LangError::Syntax {
                line,
                col,
                message: format!("random variable `{name}` needs a value"),
                expected: vec![format!("`{name} = <value>`")],
            })
        } else {
            Err(LangError::Undeclared { line, col, name })
        }
    }

    fn expr(&mut self) -> Result<StalkExpr, LangError> {
        let mut e = self.term()?;
        loop {
            if self.is_sym("+") {
                self.bump();
                e = StalkExpr::add(e, self.term()?);
            } else if self.is_sym("-") {
                self.bump();
                e = StalkExpr::sub(e, self.term()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<StalkExpr, LangError> {
        let mut e = self.unary()?;
        loop {
            if self.is_sym("*") {
                self.bump();
                e = StalkExpr::mul(e, self.unary()?);
            } else if self.is_sym("/") {
                self.bump();
                e = StalkExpr::div(e, self.unary()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<StalkExpr, LangError> {
        if self.is_sym("-") {
            self.bump();
            if matches!(self.peek(), Tok::Number(_)) {
                return Ok(StalkExpr::Const(-self.literal()?));
            }
            return Ok(StalkExpr::neg(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<StalkExpr, LangError> {
        match self.peek().clone() {
            Tok::Number(_) => Ok(StalkExpr::Const(self.literal()?)),
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "P" && matches!(self.peek_at(1), Tok::Sym("(")) => {
                Ok(self.pterm()?.into_expr())
            }
            Tok::Ident(name)
                if (name == "s" || name == "inv") && matches!(self.peek_at(1), Tok::Sym("(")) =>
            {
                self.bump();
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(if name == "s" {
                    StalkExpr::sign(e)
                } else {
                    StalkExpr::inv(e)
                })
            }
            Tok::Ident(name) if !RESERVED.contains(&name.as_str()) => {
                let (line, col) = self.here();
                if self.allow_vars {
                    self.bump();
                    Ok(StalkExpr::Var(name))
                } else {
                    Err(LangError::Undeclared { line, col, name })
                }
            }
            _ => Err(self.unexpected(&["number", "`P(`", "`s(`", "`inv(`", "`(`"])),
        }
    }
}
