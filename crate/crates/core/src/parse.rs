//! Prefix s-expression syntax for terms and formulas.
//!
//! ```text
//! file    := item*
//! item    := (declare NAME TYPE) | formula
//! formula := false | (forall NAME TYPE formula) | (exists NAME TYPE formula)
//!          | (bexists NAME TYPE term formula)        ; ∃b ⪯ term. formula
//!          | (and formula formula+) | (or formula formula+)
//!          | (imp formula formula) | (not formula)
//!          | (eq term term) | (le term term)          ; =₀, ≤₀
//!          | (eqr term term) | (ler term term) | (ltr term term)
//!          | (eqty TYPE term term) | (eqx term term)
//!          | (preceq TYPE term term) | (mem term term) ; (mem y x) is y ∈ Ax
//! term    := NAME | NAME:TYPE | NUMERAL | CONST | Pi[T,T] | Sigma[T,T,T] | R[T]
//!          | (App term term) | (term term+)
//! ```
//!
//! Comments run from `;` to the end of the line.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::formula::{falsum, Formula};
use crate::term::{Constant, Term, TermError, Var};
use crate::types::{parse_type_prefix, FinType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Parsed file contents: declarations and formulas in order.
#[derive(Debug, Clone, Default)]
pub struct Document {
    pub declarations: BTreeMap<String, FinType>,
    pub formulas: Vec<Formula>,
}

pub fn parse_document(src: &str) -> Result<Document, ParseError> {
    let mut p = Parser::new(src);
    let mut doc = Document::default();
    loop {
        p.skip_ws();
        if p.at_end() {
            return Ok(doc);
        }
        if p.peek_keyword_form("declare") {
            p.expect('(')?;
            p.ident()?;
            let name = p.ident()?;
            let ty = p.ty()?;
            p.expect(')')?;
            p.globals.insert(name.clone(), ty.clone());
            doc.declarations.insert(name, ty);
        } else {
            let f = p.formula()?;
            check(&p, f.check_types().map_err(|e| e.to_string()))?;
            doc.formulas.push(f);
        }
    }
}

/// Parses exactly one formula, with optional declarations before it.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let doc = parse_document(src)?;
    match doc.formulas.len() {
        1 => Ok(doc.formulas.into_iter().next().unwrap()),
        n => Err(ParseError {
            line: 1,
            col: 1,
            msg: format!("expected exactly one formula, found {n}"),
        }),
    }
}

/// Parses a term with free variables typed by `ctx`.
pub fn parse_term(src: &str, ctx: &BTreeMap<String, FinType>) -> Result<Term, ParseError> {
    let mut p = Parser::new(src);
    p.globals = ctx.clone();
    let t = p.term()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("trailing input"));
    }
    check(&p, t.type_of().map(|_| ()).map_err(|e: TermError| e.to_string()))?;
    Ok(t)
}

fn check(p: &Parser<'_>, r: Result<(), String>) -> Result<(), ParseError> {
    r.map_err(|msg| p.error(&msg))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    globals: BTreeMap<String, FinType>,
    scope: Vec<Var>,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Parser<'a> {
        Parser {
            src,
            pos: 0,
            globals: BTreeMap::new(),
            scope: Vec::new(),
        }
    }

    fn error(&self, msg: &str) -> ParseError {
        let before = &self.src[..self.pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError {
            line,
            col,
            msg: msg.to_string(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        loop {
            let rest = self.rest();
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with(';') {
                let end = trimmed.find('\n').unwrap_or(trimmed.len());
                self.pos += end;
            } else {
                return;
            }
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let len: usize = rest
            .chars()
            .take_while(|c| is_ident_char(*c))
            .map(char::len_utf8)
            .sum();
        if len == 0 {
            return Err(self.error("expected an identifier"));
        }
        self.pos += len;
        Ok(rest[..len].to_string())
    }

    fn ty(&mut self) -> Result<FinType, ParseError> {
        self.skip_ws();
        match parse_type_prefix(self.rest()) {
            Ok((t, used)) => {
                self.pos += used;
                Ok(t)
            }
            Err(e) => Err(self.error(&e.to_string())),
        }
    }

    /// True if the next tokens are `(` followed by `kw` as a whole word.
    fn peek_keyword_form(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let rest = self.rest();
        let Some(after) = rest.strip_prefix('(') else {
            return false;
        };
        let after = after.trim_start();
        after.starts_with(kw)
            && !after[kw.len()..].chars().next().is_some_and(is_ident_char)
    }

    fn lookup(&self, name: &str) -> Option<FinType> {
        self.scope
            .iter()
            .rev()
            .find(|v| v.name == name)
            .map(|v| v.ty.clone())
            .or_else(|| self.globals.get(name).cloned())
    }

    fn binder(
        &mut self,
        make: impl FnOnce(&mut Self, Var) -> Result<Formula, ParseError>,
    ) -> Result<Formula, ParseError> {
        let name = self.ident()?;
        let ty = self.ty()?;
        let v = Var::new(name, ty);
        make(self, v)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        if self.rest().starts_with("false")
            && !self.rest()[5..].chars().next().is_some_and(is_ident_char)
        {
            self.pos += 5;
            return Ok(falsum());
        }
        self.expect('(')?;
        let head = self.ident()?;
        let f = match head.as_str() {
            "forall" | "exists" => {
                let universal = head == "forall";
                self.binder(|p, v| {
                    p.scope.push(v.clone());
                    let body = p.formula();
                    p.scope.pop();
                    let body = body?;
                    Ok(if universal {
                        Formula::forall(v, body)
                    } else {
                        Formula::exists(v, body)
                    })
                })?
            }
            "bexists" => self.binder(|p, v| {
                let bound = p.term()?;
                p.scope.push(v.clone());
                let body = p.formula();
                p.scope.pop();
                Ok(Formula::bounded_exists(v, bound, body?))
            })?,
            "and" | "or" => {
                let mut parts = vec![self.formula()?, self.formula()?];
                while self.peek_non_ws() != Some(')') {
                    parts.push(self.formula()?);
                }
                let last = parts.pop().unwrap();
                parts.into_iter().rev().fold(last, |acc, p| {
                    if head == "and" {
                        Formula::and(p, acc)
                    } else {
                        Formula::or(p, acc)
                    }
                })
            }
            "imp" => {
                let a = self.formula()?;
                let b = self.formula()?;
                Formula::implies(a, b)
            }
            "not" => Formula::not(self.formula()?),
            "eq" | "le" | "eqr" | "ler" | "ltr" | "eqx" | "mem" => {
                let a = self.term()?;
                let b = self.term()?;
                match head.as_str() {
                    "eq" => Formula::Eq0(a, b),
                    "le" => Formula::Le0(a, b),
                    "eqr" => Formula::EqR(a, b),
                    "ler" => Formula::LeR(a, b),
                    "ltr" => Formula::LtR(a, b),
                    "eqx" => Formula::EqX(a, b),
                    _ => Formula::Mem { value: a, point: b },
                }
            }
            "eqty" | "preceq" => {
                let ty = self.ty()?;
                let a = self.term()?;
                let b = self.term()?;
                if head == "eqty" {
                    Formula::EqTy(ty, a, b)
                } else {
                    Formula::Preceq(ty, a, b)
                }
            }
            other => return Err(self.error(&format!("unknown formula head `{other}`"))),
        };
        self.expect(')')?;
        Ok(f)
    }

    fn peek_non_ws(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek()
    }

    fn type_list(&mut self, n: usize) -> Result<Vec<FinType>, ParseError> {
        self.expect('[')?;
        let mut out = Vec::new();
        for i in 0..n {
            if i > 0 {
                self.expect(',')?;
            }
            out.push(self.ty()?);
        }
        self.expect(']')?;
        Ok(out)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                if self.peek_word("App") {
                    self.ident()?;
                }
                let mut t = self.term()?;
                let mut n = 0;
                while self.peek_non_ws() != Some(')') {
                    if self.at_end() {
                        return Err(self.error("unterminated application"));
                    }
                    t = Term::app(t, self.term()?);
                    n += 1;
                }
                if n == 0 {
                    return Err(self.error("application needs at least one argument"));
                }
                self.expect(')')?;
                Ok(t)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits: String = self.rest().chars().take_while(char::is_ascii_digit).collect();
                self.pos += digits.len();
                let n: u64 = digits
                    .parse()
                    .map_err(|_| self.error("numeral out of range"))?;
                if n > 10_000 {
                    return Err(self.error("numeral too large"));
                }
                Ok(Term::numeral(n))
            }
            Some(_) => {
                let name = self.ident()?;
                match name.as_str() {
                    "Pi" => {
                        let t = self.type_list(2)?;
                        return Ok(Term::Const(Constant::Pi {
                            first: t[0].clone(),
                            second: t[1].clone(),
                        }));
                    }
                    "Sigma" => {
                        let t = self.type_list(3)?;
                        return Ok(Term::Const(Constant::Sigma {
                            result: t[0].clone(),
                            middle: t[1].clone(),
                            arg: t[2].clone(),
                        }));
                    }
                    "R" => {
                        let t = self.type_list(1)?;
                        return Ok(Term::Const(Constant::Rec(t[0].clone())));
                    }
                    _ => {}
                }
                if let Some(c) = Constant::simple_from_name(&name) {
                    return Ok(Term::Const(c));
                }
                if self.peek() == Some(':') {
                    self.pos += 1;
                    let ty = self.ty()?;
                    return Ok(Term::var(name, ty));
                }
                match self.lookup(&name) {
                    Some(ty) => Ok(Term::var(name, ty)),
                    None => Err(self.error(&format!("undeclared variable `{name}`"))),
                }
            }
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn peek_word(&mut self, w: &str) -> bool {
        self.skip_ws();
        self.rest().starts_with(w)
            && !self.rest()[w.len()..].chars().next().is_some_and(is_ident_char)
    }
}

/// Renders a formula with `declare` lines for its free variables so that the
/// text parses back to the same formula.
pub fn to_document_text(f: &Formula) -> String {
    let mut out = String::new();
    for v in f.free_vars() {
        out.push_str(&format!("(declare {} {})\n", v.name, v.ty));
    }
    out.push_str(&f.to_string());
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_quantifiers_and_atoms() {
        let f = parse_formula("(forall x 0 (exists y 0 (eq y (S x))))").unwrap();
        assert_eq!(f.to_string(), "(forall x 0 (exists y 0 (eq y (S x))))");
        assert!(f.free_vars().is_empty());
    }

    #[test]
    fn term_syntax() {
        let mut ctx = BTreeMap::new();
        ctx.insert("x".to_string(), FinType::X);
        ctx.insert("y".to_string(), FinType::X);
        let t = parse_term("(App (App chiA x) y)", &ctx).unwrap();
        assert_eq!(t.to_string(), "(chiA x y)");
        assert_eq!(t.type_of(), Ok(FinType::Zero));
        let t = parse_term("(Pi[0,0] 2 z:0)", &ctx).unwrap();
        assert_eq!(t.type_of(), Ok(FinType::Zero));
        assert!(parse_term("(S x)", &ctx).is_err());
        assert!(parse_term("(S 0) 1", &ctx).is_err());
    }

    #[test]
    fn sugar_round_trips() {
        let src = "(declare a 0)\n(bexists b 0 a (not (le b a)))\n";
        let doc = parse_document(src).unwrap();
        let f = &doc.formulas[0];
        assert_eq!(to_document_text(f), src);
        assert!(f.as_bounded_exists().is_some());
    }

    #[test]
    fn comments_and_errors() {
        let f = parse_formula("; leading\n(and false ; mid\n false false)").unwrap();
        assert_eq!(f.to_string(), "(and false (and false false))");
        let e = parse_formula("(forall x 0\n  (eq x y))").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.msg.contains("undeclared"));
        assert!(parse_formula("(eq 0 x:X)").is_err());
    }
}
