//! Finite types over the base type `0` and the abstract space type `X`.
//!
//! `Arrow(result, argument)` is written `result(argument)` and nests to the
//! left, so `X(X)(1)` is a functional taking a type-`1` object first, then an
//! `X`, and returning an `X`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("type `{0}` mentions X; degree is only defined on X-free types")]
    TypeContainsX(FinType),
    #[error("type syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FinType {
    Zero,
    X,
    Arrow(Box<FinType>, Box<FinType>),
}

/// Classification flags reported by [`FinType::classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    /// `None` when the type mentions `X`.
    pub degree: Option<usize>,
    pub small: bool,
    pub admissible: bool,
}

impl FinType {
    pub fn arrow(result: FinType, argument: FinType) -> FinType {
        FinType::Arrow(Box::new(result), Box::new(argument))
    }

    /// `τ(ρ_k)…(ρ_1)` built from a result and the arguments in application
    /// order (first-applied argument first).
    pub fn curried(result: FinType, args: &[FinType]) -> FinType {
        args.iter()
            .rev()
            .fold(result, |acc, a| FinType::arrow(acc, a.clone()))
    }

    /// The pure type `n`: `0` for `n = 0`, and `0(n-1)` otherwise.
    pub fn pure(n: usize) -> FinType {
        (0..n).fold(FinType::Zero, |acc, _| FinType::arrow(FinType::Zero, acc))
    }

    pub fn is_x_free(&self) -> bool {
        match self {
            FinType::Zero => true,
            FinType::X => false,
            FinType::Arrow(r, a) => r.is_x_free() && a.is_x_free(),
        }
    }

    pub fn degree(&self) -> Result<usize, TypeError> {
        match self {
            FinType::Zero => Ok(0),
            FinType::X => Err(TypeError::TypeContainsX(self.clone())),
            FinType::Arrow(r, a) => {
                let (r, a) = match (r.degree(), a.degree()) {
                    (Ok(r), Ok(a)) => (r, a),
                    _ => return Err(TypeError::TypeContainsX(self.clone())),
                };
                Ok(r.max(a + 1))
            }
        }
    }

    /// Splits `ρ₀(τ_k)…(τ_1)` into the base `ρ₀ ∈ {0, X}` and the arguments
    /// `[τ_1, …, τ_k]` in application order.
    pub fn uncurry(&self) -> (&FinType, Vec<&FinType>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let FinType::Arrow(r, a) = cur {
            args.push(a.as_ref());
            cur = r;
        }
        (cur, args)
    }

    pub fn arity(&self) -> usize {
        self.uncurry().1.len()
    }

    /// Result type after applying `n` arguments, if the type has that many.
    pub fn apply_n(&self, n: usize) -> Option<FinType> {
        let (base, args) = self.uncurry();
        if n > args.len() {
            return None;
        }
        let rest: Vec<FinType> = args[n..].iter().map(|t| (*t).clone()).collect();
        Some(FinType::curried(base.clone(), &rest))
    }

    pub fn is_small(&self) -> bool {
        let (_, args) = self.uncurry();
        args.iter().all(|a| **a == FinType::Zero)
    }

    pub fn is_admissible(&self) -> bool {
        let (_, args) = self.uncurry();
        args.iter().all(|a| a.is_small())
    }

    pub fn classify(&self) -> Classification {
        Classification {
            degree: self.degree().ok(),
            small: self.is_small(),
            admissible: self.is_admissible(),
        }
    }

    /// Majorant-type projection: replaces every `X` by `0`.
    pub fn hat(&self) -> FinType {
        match self {
            FinType::Zero | FinType::X => FinType::Zero,
            FinType::Arrow(r, a) => FinType::arrow(r.hat(), a.hat()),
        }
    }

    /// Number of constructors.
    pub fn size(&self) -> usize {
        match self {
            FinType::Zero | FinType::X => 1,
            FinType::Arrow(r, a) => 1 + r.size() + a.size(),
        }
    }

    /// All types with exactly `size` constructors, in a fixed order.
    pub fn enumerate_of_size(size: usize, with_x: bool) -> Vec<FinType> {
        let mut table: Vec<Vec<FinType>> = vec![Vec::new(); size + 1];
        for s in 1..=size {
            let mut out = Vec::new();
            if s == 1 {
                out.push(FinType::Zero);
                if with_x {
                    out.push(FinType::X);
                }
            }
            // Arrow takes one constructor; split the remaining s-1 between sides.
            for left in 1..s.saturating_sub(1) {
                let right = s - 1 - left;
                for r in &table[left] {
                    for a in &table[right] {
                        out.push(FinType::arrow(r.clone(), a.clone()));
                    }
                }
            }
            table[s] = out;
        }
        std::mem::take(&mut table[size])
    }
}

impl fmt::Display for FinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FinType::Zero => write!(f, "0"),
            FinType::X => write!(f, "X"),
            FinType::Arrow(r, a) => write!(f, "{r}({a})"),
        }
    }
}

/// Parses `0`, `X`, pure-type numerals and left-nested applications
/// `t(s)(u)…`. Returns the type and the number of bytes consumed.
pub fn parse_type_prefix(src: &str) -> Result<(FinType, usize), TypeError> {
    let bytes = src.as_bytes();
    let mut pos = 0;
    parse_at(bytes, &mut pos).map(|t| (t, pos))
}

fn parse_at(bytes: &[u8], pos: &mut usize) -> Result<FinType, TypeError> {
    let err = |pos: usize, msg: &str| TypeError::Syntax {
        pos,
        msg: msg.to_string(),
    };
    let mut base = match bytes.get(*pos) {
        Some(b'X') => {
            *pos += 1;
            FinType::X
        }
        Some(c) if c.is_ascii_digit() => {
            let start = *pos;
            while bytes.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
                *pos += 1;
            }
            let n: usize = std::str::from_utf8(&bytes[start..*pos])
                .unwrap()
                .parse()
                .map_err(|_| err(start, "numeral out of range"))?;
            FinType::pure(n)
        }
        Some(b'(') => {
            *pos += 1;
            let inner = parse_at(bytes, pos)?;
            if bytes.get(*pos) != Some(&b')') {
                return Err(err(*pos, "expected `)`"));
            }
            *pos += 1;
            inner
        }
        _ => return Err(err(*pos, "expected `0`, `X`, a numeral or `(`")),
    };
    while bytes.get(*pos) == Some(&b'(') {
        *pos += 1;
        let arg = parse_at(bytes, pos)?;
        if bytes.get(*pos) != Some(&b')') {
            return Err(err(*pos, "expected `)`"));
        }
        *pos += 1;
        base = FinType::arrow(base, arg);
    }
    Ok(base)
}

impl FromStr for FinType {
    type Err = TypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (t, used) = parse_type_prefix(s)?;
        if used != s.len() {
            return Err(TypeError::Syntax {
                pos: used,
                msg: "trailing input".into(),
            });
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> FinType {
        s.parse().unwrap()
    }

    #[test]
    fn degree_examples() {
        assert_eq!(FinType::Zero.degree(), Ok(0));
        assert_eq!(ty("0(0)").degree(), Ok(1));
        assert_eq!(ty("0(0(0))").degree(), Ok(2));
        assert!(matches!(
            ty("X(0)").degree(),
            Err(TypeError::TypeContainsX(_))
        ));
    }

    #[test]
    fn pure_types() {
        assert_eq!(FinType::pure(0), FinType::Zero);
        assert_eq!(FinType::pure(1), ty("0(0)"));
        assert_eq!(FinType::pure(2), ty("0(0(0))"));
        assert_eq!(ty("2"), ty("0(1)"));
        for n in 0..=10 {
            assert_eq!(FinType::pure(n).classify().degree, Some(n));
        }
    }

    #[test]
    fn classification_examples() {
        let c = FinType::X.classify();
        assert!(c.small && c.admissible);
        let c = ty("X(X)").classify();
        assert!(!c.small && c.admissible);
        assert!(!ty("0(X(X))").is_admissible());
        assert!(ty("0(0)(0)").is_small());
    }

    #[test]
    fn hat_examples() {
        assert_eq!(FinType::X.hat(), FinType::Zero);
        assert_eq!(ty("X(X)").hat(), ty("0(0)"));
        assert_eq!(ty("X(X)(1)").hat(), ty("0(0)(0(0))"));
    }

    #[test]
    fn small_implies_admissible_up_to_size_8() {
        let mut count = 0;
        for size in 1..=8 {
            for t in FinType::enumerate_of_size(size, true) {
                assert_eq!(t.size(), size);
                if t.is_small() {
                    assert!(t.is_admissible(), "{t}");
                }
                count += 1;
            }
        }
        assert!(count > 100);
    }

    #[test]
    fn hat_is_idempotent_and_keeps_arity() {
        for size in 1..=7 {
            for t in FinType::enumerate_of_size(size, true) {
                let h = t.hat();
                assert!(h.is_x_free());
                assert_eq!(h.hat(), h);
                assert_eq!(h.arity(), t.arity());
                if t.is_x_free() {
                    assert_eq!(h, t);
                }
            }
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["0", "X", "X(X)(0(0))", "0(0(0))(X)"] {
            assert_eq!(ty(s).to_string(), s);
        }
        assert!("X(".parse::<FinType>().is_err());
        assert!("0)".parse::<FinType>().is_err());
    }

    #[test]
    fn curried_and_apply() {
        let t = FinType::curried(FinType::X, &[FinType::pure(1), FinType::X]);
        assert_eq!(t, ty("X(X)(1)"));
        assert_eq!(t.apply_n(1), Some(ty("X(X)")));
        assert_eq!(t.apply_n(2), Some(FinType::X));
        assert_eq!(t.apply_n(3), None);
    }
}
