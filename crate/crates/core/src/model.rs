//! Finite models: type 0 is `{0,…,N}` with a truncated successor, function
//! types are enumerated as explicit tables, and `X` is an optional list of
//! points in ℝ^d.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{Constant, Term};
use crate::types::FinType;

pub const DEFAULT_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("type {ty} has more than {budget} elements in this model")]
    EnumerationBudgetExceeded { ty: FinType, budget: u64 },
    #[error("type {0} cannot be enumerated in this model")]
    UnsupportedType(FinType),
    #[error("constant `{0}` has no interpretation in the finite model")]
    UnsupportedConstant(&'static str),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("value does not match the expected type {0}")]
    ValueMismatch(FinType),
    #[error("relation `{0}` cannot be decided on these values")]
    UnsupportedRelation(&'static str),
    #[error("a model with N = 0 identifies 0 and S0, so falsity is not definable")]
    DegenerateModel,
}

type ClosureFn = dyn Fn(Value) -> Result<Value, EvalError> + Send + Sync;

#[derive(Clone)]
pub enum Value {
    Nat(u64),
    /// A real number, used when type-1 terms denote reals over sampled points.
    Real(f64),
    Point(Arc<[f64]>),
    /// Function of a finitely enumerable argument type, indexed by the
    /// enumeration index of the argument.
    Table {
        arg: FinType,
        entries: Arc<[Value]>,
    },
    Closure(Arc<ClosureFn>),
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Real(r) => write!(f, "{r}"),
            Value::Point(p) => write!(f, "{p:?}"),
            Value::Table { entries, .. } => f.debug_list().entries(entries.iter()).finish(),
            Value::Closure(_) => write!(f, "<fn>"),
        }
    }
}

impl Value {
    pub fn closure(f: impl Fn(Value) -> Result<Value, EvalError> + Send + Sync + 'static) -> Value {
        Value::Closure(Arc::new(f))
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Value::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Real(r) => Some(*r),
            _ => None,
        }
    }

    fn point(&self) -> Result<&[f64], EvalError> {
        match self {
            Value::Point(p) => Ok(p),
            _ => Err(EvalError::ValueMismatch(FinType::X)),
        }
    }

    fn real(&self) -> Result<f64, EvalError> {
        self.as_real()
            .ok_or_else(|| EvalError::ValueMismatch(FinType::pure(1)))
    }
}

#[derive(Debug, Clone)]
pub struct FiniteModel {
    /// Largest element of type 0.
    pub n: u64,
    /// Interpretation of `X`, if any.
    pub points: Vec<Vec<f64>>,
    pub budget: u64,
}

impl FiniteModel {
    pub fn new(n: u64) -> FiniteModel {
        FiniteModel {
            n,
            points: Vec::new(),
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_points(mut self, points: Vec<Vec<f64>>) -> FiniteModel {
        self.points = points;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> FiniteModel {
        self.budget = budget;
        self
    }

    fn dimension(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Number of elements of `ty`, or `None` on overflow or if the type is not
    /// X-free.
    pub fn cardinality(&self, ty: &FinType) -> Option<u64> {
        match ty {
            FinType::Zero => Some(self.n + 1),
            FinType::X => None,
            FinType::Arrow(r, a) => {
                let r = self.cardinality(r)?;
                let a = self.cardinality(a)?;
                let a = u32::try_from(a).ok()?;
                r.checked_pow(a)
            }
        }
    }

    /// Cardinality within the budget, or the matching error.
    pub fn enumerable(&self, ty: &FinType) -> Result<u64, EvalError> {
        if !ty.is_x_free() {
            return Err(EvalError::UnsupportedType(ty.clone()));
        }
        match self.cardinality(ty) {
            Some(c) if c <= self.budget => Ok(c),
            _ => Err(EvalError::EnumerationBudgetExceeded {
                ty: ty.clone(),
                budget: self.budget,
            }),
        }
    }

    /// The `i`-th element of an X-free type in the fixed mixed-radix order.
    pub fn element(&self, ty: &FinType, mut i: u64) -> Value {
        match ty {
            FinType::Zero => Value::Nat(i),
            FinType::X => unreachable!("X is not enumerated"),
            FinType::Arrow(r, a) => {
                let base = self.cardinality(r).expect("enumerable");
                let len = self.cardinality(a).expect("enumerable");
                let mut entries = Vec::with_capacity(len as usize);
                for _ in 0..len {
                    entries.push(self.element(r, i % base));
                    i /= base;
                }
                Value::Table {
                    arg: (**a).clone(),
                    entries: entries.into(),
                }
            }
        }
    }

    /// All elements of `ty`, subject to the budget.
    pub fn elements(&self, ty: &FinType) -> Result<Vec<Value>, EvalError> {
        if *ty == FinType::X {
            if self.points.is_empty() {
                return Err(EvalError::UnsupportedType(ty.clone()));
            }
            return Ok(self
                .points
                .iter()
                .map(|p| Value::Point(p.clone().into()))
                .collect());
        }
        let c = self.enumerable(ty)?;
        Ok((0..c).map(|i| self.element(ty, i)).collect())
    }

    /// Inverse of [`FiniteModel::element`].
    pub fn index_of(&self, v: &Value, ty: &FinType) -> Result<u64, EvalError> {
        match (v, ty) {
            (Value::Nat(n), FinType::Zero) => Ok((*n).min(self.n)),
            (_, FinType::Arrow(r, a)) => {
                let base = self.cardinality(r).ok_or_else(|| EvalError::UnsupportedType(ty.clone()))?;
                let len = self.enumerable(a)?;
                let mut idx = 0u64;
                for j in (0..len).rev() {
                    let arg = self.element(a, j);
                    let out = self.apply(v, arg)?;
                    idx = idx * base + self.index_of(&out, r)?;
                }
                Ok(idx)
            }
            _ => Err(EvalError::ValueMismatch(ty.clone())),
        }
    }

    pub fn apply(&self, f: &Value, arg: Value) -> Result<Value, EvalError> {
        match f {
            Value::Closure(c) => c(arg),
            Value::Table { arg: aty, entries } => {
                let i = self.index_of(&arg, aty)?;
                Ok(entries[i as usize].clone())
            }
            _ => Err(EvalError::ValueMismatch(FinType::arrow(FinType::Zero, FinType::Zero))),
        }
    }

    pub fn evaluate(&self, t: &Term, env: &Env) -> Result<Value, EvalError> {
        match t {
            Term::Var(v) => env
                .lookup(&v.name)
                .cloned()
                .ok_or_else(|| EvalError::UnboundVariable(v.name.clone())),
            Term::Const(c) => self.constant(c),
            Term::App(f, a) => {
                let fv = self.evaluate(f, env)?;
                let av = self.evaluate(a, env)?;
                self.apply(&fv, av)
            }
        }
    }

    fn constant(&self, c: &Constant) -> Result<Value, EvalError> {
        let model = Arc::new(self.clone());
        let cap = self.n;
        Ok(match c {
            Constant::Zero => Value::Nat(0),
            Constant::Succ => Value::closure(move |v| match v {
                Value::Nat(n) => Ok(Value::Nat((n + 1).min(cap))),
                _ => Err(EvalError::ValueMismatch(FinType::Zero)),
            }),
            Constant::Pi { .. } => Value::closure(|x| Ok(Value::closure(move |_| Ok(x.clone())))),
            Constant::Sigma { .. } => Value::closure(move |x| {
                let m = model.clone();
                Ok(Value::closure(move |y| {
                    let (m, x) = (m.clone(), x.clone());
                    Ok(Value::closure(move |z| {
                        let xz = m.apply(&x, z.clone())?;
                        let yz = m.apply(&y, z)?;
                        m.apply(&xz, yz)
                    }))
                }))
            }),
            Constant::Rec(_) => Value::closure(move |y| {
                let m = model.clone();
                Ok(Value::closure(move |z| {
                    let (m, y) = (m.clone(), y.clone());
                    Ok(Value::closure(move |n| {
                        let n = n.as_nat().ok_or(EvalError::ValueMismatch(FinType::Zero))?;
                        let mut acc = y.clone();
                        for i in 0..n {
                            let step = m.apply(&z, acc)?;
                            acc = m.apply(&step, Value::Nat(i))?;
                        }
                        Ok(acc)
                    }))
                }))
            }),
            Constant::ZeroX => Value::Point(vec![0.0; self.dimension()].into()),
            Constant::AddX => Value::closure(|x| {
                Ok(Value::closure(move |y| match (&x, &y) {
                    (Value::Point(a), Value::Point(b)) => {
                        Ok(Value::Point(a.iter().zip(b.iter()).map(|(p, q)| p + q).collect()))
                    }
                    _ => Err(EvalError::ValueMismatch(FinType::X)),
                }))
            }),
            Constant::NegX => Value::closure(|x| match x {
                Value::Point(a) => Ok(Value::Point(a.iter().map(|p| -p).collect())),
                _ => Err(EvalError::ValueMismatch(FinType::X)),
            }),
            Constant::OneX => {
                let mut e = vec![0.0; self.dimension()];
                if let Some(first) = e.first_mut() {
                    *first = 1.0;
                }
                Value::Point(e.into())
            }
            Constant::NormX => Value::closure(|x| {
                Ok(Value::Real(x.point()?.iter().map(|c| c * c).sum::<f64>().sqrt()))
            }),
            Constant::InnerX => Value::closure(|x| {
                Ok(Value::closure(move |y| {
                    let dot = x.point()?.iter().zip(y.point()?).map(|(a, b)| a * b).sum();
                    Ok(Value::Real(dot))
                }))
            }),
            Constant::ScaleX => Value::closure(|a| {
                let a = a.real()?;
                Ok(Value::closure(move |x| {
                    Ok(Value::Point(x.point()?.iter().map(|c| a * c).collect()))
                }))
            }),
            Constant::NatR => Value::closure(|n| match n {
                Value::Nat(n) => Ok(Value::Real(n as f64)),
                _ => Err(EvalError::ValueMismatch(FinType::Zero)),
            }),
            Constant::AddR | Constant::MulR => {
                let add = *c == Constant::AddR;
                Value::closure(move |a| {
                    let a = a.real()?;
                    Ok(Value::closure(move |b| {
                        let b = b.real()?;
                        Ok(Value::Real(if add { a + b } else { a * b }))
                    }))
                })
            }
            Constant::AbsR => Value::closure(|a| Ok(Value::Real(a.real()?.abs()))),
            Constant::NegR => Value::closure(|a| Ok(Value::Real(-a.real()?))),
            Constant::RecipR => Value::closure(|l| {
                let l = l.as_nat().ok_or(EvalError::ValueMismatch(FinType::Zero))?;
                Ok(Value::closure(move |a| {
                    let a = a.real()?;
                    let guard = 2f64.powi(-(l.min(1000) as i32));
                    Ok(Value::Real(if a.abs() > guard { 1.0 / a } else { 0.0 }))
                }))
            }),
            other => return Err(EvalError::UnsupportedConstant(other.name())),
        })
    }
}

/// Variable bindings as a stack; later bindings shadow earlier ones.
#[derive(Debug, Clone, Default)]
pub struct Env {
    bindings: Vec<(String, Value)>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn push(&mut self, name: impl Into<String>, v: Value) {
        self.bindings.push((name.into(), v));
    }

    pub fn pop(&mut self) {
        self.bindings.pop();
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.iter().map(|(n, _)| n.as_str())
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        self.bindings
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Term;

    #[test]
    fn evaluation_examples() {
        let m = FiniteModel::new(3);
        let v = m.evaluate(&Term::numeral(2), &Env::new()).unwrap();
        assert_eq!(v.as_nat(), Some(2));
        let m0 = FiniteModel::new(0);
        assert_eq!(
            m0.evaluate(&Term::numeral(1), &Env::new()).unwrap().as_nat(),
            Some(0)
        );
        let pi = Term::Const(Constant::Pi {
            first: FinType::Zero,
            second: FinType::Zero,
        });
        let t = Term::apply_all(pi, [Term::numeral(1), Term::numeral(3)]);
        assert_eq!(m.evaluate(&t, &Env::new()).unwrap().as_nat(), Some(1));
    }

    #[test]
    fn enumeration_indices_round_trip() {
        let m = FiniteModel::new(2);
        let ty: FinType = "0(0)(0)".parse().unwrap();
        assert_eq!(m.cardinality(&ty), Some(3u64.pow(9)));
        let one: FinType = "1".parse().unwrap();
        for i in 0..27 {
            let v = m.element(&one, i);
            assert_eq!(m.index_of(&v, &one).unwrap(), i);
        }
        let two: FinType = "2".parse().unwrap();
        assert!(matches!(
            m.enumerable(&two),
            Err(EvalError::EnumerationBudgetExceeded { .. })
        ));
    }

    #[test]
    fn unsupported_constant() {
        let m = FiniteModel::new(2);
        assert!(matches!(
            m.evaluate(&Term::Const(Constant::ChiA), &Env::new()),
            Err(EvalError::UnsupportedConstant("chiA"))
        ));
    }
}
