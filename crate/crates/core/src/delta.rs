//! Recognition of `∀a̲ ∃b̲ ⪯ r̲a̲ ∀c̲ F` shapes and their Skolem normal forms
//! `∃B̲ ⪯ r̲ ∀a̲ ∀c̲ F(a̲, B̲a̲, c̲)`.

use std::fmt;

use crate::formula::{Formula, NameGen};
use crate::term::{abstract_eta, Term, Var};
use crate::types::FinType;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaForm {
    pub a_vars: Vec<Var>,
    /// Each existential variable with its bound term, closed apart from `a_vars`.
    pub b_vars: Vec<(Var, Term)>,
    pub c_vars: Vec<Var>,
    pub matrix: Formula,
}

/// Why a formula is not of the required shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NotDelta {
    MissingBound,
    UnboundedExistential(String),
    NotAdmissible(String, FinType),
    BoundDependsOn(String),
    MatrixNotQuantifierFree,
}

impl fmt::Display for NotDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotDelta::MissingBound => write!(f, "no bounded existential quantifier"),
            NotDelta::UnboundedExistential(v) => write!(f, "existential `{v}` has no ⪯ bound"),
            NotDelta::NotAdmissible(v, t) => write!(f, "`{v}` has non-admissible type {t}"),
            NotDelta::BoundDependsOn(v) => {
                write!(f, "bound term mentions `{v}`, which is not a leading universal")
            }
            NotDelta::MatrixNotQuantifierFree => write!(f, "matrix is not quantifier-free"),
        }
    }
}

pub fn delta_recognize(f: &Formula) -> Option<DeltaForm> {
    delta_diagnose(f).ok()
}

/// Like [`delta_recognize`] but reports the first reason for rejection.
pub fn delta_diagnose(f: &Formula) -> Result<DeltaForm, NotDelta> {
    let admissible = |v: &Var| {
        if v.ty.is_admissible() {
            Ok(())
        } else {
            Err(NotDelta::NotAdmissible(v.name.clone(), v.ty.clone()))
        }
    };
    let mut cur = f;
    let mut a_vars = Vec::new();
    while let Formula::Forall(v, body) = cur {
        admissible(v)?;
        a_vars.push(v.clone());
        cur = body;
    }
    let mut b_vars = Vec::new();
    while let Formula::Exists(v, _) = cur {
        let Some((b, bound, body)) = cur.as_bounded_exists() else {
            return Err(NotDelta::UnboundedExistential(v.name.clone()));
        };
        admissible(b)?;
        for fv in bound.free_vars() {
            if !a_vars.iter().any(|a| a.name == fv.name) {
                return Err(NotDelta::BoundDependsOn(fv.name));
            }
        }
        b_vars.push((b.clone(), bound.clone()));
        cur = body;
    }
    if b_vars.is_empty() {
        return Err(NotDelta::MissingBound);
    }
    let mut c_vars = Vec::new();
    while let Formula::Forall(v, body) = cur {
        admissible(v)?;
        c_vars.push(v.clone());
        cur = body;
    }
    if !cur.is_quantifier_free() {
        return Err(NotDelta::MatrixNotQuantifierFree);
    }
    Ok(DeltaForm {
        a_vars,
        b_vars,
        c_vars,
        matrix: cur.clone(),
    })
}

impl DeltaForm {
    /// The formula this shape was recognized from.
    pub fn to_formula(&self) -> Formula {
        let inner = Formula::forall_all(&self.c_vars, self.matrix.clone());
        let body = self
            .b_vars
            .iter()
            .rev()
            .fold(inner, |acc, (b, t)| Formula::bounded_exists(b.clone(), t.clone(), acc));
        Formula::forall_all(&self.a_vars, body)
    }

    /// `λa̲. t` by bracket abstraction with the η shortcut.
    pub fn bound_functional(&self, t: &Term) -> Term {
        self.a_vars.iter().rev().fold(t.clone(), |acc, a| {
            abstract_eta(a, &acc).expect("bound term is well typed")
        })
    }
}

/// `∃B̲ ⪯ r̲ ∀a̲ ∀c̲ F(a̲, B̲a̲, c̲)` with fresh function variables `B̲`.
pub fn skolemize_delta(d: &DeltaForm) -> Formula {
    let mut gen = NameGen::avoiding(&d.to_formula());
    let a_tys: Vec<FinType> = d.a_vars.iter().map(|a| a.ty.clone()).collect();
    let mut matrix = d.matrix.clone();
    let mut witnesses = Vec::new();
    for (b, bound) in &d.b_vars {
        let big_b = Var::new(gen.fresh("B"), FinType::curried(b.ty.clone(), &a_tys));
        let applied = Term::apply_all(
            Term::Var(big_b.clone()),
            d.a_vars.iter().map(|a| Term::Var(a.clone())),
        );
        matrix = matrix.substitute(&b.name, &applied, &mut gen);
        witnesses.push((big_b, d.bound_functional(bound)));
    }
    let body = Formula::forall_all(&d.a_vars, Formula::forall_all(&d.c_vars, matrix));
    witnesses
        .into_iter()
        .rev()
        .fold(body, |acc, (b, r)| Formula::bounded_exists(b, r, acc))
}
