//! Formulas over combinator terms: prime formulas `s =₀ t`, the defined
//! predicates (`=_ρ`, `=_X`, `⪯_ρ`, membership), the negative translation and
//! the Dialectica interpretation.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::term::{Constant, Term, TermError, Var};
use crate::types::FinType;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `s =₀ t`
    Eq0(Term, Term),
    /// `s ≤₀ t`, a primitive recursive relation treated as prime.
    Le0(Term, Term),
    /// Relations between type-1 real codes, kept atomic.
    EqR(Term, Term),
    LeR(Term, Term),
    LtR(Term, Term),
    /// `s =_ρ t`, unfolded by extensionality.
    EqTy(FinType, Term, Term),
    /// `s =_X t := ‖s −_X t‖ =_ℝ 0`.
    EqX(Term, Term),
    /// `s ⪯_ρ t`.
    Preceq(FinType, Term, Term),
    /// `value ∈ A point := χ_A point value =₀ 0`.
    Mem { value: Term, point: Term },
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormulaError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("`{relation}` expects both sides of type {expected}, found {lhs} and {rhs}")]
    RelationType {
        relation: &'static str,
        expected: FinType,
        lhs: FinType,
        rhs: FinType,
    },
}

pub fn falsum() -> Formula {
    Formula::Eq0(Term::zero(), Term::numeral(1))
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// `¬A := A → 0 =₀ S0`.
    pub fn not(a: Formula) -> Formula {
        Formula::implies(a, falsum())
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall_all(vars: &[Var], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::forall(v.clone(), acc))
    }

    pub fn exists_all(vars: &[Var], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::exists(v.clone(), acc))
    }

    /// `∃b ⪯_σ t. body` with `σ` the type of `b`.
    pub fn bounded_exists(b: Var, bound: Term, body: Formula) -> Formula {
        let sigma = b.ty.clone();
        Formula::exists(
            b.clone(),
            Formula::and(Formula::Preceq(sigma, Term::Var(b), bound), body),
        )
    }

    pub fn is_falsum(&self) -> bool {
        *self == falsum()
    }

    /// The negated formula if this is `A → ⊥`.
    pub fn as_negation(&self) -> Option<&Formula> {
        match self {
            Formula::Implies(a, b) if b.is_falsum() => Some(a),
            _ => None,
        }
    }

    /// `(b, bound, body)` if this is `∃b (b ⪯ t ∧ body)`.
    pub fn as_bounded_exists(&self) -> Option<(&Var, &Term, &Formula)> {
        if let Formula::Exists(b, inner) = self {
            if let Formula::And(l, r) = inner.as_ref() {
                if let Formula::Preceq(sigma, Term::Var(v), bound) = l.as_ref() {
                    if v == b && *sigma == b.ty {
                        return Some((b, bound, r));
                    }
                }
            }
        }
        None
    }

    pub fn is_atomic(&self) -> bool {
        !matches!(
            self,
            Formula::And(..)
                | Formula::Or(..)
                | Formula::Implies(..)
                | Formula::Forall(..)
                | Formula::Exists(..)
        )
    }

    /// Terms appearing directly in an atomic formula.
    fn atom_terms(&self) -> Vec<&Term> {
        match self {
            Formula::Eq0(a, b)
            | Formula::Le0(a, b)
            | Formula::EqR(a, b)
            | Formula::LeR(a, b)
            | Formula::LtR(a, b)
            | Formula::EqTy(_, a, b)
            | Formula::EqX(a, b)
            | Formula::Preceq(_, a, b) => vec![a, b],
            Formula::Mem { value, point } => vec![value, point],
            _ => Vec::new(),
        }
    }

    fn map_atom_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Formula {
        match self {
            Formula::Eq0(a, b) => Formula::Eq0(f(a), f(b)),
            Formula::Le0(a, b) => Formula::Le0(f(a), f(b)),
            Formula::EqR(a, b) => Formula::EqR(f(a), f(b)),
            Formula::LeR(a, b) => Formula::LeR(f(a), f(b)),
            Formula::LtR(a, b) => Formula::LtR(f(a), f(b)),
            Formula::EqTy(t, a, b) => Formula::EqTy(t.clone(), f(a), f(b)),
            Formula::EqX(a, b) => Formula::EqX(f(a), f(b)),
            Formula::Preceq(t, a, b) => Formula::Preceq(t.clone(), f(a), f(b)),
            Formula::Mem { value, point } => Formula::Mem {
                value: f(value),
                point: f(point),
            },
            _ => unreachable!("not atomic"),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<Var>) {
        match self {
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                bound.push(v.name.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            atom => {
                for t in atom.atom_terms() {
                    for v in t.free_vars() {
                        if !bound.contains(&v.name) {
                            out.insert(v);
                        }
                    }
                }
            }
        }
    }

    /// Every variable name occurring free or bound.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                out.insert(v.name.clone());
                body.collect_names(out);
            }
            atom => {
                for t in atom.atom_terms() {
                    out.extend(t.free_vars().into_iter().map(|v| v.name));
                }
            }
        }
    }

    /// Names of bound variables, with repetitions.
    pub fn bound_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_bound(&mut out);
        out
    }

    fn collect_bound(&self, out: &mut Vec<String>) {
        match self {
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_bound(out);
                b.collect_bound(out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                out.push(v.name.clone());
                body.collect_bound(out);
            }
            _ => {}
        }
    }

    /// Capture-avoiding substitution of `replacement` for the free variable `name`.
    pub fn substitute(&self, name: &str, replacement: &Term, gen: &mut NameGen) -> Formula {
        match self {
            Formula::And(a, b) => Formula::and(
                a.substitute(name, replacement, gen),
                b.substitute(name, replacement, gen),
            ),
            Formula::Or(a, b) => Formula::or(
                a.substitute(name, replacement, gen),
                b.substitute(name, replacement, gen),
            ),
            Formula::Implies(a, b) => Formula::implies(
                a.substitute(name, replacement, gen),
                b.substitute(name, replacement, gen),
            ),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let rebuild = |v: Var, b: Formula| match self {
                    Formula::Forall(..) => Formula::forall(v, b),
                    _ => Formula::exists(v, b),
                };
                if v.name == name {
                    return self.clone();
                }
                if replacement.mentions(&v.name) {
                    let fresh = Var::new(gen.fresh(&v.name), v.ty.clone());
                    let renamed = body.substitute(&v.name, &Term::Var(fresh.clone()), gen);
                    rebuild(fresh, renamed.substitute(name, replacement, gen))
                } else {
                    rebuild(v.clone(), body.substitute(name, replacement, gen))
                }
            }
            atom => atom.map_atom_terms(&mut |t| t.substitute(name, replacement)),
        }
    }

    /// Renames bound variables so that every binder has a distinct name that
    /// differs from every free variable.
    pub fn rename_apart(&self, gen: &mut NameGen) -> Formula {
        let mut seen: BTreeSet<String> = self.free_vars().into_iter().map(|v| v.name).collect();
        self.rename_apart_inner(gen, &mut seen)
    }

    fn rename_apart_inner(&self, gen: &mut NameGen, seen: &mut BTreeSet<String>) -> Formula {
        match self {
            Formula::And(a, b) => Formula::and(
                a.rename_apart_inner(gen, seen),
                b.rename_apart_inner(gen, seen),
            ),
            Formula::Or(a, b) => Formula::or(
                a.rename_apart_inner(gen, seen),
                b.rename_apart_inner(gen, seen),
            ),
            Formula::Implies(a, b) => Formula::implies(
                a.rename_apart_inner(gen, seen),
                b.rename_apart_inner(gen, seen),
            ),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let (v2, body2) = if seen.contains(&v.name) {
                    let fresh = Var::new(gen.fresh(&v.name), v.ty.clone());
                    let b = body.substitute(&v.name, &Term::Var(fresh.clone()), gen);
                    (fresh, b)
                } else {
                    (v.clone(), (**body).clone())
                };
                seen.insert(v2.name.clone());
                let inner = body2.rename_apart_inner(gen, seen);
                match self {
                    Formula::Forall(..) => Formula::forall(v2, inner),
                    _ => Formula::exists(v2, inner),
                }
            }
            atom => atom.clone(),
        }
    }

    /// Unfolds `=_ρ` (ρ ≠ 0), `=_X`, `⪯_ρ` and membership into the primitive
    /// language. Fresh argument variables come from `gen`.
    pub fn expand_defined(&self, gen: &mut NameGen) -> Formula {
        match self {
            Formula::And(a, b) => Formula::and(a.expand_defined(gen), b.expand_defined(gen)),
            Formula::Or(a, b) => Formula::or(a.expand_defined(gen), b.expand_defined(gen)),
            Formula::Implies(a, b) => {
                Formula::implies(a.expand_defined(gen), b.expand_defined(gen))
            }
            Formula::Forall(v, body) => Formula::forall(v.clone(), body.expand_defined(gen)),
            Formula::Exists(v, body) => Formula::exists(v.clone(), body.expand_defined(gen)),
            Formula::EqTy(ty, s, t) => match ty {
                FinType::Zero => Formula::Eq0(s.clone(), t.clone()),
                FinType::X => Formula::EqX(s.clone(), t.clone()).expand_defined(gen),
                FinType::Arrow(res, arg) => {
                    let y = Var::new(gen.fresh("y"), (**arg).clone());
                    let body = Formula::EqTy(
                        (**res).clone(),
                        Term::app(s.clone(), Term::Var(y.clone())),
                        Term::app(t.clone(), Term::Var(y.clone())),
                    );
                    Formula::forall(y, body.expand_defined(gen))
                }
            },
            Formula::EqX(s, t) => {
                let diff = Term::apply_all(
                    Term::Const(Constant::AddX),
                    [s.clone(), Term::app(Term::Const(Constant::NegX), t.clone())],
                );
                Formula::EqR(
                    Term::app(Term::Const(Constant::NormX), diff),
                    Term::app(Term::Const(Constant::NatR), Term::zero()),
                )
            }
            Formula::Preceq(ty, s, t) => match ty {
                FinType::Zero => Formula::Le0(s.clone(), t.clone()),
                FinType::X => Formula::LeR(
                    Term::app(Term::Const(Constant::NormX), s.clone()),
                    Term::app(Term::Const(Constant::NormX), t.clone()),
                ),
                FinType::Arrow(res, arg) => {
                    let z = Var::new(gen.fresh("z"), (**arg).clone());
                    let body = Formula::Preceq(
                        (**res).clone(),
                        Term::app(s.clone(), Term::Var(z.clone())),
                        Term::app(t.clone(), Term::Var(z.clone())),
                    );
                    Formula::forall(z, body.expand_defined(gen))
                }
            },
            Formula::Mem { value, point } => Formula::Eq0(
                Term::apply_all(Term::Const(Constant::ChiA), [point.clone(), value.clone()]),
                Term::zero(),
            ),
            atom => atom.clone(),
        }
    }

    /// True if no quantifier occurs, counting defined predicates whose
    /// unfolding introduces quantifiers (`=_ρ`, `⪯_ρ` at arrow types).
    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Forall(..) | Formula::Exists(..) => false,
            Formula::EqTy(ty, ..) | Formula::Preceq(ty, ..) => {
                matches!(ty, FinType::Zero | FinType::X)
            }
            _ => true,
        }
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => 1 + body.quantifier_depth(),
            _ => 0,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => 1 + body.size(),
            _ => 1,
        }
    }

    /// Checks that every term is well typed and every relation relates terms
    /// of the right type. Bound variables carry their own types, so no
    /// context is threaded.
    pub fn check_types(&self) -> Result<(), FormulaError> {
        let rel = |name: &'static str, expected: FinType, a: &Term, b: &Term| {
            let (lt, rt) = (a.type_of()?, b.type_of()?);
            if lt != expected || rt != expected {
                return Err(FormulaError::RelationType {
                    relation: name,
                    expected,
                    lhs: lt,
                    rhs: rt,
                });
            }
            Ok(())
        };
        let one = FinType::pure(1);
        match self {
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.check_types()?;
                b.check_types()
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => body.check_types(),
            Formula::Eq0(a, b) => rel("eq", FinType::Zero, a, b),
            Formula::Le0(a, b) => rel("le", FinType::Zero, a, b),
            Formula::EqR(a, b) => rel("eqr", one, a, b),
            Formula::LeR(a, b) => rel("ler", one, a, b),
            Formula::LtR(a, b) => rel("ltr", one, a, b),
            Formula::EqTy(ty, a, b) => rel("eqty", ty.clone(), a, b),
            Formula::EqX(a, b) => rel("eqx", FinType::X, a, b),
            Formula::Preceq(ty, a, b) => rel("preceq", ty.clone(), a, b),
            Formula::Mem { value, point } => rel("mem", FinType::X, value, point),
        }
    }
}

/// Deterministic supply of fresh names, avoiding every name registered.
#[derive(Debug, Clone, Default)]
pub struct NameGen {
    used: BTreeSet<String>,
    counter: usize,
}

impl NameGen {
    pub fn new() -> NameGen {
        NameGen::default()
    }

    pub fn avoiding(f: &Formula) -> NameGen {
        NameGen {
            used: f.all_names(),
            counter: 0,
        }
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let base = base.split('_').next().filter(|b| !b.is_empty()).unwrap_or("v");
        loop {
            self.counter += 1;
            let name = format!("{base}_{}", self.counter);
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_falsum() {
            return write!(f, "false");
        }
        if let Some(a) = self.as_negation() {
            return write!(f, "(not {a})");
        }
        if let Some((b, bound, body)) = self.as_bounded_exists() {
            return write!(f, "(bexists {} {} {bound} {body})", b.name, b.ty);
        }
        match self {
            Formula::Eq0(a, b) => write!(f, "(eq {a} {b})"),
            Formula::Le0(a, b) => write!(f, "(le {a} {b})"),
            Formula::EqR(a, b) => write!(f, "(eqr {a} {b})"),
            Formula::LeR(a, b) => write!(f, "(ler {a} {b})"),
            Formula::LtR(a, b) => write!(f, "(ltr {a} {b})"),
            Formula::EqTy(t, a, b) => write!(f, "(eqty {t} {a} {b})"),
            Formula::EqX(a, b) => write!(f, "(eqx {a} {b})"),
            Formula::Preceq(t, a, b) => write!(f, "(preceq {t} {a} {b})"),
            Formula::Mem { value, point } => write!(f, "(mem {value} {point})"),
            Formula::And(a, b) => write!(f, "(and {a} {b})"),
            Formula::Or(a, b) => write!(f, "(or {a} {b})"),
            Formula::Implies(a, b) => write!(f, "(imp {a} {b})"),
            Formula::Forall(v, body) => write!(f, "(forall {} {} {body})", v.name, v.ty),
            Formula::Exists(v, body) => write!(f, "(exists {} {} {body})", v.name, v.ty),
        }
    }
}

/// Kuroda negative translation `A' = ¬¬A*`.
pub fn negative_translation(f: &Formula) -> Formula {
    let mut gen = NameGen::avoiding(f);
    let f = f.expand_defined(&mut gen);
    Formula::not(Formula::not(star(&f)))
}

fn star(f: &Formula) -> Formula {
    match f {
        Formula::And(a, b) => Formula::and(star(a), star(b)),
        Formula::Or(a, b) => Formula::or(star(a), star(b)),
        Formula::Implies(a, b) => Formula::implies(star(a), star(b)),
        Formula::Exists(v, body) => Formula::exists(v.clone(), star(body)),
        Formula::Forall(v, body) => {
            Formula::forall(v.clone(), Formula::not(Formula::not(star(body))))
        }
        atom => atom.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantifierClass {
    /// No quantifiers: both a ∀- and an ∃-formula.
    QuantifierFree,
    ForallFormula,
    ExistsFormula,
    Neither,
}

pub fn classify_quantifier_class(f: &Formula) -> QuantifierClass {
    fn strip(f: &Formula, universal: bool) -> (Vec<&Var>, &Formula) {
        let mut vars = Vec::new();
        let mut cur = f;
        loop {
            match (cur, universal) {
                (Formula::Forall(v, b), true) | (Formula::Exists(v, b), false) => {
                    vars.push(v);
                    cur = b;
                }
                _ => return (vars, cur),
            }
        }
    }
    if f.is_quantifier_free() {
        return QuantifierClass::QuantifierFree;
    }
    for (universal, class) in [
        (true, QuantifierClass::ForallFormula),
        (false, QuantifierClass::ExistsFormula),
    ] {
        let (vars, body) = strip(f, universal);
        if !vars.is_empty() && body.is_quantifier_free() && vars.iter().all(|v| v.ty.is_admissible())
        {
            return class;
        }
    }
    QuantifierClass::Neither
}

/// `∃x̲ ∀y̲ A_D(x̲, y̲)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialecticaForm {
    pub ex_vars: Vec<Var>,
    pub univ_vars: Vec<Var>,
    pub matrix: Formula,
}

impl DialecticaForm {
    pub fn to_formula(&self) -> Formula {
        Formula::exists_all(
            &self.ex_vars,
            Formula::forall_all(&self.univ_vars, self.matrix.clone()),
        )
    }
}

/// Gödel's Dialectica interpretation. Defined predicates are unfolded and
/// bound variables renamed apart before translation.
pub fn dialectica(f: &Formula) -> DialecticaForm {
    let mut gen = NameGen::avoiding(f);
    let f = f.expand_defined(&mut gen).rename_apart(&mut gen);
    dial(&f, &mut gen)
}

fn apply_vars(head: &Var, args: &[&Var]) -> Term {
    Term::apply_all(
        Term::Var(head.clone()),
        args.iter().map(|v| Term::Var((*v).clone())),
    )
}

fn dial(f: &Formula, gen: &mut NameGen) -> DialecticaForm {
    match f {
        Formula::And(a, b) => {
            let (a, b) = (dial(a, gen), dial(b, gen));
            DialecticaForm {
                ex_vars: [a.ex_vars, b.ex_vars].concat(),
                univ_vars: [a.univ_vars, b.univ_vars].concat(),
                matrix: Formula::and(a.matrix, b.matrix),
            }
        }
        Formula::Or(a, b) => {
            let (a, b) = (dial(a, gen), dial(b, gen));
            let z = Var::new(gen.fresh("z"), FinType::Zero);
            let z_zero = Formula::Eq0(Term::Var(z.clone()), Term::zero());
            let matrix = Formula::and(
                Formula::implies(z_zero.clone(), a.matrix),
                Formula::implies(Formula::not(z_zero), b.matrix),
            );
            DialecticaForm {
                ex_vars: [vec![z], a.ex_vars, b.ex_vars].concat(),
                univ_vars: [a.univ_vars, b.univ_vars].concat(),
                matrix,
            }
        }
        Formula::Implies(a, b) => {
            let (a, b) = (dial(a, gen), dial(b, gen));
            let xs: Vec<&Var> = a.ex_vars.iter().collect();
            let vs: Vec<&Var> = b.univ_vars.iter().collect();
            let x_tys: Vec<FinType> = xs.iter().map(|v| v.ty.clone()).collect();
            let xv_tys: Vec<FinType> = xs.iter().chain(vs.iter()).map(|v| v.ty.clone()).collect();
            let xv: Vec<&Var> = xs.iter().chain(vs.iter()).copied().collect();
            let mut premise = a.matrix.clone();
            let mut ys = Vec::new();
            for y in &a.univ_vars {
                let big_y = Var::new(gen.fresh("Y"), FinType::curried(y.ty.clone(), &xv_tys));
                premise = premise.substitute(&y.name, &apply_vars(&big_y, &xv), gen);
                ys.push(big_y);
            }
            let mut conclusion = b.matrix.clone();
            let mut us = Vec::new();
            for u in &b.ex_vars {
                let big_u = Var::new(gen.fresh("U"), FinType::curried(u.ty.clone(), &x_tys));
                conclusion = conclusion.substitute(&u.name, &apply_vars(&big_u, &xs), gen);
                us.push(big_u);
            }
            DialecticaForm {
                ex_vars: [us, ys].concat(),
                univ_vars: xv.into_iter().cloned().collect(),
                matrix: Formula::implies(premise, conclusion),
            }
        }
        Formula::Exists(z, body) => {
            let a = dial(body, gen);
            DialecticaForm {
                ex_vars: [vec![z.clone()], a.ex_vars].concat(),
                univ_vars: a.univ_vars,
                matrix: a.matrix,
            }
        }
        Formula::Forall(z, body) => {
            let a = dial(body, gen);
            let mut matrix = a.matrix;
            let mut xs = Vec::new();
            for x in &a.ex_vars {
                let big_x = Var::new(
                    gen.fresh("X"),
                    FinType::arrow(x.ty.clone(), z.ty.clone()),
                );
                matrix = matrix.substitute(&x.name, &apply_vars(&big_x, &[z]), gen);
                xs.push(big_x);
            }
            DialecticaForm {
                ex_vars: xs,
                univ_vars: [vec![z.clone()], a.univ_vars].concat(),
                matrix,
            }
        }
        atom => DialecticaForm {
            ex_vars: Vec::new(),
            univ_vars: Vec::new(),
            matrix: atom.clone(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v0(name: &str) -> Var {
        Var::new(name, FinType::Zero)
    }

    fn t(name: &str) -> Term {
        Term::Var(v0(name))
    }

    #[test]
    fn expansion_examples() {
        let mut gen = NameGen::new();
        let f = Formula::Preceq(FinType::Zero, t("x"), t("y"));
        assert_eq!(f.expand_defined(&mut gen), Formula::Le0(t("x"), t("y")));

        let x = Term::var("x", FinType::X);
        let y = Term::var("y", FinType::X);
        let f = Formula::Preceq(FinType::X, x.clone(), y.clone());
        assert_eq!(
            f.expand_defined(&mut gen),
            Formula::LeR(
                Term::app(Term::Const(Constant::NormX), x),
                Term::app(Term::Const(Constant::NormX), y)
            )
        );

        let one = FinType::pure(1);
        let f = Formula::Preceq(one.clone(), Term::var("f", one.clone()), Term::var("g", one.clone()));
        match f.expand_defined(&mut NameGen::new()) {
            Formula::Forall(z, body) => {
                assert_eq!(z.ty, FinType::Zero);
                let zt = Term::Var(z);
                assert_eq!(
                    *body,
                    Formula::Le0(
                        Term::app(Term::var("f", one.clone()), zt.clone()),
                        Term::app(Term::var("g", one), zt)
                    )
                );
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn membership_unfolds_to_characteristic_function() {
        let x = Term::var("x", FinType::X);
        let y = Term::var("y", FinType::X);
        let f = Formula::Mem {
            value: y.clone(),
            point: x.clone(),
        };
        let e = f.expand_defined(&mut NameGen::new());
        assert_eq!(
            e,
            Formula::Eq0(Term::apply_all(Term::Const(Constant::ChiA), [x, y]), Term::zero())
        );
        assert!(e.check_types().is_ok());
    }

    #[test]
    fn negative_translation_examples() {
        let p = Formula::Eq0(t("x"), t("x"));
        assert_eq!(
            negative_translation(&p),
            Formula::not(Formula::not(p.clone()))
        );
        let all = Formula::forall(v0("x"), p.clone());
        assert_eq!(
            negative_translation(&all),
            Formula::not(Formula::not(Formula::forall(
                v0("x"),
                Formula::not(Formula::not(p.clone()))
            )))
        );
        let ex = Formula::exists(v0("x"), p.clone());
        assert_eq!(
            negative_translation(&ex),
            Formula::not(Formula::not(ex.clone()))
        );
    }

    #[test]
    fn dialectica_prime_and_forall_exists() {
        let p = Formula::Eq0(t("y"), Term::succ(t("x")));
        let d = dialectica(&p);
        assert!(d.ex_vars.is_empty() && d.univ_vars.is_empty());
        assert_eq!(d.matrix, p);

        let f = Formula::forall(v0("x"), Formula::exists(v0("y"), p));
        let d = dialectica(&f);
        assert_eq!(d.ex_vars.len(), 1);
        assert_eq!(d.ex_vars[0].ty, FinType::pure(1));
        assert_eq!(d.univ_vars, vec![v0("x")]);
        let big_y = Term::Var(d.ex_vars[0].clone());
        assert_eq!(
            d.matrix,
            Formula::Eq0(Term::app(big_y, t("x")), Term::succ(t("x")))
        );
    }

    #[test]
    fn dialectica_disjunction() {
        let p = Formula::Eq0(t("a"), Term::zero());
        let q = Formula::Le0(t("a"), t("b"));
        let d = dialectica(&Formula::or(p.clone(), q.clone()));
        assert_eq!(d.ex_vars.len(), 1);
        assert!(d.univ_vars.is_empty());
        let z = Term::Var(d.ex_vars[0].clone());
        let zz = Formula::Eq0(z, Term::zero());
        assert_eq!(
            d.matrix,
            Formula::and(
                Formula::implies(zz.clone(), p),
                Formula::implies(Formula::not(zz), q)
            )
        );
    }

    #[test]
    fn dialectica_implication_types() {
        // (∃x ∀y P(x,y)) → (∃u ∀v Q(u,v))
        let a = Formula::exists(
            v0("x"),
            Formula::forall(v0("y"), Formula::Le0(t("x"), t("y"))),
        );
        let b = Formula::exists(
            v0("u"),
            Formula::forall(v0("v"), Formula::Le0(t("u"), t("v"))),
        );
        let d = dialectica(&Formula::implies(a, b));
        let tys: Vec<String> = d.ex_vars.iter().map(|v| v.ty.to_string()).collect();
        assert_eq!(tys, ["0(0)", "0(0)(0)"]);
        assert_eq!(d.univ_vars, vec![v0("x"), v0("v")]);
        assert!(d.matrix.check_types().is_ok());
        assert!(d.matrix.is_quantifier_free());
    }

    #[test]
    fn quantifier_classes() {
        let x = Var::new("x", FinType::X);
        let norm = Term::app(Term::Const(Constant::NormX), Term::Var(x.clone()));
        let f = Formula::forall(x, Formula::EqR(norm.clone(), norm));
        assert_eq!(classify_quantifier_class(&f), QuantifierClass::ForallFormula);
        let p = Formula::Eq0(t("v"), Term::zero());
        assert_eq!(
            classify_quantifier_class(&Formula::exists(v0("v"), p.clone())),
            QuantifierClass::ExistsFormula
        );
        let ae = Formula::forall(v0("x"), Formula::exists(v0("y"), Formula::Le0(t("x"), t("y"))));
        assert_eq!(classify_quantifier_class(&ae), QuantifierClass::Neither);
        assert_eq!(classify_quantifier_class(&p), QuantifierClass::QuantifierFree);
        let bad = Formula::forall(
            Var::new("h", "0(X(X))".parse().unwrap()),
            p,
        );
        assert_eq!(classify_quantifier_class(&bad), QuantifierClass::Neither);
    }

    #[test]
    fn substitution_avoids_capture() {
        // ∀y (x ≤ y) [y/x] must rename the binder.
        let f = Formula::forall(v0("y"), Formula::Le0(t("x"), t("y")));
        let mut gen = NameGen::avoiding(&f);
        let g = f.substitute("x", &t("y"), &mut gen);
        match g {
            Formula::Forall(b, body) => {
                assert_ne!(b.name, "y");
                assert_eq!(*body, Formula::Le0(t("y"), Term::Var(b)));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rename_apart_makes_binders_distinct() {
        let p = Formula::Le0(t("x"), t("x"));
        let f = Formula::and(
            Formula::forall(v0("x"), p.clone()),
            Formula::and(Formula::exists(v0("x"), p.clone()), p),
        );
        let mut gen = NameGen::avoiding(&f);
        let g = f.rename_apart(&mut gen);
        let bound = g.bound_names();
        let set: BTreeSet<_> = bound.iter().cloned().collect();
        assert_eq!(set.len(), bound.len());
        assert!(!set.contains("x"));
        assert_eq!(g.free_vars(), f.free_vars());
    }
}
