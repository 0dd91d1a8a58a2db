//! Combinator terms over the finite types, with the constants of the operator
//! theories, type checking, bracket abstraction and normal-order reduction.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::types::FinType;

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub ty: FinType,
}

impl Var {
    pub fn new(name: impl Into<String>, ty: FinType) -> Var {
        Var {
            name: name.into(),
            ty,
        }
    }
}

/// Constants of the language. The combinators and the recursor carry their
/// type instantiation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constant {
    Zero,
    Succ,
    /// `Π x y ▷ x` with `x: first`, `y: second`.
    Pi { first: FinType, second: FinType },
    /// `Σ x y z ▷ x z (y z)` with `x: result(middle)(arg)`, `y: middle(arg)`, `z: arg`.
    Sigma {
        result: FinType,
        middle: FinType,
        arg: FinType,
    },
    /// `R y z 0 ▷ y`, `R y z (S n) ▷ z (R y z n) n`.
    Rec(FinType),
    ZeroX,
    OneX,
    AddX,
    NegX,
    ScaleX,
    NormX,
    InnerX,
    ChiA,
    JChi,
    GammaTilde,
    MGamma,
    CX,
    RhoTilde,
    NGamma,
    MinNormSelection,
    Varpi,
    // Real arithmetic on type-1 codes.
    NatR,
    AddR,
    MulR,
    AbsR,
    NegR,
    RecipR,
}

fn t0() -> FinType {
    FinType::Zero
}
fn tx() -> FinType {
    FinType::X
}
fn t1() -> FinType {
    FinType::pure(1)
}

impl Constant {
    pub fn ty(&self) -> FinType {
        use Constant::*;
        match self {
            Zero | MGamma | NGamma => t0(),
            Succ => t1(),
            Pi { first, second } => FinType::curried(first.clone(), &[first.clone(), second.clone()]),
            Sigma {
                result,
                middle,
                arg,
            } => {
                let x = FinType::curried(result.clone(), &[arg.clone(), middle.clone()]);
                let y = FinType::arrow(middle.clone(), arg.clone());
                FinType::curried(result.clone(), &[x, y, arg.clone()])
            }
            Rec(rho) => {
                let step = FinType::curried(rho.clone(), &[rho.clone(), t0()]);
                FinType::curried(rho.clone(), &[rho.clone(), step, t0()])
            }
            ZeroX | OneX | CX => tx(),
            AddX => FinType::curried(tx(), &[tx(), tx()]),
            NegX | MinNormSelection => FinType::arrow(tx(), tx()),
            ScaleX | JChi => FinType::curried(tx(), &[t1(), tx()]),
            NormX => FinType::arrow(t1(), tx()),
            InnerX => FinType::curried(t1(), &[tx(), tx()]),
            ChiA => FinType::curried(t0(), &[tx(), tx()]),
            GammaTilde | RhoTilde => t1(),
            Varpi => t1(),
            NatR => FinType::arrow(t1(), t0()),
            AddR | MulR => FinType::curried(t1(), &[t1(), t1()]),
            AbsR | NegR => FinType::arrow(t1(), t1()),
            RecipR => FinType::curried(t1(), &[t0(), t1()]),
        }
    }

    /// Surface name used by the textual syntax.
    pub fn name(&self) -> &'static str {
        use Constant::*;
        match self {
            Zero => "0",
            Succ => "S",
            Pi { .. } => "Pi",
            Sigma { .. } => "Sigma",
            Rec(_) => "R",
            ZeroX => "zeroX",
            OneX => "oneX",
            AddX => "addX",
            NegX => "negX",
            ScaleX => "scaleX",
            NormX => "normX",
            InnerX => "innerX",
            ChiA => "chiA",
            JChi => "J",
            GammaTilde => "gammaT",
            MGamma => "mGamma",
            CX => "cX",
            RhoTilde => "rhoT",
            NGamma => "nGamma",
            MinNormSelection => "Acirc",
            Varpi => "varpi",
            NatR => "natR",
            AddR => "addR",
            MulR => "mulR",
            AbsR => "absR",
            NegR => "negR",
            RecipR => "recipR",
        }
    }

    /// Constants without type parameters, by surface name.
    pub fn simple_from_name(name: &str) -> Option<Constant> {
        use Constant::*;
        Some(match name {
            "0" => Zero,
            "S" => Succ,
            "zeroX" => ZeroX,
            "oneX" => OneX,
            "addX" => AddX,
            "negX" => NegX,
            "scaleX" => ScaleX,
            "normX" => NormX,
            "innerX" => InnerX,
            "chiA" => ChiA,
            "J" => JChi,
            "gammaT" => GammaTilde,
            "mGamma" => MGamma,
            "cX" => CX,
            "rhoT" => RhoTilde,
            "nGamma" => NGamma,
            "Acirc" => MinNormSelection,
            "varpi" => Varpi,
            "natR" => NatR,
            "addR" => AddR,
            "mulR" => MulR,
            "absR" => AbsR,
            "negR" => NegR,
            "recipR" => RecipR,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Const(Constant),
    App(Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("ill-typed application at {path}: function of type {fun} applied to argument of type {arg}")]
    IllTypedApplication {
        path: String,
        fun: FinType,
        arg: FinType,
    },
    #[error("variable `{name}` used at type {used} but declared at type {declared}")]
    VariableTypeMismatch {
        name: String,
        used: FinType,
        declared: FinType,
    },
    #[error("reduction ran out of fuel after {steps} steps")]
    FuelExhausted { steps: u64, partial: Box<Term> },
}

pub type Context = BTreeMap<String, FinType>;

impl Term {
    pub fn var(name: impl Into<String>, ty: FinType) -> Term {
        Term::Var(Var::new(name, ty))
    }

    pub fn konst(c: Constant) -> Term {
        Term::Const(c)
    }

    pub fn zero() -> Term {
        Term::Const(Constant::Zero)
    }

    pub fn succ(t: Term) -> Term {
        Term::app(Term::Const(Constant::Succ), t)
    }

    pub fn numeral(n: u64) -> Term {
        (0..n).fold(Term::zero(), |acc, _| Term::succ(acc))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apply_all(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(a.as_ref());
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    /// Type of the term; variables carry their own types so no context is
    /// needed.
    pub fn type_of(&self) -> Result<FinType, TermError> {
        self.type_at("root")
    }

    fn type_at(&self, path: &str) -> Result<FinType, TermError> {
        match self {
            Term::Var(v) => Ok(v.ty.clone()),
            Term::Const(c) => Ok(c.ty()),
            Term::App(f, a) => {
                let ft = f.type_at(&format!("{path}.fun"))?;
                let at = a.type_at(&format!("{path}.arg"))?;
                match ft {
                    FinType::Arrow(res, expected) if *expected == at => Ok(*res),
                    other => Err(TermError::IllTypedApplication {
                        path: path.to_string(),
                        fun: other,
                        arg: at,
                    }),
                }
            }
        }
    }

    /// Type checks against a variable context; variables absent from the
    /// context are accepted at their annotated type.
    pub fn typecheck(&self, ctx: &Context) -> Result<FinType, TermError> {
        for v in self.free_vars() {
            if let Some(declared) = ctx.get(&v.name) {
                if *declared != v.ty {
                    return Err(TermError::VariableTypeMismatch {
                        name: v.name.clone(),
                        used: v.ty.clone(),
                        declared: declared.clone(),
                    });
                }
            }
        }
        self.type_of()
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(f, a) => {
                f.collect_vars(out);
                a.collect_vars(out);
            }
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Term::Var(v) => v.name == name,
            Term::Const(_) => false,
            Term::App(f, a) => f.mentions(name) || a.mentions(name),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::App(f, a) => f.is_closed() && a.is_closed(),
        }
    }

    pub fn substitute(&self, name: &str, replacement: &Term) -> Term {
        match self {
            Term::Var(v) if v.name == name => replacement.clone(),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::App(f, a) => Term::app(
                f.substitute(name, replacement),
                a.substitute(name, replacement),
            ),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::App(f, a) => 1 + f.size() + a.size(),
        }
    }

    /// `n` if the term is the numeral `S(…S(0))`.
    pub fn as_numeral(&self) -> Option<u64> {
        let mut n = 0;
        let mut cur = self;
        loop {
            match cur {
                Term::Const(Constant::Zero) => return Some(n),
                Term::App(f, a) if **f == Term::Const(Constant::Succ) => {
                    n += 1;
                    cur = a;
                }
                _ => return None,
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v.name),
            Term::Const(c) => match c {
                Constant::Pi { first, second } => write!(f, "Pi[{first},{second}]"),
                Constant::Sigma {
                    result,
                    middle,
                    arg,
                } => write!(f, "Sigma[{result},{middle},{arg}]"),
                Constant::Rec(rho) => write!(f, "R[{rho}]"),
                other => write!(f, "{}", other.name()),
            },
            Term::App(..) if self.as_numeral().is_some() => {
                write!(f, "{}", self.as_numeral().unwrap_or_default())
            }
            Term::App(..) => {
                let (head, args) = self.spine();
                write!(f, "({head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Identity combinator `Σ Π Π` at type `ρ(ρ)`.
pub fn identity(rho: &FinType) -> Term {
    let rr = FinType::arrow(rho.clone(), rho.clone());
    Term::apply_all(
        Term::Const(Constant::Sigma {
            result: rho.clone(),
            middle: rr.clone(),
            arg: rho.clone(),
        }),
        [
            Term::Const(Constant::Pi {
                first: rho.clone(),
                second: rr,
            }),
            Term::Const(Constant::Pi {
                first: rho.clone(),
                second: rho.clone(),
            }),
        ],
    )
}

/// Bracket abstraction `λx.t` with the clauses
/// `λx.x = ΣΠΠ`, `λx.t = Π t` (x not free), `λx.(u v) = Σ (λx.u) (λx.v)`.
pub fn bracket_abstract(x: &Var, t: &Term) -> Result<Term, TermError> {
    let body_ty = t.type_of()?;
    Ok(abstract_typed(x, t, &body_ty))
}

fn abstract_typed(x: &Var, t: &Term, body_ty: &FinType) -> Term {
    match t {
        Term::Var(v) if v.name == x.name => identity(&x.ty),
        _ if !t.mentions(&x.name) => Term::app(
            Term::Const(Constant::Pi {
                first: body_ty.clone(),
                second: x.ty.clone(),
            }),
            t.clone(),
        ),
        Term::App(u, v) => {
            // u : body(σ), v : σ
            let sigma = v.type_of().expect("well-typed subterm");
            let u_ty = FinType::arrow(body_ty.clone(), sigma.clone());
            let lu = abstract_typed(x, u, &u_ty);
            let lv = abstract_typed(x, v, &sigma);
            Term::apply_all(
                Term::Const(Constant::Sigma {
                    result: body_ty.clone(),
                    middle: sigma,
                    arg: x.ty.clone(),
                }),
                [lu, lv],
            )
        }
        Term::Var(_) | Term::Const(_) => unreachable!("handled by the free-variable clause"),
    }
}

/// Abstraction with an η shortcut `λx.(u x) = u` when `x` is not free in `u`.
pub fn abstract_eta(x: &Var, t: &Term) -> Result<Term, TermError> {
    if let Term::App(u, a) = t {
        if matches!(a.as_ref(), Term::Var(v) if v.name == x.name) && !u.mentions(&x.name) {
            return Ok((**u).clone());
        }
    }
    bracket_abstract(x, t)
}

/// Outcome of [`reduce`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub term: Term,
    pub steps: u64,
    /// `false` when fuel ran out before a normal form was reached.
    pub normal: bool,
}

/// Leftmost-outermost reduction. The recursor's numeric argument is brought
/// to head normal form before the recursor redex is contracted.
pub fn reduce(t: &Term, fuel: u64) -> Reduction {
    let mut r = Reducer {
        fuel,
        steps: 0,
        exhausted: false,
    };
    let term = r.normalize(t.clone());
    Reduction {
        term,
        steps: r.steps,
        normal: !r.exhausted,
    }
}

/// Normal form with the default fuel, or `FuelExhausted`.
pub fn normalize(t: &Term) -> Result<Term, TermError> {
    let r = reduce(t, DEFAULT_FUEL);
    if r.normal {
        Ok(r.term)
    } else {
        Err(TermError::FuelExhausted {
            steps: r.steps,
            partial: Box::new(r.term),
        })
    }
}

struct Reducer {
    fuel: u64,
    steps: u64,
    exhausted: bool,
}

fn unspine(head: Term, args: Vec<Term>) -> Term {
    Term::apply_all(head, args)
}

fn into_spine(t: Term) -> (Term, Vec<Term>) {
    let mut args = Vec::new();
    let mut cur = t;
    while let Term::App(f, a) = cur {
        args.push(*a);
        cur = *f;
    }
    args.reverse();
    (cur, args)
}

impl Reducer {
    fn tick(&mut self) -> bool {
        if self.steps >= self.fuel {
            self.exhausted = true;
            return false;
        }
        self.steps += 1;
        true
    }

    fn normalize(&mut self, t: Term) -> Term {
        let t = self.whnf(t);
        let (head, args) = into_spine(t);
        let args = args.into_iter().map(|a| self.normalize(a)).collect();
        unspine(head, args)
    }

    fn whnf(&mut self, t: Term) -> Term {
        let (mut head, mut args) = into_spine(t);
        loop {
            if self.exhausted {
                return unspine(head, args);
            }
            match &head {
                Term::Const(Constant::Pi { .. }) if args.len() >= 2 => {
                    if !self.tick() {
                        continue;
                    }
                    let mut rest = args.split_off(2);
                    let x = args.swap_remove(0);
                    let (h, mut a) = into_spine(x);
                    a.append(&mut rest);
                    head = h;
                    args = a;
                }
                Term::Const(Constant::Sigma { .. }) if args.len() >= 3 => {
                    if !self.tick() {
                        continue;
                    }
                    let rest = args.split_off(3);
                    let mut it = args.into_iter();
                    let (x, y, z) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
                    let (h, mut a) = into_spine(x);
                    a.push(z.clone());
                    a.push(Term::app(y, z));
                    a.extend(rest);
                    head = h;
                    args = a;
                }
                Term::Const(Constant::Rec(_)) if args.len() >= 3 => {
                    let n = std::mem::replace(&mut args[2], Term::zero());
                    let n = self.whnf(n);
                    let contracted = match &n {
                        Term::Const(Constant::Zero) => Some(None),
                        Term::App(f, m) if **f == Term::Const(Constant::Succ) => {
                            Some(Some((**m).clone()))
                        }
                        _ => None,
                    };
                    match contracted {
                        Some(pred) if !self.exhausted => {
                            if !self.tick() {
                                args[2] = n;
                                continue;
                            }
                            let rest = args.split_off(3);
                            let mut it = args.into_iter();
                            let (y, z) = (it.next().unwrap(), it.next().unwrap());
                            match pred {
                                None => {
                                    let (h, mut a) = into_spine(y);
                                    a.extend(rest);
                                    head = h;
                                    args = a;
                                }
                                Some(m) => {
                                    let inner = Term::apply_all(
                                        head.clone(),
                                        [y, z.clone(), m.clone()],
                                    );
                                    let (h, mut a) = into_spine(z);
                                    a.push(inner);
                                    a.push(m);
                                    a.extend(rest);
                                    head = h;
                                    args = a;
                                }
                            }
                        }
                        _ => {
                            args[2] = n;
                            return unspine(head, args);
                        }
                    }
                }
                _ => return unspine(head, args),
            }
        }
    }
}
