//! Classical brute-force semantics of formulas on finite models, used as an
//! oracle for the negative translation and the Dialectica interpretation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::formula::{dialectica, negative_translation, DialecticaForm, Formula, NameGen};
use crate::model::{Env, EvalError, FiniteModel, Value};
use crate::term::{Constant, Term, Var};
use crate::types::FinType;

const REAL_EQ_TOL: f64 = 1e-12;

/// Classical truth value of `f` under `env`. Quantifiers over X range over the
/// model's sample points, so results involving X are only good for
/// falsification.
pub fn eval_formula(f: &Formula, m: &FiniteModel, env: &mut Env) -> Result<bool, EvalError> {
    match f {
        Formula::Eq0(a, b) | Formula::Le0(a, b) => {
            let x = nat(m, a, env)?;
            let y = nat(m, b, env)?;
            Ok(if matches!(f, Formula::Eq0(..)) { x == y } else { x <= y })
        }
        Formula::EqR(a, b) | Formula::LeR(a, b) | Formula::LtR(a, b) => {
            let x = real(m, a, env)?;
            let y = real(m, b, env)?;
            Ok(match f {
                Formula::EqR(..) => (x - y).abs() <= REAL_EQ_TOL * (1.0 + x.abs().max(y.abs())),
                Formula::LeR(..) => x <= y + REAL_EQ_TOL * (1.0 + x.abs().max(y.abs())),
                _ => x < y,
            })
        }
        Formula::EqTy(..) | Formula::EqX(..) | Formula::Preceq(..) | Formula::Mem { .. } => {
            let mut gen = NameGen::avoiding(f);
            for name in env.names() {
                gen.reserve(name);
            }
            eval_formula(&f.expand_defined(&mut gen), m, env)
        }
        Formula::And(a, b) => Ok(eval_formula(a, m, env)? && eval_formula(b, m, env)?),
        Formula::Or(a, b) => Ok(eval_formula(a, m, env)? || eval_formula(b, m, env)?),
        Formula::Implies(a, b) => Ok(!eval_formula(a, m, env)? || eval_formula(b, m, env)?),
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let universal = matches!(f, Formula::Forall(..));
            for value in m.elements(&v.ty)? {
                env.push(v.name.clone(), value);
                let r = eval_formula(body, m, env);
                env.pop();
                if r? != universal {
                    return Ok(!universal);
                }
            }
            Ok(universal)
        }
    }
}

fn nat(m: &FiniteModel, t: &Term, env: &Env) -> Result<u64, EvalError> {
    m.evaluate(t, env)?
        .as_nat()
        .ok_or(EvalError::ValueMismatch(FinType::Zero))
}

fn real(m: &FiniteModel, t: &Term, env: &Env) -> Result<f64, EvalError> {
    m.evaluate(t, env)?
        .as_real()
        .ok_or(EvalError::UnsupportedRelation("real relation"))
}

/// Truth of `∃x̲ ∀y̲ A_D` by enumerating all witnesses.
pub fn eval_dialectica(d: &DialecticaForm, m: &FiniteModel, env: &mut Env) -> Result<(bool, u64), EvalError> {
    let ex = d
        .ex_vars
        .iter()
        .map(|v| m.elements(&v.ty))
        .collect::<Result<Vec<_>, _>>()?;
    let univ = d
        .univ_vars
        .iter()
        .map(|v| m.elements(&v.ty))
        .collect::<Result<Vec<_>, _>>()?;
    let mut tried = 0u64;
    let found = search(&d.ex_vars, &ex, 0, env, &mut |env| {
        tried += 1;
        let mut all = true;
        search(&d.univ_vars, &univ, 0, env, &mut |env| {
            let ok = eval_formula(&d.matrix, m, env)?;
            all &= ok;
            Ok(!ok)
        })?;
        Ok(all)
    })?;
    Ok((found, tried))
}

/// Calls `visit` on every assignment of `vars` until it returns `true`.
fn search(
    vars: &[Var],
    domains: &[Vec<Value>],
    i: usize,
    env: &mut Env,
    visit: &mut dyn FnMut(&mut Env) -> Result<bool, EvalError>,
) -> Result<bool, EvalError> {
    if i == vars.len() {
        return visit(env);
    }
    for value in &domains[i] {
        env.push(vars[i].name.clone(), value.clone());
        let r = search(vars, domains, i + 1, env, visit);
        env.pop();
        if r? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Serialize)]
pub struct SoundnessReport {
    pub formula: String,
    pub truth: bool,
    pub negative_translation_truth: bool,
    pub dialectica_truth: bool,
    pub witnesses_tried: u64,
    pub agree: bool,
}

/// Compares the truth of `f`, of its negative translation and of its
/// Dialectica form on a finite model.
pub fn check_interpretation_soundness(
    f: &Formula,
    m: &FiniteModel,
) -> Result<SoundnessReport, EvalError> {
    if m.n == 0 {
        return Err(EvalError::DegenerateModel);
    }
    let mut env = Env::new();
    let truth = eval_formula(f, m, &mut env)?;
    let nt = eval_formula(&negative_translation(f), m, &mut env)?;
    let d = dialectica(f);
    let (dt, tried) = eval_dialectica(&d, m, &mut env)?;
    Ok(SoundnessReport {
        formula: f.to_string(),
        truth,
        negative_translation_truth: nt,
        dialectica_truth: dt,
        witnesses_tried: tried,
        agree: truth == nt && truth == dt,
    })
}

/// Upper bound on matrix evaluations needed to brute-force the Dialectica form.
pub fn dialectica_cost(d: &DialecticaForm, m: &FiniteModel) -> Option<u64> {
    d.ex_vars
        .iter()
        .chain(d.univ_vars.iter())
        .try_fold(1u64, |acc, v| acc.checked_mul(m.cardinality(&v.ty)?))
}

/// Settings of the random formula generator.
#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub seed: u64,
    pub count: usize,
    pub max_quantifier_depth: usize,
    pub max_connective_depth: usize,
    /// Largest admissible degree of a Dialectica existential variable.
    pub max_witness_degree: usize,
    pub model_size: u64,
    pub max_cost: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 0,
            count: 40,
            max_quantifier_depth: 2,
            max_connective_depth: 3,
            max_witness_degree: 1,
            model_size: 2,
            max_cost: 2_000_000,
        }
    }
}

struct Generator {
    rng: ChaCha8Rng,
    counter: usize,
}

impl Generator {
    fn term(&mut self, scope: &[Var], depth: usize) -> Term {
        let nats: Vec<&Var> = scope.iter().filter(|v| v.ty == FinType::Zero).collect();
        let funs: Vec<&Var> = scope.iter().filter(|v| v.ty == FinType::pure(1)).collect();
        let roll = self.rng.gen_range(0..10);
        if depth > 0 && roll < 2 {
            return Term::succ(self.term(scope, depth - 1));
        }
        if depth > 0 && roll < 4 && !funs.is_empty() {
            let f = funs[self.rng.gen_range(0..funs.len())];
            return Term::app(Term::Var(f.clone()), self.term(scope, depth - 1));
        }
        if !nats.is_empty() && roll < 8 {
            return Term::Var(nats[self.rng.gen_range(0..nats.len())].clone());
        }
        Term::numeral(self.rng.gen_range(0..2))
    }

    fn atom(&mut self, scope: &[Var]) -> Formula {
        let a = self.term(scope, 1);
        let b = self.term(scope, 1);
        if self.rng.gen_bool(0.5) {
            Formula::Eq0(a, b)
        } else {
            Formula::Le0(a, b)
        }
    }

    fn formula(&mut self, scope: &mut Vec<Var>, quant: usize, conn: usize) -> Formula {
        let roll = self.rng.gen_range(0..10);
        if quant > 0 && roll < 4 {
            self.counter += 1;
            let ty = if self.rng.gen_bool(0.15) {
                FinType::pure(1)
            } else {
                FinType::Zero
            };
            let prefix = if ty == FinType::Zero { "n" } else { "f" };
            let v = Var::new(format!("{prefix}{}", self.counter), ty);
            scope.push(v.clone());
            let body = self.formula(scope, quant - 1, conn);
            scope.pop();
            return if self.rng.gen_bool(0.5) {
                Formula::forall(v, body)
            } else {
                Formula::exists(v, body)
            };
        }
        if conn > 0 && roll < 8 {
            return match self.rng.gen_range(0..4) {
                0 => Formula::and(self.formula(scope, quant, conn - 1), self.formula(scope, quant, conn - 1)),
                1 => Formula::or(self.formula(scope, quant, conn - 1), self.formula(scope, quant, conn - 1)),
                2 => Formula::implies(self.formula(scope, quant, conn - 1), self.formula(scope, quant, conn - 1)),
                _ => Formula::not(self.formula(scope, quant, conn - 1)),
            };
        }
        self.atom(scope)
    }
}

/// Random closed X-free formulas, seeded, filtered so that their Dialectica
/// witnesses have low degree and brute force stays within `max_cost`.
pub fn generate_corpus(cfg: &CorpusConfig) -> Vec<Formula> {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        counter: 0,
    };
    let m = FiniteModel::new(cfg.model_size);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < cfg.count && attempts < cfg.count * 200 {
        attempts += 1;
        let f = g.formula(&mut Vec::new(), cfg.max_quantifier_depth, cfg.max_connective_depth);
        if f.quantifier_depth() == 0 && g.rng.gen_bool(0.7) {
            continue;
        }
        let d = dialectica(&f);
        let low_degree = d
            .ex_vars
            .iter()
            .all(|v| v.ty.degree().is_ok_and(|k| k <= cfg.max_witness_degree));
        let cheap = dialectica_cost(&d, &m).is_some_and(|c| c <= cfg.max_cost);
        if low_degree && cheap {
            out.push(f);
        }
    }
    out
}

/// Checks every formula of the corpus, in parallel, keeping input order.
pub fn check_corpus(corpus: &[Formula], m: &FiniteModel) -> Vec<Result<SoundnessReport, EvalError>> {
    corpus
        .par_iter()
        .map(|f| check_interpretation_soundness(f, m))
        .collect()
}

/// Well-typed closed terms of type 0 built from numerals, `S`, `Π`, `Σ`-free
/// recursion on a successor step; used by the reduction property tests.
pub fn random_nat_term(rng: &mut impl Rng, depth: usize) -> Term {
    let nat = FinType::Zero;
    if depth == 0 {
        return Term::numeral(rng.gen_range(0..3));
    }
    match rng.gen_range(0..4) {
        0 => Term::succ(random_nat_term(rng, depth - 1)),
        1 => Term::apply_all(
            Term::Const(Constant::Pi {
                first: nat.clone(),
                second: nat.clone(),
            }),
            [random_nat_term(rng, depth - 1), random_nat_term(rng, depth - 1)],
        ),
        2 => {
            // R y (λu v. S u) n adds n to y.
            let u = Var::new("u", nat.clone());
            let v = Var::new("v", nat.clone());
            let step = crate::term::bracket_abstract(
                &u,
                &crate::term::bracket_abstract(&v, &Term::succ(Term::Var(u.clone()))).unwrap(),
            )
            .unwrap();
            Term::apply_all(
                Term::Const(Constant::Rec(nat)),
                [random_nat_term(rng, depth - 1), step, random_nat_term(rng, depth - 1)],
            )
        }
        _ => random_nat_term(rng, depth - 1),
    }
}
