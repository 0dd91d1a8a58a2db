use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pmw_core::algorithms::{proximal_point, trace_report, GammaSeq};
use pmw_core::delta::{delta_recognize, skolemize_delta};
use pmw_core::formula::Formula;
use pmw_core::majorize::{check_majorizes, monotone_hull, monotone_hull_table, Samples, Sem};
use pmw_core::model::{Env, FiniteModel, Value};
use pmw_core::oplab::{catalog, Linear, OpError, OpRef, Point, SetValuedOperator};
use pmw_core::real::{canonical_code, pair_j, rat_value, unpair_j, RatCode};
use pmw_core::semantics::eval_formula;
use pmw_core::term::{bracket_abstract, reduce, Constant, Term, Var, DEFAULT_FUEL};
use pmw_core::types::FinType;

fn nat() -> FinType {
    FinType::Zero
}

fn one() -> FinType {
    FinType::pure(1)
}

/// Type-directed random terms over `0`, `1` and `0(0)(0)` built from
/// numerals, `S`, `Π`, the recursor at type 0, scope variables and bracket
/// abstraction.
struct TermGen {
    rng: ChaCha8Rng,
    fresh: usize,
}

impl TermGen {
    fn new(seed: u64) -> TermGen {
        TermGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            fresh: 0,
        }
    }

    fn scope_var(&mut self, ty: &FinType, scope: &[Var]) -> Option<Term> {
        let hits: Vec<&Var> = scope.iter().filter(|v| &v.ty == ty).collect();
        (!hits.is_empty()).then(|| Term::Var(hits[self.rng.gen_range(0..hits.len())].clone()))
    }

    fn gen(&mut self, ty: &FinType, depth: usize, scope: &mut Vec<Var>) -> Term {
        if *ty == nat() {
            return self.gen_nat(depth, scope);
        }
        let FinType::Arrow(res, arg) = ty else {
            unreachable!("generator only produces X-free types")
        };
        let roll = self.rng.gen_range(0..10);
        if roll < 3 {
            if let Some(v) = self.scope_var(ty, scope) {
                return v;
            }
        }
        if *ty == one() && roll < 4 {
            return Term::konst(Constant::Succ);
        }
        if roll < 6 {
            let k = Term::konst(Constant::Pi {
                first: (**res).clone(),
                second: (**arg).clone(),
            });
            let body = self.gen(res, depth.saturating_sub(1), scope);
            return Term::app(k, body);
        }
        self.fresh += 1;
        let v = Var::new(format!("v{}", self.fresh), (**arg).clone());
        scope.push(v.clone());
        let body = self.gen(res, depth.saturating_sub(1), scope);
        scope.pop();
        bracket_abstract(&v, &body).expect("generated bodies are well typed")
    }

    fn gen_nat(&mut self, depth: usize, scope: &mut Vec<Var>) -> Term {
        if depth == 0 {
            return match self.scope_var(&nat(), scope) {
                Some(v) if self.rng.gen_bool(0.5) => v,
                _ => Term::numeral(self.rng.gen_range(0..3)),
            };
        }
        match self.rng.gen_range(0..7) {
            0 => Term::succ(self.gen_nat(depth - 1, scope)),
            1 => {
                let f = self.gen(&one(), depth - 1, scope);
                Term::app(f, self.gen_nat(depth - 1, scope))
            }
            2 => {
                let step_ty = FinType::curried(nat(), &[nat(), nat()]);
                let y = self.gen_nat(depth - 1, scope);
                let z = self.gen(&step_ty, depth - 1, scope);
                let n = self.gen_nat(depth - 1, scope);
                Term::apply_all(Term::konst(Constant::Rec(nat())), [y, z, n])
            }
            3 => {
                let second = if self.rng.gen_bool(0.5) { nat() } else { one() };
                let a = self.gen_nat(depth - 1, scope);
                let b = self.gen(&second, depth - 1, scope);
                Term::apply_all(Term::konst(Constant::Pi { first: nat(), second }), [a, b])
            }
            _ => self.gen_nat(depth - 1, scope),
        }
    }
}

fn random_type(rng: &mut ChaCha8Rng) -> FinType {
    match rng.gen_range(0..3) {
        0 => nat(),
        1 => one(),
        _ => FinType::curried(nat(), &[nat(), nat()]),
    }
}

/// Large enough that generated values never reach the truncation cap.
fn model() -> FiniteModel {
    FiniteModel::new(1 << 40)
}

fn observe(m: &FiniteModel, t: &Term) -> Vec<u64> {
    let v = m.evaluate(t, &Env::new()).expect("closed well-typed term");
    match v {
        Value::Nat(n) => vec![n],
        f => (0..6)
            .map(|k| {
                let r = m.apply(&f, Value::Nat(k)).unwrap();
                match r {
                    Value::Nat(n) => n,
                    g => m.apply(&g, Value::Nat(k + 1)).unwrap().as_nat().unwrap(),
                }
            })
            .collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn subject_reduction(seed in any::<u64>()) {
        let mut g = TermGen::new(seed);
        let ty = random_type(&mut g.rng);
        let mut scope = vec![Var::new("x", nat()), Var::new("f", one())];
        let t = g.gen(&ty, 4, &mut scope);
        prop_assert_eq!(t.type_of().unwrap(), ty.clone());
        let r = reduce(&t, DEFAULT_FUEL);
        prop_assert!(r.normal);
        prop_assert_eq!(r.term.type_of().unwrap(), ty);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn beta_simulation(seed in any::<u64>(), x_is_fun in any::<bool>()) {
        let mut g = TermGen::new(seed);
        let xty = if x_is_fun { one() } else { nat() };
        let x = Var::new("x", xty.clone());
        let ty = random_type(&mut g.rng);
        let t = g.gen(&ty, 3, &mut vec![x.clone()]);
        let s = g.gen(&xty, 3, &mut Vec::new());
        prop_assert!(s.is_closed());
        let lhs = reduce(&Term::app(bracket_abstract(&x, &t).unwrap(), s.clone()), DEFAULT_FUEL);
        let rhs = reduce(&t.substitute("x", &s), DEFAULT_FUEL);
        prop_assert!(lhs.normal && rhs.normal);
        prop_assert_eq!(lhs.term, rhs.term);
    }

    #[test]
    fn evaluation_is_invariant_under_reduction(seed in any::<u64>()) {
        let mut g = TermGen::new(seed);
        let ty = random_type(&mut g.rng);
        let t = g.gen(&ty, 3, &mut Vec::new());
        let r = reduce(&t, DEFAULT_FUEL);
        prop_assert!(r.normal);
        let m = model();
        prop_assert_eq!(observe(&m, &t), observe(&m, &r.term));
        if ty == nat() {
            prop_assert!(r.term.as_numeral().is_some());
        }
    }
}

fn ratio(p: u64, q: u64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

proptest! {
    #[test]
    fn pairing_round_trips(n in any::<u64>(), m in any::<u64>()) {
        let (n, m) = (BigUint::from(n), BigUint::from(m));
        let u = pair_j(&n, &m);
        prop_assert_eq!(unpair_j(&u), (n, m));
    }

    #[test]
    fn unpairing_round_trips(u in any::<u64>()) {
        let u = BigUint::from(u);
        let (n, m) = unpair_j(&u);
        prop_assert_eq!(pair_j(&n, &m), u);
    }

    #[test]
    fn rational_codes_decode_to_what_was_encoded(p in 0i64..10_000, q in 1i64..10_000, neg in any::<bool>()) {
        let r = BigRational::new(BigInt::from(if neg { -p } else { p }), BigInt::from(q));
        prop_assert_eq!(rat_value(&RatCode::encode(&r)), r);
    }

    #[test]
    fn canonical_codes_are_accurate_and_monotone(
        p in 0u64..5_000, q in 1u64..200, dp in 0u64..500, n in 0u32..=16
    ) {
        let r = ratio(p, q);
        let s = ratio(p * 7 + dp, q * 7);
        prop_assume!(r <= s);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2u64 << n));
        let cr = canonical_code(&r, n).unwrap();
        let cs = canonical_code(&s, n).unwrap();
        let err = rat_value(&cr) - &r;
        prop_assert!(err.abs() <= half);
        prop_assert!(rat_value(&cr) <= rat_value(&cs));
        prop_assert!(cr.0 <= cs.0);
        prop_assert!(cr.0 <= canonical_code(&r, n + 1).unwrap().0);
    }

    #[test]
    fn monotone_hull_is_nondecreasing_and_dominates(xs in prop::collection::vec(0u64..1000, 0..=64)) {
        let h = monotone_hull_table(&xs);
        prop_assert_eq!(h.len(), xs.len());
        prop_assert!(h.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(h.iter().zip(&xs).all(|(a, b)| a >= b));
        // Least such sequence: every entry is attained at or before its index.
        prop_assert!(h.iter().enumerate().all(|(i, v)| xs[..=i].contains(v)));
    }

    #[test]
    fn monotone_hull_majorizes_type_one_functions(a in 0u64..50, b in 0u64..50, c in 1u64..7) {
        let f = move |x: u64| (a * x + b) % (c * 13) + (x % c);
        let hull = monotone_hull(f, 64);
        let samples = Samples::standard(1, 80, a * 100 + b, &[]);
        let r = check_majorizes(&Sem::nat_fn(hull), &Sem::nat_fn(f), &one(), &samples).unwrap();
        prop_assert!(r.holds_on_samples, "{:?}", r.counterexample);
    }

    #[test]
    fn majorization_is_upward_closed_at_type_one(a in 0u64..20, b in 0u64..20, extra in 0u64..5) {
        let f = move |x: u64| a * x + b;
        let star = move |x: u64| a * x + b + extra;
        let samples = Samples::standard(1, 60, a + b, &[]);
        let ok = check_majorizes(&Sem::nat_fn(star), &Sem::nat_fn(f), &one(), &samples).unwrap();
        prop_assert!(ok.holds_on_samples);
        if b > 0 {
            let below = move |x: u64| a * x + b - 1;
            let bad = check_majorizes(&Sem::nat_fn(below), &Sem::nat_fn(f), &one(), &samples).unwrap();
            prop_assert!(!bad.holds_on_samples);
        }
    }
}

#[test]
fn monotone_hull_exhaustive_on_small_tables() {
    // Every table of length ≤ 7 over {0, 1, 2}.
    for len in 0..=7u32 {
        for code in 0..3u64.pow(len) {
            let xs: Vec<u64> = (0..len).map(|i| code / 3u64.pow(i) % 3).collect();
            let h = monotone_hull_table(&xs);
            assert!(h.windows(2).all(|w| w[0] <= w[1]), "{xs:?}");
            assert!(h.iter().zip(&xs).all(|(a, b)| a >= b), "{xs:?}");
        }
    }
}

fn random_delta(rng: &mut ChaCha8Rng) -> Formula {
    let a = Var::new("a", nat());
    let b = Var::new("b", nat());
    let c = Var::new("c", nat());
    let vars = [&a, &b, &c];
    let term = |rng: &mut ChaCha8Rng| {
        let base = match rng.gen_range(0..4) {
            0 => Term::numeral(rng.gen_range(0..2)),
            i => Term::Var(vars[i - 1].clone()),
        };
        if rng.gen_bool(0.3) {
            Term::succ(base)
        } else {
            base
        }
    };
    let atom = |rng: &mut ChaCha8Rng| {
        let (s, t) = (term(rng), term(rng));
        if rng.gen_bool(0.5) {
            Formula::Eq0(s, t)
        } else {
            Formula::Le0(s, t)
        }
    };
    let mut matrix = atom(rng);
    for _ in 0..rng.gen_range(0..3) {
        let other = atom(rng);
        matrix = match rng.gen_range(0..3) {
            0 => Formula::and(matrix, other),
            1 => Formula::or(matrix, other),
            _ => Formula::implies(matrix, other),
        };
    }
    let bound = if rng.gen_bool(0.5) {
        Term::Var(a.clone())
    } else {
        Term::succ(Term::Var(a.clone()))
    };
    Formula::forall(
        a,
        Formula::bounded_exists(b, bound, Formula::forall(c, matrix)),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn skolemized_delta_forms_are_equivalent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_delta(&mut rng);
        let d = delta_recognize(&f).expect("generated in the required shape");
        let s = skolemize_delta(&d);
        for n in [1, 2] {
            let m = FiniteModel::new(n);
            let lhs = eval_formula(&f, &m, &mut Env::new()).unwrap();
            let rhs = eval_formula(&s, &m, &mut Env::new()).unwrap();
            prop_assert_eq!(lhs, rhs, "N={} {}", n, f);
        }
    }
}

fn monotone_with_zeros() -> Vec<(OpRef, Point)> {
    catalog()
        .into_iter()
        .filter(|e| e.op.class().rho() >= 0.0)
        .filter_map(|e| {
            let z = e.op.known_zero()?;
            Some((e.op, z))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn proximal_point_is_fejer_monotone(seed in any::<u64>(), gamma in 0.05f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (op, z) in monotone_with_zeros() {
            if matches!(op.resolvent(gamma, &z), Err(OpError::NotAvailable(_))) {
                continue;
            }
            let x0 = op.sample_domain(&mut rng, 20.0);
            let t = proximal_point(op.as_ref(), &x0, &GammaSeq::Const { c: gamma }, 50, Some(&z)).unwrap();
            prop_assert!(t.stopped.is_none(), "{}: {:?}", op.name(), t.stopped);
            let s = trace_report(&t);
            prop_assert_eq!(s.fejer_monotone, Some(true), "{}", op.name());
            // Firm nonexpansiveness bounds the squared residuals by ‖x0 − z‖².
            let d0 = t.steps[0].dist_to_zero.unwrap();
            prop_assert!(s.squared_residual_sum <= d0 * d0 * (1.0 + 1e-9) + 1e-12);
            for st in &t.steps {
                prop_assert!(st.residual.unwrap_or(0.0) >= 0.0);
            }
        }
    }

    #[test]
    fn every_step_satisfies_the_defining_membership(seed in any::<u64>(), gamma in 0.1f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ops: Vec<Arc<dyn SetValuedOperator>> = vec![
            Arc::new(Linear::psd_plus_skew(4, seed)),
            Arc::new(Linear::identity(3)),
        ];
        for op in ops {
            let x0 = op.sample_domain(&mut rng, 10.0);
            let t = proximal_point(op.as_ref(), &x0, &GammaSeq::Const { c: gamma }, 20, None).unwrap();
            for w in t.steps.windows(2) {
                let (x, p) = (&w[0].x, &w[1].x);
                let u: Vec<f64> = x.iter().zip(p).map(|(a, b)| (a - b) / gamma).collect();
                prop_assert!(op.membership(p, &u, 1e-8));
            }
        }
    }
}
