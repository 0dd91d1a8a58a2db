//! The majorizability relation `≿` on sampled semantic values, monotone
//! hulls, and explicit majorants for the operator constants.
//!
//! Majorization at arrow types quantifies over all arguments, so the checker
//! only falsifies: it evaluates both clauses
//! `y* ≿ y → x*y* ≿ xy` and `y* ≿ z* → x*y* ≿ x*z*`
//! on finite sets of argument pairs.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::oplab::{
    norm, sample_rng, OpError, OperatorClass, Point, SetValuedOperator,
};
use crate::real::{canonical_rep, from_f64, RealCode};
use crate::types::FinType;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MajorizeError {
    #[error("type {0} has degree {1} after hat; at most 2 is supported")]
    UnsupportedType(FinType, usize),
    #[error("no argument samples for type {0}")]
    NoSamples(FinType),
    #[error("value does not fit type {0}")]
    ShapeMismatch(FinType),
    #[error("no resolvent witnesses for `{0}`: {1}")]
    NoWitnesses(String, OpError),
}

pub type SemFn = dyn Fn(&Sem) -> Sem + Send + Sync;

/// A semantic value: naturals, points of `X`, real codes (type `1`) and
/// functions.
#[derive(Clone)]
pub enum Sem {
    Nat(BigUint),
    Point(Point),
    Code(RealCode),
    Fun(Arc<SemFn>),
}

impl fmt::Debug for Sem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sem::Nat(n) => write!(f, "{n}"),
            Sem::Point(p) => write!(f, "{p:?}"),
            Sem::Code(c) => write!(f, "code({})", c.approx(0)),
            Sem::Fun(_) => write!(f, "<fun>"),
        }
    }
}

impl Sem {
    pub fn nat(n: u64) -> Sem {
        Sem::Nat(BigUint::from(n))
    }

    pub fn fun(f: impl Fn(&Sem) -> Sem + Send + Sync + 'static) -> Sem {
        Sem::Fun(Arc::new(f))
    }

    /// A numeric function `ℕ → ℕ`.
    pub fn nat_fn(f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Sem {
        Sem::fun(move |a| Sem::nat(f(a.as_u64())))
    }

    pub fn as_nat(&self) -> &BigUint {
        match self {
            Sem::Nat(n) => n,
            other => panic!("expected a natural, got {other:?}"),
        }
    }

    /// The natural as `u64`, saturating.
    pub fn as_u64(&self) -> u64 {
        self.as_nat().to_u64().unwrap_or(u64::MAX)
    }

    pub fn apply(&self, arg: &Sem) -> Sem {
        match self {
            Sem::Fun(f) => f(arg),
            Sem::Code(c) => {
                let n = u32::try_from(arg.as_u64()).unwrap_or(u32::MAX);
                Sem::Nat(c.code(n).0)
            }
            other => panic!("cannot apply {other:?}"),
        }
    }

    pub fn apply_all(&self, args: &[Sem]) -> Sem {
        args.iter().fold(self.clone(), |f, a| f.apply(a))
    }
}

/// A majorant together with a readable description of its rule.
#[derive(Clone, Debug)]
pub struct Majorant {
    pub rule: String,
    pub value: Sem,
}

/// Argument pairs used by [`check_majorizes`]: for each type, pairs
/// `(y*, y)` with `y* ≿ y`. The monotonicity clause draws its pairs from the
/// hat of the argument type.
#[derive(Clone, Default)]
pub struct Samples {
    pairs: BTreeMap<FinType, Vec<(Sem, Sem)>>,
}

impl Samples {
    pub fn new() -> Samples {
        Samples::default()
    }

    pub fn insert(&mut self, ty: FinType, pairs: Vec<(Sem, Sem)>) {
        self.pairs.entry(ty).or_default().extend(pairs);
    }

    pub fn get(&self, ty: &FinType) -> Option<&[(Sem, Sem)]> {
        self.pairs.get(ty).map(Vec::as_slice)
    }

    /// Default generators for `0`, `X` (in `ℝ^dim`) and the given
    /// degree-one arrow types, `count` pairs each.
    pub fn standard(dim: usize, count: usize, seed: u64, arrows: &[FinType]) -> Samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = Samples::new();
        s.insert(FinType::Zero, nat_pairs(&mut rng, count));
        s.insert(FinType::X, point_pairs(&mut rng, count, dim, 10.0));
        for t in arrows {
            let pairs = (0..count).map(|_| arrow_pair(&mut rng, t)).collect();
            s.insert(t.clone(), pairs);
            let h = t.hat();
            if h != *t && s.get(&h).is_none() {
                let pairs = (0..count).map(|_| arrow_pair(&mut rng, &h)).collect();
                s.insert(h, pairs);
            }
        }
        s
    }
}

fn nat_pairs(rng: &mut ChaCha8Rng, count: usize) -> Vec<(Sem, Sem)> {
    (0..count)
        .map(|_| {
            let y = rng.gen_range(0..40u64);
            let d = [0, 0, 1, 3][rng.gen_range(0..4)];
            (Sem::nat(y + d), Sem::nat(y))
        })
        .collect()
}

fn ceil_nat(v: f64) -> u64 {
    if v <= 0.0 {
        0
    } else {
        v.ceil() as u64
    }
}

fn point_pairs(rng: &mut ChaCha8Rng, count: usize, dim: usize, radius: f64) -> Vec<(Sem, Sem)> {
    (0..count)
        .map(|i| {
            let scale = if i % 5 == 0 { 0.1 } else { radius };
            let y: Point = (0..dim).map(|_| rng.gen_range(-scale..=scale)).collect();
            let d = [0, 0, 1, 2][rng.gen_range(0..4)];
            (Sem::nat(ceil_nat(norm(&y)) + d), Sem::Point(y))
        })
        .collect()
}

fn size_of(s: &Sem) -> f64 {
    match s {
        Sem::Nat(n) => n.to_f64().unwrap_or(f64::INFINITY),
        Sem::Point(p) => norm(p),
        _ => 0.0,
    }
}

fn mix(h: u64, v: f64) -> u64 {
    (h ^ v.to_bits()).wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(17)
}

/// A random function of a degree-one type with a matching majorant.
fn arrow_pair(rng: &mut ChaCha8Rng, t: &FinType) -> (Sem, Sem) {
    let (result, args) = t.uncurry();
    assert!(args.iter().all(|a| matches!(a, FinType::Zero | FinType::X)), "degree-one type expected");
    assert!(matches!(result, FinType::Zero | FinType::X), "degree-one type expected");
    let k = args.len();
    let c = rng.gen_range(0..4u64);
    let d = rng.gen_range(0..6u64);
    let wild = rng.gen_bool(0.4);
    let dir: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let slack = rng.gen_range(0..2u64);
    // The value only depends on the list of arguments seen so far.
    let value = move |seen: &[Sem]| -> f64 {
        if wild {
            let h = seen.iter().fold(0u64, |h, s| mix(h, size_of(s)));
            (h % (d + 1)) as f64
        } else {
            let total: f64 = seen.iter().map(size_of).sum();
            (c as f64 * total + d as f64).floor()
        }
    };
    let res = result.clone();
    let actual = curry_n(k, Vec::new(), Arc::new(move |seen: &[Sem]| {
        let v = value(seen);
        match res {
            FinType::X => Sem::Point(vec![dir * v]),
            _ => Sem::nat(v as u64),
        }
    }));
    let star = curry_n(k, Vec::new(), Arc::new(move |seen: &[Sem]| {
        let total: u64 = seen.iter().map(|s| s.as_u64()).fold(0, u64::saturating_add);
        let v = if wild { d } else { c.saturating_mul(total).saturating_add(d) };
        Sem::nat(v + slack)
    }));
    (star, actual)
}

type ArgsFn = dyn Fn(&[Sem]) -> Sem + Send + Sync;

fn curry_n(k: usize, seen: Vec<Sem>, body: Arc<ArgsFn>) -> Sem {
    if k == 0 {
        return body(&seen);
    }
    Sem::fun(move |a| {
        let mut next = seen.clone();
        next.push(a.clone());
        curry_n(k - 1, next, body.clone())
    })
}

/// Outcome of a sampled majorization check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajCheck {
    pub holds_on_samples: bool,
    pub comparisons: u64,
    pub counterexample: Option<String>,
}

struct Checker<'a> {
    samples: &'a Samples,
    comparisons: u64,
    counterexample: Option<String>,
}

const NORM_TOL: f64 = 1e-12;

impl Checker<'_> {
    fn fail(&mut self, path: &[String], msg: String) {
        if self.counterexample.is_none() {
            self.counterexample = Some(format!("{msg} at args [{}]", path.join(", ")));
        }
    }

    fn run(&mut self, star: &Sem, val: &Sem, ty: &FinType, path: &mut Vec<String>) -> Result<(), MajorizeError> {
        if self.counterexample.is_some() {
            return Ok(());
        }
        match ty {
            FinType::Zero => {
                self.comparisons += 1;
                let (Sem::Nat(a), Sem::Nat(b)) = (star, val) else {
                    return Err(MajorizeError::ShapeMismatch(ty.clone()));
                };
                if a < b {
                    self.fail(path, format!("{a} < {b}"));
                }
            }
            FinType::X => {
                self.comparisons += 1;
                let (Sem::Nat(a), Sem::Point(p)) = (star, val) else {
                    return Err(MajorizeError::ShapeMismatch(ty.clone()));
                };
                let a = a.to_f64().unwrap_or(f64::INFINITY);
                let n = norm(p);
                if a < n * (1.0 - NORM_TOL) - NORM_TOL {
                    self.fail(path, format!("{a} < ‖{p:?}‖ = {n}"));
                }
            }
            FinType::Arrow(res, arg) => {
                let pairs = self
                    .samples
                    .get(arg)
                    .ok_or_else(|| MajorizeError::NoSamples((**arg).clone()))?;
                for (ys, y) in pairs {
                    path.push(format!("{ys:?}≿{y:?}"));
                    self.run(&star.apply(ys), &val.apply(y), res, path)?;
                    path.pop();
                }
                let hat_arg = arg.hat();
                let hat_res = res.hat();
                let hat_pairs = self
                    .samples
                    .get(&hat_arg)
                    .ok_or_else(|| MajorizeError::NoSamples(hat_arg.clone()))?;
                for (ys, zs) in hat_pairs {
                    path.push(format!("monotone {ys:?}≿{zs:?}"));
                    self.run(&star.apply(ys), &star.apply(zs), &hat_res, path)?;
                    path.pop();
                }
            }
        }
        Ok(())
    }
}

/// Checks `a_star ≿_t a` on the sample pairs.
pub fn check_majorizes(a_star: &Sem, a: &Sem, t: &FinType, samples: &Samples) -> Result<MajCheck, MajorizeError> {
    let d = t.hat().degree().expect("hat types are X-free");
    if d > 2 {
        return Err(MajorizeError::UnsupportedType(t.clone(), d));
    }
    let mut c = Checker {
        samples,
        comparisons: 0,
        counterexample: None,
    };
    c.run(a_star, a, t, &mut Vec::new())?;
    Ok(MajCheck {
        holds_on_samples: c.counterexample.is_none(),
        comparisons: c.comparisons,
        counterexample: c.counterexample,
    })
}

/// `x^M(y) = max{x(i) | 0 ≤ i ≤ y}` as a running maximum of a table.
pub fn monotone_hull_table(xs: &[u64]) -> Vec<u64> {
    xs.iter()
        .scan(0u64, |m, &v| {
            *m = (*m).max(v);
            Some(*m)
        })
        .collect()
}

/// `x^M(y) = max{x(i) | 0 ≤ i ≤ y}`, with the prefix up to `cap` tabulated.
pub fn monotone_hull(
    x: impl Fn(u64) -> u64 + Send + Sync + 'static,
    cap: u64,
) -> impl Fn(u64) -> u64 + Send + Sync + 'static {
    let table = monotone_hull_table(&(0..=cap).map(&x).collect::<Vec<_>>());
    move |y| {
        if y <= cap {
            table[y as usize]
        } else {
            (cap + 1..=y).map(&x).fold(table[cap as usize], u64::max)
        }
    }
}

/// Numeric parameters of the resolvent majorant
/// `λα, x*. x* + 2k + (2 + 2^m(α(0)+1))·n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResolventMajorant {
    pub n: u64,
    pub m: u64,
    pub l: u64,
    pub k: u64,
}

impl ResolventMajorant {
    pub fn eval(&self, alpha0: &BigUint, xstar: &BigUint) -> BigUint {
        let pow = BigUint::from(1u8) << self.m;
        xstar + BigUint::from(2 * self.k) + (BigUint::from(2u8) + pow * (alpha0 + 1u8)) * self.n
    }

    pub fn rule(&self) -> String {
        format!(
            "λα,x*. x* + {} + (2 + 2^{}·(α(0)+1))·{}",
            2 * self.k,
            self.m,
            self.n
        )
    }

    /// The majorant of type `0(0)(1)`: `α` first, then `x*`.
    pub fn majorant(&self) -> Majorant {
        let me = *self;
        Majorant {
            rule: self.rule(),
            value: Sem::fun(move |alpha| {
                let a0 = alpha.apply(&Sem::nat(0)).as_nat().clone();
                Sem::fun(move |xs| Sem::Nat(me.eval(&a0, xs.as_nat())))
            }),
        }
    }
}

pub fn resolvent_majorant(n: u64, m: u64, l: u64, k: u64) -> Majorant {
    ResolventMajorant { n, m, l, k }.majorant()
}

/// `λx, y. 1`.
pub fn chi_majorant() -> Majorant {
    Majorant {
        rule: "λx,y. 1".into(),
        value: Sem::fun(|_| Sem::fun(|_| Sem::nat(1))),
    }
}

/// `χ_A x y = 0` if `y ∈ Ax`, else `1`, with membership up to `tol`.
pub fn chi_sem(op: Arc<dyn SetValuedOperator>, tol: f64) -> Sem {
    Sem::fun(move |x| {
        let op = op.clone();
        let x = point_of(x);
        Sem::fun(move |y| {
            let inside = op.in_domain(&x) && op.membership(&x, &point_of(y), tol);
            Sem::nat(if inside { 0 } else { 1 })
        })
    })
}

fn point_of(s: &Sem) -> Point {
    match s {
        Sem::Point(p) => p.clone(),
        other => panic!("expected a point, got {other:?}"),
    }
}

/// Approximate value of a real code.
pub fn real_of(s: &Sem) -> f64 {
    match s {
        Sem::Code(c) => c.to_f64(60),
        other => panic!("expected a real code, got {other:?}"),
    }
}

/// A code of `r`: the canonical one for `r ≥ 0`, otherwise the constant code.
pub fn code_of(r: f64) -> RealCode {
    match BigRational::from_float(r) {
        Some(q) if r >= 0.0 => canonical_rep(&q).expect("nonnegative input"),
        _ => from_f64(r),
    }
}

/// `J^{χ_A}`: `λγ, x. J_{r_γ} x` when `r_γ > 0`, `ρ > −r_γ/2` and `x` is in
/// the domain of the resolvent, otherwise `0`.
pub fn resolvent_sem(op: Arc<dyn SetValuedOperator>) -> Sem {
    Sem::fun(move |g| {
        let op = op.clone();
        let gamma = real_of(g);
        Sem::fun(move |x| {
            let x = point_of(x);
            let out = if op.class().admits(gamma) {
                op.resolvent(gamma, &x).ok()
            } else {
                None
            };
            Sem::Point(out.unwrap_or_else(|| vec![0.0; x.len()]))
        })
    })
}

/// `(α, γ)` with `γ` a code of `r` and `α = γ^M + δ`.
pub fn code_pair(r: f64, delta: u64) -> (Sem, Sem) {
    let code = code_of(r);
    let c2 = code.clone();
    let alpha = Sem::fun(move |n| {
        let top = u32::try_from(n.as_u64()).unwrap_or(u32::MAX);
        let m = (0..=top).map(|i| c2.code(i).0).max().unwrap_or_default();
        Sem::Nat(m + delta)
    });
    (alpha, Sem::Code(code))
}

/// Witnesses `(n, m, l, k)` for a given `c` and `γ̃`.
pub fn resolvent_witnesses(
    op: &dyn SetValuedOperator,
    c: &[f64],
    gamma_tilde: f64,
) -> Result<ResolventMajorant, OpError> {
    let jc = op.resolvent(gamma_tilde, c)?;
    let disp = norm(&crate::oplab::sub(c, &jc));
    let m = if gamma_tilde >= 1.0 {
        0
    } else {
        (-gamma_tilde.log2()).ceil() as u64
    };
    Ok(ResolventMajorant {
        n: ceil_nat(disp),
        m,
        l: ceil_nat(gamma_tilde),
        k: ceil_nat(norm(c)),
    })
}

/// Report of [`check_resolvent_majorant`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventMajorantReport {
    pub instance: String,
    pub anchor: Point,
    pub gamma_tilde: f64,
    pub witnesses: ResolventMajorant,
    /// Whether the witnesses dominate those derived from the anchor.
    pub witnesses_valid: bool,
    pub rule: String,
    pub gamma_samples: usize,
    pub point_samples: usize,
    pub check: MajCheck,
}

/// An anchor `c` and `γ̃` valid for the instance: `c` lies in the domain of
/// every admitted `J_γ` with `γ ≤ gamma_max`.
pub fn default_anchor(op: &dyn SetValuedOperator, gamma_max: f64) -> (Point, f64) {
    let d = op.dim();
    let gamma_tilde = match op.class() {
        OperatorClass::Monotone => 1.0,
        OperatorClass::Comonotone { rho } => (-4.0 * rho).max(1.0),
    };
    let mut c = vec![0.0; d];
    if op.resolvent(gamma_max, &c).is_err() {
        c[0] = gamma_max + 1.0;
    }
    (c, gamma_tilde)
}

/// Checks the resolvent majorant against `J^{χ_A}` with `γ` drawn from
/// `[2^{-m}, 2^l]` (plus a few nonpositive codes) and points of `ℝ^d`.
pub fn check_resolvent_majorant(
    op: Arc<dyn SetValuedOperator>,
    gamma_count: usize,
    point_count: usize,
    seed: u64,
) -> Result<ResolventMajorantReport, MajorizeError> {
    check_resolvent_majorant_with(op, None, gamma_count, point_count, seed)
}

/// [`check_resolvent_majorant`] with caller-supplied witnesses in place of
/// the derived ones.
pub fn check_resolvent_majorant_with(
    op: Arc<dyn SetValuedOperator>,
    witnesses: Option<ResolventMajorant>,
    gamma_count: usize,
    point_count: usize,
    seed: u64,
) -> Result<ResolventMajorantReport, MajorizeError> {
    let (c, gamma_tilde) = default_anchor(op.as_ref(), 4.0);
    let mut derived = resolvent_witnesses(op.as_ref(), &c, gamma_tilde)
        .map_err(|e| MajorizeError::NoWitnesses(op.name(), e))?;
    derived.l = derived.l.max(2);
    let w = witnesses.unwrap_or(derived);
    let witnesses_valid =
        w.n >= derived.n && w.m >= derived.m && w.l >= derived.l && w.k >= derived.k;
    let mut rng = sample_rng(seed, 0);
    let lo = 2f64.powi(-(w.m as i32));
    let hi = 2f64.powi(w.l as i32);
    let mut gamma_pairs: Vec<(Sem, Sem)> = (0..gamma_count)
        .map(|i| {
            let r = match i % 10 {
                0 => lo,
                1 => hi,
                2 => -rng.gen_range(0.0..2.0),
                _ => rng.gen_range(lo..=hi),
            };
            code_pair(r, [0, 0, 1][rng.gen_range(0..3)])
        })
        .collect();
    gamma_pairs.push(code_pair(0.0, 0));
    let mut samples = Samples::new();
    samples.insert(FinType::pure(1), gamma_pairs);
    samples.insert(FinType::Zero, nat_pairs(&mut rng, 8));
    let d = op.dim();
    let mut pts = point_pairs(&mut rng, point_count, d, 10.0);
    for _ in 0..point_count / 4 {
        let x = op.sample_domain(&mut rng, 10.0);
        pts.push((Sem::nat(ceil_nat(norm(&x))), Sem::Point(x)));
    }
    samples.insert(FinType::X, pts);
    let ty = FinType::curried(FinType::X, &[FinType::pure(1), FinType::X]);
    let maj = w.majorant();
    let check = check_majorizes(&maj.value, &resolvent_sem(op.clone()), &ty, &samples)?;
    Ok(ResolventMajorantReport {
        instance: op.name(),
        anchor: c,
        gamma_tilde,
        witnesses: w,
        witnesses_valid,
        rule: maj.rule,
        gamma_samples: gamma_count + 1,
        point_samples: samples.get(&FinType::X).map_or(0, |p| p.len()),
        check,
    })
}

/// Result of the bounded-on-bounded-sets probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BobsMajorant {
    Bounded {
        rule: String,
        closed_form: bool,
        /// `(n, a*(n))` on the radius grid.
        values: Vec<(u64, u64)>,
    },
    NotBounded {
        radius: u64,
        probe: f64,
    },
}

impl BobsMajorant {
    pub fn is_bounded(&self) -> bool {
        matches!(self, BobsMajorant::Bounded { .. })
    }
}

/// Probe threshold beyond which an operator is reported unbounded.
pub const BOBS_PROBE_LIMIT: f64 = 1e9;

/// `sup{‖u‖ : u ∈ Ax, ‖x‖ ≤ n}` over sampled and boundary points.
fn probe_sup(op: &dyn SetValuedOperator, n: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = sample_rng(seed, n.to_bits());
    let r = n.max(f64::MIN_POSITIVE);
    let mut pts: Vec<Point> = (0..samples).map(|_| op.sample_domain(&mut rng, r)).collect();
    pts.push(vec![0.0; op.dim()]);
    pts.extend(op.boundary_probes(n));
    pts.iter()
        .filter(|x| norm(x) <= n && op.in_domain(x))
        .map(|x| op.value(x).max_norm())
        .fold(0.0, f64::max)
}

/// A nondecreasing `a*` with `a*(n) ≥ sup{‖u‖ : u ∈ Ax, ‖x‖ ≤ n}` on the
/// grid, closed-form where the instance provides one, or `NotBounded`.
pub fn bobs_uniform_majorant(
    op: &dyn SetValuedOperator,
    radius_grid: &[u64],
    samples: usize,
    seed: u64,
) -> BobsMajorant {
    let mut values = Vec::new();
    let mut closed_form = true;
    for &n in radius_grid {
        let probe = probe_sup(op, n as f64, samples, seed);
        if !(probe <= BOBS_PROBE_LIMIT) {
            return BobsMajorant::NotBounded { radius: n, probe };
        }
        let v = match op.norm_bound(n) {
            Some(b) if b as f64 >= probe * (1.0 - 1e-12) => b,
            _ => {
                closed_form = false;
                ceil_nat(probe)
            }
        };
        values.push((n, v));
    }
    let hull = monotone_hull_table(&values.iter().map(|p| p.1).collect::<Vec<_>>());
    for (p, h) in values.iter_mut().zip(hull) {
        p.1 = h;
    }
    let rule = describe_rule(op, &values, closed_form);
    BobsMajorant::Bounded {
        rule,
        closed_form,
        values,
    }
}

fn describe_rule(op: &dyn SetValuedOperator, values: &[(u64, u64)], closed: bool) -> String {
    if let Some(&(_, first)) = values.first() {
        if values.iter().all(|(_, v)| *v == first) {
            return format!("λn.{first}");
        }
    }
    if let Some(l) = op.lipschitz() {
        if values.iter().all(|&(n, v)| v == (l * n as f64).ceil() as u64) {
            return format!("λn.⌈{l}·n⌉");
        }
    }
    if closed {
        "closed form, see values".into()
    } else {
        "empirical table, see values".into()
    }
}

/// Checks that majorants of selections of `A` also majorize `A°`: for a few
/// bounded selections `s`, the table `a*_s(n) = ⌈sup_{‖x‖ ≤ n} ‖s x‖⌉`
/// (hulled) must majorize `x ↦ A°x`.
pub fn check_min_norm_majorant(
    op: Arc<dyn SetValuedOperator>,
    radius: u64,
    samples: usize,
    seed: u64,
) -> Result<MajCheck, MajorizeError> {
    let mut rng = sample_rng(seed, 1);
    let d = op.dim();
    let xs: Vec<Point> = (0..samples)
        .map(|_| op.sample_domain(&mut rng, radius as f64))
        .filter(|x| norm(x) <= radius as f64)
        .collect();
    let pts: Vec<(Sem, Sem)> = xs
        .iter()
        .map(|x| (Sem::nat(ceil_nat(norm(x))), Sem::Point(x.clone())))
        .collect();
    let mut s = Samples::new();
    s.insert(FinType::X, pts);
    s.insert(FinType::Zero, (0..=radius).flat_map(|n| [(Sem::nat(n), Sem::nat(n)), (Sem::nat(n + 1), Sem::nat(n))]).collect());
    let opc = op.clone();
    let a0 = Sem::fun(move |x| {
        let x = point_of(x);
        Sem::Point(opc.minimal_norm(&x).unwrap_or_else(|| vec![0.0; x.len()]))
    });
    let ty = FinType::arrow(FinType::X, FinType::X);
    let mut total = 0;
    for _ in 0..4 {
        let v: Point = (0..d).map(|_| rng.gen_range(-3.0..=3.0)).collect();
        let sel = |x: &Point| op.value(x).project(&v).unwrap_or_else(|| vec![0.0; d]);
        let mut table = vec![0u64; radius as usize + 1];
        for x in &xs {
            let n = ceil_nat(norm(x)) as usize;
            let s_norm = ceil_nat(norm(&sel(x)));
            for t in table.iter_mut().skip(n) {
                *t = (*t).max(s_norm);
            }
        }
        let table = Arc::new(monotone_hull_table(&table));
        let star = Sem::nat_fn(move |n| table[(n as usize).min(table.len() - 1)]);
        let r = check_majorizes(&star, &a0, &ty, &s)?;
        total += r.comparisons;
        if !r.holds_on_samples {
            return Ok(MajCheck { comparisons: total, ..r });
        }
    }
    Ok(MajCheck {
        holds_on_samples: true,
        comparisons: total,
        counterexample: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oplab::{catalog, catalog_entry, Linear, TanSubdiff, WeightedL1};

    fn xx() -> FinType {
        FinType::arrow(FinType::X, FinType::X)
    }

    #[test]
    fn base_type_examples() {
        let s = Samples::new();
        let r = check_majorizes(&Sem::nat(5), &Sem::Point(vec![3.0, 4.0]), &FinType::X, &s).unwrap();
        assert!(r.holds_on_samples);
        let r = check_majorizes(&Sem::nat(4), &Sem::Point(vec![3.0, 4.0]), &FinType::X, &s).unwrap();
        assert!(!r.holds_on_samples);
    }

    #[test]
    fn arrow_examples() {
        let s = Samples::standard(2, 50, 1, &[]);
        let id_star = Sem::fun(|n| n.clone());
        let half = Sem::fun(|x| Sem::Point(point_of(x).iter().map(|v| v / 2.0).collect()));
        assert!(check_majorizes(&id_star, &half, &xx(), &s).unwrap().holds_on_samples);
        let zero = Sem::fun(|_| Sem::nat(0));
        let ident = Sem::fun(|x| x.clone());
        let r = check_majorizes(&zero, &ident, &xx(), &s).unwrap();
        assert!(!r.holds_on_samples);
        assert!(r.counterexample.is_some());
    }

    #[test]
    fn non_monotone_candidate_fails_second_clause() {
        // x* = λn. 100 − n majorizes λx.0 pointwise but is not monotone.
        let s = Samples::standard(1, 30, 2, &[]);
        let star = Sem::nat_fn(|n| 100u64.saturating_sub(n));
        let zero = Sem::fun(|_| Sem::Point(vec![0.0]));
        assert!(!check_majorizes(&star, &zero, &xx(), &s).unwrap().holds_on_samples);
    }

    #[test]
    fn degree_limit() {
        let t = FinType::arrow(FinType::Zero, FinType::pure(2));
        let r = check_majorizes(&Sem::nat(0), &Sem::nat(0), &t, &Samples::new());
        assert!(matches!(r, Err(MajorizeError::UnsupportedType(_, 3))));
    }

    #[test]
    fn monotone_hull_examples() {
        assert_eq!(monotone_hull_table(&[5, 0, 7, 1]), vec![5, 5, 7, 7]);
        let c = monotone_hull(|_| 7, 10);
        assert!((0..30).all(|n| c(n) == 7));
        let id = monotone_hull(|n| n, 10);
        assert!((0..30).all(|n| id(n) == n));
    }

    #[test]
    fn resolvent_majorant_examples() {
        let w = ResolventMajorant { n: 1, m: 0, l: 0, k: 1 };
        assert_eq!(w.eval(&BigUint::from(1u8), &BigUint::from(3u8)), BigUint::from(9u8));
        let w0 = ResolventMajorant { n: 0, m: 3, l: 1, k: 0 };
        for x in [0u64, 4, 17] {
            assert_eq!(w0.eval(&BigUint::from(12u8), &BigUint::from(x)), BigUint::from(x));
        }
        // ∂|·| with c = 0 and γ̃ = 1: ‖J_γ x‖ ≤ |x|.
        let abs = WeightedL1::abs();
        for g in [0.5, 1.0, 2.0] {
            for i in -100..=100 {
                let x = i as f64 / 10.0;
                assert!(abs.resolvent(g, &[x]).unwrap()[0].abs() <= x.abs());
            }
        }
        let w = resolvent_witnesses(&abs, &[0.0], 1.0).unwrap();
        assert_eq!((w.n, w.m, w.l, w.k), (0, 0, 1, 0));
    }

    #[test]
    fn resolvent_majorant_holds_on_catalog() {
        for e in catalog() {
            if e.name == "tanh" {
                assert!(matches!(
                    check_resolvent_majorant(e.op.clone(), 3, 3, 5),
                    Err(MajorizeError::NoWitnesses(..))
                ));
                continue;
            }
            let r = check_resolvent_majorant(e.op.clone(), 30, 30, 5).unwrap();
            assert!(r.check.holds_on_samples, "{}: {:?}", e.name, r.check);
        }
    }

    #[test]
    fn chi_majorant_always_holds() {
        let op: Arc<dyn SetValuedOperator> = Arc::new(WeightedL1::abs());
        let chi = chi_sem(op, 1e-12);
        assert_eq!(chi.apply_all(&[Sem::Point(vec![0.0]), Sem::Point(vec![0.5])]).as_u64(), 0);
        assert_eq!(chi.apply_all(&[Sem::Point(vec![1.0]), Sem::Point(vec![0.5])]).as_u64(), 1);
        let ty = FinType::curried(FinType::Zero, &[FinType::X, FinType::X]);
        let s = Samples::standard(1, 40, 3, &[]);
        assert!(check_majorizes(&chi_majorant().value, &chi, &ty, &s).unwrap().holds_on_samples);
    }

    #[test]
    fn bobs_examples() {
        let grid: Vec<u64> = (0..=8).collect();
        let abs = WeightedL1::abs();
        match bobs_uniform_majorant(&abs, &grid, 200, 1) {
            BobsMajorant::Bounded { rule, values, closed_form } => {
                assert!(closed_form);
                assert_eq!(rule, "λn.1");
                assert!(values.iter().all(|v| v.1 == 1));
            }
            other => panic!("{other:?}"),
        }
        let m = Linear::scaled_identity("double", 2, 2.0);
        match bobs_uniform_majorant(&m, &grid, 200, 1) {
            BobsMajorant::Bounded { values, .. } => {
                assert!(values.iter().all(|&(n, v)| v == 2 * n));
            }
            other => panic!("{other:?}"),
        }
        assert!(!bobs_uniform_majorant(&TanSubdiff, &grid, 200, 1).is_bounded());
        let cone = catalog_entry("box_cone").unwrap().op;
        assert!(!bobs_uniform_majorant(cone.as_ref(), &grid, 200, 1).is_bounded());
    }

    #[test]
    fn minimal_norm_majorized_by_selection_majorants() {
        for name in ["soft_threshold", "weighted_l1", "box_cone", "psd_skew", "tan"] {
            let op = catalog_entry(name).unwrap().op;
            let r = check_min_norm_majorant(op, 6, 300, 4).unwrap();
            assert!(r.holds_on_samples, "{name}: {r:?}");
        }
    }
}
