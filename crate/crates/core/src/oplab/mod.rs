//! Set-valued operators on `ℝ^d`, their resolvents, and numerical checks of
//! the resolvent calculus.
//!
//! Operator values are boxes with possibly infinite sides. That covers single
//! points, subdifferentials of separable norms and normal cones of boxes, and
//! keeps projections and `H*` distances exact.

mod checks;
mod instances;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub use checks::*;
pub use instances::*;

pub type Point = Vec<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpError {
    #[error("resolvent parameter must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("point {0:?} is outside the domain")]
    OutsideDomain(Point),
    #[error("iteration stopped with residual {residual:e}")]
    NoConvergence { residual: f64 },
    #[error("{0} is not available for this instance")]
    NotAvailable(&'static str),
    #[error("comonotone resolvent refused: rho = {rho} <= -gamma/2 = {}", -gamma / 2.0)]
    ComonotoneGuard { rho: f64, gamma: f64 },
    #[error("linear system I + gamma*M is singular")]
    Singular,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("bad instance config: {0}")]
    Config(String),
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(c: f64, a: &[f64]) -> Point {
    a.iter().map(|x| c * x).collect()
}

/// `s·a + t·b`.
pub fn lincomb(s: f64, a: &[f64], t: f64, b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| s * x + t * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `ℓ_p` norms for accretivity experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L1,
    L2,
    LInf,
}

impl Norm {
    pub fn eval(self, a: &[f64]) -> f64 {
        match self {
            Norm::L1 => a.iter().map(|x| x.abs()).sum(),
            Norm::L2 => norm(a),
            Norm::LInf => a.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

/// `Lx / max(‖x‖, L)`: the radial retraction onto the closed `L`-ball.
pub fn clamp_tilde(x: &[f64], l: f64) -> Point {
    assert!(l > 0.0, "radius must be positive");
    scale(l / norm(x).max(l), x)
}

/// A value `Ax`: empty, or a product of closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ValueSet {
    Empty,
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl ValueSet {
    pub fn point(p: Point) -> ValueSet {
        ValueSet::Box {
            lo: p.clone(),
            hi: p,
        }
    }

    pub fn interval(lo: Vec<f64>, hi: Vec<f64>) -> ValueSet {
        debug_assert!(lo.iter().zip(&hi).all(|(a, b)| a <= b));
        ValueSet::Box { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ValueSet::Empty)
    }

    pub fn is_singleton(&self) -> bool {
        match self {
            ValueSet::Empty => false,
            ValueSet::Box { lo, hi } => lo == hi,
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            ValueSet::Empty => true,
            ValueSet::Box { lo, hi } => lo.iter().chain(hi).all(|v| v.is_finite()),
        }
    }

    /// Nearest point of the set.
    pub fn project(&self, u: &[f64]) -> Option<Point> {
        match self {
            ValueSet::Empty => None,
            ValueSet::Box { lo, hi } => Some(
                u.iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (a, b))| v.clamp(*a, *b))
                    .collect(),
            ),
        }
    }

    /// The element of least norm, i.e. the projection of 0.
    pub fn min_norm(&self) -> Option<Point> {
        match self {
            ValueSet::Empty => None,
            ValueSet::Box { lo, .. } => self.project(&vec![0.0; lo.len()]),
        }
    }

    /// `sup{‖u‖ : u ∈ self}`, `0` for the empty set.
    pub fn max_norm(&self) -> f64 {
        match self {
            ValueSet::Empty => 0.0,
            ValueSet::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| {
                    let m = a.abs().max(b.abs());
                    m * m
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Distance from `u` to the set, infinite for the empty set.
    pub fn dist(&self, u: &[f64]) -> f64 {
        match self.project(u) {
            None => f64::INFINITY,
            Some(p) => dist(u, &p),
        }
    }

    /// Membership up to `tol`, measured relative to the size of `u`.
    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        self.dist(u) <= tol * (1.0 + norm(u))
    }

    /// `sup_{p ∈ self} dist(p, q)`, the least `ε` with `H*[self, q, ε]`.
    pub fn hstar_sup(&self, q: &ValueSet) -> f64 {
        let (plo, phi) = match self {
            ValueSet::Empty => return 0.0,
            ValueSet::Box { lo, hi } => (lo, hi),
        };
        let (qlo, qhi) = match q {
            ValueSet::Empty => return f64::INFINITY,
            ValueSet::Box { lo, hi } => (lo, hi),
        };
        let mut total = 0.0;
        for i in 0..plo.len() {
            // dist(t, [a, b]) is convex in t, so its sup over an interval is at an end.
            let d = |t: f64| -> f64 {
                if t == f64::INFINITY {
                    if qhi[i] == f64::INFINITY { 0.0 } else { f64::INFINITY }
                } else if t == f64::NEG_INFINITY {
                    if qlo[i] == f64::NEG_INFINITY { 0.0 } else { f64::INFINITY }
                } else {
                    (qlo[i] - t).max(t - qhi[i]).max(0.0)
                }
            };
            let m = d(plo[i]).max(d(phi[i]));
            total += m * m;
        }
        total.sqrt()
    }

    /// A random element. Infinite sides are cut off at distance `spread`;
    /// finite ends are hit with positive probability.
    pub fn sample(&self, rng: &mut ChaCha8Rng, spread: f64) -> Option<Point> {
        let ValueSet::Box { lo, hi } = self else {
            return None;
        };
        Some(
            lo.iter()
                .zip(hi)
                .map(|(&a, &b)| {
                    let (a, b) = match (a.is_finite(), b.is_finite()) {
                        (true, true) => (a, b),
                        (true, false) => (a, a + spread),
                        (false, true) => (b - spread, b),
                        (false, false) => (-spread, spread),
                    };
                    match rng.gen_range(0..8) {
                        0 => a,
                        1 => b,
                        _ => rng.gen_range(a..=b),
                    }
                })
                .collect(),
        )
    }

    pub fn scaled(&self, c: f64) -> ValueSet {
        match self {
            ValueSet::Empty => ValueSet::Empty,
            ValueSet::Box { lo, hi } => {
                let (l, h): (Vec<f64>, Vec<f64>) = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| {
                        let (x, y) = (c * a, c * b);
                        (x.min(y), x.max(y))
                    })
                    .unzip();
                ValueSet::Box { lo: l, hi: h }
            }
        }
    }

    /// Minkowski sum.
    pub fn sum(&self, other: &ValueSet) -> ValueSet {
        match (self, other) {
            (ValueSet::Box { lo: a, hi: b }, ValueSet::Box { lo: c, hi: d }) => ValueSet::Box {
                lo: add(a, c),
                hi: add(b, d),
            },
            _ => ValueSet::Empty,
        }
    }
}

impl fmt::Display for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueSet::Empty => write!(f, "∅"),
            ValueSet::Box { lo, hi } => {
                let parts: Vec<String> = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| if a == b { format!("{a}") } else { format!("[{a}, {b}]") })
                    .collect();
                write!(f, "({})", parts.join(" × "))
            }
        }
    }
}

/// Declared operator class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorClass {
    Monotone,
    Comonotone { rho: f64 },
}

impl OperatorClass {
    pub fn rho(self) -> f64 {
        match self {
            OperatorClass::Monotone => 0.0,
            OperatorClass::Comonotone { rho } => rho,
        }
    }

    /// Whether `J_γ` is admitted, i.e. `ρ > −γ/2`.
    pub fn admits(self, gamma: f64) -> bool {
        gamma > 0.0 && self.rho() > -gamma / 2.0
    }

    /// `α = 1/(2(ρ/γ + 1))`, the conical constant of `J_γ`.
    pub fn alpha(self, gamma: f64) -> f64 {
        1.0 / (2.0 * (self.rho() / gamma + 1.0))
    }
}

/// Parameters of the damped fixed-point resolvent fallback.
pub const FALLBACK_DAMPING: f64 = 0.5;
pub const FALLBACK_RESIDUAL: f64 = 1e-10;
pub const FALLBACK_MAX_ITER: usize = 100_000;

pub trait SetValuedOperator: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn class(&self) -> OperatorClass;
    fn in_domain(&self, x: &[f64]) -> bool;
    /// `Ax`, empty outside the domain.
    fn value(&self, x: &[f64]) -> ValueSet;

    /// Closed-form `J_γ x` for an admitted `γ`. The default is the damped
    /// fixed-point fallback, which needs a single-valued Lipschitz operator.
    fn resolve(&self, gamma: f64, x: &[f64]) -> Result<Point, OpError> {
        fixed_point_resolvent(self, gamma, x)
    }

    fn lipschitz(&self) -> Option<f64> {
        None
    }

    fn is_single_valued(&self) -> bool {
        false
    }

    /// Whether `Ax` is described exactly (as opposed to a single selection).
    fn exposes_sets(&self) -> bool {
        true
    }

    fn known_zero(&self) -> Option<Point> {
        None
    }

    /// Closed-form bound on `sup{‖u‖ : u ∈ Ax, ‖x‖ ≤ n}`, when one is known.
    fn norm_bound(&self, _n: u64) -> Option<u64> {
        None
    }

    /// A random domain point, of norm at most `radius` where the domain allows.
    fn sample_domain(&self, rng: &mut ChaCha8Rng, radius: f64) -> Point {
        let d = self.dim();
        let raw: Point = (0..d).map(|_| rng.gen_range(-radius..=radius)).collect();
        clamp_tilde(&raw, radius)
    }

    /// Extra domain points where `‖Ax‖` is expected to be extreme.
    fn boundary_probes(&self, _radius: f64) -> Vec<Point> {
        Vec::new()
    }

    fn membership(&self, x: &[f64], u: &[f64], tol: f64) -> bool {
        self.value(x).contains(u, tol)
    }

    fn minimal_norm(&self, x: &[f64]) -> Option<Point> {
        self.value(x).min_norm()
    }

    /// `J_γ x = (Id + γA)^{-1} x` with the positivity and comonotonicity guards.
    fn resolvent(&self, gamma: f64, x: &[f64]) -> Result<Point, OpError> {
        if !(gamma > 0.0) {
            return Err(OpError::NonPositiveGamma(gamma));
        }
        if let OperatorClass::Comonotone { rho } = self.class() {
            if rho <= -gamma / 2.0 {
                return Err(OpError::ComonotoneGuard { rho, gamma });
            }
        }
        self.resolve(gamma, x)
    }
}

pub type OpRef = Arc<dyn SetValuedOperator>;

/// Solves `p = x − γ·a(p)` by `p ← ½p + ½(x − γ·a(p))`. Refuses unless the
/// operator is single-valued and `γL < 1`.
pub fn fixed_point_resolvent<A: SetValuedOperator + ?Sized>(
    op: &A,
    gamma: f64,
    x: &[f64],
) -> Result<Point, OpError> {
    let certified = op.is_single_valued() && op.lipschitz().is_some_and(|l| gamma * l < 1.0);
    if !certified {
        return Err(OpError::NotAvailable("iterative resolvent"));
    }
    let step = |p: &[f64]| -> Result<Point, OpError> {
        let a = op
            .value(p)
            .min_norm()
            .ok_or_else(|| OpError::OutsideDomain(p.to_vec()))?;
        Ok(lincomb(1.0, x, -gamma, &a))
    };
    let mut p = x.to_vec();
    let mut residual = f64::INFINITY;
    for _ in 0..FALLBACK_MAX_ITER {
        let t = step(&p)?;
        residual = dist(&t, &p);
        if residual <= FALLBACK_RESIDUAL * (1.0 + norm(x)) {
            return Ok(t);
        }
        p = lincomb(1.0 - FALLBACK_DAMPING, &p, FALLBACK_DAMPING, &t);
    }
    Err(OpError::NoConvergence { residual })
}

/// `A_γ x = (x − J_γ x)/γ`.
pub fn yosida(op: &dyn SetValuedOperator, gamma: f64, x: &[f64]) -> Result<Point, OpError> {
    let p = op.resolvent(gamma, x)?;
    Ok(scale(1.0 / gamma, &sub(x, &p)))
}

/// `A°x`, the projection of 0 onto `Ax`.
pub fn minimal_norm_selection(op: &dyn SetValuedOperator, x: &[f64]) -> Result<Point, OpError> {
    if !op.exposes_sets() {
        return Err(OpError::NotAvailable("minimal-norm selection"));
    }
    if !op.in_domain(x) {
        return Err(OpError::OutsideDomain(x.to_vec()));
    }
    op.minimal_norm(x).ok_or_else(|| OpError::OutsideDomain(x.to_vec()))
}

/// `H*[P, Q, ε]` for finite point sets: every `p` has some `q` within `ε`.
pub fn hstar_points(p: &[Point], q: &[Point], eps: f64) -> bool {
    p.iter()
        .all(|a| q.iter().any(|b| dist(a, b) <= eps))
}

/// `H*[P, Q, ε]` for value sets.
pub fn hstar_sets(p: &ValueSet, q: &ValueSet, eps: f64) -> bool {
    p.hstar_sup(q) <= eps
}
