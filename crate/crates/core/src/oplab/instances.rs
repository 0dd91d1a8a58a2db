//! Catalog of concrete operators.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    clamp_tilde, norm, OpError, OpRef, OperatorClass, Point, SetValuedOperator, ValueSet,
};

/// `x ↦ {Mx}`.
#[derive(Debug, Clone)]
pub struct Linear {
    pub name: String,
    pub m: DMatrix<f64>,
    pub class: OperatorClass,
}

impl Linear {
    pub fn new(name: impl Into<String>, m: DMatrix<f64>, class: OperatorClass) -> Linear {
        assert!(m.is_square(), "linear operator needs a square matrix");
        Linear {
            name: name.into(),
            m,
            class,
        }
    }

    pub fn identity(d: usize) -> Linear {
        Linear::new("identity", DMatrix::identity(d, d), OperatorClass::Monotone)
    }

    pub fn zero(d: usize) -> Linear {
        Linear::new("zero_op", DMatrix::zeros(d, d), OperatorClass::Monotone)
    }

    /// `c·Id`; for `c < 0` this is `1/c`-comonotone.
    pub fn scaled_identity(name: impl Into<String>, d: usize, c: f64) -> Linear {
        let class = if c >= 0.0 {
            OperatorClass::Monotone
        } else {
            OperatorClass::Comonotone { rho: 1.0 / c }
        };
        Linear::new(name, DMatrix::identity(d, d) * c, class)
    }

    /// `BBᵀ/d + (C − Cᵀ)/2` with uniform entries, seeded.
    pub fn psd_plus_skew(d: usize, seed: u64) -> Linear {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let c = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let m = &b * b.transpose() / d as f64 + (&c - c.transpose()) / 2.0;
        Linear::new("psd_skew", m, OperatorClass::Monotone)
    }

    pub fn apply(&self, x: &[f64]) -> Point {
        (&self.m * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    /// Spectral norm.
    pub fn operator_norm(&self) -> f64 {
        self.m
            .singular_values()
            .iter()
            .fold(0.0, |a: f64, &s| a.max(s))
    }
}

impl SetValuedOperator for Linear {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn dim(&self) -> usize {
        self.m.nrows()
    }
    fn class(&self) -> OperatorClass {
        self.class
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
    }
    fn value(&self, x: &[f64]) -> ValueSet {
        ValueSet::point(self.apply(x))
    }
    fn resolve(&self, gamma: f64, x: &[f64]) -> Result<Point, OpError> {
        let d = self.dim();
        let a = DMatrix::identity(d, d) + &self.m * gamma;
        let p = a
            .lu()
            .solve(&DVector::from_column_slice(x))
            .ok_or(OpError::Singular)?;
        Ok(p.as_slice().to_vec())
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(self.operator_norm())
    }
    fn is_single_valued(&self) -> bool {
        true
    }
    fn known_zero(&self) -> Option<Point> {
        Some(vec![0.0; self.dim()])
    }
    fn norm_bound(&self, n: u64) -> Option<u64> {
        Some((self.operator_norm() * n as f64).ceil() as u64)
    }
}

/// `∂(Σ wᵢ|xᵢ|)`; with one unit weight this is `∂|·|`.
#[derive(Debug, Clone)]
pub struct WeightedL1 {
    pub name: String,
    pub weights: Vec<f64>,
}

impl WeightedL1 {
    pub fn new(name: impl Into<String>, weights: Vec<f64>) -> WeightedL1 {
        assert!(weights.iter().all(|w| *w >= 0.0), "weights must be nonnegative");
        WeightedL1 {
            name: name.into(),
            weights,
        }
    }

    pub fn abs() -> WeightedL1 {
        WeightedL1::new("soft_threshold", vec![1.0])
    }
}

pub fn soft_threshold(t: f64, x: f64) -> f64 {
    x.signum() * (x.abs() - t).max(0.0)
}

impl SetValuedOperator for WeightedL1 {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn dim(&self) -> usize {
        self.weights.len()
    }
    fn class(&self) -> OperatorClass {
        OperatorClass::Monotone
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
    }
    fn value(&self, x: &[f64]) -> ValueSet {
        let (lo, hi) = x
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| {
                if v > 0.0 {
                    (w, w)
                } else if v < 0.0 {
                    (-w, -w)
                } else {
                    (-w, w)
                }
            })
            .unzip();
        ValueSet::interval(lo, hi)
    }
    fn resolve(&self, gamma: f64, x: &[f64]) -> Result<Point, OpError> {
        Ok(x
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| soft_threshold(gamma * w, v))
            .collect())
    }
    fn known_zero(&self) -> Option<Point> {
        Some(vec![0.0; self.dim()])
    }
    fn norm_bound(&self, _n: u64) -> Option<u64> {
        Some(norm(&self.weights).ceil() as u64)
    }
    fn sample_domain(&self, rng: &mut ChaCha8Rng, radius: f64) -> Point {
        let raw: Point = (0..self.dim())
            .map(|_| {
                if rng.gen_range(0..6) == 0 {
                    0.0
                } else {
                    rng.gen_range(-radius..=radius)
                }
            })
            .collect();
        clamp_tilde(&raw, radius)
    }
}

/// Normal cone of the box `[lo, hi]`, the subdifferential of its indicator.
#[derive(Debug, Clone)]
pub struct BoxNormalCone {
    pub name: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxNormalCone {
    pub fn new(name: impl Into<String>, lo: Vec<f64>, hi: Vec<f64>) -> BoxNormalCone {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a <= b && a.is_finite() && b.is_finite()));
        BoxNormalCone {
            name: name.into(),
            lo,
            hi,
        }
    }

    pub fn clamp(&self, x: &[f64]) -> Point {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (a, b))| v.clamp(*a, *b))
            .collect()
    }
}

impl SetValuedOperator for BoxNormalCone {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn dim(&self) -> usize {
        self.lo.len()
    }
    fn class(&self) -> OperatorClass {
        OperatorClass::Monotone
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| a <= v && v <= b)
    }
    fn value(&self, x: &[f64]) -> ValueSet {
        if !self.in_domain(x) {
            return ValueSet::Empty;
        }
        let (lo, hi) = x
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&a, &b))| {
                let down = if v == a { f64::NEG_INFINITY } else { 0.0 };
                let up = if v == b { f64::INFINITY } else { 0.0 };
                (down, up)
            })
            .unzip();
        ValueSet::interval(lo, hi)
    }
    fn resolve(&self, _gamma: f64, x: &[f64]) -> Result<Point, OpError> {
        Ok(self.clamp(x))
    }
    fn known_zero(&self) -> Option<Point> {
        Some(
            self.lo
                .iter()
                .zip(&self.hi)
                .map(|(a, b)| (a + b) / 2.0)
                .collect(),
        )
    }
    fn sample_domain(&self, rng: &mut ChaCha8Rng, _radius: f64) -> Point {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| match rng.gen_range(0..5) {
                0 => a,
                1 => b,
                _ => rng.gen_range(a..=b),
            })
            .collect()
    }
}

/// `Ax = {1/cos²x}` on `(0, π/2)`: the derivative of `tan` there. Monotone
/// and maximal, but not bounded on bounded sets. `J_γ x` exists iff `x > γ`.
#[derive(Debug, Clone, Default)]
pub struct TanSubdiff;

impl TanSubdiff {
    fn derivative(x: f64) -> f64 {
        let c = x.cos();
        1.0 / (c * c)
    }
}

impl SetValuedOperator for TanSubdiff {
    fn name(&self) -> String {
        "tan".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn class(&self) -> OperatorClass {
        OperatorClass::Monotone
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == 1 && x[0] > 0.0 && x[0] < FRAC_PI_2
    }
    fn value(&self, x: &[f64]) -> ValueSet {
        if self.in_domain(x) {
            ValueSet::point(vec![Self::derivative(x[0])])
        } else {
            ValueSet::Empty
        }
    }
    fn resolve(&self, gamma: f64, x: &[f64]) -> Result<Point, OpError> {
        let target = x[0];
        if !(target > gamma) {
            return Err(OpError::OutsideDomain(x.to_vec()));
        }
        // p + γ/cos²p is increasing on (0, π/2), from γ to ∞.
        let g = |p: f64| p + gamma * Self::derivative(p) - target;
        let (mut lo, mut hi) = (0.0, FRAC_PI_2);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(vec![0.5 * (lo + hi)])
    }
    fn is_single_valued(&self) -> bool {
        true
    }
    fn sample_domain(&self, rng: &mut ChaCha8Rng, radius: f64) -> Point {
        let top = radius.min(FRAC_PI_2);
        loop {
            let v = rng.gen_range(0.0..top);
            if v > 0.0 {
                return vec![v];
            }
        }
    }
    fn boundary_probes(&self, radius: f64) -> Vec<Point> {
        (1..=12)
            .map(|k| FRAC_PI_2 - 10f64.powi(-k))
            .filter(|v| *v <= radius)
            .map(|v| vec![v])
            .collect()
    }
}

/// Componentwise `tanh`: single-valued, monotone, 1-Lipschitz, with no closed
/// form resolvent.
#[derive(Debug, Clone)]
pub struct Tanh {
    pub d: usize,
}

impl SetValuedOperator for Tanh {
    fn name(&self) -> String {
        "tanh".into()
    }
    fn dim(&self) -> usize {
        self.d
    }
    fn class(&self) -> OperatorClass {
        OperatorClass::Monotone
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.d
    }
    fn value(&self, x: &[f64]) -> ValueSet {
        ValueSet::point(x.iter().map(|v| v.tanh()).collect())
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(1.0)
    }
    fn is_single_valued(&self) -> bool {
        true
    }
    fn known_zero(&self) -> Option<Point> {
        Some(vec![0.0; self.d])
    }
    fn norm_bound(&self, n: u64) -> Option<u64> {
        Some(n.min((self.d as f64).sqrt().ceil() as u64))
    }
}

/// `λA` for `λ > 0`, with `J^{λA}_γ = J^A_{λγ}`.
pub struct Scaled {
    pub lambda: f64,
    pub inner: OpRef,
}

impl Scaled {
    pub fn new(lambda: f64, inner: OpRef) -> Scaled {
        assert!(lambda > 0.0, "scaling factor must be positive");
        Scaled { lambda, inner }
    }
}

impl SetValuedOperator for Scaled {
    fn name(&self) -> String {
        format!("{}*{}", self.lambda, self.inner.name())
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn class(&self) -> OperatorClass {
        match self.inner.class() {
            OperatorClass::Monotone => OperatorClass::Monotone,
            OperatorClass::Comonotone { rho } => OperatorClass::Comonotone {
                rho: rho / self.lambda,
            },
        }
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        self.inner.in_domain(x)
    }
    fn value(&self, x: &[f64]) -> ValueSet {
        self.inner.value(x).scaled(self.lambda)
    }
    fn resolve(&self, gamma: f64, x: &[f64]) -> Result<Point, OpError> {
        self.inner.resolvent(self.lambda * gamma, x)
    }
    fn lipschitz(&self) -> Option<f64> {
        self.inner.lipschitz().map(|l| l * self.lambda)
    }
    fn is_single_valued(&self) -> bool {
        self.inner.is_single_valued()
    }
    fn exposes_sets(&self) -> bool {
        self.inner.exposes_sets()
    }
    fn known_zero(&self) -> Option<Point> {
        self.inner.known_zero()
    }
    fn norm_bound(&self, n: u64) -> Option<u64> {
        self.inner
            .norm_bound(n)
            .map(|b| (b as f64 * self.lambda).ceil() as u64)
    }
    fn sample_domain(&self, rng: &mut ChaCha8Rng, radius: f64) -> Point {
        self.inner.sample_domain(rng, radius)
    }
    fn boundary_probes(&self, radius: f64) -> Vec<Point> {
        self.inner.boundary_probes(radius)
    }
}

/// `A + B` of two monotone operators on a common domain. The resolvent is only
/// available through the fixed-point fallback.
pub struct Sum {
    pub a: OpRef,
    pub b: OpRef,
}

impl Sum {
    pub fn new(a: OpRef, b: OpRef) -> Option<Sum> {
        let monotone = a.class() == OperatorClass::Monotone && b.class() == OperatorClass::Monotone;
        (monotone && a.dim() == b.dim()).then_some(Sum { a, b })
    }
}

impl SetValuedOperator for Sum {
    fn name(&self) -> String {
        format!("{}+{}", self.a.name(), self.b.name())
    }
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn class(&self) -> OperatorClass {
        OperatorClass::Monotone
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        self.a.in_domain(x) && self.b.in_domain(x)
    }
    fn value(&self, x: &[f64]) -> ValueSet {
        self.a.value(x).sum(&self.b.value(x))
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(self.a.lipschitz()? + self.b.lipschitz()?)
    }
    fn is_single_valued(&self) -> bool {
        self.a.is_single_valued() && self.b.is_single_valued()
    }
    fn sample_domain(&self, rng: &mut ChaCha8Rng, radius: f64) -> Point {
        self.a.sample_domain(rng, radius)
    }
}

#[derive(Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub op: OpRef,
    /// Bounded on bounded sets.
    pub majorizable: bool,
    pub description: &'static str,
}

pub const CATALOG_NAMES: [&str; 10] = [
    "identity",
    "double",
    "zero_op",
    "psd_skew",
    "neg_half",
    "soft_threshold",
    "weighted_l1",
    "box_cone",
    "tan",
    "tanh",
];

/// Seed of the random `psd_skew` matrix.
pub const PSD_SKEW_SEED: u64 = 0x5eed;

pub fn catalog_entry(name: &str) -> Result<CatalogEntry, OpError> {
    let (op, majorizable, description): (OpRef, bool, &'static str) = match name {
        "identity" => (Arc::new(Linear::identity(2)), true, "Id on R^2"),
        "double" => (
            Arc::new(Linear::scaled_identity("double", 2, 2.0)),
            true,
            "2*Id on R^2",
        ),
        "zero_op" => (Arc::new(Linear::zero(2)), true, "the zero operator on R^2"),
        "psd_skew" => (
            Arc::new(Linear::psd_plus_skew(6, PSD_SKEW_SEED)),
            true,
            "seeded PSD plus skew matrix on R^6",
        ),
        "neg_half" => (
            Arc::new(Linear::scaled_identity("neg_half", 2, -0.5)),
            true,
            "-0.5*Id on R^2, (-2)-comonotone",
        ),
        "soft_threshold" => (Arc::new(WeightedL1::abs()), true, "subdifferential of |.| on R"),
        "weighted_l1" => (
            Arc::new(WeightedL1::new("weighted_l1", vec![0.5, 1.0, 2.0])),
            true,
            "subdifferential of a weighted l1 norm on R^3",
        ),
        "box_cone" => (
            Arc::new(BoxNormalCone::new("box_cone", vec![-1.0, 0.0], vec![1.0, 2.0])),
            false,
            "normal cone of [-1,1]x[0,2]",
        ),
        "tan" => (
            Arc::new(TanSubdiff),
            false,
            "derivative of tan on (0, pi/2)",
        ),
        "tanh" => (Arc::new(Tanh { d: 2 }), true, "componentwise tanh on R^2"),
        other => return Err(OpError::UnknownInstance(other.to_string())),
    };
    Ok(CatalogEntry {
        name: CATALOG_NAMES.iter().find(|n| **n == name).copied().unwrap_or("custom"),
        op,
        majorizable,
        description,
    })
}

pub fn catalog() -> Vec<CatalogEntry> {
    CATALOG_NAMES
        .iter()
        .map(|n| catalog_entry(n).expect("catalog names resolve"))
        .collect()
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, OpError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| OpError::Config(format!("`{key}`: cannot parse `{t}`")))
        })
        .collect()
}

/// Builds an operator from flat `key=value` settings. `kind` selects
/// `catalog`, `scaled_identity`, `matrix`, `psd_skew`, `weighted_l1`, `box`,
/// `tan` or `tanh`.
pub fn operator_from_config(cfg: &BTreeMap<String, String>) -> Result<OpRef, OpError> {
    let get = |k: &str| cfg.get(k).map(String::as_str);
    let need = |k: &str| get(k).ok_or_else(|| OpError::Config(format!("missing key `{k}`")));
    let usize_key = |k: &str, default: usize| -> Result<usize, OpError> {
        get(k).map_or(Ok(default), |v| {
            v.trim()
                .parse()
                .map_err(|_| OpError::Config(format!("`{k}` must be a natural number")))
        })
    };
    let name = get("name").unwrap_or("custom").to_string();
    let op: OpRef = match need("kind")? {
        "catalog" => catalog_entry(need("instance")?)?.op,
        "scaled_identity" => {
            let c = parse_list("c", need("c")?)?;
            let [c] = c[..] else {
                return Err(OpError::Config("`c` must be a single number".into()));
            };
            Arc::new(Linear::scaled_identity(name, usize_key("dim", 2)?, c))
        }
        "matrix" => {
            let rows: Vec<Vec<f64>> = need("rows")?
                .split(';')
                .map(|r| parse_list("rows", r))
                .collect::<Result<_, _>>()?;
            let d = rows.len();
            if d == 0 || rows.iter().any(|r| r.len() != d) {
                return Err(OpError::Config("`rows` must describe a square matrix".into()));
            }
            let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
            let class = match get("rho") {
                None => OperatorClass::Monotone,
                Some(r) => OperatorClass::Comonotone {
                    rho: parse_list("rho", r)?[0],
                },
            };
            Arc::new(Linear::new(name, m, class))
        }
        "psd_skew" => {
            let seed = usize_key("seed", PSD_SKEW_SEED as usize)? as u64;
            Arc::new(Linear::psd_plus_skew(usize_key("dim", 4)?, seed))
        }
        "weighted_l1" => Arc::new(WeightedL1::new(name, parse_list("weights", need("weights")?)?)),
        "box" => {
            let lo = parse_list("lo", need("lo")?)?;
            let hi = parse_list("hi", need("hi")?)?;
            if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| a > b) {
                return Err(OpError::Config("`lo` and `hi` must describe a box".into()));
            }
            Arc::new(BoxNormalCone::new(name, lo, hi))
        }
        "tan" => Arc::new(TanSubdiff),
        "tanh" => Arc::new(Tanh {
            d: usize_key("dim", 2)?,
        }),
        other => return Err(OpError::Config(format!("unknown kind `{other}`"))),
    };
    match get("scale") {
        None => Ok(op),
        Some(s) => {
            let lambda = parse_list("scale", s)?[0];
            if !(lambda > 0.0) {
                return Err(OpError::Config("`scale` must be positive".into()));
            }
            Ok(Arc::new(Scaled::new(lambda, op)))
        }
    }
}

/// `∂(c|·|)` on `ℝ`.
pub fn scaled_abs(c: f64) -> WeightedL1 {
    WeightedL1::new(format!("{c}*abs"), vec![c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oplab::{dist, yosida};

    #[test]
    fn resolvent_examples() {
        let id = Linear::identity(2);
        let p = id.resolvent(1.0, &[2.0, 2.0]).unwrap();
        assert!(dist(&p, &[1.0, 1.0]) < 1e-15);

        let abs = WeightedL1::abs();
        assert_eq!(abs.resolvent(1.0, &[2.0]).unwrap(), vec![1.0]);
        assert!(abs.membership(&[1.0], &[2.0 - 1.0], 0.0));

        let nh = Linear::scaled_identity("neg_half", 2, -0.5);
        let p = nh.resolvent(8.0, &[3.0, 0.0]).unwrap();
        assert!(dist(&p, &[-1.0, 0.0]) < 1e-14);
        assert!(matches!(
            nh.resolvent(4.0, &[3.0, 0.0]),
            Err(OpError::ComonotoneGuard { .. })
        ));
        assert_eq!(abs.resolvent(0.0, &[1.0]), Err(OpError::NonPositiveGamma(0.0)));
    }

    #[test]
    fn yosida_examples() {
        let abs = WeightedL1::abs();
        assert_eq!(yosida(&abs, 1.0, &[0.5]).unwrap(), vec![0.5]);
        let id = Linear::identity(1);
        assert!((yosida(&id, 1.0, &[3.0]).unwrap()[0] - 1.5).abs() < 1e-15);
        // ‖A_1(0.5)‖ = 0.5 ≤ ‖y‖ = 1 for the only y ∈ A(0.5).
        let y = abs.value(&[0.5]).min_norm().unwrap();
        assert!(norm(&yosida(&abs, 1.0, &[0.5]).unwrap()) <= norm(&y));
    }

    #[test]
    fn tan_resolvent_solves_equation_and_has_partial_domain() {
        let t = TanSubdiff;
        let p = t.resolvent(0.5, &[1.0]).unwrap()[0];
        assert!((p + 0.5 / (p.cos() * p.cos()) - 1.0).abs() < 1e-12);
        assert!(matches!(t.resolvent(1.0, &[0.5]), Err(OpError::OutsideDomain(_))));
        assert!(t.value(&[2.0]).is_empty());
    }

    #[test]
    fn box_cone_values() {
        let b = BoxNormalCone::new("b", vec![-1.0, 0.0], vec![1.0, 2.0]);
        assert_eq!(b.minimal_norm(&[1.0, 0.0]), Some(vec![0.0, 0.0]));
        assert!(b.membership(&[1.0, 0.0], &[3.0, -2.0], 0.0));
        assert!(!b.membership(&[1.0, 0.0], &[-3.0, 0.0], 1e-8));
        assert_eq!(b.resolvent(5.0, &[4.0, -1.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn tanh_fallback_only_with_certificate() {
        let t = Tanh { d: 2 };
        let p = t.resolvent(0.5, &[1.0, -2.0]).unwrap();
        for i in 0..2 {
            let x = [1.0, -2.0][i];
            assert!((p[i] + 0.5 * p[i].tanh() - x).abs() < 1e-9);
        }
        assert_eq!(
            t.resolvent(1.0, &[1.0, 0.0]),
            Err(OpError::NotAvailable("iterative resolvent"))
        );
    }

    #[test]
    fn scaled_and_sum_combinators() {
        let s = Scaled::new(3.0, Arc::new(WeightedL1::abs()));
        assert_eq!(s.resolvent(1.0, &[5.0]).unwrap(), vec![2.0]);
        assert_eq!(s.value(&[0.0]), ValueSet::interval(vec![-3.0], vec![3.0]));
        let sum = Sum::new(Arc::new(Linear::identity(1)), Arc::new(Tanh { d: 1 })).unwrap();
        let p = sum.resolvent(0.25, &[1.0]).unwrap();
        assert!((p[0] + 0.25 * (p[0] + p[0].tanh()) - 1.0).abs() < 1e-9);
        let nh: OpRef = Arc::new(Linear::scaled_identity("n", 1, -0.5));
        assert!(Sum::new(nh, Arc::new(Tanh { d: 1 })).is_none());
    }

    #[test]
    fn config_construction() {
        let cfg: BTreeMap<String, String> = [("kind", "matrix"), ("rows", "2,0;0,2")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let op = operator_from_config(&cfg).unwrap();
        assert_eq!(op.value(&[1.0, 1.0]), ValueSet::point(vec![2.0, 2.0]));
        let bad: BTreeMap<String, String> = [("kind".to_string(), "nope".to_string())].into();
        assert!(operator_from_config(&bad).is_err());
        for e in catalog() {
            assert_eq!(e.op.name(), e.name);
        }
    }
}
