//! Sampled verification of operator classes and resolvent properties.
//!
//! Every inequality `lhs ≤ rhs` is recorded with the normalised slack
//! `(rhs − lhs)/scale`, where `scale` is `1 + |lhs| + |rhs|` unless stated
//! otherwise, so slacks lie in `[−1, 1]`. A check fails when some slack is
//! below `−tol`. Samples use one ChaCha stream each and are merged in index
//! order, so reports do not depend on the thread schedule.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    clamp_tilde, dist, dot, lincomb, minimal_norm_selection, norm, scale, sub, Norm, OpError,
    OperatorClass, Point, SetValuedOperator,
};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_GAMMA_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
/// `r`-grid for the norm form of firm nonexpansiveness.
pub const R_GRID: [f64; 9] = [0.01, 0.1, 0.25, 0.5, 0.75, 1.0, 2.0, 4.0, 100.0];
/// `λ`-grid for accretivity.
pub const LAMBDA_GRID: [f64; 8] = [0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0];
/// Spread used when sampling unbounded value sets.
const VALUE_SPREAD: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub evaluations: u64,
    pub violations: u64,
    /// Least normalised slack seen, absent when nothing was evaluated.
    pub worst_slack: Option<f64>,
    pub counterexample: Option<String>,
}

impl CheckResult {
    fn empty() -> CheckResult {
        CheckResult {
            evaluations: 0,
            violations: 0,
            worst_slack: None,
            counterexample: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn merge(self, other: CheckResult) -> CheckResult {
        let left_wins = match (self.worst_slack, other.worst_slack) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a <= b,
        };
        let (worst_slack, counterexample) = if left_wins {
            (self.worst_slack, self.counterexample.or(other.counterexample))
        } else {
            (other.worst_slack, other.counterexample.or(self.counterexample))
        };
        CheckResult {
            evaluations: self.evaluations + other.evaluations,
            violations: self.violations + other.violations,
            worst_slack,
            counterexample,
        }
    }
}

/// Named check results accumulated over samples.
#[derive(Debug, Clone)]
pub struct Tally {
    tol: f64,
    pub checks: BTreeMap<String, CheckResult>,
    pub skipped: u64,
}

impl Tally {
    pub fn new(tol: f64) -> Tally {
        Tally {
            tol,
            checks: BTreeMap::new(),
            skipped: 0,
        }
    }

    fn record(&mut self, name: &str, slack: f64, ctx: impl FnOnce() -> String) {
        let slack = if slack.is_nan() { -1.0 } else { slack.clamp(-1.0, 1.0) };
        let entry = self
            .checks
            .entry(name.to_string())
            .or_insert_with(CheckResult::empty);
        entry.evaluations += 1;
        let bad = slack < -self.tol;
        if bad {
            entry.violations += 1;
        }
        if entry.worst_slack.is_none_or(|w| slack < w) {
            entry.worst_slack = Some(slack);
            if bad {
                entry.counterexample = Some(ctx());
            }
        }
    }

    /// Records `lhs ≤ rhs` with an explicit scale.
    pub fn le_scaled(&mut self, name: &str, lhs: f64, rhs: f64, scale: f64, ctx: impl FnOnce() -> String) {
        self.record(name, (rhs - lhs) / scale, ctx);
    }

    /// Records `lhs ≤ rhs`.
    pub fn le(&mut self, name: &str, lhs: f64, rhs: f64, ctx: impl FnOnce() -> String) {
        self.le_scaled(name, lhs, rhs, 1.0 + lhs.abs() + rhs.abs(), ctx);
    }

    /// Records a pass/fail outcome with slack `0` or `−1`.
    pub fn check(&mut self, name: &str, ok: bool, ctx: impl FnOnce() -> String) {
        self.record(name, if ok { 0.0 } else { -1.0 }, ctx);
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        for (k, v) in other.checks {
            let merged = match self.checks.remove(&k) {
                Some(mine) => mine.merge(v),
                None => v,
            };
            self.checks.insert(k, merged);
        }
        self.skipped += other.skipped;
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.values().all(CheckResult::passed)
    }
}

/// Sampling settings shared by the checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckConfig {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub gamma_grid: Vec<f64>,
    /// Radius of the region domain points are drawn from.
    pub radius: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            samples: 1000,
            seed: 0,
            tol: DEFAULT_TOL,
            gamma_grid: DEFAULT_GAMMA_GRID.to_vec(),
            radius: 10.0,
        }
    }
}

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `body` once per sample in parallel and merges the tallies in order.
pub fn run_samples<F>(samples: usize, seed: u64, tol: f64, body: F) -> Tally
where
    F: Fn(&mut ChaCha8Rng, &mut Tally) + Sync,
{
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let mut t = Tally::new(tol);
            body(&mut rng, &mut t);
            t
        })
        .reduce(|| Tally::new(tol), Tally::merge)
}

/// Report of one check family on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub instance: String,
    pub checks: BTreeMap<String, CheckResult>,
    pub skipped: u64,
    pub passed: bool,
}

impl CheckReport {
    pub fn from_tally(instance: String, t: Tally) -> CheckReport {
        CheckReport {
            instance,
            passed: t.passed(),
            skipped: t.skipped,
            checks: t.checks,
        }
    }

    pub fn worst_slack(&self) -> Option<f64> {
        self.checks
            .values()
            .filter_map(|c| c.worst_slack)
            .reduce(f64::min)
    }
}

fn fmt_pt(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| format!("{v:.6e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn sample_graph_point(
    op: &dyn SetValuedOperator,
    rng: &mut ChaCha8Rng,
    radius: f64,
) -> Option<(Point, Point)> {
    let x = op.sample_domain(rng, radius);
    let u = op.value(&x).sample(rng, VALUE_SPREAD)?;
    Some((x, u))
}

/// Class to test a graph against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSpec {
    Monotone,
    Comonotone { rho: f64 },
    Accretive { norm: Norm },
}

impl From<OperatorClass> for ClassSpec {
    fn from(c: OperatorClass) -> Self {
        match c {
            OperatorClass::Monotone => ClassSpec::Monotone,
            OperatorClass::Comonotone { rho } => ClassSpec::Comonotone { rho },
        }
    }
}

impl ClassSpec {
    fn label(self) -> String {
        match self {
            ClassSpec::Monotone => "monotone".into(),
            ClassSpec::Comonotone { rho } => format!("comonotone({rho})"),
            ClassSpec::Accretive { norm } => format!("accretive_{norm:?}").to_lowercase(),
        }
    }
}

/// Evaluates the defining inequality of `spec` on sampled graph pairs.
pub fn check_operator_class(
    op: &dyn SetValuedOperator,
    spec: ClassSpec,
    cfg: &CheckConfig,
) -> CheckResult {
    let name = spec.label();
    let t = run_samples(cfg.samples, cfg.seed, cfg.tol, |rng, t| {
        let (Some((x, u)), Some((y, v))) = (
            sample_graph_point(op, rng, cfg.radius),
            sample_graph_point(op, rng, cfg.radius),
        ) else {
            t.skipped += 1;
            return;
        };
        let dx = sub(&x, &y);
        let du = sub(&u, &v);
        let ctx = || format!("x={} u={} y={} v={}", fmt_pt(&x), fmt_pt(&u), fmt_pt(&y), fmt_pt(&v));
        match spec {
            ClassSpec::Monotone => {
                t.le_scaled(&name, 0.0, dot(&dx, &du), 1.0 + norm(&dx) * norm(&du), ctx)
            }
            ClassSpec::Comonotone { rho } => {
                let rhs = dot(&dx, &du);
                let lhs = rho * dot(&du, &du);
                t.le_scaled(&name, lhs, rhs, 1.0 + norm(&dx) * norm(&du) + lhs.abs(), ctx)
            }
            ClassSpec::Accretive { norm: n } => {
                let base = n.eval(&dx);
                for lambda in LAMBDA_GRID {
                    let moved = n.eval(&lincomb(1.0, &dx, lambda, &du));
                    t.le(&name, base, moved, || format!("{} lambda={lambda}", ctx()));
                }
            }
        }
    });
    t.checks
        .into_values()
        .next()
        .unwrap_or_else(CheckResult::empty)
}

/// Gammas of the grid the operator admits and those it must refuse.
pub fn split_gamma_grid(op: &dyn SetValuedOperator, grid: &[f64]) -> (Vec<f64>, Vec<f64>) {
    grid.iter().partition(|g| op.class().admits(**g))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventReport {
    pub instance: String,
    pub class: OperatorClass,
    pub gammas_used: Vec<f64>,
    pub gammas_refused: Vec<f64>,
    pub checks: BTreeMap<String, CheckResult>,
    pub skipped: u64,
    pub passed: bool,
}

impl ResolventReport {
    pub fn worst_slack(&self) -> Option<f64> {
        self.checks
            .values()
            .filter_map(|c| c.worst_slack)
            .reduce(f64::min)
    }
}

/// The resolvent inequalities and identities on sampled points.
///
/// Firm nonexpansiveness is checked when `ρ ≥ 0`; nonexpansiveness and the
/// Yosida bounds when `α ≤ 1`; the conical inequality always and the averaged
/// one when `α < 1`, with `α = 1/(2(ρ/γ + 1))`.
pub fn check_resolvent_properties(op: &dyn SetValuedOperator, cfg: &CheckConfig) -> ResolventReport {
    let class = op.class();
    let (used, refused) = split_gamma_grid(op, &cfg.gamma_grid);
    let rho = class.rho();
    let t = run_samples(cfg.samples, cfg.seed, cfg.tol, |rng, t| {
        let x = op.sample_domain(rng, cfg.radius);
        let y = op.sample_domain(rng, cfg.radius);
        let dxy = sub(&x, &y);
        let pt = |p: &[f64]| fmt_pt(p);

        for &g in &refused {
            let r = op.resolvent(g, &x);
            t.check("comonotone_guard", matches!(r, Err(OpError::ComonotoneGuard { .. })), || {
                format!("gamma={g} was not refused: {r:?}")
            });
        }

        let mut jx_all = Vec::new();
        for &g in &used {
            let (jx, jy) = match (op.resolvent(g, &x), op.resolvent(g, &y)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(OpError::OutsideDomain(_) | OpError::NotAvailable(_)), _)
                | (_, Err(OpError::OutsideDomain(_) | OpError::NotAvailable(_))) => {
                    t.skipped += 1;
                    jx_all.push(None);
                    continue;
                }
                (Err(e), _) | (_, Err(e)) => {
                    t.check("resolvent_available", false, || format!("gamma={g}: {e}"));
                    jx_all.push(None);
                    continue;
                }
            };
            let ctx = || format!("gamma={g} x={} y={}", pt(&x), pt(&y));
            let w = scale(1.0 / g, &sub(&x, &jx));
            t.le_scaled(
                "defining_equivalence",
                op.value(&jx).dist(&w),
                0.0,
                1.0 + norm(&w) + norm(&jx),
                ctx,
            );

            let djj = sub(&jx, &jy);
            let dres = sub(&dxy, &djj);
            let alpha = class.alpha(g);
            if rho >= 0.0 {
                t.le("fne_inner", dot(&djj, &djj), dot(&dxy, &djj), ctx);
                for r in R_GRID {
                    t.le("fne_norm", norm(&djj), norm(&lincomb(r, &dxy, 1.0 - r, &djj)), || {
                        format!("{} r={r}", ctx())
                    });
                }
            }
            if alpha <= 1.0 {
                t.le("nonexpansive", norm(&djj), norm(&dxy), ctx);
                let yx = scale(1.0 / g, &sub(&x, &jx));
                let yy = scale(1.0 / g, &sub(&y, &jy));
                t.le("yosida_lipschitz", dist(&yx, &yy), 2.0 / g * norm(&dxy), ctx);
                if let Some(a0) = op.minimal_norm(&x) {
                    t.le("yosida_norm_bound", norm(&yx), norm(&a0), ctx);
                }
            }
            t.le(
                "conical",
                (1.0 - 2.0 * alpha) * dot(&dres, &dres),
                2.0 * alpha * dot(&djj, &dres),
                ctx,
            );
            if alpha < 1.0 {
                t.le(
                    "averaged",
                    (1.0 - alpha) * dot(&dres, &dres),
                    alpha * (dot(&dxy, &dxy) - dot(&djj, &djj)),
                    ctx,
                );
            }

            // Uniqueness: a graph point (z, w) gives x' = z + γw with J_γ x' = z.
            let z = op.sample_domain(rng, cfg.radius);
            if let Some(wz) = op.value(&z).sample(rng, VALUE_SPREAD) {
                let xp = lincomb(1.0, &z, g, &wz);
                match op.resolvent(g, &xp) {
                    Ok(p) => t.le_scaled("uniqueness", dist(&p, &z), 0.0, 1.0 + norm(&xp), || {
                        format!("gamma={g} z={} w={}", pt(&z), pt(&wz))
                    }),
                    Err(e) => t.check("uniqueness", false, || {
                        format!("gamma={g} z={} w={}: {e}", pt(&z), pt(&wz))
                    }),
                }
            }
            jx_all.push(Some(jx));
        }

        for (i, &g) in used.iter().enumerate() {
            for (k, &l) in used.iter().enumerate() {
                let (Some(jg), Some(jl)) = (&jx_all[i], &jx_all[k]) else {
                    continue;
                };
                let ctx = || format!("gamma={g} lambda={l} x={}", pt(&x));
                // J_λ x = J_γ((γ/λ)x + (1 − γ/λ)J_λ x)
                let inner = lincomb(g / l, &x, 1.0 - g / l, jl);
                match op.resolvent(g, &inner) {
                    Ok(rhs) => t.le_scaled(
                        "resolvent_identity",
                        dist(jl, &rhs),
                        0.0,
                        1.0 + norm(jl) + norm(&rhs),
                        ctx,
                    ),
                    Err(OpError::OutsideDomain(_)) => t.skipped += 1,
                    Err(e) => t.check("resolvent_identity", false, || format!("{}: {e}", ctx())),
                }
                t.le(
                    "displacement_bound",
                    dist(&x, jg),
                    (2.0 + g / l) * dist(&x, jl),
                    ctx,
                );
            }
        }

        // Graph closedness: u_k ∈ A(z + 2^{-40}δ) must stay near Az.
        let z = op.sample_domain(rng, cfg.radius);
        let delta: Point = (0..op.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let zk = lincomb(1.0, &z, 2f64.powi(-40), &delta);
        if op.in_domain(&zk) {
            if let Some(u) = op.minimal_norm(&zk) {
                t.le_scaled("graph_closed", op.value(&z).dist(&u), 0.0, 1.0 + norm(&u), || {
                    format!("z={} u={}", pt(&z), pt(&u))
                });
            }
        }
    });
    ResolventReport {
        instance: op.name(),
        class,
        gammas_used: used,
        gammas_refused: refused,
        passed: t.passed(),
        skipped: t.skipped,
        checks: t.checks,
    }
}

fn floor_log2(b: u64) -> u64 {
    if b <= 1 {
        0
    } else {
        63 - b.leading_zeros() as u64
    }
}

fn ceil_log2(b: u64) -> u64 {
    if b <= 1 {
        0
    } else {
        64 - (b - 1).leading_zeros() as u64
    }
}

/// `j = ⌊k + l′ + log₂ b⌋`, with `log₂ b` clamped at `0` for `b < 1`.
pub fn resolvent_param_modulus(b: u64, l_prime: u64, k: u64) -> u64 {
    k + l_prime + floor_log2(b)
}

/// `k + l′ + ⌈log₂ b⌉`, which is a valid modulus for every `b`.
pub fn resolvent_param_modulus_ceil(b: u64, l_prime: u64, k: u64) -> u64 {
    k + l_prime + ceil_log2(b)
}

/// Checks the modulus at one point: returns `(‖J_γx − J_γ′x‖, 2^{-k})` after
/// validating `b ≥ ‖x − J_γ′x‖`, `γ′ ≥ 2^{-l′}` and `|γ − γ′| ≤ 2^{-j}`.
#[allow(clippy::too_many_arguments)]
pub fn param_modulus_point(
    op: &dyn SetValuedOperator,
    b: u64,
    l_prime: u64,
    k: u64,
    j: u64,
    x: &[f64],
    gamma_prime: f64,
    gamma: f64,
) -> Result<(f64, f64), OpError> {
    if gamma_prime < 2f64.powi(-(l_prime as i32)) {
        return Err(OpError::PreconditionViolated(format!(
            "gamma' = {gamma_prime} < 2^-{l_prime}"
        )));
    }
    if (gamma - gamma_prime).abs() > 2f64.powi(-(j as i32)) {
        return Err(OpError::PreconditionViolated(format!(
            "|gamma - gamma'| = {} > 2^-{j}",
            (gamma - gamma_prime).abs()
        )));
    }
    let jp = op.resolvent(gamma_prime, x)?;
    if dist(x, &jp) > b as f64 {
        return Err(OpError::PreconditionViolated(format!(
            "||x - J x|| = {} > b = {b}",
            dist(x, &jp)
        )));
    }
    let jg = op.resolvent(gamma, x)?;
    Ok((dist(&jg, &jp), 2f64.powi(-(k as i32))))
}

/// Samples `(x, γ′, γ)` satisfying the premises of the modulus `j` and
/// checks `‖J_γx − J_γ′x‖ ≤ 2^{-k}`.
pub fn verify_param_modulus(
    op: &dyn SetValuedOperator,
    b: u64,
    l_prime: u64,
    k: u64,
    j: u64,
    cfg: &CheckConfig,
) -> CheckResult {
    let t = run_samples(cfg.samples, cfg.seed, cfg.tol, |rng, t| {
        let base = 2f64.powi(-(l_prime as i32));
        let gp = if rng.gen_range(0..4) == 0 { base } else { base * rng.gen_range(1.0..4.0) };
        let step = 2f64.powi(-(j as i32));
        let gamma = match rng.gen_range(0..4) {
            0 => gp + step,
            1 => gp - step,
            _ => gp + rng.gen_range(-step..=step),
        };
        if !(gamma > 0.0) || !op.class().admits(gamma) || !op.class().admits(gp) {
            t.skipped += 1;
            return;
        }
        let mut x = op.sample_domain(rng, cfg.radius);
        for _ in 0..64 {
            match op.resolvent(gp, &x) {
                Ok(p) if dist(&x, &p) <= b as f64 => break,
                Ok(_) => x = scale(0.5, &x),
                Err(_) => break,
            }
        }
        match param_modulus_point(op, b, l_prime, k, j, &x, gp, gamma) {
            Ok((lhs, rhs)) => t.le_scaled("param_modulus", lhs, rhs, rhs, || {
                format!("b={b} l'={l_prime} k={k} j={j} x={} gamma'={gp} gamma={gamma}", fmt_pt(&x))
            }),
            Err(OpError::PreconditionViolated(_)) | Err(OpError::OutsideDomain(_)) => t.skipped += 1,
            Err(e) => t.check("param_modulus", false, || e.to_string()),
        }
    });
    t.checks
        .into_values()
        .next()
        .unwrap_or_else(CheckResult::empty)
}

/// `A°x ∈ Ax`, the variational inequality `⟨y − A°x, −A°x⟩ ≤ 0`, the
/// quantitative uniqueness `‖z − A°x‖² ≤ ‖z‖² − ‖A°x‖²` and `‖A°x‖ ≤ ‖y‖`,
/// for sampled `y, z ∈ Ax`.
pub fn check_minimal_norm(op: &dyn SetValuedOperator, cfg: &CheckConfig) -> CheckReport {
    let t = run_samples(cfg.samples, cfg.seed, cfg.tol, |rng, t| {
        let x = op.sample_domain(rng, cfg.radius);
        let p = match minimal_norm_selection(op, &x) {
            Ok(p) => p,
            Err(OpError::NotAvailable(_)) => {
                t.skipped += 1;
                return;
            }
            Err(e) => {
                t.check("y1_membership", false, || format!("x={}: {e}", fmt_pt(&x)));
                return;
            }
        };
        let value = op.value(&x);
        t.le_scaled("y1_membership", value.dist(&p), 0.0, 1.0 + norm(&p), || {
            format!("x={} p={}", fmt_pt(&x), fmt_pt(&p))
        });
        for _ in 0..4 {
            let near: Point = p.iter().map(|v| v + rng.gen_range(-1.0..=1.0)).collect();
            let candidates = [value.sample(rng, VALUE_SPREAD), value.project(&near)];
            for y in candidates.into_iter().flatten() {
                let ctx = || format!("x={} p={} y={}", fmt_pt(&x), fmt_pt(&p), fmt_pt(&y));
                let neg_p = scale(-1.0, &p);
                t.le_scaled(
                    "y2_variational",
                    dot(&sub(&y, &p), &neg_p),
                    0.0,
                    1.0 + norm(&y) * norm(&p) + dot(&p, &p),
                    ctx,
                );
                let dz = sub(&y, &p);
                t.le("uniqueness", dot(&dz, &dz), dot(&y, &y) - dot(&p, &p), ctx);
                t.le("dominated", norm(&p), norm(&y), ctx);
            }
        }
    });
    CheckReport::from_tally(op.name(), t)
}

/// Checks `‖x − y‖ < 1/(ϖ(k)+1) → H*[Ax, Ay, 1/(k+1)]` in both directions.
pub fn uc_modulus_check(
    op: &dyn SetValuedOperator,
    varpi: &(dyn Fn(u64) -> u64 + Sync),
    k_grid: &[u64],
    cfg: &CheckConfig,
) -> CheckReport {
    let t = run_samples(cfg.samples, cfg.seed, cfg.tol, |rng, t| {
        for &k in k_grid {
            let delta = 1.0 / (varpi(k) as f64 + 1.0);
            let mut x = op.sample_domain(rng, cfg.radius);
            if rng.gen_range(0..4) == 0 {
                x = clamp_tilde(&x, delta);
            }
            let dir: Point = (0..op.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let r = rng.gen_range(0.0..delta);
            let y = lincomb(1.0, &x, r, &clamp_tilde(&dir, 1.0));
            if !(dist(&x, &y) < delta) || !op.in_domain(&x) || !op.in_domain(&y) {
                t.skipped += 1;
                continue;
            }
            let (ax, ay) = (op.value(&x), op.value(&y));
            let eps = 1.0 / (k as f64 + 1.0);
            for (p, q) in [(&ax, &ay), (&ay, &ax)] {
                t.le_scaled("hstar", p.hstar_sup(q), eps, eps, || {
                    format!("k={k} x={} y={} Ax={ax} Ay={ay}", fmt_pt(&x), fmt_pt(&y))
                });
            }
        }
    });
    CheckReport::from_tally(op.name(), t)
}

/// One step of a parameter sequence: `γ_n` with its modulus `γ_n > 2^{-α_n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaStep {
    pub gamma: f64,
    pub alpha: u32,
}

/// Bounded range condition on `dom A ∩ B̄_L(a)`: for sampled `x` and each
/// `n`, the witness `z = J_{γ_n}x`, `w = (x − z)/γ_n` must satisfy `w ∈ Az`
/// and `‖z − a‖ ≤ L`. With `a = 0` also `‖w‖ ≤ 2L/γ_n ≤ L·2^{α_n+1}`.
pub fn range_condition_check(
    op: &dyn SetValuedOperator,
    steps: &[GammaStep],
    l: f64,
    center: &[f64],
    cfg: &CheckConfig,
) -> CheckReport {
    let centered = center.iter().all(|c| *c == 0.0);
    let t = run_samples(cfg.samples, cfg.seed, cfg.tol, |rng, t| {
        let raw = op.sample_domain(rng, cfg.radius);
        let x = lincomb(1.0, center, 1.0, &clamp_tilde(&sub(&raw, center), l));
        if !op.in_domain(&x) {
            t.skipped += 1;
            return;
        }
        for (n, s) in steps.iter().enumerate() {
            let ctx = || format!("n={n} gamma={} x={}", s.gamma, fmt_pt(&x));
            t.check("modulus", s.gamma > 2f64.powi(-(s.alpha as i32)), ctx);
            let z = match op.resolvent(s.gamma, &x) {
                Ok(z) => z,
                Err(e) => {
                    t.check("witness", false, || format!("{}: {e}", ctx()));
                    continue;
                }
            };
            t.check("witness", true, ctx);
            let w = scale(1.0 / s.gamma, &sub(&x, &z));
            t.le_scaled("membership", op.value(&z).dist(&w), 0.0, 1.0 + norm(&w), ctx);
            t.le("ball", dist(&z, center), l, ctx);
            if centered {
                t.le("w_bound", norm(&w), 2.0 * l / s.gamma, ctx);
                t.le("w_bound_modulus", 2.0 * l / s.gamma, l * 2f64.powi(s.alpha as i32 + 1), ctx);
            }
        }
    });
    CheckReport::from_tally(op.name(), t)
}

/// Everything `oplab verify` runs on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceReport {
    pub instance: String,
    pub class: BTreeMap<String, CheckResult>,
    pub resolvent: ResolventReport,
    pub minimal_norm: Option<CheckReport>,
    pub passed: bool,
}

pub fn verify_instance(op: &dyn SetValuedOperator, cfg: &CheckConfig) -> InstanceReport {
    let mut class = BTreeMap::new();
    let declared = ClassSpec::from(op.class());
    class.insert(declared.label(), check_operator_class(op, declared, cfg));
    if op.class() == OperatorClass::Monotone {
        let spec = ClassSpec::Accretive { norm: Norm::L2 };
        class.insert(spec.label(), check_operator_class(op, spec, cfg));
    }
    let resolvent = check_resolvent_properties(op, cfg);
    let minimal_norm = op.exposes_sets().then(|| check_minimal_norm(op, cfg));
    let passed = class.values().all(CheckResult::passed)
        && resolvent.passed
        && minimal_norm.as_ref().is_none_or(|r| r.passed);
    InstanceReport {
        instance: op.name(),
        class,
        resolvent,
        minimal_norm,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oplab::{catalog_entry, scaled_abs, Linear, WeightedL1};

    fn cfg(samples: usize) -> CheckConfig {
        CheckConfig {
            samples,
            seed: 3,
            ..CheckConfig::default()
        }
    }

    #[test]
    fn class_examples() {
        let m = catalog_entry("psd_skew").unwrap().op;
        let r = check_operator_class(m.as_ref(), ClassSpec::Monotone, &cfg(300));
        assert!(r.passed() && r.worst_slack.unwrap() >= -1e-12);
        let abs = WeightedL1::abs();
        assert!(check_operator_class(&abs, ClassSpec::Monotone, &cfg(300)).passed());
        let acc = ClassSpec::Accretive { norm: Norm::L2 };
        assert!(check_operator_class(&abs, acc, &cfg(300)).passed());
        let nh = Linear::scaled_identity("nh", 2, -0.5);
        let exact = check_operator_class(&nh, ClassSpec::Comonotone { rho: -2.0 }, &cfg(300));
        assert!(exact.passed());
        let off = check_operator_class(&nh, ClassSpec::Comonotone { rho: -1.9 }, &cfg(300));
        assert!(!off.passed());
        assert!(off.counterexample.is_some());
    }

    #[test]
    fn resolvent_suite_on_identity_and_abs() {
        for name in ["identity", "soft_threshold", "box_cone", "psd_skew"] {
            let op = catalog_entry(name).unwrap().op;
            let r = check_resolvent_properties(op.as_ref(), &cfg(200));
            assert!(r.passed, "{name}: {:#?}", r.checks);
            assert!(r.checks.contains_key("fne_inner"));
        }
    }

    #[test]
    fn comonotone_suite_uses_only_admitted_gammas() {
        let op = catalog_entry("neg_half").unwrap().op;
        let mut c = cfg(200);
        c.gamma_grid.extend([8.0, 16.0]);
        let r = check_resolvent_properties(op.as_ref(), &c);
        assert_eq!(r.gammas_used, vec![8.0, 16.0]);
        assert!(r.passed, "{:#?}", r.checks);
        assert!(!r.checks.contains_key("fne_inner"));
        assert_eq!(r.checks["comonotone_guard"].violations, 0);
    }

    #[test]
    fn resolvent_identity_example_on_abs() {
        // J_2(3) = 1 and J_1((1/2)·3 + (1/2)·1) = J_1(2) = 1.
        let abs = WeightedL1::abs();
        let j2 = abs.resolvent(2.0, &[3.0]).unwrap();
        assert_eq!(j2, vec![1.0]);
        let inner = lincomb(0.5, &[3.0], 0.5, &j2);
        assert_eq!(abs.resolvent(1.0, &inner).unwrap(), j2);
    }

    #[test]
    fn param_modulus_examples() {
        assert_eq!(resolvent_param_modulus(1, 0, 3), 3);
        assert_eq!(resolvent_param_modulus(1, 0, 0), 0);
        assert_eq!(resolvent_param_modulus(4, 2, 5), 9);
        assert_eq!(resolvent_param_modulus(0, 1, 1), 2);
        assert_eq!(resolvent_param_modulus_ceil(3, 0, 0), 2);
        let abs = WeightedL1::abs();
        let (lhs, rhs) = param_modulus_point(&abs, 1, 0, 3, 3, &[2.0], 1.0, 1.125).unwrap();
        assert!((lhs - 0.125).abs() < 1e-15 && rhs == 0.125);
        assert!(param_modulus_point(&abs, 1, 0, 3, 3, &[2.0], 1.0, 1.2).is_err());
        let r = verify_param_modulus(&abs, 4, 2, 5, 9, &cfg(300));
        assert!(r.passed() && r.evaluations > 0);
    }

    #[test]
    fn floor_log_modulus_fails_when_b_is_not_a_power_of_two() {
        // b = 3, l' = 0, k = 0 gives j = 1; on ∂(3|·|) with x = 6, γ' = 1 and
        // γ = 1.5 the resolvents are 3 and 1.5 apart.
        let op = scaled_abs(3.0);
        let j = resolvent_param_modulus(3, 0, 0);
        assert_eq!(j, 1);
        let (lhs, rhs) = param_modulus_point(&op, 3, 0, 0, j, &[6.0], 1.0, 1.5).unwrap();
        assert!(lhs > rhs);
        let j = resolvent_param_modulus_ceil(3, 0, 0);
        let r = verify_param_modulus(&op, 3, 0, 0, j, &cfg(300));
        assert!(r.passed());
    }

    #[test]
    fn minimal_norm_examples() {
        let abs = WeightedL1::abs();
        assert_eq!(minimal_norm_selection(&abs, &[0.0]).unwrap(), vec![0.0]);
        let id = Linear::identity(2);
        assert_eq!(minimal_norm_selection(&id, &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        let cone = catalog_entry("box_cone").unwrap().op;
        assert_eq!(minimal_norm_selection(cone.as_ref(), &[1.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        for name in ["soft_threshold", "weighted_l1", "box_cone", "identity"] {
            let op = catalog_entry(name).unwrap().op;
            assert!(check_minimal_norm(op.as_ref(), &cfg(200)).passed);
        }
    }

    #[test]
    fn uc_modulus_examples() {
        let double = Linear::scaled_identity("double", 2, 2.0);
        let varpi = |k: u64| 2 * (k + 1);
        let r = uc_modulus_check(&double, &varpi, &[0, 1, 5, 20], &cfg(300));
        assert!(r.passed);
        let abs = WeightedL1::abs();
        let r = uc_modulus_check(&abs, &varpi, &[0, 1, 5], &cfg(300));
        assert!(!r.passed);
    }

    #[test]
    fn range_condition_examples() {
        let steps = [GammaStep { gamma: 1.0, alpha: 1 }, GammaStep { gamma: 0.5, alpha: 2 }];
        let abs = WeightedL1::abs();
        assert!(range_condition_check(&abs, &steps, 5.0, &[0.0], &cfg(200)).passed);
        let m = catalog_entry("psd_skew").unwrap().op;
        let r = range_condition_check(m.as_ref(), &steps, 3.0, &[0.0; 6], &cfg(200));
        assert!(r.passed, "{:#?}", r.checks);
        let tan = catalog_entry("tan").unwrap().op;
        let r = range_condition_check(tan.as_ref(), &steps, 1.0, &[0.0], &cfg(200));
        assert!(!r.passed);
    }

    #[test]
    fn reports_are_deterministic() {
        let op = catalog_entry("psd_skew").unwrap().op;
        let a = check_resolvent_properties(op.as_ref(), &cfg(100));
        let b = check_resolvent_properties(op.as_ref(), &cfg(100));
        assert_eq!(a, b);
    }
}
