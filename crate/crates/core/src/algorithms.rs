//! Proximal point and Moudafi iterations with per-step traces.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oplab::{dist, lincomb, norm, yosida, GammaStep, OpError, Point, SetValuedOperator};

/// Iterates are abandoned once their norm exceeds this.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgoError {
    #[error("step {step}: {source}")]
    Step { step: usize, source: OpError },
    #[error("step {step}: iterate norm {norm:e} exceeds the divergence limit")]
    Diverged { step: usize, norm: f64 },
    #[error("starting point is outside the domain")]
    StartOutsideDomain,
    #[error("bad parameter sequence `{0}`")]
    BadSequence(String),
}

/// A positive parameter sequence with moduli `γ_n > 2^{-α_n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaSeq {
    /// `γ_n = c`.
    Const { c: f64 },
    /// `γ_n = c/(n+1)`.
    Harmonic { c: f64 },
    /// `γ_n = c·q^n`.
    Geometric { c: f64, q: f64 },
}

impl GammaSeq {
    pub fn at(&self, n: usize) -> f64 {
        match *self {
            GammaSeq::Const { c } => c,
            GammaSeq::Harmonic { c } => c / (n as f64 + 1.0),
            GammaSeq::Geometric { c, q } => c * q.powi(n as i32),
        }
    }

    /// The least `α` with `γ_n > 2^{-α}`.
    pub fn modulus(&self, n: usize) -> u32 {
        let g = self.at(n);
        let mut a = 0u32;
        while g <= 2f64.powi(-(a as i32)) && a < 1074 {
            a += 1;
        }
        a
    }

    pub fn step(&self, n: usize) -> GammaStep {
        GammaStep {
            gamma: self.at(n),
            alpha: self.modulus(n),
        }
    }
}

impl fmt::Display for GammaSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaSeq::Const { c } => write!(f, "const:{c}"),
            GammaSeq::Harmonic { c } => write!(f, "harmonic:{c}"),
            GammaSeq::Geometric { c, q } => write!(f, "geometric:{c}:{q}"),
        }
    }
}

impl FromStr for GammaSeq {
    type Err = AlgoError;

    /// `const:c`, `harmonic:c` or `geometric:c:q`, with positive `c` and `q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlgoError::BadSequence(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64, AlgoError> {
            let v: f64 = parts.get(i).ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(bad())
            }
        };
        let seq = match (parts[0], parts.len()) {
            ("const", 2) => GammaSeq::Const { c: num(1)? },
            ("harmonic", 2) => GammaSeq::Harmonic { c: num(1)? },
            ("geometric", 3) => GammaSeq::Geometric {
                c: num(1)?,
                q: num(2)?,
            },
            _ => return Err(bad()),
        };
        Ok(seq)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub n: usize,
    pub x: Point,
    /// `‖x_{n+1} − x_n‖`; absent on the last recorded iterate.
    pub residual: Option<f64>,
    pub dist_to_zero: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub yosida_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub scheme: String,
    pub instance: String,
    pub steps: Vec<TraceStep>,
    /// Error that stopped the run early, if any.
    pub stopped: Option<String>,
}

impl IterationTrace {
    pub fn iterates(&self) -> impl Iterator<Item = &Point> {
        self.steps.iter().map(|s| &s.x)
    }

    pub fn last(&self) -> &Point {
        &self.steps.last().expect("traces start with x0").x
    }
}

fn record(trace: &mut IterationTrace, n: usize, x: Point, zero: Option<&[f64]>) {
    let d = zero.map(|z| dist(&x, z));
    trace.steps.push(TraceStep {
        n,
        x,
        residual: None,
        dist_to_zero: d,
        gamma: None,
        lambda: None,
        yosida_norm: None,
    });
}

/// `x_{n+1} = J_{γ_n} x_n`. Resolvent failures end the run and are stored in
/// `stopped` together with the step index.
pub fn proximal_point(
    op: &dyn SetValuedOperator,
    x0: &[f64],
    gammas: &GammaSeq,
    steps: usize,
    zero: Option<&[f64]>,
) -> Result<IterationTrace, AlgoError> {
    if !op.in_domain(x0) {
        return Err(AlgoError::StartOutsideDomain);
    }
    let mut trace = IterationTrace {
        scheme: "ppa".into(),
        instance: op.name(),
        steps: Vec::with_capacity(steps + 1),
        stopped: None,
    };
    record(&mut trace, 0, x0.to_vec(), zero);
    let mut x = x0.to_vec();
    for n in 0..steps {
        let g = gammas.at(n);
        let next = match op.resolvent(g, &x) {
            Ok(p) => p,
            Err(source) => {
                trace.stopped = Some(AlgoError::Step { step: n, source }.to_string());
                break;
            }
        };
        let cur = trace.steps.last_mut().expect("nonempty");
        cur.residual = Some(dist(&next, &x));
        cur.gamma = Some(g);
        cur.yosida_norm = Some(cur.residual.unwrap_or(0.0) / g);
        let nn = norm(&next);
        if !(nn <= DIVERGENCE_LIMIT) {
            trace.stopped = Some(AlgoError::Diverged { step: n + 1, norm: nn }.to_string());
            break;
        }
        record(&mut trace, n + 1, next.clone(), zero);
        x = next;
    }
    Ok(trace)
}

/// `x_{n+1} = J^S_{μ_n}(x_n + μ_n T_{λ_n} x_n)` with `T_λ` the Yosida
/// approximate of `T`.
pub fn moudafi_iteration(
    t_op: &dyn SetValuedOperator,
    s_op: &dyn SetValuedOperator,
    x0: &[f64],
    mus: &GammaSeq,
    lambdas: &GammaSeq,
    steps: usize,
    zero: Option<&[f64]>,
) -> Result<IterationTrace, AlgoError> {
    if !s_op.in_domain(x0) {
        return Err(AlgoError::StartOutsideDomain);
    }
    let mut trace = IterationTrace {
        scheme: "moudafi".into(),
        instance: format!("T={}, S={}", t_op.name(), s_op.name()),
        steps: Vec::with_capacity(steps + 1),
        stopped: None,
    };
    record(&mut trace, 0, x0.to_vec(), zero);
    let mut x = x0.to_vec();
    for n in 0..steps {
        let (mu, lambda) = (mus.at(n), lambdas.at(n));
        let step = yosida(t_op, lambda, &x)
            .and_then(|ty| Ok((norm(&ty), s_op.resolvent(mu, &lincomb(1.0, &x, mu, &ty))?)));
        let (ty_norm, next) = match step {
            Ok(v) => v,
            Err(source) => {
                trace.stopped = Some(AlgoError::Step { step: n, source }.to_string());
                break;
            }
        };
        let cur = trace.steps.last_mut().expect("nonempty");
        cur.residual = Some(dist(&next, &x));
        cur.gamma = Some(mu);
        cur.lambda = Some(lambda);
        cur.yosida_norm = Some(ty_norm);
        let nn = norm(&next);
        if !(nn <= DIVERGENCE_LIMIT) {
            trace.stopped = Some(AlgoError::Diverged { step: n + 1, norm: nn }.to_string());
            break;
        }
        record(&mut trace, n + 1, next.clone(), zero);
        x = next;
    }
    Ok(trace)
}

/// Summary of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub scheme: String,
    pub instance: String,
    pub iterates: usize,
    pub min_residual: Option<f64>,
    pub max_residual: Option<f64>,
    pub final_residual: Option<f64>,
    pub final_point: Point,
    /// `‖x_{n+1} − z‖ ≤ ‖x_n − z‖ + 1e-10` along the trace; absent without a zero.
    pub fejer_monotone: Option<bool>,
    /// Partial sums of squared residuals.
    pub squared_residual_sum: f64,
    /// First `n` with `x_n` a zero of the operator, when a zero set test was given.
    pub steps_to_zero: Option<usize>,
    pub stopped: Option<String>,
}

pub const FEJER_TOL: f64 = 1e-10;

pub fn trace_report(t: &IterationTrace) -> TraceSummary {
    let res: Vec<f64> = t.steps.iter().filter_map(|s| s.residual).collect();
    let dists: Vec<f64> = t.steps.iter().filter_map(|s| s.dist_to_zero).collect();
    let fejer = (dists.len() == t.steps.len() && !dists.is_empty())
        .then(|| dists.windows(2).all(|w| w[1] <= w[0] + FEJER_TOL));
    TraceSummary {
        scheme: t.scheme.clone(),
        instance: t.instance.clone(),
        iterates: t.steps.len(),
        min_residual: res.iter().copied().reduce(f64::min),
        max_residual: res.iter().copied().reduce(f64::max),
        final_residual: res.last().copied(),
        final_point: t.last().clone(),
        fejer_monotone: fejer,
        squared_residual_sum: res.iter().map(|r| r * r).sum(),
        steps_to_zero: None,
        stopped: t.stopped.clone(),
    }
}

/// [`trace_report`] with the first index at which `0 ∈ A x_n` (up to `tol`).
pub fn trace_report_with_zero_set(
    t: &IterationTrace,
    op: &dyn SetValuedOperator,
    tol: f64,
) -> TraceSummary {
    let mut s = trace_report(t);
    s.steps_to_zero = t
        .steps
        .iter()
        .position(|st| op.membership(&st.x, &vec![0.0; st.x.len()], tol));
    s
}

pub fn summary_to_json(s: &TraceSummary) -> String {
    serde_json::to_string_pretty(s).expect("summaries serialize")
}

pub fn summary_from_json(s: &str) -> Result<TraceSummary, serde_json::Error> {
    serde_json::from_str(s)
}

/// One CSV row per iterate: `n,residual,dist_to_zero,gamma,lambda,yosida_norm,x...`.
pub fn trace_to_csv(t: &IterationTrace) -> String {
    let d = t.steps.first().map_or(0, |s| s.x.len());
    let mut out = String::from("n,residual,dist_to_zero,gamma,lambda,yosida_norm");
    for i in 0..d {
        out.push_str(&format!(",x{i}"));
    }
    out.push('\n');
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:e}"));
    for s in &t.steps {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            s.n,
            opt(s.residual),
            opt(s.dist_to_zero),
            opt(s.gamma),
            opt(s.lambda),
            opt(s.yosida_norm)
        ));
        for v in &s.x {
            out.push_str(&format!(",{v:e}"));
        }
        out.push('\n');
    }
    out
}
