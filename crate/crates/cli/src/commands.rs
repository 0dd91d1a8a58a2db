use std::path::Path;

use anyhow::{bail, Context};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use pmw_core::algorithms::{
    moudafi_iteration, proximal_point, trace_report, trace_report_with_zero_set, trace_to_csv,
    GammaSeq, IterationTrace,
};
use pmw_core::delta::delta_diagnose;
use pmw_core::formula::{dialectica, negative_translation, Formula};
use pmw_core::majorize::{
    bobs_uniform_majorant, check_majorizes, check_resolvent_majorant_with, chi_majorant, chi_sem,
    MajorizeError, ResolventMajorant, Samples,
};
use pmw_core::oplab::{
    catalog, catalog_entry, operator_from_config, verify_instance, CheckConfig, OpRef, Point,
    DEFAULT_GAMMA_GRID,
};
use pmw_core::parse::parse_document;
use pmw_core::real::{canonical_rep, parse_rational, rat_value, unpair_j};
use pmw_core::term::Var;
use pmw_core::FinType;

use crate::settings::{parse_floats, read_kv, Settings};
use crate::{MajorantCmd, OplabCmd, Outcome, RunCmd};

/// A catalog name, or a path to a key-value instance file.
pub fn resolve_instance(name: &str) -> anyhow::Result<(OpRef, Option<bool>)> {
    if let Ok(e) = catalog_entry(name) {
        return Ok((e.op, Some(e.majorizable)));
    }
    let path = Path::new(name);
    if path.is_file() {
        let kv = read_kv(path)?;
        let op = operator_from_config(&kv).with_context(|| format!("instance file {name}"))?;
        return Ok((op, None));
    }
    bail!("unknown instance `{name}` (not in the catalog and not a file)")
}

/// Comma-separated coordinates; a single value is broadcast to `dim`.
fn parse_point(s: &str, dim: usize) -> anyhow::Result<Point> {
    let v = parse_floats(s)?;
    match v.len() {
        1 => Ok(vec![v[0]; dim]),
        n if n == dim => Ok(v),
        n => bail!("point `{s}` has {n} coordinates, instance dimension is {dim}"),
    }
}

fn read_formulas(path: &Path) -> anyhow::Result<Vec<Formula>> {
    let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = parse_document(&src).with_context(|| format!("in {}", path.display()))?;
    Ok(doc.formulas)
}

fn var_list(vs: &[Var]) -> Value {
    vs.iter().map(|v| format!("{}:{}", v.name, v.ty)).collect()
}

pub fn types(src: &str) -> anyhow::Result<Outcome> {
    let ty: FinType = src.parse().with_context(|| format!("type `{src}`"))?;
    let c = ty.classify();
    let hat = ty.hat();
    let report = json!({
        "command": "types",
        "input": src,
        "type": ty.to_string(),
        "x_free": ty.is_x_free(),
        "degree": c.degree,
        "small": c.small,
        "admissible": c.admissible,
        "arity": ty.arity(),
        "hat": hat.to_string(),
        "hat_degree": hat.degree().ok(),
    });
    let deg = c.degree.map_or("n/a".to_string(), |d| d.to_string());
    Ok(Outcome {
        report,
        passed: true,
        summary: format!("{ty}: degree {deg}, hat {hat}"),
    })
}

pub fn translate(path: &Path, nt: bool) -> anyhow::Result<Outcome> {
    let formulas = read_formulas(path)?;
    let items: Vec<Value> = formulas
        .iter()
        .map(|f| {
            if nt {
                json!({ "input": f.to_string(), "output": negative_translation(f).to_string() })
            } else {
                let d = dialectica(f);
                json!({
                    "input": f.to_string(),
                    "exists": var_list(&d.ex_vars),
                    "forall": var_list(&d.univ_vars),
                    "matrix": d.matrix.to_string(),
                    "output": d.to_formula().to_string(),
                })
            }
        })
        .collect();
    let mode = if nt { "negative" } else { "dialectica" };
    Ok(Outcome {
        summary: format!("{} formulas translated ({mode})", items.len()),
        report: json!({ "command": "translate", "mode": mode, "formulas": items }),
        passed: true,
    })
}

pub fn delta(path: &Path) -> anyhow::Result<Outcome> {
    let formulas = read_formulas(path)?;
    let mut recognized = 0;
    let items: Vec<Value> = formulas
        .iter()
        .map(|f| match delta_diagnose(f) {
            Ok(d) => {
                recognized += 1;
                let bounds: Vec<Value> = d
                    .b_vars
                    .iter()
                    .map(|(b, t)| json!({ "var": format!("{}:{}", b.name, b.ty), "bound": t.to_string() }))
                    .collect();
                json!({
                    "input": f.to_string(),
                    "recognized": true,
                    "a_vars": var_list(&d.a_vars),
                    "b_vars": bounds,
                    "c_vars": var_list(&d.c_vars),
                    "matrix": d.matrix.to_string(),
                    "skolem": pmw_core::delta::skolemize_delta(&d).to_string(),
                })
            }
            Err(why) => json!({ "input": f.to_string(), "recognized": false, "reason": why.to_string() }),
        })
        .collect();
    Ok(Outcome {
        summary: format!("{recognized}/{} formulas recognized", items.len()),
        report: json!({ "command": "delta", "formulas": items }),
        passed: true,
    })
}

pub fn real_canon(value: &str, prec: u32) -> anyhow::Result<Outcome> {
    let r = parse_rational(value)?;
    let code = canonical_rep(&r)?;
    let mut passed = true;
    let mut prev = None;
    let rows: Vec<Value> = (0..=prec)
        .map(|n| {
            let c = code.code(n);
            let (a, b) = unpair_j(&c.0);
            let q = rat_value(&c);
            let bound = BigRational::new(BigInt::from(1), BigInt::from(2u8) << n);
            let accurate = (&q - &r) <= bound && (&r - &q) <= bound;
            let monotone = prev.as_ref().is_none_or(|p| *p <= c.0);
            passed &= accurate && monotone;
            prev = Some(c.0.clone());
            json!({
                "n": n,
                "code": c.0.to_string(),
                "pair": [a.to_string(), b.to_string()],
                "value": q.to_string(),
                "within_bound": accurate,
            })
        })
        .collect();
    Ok(Outcome {
        summary: format!("(r)∘ of {r} up to precision {prec}"),
        report: json!({ "command": "real canon", "input": r.to_string(), "codes": rows }),
        passed,
    })
}

pub fn majorant(cmd: MajorantCmd, s: &Settings) -> anyhow::Result<Outcome> {
    match cmd {
        MajorantCmd::Resolvent {
            n,
            m,
            l,
            k,
            instance,
            gamma_samples,
            point_samples,
        } => {
            let given = match (n, m, l, k) {
                (Some(n), Some(m), Some(l), Some(k)) => Some(ResolventMajorant { n, m, l, k }),
                (None, None, None, None) => None,
                _ => bail!("give all of --n --m --l --k, or none to derive them per instance"),
            };
            let ops: Vec<OpRef> = match &instance {
                Some(name) => vec![resolve_instance(name)?.0],
                None => catalog().into_iter().filter(|e| e.majorizable).map(|e| e.op).collect(),
            };
            majorant_resolvent(&ops, given, gamma_samples, point_samples, s.seed)
        }
        MajorantCmd::Bobs {
            instance,
            grid,
            samples,
        } => {
            let (op, expected) = resolve_instance(&instance)?;
            let grid: Vec<u64> = grid
                .split(',')
                .map(|p| p.trim().parse().with_context(|| format!("grid entry `{p}`")))
                .collect::<anyhow::Result<_>>()?;
            let r = bobs_uniform_majorant(op.as_ref(), &grid, samples, s.seed);
            let passed = expected.is_none_or(|e| e == r.is_bounded());
            let summary = match &r {
                pmw_core::majorize::BobsMajorant::Bounded { rule, .. } => format!("{}: bounded, {rule}", op.name()),
                pmw_core::majorize::BobsMajorant::NotBounded { radius, probe } => {
                    format!("{}: NotBounded (sup ≥ {probe:e} at radius {radius})", op.name())
                }
            };
            Ok(Outcome {
                report: json!({
                    "command": "majorant bobs",
                    "instance": op.name(),
                    "expected_bounded": expected,
                    "result": serde_json::to_value(&r)?,
                }),
                passed,
                summary,
            })
        }
    }
}

pub fn majorant_resolvent(
    ops: &[OpRef],
    given: Option<ResolventMajorant>,
    gamma_samples: usize,
    point_samples: usize,
    seed: u64,
) -> anyhow::Result<Outcome> {
    let mut passed = true;
    let mut checked = Vec::new();
    let mut skipped = Vec::new();
    let mut chi = Vec::new();
    for op in ops {
        match check_resolvent_majorant_with(op.clone(), given, gamma_samples, point_samples, seed) {
            Ok(r) => {
                passed &= r.check.holds_on_samples;
                checked.push(serde_json::to_value(&r)?);
            }
            Err(e @ MajorizeError::NoWitnesses(..)) => {
                skipped.push(json!({ "instance": op.name(), "reason": e.to_string() }));
            }
            Err(e) => return Err(e.into()),
        }
        let ty = FinType::curried(FinType::Zero, &[FinType::X, FinType::X]);
        let samples = Samples::standard(op.dim(), 40, seed, &[]);
        let c = check_majorizes(&chi_majorant().value, &chi_sem(op.clone(), 1e-12), &ty, &samples)?;
        passed &= c.holds_on_samples;
        chi.push(json!({ "instance": op.name(), "check": serde_json::to_value(&c)? }));
    }
    let rule = given.map(|w| w.rule());
    Ok(Outcome {
        summary: format!(
            "resolvent majorant on {} instances ({} skipped), χ majorant on {}",
            checked.len(),
            skipped.len(),
            chi.len()
        ),
        report: json!({
            "command": "majorant resolvent",
            "rule": rule,
            "chi_rule": chi_majorant().rule,
            "instances": checked,
            "skipped": skipped,
            "chi": chi,
        }),
        passed,
    })
}

pub fn check_config(s: &Settings, samples: Option<usize>, grid: Option<&str>, radius: Option<f64>) -> anyhow::Result<CheckConfig> {
    let gamma_grid = match grid {
        Some(g) => parse_floats(g)?,
        None => s.gamma_grid.clone().unwrap_or_else(|| DEFAULT_GAMMA_GRID.to_vec()),
    };
    if gamma_grid.iter().any(|g| !(*g > 0.0)) {
        bail!("γ-grid entries must be positive");
    }
    Ok(CheckConfig {
        samples: samples.or(s.samples).unwrap_or(1000),
        seed: s.seed,
        tol: s.tol,
        gamma_grid,
        radius: radius.or(s.radius).unwrap_or(10.0),
    })
}

pub fn oplab(cmd: OplabCmd, s: &Settings) -> anyhow::Result<Outcome> {
    match cmd {
        OplabCmd::Verify {
            instance,
            samples,
            gamma_grid,
            radius,
        } => {
            let (op, _) = resolve_instance(&instance)?;
            let cfg = check_config(s, samples, gamma_grid.as_deref(), radius)?;
            let r = verify_instance(op.as_ref(), &cfg);
            let worst = r.resolvent.worst_slack();
            Ok(Outcome {
                summary: format!(
                    "{}: {} samples, γ used {:?}, refused {:?}, worst resolvent slack {}",
                    r.instance,
                    cfg.samples,
                    r.resolvent.gammas_used,
                    r.resolvent.gammas_refused,
                    worst.map_or("n/a".into(), |w| format!("{w:e}"))
                ),
                passed: r.passed,
                report: json!({
                    "command": "oplab verify",
                    "config": serde_json::to_value(&cfg)?,
                    "report": serde_json::to_value(&r)?,
                }),
            })
        }
        OplabCmd::List => {
            let entries: Vec<Value> = catalog()
                .iter()
                .map(|e| {
                    json!({
                        "name": e.name,
                        "description": e.description,
                        "dim": e.op.dim(),
                        "class": serde_json::to_value(e.op.class()).expect("class serializes"),
                        "majorizable": e.majorizable,
                        "single_valued": e.op.is_single_valued(),
                        "lipschitz": e.op.lipschitz(),
                    })
                })
                .collect();
            Ok(Outcome {
                summary: format!("{} catalog instances", entries.len()),
                report: json!({ "command": "oplab list", "instances": entries }),
                passed: true,
            })
        }
    }
}

fn gamma_seq(s: &str) -> anyhow::Result<GammaSeq> {
    s.parse().with_context(|| format!("parameter sequence `{s}`"))
}

fn write_csv(path: Option<&Path>, t: &IterationTrace) -> anyhow::Result<()> {
    if let Some(p) = path {
        std::fs::write(p, trace_to_csv(t)).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn start_point(x0: Option<&str>, op: &OpRef, seed: u64) -> anyhow::Result<Point> {
    match x0 {
        Some(v) => parse_point(v, op.dim()),
        None => Ok(op.sample_domain(&mut pmw_core::oplab::sample_rng(seed, 0), 10.0)),
    }
}

pub fn run(cmd: RunCmd, s: &Settings) -> anyhow::Result<Outcome> {
    match cmd {
        RunCmd::Ppa {
            instance,
            gamma,
            steps,
            x0,
            zero,
            csv,
        } => {
            let (op, _) = resolve_instance(&instance)?;
            let seq = gamma_seq(&gamma)?;
            let x0 = start_point(x0.as_deref(), &op, s.seed)?;
            let zero = zero.map(|z| parse_point(&z, op.dim())).transpose()?;
            let t = proximal_point(op.as_ref(), &x0, &seq, steps, zero.as_deref())?;
            write_csv(csv.as_deref(), &t)?;
            let summary = trace_report_with_zero_set(&t, op.as_ref(), s.tol);
            let well_defined = t.steps.windows(2).all(|w| {
                let g = w[0].gamma.expect("taken steps record γ");
                let u: Point = w[0].x.iter().zip(&w[1].x).map(|(a, b)| (a - b) / g).collect();
                op.membership(&w[1].x, &u, s.tol.max(1e-8))
            });
            let passed = summary.stopped.is_none() && summary.fejer_monotone != Some(false) && well_defined;
            Ok(Outcome {
                summary: format!(
                    "ppa on {}: {} iterates, final residual {:?}, steps to zero {:?}",
                    t.instance, summary.iterates, summary.final_residual, summary.steps_to_zero
                ),
                report: json!({
                    "command": "run ppa",
                    "gamma": seq.to_string(),
                    "moduli": (0..steps.min(8)).map(|n| seq.modulus(n)).collect::<Vec<_>>(),
                    "well_defined": well_defined,
                    "summary": serde_json::to_value(&summary)?,
                    "trace": serde_json::to_value(&t)?,
                }),
                passed,
            })
        }
        RunCmd::Moudafi {
            t_instance,
            s_instance,
            mu,
            lambda,
            steps,
            x0,
            zero,
            csv,
        } => {
            let (t_op, _) = resolve_instance(&t_instance)?;
            let (s_op, _) = resolve_instance(&s_instance)?;
            if t_op.dim() != s_op.dim() {
                bail!("T and S live in different dimensions");
            }
            let (mus, lambdas) = (gamma_seq(&mu)?, gamma_seq(&lambda)?);
            let x0 = start_point(x0.as_deref(), &s_op, s.seed)?;
            let zero = zero.map(|z| parse_point(&z, s_op.dim())).transpose()?;
            let t = moudafi_iteration(t_op.as_ref(), s_op.as_ref(), &x0, &mus, &lambdas, steps, zero.as_deref())?;
            write_csv(csv.as_deref(), &t)?;
            let summary = trace_report(&t);
            Ok(Outcome {
                summary: format!(
                    "moudafi with {}: {} iterates, final residual {:?}",
                    t.instance, summary.iterates, summary.final_residual
                ),
                passed: summary.stopped.is_none(),
                report: json!({
                    "command": "run moudafi",
                    "mu": mus.to_string(),
                    "lambda": lambdas.to_string(),
                    "summary": serde_json::to_value(&summary)?,
                    "trace": serde_json::to_value(&t)?,
                }),
            })
        }
    }
}

pub fn report(path: &Path) -> anyhow::Result<Outcome> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let trace_v = v.get("trace").cloned().unwrap_or(v);
    let t: IterationTrace = serde_json::from_value(trace_v).context("not an iteration trace")?;
    if t.steps.is_empty() {
        bail!("trace has no iterates");
    }
    let summary = trace_report(&t);
    Ok(Outcome {
        summary: format!(
            "{} on {}: {} iterates, residuals in [{:?}, {:?}]",
            t.scheme, t.instance, summary.iterates, summary.min_residual, summary.max_residual
        ),
        passed: summary.stopped.is_none() && summary.fejer_monotone != Some(false),
        report: json!({ "command": "report", "summary": serde_json::to_value(&summary)? }),
    })
}
