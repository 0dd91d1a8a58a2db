//! `pmw suite`: every check family on one seed, in a single report.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde_json::{json, Value};

use pmw_core::algorithms::{proximal_point, trace_report, trace_report_with_zero_set, GammaSeq};
use pmw_core::majorize::bobs_uniform_majorant;
use pmw_core::model::FiniteModel;
use pmw_core::oplab::{
    catalog, catalog_entry, resolvent_param_modulus, verify_instance, verify_param_modulus,
    CheckConfig, OperatorClass, DEFAULT_GAMMA_GRID,
};
use pmw_core::real::{canonical_code, pair_j, rat_value};
use pmw_core::semantics::{check_corpus, generate_corpus, CorpusConfig};

use crate::commands::majorant_resolvent;
use crate::settings::Settings;
use crate::Outcome;

fn section(name: &str, passed: bool, detail: Value) -> (String, Value) {
    (name.to_string(), json!({ "passed": passed, "detail": detail }))
}

fn pairing() -> (String, Value) {
    let mut parity_failures = 0u64;
    let mut seen = std::collections::BTreeSet::new();
    for n in 0u64..=200 {
        for m in 0u64..=200 {
            let q = (n + m) * (n + m) + 3 * n + m;
            if q % 2 != 0 {
                parity_failures += 1;
            }
            seen.insert(pair_j(&BigUint::from(n), &BigUint::from(m)));
        }
    }
    let injective = seen.len() == 201 * 201;
    section(
        "pairing",
        parity_failures == 0 && injective,
        json!({ "pairs": 201 * 201, "parity_failures": parity_failures, "injective": injective }),
    )
}

fn real_codes() -> (String, Value) {
    let rs: Vec<BigRational> = [(0, 1), (1, 3), (1, 2), (1, 1), (7, 5), (10, 1)]
        .iter()
        .map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
        .collect();
    let mut violations = 0u64;
    for n in 0..=16u32 {
        let bound = BigRational::new(BigInt::from(1), BigInt::from(2u8) << n);
        let codes: Vec<_> = rs.iter().map(|r| canonical_code(r, n).expect("nonnegative")).collect();
        for (r, c) in rs.iter().zip(&codes) {
            let q = rat_value(c);
            if &q - r > bound || r - &q > bound {
                violations += 1;
            }
            if n < 16 && c.0 > canonical_code(r, n + 1).expect("nonnegative").0 {
                violations += 1;
            }
        }
        // `rs` is sorted, so codes and values must be too.
        for w in codes.windows(2) {
            if w[0].0 > w[1].0 || rat_value(&w[0]) > rat_value(&w[1]) {
                violations += 1;
            }
        }
    }
    section("real_codes", violations == 0, json!({ "violations": violations }))
}

fn translation(seed: u64) -> (String, Value) {
    let cfg = CorpusConfig {
        seed,
        model_size: 3,
        ..CorpusConfig::default()
    };
    let corpus = generate_corpus(&cfg);
    let mut rows = Vec::new();
    let mut passed = corpus.len() >= 30;
    for n in [1, 2, 3] {
        let m = FiniteModel::new(n);
        let results = check_corpus(&corpus, &m);
        let agree = results.iter().filter(|r| r.as_ref().is_ok_and(|r| r.agree)).count();
        passed &= agree == corpus.len();
        rows.push(json!({ "model_size": n, "formulas": corpus.len(), "agree": agree }));
    }
    section("translation", passed, Value::Array(rows))
}

fn resolvent_suite(seed: u64, samples: usize, tol: f64) -> (String, Value) {
    let mut grid = DEFAULT_GAMMA_GRID.to_vec();
    grid.extend([8.0, 16.0]);
    let cfg = CheckConfig {
        samples,
        seed,
        tol,
        gamma_grid: grid,
        ..CheckConfig::default()
    };
    let mut passed = true;
    let rows: Vec<Value> = catalog()
        .iter()
        .map(|e| {
            let r = verify_instance(e.op.as_ref(), &cfg);
            passed &= r.passed;
            json!({
                "instance": e.name,
                "passed": r.passed,
                "gammas_used": r.resolvent.gammas_used,
                "worst_resolvent_slack": r.resolvent.worst_slack(),
                "minimal_norm_passed": r.minimal_norm.as_ref().map(|m| m.passed),
            })
        })
        .collect();
    section("operators", passed, Value::Array(rows))
}

fn param_modulus(seed: u64, samples: usize, tol: f64) -> (String, Value) {
    let cfg = CheckConfig {
        samples,
        seed,
        tol,
        ..CheckConfig::default()
    };
    let mut passed = true;
    let mut rows = Vec::new();
    for name in ["soft_threshold", "identity", "psd_skew"] {
        let op = catalog_entry(name).expect("catalog instance").op;
        let mut evaluations = 0;
        let mut violations = 0;
        for b in [1, 2, 4] {
            for lp in 0..=2 {
                for k in 0..=6 {
                    let j = resolvent_param_modulus(b, lp, k);
                    let r = verify_param_modulus(op.as_ref(), b, lp, k, j, &cfg);
                    evaluations += r.evaluations;
                    violations += r.violations;
                }
            }
        }
        passed &= violations == 0;
        rows.push(json!({ "instance": name, "evaluations": evaluations, "violations": violations }));
    }
    section("param_modulus", passed, Value::Array(rows))
}

fn bobs(seed: u64) -> (String, Value) {
    let grid: Vec<u64> = vec![0, 1, 2, 4, 8, 16];
    let mut passed = true;
    let rows: Vec<Value> = catalog()
        .iter()
        .map(|e| {
            let r = bobs_uniform_majorant(e.op.as_ref(), &grid, 200, seed);
            passed &= r.is_bounded() == e.majorizable;
            json!({ "instance": e.name, "result": serde_json::to_value(&r).expect("serializes") })
        })
        .collect();
    section("bobs", passed, Value::Array(rows))
}

fn proximal(seed: u64) -> (String, Value) {
    let one = GammaSeq::Const { c: 1.0 };
    let abs = catalog_entry("soft_threshold").expect("catalog instance").op;
    let t = proximal_point(abs.as_ref(), &[3.5], &one, 10, Some(&[0.0])).expect("3.5 is in the domain");
    let to_zero = trace_report_with_zero_set(&t, abs.as_ref(), 1e-12).steps_to_zero;
    let mut passed = to_zero == Some(4);
    let mut rows = Vec::new();
    for e in catalog() {
        let (Some(z), OperatorClass::Monotone) = (e.op.known_zero(), e.op.class()) else {
            continue;
        };
        let gamma = if e.op.resolvent(1.0, &z).is_ok() { 1.0 } else { 0.5 };
        let x0 = e.op.sample_domain(&mut pmw_core::oplab::sample_rng(seed, 7), 10.0);
        let t = proximal_point(e.op.as_ref(), &x0, &GammaSeq::Const { c: gamma }, 200, Some(&z))
            .expect("sampled start is in the domain");
        let s = trace_report(&t);
        let ok = s.stopped.is_none() && s.fejer_monotone == Some(true);
        passed &= ok;
        rows.push(json!({ "instance": e.name, "gamma": gamma, "fejer": s.fejer_monotone, "final_residual": s.final_residual }));
    }
    section("proximal_point", passed, json!({ "abs_steps_to_zero": to_zero, "fejer": rows }))
}

pub fn run(s: &Settings, samples: usize) -> anyhow::Result<Outcome> {
    let maj = majorant_resolvent(
        &catalog().into_iter().filter(|e| e.majorizable).map(|e| e.op).collect::<Vec<_>>(),
        None,
        40,
        40,
        s.seed,
    )?;
    let sections = [
        pairing(),
        real_codes(),
        translation(s.seed),
        resolvent_suite(s.seed, samples, s.tol),
        param_modulus(s.seed, samples, s.tol),
        section("majorant", maj.passed, maj.report),
        bobs(s.seed),
        proximal(s.seed),
    ];
    let failed: Vec<&str> = sections
        .iter()
        .filter(|(_, v)| v["passed"] != Value::Bool(true))
        .map(|(k, _)| k.as_str())
        .collect();
    let summary = if failed.is_empty() {
        format!("suite: all {} sections passed", sections.len())
    } else {
        format!("suite: failed sections {failed:?}")
    };
    let passed = failed.is_empty();
    let map: serde_json::Map<String, Value> = sections.into_iter().collect();
    Ok(Outcome {
        report: json!({ "command": "suite", "samples": samples, "tol": s.tol, "sections": map }),
        passed,
        summary,
    })
}
