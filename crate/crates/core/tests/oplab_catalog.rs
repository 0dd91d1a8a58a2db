use pmw_core::oplab::{
    catalog, check_operator_class, verify_instance, CheckConfig, ClassSpec, Norm,
};

fn cfg() -> CheckConfig {
    let mut c = CheckConfig {
        samples: 400,
        seed: 11,
        ..CheckConfig::default()
    };
    c.gamma_grid.extend([8.0, 16.0]);
    c
}

#[test]
fn every_catalog_instance_verifies() {
    for e in catalog() {
        let r = verify_instance(e.op.as_ref(), &cfg());
        assert!(
            r.passed,
            "{}: {}",
            e.name,
            serde_json::to_string_pretty(&r).unwrap()
        );
    }
}

#[test]
fn separable_subdifferentials_are_accretive_in_every_lp_norm() {
    for name in ["soft_threshold", "weighted_l1", "box_cone"] {
        let op = pmw_core::oplab::catalog_entry(name).unwrap().op;
        for norm in [Norm::L1, Norm::L2, Norm::LInf] {
            let r = check_operator_class(op.as_ref(), ClassSpec::Accretive { norm }, &cfg());
            assert!(r.passed(), "{name} {norm:?}: {r:?}");
        }
    }
}

#[test]
fn declared_dimensions_match_samples() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for e in catalog() {
        for _ in 0..20 {
            let x = e.op.sample_domain(&mut rng, 3.0);
            assert_eq!(x.len(), e.op.dim());
            assert!(e.op.in_domain(&x), "{}", e.name);
        }
    }
}
