use std::time::Instant;

use pmw_core::formula::{dialectica, negative_translation, NameGen};
use pmw_core::model::FiniteModel;
use pmw_core::semantics::{check_corpus, generate_corpus, CorpusConfig};

#[test]
fn corpus_agrees_on_small_models() {
    let cfg = CorpusConfig::default();
    let corpus = generate_corpus(&cfg);
    assert!(corpus.len() >= 30, "only {} formulas", corpus.len());
    for n in [1, 2] {
        let start = Instant::now();
        let m = FiniteModel::new(n);
        for (f, r) in corpus.iter().zip(check_corpus(&corpus, &m)) {
            let r = r.unwrap_or_else(|e| panic!("{f}: {e}"));
            assert!(r.agree, "{r:?}");
        }
        eprintln!("N={n}: {:?}", start.elapsed());
    }
}

#[test]
fn translations_are_well_typed_and_fresh() {
    let cfg = CorpusConfig {
        count: 300,
        max_cost: u64::MAX,
        max_witness_degree: 10,
        seed: 99,
        ..CorpusConfig::default()
    };
    for f in generate_corpus(&cfg) {
        let nt = negative_translation(&f);
        nt.check_types().unwrap();
        let d = dialectica(&f);
        d.matrix.check_types().unwrap();
        assert!(d.matrix.is_quantifier_free());
        let input = f.all_names();
        let introduced = d
            .ex_vars
            .iter()
            .chain(d.univ_vars.iter())
            .filter(|v| !f.bound_names().contains(&v.name));
        for v in introduced {
            assert!(!input.contains(&v.name), "{} clashes in {f}", v.name);
        }
        let mut gen = NameGen::avoiding(&f);
        let _ = f.rename_apart(&mut gen);
    }
}
