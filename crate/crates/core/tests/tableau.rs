mod common;

use common::{naive_check, random_formula, FormulaShape};
use pol_core::formula::{parse_formula, Formula};
use pol_core::obsexpr::ObsExpr;
use pol_core::oracle::{bounded_sat, enumerate_formulas, small_exprs, CorpusSpec, OracleResult, SearchBounds};
use pol_core::tableau::{solve, solve_with, SolveOptions, Verdict};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SAT witnesses satisfy `f`; UNSAT leaves nothing for the oracle to find.
fn assert_agrees_with_oracle(f: &Formula) {
    let r = solve(f).expect("no internal error");
    let oracle = bounded_sat(f, &SearchBounds::for_formula(f));
    match (&r.verdict, oracle) {
        (Verdict::Sat(m), _) => {
            m.model.validate().expect("well-formed witness");
            assert!(naive_check(&m.model, m.point, f), "witness fails {f}");
        }
        (Verdict::Unsat, Ok(OracleResult::Sat(m))) => {
            panic!("UNSAT but the oracle found\n{}for {f}", m.model.to_file(Some(m.point)))
        }
        (Verdict::Unsat, _) => {}
        (Verdict::Indeterminate(why), _) => panic!("{f}: {why}"),
    }
}

#[test]
fn small_corpus_agrees_with_the_oracle() {
    let mut exprs = small_exprs(&["a", "b"]);
    exprs.push(ObsExpr::Epsilon);
    let spec = CorpusSpec {
        max_size: 5,
        atoms: vec!["p".into()],
        agents: vec!["i".into(), "j".into()],
        exprs,
        top: true,
        negative_literals: true,
    };
    let corpus = enumerate_formulas(&spec);
    assert!(corpus.len() > 1000);
    for f in &corpus {
        assert_agrees_with_oracle(f);
    }
}

#[test]
fn known_verdicts() {
    for (text, sat) in [
        ("Khat i <a> p & <a> K i ~p", false),
        ("<a> p & [a] ~p", false),
        ("<a + b> p & [a] ~p", true),
        ("<a> true & <b> true", true),
        ("[a] false & <a.b> true", false),
        ("K i p & Khat i ~p", false),
        ("Khat i p & Khat i ~p", true),
        ("<a> K i p & ~p & K i <a> true", false),
        ("<a> K i p & Khat i ~p", true),
        ("<eps> p & ~p", false),
        ("[0] false", true),
        ("<0> true", false),
    ] {
        let f = parse_formula(text, None).unwrap();
        let r = solve(&f).unwrap();
        assert_eq!(r.is_sat(), sat, "{text}");
        assert_eq!(r.is_unsat(), !sat, "{text}");
        assert_agrees_with_oracle(&f);
    }
}

#[test]
fn search_is_deterministic() {
    let f = parse_formula("Khat i <a + b> (p & Khat j ~p) & <a> K j p & [b] K i p", None).unwrap();
    let runs: Vec<_> = (0..3).map(|_| solve(&f).unwrap()).collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn caps_give_indeterminate() {
    let f = parse_formula("Khat i <a> p & Khat i <b> p & <a + b> K i ~p", None).unwrap();
    let opts = SolveOptions {
        max_terms: 3,
        ..SolveOptions::default()
    };
    assert!(matches!(solve_with(&f, &opts).unwrap().verdict, Verdict::Indeterminate(_)));
}

#[test]
fn trace_names_rules() {
    let f = parse_formula("Khat i <a> p & <a> K i ~p", None).unwrap();
    let opts = SolveOptions {
        trace: true,
        ..SolveOptions::default()
    };
    let r = solve_with(&f, &opts).unwrap();
    assert!(r.is_unsat());
    assert!(r.trace.iter().all(|l| l.starts_with("RULE ")));
    for rule in ["Init", "AND", "Knowledge", "Diamond Project", "Clash"] {
        assert!(r.trace.iter().any(|l| l.starts_with(&format!("RULE {rule} |"))), "{rule}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_formulas_agree_with_the_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = FormulaShape { atoms: vec!["p"], ..FormulaShape::small() };
        let f = random_formula(&mut rng, &shape, 4);
        assert_agrees_with_oracle(&f);
    }

    #[test]
    fn excluded_middle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, &FormulaShape::small(), 3);
        prop_assert!(solve(&Formula::or(f.clone(), Formula::not(f.clone()))).unwrap().is_sat());
        prop_assert!(solve(&Formula::and(f.clone(), Formula::not(f))).unwrap().is_unsat());
    }
}
