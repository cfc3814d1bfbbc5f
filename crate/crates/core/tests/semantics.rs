mod common;

use common::{naive_check, random_formula, random_model, state_summary, FormulaShape, ModelShape};
use pol_core::formula::{parse_formula, to_nnf, Formula};
use pol_core::model::parse_model;
use pol_core::obsexpr::Word;
use pol_core::reductions::VBOT_MODEL;
use pol_core::semantics::{check, Checker};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn checker_matches_the_definition(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, &ModelShape::small());
        let fs: Vec<Formula> = (0..4).map(|_| random_formula(&mut rng, &FormulaShape::small(), 4)).collect();
        let matrix = Checker::new(&m).check_matrix(&fs);
        for (f, row) in fs.iter().zip(&matrix) {
            for (s, v) in row.iter().enumerate() {
                prop_assert_eq!(*v, naive_check(&m, s, f), "{} at {}", f, s);
            }
        }
    }

    #[test]
    fn nnf_preserves_truth(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, &ModelShape::small());
        let f = random_formula(&mut rng, &FormulaShape::small(), 5);
        let g = to_nnf(&f);
        prop_assert!(g.is_nnf());
        let mut c = Checker::new(&m);
        prop_assert_eq!(c.check_all_states(&f), c.check_all_states(&g));
    }

    #[test]
    fn updates_compose(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, &ModelShape::small());
        let word = |rng: &mut ChaCha8Rng| {
            let len = rng.gen_range(0..3);
            Word::from_letters((0..len).map(|_| if rng.gen() { "a" } else { "b" }))
        };
        let (w, v) = (word(&mut rng), word(&mut rng));
        let at_once = m.update(&w.concat(&v));
        let in_steps = m.update(&w).update(&v);
        prop_assert_eq!(state_summary(&at_once), state_summary(&in_steps));
    }
}

#[test]
fn power_scenario_claims() {
    let file = parse_model(VBOT_MODEL).unwrap();
    let t = file.point.unwrap();
    let m = &file.model;
    for claim in [
        "[l] (K bob ~debris & Khat alice debris)",
        "<d + l> (K bob power & Khat alice debris)",
        "Khat alice debris & Khat bob debris",
        "[u] false",
    ] {
        let f = parse_formula(claim, None).unwrap();
        assert!(check(m, t, &f), "{claim}");
        assert!(naive_check(m, t, &f), "{claim}");
    }
    let f = parse_formula("<l> K alice power", None).unwrap();
    assert!(!check(m, t, &f));
}
