mod common;

use common::{naive_pal_check, random_formula, random_model, FormulaShape, ModelShape};
use pol_core::model::{EpistemicModel, Partition};
use pol_core::pal::{enrich_model, pal_check, translate, words_of, PalFormula};
use pol_core::semantics::Checker;
use pol_core::Symbol;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_pal<R: Rng>(rng: &mut R, depth: usize) -> PalFormula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..8) {
            0 => PalFormula::Top,
            1 => PalFormula::Bottom,
            _ => PalFormula::atom(["p", "q"].choose(rng).unwrap()),
        };
    }
    let sub = |rng: &mut R| random_pal(rng, depth - 1);
    let i = *["i", "j"].choose(rng).unwrap();
    match rng.gen_range(0..8) {
        0 => PalFormula::not(sub(rng)),
        1 => PalFormula::and(sub(rng), sub(rng)),
        2 => PalFormula::or(sub(rng), sub(rng)),
        3 => PalFormula::implies(sub(rng), sub(rng)),
        4 => PalFormula::know(i, sub(rng)),
        5 => PalFormula::poss(i, sub(rng)),
        6 => PalFormula::announce(sub(rng), sub(rng)),
        _ => PalFormula::announce_dia(sub(rng), sub(rng)),
    }
}

fn random_epistemic(seed: u64) -> EpistemicModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = ModelShape { max_states: 4, ..ModelShape::small() };
    random_model(&mut rng, &shape).skeleton().clone()
}

proptest! {
    #[test]
    fn translation_preserves_truth(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, &ModelShape::small());
        let shape = FormulaShape { words_only: true, ..FormulaShape::small() };
        let f = random_formula(&mut rng, &shape, 5);
        let tr = translate(&f).unwrap();
        let enriched = enrich_model(&m, &words_of(&f).unwrap());
        let mut c = Checker::new(&m);
        for s in 0..m.len() {
            prop_assert_eq!(c.check(s, &f), pal_check(&enriched, s, &tr), "{} at {}", f, s);
        }
    }

    #[test]
    fn live_set_evaluation_matches_submodels(seed in any::<u64>()) {
        let m = random_epistemic(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let f = random_pal(&mut rng, 4);
        for s in 0..m.len() {
            prop_assert_eq!(pal_check(&m, s, &f), naive_pal_check(&m, s, &f), "{} at {}", f, s);
        }
    }

    /// `[ψ!][χ!]φ ↔ [ψ ∧ [ψ!]χ !]φ`.
    #[test]
    fn successive_announcements_compose(seed in any::<u64>()) {
        let m = random_epistemic(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa11);
        let (psi, chi, phi) = (random_pal(&mut rng, 2), random_pal(&mut rng, 2), random_pal(&mut rng, 2));
        let lhs = PalFormula::announce(psi.clone(), PalFormula::announce(chi.clone(), phi.clone()));
        let joint = PalFormula::and(psi.clone(), PalFormula::announce(psi, chi));
        let rhs = PalFormula::announce(joint, phi);
        for s in 0..m.len() {
            prop_assert_eq!(pal_check(&m, s, &lhs), pal_check(&m, s, &rhs));
        }
    }
}

/// Announcing `p` and then an epistemic `χ` is not announcing `p ∧ χ`.
#[test]
fn successive_announcements_are_not_conjunctions() {
    let sym = |x: &str| Symbol::from(x);
    let m = EpistemicModel::from_parts(
        vec![sym("i")],
        vec![sym("p")],
        vec![sym("s"), sym("t")],
        vec![[sym("p")].into(), Default::default()],
        vec![Partition::from_cells(2, vec![vec![0, 1]])],
    );
    let chi = PalFormula::poss("i", PalFormula::not(PalFormula::atom("p")));
    let steps = PalFormula::announce(PalFormula::atom("p"), PalFormula::announce(chi.clone(), PalFormula::Bottom));
    let joint = PalFormula::announce(PalFormula::and(PalFormula::atom("p"), chi), PalFormula::Bottom);
    assert!(pal_check(&m, 0, &steps));
    assert!(!pal_check(&m, 0, &joint));
    assert_eq!(naive_pal_check(&m, 0, &steps), pal_check(&m, 0, &steps));
    assert_eq!(naive_pal_check(&m, 0, &joint), pal_check(&m, 0, &joint));
}
