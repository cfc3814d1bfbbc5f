mod common;

use common::{naive_check, qbf_truth_table, random_qbf};
use pol_core::formula::Signature;
use pol_core::model::parse_model;
use pol_core::reductions::{
    gen_qbf, gen_tiling, gen_vbot, qbf_eval, tiling_eval, tiling_solution, tiling_witness,
    QbfInstance, Quantifier, Tile, TilingError, TilingInstance, TILING_AGENTS, TILING_LETTERS, VBOT_MODEL,
};
use pol_core::semantics::{check, Checker};
use pol_core::tableau::solve;
use pol_core::Symbol;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn game_tree_matches_truth_table(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_qbf(&mut rng, 4, 5);
        prop_assert_eq!(qbf_eval(&q), qbf_truth_table(&q), "{}", q);
    }

    #[test]
    fn qbf_text_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_qbf(&mut rng, 4, 5);
        prop_assert_eq!(QbfInstance::parse(&q.to_string()).unwrap(), q);
    }
}

#[test]
fn qbf_formula_is_satisfiable_iff_true() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut seen = [0usize; 2];
    for _ in 0..40 {
        let q = random_qbf(&mut rng, 2, 3);
        let truth = qbf_eval(&q);
        let r = solve(&gen_qbf(&q)).unwrap();
        assert_eq!(r.is_sat(), truth, "{q}");
        assert_eq!(r.is_unsat(), !truth, "{q}");
        seen[truth as usize] += 1;
    }
    assert!(seen[0] > 0 && seen[1] > 0);
}

#[test]
fn qbf_formula_size_is_polynomial() {
    // With n variables and n clauses the formula grows roughly
    // quadratically; a cubic ceiling catches exponential growth.
    for n in 1..=8 {
        let clauses = (1..=n as i32).map(|v| vec![v, -(v % n as i32 + 1)]).collect();
        let q = QbfInstance::with_default_names(&vec![Quantifier::Forall; n], clauses).unwrap();
        let size = gen_qbf(&q).size();
        assert!(size <= 40 * q.size().pow(3), "n = {n}: {size}");
    }
}

fn random_tiling(rng: &mut ChaCha8Rng) -> TilingInstance {
    let colours = ["x", "y"];
    let k = rng.gen_range(1..=3);
    let tiles = (0..k)
        .map(|_| {
            let mut pick = || *colours.choose(rng).unwrap();
            Tile::new(pick(), pick(), pick(), pick())
        })
        .collect();
    TilingInstance::new(tiles, 1).unwrap()
}

/// Every assignment of tiles to the 2×2 square, origin fixed.
fn tiling_brute_force(t: &TilingInstance) -> bool {
    let k = t.tiles().len();
    let tiles = t.tiles();
    (0..k.pow(3)).any(|code| {
        let cell = [0, code % k, code / k % k, code / (k * k)];
        let at = |x: usize, y: usize| &tiles[cell[2 * y + x]];
        (0..2).all(|y| at(0, y).right == at(1, y).left) && (0..2).all(|x| at(x, 0).up == at(x, 1).down)
    })
}

#[test]
fn tiling_search_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let t = random_tiling(&mut rng);
        assert_eq!(tiling_eval(&t).unwrap(), tiling_brute_force(&t), "{t}");
    }
    let big = TilingInstance::new(vec![Tile::uniform("x")], 3).unwrap();
    assert!(matches!(tiling_eval(&big), Err(TilingError::TooLarge { .. })));
}

#[test]
fn tiling_formula_shape() {
    let t = TilingInstance::parse("n 1\nx x x x\n").unwrap();
    let sig = Signature::infer(&gen_tiling(&t));
    let names = |v: &[Symbol]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut agents = names(&sig.agents);
    agents.sort();
    assert_eq!(agents, TILING_AGENTS);
    let mut letters = names(&sig.letters);
    letters.sort();
    let mut want = TILING_LETTERS.to_vec();
    want.sort();
    assert_eq!(letters, want);
}

#[test]
fn intended_models_satisfy_the_tiling_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut solvable = 0;
    for _ in 0..20 {
        let t = random_tiling(&mut rng);
        match tiling_witness(&t).unwrap() {
            Some(m) => {
                solvable += 1;
                m.model.validate().unwrap();
                assert!(Checker::new(&m.model).check(m.point, &gen_tiling(&t)), "{t}");
            }
            None => assert!(!tiling_eval(&t).unwrap()),
        }
    }
    assert!(solvable > 0);
    let checker = TilingInstance::parse("n 2\nx y x y\ny x y x\n").unwrap();
    assert!(tiling_solution(&checker).unwrap().is_some());
    let m = tiling_witness(&checker).unwrap().unwrap();
    assert!(check(&m.model, m.point, &gen_tiling(&checker)));
}

#[test]
fn small_tilings_are_decided_correctly() {
    for text in ["n 1\nx x x x\n", "n 1\nx y x y\n"] {
        let t = TilingInstance::parse(text).unwrap();
        let r = solve(&gen_tiling(&t)).unwrap();
        assert_eq!(r.is_sat(), tiling_eval(&t).unwrap(), "{text}");
        assert_eq!(r.is_unsat(), !tiling_eval(&t).unwrap(), "{text}");
    }
}

#[test]
fn vbot_fixtures() {
    let file = parse_model(VBOT_MODEL).unwrap();
    let (m, t) = (&file.model, file.point.unwrap());
    let fixtures = gen_vbot(3);
    let names: Vec<&str> = fixtures.iter().map(|(k, _)| *k).collect();
    assert_eq!(names, ["P_n", "psi_p", "psi_d", "psi_de", "gamma_1", "gamma_2", "INFO_ab", "query"]);
    for n in 1..=4 {
        for (k, f) in gen_vbot(n) {
            assert_eq!(check(m, t, &f), naive_check(m, t, &f), "{k} at n = {n}");
        }
    }
    let info = &fixtures.iter().find(|(k, _)| *k == "INFO_ab").unwrap().1;
    assert!(check(m, t, info));
}
