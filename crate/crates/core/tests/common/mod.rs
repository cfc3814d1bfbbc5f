//! Generators and reference evaluators shared by the integration tests and
//! the acceptance harness.

#![allow(dead_code)]

use std::collections::BTreeSet;

use pol_core::formula::Formula;
use pol_core::model::{EpistemicModel, ExpectationModel, Partition, StateId};
use pol_core::obsexpr::{Alphabet, ObsExpr, Word};
use pol_core::pal::PalFormula;
use pol_core::reductions::{QbfInstance, Quantifier};
use pol_core::Symbol;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn syms(xs: &[&str]) -> Vec<Symbol> {
    xs.iter().map(|x| Symbol::from(*x)).collect()
}

/// Truth by the definition: updates are materialized with
/// `ExpectationModel::update` and languages enumerated in full.
pub fn naive_check(m: &ExpectationModel, s: StateId, f: &Formula) -> bool {
    match f {
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Atom(p) => m.skeleton().valuation(s).contains(p),
        Formula::Not(a) => !naive_check(m, s, a),
        Formula::And(a, b) => naive_check(m, s, a) && naive_check(m, s, b),
        Formula::Or(a, b) => naive_check(m, s, a) || naive_check(m, s, b),
        Formula::Implies(a, b) => !naive_check(m, s, a) || naive_check(m, s, b),
        Formula::Know(i, a) => naive_class(m.skeleton(), i, s)
            .into_iter()
            .all(|t| naive_check(m, t, a)),
        Formula::Poss(i, a) => naive_class(m.skeleton(), i, s)
            .into_iter()
            .any(|t| naive_check(m, t, a)),
        Formula::Box(pi, a) => pi.lang().iter().all(|w| match after(m, s, w) {
            Some((u, t)) => naive_check(&u, t, a),
            None => true,
        }),
        Formula::Dia(pi, a) => pi.lang().iter().any(|w| match after(m, s, w) {
            Some((u, t)) => naive_check(&u, t, a),
            None => false,
        }),
    }
}

/// `M|_w` and the image of `s`, when `s` survives `w`.
fn after(m: &ExpectationModel, s: StateId, w: &Word) -> Option<(ExpectationModel, StateId)> {
    if w.letters().iter().any(|a| !m.alphabet().contains(a)) {
        return None;
    }
    let (u, map) = m.update_with_map(w);
    map[s].map(|t| (u, t))
}

fn naive_class(m: &EpistemicModel, agent: &str, s: StateId) -> Vec<StateId> {
    match m.agents().iter().position(|a| &**a == agent) {
        Some(i) => (0..m.len())
            .filter(|&t| m.relation(i).related(s, t))
            .collect(),
        None => (0..m.len()).collect(),
    }
}

/// PAL truth with every announcement materialized as a submodel.
pub fn naive_pal_check(m: &EpistemicModel, s: StateId, f: &PalFormula) -> bool {
    match f {
        PalFormula::Top => true,
        PalFormula::Bottom => false,
        PalFormula::Atom(p) => m.valuation(s).contains(p),
        PalFormula::Not(a) => !naive_pal_check(m, s, a),
        PalFormula::And(a, b) => naive_pal_check(m, s, a) && naive_pal_check(m, s, b),
        PalFormula::Or(a, b) => naive_pal_check(m, s, a) || naive_pal_check(m, s, b),
        PalFormula::Implies(a, b) => !naive_pal_check(m, s, a) || naive_pal_check(m, s, b),
        PalFormula::Know(i, a) => naive_class(m, i, s).into_iter().all(|t| naive_pal_check(m, t, a)),
        PalFormula::Poss(i, a) => naive_class(m, i, s).into_iter().any(|t| naive_pal_check(m, t, a)),
        PalFormula::Announce(psi, a) | PalFormula::AnnounceDia(psi, a) => {
            let dia = matches!(f, PalFormula::AnnounceDia(..));
            if !naive_pal_check(m, s, psi) {
                return !dia;
            }
            let keep: Vec<bool> = (0..m.len()).map(|t| naive_pal_check(m, t, psi)).collect();
            let (sub, map) = m.restrict(&keep);
            naive_pal_check(&sub, map[s].expect("s satisfies the announcement"), a)
        }
    }
}

/// Parameters for [`random_model`].
#[derive(Debug, Clone)]
pub struct ModelShape {
    pub max_states: usize,
    pub letters: Vec<&'static str>,
    pub atoms: Vec<&'static str>,
    pub agents: Vec<&'static str>,
    pub max_word_len: usize,
    pub max_words: usize,
}

impl ModelShape {
    pub fn small() -> ModelShape {
        ModelShape {
            max_states: 3,
            letters: vec!["a", "b"],
            atoms: vec!["p", "q"],
            agents: vec!["i", "j"],
            max_word_len: 3,
            max_words: 3,
        }
    }
}

pub fn random_model<R: Rng>(rng: &mut R, shape: &ModelShape) -> ExpectationModel {
    let n = rng.gen_range(1..=shape.max_states);
    let alphabet = Alphabet::new(shape.letters.iter().copied()).expect("distinct letters");
    let pool = alphabet.words_up_to(shape.max_word_len);
    let names = (0..n).map(|s| Symbol::from(format!("s{s}"))).collect();
    let valuation = (0..n)
        .map(|_| {
            shape
                .atoms
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .map(|p| Symbol::from(*p))
                .collect::<BTreeSet<_>>()
        })
        .collect();
    let relations = shape
        .agents
        .iter()
        .map(|_| {
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            Partition::from_labels(&canonical_labels(&labels))
        })
        .collect();
    let exp = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=shape.max_words.min(pool.len()));
            let words: Vec<Word> = pool.choose_multiple(rng, k).cloned().collect();
            ObsExpr::sum_of_words(&words).expect("k >= 1")
        })
        .collect();
    let skeleton = EpistemicModel::from_parts(
        syms(&shape.agents),
        syms(&shape.atoms),
        names,
        valuation,
        relations,
    );
    ExpectationModel::from_parts(alphabet, skeleton, exp)
}

/// Relabels so that labels appear in increasing first-occurrence order.
fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    labels
        .iter()
        .map(|l| match seen.iter().position(|x| x == l) {
            Some(k) => k,
            None => {
                seen.push(*l);
                seen.len() - 1
            }
        })
        .collect()
}

pub fn random_expr<R: Rng>(rng: &mut R, letters: &[&str], depth: usize) -> ObsExpr {
    if depth == 0 || rng.gen_bool(0.35) {
        return match rng.gen_range(0..8) {
            0 => ObsExpr::Epsilon,
            1 => ObsExpr::Empty,
            _ => ObsExpr::letter(letters.choose(rng).expect("letters")),
        };
    }
    let a = random_expr(rng, letters, depth - 1);
    let b = random_expr(rng, letters, depth - 1);
    if rng.gen_bool(0.5) {
        ObsExpr::raw_concat(a, b)
    } else {
        ObsExpr::raw_union(a, b)
    }
}

/// A non-empty word of length at most `max`, as an expression.
pub fn random_word_expr<R: Rng>(rng: &mut R, letters: &[&str], max: usize) -> ObsExpr {
    let len = rng.gen_range(1..=max);
    let w = Word::from_letters((0..len).map(|_| *letters.choose(rng).expect("letters")));
    ObsExpr::word(&w)
}

/// Parameters for [`random_formula`].
#[derive(Debug, Clone)]
pub struct FormulaShape {
    pub atoms: Vec<&'static str>,
    pub agents: Vec<&'static str>,
    pub letters: Vec<&'static str>,
    /// Only single words in modalities.
    pub words_only: bool,
    pub expr_depth: usize,
}

impl FormulaShape {
    pub fn small() -> FormulaShape {
        FormulaShape {
            atoms: vec!["p", "q"],
            agents: vec!["i", "j"],
            letters: vec!["a", "b"],
            words_only: false,
            expr_depth: 2,
        }
    }
}

pub fn random_formula<R: Rng>(rng: &mut R, shape: &FormulaShape, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0 => Formula::Top,
            1 => Formula::Bottom,
            _ => Formula::atom(shape.atoms.choose(rng).expect("atoms")),
        };
    }
    let sub = |rng: &mut R| random_formula(rng, shape, depth - 1);
    let expr = |rng: &mut R| {
        if shape.words_only {
            random_word_expr(rng, &shape.letters, 2)
        } else {
            random_expr(rng, &shape.letters, shape.expr_depth)
        }
    };
    let agent = |rng: &mut R| *shape.agents.choose(rng).expect("agents");
    match rng.gen_range(0..9) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => {
            let i = agent(rng);
            Formula::know(i, sub(rng))
        }
        5 => {
            let i = agent(rng);
            Formula::poss(i, sub(rng))
        }
        6 | 7 => {
            let e = expr(rng);
            Formula::boxed(e, sub(rng))
        }
        _ => {
            let e = expr(rng);
            Formula::dia(e, sub(rng))
        }
    }
}

/// States of `m` by name with their expectation languages.
pub fn state_summary(m: &ExpectationModel) -> Vec<(String, BTreeSet<Word>)> {
    let mut v: Vec<(String, BTreeSet<Word>)> = (0..m.len())
        .map(|s| (m.name(s).to_string(), m.exp(s).lang()))
        .collect();
    v.sort();
    v
}

/// Random instance with `1..=max_vars` variables and `1..=max_clauses`
/// clauses of up to three literals.
pub fn random_qbf<R: Rng>(rng: &mut R, max_vars: usize, max_clauses: usize) -> QbfInstance {
    let n = rng.gen_range(1..=max_vars);
    let quantifiers: Vec<Quantifier> = (0..n)
        .map(|_| if rng.gen() { Quantifier::Exists } else { Quantifier::Forall })
        .collect();
    let clauses = (0..rng.gen_range(1..=max_clauses))
        .map(|_| {
            (0..rng.gen_range(1..=3))
                .map(|_| {
                    let v = rng.gen_range(1..=n as i32);
                    if rng.gen() { v } else { -v }
                })
                .collect()
        })
        .collect();
    QbfInstance::with_default_names(&quantifiers, clauses).expect("well-formed")
}

/// QBF truth by collapsing the full truth table of the matrix, innermost
/// variable first.
pub fn qbf_truth_table(q: &QbfInstance) -> bool {
    let n = q.num_vars();
    // Bit `k` of the index is the value of variable `k + 1`.
    let mut table: Vec<bool> = (0..1usize << n)
        .map(|a| {
            q.clauses().iter().all(|c| {
                c.iter().any(|&l| {
                    let bit = a >> (l.unsigned_abs() as usize - 1) & 1 == 1;
                    bit == (l > 0)
                })
            })
        })
        .collect();
    for k in (0..n).rev() {
        let half = 1usize << k;
        table = (0..half)
            .map(|a| {
                let (lo, hi) = (table[a], table[a | half]);
                match q.prefix()[k].0 {
                    Quantifier::Exists => lo || hi,
                    Quantifier::Forall => lo && hi,
                }
            })
            .collect();
    }
    table[0]
}
