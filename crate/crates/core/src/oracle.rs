//! Bounded brute-force model search, and exhaustive enumeration of small
//! formulas for cross-validation.
//!
//! [`bounded_sat`] tries every model within [`SearchBounds`] and reports the
//! first one satisfying the formula at state `0`. Failure to find a model is
//! reported as [`OracleResult::NoModelWithinBounds`], which says nothing
//! about satisfiability beyond the bounds.

use std::sync::Arc;

use thiserror::Error;

use crate::formula::{Formula, Signature};
use crate::model::{EpistemicModel, ExpectationModel, Partition, PointedModel};
use crate::obsexpr::{Alphabet, ObsExpr, Word};
use crate::semantics::Checker;
use crate::Symbol;

pub const DEFAULT_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_states: usize,
    pub max_word_len: usize,
    pub max_words: usize,
    pub alphabet: Alphabet,
    pub atoms: Vec<Symbol>,
    pub agents: Vec<Symbol>,
    /// Largest search space, counted before pruning, that may be explored.
    pub cap: u128,
    /// Only enumerate prefix-free word sets. Sound because truth depends on
    /// an expectation only through its prefix set, which a word set shares
    /// with its prefix-maximal words.
    pub prefix_free: bool,
}

impl SearchBounds {
    /// Bounds derived from the formula: its own symbols, word length equal
    /// to its letter depth, at most two states and two words per state.
    pub fn for_formula(f: &Formula) -> SearchBounds {
        let sig = Signature::infer(f);
        SearchBounds {
            max_states: 2,
            max_word_len: f.letter_depth(),
            max_words: 2,
            alphabet: sig.alphabet(),
            atoms: sig.atoms,
            agents: sig.agents,
            cap: DEFAULT_CAP,
            prefix_free: false,
        }
    }

    /// Number of candidate expectations per state.
    pub fn expectation_count(&self) -> u128 {
        self.expectations().len() as u128
    }

    /// Candidate models before pruning by state order.
    pub fn space_size(&self) -> u128 {
        let per_state = self.expectation_count() << self.atoms.len().min(100);
        let mut total: u128 = 0;
        for k in 1..=self.max_states {
            let bell = bell(k).saturating_pow(self.agents.len() as u32);
            total = total.saturating_add(per_state.saturating_pow(k as u32).saturating_mul(bell));
        }
        total
    }

    fn expectations(&self) -> Vec<(Vec<Word>, ObsExpr)> {
        let words = self.alphabet.words_up_to(self.max_word_len);
        let mut out = Vec::new();
        let mut current = Vec::new();
        for size in 1..=self.max_words.min(words.len()) {
            subsets(&words, size, 0, &mut current, &mut |set: &[Word]| {
                if self.prefix_free
                    && set
                        .iter()
                        .any(|u| set.iter().any(|v| u != v && u.is_prefix_of(v)))
                {
                    return;
                }
                let e = ObsExpr::sum_of_words(set).expect("subset is non-empty");
                out.push((set.to_vec(), e));
            });
        }
        out
    }
}

fn subsets<F: FnMut(&[Word])>(
    pool: &[Word],
    size: usize,
    from: usize,
    current: &mut Vec<Word>,
    emit: &mut F,
) {
    if current.len() == size {
        emit(current);
        return;
    }
    for i in from..pool.len() {
        if pool.len() - i < size - current.len() {
            break;
        }
        current.push(pool[i].clone());
        subsets(pool, size, i + 1, current, emit);
        current.pop();
    }
}

fn bell(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![*row.last().expect("rows are non-empty")];
        for x in &row {
            let v = next.last().expect("rows are non-empty").saturating_add(*x);
            next.push(v);
        }
        row = next;
    }
    row[0]
}

/// Restricted-growth strings of length `n`: one per set partition.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let limit = if cur.is_empty() { 0 } else { max + 1 };
        for c in 0..=limit {
            cur.push(c);
            go(n, cur, max.max(c), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), 0, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleResult {
    Sat(PointedModel),
    /// No model within the bounds. Not a proof of unsatisfiability.
    NoModelWithinBounds { models_checked: u64 },
}

impl OracleResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleResult::Sat(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search space of {space} models exceeds the cap of {cap}")]
    CapExceeded { space: u128, cap: u128 },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("formula uses `{0}`, which the bounds do not declare")]
    Undeclared(String),
}

/// Every candidate model within the bounds, in search order, pruned so that
/// the states after the point are sorted by (valuation, expectation).
pub struct ModelSpace {
    bounds: SearchBounds,
    exps: Vec<(Vec<Word>, ObsExpr)>,
    valuations: Vec<Vec<Symbol>>,
}

impl ModelSpace {
    pub fn new(bounds: &SearchBounds) -> Result<ModelSpace, OracleError> {
        if bounds.max_states == 0 || bounds.max_words == 0 {
            return Err(OracleError::InvalidBounds(
                "states and words must be at least 1".into(),
            ));
        }
        let space = bounds.space_size();
        if space > bounds.cap {
            return Err(OracleError::CapExceeded {
                space,
                cap: bounds.cap,
            });
        }
        let valuations = (0..1u64 << bounds.atoms.len())
            .map(|mask| {
                bounds
                    .atoms
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        Ok(ModelSpace {
            bounds: bounds.clone(),
            exps: bounds.expectations(),
            valuations,
        })
    }

    /// Calls `visit` on each model until it returns `true`; returns the
    /// number of models visited.
    pub fn for_each(&self, mut visit: impl FnMut(&ExpectationModel) -> bool) -> u64 {
        let per_state = self.exps.len() * self.valuations.len();
        let mut count = 0u64;
        for k in 1..=self.bounds.max_states {
            let names: Vec<Symbol> = (0..k).map(|s| Symbol::from(format!("s{s}"))).collect();
            let parts = set_partitions(k);
            let agent_combos = parts.len().pow(self.bounds.agents.len() as u32);
            let mut choice = vec![0usize; k];
            loop {
                for combo in 0..agent_combos {
                    let mut c = combo;
                    let relations = (0..self.bounds.agents.len())
                        .map(|_| {
                            let p = Partition::from_labels(&parts[c % parts.len()]);
                            c /= parts.len();
                            p
                        })
                        .collect();
                    let valuation = choice
                        .iter()
                        .map(|&x| self.valuations[x % self.valuations.len()].iter().cloned().collect())
                        .collect();
                    let exp = choice
                        .iter()
                        .map(|&x| self.exps[x / self.valuations.len()].1.clone())
                        .collect();
                    let skeleton = EpistemicModel::from_parts(
                        self.bounds.agents.clone(),
                        self.bounds.atoms.clone(),
                        names.clone(),
                        valuation,
                        relations,
                    );
                    let m = ExpectationModel::from_parts(self.bounds.alphabet.clone(), skeleton, exp);
                    count += 1;
                    if visit(&m) {
                        return count;
                    }
                }
                if !advance_sorted(&mut choice, per_state) {
                    break;
                }
            }
        }
        count
    }
}

/// Next choice vector with `choice[1..]` non-decreasing; false when done.
fn advance_sorted(choice: &mut [usize], radix: usize) -> bool {
    let Some(i) = (0..choice.len()).rev().find(|&i| choice[i] + 1 < radix) else {
        return false;
    };
    choice[i] += 1;
    let floor = if i == 0 { 0 } else { choice[i] };
    for c in &mut choice[i + 1..] {
        *c = floor;
    }
    true
}

fn check_declared(f: &Formula, b: &SearchBounds) -> Result<(), OracleError> {
    let sig = Signature::infer(f);
    if let Some(a) = sig.letters.iter().find(|a| !b.alphabet.contains(a)) {
        return Err(OracleError::Undeclared(a.to_string()));
    }
    if let Some(p) = sig.atoms.iter().find(|p| !b.atoms.contains(p)) {
        return Err(OracleError::Undeclared(p.to_string()));
    }
    if let Some(i) = sig.agents.iter().find(|i| !b.agents.contains(i)) {
        return Err(OracleError::Undeclared(i.to_string()));
    }
    Ok(())
}

/// First model within `bounds` satisfying `f` at state `0`.
pub fn bounded_sat(f: &Formula, bounds: &SearchBounds) -> Result<OracleResult, OracleError> {
    check_declared(f, bounds)?;
    let space = ModelSpace::new(bounds)?;
    let mut found = None;
    let n = space.for_each(|m| {
        if Checker::new(m).check(0, f) {
            found = Some(m.clone());
            true
        } else {
            false
        }
    });
    Ok(match found {
        Some(model) => OracleResult::Sat(PointedModel { model, point: 0 }),
        None => OracleResult::NoModelWithinBounds { models_checked: n },
    })
}

/// [`bounded_sat`] for many formulas sharing one enumeration; the witness
/// for each formula is the first model in search order.
pub fn bounded_sat_batch(
    fs: &[Formula],
    bounds: &SearchBounds,
) -> Result<Vec<OracleResult>, OracleError> {
    for f in fs {
        check_declared(f, bounds)?;
    }
    let space = ModelSpace::new(bounds)?;
    let mut found: Vec<Option<ExpectationModel>> = vec![None; fs.len()];
    let mut open: Vec<usize> = (0..fs.len()).collect();
    let n = space.for_each(|m| {
        let mut c = Checker::new(m);
        let pending: Vec<Formula> = open.iter().map(|&k| fs[k].clone()).collect();
        let truth = c.check_batch(0, &pending);
        let mut still = Vec::with_capacity(open.len());
        for (&k, t) in open.iter().zip(truth) {
            if t {
                found[k] = Some(m.clone());
            } else {
                still.push(k);
            }
        }
        open = still;
        open.is_empty()
    });
    Ok(found
        .into_iter()
        .map(|m| match m {
            Some(model) => OracleResult::Sat(PointedModel { model, point: 0 }),
            None => OracleResult::NoModelWithinBounds { models_checked: n },
        })
        .collect())
}

/// Shape of an exhaustive formula corpus.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub max_size: usize,
    pub atoms: Vec<Symbol>,
    pub agents: Vec<Symbol>,
    /// Expressions allowed in modalities.
    pub exprs: Vec<ObsExpr>,
    /// Include `⊤` as a leaf.
    pub top: bool,
    /// Literal leaves only positive (for corpora that add negation
    /// elsewhere); otherwise both polarities.
    pub negative_literals: bool,
}

/// Expressions of size at most 3 over `letters`, without `∅` and without
/// redundant forms: letters, two-letter words, unions of two distinct
/// letters and `letter + ε`.
pub fn small_exprs(letters: &[&str]) -> Vec<ObsExpr> {
    let mut out: Vec<ObsExpr> = letters.iter().map(ObsExpr::letter).collect();
    for x in letters {
        for y in letters {
            out.push(ObsExpr::raw_concat(ObsExpr::letter(x), ObsExpr::letter(y)));
        }
    }
    for (k, x) in letters.iter().enumerate() {
        for y in &letters[k + 1..] {
            out.push(ObsExpr::raw_union(ObsExpr::letter(x), ObsExpr::letter(y)));
        }
    }
    for x in letters {
        out.push(ObsExpr::raw_union(ObsExpr::letter(x), ObsExpr::Epsilon));
    }
    out
}

/// Union-free expressions of size at most 3 over `letters`: letters and
/// two-letter words.
pub fn small_words(letters: &[&str]) -> Vec<ObsExpr> {
    small_exprs(letters)
        .into_iter()
        .filter(ObsExpr::is_union_free)
        .collect()
}

/// All NNF formulas up to `spec.max_size`, by size. Conjunctions and
/// disjunctions have distinct operands in a fixed order, so commuted
/// duplicates are skipped. Subformulas are shared between entries.
pub fn enumerate_formulas(spec: &CorpusSpec) -> Vec<Formula> {
    let mut by_size: Vec<Vec<Arc<Formula>>> = vec![Vec::new(); spec.max_size + 1];
    for p in &spec.atoms {
        by_size[1].push(Arc::new(Formula::Atom(p.clone())));
        if spec.negative_literals && spec.max_size >= 2 {
            by_size[2].push(Arc::new(Formula::not(Formula::Atom(p.clone()))));
        }
    }
    if spec.top {
        by_size[1].push(Arc::new(Formula::Top));
    }
    for n in 2..=spec.max_size {
        let mut layer: Vec<Arc<Formula>> = Vec::new();
        for a in &by_size[n - 1] {
            for i in &spec.agents {
                layer.push(Arc::new(Formula::Know(i.clone(), a.clone())));
                layer.push(Arc::new(Formula::Poss(i.clone(), a.clone())));
            }
        }
        for e in &spec.exprs {
            let es = e.size();
            if 1 + es < n {
                for a in &by_size[n - 1 - es] {
                    layer.push(Arc::new(Formula::Box(e.clone(), a.clone())));
                    layer.push(Arc::new(Formula::Dia(e.clone(), a.clone())));
                }
            }
        }
        for l in 1..n - 1 {
            let r = n - 1 - l;
            if l > r {
                break;
            }
            for (x, a) in by_size[l].iter().enumerate() {
                let start = if l == r { x + 1 } else { 0 };
                for b in &by_size[r][start..] {
                    layer.push(Arc::new(Formula::And(a.clone(), b.clone())));
                    layer.push(Arc::new(Formula::Or(a.clone(), b.clone())));
                }
            }
        }
        by_size[n].extend(layer);
    }
    by_size
        .into_iter()
        .flatten()
        .map(|f| (*f).clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::semantics::check;

    fn f(s: &str) -> Formula {
        parse_formula(s, None).unwrap()
    }

    #[test]
    fn hand_counted_space() {
        let b = SearchBounds {
            max_states: 1,
            max_word_len: 1,
            max_words: 2,
            alphabet: Alphabet::new(["a"]).unwrap(),
            atoms: vec![Symbol::from("p")],
            agents: vec![],
            cap: DEFAULT_CAP,
            prefix_free: false,
        };
        assert_eq!(b.space_size(), 6);
        let space = ModelSpace::new(&b).unwrap();
        let mut seen = Vec::new();
        space.for_each(|m| {
            seen.push(m.to_file(None));
            false
        });
        assert_eq!(seen.len(), 6);
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn sorted_choices_cover_multisets() {
        let mut c = vec![0, 0, 0];
        let mut n = 1;
        while advance_sorted(&mut c, 3) {
            assert!(c[1] <= c[2]);
            n += 1;
        }
        // 3 choices for the point times 6 multisets of size 2 over 3.
        assert_eq!(n, 18);
    }

    #[test]
    fn contradiction_has_no_model() {
        let g = f("p & ~p");
        let r = bounded_sat(&g, &SearchBounds::for_formula(&g)).unwrap();
        assert!(!r.is_sat());
    }

    #[test]
    fn single_observation_model() {
        let g = f("<a> true");
        let OracleResult::Sat(m) = bounded_sat(&g, &SearchBounds::for_formula(&g)).unwrap() else {
            panic!("expected a model")
        };
        assert_eq!(m.model.len(), 1);
        assert_eq!(m.model.exp(0).lang(), [Word::from_letters(["a"])].into());
        assert!(check(&m.model, 0, &g));
    }

    #[test]
    fn cap_is_enforced() {
        let g = f("K i K j <a.b> p");
        let mut b = SearchBounds::for_formula(&g);
        b.max_states = 4;
        b.cap = 1000;
        assert!(matches!(bounded_sat(&g, &b), Err(OracleError::CapExceeded { .. })));
    }

    #[test]
    fn partitions_and_bell_numbers() {
        assert_eq!(set_partitions(3).len(), 5);
        assert_eq!(bell(4), 15);
    }

    #[test]
    fn batch_matches_single() {
        let fs: Vec<Formula> = ["Khat i p & Khat i ~p", "p & ~p", "<a> p & <b> ~p", "[a] false & <a + b> p"]
            .iter()
            .map(|s| f(s))
            .collect();
        let mut b = SearchBounds::for_formula(&Formula::conj(fs.clone()));
        b.max_word_len = 1;
        let batch = bounded_sat_batch(&fs, &b).unwrap();
        for (g, r) in fs.iter().zip(&batch) {
            assert_eq!(&bounded_sat(g, &b).unwrap().is_sat(), &r.is_sat());
        }
    }

    #[test]
    fn corpus_is_canonical() {
        let spec = CorpusSpec {
            max_size: 4,
            atoms: vec![Symbol::from("p")],
            agents: vec![Symbol::from("i")],
            exprs: small_exprs(&["a"]),
            top: false,
            negative_literals: true,
        };
        let fs = enumerate_formulas(&spec);
        let strs: Vec<String> = fs.iter().map(|g| g.to_string()).collect();
        assert!(strs.contains(&"K i ~p".to_string()));
        assert!(strs.contains(&"<a> p".to_string()));
        assert!(strs.contains(&"p & ~p".to_string()) || strs.contains(&"~p & p".to_string()));
        let mut dedup = strs.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), strs.len());
        assert!(fs.iter().all(|g| g.size() <= 4 && g.is_nnf()));
    }
}
