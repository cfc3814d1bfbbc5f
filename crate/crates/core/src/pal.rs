//! Public announcement logic and the translation of the word fragment into it.
//!
//! Observing a word `w` is simulated by announcing a fresh atom `p_w` that
//! holds exactly at the states whose expectation still allows `w`. Since
//! `p_wa` implies `p_w`, announcing `p_wa` after `p_w` leaves the same states
//! as announcing `p_wa` alone, which is what makes the translation
//! compositional.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rustc_hash::FxHashMap;
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::formula::Formula;
use crate::model::{EpistemicModel, ExpectationModel, StateId};
use crate::obsexpr::{ObsExpr, Word};
use crate::Symbol;

/// Prefix shared by every occurrence atom.
pub const OCC_PREFIX: &str = "occ";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PalFormula {
    Top,
    Bottom,
    Atom(Symbol),
    Not(Arc<PalFormula>),
    And(Arc<PalFormula>, Arc<PalFormula>),
    Or(Arc<PalFormula>, Arc<PalFormula>),
    Implies(Arc<PalFormula>, Arc<PalFormula>),
    Know(Symbol, Arc<PalFormula>),
    Poss(Symbol, Arc<PalFormula>),
    /// `[ψ!]φ`: if ψ holds, φ holds after announcing it.
    Announce(Arc<PalFormula>, Arc<PalFormula>),
    /// `<ψ!>φ`: ψ holds and φ holds after announcing it.
    AnnounceDia(Arc<PalFormula>, Arc<PalFormula>),
}

impl PalFormula {
    pub fn atom(p: impl AsRef<str>) -> PalFormula {
        PalFormula::Atom(Symbol::from(p.as_ref()))
    }

    pub fn not(a: PalFormula) -> PalFormula {
        PalFormula::Not(Arc::new(a))
    }

    pub fn and(a: PalFormula, b: PalFormula) -> PalFormula {
        PalFormula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: PalFormula, b: PalFormula) -> PalFormula {
        PalFormula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn implies(a: PalFormula, b: PalFormula) -> PalFormula {
        PalFormula::Implies(Arc::new(a), Arc::new(b))
    }

    pub fn know(i: impl AsRef<str>, a: PalFormula) -> PalFormula {
        PalFormula::Know(Symbol::from(i.as_ref()), Arc::new(a))
    }

    pub fn poss(i: impl AsRef<str>, a: PalFormula) -> PalFormula {
        PalFormula::Poss(Symbol::from(i.as_ref()), Arc::new(a))
    }

    pub fn announce(psi: PalFormula, a: PalFormula) -> PalFormula {
        PalFormula::Announce(Arc::new(psi), Arc::new(a))
    }

    pub fn announce_dia(psi: PalFormula, a: PalFormula) -> PalFormula {
        PalFormula::AnnounceDia(Arc::new(psi), Arc::new(a))
    }

    pub fn size(&self) -> usize {
        match self {
            PalFormula::Top | PalFormula::Bottom | PalFormula::Atom(_) => 1,
            PalFormula::Not(a) | PalFormula::Know(_, a) | PalFormula::Poss(_, a) => 1 + a.size(),
            PalFormula::And(a, b)
            | PalFormula::Or(a, b)
            | PalFormula::Implies(a, b)
            | PalFormula::Announce(a, b)
            | PalFormula::AnnounceDia(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Atoms in first-occurrence order.
    pub fn atoms(&self) -> Vec<Symbol> {
        fn go(f: &PalFormula, out: &mut Vec<Symbol>) {
            match f {
                PalFormula::Top | PalFormula::Bottom => {}
                PalFormula::Atom(p) => {
                    if !out.contains(p) {
                        out.push(p.clone());
                    }
                }
                PalFormula::Not(a) | PalFormula::Know(_, a) | PalFormula::Poss(_, a) => go(a, out),
                PalFormula::And(a, b)
                | PalFormula::Or(a, b)
                | PalFormula::Implies(a, b)
                | PalFormula::Announce(a, b)
                | PalFormula::AnnounceDia(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            PalFormula::Implies(..) => 0,
            PalFormula::Or(..) => 1,
            PalFormula::And(..) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for PalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, g: &PalFormula, min: u8) -> fmt::Result {
            if g.precedence() < min {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        }
        match self {
            PalFormula::Top => f.write_str("true"),
            PalFormula::Bottom => f.write_str("false"),
            PalFormula::Atom(p) => f.write_str(p),
            PalFormula::Not(a) => {
                f.write_str("~")?;
                child(f, a, 3)
            }
            PalFormula::And(a, b) => {
                child(f, a, 2)?;
                f.write_str(" & ")?;
                child(f, b, 3)
            }
            PalFormula::Or(a, b) => {
                child(f, a, 1)?;
                f.write_str(" | ")?;
                child(f, b, 2)
            }
            PalFormula::Implies(a, b) => {
                child(f, a, 1)?;
                f.write_str(" -> ")?;
                child(f, b, 0)
            }
            PalFormula::Know(i, a) => {
                write!(f, "K {i} ")?;
                child(f, a, 3)
            }
            PalFormula::Poss(i, a) => {
                write!(f, "Khat {i} ")?;
                child(f, a, 3)
            }
            PalFormula::Announce(p, a) => {
                write!(f, "[{p} !] ")?;
                child(f, a, 3)
            }
            PalFormula::AnnounceDia(p, a) => {
                write!(f, "<{p} !> ")?;
                child(f, a, 3)
            }
        }
    }
}

/// Name of the occurrence atom for `w`: `occ` followed by `_letter` per
/// letter, with underscores inside a letter doubled. Letters never start or
/// end with `_`, so the encoding is injective.
pub fn occ_atom(w: &Word) -> Symbol {
    let mut s = String::from(OCC_PREFIX);
    for a in w.letters() {
        s.push('_');
        s.push_str(&a.replace('_', "__"));
    }
    Symbol::from(s)
}

/// Inverse of [`occ_atom`].
pub fn parse_occ_atom(name: &str) -> Option<Word> {
    let rest = name.strip_prefix(OCC_PREFIX)?;
    let chars: Vec<char> = rest.chars().collect();
    let mut letters: Vec<String> = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        if chars[k] == '_' && chars.get(k + 1) == Some(&'_') {
            letters.last_mut()?.push('_');
            k += 2;
        } else if chars[k] == '_' {
            letters.push(String::new());
            k += 1;
        } else {
            letters.last_mut()?.push(chars[k]);
            k += 1;
        }
    }
    if letters.iter().any(String::is_empty) {
        return None;
    }
    Some(Word::from_letters(letters))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("`{0}` is not a single word; only the word fragment can be translated")]
    NotAWord(String),
    #[error("atom `{0}` clashes with the occurrence atoms")]
    ReservedAtom(String),
}

/// `tr_ε(φ)` for a word-fragment formula.
pub fn translate(f: &Formula) -> Result<PalFormula, TranslateError> {
    if let Some(p) = f.atoms().into_iter().find(|p| parse_occ_atom(p).is_some()) {
        return Err(TranslateError::ReservedAtom(p.to_string()));
    }
    tr(&Word::epsilon(), f)
}

fn observed(pi: &ObsExpr) -> Result<Option<Word>, TranslateError> {
    if !pi.is_union_free() {
        return Err(TranslateError::NotAWord(pi.to_string()));
    }
    Ok(pi.as_word())
}

/// Announces `p_{w·u_1}`, `p_{w·u_1u_2}`, ... for the letters of `u`, with
/// `inner` at the end.
fn announce_word(
    w: &Word,
    u: &Word,
    dia: bool,
    inner: PalFormula,
) -> PalFormula {
    let mut prefixes = Vec::new();
    let mut cur = w.clone();
    for a in u.letters() {
        cur = cur.appended(a.clone());
        prefixes.push(cur.clone());
    }
    prefixes.into_iter().rev().fold(inner, |acc, v| {
        let p = PalFormula::Atom(occ_atom(&v));
        if dia {
            PalFormula::announce_dia(p, acc)
        } else {
            PalFormula::announce(p, acc)
        }
    })
}

fn tr(w: &Word, f: &Formula) -> Result<PalFormula, TranslateError> {
    Ok(match f {
        Formula::Top => PalFormula::Top,
        Formula::Bottom => PalFormula::Bottom,
        Formula::Atom(p) => PalFormula::Atom(p.clone()),
        Formula::Not(a) => PalFormula::not(tr(w, a)?),
        Formula::And(a, b) => PalFormula::and(tr(w, a)?, tr(w, b)?),
        Formula::Or(a, b) => PalFormula::or(tr(w, a)?, tr(w, b)?),
        Formula::Implies(a, b) => PalFormula::implies(tr(w, a)?, tr(w, b)?),
        Formula::Know(i, a) => PalFormula::Know(i.clone(), Arc::new(tr(w, a)?)),
        Formula::Poss(i, a) => PalFormula::Poss(i.clone(), Arc::new(tr(w, a)?)),
        Formula::Box(pi, a) | Formula::Dia(pi, a) => {
            let dia = matches!(f, Formula::Dia(..));
            match observed(pi)? {
                None if dia => PalFormula::Bottom,
                None => PalFormula::Top,
                Some(u) => announce_word(w, &u, dia, tr(&w.concat(&u), a)?),
            }
        }
    })
}

/// Translation indices of `f`: every `w·u'` for a non-empty prefix `u'` of
/// a word `u` observed after `w`. Fails on the same inputs as [`translate`].
pub fn words_of(f: &Formula) -> Result<BTreeSet<Word>, TranslateError> {
    fn go(w: &Word, f: &Formula, out: &mut BTreeSet<Word>) -> Result<(), TranslateError> {
        match f {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => Ok(()),
            Formula::Not(a) | Formula::Know(_, a) | Formula::Poss(_, a) => go(w, a, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                go(w, a, out)?;
                go(w, b, out)
            }
            Formula::Box(pi, a) | Formula::Dia(pi, a) => match observed(pi)? {
                None => Ok(()),
                Some(u) => {
                    let mut cur = w.clone();
                    for x in u.letters() {
                        cur = cur.appended(x.clone());
                        out.insert(cur.clone());
                    }
                    go(&cur, a, out)
                }
            },
        }
    }
    let mut out = BTreeSet::new();
    go(&Word::epsilon(), f, &mut out)?;
    Ok(out)
}

/// Skeleton of `m` plus `p_w` for each `w` in `words`, true exactly at the
/// states whose expectation has a word extending `w`.
pub fn enrich_model<'a>(
    m: &ExpectationModel,
    words: impl IntoIterator<Item = &'a Word>,
) -> EpistemicModel {
    let mut out = m.skeleton().clone();
    for w in words {
        let states: Vec<StateId> = (0..m.len()).filter(|&s| m.exp(s).in_prefixes(w)).collect();
        out.add_atom(occ_atom(w), states);
    }
    out
}

/// Restriction of `m` to the states where `f` holds.
pub fn pal_update(m: &EpistemicModel, f: &PalFormula) -> EpistemicModel {
    pal_update_with_map(m, f).0
}

/// [`pal_update`] plus the old-to-new state map.
pub fn pal_update_with_map(
    m: &EpistemicModel,
    f: &PalFormula,
) -> (EpistemicModel, Vec<Option<StateId>>) {
    m.restrict(&pal_check_all(m, f))
}

/// `M, s ⊨ f`.
pub fn pal_check(m: &EpistemicModel, s: StateId, f: &PalFormula) -> bool {
    PalChecker::new(m).check(s, f)
}

/// Truth of `f` at every state of `m`.
pub fn pal_check_all(m: &EpistemicModel, f: &PalFormula) -> Vec<bool> {
    PalChecker::new(m).check_all(f)
}

/// State set as a bitset; inline up to 128 states.
#[derive(Clone)]
struct States(SmallVec<[u64; 2]>);

impl States {
    fn contains(&self, s: StateId) -> bool {
        self.0[s / 64] >> (s % 64) & 1 == 1
    }

    fn zip(&self, other: &States, op: impl Fn(u64, u64) -> u64) -> States {
        States(self.0.iter().zip(&other.0).map(|(&x, &y)| op(x, y)).collect())
    }

    fn is_disjoint(&self, other: &States) -> bool {
        self.0.iter().zip(&other.0).all(|(&x, &y)| x & y == 0)
    }
}

/// PAL model checker for one model; reuse it across formulas.
pub struct PalChecker<'m> {
    model: &'m EpistemicModel,
    /// Mask of the valid bits in each word.
    mask: SmallVec<[u64; 2]>,
    /// Per agent, per state: its class.
    classes: Vec<Vec<States>>,
    /// Per declared atom: where it holds.
    atoms: FxHashMap<Symbol, States>,
}

impl<'m> PalChecker<'m> {
    pub fn new(model: &'m EpistemicModel) -> Self {
        let n = model.len();
        let words = n.div_ceil(64).max(1);
        let mask = (0..words)
            .map(|k| match n - (64 * k).min(n) {
                r if r >= 64 => u64::MAX,
                r => (1u64 << r) - 1,
            })
            .collect();
        let mut ev = PalChecker {
            model,
            mask,
            classes: Vec::new(),
            atoms: FxHashMap::default(),
        };
        ev.classes = (0..model.agents().len())
            .map(|k| {
                (0..n)
                    .map(|s| ev.set(model.relation(k).class(s).iter().copied()))
                    .collect()
            })
            .collect();
        ev.atoms = model
            .atoms()
            .iter()
            .map(|p| (p.clone(), ev.set((0..n).filter(|&s| model.holds(s, p)))))
            .collect();
        ev
    }

    /// `M, s ⊨ f`.
    pub fn check(&self, s: StateId, f: &PalFormula) -> bool {
        self.eval(&self.full(), f).contains(s)
    }

    /// Truth of `f` at every state.
    pub fn check_all(&self, f: &PalFormula) -> Vec<bool> {
        let v = self.eval(&self.full(), f);
        (0..self.model.len()).map(|s| v.contains(s)).collect()
    }

    fn empty(&self) -> States {
        States(smallvec![0; self.mask.len()])
    }

    fn full(&self) -> States {
        States(self.mask.clone())
    }

    fn set(&self, states: impl IntoIterator<Item = StateId>) -> States {
        let mut out = self.empty();
        for s in states {
            out.0[s / 64] |= 1 << (s % 64);
        }
        out
    }

    fn complement(&self, x: &States) -> States {
        States(x.0.iter().zip(&self.mask).map(|(&w, &m)| !w & m).collect())
    }

    /// States where `f` holds in the submodel on `live`. Membership of
    /// states outside `live` is computed but never read by a live state.
    fn eval(&self, live: &States, f: &PalFormula) -> States {
        let n = self.model.len();
        match f {
            PalFormula::Top => self.full(),
            PalFormula::Bottom => self.empty(),
            PalFormula::Atom(p) => match self.atoms.get(p) {
                Some(v) => v.clone(),
                None => self.set((0..n).filter(|&s| self.model.holds(s, p))),
            },
            PalFormula::Not(a) => self.complement(&self.eval(live, a)),
            PalFormula::And(a, b) => self.eval(live, a).zip(&self.eval(live, b), |x, y| x & y),
            PalFormula::Or(a, b) => self.eval(live, a).zip(&self.eval(live, b), |x, y| x | y),
            PalFormula::Implies(a, b) => {
                let not_a = self.complement(&self.eval(live, a));
                not_a.zip(&self.eval(live, b), |x, y| x | y)
            }
            PalFormula::Know(i, a) | PalFormula::Poss(i, a) => {
                let know = matches!(f, PalFormula::Know(..));
                let v = self.eval(live, a);
                // Live states to avoid (Know) or to hit (Poss).
                let target = if know { self.complement(&v) } else { v };
                let target = target.zip(live, |x, y| x & y);
                let agent = self.model.agent_index(i);
                self.set((0..n).filter(|&s| {
                    let hit = match agent {
                        Some(k) => !self.classes[k][s].is_disjoint(&target),
                        None => !target.is_disjoint(&self.full()),
                    };
                    hit != know
                }))
            }
            PalFormula::Announce(psi, a) | PalFormula::AnnounceDia(psi, a) => {
                let holds = self.eval(live, psi);
                let next = holds.zip(live, |x, y| x & y);
                let after = self.eval(&next, a);
                if matches!(f, PalFormula::AnnounceDia(..)) {
                    holds.zip(&after, |h, v| h & v)
                } else {
                    self.complement(&holds).zip(&after, |h, v| h | v)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::model::{parse_model, ModelBuilder};
    use crate::obsexpr::Alphabet;

    fn f(s: &str) -> Formula {
        parse_formula(s, None).unwrap()
    }

    fn occ(w: &[&str]) -> PalFormula {
        PalFormula::Atom(occ_atom(&Word::from_letters(w.iter().copied())))
    }

    #[test]
    fn worked_translation() {
        let t = translate(&f("[a] false & <a> <a> true")).unwrap();
        let want = PalFormula::and(
            PalFormula::announce(occ(&["a"]), PalFormula::Bottom),
            PalFormula::announce_dia(
                occ(&["a"]),
                PalFormula::announce_dia(occ(&["a", "a"]), PalFormula::Top),
            ),
        );
        assert_eq!(t, want);
        assert_eq!(t.to_string(), "[occ_a !] false & <occ_a !> <occ_a_a !> true");
    }

    #[test]
    fn homomorphic_cases() {
        assert_eq!(translate(&f("p")).unwrap(), PalFormula::atom("p"));
        assert_eq!(
            translate(&f("K i <b> q")).unwrap(),
            PalFormula::know("i", PalFormula::announce_dia(occ(&["b"]), PalFormula::atom("q")))
        );
        assert_eq!(
            translate(&f("<a.b> p")).unwrap(),
            translate(&f("<a> <b> p")).unwrap()
        );
        assert_eq!(translate(&f("<eps> p")).unwrap(), PalFormula::atom("p"));
    }

    #[test]
    fn rejects_unions_and_reserved_atoms() {
        assert!(matches!(translate(&f("<a + b> p")), Err(TranslateError::NotAWord(_))));
        assert!(matches!(translate(&f("occ_a")), Err(TranslateError::ReservedAtom(_))));
        assert!(translate(&f("occupied")).is_ok());
    }

    #[test]
    fn occurrence_atoms_are_injective() {
        let a = Word::from_letters(["a_b", "c"]);
        let b = Word::from_letters(["a", "b_c"]);
        assert_ne!(occ_atom(&a), occ_atom(&b));
        assert_eq!(parse_occ_atom(&occ_atom(&a)), Some(a));
        assert_eq!(parse_occ_atom(&occ_atom(&b)), Some(b));
        assert_eq!(&*occ_atom(&Word::from_letters(["a", "a"])), "occ_a_a");
    }

    #[test]
    fn words_are_prefix_closed_indices() {
        let ws = words_of(&f("<a.b> p & K i [b] <a> q")).unwrap();
        let got: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
        assert_eq!(got, ["a", "a.b", "b", "b.a"]);
    }

    #[test]
    fn announcements() {
        let m = ModelBuilder::new(Alphabet::new(["a"]).unwrap())
            .agents(["i"])
            .atoms(["p"])
            .state("s", ["p"], ObsExpr::letter("a"))
            .state("t", Vec::<&str>::new(), ObsExpr::letter("a"))
            .relation("i", &[&["s", "t"]])
            .build()
            .unwrap();
        let sk = m.skeleton();
        assert_eq!(pal_update(sk, &PalFormula::Top).len(), 2);
        assert_eq!(pal_update(sk, &PalFormula::atom("p")).len(), 1);
        let t = PalFormula::announce_dia(PalFormula::Top, PalFormula::Top);
        assert!(pal_check(sk, 0, &t) && pal_check(sk, 1, &t));
        // After announcing p, agent i knows p.
        let kp = PalFormula::announce(PalFormula::atom("p"), PalFormula::know("i", PalFormula::atom("p")));
        assert!(pal_check(sk, 0, &kp));
        assert!(pal_check(sk, 1, &kp));
        assert!(!pal_check(sk, 0, &PalFormula::know("i", PalFormula::atom("p"))));
        // A false occurrence atom makes the box vacuous.
        assert!(pal_check(sk, 0, &PalFormula::announce(occ(&["a"]), PalFormula::Bottom)));
    }

    #[test]
    fn enrichment_on_power_scenario() {
        let text = "\
alphabet: l r u d
agents: alice bob
atoms: debris power
state s props debris exp (r+u)^<=3
state t props power exp (l+d)^<=3
state u props debris exp (r+u)^<=3 . (d+l+eps) . (r+u)^<=3
rel alice: {s t u}
rel bob: {s t} {u}
point: t
";
        let m = parse_model(text).unwrap().model;
        let w = Word::from_letters(["l"]);
        let e = enrich_model(&m, [&w]);
        let p = occ_atom(&w);
        assert_eq!((0..3).map(|s| e.holds(s, &p)).collect::<Vec<_>>(), [false, true, true]);
        assert_eq!(enrich_model(&m, []), *m.skeleton());
    }
}
