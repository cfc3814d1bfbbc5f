//! Model checking.
//!
//! A [`Checker`] evaluates formulas on one model. Updated models are kept
//! as views over the original state indices: a view records, per state,
//! the residual expectation or `None` once the state has been deleted.
//! Views are memoized per observed prefix, so formulas that share
//! observation prefixes share the work.

use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::formula::Formula;
use crate::model::{ExpectationModel, PointedModel, StateId};
use crate::obsexpr::ObsExpr;

type ViewId = u32;

struct View {
    exp: Vec<Option<ObsExpr>>,
}

/// Model checker for one model; reuse it across formulas and states.
pub struct Checker<'m> {
    model: &'m ExpectationModel,
    views: Vec<View>,
    children: FxHashMap<(ViewId, usize), ViewId>,
    langs: FxHashMap<ObsExpr, Arc<Vec<Vec<usize>>>>,
    memo: FxHashMap<(ViewId, StateId, *const Formula), bool>,
}

impl<'m> Checker<'m> {
    pub fn new(model: &'m ExpectationModel) -> Self {
        let root = View {
            exp: (0..model.len()).map(|s| Some(model.exp(s).clone())).collect(),
        };
        Checker {
            model,
            views: vec![root],
            children: FxHashMap::default(),
            langs: FxHashMap::default(),
            memo: FxHashMap::default(),
        }
    }

    pub fn model(&self) -> &ExpectationModel {
        self.model
    }

    /// `M, s ⊨ f`.
    pub fn check(&mut self, s: StateId, f: &Formula) -> bool {
        let r = self.eval(0, s, f);
        self.memo.clear();
        r
    }

    /// `M, s ⊨ f` for each `f`, sharing memoized subresults.
    pub fn check_batch(&mut self, s: StateId, fs: &[Formula]) -> Vec<bool> {
        let r = fs.iter().map(|f| self.eval(0, s, f)).collect();
        self.memo.clear();
        r
    }

    /// Truth value of `f` at every state.
    pub fn check_all_states(&mut self, f: &Formula) -> Vec<bool> {
        let r = (0..self.model.len()).map(|s| self.eval(0, s, f)).collect();
        self.memo.clear();
        r
    }

    /// `M, s ⊨ f` for every state and formula, indexed `[formula][state]`.
    pub fn check_matrix(&mut self, fs: &[Formula]) -> Vec<Vec<bool>> {
        let n = self.model.len();
        let r = fs
            .iter()
            .map(|f| (0..n).map(|s| self.eval(0, s, f)).collect())
            .collect();
        self.memo.clear();
        r
    }

    fn child(&mut self, v: ViewId, letter: usize) -> ViewId {
        if let Some(&c) = self.children.get(&(v, letter)) {
            return c;
        }
        let a = &self.model.alphabet().letters()[letter];
        let exp = self.views[v as usize]
            .exp
            .iter()
            .map(|e| {
                e.as_ref()
                    .map(|e| e.residual_letter(a))
                    .filter(|r| !r.is_empty())
            })
            .collect();
        let id = self.views.len() as ViewId;
        self.views.push(View { exp });
        self.children.insert((v, letter), id);
        id
    }

    /// Words of `L(π)` over the model alphabet in alphabet order, as letter
    /// indices. Words using other letters are dropped: no state survives them.
    fn lang(&mut self, pi: &ObsExpr) -> Arc<Vec<Vec<usize>>> {
        if let Some(l) = self.langs.get(pi) {
            return l.clone();
        }
        let alpha = self.model.alphabet();
        let mut words: Vec<Vec<usize>> = pi
            .lang()
            .iter()
            .filter_map(|w| w.letters().iter().map(|a| alpha.index_of(a)).collect())
            .collect();
        words.sort();
        let l = Arc::new(words);
        self.langs.insert(pi.clone(), l.clone());
        l
    }

    /// View after observing `w` from `v`, if `s` survives it.
    fn follow(&mut self, v: ViewId, s: StateId, w: &[usize]) -> Option<ViewId> {
        let mut cur = v;
        for &a in w {
            cur = self.child(cur, a);
            self.views[cur as usize].exp[s].as_ref()?;
        }
        Some(cur)
    }

    fn eval(&mut self, v: ViewId, s: StateId, f: &Formula) -> bool {
        match f {
            Formula::Top => true,
            Formula::Bottom => false,
            Formula::Atom(p) => self.model.skeleton().holds(s, p),
            Formula::Not(a) => !self.eval(v, s, a),
            Formula::And(a, b) => self.eval(v, s, a) && self.eval(v, s, b),
            Formula::Or(a, b) => self.eval(v, s, a) || self.eval(v, s, b),
            Formula::Implies(a, b) => !self.eval(v, s, a) || self.eval(v, s, b),
            _ => {
                let key = (v, s, f as *const Formula);
                if let Some(&r) = self.memo.get(&key) {
                    return r;
                }
                let r = self.eval_modal(v, s, f);
                self.memo.insert(key, r);
                r
            }
        }
    }

    fn eval_modal(&mut self, v: ViewId, s: StateId, f: &Formula) -> bool {
        match f {
            Formula::Know(i, a) | Formula::Poss(i, a) => {
                let want = matches!(f, Formula::Know(..));
                let m = self.model.skeleton();
                let all: Vec<StateId>;
                let class = match m.agent_index(i) {
                    Some(k) => m.relation(k).class(s),
                    None => {
                        all = (0..m.len()).collect();
                        &all
                    }
                };
                for &t in class {
                    if self.views[v as usize].exp[t].is_some() && self.eval(v, t, a) != want {
                        return !want;
                    }
                }
                want
            }
            Formula::Box(pi, a) | Formula::Dia(pi, a) => {
                let want = matches!(f, Formula::Box(..));
                let words = self.lang(pi);
                for w in words.iter() {
                    if let Some(c) = self.follow(v, s, w) {
                        if self.eval(c, s, a) != want {
                            return !want;
                        }
                    }
                }
                want
            }
            _ => unreachable!("eval_modal called on a non-modal formula"),
        }
    }
}

/// `M, s ⊨ f`.
pub fn check(m: &ExpectationModel, s: StateId, f: &Formula) -> bool {
    Checker::new(m).check(s, f)
}

/// `M, point ⊨ f` for each `f`, sharing updates across formulas.
pub fn check_pointed_batch(m: &PointedModel, fs: &[Formula]) -> Vec<bool> {
    Checker::new(&m.model).check_batch(m.point, fs)
}
