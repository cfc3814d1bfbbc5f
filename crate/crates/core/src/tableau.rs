//! Tableau decision procedure with witness-model extraction.
//!
//! Terms are `(σ w ψ)`, `(σ w ✓)` and `(σ, σ')_i`. Labels, words, formulas
//! and expressions are interned into integer ids. Each agent's relation is
//! kept as a partition of labels into classes: the Possibility rule only
//! ever adds a fresh label to an existing class, so Transitivity and
//! Symmetry hold by construction.
//!
//! Saturation is event driven. Every rule is triggered when one of its
//! premises is added, and joined against the premises already present, so
//! the order in which terms arrive does not matter. Deterministic rules run
//! first, then branching rules (depth-first, left alternative first), then
//! Possibility. Every term carries the set of branch points it depends on,
//! which lets the search skip alternatives that cannot repair a clash.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, VecDeque};
use std::hash::BuildHasherDefault;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::formula::{to_nnf, Formula, Signature};
use crate::model::{EpistemicModel, ExpectationModel, Partition, PointedModel};
use crate::obsexpr::{Alphabet, ObsExpr, Word};
use crate::semantics::check;
use crate::Symbol;

/// Deterministic hashing, so iteration order is reproducible across runs.
type Map<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;

pub type Label = u32;
type WordId = u32;
type FId = u32;
type EId = u32;
type Letter = u16;
type Agent = u16;

const EPS: WordId = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub max_terms: usize,
    pub max_branches: usize,
    pub timeout: Duration,
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_terms: 1_000_000,
            max_branches: 100_000,
            timeout: Duration::from_secs(60),
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    /// Branches opened, counting the initial one.
    pub branches: usize,
    /// Terms created over the whole search.
    pub terms: usize,
    /// Largest number of labels on one branch.
    pub max_labels: usize,
    /// Deepest nesting of branch points.
    pub max_depth: usize,
    /// Right alternatives skipped because the left clash did not depend on
    /// the branch point.
    pub backjumps: usize,
    /// Branches closed by the `{K_iψ, ¬ψ}` marking condition rather than by
    /// a literal clash.
    pub marking_closures: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(PointedModel),
    Unsat,
    /// A resource cap was hit; the reason names it.
    Indeterminate(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub verdict: Verdict,
    pub stats: Stats,
    /// `RULE name | premises | conclusions` lines; empty unless tracing.
    pub trace: Vec<String>,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self.verdict, Verdict::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self.verdict, Verdict::Unsat)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("internal error: {0}")]
    Internal(String),
}

/// Set of branch points, as a bitset over search depth.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Deps(Option<Arc<Vec<u64>>>);

impl Deps {
    fn none() -> Deps {
        Deps(None)
    }

    fn single(bit: usize) -> Deps {
        let mut v = vec![0u64; bit / 64 + 1];
        v[bit / 64] |= 1 << (bit % 64);
        Deps(Some(Arc::new(v)))
    }

    fn union(&self, other: &Deps) -> Deps {
        match (&self.0, &other.0) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) if Arc::ptr_eq(a, b) => self.clone(),
            (Some(a), Some(b)) => {
                let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
                let mut v = (**long).clone();
                for (x, y) in v.iter_mut().zip(short.iter()) {
                    *x |= y;
                }
                if v == **long {
                    return Deps(Some(long.clone()));
                }
                Deps(Some(Arc::new(v)))
            }
        }
    }

    fn contains(&self, bit: usize) -> bool {
        match &self.0 {
            None => false,
            Some(v) => v.get(bit / 64).is_some_and(|w| w & (1 << (bit % 64)) != 0),
        }
    }

    fn without(&self, bit: usize) -> Deps {
        if !self.contains(bit) {
            return self.clone();
        }
        let mut v = (**self.0.as_ref().expect("contains a bit")).clone();
        v[bit / 64] &= !(1 << (bit % 64));
        if v.iter().all(|w| *w == 0) {
            Deps(None)
        } else {
            Deps(Some(Arc::new(v)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Shape {
    Empty,
    Eps,
    Letter(Letter),
    Concat(EId, EId),
    Union(EId, EId),
}

struct ExprInfo {
    expr: ObsExpr,
    shape: Shape,
    empty: bool,
    nullable: bool,
    max_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Top,
    Bottom,
    Lit(u32, bool),
    And(FId, FId),
    Or(FId, FId),
    Know(Agent, FId),
    Poss(Agent, FId),
    Box(EId, FId),
    Dia(EId, FId),
}

#[derive(Debug, Clone, Copy)]
enum Term {
    F(Label, WordId, FId),
    S(Label, WordId),
    R(Label, Label, Agent),
}

#[derive(Debug, Clone, Copy)]
enum Event {
    F(Label, WordId, FId),
    S(Label, WordId),
}

/// One tableau branch: a term set with the indexes the rules join on.
#[derive(Clone)]
pub struct TableauBranch {
    id: u32,
    terms: Map<(Label, WordId, FId), Deps>,
    surv: Map<(Label, WordId), Deps>,
    surv_words: Vec<Vec<WordId>>,
    children: Map<(Label, WordId), Vec<Letter>>,
    boxes: Map<(Label, WordId), Vec<FId>>,
    kdem: Map<(Agent, u32, WordId), Vec<(FId, Deps, Label)>>,
    class_of: Vec<Vec<u32>>,
    member_deps: Vec<Vec<Deps>>,
    members: Vec<Vec<Label>>,
    lits: Map<(Label, u32, bool), Deps>,
    queue: VecDeque<Event>,
    splits: VecDeque<(Label, WordId, FId)>,
    poss: VecDeque<(Label, WordId, FId)>,
    closed: Option<Deps>,
}

impl TableauBranch {
    pub fn is_closed(&self) -> bool {
        self.closed.is_some()
    }

    pub fn labels(&self) -> usize {
        self.class_of.len()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len() + self.surv.len()
    }
}

/// Result of one round of rule application.
pub enum Expansion {
    /// Deterministic saturation derived `⊥`.
    Closed(TableauBranch),
    /// A branching rule or Possibility fired; the children are not yet
    /// saturated.
    Children(Vec<TableauBranch>),
    /// No rule applies and the branch is open.
    Saturated(TableauBranch),
}

enum Pick {
    None,
    Forced,
    Split {
        at: (Label, WordId),
        premise: FId,
        deps: Deps,
        alts: [FId; 2],
        rule: &'static str,
    },
}

enum Outcome {
    Sat(TableauBranch),
    Closed(Deps),
    Limit(String),
}

/// Tableau for one root formula; owns the interners shared by all branches.
pub struct Tableau {
    root: Formula,
    root_id: FId,
    root_depth: usize,
    sig: Signature,
    alphabet: Alphabet,
    letters: Vec<Symbol>,
    agents: Vec<Symbol>,
    atoms: Vec<Symbol>,
    exprs: Vec<ExprInfo>,
    expr_index: Map<ObsExpr, EId>,
    residuals: Map<(EId, Letter), EId>,
    nodes: Vec<Node>,
    node_index: Map<Node, FId>,
    letter_depth: Vec<usize>,
    negations: Map<FId, FId>,
    word_parent: Vec<WordId>,
    word_last: Vec<Letter>,
    word_len: Vec<usize>,
    word_child: Map<(WordId, Letter), WordId>,
    opts: SolveOptions,
    stats: Stats,
    started: Instant,
    events: u64,
    next_branch: u32,
    branch_parent: Vec<u32>,
    log: Vec<(u32, String)>,
    internal: Option<String>,
}

impl Tableau {
    pub fn new(f: &Formula, opts: SolveOptions) -> Tableau {
        let sig = Signature::infer(f);
        let alphabet = sig.alphabet();
        let mut t = Tableau {
            root: f.clone(),
            root_id: 0,
            root_depth: 0,
            letters: alphabet.letters().to_vec(),
            alphabet,
            agents: sig.agents.clone(),
            atoms: sig.atoms.clone(),
            sig,
            exprs: Vec::new(),
            expr_index: Map::default(),
            residuals: Map::default(),
            nodes: Vec::new(),
            node_index: Map::default(),
            letter_depth: Vec::new(),
            negations: Map::default(),
            word_parent: vec![EPS],
            word_last: vec![0],
            word_len: vec![0],
            word_child: Map::default(),
            opts,
            stats: Stats::default(),
            started: Instant::now(),
            events: 0,
            next_branch: 0,
            branch_parent: Vec::new(),
            log: Vec::new(),
            internal: None,
        };
        let nnf = to_nnf(f);
        t.root_id = t.intern_formula(&nnf);
        t.root_depth = t.letter_depth[t.root_id as usize];
        t
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    // ---- interning -------------------------------------------------------

    fn intern_expr(&mut self, e: &ObsExpr) -> EId {
        if let Some(&id) = self.expr_index.get(e) {
            return id;
        }
        let shape = match e {
            ObsExpr::Empty => Shape::Empty,
            ObsExpr::Epsilon => Shape::Eps,
            ObsExpr::Letter(a) => Shape::Letter(
                self.alphabet
                    .index_of(a)
                    .expect("formula letters form the alphabet") as Letter,
            ),
            ObsExpr::Concat(p, q) => Shape::Concat(self.intern_expr(p), self.intern_expr(q)),
            ObsExpr::Union(p, q) => Shape::Union(self.intern_expr(p), self.intern_expr(q)),
        };
        let id = self.exprs.len() as EId;
        self.exprs.push(ExprInfo {
            expr: e.clone(),
            shape,
            empty: e.is_empty(),
            nullable: e.is_nullable(),
            max_len: e.max_word_len().unwrap_or(0),
        });
        self.expr_index.insert(e.clone(), id);
        id
    }

    fn residual(&mut self, e: EId, a: Letter) -> EId {
        if let Some(&r) = self.residuals.get(&(e, a)) {
            return r;
        }
        let letter = self.letters[a as usize].clone();
        let r = self.exprs[e as usize].expr.residual_letter(&letter);
        let id = self.intern_expr(&r);
        self.residuals.insert((e, a), id);
        id
    }

    fn node(&mut self, n: Node) -> FId {
        if let Some(&id) = self.node_index.get(&n) {
            return id;
        }
        let depth = match n {
            Node::Top | Node::Bottom | Node::Lit(..) => 0,
            Node::And(a, b) | Node::Or(a, b) => {
                self.letter_depth[a as usize].max(self.letter_depth[b as usize])
            }
            Node::Know(_, a) | Node::Poss(_, a) => self.letter_depth[a as usize],
            Node::Box(e, a) | Node::Dia(e, a) => {
                self.exprs[e as usize].max_len + self.letter_depth[a as usize]
            }
        };
        let id = self.nodes.len() as FId;
        self.nodes.push(n);
        self.letter_depth.push(depth);
        self.node_index.insert(n, id);
        id
    }

    fn mk_box(&mut self, e: EId, f: FId) -> FId {
        let info = &self.exprs[e as usize];
        if info.empty {
            self.node(Node::Top)
        } else if info.shape == Shape::Eps {
            f
        } else {
            self.node(Node::Box(e, f))
        }
    }

    fn mk_dia(&mut self, e: EId, f: FId) -> FId {
        let info = &self.exprs[e as usize];
        if info.empty {
            self.node(Node::Bottom)
        } else if info.shape == Shape::Eps {
            f
        } else {
            self.node(Node::Dia(e, f))
        }
    }

    fn intern_formula(&mut self, f: &Formula) -> FId {
        match f {
            Formula::Top => self.node(Node::Top),
            Formula::Bottom => self.node(Node::Bottom),
            Formula::Atom(p) => {
                let i = self.atom_index(p);
                self.node(Node::Lit(i, true))
            }
            Formula::Not(a) => match &**a {
                Formula::Atom(p) => {
                    let i = self.atom_index(p);
                    self.node(Node::Lit(i, false))
                }
                _ => panic!("tableau input must be in negation normal form"),
            },
            Formula::And(a, b) => {
                let (a, b) = (self.intern_formula(a), self.intern_formula(b));
                self.node(Node::And(a, b))
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.intern_formula(a), self.intern_formula(b));
                self.node(Node::Or(a, b))
            }
            Formula::Implies(..) => panic!("tableau input must be in negation normal form"),
            Formula::Know(i, a) => {
                let i = self.agent_index(i);
                let a = self.intern_formula(a);
                self.node(Node::Know(i, a))
            }
            Formula::Poss(i, a) => {
                let i = self.agent_index(i);
                let a = self.intern_formula(a);
                self.node(Node::Poss(i, a))
            }
            Formula::Box(p, a) => {
                let e = self.intern_expr(p);
                let a = self.intern_formula(a);
                self.mk_box(e, a)
            }
            Formula::Dia(p, a) => {
                let e = self.intern_expr(p);
                let a = self.intern_formula(a);
                self.mk_dia(e, a)
            }
        }
    }

    fn atom_index(&self, p: &str) -> u32 {
        self.atoms
            .iter()
            .position(|x| &**x == p)
            .expect("formula atoms are in the signature") as u32
    }

    fn agent_index(&self, i: &str) -> Agent {
        self.agents
            .iter()
            .position(|x| &**x == i)
            .expect("formula agents are in the signature") as Agent
    }

    fn negate(&mut self, f: FId) -> FId {
        if let Some(&n) = self.negations.get(&f) {
            return n;
        }
        let n = match self.nodes[f as usize] {
            Node::Top => self.node(Node::Bottom),
            Node::Bottom => self.node(Node::Top),
            Node::Lit(p, s) => self.node(Node::Lit(p, !s)),
            Node::And(a, b) => {
                let (a, b) = (self.negate(a), self.negate(b));
                self.node(Node::Or(a, b))
            }
            Node::Or(a, b) => {
                let (a, b) = (self.negate(a), self.negate(b));
                self.node(Node::And(a, b))
            }
            Node::Know(i, a) => {
                let a = self.negate(a);
                self.node(Node::Poss(i, a))
            }
            Node::Poss(i, a) => {
                let a = self.negate(a);
                self.node(Node::Know(i, a))
            }
            Node::Box(e, a) => {
                let a = self.negate(a);
                self.node(Node::Dia(e, a))
            }
            Node::Dia(e, a) => {
                let a = self.negate(a);
                self.node(Node::Box(e, a))
            }
        };
        self.negations.insert(f, n);
        n
    }

    /// The interned formula as a syntax tree.
    fn formula_of(&self, f: FId) -> Formula {
        match self.nodes[f as usize] {
            Node::Top => Formula::Top,
            Node::Bottom => Formula::Bottom,
            Node::Lit(p, true) => Formula::Atom(self.atoms[p as usize].clone()),
            Node::Lit(p, false) => Formula::not(Formula::Atom(self.atoms[p as usize].clone())),
            Node::And(a, b) => Formula::and(self.formula_of(a), self.formula_of(b)),
            Node::Or(a, b) => Formula::or(self.formula_of(a), self.formula_of(b)),
            Node::Know(i, a) => {
                Formula::Know(self.agents[i as usize].clone(), Arc::new(self.formula_of(a)))
            }
            Node::Poss(i, a) => {
                Formula::Poss(self.agents[i as usize].clone(), Arc::new(self.formula_of(a)))
            }
            Node::Box(e, a) => Formula::boxed(self.exprs[e as usize].expr.clone(), self.formula_of(a)),
            Node::Dia(e, a) => Formula::dia(self.exprs[e as usize].expr.clone(), self.formula_of(a)),
        }
    }

    fn extend_word(&mut self, w: WordId, a: Letter) -> WordId {
        if let Some(&c) = self.word_child.get(&(w, a)) {
            return c;
        }
        let id = self.word_parent.len() as WordId;
        self.word_parent.push(w);
        self.word_last.push(a);
        self.word_len.push(self.word_len[w as usize] + 1);
        self.word_child.insert((w, a), id);
        id
    }

    fn word_id(&mut self, w: &Word) -> WordId {
        let mut id = EPS;
        for a in w.letters() {
            let a = self
                .alphabet
                .index_of(a)
                .unwrap_or_else(|| panic!("letter `{a}` is not in the formula's alphabet"));
            id = self.extend_word(id, a as Letter);
        }
        id
    }

    fn word_of(&self, mut w: WordId) -> Word {
        let mut letters = Vec::with_capacity(self.word_len[w as usize]);
        while w != EPS {
            letters.push(self.letters[self.word_last[w as usize] as usize].clone());
            w = self.word_parent[w as usize];
        }
        letters.reverse();
        Word(letters)
    }

    // ---- tracing ---------------------------------------------------------

    fn show(&self, t: Term) -> String {
        match t {
            Term::F(l, w, f) => format!("(s{l} {} {})", self.word_of(w), self.formula_of(f)),
            Term::S(l, w) => format!("(s{l} {} ✓)", self.word_of(w)),
            Term::R(l, m, i) => format!("(s{l},s{m})_{}", self.agents[i as usize]),
        }
    }

    fn trace(&mut self, b: &TableauBranch, rule: &str, premises: &[Term], conclusions: &[Term]) {
        if !self.opts.trace {
            return;
        }
        let p: Vec<String> = premises.iter().map(|&t| self.show(t)).collect();
        let c: Vec<String> = if conclusions.is_empty() {
            vec!["⊥".to_string()]
        } else {
            conclusions.iter().map(|&t| self.show(t)).collect()
        };
        let line = format!("RULE {rule} | {} | {}", p.join(", "), c.join(", "));
        self.log.push((b.id, line));
    }

    // ---- branch construction ----------------------------------------------

    fn fresh_branch_id(&mut self, parent: Option<u32>) -> u32 {
        let id = self.next_branch;
        self.next_branch += 1;
        self.branch_parent.push(parent.unwrap_or(id));
        self.stats.branches += 1;
        id
    }

    /// Branch holding only the label `s0` with `(s0 ε ✓)`.
    pub fn bare_branch(&mut self) -> TableauBranch {
        let id = self.fresh_branch_id(None);
        let mut b = TableauBranch {
            id,
            terms: Map::default(),
            surv: Map::default(),
            surv_words: Vec::new(),
            children: Map::default(),
            boxes: Map::default(),
            kdem: Map::default(),
            class_of: Vec::new(),
            member_deps: Vec::new(),
            members: Vec::new(),
            lits: Map::default(),
            queue: VecDeque::new(),
            splits: VecDeque::new(),
            poss: VecDeque::new(),
            closed: None,
        };
        self.new_label(&mut b, None);
        self.add_s(&mut b, "Init", &[], 0, EPS, Deps::none());
        b
    }

    /// `{(s0 ε φ), (s0 ε ✓)} ∪ {(s0, s0)_i}` for the root formula `φ`.
    pub fn initial_branch(&mut self) -> TableauBranch {
        let mut b = self.bare_branch();
        let root = self.root_id;
        self.add_f(&mut b, "Init", &[], 0, EPS, root, Deps::none());
        b
    }

    /// Adds `(σ w ψ)`; `ψ` is normalized to NNF. Its symbols must occur in
    /// the root formula.
    pub fn add_formula_term(&mut self, b: &mut TableauBranch, label: Label, w: &Word, f: &Formula) {
        let w = self.word_id(w);
        let f = self.intern_formula(&to_nnf(f));
        self.add_f(b, "Given", &[], label, w, f, Deps::none());
    }

    /// Adds `(σ w ✓)` and, by Survival Chain, every prefix.
    pub fn add_survival_term(&mut self, b: &mut TableauBranch, label: Label, w: &Word) {
        let w = self.word_id(w);
        self.add_s(b, "Given", &[], label, w, Deps::none());
    }

    pub fn has_formula_term(&mut self, b: &TableauBranch, label: Label, w: &Word, f: &Formula) -> bool {
        let w = self.word_id(w);
        let f = self.intern_formula(&to_nnf(f));
        b.terms.contains_key(&(label, w, f))
    }

    pub fn has_survival_term(&mut self, b: &TableauBranch, label: Label, w: &Word) -> bool {
        let w = self.word_id(w);
        b.surv.contains_key(&(label, w))
    }

    /// True when `label` and `other` are in the same class of `agent`.
    pub fn related(&self, b: &TableauBranch, label: Label, other: Label, agent: &str) -> bool {
        match self.agents.iter().position(|a| &**a == agent) {
            Some(i) => b.class_of[label as usize][i] == b.class_of[other as usize][i],
            None => false,
        }
    }

    /// New label in fresh classes, except for `join = (agent, class)`.
    fn new_label(&mut self, b: &mut TableauBranch, join: Option<(Agent, u32, Deps)>) -> Label {
        let l = b.class_of.len() as Label;
        let mut classes = Vec::with_capacity(self.agents.len());
        let mut deps = Vec::with_capacity(self.agents.len());
        for j in 0..self.agents.len() as Agent {
            match &join {
                Some((i, c, d)) if *i == j => {
                    classes.push(*c);
                    deps.push(d.clone());
                    b.members[*c as usize].push(l);
                }
                _ => {
                    classes.push(b.members.len() as u32);
                    deps.push(Deps::none());
                    b.members.push(vec![l]);
                }
            }
        }
        b.class_of.push(classes);
        b.member_deps.push(deps);
        b.surv_words.push(Vec::new());
        self.stats.max_labels = self.stats.max_labels.max(b.class_of.len());
        l
    }

    fn close(&mut self, b: &mut TableauBranch, deps: Deps, premises: &[Term]) {
        if b.closed.is_none() {
            self.trace(b, "Clash", premises, &[]);
            b.closed = Some(deps);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn add_f(
        &mut self,
        b: &mut TableauBranch,
        rule: &str,
        premises: &[Term],
        l: Label,
        w: WordId,
        f: FId,
        deps: Deps,
    ) {
        if b.closed.is_some() || self.nodes[f as usize] == Node::Top {
            return;
        }
        if b.terms.contains_key(&(l, w, f)) {
            return;
        }
        if self.word_len[w as usize] + self.letter_depth[f as usize] > self.root_depth
            && self.internal.is_none()
        {
            self.internal = Some(format!(
                "word budget exceeded by {}",
                self.show(Term::F(l, w, f))
            ));
        }
        b.terms.insert((l, w, f), deps);
        self.stats.terms += 1;
        self.trace(b, rule, premises, &[Term::F(l, w, f)]);
        b.queue.push_back(Event::F(l, w, f));
    }

    fn add_s(
        &mut self,
        b: &mut TableauBranch,
        rule: &str,
        premises: &[Term],
        l: Label,
        w: WordId,
        deps: Deps,
    ) {
        if b.closed.is_some() || b.surv.contains_key(&(l, w)) {
            return;
        }
        b.surv.insert((l, w), deps.clone());
        b.surv_words[l as usize].push(w);
        self.stats.terms += 1;
        self.trace(b, rule, premises, &[Term::S(l, w)]);
        b.queue.push_back(Event::S(l, w));
        if w != EPS {
            let parent = self.word_parent[w as usize];
            self.add_s(b, "Survival Chain", &[Term::S(l, w)], l, parent, deps);
        }
    }

    fn deps_of(b: &TableauBranch, l: Label, w: WordId, f: FId) -> Deps {
        b.terms.get(&(l, w, f)).cloned().unwrap_or_default()
    }

    // ---- deterministic rules ---------------------------------------------

    fn process(&mut self, b: &mut TableauBranch, ev: Event) {
        match ev {
            Event::F(l, w, f) => self.process_formula(b, l, w, f),
            Event::S(l, w) => self.process_survival(b, l, w),
        }
    }

    fn process_formula(&mut self, b: &mut TableauBranch, l: Label, w: WordId, f: FId) {
        let d = Self::deps_of(b, l, w, f);
        let me = Term::F(l, w, f);
        match self.nodes[f as usize] {
            Node::Top => {}
            Node::Bottom => self.close(b, d, &[me]),
            Node::Lit(p, s) => {
                if w != EPS {
                    self.add_f(b, "Constant Valuation Up", &[me], l, EPS, f, d);
                    return;
                }
                if let Some(d2) = b.lits.get(&(l, p, !s)).cloned() {
                    let other = self.node(Node::Lit(p, !s));
                    self.close(b, d.union(&d2), &[me, Term::F(l, EPS, other)]);
                    return;
                }
                b.lits.insert((l, p, s), d);
            }
            Node::And(x, y) => {
                self.add_f(b, "AND", &[me], l, w, x, d.clone());
                self.add_f(b, "AND", &[me], l, w, y, d);
            }
            Node::Or(..) => b.splits.push_back((l, w, f)),
            Node::Know(i, g) => {
                let class = b.class_of[l as usize][i as usize];
                b.kdem
                    .entry((i, class, w))
                    .or_default()
                    .push((f, d.clone(), l));
                let members = b.members[class as usize].clone();
                for m in members {
                    if let Some(ds) = b.surv.get(&(m, w)).cloned() {
                        let deps = d
                            .union(&ds)
                            .union(&b.member_deps[l as usize][i as usize])
                            .union(&b.member_deps[m as usize][i as usize]);
                        let prem = [me, Term::S(m, w), Term::R(l, m, i)];
                        self.add_f(b, "Knowledge", &prem, m, w, g, deps);
                    }
                }
            }
            Node::Poss(..) => b.poss.push_back((l, w, f)),
            Node::Box(e, g) => {
                b.boxes.entry((l, w)).or_default().push(f);
                if self.exprs[e as usize].nullable {
                    self.add_f(b, "Empty Box", &[me], l, w, g, d.clone());
                }
                let kids = b.children.get(&(l, w)).cloned().unwrap_or_default();
                for a in kids {
                    let wa = self.extend_word(w, a);
                    let ds = b.surv.get(&(l, wa)).cloned().unwrap_or_default();
                    let r = self.residual(e, a);
                    let proj = self.mk_box(r, g);
                    self.add_f(b, "Box Project", &[me, Term::S(l, wa)], l, wa, proj, d.union(&ds));
                }
            }
            Node::Dia(e, g) => match self.exprs[e as usize].shape {
                Shape::Empty => self.close(b, d, &[me]),
                Shape::Eps => self.add_f(b, "Empty Diamond", &[me], l, w, g, d),
                Shape::Letter(a) => {
                    let wa = self.extend_word(w, a);
                    self.add_s(b, "Diamond Project", &[me], l, wa, d.clone());
                    self.add_f(b, "Diamond Project", &[me], l, wa, g, d);
                }
                Shape::Concat(p, q) => {
                    let inner = self.mk_dia(q, g);
                    let outer = self.mk_dia(p, inner);
                    self.add_f(b, "Diamond Decompose", &[me], l, w, outer, d);
                }
                Shape::Union(..) => b.splits.push_back((l, w, f)),
            },
        }
    }

    fn process_survival(&mut self, b: &mut TableauBranch, l: Label, w: WordId) {
        let ds = b.surv.get(&(l, w)).cloned().unwrap_or_default();
        if w != EPS {
            let parent = self.word_parent[w as usize];
            let a = self.word_last[w as usize];
            b.children.entry((l, parent)).or_default().push(a);
            let boxes = b.boxes.get(&(l, parent)).cloned().unwrap_or_default();
            for bf in boxes {
                let Node::Box(e, g) = self.nodes[bf as usize] else {
                    unreachable!("box index holds boxes")
                };
                let db = Self::deps_of(b, l, parent, bf);
                let r = self.residual(e, a);
                let proj = self.mk_box(r, g);
                let prem = [Term::F(l, parent, bf), Term::S(l, w)];
                self.add_f(b, "Box Project", &prem, l, w, proj, db.union(&ds));
            }
        }
        for i in 0..self.agents.len() as Agent {
            let class = b.class_of[l as usize][i as usize];
            let Some(demands) = b.kdem.get(&(i, class, w)).cloned() else {
                continue;
            };
            for (kf, dk, src) in demands {
                let Node::Know(_, g) = self.nodes[kf as usize] else {
                    unreachable!("demand index holds knowledge formulas")
                };
                let deps = dk
                    .union(&ds)
                    .union(&b.member_deps[src as usize][i as usize])
                    .union(&b.member_deps[l as usize][i as usize]);
                let prem = [Term::F(src, w, kf), Term::S(l, w), Term::R(src, l, i)];
                self.add_f(b, "Knowledge", &prem, l, w, g, deps);
            }
        }
    }

    fn over_limit(&mut self) -> Option<String> {
        if self.stats.terms > self.opts.max_terms {
            return Some(format!("term limit {} exceeded", self.opts.max_terms));
        }
        if self.stats.branches > self.opts.max_branches {
            return Some(format!("branch limit {} exceeded", self.opts.max_branches));
        }
        self.events += 1;
        if self.events.is_multiple_of(1024) && self.started.elapsed() > self.opts.timeout {
            return Some(format!("time limit {:?} exceeded", self.opts.timeout));
        }
        None
    }

    /// Runs deterministic rules to fixpoint.
    fn saturate(&mut self, b: &mut TableauBranch) -> Result<(), String> {
        while let Some(ev) = b.queue.pop_front() {
            if b.closed.is_some() {
                b.queue.clear();
                break;
            }
            self.process(b, ev);
            if let Some(r) = self.over_limit() {
                return Err(r);
            }
        }
        Ok(())
    }

    // ---- branching and Possibility ----------------------------------------

    /// `ψ` closes the branch at once: it is `⊥` or a literal whose
    /// complement already holds at `(σ ε)`.
    fn refuted(&mut self, b: &TableauBranch, l: Label, f: FId) -> Option<(Deps, Term)> {
        match self.nodes[f as usize] {
            Node::Bottom => Some((Deps::none(), Term::F(l, EPS, f))),
            Node::Lit(p, s) => {
                let d = b.lits.get(&(l, p, !s))?.clone();
                let other = self.node(Node::Lit(p, !s));
                Some((d, Term::F(l, EPS, other)))
            }
            _ => None,
        }
    }

    fn pick_split(&mut self, b: &mut TableauBranch) -> Pick {
        while let Some((l, w, f)) = b.splits.pop_front() {
            let (alts, rule) = match self.nodes[f as usize] {
                Node::Or(x, y) => ([x, y], "OR"),
                Node::Dia(e, g) => {
                    let Shape::Union(p, q) = self.exprs[e as usize].shape else {
                        unreachable!("only unions are split")
                    };
                    ([self.mk_dia(p, g), self.mk_dia(q, g)], "Diamond ND Decompose")
                }
                _ => unreachable!("only disjunctions and union diamonds are split"),
            };
            if alts.iter().any(|&x| b.terms.contains_key(&(l, w, x)) || self.nodes[x as usize] == Node::Top) {
                continue;
            }
            let d = Self::deps_of(b, l, w, f);
            let me = Term::F(l, w, f);
            match (self.refuted(b, l, alts[0]), self.refuted(b, l, alts[1])) {
                (Some((d0, t0)), Some((d1, t1))) => {
                    self.close(b, d.union(&d0).union(&d1), &[me, t0, t1]);
                    return Pick::Forced;
                }
                (Some((d0, t0)), None) => {
                    self.add_f(b, rule, &[me, t0], l, w, alts[1], d.union(&d0));
                    return Pick::Forced;
                }
                (None, Some((d1, t1))) => {
                    self.add_f(b, rule, &[me, t1], l, w, alts[0], d.union(&d1));
                    return Pick::Forced;
                }
                (None, None) => {
                    return Pick::Split {
                        at: (l, w),
                        premise: f,
                        deps: d,
                        alts,
                        rule,
                    }
                }
            }
        }
        Pick::None
    }

    /// Some member of `σ`'s class survives `w` and already carries `ψ`, so
    /// `(σ w K̂_i ψ)` needs no fresh label.
    fn witness(&self, b: &TableauBranch, l: Label, w: WordId, f: FId) -> Option<Label> {
        let Node::Poss(i, g) = self.nodes[f as usize] else {
            return None;
        };
        let class = b.class_of[l as usize][i as usize];
        b.members[class as usize].iter().copied().find(|&m| {
            b.surv.contains_key(&(m, w))
                && match self.nodes[g as usize] {
                    Node::Top => true,
                    Node::Lit(p, s) => b.lits.contains_key(&(m, p, s)),
                    _ => b.terms.contains_key(&(m, w, g)),
                }
        })
    }

    /// True when the Possibility rule is suppressed for `(σ w K̂_i ψ)`
    /// because a same-class witness exists.
    pub fn blocked(&mut self, b: &TableauBranch, label: Label, w: &Word, f: &Formula) -> bool {
        let w = self.word_id(w);
        let f = self.intern_formula(&to_nnf(f));
        self.witness(b, label, w, f).is_some()
    }

    /// Applies Possibility to the first unwitnessed diamond; false if none.
    fn apply_possibility(&mut self, b: &mut TableauBranch) -> bool {
        while let Some((l, w, f)) = b.poss.pop_front() {
            if self.witness(b, l, w, f).is_some() {
                continue;
            }
            let Node::Poss(i, g) = self.nodes[f as usize] else {
                unreachable!("possibility agenda holds possibility formulas")
            };
            let d = Self::deps_of(b, l, w, f);
            let class = b.class_of[l as usize][i as usize];
            let n = self.new_label(b, Some((i, class, d.clone())));
            let me = Term::F(l, w, f);
            if self.opts.trace {
                let concl = [Term::R(l, n, i), Term::S(n, w), Term::F(n, w, g)];
                self.trace(b, "Possibility", &[me], &concl);
            }
            let saved = self.opts.trace;
            self.opts.trace = false;
            self.add_s(b, "Possibility", &[me], n, w, d.clone());
            self.add_f(b, "Possibility", &[me], n, w, g, d);
            self.opts.trace = saved;
            return true;
        }
        false
    }

    /// The `{(σ w K_iψ), (σ w ¬ψ)}` marking condition.
    fn marking(&mut self, b: &mut TableauBranch) -> bool {
        let knows: Vec<(Label, WordId, FId)> = {
            let mut v: Vec<_> = b
                .terms
                .keys()
                .filter(|(_, _, f)| matches!(self.nodes[*f as usize], Node::Know(..)))
                .copied()
                .collect();
            v.sort_unstable();
            v
        };
        for (l, w, f) in knows {
            let Node::Know(_, g) = self.nodes[f as usize] else {
                unreachable!()
            };
            let ng = self.negate(g);
            if let Some(d2) = b.terms.get(&(l, w, ng)).cloned() {
                let d = Self::deps_of(b, l, w, f).union(&d2);
                self.stats.marking_closures += 1;
                self.close(b, d, &[Term::F(l, w, f), Term::F(l, w, ng)]);
                return true;
            }
        }
        false
    }

    fn child_branch(&mut self, b: &TableauBranch) -> TableauBranch {
        let mut c = b.clone();
        c.id = self.fresh_branch_id(Some(b.id));
        c
    }

    /// One round: deterministic saturation, then at most one branching or
    /// Possibility step.
    pub fn apply_rules(&mut self, mut b: TableauBranch) -> Expansion {
        if self.saturate(&mut b).is_err() || b.is_closed() {
            return if b.is_closed() {
                Expansion::Closed(b)
            } else {
                Expansion::Children(vec![b])
            };
        }
        match self.pick_split(&mut b) {
            Pick::Forced => return Expansion::Children(vec![b]),
            Pick::Split {
                at: (l, w),
                premise,
                deps,
                alts,
                rule,
            } => {
                let mut left = self.child_branch(&b);
                let mut right = self.child_branch(&b);
                let me = Term::F(l, w, premise);
                self.add_f(&mut left, rule, &[me], l, w, alts[0], deps.clone());
                self.add_f(&mut right, rule, &[me], l, w, alts[1], deps);
                return Expansion::Children(vec![left, right]);
            }
            Pick::None => {}
        }
        if self.apply_possibility(&mut b) {
            return Expansion::Children(vec![b]);
        }
        if self.marking(&mut b) {
            return Expansion::Closed(b);
        }
        Expansion::Saturated(b)
    }

    fn search(&mut self, mut b: TableauBranch, depth: usize) -> Outcome {
        self.stats.max_depth = self.stats.max_depth.max(depth);
        loop {
            if let Err(r) = self.saturate(&mut b) {
                return Outcome::Limit(r);
            }
            if let Some(d) = b.closed.take() {
                return Outcome::Closed(d);
            }
            match self.pick_split(&mut b) {
                Pick::Forced => continue,
                Pick::Split {
                    at: (l, w),
                    premise,
                    deps,
                    alts,
                    rule,
                } => {
                    let bit = depth;
                    let me = Term::F(l, w, premise);
                    let mut left = self.child_branch(&b);
                    self.add_f(&mut left, rule, &[me], l, w, alts[0], deps.union(&Deps::single(bit)));
                    let dl = match self.search(left, depth + 1) {
                        Outcome::Closed(dl) => dl,
                        other => return other,
                    };
                    if !dl.contains(bit) {
                        self.stats.backjumps += 1;
                        return Outcome::Closed(dl);
                    }
                    if let Some(r) = self.over_limit() {
                        return Outcome::Limit(r);
                    }
                    let mut right = self.child_branch(&b);
                    self.add_f(&mut right, rule, &[me], l, w, alts[1], deps.union(&dl.without(bit)));
                    return self.search(right, depth + 1);
                }
                Pick::None => {}
            }
            if self.apply_possibility(&mut b) {
                continue;
            }
            if self.marking(&mut b) {
                return Outcome::Closed(b.closed.take().unwrap_or_default());
            }
            return Outcome::Sat(b);
        }
    }

    /// Builds the witness model of a saturated open branch and checks it
    /// against the root formula.
    pub fn extract_model(&self, b: &TableauBranch) -> Result<PointedModel, TableauError> {
        let n = b.labels();
        let names: Vec<Symbol> = (0..n).map(|l| Symbol::from(format!("s{l}"))).collect();
        let relations = (0..self.agents.len())
            .map(|i| {
                let mut order: Vec<u32> = Vec::new();
                for l in 0..n {
                    let c = b.class_of[l][i];
                    if !order.contains(&c) {
                        order.push(c);
                    }
                }
                let cells = order
                    .iter()
                    .map(|&c| b.members[c as usize].iter().map(|&m| m as usize).collect())
                    .collect();
                Partition::from_cells(n, cells)
            })
            .collect();
        let valuation = (0..n as Label)
            .map(|l| {
                (0..self.atoms.len() as u32)
                    .filter(|&p| b.lits.contains_key(&(l, p, true)))
                    .map(|p| self.atoms[p as usize].clone())
                    .collect()
            })
            .collect();
        let mut exp = Vec::with_capacity(n);
        for l in 0..n {
            let words: Vec<Word> = b.surv_words[l].iter().map(|&w| self.word_of(w)).collect();
            let mut maximal: Vec<Word> = words
                .iter()
                .filter(|w| !words.iter().any(|v| v.len() > w.len() && w.is_prefix_of(v)))
                .cloned()
                .collect();
            self.alphabet.sort_words(&mut maximal);
            let e = ObsExpr::sum_of_words(&maximal)
                .map_err(|_| TableauError::Internal(format!("label s{l} has no survival word")))?;
            exp.push(e);
        }
        let skeleton = EpistemicModel::from_parts(
            self.agents.clone(),
            self.atoms.clone(),
            names,
            valuation,
            relations,
        );
        let model = ExpectationModel::from_parts(self.alphabet.clone(), skeleton, exp);
        model
            .validate()
            .map_err(|e| TableauError::Internal(format!("extracted model is invalid: {e}")))?;
        if !check(&model, 0, &self.root) {
            return Err(TableauError::Internal(format!(
                "extracted model does not satisfy {}",
                self.root
            )));
        }
        Ok(PointedModel { model, point: 0 })
    }

    fn path_trace(&self, leaf: u32) -> Vec<String> {
        let mut path = vec![leaf];
        let mut cur = leaf;
        while self.branch_parent[cur as usize] != cur {
            cur = self.branch_parent[cur as usize];
            path.push(cur);
        }
        self.log
            .iter()
            .filter(|(id, _)| path.contains(id))
            .map(|(_, l)| l.clone())
            .collect()
    }

    /// Decides satisfiability of the root formula.
    pub fn solve(&mut self) -> Result<SolveResult, TableauError> {
        self.started = Instant::now();
        let b = self.initial_branch();
        let outcome = self.search(b, 0);
        if let Some(msg) = self.internal.take() {
            return Err(TableauError::Internal(msg));
        }
        let (verdict, trace) = match outcome {
            Outcome::Sat(b) => {
                let m = self.extract_model(&b)?;
                (Verdict::Sat(m), self.path_trace(b.id))
            }
            Outcome::Closed(_) => (Verdict::Unsat, self.log.iter().map(|(_, l)| l.clone()).collect()),
            Outcome::Limit(r) => (Verdict::Indeterminate(r), Vec::new()),
        };
        Ok(SolveResult {
            verdict,
            stats: self.stats.clone(),
            trace,
        })
    }
}

/// Decides satisfiability with default resource caps.
pub fn solve(f: &Formula) -> Result<SolveResult, TableauError> {
    solve_with(f, &SolveOptions::default())
}

pub fn solve_with(f: &Formula, opts: &SolveOptions) -> Result<SolveResult, TableauError> {
    Tableau::new(f, opts.clone()).solve()
}
