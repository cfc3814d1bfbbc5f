//! Formula syntax, parsing and printing, negation normal form, Fischer-Ladner
//! closure and fragment classification.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::obsexpr::{parse_union, Alphabet, ObsExpr};
use crate::syntax::{check_symbol_name, ParseError, Tok, Tokens};
use crate::Symbol;

/// Abstract syntax. Children are shared, so cloning is cheap.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Bottom,
    Atom(Symbol),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Implies(Arc<Formula>, Arc<Formula>),
    Know(Symbol, Arc<Formula>),
    Poss(Symbol, Arc<Formula>),
    Box(ObsExpr, Arc<Formula>),
    Dia(ObsExpr, Arc<Formula>),
}

/// An NNF leaf: an atom with a polarity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedLiteral {
    pub atom: Symbol,
    pub positive: bool,
}

impl SignedLiteral {
    pub fn of(f: &Formula) -> Option<SignedLiteral> {
        match f {
            Formula::Atom(p) => Some(SignedLiteral {
                atom: p.clone(),
                positive: true,
            }),
            Formula::Not(g) => match &**g {
                Formula::Atom(p) => Some(SignedLiteral {
                    atom: p.clone(),
                    positive: false,
                }),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn negated(&self) -> SignedLiteral {
        SignedLiteral {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fragment {
    WordSingle,
    WordMulti,
    StarFreeSingle,
    StarFreeMulti,
}

impl Fragment {
    pub fn is_word(self) -> bool {
        matches!(self, Fragment::WordSingle | Fragment::WordMulti)
    }

    pub fn is_single_agent(self) -> bool {
        matches!(self, Fragment::WordSingle | Fragment::StarFreeSingle)
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fragment::WordSingle => "word-single",
            Fragment::WordMulti => "word-multi",
            Fragment::StarFreeSingle => "starfree-single",
            Fragment::StarFreeMulti => "starfree-multi",
        })
    }
}

impl Formula {
    pub fn atom(p: impl AsRef<str>) -> Formula {
        Formula::Atom(Symbol::from(p.as_ref()))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Arc::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Arc::new(a), Arc::new(b))
    }

    pub fn know(i: impl AsRef<str>, f: Formula) -> Formula {
        Formula::Know(Symbol::from(i.as_ref()), Arc::new(f))
    }

    pub fn poss(i: impl AsRef<str>, f: Formula) -> Formula {
        Formula::Poss(Symbol::from(i.as_ref()), Arc::new(f))
    }

    pub fn boxed(pi: ObsExpr, f: Formula) -> Formula {
        Formula::Box(pi, Arc::new(f))
    }

    pub fn dia(pi: ObsExpr, f: Formula) -> Formula {
        Formula::Dia(pi, Arc::new(f))
    }

    /// Left-nested conjunction; `⊤` when empty.
    pub fn conj<I: IntoIterator<Item = Formula>>(fs: I) -> Formula {
        fs.into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; `⊥` when empty.
    pub fn disj<I: IntoIterator<Item = Formula>>(fs: I) -> Formula {
        fs.into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::Bottom)
    }

    /// `[π]ψ` normalized: `⊤` if `L(π)` is empty, `ψ` if `π` is `ε`.
    pub fn box_nnf(pi: ObsExpr, f: Formula) -> Formula {
        if pi.is_empty() {
            Formula::Top
        } else if pi == ObsExpr::Epsilon {
            f
        } else {
            Formula::boxed(pi, f)
        }
    }

    /// `⟨π⟩ψ` normalized: `⊥` if `L(π)` is empty, `ψ` if `π` is `ε`.
    pub fn dia_nnf(pi: ObsExpr, f: Formula) -> Formula {
        if pi.is_empty() {
            Formula::Bottom
        } else if pi == ObsExpr::Epsilon {
            f
        } else {
            Formula::dia(pi, f)
        }
    }

    /// AST node count; a modality counts `1 + |π|` plus its body.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => 1,
            Formula::Not(a) | Formula::Know(_, a) | Formula::Poss(_, a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Box(p, a) | Formula::Dia(p, a) => 1 + p.size() + a.size(),
        }
    }

    /// Longest chain of observed letters along any path through modalities.
    pub fn letter_depth(&self) -> usize {
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => 0,
            Formula::Not(a) | Formula::Know(_, a) | Formula::Poss(_, a) => a.letter_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.letter_depth().max(b.letter_depth())
            }
            Formula::Box(p, a) | Formula::Dia(p, a) => {
                p.max_word_len().unwrap_or(0) + a.letter_depth()
            }
        }
    }

    /// Nesting depth of epistemic modalities.
    pub fn epistemic_depth(&self) -> usize {
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => 0,
            Formula::Not(a) | Formula::Box(_, a) | Formula::Dia(_, a) => a.epistemic_depth(),
            Formula::Know(_, a) | Formula::Poss(_, a) => 1 + a.epistemic_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.epistemic_depth().max(b.epistemic_depth())
            }
        }
    }

    fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => {}
            Formula::Not(a) | Formula::Know(_, a) | Formula::Poss(_, a) => a.visit(f),
            Formula::Box(_, a) | Formula::Dia(_, a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Distinct atoms, in order of first occurrence.
    pub fn atoms(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        self.visit(&mut |g| {
            if let Formula::Atom(p) = g {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    /// Distinct agents, in order of first occurrence.
    pub fn agents(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        self.visit(&mut |g| {
            if let Formula::Know(i, _) | Formula::Poss(i, _) = g {
                if !out.contains(i) {
                    out.push(i.clone());
                }
            }
        });
        out
    }

    /// Distinct letters, in order of first occurrence.
    pub fn letters(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        self.visit(&mut |g| {
            if let Formula::Box(p, _) | Formula::Dia(p, _) = g {
                for a in p.letters() {
                    if !out.contains(&a) {
                        out.push(a);
                    }
                }
            }
        });
        out
    }

    /// True when negation occurs only on atoms and there is no implication.
    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => true,
            Formula::Not(a) => matches!(**a, Formula::Atom(_)),
            Formula::Implies(..) => false,
            Formula::And(a, b) | Formula::Or(a, b) => a.is_nnf() && b.is_nnf(),
            Formula::Know(_, a) | Formula::Poss(_, a) => a.is_nnf(),
            Formula::Box(_, a) | Formula::Dia(_, a) => a.is_nnf(),
        }
    }

    pub fn classify_fragment(&self) -> Fragment {
        let mut word = true;
        self.visit(&mut |g| {
            if let Formula::Box(p, _) | Formula::Dia(p, _) = g {
                word &= p.is_union_free();
            }
        });
        let single = self.agents().len() <= 1;
        match (word, single) {
            (true, true) => Fragment::WordSingle,
            (true, false) => Fragment::WordMulti,
            (false, true) => Fragment::StarFreeSingle,
            (false, false) => Fragment::StarFreeMulti,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            _ => 3,
        }
    }
}

/// Negation normal form. Modalities over an empty language collapse to
/// `⊤`/`⊥` and modalities over exactly `ε` are dropped.
pub fn to_nnf(f: &Formula) -> Formula {
    match f {
        Formula::Top | Formula::Bottom | Formula::Atom(_) => f.clone(),
        Formula::Not(a) => negate_nnf(a),
        Formula::And(a, b) => Formula::and(to_nnf(a), to_nnf(b)),
        Formula::Or(a, b) => Formula::or(to_nnf(a), to_nnf(b)),
        Formula::Implies(a, b) => Formula::or(negate_nnf(a), to_nnf(b)),
        Formula::Know(i, a) => Formula::Know(i.clone(), Arc::new(to_nnf(a))),
        Formula::Poss(i, a) => Formula::Poss(i.clone(), Arc::new(to_nnf(a))),
        Formula::Box(p, a) => Formula::box_nnf(p.clone(), to_nnf(a)),
        Formula::Dia(p, a) => Formula::dia_nnf(p.clone(), to_nnf(a)),
    }
}

/// `to_nnf(¬f)`.
pub fn negate_nnf(f: &Formula) -> Formula {
    match f {
        Formula::Top => Formula::Bottom,
        Formula::Bottom => Formula::Top,
        Formula::Atom(_) => Formula::Not(Arc::new(f.clone())),
        Formula::Not(a) => to_nnf(a),
        Formula::And(a, b) => Formula::or(negate_nnf(a), negate_nnf(b)),
        Formula::Or(a, b) => Formula::and(negate_nnf(a), negate_nnf(b)),
        Formula::Implies(a, b) => Formula::and(to_nnf(a), negate_nnf(b)),
        Formula::Know(i, a) => Formula::Poss(i.clone(), Arc::new(negate_nnf(a))),
        Formula::Poss(i, a) => Formula::Know(i.clone(), Arc::new(negate_nnf(a))),
        Formula::Box(p, a) => Formula::dia_nnf(p.clone(), negate_nnf(a)),
        Formula::Dia(p, a) => Formula::box_nnf(p.clone(), negate_nnf(a)),
    }
}

/// One application of every closure rule to `f`, over the letters `sigma`.
fn closure_step(f: &Formula, sigma: &[Symbol], out: &mut Vec<Formula>) {
    out.push(negate_nnf(f));
    match f {
        Formula::Top | Formula::Bottom | Formula::Atom(_) => {}
        Formula::Not(a) | Formula::Know(_, a) | Formula::Poss(_, a) => out.push((**a).clone()),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            out.push((**a).clone());
            out.push((**b).clone());
        }
        Formula::Box(p, a) | Formula::Dia(p, a) => {
            let is_box = matches!(f, Formula::Box(..));
            let mk = |pi: ObsExpr, body: Formula| {
                if is_box {
                    Formula::box_nnf(pi, body)
                } else {
                    Formula::dia_nnf(pi, body)
                }
            };
            out.push((**a).clone());
            match p {
                ObsExpr::Concat(p1, p2) => {
                    let inner = mk((**p2).clone(), (**a).clone());
                    out.push(mk((**p1).clone(), inner));
                }
                ObsExpr::Union(p1, p2) => {
                    out.push(mk((**p1).clone(), (**a).clone()));
                    out.push(mk((**p2).clone(), (**a).clone()));
                }
                _ => {}
            }
            if is_box {
                for x in sigma {
                    let r = p.residual_letter(x);
                    if !r.is_empty() {
                        out.push(Formula::box_nnf(r, (**a).clone()));
                    }
                }
            }
        }
    }
}

/// Fischer-Ladner closure of an NNF formula: the least set containing `f`
/// and closed under subformulas, decomposition of concatenation and union,
/// residuation of boxes by the formula's letters, and NNF negation.
pub fn fl_closure(f: &Formula) -> BTreeSet<Formula> {
    let sigma = f.letters();
    let mut seen = BTreeSet::new();
    let mut work = vec![f.clone()];
    let mut buf = Vec::new();
    while let Some(g) = work.pop() {
        if seen.contains(&g) {
            continue;
        }
        closure_step(&g, &sigma, &mut buf);
        seen.insert(g);
        for h in buf.drain(..) {
            if !seen.contains(&h) {
                work.push(h);
            }
        }
    }
    seen
}

/// True when applying every closure rule to every member adds nothing.
pub fn is_fl_closed(set: &BTreeSet<Formula>, sigma: &[Symbol]) -> bool {
    let mut buf = Vec::new();
    set.iter().all(|g| {
        buf.clear();
        closure_step(g, sigma, &mut buf);
        buf.iter().all(|h| set.contains(h))
    })
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, g: &Formula, min: u8) -> fmt::Result {
            if g.precedence() < min {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        }
        match self {
            Formula::Top => f.write_str("true"),
            Formula::Bottom => f.write_str("false"),
            Formula::Atom(p) => f.write_str(p),
            Formula::Not(a) => {
                f.write_str("~")?;
                child(f, a, 3)
            }
            Formula::And(a, b) => {
                child(f, a, 2)?;
                f.write_str(" & ")?;
                child(f, b, 3)
            }
            Formula::Or(a, b) => {
                child(f, a, 1)?;
                f.write_str(" | ")?;
                child(f, b, 2)
            }
            Formula::Implies(a, b) => {
                child(f, a, 1)?;
                f.write_str(" -> ")?;
                child(f, b, 0)
            }
            Formula::Know(i, a) => {
                write!(f, "K {i} ")?;
                child(f, a, 3)
            }
            Formula::Poss(i, a) => {
                write!(f, "Khat {i} ")?;
                child(f, a, 3)
            }
            Formula::Box(p, a) => {
                write!(f, "[{p}] ")?;
                child(f, a, 3)
            }
            Formula::Dia(p, a) => {
                write!(f, "<{p}> ")?;
                child(f, a, 3)
            }
        }
    }
}

/// Declared letters, agents and atoms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    pub letters: Vec<Symbol>,
    pub agents: Vec<Symbol>,
    pub atoms: Vec<Symbol>,
}

/// Letter used when a formula observes nothing but a model still needs a
/// non-empty alphabet.
pub const DEFAULT_LETTER: &str = "a";

impl Signature {
    /// The symbols occurring in `f`.
    pub fn infer(f: &Formula) -> Signature {
        Signature {
            letters: f.letters(),
            agents: f.agents(),
            atoms: f.atoms(),
        }
    }

    /// Adds every symbol of `other` not already present.
    pub fn extend(&mut self, other: &Signature) {
        fn add(into: &mut Vec<Symbol>, from: &[Symbol]) {
            for s in from {
                if !into.contains(s) {
                    into.push(s.clone());
                }
            }
        }
        add(&mut self.letters, &other.letters);
        add(&mut self.agents, &other.agents);
        add(&mut self.atoms, &other.atoms);
    }

    /// The letters as an alphabet, or the single default letter if none.
    pub fn alphabet(&self) -> Alphabet {
        if self.letters.is_empty() {
            Alphabet::new([DEFAULT_LETTER]).expect("default letter is valid")
        } else {
            Alphabet::new(self.letters.iter()).expect("signature letters are valid and distinct")
        }
    }
}

/// Parses a formula. When `sig` is given every letter, agent and atom must
/// be declared in it.
pub fn parse_formula(text: &str, sig: Option<&Signature>) -> Result<Formula, ParseError> {
    let mut toks = Tokens::new(text)?;
    let f = Parser { sig }.implication(&mut toks)?;
    toks.expect_end()?;
    Ok(f)
}

struct Parser<'a> {
    sig: Option<&'a Signature>,
}

impl Parser<'_> {
    fn implication(&self, toks: &mut Tokens) -> Result<Formula, ParseError> {
        let left = self.disjunction(toks)?;
        if toks.eat(&Tok::Arrow) {
            let right = self.implication(toks)?;
            Ok(Formula::implies(left, right))
        } else {
            Ok(left)
        }
    }

    fn disjunction(&self, toks: &mut Tokens) -> Result<Formula, ParseError> {
        let mut f = self.conjunction(toks)?;
        while toks.eat(&Tok::Bar) {
            f = Formula::or(f, self.conjunction(toks)?);
        }
        Ok(f)
    }

    fn conjunction(&self, toks: &mut Tokens) -> Result<Formula, ParseError> {
        let mut f = self.unary(toks)?;
        while toks.eat(&Tok::Amp) {
            f = Formula::and(f, self.unary(toks)?);
        }
        Ok(f)
    }

    fn name(
        &self,
        toks: &mut Tokens,
        what: &str,
        declared: Option<&[Symbol]>,
    ) -> Result<Symbol, ParseError> {
        let pos = toks.pos();
        match toks.peek().clone() {
            Tok::Ident(s) => {
                check_symbol_name(&s).map_err(|m| ParseError::at(pos, m))?;
                if let Some(d) = declared {
                    if !d.iter().any(|x| **x == *s) {
                        return Err(ParseError::at(pos, format!("undeclared {what} `{s}`")));
                    }
                }
                toks.next();
                Ok(Symbol::from(s.as_str()))
            }
            _ => Err(toks.unexpected(&format!("an {what} name"))),
        }
    }

    fn expr(&self, toks: &mut Tokens) -> Result<ObsExpr, ParseError> {
        match self.sig {
            Some(sig) => {
                let alpha = if sig.letters.is_empty() {
                    None
                } else {
                    Some(sig.alphabet())
                };
                let pos = toks.pos();
                let e = parse_union(toks, alpha.as_ref())?;
                if alpha.is_none() {
                    if let Some(a) = e.letters().first() {
                        return Err(ParseError::at(pos, format!("undeclared letter `{a}`")));
                    }
                }
                Ok(e)
            }
            None => parse_union(toks, None),
        }
    }

    fn unary(&self, toks: &mut Tokens) -> Result<Formula, ParseError> {
        let pos = toks.pos();
        match toks.peek().clone() {
            Tok::Tilde => {
                toks.next();
                Ok(Formula::not(self.unary(toks)?))
            }
            Tok::LBrack => {
                toks.next();
                let p = self.expr(toks)?;
                toks.expect(&Tok::RBrack)?;
                Ok(Formula::boxed(p, self.unary(toks)?))
            }
            Tok::Lt => {
                toks.next();
                let p = self.expr(toks)?;
                toks.expect(&Tok::Gt)?;
                Ok(Formula::dia(p, self.unary(toks)?))
            }
            Tok::LParen => {
                toks.next();
                let f = self.implication(toks)?;
                toks.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(s) => match s.as_str() {
                "true" => {
                    toks.next();
                    Ok(Formula::Top)
                }
                "false" => {
                    toks.next();
                    Ok(Formula::Bottom)
                }
                "K" | "Khat" => {
                    toks.next();
                    let agent = self.name(toks, "agent", self.sig.map(|s| &s.agents[..]))?;
                    let body = self.unary(toks)?;
                    Ok(if s == "K" {
                        Formula::Know(agent, Arc::new(body))
                    } else {
                        Formula::Poss(agent, Arc::new(body))
                    })
                }
                "eps" => Err(ParseError::at(pos, "`eps` is not a formula")),
                _ => Ok(Formula::Atom(self.name(
                    toks,
                    "atom",
                    self.sig.map(|s| &s.atoms[..]),
                )?)),
            },
            _ => Err(toks.unexpected("a formula")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obsexpr::parse_obsexpr;

    fn f(s: &str) -> Formula {
        parse_formula(s, None).unwrap()
    }

    #[test]
    fn parses_worked_example() {
        let g = f("Khat i <a> p & <a> K i ~p");
        let want = Formula::and(
            Formula::poss("i", Formula::dia(ObsExpr::letter("a"), Formula::atom("p"))),
            Formula::dia(
                ObsExpr::letter("a"),
                Formula::know("i", Formula::not(Formula::atom("p"))),
            ),
        );
        assert_eq!(g, want);
        assert_eq!(f("true"), Formula::Top);
        assert!(matches!(
            f("[l](K b ~debris & Khat a debris)"),
            Formula::Box(ObsExpr::Letter(_), _)
        ));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(f("p -> q -> r"), f("p -> (q -> r)"));
        assert_eq!(f("p | q & r"), f("p | (q & r)"));
        assert_eq!(f("~p & q"), f("(~p) & q"));
        assert_eq!(f("K i p & q"), f("(K i p) & q"));
        assert_eq!(f("<a.b + c> p"), Formula::dia(parse_obsexpr("a.b + c", None).unwrap(), f("p")));
    }

    #[test]
    fn printing_reparses() {
        for s in [
            "p & (q & r)",
            "(p | q) & ~(r -> p)",
            "(p -> q) -> r",
            "K i (p | q) & [a.(b + c)] <eps> ~p",
            "~~K i Khat j false",
        ] {
            let g = f(s);
            assert_eq!(f(&g.to_string()), g, "{s}");
        }
    }

    #[test]
    fn undeclared_symbols_fail_with_positions() {
        let sig = Signature::infer(&f("K i <a> p"));
        assert!(parse_formula("K i <a> p", Some(&sig)).is_ok());
        let e = parse_formula("K j p", Some(&sig)).unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
        assert!(parse_formula("<b> p", Some(&sig)).is_err());
        assert!(parse_formula("q", Some(&sig)).is_err());
    }

    #[test]
    fn nnf_examples() {
        assert_eq!(to_nnf(&f("~(p & K i q)")), f("~p | Khat i ~q"));
        assert_eq!(to_nnf(&f("~[a.b] p")), f("<a.b> ~p"));
        assert_eq!(to_nnf(&f("~~p")), f("p"));
        assert_eq!(to_nnf(&f("[0] p")), Formula::Top);
        assert_eq!(to_nnf(&f("<0.a> p")), Formula::Bottom);
        assert_eq!(to_nnf(&f("<eps> p")), f("p"));
        assert_eq!(to_nnf(&f("~true")), Formula::Bottom);
        let g = to_nnf(&f("~(p -> [a] K i q) | ~<b + eps> p"));
        assert!(g.is_nnf());
        assert_eq!(to_nnf(&g), g);
    }

    #[test]
    fn closure_examples() {
        let c = fl_closure(&f("p"));
        assert_eq!(c, BTreeSet::from([f("p"), f("~p")]));
        let d = fl_closure(&f("<a.b> p"));
        for g in ["<a.b> p", "<a> <b> p", "<b> p", "p", "[a.b] ~p", "[b] ~p", "~p"] {
            assert!(d.contains(&f(g)), "{g}");
        }
        let sigma = f("<a.b> p").letters();
        assert!(is_fl_closed(&d, &sigma));
    }

    #[test]
    fn fragments() {
        assert_eq!(f("K i <a.b> p").classify_fragment(), Fragment::WordSingle);
        assert_eq!(f("p").classify_fragment(), Fragment::WordSingle);
        assert_eq!(f("Khat a <l + d> p & Khat b <l> p").classify_fragment(), Fragment::StarFreeMulti);
        assert_eq!(f("K a K b p").classify_fragment(), Fragment::WordMulti);
    }

    #[test]
    fn sizes_and_depths() {
        assert_eq!(f("~p").size(), 2);
        assert_eq!(f("<a.b> p").size(), 5);
        assert_eq!(f("[a + b.c] <a> p").letter_depth(), 3);
        assert_eq!(f("K i Khat j p & K i q").epistemic_depth(), 2);
    }
}
