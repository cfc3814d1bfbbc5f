//! Star-free observation expressions.
//!
//! An [`ObsExpr`] denotes a finite language of [`Word`]s. Residuation is
//! syntactic (Brzozowski derivatives) with a light simplification pass, so
//! the solver never has to enumerate languages.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{check_symbol_name, ParseError, Tok, Tokens};
use crate::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphabetError {
    #[error("alphabet must contain at least one letter")]
    Empty,
    #[error("duplicate letter `{0}`")]
    Duplicate(String),
    #[error("invalid letter name: {0}")]
    BadName(String),
}

/// Ordered set of distinct letters. The order fixes word enumeration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    letters: Vec<Symbol>,
}

impl Alphabet {
    pub fn new<I, S>(letters: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out: Vec<Symbol> = Vec::new();
        for l in letters {
            let l = l.as_ref();
            check_symbol_name(l).map_err(AlphabetError::BadName)?;
            if out.iter().any(|x| &**x == l) {
                return Err(AlphabetError::Duplicate(l.to_string()));
            }
            out.push(Symbol::from(l));
        }
        if out.is_empty() {
            return Err(AlphabetError::Empty);
        }
        Ok(Alphabet { letters: out })
    }

    pub fn letters(&self) -> &[Symbol] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn contains(&self, letter: &str) -> bool {
        self.index_of(letter).is_some()
    }

    pub fn index_of(&self, letter: &str) -> Option<usize> {
        self.letters.iter().position(|l| &**l == letter)
    }

    /// First letter of `e` that is not in the alphabet, if any.
    pub fn undeclared_in(&self, e: &ObsExpr) -> Option<Symbol> {
        e.letters().into_iter().find(|l| !self.contains(l))
    }

    /// All words of length at most `max_len`, shortest first, then in
    /// alphabet order.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::epsilon()];
        let mut layer = vec![Word::epsilon()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * self.letters.len());
            for w in &layer {
                for a in &self.letters {
                    next.push(w.appended(a.clone()));
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    /// Sort key placing words in length-lexicographic alphabet order.
    pub fn word_key(&self, w: &Word) -> Vec<usize> {
        w.0.iter()
            .map(|a| self.index_of(a).unwrap_or(usize::MAX))
            .collect()
    }

    /// Sorts words lexicographically by alphabet position.
    pub fn sort_words(&self, words: &mut [Word]) {
        words.sort_by_cached_key(|w| self.word_key(w));
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(l)?;
        }
        Ok(())
    }
}

/// A finite observation: a sequence of letters, possibly empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn epsilon() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters<I, S>(letters: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Word(letters.into_iter().map(|s| Symbol::from(s.as_ref())).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Symbol] {
        &self.0
    }

    pub fn appended(&self, a: Symbol) -> Word {
        let mut v = self.0.clone();
        v.push(a);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Word(v)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// All prefixes, from ε up to the word itself.
    pub fn prefixes(&self) -> impl Iterator<Item = Word> + '_ {
        (0..=self.0.len()).map(|k| Word(self.0[..k].to_vec()))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(a)?;
        }
        Ok(())
    }
}

/// Star-free observation expression.
///
/// Constructors are raw: the tree is exactly what was written. Use
/// [`ObsExpr::concat`] and [`ObsExpr::union`] for simplifying construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObsExpr {
    Empty,
    Epsilon,
    Letter(Symbol),
    Concat(Arc<ObsExpr>, Arc<ObsExpr>),
    Union(Arc<ObsExpr>, Arc<ObsExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("a sum of words needs at least one word")]
pub struct EmptyWordSet;

impl ObsExpr {
    pub fn letter(a: impl AsRef<str>) -> Self {
        ObsExpr::Letter(Symbol::from(a.as_ref()))
    }

    pub fn raw_concat(a: ObsExpr, b: ObsExpr) -> Self {
        ObsExpr::Concat(Arc::new(a), Arc::new(b))
    }

    pub fn raw_union(a: ObsExpr, b: ObsExpr) -> Self {
        ObsExpr::Union(Arc::new(a), Arc::new(b))
    }

    /// Concatenation with `∅·π = π·∅ = ∅` and `ε·π = π·ε = π`.
    pub fn concat(a: ObsExpr, b: ObsExpr) -> Self {
        match (&a, &b) {
            (ObsExpr::Empty, _) | (_, ObsExpr::Empty) => ObsExpr::Empty,
            (ObsExpr::Epsilon, _) => b,
            (_, ObsExpr::Epsilon) => a,
            _ => ObsExpr::raw_concat(a, b),
        }
    }

    /// Union with `∅+π = π+∅ = π` and `π+π = π`.
    pub fn union(a: ObsExpr, b: ObsExpr) -> Self {
        match (&a, &b) {
            (ObsExpr::Empty, _) => b,
            (_, ObsExpr::Empty) => a,
            _ if a == b => a,
            _ => ObsExpr::raw_union(a, b),
        }
    }

    /// The word as a left-nested concatenation; ε for the empty word.
    pub fn word(w: &Word) -> Self {
        let mut it = w.0.iter();
        let Some(first) = it.next() else {
            return ObsExpr::Epsilon;
        };
        it.fold(ObsExpr::Letter(first.clone()), |acc, a| {
            ObsExpr::raw_concat(acc, ObsExpr::Letter(a.clone()))
        })
    }

    /// Left-nested union of the given words in iteration order.
    pub fn sum_of_words<'a, I>(words: I) -> Result<Self, EmptyWordSet>
    where
        I: IntoIterator<Item = &'a Word>,
    {
        let mut it = words.into_iter();
        let first = it.next().ok_or(EmptyWordSet)?;
        Ok(it.fold(ObsExpr::word(first), |acc, w| {
            ObsExpr::raw_union(acc, ObsExpr::word(w))
        }))
    }

    /// `π^n`: n-fold concatenation, ε when n = 0.
    pub fn power(&self, n: u32) -> Self {
        if n == 0 {
            return ObsExpr::Epsilon;
        }
        (1..n).fold(self.clone(), |acc, _| ObsExpr::raw_concat(acc, self.clone()))
    }

    /// `π^{≤n}`: `(π+ε)` concatenated n times.
    pub fn power_at_most(&self, n: u32) -> Self {
        ObsExpr::raw_union(self.clone(), ObsExpr::Epsilon).power(n)
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self {
            ObsExpr::Empty | ObsExpr::Epsilon | ObsExpr::Letter(_) => 1,
            ObsExpr::Concat(a, b) | ObsExpr::Union(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ObsExpr::Empty => true,
            ObsExpr::Epsilon | ObsExpr::Letter(_) => false,
            ObsExpr::Concat(a, b) => a.is_empty() || b.is_empty(),
            ObsExpr::Union(a, b) => a.is_empty() && b.is_empty(),
        }
    }

    pub fn is_nullable(&self) -> bool {
        match self {
            ObsExpr::Empty | ObsExpr::Letter(_) => false,
            ObsExpr::Epsilon => true,
            ObsExpr::Concat(a, b) => a.is_nullable() && b.is_nullable(),
            ObsExpr::Union(a, b) => a.is_nullable() || b.is_nullable(),
        }
    }

    /// Length of the longest word in the language; `None` if it is empty.
    pub fn max_word_len(&self) -> Option<usize> {
        match self {
            ObsExpr::Empty => None,
            ObsExpr::Epsilon => Some(0),
            ObsExpr::Letter(_) => Some(1),
            ObsExpr::Concat(a, b) => Some(a.max_word_len()? + b.max_word_len()?),
            ObsExpr::Union(a, b) => match (a.max_word_len(), b.max_word_len()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// Residual by a single letter, simplified.
    pub fn residual_letter(&self, a: &str) -> ObsExpr {
        match self {
            ObsExpr::Empty | ObsExpr::Epsilon => ObsExpr::Empty,
            ObsExpr::Letter(b) => {
                if &**b == a {
                    ObsExpr::Epsilon
                } else {
                    ObsExpr::Empty
                }
            }
            ObsExpr::Concat(p, q) => {
                let left = ObsExpr::concat(p.residual_letter(a), (**q).clone());
                if p.is_nullable() {
                    ObsExpr::union(left, q.residual_letter(a))
                } else {
                    left
                }
            }
            ObsExpr::Union(p, q) => ObsExpr::union(p.residual_letter(a), q.residual_letter(a)),
        }
    }

    /// `π÷w`, folding [`ObsExpr::residual_letter`] over `w`.
    pub fn residual(&self, w: &Word) -> ObsExpr {
        let mut cur = self.clone();
        for a in &w.0 {
            if let ObsExpr::Empty = cur {
                break;
            }
            cur = cur.residual_letter(a);
        }
        cur
    }

    /// `w ∈ Pre(π)`.
    pub fn in_prefixes(&self, w: &Word) -> bool {
        !self.residual(w).is_empty()
    }

    /// The denoted language, by direct enumeration.
    pub fn lang(&self) -> BTreeSet<Word> {
        match self {
            ObsExpr::Empty => BTreeSet::new(),
            ObsExpr::Epsilon => BTreeSet::from([Word::epsilon()]),
            ObsExpr::Letter(a) => BTreeSet::from([Word(vec![a.clone()])]),
            ObsExpr::Concat(p, q) => {
                let lq = q.lang();
                let mut out = BTreeSet::new();
                for u in p.lang() {
                    for v in &lq {
                        out.insert(u.concat(v));
                    }
                }
                out
            }
            ObsExpr::Union(p, q) => {
                let mut out = p.lang();
                out.extend(q.lang());
                out
            }
        }
    }

    /// `Pre(π)`, by enumeration of the language.
    pub fn prefixes(&self) -> BTreeSet<Word> {
        self.lang()
            .iter()
            .flat_map(|w| w.prefixes().collect::<Vec<_>>())
            .collect()
    }

    /// Distinct letters occurring syntactically, in order of first occurrence.
    pub fn letters(&self) -> Vec<Symbol> {
        fn go(e: &ObsExpr, out: &mut Vec<Symbol>) {
            match e {
                ObsExpr::Empty | ObsExpr::Epsilon => {}
                ObsExpr::Letter(a) => {
                    if !out.contains(a) {
                        out.push(a.clone());
                    }
                }
                ObsExpr::Concat(p, q) | ObsExpr::Union(p, q) => {
                    go(p, out);
                    go(q, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// True when no union occurs.
    pub fn is_union_free(&self) -> bool {
        match self {
            ObsExpr::Empty | ObsExpr::Epsilon | ObsExpr::Letter(_) => true,
            ObsExpr::Concat(p, q) => p.is_union_free() && q.is_union_free(),
            ObsExpr::Union(..) => false,
        }
    }

    /// Union-free expressions denote at most one word; returns it.
    pub fn as_word(&self) -> Option<Word> {
        if !self.is_union_free() {
            return None;
        }
        self.lang().into_iter().next()
    }

    fn precedence(&self) -> u8 {
        match self {
            ObsExpr::Union(..) => 0,
            ObsExpr::Concat(..) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for ObsExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &ObsExpr, min: u8) -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            ObsExpr::Empty => f.write_str("0"),
            ObsExpr::Epsilon => f.write_str("eps"),
            ObsExpr::Letter(a) => f.write_str(a),
            ObsExpr::Concat(p, q) => {
                child(f, p, 1)?;
                f.write_str(".")?;
                child(f, q, 2)
            }
            ObsExpr::Union(p, q) => {
                child(f, p, 0)?;
                f.write_str(" + ")?;
                child(f, q, 1)
            }
        }
    }
}

/// Parses an expression. Letters are checked against `alphabet` when given.
pub fn parse_obsexpr(text: &str, alphabet: Option<&Alphabet>) -> Result<ObsExpr, ParseError> {
    let mut toks = Tokens::new(text)?;
    let e = parse_union(&mut toks, alphabet)?;
    toks.expect_end()?;
    Ok(e)
}

pub(crate) fn parse_union(
    toks: &mut Tokens,
    alphabet: Option<&Alphabet>,
) -> Result<ObsExpr, ParseError> {
    let mut e = parse_concat(toks, alphabet)?;
    while toks.eat(&Tok::Plus) {
        let r = parse_concat(toks, alphabet)?;
        e = ObsExpr::raw_union(e, r);
    }
    Ok(e)
}

fn parse_concat(toks: &mut Tokens, alphabet: Option<&Alphabet>) -> Result<ObsExpr, ParseError> {
    let mut e = parse_postfix(toks, alphabet)?;
    while toks.eat(&Tok::Dot) {
        let r = parse_postfix(toks, alphabet)?;
        e = ObsExpr::raw_concat(e, r);
    }
    Ok(e)
}

fn parse_postfix(toks: &mut Tokens, alphabet: Option<&Alphabet>) -> Result<ObsExpr, ParseError> {
    let mut e = parse_atom(toks, alphabet)?;
    while toks.eat(&Tok::Caret) {
        let braced = toks.eat(&Tok::LBrace);
        let at_most = toks.eat(&Tok::Le);
        let n = match toks.next() {
            Tok::Num(n) => n,
            _ => return Err(toks.unexpected("an exponent")),
        };
        if braced {
            toks.expect(&Tok::RBrace)?;
        }
        e = if at_most { e.power_at_most(n) } else { e.power(n) };
    }
    Ok(e)
}

fn parse_atom(toks: &mut Tokens, alphabet: Option<&Alphabet>) -> Result<ObsExpr, ParseError> {
    let pos = toks.pos();
    match toks.peek().clone() {
        Tok::Num(0) => {
            toks.next();
            Ok(ObsExpr::Empty)
        }
        Tok::LParen => {
            toks.next();
            let e = parse_union(toks, alphabet)?;
            toks.expect(&Tok::RParen)?;
            Ok(e)
        }
        Tok::Ident(s) if s == "eps" => {
            toks.next();
            Ok(ObsExpr::Epsilon)
        }
        Tok::Ident(s) => {
            if let Err(msg) = check_symbol_name(&s) {
                return Err(ParseError::at(pos, msg));
            }
            if let Some(alpha) = alphabet {
                if !alpha.contains(&s) {
                    return Err(ParseError::at(pos, format!("undeclared letter `{s}`")));
                }
            }
            toks.next();
            Ok(ObsExpr::letter(s))
        }
        _ => Err(toks.unexpected("an observation expression")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> ObsExpr {
        parse_obsexpr(s, None).unwrap()
    }

    fn w(s: &str) -> Word {
        if s.is_empty() {
            Word::epsilon()
        } else {
            Word::from_letters(s.split('.'))
        }
    }

    fn words(ws: &[&str]) -> BTreeSet<Word> {
        ws.iter().map(|s| w(s)).collect()
    }

    #[test]
    fn lang_of_two_routes() {
        assert_eq!(e("l.d + r.u").lang(), words(&["l.d", "r.u"]));
        assert_eq!(e("eps").lang(), words(&[""]));
        assert!(e("0.a").lang().is_empty());
    }

    #[test]
    fn residual_examples() {
        assert_eq!(e("l.d + r.u").residual(&w("l")).lang(), words(&["d"]));
        assert_eq!(e("l.d").residual(&w("l")).lang(), words(&["d"]));
        assert_eq!(e("(a+b).c").residual(&w("b")).lang(), words(&["c"]));
        let p = e("a.b + c");
        assert_eq!(p.residual(&Word::epsilon()), p);
    }

    #[test]
    fn emptiness_and_nullability() {
        assert!(e("0 + 0.a").is_empty());
        assert!(!e("eps").is_empty());
        assert!(e("a.b").residual(&w("b")).is_empty());
        assert!(e("eps + a").is_nullable());
        assert!(!e("a.b").is_nullable());
        assert!(e("(a+eps).(b+eps)").is_nullable());
    }

    #[test]
    fn prefix_sets() {
        let p = e("l.d + r.u");
        let pre: BTreeSet<Word> = p.prefixes();
        assert_eq!(pre, words(&["", "l", "l.d", "r", "r.u"]));
        for v in &pre {
            assert!(p.in_prefixes(v));
        }
        assert!(!e("a.b").in_prefixes(&w("b.a")));
    }

    #[test]
    fn sum_of_words_shapes() {
        let ab_c = ObsExpr::sum_of_words(&[w("a.b"), w("c")]).unwrap();
        assert_eq!(ab_c.to_string(), "a.b + c");
        assert_eq!(ObsExpr::sum_of_words(&[Word::epsilon()]).unwrap(), ObsExpr::Epsilon);
        assert_eq!(ObsExpr::sum_of_words(&[]), Err(EmptyWordSet));
    }

    #[test]
    fn powers_expand() {
        assert_eq!(e("(r+u)^{<=2}").lang(), words(&["", "r", "u", "r.r", "r.u", "u.r", "u.u"]));
        assert_eq!(e("a^3").lang(), words(&["a.a.a"]));
        assert_eq!(e("a^{≤1}"), e("(a + eps)"));
        assert_eq!(e("a^0"), ObsExpr::Epsilon);
    }

    #[test]
    fn printing_reparses() {
        for s in ["a.(b.c)", "(a+b).c", "a + (b + c)", "0", "eps.a", "(a.b).c + d"] {
            let x = e(s);
            assert_eq!(e(&x.to_string()), x, "{s}");
        }
    }

    #[test]
    fn undeclared_letter_is_reported() {
        let alpha = Alphabet::new(["a", "b"]).unwrap();
        let err = parse_obsexpr("a . z", Some(&alpha)).unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
    }

    #[test]
    fn alphabet_rejects_bad_input() {
        assert_eq!(Alphabet::new(Vec::<&str>::new()), Err(AlphabetError::Empty));
        assert!(matches!(Alphabet::new(["a", "a"]), Err(AlphabetError::Duplicate(_))));
        assert!(matches!(Alphabet::new(["a b"]), Err(AlphabetError::BadName(_))));
    }

    #[test]
    fn max_word_len_ignores_dead_branches() {
        assert_eq!(e("a.b.c + 0.a.a.a.a").max_word_len(), Some(3));
        assert_eq!(e("0").max_word_len(), None);
    }
}
