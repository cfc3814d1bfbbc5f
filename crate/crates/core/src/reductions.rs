//! Formula generators for two hardness reductions and the vacuum-bot
//! fixtures, with brute-force deciders for the source problems.
//!
//! QBF. A valuation of `x_1..x_n` is a word choosing `t_x` or `f_x` for
//! each variable in order. Every clause gets a witness state whose
//! expectation is the set of valuations satisfying one of its literals;
//! the quantifier prefix becomes alternating boxes and diamonds over the
//! choice letters, and every clause witness must survive the chosen word.
//!
//! Tiling. Leaves of a depth-`4n` tree encode pairs of positions, one in
//! tiling A and one in tiling B; observation words over `{A, nA}` and
//! `{B, nB}` select leaves by position. The tree modality is
//! [`tree_box`]/[`tree_dia`]; see there for why it is level-guarded.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::Formula;
use crate::model::{EpistemicModel, ExpectationModel, Partition, PointedModel};
use crate::obsexpr::{Alphabet, ObsExpr, Word};
use crate::syntax::check_symbol_name;
use crate::Symbol;

/// Agent of the single-agent QBF formulas.
pub const QBF_AGENT: &str = "i";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

/// Literal `+k` or `-k` over the variable at 1-based position `k`.
pub type Literal = i32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QbfError {
    #[error("syntax error at token {at}: {message}")]
    Syntax { at: usize, message: String },
    #[error("variable `{0}` is bound twice")]
    Rebound(String),
    #[error("variable `{0}` is not bound by the prefix")]
    Unbound(String),
    #[error("bad variable name: {0}")]
    BadName(String),
    #[error("clause {0} has more than 3 literals")]
    ClauseTooLong(usize),
    #[error("clause {0} is empty")]
    EmptyClause(usize),
    #[error("literal {0} is out of range")]
    BadLiteral(Literal),
    #[error("at least one variable and one clause are required")]
    Degenerate,
}

/// `Q_1 x_1 … Q_n x_n ξ` with ξ in CNF, at most 3 literals per clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QbfInstance {
    prefix: Vec<(Quantifier, Symbol)>,
    clauses: Vec<Vec<Literal>>,
}

impl QbfInstance {
    pub fn new(
        prefix: Vec<(Quantifier, Symbol)>,
        clauses: Vec<Vec<Literal>>,
    ) -> Result<QbfInstance, QbfError> {
        if prefix.is_empty() || clauses.is_empty() {
            return Err(QbfError::Degenerate);
        }
        let mut seen = BTreeSet::new();
        for (_, v) in &prefix {
            check_symbol_name(v).map_err(QbfError::BadName)?;
            if !seen.insert(v.clone()) {
                return Err(QbfError::Rebound(v.to_string()));
            }
        }
        let n = prefix.len() as i32;
        for (j, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(QbfError::EmptyClause(j + 1));
            }
            if c.len() > 3 {
                return Err(QbfError::ClauseTooLong(j + 1));
            }
            if let Some(&l) = c.iter().find(|l| **l == 0 || l.abs() > n) {
                return Err(QbfError::BadLiteral(l));
            }
        }
        Ok(QbfInstance { prefix, clauses })
    }

    /// Variables `x1..xn` with the given quantifiers.
    pub fn with_default_names(
        quantifiers: &[Quantifier],
        clauses: Vec<Vec<Literal>>,
    ) -> Result<QbfInstance, QbfError> {
        let prefix = quantifiers
            .iter()
            .enumerate()
            .map(|(k, q)| (*q, Symbol::from(format!("x{}", k + 1))))
            .collect();
        QbfInstance::new(prefix, clauses)
    }

    pub fn prefix(&self) -> &[(Quantifier, Symbol)] {
        &self.prefix
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn num_vars(&self) -> usize {
        self.prefix.len()
    }

    /// Variables, clauses and literal occurrences.
    pub fn size(&self) -> usize {
        self.prefix.len() + self.clauses.iter().map(|c| 1 + c.len()).sum::<usize>()
    }

    /// Parses `exists x1 forall x2 : (x1 x2)(x1 -x2)`.
    pub fn parse(text: &str) -> Result<QbfInstance, QbfError> {
        let spaced = text.replace('(', " ( ").replace(')', " ) ").replace(':', " : ");
        let toks: Vec<&str> = spaced.split_whitespace().collect();
        let err = |at: usize, m: &str| QbfError::Syntax {
            at: at + 1,
            message: m.to_string(),
        };
        let mut k = 0;
        let mut prefix = Vec::new();
        while k < toks.len() && toks[k] != ":" {
            let q = match toks[k] {
                "exists" | "E" => Quantifier::Exists,
                "forall" | "A" => Quantifier::Forall,
                _ => return Err(err(k, "expected `exists`, `forall` or `:`")),
            };
            let v = toks.get(k + 1).ok_or_else(|| err(k + 1, "expected a variable"))?;
            prefix.push((q, Symbol::from(*v)));
            k += 2;
        }
        if k == toks.len() {
            return Err(err(k, "expected `:` before the clauses"));
        }
        k += 1;
        let index = |name: &str| {
            prefix
                .iter()
                .position(|(_, v)| &**v == name)
                .map(|p| p as i32 + 1)
                .ok_or_else(|| QbfError::Unbound(name.to_string()))
        };
        let mut clauses = Vec::new();
        while k < toks.len() {
            if toks[k] != "(" {
                return Err(err(k, "expected `(`"));
            }
            k += 1;
            let mut clause = Vec::new();
            while k < toks.len() && toks[k] != ")" {
                let lit = match toks[k].strip_prefix('-').or_else(|| toks[k].strip_prefix('~')) {
                    Some(v) => -index(v)?,
                    None => index(toks[k])?,
                };
                clause.push(lit);
                k += 1;
            }
            if k == toks.len() {
                return Err(err(k, "unclosed clause"));
            }
            k += 1;
            clauses.push(clause);
        }
        QbfInstance::new(prefix, clauses)
    }
}

impl fmt::Display for QbfInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, v) in &self.prefix {
            let q = match q {
                Quantifier::Exists => "exists",
                Quantifier::Forall => "forall",
            };
            write!(f, "{q} {v} ")?;
        }
        f.write_str(":")?;
        for c in &self.clauses {
            let lits: Vec<String> = c
                .iter()
                .map(|&l| {
                    let v = &self.prefix[l.unsigned_abs() as usize - 1].1;
                    if l < 0 {
                        format!("-{v}")
                    } else {
                        v.to_string()
                    }
                })
                .collect();
            write!(f, " ({})", lits.join(" "))?;
        }
        Ok(())
    }
}

/// Truth of the instance by game-tree evaluation.
pub fn qbf_eval(q: &QbfInstance) -> bool {
    fn go(q: &QbfInstance, assignment: &mut Vec<bool>) -> bool {
        let k = assignment.len();
        if k == q.num_vars() {
            return q.clauses.iter().all(|c| {
                c.iter()
                    .any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
            });
        }
        let branch = |v: bool, a: &mut Vec<bool>| {
            a.push(v);
            let r = go(q, a);
            a.pop();
            r
        };
        match q.prefix[k].0 {
            Quantifier::Exists => branch(false, assignment) || branch(true, assignment),
            Quantifier::Forall => branch(false, assignment) && branch(true, assignment),
        }
    }
    go(q, &mut Vec::with_capacity(q.num_vars()))
}

/// Letter choosing the given truth value for the variable at 1-based `k`.
pub fn qbf_letter(q: &QbfInstance, k: usize, value: bool) -> Symbol {
    let v = &q.prefix[k - 1].1;
    Symbol::from(format!("{}_{v}", if value { "t" } else { "f" }))
}

/// Atom marking the witness of the 1-based clause `j`.
pub fn qbf_clause_atom(j: usize) -> Symbol {
    Symbol::from(format!("c{j}"))
}

fn literal_letter(q: &QbfInstance, l: Literal) -> Symbol {
    qbf_letter(q, l.unsigned_abs() as usize, l > 0)
}

/// `(t_k + f_k)`.
fn choice(q: &QbfInstance, k: usize) -> ObsExpr {
    ObsExpr::raw_union(
        ObsExpr::Letter(qbf_letter(q, k, true)),
        ObsExpr::Letter(qbf_letter(q, k, false)),
    )
}

/// `B^u_v`: all valuations of the variables `u+1..v`; ε when `u = v`.
fn valuations(q: &QbfInstance, u: usize, v: usize) -> ObsExpr {
    (u + 1..=v).fold(ObsExpr::Epsilon, |acc, k| ObsExpr::concat(acc, choice(q, k)))
}

/// `[π]f`, or `f` itself when `π` is ε.
fn box_or_plain(pi: ObsExpr, f: Formula) -> Formula {
    if pi == ObsExpr::Epsilon {
        f
    } else {
        Formula::boxed(pi, f)
    }
}

fn can_see(a: Symbol) -> Formula {
    Formula::dia(ObsExpr::Letter(a), Formula::Top)
}

/// `T_k`: both values of variable `k` remain observable.
fn both_open(q: &QbfInstance, k: usize) -> Formula {
    Formula::and(can_see(qbf_letter(q, k, true)), can_see(qbf_letter(q, k, false)))
}

/// `L_h`: the expectation holds exactly the valuations making `l` true.
fn literal_formula(q: &QbfInstance, l: Literal) -> Formula {
    let h = l.unsigned_abs() as usize;
    let n = q.num_vars();
    let mut parts: Vec<Formula> = (1..h)
        .map(|i| box_or_plain(valuations(q, 0, i - 1), both_open(q, i)))
        .collect();
    parts.push(box_or_plain(
        valuations(q, 0, h - 1),
        Formula::and(
            can_see(literal_letter(q, l)),
            Formula::boxed(ObsExpr::Letter(literal_letter(q, -l)), Formula::Bottom),
        ),
    ));
    let through = ObsExpr::concat(valuations(q, 0, h - 1), ObsExpr::Letter(literal_letter(q, l)));
    for i in h + 1..=n {
        parts.push(box_or_plain(
            ObsExpr::concat(through.clone(), valuations(q, h, i - 1)),
            both_open(q, i),
        ));
    }
    Formula::conj(parts)
}

/// The single-agent formula satisfiable iff `q` is true.
///
/// The conjunct that constrains the evaluation point is "the point survives
/// every valuation word" rather than "the point is a clause witness". With
/// the latter, the point may expect only words satisfying one clause, and
/// its universal branches become vacuous: `∀x (x)` would be satisfiable.
pub fn gen_qbf(q: &QbfInstance) -> Formula {
    let n = q.num_vars();
    let m = q.clauses.len();
    let mut parts = Vec::new();
    for (j, c) in q.clauses.iter().enumerate() {
        let p = Formula::Atom(qbf_clause_atom(j + 1));
        let lits = Formula::disj(c.iter().map(|&l| literal_formula(q, l)));
        parts.push(Formula::know(QBF_AGENT, Formula::implies(p.clone(), lits)));
        parts.push(Formula::poss(QBF_AGENT, p));
    }
    let all_witnesses =
        Formula::conj((1..=m).map(|j| Formula::poss(QBF_AGENT, Formula::Atom(qbf_clause_atom(j)))));
    parts.push((1..=n).rev().fold(all_witnesses, |acc, k| match q.prefix[k - 1].0 {
        Quantifier::Forall => Formula::boxed(choice(q, k), acc),
        Quantifier::Exists => Formula::dia(choice(q, k), acc),
    }));
    for i in 1..=n {
        parts.push(box_or_plain(valuations(q, 0, i - 1), can_see(qbf_letter(q, i, true))));
        parts.push(box_or_plain(valuations(q, 0, i - 1), can_see(qbf_letter(q, i, false))));
    }
    Formula::conj(parts)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tile {
    pub up: Symbol,
    pub right: Symbol,
    pub down: Symbol,
    pub left: Symbol,
}

impl Tile {
    pub fn new(up: &str, right: &str, down: &str, left: &str) -> Tile {
        Tile {
            up: up.into(),
            right: right.into(),
            down: down.into(),
            left: left.into(),
        }
    }

    /// Tile with every edge coloured `c`.
    pub fn uniform(c: &str) -> Tile {
        Tile::new(c, c, c, c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TilingError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("n must be at least 1")]
    ZeroSize,
    #[error("exhaustive evaluation supports n <= {max}, got {n}")]
    TooLarge { n: u32, max: u32 },
}

/// Tiles for a `2^n × 2^n` square; the first tile is the origin tile `t_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingInstance {
    tiles: Vec<Tile>,
    n: u32,
}

impl TilingInstance {
    pub fn new(tiles: Vec<Tile>, n: u32) -> Result<TilingInstance, TilingError> {
        if n == 0 {
            return Err(TilingError::ZeroSize);
        }
        Ok(TilingInstance { tiles, n })
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Side length `2^n`.
    pub fn side(&self) -> usize {
        1 << self.n
    }

    /// Parses a line `n <k>` and one `up right down left` line per tile.
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<TilingInstance, TilingError> {
        let mut n = None;
        let mut tiles = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| TilingError::Syntax {
                line: k + 1,
                message: m.to_string(),
            };
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["n", v] => {
                    if n.is_some() {
                        return Err(err("`n` given twice"));
                    }
                    n = Some(v.parse::<u32>().map_err(|_| err("expected a number after `n`"))?);
                }
                [u, r, d, l] => tiles.push(Tile::new(u, r, d, l)),
                _ => return Err(err("expected `n <k>` or four edge colours")),
            }
        }
        let n = n.ok_or(TilingError::Syntax {
            line: text.lines().count().max(1),
            message: "missing `n <k>` line".into(),
        })?;
        TilingInstance::new(tiles, n)
    }
}

impl fmt::Display for TilingInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.n)?;
        for t in &self.tiles {
            writeln!(f, "{} {} {} {}", t.up, t.right, t.down, t.left)?;
        }
        Ok(())
    }
}

/// Largest `n` accepted by [`tiling_eval`].
pub const TILING_EVAL_MAX_N: u32 = 2;

/// A tiling of the square, indexed `[y][x]` by tile index, with `t_0` at
/// the origin; horizontal neighbours share the right/left edge colour and
/// vertical neighbours the up/down colour, `y` growing upwards.
pub fn tiling_solution(t: &TilingInstance) -> Result<Option<Vec<Vec<usize>>>, TilingError> {
    if t.n > TILING_EVAL_MAX_N {
        return Err(TilingError::TooLarge {
            n: t.n,
            max: TILING_EVAL_MAX_N,
        });
    }
    if t.tiles.is_empty() {
        return Ok(None);
    }
    let side = t.side();
    let mut grid = vec![usize::MAX; side * side];
    fn fill(t: &TilingInstance, side: usize, grid: &mut [usize], at: usize) -> bool {
        if at == grid.len() {
            return true;
        }
        let (x, y) = (at % side, at / side);
        let candidates: Vec<usize> = if at == 0 { vec![0] } else { (0..t.tiles.len()).collect() };
        for c in candidates {
            let tile = &t.tiles[c];
            if x > 0 && t.tiles[grid[at - 1]].right != tile.left {
                continue;
            }
            if y > 0 && t.tiles[grid[at - side]].up != tile.down {
                continue;
            }
            grid[at] = c;
            if fill(t, side, grid, at + 1) {
                return true;
            }
        }
        grid[at] = usize::MAX;
        false
    }
    if !fill(t, side, &mut grid, 0) {
        return Ok(None);
    }
    Ok(Some(grid.chunks(side).map(<[usize]>::to_vec).collect()))
}

/// Whether the square can be tiled, by exhaustive backtracking.
pub fn tiling_eval(t: &TilingInstance) -> Result<bool, TilingError> {
    Ok(tiling_solution(t)?.is_some())
}

/// The two agents whose knowledge operators simulate the tree modality.
pub const TILING_AGENTS: [&str; 2] = ["a", "b"];
/// Letters `A, nA, B, nB`: a 1-bit or 0-bit of the position in tiling A or B.
pub const TILING_LETTERS: [&str; 4] = ["A", "nA", "B", "nB"];

fn position_bit(k: usize) -> Formula {
    Formula::Atom(Symbol::from(format!("p{k}")))
}

fn level(k: usize) -> Formula {
    Formula::Atom(Symbol::from(format!("lev{k}")))
}

fn tile_atom(side: char, t: usize) -> Formula {
    Formula::Atom(Symbol::from(format!("q{side}_{t}")))
}

/// One step of the tree modality from a node at depth `depth`:
/// `K_a K_b (lev_{depth+1} → f)`.
///
/// S5 relations are reflexive, so an unguarded `K_a K_b` would also reach the
/// current node, and the constraints meant for leaves would then apply to
/// the root. Children are instead told apart by their depth atom.
pub fn tree_box(depth: usize, f: Formula) -> Formula {
    let [a, b] = TILING_AGENTS;
    Formula::know(a, Formula::know(b, Formula::implies(level(depth + 1), f)))
}

/// Dual of [`tree_box`]: `K̂_a K̂_b (lev_{depth+1} ∧ f)`.
pub fn tree_dia(depth: usize, f: Formula) -> Formula {
    let [a, b] = TILING_AGENTS;
    Formula::poss(a, Formula::poss(b, Formula::and(level(depth + 1), f)))
}

/// `□^k f` from the root.
fn tree_box_n(k: usize, f: Formula) -> Formula {
    (0..k).rev().fold(f, |acc, d| tree_box(d, acc))
}

fn iff(a: Formula, b: Formula) -> Formula {
    Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
}

/// Bits of one coordinate, most significant first.
struct Coord(Vec<usize>);

impl Coord {
    fn eq(&self, other: &Coord) -> Formula {
        Formula::conj(self.0.iter().zip(&other.0).map(|(&x, &y)| iff(position_bit(x), position_bit(y))))
    }

    fn is_zero(&self) -> Formula {
        Formula::conj(self.0.iter().map(|&x| Formula::not(position_bit(x))))
    }

    /// `self = other + 1` without overflow: the bits agree above some
    /// position `k`, where `self` has 1 and `other` 0, and below it `self`
    /// is all 0 and `other` all 1.
    fn is_successor_of(&self, other: &Coord) -> Formula {
        let n = self.0.len();
        Formula::disj((0..n).map(|k| {
            let above = (0..k).map(|j| iff(position_bit(self.0[j]), position_bit(other.0[j])));
            let at = [position_bit(self.0[k]), Formula::not(position_bit(other.0[k]))];
            let below = (k + 1..n).flat_map(|j| {
                [Formula::not(position_bit(self.0[j])), position_bit(other.0[j])]
            });
            Formula::conj(above.chain(at).chain(below))
        }))
    }
}

fn exactly_one(atoms: Vec<Formula>) -> Formula {
    let some = Formula::disj(atoms.clone());
    let mut parts = vec![some];
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            parts.push(Formula::or(Formula::not(atoms[i].clone()), Formula::not(atoms[j].clone())));
        }
    }
    Formula::conj(parts)
}

/// The two-agent formula satisfiable iff `t` has a tiling.
///
/// Bits `p_0..p_{4n-1}` encode A.x, A.y, B.x, B.y in that order, most
/// significant bit first. The depth atoms `lev_k` guard the tree modality.
pub fn gen_tiling(t: &TilingInstance) -> Formula {
    let n = t.n as usize;
    let depth = 4 * n;
    let coord = |k: usize| Coord((k * n..(k + 1) * n).collect());
    let (ax, ay, bx, by) = (coord(0), coord(1), coord(2), coord(3));
    let tiles = 0..t.tiles.len();
    let (a1, a0, b1, b0) = (
        ObsExpr::letter(TILING_LETTERS[0]),
        ObsExpr::letter(TILING_LETTERS[1]),
        ObsExpr::letter(TILING_LETTERS[2]),
        ObsExpr::letter(TILING_LETTERS[3]),
    );
    let see = |e: &ObsExpr| Formula::dia(e.clone(), Formula::Top);
    let blind = |e: &ObsExpr| Formula::boxed(e.clone(), Formula::Bottom);
    let leaves = |f: Formula| tree_box_n(depth, f);
    let mut parts = vec![level(0)];

    // The full binary tree over the position bits.
    for l in 0..depth {
        let mut node = vec![
            tree_dia(l, position_bit(l)),
            tree_dia(l, Formula::not(position_bit(l))),
        ];
        for i in 0..l {
            node.push(Formula::implies(position_bit(i), tree_box(l, position_bit(i))));
            node.push(Formula::implies(
                Formula::not(position_bit(i)),
                tree_box(l, Formula::not(position_bit(i))),
            ));
        }
        parts.push(tree_box_n(l, Formula::conj(node)));
    }

    // One tile per position in each tiling.
    parts.push(leaves(exactly_one(tiles.clone().map(|k| tile_atom('A', k)).collect())));
    parts.push(leaves(exactly_one(tiles.clone().map(|k| tile_atom('B', k)).collect())));
    if !t.tiles.is_empty() {
        parts.push(leaves(Formula::implies(
            Formula::and(ax.is_zero(), ay.is_zero()),
            tile_atom('A', 0),
        )));
    }

    // The two tilings agree.
    parts.push(leaves(Formula::implies(
        Formula::and(ax.eq(&bx), ay.eq(&by)),
        Formula::conj(tiles.clone().map(|k| iff(tile_atom('A', k), tile_atom('B', k)))),
    )));

    // A is the right neighbour of B, then the upper neighbour of B.
    let pairs = |ok: &dyn Fn(&Tile, &Tile) -> bool| {
        let mut out = Vec::new();
        for (x, ta) in t.tiles.iter().enumerate() {
            for (y, tb) in t.tiles.iter().enumerate() {
                if ok(ta, tb) {
                    out.push(Formula::and(tile_atom('A', x), tile_atom('B', y)));
                }
            }
        }
        Formula::disj(out)
    };
    parts.push(leaves(Formula::implies(
        Formula::and(ax.is_successor_of(&bx), ay.eq(&by)),
        pairs(&|a, b| b.right == a.left),
    )));
    parts.push(leaves(Formula::implies(
        Formula::and(ay.is_successor_of(&by), ax.eq(&bx)),
        pairs(&|a, b| b.up == a.down),
    )));

    // A leaf observes exactly the words spelling its positions.
    let link = |i: usize, offset: usize, one: &ObsExpr, zero: &ObsExpr| {
        let pre = ObsExpr::raw_union(one.clone(), zero.clone()).power((i - offset) as u32);
        box_or_plain(
            pre,
            Formula::and(
                Formula::implies(position_bit(i), Formula::and(see(one), blind(zero))),
                Formula::implies(Formula::not(position_bit(i)), Formula::and(see(zero), blind(one))),
            ),
        )
    };
    parts.push(leaves(Formula::conj((0..2 * n).map(|i| link(i, 0, &a1, &a0)))));
    parts.push(leaves(Formula::conj((2 * n..4 * n).map(|i| link(i, 2 * n, &b1, &b0)))));

    // Inner nodes, and the states linking them to their children, survive
    // every word of length up to 2n.
    let sigma = ObsExpr::raw_union(
        ObsExpr::raw_union(a1.clone(), a0.clone()),
        ObsExpr::raw_union(b1.clone(), b0.clone()),
    );
    let open = Formula::conj((0..2 * n).map(|i| {
        box_or_plain(
            sigma.power(i as u32),
            Formula::conj([see(&a1), see(&a0), see(&b1), see(&b0)]),
        )
    }));
    for l in 0..depth {
        parts.push(tree_box_n(l, Formula::know(TILING_AGENTS[0], open.clone())));
    }

    // The tile at a position of A (of B) does not depend on the other tiling.
    let pick = |one: &ObsExpr, zero: &ObsExpr, side: char| {
        Formula::boxed(
            ObsExpr::raw_union(one.clone(), zero.clone()).power(2 * n as u32),
            Formula::disj(tiles.clone().map(|k| leaves(tile_atom(side, k)))),
        )
    };
    parts.push(Formula::and(pick(&a1, &a0, 'A'), pick(&b1, &b0, 'B')));
    Formula::conj(parts)
}

/// The intended model of [`gen_tiling`] for a solvable instance: a tree of
/// depth `4n` whose edges pass through one linking state each, with the
/// tiling written at the leaves. `None` when there is no tiling.
pub fn tiling_witness(t: &TilingInstance) -> Result<Option<PointedModel>, TilingError> {
    let Some(grid) = tiling_solution(t)? else {
        return Ok(None);
    };
    let n = t.n as usize;
    let depth = 4 * n;
    let alphabet = Alphabet::new(TILING_LETTERS).expect("letters are distinct");
    let words_2n: Vec<Word> = alphabet
        .words_up_to(2 * n)
        .into_iter()
        .filter(|w| w.len() == 2 * n)
        .collect();
    let everything = ObsExpr::sum_of_words(&words_2n).expect("alphabet is non-empty");
    let bits_word = |bits: &[bool], one: &str, zero: &str| {
        Word::from_letters(bits.iter().map(|&b| if b { one } else { zero }))
    };

    let mut names = Vec::new();
    let mut valuation: Vec<BTreeSet<Symbol>> = Vec::new();
    let mut exp = Vec::new();
    let mut a_cells: Vec<Vec<usize>> = Vec::new();
    let mut b_cells: Vec<Vec<usize>> = Vec::new();
    // Partial assignment of bits, from the root down.
    fn name(prefix: &[bool]) -> String {
        let bits: String = prefix.iter().map(|&b| if b { '1' } else { '0' }).collect();
        format!("n{}b{bits}", prefix.len())
    }
    let mut stack: Vec<(Vec<bool>, Option<usize>)> = vec![(Vec::new(), None)];
    while let Some((prefix, incoming)) = stack.pop() {
        let s = names.len();
        names.push(Symbol::from(name(&prefix)));
        let mut v: BTreeSet<Symbol> = prefix
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(k, _)| Symbol::from(format!("p{k}")))
            .collect();
        v.insert(Symbol::from(format!("lev{}", prefix.len())));
        match incoming {
            Some(mid) => b_cells.push(vec![mid, s]),
            None => b_cells.push(vec![s]),
        }
        if prefix.len() == depth {
            let num = |bits: &[bool]| bits.iter().fold(0usize, |acc, &b| 2 * acc + b as usize);
            let (x_a, y_a) = (num(&prefix[0..n]), num(&prefix[n..2 * n]));
            let (x_b, y_b) = (num(&prefix[2 * n..3 * n]), num(&prefix[3 * n..]));
            v.insert(Symbol::from(format!("qA_{}", grid[y_a][x_a])));
            v.insert(Symbol::from(format!("qB_{}", grid[y_b][x_b])));
            let wa = bits_word(&prefix[..2 * n], "A", "nA");
            let wb = bits_word(&prefix[2 * n..], "B", "nB");
            exp.push(ObsExpr::sum_of_words([&wa, &wb]).expect("two words"));
            valuation.push(v);
            a_cells.push(vec![s]);
            continue;
        }
        exp.push(everything.clone());
        valuation.push(v);
        let mut cell = vec![s];
        for bit in [true, false] {
            let mid = names.len();
            names.push(Symbol::from(format!("m{}x{}", name(&prefix), bit as u8)));
            valuation.push(BTreeSet::new());
            exp.push(everything.clone());
            cell.push(mid);
            let mut child = prefix.clone();
            child.push(bit);
            stack.push((child, Some(mid)));
        }
        a_cells.push(cell);
    }
    let count = names.len();
    let mut atoms: Vec<Symbol> = (0..depth).map(|k| Symbol::from(format!("p{k}"))).collect();
    atoms.extend((0..=depth).map(|k| Symbol::from(format!("lev{k}"))));
    for side in ["A", "B"] {
        atoms.extend((0..t.tiles.len()).map(|k| Symbol::from(format!("q{side}_{k}"))));
    }
    let skeleton = EpistemicModel::from_parts(
        TILING_AGENTS.iter().map(|a| Symbol::from(*a)).collect(),
        atoms,
        names,
        valuation,
        vec![
            Partition::from_cells(count, a_cells),
            Partition::from_cells(count, b_cells),
        ],
    );
    Ok(Some(PointedModel {
        model: ExpectationModel::from_parts(alphabet, skeleton, exp),
        point: 0,
    }))
}

/// The power-source scenario with letters `l r u d` for the four moves.
pub const VBOT_MODEL: &str = "\
# Vacuum bot: t heads for the power source, s and u for debris disposal,
# u possibly with one wrong move.
alphabet: l r u d
agents: alice bob
atoms: debris power
state s props debris exp (r + u)^<=3
state t props power exp (l + d)^<=3
state u props debris exp (r + u)^<=3 . (d + l + eps) . (r + u)^<=3
rel alice: {s t u}
rel bob: {s t} {u}
point: t
";

/// `P_n` over the two moves: after each of up to `n` such moves, both
/// remain observable.
pub fn progress(n: u32, first: &str, second: &str) -> Formula {
    let both = Formula::and(
        Formula::dia(ObsExpr::letter(first), Formula::Top),
        Formula::dia(ObsExpr::letter(second), Formula::Top),
    );
    let step = ObsExpr::raw_union(ObsExpr::letter(second), ObsExpr::letter(first));
    Formula::conj((0..=n).map(|k| box_or_plain(step.power(k), both.clone())))
}

/// Named vacuum-bot formulas for horizon `n`.
pub fn gen_vbot(n: u32) -> Vec<(&'static str, Formula)> {
    let short = n.min(3);
    let psi_p = progress(short, "l", "d");
    let psi_d = progress(short, "r", "u");
    let psi_de = Formula::and(
        psi_d.clone(),
        Formula::dia(
            ObsExpr::raw_union(ObsExpr::letter("d"), ObsExpr::letter("l")),
            Formula::Top,
        ),
    );
    let gamma = vec![
        Formula::and(Formula::poss("alice", psi_de.clone()), psi_p.clone()),
        Formula::and(Formula::poss("alice", psi_d.clone()), Formula::poss("bob", psi_d.clone())),
    ];
    let info = Formula::dia(
        ObsExpr::raw_union(ObsExpr::letter("d"), ObsExpr::letter("l")),
        Formula::and(
            Formula::know("bob", Formula::atom("power")),
            Formula::poss("alice", Formula::atom("debris")),
        ),
    );
    let query = Formula::not(Formula::implies(Formula::conj(gamma.clone()), info.clone()));
    vec![
        ("P_n", progress(n, "l", "d")),
        ("psi_p", psi_p),
        ("psi_d", psi_d),
        ("psi_de", psi_de),
        ("gamma_1", gamma[0].clone()),
        ("gamma_2", gamma[1].clone()),
        ("INFO_ab", info),
        ("query", query),
    ]
}
