//! Epistemic expectation models, validation, update by observation and the
//! line-oriented model file format.
//!
//! States are dense indices `0..n`; names are kept for printing and survive
//! updates unchanged. Each agent's indistinguishability relation is stored
//! as a partition, so it is an equivalence relation by construction.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::obsexpr::{parse_obsexpr, Alphabet, ObsExpr, Word};
use crate::syntax::{check_symbol_name, ParseError};
use crate::Symbol;

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate agent `{0}`")]
    DuplicateAgent(String),
    #[error("duplicate atom `{0}`")]
    DuplicateAtom(String),
    #[error("undeclared agent `{0}`")]
    UndeclaredAgent(String),
    #[error("no relation given for agent `{0}`")]
    MissingRelation(String),
    #[error("relation for agent `{agent}` does not cover state `{state}`")]
    Uncovered { agent: String, state: String },
    #[error("relation for agent `{agent}` puts state `{state}` in two cells")]
    Overlap { agent: String, state: String },
    #[error("relation for agent `{agent}` has an empty cell")]
    EmptyCell { agent: String },
    #[error("state `{0}` has an empty expectation")]
    EmptyExpectation(String),
    #[error("state `{state}` uses undeclared atom `{atom}`")]
    UndeclaredAtom { state: String, atom: String },
    #[error("state `{state}` uses undeclared letter `{letter}`")]
    UndeclaredLetter { state: String, letter: String },
    #[error("invalid name: {0}")]
    BadName(String),
}

/// Partition of the state set into cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Vec<StateId>>,
    cell_of: Vec<usize>,
}

impl Partition {
    /// Builds a partition from cells. Indices not covered map to
    /// `usize::MAX`; [`EpistemicModel::validate`] reports them.
    pub fn from_cells(n: usize, cells: Vec<Vec<StateId>>) -> Partition {
        let mut cell_of = vec![usize::MAX; n];
        for (c, cell) in cells.iter().enumerate() {
            for &s in cell {
                if s < n && cell_of[s] == usize::MAX {
                    cell_of[s] = c;
                }
            }
        }
        Partition { cells, cell_of }
    }

    /// Every state in its own cell.
    pub fn discrete(n: usize) -> Partition {
        Partition::from_cells(n, (0..n).map(|s| vec![s]).collect())
    }

    /// One cell holding every state.
    pub fn total(n: usize) -> Partition {
        let cells = if n == 0 { vec![] } else { vec![(0..n).collect()] };
        Partition::from_cells(n, cells)
    }

    /// From a restricted-growth labelling: state `s` lies in cell `labels[s]`.
    pub fn from_labels(labels: &[usize]) -> Partition {
        let k = labels.iter().map(|&l| l + 1).max().unwrap_or(0);
        let mut cells = vec![Vec::new(); k];
        for (s, &l) in labels.iter().enumerate() {
            cells[l].push(s);
        }
        cells.retain(|c| !c.is_empty());
        Partition::from_cells(labels.len(), cells)
    }

    pub fn cells(&self) -> &[Vec<StateId>] {
        &self.cells
    }

    /// The cell containing `s`.
    pub fn class(&self, s: StateId) -> &[StateId] {
        &self.cells[self.cell_of[s]]
    }

    pub fn related(&self, s: StateId, t: StateId) -> bool {
        self.cell_of[s] == self.cell_of[t]
    }

    /// Keeps states with `map[s] = Some(new)`, renumbered; drops empty cells.
    pub fn restrict(&self, map: &[Option<StateId>], n_new: usize) -> Partition {
        let cells = self
            .cells
            .iter()
            .map(|c| c.iter().filter_map(|&s| map[s]).collect::<Vec<_>>())
            .filter(|c| !c.is_empty())
            .collect();
        Partition::from_cells(n_new, cells)
    }
}

/// Multi-agent S5 model without expectations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpistemicModel {
    agents: Vec<Symbol>,
    atoms: Vec<Symbol>,
    names: Vec<Symbol>,
    valuation: Vec<BTreeSet<Symbol>>,
    relations: Vec<Partition>,
}

impl EpistemicModel {
    /// Assembles a model without validating it.
    pub fn from_parts(
        agents: Vec<Symbol>,
        atoms: Vec<Symbol>,
        names: Vec<Symbol>,
        valuation: Vec<BTreeSet<Symbol>>,
        relations: Vec<Partition>,
    ) -> EpistemicModel {
        EpistemicModel {
            agents,
            atoms,
            names,
            valuation,
            relations,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn agents(&self) -> &[Symbol] {
        &self.agents
    }

    pub fn atoms(&self) -> &[Symbol] {
        &self.atoms
    }

    pub fn names(&self) -> &[Symbol] {
        &self.names
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s]
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| &**n == name)
    }

    pub fn agent_index(&self, agent: &str) -> Option<usize> {
        self.agents.iter().position(|a| &**a == agent)
    }

    pub fn valuation(&self, s: StateId) -> &BTreeSet<Symbol> {
        &self.valuation[s]
    }

    pub fn holds(&self, s: StateId, atom: &str) -> bool {
        self.valuation[s].contains(atom)
    }

    pub fn relation(&self, agent: usize) -> &Partition {
        &self.relations[agent]
    }

    /// States `agent` cannot distinguish from `s`. An agent unknown to the
    /// model has no information, so every state is returned.
    pub fn class_of(&self, agent: &str, s: StateId) -> Vec<StateId> {
        match self.agent_index(agent) {
            Some(i) => self.relations[i].class(s).to_vec(),
            None => (0..self.len()).collect(),
        }
    }

    /// Adds `atom` to the declared atoms and to the valuation of `states`.
    pub fn add_atom(&mut self, atom: Symbol, states: impl IntoIterator<Item = StateId>) {
        if !self.atoms.contains(&atom) {
            self.atoms.push(atom.clone());
        }
        for s in states {
            self.valuation[s].insert(atom.clone());
        }
    }

    /// First violated invariant, if any.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.len();
        let mut seen = BTreeSet::new();
        for name in &self.names {
            if !seen.insert(name) {
                return Err(ModelError::DuplicateState(name.to_string()));
            }
        }
        if let Some(missing) = self.agents.get(self.relations.len()) {
            return Err(ModelError::MissingRelation(missing.to_string()));
        }
        for (agent, part) in self.agents.iter().zip(&self.relations) {
            let mut count = vec![0usize; n];
            for cell in &part.cells {
                if cell.is_empty() {
                    return Err(ModelError::EmptyCell {
                        agent: agent.to_string(),
                    });
                }
                for &s in cell {
                    if s >= n {
                        return Err(ModelError::UnknownState(format!("#{s}")));
                    }
                    count[s] += 1;
                }
            }
            for s in 0..n {
                if count[s] == 0 {
                    return Err(ModelError::Uncovered {
                        agent: agent.to_string(),
                        state: self.names[s].to_string(),
                    });
                }
                if count[s] > 1 {
                    return Err(ModelError::Overlap {
                        agent: agent.to_string(),
                        state: self.names[s].to_string(),
                    });
                }
            }
        }
        for (s, val) in self.valuation.iter().enumerate() {
            if let Some(p) = val.iter().find(|p| !self.atoms.contains(p)) {
                return Err(ModelError::UndeclaredAtom {
                    state: self.names[s].to_string(),
                    atom: p.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Submodel on the states with `keep[s]`, plus the old-to-new index map.
    pub fn restrict(&self, keep: &[bool]) -> (EpistemicModel, Vec<Option<StateId>>) {
        let mut map = vec![None; self.len()];
        let mut next = 0;
        for s in 0..self.len() {
            if keep[s] {
                map[s] = Some(next);
                next += 1;
            }
        }
        fn pick<T: Clone>(v: &[T], keep: &[bool]) -> Vec<T> {
            v.iter()
                .zip(keep)
                .filter(|(_, k)| **k)
                .map(|(x, _)| x.clone())
                .collect()
        }
        let m = EpistemicModel {
            agents: self.agents.clone(),
            atoms: self.atoms.clone(),
            names: pick(&self.names, keep),
            valuation: pick(&self.valuation, keep),
            relations: self.relations.iter().map(|p| p.restrict(&map, next)).collect(),
        };
        (m, map)
    }
}

/// Epistemic model with a non-empty expectation per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectationModel {
    alphabet: Alphabet,
    skeleton: EpistemicModel,
    exp: Vec<ObsExpr>,
}

/// A model together with a designated state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedModel {
    pub model: ExpectationModel,
    pub point: StateId,
}

impl ExpectationModel {
    /// Assembles a model without validating it.
    pub fn from_parts(alphabet: Alphabet, skeleton: EpistemicModel, exp: Vec<ObsExpr>) -> Self {
        ExpectationModel {
            alphabet,
            skeleton,
            exp,
        }
    }

    pub fn builder(alphabet: Alphabet) -> ModelBuilder {
        ModelBuilder::new(alphabet)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn skeleton(&self) -> &EpistemicModel {
        &self.skeleton
    }

    pub fn len(&self) -> usize {
        self.skeleton.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skeleton.is_empty()
    }

    pub fn exp(&self, s: StateId) -> &ObsExpr {
        &self.exp[s]
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.skeleton.state(name)
    }

    pub fn name(&self, s: StateId) -> &str {
        self.skeleton.name(s)
    }

    /// `w ∈ Pre(Exp(s))`.
    pub fn surviving(&self, s: StateId, w: &Word) -> bool {
        self.exp[s].in_prefixes(w)
    }

    /// First violated invariant, if any.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.skeleton.validate()?;
        for (s, e) in self.exp.iter().enumerate() {
            let name = self.skeleton.names[s].to_string();
            if let Some(l) = self.alphabet.undeclared_in(e) {
                return Err(ModelError::UndeclaredLetter {
                    state: name,
                    letter: l.to_string(),
                });
            }
            if e.is_empty() {
                return Err(ModelError::EmptyExpectation(name));
            }
        }
        Ok(())
    }

    /// `M|_w`, with the old-to-new state map.
    pub fn update_with_map(&self, w: &Word) -> (ExpectationModel, Vec<Option<StateId>>) {
        let residuals: Vec<ObsExpr> = self.exp.iter().map(|e| e.residual(w)).collect();
        let keep: Vec<bool> = residuals.iter().map(|e| !e.is_empty()).collect();
        let (skeleton, map) = self.skeleton.restrict(&keep);
        let exp = residuals
            .into_iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(e, _)| e)
            .collect();
        (
            ExpectationModel {
                alphabet: self.alphabet.clone(),
                skeleton,
                exp,
            },
            map,
        )
    }

    /// `M|_w`: survivors of `w` with residuated expectations.
    pub fn update(&self, w: &Word) -> ExpectationModel {
        self.update_with_map(w).0
    }

    /// Renders the model in the model file format.
    pub fn to_file(&self, point: Option<StateId>) -> String {
        let mut out = String::new();
        let join = |xs: &[Symbol]| xs.iter().map(|x| &**x).collect::<Vec<_>>().join(" ");
        out.push_str(&format!("alphabet: {}\n", self.alphabet));
        out.push_str(&format!("agents: {}\n", join(&self.skeleton.agents)).replace(" \n", "\n"));
        out.push_str(&format!("atoms: {}\n", join(&self.skeleton.atoms)).replace(" \n", "\n"));
        for s in 0..self.len() {
            let props: Vec<Symbol> = self.skeleton.valuation[s].iter().cloned().collect();
            let mut line = format!("state {} props", self.skeleton.names[s]);
            if !props.is_empty() {
                line.push(' ');
                line.push_str(&join(&props));
            }
            line.push_str(&format!(" exp {}\n", self.exp[s]));
            out.push_str(&line);
        }
        for (agent, part) in self.skeleton.agents.iter().zip(&self.skeleton.relations) {
            out.push_str(&format!("rel {agent}:"));
            for cell in &part.cells {
                let names: Vec<&str> = cell.iter().map(|&s| self.name(s)).collect();
                out.push_str(&format!(" {{{}}}", names.join(" ")));
            }
            out.push('\n');
        }
        if let Some(p) = point {
            out.push_str(&format!("point: {}\n", self.name(p)));
        }
        out
    }
}

impl fmt::Display for ExpectationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_file(None))
    }
}

impl fmt::Display for PointedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.model.to_file(Some(self.point)))
    }
}

/// Incremental construction by state and agent names.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    alphabet: Alphabet,
    agents: Vec<Symbol>,
    atoms: Vec<Symbol>,
    states: Vec<(Symbol, BTreeSet<Symbol>, ObsExpr)>,
    relations: Vec<(Symbol, Vec<Vec<Symbol>>)>,
}

impl ModelBuilder {
    pub fn new(alphabet: Alphabet) -> Self {
        ModelBuilder {
            alphabet,
            agents: Vec::new(),
            atoms: Vec::new(),
            states: Vec::new(),
            relations: Vec::new(),
        }
    }

    pub fn agents<I: IntoIterator<Item = S>, S: AsRef<str>>(mut self, agents: I) -> Self {
        self.agents
            .extend(agents.into_iter().map(|a| Symbol::from(a.as_ref())));
        self
    }

    pub fn atoms<I: IntoIterator<Item = S>, S: AsRef<str>>(mut self, atoms: I) -> Self {
        self.atoms
            .extend(atoms.into_iter().map(|a| Symbol::from(a.as_ref())));
        self
    }

    pub fn state<I: IntoIterator<Item = S>, S: AsRef<str>>(
        mut self,
        name: &str,
        props: I,
        exp: ObsExpr,
    ) -> Self {
        let props = props.into_iter().map(|p| Symbol::from(p.as_ref())).collect();
        self.states.push((Symbol::from(name), props, exp));
        self
    }

    /// Sets `agent`'s partition from cells of state names.
    pub fn relation(mut self, agent: &str, cells: &[&[&str]]) -> Self {
        let cells = cells
            .iter()
            .map(|c| c.iter().map(|s| Symbol::from(*s)).collect())
            .collect();
        self.relations.push((Symbol::from(agent), cells));
        self
    }

    fn assemble(self) -> Result<ExpectationModel, ModelError> {
        for (kind, names) in [("agent", &self.agents), ("atom", &self.atoms)] {
            let mut seen = BTreeSet::new();
            for n in names {
                check_symbol_name(n).map_err(ModelError::BadName)?;
                if !seen.insert(n) {
                    return Err(if kind == "agent" {
                        ModelError::DuplicateAgent(n.to_string())
                    } else {
                        ModelError::DuplicateAtom(n.to_string())
                    });
                }
            }
        }
        let names: Vec<Symbol> = self.states.iter().map(|s| s.0.clone()).collect();
        let index = |n: &Symbol| {
            names
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| ModelError::UnknownState(n.to_string()))
        };
        let mut relations = Vec::with_capacity(self.agents.len());
        for agent in &self.agents {
            let mut given = self.relations.iter().filter(|(a, _)| a == agent);
            let (_, cells) = given
                .next()
                .ok_or_else(|| ModelError::MissingRelation(agent.to_string()))?;
            let cells = cells
                .iter()
                .map(|c| c.iter().map(index).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            relations.push(Partition::from_cells(names.len(), cells));
        }
        if let Some((a, _)) = self.relations.iter().find(|(a, _)| !self.agents.contains(a)) {
            return Err(ModelError::UndeclaredAgent(a.to_string()));
        }
        let skeleton = EpistemicModel {
            agents: self.agents,
            atoms: self.atoms,
            names,
            valuation: self.states.iter().map(|s| s.1.clone()).collect(),
            relations,
        };
        let exp = self.states.into_iter().map(|s| s.2).collect();
        Ok(ExpectationModel {
            alphabet: self.alphabet,
            skeleton,
            exp,
        })
    }

    /// Builds and validates.
    pub fn build(self) -> Result<ExpectationModel, ModelError> {
        let m = self.assemble()?;
        m.validate()?;
        Ok(m)
    }

    /// Builds resolving names only; the result may violate model invariants.
    pub fn build_unchecked(self) -> Result<ExpectationModel, ModelError> {
        self.assemble()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelFileError {
    #[error("{0}")]
    Syntax(#[from] ParseError),
    #[error("{0}")]
    Invalid(#[from] ModelError),
}

/// A parsed model file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelFile {
    pub model: ExpectationModel,
    pub point: Option<StateId>,
}

fn err_at(line: usize, column: usize, message: impl Into<String>) -> ModelFileError {
    ModelFileError::Syntax(ParseError {
        line,
        column,
        message: message.into(),
    })
}

/// Parses the model file format. `#` starts a comment.
pub fn parse_model(text: &str) -> Result<ModelFile, ModelFileError> {
    let mut alphabet: Option<Alphabet> = None;
    let mut agents: Vec<String> = Vec::new();
    let mut atoms: Vec<String> = Vec::new();
    let mut states: Vec<(String, Vec<String>, ObsExpr)> = Vec::new();
    let mut rels: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    let mut point: Option<(usize, String)> = None;

    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - trimmed.len();
        let col = |byte: usize| line[..byte].chars().count() + 1;
        let (head, rest) = match trimmed.find(|c: char| c.is_whitespace() || c == ':') {
            Some(k) => (&trimmed[..k], &trimmed[k..]),
            None => (trimmed, ""),
        };
        let rest_at = indent + head.len();
        let after_colon = |rest: &str| -> Result<(usize, String), ModelFileError> {
            let r = rest.trim_start();
            match r.strip_prefix(':') {
                Some(x) => Ok((rest_at + (rest.len() - r.len()) + 1, x.to_string())),
                None => Err(err_at(ln, col(rest_at), format!("expected `:` after `{head}`"))),
            }
        };
        match head {
            "alphabet" => {
                let (_, body) = after_colon(rest)?;
                let a = Alphabet::new(body.split_whitespace())
                    .map_err(|e| err_at(ln, col(indent), e.to_string()))?;
                alphabet = Some(a);
            }
            "agents" => {
                let (_, body) = after_colon(rest)?;
                agents = body.split_whitespace().map(String::from).collect();
            }
            "atoms" => {
                let (_, body) = after_colon(rest)?;
                atoms = body.split_whitespace().map(String::from).collect();
            }
            "point" => {
                let (_, body) = after_colon(rest)?;
                let mut it = body.split_whitespace();
                let p = it
                    .next()
                    .ok_or_else(|| err_at(ln, col(indent), "missing point state"))?;
                if it.next().is_some() {
                    return Err(err_at(ln, col(indent), "point takes one state"));
                }
                point = Some((ln, p.to_string()));
            }
            "state" => {
                let alpha = alphabet
                    .as_ref()
                    .ok_or_else(|| err_at(ln, col(indent), "`alphabet:` must precede states"))?;
                let Some(exp_at) = find_word(rest, "exp") else {
                    return Err(err_at(ln, col(indent), "state line needs `exp <expression>`"));
                };
                let mut words = rest[..exp_at].split_whitespace();
                let name = words
                    .next()
                    .ok_or_else(|| err_at(ln, col(rest_at), "missing state name"))?;
                check_symbol_name(name).map_err(|m| err_at(ln, col(rest_at), m))?;
                if words.next() != Some("props") {
                    return Err(err_at(ln, col(rest_at), "expected `props` after state name"));
                }
                let props = words.map(String::from).collect();
                let expr_start = rest_at + exp_at + 3;
                let expr = parse_obsexpr(&line[expr_start..], Some(alpha)).map_err(|e| {
                    let column = if e.line == 1 {
                        col(expr_start) + e.column - 1
                    } else {
                        e.column
                    };
                    err_at(ln, column, e.message)
                })?;
                states.push((name.to_string(), props, expr));
            }
            "rel" => {
                let r = rest.trim_start();
                let colon = r
                    .find(':')
                    .ok_or_else(|| err_at(ln, col(rest_at), "expected `rel <agent>: {..}`"))?;
                let agent = r[..colon].trim().to_string();
                let mut cells = Vec::new();
                let mut body = &r[colon + 1..];
                loop {
                    body = body.trim_start();
                    if body.is_empty() {
                        break;
                    }
                    let Some(inner) = body.strip_prefix('{') else {
                        return Err(err_at(ln, col(line.len() - body.len()), "expected `{`"));
                    };
                    let close = inner
                        .find('}')
                        .ok_or_else(|| err_at(ln, col(line.len() - body.len()), "unclosed `{`"))?;
                    cells.push(inner[..close].split_whitespace().map(String::from).collect());
                    body = &inner[close + 1..];
                }
                rels.push((agent, cells));
            }
            other => return Err(err_at(ln, col(indent), format!("unknown directive `{other}`"))),
        }
    }

    let alphabet = alphabet.ok_or_else(|| err_at(1, 1, "missing `alphabet:` line"))?;
    let mut b = ModelBuilder::new(alphabet).agents(&agents).atoms(&atoms);
    for (name, props, e) in states {
        b = b.state(&name, &props, e);
    }
    for (agent, cells) in &rels {
        let cells: Vec<Vec<&str>> = cells
            .iter()
            .map(|c| c.iter().map(String::as_str).collect())
            .collect();
        let refs: Vec<&[&str]> = cells.iter().map(Vec::as_slice).collect();
        b = b.relation(agent, &refs);
    }
    let model = b.build()?;
    let point = match point {
        Some((ln, p)) => Some(
            model
                .state(&p)
                .ok_or_else(|| err_at(ln, 1, format!("unknown point state `{p}`")))?,
        ),
        None => None,
    };
    Ok(ModelFile { model, point })
}

/// Byte offset of `word` as a whitespace-delimited token in `s`.
fn find_word(s: &str, word: &str) -> Option<usize> {
    let mut at = 0;
    for tok in s.split_whitespace() {
        let k = s[at..].find(tok).map(|k| k + at)?;
        if tok == word {
            return Some(k);
        }
        at = k + tok.len();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "\
alphabet: a b
agents: i
atoms: p
state s props p exp a.b + b   # comment
state t props exp a
rel i: {s t}
point: s
";

    fn w(s: &str) -> Word {
        Word::from_letters(s.split('.').filter(|x| !x.is_empty()))
    }

    #[test]
    fn parse_and_print_round_trip() {
        let mf = parse_model(TWO).unwrap();
        assert_eq!(mf.model.len(), 2);
        assert_eq!(mf.point, Some(0));
        let again = parse_model(&mf.model.to_file(mf.point)).unwrap();
        assert_eq!(again, mf);
    }

    #[test]
    fn rejects_non_partitions() {
        let missing = TWO.replace("rel i: {s t}", "rel i: {s}");
        assert!(matches!(
            parse_model(&missing),
            Err(ModelFileError::Invalid(ModelError::Uncovered { .. }))
        ));
        let overlap = TWO.replace("rel i: {s t}", "rel i: {s t} {t}");
        assert!(matches!(
            parse_model(&overlap),
            Err(ModelFileError::Invalid(ModelError::Overlap { .. }))
        ));
    }

    #[test]
    fn rejects_empty_expectation() {
        let bad = TWO.replace("exp a\n", "exp 0.a\n");
        assert_eq!(
            parse_model(&bad),
            Err(ModelFileError::Invalid(ModelError::EmptyExpectation("t".into())))
        );
    }

    #[test]
    fn expression_errors_carry_file_columns() {
        let bad = TWO.replace("exp a\n", "exp a.z\n");
        let ModelFileError::Syntax(e) = parse_model(&bad).unwrap_err() else {
            panic!("expected syntax error");
        };
        assert_eq!((e.line, e.column), (5, 21));
    }

    #[test]
    fn update_restricts_and_residuates() {
        let m = parse_model(TWO).unwrap().model;
        let (u, map) = m.update_with_map(&w("a"));
        assert_eq!(map, vec![Some(0), Some(1)]);
        assert_eq!(u.exp(0).lang(), [w("b")].into());
        assert_eq!(u.exp(1).lang(), [w("")].into());
        let v = m.update(&w("b"));
        assert_eq!(v.len(), 1);
        assert_eq!(v.name(0), "s");
        assert!(v.validate().is_ok());
        let gone = m.update(&w("b.b"));
        assert!(gone.is_empty());
        assert!(gone.validate().is_ok());
        let same = m.update(&Word::epsilon());
        assert_eq!(same, m);
    }

    #[test]
    fn surviving_is_prefix_membership() {
        let m = parse_model(TWO).unwrap().model;
        assert!(m.surviving(0, &w("a")));
        assert!(m.surviving(1, &Word::epsilon()));
        assert!(!m.surviving(1, &w("b")));
    }
}
