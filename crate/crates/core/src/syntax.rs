//! Tokenizer shared by the expression, formula and model-file parsers.

use std::fmt;

use thiserror::Error;

/// Words that can never be used as letter, agent or atom names.
pub const RESERVED: &[&str] = &["eps", "K", "Khat", "true", "false"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(u32),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Le,
    Dot,
    Plus,
    Tilde,
    Amp,
    Bar,
    Arrow,
    Bang,
    Caret,
    Colon,
    Minus,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Num(n) => write!(f, "number `{n}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrack => f.write_str("`[`"),
            Tok::RBrack => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Checks that `name` is a usable symbol name: an identifier that is not a
/// reserved word and does not end with an underscore.
pub fn check_symbol_name(name: &str) -> Result<(), String> {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if is_ident_start(c) => {}
        _ => return Err(format!("`{name}` is not an identifier")),
    }
    if !chars.all(is_ident_continue) {
        return Err(format!("`{name}` is not an identifier"));
    }
    if name.ends_with('_') {
        return Err(format!("`{name}` must not end with `_`"));
    }
    if RESERVED.contains(&name) {
        return Err(format!("`{name}` is a reserved word"));
    }
    Ok(())
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if is_ident_start(c) {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !is_ident_continue(c) {
                    break;
                }
                s.push(c);
                bump(&mut chars);
            }
            out.push((Tok::Ident(s), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                s.push(c);
                bump(&mut chars);
            }
            let n = s
                .parse()
                .map_err(|_| ParseError::at(pos, format!("number `{s}` is too large")))?;
            out.push((Tok::Num(n), pos));
            continue;
        }
        bump(&mut chars);
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '.' | '·' => Tok::Dot,
            '+' => Tok::Plus,
            '~' | '¬' => Tok::Tilde,
            '&' | '∧' => Tok::Amp,
            '|' | '∨' => Tok::Bar,
            '→' => Tok::Arrow,
            '!' => Tok::Bang,
            '^' => Tok::Caret,
            ':' => Tok::Colon,
            '≤' => Tok::Le,
            '>' => Tok::Gt,
            '<' => {
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::Le
                } else {
                    Tok::Lt
                }
            }
            '-' => {
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            other => return Err(ParseError::at(pos, format!("unexpected character `{other}`"))),
        };
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, column }));
    Ok(out)
}

/// Cursor over a token stream.
pub(crate) struct Tokens {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Tokens {
    pub(crate) fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Tokens {
            toks: tokenize(src)?,
            at: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub(crate) fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    pub(crate) fn next(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("{tok}")))
        }
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::at(self.pos(), format!("expected {wanted}, found {}", self.peek()))
    }

    pub(crate) fn expect_end(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}
