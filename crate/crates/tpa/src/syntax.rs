//! Tokenizer shared by the protocol, topology, schedule, attack-pattern and constraint
//! languages.

use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Plain identifier or keyword. May contain `_` and trailing primes.
    Ident(String),
    /// Identifier written with a `?` suffix, e.g. `V?`.
    Choice(String),
    /// `#f1`
    Fresh(String),
    /// `$t1`
    Time(String),
    Num(String),
    Sym(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Num(s) => write!(f, "{s}"),
            Tok::Choice(s) => write!(f, "{s}?"),
            Tok::Fresh(s) => write!(f, "#{s}"),
            Tok::Time(s) => write!(f, "${s}"),
            Tok::Sym(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("syntax error at {pos}: {msg}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { pos, msg: msg.into() }
    }
}

// Longest spellings first so that `<=` wins over `<`.
const SYMBOLS: &[(&str, &str)] = &[
    ("->", "→"),
    ("→", "→"),
    ("==", "=="),
    ("<=", "≤"),
    (">=", "≥"),
    ("≤", "≤"),
    ("≥", "≥"),
    ("⊕", "⊕"),
    ("⊖", "⊖"),
    ("⊎", "⊎"),
    ("∧", "∧"),
    ("&&", "∧"),
    ("−", "-"),
    ("<", "<"),
    (">", ">"),
    ("=", "="),
    ("(", "("),
    (")", ")"),
    ("{", "{"),
    ("}", "}"),
    ("[", "["),
    ("]", "]"),
    (",", ","),
    (";", ";"),
    (".", "."),
    (":", ":"),
    ("@", "@"),
    ("?", "?"),
    ("+", "+"),
    ("-", "-"),
    ("*", "*"),
    ("/", "/"),
    ("|", "|"),
];

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for k in 0..n {
            if chars[*i + k] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        }
        *i += n;
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') || c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if ident_start(c) || ((c == '#' || c == '$') && chars.get(i + 1).is_some_and(|d| ident_start(*d))) {
            let start = if ident_start(c) { i } else { i + 1 };
            let mut j = start;
            while j < chars.len() && ident_char(chars[j]) {
                j += 1;
            }
            let name: String = chars[start..j].iter().collect();
            let tok = match c {
                '#' => Tok::Fresh(name),
                '$' => Tok::Time(name),
                _ if chars.get(j) == Some(&'?') => {
                    j += 1;
                    Tok::Choice(name)
                }
                _ => Tok::Ident(name),
            };
            out.push((tok, pos));
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if chars.get(j) == Some(&'.') && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit()) {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            out.push((Tok::Num(chars[i..j].iter().collect()), pos));
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|(spell, _)| rest.starts_with(spell)) {
            Some((spell, sym)) => {
                out.push((Tok::Sym(sym), pos));
                advance(&mut i, &mut line, &mut col, spell.chars().count());
            }
            None => return Err(SyntaxError::new(pos, format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

/// Cursor over a token vector with the usual expect/eat helpers.
pub struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Cursor, SyntaxError> {
        let toks = tokenize(src)?;
        let lines = src.lines().count().max(1);
        let end = Pos { line: lines, col: src.lines().last().map_or(1, |l| l.chars().count() + 1) };
        Ok(Cursor { toks, at: 0, end })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    pub fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.at + k).map(|(t, _)| t)
    }

    pub fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    pub fn is_done(&self) -> bool {
        self.at >= self.toks.len()
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    pub fn mark(&self) -> usize {
        self.at
    }

    pub fn reset(&mut self, mark: usize) {
        self.at = mark;
    }

    pub fn err(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.pos(), msg)
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    pub fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`, found {}", self.describe())))
        }
    }

    pub fn expect_kw(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`, found {}", self.describe())))
        }
    }

    pub fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected identifier, found {}", self.describe()))),
        }
    }

    pub fn describe(&self) -> String {
        match self.peek() {
            Some(t) => format!("`{t}`"),
            None => "end of input".into(),
        }
    }

    /// True if `sym` occurs before any of `stops` at bracket depth zero.
    pub fn scan_for(&self, syms: &[&str], stops: &[&str]) -> bool {
        let mut depth = 0i32;
        for (t, _) in &self.toks[self.at..] {
            match t {
                Tok::Sym("(") | Tok::Sym("[") | Tok::Sym("{") => depth += 1,
                Tok::Sym(")") | Tok::Sym("]") | Tok::Sym("}") => {
                    depth -= 1;
                    if depth < 0 {
                        return false;
                    }
                }
                Tok::Sym(s) if depth == 0 && syms.contains(s) => return true,
                Tok::Sym(s) if depth == 0 && stops.contains(s) => return false,
                Tok::Ident(s) if depth == 0 && stops.contains(&s.as_str()) => return false,
                _ => {}
            }
        }
        false
    }
}
