use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub msg: String,
}

impl ParseError {
    pub fn new(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError {
            pos,
            msg: msg.into(),
        }
    }
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }

    /// The leading atom of a list form, e.g. `lam` in `(lam ...)`.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::atom)
    }

    pub fn expect_list(&self, what: &str) -> Result<&[Sexp], ParseError> {
        self.list()
            .ok_or_else(|| ParseError::new(self.pos(), format!("expected {what}")))
    }

    pub fn expect_atom(&self, what: &str) -> Result<&str, ParseError> {
        self.atom()
            .ok_or_else(|| ParseError::new(self.pos(), format!("expected {what}")))
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s, _) => write!(f, "{s}"),
            Sexp::List(items, _) => {
                write!(f, "(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Reads every top-level form. `;` starts a comment running to end of line.
pub fn read_all(src: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut reader = Reader {
        chars: src.chars().collect(),
        i: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        reader.skip_ws();
        if reader.i >= reader.chars.len() {
            return Ok(out);
        }
        out.push(reader.read()?);
    }
}

pub fn read_one(src: &str) -> Result<Sexp, ParseError> {
    let mut all = read_all(src)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(ParseError::new(Pos { line: 1, col: 1 }, "empty input")),
        _ => Err(ParseError::new(all[1].pos(), "trailing input after first form")),
    }
}

struct Reader {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Reader {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.i];
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while self.i < self.chars.len() {
            let c = self.chars[self.i];
            if c == ';' {
                while self.i < self.chars.len() && self.chars[self.i] != '\n' {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexp, ParseError> {
        self.skip_ws();
        let start = self.pos();
        if self.i >= self.chars.len() {
            return Err(ParseError::new(start, "unexpected end of input"));
        }
        match self.chars[self.i] {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    if self.i >= self.chars.len() {
                        return Err(ParseError::new(start, "unclosed parenthesis"));
                    }
                    if self.chars[self.i] == ')' {
                        self.bump();
                        return Ok(Sexp::List(items, start));
                    }
                    items.push(self.read()?);
                }
            }
            ')' => Err(ParseError::new(start, "unexpected )")),
            _ => {
                let mut s = String::new();
                while self.i < self.chars.len() {
                    let c = self.chars[self.i];
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(self.bump());
                }
                Ok(Sexp::Atom(s, start))
            }
        }
    }
}
