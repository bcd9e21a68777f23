//! Recursive-descent parser for processes and atomic expressions.
//!
//! Precedence, loosest first: `|`, `+`, prefixes (`a?.P`, `*a?.P`, `a!.P`),
//! then atoms with postfix hiding `P \ a:n`. `#` starts a line comment.

use crate::error::ParseError;
use crate::log::Action;
use crate::name::{is_user_name, Name};
use crate::syntax::{AtomicExpr, ChoiceBranch, Polarity, Process};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(s),
                line: l0,
                column: c0,
            });
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let v = s.parse::<u64>().map_err(|_| ParseError {
                line: l0,
                column: c0,
                message: format!("integer `{s}` out of range"),
            })?;
            out.push(Token {
                tok: Tok::Int(v),
                line: l0,
                column: c0,
            });
        } else if "!?.|+*\\:()-<>[]{},=;".contains(c) {
            i += 1;
            col += 1;
            out.push(Token {
                tok: Tok::Sym(c),
                line: l0,
                column: c0,
            });
        } else {
            return Err(ParseError {
                line: l0,
                column: c0,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Self {
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_sym(&mut self, c: char) -> PResult<()> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{c}`, found {}", self.describe()))
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(format!("unexpected {} after term", self.describe()))
        }
    }

    fn name(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) if is_user_name(&s) => {
                self.bump();
                Ok(Name::new(&s).expect("validated"))
            }
            Tok::Ident(s) => self.err(format!(
                "invalid name `{s}`: names match [a-z][a-zA-Z0-9_]* and are not keywords"
            )),
            _ => self.err(format!("expected a name, found {}", self.describe())),
        }
    }

    fn looks_like_name(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if !["end", "retry", "orElse", "atomic"].contains(&s.as_str()))
    }

    // ---- processes ----

    fn par(&mut self) -> PResult<Process> {
        let mut parts = vec![self.sum()?];
        while self.is_sym('|') {
            self.bump();
            parts.push(self.sum()?);
        }
        Ok(Process::par(parts))
    }

    fn sum(&mut self) -> PResult<Process> {
        let first_tok = self.pos;
        let first = self.prefix()?;
        if !self.is_sym('+') {
            return Ok(first);
        }
        let mut branches = vec![self.as_branch(first, first_tok)?];
        while self.is_sym('+') {
            self.bump();
            branches.push(self.branch()?);
        }
        Ok(Process::choice(branches))
    }

    fn as_branch(&self, p: Process, at: usize) -> PResult<ChoiceBranch> {
        match p {
            Process::Input { channel, body } => Ok(ChoiceBranch {
                polarity: Polarity::In,
                channel,
                body,
            }),
            Process::Choice { mut branches } if branches.len() == 1 => Ok(branches.pop().unwrap()),
            _ => {
                let t = &self.toks[at];
                Err(ParseError {
                    line: t.line,
                    column: t.column,
                    message: "a choice branch must be `a?.P` or `a!.P`".into(),
                })
            }
        }
    }

    fn branch(&mut self) -> PResult<ChoiceBranch> {
        let channel = self.name()?;
        let polarity = if self.is_sym('?') {
            Polarity::In
        } else if self.is_sym('!') {
            Polarity::Out
        } else {
            return self.err(format!(
                "expected `?` or `!` in choice branch, found {}",
                self.describe()
            ));
        };
        self.bump();
        self.reject_value_passing()?;
        self.expect_sym('.')?;
        let body = self.prefix()?;
        Ok(ChoiceBranch {
            polarity,
            channel,
            body: body.into(),
        })
    }

    fn reject_value_passing(&self) -> PResult<()> {
        if self.is_sym('(') || self.is_sym('<') {
            return self.err("value passing is not supported: channels carry no data");
        }
        Ok(())
    }

    fn prefix(&mut self) -> PResult<Process> {
        if self.is_sym('*') {
            self.bump();
            if self.is_sym('{') {
                return self.err("replication counters are internal and cannot be written");
            }
            let channel = self.name()?;
            if !self.is_sym('?') {
                return self.err("replication must guard an input `*a?.P`");
            }
            self.bump();
            self.reject_value_passing()?;
            self.expect_sym('.')?;
            let body = self.prefix()?;
            return Ok(Process::repl(channel, body));
        }
        if self.is_sym('+') {
            self.bump();
            let b = self.branch()?;
            return Ok(Process::choice(vec![b]));
        }
        if self.looks_like_name() {
            match self.peek_at(1) {
                Tok::Sym('?') => {
                    let channel = self.name()?;
                    self.bump();
                    self.reject_value_passing()?;
                    self.expect_sym('.')?;
                    let body = self.prefix()?;
                    return Ok(Process::input(channel, body));
                }
                Tok::Sym('!') if *self.peek_at(2) == Tok::Sym('.') => {
                    let channel = self.name()?;
                    self.bump();
                    self.bump();
                    let body = self.prefix()?;
                    return Ok(Process::choice(vec![ChoiceBranch::output(channel, body)]));
                }
                _ => {}
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Process> {
        let mut p = match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Process::Nil
            }
            Tok::Int(v) => return self.err(format!("unexpected integer `{v}`; only `0` is a process")),
            Tok::Sym('(') => {
                self.bump();
                let p = self.par()?;
                self.expect_sym(')')?;
                p
            }
            Tok::Ident(s) if s == "atomic" => {
                self.bump();
                if self.is_sym('<') {
                    return self.err("ongoing atomic blocks are runtime states and cannot be written");
                }
                self.expect_sym('(')?;
                let m = self.or_else()?;
                self.expect_sym(')')?;
                Process::atomic(m)
            }
            Tok::Ident(_) => {
                let channel = self.name()?;
                if self.is_sym('!') {
                    self.bump();
                    self.reject_value_passing()?;
                    Process::output(channel)
                } else {
                    return self.err(format!(
                        "expected `!`, `?` after channel `{channel}`, found {}",
                        self.describe()
                    ));
                }
            }
            _ => return self.err(format!("expected a process, found {}", self.describe())),
        };
        while self.is_sym('\\') {
            self.bump();
            let name_at = self.pos;
            let name = self.name()?;
            let mut pending = 0u32;
            if self.is_sym(':') {
                self.bump();
                match self.peek().clone() {
                    Tok::Int(v) => {
                        self.bump();
                        pending = u32::try_from(v).or_else(|_| self.err("hide annotation too large"))?;
                    }
                    Tok::Sym('-') => return self.err("hide annotations must be non-negative"),
                    _ => return self.err(format!("expected a count after `:`, found {}", self.describe())),
                }
            }
            if binds_hidden(&p, &name) {
                let t = &self.toks[name_at];
                return Err(ParseError {
                    line: t.line,
                    column: t.column,
                    message: format!("`{name}` is already hidden inside this scope"),
                });
            }
            p = Process::hide(p, name, pending);
        }
        Ok(p)
    }

    // ---- atomic expressions ----

    fn or_else(&mut self) -> PResult<AtomicExpr> {
        let left = self.eprefix()?;
        if self.is_kw("orElse") {
            self.bump();
            let right = self.or_else()?;
            return Ok(AtomicExpr::or_else(left, right));
        }
        Ok(left)
    }

    fn eprefix(&mut self) -> PResult<AtomicExpr> {
        if self.is_kw("end") {
            self.bump();
            return Ok(AtomicExpr::End);
        }
        if self.is_kw("retry") {
            self.bump();
            return Ok(AtomicExpr::Retry);
        }
        if self.is_sym('(') {
            self.bump();
            let m = self.or_else()?;
            self.expect_sym(')')?;
            return Ok(m);
        }
        if self.is_sym('[') {
            return self.err("ongoing expressions are runtime states and cannot be written");
        }
        let channel = self.name()?;
        let action = if self.is_sym('?') {
            Action::read(channel)
        } else if self.is_sym('!') {
            Action::write(channel)
        } else {
            return self.err(format!("expected `?` or `!` after channel, found {}", self.describe()));
        };
        self.bump();
        self.reject_value_passing()?;
        if !self.is_sym('.') {
            return self.err("an action must be followed by `.` and a continuation (e.g. `a?.end`)");
        }
        self.bump();
        let rest = self.eprefix()?;
        Ok(AtomicExpr::prefix(action, rest))
    }
}

fn binds_hidden(p: &Process, a: &Name) -> bool {
    match p {
        Process::Hide { body, name, .. } => name == a || binds_hidden(body, a),
        Process::Input { body, .. } | Process::Repl { body, .. } => binds_hidden(body, a),
        Process::Par { parts } => parts.iter().any(|q| binds_hidden(q, a)),
        Process::Choice { branches } => branches.iter().any(|b| binds_hidden(&b.body, a)),
        _ => false,
    }
}

pub fn parse_process(src: &str) -> Result<Process, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.par()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_expr(src: &str) -> Result<AtomicExpr, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.or_else()?;
    p.expect_eof()?;
    Ok(t)
}
