//! Tokenizer shared by the model, data, flat-text, descriptor and solution parsers.

use std::sync::Arc;

use crate::span::{Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Identifiers and keywords alike; keywords are recognised by the parsers.
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    /// Operator or punctuation.
    Sym(&'static str),
    /// Only produced in lenient mode: a run of characters the language does not use.
    Unknown(String),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

impl Token {
    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.tok, Tok::Sym(x) if x == s)
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(&self.tok, Tok::Ident(x) if x == s)
    }
}

/// Longest first, so `<->` wins over `<-` and `<`.
const SYMBOLS: &[&str] = &[
    "<->", ":=", "..", "<=", ">=", "<>", "->", "<-", "{", "}", "[", "]", "(", ")", ",", ";", ":",
    ".", "+", "-", "*", "/", "<", ">", "=", "|", "?",
];

pub fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Real(v) => format!("`{v}`"),
        Tok::Str(s) => format!("string {s:?}"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Unknown(s) => format!("`{s}`"),
        Tok::Eof => "end of file".to_string(),
    }
}

struct Lexer<'a> {
    text: &'a str,
    file: Arc<str>,
    pos: usize,
    line: u32,
    col: u32,
    lenient: bool,
    tokens: Vec<Token>,
    diags: Vec<Diagnostic>,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.text[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_from(&self, start: usize, line: u32, col: u32) -> SourceSpan {
        SourceSpan::new(self.file.clone(), line, col, (self.pos - start) as u32, start)
    }

    fn push(&mut self, tok: Tok, start: usize, line: u32, col: u32) {
        let span = self.span_from(start, line, col);
        self.tokens.push(Token { tok, span });
    }

    fn run(&mut self) {
        while let Some(c) = self.peek() {
            let (start, line, col) = (self.pos, self.line, self.col);
            if c.is_whitespace() {
                self.bump();
            } else if c == '/' && self.peek_at(1) == Some('/') {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_ascii_alphabetic() || c == '_' {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.bump();
                }
                let word = &self.text[start..self.pos];
                let tok = if word == "_" {
                    Tok::Sym("_")
                } else {
                    Tok::Ident(word.to_string())
                };
                self.push(tok, start, line, col);
            } else if c.is_ascii_digit() {
                self.number(start, line, col);
            } else if c == '"' {
                self.string(start, line, col);
            } else if let Some(sym) = SYMBOLS.iter().find(|s| self.text[self.pos..].starts_with(**s)) {
                for _ in 0..sym.len() {
                    self.bump();
                }
                self.push(Tok::Sym(sym), start, line, col);
            } else {
                self.bump();
                if self.lenient {
                    // Group runs of foreign punctuation (`#=`, `@`) into one token.
                    while matches!(self.peek(), Some(c) if !c.is_alphanumeric() && !c.is_whitespace()
                        && !"\"_()[]{},;".contains(c))
                    {
                        self.bump();
                    }
                    let s = self.text[start..self.pos].to_string();
                    self.push(Tok::Unknown(s), start, line, col);
                } else {
                    let span = self.span_from(start, line, col);
                    self.diags.push(Diagnostic::error(span, format!("unexpected character {c:?}")));
                }
            }
        }
        let eof = SourceSpan::new(self.file.clone(), self.line, self.col, 0, self.pos);
        self.tokens.push(Token { tok: Tok::Eof, span: eof });
    }

    fn number(&mut self, start: usize, line: u32, col: u32) {
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        // `1..5` is a range, `1.5` a real.
        let mut real = false;
        if self.peek() == Some('.') && matches!(self.peek_at(1), Some(c) if c.is_ascii_digit()) {
            real = true;
            self.bump();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let sign = matches!(self.peek_at(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if matches!(self.peek_at(digit_at), Some(c) if c.is_ascii_digit()) {
                real = true;
                for _ in 0..digit_at {
                    self.bump();
                }
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
            }
        }
        let text = &self.text[start..self.pos];
        let tok = if real {
            text.parse::<f64>().map(Tok::Real).ok()
        } else {
            text.parse::<i64>().map(Tok::Int).ok()
        };
        match tok {
            Some(tok) => self.push(tok, start, line, col),
            None => {
                let span = self.span_from(start, line, col);
                if self.lenient {
                    self.push(Tok::Unknown(text.to_string()), start, line, col);
                } else {
                    self.diags
                        .push(Diagnostic::error(span, format!("numeric literal `{text}` is out of range")));
                }
            }
        }
    }

    fn string(&mut self, start: usize, line: u32, col: u32) {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    let span = self.span_from(start, line, col);
                    if self.lenient {
                        self.push(Tok::Str(out), start, line, col);
                    } else {
                        self.diags.push(Diagnostic::error(span, "unterminated string literal"));
                    }
                    return;
                }
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some(other) => {
                        if !self.lenient {
                            let span = self.span_from(start, line, col);
                            self.diags
                                .push(Diagnostic::error(span, format!("unknown escape `\\{other}`")));
                        }
                        out.push(other);
                    }
                    None => {}
                },
                Some(c) => out.push(c),
            }
        }
        self.push(Tok::Str(out), start, line, col);
    }
}

/// Tokenizes `text`. The token list always ends with [`Tok::Eof`].
pub fn lex(text: &str, file: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    lex_with(text, file, false)
}

fn lex_with(text: &str, file: &str, lenient: bool) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut lx = Lexer {
        text,
        file: Arc::from(file),
        pos: 0,
        line: 1,
        col: 1,
        lenient,
        tokens: Vec::new(),
        diags: Vec::new(),
    };
    lx.run();
    (lx.tokens, lx.diags)
}

/// Number of tokens in arbitrary text, including text in other languages
/// (generated Java or Prolog); never fails.
pub fn count_tokens(text: &str) -> usize {
    let (tokens, _) = lex_with(text, "<count>", true);
    tokens.len() - 1
}
