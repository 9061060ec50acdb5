//! Token cursor and the expression grammar shared by model and flat-text parsing.

use crate::ast::{BinOp, Expr, ExprKind, UnOp};
use crate::span::{Diagnostic, SourceSpan};

use super::lexer::{describe, lex, Tok, Token};

/// The error has already been recorded as a diagnostic.
pub(crate) type PResult<T> = Result<T, ()>;

const MAX_DEPTH: usize = 200;

/// Words that can never name a variable.
pub const RESERVED: &[&str] = &[
    "and", "or", "xor", "not", "in", "subset", "superset", "union", "diff", "symdiff",
    "intersection", "forall", "if", "else", "class", "extends", "constraint", "import", "true",
    "false",
];

pub(crate) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
    pub diags: Vec<Diagnostic>,
}

impl Cursor {
    pub fn new(text: &str, file: &str) -> Self {
        let (toks, diags) = lex(text, file);
        Cursor {
            toks,
            pos: 0,
            depth: 0,
            diags,
        }
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    pub fn peek_n(&self, n: usize) -> &Token {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    pub fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    pub fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_sym(&self, s: &str) -> bool {
        self.peek().is_sym(s)
    }

    pub fn at_kw(&self, k: &str) -> bool {
        self.peek().is_ident(k)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, k: &str) -> bool {
        if self.at_kw(k) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn error_at(&mut self, span: SourceSpan, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(span, msg));
    }

    pub fn expected(&mut self, what: &str) {
        let t = self.peek().clone();
        self.error_at(t.span, format!("expected {what}, found {}", describe(&t.tok)));
    }

    pub fn expect_sym(&mut self, s: &str) -> PResult<SourceSpan> {
        if self.at_sym(s) {
            Ok(self.next().span)
        } else {
            self.expected(&format!("`{s}`"));
            Err(())
        }
    }

    pub fn expect_kw(&mut self, k: &str) -> PResult<SourceSpan> {
        if self.at_kw(k) {
            Ok(self.next().span)
        } else {
            self.expected(&format!("`{k}`"));
            Err(())
        }
    }

    pub fn expect_ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match &self.peek().tok {
            Tok::Ident(name) if !RESERVED.contains(&name.as_str()) => {
                let name = name.clone();
                Ok((name, self.next().span))
            }
            _ => {
                self.expected(what);
                Err(())
            }
        }
    }

    /// Skips to the end of the current statement: past the next `;`, or up to
    /// (not past) a `}` that closes the enclosing block.
    pub fn sync_statement(&mut self) {
        let mut depth = 0usize;
        while !self.at_eof() {
            let t = self.peek();
            if t.is_sym(";") && depth == 0 {
                self.next();
                return;
            }
            if t.is_sym("}") || t.is_sym(")") || t.is_sym("]") {
                if depth == 0 {
                    if t.is_sym("}") {
                        return;
                    }
                } else {
                    depth -= 1;
                }
            } else if t.is_sym("{") || t.is_sym("(") || t.is_sym("[") {
                depth += 1;
            }
            self.next();
        }
    }

    /// Top-level recovery: like `sync_statement`, but a stray `}` is skipped
    /// too, so the caller always makes progress.
    pub fn recover(&mut self) {
        self.sync_statement();
        if self.at_sym("}") {
            self.next();
        }
    }

    /// Comma-separated list up to `close`, which is consumed.
    pub fn list<T>(
        &mut self,
        close: &str,
        mut item: impl FnMut(&mut Self) -> PResult<T>,
    ) -> PResult<(Vec<T>, SourceSpan)> {
        let mut out = Vec::new();
        if !self.at_sym(close) {
            loop {
                out.push(item(self)?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        let end = self.expect_sym(close)?;
        Ok((out, end))
    }

    fn peek_binop(&self) -> Option<BinOp> {
        let t = self.peek();
        Some(match &t.tok {
            Tok::Sym(s) => match *s {
                "+" => BinOp::Add,
                "-" => BinOp::Sub,
                "*" => BinOp::Mul,
                "/" => BinOp::Div,
                "<" => BinOp::Lt,
                ">" => BinOp::Gt,
                "<=" => BinOp::Le,
                ">=" => BinOp::Ge,
                "=" => BinOp::Eq,
                "<>" => BinOp::Ne,
                "->" => BinOp::Implies,
                "<-" => BinOp::RevImplies,
                "<->" => BinOp::Iff,
                _ => return None,
            },
            Tok::Ident(w) => match w.as_str() {
                "and" => BinOp::And,
                "or" => BinOp::Or,
                "xor" => BinOp::Xor,
                "in" => BinOp::In,
                "subset" => BinOp::Subset,
                "superset" => BinOp::Superset,
                "union" => BinOp::Union,
                "diff" => BinOp::Diff,
                "symdiff" => BinOp::SymDiff,
                "intersection" => BinOp::Intersection,
                _ => return None,
            },
            _ => return None,
        })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let span = self.peek().span.clone();
            self.error_at(span, "expression nested too deeply");
            self.depth -= 1;
            return Err(());
        }
        Ok(())
    }

    fn binary(&mut self, min: u8) -> PResult<Expr> {
        self.enter()?;
        let r = self.binary_inner(min);
        self.depth -= 1;
        r
    }

    fn binary_inner(&mut self, min: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_binop() {
            let p = op.precedence();
            if p < min {
                break;
            }
            self.next();
            let rhs = if op.is_right_assoc() {
                self.binary(p)?
            } else {
                self.binary(p + 1)?
            };
            let span = lhs.span.to(&rhs.span);
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        self.enter()?;
        let r = self.unary_inner();
        self.depth -= 1;
        r
    }

    fn unary_inner(&mut self) -> PResult<Expr> {
        let start = self.peek().span.clone();
        if self.eat_kw("not") {
            let e = self.unary()?;
            let span = start.to(&e.span);
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)), span));
        }
        if self.at_sym("-") {
            // A minus directly before a literal is part of the literal.
            match self.peek_n(1).tok {
                Tok::Int(v) => {
                    self.next();
                    let end = self.next().span;
                    return Ok(Expr::new(ExprKind::Int(-v), start.to(&end)));
                }
                Tok::Real(v) => {
                    self.next();
                    let end = self.next().span;
                    return Ok(Expr::new(ExprKind::Real(-v), start.to(&end)));
                }
                _ => {}
            }
            self.next();
            let e = self.unary()?;
            let span = start.to(&e.span);
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(e)), span));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.eat_sym("[") {
                let (idx, end) = self.list("]", |c| c.expr())?;
                if idx.is_empty() {
                    self.error_at(end.clone(), "empty subscript");
                    return Err(());
                }
                let span = e.span.to(&end);
                e = Expr::new(ExprKind::Index(Box::new(e), idx), span);
            } else if self.at_sym(".") {
                self.next();
                let (field, fspan) = self.expect_ident("an attribute name")?;
                let span = e.span.to(&fspan);
                e = Expr::new(ExprKind::Field(Box::new(e), field), span);
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Int(v) => {
                self.next();
                Ok(Expr::new(ExprKind::Int(*v), t.span))
            }
            Tok::Real(v) => {
                self.next();
                Ok(Expr::new(ExprKind::Real(*v), t.span))
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.next();
                Ok(Expr::new(ExprKind::Bool(w == "true"), t.span))
            }
            Tok::Ident(w) if !RESERVED.contains(&w.as_str()) => {
                self.next();
                if self.eat_sym("(") {
                    let (args, end) = self.list(")", |c| c.expr())?;
                    let span = t.span.to(&end);
                    if w == "cardinality" {
                        let [arg]: [Expr; 1] = match args.try_into() {
                            Ok(a) => a,
                            Err(_) => {
                                self.error_at(span, "cardinality takes one argument");
                                return Err(());
                            }
                        };
                        return Ok(Expr::new(ExprKind::Unary(UnOp::Card, Box::new(arg)), span));
                    }
                    return Ok(Expr::new(ExprKind::Call(w.clone(), args), span));
                }
                Ok(Expr::new(ExprKind::Name(w.clone()), t.span))
            }
            Tok::Sym("(") => {
                self.next();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("{") => {
                self.next();
                let (es, end) = self.list("}", |c| c.expr())?;
                Ok(Expr::new(ExprKind::SetLit(es), t.span.to(&end)))
            }
            Tok::Sym("[") => {
                self.next();
                let (es, end) = self.list("]", |c| c.expr())?;
                Ok(Expr::new(ExprKind::ArrayLit(es), t.span.to(&end)))
            }
            _ => {
                self.expected("an expression");
                Err(())
            }
        }
    }
}
