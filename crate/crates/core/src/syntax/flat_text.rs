//! Reads flat text back into a [`FlatModel`].

use std::collections::BTreeSet;

use indexmap::IndexMap;

use crate::ast::{Expr, ExprKind, ObjectiveKind};
use crate::flat::{BaseType, Domain, FlatConstraint, FlatExpr, FlatModel, FlatTable, FlatVar, Objective};
use crate::span::{Diagnostic, Diagnostics, SourceSpan};
use crate::value::Value;

use super::cursor::{Cursor, PResult};
use super::lexer::Tok;
use super::model::model_name;

pub fn parse_flat(text: &str, file: &str) -> Result<FlatModel, Diagnostics> {
    let mut c = Cursor::new(text, file);
    let mut fm = FlatModel {
        name: model_name(file),
        ..Default::default()
    };
    let start = c.peek().span.clone();
    let mut seen = Vec::new();
    while !c.at_eof() {
        let Some((section, span)) = header(&mut c) else {
            c.recover();
            continue;
        };
        if seen.contains(&section) {
            c.error_at(span.clone(), format!("section `{section}` appears twice"));
        }
        seen.push(section.clone());
        while !c.at_eof() && !at_header(&c) {
            let r = match section.as_str() {
                "variables" => variable(&mut c).map(|v| fm.variables.push(v)),
                "constants" => table(&mut c).map(|t| fm.tables.push(t)),
                "constraints" => convert(&mut c)
                    .and_then(|e| c.expect_sym(";").map(|_| e))
                    .map(|expr| fm.constraints.push(FlatConstraint { expr })),
                "objective" => objective(&mut c, &span).map(|o| fm.objective = Some(o)),
                _ => enum_type(&mut c, &mut fm.enum_types),
            };
            if r.is_err() {
                c.recover();
            }
        }
    }
    if c.diags.is_empty() {
        for p in fm.validate() {
            c.error_at(start.clone(), p);
        }
    }
    if c.diags.is_empty() {
        Ok(fm)
    } else {
        Err(Diagnostics(c.diags))
    }
}

const SECTIONS: &[&str] = &["variables", "constants", "constraints", "objective"];

fn at_header(c: &Cursor) -> bool {
    match &c.peek().tok {
        Tok::Ident(w) if SECTIONS.contains(&w.as_str()) => c.peek_n(1).is_sym(":"),
        Tok::Ident(w) if w == "enum" => {
            c.peek_n(1).is_sym("-") && c.peek_n(2).is_ident("types") && c.peek_n(3).is_sym(":")
        }
        _ => false,
    }
}

fn header(c: &mut Cursor) -> Option<(String, SourceSpan)> {
    if !at_header(c) {
        c.expected("a section header");
        return None;
    }
    let t = c.next();
    let Tok::Ident(w) = t.tok else { unreachable!() };
    if w == "enum" {
        c.next();
        c.next();
    }
    c.next();
    Some((if w == "enum" { "enum-types".to_string() } else { w }, t.span))
}

/// `int`, `bool`, `real`, `set of T` or an enum name.
fn var_type(c: &mut Cursor) -> PResult<(BaseType, Option<String>)> {
    let Tok::Ident(w) = c.peek().tok.clone() else {
        c.expected("a type");
        return Err(());
    };
    c.next();
    Ok(match w.as_str() {
        "int" => (BaseType::Int, None),
        "bool" => (BaseType::Bool, None),
        "real" => (BaseType::Real, None),
        "set" => {
            c.expect_kw("of")?;
            let (inner, _) = c.expect_ident("an element type")?;
            let tag = (inner != "int").then_some(inner);
            (BaseType::SetOfInt, tag)
        }
        _ => (BaseType::Int, Some(w)),
    })
}

fn dims(c: &mut Cursor) -> PResult<Vec<usize>> {
    if !c.eat_sym("[") {
        return Ok(Vec::new());
    }
    let (ds, _) = c.list("]", |c| match c.peek().tok {
        Tok::Int(n) if n > 0 => {
            c.next();
            Ok(n as usize)
        }
        _ => {
            c.expected("a positive dimension");
            Err(())
        }
    })?;
    Ok(ds)
}

fn number(c: &mut Cursor) -> PResult<Value> {
    let neg = c.eat_sym("-");
    let v = match c.peek().tok {
        Tok::Int(v) => Value::Int(if neg { -v } else { v }),
        Tok::Real(v) => Value::Real(if neg { -v } else { v }),
        _ => {
            c.expected("a number");
            return Err(());
        }
    };
    c.next();
    Ok(v)
}

fn domain(c: &mut Cursor, base: BaseType) -> PResult<Domain> {
    let open = c.peek().span.clone();
    if c.eat_sym("{") {
        let (vs, _) = c.list("}", number)?;
        let set: BTreeSet<i64> = vs.iter().filter_map(Value::as_int).collect();
        if set.len() != vs.len() || set.is_empty() {
            c.error_at(open, "a domain set holds distinct integers");
            return Err(());
        }
        return Ok(Domain::IntSet(set.into_iter().collect()));
    }
    c.expect_sym("[")?;
    let lo = number(c)?;
    c.expect_sym(",")?;
    let hi = number(c)?;
    c.expect_sym("]")?;
    match (base, lo, hi) {
        (BaseType::Real, lo, hi) => Ok(Domain::RealRange(lo.as_real().unwrap(), hi.as_real().unwrap())),
        (_, Value::Int(lo), Value::Int(hi)) => Ok(Domain::IntRange(lo, hi)),
        _ => {
            c.error_at(open, "integer bounds expected");
            Err(())
        }
    }
}

fn variable(c: &mut Cursor) -> PResult<FlatVar> {
    let (base, enum_tag) = var_type(c)?;
    let (name, _) = c.expect_ident("a variable name")?;
    let shape = dims(c)?;
    c.expect_kw("in")?;
    let domain = domain(c, base)?;
    c.expect_sym(";")?;
    Ok(FlatVar {
        name,
        base,
        shape,
        domain,
        enum_tag,
    })
}

fn table(c: &mut Cursor) -> PResult<FlatTable> {
    let (base, _) = var_type(c)?;
    let (name, _) = c.expect_ident("a table name")?;
    let shape = dims(c)?;
    c.expect_sym(":=")?;
    let e = convert(c)?;
    c.expect_sym(";")?;
    let values = match e {
        FlatExpr::ArrayLit(es) => es
            .into_iter()
            .map(|e| match e {
                FlatExpr::Lit(v) => Some(v),
                _ => None,
            })
            .collect::<Option<Vec<_>>>(),
        _ => None,
    };
    let Some(values) = values else {
        let span = c.peek().span.clone();
        c.error_at(span, format!("table `{name}` must be a list of literals"));
        return Err(());
    };
    Ok(FlatTable {
        name,
        base,
        shape,
        values,
    })
}

fn objective(c: &mut Cursor, span: &SourceSpan) -> PResult<Objective> {
    let kind = if c.eat_kw("minimize") {
        ObjectiveKind::Minimize
    } else if c.eat_kw("maximize") {
        ObjectiveKind::Maximize
    } else {
        c.expected("`minimize` or `maximize`");
        return Err(());
    };
    let expr = convert(c)?;
    c.expect_sym(";")?;
    if !at_header(c) && !c.at_eof() {
        c.error_at(span.clone(), "only one objective is allowed");
        return Err(());
    }
    Ok(Objective { kind, expr })
}

fn enum_type(c: &mut Cursor, out: &mut IndexMap<String, Vec<String>>) -> PResult<()> {
    let (name, span) = c.expect_ident("an enum name")?;
    c.expect_sym(":=")?;
    c.expect_sym("{")?;
    let (values, _) = c.list("}", |c| c.expect_ident("an enum value").map(|v| v.0))?;
    c.expect_sym(";")?;
    if out.insert(name.clone(), values).is_some() {
        c.error_at(span, format!("enum `{name}` declared twice"));
    }
    Ok(())
}

fn convert(c: &mut Cursor) -> PResult<FlatExpr> {
    let e = c.expr()?;
    to_flat(&e).map_err(|d| c.diags.push(d))
}

fn to_flat(e: &Expr) -> Result<FlatExpr, Diagnostic> {
    let all = |es: &[Expr]| es.iter().map(to_flat).collect::<Result<Vec<_>, _>>();
    Ok(match &e.kind {
        ExprKind::Int(v) => FlatExpr::Lit(Value::Int(*v)),
        ExprKind::Real(v) => FlatExpr::Lit(Value::Real(*v)),
        ExprKind::Bool(b) => FlatExpr::Lit(Value::Bool(*b)),
        ExprKind::Name(n) => FlatExpr::var(n),
        ExprKind::Index(base, idx) => match &base.kind {
            ExprKind::Name(n) => FlatExpr::elem(n, all(idx)?),
            _ => return Err(Diagnostic::error(e.span.clone(), "only named arrays can be indexed")),
        },
        ExprKind::Field(..) => {
            return Err(Diagnostic::error(e.span.clone(), "attribute access is not flat"))
        }
        ExprKind::Unary(op, x) => FlatExpr::Unary(*op, Box::new(to_flat(x)?)),
        ExprKind::Binary(op, l, r) => FlatExpr::bin(*op, to_flat(l)?, to_flat(r)?),
        ExprKind::SetLit(es) => {
            let es = all(es)?;
            let ints: Option<BTreeSet<i64>> = es.iter().map(FlatExpr::as_const_int).collect();
            match ints {
                Some(s) => FlatExpr::Lit(Value::Set(s)),
                _ => FlatExpr::SetLit(es),
            }
        }
        ExprKind::ArrayLit(es) => FlatExpr::ArrayLit(all(es)?),
        ExprKind::Call(n, args) => FlatExpr::Call(n.clone(), all(args)?),
    })
}
