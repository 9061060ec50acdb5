//! Source-form pretty printer; its output reparses to an equal tree.

use std::fmt::Write;

use crate::ast::{
    Bound, DomainDecl, Expr, ExprKind, Item, Model, RangeExpr, TypeRef, UnOp, ATOM_PRECEDENCE,
    UNARY_PRECEDENCE,
};
use crate::flat::needs_parens;
use crate::value::format_real;

pub fn type_name(t: &TypeRef) -> String {
    match t {
        TypeRef::Int => "int".into(),
        TypeRef::Real => "real".into(),
        TypeRef::Bool => "bool".into(),
        TypeRef::SetOfInt => "set of int".into(),
        TypeRef::SetOf(e) => format!("set of {e}"),
        TypeRef::Named(n) => n.clone(),
    }
}

fn child(out: &mut String, e: &Expr, parent: u8, right: bool, right_assoc: bool) {
    if needs_parens(parent, e.precedence(), right, right_assoc) {
        out.push('(');
        expr_into(out, e);
        out.push(')');
    } else {
        expr_into(out, e);
    }
}

/// A postfix base or a negation operand that would lex as part of a number.
fn guarded(out: &mut String, e: &Expr, parent: u8, bad_start: impl Fn(char) -> bool) {
    let mut t = String::new();
    child(&mut t, e, parent, true, true);
    if t.starts_with(&bad_start) {
        write!(out, "({t})").unwrap();
    } else {
        out.push_str(&t);
    }
}

fn list_into(out: &mut String, es: &[Expr]) {
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        expr_into(out, e);
    }
}

fn expr_into(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int(v) => write!(out, "{v}").unwrap(),
        ExprKind::Real(r) => out.push_str(&format_real(*r)),
        ExprKind::Bool(b) => write!(out, "{b}").unwrap(),
        ExprKind::Name(n) => out.push_str(n),
        ExprKind::Index(base, idx) => {
            guarded(out, base, ATOM_PRECEDENCE, |c| c == '-');
            out.push('[');
            list_into(out, idx);
            out.push(']');
        }
        ExprKind::Field(base, f) => {
            guarded(out, base, ATOM_PRECEDENCE, |c| c == '-');
            out.push('.');
            out.push_str(f);
        }
        ExprKind::Unary(UnOp::Card, inner) => {
            out.push_str("cardinality(");
            expr_into(out, inner);
            out.push(')');
        }
        ExprKind::Unary(op, inner) => {
            match op {
                UnOp::Not => out.push_str("not "),
                _ => out.push('-'),
            }
            // `-(5)` keeps a negated literal distinct from the literal `-5`.
            let lit = matches!(inner.kind, ExprKind::Int(_) | ExprKind::Real(_));
            if lit && *op == UnOp::Neg {
                out.push('(');
                expr_into(out, inner);
                out.push(')');
            } else if *op == UnOp::Neg {
                guarded(out, inner, UNARY_PRECEDENCE, |c| c.is_ascii_digit() || c == '.');
            } else {
                child(out, inner, UNARY_PRECEDENCE, true, true);
            }
        }
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            let ra = op.is_right_assoc();
            child(out, l, p, false, ra);
            write!(out, " {} ", op.symbol()).unwrap();
            child(out, r, p, true, ra);
        }
        ExprKind::SetLit(es) => {
            out.push('{');
            list_into(out, es);
            out.push('}');
        }
        ExprKind::ArrayLit(es) => {
            out.push('[');
            list_into(out, es);
            out.push(']');
        }
        ExprKind::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            list_into(out, args);
            out.push(')');
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr_into(&mut s, e);
    s
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn block(out: &mut String, items: &[Item], level: usize) {
    out.push_str("{\n");
    for it in items {
        item_into(out, it, level + 1);
    }
    indent(out, level);
    out.push('}');
}

fn item_into(out: &mut String, it: &Item, level: usize) {
    indent(out, level);
    match it {
        Item::Constraint(e) => {
            expr_into(out, e);
            out.push_str(";\n");
        }
        Item::Forall {
            var, range, body, ..
        } => {
            write!(out, "forall({var} in ").unwrap();
            match range {
                RangeExpr::Interval(lo, hi) => {
                    expr_into(out, lo);
                    out.push_str("..");
                    expr_into(out, hi);
                }
                RangeExpr::Named(n, _) => out.push_str(n),
            }
            out.push_str(") ");
            block(out, body, level);
            out.push('\n');
        }
        Item::If {
            cond,
            then_items,
            else_items,
            ..
        } => {
            out.push_str("if (");
            expr_into(out, cond);
            out.push_str(") ");
            block(out, then_items, level);
            if let Some(els) = else_items {
                out.push_str(" else ");
                block(out, els, level);
            }
            out.push('\n');
        }
        Item::Objective { kind, expr, .. } => {
            write!(out, "[{}] ", kind.keyword()).unwrap();
            expr_into(out, expr);
            out.push_str(";\n");
        }
        Item::Global { name, args, .. } => {
            write!(out, "{name}(").unwrap();
            list_into(out, args);
            out.push_str(");\n");
        }
    }
}

pub fn print_item(it: &Item) -> String {
    let mut s = String::new();
    item_into(&mut s, it, 0);
    s
}

pub fn print_model(m: &Model) -> String {
    let mut out = String::new();
    for imp in &m.imports {
        writeln!(out, "import {};", imp.path).unwrap();
    }
    for class in &m.classes {
        if !out.is_empty() {
            out.push('\n');
        }
        write!(out, "class {}", class.name).unwrap();
        if let Some(s) = &class.superclass {
            write!(out, " extends {s}").unwrap();
        }
        out.push_str(" {\n");
        for a in &class.attributes {
            write!(out, "  {} {}", type_name(&a.ty), a.name).unwrap();
            if !a.shape.is_empty() {
                let dims: Vec<String> = a
                    .shape
                    .iter()
                    .map(|b| match b {
                        Bound::Int(v) => v.to_string(),
                        Bound::Name(n) => n.clone(),
                    })
                    .collect();
                write!(out, "[{}]", dims.join(", ")).unwrap();
            }
            match &a.domain {
                Some(DomainDecl::Interval(lo, hi)) => {
                    write!(out, " in [{}, {}]", print_expr(lo), print_expr(hi)).unwrap()
                }
                Some(DomainDecl::Set(es)) => {
                    out.push_str(" in {");
                    list_into(&mut out, es);
                    out.push('}');
                }
                None => {}
            }
            out.push_str(";\n");
        }
        for z in &class.zones {
            write!(out, "\n  constraint {} ", z.name).unwrap();
            block(&mut out, &z.items, 1);
            out.push('\n');
        }
        out.push_str("}\n");
    }
    out
}
