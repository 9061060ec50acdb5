//! Concepts a descriptor can template, and the fields each one exposes.

use crate::ast::BinOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Text,
    /// Present or absent; renders as nothing.
    Flag,
    Node(&'static str),
    List(&'static str),
    /// An expression node; its concept is only known at emit time.
    Expr,
    ExprList,
}

use FieldKind::*;

const PROBLEM: &[(&str, FieldKind)] = &[
    ("name", Text),
    ("variables", List("Variable")),
    ("tables", List("Table")),
    ("constraints", List("Constraint")),
    ("objective", Node("Objective")),
    ("enumTypes", List("EnumType")),
];

const VARIABLE: &[(&str, FieldKind)] = &[
    ("name", Text),
    ("type", Text),
    ("base", Text),
    ("enumTag", Text),
    ("array", Node("Array")),
    ("domain", Node("Domain")),
    ("size", Text),
    ("scalar", Flag),
    ("vector", Flag),
    ("matrix", Flag),
    ("isInt", Flag),
    ("isBool", Flag),
    ("isReal", Flag),
    ("isSet", Flag),
];

const ARRAY: &[(&str, FieldKind)] = &[("row", Text), ("col", Text), ("size", Text)];

const DOMAIN: &[(&str, FieldKind)] = &[
    ("lo", Text),
    ("hi", Text),
    ("elements", Text),
    ("interval", Flag),
    ("set", Flag),
    ("real", Flag),
];

const TABLE: &[(&str, FieldKind)] = &[
    ("name", Text),
    ("type", Text),
    ("array", Node("Array")),
    ("values", Text),
    ("size", Text),
];

const CONSTRAINT: &[(&str, FieldKind)] = &[
    ("expr", Expr),
    ("index", Text),
    ("cmp", Node("Comparison")),
];

const COMPARISON: &[(&str, FieldKind)] = &[("left", Expr), ("right", Expr), ("sym", Text), ("op", Text)];

const OBJECTIVE: &[(&str, FieldKind)] = &[
    ("kind", Text),
    ("expr", Expr),
    ("minimize", Flag),
    ("maximize", Flag),
];

const ENUM_TYPE: &[(&str, FieldKind)] = &[("name", Text), ("values", Text), ("size", Text)];

const LIT: &[(&str, FieldKind)] = &[("value", Text)];
const ELEMENTS: &[(&str, FieldKind)] = &[("elements", ExprList)];
const VAR_REF: &[(&str, FieldKind)] = &[("name", Text)];
const ELEM_REF: &[(&str, FieldKind)] = &[
    ("name", Text),
    ("index", ExprList),
    ("constIndex", Flag),
    ("varIndex", Flag),
];
const UNARY: &[(&str, FieldKind)] = &[("operand", Expr), ("sym", Text), ("op", Text)];
const BINARY: &[(&str, FieldKind)] = COMPARISON;
const CALL: &[(&str, FieldKind)] = &[("name", Text), ("args", ExprList)];

pub const UNARY_CONCEPTS: &[&str] = &["Neg", "Not", "Card"];

/// Fields of `concept`, or `None` if no such concept exists.
pub fn fields(concept: &str) -> Option<&'static [(&'static str, FieldKind)]> {
    Some(match concept {
        "Problem" => PROBLEM,
        "Variable" => VARIABLE,
        "Array" => ARRAY,
        "Domain" => DOMAIN,
        "Table" => TABLE,
        "Constraint" => CONSTRAINT,
        "Comparison" => COMPARISON,
        "Objective" => OBJECTIVE,
        "EnumType" => ENUM_TYPE,
        "IntLit" | "RealLit" | "BoolLit" => LIT,
        "SetLit" | "ArrayLit" => ELEMENTS,
        "VarRef" => VAR_REF,
        "ElemRef" => ELEM_REF,
        "Call" => CALL,
        "Unary" => UNARY,
        "Binary" => BINARY,
        c if UNARY_CONCEPTS.contains(&c) => UNARY,
        c if BinOp::ALL.iter().any(|op| op.concept() == c) => BINARY,
        _ => return None,
    })
}

pub fn field(concept: &str, name: &str) -> Option<FieldKind> {
    fields(concept)?.iter().find(|(n, _)| *n == name).map(|(_, k)| *k)
}

/// Fields common to every expression concept, usable where the concept is dynamic.
pub fn is_expr_concept(concept: &str) -> bool {
    matches!(
        concept,
        "IntLit" | "RealLit" | "BoolLit" | "SetLit" | "ArrayLit" | "VarRef" | "ElemRef" | "Call" | "Unary" | "Binary"
    ) || UNARY_CONCEPTS.contains(&concept)
        || BinOp::ALL.iter().any(|op| op.concept() == concept)
}
