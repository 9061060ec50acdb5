//! The flat, solver-neutral model: plain variables, constant tables and constraints.

use std::fmt;

use indexmap::IndexMap;

use crate::ast::{BinOp, ObjectiveKind, UnOp, ATOM_PRECEDENCE, UNARY_PRECEDENCE};
use crate::value::{format_real, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseType {
    Int,
    Real,
    Bool,
    SetOfInt,
}

impl BaseType {
    pub fn keyword(self) -> &'static str {
        match self {
            BaseType::Int => "int",
            BaseType::Real => "real",
            BaseType::Bool => "bool",
            BaseType::SetOfInt => "set of int",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    IntRange(i64, i64),
    RealRange(f64, f64),
    /// Sorted, duplicate-free, non-empty.
    IntSet(Vec<i64>),
}

impl Domain {
    pub fn is_empty(&self) -> bool {
        match self {
            Domain::IntRange(lo, hi) => lo > hi,
            Domain::RealRange(lo, hi) => lo > hi,
            Domain::IntSet(vs) => vs.is_empty(),
        }
    }

    /// The integer values of a finite domain, in increasing order.
    pub fn int_values(&self) -> Option<Vec<i64>> {
        match self {
            Domain::IntRange(lo, hi) => Some((*lo..=*hi).collect()),
            Domain::IntSet(vs) => Some(vs.clone()),
            Domain::RealRange(..) => None,
        }
    }

    pub fn int_width(&self) -> Option<u128> {
        match self {
            Domain::IntRange(lo, hi) if lo <= hi => Some((*hi as i128 - *lo as i128 + 1) as u128),
            Domain::IntRange(..) => Some(0),
            Domain::IntSet(vs) => Some(vs.len() as u128),
            Domain::RealRange(..) => None,
        }
    }

    pub fn bounds(&self) -> Option<(i64, i64)> {
        match self {
            Domain::IntRange(lo, hi) => Some((*lo, *hi)),
            Domain::IntSet(vs) => Some((*vs.first()?, *vs.last()?)),
            Domain::RealRange(..) => None,
        }
    }

    pub fn contains_int(&self, v: i64) -> bool {
        match self {
            Domain::IntRange(lo, hi) => *lo <= v && v <= *hi,
            Domain::IntSet(vs) => vs.binary_search(&v).is_ok(),
            Domain::RealRange(lo, hi) => *lo <= v as f64 && v as f64 <= *hi,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::IntRange(lo, hi) => write!(f, "[{lo},{hi}]"),
            Domain::RealRange(lo, hi) => write!(f, "[{},{}]", format_real(*lo), format_real(*hi)),
            Domain::IntSet(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatVar {
    pub name: String,
    pub base: BaseType,
    /// Empty for scalars, one entry per dimension otherwise.
    pub shape: Vec<usize>,
    /// For set variables: the universe of possible elements.
    pub domain: Domain,
    pub enum_tag: Option<String>,
}

impl FlatVar {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Declared type as printed in flat text: the enum name when tagged.
    pub fn type_name(&self) -> String {
        match (&self.enum_tag, self.base) {
            (Some(e), BaseType::SetOfInt) => format!("set of {e}"),
            (Some(e), _) => e.clone(),
            (None, b) => b.keyword().to_string(),
        }
    }
}

/// A compile-time array that remains only because something indexes it with a
/// decision variable (`man_1_rank[man_wife[1]]`).
#[derive(Debug, Clone, PartialEq)]
pub struct FlatTable {
    pub name: String,
    pub base: BaseType,
    pub shape: Vec<usize>,
    /// Row-major.
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlatExpr {
    Lit(Value),
    /// A variable or table, optionally indexed (1-based).
    Ref { name: String, index: Vec<FlatExpr> },
    Unary(UnOp, Box<FlatExpr>),
    Binary(BinOp, Box<FlatExpr>, Box<FlatExpr>),
    SetLit(Vec<FlatExpr>),
    ArrayLit(Vec<FlatExpr>),
    Call(String, Vec<FlatExpr>),
}

impl FlatExpr {
    pub fn int(v: i64) -> Self {
        FlatExpr::Lit(Value::Int(v))
    }

    pub fn var(name: impl Into<String>) -> Self {
        FlatExpr::Ref {
            name: name.into(),
            index: Vec::new(),
        }
    }

    pub fn elem(name: impl Into<String>, index: Vec<FlatExpr>) -> Self {
        FlatExpr::Ref {
            name: name.into(),
            index,
        }
    }

    pub fn bin(op: BinOp, l: FlatExpr, r: FlatExpr) -> Self {
        FlatExpr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn not(e: FlatExpr) -> Self {
        FlatExpr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn as_const_int(&self) -> Option<i64> {
        match self {
            FlatExpr::Lit(Value::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn precedence(&self) -> u8 {
        match self {
            FlatExpr::Binary(op, _, _) => op.precedence(),
            FlatExpr::Unary(UnOp::Card, _) => ATOM_PRECEDENCE,
            FlatExpr::Unary(_, _) => UNARY_PRECEDENCE,
            FlatExpr::Lit(Value::Int(v)) if *v < 0 => UNARY_PRECEDENCE,
            FlatExpr::Lit(Value::Real(r)) if *r < 0.0 => UNARY_PRECEDENCE,
            _ => ATOM_PRECEDENCE,
        }
    }

    /// True when the rendering begins with `-`; such operands are parenthesized
    /// on the right of an operator so `x<-5` never lexes as a reverse implication.
    pub fn starts_with_minus(&self) -> bool {
        match self {
            FlatExpr::Lit(Value::Int(v)) => *v < 0,
            FlatExpr::Lit(Value::Real(r)) => *r < 0.0,
            FlatExpr::Unary(UnOp::Neg, _) => true,
            FlatExpr::Binary(_, l, _) => l.starts_with_minus() && l.precedence() >= self.precedence(),
            _ => false,
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a FlatExpr)) {
        f(self);
        match self {
            FlatExpr::Lit(_) => {}
            FlatExpr::Ref { index, .. } => index.iter().for_each(|e| e.walk(f)),
            FlatExpr::Unary(_, e) => e.walk(f),
            FlatExpr::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            FlatExpr::SetLit(es) | FlatExpr::ArrayLit(es) | FlatExpr::Call(_, es) => {
                es.iter().for_each(|e| e.walk(f))
            }
        }
    }

    /// Bottom-up rewrite.
    pub fn map(self, f: &mut dyn FnMut(FlatExpr) -> FlatExpr) -> FlatExpr {
        let e = match self {
            FlatExpr::Lit(_) => self,
            FlatExpr::Ref { name, index } => FlatExpr::Ref {
                name,
                index: index.into_iter().map(|e| e.map(f)).collect(),
            },
            FlatExpr::Unary(op, e) => FlatExpr::Unary(op, Box::new(e.map(f))),
            FlatExpr::Binary(op, l, r) => FlatExpr::Binary(op, Box::new(l.map(f)), Box::new(r.map(f))),
            FlatExpr::SetLit(es) => FlatExpr::SetLit(es.into_iter().map(|e| e.map(f)).collect()),
            FlatExpr::ArrayLit(es) => FlatExpr::ArrayLit(es.into_iter().map(|e| e.map(f)).collect()),
            FlatExpr::Call(n, es) => FlatExpr::Call(n, es.into_iter().map(|e| e.map(f)).collect()),
        };
        f(e)
    }

    pub fn try_map<E>(
        self,
        f: &mut dyn FnMut(FlatExpr) -> Result<FlatExpr, E>,
    ) -> Result<FlatExpr, E> {
        let e = match self {
            FlatExpr::Lit(_) => self,
            FlatExpr::Ref { name, index } => FlatExpr::Ref {
                name,
                index: index.into_iter().map(|e| e.try_map(f)).collect::<Result<_, _>>()?,
            },
            FlatExpr::Unary(op, e) => FlatExpr::Unary(op, Box::new(e.try_map(f)?)),
            FlatExpr::Binary(op, l, r) => {
                FlatExpr::Binary(op, Box::new(l.try_map(f)?), Box::new(r.try_map(f)?))
            }
            FlatExpr::SetLit(es) => {
                FlatExpr::SetLit(es.into_iter().map(|e| e.try_map(f)).collect::<Result<_, _>>()?)
            }
            FlatExpr::ArrayLit(es) => {
                FlatExpr::ArrayLit(es.into_iter().map(|e| e.try_map(f)).collect::<Result<_, _>>()?)
            }
            FlatExpr::Call(n, es) => {
                FlatExpr::Call(n, es.into_iter().map(|e| e.try_map(f)).collect::<Result<_, _>>()?)
            }
        };
        f(e)
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

/// Whether a child printed next to an operator of precedence `parent` needs parentheses.
pub fn needs_parens(parent: u8, child: u8, right_side: bool, parent_right_assoc: bool) -> bool {
    if child < parent {
        return true;
    }
    if child == parent && parent < UNARY_PRECEDENCE {
        // Same level: only the associative side may omit parentheses.
        return right_side != parent_right_assoc;
    }
    false
}

fn write_child(
    f: &mut fmt::Formatter<'_>,
    child: &FlatExpr,
    parent: u8,
    right_side: bool,
    right_assoc: bool,
) -> fmt::Result {
    if needs_parens(parent, child.precedence(), right_side, right_assoc)
        || (right_side && child.starts_with_minus())
    {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, es: &[FlatExpr]) -> fmt::Result {
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

/// Flat-text syntax: arithmetic and comparisons unspaced, logical and set
/// keywords spaced (`5<man_1_rank[man_wife[1]] -> woman_1_rank[...]<1`).
impl fmt::Display for FlatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlatExpr::Lit(v) => write!(f, "{v}"),
            FlatExpr::Ref { name, index } => {
                f.write_str(name)?;
                if !index.is_empty() {
                    f.write_str("[")?;
                    write_list(f, index)?;
                    f.write_str("]")?;
                }
                Ok(())
            }
            FlatExpr::Unary(UnOp::Card, e) => write!(f, "cardinality({e})"),
            FlatExpr::Unary(op, e) => {
                match op {
                    UnOp::Not => f.write_str("not ")?,
                    _ => f.write_str(op.symbol())?,
                }
                write_child(f, e, UNARY_PRECEDENCE, true, true)
            }
            FlatExpr::Binary(op, l, r) => {
                let p = op.precedence();
                let ra = op.is_right_assoc();
                write_child(f, l, p, false, ra)?;
                if op.is_word() || op.is_logical() {
                    write!(f, " {} ", op.symbol())?;
                } else {
                    f.write_str(op.symbol())?;
                }
                write_child(f, r, p, true, ra)
            }
            FlatExpr::SetLit(es) => {
                f.write_str("{")?;
                write_list(f, es)?;
                f.write_str("}")
            }
            FlatExpr::ArrayLit(es) => {
                f.write_str("[")?;
                write_list(f, es)?;
                f.write_str("]")
            }
            FlatExpr::Call(name, es) => {
                write!(f, "{name}(")?;
                write_list(f, es)?;
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatConstraint {
    pub expr: FlatExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub expr: FlatExpr,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatModel {
    pub name: String,
    pub variables: Vec<FlatVar>,
    pub tables: Vec<FlatTable>,
    /// Source traversal order; emitters never reorder.
    pub constraints: Vec<FlatConstraint>,
    pub enum_types: IndexMap<String, Vec<String>>,
    pub objective: Option<Objective>,
}

/// What a name in a flat expression refers to.
#[derive(Debug, Clone, Copy)]
pub enum Symbol<'a> {
    Var(&'a FlatVar),
    Table(&'a FlatTable),
}

impl<'a> Symbol<'a> {
    pub fn shape(&self) -> &'a [usize] {
        match self {
            Symbol::Var(v) => &v.shape,
            Symbol::Table(t) => &t.shape,
        }
    }
}

impl FlatModel {
    pub fn var(&self, name: &str) -> Option<&FlatVar> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&FlatTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn symbol(&self, name: &str) -> Option<Symbol<'_>> {
        self.var(name)
            .map(Symbol::Var)
            .or_else(|| self.table(name).map(Symbol::Table))
    }

    /// Number of scalar decision variables (array elements counted individually).
    pub fn scalar_var_count(&self) -> usize {
        self.variables.iter().map(FlatVar::len).sum()
    }

    pub fn exprs(&self) -> impl Iterator<Item = &FlatExpr> {
        self.constraints
            .iter()
            .map(|c| &c.expr)
            .chain(self.objective.iter().map(|o| &o.expr))
    }

    pub fn node_count(&self) -> usize {
        self.variables.len() + self.tables.len() + self.exprs().map(FlatExpr::node_count).sum::<usize>()
    }

    /// Structural check of the flatness invariants; returns one message per problem.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for v in &self.variables {
            if !seen.insert(v.name.as_str()) {
                problems.push(format!("duplicate name `{}`", v.name));
            }
            if v.shape.iter().any(|&d| d == 0) {
                problems.push(format!("variable `{}` has an empty dimension", v.name));
            }
            if v.domain.is_empty() {
                problems.push(format!("variable `{}` has an empty domain", v.name));
            }
            if let Some(tag) = &v.enum_tag {
                match self.enum_types.get(tag) {
                    None => problems.push(format!("variable `{}` tagged with unknown enum `{tag}`", v.name)),
                    Some(values) => {
                        if v.domain.int_width() != Some(values.len() as u128) {
                            problems.push(format!(
                                "variable `{}` domain width differs from enum `{tag}`",
                                v.name
                            ));
                        }
                    }
                }
            }
        }
        for t in &self.tables {
            if !seen.insert(t.name.as_str()) {
                problems.push(format!("duplicate name `{}`", t.name));
            }
            if t.values.len() != t.shape.iter().product::<usize>() {
                problems.push(format!("table `{}` has the wrong number of values", t.name));
            }
        }
        for e in self.exprs() {
            e.walk(&mut |node| match node {
                FlatExpr::Ref { name, index } => match self.symbol(name) {
                    None => problems.push(format!("unresolved reference `{name}` in `{e}`")),
                    Some(sym) => {
                        let shape = sym.shape();
                        if !index.is_empty() && index.len() != shape.len() {
                            problems.push(format!("`{name}` indexed with {} subscripts", index.len()));
                        }
                        for (i, ix) in index.iter().enumerate() {
                            if let (Some(k), Some(&dim)) = (ix.as_const_int(), shape.get(i)) {
                                if k < 1 || k as usize > dim {
                                    problems.push(format!("index {k} out of bounds for `{name}`"));
                                }
                            }
                        }
                    }
                },
                FlatExpr::Binary(op @ (BinOp::Iff | BinOp::RevImplies), _, _) => {
                    problems.push(format!("operator `{}` remains in `{e}`", op.symbol()))
                }
                _ => {}
            });
        }
        problems
    }
}

/// Values for every element of every decision variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Solution {
    /// Row-major element values per flat variable.
    pub values: IndexMap<String, Vec<Value>>,
    pub objective: Option<Value>,
}

impl Solution {
    pub fn get(&self, name: &str) -> Option<&[Value]> {
        self.values.get(name).map(Vec::as_slice)
    }

    /// Canonical, order-independent key for comparing solution sets.
    pub fn key(&self) -> Vec<(String, Vec<Value>)> {
        let mut k: Vec<_> = self.values.iter().map(|(n, v)| (n.clone(), v.clone())).collect();
        k.sort();
        k
    }
}

/// Row-major offset of 1-based `index` within `shape`.
pub fn linear_offset(shape: &[usize], index: &[i64]) -> Option<usize> {
    if shape.len() != index.len() {
        return None;
    }
    let mut off = 0usize;
    for (&dim, &i) in shape.iter().zip(index) {
        if i < 1 || i as usize > dim {
            return None;
        }
        off = off * dim + (i as usize - 1);
    }
    Some(off)
}

/// 1-based multi-index of a row-major offset.
pub fn unravel(shape: &[usize], mut offset: usize) -> Vec<i64> {
    let mut idx = vec![0i64; shape.len()];
    for (slot, &dim) in idx.iter_mut().zip(shape).rev() {
        *slot = (offset % dim) as i64 + 1;
        offset /= dim;
    }
    idx
}
