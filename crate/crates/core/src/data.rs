//! Instance data: enums, constants and variable-assignments.

use indexmap::IndexMap;

use crate::ast::{EraseSpans, TypeRef};
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataFile {
    pub enums: IndexMap<String, EnumDecl>,
    pub constants: IndexMap<String, ConstDecl>,
    pub assignments: Vec<Assignment>,
}

impl DataFile {
    /// Appends `other` into `self`. Duplicate names are reported by the analyzer,
    /// so the first definition wins here and the duplicate is kept aside.
    pub fn merge(&mut self, other: DataFile) -> Vec<(String, SourceSpan)> {
        let mut dups = Vec::new();
        for (k, v) in other.enums {
            if self.enums.contains_key(&k) {
                dups.push((k, v.span));
            } else {
                self.enums.insert(k, v);
            }
        }
        for (k, v) in other.constants {
            if self.constants.contains_key(&k) {
                dups.push((k, v.span));
            } else {
                self.constants.insert(k, v);
            }
        }
        self.assignments.extend(other.assignments);
        dups
    }

    pub fn is_empty(&self) -> bool {
        self.enums.is_empty() && self.constants.is_empty() && self.assignments.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumDecl {
    pub name: String,
    pub values: Vec<String>,
    pub span: SourceSpan,
}

/// `int n := 5;`, `int cost := [3, 4];`, `int m := [[1,2],[3,4]];`
#[derive(Debug, Clone, PartialEq)]
pub struct ConstDecl {
    pub name: String,
    pub ty: TypeRef,
    pub value: DataValue,
    pub span: SourceSpan,
}

/// `Man StableMarriage.man := [...];`
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub ty: TypeRef,
    /// Qualified path, starting with the main class name.
    pub path: Vec<String>,
    pub value: DataValue,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataValue {
    pub kind: DataValueKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataValueKind {
    /// `_`: leave the slot as a decision variable.
    Omit,
    Int(i64),
    Real(f64),
    Bool(bool),
    /// An enum literal or a constant name.
    Symbol(String),
    Array(Vec<DataValue>),
    /// `[Helen:5, Tracy:1]`: entries keyed by enum literals.
    Keyed(Vec<(String, DataValue)>),
    /// `{a, b, ...}`: an object literal, or a set when the target is set-typed.
    Braced(Vec<DataValue>),
}

impl EraseSpans for DataValue {
    fn erase_spans(&mut self) {
        self.span = SourceSpan::synthetic();
        match &mut self.kind {
            DataValueKind::Array(vs) | DataValueKind::Braced(vs) => {
                vs.iter_mut().for_each(EraseSpans::erase_spans)
            }
            DataValueKind::Keyed(kvs) => kvs.iter_mut().for_each(|(_, v)| v.erase_spans()),
            _ => {}
        }
    }
}

impl EraseSpans for DataFile {
    fn erase_spans(&mut self) {
        for e in self.enums.values_mut() {
            e.span = SourceSpan::synthetic();
        }
        for c in self.constants.values_mut() {
            c.span = SourceSpan::synthetic();
            c.value.erase_spans();
        }
        for a in &mut self.assignments {
            a.span = SourceSpan::synthetic();
            a.value.erase_spans();
        }
    }
}
