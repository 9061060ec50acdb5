//! Lowering of a typed model plus data to the flat model.
//!
//! Passes run in this order: enum substitution, data substitution, loop
//! unrolling, composition expansion, conditional removal, logic normalization.
//! Unrolling precedes expansion so object indices like `man[m]` are constants
//! by the time the object tree is resolved.

mod expand;
mod fold;
mod logic;
mod typed;

use std::fmt;

use thiserror::Error;

use crate::analyzer::{Instance, TypedModel};
use crate::ast::ObjectiveKind;
use crate::data::DataFile;
use crate::flat::{FlatConstraint, FlatExpr, FlatModel, Objective};
use crate::span::SourceSpan;

pub use expand::expand_composition;
pub use fold::fold;
pub use logic::{normalize_logic, remove_conditionals};
pub use typed::{substitute_data, substitute_enums, unroll_loops};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pass}: {message}")]
pub struct FlattenError {
    pub pass: &'static str,
    pub message: String,
    pub span: SourceSpan,
}

impl FlattenError {
    pub(crate) fn new(pass: &'static str, span: &SourceSpan, message: impl Into<String>) -> Self {
        FlattenError {
            pass,
            message: message.into(),
            span: span.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlattenOptions {
    /// Drop `if` statements whose condition folds to a constant.
    pub simplify_conditionals: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassRecord {
    pub name: &'static str,
    pub nodes_before: usize,
    pub nodes_after: usize,
}

/// Node counts before and after each pass, in pipeline order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PassTrace {
    pub passes: Vec<PassRecord>,
}

impl PassTrace {
    fn record(&mut self, name: &'static str, before: usize, after: usize) {
        self.passes.push(PassRecord {
            name,
            nodes_before: before,
            nodes_after: after,
        });
    }
}

impl fmt::Display for PassTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.passes {
            writeln!(f, "{:<22} {:>8} -> {:>8}", p.name, p.nodes_before, p.nodes_after)?;
        }
        Ok(())
    }
}

/// A flat statement before conditionals are removed.
#[derive(Debug, Clone, PartialEq)]
pub enum FItem {
    Constraint(FlatExpr),
    If(FlatExpr, Vec<FItem>, Option<Vec<FItem>>),
    Objective(ObjectiveKind, FlatExpr),
}

impl FItem {
    pub fn node_count(&self) -> usize {
        match self {
            FItem::Constraint(e) | FItem::Objective(_, e) => e.node_count(),
            FItem::If(c, t, e) => {
                1 + c.node_count()
                    + t.iter().map(FItem::node_count).sum::<usize>()
                    + e.iter().flatten().map(FItem::node_count).sum::<usize>()
            }
        }
    }
}

/// The model after composition expansion: symbols are final, statements are not.
#[derive(Debug, Clone, PartialEq)]
pub struct Expanded {
    /// Variables, tables and enum types; `constraints` and `objective` still empty.
    pub model: FlatModel,
    pub items: Vec<FItem>,
}

impl Expanded {
    pub fn node_count(&self) -> usize {
        self.model.node_count() + self.items.iter().map(FItem::node_count).sum::<usize>()
    }
}

pub fn flatten(tm: &TypedModel, d: &DataFile) -> Result<(FlatModel, PassTrace), FlattenError> {
    flatten_with(tm, d, &FlattenOptions::default())
}

pub fn flatten_with(
    tm: &TypedModel,
    d: &DataFile,
    opts: &FlattenOptions,
) -> Result<(FlatModel, PassTrace), FlattenError> {
    let mut trace = PassTrace::default();

    let before = tm.node_count();
    let tm = substitute_enums(tm);
    trace.record("substitute_enums", before, tm.node_count());

    let before = tm.node_count();
    let (tm, root): (TypedModel, Instance) = substitute_data(&tm, d)?;
    trace.record("substitute_data", before, tm.node_count());

    let before = tm.node_count();
    let tm = unroll_loops(&tm)?;
    trace.record("unroll_loops", before, tm.node_count());

    let before = tm.node_count();
    let ex = expand_composition(&tm, &root)?;
    trace.record("expand_composition", before, ex.node_count());

    let before = ex.node_count();
    let ex = remove_conditionals(ex, opts);
    trace.record("remove_conditionals", before, ex.node_count());

    let before = ex.node_count();
    let ex = normalize_logic(ex);
    trace.record("normalize_logic", before, ex.node_count());

    let fm = assemble(ex);
    let problems = fm.validate();
    if let Some(p) = problems.first() {
        return Err(FlattenError::new(
            "validate",
            &SourceSpan::synthetic(),
            format!("internal error: flat model is malformed ({p})"),
        ));
    }
    Ok((fm, trace))
}

fn assemble(ex: Expanded) -> FlatModel {
    let mut fm = ex.model;
    for it in ex.items {
        match it {
            FItem::Constraint(expr) => fm.constraints.push(FlatConstraint { expr }),
            FItem::Objective(kind, expr) => fm.objective = Some(Objective { kind, expr }),
            FItem::If(..) => unreachable!("conditionals are removed before assembly"),
        }
    }
    fm
}
