//! Compiler and finite-domain solver for an object-oriented constraint modeling language.
//!
//! Pipeline: [`syntax::parse_model`] and [`syntax::parse_data`] produce the
//! source tree, [`analyzer::analyze`] resolves and type-checks it,
//! [`flatten::flatten`] lowers it to a [`FlatModel`], and from there either
//! [`backend::emit`] renders target text or [`solver`] searches for solutions.

pub mod analyzer;
pub mod ast;
pub mod backend;
pub mod data;
pub mod eval;
pub mod flat;
pub mod flatten;
pub mod pipeline;
pub mod solver;
pub mod span;
pub mod syntax;
pub mod value;

pub use ast::{BinOp, Model, UnOp};
pub use data::DataFile;
pub use eval::{check_solution, eval_expr, CheckReport, ContractError, EvalError};
pub use pipeline::{compile_files, compile_source, Compiled, Source};
pub use flat::{BaseType, Domain, FlatConstraint, FlatExpr, FlatModel, FlatTable, FlatVar, Solution};
pub use span::{Diagnostic, Diagnostics, Severity, SourceSpan};
pub use value::Value;
