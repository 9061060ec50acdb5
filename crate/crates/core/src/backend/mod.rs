//! Descriptor-driven code generation for target solvers.
//!
//! A descriptor (`.bd` file) binds templates to the concepts of the flat model
//! and names the rewrite rules to run first. Three descriptors are built in:
//! `flat` (the flat-text format), `gecodej` and `clp`.

mod render;
mod rules;
pub mod schema;

use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use thiserror::Error;

use crate::flat::{BaseType, FlatExpr, FlatModel};
use crate::span::{Diagnostics, SourceSpan};
use crate::syntax::parse_descriptor;

pub use render::render;
pub use rules::{apply_rewrites, apply_rule, rule_params, RULES};

#[derive(Debug, Clone, PartialEq)]
pub enum Part {
    Lit(String),
    /// `name` or `v.name`: interpolates a field.
    Field(Vec<String>, SourceSpan),
    /// `(isDefined(path) ? then : else)`
    IfDefined {
        path: Vec<String>,
        then: Vec<Part>,
        otherwise: Vec<Part>,
    },
    /// `(foreach v in path ? body separator ", ")`
    Foreach {
        var: String,
        path: Vec<String>,
        body: Vec<Part>,
        separator: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub concept: String,
    pub parts: Vec<Part>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSpec {
    pub name: String,
    pub params: IndexMap<String, String>,
}

impl RuleSpec {
    pub fn new(name: &str) -> Self {
        RuleSpec {
            name: name.to_string(),
            params: IndexMap::new(),
        }
    }
}

/// A model feature a target may be unable to express.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construct {
    SetMatrix,
    Matrix,
    SetVar,
    RealVar,
    ExplicitDomain,
    Table,
    Objective,
    Cumulatives,
}

impl Construct {
    pub const ALL: [Construct; 8] = [
        Construct::SetMatrix,
        Construct::Matrix,
        Construct::SetVar,
        Construct::RealVar,
        Construct::ExplicitDomain,
        Construct::Table,
        Construct::Objective,
        Construct::Cumulatives,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Construct::SetMatrix => "set_matrix",
            Construct::Matrix => "matrix",
            Construct::SetVar => "set_var",
            Construct::RealVar => "real_var",
            Construct::ExplicitDomain => "explicit_domain",
            Construct::Table => "table",
            Construct::Objective => "objective",
            Construct::Cumulatives => "cumulatives",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Construct> {
        Construct::ALL.into_iter().find(|c| c.keyword() == s)
    }

    pub fn occurs_in(self, fm: &FlatModel) -> bool {
        match self {
            Construct::SetMatrix => fm
                .variables
                .iter()
                .any(|v| v.base == BaseType::SetOfInt && v.shape.len() == 2),
            Construct::Matrix => fm.variables.iter().any(|v| v.shape.len() == 2),
            Construct::SetVar => fm.variables.iter().any(|v| v.base == BaseType::SetOfInt),
            Construct::RealVar => fm.variables.iter().any(|v| v.base == BaseType::Real),
            Construct::ExplicitDomain => fm
                .variables
                .iter()
                .any(|v| matches!(v.domain, crate::flat::Domain::IntSet(_))),
            Construct::Table => !fm.tables.is_empty(),
            Construct::Objective => fm.objective.is_some(),
            Construct::Cumulatives => {
                let mut found = false;
                for e in fm.exprs() {
                    e.walk(&mut |n| {
                        if matches!(n, FlatExpr::Call(name, _) if name == "cumulatives") {
                            found = true;
                        }
                    });
                }
                found
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unsupported {
    pub construct: Construct,
    /// The rule that rewrites the construct away, if any.
    pub fix: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendDescriptor {
    pub name: String,
    pub file_extension: String,
    pub header: String,
    pub footer: String,
    /// Parenthesize sub-expressions by operator precedence.
    pub auto_parens: bool,
    /// Operator concept to target spelling.
    pub symbols: IndexMap<String, String>,
    pub templates: IndexMap<String, Template>,
    pub rules: Vec<RuleSpec>,
    pub unsupported: Vec<Unsupported>,
}

impl BackendDescriptor {
    pub fn template(&self, concept: &str) -> Option<&Template> {
        self.templates.get(concept)
    }
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("no template for concept `{0}`")]
    MissingTemplate(String),
    #[error("template `{concept}` uses field `{field}`, which is absent on this node")]
    AbsentField { concept: String, field: String },
    #[error("rule `{rule}`: {message}")]
    Rule { rule: String, message: String },
    #[error("unknown rewrite rule `{0}`")]
    UnknownRule(String),
    #[error("target `{target}` does not support {construct}{}", match fix {
        Some(r) => format!("; rule `{r}` would rewrite it"),
        None => "; no rule can rewrite it".to_string(),
    })]
    Unsupported {
        target: String,
        construct: &'static str,
        fix: Option<String>,
    },
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
    #[error("{0}")]
    Descriptor(Diagnostics),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn check_supported(fm: &FlatModel, bd: &BackendDescriptor) -> Result<(), BackendError> {
    for u in &bd.unsupported {
        if u.construct.occurs_in(fm) {
            return Err(BackendError::Unsupported {
                target: bd.name.clone(),
                construct: u.construct.keyword(),
                fix: u.fix.clone(),
            });
        }
    }
    Ok(())
}

/// Runs the descriptor's rewrite rules, then renders.
pub fn emit(fm: &FlatModel, bd: &BackendDescriptor) -> Result<String, BackendError> {
    let fm = apply_rewrites(fm.clone(), &bd.rules)?;
    check_supported(&fm, bd)?;
    render(&fm, bd)
}

/// Renders without rewriting; constructs the target cannot express are errors.
pub fn direct_emit(fm: &FlatModel, bd: &BackendDescriptor) -> Result<String, BackendError> {
    check_supported(fm, bd)?;
    render(fm, bd)
}

const BUILTIN: &[(&str, &str)] = &[
    ("flat", include_str!("targets/flat.bd")),
    ("gecodej", include_str!("targets/gecodej.bd")),
    ("clp", include_str!("targets/clp.bd")),
];

pub fn builtin(name: &str) -> Option<BackendDescriptor> {
    let (file, text) = BUILTIN.iter().find(|(n, _)| *n == name)?;
    Some(parse_descriptor(text, &format!("{file}.bd")).expect("built-in descriptors parse"))
}

/// The flat-text rendering of a model.
pub fn flat_text(fm: &FlatModel) -> String {
    let bd = builtin("flat").expect("flat descriptor is built in");
    render(fm, &bd).expect("flat descriptor covers every concept")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    Builtin,
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct Target {
    pub descriptor: BackendDescriptor,
    pub origin: Origin,
}

/// Available targets by name: the built-ins, then descriptor files found in
/// `dirs`. A later descriptor with a taken name shadows the earlier one.
#[derive(Debug, Clone, Default)]
pub struct Targets {
    pub targets: IndexMap<String, Target>,
    pub warnings: Vec<String>,
}

impl Targets {
    pub fn get(&self, name: &str) -> Result<&BackendDescriptor, BackendError> {
        self.targets
            .get(name)
            .map(|t| &t.descriptor)
            .ok_or_else(|| BackendError::UnknownTarget(name.to_string()))
    }

    fn add(&mut self, bd: BackendDescriptor, origin: Origin) {
        if let Some(prev) = self.targets.get(&bd.name) {
            let prev = match &prev.origin {
                Origin::Builtin => "the built-in descriptor".to_string(),
                Origin::File(p) => p.display().to_string(),
            };
            self.warnings.push(format!("target `{}` shadows {prev}", bd.name));
        }
        self.targets.insert(bd.name.clone(), Target { descriptor: bd, origin });
    }
}

pub fn list_targets(dirs: &[PathBuf]) -> Result<Targets, BackendError> {
    let mut t = Targets::default();
    for (name, _) in BUILTIN {
        t.add(builtin(name).unwrap(), Origin::Builtin);
    }
    for dir in dirs {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| BackendError::Io {
                path: dir.display().to_string(),
                source: e,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "bd"))
            .collect();
        files.sort();
        for f in files {
            let bd = load_descriptor(&f)?;
            t.add(bd, Origin::File(f));
        }
    }
    Ok(t)
}

pub fn load_descriptor(path: &Path) -> Result<BackendDescriptor, BackendError> {
    let text = std::fs::read_to_string(path).map_err(|e| BackendError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_descriptor(&text, &path.display().to_string()).map_err(BackendError::Descriptor)
}
