//! The front end from files: import resolution, parsing, analysis and flattening.

use std::path::{Path, PathBuf};

use crate::analyzer::{analyze, TypedModel};
use crate::ast::Model;
use crate::data::DataFile;
use crate::flat::FlatModel;
use crate::flatten::{flatten, FlattenError, PassTrace};
use crate::span::{Diagnostic, Diagnostics, SourceSpan};
use crate::syntax::{parse_data, parse_model};

#[derive(Debug, Clone)]
pub struct Compiled {
    pub model: Model,
    pub data: DataFile,
    pub typed: TypedModel,
    pub flat: FlatModel,
    pub trace: PassTrace,
}

/// A data source given by name and contents.
#[derive(Debug, Clone)]
pub struct Source {
    pub file: String,
    pub text: String,
}

impl Source {
    pub fn new(file: impl Into<String>, text: impl Into<String>) -> Self {
        Source {
            file: file.into(),
            text: text.into(),
        }
    }
}

fn file_start(file: &str) -> SourceSpan {
    SourceSpan::new(file.into(), 1, 1, 0, 0)
}

impl From<FlattenError> for Diagnostic {
    fn from(e: FlattenError) -> Self {
        Diagnostic::error(e.span.clone(), e.to_string())
    }
}

/// Parses data sources and merges them in order. Later duplicates are errors.
pub fn parse_all_data(sources: &[Source]) -> Result<DataFile, Diagnostics> {
    let mut data = DataFile::default();
    let mut diags = Vec::new();
    for s in sources {
        match parse_data(&s.text, &s.file) {
            Ok(d) => {
                for (name, span) in data.merge(d) {
                    diags.push(Diagnostic::error(span, format!("`{name}` is defined twice")));
                }
            }
            Err(d) => diags.extend(d.0),
        }
    }
    if diags.is_empty() {
        Ok(data)
    } else {
        Err(Diagnostics(diags))
    }
}

/// Compiles an in-memory model against in-memory data. Imports are ignored.
pub fn compile_source(model: &Source, data: &[Source]) -> Result<Compiled, Diagnostics> {
    let m = parse_model(&model.text, &model.file)?;
    let data = parse_all_data(data)?;
    finish(m, data)
}

fn finish(model: Model, data: DataFile) -> Result<Compiled, Diagnostics> {
    let typed = analyze(&model, &data)?;
    let (flat, trace) = flatten(&typed, &data).map_err(|e| Diagnostics::from(Diagnostic::from(e)))?;
    Ok(Compiled {
        model,
        data,
        typed,
        flat,
        trace,
    })
}

fn read(path: &Path, span: Option<&SourceSpan>) -> Result<String, Diagnostic> {
    std::fs::read_to_string(path).map_err(|e| {
        let shown = path.display().to_string();
        match span {
            Some(s) => Diagnostic::error(s.clone(), format!("cannot read import `{shown}`: {e}")),
            None => Diagnostic::error(file_start(&shown), format!("cannot read file: {e}")),
        }
    })
}

/// Reads the model, the explicit data file (if any) and every imported data
/// file not already given, relative to the model's directory.
pub fn load_sources(model: &Path, data: Option<&Path>) -> Result<(Source, Vec<Source>), Diagnostics> {
    let text = read(model, None)?;
    let model_src = Source::new(model.display().to_string(), text);
    let m = parse_model(&model_src.text, &model_src.file)?;
    let dir = model.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut seen: Vec<PathBuf> = Vec::new();
    let mut sources = Vec::new();
    if let Some(d) = data {
        sources.push(Source::new(d.display().to_string(), read(d, None)?));
        seen.push(canonical(d));
    }
    let mut diags = Vec::new();
    for imp in &m.imports {
        let path = dir.join(&imp.path);
        let key = canonical(&path);
        if seen.contains(&key) || data.is_some_and(|d| d.file_name() == path.file_name()) {
            continue;
        }
        seen.push(key);
        match read(&path, Some(&imp.span)) {
            Ok(text) => sources.push(Source::new(path.display().to_string(), text)),
            Err(d) => diags.push(d),
        }
    }
    if diags.is_empty() {
        Ok((model_src, sources))
    } else {
        Err(Diagnostics(diags))
    }
}

fn canonical(p: &Path) -> PathBuf {
    p.canonicalize().unwrap_or_else(|_| p.to_path_buf())
}

pub fn compile_files(model: &Path, data: Option<&Path>) -> Result<Compiled, Diagnostics> {
    let (m, ds) = load_sources(model, data)?;
    compile_source(&m, &ds)
}
