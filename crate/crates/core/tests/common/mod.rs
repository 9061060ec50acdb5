#![allow(dead_code)]

pub mod boolexpr;
pub mod brute;
pub mod interp;
pub mod oracles;

use std::collections::BTreeSet;

use scomma_core::analyzer::analyze;
use scomma_core::backend::{apply_rule, RuleSpec};
use scomma_core::flat::{unravel, Solution};
use scomma_core::Value;
use scomma_core::flatten::flatten;
use scomma_core::syntax::{parse_data, parse_model};
use scomma_core::FlatModel;

pub fn corpus(rel: &str) -> String {
    let path = format!("{}/../../corpus/{rel}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn try_compile(model: &str, data: &str) -> Result<FlatModel, String> {
    try_compile_as(model, data, "m.scm")
}

pub fn try_compile_as(model: &str, data: &str, file: &str) -> Result<FlatModel, String> {
    let m = parse_model(model, file).map_err(|d| d.to_string())?;
    let d = parse_data(data, "m.dat").map_err(|d| d.to_string())?;
    let tm = analyze(&m, &d).map_err(|d| d.to_string())?;
    flatten(&tm, &d).map(|(fm, _)| fm).map_err(|e| e.to_string())
}

pub fn compile(model: &str, data: &str) -> FlatModel {
    try_compile(model, data).unwrap()
}

/// Compiles `corpus/<dir>/<name>.scm` with its `.dat`.
pub fn corpus_model(dir: &str, name: &str) -> FlatModel {
    try_compile_as(
        &corpus(&format!("{dir}/{name}.scm")),
        &corpus(&format!("{dir}/{name}.dat")),
        &format!("{name}.scm"),
    )
    .unwrap()
}

pub fn stable() -> FlatModel {
    corpus_model("stable", "StableMarriage")
}

/// Compiles a corpus model from disk, following its imports.
pub fn corpus_file(dir: &str, name: &str) -> FlatModel {
    let path = format!("{}/../../corpus/{dir}/{name}.scm", env!("CARGO_MANIFEST_DIR"));
    scomma_core::compile_files(std::path::Path::new(&path), None)
        .unwrap_or_else(|d| panic!("{d}"))
        .flat
}

/// Minimal 2x2 set matrix: four set variables over {1,2,3}.
pub const SET_GRID: &str = "
class SetGrid {
  set of int s[2,2] in {1,2,3};
  constraint c {
    1 in s[1,1];
    s[1,2] subset s[1,1];
    cardinality(s[2,1]) = 2;
    s[2,2] = s[1,2] union s[2,1];
    not (3 in s[2,2]) or cardinality(s[1,1]) = 3;
  }
}
";

/// The whole front end on a corpus model, following its imports.
pub fn corpus_compiled(dir: &str, name: &str) -> scomma_core::Compiled {
    let path = format!("{}/../../corpus/{dir}/{name}.scm", env!("CARGO_MANIFEST_DIR"));
    scomma_core::compile_files(std::path::Path::new(&path), None).unwrap_or_else(|d| panic!("{d}"))
}

/// Every shipped corpus model as `(directory, model name)`.
pub const CORPUS: &[(&str, &str)] = &[
    ("send", "Send"),
    ("stable", "StableMarriage"),
    ("queens-10", "Queens"),
    ("queens-18", "Queens"),
    ("packing", "Packing"),
    ("production", "Production"),
    ("ineq20", "Ineq20"),
    ("sudoku", "Sudoku"),
    ("golfers", "Golfers"),
];

/// Flat brute force against the direct interpreter. `None` when the space is
/// too large to enumerate; otherwise the number of solutions, after asserting
/// that both sides agree.
pub fn same_solutions(c: &scomma_core::Compiled, limit: u128) -> Option<usize> {
    compare_solutions(c, limit).map(|r| r.unwrap_or_else(|e| panic!("{e}")))
}

/// Like [`same_solutions`], reporting disagreement as an error.
pub fn compare_solutions(c: &scomma_core::Compiled, limit: u128) -> Option<Result<usize, String>> {
    let it = interp::Interpreter::new(&c.typed, &c.data);
    if brute::candidates(&c.flat) > limit || it.candidates() > limit {
        return None;
    }
    let direct = it.solutions();
    let cells = it.cell_names();
    let flat = brute::enumerate(&c.flat);
    let projected: BTreeSet<_> = flat.iter().map(|s| interp::project(s, &c.flat, &cells)).collect();
    Some(if projected.len() != flat.len() {
        Err(format!("{}: flat solutions collapse under projection", c.flat.name))
    } else if projected != direct {
        Err(format!(
            "{}: solution sets differ ({} flat, {} direct)",
            c.flat.name,
            projected.len(),
            direct.len()
        ))
    } else {
        Ok(direct.len())
    })
}

/// Where decompose_set_matrix puts cell `[i,j]` of a set matrix.
pub fn set_matrix_cell(n: &str, ix: &[i64]) -> (String, Vec<i64>) {
    match ix {
        [i, j] => (format!("{n}{i}_{j}"), Vec::new()),
        _ => (n.to_string(), ix.to_vec()),
    }
}

type Cells = BTreeSet<Vec<((String, Vec<i64>), Value)>>;

fn cells(fm: &FlatModel, sols: &[Solution], rename: &dyn Fn(&str, &[i64]) -> (String, Vec<i64>)) -> Cells {
    sols.iter()
        .map(|s| {
            let mut out = Vec::new();
            for v in &fm.variables {
                for (k, val) in s.values[&v.name].iter().enumerate() {
                    out.push((rename(&v.name, &unravel(&v.shape, k)), val.clone()));
                }
            }
            out.sort();
            out
        })
        .collect()
}

/// Applies `rule` and compares brute-force solution sets, mapping each original
/// cell to its name after the rewrite with `rename`. Returns the solution count.
pub fn rule_preserves(fm: &FlatModel, rule: RuleSpec, rename: &dyn Fn(&str, &[i64]) -> (String, Vec<i64>)) -> Result<usize, String> {
    let after = apply_rule(fm.clone(), &rule).map_err(|e| e.to_string())?;
    let before_sols = brute::enumerate(fm);
    let after_sols = brute::enumerate(&after);
    if cells(fm, &before_sols, rename) != cells(&after, &after_sols, &|n, ix| (n.to_string(), ix.to_vec())) {
        return Err(format!("{}: solution sets differ", rule.name));
    }
    Ok(before_sols.len())
}

