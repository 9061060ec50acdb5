//! The corpus runner: flatten, emit every target, count tokens, solve and
//! verify each benchmark.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use scomma_core::backend::{emit, Targets};
use scomma_core::flat::{FlatModel, Solution};
use scomma_core::pipeline::load_sources;
use scomma_core::solver::{build_space, optimize, solve, Event, Limit, SearchConfig, SolveStats};
use scomma_core::syntax::{count_tokens, parse_solution, render_solution};
use scomma_core::{check_solution, compile_source, Compiled};
use serde::Serialize;

use crate::{exit, targets, BenchArgs, CliError};

/// One benchmark: a model file plus an optional data file beside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub name: String,
    pub model: Result<PathBuf, String>,
    pub data: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    /// Compiles and emits, but the embedded solver cannot run it.
    EmitOnly,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// Every solution was found.
    Complete,
    /// Stopped at the solution limit.
    Limit,
    Optimal,
    /// Best solution when the time limit ran out.
    Best,
    Infeasible,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub benchmark: String,
    pub status: Status,
    pub error: Option<String>,
    pub variables: Option<usize>,
    /// Scalar decision variables after expanding arrays.
    pub cells: Option<usize>,
    pub constraints: Option<usize>,
    pub model_tokens: Option<usize>,
    pub data_tokens: Option<usize>,
    /// Tokens per emitted target; `None` where the target refused the model.
    pub target_tokens: BTreeMap<String, Option<usize>>,
    pub emit_errors: BTreeMap<String, String>,
    pub unsupported: Vec<String>,
    pub outcome: Option<Outcome>,
    pub solutions: Option<usize>,
    pub objective: Option<String>,
    pub verified: Option<bool>,
    pub nodes: Option<u64>,
    pub failures: Option<u64>,
    pub propagations: Option<u64>,
    pub solve_ms: Option<f64>,
    pub compile_ms: Option<f64>,
}

impl BenchRow {
    fn failed(name: &str, error: String) -> Self {
        BenchRow {
            benchmark: name.to_string(),
            status: Status::Failed,
            error: Some(error),
            variables: None,
            cells: None,
            constraints: None,
            model_tokens: None,
            data_tokens: None,
            target_tokens: BTreeMap::new(),
            emit_errors: BTreeMap::new(),
            unsupported: Vec::new(),
            outcome: None,
            solutions: None,
            objective: None,
            verified: None,
            nodes: None,
            failures: None,
            propagations: None,
            solve_ms: None,
            compile_ms: None,
        }
    }

    /// Source size: the model plus its data.
    pub fn source_tokens(&self) -> Option<usize> {
        Some(self.model_tokens? + self.data_tokens?)
    }

}

/// Emitted size against source size for one target, over a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct Growth {
    pub target: String,
    pub source_tokens: usize,
    pub target_tokens: usize,
    pub emitted: usize,
    /// Benchmarks whose emission is not larger than their source.
    pub smaller: Vec<String>,
}

impl Growth {
    /// Larger in total and for most benchmarks.
    pub fn grows(&self) -> bool {
        self.target_tokens > self.source_tokens && self.smaller.len() * 2 < self.emitted
    }
}

pub fn growth(rows: &[BenchRow], targets: &[String]) -> Vec<Growth> {
    targets
        .iter()
        .map(|t| {
            let mut g = Growth {
                target: t.clone(),
                source_tokens: 0,
                target_tokens: 0,
                emitted: 0,
                smaller: Vec::new(),
            };
            for r in rows {
                let (Some(src), Some(Some(n))) = (r.source_tokens(), r.target_tokens.get(t)) else {
                    continue;
                };
                g.source_tokens += src;
                g.target_tokens += n;
                g.emitted += 1;
                if *n <= src {
                    g.smaller.push(r.benchmark.clone());
                }
            }
            g
        })
        .filter(|g| g.emitted > 0)
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub time_limit: Duration,
    pub solution_limit: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            time_limit: Duration::from_secs(10),
            solution_limit: 1,
        }
    }
}

fn ms(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

/// Subdirectories with one `.scm` file each, then loose `.scm` files, by name.
pub fn discover(dir: &Path) -> Result<Vec<Entry>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    paths.sort();
    let with_ext = |d: &Path, ext: &str| -> Vec<PathBuf> {
        let mut v: Vec<PathBuf> = std::fs::read_dir(d)
            .into_iter()
            .flatten()
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == ext))
            .collect();
        v.sort();
        v
    };
    let name_of = |p: &Path| p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    let data_for = |model: &Path| Some(model.with_extension("dat")).filter(|d| d.is_file());
    let mut out = Vec::new();
    for p in &paths {
        if p.is_dir() {
            let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let models = with_ext(p, "scm");
            let model = match models.as_slice() {
                [m] => Ok(m.clone()),
                ms => Err(format!("expected one .scm file in {}, found {}", p.display(), ms.len())),
            };
            let data = model.as_ref().ok().and_then(|m| data_for(m));
            out.push(Entry { name, model, data });
        }
    }
    for p in &paths {
        if p.is_file() && p.extension().is_some_and(|x| x == "scm") {
            out.push(Entry {
                name: name_of(p),
                model: Ok(p.clone()),
                data: data_for(p),
            });
        }
    }
    Ok(out)
}

/// Sources, compiled model and token counts of the source files.
pub fn compile_entry(model: &Path, data: Option<&Path>) -> Result<(Compiled, usize, usize), CliError> {
    let (m, ds) = load_sources(model, data)?;
    let c = compile_source(&m, &ds)?;
    let data_tokens = ds.iter().map(|s| count_tokens(&s.text)).sum();
    Ok((c, count_tokens(&m.text), data_tokens))
}

/// Token count of every target's emission, or why it was refused.
pub fn emit_all(fm: &FlatModel, t: &Targets) -> BTreeMap<String, Result<String, String>> {
    t.targets
        .iter()
        .map(|(name, target)| (name.clone(), emit(fm, &target.descriptor).map_err(|e| e.to_string())))
        .collect()
}

/// Renders, reparses and checks a solution, as `scomma check` would.
fn verify(fm: &FlatModel, s: &Solution) -> bool {
    parse_solution(&render_solution(fm, s), "solution", fm)
        .ok()
        .and_then(|back| check_solution(fm, &back).ok())
        .is_some_and(|r| r.is_satisfied())
}

struct Solved {
    outcome: Outcome,
    solutions: usize,
    objective: Option<String>,
    verified: bool,
    stats: SolveStats,
}

fn run_solver(fm: &FlatModel, opts: &BenchOptions) -> Result<Result<Solved, Vec<String>>, String> {
    let space = match build_space(fm) {
        Ok(s) => s,
        Err(u) => return Ok(Err(u.0)),
    };
    let cfg = SearchConfig {
        time_limit: Some(opts.time_limit),
        solution_limit: Some(opts.solution_limit),
        ..SearchConfig::default()
    };
    if fm.objective.is_some() {
        let cfg = SearchConfig { solution_limit: None, ..cfg };
        let o = optimize(&space, &cfg).map_err(|e| e.to_string())?;
        let outcome = match (&o.best, o.proven) {
            (Some(_), true) => Outcome::Optimal,
            (Some(_), false) => Outcome::Best,
            (None, true) => Outcome::Infeasible,
            (None, false) => Outcome::Timeout,
        };
        return Ok(Ok(Solved {
            outcome,
            solutions: o.best.iter().count(),
            objective: o.best.as_ref().and_then(|s| s.objective.as_ref()).map(|v| v.to_string()),
            verified: o.best.iter().all(|s| verify(fm, s)),
            stats: o.stats,
        }));
    }
    let mut search = solve(&space, &cfg);
    let (mut solutions, mut verified, mut stopped) = (0, true, None);
    for ev in search.by_ref() {
        match ev.map_err(|e| e.to_string())? {
            Event::Solution(s) => {
                solutions += 1;
                verified &= verify(fm, &s);
            }
            Event::Truncated(l) => stopped = Some(l),
        }
    }
    let outcome = match (solutions, stopped) {
        (0, None) => Outcome::Infeasible,
        (0, Some(_)) => Outcome::Timeout,
        (_, None) => Outcome::Complete,
        (_, Some(Limit::Solutions)) => Outcome::Limit,
        (_, Some(Limit::Time)) => Outcome::Best,
    };
    Ok(Ok(Solved {
        outcome,
        solutions,
        objective: None,
        verified,
        stats: search.stats(),
    }))
}

pub fn run_entry(e: &Entry, t: &Targets, opts: &BenchOptions) -> BenchRow {
    let model = match &e.model {
        Ok(m) => m,
        Err(msg) => return BenchRow::failed(&e.name, msg.clone()),
    };
    let start = Instant::now();
    let (c, model_tokens, data_tokens) = match compile_entry(model, e.data.as_deref()) {
        Ok(x) => x,
        Err(err) => return BenchRow::failed(&e.name, err.to_string()),
    };
    let fm = &c.flat;
    let mut row = BenchRow::failed(&e.name, String::new());
    row.error = None;
    row.status = Status::Ok;
    row.variables = Some(fm.variables.len());
    row.cells = Some(fm.variables.iter().map(|v| v.len()).sum());
    row.constraints = Some(fm.constraints.len());
    row.model_tokens = Some(model_tokens);
    row.data_tokens = Some(data_tokens);
    for (name, r) in emit_all(fm, t) {
        match r {
            Ok(text) => {
                row.target_tokens.insert(name, Some(count_tokens(&text)));
            }
            Err(msg) => {
                row.target_tokens.insert(name.clone(), None);
                row.emit_errors.insert(name, msg);
            }
        }
    }
    row.compile_ms = Some(ms(start.elapsed()));
    match run_solver(fm, opts) {
        Err(msg) => {
            row.status = Status::Failed;
            row.error = Some(msg);
        }
        Ok(Err(constructs)) => {
            row.status = Status::EmitOnly;
            row.unsupported = constructs;
        }
        Ok(Ok(s)) => {
            row.outcome = Some(s.outcome);
            row.solutions = Some(s.solutions);
            row.objective = s.objective;
            row.verified = Some(s.verified);
            row.nodes = Some(s.stats.nodes);
            row.failures = Some(s.stats.failures);
            row.propagations = Some(s.stats.propagations);
            row.solve_ms = Some(ms(s.stats.wall_time));
            if !s.verified {
                row.status = Status::Failed;
                row.error = Some("a solution failed the independent check".into());
            }
        }
    }
    row
}

/// Runs every benchmark in parallel; rows come back in corpus order.
pub fn bench_corpus(entries: &[Entry], t: &Targets, opts: &BenchOptions) -> Vec<BenchRow> {
    entries.par_iter().map(|e| run_entry(e, t, opts)).collect()
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

pub fn print_table(out: &mut dyn Write, rows: &[BenchRow], target_names: &[String]) -> std::io::Result<()> {
    write!(out, "{:<14} {:>5} {:>5} {:>6} {:>6}", "benchmark", "cells", "cons", "model", "data")?;
    for n in target_names {
        write!(out, " {:>8}", truncate(n, 8))?;
    }
    writeln!(out, "  {:<10} {:>5} {:>9} {:>9}  {}", "outcome", "sols", "nodes", "ms", "status")?;
    for r in rows {
        write!(
            out,
            "{:<14} {:>5} {:>5} {:>6} {:>6}",
            truncate(&r.benchmark, 14),
            cell(r.cells),
            cell(r.constraints),
            cell(r.model_tokens),
            cell(r.data_tokens)
        )?;
        for n in target_names {
            write!(out, " {:>8}", cell(r.target_tokens.get(n).copied().flatten()))?;
        }
        let outcome = r.outcome.map(|o| format!("{o:?}").to_lowercase());
        let status = match r.status {
            Status::Ok => "ok".to_string(),
            Status::EmitOnly => format!("emit-only ({})", r.unsupported.join(", ")),
            Status::Failed => format!("FAILED: {}", r.error.as_deref().unwrap_or_default().lines().next().unwrap_or_default()),
        };
        writeln!(
            out,
            "  {:<10} {:>5} {:>9} {:>9}  {status}",
            cell(outcome),
            cell(r.solutions),
            cell(r.nodes),
            cell(r.solve_ms)
        )?;
    }
    Ok(())
}

fn truncate(s: &str, n: usize) -> String {
    s.chars().take(n).collect()
}

pub(crate) fn run(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let entries = discover(&a.corpus)?;
    let t = targets(err)?;
    let opts = BenchOptions {
        time_limit: a.time_limit,
        solution_limit: a.limit,
    };
    let rows = match a.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| bench_corpus(&entries, &t, &opts)),
        None => bench_corpus(&entries, &t, &opts),
    };
    let mut jsonl = String::new();
    for r in &rows {
        jsonl.push_str(&serde_json::to_string(r).expect("rows serialize"));
        jsonl.push('\n');
    }
    crate::write_file(&a.jsonl, &jsonl)?;

    let names: Vec<String> = t.targets.keys().cloned().collect();
    print_table(out, &rows, &names).map_err(|e| CliError::io(Path::new("-"), e))?;
    for g in growth(&rows, &names) {
        let ratio = g.target_tokens as f64 / g.source_tokens.max(1) as f64;
        let _ = write!(
            out,
            "{}: {} tokens from {} source tokens ({ratio:.2}x); larger for {} of {}",
            g.target,
            g.target_tokens,
            g.source_tokens,
            g.emitted - g.smaller.len(),
            g.emitted
        );
        if g.smaller.is_empty() {
            let _ = writeln!(out);
        } else {
            let _ = writeln!(out, "; not for {}", g.smaller.join(", "));
        }
    }
    for r in &rows {
        for (target, msg) in &r.emit_errors {
            let _ = writeln!(out, "note: {}: {target}: {msg}", r.benchmark);
        }
    }
    let failed = rows.iter().filter(|r| r.status == Status::Failed).count();
    let _ = writeln!(err, "{} benchmarks, {failed} failed; report in {}", rows.len(), a.jsonl.display());
    Ok(if failed == 0 { exit::OK } else { exit::DIAGNOSTICS })
}
