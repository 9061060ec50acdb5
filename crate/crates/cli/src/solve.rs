use std::io::Write;

use scomma_core::flat::{FlatModel, Solution};
use scomma_core::solver::{build_space, optimize, solve, Event, Limit, SolveStats};
use scomma_core::syntax::render_solution;
use scomma_core::Value;

use crate::{exit, load, CliError, SolveArgs};

/// Values of enum-typed variables that have no label print as integers.
fn warn_unlabeled(fm: &FlatModel, s: &Solution, err: &mut dyn Write) {
    for var in &fm.variables {
        let Some(labels) = var.enum_tag.as_ref().and_then(|t| fm.enum_types.get(t)) else {
            continue;
        };
        for v in s.get(&var.name).into_iter().flatten() {
            if let Value::Int(i) = v {
                if *i < 1 || *i as usize > labels.len() {
                    let tag = var.enum_tag.as_deref().unwrap_or_default();
                    let _ = writeln!(err, "warning: `{}` = {i} has no label in `{tag}`; printed as an integer", var.name);
                }
            }
        }
    }
}

pub(crate) fn print_stats(out: &mut dyn Write, s: &SolveStats) {
    let _ = writeln!(out, "% nodes: {}", s.nodes);
    let _ = writeln!(out, "% failures: {}", s.failures);
    let _ = writeln!(out, "% propagations: {}", s.propagations);
    let _ = writeln!(out, "% time: {:.3}s", s.wall_time.as_secs_f64());
}

pub(crate) fn run(a: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let c = load(&a.input)?;
    let fm = &c.flat;
    let space = build_space(fm).map_err(CliError::Unsupported)?;
    let mut cfg = a.strategy.clone();
    cfg.time_limit = a.time_limit;
    let mut show = |out: &mut dyn Write, s: &Solution| {
        warn_unlabeled(fm, s, err);
        let _ = write!(out, "{}", render_solution(fm, s));
    };

    if fm.objective.is_some() && !a.all && a.limit.is_none() {
        let o = optimize(&space, &cfg).map_err(|e| CliError::Solver(e.to_string()))?;
        let code = match &o.best {
            Some(s) => {
                show(out, s);
                let _ = writeln!(out, "% {}", if o.proven { "optimal" } else { "best found before the time limit" });
                exit::OK
            }
            None if o.proven => {
                let _ = writeln!(out, "% unsatisfiable");
                exit::INFEASIBLE
            }
            None => {
                let _ = writeln!(out, "% no solution found before the time limit");
                exit::UNKNOWN
            }
        };
        if a.stats {
            print_stats(out, &o.stats);
        }
        return Ok(code);
    }

    cfg.solution_limit = if a.all { None } else { Some(a.limit.unwrap_or(1)) };
    let mut search = solve(&space, &cfg);
    let mut found = 0usize;
    let mut stopped = None;
    for ev in search.by_ref() {
        match ev.map_err(|e| CliError::Solver(e.to_string()))? {
            Event::Solution(s) => {
                if found > 0 {
                    let _ = writeln!(out, "% ----------");
                }
                found += 1;
                show(out, &s);
            }
            Event::Truncated(l) => stopped = Some(l),
        }
    }
    let plural = if found == 1 { "" } else { "s" };
    let code = match (found, stopped) {
        (0, None) => {
            let _ = writeln!(out, "% unsatisfiable");
            exit::INFEASIBLE
        }
        (0, Some(_)) => {
            let _ = writeln!(out, "% no solution found before the time limit");
            exit::UNKNOWN
        }
        (n, None) => {
            let _ = writeln!(out, "% search complete: {n} solution{plural}");
            exit::OK
        }
        (n, Some(Limit::Solutions)) => {
            let _ = writeln!(out, "% stopped after {n} solution{plural}; more exist");
            exit::OK
        }
        (n, Some(Limit::Time)) => {
            let _ = writeln!(out, "% stopped by the time limit after {n} solution{plural}");
            exit::OK
        }
    };
    if a.stats {
        print_stats(out, &search.stats());
    }
    Ok(code)
}
