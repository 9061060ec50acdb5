use std::io::Write;

use scomma_core::check_solution;
use scomma_core::syntax::parse_solution;

use crate::{exit, load, CheckArgs, CliError};

pub(crate) fn run(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let c = load(&a.input)?;
    let text = std::fs::read_to_string(&a.solution).map_err(|e| CliError::io(&a.solution, e))?;
    let sol = parse_solution(&text, &a.solution.display().to_string(), &c.flat)?;
    let report = check_solution(&c.flat, &sol).map_err(|e| CliError::Solver(e.to_string()))?;
    if report.is_satisfied() {
        let _ = writeln!(out, "satisfied: {} constraints", c.flat.constraints.len());
        return Ok(exit::OK);
    }
    for v in &report.violations {
        let _ = writeln!(out, "violated: {}", v.text);
    }
    let _ = writeln!(out, "{} violation(s)", report.violations.len());
    Ok(exit::DIAGNOSTICS)
}
