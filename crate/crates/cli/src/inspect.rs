use std::io::Write;

use scomma_core::backend::Origin;
use scomma_core::syntax::count_tokens;

use crate::bench::{compile_entry, emit_all};
use crate::{exit, targets, CliError, Input};

pub(crate) fn run(a: &Input, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let (c, model_tokens, data_tokens) = compile_entry(&a.model, a.data.as_deref())?;
    let fm = &c.flat;
    let cells: usize = fm.variables.iter().map(|v| v.len()).sum();
    let _ = writeln!(out, "model: {}", fm.name);
    let _ = writeln!(out, "variables: {} ({cells} cells)", fm.variables.len());
    let _ = writeln!(out, "constants: {}", fm.tables.len());
    let _ = writeln!(out, "constraints: {}", fm.constraints.len());
    match &fm.objective {
        Some(o) => {
            let _ = writeln!(out, "objective: {} {}", o.kind.keyword(), o.expr);
        }
        None => {
            let _ = writeln!(out, "objective: none");
        }
    }
    for (name, labels) in &fm.enum_types {
        let _ = writeln!(out, "enum {name}: {} values", labels.len());
    }
    let _ = writeln!(out, "\npasses (nodes before -> after):");
    let _ = write!(out, "{}", c.trace);
    let _ = writeln!(out, "\ntokens:");
    let _ = writeln!(out, "  {:<12} {model_tokens}", "model");
    let _ = writeln!(out, "  {:<12} {data_tokens}", "data");
    for (name, r) in emit_all(fm, &targets(err)?) {
        match r {
            Ok(text) => {
                let _ = writeln!(out, "  {name:<12} {}", count_tokens(&text));
            }
            Err(msg) => {
                let _ = writeln!(out, "  {name:<12} not emitted: {msg}");
            }
        }
    }
    Ok(exit::OK)
}

pub(crate) fn list(out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    for (name, t) in &targets(err)?.targets {
        let from = match &t.origin {
            Origin::Builtin => "built in".to_string(),
            Origin::File(p) => p.display().to_string(),
        };
        let _ = writeln!(out, "{name:<12} .{:<6} {from}", t.descriptor.file_extension);
    }
    Ok(exit::OK)
}
