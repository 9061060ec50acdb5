use std::io::Write;
use std::path::{Path, PathBuf};

use scomma_core::backend::{builtin, direct_emit, emit, load_descriptor, BackendDescriptor};

use crate::{exit, load, targets, write_file, CliError, CompileArgs};

fn descriptor(a: &CompileArgs, err: &mut dyn Write) -> Result<BackendDescriptor, CliError> {
    match &a.target {
        None => Ok(builtin("flat").expect("flat is built in")),
        Some(t) if t.ends_with(".bd") => Ok(load_descriptor(Path::new(t))?),
        Some(t) => Ok(targets(err)?.get(t)?.clone()),
    }
}

/// `--out` names a file, an existing directory, or `-`. Without it the file
/// goes to the current directory, named after the model.
fn destination(out: Option<&Path>, model: &str, ext: &str) -> Option<PathBuf> {
    let file = format!("{model}.{ext}");
    match out {
        Some(p) if p == Path::new("-") => None,
        Some(p) if p.is_dir() => Some(p.join(file)),
        Some(p) => Some(p.to_path_buf()),
        None => Some(PathBuf::from(file)),
    }
}

pub(crate) fn run(a: &CompileArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let bd = descriptor(a, err)?;
    let c = load(&a.input)?;
    if a.trace {
        let _ = write!(err, "{}", c.trace);
    }
    let text = if a.no_rewrites {
        direct_emit(&c.flat, &bd)?
    } else {
        emit(&c.flat, &bd)?
    };
    match destination(a.out.as_deref(), &c.flat.name, &bd.file_extension) {
        Some(path) => write_file(&path, &text)?,
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("-"), e))?,
    }
    Ok(exit::OK)
}
