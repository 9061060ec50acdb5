//! Source locations and compiler diagnostics.

use std::fmt;
use std::sync::Arc;

/// A location inside one input file. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
    pub length: u32,
    /// Byte offset of the first character.
    pub offset: usize,
}

impl SourceSpan {
    pub fn new(file: Arc<str>, line: u32, column: u32, length: u32, offset: usize) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceSpan {
            file,
            line,
            column,
            length,
            offset,
        }
    }

    /// A placeholder location for synthesized nodes.
    pub fn synthetic() -> Self {
        SourceSpan {
            file: Arc::from("<synthetic>"),
            line: 1,
            column: 1,
            length: 0,
            offset: 0,
        }
    }

    /// Smallest span covering `self` and `other` (both in the same file).
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        if other.offset < self.offset {
            return other.to(self);
        }
        let end = (other.offset + other.length as usize).max(self.offset + self.length as usize);
        SourceSpan {
            file: self.file.clone(),
            line: self.line,
            column: self.column,
            length: (end - self.offset) as u32,
            offset: self.offset,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// A message attached to a source location. Errors abort compilation, warnings do not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    pub fn error(span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            span,
        }
    }

    pub fn warning(span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    /// Renders as `file:line:col: severity: message`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.severity, self.message)
    }
}

/// A non-empty batch of diagnostics containing at least one error.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.is_error())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Diagnostic> {
        self.0.iter()
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl From<Diagnostic> for Diagnostics {
    fn from(d: Diagnostic) -> Self {
        Diagnostics(vec![d])
    }
}
