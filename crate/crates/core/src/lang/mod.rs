//! The planner's domain language: parsing, printing, validation and plan
//! rendering.

mod format;
mod lexer;
mod parser;
mod printer;
mod validate;

use std::fmt;

pub use format::{plan_from_json, render_dot, render_json, PlanFormat};
pub use lexer::{lex_line, LexError, Tok, Token};
pub use parser::{cartesian, parse_cell};
pub use printer::print_unit;
pub use validate::validate;

use crate::ast::{DomainSpec, ProblemSpec, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: SourceSpan,
    pub message: String,
    /// Tokens that would have been accepted, for syntax errors.
    pub expected: Vec<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}: {}", self.span, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct ParsedUnit {
    pub domain: DomainSpec,
    pub problem: ProblemSpec,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParsedUnit {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }
}

/// Parses a combined domain-and-problem text.
pub fn parse(text: &str) -> ParsedUnit {
    parse_named(&[("input", text)])
}

/// Parses several files as one unit (typically a domain file followed by a
/// problem file). Semantic validation runs when the text is free of errors,
/// without checking that feasibility predicates are registered.
pub fn parse_named(sources: &[(&str, &str)]) -> ParsedUnit {
    let mut unit = parser::parse_sources(sources);
    if !unit.has_errors() {
        let extra = validate(&unit.domain, &unit.problem, None);
        unit.diagnostics.extend(extra);
    }
    unit
}
