//! The `.cmt` template format: parser, canonical serializer and slot listing.
//!
//! ```text
//! template "ad_b2b_pain" {
//!   channel: "google_adwords"
//!   meta audience: "b2b"
//!   part title {
//!     semantics: [attention_draw, usp_focus]
//!     format: question
//!     budget: 60          # or base+extension, e.g. 35+30
//!     text: "Is {pain_point} slowing your team down?"
//!   }
//! }
//! ```
//!
//! One template per file. Comments run from `#` to end of line. Strings are
//! double-quoted and accept `\"`, `\\`, `\n`, `\t`, `\r` and `\u{XXXX}`
//! escapes; raw newlines are not allowed inside strings. Inside `text`,
//! `{name}` is a slot and `{{` / `}}` are literal braces.

mod lexer;
mod parser;
mod pattern;

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::domain_model::{FormatVocabulary, Ident, StructuralPartKind, TemplateSpec, Value};

pub use pattern::{Pattern, PatternError, PatternErrorKind, Segment};

/// 1-based line and column (columns count code points).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSource {
    pub text: String,
    /// File path, or `<memory>`.
    pub origin: String,
}

impl TemplateSource {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            origin: origin.into(),
        }
    }

    pub fn in_memory(text: impl Into<String>) -> Self {
        Self::new(text, "<memory>")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl ParseDiagnostic {
    pub(crate) fn error(message: impl Into<String>, pos: Position) -> Self {
        Self {
            severity: Severity::Error,
            message: message.into(),
            line: pos.line,
            column: pos.column,
        }
    }

    pub(crate) fn warning(message: impl Into<String>, pos: Position) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(message, pos)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line, self.column, self.severity, self.message
        )
    }
}

/// Result of parsing with warnings retained. `spec` is `Some` iff no
/// diagnostic has error severity.
#[derive(Debug, Clone)]
pub struct ParseOutput {
    pub spec: Option<TemplateSpec>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseOutput {
    pub fn into_result(self) -> Result<TemplateSpec, Vec<ParseDiagnostic>> {
        self.spec.ok_or(self.diagnostics)
    }
}

/// Parses a template against the shipped format vocabulary. Warnings are
/// dropped on success.
pub fn parse_template(source: &TemplateSource) -> Result<TemplateSpec, Vec<ParseDiagnostic>> {
    parse_template_with(source, &FormatVocabulary::shipped()).into_result()
}

pub fn parse_template_with(source: &TemplateSource, formats: &FormatVocabulary) -> ParseOutput {
    parser::parse(&source.text, formats)
}

/// Parses raw bytes, reporting invalid UTF-8 as a positioned diagnostic.
pub fn parse_bytes(bytes: &[u8], formats: &FormatVocabulary) -> ParseOutput {
    match std::str::from_utf8(bytes) {
        Ok(text) => parser::parse(text, formats),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).expect("valid prefix");
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            ParseOutput {
                spec: None,
                diagnostics: vec![ParseDiagnostic::error(
                    "invalid UTF-8",
                    Position { line, column },
                )],
            }
        }
    }
}

/// Renders `spec` in canonical `.cmt` form.
pub fn serialize_template(spec: &TemplateSpec) -> TemplateSource {
    let mut out = String::new();
    let _ = writeln!(out, "template {} {{", quote(spec.id().as_str()));
    let _ = writeln!(out, "  channel: {}", quote(spec.channel().as_str()));
    for (key, value) in spec.metadata() {
        let value = match value {
            Value::Str(s) => quote(s),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
        };
        let _ = writeln!(out, "  meta {key}: {value}");
    }
    for part in spec.parts() {
        let tags: Vec<&str> = part.semantics.iter().map(|t| t.as_str()).collect();
        let _ = writeln!(out, "  part {} {{", part.kind);
        let _ = writeln!(out, "    semantics: [{}]", tags.join(", "));
        let _ = writeln!(out, "    format: {}", part.format);
        let _ = writeln!(out, "    budget: {}", part.budget);
        let _ = writeln!(out, "    text: {}", quote(&part.pattern.to_source()));
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    TemplateSource::new(out, "<memory>")
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// One slot occurrence. `line`/`column` locate it in the pattern's source form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub name: Ident,
    pub part: StructuralPartKind,
    pub line: usize,
    pub column: usize,
}

/// Slot occurrences in document order, one entry per occurrence.
pub fn list_slots(spec: &TemplateSpec) -> Vec<Slot> {
    spec.parts()
        .iter()
        .flat_map(|part| {
            part.pattern
                .slot_positions()
                .into_iter()
                .map(move |(name, line, column)| Slot {
                    name: name.clone(),
                    part: part.kind,
                    line,
                    column,
                })
        })
        .collect()
}
