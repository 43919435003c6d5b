use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::domain_model::Ident;

/// A piece of pattern text: either literal text or a `{name}` slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Segment {
    Literal(String),
    Slot(Ident),
}

/// Slot-bearing text of one message part.
///
/// Literal runs are merged and empty literals dropped, so structurally equal
/// patterns have identical segment lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Pattern {
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternErrorKind {
    #[error("unclosed slot")]
    UnclosedSlot,
    #[error("invalid slot name {0:?}: expected [a-z][a-z0-9_]*")]
    InvalidSlotName(String),
    #[error("unmatched '}}' (write '}}}}' for a literal brace)")]
    UnmatchedClose,
}

/// Pattern syntax error. `offset` is the code-point index of the offending brace.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct PatternError {
    pub kind: PatternErrorKind,
    pub offset: usize,
}

impl Pattern {
    pub fn literal(text: impl Into<String>) -> Self {
        Self::from_segments([Segment::Literal(text.into())])
    }

    pub fn from_segments(segments: impl IntoIterator<Item = Segment>) -> Self {
        let mut out: Vec<Segment> = Vec::new();
        for seg in segments {
            match seg {
                Segment::Literal(s) if s.is_empty() => {}
                Segment::Literal(s) => match out.last_mut() {
                    Some(Segment::Literal(prev)) => prev.push_str(&s),
                    _ => out.push(Segment::Literal(s)),
                },
                slot => out.push(slot),
            }
        }
        Self { segments: out }
    }

    /// Parses slot syntax: `{name}` is a slot, `{{` and `}}` are literal braces.
    pub fn parse(text: &str) -> Result<Self, PatternError> {
        let chars: Vec<char> = text.chars().collect();
        let mut segments = Vec::new();
        let mut literal = String::new();
        let mut i = 0;
        while i < chars.len() {
            match chars[i] {
                '{' if chars.get(i + 1) == Some(&'{') => {
                    literal.push('{');
                    i += 2;
                }
                '}' if chars.get(i + 1) == Some(&'}') => {
                    literal.push('}');
                    i += 2;
                }
                '}' => {
                    return Err(PatternError {
                        kind: PatternErrorKind::UnmatchedClose,
                        offset: i,
                    })
                }
                '{' => {
                    let start = i;
                    let mut j = i + 1;
                    while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                        j += 1;
                    }
                    let close = if chars.get(j) == Some(&'}') {
                        Some(j)
                    } else {
                        // No closing brace right after the name: it is an invalid
                        // name if a '}' still follows before the next '{'.
                        chars[j..]
                            .iter()
                            .position(|&c| c == '}' || c == '{')
                            .map(|p| j + p)
                            .filter(|&p| chars[p] == '}')
                    };
                    let Some(close) = close else {
                        return Err(PatternError {
                            kind: PatternErrorKind::UnclosedSlot,
                            offset: start,
                        });
                    };
                    let name: String = chars[start + 1..close].iter().collect();
                    let ident = Ident::new(name.clone()).map_err(|_| PatternError {
                        kind: PatternErrorKind::InvalidSlotName(name),
                        offset: start,
                    })?;
                    segments.push(Segment::Literal(std::mem::take(&mut literal)));
                    segments.push(Segment::Slot(ident));
                    i = close + 1;
                }
                c => {
                    literal.push(c);
                    i += 1;
                }
            }
        }
        segments.push(Segment::Literal(literal));
        Ok(Self::from_segments(segments))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn slot_names(&self) -> impl Iterator<Item = &Ident> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Slot(name) => Some(name),
            Segment::Literal(_) => None,
        })
    }

    pub fn has_slots(&self) -> bool {
        self.slot_names().next().is_some()
    }

    /// Code points of literal (unescaped) text, excluding slots.
    pub fn literal_len(&self) -> usize {
        self.segments
            .iter()
            .map(|s| match s {
                Segment::Literal(l) => l.chars().count(),
                Segment::Slot(_) => 0,
            })
            .sum()
    }

    /// Source form with braces escaped; `Pattern::parse(&p.to_source()) == Ok(p)`.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Literal(l) => {
                    for c in l.chars() {
                        match c {
                            '{' => out.push_str("{{"),
                            '}' => out.push_str("}}"),
                            c => out.push(c),
                        }
                    }
                }
                Segment::Slot(name) => {
                    out.push('{');
                    out.push_str(name.as_str());
                    out.push('}');
                }
            }
        }
        out
    }

    /// Slot occurrences with their 1-based (line, column) in the source form.
    pub fn slot_positions(&self) -> Vec<(&Ident, usize, usize)> {
        let mut out = Vec::new();
        let (mut line, mut col) = (1, 1);
        let advance = |c: char, line: &mut usize, col: &mut usize| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        for seg in &self.segments {
            match seg {
                Segment::Literal(l) => {
                    for c in l.chars() {
                        advance(c, &mut line, &mut col);
                        if c == '{' || c == '}' {
                            advance(c, &mut line, &mut col);
                        }
                    }
                }
                Segment::Slot(name) => {
                    out.push((name, line, col));
                    col += name.as_str().len() + 2;
                }
            }
        }
        out
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_source())
    }
}

impl Serialize for Pattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_source())
    }
}
