//! The communication-message model: semantics, format, budget and structure.
//!
//! A [`TemplateSpec`] carries all four parameters of a message template:
//! per-part semantic tags, a stylistic format per part, a character budget per
//! part and the ordered list of structural parts itself.
//!
//! Lengths are counted in Unicode code points. This is deterministic and close
//! to what ad platforms count for Latin and Cyrillic text, but it diverges from
//! some platforms for emoji and combining sequences (one user-perceived glyph
//! may be several code points). Whitespace and punctuation count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::template_dsl::Pattern;

/// Returns true if `s` matches `[a-z][a-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid identifier {0:?}: expected [a-z][a-z0-9_]*")]
pub struct InvalidIdentifier(pub String);

macro_rules! identifier_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Result<Self, InvalidIdentifier> {
                let name = name.into();
                if is_identifier(&name) {
                    Ok(Self(name))
                } else {
                    Err(InvalidIdentifier(name))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl TryFrom<String> for $name {
            type Error = InvalidIdentifier;
            fn try_from(value: String) -> Result<Self, Self::Error> {
                Self::new(value)
            }
        }

        impl TryFrom<&str> for $name {
            type Error = InvalidIdentifier;
            fn try_from(value: &str) -> Result<Self, Self::Error> {
                Self::new(value)
            }
        }

        impl From<$name> for String {
            fn from(value: $name) -> String {
                value.0
            }
        }

        impl FromStr for $name {
            type Err = InvalidIdentifier;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::new(s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

identifier_type!(
    /// Generic lowercase identifier: template ids, channel ids, attribute and slot names.
    Ident
);
identifier_type!(
    /// Meaning role of a message part.
    SemanticTag
);
identifier_type!(
    /// Stylistic device of a message part.
    Format
);

/// Semantic tags shipped with the toolchain.
pub const SHIPPED_SEMANTIC_TAGS: &[&str] = &[
    "attention_draw",
    "audience_address",
    "usp_focus",
    "main_argument",
    "call_to_action",
    "contact_data",
    "reinforcement",
];

/// Formats shipped with the toolchain.
pub const SHIPPED_FORMATS: &[&str] = &[
    "argument",
    "invitation_to_action",
    "problem_appeal",
    "question",
    "statement",
];

/// A closed set of formats that templates may use.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct FormatVocabulary(BTreeSet<Format>);

impl FormatVocabulary {
    pub fn shipped() -> Self {
        Self(
            SHIPPED_FORMATS
                .iter()
                .map(|f| Format::new(*f).expect("shipped format is an identifier"))
                .collect(),
        )
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn insert(&mut self, format: Format) -> bool {
        self.0.insert(format)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Format> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<Format> for FormatVocabulary {
    fn from_iter<I: IntoIterator<Item = Format>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Attribute value shared by facts and template metadata.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Str(String),
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_owned())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

/// Character allowance for one structural part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterBudget {
    pub base: u32,
    #[serde(default)]
    pub extension: u32,
}

impl CharacterBudget {
    pub const fn new(base: u32, extension: u32) -> Self {
        Self { base, extension }
    }

    /// Effective limit: base plus extension.
    pub fn limit(&self) -> u64 {
        u64::from(self.base) + u64::from(self.extension)
    }
}

impl fmt::Display for CharacterBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.extension == 0 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}+{}", self.base, self.extension)
        }
    }
}

/// The five structural parts of a message. Declaration order is canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructuralPartKind {
    Tagline,
    Title,
    MainText,
    ReferenceInfo,
    EchoPhrase,
}

impl StructuralPartKind {
    pub const ALL: [StructuralPartKind; 5] = [
        StructuralPartKind::Tagline,
        StructuralPartKind::Title,
        StructuralPartKind::MainText,
        StructuralPartKind::ReferenceInfo,
        StructuralPartKind::EchoPhrase,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StructuralPartKind::Tagline => "tagline",
            StructuralPartKind::Title => "title",
            StructuralPartKind::MainText => "main_text",
            StructuralPartKind::ReferenceInfo => "reference_info",
            StructuralPartKind::EchoPhrase => "echo_phrase",
        }
    }
}

impl fmt::Display for StructuralPartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown part kind {0:?}")]
pub struct UnknownPartKind(pub String);

impl FromStr for StructuralPartKind {
    type Err = UnknownPartKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StructuralPartKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownPartKind(s.to_owned()))
    }
}

/// One structural part of a template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartSpec {
    pub kind: StructuralPartKind,
    pub semantics: BTreeSet<SemanticTag>,
    pub format: Format,
    pub budget: CharacterBudget,
    pub pattern: Pattern,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("part {0} appears more than once")]
    DuplicatePart(StructuralPartKind),
    #[error("part {later} must come before part {earlier}")]
    PartOrder {
        earlier: StructuralPartKind,
        later: StructuralPartKind,
    },
    #[error("part {0} must declare at least one semantic tag")]
    EmptySemantics(StructuralPartKind),
}

/// A communication-message template: the semantics/format/budget/structure tuple
/// plus the channel it targets and metadata used for recommendation matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemplateSpec {
    id: Ident,
    channel: Ident,
    parts: Vec<PartSpec>,
    metadata: BTreeMap<Ident, Value>,
}

impl TemplateSpec {
    pub fn new(
        id: Ident,
        channel: Ident,
        parts: Vec<PartSpec>,
        metadata: BTreeMap<Ident, Value>,
    ) -> Result<Self, SpecError> {
        for pair in parts.windows(2) {
            let (a, b) = (pair[0].kind, pair[1].kind);
            if a == b {
                return Err(SpecError::DuplicatePart(a));
            }
            if a > b {
                return Err(SpecError::PartOrder {
                    earlier: a,
                    later: b,
                });
            }
        }
        if let Some(p) = parts
            .iter()
            .find(|p| p.semantics.is_empty() && p.kind != StructuralPartKind::ReferenceInfo)
        {
            return Err(SpecError::EmptySemantics(p.kind));
        }
        Ok(Self {
            id,
            channel,
            parts,
            metadata,
        })
    }

    pub fn id(&self) -> &Ident {
        &self.id
    }

    pub fn channel(&self) -> &Ident {
        &self.channel
    }

    /// Parts in canonical structure order.
    pub fn parts(&self) -> &[PartSpec] {
        &self.parts
    }

    pub fn part(&self, kind: StructuralPartKind) -> Option<&PartSpec> {
        self.parts.iter().find(|p| p.kind == kind)
    }

    pub fn metadata(&self) -> &BTreeMap<Ident, Value> {
        &self.metadata
    }

    pub fn part_kinds(&self) -> BTreeSet<StructuralPartKind> {
        self.parts.iter().map(|p| p.kind).collect()
    }
}

/// Number of Unicode code points in `text`.
pub fn count_symbols(text: &str) -> usize {
    text.chars().count()
}

/// Ordered `WithinBase < WithinExtension < Exceeded`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetStatus {
    WithinBase,
    WithinExtension,
    Exceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BudgetVerdict {
    pub status: BudgetStatus,
    pub count: usize,
}

pub fn check_budget(text: &str, budget: CharacterBudget) -> BudgetVerdict {
    let count = count_symbols(text);
    BudgetVerdict {
        status: budget_status(count, budget),
        count,
    }
}

pub fn budget_status(count: usize, budget: CharacterBudget) -> BudgetStatus {
    let count = count as u64;
    if count <= u64::from(budget.base) {
        BudgetStatus::WithinBase
    } else if count <= budget.limit() {
        BudgetStatus::WithinExtension
    } else {
        BudgetStatus::Exceeded
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "missing", rename_all = "snake_case")]
pub enum StructureVerdict {
    Complete,
    Missing(BTreeSet<StructuralPartKind>),
}

pub fn check_structure(
    present: &BTreeSet<StructuralPartKind>,
    required: &BTreeSet<StructuralPartKind>,
) -> StructureVerdict {
    let missing: BTreeSet<_> = required.difference(present).copied().collect();
    if missing.is_empty() {
        StructureVerdict::Complete
    } else {
        StructureVerdict::Missing(missing)
    }
}
