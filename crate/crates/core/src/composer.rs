//! Slot filling and channel validation of rendered messages.
//!
//! Over-budget text is reported, never truncated. Text that only fits thanks
//! to a channel's extension allowance produces a warning, which does not fail
//! the report.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain_model::{
    budget_status, check_structure, count_symbols, BudgetStatus, CharacterBudget, Ident,
    StructuralPartKind, StructureVerdict, TemplateSpec,
};
use crate::template_dsl::Segment;

const DEFAULT_CHANNELS_JSON: &str = include_str!("../assets/default_channels.json");

/// Budgets and required parts of one advertising channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChannelProfile {
    id: Ident,
    display_name: String,
    budgets: BTreeMap<StructuralPartKind, CharacterBudget>,
    required: BTreeSet<StructuralPartKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("channel '{channel}' requires part '{part}' but has no budget for it")]
    RequiredWithoutBudget {
        channel: Ident,
        part: StructuralPartKind,
    },
    #[error("duplicate channel id '{0}'")]
    DuplicateId(Ident),
}

impl ChannelProfile {
    pub fn new(
        id: Ident,
        display_name: impl Into<String>,
        budgets: BTreeMap<StructuralPartKind, CharacterBudget>,
        required: BTreeSet<StructuralPartKind>,
    ) -> Result<Self, ProfileError> {
        if let Some(part) = required.iter().find(|k| !budgets.contains_key(k)) {
            return Err(ProfileError::RequiredWithoutBudget {
                channel: id,
                part: *part,
            });
        }
        Ok(Self {
            id,
            display_name: display_name.into(),
            budgets,
            required,
            notes: None,
        })
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = Some(notes.into());
        self
    }

    pub fn id(&self) -> &Ident {
        &self.id
    }

    pub fn display_name(&self) -> &str {
        &self.display_name
    }

    pub fn budget(&self, kind: StructuralPartKind) -> Option<CharacterBudget> {
        self.budgets.get(&kind).copied()
    }

    pub fn budgets(&self) -> &BTreeMap<StructuralPartKind, CharacterBudget> {
        &self.budgets
    }

    pub fn required_parts(&self) -> &BTreeSet<StructuralPartKind> {
        &self.required
    }
}

/// On-disk channel file: `{"channels": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub channels: Vec<ChannelEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelEntry {
    pub id: Ident,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_name: Option<String>,
    /// Keyed by part kind name; unknown names are rejected on conversion.
    pub budgets: BTreeMap<String, CharacterBudget>,
    #[serde(default)]
    pub required: BTreeSet<StructuralPartKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

/// Error converting a channel file into profiles; `path` is a JSON path.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct ChannelSchemaError {
    pub path: String,
    pub message: String,
}

impl ChannelFile {
    pub fn into_profiles(self) -> Result<Vec<ChannelProfile>, ChannelSchemaError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(self.channels.len());
        for (i, entry) in self.channels.into_iter().enumerate() {
            if !seen.insert(entry.id.clone()) {
                return Err(ChannelSchemaError {
                    path: format!("channels[{i}].id"),
                    message: ProfileError::DuplicateId(entry.id).to_string(),
                });
            }
            let mut budgets = BTreeMap::new();
            for (name, budget) in entry.budgets {
                let kind = name
                    .parse::<StructuralPartKind>()
                    .map_err(|e| ChannelSchemaError {
                        path: format!("channels[{i}].budgets.{name}"),
                        message: e.to_string(),
                    })?;
                budgets.insert(kind, budget);
            }
            let name = entry
                .display_name
                .unwrap_or_else(|| entry.id.as_str().to_owned());
            let mut profile = ChannelProfile::new(entry.id, name, budgets, entry.required)
                .map_err(|e| ChannelSchemaError {
                    path: format!("channels[{i}].required"),
                    message: e.to_string(),
                })?;
            profile.notes = entry.notes;
            out.push(profile);
        }
        Ok(out)
    }

    pub fn from_profiles(profiles: &[ChannelProfile]) -> Self {
        Self {
            channels: profiles
                .iter()
                .map(|p| ChannelEntry {
                    id: p.id.clone(),
                    display_name: Some(p.display_name.clone()),
                    budgets: p
                        .budgets
                        .iter()
                        .map(|(k, b)| (k.as_str().to_owned(), *b))
                        .collect(),
                    required: p.required.clone(),
                    notes: p.notes.clone(),
                })
                .collect(),
        }
    }
}

/// The shipped profiles: `google_adwords` and `yandex_direct`.
pub fn default_channel_profiles() -> Vec<ChannelProfile> {
    let file: ChannelFile =
        serde_json::from_str(DEFAULT_CHANNELS_JSON).expect("bundled channel file is valid JSON");
    file.into_profiles()
        .expect("bundled channel file is a valid profile set")
}

pub fn default_channels_json() -> &'static str {
    DEFAULT_CHANNELS_JSON
}

/// A rendered communication message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Message {
    pub template_id: Ident,
    pub parts: BTreeMap<StructuralPartKind, String>,
    /// Bindings that were actually used.
    pub bindings: BTreeMap<Ident, String>,
}

impl Message {
    /// Parts in canonical order, one per line.
    pub fn plain_text(&self) -> String {
        self.parts.values().cloned().collect::<Vec<_>>().join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub message: Message,
    /// Supplied binding names that no slot uses, sorted.
    pub unused_bindings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("missing bindings for slots: {}", names.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(", "))]
pub struct MissingSlots {
    pub names: BTreeSet<Ident>,
}

/// Replaces every slot with its binding. Fails with the full set of unbound
/// slot names; binding values are inserted verbatim.
pub fn fill_slots(
    spec: &TemplateSpec,
    bindings: &BTreeMap<String, String>,
) -> Result<Rendered, MissingSlots> {
    let missing: BTreeSet<Ident> = spec
        .parts()
        .iter()
        .flat_map(|p| p.pattern.slot_names())
        .filter(|n| !bindings.contains_key(n.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(MissingSlots { names: missing });
    }
    let mut used = BTreeMap::new();
    let mut parts = BTreeMap::new();
    for part in spec.parts() {
        let mut text = String::new();
        for seg in part.pattern.segments() {
            match seg {
                Segment::Literal(l) => text.push_str(l),
                Segment::Slot(name) => {
                    let value = &bindings[name.as_str()];
                    text.push_str(value);
                    used.insert(name.clone(), value.clone());
                }
            }
        }
        parts.insert(part.kind, text);
    }
    let unused_bindings = bindings
        .keys()
        .filter(|k| !used.contains_key(k.as_str()))
        .cloned()
        .collect();
    Ok(Rendered {
        message: Message {
            template_id: spec.id().clone(),
            parts,
            bindings: used,
        },
        unused_bindings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationRule {
    BudgetExceeded,
    MissingParts,
    WithinExtension,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub part: Option<StructuralPartKind>,
    pub rule: ViolationRule,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<u64>,
    #[serde(skip_serializing_if = "BTreeSet::is_empty")]
    pub missing: BTreeSet<StructuralPartKind>,
}

/// Measured length of one rendered part against its effective budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartCheck {
    pub part: StructuralPartKind,
    pub text: String,
    pub count: usize,
    pub base: u32,
    pub extension: u32,
    pub limit: u64,
    pub status: BudgetStatus,
}

/// `verdict` is `Pass` iff `violations` is empty. Warnings never fail a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub parts: Vec<PartCheck>,
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidateError {
    #[error("message was rendered from template '{message}', not '{spec}'")]
    TemplateMismatch { message: Ident, spec: Ident },
    #[error("message has part '{0}' that the template does not declare")]
    UndeclaredPart(StructuralPartKind),
}

/// Checks a rendered message against a channel. Each part is measured against
/// the channel's budget for that part, falling back to the template's own
/// budget when the channel has none.
pub fn validate_message(
    msg: &Message,
    spec: &TemplateSpec,
    profile: &ChannelProfile,
) -> Result<ValidationReport, ValidateError> {
    if msg.template_id != *spec.id() {
        return Err(ValidateError::TemplateMismatch {
            message: msg.template_id.clone(),
            spec: spec.id().clone(),
        });
    }
    let mut parts = Vec::new();
    let mut violations = Vec::new();
    let mut warnings = Vec::new();
    for (&kind, text) in &msg.parts {
        let declared = spec.part(kind).ok_or(ValidateError::UndeclaredPart(kind))?;
        let budget = profile.budget(kind).unwrap_or(declared.budget);
        let count = count_symbols(text);
        let status = budget_status(count, budget);
        match status {
            BudgetStatus::WithinBase => {}
            BudgetStatus::WithinExtension => warnings.push(Violation {
                part: Some(kind),
                rule: ViolationRule::WithinExtension,
                detail: format!(
                    "{count} > base {}, within extended limit {}",
                    budget.base,
                    budget.limit()
                ),
                count: Some(count),
                limit: Some(budget.limit()),
                missing: BTreeSet::new(),
            }),
            BudgetStatus::Exceeded => violations.push(Violation {
                part: Some(kind),
                rule: ViolationRule::BudgetExceeded,
                detail: format!("{count} > {}", budget.limit()),
                count: Some(count),
                limit: Some(budget.limit()),
                missing: BTreeSet::new(),
            }),
        }
        parts.push(PartCheck {
            part: kind,
            text: text.clone(),
            count,
            base: budget.base,
            extension: budget.extension,
            limit: budget.limit(),
            status,
        });
    }
    let present = msg.parts.keys().copied().collect();
    if let StructureVerdict::Missing(missing) = check_structure(&present, profile.required_parts())
    {
        let names: Vec<_> = missing.iter().map(|k| k.as_str()).collect();
        violations.push(Violation {
            part: None,
            rule: ViolationRule::MissingParts,
            detail: format!("missing required parts: {}", names.join(", ")),
            count: None,
            limit: None,
            missing,
        });
    }
    let verdict = if violations.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ValidationReport {
        verdict,
        parts,
        violations,
        warnings,
    })
}
