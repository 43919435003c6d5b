//! Request and response bodies shared by the HTTP endpoints and the CLI's
//! `--json` output, and the operations that produce them.

use std::collections::{BTreeMap, BTreeSet};
use std::num::NonZeroUsize;
use std::path::Path;

use cmf_core::catalog_store::{parse_json, ConfigError};
use cmf_core::composer::{fill_slots, validate_message, ChannelFile, ValidationReport};
use cmf_core::recommender::{recommend, Recommendation, REC_PREFIX};
use cmf_core::rule_engine::{Fact, FactBase, Test};
use cmf_core::{
    CharacterBudget, Format, Ident, SemanticTag, StructuralPartKind, TemplateSpec, Value,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::snapshot::Snapshot;

pub const DEFAULT_RULESET: &str = "demo";
pub const DEFAULT_K: u64 = 5;
/// Suggested delay before a client re-validates while the user types.
pub const VALIDATE_DEBOUNCE_MS: u64 = 300;
pub const API_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Body is not JSON.
    MalformedJson,
    /// Body is JSON but does not fit the request schema.
    ValidationSchema,
    FactConflict,
    UnknownRuleset,
    UnknownTemplate,
    UnknownChannel,
    MissingSlots,
    NotFound,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 8] = [
        ErrorCode::MalformedJson,
        ErrorCode::ValidationSchema,
        ErrorCode::FactConflict,
        ErrorCode::UnknownRuleset,
        ErrorCode::UnknownTemplate,
        ErrorCode::UnknownChannel,
        ErrorCode::MissingSlots,
        ErrorCode::NotFound,
    ];

    pub fn http_status(self) -> u16 {
        match self {
            ErrorCode::MalformedJson | ErrorCode::ValidationSchema => 400,
            ErrorCode::UnknownRuleset
            | ErrorCode::UnknownTemplate
            | ErrorCode::UnknownChannel
            | ErrorCode::NotFound => 404,
            ErrorCode::FactConflict => 409,
            ErrorCode::MissingSlots => 422,
        }
    }

    /// Bad input is a usage error for the CLI; everything else is a finding.
    pub fn is_usage_error(self) -> bool {
        matches!(self, ErrorCode::MalformedJson | ErrorCode::ValidationSchema)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Error)]
#[error("{message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    pub details: serde_json::Value,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>, details: serde_json::Value) -> Self {
        Self {
            code,
            message: message.into(),
            details,
        }
    }

    fn schema(path: &str, message: impl Into<String>) -> Self {
        Self::new(
            ErrorCode::ValidationSchema,
            message,
            json!({ "path": path }),
        )
    }
}

/// Parses a request body, separating JSON syntax errors from schema errors.
pub fn parse_request<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let text = std::str::from_utf8(body).map_err(|e| {
        ApiError::new(
            ErrorCode::MalformedJson,
            "request body is not valid UTF-8",
            json!({ "byte_offset": e.valid_up_to() }),
        )
    })?;
    parse_json(text, Path::new("request")).map_err(|e| match e {
        ConfigError::Syntax {
            line,
            column,
            message,
            ..
        } => ApiError::new(
            ErrorCode::MalformedJson,
            format!("malformed JSON: {message}"),
            json!({ "line": line, "column": column }),
        ),
        ConfigError::Schema {
            json_path, message, ..
        } => ApiError::schema(&json_path, message),
        ConfigError::Io { message, .. } => {
            ApiError::new(ErrorCode::MalformedJson, message, json!({}))
        }
    })
}

// ---------------------------------------------------------------------------
// Recommend
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommendRequest {
    pub facts: BTreeMap<String, Value>,
    #[serde(default = "default_ruleset")]
    pub ruleset_id: String,
    #[serde(default = "default_k")]
    pub k: u64,
}

fn default_ruleset() -> String {
    DEFAULT_RULESET.to_owned()
}

fn default_k() -> u64 {
    DEFAULT_K
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendResponse {
    pub ruleset_id: Ident,
    pub recommendations: Vec<Recommendation>,
}

pub fn handle_recommend(
    snapshot: &Snapshot,
    request: &RecommendRequest,
) -> Result<RecommendResponse, ApiError> {
    let k = usize::try_from(request.k)
        .ok()
        .and_then(NonZeroUsize::new)
        .ok_or_else(|| ApiError::schema("k", "k must be a positive integer"))?;
    let mut facts = Vec::new();
    for (attribute, value) in &request.facts {
        let attribute = Ident::new(attribute.as_str())
            .map_err(|e| ApiError::schema(&format!("facts.{attribute}"), e.to_string()))?;
        facts.push(Fact::new(attribute, value.clone()));
    }
    let base = FactBase::from_facts(facts).expect("map keys are unique");
    let (ruleset_id, rules) = snapshot
        .rule_sets()
        .get_key_value(request.ruleset_id.as_str())
        .ok_or_else(|| {
            ApiError::new(
                ErrorCode::UnknownRuleset,
                format!("unknown rule set '{}'", request.ruleset_id),
                json!({ "ruleset_id": request.ruleset_id }),
            )
        })?;
    let recommendations =
        recommend(&base, rules, snapshot.catalog().templates(), k).map_err(|e| {
            ApiError::new(
                ErrorCode::FactConflict,
                e.to_string(),
                json!({
                    "rule_id": e.rule_id,
                    "attribute": e.conflict.attribute,
                    "existing": e.conflict.existing,
                    "attempted": e.conflict.attempted,
                }),
            )
        })?;
    Ok(RecommendResponse {
        ruleset_id: ruleset_id.clone(),
        recommendations,
    })
}

// ---------------------------------------------------------------------------
// Validate and render
// ---------------------------------------------------------------------------

/// Body of both `/api/validate` and `/api/render`. The channel defaults to
/// the one the template targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComposeRequest {
    pub template_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_id: Option<String>,
    #[serde(default)]
    pub bindings: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidateResponse {
    pub template_id: Ident,
    pub channel_id: Ident,
    #[serde(flatten)]
    pub report: ValidationReport,
    pub unused_bindings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderResponse {
    pub template_id: Ident,
    pub channel_id: Ident,
    pub parts: BTreeMap<StructuralPartKind, String>,
    pub plain_text: String,
    pub bindings: BTreeMap<Ident, String>,
    pub unused_bindings: Vec<String>,
    pub validation: ValidationReport,
}

pub fn handle_render(
    snapshot: &Snapshot,
    request: &ComposeRequest,
) -> Result<RenderResponse, ApiError> {
    let spec = snapshot
        .catalog()
        .get(&request.template_id)
        .ok_or_else(|| {
            ApiError::new(
                ErrorCode::UnknownTemplate,
                format!("unknown template '{}'", request.template_id),
                json!({ "template_id": request.template_id }),
            )
        })?;
    let channel = request
        .channel_id
        .as_deref()
        .unwrap_or(spec.channel().as_str());
    let profile = snapshot.profile(channel).ok_or_else(|| {
        ApiError::new(
            ErrorCode::UnknownChannel,
            format!("unknown channel '{channel}'"),
            json!({ "channel_id": channel }),
        )
    })?;
    let rendered = fill_slots(spec, &request.bindings).map_err(|e| {
        ApiError::new(
            ErrorCode::MissingSlots,
            e.to_string(),
            json!({ "slots": e.names }),
        )
    })?;
    let validation =
        validate_message(&rendered.message, spec, profile).expect("message rendered from spec");
    let message = rendered.message;
    Ok(RenderResponse {
        template_id: message.template_id.clone(),
        channel_id: profile.id().clone(),
        plain_text: message.plain_text(),
        parts: message.parts,
        bindings: message.bindings,
        unused_bindings: rendered.unused_bindings,
        validation,
    })
}

pub fn handle_validate(
    snapshot: &Snapshot,
    request: &ComposeRequest,
) -> Result<ValidateResponse, ApiError> {
    let r = handle_render(snapshot, request)?;
    Ok(ValidateResponse {
        template_id: r.template_id,
        channel_id: r.channel_id,
        report: r.validation,
        unused_bindings: r.unused_bindings,
    })
}

// ---------------------------------------------------------------------------
// Listings
// ---------------------------------------------------------------------------

pub fn handle_channels(snapshot: &Snapshot) -> ChannelFile {
    let profiles: Vec<_> = snapshot.profiles().cloned().collect();
    ChannelFile::from_profiles(&profiles)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartView {
    pub kind: StructuralPartKind,
    pub semantics: BTreeSet<SemanticTag>,
    pub format: Format,
    pub budget: CharacterBudget,
    pub text: String,
    /// Distinct slot names in order of first use.
    pub slots: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplateView {
    pub id: Ident,
    pub channel: Ident,
    pub metadata: BTreeMap<Ident, Value>,
    pub parts: Vec<PartView>,
    pub slots: Vec<Ident>,
}

impl From<&TemplateSpec> for TemplateView {
    fn from(spec: &TemplateSpec) -> Self {
        let distinct = |names: &mut dyn Iterator<Item = &Ident>| {
            let mut out: Vec<Ident> = Vec::new();
            for n in names {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            out
        };
        let parts = spec
            .parts()
            .iter()
            .map(|p| PartView {
                kind: p.kind,
                semantics: p.semantics.clone(),
                format: p.format.clone(),
                budget: p.budget,
                text: p.pattern.to_source(),
                slots: distinct(&mut p.pattern.slot_names()),
            })
            .collect();
        Self {
            id: spec.id().clone(),
            channel: spec.channel().clone(),
            metadata: spec.metadata().clone(),
            parts,
            slots: distinct(&mut spec.parts().iter().flat_map(|p| p.pattern.slot_names())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplatesResponse {
    pub templates: Vec<TemplateView>,
}

pub fn handle_templates(snapshot: &Snapshot) -> TemplatesResponse {
    TemplatesResponse {
        templates: snapshot
            .catalog()
            .templates()
            .map(TemplateView::from)
            .collect(),
    }
}

/// An input attribute a rule set tests, with the values its conditions name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactField {
    pub attribute: Ident,
    pub values: BTreeSet<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RulesetInfo {
    pub id: Ident,
    pub rules: usize,
    pub fact_fields: Vec<FactField>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigResponse {
    pub api_version: &'static str,
    pub default_ruleset: &'static str,
    pub default_k: u64,
    pub validate_debounce_ms: u64,
    pub error_codes: Vec<ErrorCode>,
    pub rulesets: Vec<RulesetInfo>,
}

pub fn handle_config(snapshot: &Snapshot) -> ConfigResponse {
    let rulesets = snapshot
        .rule_sets()
        .iter()
        .map(|(id, set)| {
            let mut fields: BTreeMap<Ident, BTreeSet<Value>> = BTreeMap::new();
            for rule in set.rules() {
                for c in rule.conditions() {
                    if c.attribute.as_str().starts_with(REC_PREFIX) {
                        continue;
                    }
                    let values = fields.entry(c.attribute.clone()).or_default();
                    match &c.test {
                        Test::Eq(v) | Test::Neq(v) => {
                            values.insert(v.clone());
                        }
                        Test::InSet(vs) => values.extend(vs.iter().cloned()),
                        Test::Lt(_) | Test::Gt(_) => {}
                    }
                }
            }
            RulesetInfo {
                id: id.clone(),
                rules: set.len(),
                fact_fields: fields
                    .into_iter()
                    .map(|(attribute, values)| FactField { attribute, values })
                    .collect(),
            }
        })
        .collect();
    ConfigResponse {
        api_version: API_VERSION,
        default_ruleset: DEFAULT_RULESET,
        default_k: DEFAULT_K,
        validate_debounce_ms: VALIDATE_DEBOUNCE_MS,
        error_codes: ErrorCode::ALL.to_vec(),
        rulesets,
    }
}
