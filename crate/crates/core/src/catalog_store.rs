//! Loading and saving catalogs, rule sets and channel profiles.
//!
//! Layout of a project directory:
//!
//! ```text
//! catalog/<name>.cmt          one template per file, any depth
//! catalog/formats.json        optional: {"formats": [...]} extra formats
//! rules/<id>.rules.json       rule sets, addressed by <id>
//! channels.json               channel profiles
//! ```
//!
//! Catalog loading reports every problem it finds and only returns a catalog
//! when there are none.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composer::{ChannelFile, ChannelProfile};
use crate::domain_model::{Format, FormatVocabulary, Ident, TemplateSpec};
use crate::rule_engine::{RuleFile, RuleSet};
use crate::template_dsl::{parse_bytes, serialize_template};

pub const TEMPLATE_EXTENSION: &str = "cmt";
pub const RULES_SUFFIX: &str = ".rules.json";
pub const FORMATS_FILE: &str = "formats.json";

/// A problem found while loading, located by file and, when known, position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoadError {
    pub path: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    pub message: String,
}

impl LoadError {
    fn new(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            line: None,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.path.display())?;
        if let (Some(line), Some(column)) = (self.line, self.column) {
            write!(f, ":{line}:{column}")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for LoadError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("duplicate template id '{0}'")]
    DuplicateId(Ident),
    #[error("template '{template}' uses unknown format '{format}'")]
    UnknownFormat { template: Ident, format: Format },
}

/// Immutable set of templates with unique ids and the format vocabulary they
/// were checked against.
///
/// Equality compares templates and vocabulary only, not where they were loaded from.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    templates: BTreeMap<Ident, TemplateSpec>,
    formats: FormatVocabulary,
    sources: BTreeMap<Ident, PathBuf>,
}

impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        self.templates == other.templates && self.formats == other.formats
    }
}

impl Catalog {
    pub fn new(
        templates: impl IntoIterator<Item = TemplateSpec>,
        formats: FormatVocabulary,
    ) -> Result<Self, CatalogError> {
        let mut map = BTreeMap::new();
        for spec in templates {
            if let Some(part) = spec
                .parts()
                .iter()
                .find(|p| !formats.contains(p.format.as_str()))
            {
                return Err(CatalogError::UnknownFormat {
                    template: spec.id().clone(),
                    format: part.format.clone(),
                });
            }
            let id = spec.id().clone();
            if map.insert(id.clone(), spec).is_some() {
                return Err(CatalogError::DuplicateId(id));
            }
        }
        Ok(Self {
            templates: map,
            formats,
            sources: BTreeMap::new(),
        })
    }

    pub fn empty() -> Self {
        Self {
            formats: FormatVocabulary::shipped(),
            ..Self::default()
        }
    }

    pub fn get(&self, id: &str) -> Option<&TemplateSpec> {
        self.templates.get(id)
    }

    /// Templates in id order.
    pub fn templates(&self) -> impl Iterator<Item = &TemplateSpec> {
        self.templates.values()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn formats(&self) -> &FormatVocabulary {
        &self.formats
    }

    pub fn source_of(&self, id: &str) -> Option<&Path> {
        self.sources.get(id).map(PathBuf::as_path)
    }

    pub fn source_paths(&self) -> impl Iterator<Item = &Path> {
        self.sources.values().map(PathBuf::as_path)
    }

    /// Reports templates whose channel is not among `profiles`.
    pub fn check_channels(&self, profiles: &[ChannelProfile]) -> Vec<LoadError> {
        self.templates
            .values()
            .filter(|t| !profiles.iter().any(|p| p.id() == t.channel()))
            .map(|t| {
                let path = self
                    .sources
                    .get(t.id())
                    .cloned()
                    .unwrap_or_else(|| PathBuf::from("<memory>"));
                LoadError::new(
                    path,
                    format!(
                        "template '{}' targets unknown channel '{}'",
                        t.id(),
                        t.channel()
                    ),
                )
            })
            .collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormatsFile {
    formats: Vec<Format>,
}

/// The shipped formats plus any listed in `<dir>/formats.json`.
pub fn load_format_vocabulary(dir: &Path) -> Result<FormatVocabulary, ConfigError> {
    let mut formats = FormatVocabulary::shipped();
    let path = dir.join(FORMATS_FILE);
    if path.is_file() {
        for f in read_json::<FormatsFile>(&path)?.formats {
            formats.insert(f);
        }
    }
    Ok(formats)
}

/// Loads every `*.cmt` file under `root`, recursively, in path order.
pub fn load_catalog(root: &Path) -> Result<Catalog, Vec<LoadError>> {
    if !root.is_dir() {
        return Err(vec![LoadError::new(
            root,
            "catalog directory does not exist",
        )]);
    }
    let mut errors = Vec::new();
    let formats = load_format_vocabulary(root).unwrap_or_else(|e| {
        errors.push(e.into_load_error());
        FormatVocabulary::shipped()
    });

    let mut files = Vec::new();
    if let Err(e) = collect_templates(root, &mut files) {
        errors.push(LoadError::new(root, format!("cannot read directory: {e}")));
    }
    files.sort();

    let mut templates: BTreeMap<Ident, (TemplateSpec, PathBuf)> = BTreeMap::new();
    for path in files {
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                errors.push(LoadError::new(&path, format!("cannot read file: {e}")));
                continue;
            }
        };
        let out = parse_bytes(&bytes, &formats);
        errors.extend(
            out.diagnostics
                .into_iter()
                .filter(|d| d.is_error())
                .map(|d| LoadError {
                    path: path.clone(),
                    line: Some(d.line),
                    column: Some(d.column),
                    message: d.message,
                }),
        );
        let Some(spec) = out.spec else { continue };
        if let Some((_, first)) = templates.get(spec.id()) {
            errors.push(LoadError::new(
                &path,
                format!(
                    "duplicate template id '{}': also declared in {}",
                    spec.id(),
                    first.display()
                ),
            ));
            continue;
        }
        templates.insert(spec.id().clone(), (spec, path));
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let sources = templates
        .iter()
        .map(|(id, (_, p))| (id.clone(), p.clone()))
        .collect();
    let mut catalog = Catalog::new(templates.into_values().map(|(s, _)| s), formats)
        .map_err(|e| vec![LoadError::new(root, e.to_string())])?;
    catalog.sources = sources;
    Ok(catalog)
}

fn collect_templates(dir: &Path, out: &mut Vec<PathBuf>) -> io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_templates(&path, out)?;
        } else if path.extension().is_some_and(|e| e == TEMPLATE_EXTENSION) {
            out.push(path);
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
#[error("{}: {source}", path.display())]
pub struct StoreError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Writes one canonical `<id>.cmt` per template, plus `formats.json` when the
/// vocabulary extends the shipped one. Existing unrelated files are left alone.
pub fn save_catalog(catalog: &Catalog, root: &Path) -> Result<(), StoreError> {
    let wrap = |path: &Path| {
        let path = path.to_path_buf();
        move |source| StoreError { path, source }
    };
    fs::create_dir_all(root).map_err(wrap(root))?;
    for spec in catalog.templates() {
        let path = root.join(format!("{}.{TEMPLATE_EXTENSION}", spec.id()));
        fs::write(&path, serialize_template(spec).text).map_err(wrap(&path))?;
    }
    let shipped = FormatVocabulary::shipped();
    let extra: Vec<Format> = catalog
        .formats
        .iter()
        .filter(|f| !shipped.contains(f.as_str()))
        .cloned()
        .collect();
    if !extra.is_empty() {
        let path = root.join(FORMATS_FILE);
        let json = serde_json::to_string_pretty(&FormatsFile { formats: extra })
            .expect("format list serializes");
        fs::write(&path, json + "\n").map_err(wrap(&path))?;
    }
    Ok(())
}

/// Problem with a JSON configuration file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}:{line}:{column}: malformed JSON: {message}", path.display())]
    Syntax {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}: at {json_path}: {message}", path.display())]
    Schema {
        path: PathBuf,
        json_path: String,
        message: String,
    },
}

impl ConfigError {
    pub fn into_load_error(self) -> LoadError {
        match self {
            ConfigError::Io { path, message } => LoadError::new(path, message),
            ConfigError::Syntax {
                path,
                line,
                column,
                message,
            } => LoadError {
                path,
                line: Some(line),
                column: Some(column),
                message: format!("malformed JSON: {message}"),
            },
            ConfigError::Schema {
                path,
                json_path,
                message,
            } => LoadError::new(path, format!("at {json_path}: {message}")),
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: format!("cannot read file: {e}"),
    })?;
    parse_json(&text, path)
}

/// Parses JSON, separating syntax errors (with position) from schema errors
/// (with a JSON path such as `channels[0].budgets.title.base`).
pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, ConfigError> {
    let syntax = |e: &serde_json::Error| ConfigError::Syntax {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: strip_position(e),
    };
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let json_path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_data() {
            ConfigError::Schema {
                path: path.to_path_buf(),
                json_path,
                message: strip_position(&inner),
            }
        } else {
            syntax(&inner)
        }
    })?;
    de.end().map_err(|e| syntax(&e))?;
    Ok(value)
}

fn strip_position(e: &serde_json::Error) -> String {
    let text = e.to_string();
    match text.rfind(" at line ") {
        Some(i) => text[..i].to_owned(),
        None => text,
    }
}

pub fn load_channel_profiles(path: &Path) -> Result<Vec<ChannelProfile>, ConfigError> {
    let file: ChannelFile = read_json(path)?;
    file.into_profiles().map_err(|e| ConfigError::Schema {
        path: path.to_path_buf(),
        json_path: e.path,
        message: e.message,
    })
}

pub fn parse_channel_profiles(text: &str) -> Result<Vec<ChannelProfile>, ConfigError> {
    let path = Path::new("<memory>");
    let file: ChannelFile = parse_json(text, path)?;
    file.into_profiles().map_err(|e| ConfigError::Schema {
        path: path.to_path_buf(),
        json_path: e.path,
        message: e.message,
    })
}

pub fn load_rule_set(path: &Path) -> Result<RuleSet, ConfigError> {
    let file: RuleFile = read_json(path)?;
    file.into_rule_set().map_err(|e| ConfigError::Schema {
        path: path.to_path_buf(),
        json_path: e.path,
        message: e.message,
    })
}

/// Loads every `<id>.rules.json` directly inside `dir`.
pub fn load_rule_sets(dir: &Path) -> Result<BTreeMap<Ident, RuleSet>, Vec<LoadError>> {
    let entries = fs::read_dir(dir).map_err(|e| {
        vec![LoadError::new(
            dir,
            format!("cannot read rules directory: {e}"),
        )]
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.ends_with(RULES_SUFFIX))
        })
        .collect();
    paths.sort();
    let mut sets = BTreeMap::new();
    let mut errors = Vec::new();
    for path in paths {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        let stem = &name[..name.len() - RULES_SUFFIX.len()];
        let Ok(id) = Ident::new(stem) else {
            errors.push(LoadError::new(
                &path,
                format!("rule set name {stem:?} is not an identifier"),
            ));
            continue;
        };
        match load_rule_set(&path) {
            Ok(set) => {
                sets.insert(id, set);
            }
            Err(e) => errors.push(e.into_load_error()),
        }
    }
    if errors.is_empty() {
        Ok(sets)
    } else {
        Err(errors)
    }
}
