//! Immutable catalog/rules/channels bundle and the swappable handle the
//! server reads it through.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use cmf_core::catalog_store::{
    load_catalog, load_channel_profiles, load_rule_sets, Catalog, LoadError,
};
use cmf_core::composer::{default_channel_profiles, ChannelProfile};
use cmf_core::rule_engine::RuleSet;
use cmf_core::Ident;

/// Where the service reads its data from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPaths {
    pub catalog: PathBuf,
    pub rules: PathBuf,
    /// Built-in profiles are used when this file does not exist.
    pub channels: PathBuf,
}

impl DataPaths {
    /// `<root>/catalog`, `<root>/rules` and `<root>/channels.json`.
    pub fn under(root: &Path) -> Self {
        Self {
            catalog: root.join("catalog"),
            rules: root.join("rules"),
            channels: root.join("channels.json"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    catalog: Catalog,
    rule_sets: BTreeMap<Ident, RuleSet>,
    profiles: BTreeMap<Ident, ChannelProfile>,
}

impl Snapshot {
    pub fn new(
        catalog: Catalog,
        rule_sets: BTreeMap<Ident, RuleSet>,
        profiles: impl IntoIterator<Item = ChannelProfile>,
    ) -> Self {
        Self {
            catalog,
            rule_sets,
            profiles: profiles.into_iter().map(|p| (p.id().clone(), p)).collect(),
        }
    }

    /// No templates, no rules, built-in channels.
    pub fn empty() -> Self {
        Self::new(
            Catalog::empty(),
            BTreeMap::new(),
            default_channel_profiles(),
        )
    }

    /// Loads everything, reporting every problem rather than the first.
    /// Templates must target a known channel.
    pub fn load(paths: &DataPaths) -> Result<Self, Vec<LoadError>> {
        let mut errors = Vec::new();
        let profiles = if paths.channels.exists() {
            load_channel_profiles(&paths.channels).unwrap_or_else(|e| {
                errors.push(e.into_load_error());
                Vec::new()
            })
        } else {
            default_channel_profiles()
        };
        let rule_sets = if paths.rules.exists() {
            load_rule_sets(&paths.rules).unwrap_or_else(|e| {
                errors.extend(e);
                BTreeMap::new()
            })
        } else {
            BTreeMap::new()
        };
        let catalog = load_catalog(&paths.catalog).unwrap_or_else(|e| {
            errors.extend(e);
            Catalog::empty()
        });
        if errors.is_empty() {
            errors.extend(catalog.check_channels(&profiles));
        }
        if errors.is_empty() {
            Ok(Self::new(catalog, rule_sets, profiles))
        } else {
            Err(errors)
        }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn rule_sets(&self) -> &BTreeMap<Ident, RuleSet> {
        &self.rule_sets
    }

    pub fn rule_set(&self, id: &str) -> Option<&RuleSet> {
        self.rule_sets.get(id)
    }

    pub fn profiles(&self) -> impl Iterator<Item = &ChannelProfile> {
        self.profiles.values()
    }

    pub fn profile(&self, id: &str) -> Option<&ChannelProfile> {
        self.profiles.get(id)
    }
}

/// The current snapshot. Readers clone the `Arc` and keep a consistent view
/// for as long as they hold it; a reload swaps in a fully built replacement.
#[derive(Debug)]
pub struct SharedSnapshot {
    current: RwLock<Arc<Snapshot>>,
    paths: Option<DataPaths>,
}

impl SharedSnapshot {
    pub fn new(snapshot: Snapshot, paths: Option<DataPaths>) -> Self {
        Self {
            current: RwLock::new(Arc::new(snapshot)),
            paths,
        }
    }

    pub fn get(&self) -> Arc<Snapshot> {
        self.current
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    pub fn replace(&self, snapshot: Snapshot) {
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(snapshot);
    }

    /// Reloads from disk. On failure the current snapshot stays in place.
    pub fn reload(&self) -> Result<Arc<Snapshot>, Vec<LoadError>> {
        let Some(paths) = &self.paths else {
            return Ok(self.get());
        };
        let fresh = Arc::new(Snapshot::load(paths)?);
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = fresh.clone();
        Ok(fresh)
    }
}
