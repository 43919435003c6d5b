//! Design, recommendation and validation of text communication-message templates.
//!
//! A template describes a message as semantics, format, character budget and
//! structure per part (see [`domain_model`]). Templates are authored in a small
//! line-oriented language ([`template_dsl`]), recommended for a product and
//! audience by a forward-chaining production system ([`rule_engine`],
//! [`recommender`]), and instantiated and checked against advertising-channel
//! budgets by the [`composer`]. [`catalog_store`] loads and saves all of it.

pub mod catalog_store;
pub mod composer;
pub mod domain_model;
pub mod recommender;
pub mod rule_engine;
pub mod template_dsl;

pub use domain_model::{
    check_budget, check_structure, count_symbols, BudgetStatus, BudgetVerdict, CharacterBudget,
    Format, FormatVocabulary, Ident, PartSpec, SemanticTag, StructuralPartKind, StructureVerdict,
    TemplateSpec, Value,
};
