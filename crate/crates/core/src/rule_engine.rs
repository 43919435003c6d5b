//! Propositional production system with forward chaining.
//!
//! Facts are `attribute = value` pairs; a [`FactBase`] holds at most one value
//! per attribute and never retracts. Rules are conjunctions of attribute tests
//! whose actions assert new facts (conventionally `rec_*` attributes read by the
//! recommender).
//!
//! The agenda is ordered by priority (descending), then number of conditions
//! (descending), then rule id (ascending). This is a total order over rules of
//! a [`RuleSet`], so a run does not depend on the order rules were written in.
//! Each rule fires at most once, which bounds a run to `rules.len()` firings.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain_model::{Ident, Value};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Fact {
    pub attribute: Ident,
    pub value: Value,
}

impl Fact {
    pub fn new(attribute: Ident, value: impl Into<Value>) -> Self {
        Self {
            attribute,
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("fact conflict on '{attribute}': holds {existing}, cannot assert {attempted}")]
pub struct FactConflict {
    pub attribute: Ident,
    pub existing: Value,
    pub attempted: Value,
}

/// Attribute-to-value map with single-assignment semantics.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct FactBase(BTreeMap<Ident, Value>);

impl FactBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a base from facts, failing on the first conflicting pair.
    pub fn from_facts(facts: impl IntoIterator<Item = Fact>) -> Result<Self, FactConflict> {
        let mut base = Self::new();
        for fact in facts {
            base.assert_fact(fact)?;
        }
        Ok(base)
    }

    /// Adds `fact`. Re-asserting an identical fact is a no-op that returns
    /// `Ok(false)`; a different value for a held attribute is a conflict.
    pub fn assert_fact(&mut self, fact: Fact) -> Result<bool, FactConflict> {
        match self.0.get(&fact.attribute) {
            Some(existing) if *existing == fact.value => Ok(false),
            Some(existing) => Err(FactConflict {
                attribute: fact.attribute,
                existing: existing.clone(),
                attempted: fact.value,
            }),
            None => {
                self.0.insert(fact.attribute, fact.value);
                Ok(true)
            }
        }
    }

    /// Non-mutating form of [`FactBase::assert_fact`].
    pub fn with_fact(&self, fact: Fact) -> Result<Self, FactConflict> {
        let mut next = self.clone();
        next.assert_fact(fact)?;
        Ok(next)
    }

    pub fn get(&self, attribute: &str) -> Option<&Value> {
        self.0.get(attribute)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ident, &Value)> {
        self.0.iter()
    }

    pub fn facts(&self) -> impl Iterator<Item = Fact> + '_ {
        self.0.iter().map(|(a, v)| Fact::new(a.clone(), v.clone()))
    }

    pub fn contains_all(&self, other: &FactBase) -> bool {
        other.iter().all(|(a, v)| self.get(a.as_str()) == Some(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "op", content = "value", rename_all = "snake_case")]
pub enum Test {
    Eq(Value),
    Neq(Value),
    #[serde(rename = "in")]
    InSet(Vec<Value>),
    Lt(i64),
    Gt(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Condition {
    pub attribute: Ident,
    #[serde(flatten)]
    pub test: Test,
}

impl Condition {
    pub fn new(attribute: Ident, test: Test) -> Result<Self, RuleError> {
        if matches!(&test, Test::InSet(values) if values.is_empty()) {
            return Err(RuleError::EmptyInSet(attribute));
        }
        Ok(Self { attribute, test })
    }

    /// Closed world: a test on an absent attribute is false, including `neq`.
    pub fn is_satisfied(&self, base: &FactBase) -> bool {
        let Some(value) = base.get(self.attribute.as_str()) else {
            return false;
        };
        match &self.test {
            Test::Eq(v) => value == v,
            Test::Neq(v) => value != v,
            Test::InSet(set) => set.contains(value),
            Test::Lt(n) => value.as_int().is_some_and(|i| i < *n),
            Test::Gt(n) => value.as_int().is_some_and(|i| i > *n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule '{0}' has no conditions")]
    NoConditions(Ident),
    #[error("rule '{0}' has no actions")]
    NoActions(Ident),
    #[error("condition on '{0}' uses 'in' with an empty set")]
    EmptyInSet(Ident),
    #[error("rule '{rule}' asserts {attribute} = {value} while requiring {attribute} != {value}")]
    SelfContradiction {
        rule: Ident,
        attribute: Ident,
        value: Value,
    },
    #[error("rule '{rule}' asserts two different values for '{attribute}'")]
    ConflictingActions { rule: Ident, attribute: Ident },
    #[error("duplicate rule id '{0}'")]
    DuplicateId(Ident),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductionRule {
    id: Ident,
    priority: i64,
    conditions: Vec<Condition>,
    actions: Vec<Fact>,
}

impl ProductionRule {
    pub fn new(
        id: Ident,
        priority: i64,
        conditions: Vec<Condition>,
        actions: Vec<Fact>,
    ) -> Result<Self, RuleError> {
        if conditions.is_empty() {
            return Err(RuleError::NoConditions(id));
        }
        if actions.is_empty() {
            return Err(RuleError::NoActions(id));
        }
        let mut asserted: BTreeMap<&Ident, &Value> = BTreeMap::new();
        for action in &actions {
            if let Some(prev) = asserted.insert(&action.attribute, &action.value) {
                if *prev != action.value {
                    return Err(RuleError::ConflictingActions {
                        rule: id.clone(),
                        attribute: action.attribute.clone(),
                    });
                }
            }
            let contradicts = conditions.iter().any(|c| {
                c.attribute == action.attribute && c.test == Test::Neq(action.value.clone())
            });
            if contradicts {
                return Err(RuleError::SelfContradiction {
                    rule: id.clone(),
                    attribute: action.attribute.clone(),
                    value: action.value.clone(),
                });
            }
        }
        Ok(Self {
            id,
            priority,
            conditions,
            actions,
        })
    }

    pub fn id(&self) -> &Ident {
        &self.id
    }

    pub fn priority(&self) -> i64 {
        self.priority
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn actions(&self) -> &[Fact] {
        &self.actions
    }
}

/// Agenda order: priority desc, specificity (condition count) desc, id asc.
pub fn agenda_order(a: &ProductionRule, b: &ProductionRule) -> Ordering {
    b.priority
        .cmp(&a.priority)
        .then_with(|| b.conditions.len().cmp(&a.conditions.len()))
        .then_with(|| a.id.cmp(&b.id))
}

/// Rules with unique ids, kept in agenda order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct RuleSet {
    rules: Vec<ProductionRule>,
}

impl RuleSet {
    pub fn new(mut rules: Vec<ProductionRule>) -> Result<Self, RuleError> {
        let mut ids = BTreeSet::new();
        for rule in &rules {
            if !ids.insert(&rule.id) {
                return Err(RuleError::DuplicateId(rule.id.clone()));
            }
        }
        rules.sort_by(agenda_order);
        Ok(Self { rules })
    }

    /// Rules in agenda order.
    pub fn rules(&self) -> &[ProductionRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Attributes tested by any condition, for building fact-entry forms.
    pub fn tested_attributes(&self) -> BTreeSet<&Ident> {
        self.rules
            .iter()
            .flat_map(|r| r.conditions.iter().map(|c| &c.attribute))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Firing {
    pub rule_id: Ident,
    pub asserted: Vec<Fact>,
}

/// Rules in the order they fired, with the facts each asserted.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct FiringTrace(pub Vec<Firing>);

impl FiringTrace {
    pub fn rule_ids(&self) -> impl Iterator<Item = &Ident> {
        self.0.iter().map(|f| &f.rule_id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rule '{rule_id}' conflicts with an existing fact: {conflict}")]
pub struct ChainError {
    pub rule_id: Ident,
    pub conflict: FactConflict,
}

pub fn match_rule(rule: &ProductionRule, base: &FactBase) -> bool {
    rule.conditions.iter().all(|c| c.is_satisfied(base))
}

/// Fires matching rules in agenda order until none is left unfired.
pub fn run_forward_chain(
    base: &FactBase,
    rules: &RuleSet,
) -> Result<(FactBase, FiringTrace), ChainError> {
    let mut facts = base.clone();
    let mut fired = vec![false; rules.len()];
    let mut trace = Vec::new();
    while let Some(index) = rules
        .rules
        .iter()
        .enumerate()
        .position(|(i, r)| !fired[i] && match_rule(r, &facts))
    {
        let rule = &rules.rules[index];
        fired[index] = true;
        for action in &rule.actions {
            facts
                .assert_fact(action.clone())
                .map_err(|conflict| ChainError {
                    rule_id: rule.id.clone(),
                    conflict,
                })?;
        }
        trace.push(Firing {
            rule_id: rule.id.clone(),
            asserted: rule.actions.clone(),
        });
    }
    Ok((facts, FiringTrace(trace)))
}

// Rule-set file schema.

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFile {
    pub rules: Vec<RuleEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleEntry {
    pub id: Ident,
    pub priority: i64,
    #[serde(rename = "if")]
    pub conditions: Vec<ConditionEntry>,
    #[serde(rename = "then")]
    pub actions: Vec<ActionEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpName {
    Eq,
    Neq,
    In,
    Lt,
    Gt,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionEntry {
    pub attr: Ident,
    pub op: OpName,
    pub value: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    pub attr: Ident,
    pub value: Value,
}

/// Error converting a parsed rule file into a [`RuleSet`]; `path` is a
/// JSON path such as `rules[2].if[0].value`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct RuleSchemaError {
    pub path: String,
    pub message: String,
}

impl RuleFile {
    pub fn into_rule_set(self) -> Result<RuleSet, RuleSchemaError> {
        let mut rules = Vec::with_capacity(self.rules.len());
        for (ri, entry) in self.rules.into_iter().enumerate() {
            let mut conditions = Vec::with_capacity(entry.conditions.len());
            for (ci, c) in entry.conditions.into_iter().enumerate() {
                let path = format!("rules[{ri}].if[{ci}].value");
                let err = |message: &str| RuleSchemaError {
                    path: path.clone(),
                    message: message.to_owned(),
                };
                let scalar = |v: serde_json::Value| -> Result<Value, RuleSchemaError> {
                    serde_json::from_value(v)
                        .map_err(|_| err("expected a string, integer or boolean"))
                };
                let test = match c.op {
                    OpName::Eq => Test::Eq(scalar(c.value)?),
                    OpName::Neq => Test::Neq(scalar(c.value)?),
                    OpName::In => match c.value {
                        serde_json::Value::Array(items) => {
                            Test::InSet(items.into_iter().map(scalar).collect::<Result<_, _>>()?)
                        }
                        _ => return Err(err("'in' expects an array")),
                    },
                    OpName::Lt | OpName::Gt => {
                        let n = c
                            .value
                            .as_i64()
                            .ok_or_else(|| err("'lt' and 'gt' expect an integer"))?;
                        if c.op == OpName::Lt {
                            Test::Lt(n)
                        } else {
                            Test::Gt(n)
                        }
                    }
                };
                let condition = Condition::new(c.attr, test).map_err(|e| RuleSchemaError {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                conditions.push(condition);
            }
            let actions = entry
                .actions
                .into_iter()
                .map(|a| Fact::new(a.attr, a.value))
                .collect();
            let rule = ProductionRule::new(entry.id, entry.priority, conditions, actions).map_err(
                |e| RuleSchemaError {
                    path: format!("rules[{ri}]"),
                    message: e.to_string(),
                },
            )?;
            rules.push(rule);
        }
        RuleSet::new(rules).map_err(|e| RuleSchemaError {
            path: "rules".into(),
            message: e.to_string(),
        })
    }

    pub fn from_rule_set(rules: &RuleSet) -> Self {
        let rules = rules
            .rules()
            .iter()
            .map(|r| RuleEntry {
                id: r.id.clone(),
                priority: r.priority,
                conditions: r
                    .conditions
                    .iter()
                    .map(|c| {
                        let (op, value) = match &c.test {
                            Test::Eq(v) => (OpName::Eq, serde_json::to_value(v)),
                            Test::Neq(v) => (OpName::Neq, serde_json::to_value(v)),
                            Test::InSet(vs) => (OpName::In, serde_json::to_value(vs)),
                            Test::Lt(n) => (OpName::Lt, serde_json::to_value(n)),
                            Test::Gt(n) => (OpName::Gt, serde_json::to_value(n)),
                        };
                        ConditionEntry {
                            attr: c.attribute.clone(),
                            op,
                            value: value.expect("plain values serialize"),
                        }
                    })
                    .collect(),
                actions: r
                    .actions
                    .iter()
                    .map(|a| ActionEntry {
                        attr: a.attribute.clone(),
                        value: a.value.clone(),
                    })
                    .collect(),
            })
            .collect();
        Self { rules }
    }
}
