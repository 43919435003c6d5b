//! Ranks catalog templates against the `rec_*` facts derived by a rule run.
//!
//! A derived fact `rec_X = v` is matched by a template whose metadata holds
//! `X = v`. `rec_format` is also matched when any part of the template uses
//! format `v`. The score is the matched fraction; ties are broken by template
//! id so rankings are total and reproducible.

use std::cmp::Ordering;
use std::fmt;
use std::num::NonZeroUsize;

use serde::{Serialize, Serializer};

use crate::domain_model::{Ident, TemplateSpec, Value};
use crate::rule_engine::{run_forward_chain, ChainError, Fact, FactBase, FiringTrace, RuleSet};

/// Prefix of attributes produced for the recommender.
pub const REC_PREFIX: &str = "rec_";

/// Exact fraction `matched / total`; zero when `total` is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Score {
    pub matched: usize,
    pub total: usize,
}

impl Score {
    pub fn as_f64(self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.matched as f64 / self.total as f64
        }
    }

    pub fn is_full(self) -> bool {
        self.total > 0 && self.matched == self.total
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        // a/b vs c/d with zero denominators read as 0
        let lhs = self.matched as u128 * other.total.max(1) as u128;
        let rhs = other.matched as u128 * self.total.max(1) as u128;
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.as_f64())
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreBreakdown {
    pub score: Score,
    pub matched: Vec<Fact>,
    pub unmatched: Vec<Fact>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub template_id: Ident,
    pub score: Score,
    pub matched: Vec<Fact>,
    pub unmatched: Vec<Fact>,
    pub trace: FiringTrace,
}

/// The `rec_*` facts of a base, in attribute order.
pub fn derived_facts(base: &FactBase) -> Vec<Fact> {
    base.facts()
        .filter(|f| f.attribute.as_str().starts_with(REC_PREFIX))
        .collect()
}

fn is_matched(spec: &TemplateSpec, fact: &Fact) -> bool {
    let Some(target) = fact.attribute.as_str().strip_prefix(REC_PREFIX) else {
        return false;
    };
    if spec.metadata().get(target) == Some(&fact.value) {
        return true;
    }
    match (&fact.value, target) {
        (Value::Str(format), "format") => spec
            .parts()
            .iter()
            .any(|p| p.format.as_str() == format.as_str()),
        _ => false,
    }
}

/// Scores `spec` against `derived`. Facts outside the `rec_*` namespace are ignored.
pub fn score_template(spec: &TemplateSpec, derived: &[Fact]) -> ScoreBreakdown {
    let (matched, unmatched): (Vec<Fact>, Vec<Fact>) = derived
        .iter()
        .filter(|f| f.attribute.as_str().starts_with(REC_PREFIX))
        .cloned()
        .partition(|f| is_matched(spec, f));
    ScoreBreakdown {
        score: Score {
            matched: matched.len(),
            total: matched.len() + unmatched.len(),
        },
        matched,
        unmatched,
    }
}

/// Runs the rules once over `base`, scores every template and returns the
/// top `k` by (score desc, id asc).
pub fn recommend<'a>(
    base: &FactBase,
    rules: &RuleSet,
    catalog: impl IntoIterator<Item = &'a TemplateSpec>,
    k: NonZeroUsize,
) -> Result<Vec<Recommendation>, ChainError> {
    let (final_base, trace) = run_forward_chain(base, rules)?;
    let derived = derived_facts(&final_base);
    let mut ranked: Vec<Recommendation> = catalog
        .into_iter()
        .map(|spec| {
            let b = score_template(spec, &derived);
            Recommendation {
                template_id: spec.id().clone(),
                score: b.score,
                matched: b.matched,
                unmatched: b.unmatched,
                trace: FiringTrace::default(),
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then_with(|| a.template_id.cmp(&b.template_id))
    });
    ranked.truncate(k.get());
    for r in &mut ranked {
        r.trace = trace.clone();
    }
    Ok(ranked)
}
