//! Seeded random generators for templates, rule systems and catalogs.

use std::collections::{BTreeMap, BTreeSet};

use cmf_core::domain_model::SHIPPED_FORMATS;
use cmf_core::template_dsl::{Pattern, Segment};
use cmf_core::{
    CharacterBudget, Format, Ident, PartSpec, SemanticTag, StructuralPartKind, TemplateSpec, Value,
};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn ident(rng: &mut StdRng) -> String {
    const FIRST: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_";
    let mut s = String::new();
    s.push(*FIRST.choose(rng).unwrap() as char);
    for _ in 0..rng.random_range(0..8) {
        s.push(*REST.choose(rng).unwrap() as char);
    }
    s
}

/// Characters that stress escaping and counting.
const TEXT_POOL: &[char] = &[
    'a', 'b', 'z', 'A', 'Q', '0', '7', ' ', ' ', ',', '.', '?', '!', ':', '#', '-', '+', '[', ']',
    '{', '}', '"', '\\', '\n', '\t', '\r', 'é', 'ж', 'Ж', 'я', '中', '🚀', '👍', '\u{301}',
    '\u{7}', '\u{0}', '\u{200d}', '\u{feff}',
];

pub fn text(rng: &mut StdRng, max_len: usize) -> String {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| *TEXT_POOL.choose(rng).unwrap()).collect()
}

/// Segments as generated, before normalization.
pub fn segments(rng: &mut StdRng, slot_names: &[String]) -> Vec<Segment> {
    let n = rng.random_range(0..6);
    (0..n)
        .map(|_| {
            if rng.random_bool(0.4) {
                let name = slot_names.choose(rng).unwrap().clone();
                Segment::Slot(Ident::new(name).unwrap())
            } else {
                Segment::Literal(text(rng, 12))
            }
        })
        .collect()
}

pub fn slot_pool(rng: &mut StdRng) -> Vec<String> {
    (0..rng.random_range(1..5)).map(|_| ident(rng)).collect()
}

pub fn budget(rng: &mut StdRng) -> CharacterBudget {
    match rng.random_range(0..4) {
        0 => CharacterBudget::new(rng.random(), rng.random()),
        1 => CharacterBudget::new(rng.random_range(0..200), 0),
        _ => CharacterBudget::new(rng.random_range(0..100), rng.random_range(0..50)),
    }
}

pub fn meta_value(rng: &mut StdRng) -> Value {
    match rng.random_range(0..4) {
        0 => Value::Int(rng.random()),
        1 => Value::Bool(rng.random()),
        2 => Value::Int(rng.random_range(-5..5)),
        _ => Value::Str(text(rng, 16)),
    }
}

/// An arbitrary valid template; text fields exercise every escape.
pub fn template_spec(rng: &mut StdRng) -> TemplateSpec {
    let slots = slot_pool(rng);
    let mut parts = Vec::new();
    for kind in StructuralPartKind::ALL {
        if !rng.random_bool(0.6) {
            continue;
        }
        let mut semantics = BTreeSet::new();
        let min = usize::from(kind != StructuralPartKind::ReferenceInfo);
        for _ in 0..rng.random_range(min..4) {
            semantics.insert(SemanticTag::new(ident(rng)).unwrap());
        }
        if semantics.is_empty() && kind != StructuralPartKind::ReferenceInfo {
            semantics.insert(SemanticTag::new("usp_focus").unwrap());
        }
        parts.push(PartSpec {
            kind,
            semantics,
            format: Format::new(*SHIPPED_FORMATS.choose(rng).unwrap()).unwrap(),
            budget: budget(rng),
            pattern: Pattern::from_segments(segments(rng, &slots)),
        });
    }
    let metadata: BTreeMap<Ident, Value> = (0..rng.random_range(0..4))
        .map(|_| (Ident::new(ident(rng)).unwrap(), meta_value(rng)))
        .collect();
    TemplateSpec::new(
        Ident::new(ident(rng)).unwrap(),
        Ident::new(ident(rng)).unwrap(),
        parts,
        metadata,
    )
    .expect("generated spec is valid")
}

/// A template for ranking tests: small attribute and format domains so that
/// matches and score ties are common.
pub fn ranking_template(rng: &mut StdRng, id: &str) -> TemplateSpec {
    const AUDIENCES: &[&str] = &["b2b", "b2c", "b2g"];
    const STAGES: &[&str] = &["awareness", "consideration", "decision"];
    let mut metadata = BTreeMap::new();
    if rng.random_bool(0.8) {
        metadata.insert(
            Ident::new("audience").unwrap(),
            Value::from(*AUDIENCES.choose(rng).unwrap()),
        );
    }
    if rng.random_bool(0.7) {
        metadata.insert(
            Ident::new("stage").unwrap(),
            Value::from(*STAGES.choose(rng).unwrap()),
        );
    }
    if rng.random_bool(0.3) {
        metadata.insert(Ident::new("trial").unwrap(), Value::Bool(rng.random()));
    }
    let kinds: Vec<_> = StructuralPartKind::ALL
        .into_iter()
        .filter(|_| rng.random_bool(0.5))
        .collect();
    let kinds = if kinds.is_empty() {
        vec![StructuralPartKind::Title]
    } else {
        kinds
    };
    let parts = kinds
        .into_iter()
        .map(|kind| PartSpec {
            kind,
            semantics: BTreeSet::from([SemanticTag::new("usp_focus").unwrap()]),
            format: Format::new(*SHIPPED_FORMATS.choose(rng).unwrap()).unwrap(),
            budget: CharacterBudget::new(60, 0),
            pattern: Pattern::literal("x"),
        })
        .collect();
    TemplateSpec::new(
        Ident::new(id).unwrap(),
        Ident::new("google_adwords").unwrap(),
        parts,
        metadata,
    )
    .unwrap()
}

/// Random `rec_*` facts over the ranking domains, one value per attribute.
pub fn derived_facts(rng: &mut StdRng) -> Vec<(String, Value)> {
    let mut out = Vec::new();
    let mut pick = |attr: &str, values: &[Value], p: f64, rng: &mut StdRng| {
        if rng.random_bool(p) {
            out.push((attr.to_owned(), values.choose(rng).unwrap().clone()));
        }
    };
    pick(
        "rec_audience",
        &["b2b".into(), "b2c".into(), "b2g".into()],
        0.8,
        rng,
    );
    pick(
        "rec_format",
        &SHIPPED_FORMATS
            .iter()
            .map(|f| Value::from(*f))
            .collect::<Vec<_>>(),
        0.7,
        rng,
    );
    pick(
        "rec_stage",
        &["awareness".into(), "decision".into()],
        0.6,
        rng,
    );
    pick(
        "rec_trial",
        &[Value::Bool(true), Value::Bool(false)],
        0.3,
        rng,
    );
    pick("rec_region", &["eu".into()], 0.2, rng);
    out
}
