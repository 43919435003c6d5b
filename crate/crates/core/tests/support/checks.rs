//! End-to-end checks shared by the core integration tests and the acceptance
//! runner. Each returns a one-line summary or the first failure found.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::num::NonZeroUsize;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use cmf_core::catalog_store::{load_catalog, load_rule_sets, Catalog};
use cmf_core::composer::{
    default_channel_profiles, fill_slots, validate_message, ChannelProfile, ValidationReport,
    Verdict, ViolationRule,
};
use cmf_core::recommender::recommend;
use cmf_core::rule_engine::{
    run_forward_chain, Condition, Fact, FactBase, ProductionRule, RuleSet, Test,
};
use cmf_core::template_dsl::{
    parse_bytes, parse_template, serialize_template, Pattern, TemplateSource,
};
use cmf_core::{
    BudgetStatus, CharacterBudget, Format, FormatVocabulary, Ident, PartSpec, SemanticTag,
    StructuralPartKind, TemplateSpec, Value,
};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::{corpus_dir, demo_dir, gen, oracle};

pub type Outcome = Result<String, String>;

fn id(s: &str) -> Ident {
    Ident::new(s).unwrap()
}

fn profile(channel: &str) -> ChannelProfile {
    default_channel_profiles()
        .into_iter()
        .find(|p| p.id().as_str() == channel)
        .unwrap_or_else(|| panic!("shipped profile {channel}"))
}

// ---------------------------------------------------------------------------
// Channel limits
// ---------------------------------------------------------------------------

fn headline_template() -> TemplateSpec {
    let part = |kind, text: &str| PartSpec {
        kind,
        semantics: BTreeSet::from([SemanticTag::new("attention_draw").unwrap()]),
        format: Format::new("statement").unwrap(),
        budget: CharacterBudget::new(1000, 0),
        pattern: Pattern::parse(text).unwrap(),
    };
    TemplateSpec::new(
        id("limit_probe"),
        id("google_adwords"),
        vec![
            part(StructuralPartKind::Title, "{headline}"),
            part(StructuralPartKind::MainText, "Body."),
        ],
        BTreeMap::new(),
    )
    .unwrap()
}

/// `n` code points mixing ASCII, Cyrillic, CJK and emoji.
pub fn mixed_text(n: usize) -> String {
    ['a', 'Ж', '中', '🚀', 'é'].iter().cycle().take(n).collect()
}

fn title_report(channel: &str, title: &str) -> ValidationReport {
    let spec = headline_template();
    let bindings = BTreeMap::from([("headline".to_owned(), title.to_owned())]);
    let rendered = fill_slots(&spec, &bindings).unwrap();
    validate_message(&rendered.message, &spec, &profile(channel)).unwrap()
}

/// Title verdicts on the shipped profiles at and around their limits.
pub fn channel_limits() -> Outcome {
    let start = Instant::now();
    let title_status = |r: &ValidationReport| {
        r.parts
            .iter()
            .find(|p| p.part == StructuralPartKind::Title)
            .map(|p| (p.count, p.status))
            .unwrap()
    };
    for text in [mixed_text, |n: usize| "x".repeat(n)] {
        let r = title_report("google_adwords", &text(60));
        if r.verdict != Verdict::Pass || title_status(&r) != (60, BudgetStatus::WithinBase) {
            return Err(format!("adwords 60: {r:?}"));
        }
        let r = title_report("google_adwords", &text(61));
        let v = r.violations.first();
        if r.verdict != Verdict::Fail
            || v.map(|v| (v.part, v.rule, v.detail.as_str()))
                != Some((
                    Some(StructuralPartKind::Title),
                    ViolationRule::BudgetExceeded,
                    "61 > 60",
                ))
        {
            return Err(format!("adwords 61: {r:?}"));
        }
        let r = title_report("yandex_direct", &text(40));
        if r.verdict != Verdict::Pass
            || title_status(&r) != (40, BudgetStatus::WithinExtension)
            || r.warnings.first().map(|w| w.rule) != Some(ViolationRule::WithinExtension)
        {
            return Err(format!("yandex 40: {r:?}"));
        }
        let r = title_report("yandex_direct", &text(66));
        if r.verdict != Verdict::Fail
            || title_status(&r) != (66, BudgetStatus::Exceeded)
            || r.violations.first().map(|v| v.detail.as_str()) != Some("66 > 65")
        {
            return Err(format!("yandex 66: {r:?}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "adwords 60 pass / 61 fail, yandex 40 within_extension / 66 fail in {elapsed:?}"
    ))
}

// ---------------------------------------------------------------------------
// Demo catalog audit
// ---------------------------------------------------------------------------

pub fn demo_catalog() -> Catalog {
    load_catalog(&demo_dir().join("catalog")).expect("demo catalog loads")
}

/// Every shipped template declares semantics, format and budget on each part,
/// and its parts are in canonical structural order.
pub fn tuple_completeness() -> Outcome {
    let catalog = demo_catalog();
    if catalog.is_empty() {
        return Err("demo catalog is empty".into());
    }
    for spec in catalog.templates() {
        let name = spec.id();
        if spec.parts().is_empty() {
            return Err(format!("{name}: no parts"));
        }
        let kinds: Vec<_> = spec.parts().iter().map(|p| p.kind).collect();
        let mut sorted = kinds.clone();
        sorted.sort();
        sorted.dedup();
        if kinds != sorted {
            return Err(format!("{name}: parts out of order {kinds:?}"));
        }
        for part in spec.parts() {
            if part.semantics.is_empty() && part.kind != StructuralPartKind::ReferenceInfo {
                return Err(format!("{name}.{}: no semantics", part.kind));
            }
            if !catalog.formats().contains(part.format.as_str()) {
                return Err(format!("{name}.{}: unknown format", part.kind));
            }
            if part.budget.limit() == 0 {
                return Err(format!("{name}.{}: zero budget", part.kind));
            }
        }
        // the source must state every field explicitly
        let path = catalog.source_of(name.as_str()).unwrap();
        let text = fs::read_to_string(path).unwrap();
        for field in ["semantics:", "format:", "budget:", "text:"] {
            if text.matches(field).count() != spec.parts().len() {
                return Err(format!("{name}: '{field}' not declared on every part"));
            }
        }
    }
    let unresolved = catalog.check_channels(&default_channel_profiles());
    if let Some(e) = unresolved.first() {
        return Err(e.to_string());
    }
    Ok(format!(
        "{} of {} templates complete",
        catalog.len(),
        catalog.len()
    ))
}

// ---------------------------------------------------------------------------
// DSL round-trip and fuzzing
// ---------------------------------------------------------------------------

fn roundtrip(spec: &TemplateSpec) -> Result<(), String> {
    let first = serialize_template(spec);
    let reparsed = parse_template(&first).map_err(|d| format!("{d:?}\n{}", first.text))?;
    if reparsed != *spec {
        return Err(format!("mismatch after reparse:\n{}", first.text));
    }
    let second = serialize_template(&reparsed);
    if second.text != first.text {
        return Err(format!("serializer not idempotent:\n{}", first.text));
    }
    Ok(())
}

pub fn corpus_files() -> Vec<std::path::PathBuf> {
    let mut files: Vec<_> = fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cmt"))
        .collect();
    files.sort();
    files
}

pub fn corpus_roundtrip() -> Outcome {
    let files = corpus_files();
    if files.len() < 20 {
        return Err(format!("only {} corpus files", files.len()));
    }
    for path in &files {
        let text = fs::read_to_string(path).unwrap();
        let source = TemplateSource::new(text, path.display().to_string());
        let spec = parse_template(&source).map_err(|d| format!("{}: {d:?}", path.display()))?;
        roundtrip(&spec).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(format!("{} corpus files, 0 mismatches", files.len()))
}

pub fn generated_roundtrip(count: usize, seed: u64) -> Outcome {
    let mut rng = gen::rng(seed);
    for i in 0..count {
        let spec = gen::template_spec(&mut rng);
        roundtrip(&spec).map_err(|e| format!("spec #{i}: {e}"))?;
    }
    Ok(format!("{count} generated specs, 0 mismatches"))
}

const TOKENS: &[&str] = &[
    "template",
    "\"t\"",
    "{",
    "}",
    "channel",
    ":",
    "\"google_adwords\"",
    "meta",
    "part",
    "title",
    "main_text",
    "tagline",
    "semantics",
    "[",
    "]",
    ",",
    "usp_focus",
    "format",
    "question",
    "budget",
    "35",
    "+",
    "30",
    "-1",
    "99999999999999999999999999999999",
    "text",
    "\"{a}\"",
    "\"{{\"",
    "\"}\"",
    "\"\\u{1F680}\"",
    "\"\\u{d800}\"",
    "\"\\q\"",
    "\"",
    "\\",
    "# note\n",
    "\n",
    " ",
    "\t",
    "ж",
    "🚀",
    "\0",
    "true",
    "false",
    "{x",
    "x}",
    "\"{ab",
];

fn fuzz_input(rng: &mut rand::rngs::StdRng, seeds: &[Vec<u8>]) -> Vec<u8> {
    match rng.random_range(0..3) {
        0 => {
            let n = rng.random_range(0..60);
            let mut s = String::new();
            for _ in 0..n {
                s.push_str(TOKENS.choose(rng).unwrap());
                if rng.random_bool(0.5) {
                    s.push(' ');
                }
            }
            s.into_bytes()
        }
        1 => {
            let mut bytes = seeds.choose(rng).unwrap().clone();
            for _ in 0..rng.random_range(1..6) {
                let len = bytes.len();
                match rng.random_range(0..4) {
                    0 if len > 0 => {
                        let i = rng.random_range(0..len);
                        bytes[i] = rng.random();
                    }
                    1 if len > 0 => {
                        bytes.remove(rng.random_range(0..len));
                    }
                    2 => {
                        let i = rng.random_range(0..=len);
                        let token = TOKENS.choose(rng).unwrap().as_bytes();
                        bytes.splice(i..i, token.iter().copied());
                    }
                    _ => bytes.truncate(rng.random_range(0..=len)),
                }
            }
            bytes
        }
        _ => (0..rng.random_range(0..200))
            .map(|_| rng.random())
            .collect(),
    }
}

fn check_fuzz_input(input: &[u8], formats: &FormatVocabulary) -> Result<(), String> {
    let out = parse_bytes(input, formats);
    let lines = input.split(|b| *b == b'\n').count();
    for d in &out.diagnostics {
        if d.line == 0 || d.column == 0 || d.line > lines {
            return Err(format!("diagnostic outside input: {d}"));
        }
    }
    match &out.spec {
        Some(spec) => {
            if out.diagnostics.iter().any(|d| d.is_error()) {
                return Err("spec returned alongside errors".into());
            }
            roundtrip(spec)
        }
        None if out.diagnostics.iter().any(|d| d.is_error()) => Ok(()),
        None => Err("no spec and no error".into()),
    }
}

/// Parses `count` random and mutated inputs on a worker thread. Fails on a
/// panic, an input slower than `limit`, or a worker that stops responding.
pub fn dsl_fuzz(count: usize, seed: u64, limit: Duration) -> Outcome {
    let seeds: Vec<Vec<u8>> = corpus_files()
        .iter()
        .map(|p| fs::read(p).unwrap())
        .collect();
    let mut rng = gen::rng(seed);
    let inputs: Vec<Vec<u8>> = (0..count).map(|_| fuzz_input(&mut rng, &seeds)).collect();
    let (tx, rx) = mpsc::channel();
    let worker_inputs = inputs.clone();
    thread::spawn(move || {
        let formats = FormatVocabulary::shipped();
        for input in &worker_inputs {
            let start = Instant::now();
            let result =
                panic::catch_unwind(AssertUnwindSafe(|| check_fuzz_input(input, &formats)))
                    .unwrap_or_else(|_| Err("panicked".into()));
            if tx.send((start.elapsed(), result)).is_err() {
                return;
            }
        }
    });
    let mut slowest = Duration::ZERO;
    let mut accepted = 0;
    for (i, input) in inputs.iter().enumerate() {
        let shown = String::from_utf8_lossy(input);
        let (elapsed, result) = rx
            .recv_timeout(limit.max(Duration::from_secs(2)))
            .map_err(|_| format!("input #{i} hung: {shown:?}"))?;
        if elapsed > limit {
            return Err(format!("input #{i} took {elapsed:?}: {shown:?}"));
        }
        match result {
            Ok(()) => accepted += 1,
            Err(e) => return Err(format!("input #{i}: {e}: {shown:?}")),
        }
        slowest = slowest.max(elapsed);
    }
    Ok(format!(
        "{count} fuzz inputs, 0 crashes, 0 hangs, slowest {slowest:?}, {accepted} handled"
    ))
}

// ---------------------------------------------------------------------------
// Rule engine
// ---------------------------------------------------------------------------

pub fn engine_base(facts: &[(String, Value)]) -> FactBase {
    FactBase::from_facts(facts.iter().map(|(a, v)| Fact::new(id(a), v.clone()))).unwrap()
}

fn engine_outcome(initial: &[(String, Value)], rules: Vec<ProductionRule>) -> oracle::RefOutcome {
    let set = RuleSet::new(rules).unwrap();
    match run_forward_chain(&engine_base(initial), &set) {
        Ok((base, trace)) => oracle::RefOutcome::Done {
            facts: base
                .iter()
                .map(|(a, v)| (a.as_str().to_owned(), v.clone()))
                .collect(),
            trace: trace.rule_ids().map(|r| r.as_str().to_owned()).collect(),
        },
        Err(e) => oracle::RefOutcome::Conflict {
            rule: e.rule_id.as_str().to_owned(),
            attribute: e.conflict.attribute.as_str().to_owned(),
        },
    }
}

/// Engine against the reference chainer on `count` random systems, with a
/// shuffled rule order per system and exhaustive enumeration on small ones.
pub fn rule_engine_oracle(count: usize, seed: u64) -> Outcome {
    let start = Instant::now();
    let mut rng = gen::rng(seed);
    let mut fired = 0;
    let mut conflicts = 0;
    let mut enumerated = 0;
    for i in 0..count {
        let (initial, rules) = oracle::random_system(&mut rng, 20);
        let expected = oracle::reference_chain(&initial, &rules);
        let engine: Vec<ProductionRule> = rules.iter().map(oracle::to_engine_rule).collect();
        let got = engine_outcome(&initial, engine.clone());
        if got != expected {
            return Err(format!(
                "system #{i}: engine {got:?} != reference {expected:?}\n{initial:?}\n{rules:#?}"
            ));
        }
        let mut shuffled = engine;
        shuffled.shuffle(&mut rng);
        let permuted = engine_outcome(&initial, shuffled);
        if permuted != got {
            return Err(format!("system #{i}: permuted order gives {permuted:?}"));
        }
        if rules.len() <= 7 {
            let least = oracle::all_maximal_sequences(&initial, &rules)
                .into_iter()
                .min_by(|a, b| a.0.cmp(&b.0))
                .map(|(_, outcome)| outcome)
                .unwrap();
            if least != expected {
                return Err(format!("system #{i}: least maximal sequence {least:?}"));
            }
            enumerated += 1;
        }
        match &got {
            oracle::RefOutcome::Done { trace, .. } => fired += trace.len(),
            oracle::RefOutcome::Conflict { .. } => conflicts += 1,
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(30) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "{count} systems match reference and permutations ({enumerated} enumerated, {fired} firings, {conflicts} conflicts) in {elapsed:?}"
    ))
}

// ---------------------------------------------------------------------------
// Recommender
// ---------------------------------------------------------------------------

/// A rule set that derives `derived` from `trigger = true`, or nothing when
/// `derived` is empty.
fn deriving_rules(derived: &[(String, Value)]) -> RuleSet {
    if derived.is_empty() {
        return RuleSet::new(Vec::new()).unwrap();
    }
    let rule = ProductionRule::new(
        id("derive"),
        0,
        vec![Condition::new(id("trigger"), Test::Eq(Value::Bool(true))).unwrap()],
        derived
            .iter()
            .map(|(a, v)| Fact::new(id(a), v.clone()))
            .collect(),
    )
    .unwrap();
    RuleSet::new(vec![rule]).unwrap()
}

fn ranked_ids(
    catalog: &[TemplateSpec],
    derived: &[(String, Value)],
    k: usize,
) -> Vec<(String, usize, usize)> {
    let base = engine_base(&[("trigger".to_owned(), Value::Bool(true))]);
    recommend(
        &base,
        &deriving_rules(derived),
        catalog,
        NonZeroUsize::new(k).unwrap(),
    )
    .unwrap()
    .into_iter()
    .map(|r| {
        (
            r.template_id.as_str().to_owned(),
            r.score.matched,
            r.score.total,
        )
    })
    .collect()
}

pub fn recommender_oracle(count: usize, seed: u64) -> Outcome {
    let mut rng = gen::rng(seed);
    let mut ties = 0;
    for i in 0..count {
        let size = rng.random_range(0..=50);
        let mut ids: Vec<String> = (0..size)
            .map(|j| format!("t{:03}", (j * 37) % 101))
            .collect();
        ids.shuffle(&mut rng);
        let catalog: Vec<TemplateSpec> = ids
            .iter()
            .map(|t| gen::ranking_template(&mut rng, t))
            .collect();
        let derived = gen::derived_facts(&mut rng);
        let k = rng.random_range(1..=60);
        let mut expected = oracle::reference_ranking(&catalog, &derived);
        ties += expected.windows(2).filter(|w| w[0].1 == w[1].1).count();
        expected.truncate(k);
        let got = ranked_ids(&catalog, &derived, k);
        if got != expected {
            return Err(format!("catalog #{i}: got {got:?}, expected {expected:?}"));
        }
    }
    Ok(format!(
        "{count} catalogs match exhaustive ranking ({ties} adjacent ties)"
    ))
}

/// Catalogs of identically scored templates listed in scrambled order must
/// come back in ascending id order.
pub fn tie_fixtures() -> Outcome {
    let derived = vec![
        ("rec_audience".to_owned(), Value::from("b2b")),
        ("rec_stage".to_owned(), Value::from("awareness")),
    ];
    let template = |name: &str, meta: &[(&str, &str)]| {
        let meta = meta.iter().map(|(k, v)| (id(k), Value::from(*v))).collect();
        TemplateSpec::new(
            id(name),
            id("google_adwords"),
            vec![PartSpec {
                kind: StructuralPartKind::Title,
                semantics: BTreeSet::from([SemanticTag::new("usp_focus").unwrap()]),
                format: Format::new("statement").unwrap(),
                budget: CharacterBudget::new(60, 0),
                pattern: Pattern::literal("x"),
            }],
            meta,
        )
        .unwrap()
    };
    let fixtures: Vec<(Vec<TemplateSpec>, Vec<&str>)> = vec![
        (
            vec![
                template("zulu", &[("audience", "b2b")]),
                template("alpha", &[("audience", "b2b")]),
                template("mike", &[("audience", "b2b")]),
            ],
            vec!["alpha", "mike", "zulu"],
        ),
        (
            vec![
                template("b_half", &[("stage", "awareness")]),
                template("c_full", &[("audience", "b2b"), ("stage", "awareness")]),
                template("a_half", &[("audience", "b2b")]),
                template("a_none", &[]),
                template("a_full", &[("audience", "b2b"), ("stage", "awareness")]),
            ],
            vec!["a_full", "c_full", "a_half", "b_half", "a_none"],
        ),
    ];
    for (catalog, expected) in &fixtures {
        for _ in 0..2 {
            let mut reversed = catalog.clone();
            reversed.reverse();
            for order in [catalog, &reversed] {
                let got: Vec<String> = ranked_ids(order, &derived, 10)
                    .into_iter()
                    .map(|r| r.0)
                    .collect();
                if got != *expected {
                    return Err(format!("tie fixture: got {got:?}, expected {expected:?}"));
                }
            }
        }
    }
    Ok(format!("{} tie fixtures ordered by id", fixtures.len()))
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

pub fn render_arithmetic(count: usize, seed: u64) -> Outcome {
    let mut rng = gen::rng(seed);
    let mut over_budget = 0;
    for i in 0..count {
        let slots = gen::slot_pool(&mut rng);
        let raw = gen::segments(&mut rng, &slots);
        let pattern = Pattern::from_segments(raw.clone());
        let source = pattern.to_source();
        if Pattern::parse(&source).as_ref() != Ok(&pattern) {
            return Err(format!(
                "pair #{i}: pattern source {source:?} does not reparse"
            ));
        }
        let mut bindings: BTreeMap<String, String> = slots
            .iter()
            .map(|s| {
                // values that look like slots must stay literal
                let value = if rng.random_bool(0.1) {
                    format!("{{{s}}}")
                } else {
                    gen::text(&mut rng, 40)
                };
                (s.clone(), value)
            })
            .collect();
        if rng.random_bool(0.2) {
            bindings.insert("unused_extra".into(), "zzz".into());
        }
        let budget = CharacterBudget::new(rng.random_range(0..60), rng.random_range(0..20));
        let spec = TemplateSpec::new(
            id("arith"),
            id("arith_channel"),
            vec![PartSpec {
                kind: StructuralPartKind::Title,
                semantics: BTreeSet::from([SemanticTag::new("usp_focus").unwrap()]),
                format: Format::new("statement").unwrap(),
                budget,
                pattern,
            }],
            BTreeMap::new(),
        )
        .unwrap();
        let rendered = fill_slots(&spec, &bindings).map_err(|e| format!("pair #{i}: {e}"))?;
        let text = &rendered.message.parts[&StructuralPartKind::Title];
        let expected = oracle::reference_render(&raw, &bindings);
        if *text != expected {
            return Err(format!(
                "pair #{i}: rendered {text:?}, expected {expected:?}"
            ));
        }
        let predicted = oracle::predicted_length(&source, &raw, &bindings);
        if text.chars().count() != predicted {
            return Err(format!(
                "pair #{i}: length {} != predicted {predicted} for {source:?}",
                text.chars().count()
            ));
        }
        let channel = ChannelProfile::new(
            id("arith_channel"),
            "arith",
            BTreeMap::new(),
            BTreeSet::new(),
        )
        .unwrap();
        let report = validate_message(&rendered.message, &spec, &channel).unwrap();
        let check = &report.parts[0];
        if check.text != *text || check.count != predicted {
            return Err(format!("pair #{i}: report altered the text"));
        }
        let exceeded = predicted as u64 > budget.limit();
        if exceeded != (report.verdict == Verdict::Fail) {
            return Err(format!(
                "pair #{i}: verdict {:?} for {predicted} vs {budget}",
                report.verdict
            ));
        }
        over_budget += usize::from(exceeded);
    }
    Ok(format!(
        "{count} pairs match predicted length, 0 truncations ({over_budget} reported over budget)"
    ))
}

// ---------------------------------------------------------------------------
// Demo data
// ---------------------------------------------------------------------------

pub fn demo_rule_sets() -> BTreeMap<Ident, RuleSet> {
    load_rule_sets(&demo_dir().join("rules")).expect("demo rules load")
}

/// Loads the demo data and checks the fixed recommendation for the demo facts.
pub fn demo_recommendation() -> Outcome {
    let catalog = demo_catalog();
    let rules = &demo_rule_sets()[&id("demo")];
    let base = engine_base(&[
        ("audience".into(), Value::from("b2b")),
        ("stage".into(), Value::from("awareness")),
    ]);
    let ranked = recommend(
        &base,
        rules,
        catalog.templates(),
        NonZeroUsize::new(10).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    let got: Vec<(&str, usize, usize)> = ranked
        .iter()
        .map(|r| (r.template_id.as_str(), r.score.matched, r.score.total))
        .collect();
    let expected = vec![
        ("b2b_awareness_pain", 3, 3),
        ("b2b_awareness_question", 2, 3),
        ("b2b_consideration_roi", 1, 3),
        ("b2c_awareness_story", 1, 3),
        ("full_structure_showcase", 1, 3),
        ("b2c_trial_offer", 0, 3),
    ];
    if got != expected {
        return Err(format!("demo ranking {got:?}"));
    }
    let trace: Vec<&str> = ranked[0].trace.rule_ids().map(|r| r.as_str()).collect();
    if trace != ["b2b_awareness_problem", "b2b_audience"] {
        return Err(format!("demo trace {trace:?}"));
    }
    Ok("demo facts rank b2b_awareness_pain first".into())
}

pub fn load_text(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
