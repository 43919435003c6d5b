//! LL(1) recursive-descent parser for `.cmt` files.
//!
//! Syntax errors stop parsing. Semantic errors (unknown names, duplicates,
//! bad budgets, pattern errors) are recorded and parsing continues so that
//! one run reports as many problems as possible.

use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{Lexer, Token, TokenKind};
use super::pattern::Pattern;
use super::{ParseDiagnostic, ParseOutput, Position};
use crate::domain_model::{
    CharacterBudget, Format, FormatVocabulary, Ident, PartSpec, SemanticTag, StructuralPartKind,
    TemplateSpec, Value, SHIPPED_SEMANTIC_TAGS,
};

/// Marker for a syntax error already recorded in the diagnostics.
struct Fatal;

type PResult<T> = Result<T, Fatal>;

pub(crate) fn parse(text: &str, formats: &FormatVocabulary) -> ParseOutput {
    let tokens = match Lexer::new(text).tokenize() {
        Ok(tokens) => tokens,
        Err(e) => {
            return ParseOutput {
                spec: None,
                diagnostics: vec![ParseDiagnostic::error(e.message, e.pos)],
            }
        }
    };
    let mut parser = Parser {
        tokens,
        index: 0,
        formats,
        diagnostics: Vec::new(),
    };
    let spec = parser.file().ok().flatten();
    let failed = parser.diagnostics.iter().any(ParseDiagnostic::is_error);
    ParseOutput {
        spec: if failed { None } else { spec },
        diagnostics: parser.diagnostics,
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    index: usize,
    formats: &'a FormatVocabulary,
    diagnostics: Vec<ParseDiagnostic>,
}

#[derive(Default)]
struct PartFields {
    semantics: Option<BTreeSet<SemanticTag>>,
    format: Option<Format>,
    budget: Option<CharacterBudget>,
    pattern: Option<Pattern>,
    // A field was present but invalid; don't also report it as missing.
    invalid: BTreeSet<&'static str>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.index]
    }

    fn next(&mut self) -> Token {
        let tok = self.tokens[self.index].clone();
        if self.index + 1 < self.tokens.len() {
            self.index += 1;
        }
        tok
    }

    fn error(&mut self, message: impl Into<String>, pos: Position) {
        self.diagnostics.push(ParseDiagnostic::error(message, pos));
    }

    fn warning(&mut self, message: impl Into<String>, pos: Position) {
        self.diagnostics
            .push(ParseDiagnostic::warning(message, pos));
    }

    fn fatal<T>(&mut self, message: impl Into<String>, pos: Position) -> PResult<T> {
        self.error(message, pos);
        Err(Fatal)
    }

    fn expected<T>(&mut self, what: &str) -> PResult<T> {
        let tok = self.peek().clone();
        self.fatal(
            format!("expected {what}, found {}", tok.kind.describe()),
            tok.pos,
        )
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<Position> {
        if self.peek().kind == kind {
            Ok(self.next().pos)
        } else {
            self.expected(what)
        }
    }

    fn expect_word(&mut self, what: &str) -> PResult<(String, Position)> {
        match self.peek().kind.clone() {
            TokenKind::Word(w) => Ok((w, self.next().pos)),
            _ => self.expected(what),
        }
    }

    fn expect_str(&mut self, what: &str) -> PResult<(String, Vec<Position>, Position)> {
        match self.peek().kind.clone() {
            TokenKind::Str(s, positions) => Ok((s, positions, self.next().pos)),
            _ => self.expected(what),
        }
    }

    fn file(&mut self) -> PResult<Option<TemplateSpec>> {
        match &self.peek().kind {
            TokenKind::Word(w) if w == "template" => {}
            _ => return self.expected("'template'"),
        }
        let spec = self.template()?;
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Eof => Ok(spec),
            TokenKind::Word(w) if w == "template" => self.fatal(
                "duplicate template declaration: a file holds exactly one template",
                tok.pos,
            ),
            _ => self.expected("end of file"),
        }
    }

    fn template(&mut self) -> PResult<Option<TemplateSpec>> {
        let template_pos = self.next().pos;
        let (raw_id, _, id_pos) = self.expect_str("template id string")?;
        let id = match Ident::new(raw_id.clone()) {
            Ok(id) => Some(id),
            Err(_) => {
                self.error(
                    format!("invalid template id {raw_id:?}: expected [a-z][a-z0-9_]*"),
                    id_pos,
                );
                None
            }
        };
        let open = self.expect(TokenKind::LBrace, "'{'")?;

        let mut channel: Option<Option<Ident>> = None;
        let mut metadata = BTreeMap::new();
        let mut parts: Vec<(PartSpec, Position)> = Vec::new();
        let mut seen_kinds = BTreeSet::new();
        let mut part_errors = false;

        loop {
            let tok = self.peek().clone();
            match tok.kind {
                TokenKind::RBrace => {
                    self.next();
                    break;
                }
                TokenKind::Eof => {
                    return self.fatal("unclosed template block: expected '}'", open);
                }
                TokenKind::Word(w) if w == "channel" => {
                    self.next();
                    self.expect(TokenKind::Colon, "':'")?;
                    let (value, _, pos) = self.expect_str("channel id string")?;
                    let parsed = Ident::new(value.clone()).ok();
                    if parsed.is_none() {
                        self.error(
                            format!("invalid channel id {value:?}: expected [a-z][a-z0-9_]*"),
                            pos,
                        );
                    }
                    if channel.is_some() {
                        self.error("duplicate field 'channel'", tok.pos);
                    } else {
                        channel = Some(parsed);
                    }
                }
                TokenKind::Word(w) if w == "meta" => {
                    self.next();
                    let (key, key_pos) = self.expect_word("metadata attribute name")?;
                    self.expect(TokenKind::Colon, "':'")?;
                    let value = self.meta_value()?;
                    match Ident::new(key.clone()) {
                        Err(_) => self.error(
                            format!("invalid metadata attribute {key:?}: expected [a-z][a-z0-9_]*"),
                            key_pos,
                        ),
                        Ok(key) if metadata.contains_key(&key) => {
                            self.error(format!("duplicate meta attribute '{key}'"), key_pos)
                        }
                        Ok(key) => {
                            metadata.insert(key, value);
                        }
                    }
                }
                TokenKind::Word(w) if w == "part" => {
                    self.next();
                    let (kind, part) = self.part(tok.pos)?;
                    if let Some(kind) = kind {
                        if !seen_kinds.insert(kind) {
                            self.error(format!("duplicate part '{kind}'"), tok.pos);
                            continue;
                        }
                    }
                    match part {
                        Some(part) => parts.push((part, tok.pos)),
                        None => part_errors = true,
                    }
                }
                _ => return self.expected("'channel', 'meta', 'part' or '}'"),
            }
        }

        let channel = match channel {
            Some(c) => c,
            None => {
                self.error("template is missing field 'channel'", template_pos);
                None
            }
        };

        if parts.windows(2).any(|w| w[0].0.kind > w[1].0.kind) {
            self.warning(
                "parts are not in canonical order (tagline, title, main_text, reference_info, echo_phrase); reordered",
                parts[0].1,
            );
            parts.sort_by_key(|(p, _)| p.kind);
        }

        let (Some(id), Some(channel), false) = (id, channel, part_errors) else {
            return Ok(None);
        };
        let parts = parts.into_iter().map(|(p, _)| p).collect();
        match TemplateSpec::new(id, channel, parts, metadata) {
            Ok(spec) => Ok(Some(spec)),
            Err(e) => {
                self.error(e.to_string(), template_pos);
                Ok(None)
            }
        }
    }

    fn meta_value(&mut self) -> PResult<Value> {
        let tok = self.peek().clone();
        let value = match tok.kind {
            TokenKind::Str(s, _) => Value::Str(s),
            TokenKind::Int(i) => match i64::try_from(i) {
                Ok(i) => Value::Int(i),
                Err(_) => return self.fatal("integer out of range", tok.pos),
            },
            TokenKind::Word(w) if w == "true" => Value::Bool(true),
            TokenKind::Word(w) if w == "false" => Value::Bool(false),
            _ => return self.expected("a string, integer or boolean"),
        };
        self.next();
        Ok(value)
    }

    /// Returns the part kind if it was recognised, and the part itself unless
    /// it had semantic errors (already reported).
    fn part(
        &mut self,
        part_pos: Position,
    ) -> PResult<(Option<StructuralPartKind>, Option<PartSpec>)> {
        let (kind_name, kind_pos) = self.expect_word("part kind")?;
        let kind = match kind_name.parse::<StructuralPartKind>() {
            Ok(k) => Some(k),
            Err(_) => {
                self.error(
                    format!(
                        "unknown part kind '{kind_name}': expected one of tagline, title, main_text, reference_info, echo_phrase"
                    ),
                    kind_pos,
                );
                None
            }
        };
        let open = self.expect(TokenKind::LBrace, "'{'")?;
        let errors_before = self.error_count();
        let mut fields = PartFields::default();

        loop {
            let tok = self.peek().clone();
            let name = match tok.kind {
                TokenKind::RBrace => {
                    self.next();
                    break;
                }
                TokenKind::Eof => return self.fatal("unclosed part block: expected '}'", open),
                TokenKind::Word(w)
                    if matches!(w.as_str(), "semantics" | "format" | "budget" | "text") =>
                {
                    w
                }
                _ => return self.expected("'semantics', 'format', 'budget', 'text' or '}'"),
            };
            self.next();
            self.expect(TokenKind::Colon, "':'")?;
            let duplicate = match name.as_str() {
                "semantics" => {
                    let tags = self.semantics()?;
                    set_once(
                        &mut fields.semantics,
                        tags,
                        &mut fields.invalid,
                        "semantics",
                    )
                }
                "format" => {
                    let format = self.format()?;
                    set_once(&mut fields.format, format, &mut fields.invalid, "format")
                }
                "budget" => {
                    let budget = self.budget()?;
                    set_once(&mut fields.budget, budget, &mut fields.invalid, "budget")
                }
                _ => {
                    let pattern = self.text()?;
                    set_once(&mut fields.pattern, pattern, &mut fields.invalid, "text")
                }
            };
            if duplicate {
                self.error(format!("duplicate field '{name}'"), tok.pos);
            }
        }

        let Some(kind) = kind else {
            return Ok((None, None));
        };
        for (field, missing) in [
            ("format", fields.format.is_none()),
            ("budget", fields.budget.is_none()),
            ("text", fields.pattern.is_none()),
        ] {
            if missing && !fields.invalid.contains(field) {
                self.error(
                    format!("part '{kind}' is missing field '{field}'"),
                    part_pos,
                );
            }
        }
        let semantics = fields.semantics.unwrap_or_default();
        if semantics.is_empty()
            && kind != StructuralPartKind::ReferenceInfo
            && !fields.invalid.contains("semantics")
        {
            self.error(
                format!("part '{kind}' must declare at least one semantic tag"),
                part_pos,
            );
        }
        if self.error_count() > errors_before {
            return Ok((Some(kind), None));
        }
        let (Some(format), Some(budget), Some(pattern)) =
            (fields.format, fields.budget, fields.pattern)
        else {
            return Ok((Some(kind), None));
        };
        let literal = pattern.literal_len() as u64;
        if literal > budget.limit() {
            self.warning(
                format!(
                    "literal text of part '{kind}' is {literal} code points, over its budget limit {}",
                    budget.limit()
                ),
                part_pos,
            );
        }
        Ok((
            Some(kind),
            Some(PartSpec {
                kind,
                semantics,
                format,
                budget,
                pattern,
            }),
        ))
    }

    fn error_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.is_error()).count()
    }

    /// `Ok(None)` means the value was syntactically fine but invalid (reported).
    fn semantics(&mut self) -> PResult<Option<BTreeSet<SemanticTag>>> {
        self.expect(TokenKind::LBracket, "'['")?;
        let mut tags = BTreeSet::new();
        let mut valid = true;
        if self.peek().kind != TokenKind::RBracket {
            loop {
                let (name, pos) = self.expect_word("semantic tag")?;
                match SemanticTag::new(name.clone()) {
                    Ok(tag) => {
                        if !SHIPPED_SEMANTIC_TAGS.contains(&tag.as_str()) {
                            self.warning(
                                format!("semantic tag '{tag}' is not in the shipped vocabulary"),
                                pos,
                            );
                        }
                        if !tags.insert(tag) {
                            self.warning(format!("semantic tag '{name}' listed twice"), pos);
                        }
                    }
                    Err(_) => {
                        valid = false;
                        self.error(
                            format!("invalid semantic tag {name:?}: expected [a-z][a-z0-9_]*"),
                            pos,
                        );
                    }
                }
                if self.peek().kind == TokenKind::Comma {
                    self.next();
                    if self.peek().kind == TokenKind::RBracket {
                        break;
                    }
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RBracket, "',' or ']'")?;
        Ok(valid.then_some(tags))
    }

    fn format(&mut self) -> PResult<Option<Format>> {
        let (name, pos) = self.expect_word("format name")?;
        if !self.formats.contains(&name) {
            self.error(format!("unknown format '{name}'"), pos);
            return Ok(None);
        }
        Ok(Format::new(name).ok())
    }

    fn budget(&mut self) -> PResult<Option<CharacterBudget>> {
        let base = self.budget_number()?;
        let extension = if self.peek().kind == TokenKind::Plus {
            self.next();
            self.budget_number()?
        } else {
            Some(0)
        };
        Ok(base.zip(extension).map(|(b, e)| CharacterBudget::new(b, e)))
    }

    fn budget_number(&mut self) -> PResult<Option<u32>> {
        let tok = self.peek().clone();
        let TokenKind::Int(n) = tok.kind else {
            return self.expected("budget (N or N+M)");
        };
        self.next();
        if n < 0 {
            self.error(format!("negative budget {n}"), tok.pos);
            return Ok(None);
        }
        match u32::try_from(n) {
            Ok(n) => Ok(Some(n)),
            Err(_) => {
                self.error(format!("budget {n} too large"), tok.pos);
                Ok(None)
            }
        }
    }

    fn text(&mut self) -> PResult<Option<Pattern>> {
        let (text, positions, pos) = self.expect_str("text string")?;
        match Pattern::parse(&text) {
            Ok(p) => Ok(Some(p)),
            Err(e) => {
                let at = positions.get(e.offset).copied().unwrap_or(pos);
                self.error(e.kind.to_string(), at);
                Ok(None)
            }
        }
    }
}

/// Stores the first value of a field; returns true on a duplicate.
fn set_once<T>(
    slot: &mut Option<T>,
    value: Option<T>,
    invalid: &mut BTreeSet<&'static str>,
    name: &'static str,
) -> bool {
    if slot.is_some() || invalid.contains(name) {
        return true;
    }
    match value {
        Some(v) => *slot = Some(v),
        None => {
            invalid.insert(name);
        }
    }
    false
}
