//! The `cmf` command line. Subcommands follow the design stages: lint
//! templates, recommend one, render it, browse the catalog, serve the API.
//!
//! Exit codes: 0 success, 1 domain failure (diagnostics, violations, unknown
//! ids, conflicts), 2 usage error.

use std::collections::BTreeMap;
use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use cmf_core::catalog_store::{load_format_vocabulary, LoadError, TEMPLATE_EXTENSION};
use cmf_core::composer::Verdict;
use cmf_core::template_dsl::{parse_bytes, ParseDiagnostic};
use cmf_core::Ident;
use serde::Serialize;
use serde_json::json;

use crate::api::{self, ApiError, ComposeRequest, ErrorCode, RecommendRequest};
use crate::http;
use crate::snapshot::{DataPaths, SharedSnapshot, Snapshot};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cmf",
    version,
    about = "Design ad copy from rule-recommended message templates"
)]
pub struct Cli {
    /// Print JSON instead of tables
    #[arg(long, global = true)]
    pub json: bool,
    /// Data directory holding catalog/, rules/ and channels.json
    #[arg(long, global = true, env = "CMF_DATA", default_value = "data")]
    pub data: PathBuf,
    /// Template catalog directory [default: <data>/catalog]
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Rule set directory [default: <data>/rules]
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    /// Channel profile file [default: <data>/channels.json]
    #[arg(long, global = true)]
    pub channels: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse template files and report diagnostics
    Lint {
        /// Files or directories (searched recursively for .cmt files)
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Rank catalog templates for a set of facts
    Recommend {
        /// JSON object of facts, or @FILE
        #[arg(long)]
        facts: String,
        #[arg(long, default_value_t = api::DEFAULT_K, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, default_value = api::DEFAULT_RULESET)]
        ruleset: String,
    },
    /// Fill a template's slots and check it against a channel
    Render {
        #[arg(long)]
        template: String,
        /// JSON object of slot values, or @FILE
        #[arg(long, default_value = "{}")]
        bindings: String,
        /// Channel to check against [default: the template's channel]
        #[arg(long)]
        channel: Option<String>,
    },
    /// Inspect the template catalog
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Run the HTTP API
    Serve {
        #[arg(long, env = "CMF_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogCommand {
    /// List templates with their channel and parts
    List,
}

impl Cli {
    pub fn data_paths(&self) -> DataPaths {
        let mut paths = DataPaths::under(&self.data);
        if let Some(c) = &self.catalog {
            paths.catalog = c.clone();
        }
        if let Some(r) = &self.rules {
            paths.rules = r.clone();
        }
        if let Some(c) = &self.channels {
            paths.channels = c.clone();
        }
        paths
    }
}

struct Output {
    json: bool,
}

impl Output {
    fn json(&self, value: &impl Serialize) {
        println!(
            "{}",
            serde_json::to_string_pretty(value).expect("output serializes")
        );
    }

    fn api_error(&self, e: &ApiError) -> u8 {
        if self.json {
            self.json(e);
        } else {
            eprintln!(
                "error[{}]: {}",
                json!(e.code).as_str().unwrap_or_default(),
                e.message
            );
            if let Some(slots) = e.details.get("slots") {
                eprintln!("  slots: {slots}");
            }
        }
        if e.code.is_usage_error() {
            EXIT_USAGE
        } else {
            EXIT_FAILURE
        }
    }

    fn load_errors(&self, errors: &[LoadError]) -> u8 {
        if self.json {
            self.json(&json!({ "load_errors": errors }));
        } else {
            for e in errors {
                eprintln!("{e}");
            }
        }
        EXIT_FAILURE
    }
}

pub fn run(cli: Cli) -> u8 {
    let out = Output { json: cli.json };
    match &cli.command {
        Command::Lint { paths } => lint(&out, paths),
        Command::Serve { port, host } => serve(&cli, SocketAddr::new(*host, *port)),
        command => {
            let snapshot = match Snapshot::load(&cli.data_paths()) {
                Ok(s) => s,
                Err(errors) => return out.load_errors(&errors),
            };
            match command {
                Command::Recommend { facts, k, ruleset } => {
                    recommend(&out, &snapshot, facts, *k, ruleset)
                }
                Command::Render {
                    template,
                    bindings,
                    channel,
                } => render(&out, &snapshot, template, bindings, channel.as_deref()),
                Command::Catalog(CatalogCommand::List) => catalog_list(&out, &snapshot),
                Command::Lint { .. } | Command::Serve { .. } => unreachable!(),
            }
        }
    }
}

/// Reads `@path` arguments; anything else is taken literally.
fn inline_or_file(arg: &str, what: &str) -> Result<String, ApiError> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| {
            ApiError::new(
                ErrorCode::MalformedJson,
                format!("cannot read {what} file {path}: {e}"),
                json!({ "path": path }),
            )
        }),
        None => Ok(arg.to_owned()),
    }
}

fn parse_object(arg: &str, what: &str) -> Result<serde_json::Value, ApiError> {
    let text = inline_or_file(arg, what)?;
    api::parse_request::<serde_json::Value>(text.as_bytes())
}

fn recommend(out: &Output, snapshot: &Snapshot, facts: &str, k: u64, ruleset: &str) -> u8 {
    let response = parse_object(facts, "facts")
        .and_then(|facts| {
            let body = json!({ "facts": facts, "ruleset_id": ruleset, "k": k });
            api::parse_request::<RecommendRequest>(body.to_string().as_bytes())
        })
        .and_then(|request| api::handle_recommend(snapshot, &request));
    let response = match response {
        Ok(r) => r,
        Err(e) => return out.api_error(&e),
    };
    if out.json {
        out.json(&response);
        return EXIT_OK;
    }
    if response.recommendations.is_empty() {
        println!("no templates in the catalog");
        return EXIT_OK;
    }
    let rows: Vec<Vec<String>> = response
        .recommendations
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                (i + 1).to_string(),
                r.template_id.to_string(),
                format!("{:.3}", r.score.as_f64()),
                format!("{}/{}", r.score.matched, r.score.total),
                r.matched
                    .iter()
                    .map(|f| format!("{}={}", f.attribute, f.value))
                    .collect::<Vec<_>>()
                    .join(" "),
            ]
        })
        .collect();
    print_table(
        &["#", "template", "score", "matched", "matched facts"],
        &rows,
    );
    let fired: Vec<String> = response.recommendations[0]
        .trace
        .rule_ids()
        .map(|r| r.to_string())
        .collect();
    println!(
        "\nrule set {}: fired {}",
        response.ruleset_id,
        if fired.is_empty() {
            "nothing".to_owned()
        } else {
            fired.join(" -> ")
        }
    );
    EXIT_OK
}

fn render(
    out: &Output,
    snapshot: &Snapshot,
    template: &str,
    bindings: &str,
    channel: Option<&str>,
) -> u8 {
    let response = parse_object(bindings, "bindings")
        .and_then(|bindings| {
            let mut body = json!({ "template_id": template, "bindings": bindings });
            if let Some(c) = channel {
                body["channel_id"] = json!(c);
            }
            api::parse_request::<ComposeRequest>(body.to_string().as_bytes())
        })
        .and_then(|request| api::handle_render(snapshot, &request));
    let response = match response {
        Ok(r) => r,
        Err(e) => return out.api_error(&e),
    };
    let verdict = response.validation.verdict;
    if out.json {
        out.json(&response);
    } else {
        println!("{} on {}\n", response.template_id, response.channel_id);
        let rows: Vec<Vec<String>> = response
            .validation
            .parts
            .iter()
            .map(|p| {
                let limit = if p.extension > 0 {
                    format!("{}+{}", p.base, p.extension)
                } else {
                    p.base.to_string()
                };
                vec![
                    p.part.to_string(),
                    format!("{}/{limit}", p.count),
                    json!(p.status).as_str().unwrap_or_default().to_owned(),
                    p.text.clone(),
                ]
            })
            .collect();
        print_table(&["part", "length", "status", "text"], &rows);
        for w in &response.validation.warnings {
            println!("warning: {}", describe(w.part, &w.detail));
        }
        for v in &response.validation.violations {
            println!("violation: {}", describe(v.part, &v.detail));
        }
        if !response.unused_bindings.is_empty() {
            println!("unused bindings: {}", response.unused_bindings.join(", "));
        }
        println!("\nverdict: {}", json!(verdict).as_str().unwrap_or_default());
    }
    match verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAILURE,
    }
}

fn describe(part: Option<cmf_core::StructuralPartKind>, detail: &str) -> String {
    match part {
        Some(p) => format!("{p}: {detail}"),
        None => detail.to_owned(),
    }
}

fn catalog_list(out: &Output, snapshot: &Snapshot) -> u8 {
    let response = api::handle_templates(snapshot);
    if out.json {
        out.json(&response);
        return EXIT_OK;
    }
    let rows: Vec<Vec<String>> = response
        .templates
        .iter()
        .map(|t| {
            vec![
                t.id.to_string(),
                t.channel.to_string(),
                t.parts
                    .iter()
                    .map(|p| format!("{}({})", p.kind, p.format))
                    .collect::<Vec<_>>()
                    .join(" "),
                t.slots
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(" "),
            ]
        })
        .collect();
    print_table(&["template", "channel", "parts", "slots"], &rows);
    EXIT_OK
}

fn print_table(headers: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        println!("{}", padded.join("  ").trim_end());
    };
    line(headers.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
}

// ---------------------------------------------------------------------------
// Lint
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct LintFile {
    pub path: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub template_id: Option<Ident>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

#[derive(Debug, Serialize)]
pub struct LintReport {
    pub files: Vec<LintFile>,
    pub errors: usize,
    pub warnings: usize,
}

fn collect(path: &Path, out: &mut Vec<(PathBuf, PathBuf)>, root: &Path) -> std::io::Result<()> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        entries.sort();
        for entry in entries {
            if entry.is_dir() || entry.extension().is_some_and(|e| e == TEMPLATE_EXTENSION) {
                collect(&entry, out, root)?;
            }
        }
    } else {
        out.push((path.to_path_buf(), root.to_path_buf()));
    }
    Ok(())
}

/// Parses each file against the shipped formats plus the `formats.json` of
/// the directory it was named through. Template ids must be unique across
/// all files.
pub fn lint_paths(paths: &[PathBuf]) -> Result<LintReport, Vec<LoadError>> {
    let mut files = Vec::new();
    let mut errors = Vec::new();
    for p in paths {
        let root = if p.is_dir() {
            p.clone()
        } else {
            p.parent().map(Path::to_path_buf).unwrap_or_default()
        };
        if !p.exists() {
            errors.push(LoadError {
                path: p.clone(),
                line: None,
                column: None,
                message: "no such file or directory".into(),
            });
            continue;
        }
        if let Err(e) = collect(p, &mut files, &root) {
            errors.push(LoadError {
                path: p.clone(),
                line: None,
                column: None,
                message: e.to_string(),
            });
        }
    }
    let mut vocabularies = BTreeMap::new();
    let mut seen: BTreeMap<Ident, PathBuf> = BTreeMap::new();
    let mut report = LintReport {
        files: Vec::new(),
        errors: 0,
        warnings: 0,
    };
    for (path, root) in files {
        if !vocabularies.contains_key(&root) {
            match load_format_vocabulary(&root) {
                Ok(v) => {
                    vocabularies.insert(root.clone(), v);
                }
                Err(e) => {
                    errors.push(e.into_load_error());
                    continue;
                }
            }
        }
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                errors.push(LoadError {
                    path,
                    line: None,
                    column: None,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let parsed = parse_bytes(&bytes, &vocabularies[&root]);
        let mut diagnostics = parsed.diagnostics;
        let template_id = parsed.spec.map(|s| s.id().clone());
        if let Some(id) = &template_id {
            if let Some(first) = seen.get(id) {
                diagnostics.push(ParseDiagnostic {
                    severity: cmf_core::template_dsl::Severity::Error,
                    message: format!(
                        "duplicate template id '{id}': also declared in {}",
                        first.display()
                    ),
                    line: 1,
                    column: 1,
                });
            } else {
                seen.insert(id.clone(), path.clone());
            }
        }
        report.errors += diagnostics.iter().filter(|d| d.is_error()).count();
        report.warnings += diagnostics.iter().filter(|d| !d.is_error()).count();
        report.files.push(LintFile {
            path,
            template_id,
            diagnostics,
        });
    }
    if errors.is_empty() {
        Ok(report)
    } else {
        Err(errors)
    }
}

fn lint(out: &Output, paths: &[PathBuf]) -> u8 {
    let report = match lint_paths(paths) {
        Ok(r) => r,
        Err(errors) => return out.load_errors(&errors),
    };
    if out.json {
        out.json(&report);
    } else {
        for f in &report.files {
            for d in &f.diagnostics {
                println!("{}:{d}", f.path.display());
            }
        }
        println!(
            "{} files, {} errors, {} warnings",
            report.files.len(),
            report.errors,
            report.warnings
        );
    }
    if report.errors == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

// ---------------------------------------------------------------------------
// Serve
// ---------------------------------------------------------------------------

fn serve(cli: &Cli, addr: SocketAddr) -> u8 {
    let out = Output { json: cli.json };
    let paths = cli.data_paths();
    let snapshot = match Snapshot::load(&paths) {
        Ok(s) => s,
        Err(errors) => return out.load_errors(&errors),
    };
    eprintln!(
        "cmf: {} templates, {} rule sets",
        snapshot.catalog().len(),
        snapshot.rule_sets().len()
    );
    let state = Arc::new(SharedSnapshot::new(snapshot, Some(paths)));
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("cmf: cannot start runtime: {e}");
            return EXIT_FAILURE;
        }
    };
    match runtime.block_on(http::serve(state, addr)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("cmf: {addr}: {e}");
            EXIT_FAILURE
        }
    }
}
