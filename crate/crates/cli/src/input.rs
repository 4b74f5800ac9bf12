use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use gradcons::cra::{load_fixtures_from, FixtureError, EMBEDDED};
use gradcons::format::{parse_document, Document, FormatError};
use gradcons::{load_fixtures, Constraint, CraFixtures, Rule, TypedGraph};

pub const FIXTURES_ENV: &str = "GRADCONS_FIXTURES";

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or syntactically malformed input.
    Parse(String),
    /// Input parses but is not a valid graph, constraint or rule, or the
    /// inputs do not fit together.
    Validation(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Validation(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

pub fn format_error(source: &str, e: FormatError) -> CliError {
    if e.is_parse_error() {
        CliError::Parse(format!("{source}: {e}"))
    } else {
        CliError::Validation(format!("{source}: {e}"))
    }
}

pub fn fixture_error(e: FixtureError) -> CliError {
    match &e {
        FixtureError::Io { .. } => CliError::Parse(e.to_string()),
        FixtureError::Format { source, .. } if source.is_parse_error() => CliError::Parse(e.to_string()),
        _ => CliError::Validation(e.to_string()),
    }
}

fn fixture_dir() -> Option<PathBuf> {
    std::env::var_os(FIXTURES_ENV).map(PathBuf::from)
}

/// Reads `path`, falling back to `path.json`. Paths under `fixtures/` that
/// do not exist locally name the case-study fixtures: the directory in
/// `GRADCONS_FIXTURES` when set, the built-in copies otherwise.
pub fn read_source(path: &str) -> Result<String, CliError> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", p.display())));
    for candidate in [PathBuf::from(path), PathBuf::from(format!("{path}.json"))] {
        if candidate.is_file() {
            return read(&candidate);
        }
    }
    if let Some(rest) = path.strip_prefix("fixtures/") {
        let file = format!("{}.json", rest.trim_end_matches(".json"));
        if let Some(dir) = fixture_dir() {
            return read(&dir.join(file));
        }
        if let Some((_, text)) = EMBEDDED.iter().find(|(f, _)| *f == file) {
            return Ok((*text).to_owned());
        }
    }
    Err(CliError::Parse(format!("cannot read {path}: no such file")))
}

pub fn load_document(path: &str) -> Result<Document, CliError> {
    parse_document(&read_source(path)?).map_err(|e| format_error(path, e))
}

fn wrong_kind(path: &str, want: &str, got: &Document) -> CliError {
    let got = match got {
        Document::Graph(_) => "graph",
        Document::Constraint(_) => "constraint",
        Document::Rule(_) => "rule",
    };
    CliError::Parse(format!("{path}: expected a {want} document, found a {got}"))
}

pub fn load_graph(path: &str) -> Result<Arc<TypedGraph>, CliError> {
    match load_document(path)? {
        Document::Graph(g) => Ok(Arc::new(g)),
        other => Err(wrong_kind(path, "graph", &other)),
    }
}

pub fn load_constraint(path: &str) -> Result<Constraint, CliError> {
    match load_document(path)? {
        Document::Constraint(c) => Ok(c),
        other => Err(wrong_kind(path, "constraint", &other)),
    }
}

pub fn load_rule(path: &str) -> Result<Rule, CliError> {
    match load_document(path)? {
        Document::Rule(r) => Ok(r),
        other => Err(wrong_kind(path, "rule", &other)),
    }
}

pub fn load_case_study() -> Result<CraFixtures, CliError> {
    match fixture_dir() {
        Some(dir) => load_fixtures_from(&dir),
        None => load_fixtures(),
    }
    .map_err(fixture_error)
}

pub fn same_types(g: &TypedGraph, other: &TypedGraph, what: &str) -> Result<(), CliError> {
    if **g.type_graph() == **other.type_graph() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{what} use different type graphs")))
    }
}
