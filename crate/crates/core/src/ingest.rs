//! Readers for the supported input formats and the dataset filters.
//!
//! Three inputs are understood: miner console text (one message per line),
//! JSON lines, and a normalized CSV export of a refactoring oracle.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Read, Write};
use std::sync::OnceLock;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use log::warn;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::IngestError;
use crate::model::{ElementRef, Member, RefactoringKind, RefactoringRecord};

/// Per-input context that miner console output does not carry per line.
#[derive(Debug, Clone, Default)]
pub struct MessageContext {
    pub project: String,
    pub commit: String,
    pub timestamp: Option<DateTime<Utc>>,
}

/// Records plus the number of inputs skipped as unsupported, keyed by the
/// operation name that was skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Parsed {
    pub records: Vec<RefactoringRecord>,
    pub skipped: BTreeMap<String, usize>,
}

impl Parsed {
    pub fn skipped_total(&self) -> usize {
        self.skipped.values().sum()
    }
}

/// Parses an ISO-8601 instant. Offsets are converted to UTC; inputs without
/// an offset are read as UTC; a bare date means midnight.
pub fn parse_timestamp(text: &str) -> Result<DateTime<Utc>, IngestError> {
    let text = text.trim();
    if let Ok(ts) = DateTime::parse_from_rfc3339(text) {
        return Ok(crate::model::truncate_to_seconds(ts.with_timezone(&Utc)));
    }
    let naive = text.strip_suffix('Z').unwrap_or(text);
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(ts) = NaiveDateTime::parse_from_str(naive, fmt) {
            return Ok(ts.and_utc());
        }
    }
    if let Ok(date) = NaiveDate::parse_from_str(naive, "%Y-%m-%d") {
        if let Some(ts) = date.and_hms_opt(0, 0, 0) {
            return Ok(ts.and_utc());
        }
    }
    Err(IngestError::Timestamp(text.to_string()))
}

fn general_form() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i)^(?P<s1>.+?)\s+from\s+class\s+(?P<c1>\S+)\s+to\s+(?:(?P<s2>.+?)\s+(?:from|in)\s+)?class\s+(?P<c2>\S+)$",
        )
        .unwrap()
    })
}

fn extract_form() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i)^(?P<t>.+?)\s+(?:extracted\s+)?from\s+(?P<s>.+?)\s+in\s+class\s+(?P<c>\S+?)(?:\s*&\s*moved\s+to\s+class\s+(?P<c2>\S+))?$",
        )
        .unwrap()
    })
}

fn inline_form() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^(?P<s>.+?)\s+inlined\s+to\s+(?P<t>.+?)\s+in\s+class\s+(?P<c>\S+)$").unwrap())
}

/// Splits the leading kind phrase off a message. Longer phrases win, so
/// `Extract And Move Method` is never read as `Extract Method`.
fn split_kind_phrase(text: &str) -> Option<(RefactoringKind, &str)> {
    let words: Vec<(usize, &str)> = text
        .split_whitespace()
        .map(|w| (w.as_ptr() as usize - text.as_ptr() as usize, w))
        .take(5)
        .collect();
    for n in (2..=words.len().min(5)).rev() {
        let phrase = words[..n].iter().map(|(_, w)| *w).collect::<Vec<_>>().join(" ");
        if let Some(kind) = RefactoringKind::from_phrase(&phrase) {
            let (offset, last) = words[n - 1];
            return Some((kind, text[offset + last.len()..].trim()));
        }
    }
    None
}

fn member_for(kind: RefactoringKind, raw: &str) -> Result<Member, IngestError> {
    let member = if kind.is_field_level() {
        Member::field(raw)?
    } else {
        Member::method(raw)?
    };
    Ok(member)
}

/// Parses one miner message into a record carrying `id` and the context.
pub fn parse_miner_message(
    id: impl Into<String>,
    text: &str,
    ctx: &MessageContext,
) -> Result<RefactoringRecord, IngestError> {
    let trimmed = text.trim();
    let (kind, rest) = split_kind_phrase(trimmed).ok_or_else(|| IngestError::Unsupported(trimmed.to_string()))?;
    let parse_err = |reason: &str| IngestError::Parse {
        text: trimmed.to_string(),
        reason: reason.to_string(),
    };

    let (source, target) = if let Some(caps) = general_form().captures(rest) {
        let source_member = member_for(kind, &caps["s1"])?;
        let target_member = match caps.name("s2") {
            Some(s2) => member_for(kind, s2.as_str())?,
            None if kind.is_field_level() => source_member.clone(),
            None => return Err(parse_err("missing target method")),
        };
        (
            ElementRef::new(&caps["c1"], source_member)?,
            ElementRef::new(&caps["c2"], target_member)?,
        )
    } else if let (true, Some(caps)) = (
        matches!(kind, RefactoringKind::Extract | RefactoringKind::ExtractMove),
        extract_form().captures(rest),
    ) {
        // Extraction messages name the extracted method first.
        let origin_class = &caps["c"];
        let target_class = caps.name("c2").map_or(origin_class, |c| c.as_str());
        (
            ElementRef::new(origin_class, member_for(kind, &caps["s"])?)?,
            ElementRef::new(target_class, member_for(kind, &caps["t"])?)?,
        )
    } else if let (RefactoringKind::Inline, Some(caps)) = (kind, inline_form().captures(rest)) {
        (
            ElementRef::new(&caps["c"], member_for(kind, &caps["s"])?)?,
            ElementRef::new(&caps["c"], member_for(kind, &caps["t"])?)?,
        )
    } else {
        return Err(parse_err("message does not match any known layout"));
    };

    let record = RefactoringRecord::new(
        id,
        ctx.project.clone(),
        ctx.commit.clone(),
        ctx.timestamp,
        kind,
        source,
        target,
    )?;
    Ok(record.with_raw(text))
}

/// Reads miner console text, one message per line. Blank lines and `#`
/// comments are ignored; unsupported operations are skipped with a warning.
/// Record ids are line numbers.
pub fn parse_miner_text(input: impl BufRead, ctx: &MessageContext) -> Result<Parsed, IngestError> {
    let mut parsed = Parsed::default();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let number = idx as u64 + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        match parse_miner_message(number.to_string(), text, ctx) {
            Ok(record) => parsed.records.push(record),
            Err(IngestError::Unsupported(op)) => {
                warn!("line {number}: skipping unsupported operation: {op}");
                let name = op.split_whitespace().take(2).collect::<Vec<_>>().join(" ");
                *parsed.skipped.entry(name).or_default() += 1;
            }
            Err(e) => {
                return Err(IngestError::Line {
                    line: number,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(parsed)
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonElement {
    class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    project: String,
    commit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
    #[serde(rename = "type")]
    kind: String,
    source: JsonElement,
    target: JsonElement,
}

impl JsonElement {
    fn to_element(&self, kind: RefactoringKind) -> Result<ElementRef, String> {
        let member = match (&self.method, &self.field) {
            (Some(m), None) if !kind.is_field_level() => Member::method(m).map_err(|e| e.to_string())?,
            (None, Some(f)) if kind.is_field_level() => Member::field(f).map_err(|e| e.to_string())?,
            (Some(_), Some(_)) => return Err("element has both `method` and `field`".into()),
            (None, None) => return Err("element needs `method` or `field`".into()),
            _ => return Err(format!("element member does not fit type `{kind}`")),
        };
        Ok(ElementRef::new(self.class.clone(), member)
            .map_err(|e| e.to_string())?
            .with_file(self.file.clone()))
    }

    fn from_element(element: &ElementRef) -> JsonElement {
        let (method, field) = match &element.member {
            Member::Method(s) => (Some(s.clone()), None),
            Member::Field(s) => (None, Some(s.clone())),
            Member::Class => (None, None),
        };
        JsonElement {
            class: element.class_fqn.clone(),
            method,
            field,
            file: element.file_path.clone(),
        }
    }
}

fn json_to_record(line: &str, number: u64) -> Result<RefactoringRecord, String> {
    let json: JsonRecord = serde_json::from_str(line).map_err(|e| format!("invalid record: {e}"))?;
    let kind: RefactoringKind = json.kind.parse().map_err(|e: crate::error::ModelError| e.to_string())?;
    let timestamp = json
        .timestamp
        .as_deref()
        .map(parse_timestamp)
        .transpose()
        .map_err(|e| e.to_string())?;
    let source = json.source.to_element(kind)?;
    let target = json.target.to_element(kind)?;
    let id = json.id.unwrap_or_else(|| number.to_string());
    RefactoringRecord::new(id, json.project, json.commit, timestamp, kind, source, target).map_err(|e| e.to_string())
}

/// Reads JSON lines. Output order follows the input; records without an
/// `id` get their line number.
pub fn parse_jsonl(input: impl BufRead) -> Result<Vec<RefactoringRecord>, IngestError> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let number = idx as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record =
            json_to_record(line.trim(), number).map_err(|message| IngestError::Line { line: number, message })?;
        if !seen.insert(record.id.clone()) {
            return Err(IngestError::DuplicateId {
                id: record.id,
                line: number,
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Serializes one record in the JSON-lines schema (no trailing newline).
pub fn record_to_json_line(record: &RefactoringRecord) -> String {
    let json = JsonRecord {
        id: Some(record.id.clone()),
        project: record.project.clone(),
        commit: record.commit.clone(),
        timestamp: record.timestamp.map(format_timestamp),
        kind: record.kind.tag().to_string(),
        source: JsonElement::from_element(&record.source),
        target: JsonElement::from_element(&record.target),
    };
    serde_json::to_string(&json).expect("record serialization cannot fail")
}

pub fn write_jsonl(records: &[RefactoringRecord], mut out: impl Write) -> std::io::Result<()> {
    for record in records {
        writeln!(out, "{}", record_to_json_line(record))?;
    }
    Ok(())
}

/// `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format_timestamp(ts: DateTime<Utc>) -> String {
    ts.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

const CSV_REQUIRED: [&str; 7] = [
    "project",
    "commit",
    "refactoring_type",
    "source_class",
    "source_member",
    "target_class",
    "target_member",
];

/// Reads the normalized oracle CSV export. Rows whose `refactoring_type` is
/// not one of the nine clusterable operations are skipped and counted.
pub fn parse_oracle_csv(input: impl Read) -> Result<Parsed, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(input);
    let headers: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let mut required = BTreeMap::new();
    for name in CSV_REQUIRED {
        let idx = column(name).ok_or_else(|| IngestError::Schema(format!("missing column `{name}`")))?;
        required.insert(name, idx);
    }
    let optional = |name: &str| column(name);
    let (ts_col, id_col) = (optional("timestamp"), optional("id"));
    let (source_file_col, target_file_col) = (optional("source_file"), optional("target_file"));

    let mut parsed = Parsed::default();
    let mut seen = HashSet::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        let get = |name: &str| row.get(required[name]).unwrap_or("");
        let opt = |idx: Option<usize>| idx.and_then(|i| row.get(i)).filter(|s| !s.is_empty());

        let type_name = get("refactoring_type");
        let Some(kind) = RefactoringKind::from_phrase(type_name) else {
            *parsed.skipped.entry(type_name.to_string()).or_default() += 1;
            continue;
        };
        let build = || -> Result<RefactoringRecord, IngestError> {
            let timestamp = opt(ts_col).map(parse_timestamp).transpose()?;
            let source = ElementRef::new(get("source_class"), member_for(kind, get("source_member"))?)?
                .with_file(opt(source_file_col).map(str::to_string));
            let target = ElementRef::new(get("target_class"), member_for(kind, get("target_member"))?)?
                .with_file(opt(target_file_col).map(str::to_string));
            let id = opt(id_col).map_or_else(|| line.to_string(), str::to_string);
            Ok(RefactoringRecord::new(
                id,
                get("project"),
                get("commit"),
                timestamp,
                kind,
                source,
                target,
            )?)
        };
        let record = build().map_err(|e| IngestError::Line {
            line,
            message: e.to_string(),
        })?;
        if !seen.insert(record.id.clone()) {
            return Err(IngestError::DuplicateId { id: record.id, line });
        }
        parsed.records.push(record);
    }
    Ok(parsed)
}

fn csv_error(e: csv::Error) -> IngestError {
    let line = e.position().map(|p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        other => {
            let message = format!("{other:?}");
            match line {
                Some(line) => IngestError::Line { line, message },
                None => IngestError::Schema(message),
            }
        }
    }
}

/// Dataset cleaning options.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub excluded_package_fragments: Vec<String>,
    pub exclude_constructors: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projects_allowlist: Option<BTreeSet<String>>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            excluded_package_fragments: vec!["test".into(), "sample".into(), "docs".into()],
            exclude_constructors: true,
            projects_allowlist: None,
        }
    }
}

impl FilterConfig {
    /// No package fragments, constructors kept, every project allowed.
    pub fn none() -> Self {
        FilterConfig {
            excluded_package_fragments: Vec::new(),
            exclude_constructors: false,
            projects_allowlist: None,
        }
    }

    /// Adds a fragment, lowercased. Empty fragments are rejected.
    pub fn exclude_fragment(&mut self, fragment: &str) -> Result<(), IngestError> {
        let fragment = fragment.trim().to_lowercase();
        if fragment.is_empty() {
            return Err(IngestError::Schema("package fragment must not be empty".into()));
        }
        if !self.excluded_package_fragments.contains(&fragment) {
            self.excluded_package_fragments.push(fragment);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DropReason {
    Project,
    Package,
    Constructor,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropCounts {
    pub project: usize,
    pub package: usize,
    pub constructor: usize,
}

impl DropCounts {
    pub fn total(&self) -> usize {
        self.project + self.package + self.constructor
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Filtered {
    pub records: Vec<RefactoringRecord>,
    pub dropped: DropCounts,
}

fn segments(element: &ElementRef) -> impl Iterator<Item = &str> {
    let path = element.file_path.as_deref().unwrap_or("");
    element
        .class_fqn
        .split(['.', '$'])
        .chain(path.split(['/', '\\']))
        .filter(|s| !s.is_empty())
}

fn is_constructor(element: &ElementRef) -> bool {
    matches!(element.member, Member::Method(_)) && element.member.simple_name() == Some(element.simple_class_name())
}

/// Why `record` would be dropped under `cfg`, if at all.
pub fn drop_reason(record: &RefactoringRecord, cfg: &FilterConfig) -> Option<DropReason> {
    if let Some(allow) = &cfg.projects_allowlist {
        if !allow.contains(&record.project) {
            return Some(DropReason::Project);
        }
    }
    let elements = [&record.source, &record.target];
    let in_excluded_package = elements.iter().flat_map(|e| segments(e)).any(|segment| {
        let segment = segment.to_lowercase();
        cfg.excluded_package_fragments.contains(&segment)
    });
    if in_excluded_package {
        return Some(DropReason::Package);
    }
    if cfg.exclude_constructors && elements.iter().any(|e| is_constructor(e)) {
        return Some(DropReason::Constructor);
    }
    None
}

/// Keeps the records that pass `cfg`, in input order.
pub fn apply_filters(records: &[RefactoringRecord], cfg: &FilterConfig) -> Filtered {
    let mut out = Filtered::default();
    for record in records {
        match drop_reason(record, cfg) {
            None => out.records.push(record.clone()),
            Some(DropReason::Project) => out.dropped.project += 1,
            Some(DropReason::Package) => out.dropped.package += 1,
            Some(DropReason::Constructor) => out.dropped.constructor += 1,
        }
    }
    out
}
