//! Report rendering: composite messages, JSON, markdown and DOT.

use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{MetricsError, ReportError};
use crate::ingest::{format_timestamp, record_to_json_line, FilterConfig};
use crate::metrics::{corpus_stats, Bin, CorpusStats, Distribution};
use crate::model::{compare_ids, Composite, CompositeKind, ElementRef, Member, RefactoringKind, RefactoringRecord};

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub input_digest: String,
    pub generated_at: String,
    pub filters: FilterConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub stats: CorpusStats,
    pub composites: Vec<Composite>,
    pub metadata: Metadata,
}

impl ReportBundle {
    /// `ingested` feeds the input digest; `singles` are the records that
    /// survived filtering and produced `composites`.
    pub fn build(
        ingested: &[RefactoringRecord],
        singles: &[RefactoringRecord],
        composites: Vec<Composite>,
        filters: FilterConfig,
        generated_at: DateTime<Utc>,
    ) -> Result<ReportBundle, MetricsError> {
        let stats = corpus_stats(singles, &composites)?;
        Ok(ReportBundle {
            stats,
            composites,
            metadata: Metadata {
                tool_version: TOOL_VERSION.to_string(),
                input_digest: input_digest(ingested),
                generated_at: format_timestamp(generated_at),
                filters,
            },
        })
    }

    pub fn to_document(&self) -> ReportDocument {
        ReportDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            metadata: self.metadata.clone(),
            stats: self.stats.clone(),
            composites: self.composites.iter().map(CompositeEntry::from_composite).collect(),
        }
    }
}

/// SHA-256 over the records in id order, one JSON line each. Input order
/// and original message text do not affect the digest.
pub fn input_digest(records: &[RefactoringRecord]) -> String {
    let mut sorted: Vec<&RefactoringRecord> = records.iter().collect();
    sorted.sort_by(|a, b| compare_ids(&a.id, &b.id));
    let mut hasher = Sha256::new();
    for record in sorted {
        hasher.update(record_to_json_line(record).as_bytes());
        hasher.update(b"\n");
    }
    hasher.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnchorEntry {
    pub class: String,
    /// Method signature or field name; `null` for class anchors.
    pub member: Option<String>,
}

impl AnchorEntry {
    pub fn from_element(element: &ElementRef) -> AnchorEntry {
        AnchorEntry {
            class: element.class_fqn.clone(),
            member: match &element.member {
                Member::Class => None,
                m => Some(m.label().to_string()),
            },
        }
    }

    /// Signatures always carry a parameter list; field names never do.
    pub fn to_element(&self) -> Result<ElementRef, ReportError> {
        let member = match &self.member {
            None => Member::Class,
            Some(m) if m.contains('(') => Member::Method(m.clone()),
            Some(m) => Member::Field(m.clone()),
        };
        ElementRef::new(self.class.clone(), member).map_err(|e| ReportError::Malformed(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeEntry {
    pub kind: CompositeKind,
    pub anchor: AnchorEntry,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<crate::model::Scope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age_days: Option<u64>,
    pub commits: Vec<String>,
    pub members: Vec<String>,
    pub message: String,
}

impl CompositeEntry {
    pub fn from_composite(c: &Composite) -> CompositeEntry {
        CompositeEntry {
            kind: c.kind,
            anchor: AnchorEntry::from_element(&c.anchor),
            size: c.size(),
            scope: c.scope,
            age_days: c.age_days,
            commits: c.commits.iter().cloned().collect(),
            members: c.member_ids().map(str::to_string).collect(),
            message: render_composite_message(c),
        }
    }
}

/// The JSON report, as written and as read back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub metadata: Metadata,
    pub stats: CorpusStats,
    pub composites: Vec<CompositeEntry>,
}

pub fn emit_json(bundle: &ReportBundle) -> String {
    let mut out = serde_json::to_string_pretty(&bundle.to_document()).expect("report serialization cannot fail");
    out.push('\n');
    out
}

/// Parses a JSON report, rejecting other schema versions.
pub fn parse_report(text: &str) -> Result<ReportDocument, ReportError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ReportError::Malformed(e.to_string()))?;
    match value.get("schema_version").and_then(|v| v.as_str()) {
        Some(SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(ReportError::SchemaVersion {
                found: other.to_string(),
                expected: SCHEMA_VERSION,
            })
        }
        None => return Err(ReportError::Malformed("missing schema_version".into())),
    }
    serde_json::from_value(value).map_err(|e| ReportError::Malformed(e.to_string()))
}

/// Renders one single refactoring as a miner message that parses back to
/// the same record.
pub fn render_record_message(record: &RefactoringRecord) -> String {
    let (s, t) = (&record.source, &record.target);
    match record.kind {
        RefactoringKind::Extract => format!(
            "{} {} from {} in class {}",
            record.kind.phrase(),
            t.member,
            s.member,
            s.class_fqn
        ),
        RefactoringKind::ExtractMove => format!(
            "{} {} extracted from {} in class {} & moved to class {}",
            record.kind.phrase(),
            t.member,
            s.member,
            s.class_fqn,
            t.class_fqn
        ),
        _ => format!(
            "{} {} from class {} to {} from class {}",
            record.kind.phrase(),
            s.member,
            s.class_fqn,
            t.member,
            t.class_fqn
        ),
    }
}

fn sorted_labels<'a>(elements: impl Iterator<Item = &'a ElementRef>) -> Vec<String> {
    let mut elements: Vec<&ElementRef> = elements.collect();
    elements.sort();
    elements.iter().map(|e| e.label()).collect()
}

fn sorted_classes<'a>(elements: impl Iterator<Item = &'a ElementRef>) -> Vec<&'a str> {
    let mut elements: Vec<&ElementRef> = elements.collect();
    elements.sort();
    elements.iter().map(|e| e.class_fqn.as_str()).collect()
}

/// One message describing the whole composite. Member lists are sorted by
/// class, then member.
pub fn render_composite_message(c: &Composite) -> String {
    let sources = || c.members.iter().map(|r| &r.source);
    let targets = || c.members.iter().map(|r| &r.target);
    let anchor = &c.anchor;
    match c.kind {
        CompositeKind::MethodComposition => {
            format!(
                "Compose method {} From: {}",
                anchor,
                sorted_labels(sources()).join(", ")
            )
        }
        CompositeKind::MethodDecomposition => {
            format!(
                "Decompose method {} Into: {}",
                anchor,
                sorted_labels(targets()).join(", ")
            )
        }
        CompositeKind::CompositeInlineMethod => {
            format!("Inline method {} Into: {}", anchor, sorted_labels(targets()).join(", "))
        }
        CompositeKind::ClassDecomposition => {
            let mut moves: Vec<(&str, &Member)> = c
                .members
                .iter()
                .map(|r| (r.target.class_fqn.as_str(), &r.source.member))
                .collect();
            moves.sort();
            let moves: Vec<String> = moves.iter().map(|(class, m)| format!("{m} to {class}")).collect();
            format!("Decompose class {} Moving: {}", anchor.class_fqn, moves.join(", "))
        }
        CompositeKind::CompositePullUpMethod | CompositeKind::CompositePullUpField => {
            let what = if c.kind == CompositeKind::CompositePullUpMethod {
                "method"
            } else {
                "field"
            };
            format!(
                "Pull Up {what} {m} From: {} To: {m} in {}",
                sorted_classes(sources()).join(", "),
                anchor.class_fqn,
                m = anchor.member,
            )
        }
        CompositeKind::CompositePushDownMethod | CompositeKind::CompositePushDownField => {
            let what = if c.kind == CompositeKind::CompositePushDownMethod {
                "method"
            } else {
                "field"
            };
            format!(
                "Push Down {what} {} From: {} To: {}",
                anchor.member,
                anchor.class_fqn,
                sorted_classes(targets()).join(", "),
            )
        }
    }
}

fn bin_label(bin: &Bin) -> String {
    match bin.upper {
        Some(u) if u == bin.lower => u.to_string(),
        Some(u) => format!("{}-{}", bin.lower, u),
        None => format!(">= {}", bin.lower),
    }
}

fn distribution_tables(out: &mut String, title: &str, unit: &str, dist: &Distribution) {
    let _ = writeln!(out, "## {title}\n");
    let _ = writeln!(out, "| {unit} | Composites |\n|---|---:|");
    for bin in &dist.histogram {
        let _ = writeln!(out, "| {} | {} |", bin_label(bin), bin.count);
    }
    out.push('\n');
    let _ = writeln!(out, "| Min | Median | P75 | P90 | Max |\n|---:|---:|---:|---:|---:|");
    match &dist.summary {
        Some(s) => {
            let _ = writeln!(out, "| {} | {} | {} | {} | {} |", s.min, s.median, s.p75, s.p90, s.max);
        }
        None => out.push_str("| - | - | - | - | - |\n"),
    }
    out.push('\n');
}

/// Frequency, size, age and scope tables for a stats block. Shared by the
/// markdown report and the `stats` command.
pub fn render_stats_tables(stats: &CorpusStats) -> String {
    let mut out = String::new();
    out.push_str("## Frequency\n\n");
    out.push_str("| Name | Projects | Operations | Occurrences | % |\n|---|---:|---:|---:|---:|\n");
    for (kind, k) in &stats.per_kind {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {:.1} |",
            kind.display_name(),
            k.projects,
            k.operation_count,
            k.composite_count,
            k.percent_of_composites
        );
    }
    let all_percent = if stats.composite_total > 0 { 100.0 } else { 0.0 };
    let _ = writeln!(
        out,
        "| All | {} | {} | {} | {:.1} |\n",
        stats.projects_with_composites, stats.singles_in_composites, stats.composite_total, all_percent
    );
    let _ = writeln!(
        out,
        "Single operations: {} total, {} in composites ({:.1}%). Multi-commit composites: {} ({:.1}%).\n",
        stats.singles_total,
        stats.singles_in_composites,
        stats.singles_in_composites_percent,
        stats.multi_commit_count,
        stats.multi_commit_percent
    );
    distribution_tables(&mut out, "Size distribution", "Size", &stats.size_distribution);
    distribution_tables(&mut out, "Age distribution (days)", "Days", &stats.age_distribution);
    out.push_str("## Scope\n\n| Name | Intra-class | Inter-class | Mixed |\n|---|---:|---:|---:|\n");
    for (kind, s) in &stats.scope_breakdown {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} |",
            kind.display_name(),
            s.intra_class,
            s.inter_class,
            s.mixed
        );
    }
    out
}

pub fn emit_markdown(bundle: &ReportBundle) -> String {
    let meta = &bundle.metadata;
    let mut out = String::from("# Composite refactoring report\n\n");
    let _ = writeln!(out, "- Tool version: {}", meta.tool_version);
    let _ = writeln!(out, "- Input digest: `{}`", meta.input_digest);
    let _ = writeln!(out, "- Generated at: {}", meta.generated_at);
    let fragments = if meta.filters.excluded_package_fragments.is_empty() {
        "none".to_string()
    } else {
        meta.filters.excluded_package_fragments.join(", ")
    };
    let _ = writeln!(
        out,
        "- Filters: excluded packages: {fragments}; constructors {}\n",
        if meta.filters.exclude_constructors {
            "excluded"
        } else {
            "kept"
        }
    );
    out.push_str(&render_stats_tables(&bundle.stats));

    for (n, c) in bundle.composites.iter().enumerate() {
        let _ = writeln!(out, "\n## composite-{}\n", n + 1);
        let _ = writeln!(out, "{}\n", render_composite_message(c));
        let _ = writeln!(
            out,
            "- Kind: {}\n- Anchor: `{}`\n- Size: {}\n- Commits: {}",
            c.kind,
            c.anchor,
            c.size(),
            c.commits.len()
        );
        if let Some(scope) = c.scope {
            let _ = writeln!(out, "- Scope: {scope}");
        }
        if let Some(age) = c.age_days {
            let _ = writeln!(out, "- Age (days): {age}");
        }
        out.push_str("\n| Id | Operation | Source | Target | Commit |\n|---|---|---|---|---|\n");
        for r in &c.members {
            let _ = writeln!(
                out,
                "| {} | {} | `{}` | `{}` | {} |",
                r.id, r.kind, r.source, r.target, r.commit
            );
        }
    }
    out
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One digraph per composite: nodes are `Class.member` labels, edges run
/// source to target and carry the operation kind and commit.
pub fn emit_dot(c: &Composite) -> String {
    let mut nodes: Vec<String> = Vec::new();
    for r in &c.members {
        for label in [r.source.label(), r.target.label()] {
            if !nodes.contains(&label) {
                nodes.push(label);
            }
        }
    }
    let mut out = String::from("digraph composite {\n");
    let _ = writeln!(out, "  label={};", dot_quote(&render_composite_message(c)));
    out.push_str("  node [shape=box];\n");
    for node in &nodes {
        let _ = writeln!(out, "  {};", dot_quote(node));
    }
    for r in &c.members {
        let commit: String = r.commit.chars().take(7).collect();
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            dot_quote(&r.source.label()),
            dot_quote(&r.target.label()),
            dot_quote(&format!("{} {}", r.kind, commit))
        );
    }
    out.push_str("}\n");
    out
}

/// `composite_<kind>_<n>.dot`, with `n` the composite's 1-based position in
/// the report.
pub fn dot_file_name(c: &Composite, n: usize) -> String {
    format!("composite_{}_{}.dot", c.kind, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::cluster;

    fn rec(id: &str, kind: RefactoringKind, src: (&str, &str), dst: (&str, &str)) -> RefactoringRecord {
        RefactoringRecord::new(
            id,
            "p",
            "0123456789abcdef",
            None,
            kind,
            ElementRef::method(src.0, src.1).unwrap(),
            ElementRef::method(dst.0, dst.1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn decomposition_message() {
        let records = vec![
            rec("1", RefactoringKind::ExtractMove, ("A", "m()"), ("B", "m2()")),
            rec("2", RefactoringKind::Extract, ("A", "m()"), ("A", "m1()")),
        ];
        let c = cluster(&records).remove(0);
        assert_eq!(
            render_composite_message(&c),
            "Decompose method A.m() Into: A.m1(), B.m2()"
        );
    }

    #[test]
    fn class_decomposition_message() {
        let records = vec![
            rec("1", RefactoringKind::Move, ("Foo", "m2()"), ("Baz", "m2()")),
            rec("2", RefactoringKind::Move, ("Foo", "m1()"), ("Bar", "m1()")),
        ];
        let c = cluster(&records).remove(0);
        assert_eq!(
            render_composite_message(&c),
            "Decompose class Foo Moving: m1() to Bar, m2() to Baz"
        );
    }

    #[test]
    fn push_down_and_field_messages() {
        let records = vec![
            rec("1", RefactoringKind::PushDownMethod, ("Base", "m()"), ("SubB", "m()")),
            rec("2", RefactoringKind::PushDownMethod, ("Base", "m()"), ("SubA", "m()")),
        ];
        let c = cluster(&records).remove(0);
        assert_eq!(
            render_composite_message(&c),
            "Push Down method m() From: Base To: SubA, SubB"
        );

        let field = |id: &str, from: &str| {
            RefactoringRecord::new(
                id,
                "p",
                "abc",
                None,
                RefactoringKind::PullUpField,
                ElementRef::field(from, "x").unwrap(),
                ElementRef::field("Base", "x").unwrap(),
            )
            .unwrap()
        };
        let c = cluster(&[field("1", "B"), field("2", "A")]).remove(0);
        assert_eq!(render_composite_message(&c), "Pull Up field x From: A, B To: x in Base");
    }

    #[test]
    fn record_messages_reparse() {
        let ctx = crate::ingest::MessageContext {
            project: "p".into(),
            commit: "0123456789abcdef".into(),
            timestamp: None,
        };
        for kind in RefactoringKind::ALL {
            let (s, t) = match kind {
                RefactoringKind::Extract | RefactoringKind::Inline => (("a.A", "m(int)"), ("a.A", "n(Map<K,V>)")),
                _ => (("a.A", "m(int)"), ("a.B", "m(int)")),
            };
            let record = if kind.is_field_level() {
                RefactoringRecord::new(
                    "1",
                    "p",
                    "0123456789abcdef",
                    None,
                    kind,
                    ElementRef::field(s.0, "f").unwrap(),
                    ElementRef::field(t.0, "f").unwrap(),
                )
                .unwrap()
            } else {
                rec("1", kind, s, t)
            };
            let text = render_record_message(&record);
            let back = crate::ingest::parse_miner_message("1", &text, &ctx).unwrap();
            assert_eq!(back.with_raw(""), record.clone().with_raw(""), "{text}");
        }
    }

    #[test]
    fn dot_escapes_quotes() {
        assert_eq!(dot_quote(r#"a"b\c"#), r#""a\"b\\c""#);
    }

    #[test]
    fn schema_version_checked() {
        let err = parse_report(r#"{"schema_version":"0"}"#).unwrap_err();
        assert!(matches!(err, ReportError::SchemaVersion { .. }));
        let err = parse_report(r#"{"schema_version":"1","metadata":"#).unwrap_err();
        assert!(err.to_string().starts_with("malformed report"));
    }
}
