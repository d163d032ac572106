//! Domain types shared by every stage of the pipeline: single refactoring
//! records, element identities, and the composite taxonomy.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
pub use crate::signature::{normalize_field_name, normalize_signature};

/// Kind of a single (atomic) refactoring operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefactoringKind {
    Extract,
    ExtractMove,
    Move,
    MoveRename,
    Inline,
    PullUpMethod,
    PushDownMethod,
    PullUpField,
    PushDownField,
}

impl RefactoringKind {
    pub const ALL: [RefactoringKind; 9] = [
        RefactoringKind::Extract,
        RefactoringKind::ExtractMove,
        RefactoringKind::Move,
        RefactoringKind::MoveRename,
        RefactoringKind::Inline,
        RefactoringKind::PullUpMethod,
        RefactoringKind::PushDownMethod,
        RefactoringKind::PullUpField,
        RefactoringKind::PushDownField,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            RefactoringKind::Extract => "extract",
            RefactoringKind::ExtractMove => "extract_move",
            RefactoringKind::Move => "move",
            RefactoringKind::MoveRename => "move_rename",
            RefactoringKind::Inline => "inline",
            RefactoringKind::PullUpMethod => "pull_up_method",
            RefactoringKind::PushDownMethod => "push_down_method",
            RefactoringKind::PullUpField => "pull_up_field",
            RefactoringKind::PushDownField => "push_down_field",
        }
    }

    /// The phrase refactoring miners print at the start of a message.
    pub fn phrase(self) -> &'static str {
        match self {
            RefactoringKind::Extract => "Extract Method",
            RefactoringKind::ExtractMove => "Extract And Move Method",
            RefactoringKind::Move => "Move Method",
            RefactoringKind::MoveRename => "Move And Rename Method",
            RefactoringKind::Inline => "Inline Method",
            RefactoringKind::PullUpMethod => "Pull Up Method",
            RefactoringKind::PushDownMethod => "Push Down Method",
            RefactoringKind::PullUpField => "Pull Up Attribute",
            RefactoringKind::PushDownField => "Push Down Attribute",
        }
    }

    /// Looks up a kind by miner phrase, case-insensitively. Accepts the
    /// `Field`/`Attribute` synonyms and the snake-case tags.
    pub fn from_phrase(phrase: &str) -> Option<RefactoringKind> {
        let folded = phrase
            .split_whitespace()
            .map(str::to_ascii_lowercase)
            .collect::<Vec<_>>()
            .join(" ");
        let kind = match folded.as_str() {
            "extract method" | "extract" => RefactoringKind::Extract,
            "extract and move method" | "extract_move" => RefactoringKind::ExtractMove,
            "move method" | "move" => RefactoringKind::Move,
            "move and rename method" | "move_rename" => RefactoringKind::MoveRename,
            "inline method" | "inline" => RefactoringKind::Inline,
            "pull up method" | "pull_up_method" => RefactoringKind::PullUpMethod,
            "push down method" | "push_down_method" => RefactoringKind::PushDownMethod,
            "pull up attribute" | "pull up field" | "pull_up_field" => RefactoringKind::PullUpField,
            "push down attribute" | "push down field" | "push_down_field" => RefactoringKind::PushDownField,
            _ => return None,
        };
        Some(kind)
    }

    pub fn is_field_level(self) -> bool {
        matches!(self, RefactoringKind::PullUpField | RefactoringKind::PushDownField)
    }
}

impl fmt::Display for RefactoringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for RefactoringKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RefactoringKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| ModelError::UnknownKind(s.to_string()))
    }
}

/// The eight composite refactorings of the catalog. Declaration order is the
/// canonical report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeKind {
    MethodComposition,
    MethodDecomposition,
    ClassDecomposition,
    CompositeInlineMethod,
    CompositePullUpMethod,
    CompositePushDownMethod,
    CompositePullUpField,
    CompositePushDownField,
}

impl CompositeKind {
    pub const ALL: [CompositeKind; 8] = [
        CompositeKind::MethodComposition,
        CompositeKind::MethodDecomposition,
        CompositeKind::ClassDecomposition,
        CompositeKind::CompositeInlineMethod,
        CompositeKind::CompositePullUpMethod,
        CompositeKind::CompositePushDownMethod,
        CompositeKind::CompositePullUpField,
        CompositeKind::CompositePushDownField,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            CompositeKind::MethodComposition => "method_composition",
            CompositeKind::MethodDecomposition => "method_decomposition",
            CompositeKind::ClassDecomposition => "class_decomposition",
            CompositeKind::CompositeInlineMethod => "composite_inline_method",
            CompositeKind::CompositePullUpMethod => "composite_pull_up_method",
            CompositeKind::CompositePushDownMethod => "composite_push_down_method",
            CompositeKind::CompositePullUpField => "composite_pull_up_field",
            CompositeKind::CompositePushDownField => "composite_push_down_field",
        }
    }

    /// Human-readable name, as used in frequency tables.
    pub fn display_name(self) -> &'static str {
        match self {
            CompositeKind::MethodComposition => "Method Composition",
            CompositeKind::MethodDecomposition => "Method Decomposition",
            CompositeKind::ClassDecomposition => "Class Decomposition",
            CompositeKind::CompositeInlineMethod => "Composite Inline Method",
            CompositeKind::CompositePullUpMethod => "Composite Pull Up Method",
            CompositeKind::CompositePushDownMethod => "Composite Push Down Method",
            CompositeKind::CompositePullUpField => "Composite Pull Up Field",
            CompositeKind::CompositePushDownField => "Composite Push Down Field",
        }
    }

    /// Single refactoring kinds that may be clustered into this composite.
    pub fn accepted_kinds(self) -> &'static [RefactoringKind] {
        use RefactoringKind as R;
        match self {
            CompositeKind::MethodComposition | CompositeKind::MethodDecomposition => &[R::Extract, R::ExtractMove],
            CompositeKind::ClassDecomposition => &[R::Move, R::MoveRename],
            CompositeKind::CompositeInlineMethod => &[R::Inline],
            CompositeKind::CompositePullUpMethod => &[R::PullUpMethod],
            CompositeKind::CompositePushDownMethod => &[R::PushDownMethod],
            CompositeKind::CompositePullUpField => &[R::PullUpField],
            CompositeKind::CompositePushDownField => &[R::PushDownField],
        }
    }

    /// Whether the composite is anchored on the shared target element
    /// (compositions and pull-ups) rather than the shared source.
    pub fn anchored_on_target(self) -> bool {
        matches!(
            self,
            CompositeKind::MethodComposition
                | CompositeKind::CompositePullUpMethod
                | CompositeKind::CompositePullUpField
        )
    }

    /// Extraction composites are the only ones with an intra/inter-class scope.
    pub fn has_scope(self) -> bool {
        matches!(
            self,
            CompositeKind::MethodComposition | CompositeKind::MethodDecomposition
        )
    }
}

impl fmt::Display for CompositeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CompositeKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CompositeKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| ModelError::UnknownKind(s.to_string()))
    }
}

/// The member part of an element identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Member {
    /// Canonical signature, `name(T1, T2)`.
    Method(String),
    /// Bare field identifier.
    Field(String),
    Class,
}

impl Member {
    /// Builds a method member from any raw signature form.
    pub fn method(raw: &str) -> Result<Member, ModelError> {
        Ok(Member::Method(normalize_signature(raw)?))
    }

    /// Builds a field member from a raw declaration such as `private x : int`.
    pub fn field(raw: &str) -> Result<Member, ModelError> {
        Ok(Member::Field(normalize_field_name(raw)?))
    }

    /// Name without parameters: `m` for `m(int)`, the field name, or `None`
    /// for class members.
    pub fn simple_name(&self) -> Option<&str> {
        match self {
            Member::Method(sig) => Some(sig.split('(').next().unwrap_or(sig)),
            Member::Field(name) => Some(name),
            Member::Class => None,
        }
    }

    /// Text used in reports; empty for class members.
    pub fn label(&self) -> &str {
        match self {
            Member::Method(s) | Member::Field(s) => s,
            Member::Class => "",
        }
    }
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Identity of a program element. Equality, ordering and hashing consider
/// only `(class_fqn, member)`; the file path is carried along for filtering.
#[derive(Debug, Clone)]
pub struct ElementRef {
    pub class_fqn: String,
    pub member: Member,
    pub file_path: Option<String>,
}

impl ElementRef {
    pub fn new(class_fqn: impl Into<String>, member: Member) -> Result<ElementRef, ModelError> {
        let class_fqn = class_fqn.into().trim().to_string();
        if class_fqn.is_empty() {
            return Err(ModelError::EmptyClass);
        }
        if let Member::Field(name) = &member {
            if name.is_empty() {
                return Err(ModelError::EmptyField);
            }
        }
        Ok(ElementRef {
            class_fqn,
            member,
            file_path: None,
        })
    }

    pub fn method(class_fqn: impl Into<String>, raw_signature: &str) -> Result<ElementRef, ModelError> {
        ElementRef::new(class_fqn, Member::method(raw_signature)?)
    }

    pub fn field(class_fqn: impl Into<String>, raw_name: &str) -> Result<ElementRef, ModelError> {
        ElementRef::new(class_fqn, Member::field(raw_name)?)
    }

    pub fn class(class_fqn: impl Into<String>) -> Result<ElementRef, ModelError> {
        ElementRef::new(class_fqn, Member::Class)
    }

    pub fn with_file(mut self, path: Option<String>) -> ElementRef {
        self.file_path = path.filter(|p| !p.is_empty());
        self
    }

    /// The element's class as a class-level element.
    pub fn enclosing_class(&self) -> ElementRef {
        ElementRef {
            class_fqn: self.class_fqn.clone(),
            member: Member::Class,
            file_path: self.file_path.clone(),
        }
    }

    /// Last segment of the class name, with nested-class `$` separators
    /// treated as segment boundaries.
    pub fn simple_class_name(&self) -> &str {
        self.class_fqn.rsplit(['.', '$']).next().unwrap_or(&self.class_fqn)
    }

    /// `Class.member`, or just `Class` for class elements.
    pub fn label(&self) -> String {
        match &self.member {
            Member::Class => self.class_fqn.clone(),
            m => format!("{}.{}", self.class_fqn, m.label()),
        }
    }
}

impl PartialEq for ElementRef {
    fn eq(&self, other: &Self) -> bool {
        self.class_fqn == other.class_fqn && self.member == other.member
    }
}

impl Eq for ElementRef {}

impl Hash for ElementRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.class_fqn.hash(state);
        self.member.hash(state);
    }
}

impl PartialOrd for ElementRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ElementRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.class_fqn
            .cmp(&other.class_fqn)
            .then_with(|| self.member.cmp(&other.member))
    }
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// One single refactoring operation as reported by a miner.
#[derive(Debug, Clone, PartialEq)]
pub struct RefactoringRecord {
    pub id: String,
    pub project: String,
    pub commit: String,
    pub timestamp: Option<DateTime<Utc>>,
    pub kind: RefactoringKind,
    pub source: ElementRef,
    pub target: ElementRef,
    pub raw: Option<String>,
}

impl RefactoringRecord {
    /// Validates the kind/element invariants and builds a record. Timestamps
    /// are truncated to whole seconds.
    pub fn new(
        id: impl Into<String>,
        project: impl Into<String>,
        commit: impl Into<String>,
        timestamp: Option<DateTime<Utc>>,
        kind: RefactoringKind,
        source: ElementRef,
        target: ElementRef,
    ) -> Result<RefactoringRecord, ModelError> {
        let commit = commit.into();
        validate_commit(&commit)?;
        let record = RefactoringRecord {
            id: id.into(),
            project: project.into(),
            commit,
            timestamp: timestamp.map(truncate_to_seconds),
            kind,
            source,
            target,
            raw: None,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn with_raw(mut self, raw: impl Into<String>) -> RefactoringRecord {
        self.raw = Some(raw.into());
        self
    }

    fn validate(&self) -> Result<(), ModelError> {
        let fields = self.kind.is_field_level();
        for element in [&self.source, &self.target] {
            let ok = match element.member {
                Member::Method(_) => !fields,
                Member::Field(_) => fields,
                Member::Class => false,
            };
            if !ok {
                return Err(ModelError::MemberMismatch {
                    kind: self.kind,
                    element: element.label(),
                });
            }
        }
        let same_class = self.source.class_fqn == self.target.class_fqn;
        match self.kind {
            RefactoringKind::Extract if !same_class => Err(ModelError::ClassMismatch {
                kind: self.kind,
                expected_same: true,
            }),
            RefactoringKind::ExtractMove if same_class => Err(ModelError::ClassMismatch {
                kind: self.kind,
                expected_same: false,
            }),
            _ => Ok(()),
        }
    }

    /// Ordering used for composite members: timestamp (undated last), then
    /// commit, then id.
    pub fn member_order(&self, other: &RefactoringRecord) -> Ordering {
        let by_time = match (self.timestamp, other.timestamp) {
            (Some(a), Some(b)) => a.cmp(&b),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        by_time
            .then_with(|| self.commit.cmp(&other.commit))
            .then_with(|| compare_ids(&self.id, &other.id))
    }
}

/// Orders ids numerically when both are unsigned integers, lexicographically
/// otherwise.
pub fn compare_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

pub(crate) fn truncate_to_seconds(ts: DateTime<Utc>) -> DateTime<Utc> {
    DateTime::from_timestamp(ts.timestamp(), 0).unwrap_or(ts)
}

fn validate_commit(commit: &str) -> Result<(), ModelError> {
    let ok = !commit.is_empty() && commit.len() <= 40 && commit.bytes().all(|b| b.is_ascii_hexdigit());
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidCommit(commit.to_string()))
    }
}

/// Scope of an extraction composite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    IntraClass,
    InterClass,
    Mixed,
}

impl Scope {
    pub fn tag(self) -> &'static str {
        match self {
            Scope::IntraClass => "intra_class",
            Scope::InterClass => "inter_class",
            Scope::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A detected cluster of single refactorings.
#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub kind: CompositeKind,
    pub anchor: ElementRef,
    /// Sorted by [`RefactoringRecord::member_order`].
    pub members: Vec<RefactoringRecord>,
    pub commits: BTreeSet<String>,
    pub age_days: Option<u64>,
    pub scope: Option<Scope>,
}

impl Composite {
    /// Sorts the members and derives commits, age and scope.
    pub fn new(kind: CompositeKind, anchor: ElementRef, mut members: Vec<RefactoringRecord>) -> Composite {
        members.sort_by(|a, b| a.member_order(b));
        let commits = members.iter().map(|r| r.commit.clone()).collect();
        let mut composite = Composite {
            kind,
            anchor,
            members,
            commits,
            age_days: None,
            scope: None,
        };
        composite.age_days = crate::metrics::composite_age_days(&composite);
        composite.scope = crate::metrics::classify_scope(&composite);
        composite
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn member_ids(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|r| r.id.as_str())
    }

    pub fn projects(&self) -> BTreeSet<&str> {
        self.members.iter().map(|r| r.project.as_str()).collect()
    }

    pub fn is_multi_commit(&self) -> bool {
        self.commits.len() > 1
    }
}
