//! Test support: transcribed real-world fixtures with their expected
//! composites, synthetic dataset generators, the brute-force clustering
//! oracle and a DOT grammar checker.

pub mod dot;
pub mod synth;

use std::collections::BTreeMap;

use serde::Deserialize;

pub use crate::cluster::{brute_force_cluster, pair_condition};
use crate::ingest::parse_jsonl;
use crate::model::{Composite, CompositeKind, RefactoringRecord, Scope};
use crate::report::AnchorEntry;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ExpectedComposite {
    pub kind: CompositeKind,
    pub anchor: AnchorEntry,
    pub size: usize,
    #[serde(default)]
    pub scope: Option<Scope>,
}

impl ExpectedComposite {
    pub fn matches(&self, c: &Composite) -> bool {
        c.kind == self.kind
            && AnchorEntry::from_element(&c.anchor) == self.anchor
            && c.size() == self.size
            && c.scope == self.scope
    }
}

#[derive(Debug, Clone, Deserialize)]
struct ExpectedFile {
    fixture: String,
    description: String,
    synthetic: String,
    expected: Vec<ExpectedComposite>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub description: String,
    /// Which identifiers were invented.
    pub synthetic: String,
    pub records: Vec<RefactoringRecord>,
    pub expected: Vec<ExpectedComposite>,
}

impl Fixture {
    /// Exact comparison: every expected composite present, nothing else.
    pub fn check(&self, composites: &[Composite]) -> Result<(), String> {
        if composites.len() != self.expected.len() {
            return Err(format!(
                "{}: expected {} composites, found {}",
                self.name,
                self.expected.len(),
                composites.len()
            ));
        }
        for expected in &self.expected {
            if !composites.iter().any(|c| expected.matches(c)) {
                let found: Vec<String> = composites
                    .iter()
                    .map(|c| format!("{} {} size={} scope={:?}", c.kind, c.anchor, c.size(), c.scope))
                    .collect();
                return Err(format!("{}: missing {expected:?}; found {found:?}", self.name));
            }
        }
        Ok(())
    }
}

const FIXTURE_FILES: [(&str, &str, &str); 5] = [
    (
        "superfoo_pullup",
        include_str!("../../fixtures/superfoo_pullup.jsonl"),
        include_str!("../../fixtures/superfoo_pullup.expected.json"),
    ),
    (
        "spring_dodispatch",
        include_str!("../../fixtures/spring_dodispatch.jsonl"),
        include_str!("../../fixtures/spring_dodispatch.expected.json"),
    ),
    (
        "robovm_has",
        include_str!("../../fixtures/robovm_has.jsonl"),
        include_str!("../../fixtures/robovm_has.expected.json"),
    ),
    (
        "neo4j_counts",
        include_str!("../../fixtures/neo4j_counts.jsonl"),
        include_str!("../../fixtures/neo4j_counts.expected.json"),
    ),
    (
        "dubbo_isEmptyMap",
        include_str!("../../fixtures/dubbo_isEmptyMap.jsonl"),
        include_str!("../../fixtures/dubbo_isEmptyMap.expected.json"),
    ),
];

/// Miner console text for the three pull-up messages of `superfoo_pullup`.
pub const SUPERFOO_MINER_TEXT: &str = include_str!("../../fixtures/superfoo_pullup.txt");

/// All bundled fixtures by name.
pub fn fixtures() -> BTreeMap<&'static str, Fixture> {
    FIXTURE_FILES
        .iter()
        .map(|&(name, jsonl, expected)| {
            let records = parse_jsonl(jsonl.as_bytes()).unwrap_or_else(|e| panic!("fixture {name}: {e}"));
            let file: ExpectedFile = serde_json::from_str(expected).unwrap_or_else(|e| panic!("fixture {name}: {e}"));
            assert_eq!(file.fixture, name, "expected file names a different fixture");
            (
                name,
                Fixture {
                    name,
                    description: file.description,
                    synthetic: file.synthetic,
                    records,
                    expected: file.expected,
                },
            )
        })
        .collect()
}

/// Re-evaluates the pair condition for every pair of members.
pub fn pairwise_sound(c: &Composite) -> bool {
    c.members
        .iter()
        .enumerate()
        .all(|(i, a)| c.members[i + 1..].iter().all(|b| pair_condition(c.kind, a, b)))
}
