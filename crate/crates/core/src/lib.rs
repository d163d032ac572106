//! Detection of composite refactorings.
//!
//! Refactoring miners report single operations (an Extract Method, a Pull Up
//! Method, ...) one at a time. Many of them belong together: six extractions
//! out of the same method, a method pulled up from three subclasses into one
//! superclass. This crate groups such operations into composites, one of
//! eight kinds, and characterizes them by size, scope, commit span and age.
//!
//! ```
//! use composite_core::{ingest, cluster, model::CompositeKind};
//!
//! let ctx = ingest::MessageContext { project: "demo".into(), commit: "abc".into(), timestamp: None };
//! let text = "\
//! Pull Up Method public m() : void from class SubFoo1 to public m() : void from class SuperFoo
//! Pull Up Method public m() : void from class SubFoo2 to public m() : void from class SuperFoo
//! ";
//! let parsed = ingest::parse_miner_text(text.as_bytes(), &ctx).unwrap();
//! let composites = cluster::cluster(&parsed.records);
//! assert_eq!(composites.len(), 1);
//! assert_eq!(composites[0].kind, CompositeKind::CompositePullUpMethod);
//! ```

pub mod cluster;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod report;
mod signature;
pub mod testkit;

pub use cluster::{brute_force_cluster, cluster, keys_for, ClusterKey};
pub use error::{IngestError, MetricsError, ModelError, ReportError};
pub use ingest::FilterConfig;
pub use metrics::CorpusStats;
pub use model::{Composite, CompositeKind, ElementRef, Member, RefactoringKind, RefactoringRecord, Scope};
pub use report::ReportBundle;
pub use signature::{normalize_field_name, normalize_signature};

/// Result of running filters and clustering over a record list.
#[derive(Debug, Clone)]
pub struct Detection {
    pub singles: Vec<RefactoringRecord>,
    pub composites: Vec<Composite>,
    pub dropped: ingest::DropCounts,
}

/// Filters `records`, clusters the survivors and keeps composites with at
/// least `min_size` members.
pub fn detect(records: &[RefactoringRecord], filters: &FilterConfig, min_size: usize) -> Detection {
    let filtered = ingest::apply_filters(records, filters);
    let composites = cluster(&filtered.records)
        .into_iter()
        .filter(|c| c.size() >= min_size)
        .collect();
    Detection {
        singles: filtered.records,
        composites,
        dropped: filtered.dropped,
    }
}
