//! Per-composite characteristics and corpus-level statistics.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::model::{Composite, CompositeKind, RefactoringRecord, Scope};

/// Whole days between the oldest and the most recent dated member. `None`
/// when fewer than two members carry a timestamp.
pub fn composite_age_days(c: &Composite) -> Option<u64> {
    let mut stamps = c.members.iter().filter_map(|r| r.timestamp);
    let first = stamps.next()?;
    let (mut min, mut max, mut count) = (first, first, 1);
    for ts in stamps {
        min = min.min(ts);
        max = max.max(ts);
        count += 1;
    }
    if count < 2 {
        return None;
    }
    u64::try_from((max - min).num_days()).ok()
}

/// Whether the extracted code of `record` stays in its origin class.
pub fn is_intra_class(record: &RefactoringRecord) -> bool {
    record.source.class_fqn == record.target.class_fqn
}

/// Scope of an extraction composite; `None` for every other kind.
pub fn classify_scope(c: &Composite) -> Option<Scope> {
    if !c.kind.has_scope() || c.members.is_empty() {
        return None;
    }
    let intra = c.members.iter().filter(|r| is_intra_class(r)).count();
    Some(if intra == c.members.len() {
        Scope::IntraClass
    } else if intra == 0 {
        Scope::InterClass
    } else {
        Scope::Mixed
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KindStats {
    /// Projects with at least one composite of this kind.
    pub projects: usize,
    pub composite_count: usize,
    /// Operations inside composites of this kind. A record in two kinds is
    /// counted under both.
    pub operation_count: usize,
    pub percent_of_composites: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bin {
    pub lower: u64,
    /// Inclusive; `None` for an open-ended last bin.
    pub upper: Option<u64>,
    pub count: usize,
}

/// Nearest-rank order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub min: u64,
    pub median: u64,
    pub p75: u64,
    pub p90: u64,
    pub max: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub histogram: Vec<Bin>,
    pub summary: Option<Summary>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeCounts {
    pub intra_class: usize,
    pub inter_class: usize,
    pub mixed: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub singles_total: usize,
    /// Distinct records in at least one composite.
    pub singles_in_composites: usize,
    pub singles_in_composites_percent: f64,
    pub composite_total: usize,
    pub projects_with_composites: usize,
    pub per_kind: BTreeMap<CompositeKind, KindStats>,
    pub size_distribution: Distribution,
    /// Over composites with a defined age.
    pub age_distribution: Distribution,
    pub scope_breakdown: BTreeMap<CompositeKind, ScopeCounts>,
    pub multi_commit_count: usize,
    pub multi_commit_percent: f64,
}

/// `100 * part / whole`, or zero for an empty whole.
pub fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Nearest-rank percentile of ascending `sorted` data: the smallest value
/// with at least `p` percent of the data at or below it.
pub fn nearest_rank(sorted: &[u64], p: u32) -> Option<u64> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len();
    let rank = (p as usize * n).div_ceil(100).max(1);
    Some(sorted[rank.min(n) - 1])
}

fn summarize(values: &mut [u64]) -> Option<Summary> {
    values.sort_unstable();
    Some(Summary {
        min: *values.first()?,
        median: nearest_rank(values, 50)?,
        p75: nearest_rank(values, 75)?,
        p90: nearest_rank(values, 90)?,
        max: *values.last()?,
    })
}

fn exact_histogram(values: &[u64]) -> Vec<Bin> {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(value, count)| Bin {
            lower: value,
            upper: Some(value),
            count,
        })
        .collect()
}

/// Day buckets: same day, a week, a month, a quarter, half a year, a year,
/// two years, longer. Empty buckets are kept so tables line up.
const AGE_BUCKETS: [(u64, Option<u64>); 8] = [
    (0, Some(0)),
    (1, Some(7)),
    (8, Some(30)),
    (31, Some(90)),
    (91, Some(180)),
    (181, Some(365)),
    (366, Some(730)),
    (731, None),
];

fn age_histogram(values: &[u64]) -> Vec<Bin> {
    if values.is_empty() {
        return Vec::new();
    }
    AGE_BUCKETS
        .iter()
        .map(|&(lower, upper)| Bin {
            lower,
            upper,
            count: values
                .iter()
                .filter(|&&v| v >= lower && upper.is_none_or(|u| v <= u))
                .count(),
        })
        .collect()
}

/// Aggregates over `composites`, which must have been built from `singles`.
pub fn corpus_stats(singles: &[RefactoringRecord], composites: &[Composite]) -> Result<CorpusStats, MetricsError> {
    let known: HashSet<&str> = singles.iter().map(|r| r.id.as_str()).collect();
    let mut covered: HashSet<&str> = HashSet::new();
    for c in composites {
        for id in c.member_ids() {
            if !known.contains(id) {
                return Err(MetricsError::UnknownRecord(id.to_string()));
            }
            covered.insert(id);
        }
    }

    let total = composites.len();
    let mut per_kind: BTreeMap<CompositeKind, KindStats> =
        CompositeKind::ALL.iter().map(|&k| (k, KindStats::default())).collect();
    let mut kind_projects: BTreeMap<CompositeKind, BTreeSet<&str>> = BTreeMap::new();
    let mut all_projects = BTreeSet::new();
    let mut scope_breakdown: BTreeMap<CompositeKind, ScopeCounts> = CompositeKind::ALL
        .iter()
        .filter(|k| k.has_scope())
        .map(|&k| (k, ScopeCounts::default()))
        .collect();

    for c in composites {
        let entry = per_kind.entry(c.kind).or_default();
        entry.composite_count += 1;
        entry.operation_count += c.size();
        let projects = c.projects();
        all_projects.extend(projects.iter().copied());
        kind_projects.entry(c.kind).or_default().extend(projects);
        if let (Some(scope), Some(counts)) = (c.scope, scope_breakdown.get_mut(&c.kind)) {
            match scope {
                Scope::IntraClass => counts.intra_class += 1,
                Scope::InterClass => counts.inter_class += 1,
                Scope::Mixed => counts.mixed += 1,
            }
        }
    }
    for (kind, stats) in per_kind.iter_mut() {
        stats.projects = kind_projects.get(kind).map_or(0, BTreeSet::len);
        stats.percent_of_composites = percent(stats.composite_count, total);
    }

    let mut sizes: Vec<u64> = composites.iter().map(|c| c.size() as u64).collect();
    let mut ages: Vec<u64> = composites.iter().filter_map(|c| c.age_days).collect();
    let multi_commit_count = composites.iter().filter(|c| c.is_multi_commit()).count();

    Ok(CorpusStats {
        singles_total: singles.len(),
        singles_in_composites: covered.len(),
        singles_in_composites_percent: percent(covered.len(), singles.len()),
        composite_total: total,
        projects_with_composites: all_projects.len(),
        per_kind,
        size_distribution: Distribution {
            histogram: exact_histogram(&sizes),
            summary: summarize(&mut sizes),
        },
        age_distribution: Distribution {
            histogram: age_histogram(&ages),
            summary: summarize(&mut ages),
        },
        scope_breakdown,
        multi_commit_count,
        multi_commit_percent: percent(multi_commit_count, total),
    })
}
