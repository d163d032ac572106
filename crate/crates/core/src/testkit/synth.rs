//! Seeded dataset generators.
//!
//! [`generate`] plants composites of chosen kinds and pads the dataset with
//! singleton noise whose class names live in their own namespace, so the
//! planted set is exactly what detection must find. [`dense_records`] draws
//! elements from tiny pools instead, producing heavy key overlap across all
//! kinds for oracle comparisons.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CompositeKind, ElementRef, Member, RefactoringKind, RefactoringRecord};
use crate::report::AnchorEntry;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("composite mix weights must sum to a positive value")]
    NonPositiveMix,
    #[error("invalid composite mix entry `{0}`")]
    MixEntry(String),
    #[error("{0} must be a fraction in [0, 1]")]
    Fraction(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub singles: usize,
    pub mix: Vec<(CompositeKind, f64)>,
    /// Fraction of records that are singletons.
    pub noise: f64,
    /// Fraction of planted composites spread over several commits.
    pub multi_commit: f64,
}

impl SynthConfig {
    pub fn new(seed: u64, singles: usize) -> SynthConfig {
        SynthConfig {
            seed,
            singles,
            mix: CompositeKind::ALL.iter().map(|&k| (k, 1.0)).collect(),
            noise: 0.2,
            multi_commit: 0.15,
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        for (name, value) in [("noise", self.noise), ("multi-commit", self.multi_commit)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SynthError::Fraction(name));
            }
        }
        let sum: f64 = self.mix.iter().map(|(_, w)| w).sum();
        if !sum.is_finite() || sum <= 0.0 || self.mix.iter().any(|(_, w)| *w < 0.0) {
            return Err(SynthError::NonPositiveMix);
        }
        Ok(())
    }
}

/// Parses `kind=weight,kind=weight`. Kinds not listed get weight zero.
pub fn parse_mix(text: &str) -> Result<Vec<(CompositeKind, f64)>, SynthError> {
    text.split(',')
        .filter(|part| !part.trim().is_empty())
        .map(|part| {
            let (kind, weight) = part
                .split_once('=')
                .ok_or_else(|| SynthError::MixEntry(part.to_string()))?;
            let kind: CompositeKind = kind
                .trim()
                .parse()
                .map_err(|_| SynthError::MixEntry(part.to_string()))?;
            let weight: f64 = weight
                .trim()
                .parse()
                .map_err(|_| SynthError::MixEntry(part.to_string()))?;
            Ok((kind, weight))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedComposite {
    pub kind: CompositeKind,
    pub anchor: AnchorEntry,
    /// Sorted record ids.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub singles: usize,
    pub noise_records: usize,
    pub planted: Vec<PlantedComposite>,
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub records: Vec<RefactoringRecord>,
    pub truth: GroundTruth,
}

const PROJECTS: [&str; 3] = ["synth-alpha", "synth-beta", "synth-gamma"];

struct Builder {
    rng: ChaCha8Rng,
    next_id: usize,
    base: DateTime<Utc>,
}

impl Builder {
    fn id(&mut self) -> String {
        self.next_id += 1;
        format!("r{}", self.next_id)
    }

    fn commit(&mut self) -> String {
        (0..40)
            .map(|_| char::from_digit(self.rng.gen_range(0..16), 16).unwrap())
            .collect()
    }

    fn timestamp(&mut self) -> DateTime<Utc> {
        self.base + Duration::seconds(self.rng.gen_range(0..1_500 * 86_400))
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[self.rng.gen_range(0..items.len())]
    }
}

fn method(class: &str, sig: &str) -> ElementRef {
    ElementRef::new(class, Member::Method(sig.to_string())).expect("generated class is non-empty")
}

fn field(class: &str, name: &str) -> ElementRef {
    ElementRef::new(class, Member::Field(name.to_string())).expect("generated names are non-empty")
}

/// Source/target pair for member `j` of planted composite `p`.
fn planted_member(
    b: &mut Builder,
    kind: CompositeKind,
    pkg: &str,
    j: usize,
) -> (RefactoringKind, ElementRef, ElementRef) {
    use RefactoringKind as R;
    let core = format!("{pkg}.Core");
    let base = format!("{pkg}.Base");
    let sub = format!("{pkg}.Sub{j}");
    match kind {
        CompositeKind::MethodComposition => {
            let target = method(&core, "merged(int, String)");
            if b.rng.gen_bool(0.5) {
                (R::Extract, method(&core, &format!("origin{j}()")), target)
            } else {
                (
                    R::ExtractMove,
                    method(&format!("{pkg}.Client{j}"), &format!("origin{j}()")),
                    target,
                )
            }
        }
        CompositeKind::MethodDecomposition => {
            let source = method(&core, "large(List<String>)");
            if b.rng.gen_bool(0.5) {
                (R::Extract, source, method(&core, &format!("part{j}()")))
            } else {
                (
                    R::ExtractMove,
                    source,
                    method(&format!("{pkg}.Helper{j}"), &format!("part{j}()")),
                )
            }
        }
        CompositeKind::ClassDecomposition => {
            let source = method(&core, &format!("moved{j}(long)"));
            let dest = format!("{pkg}.Dest{}", j % 3);
            if b.rng.gen_bool(0.5) {
                (R::Move, source, method(&dest, &format!("moved{j}(long)")))
            } else {
                (R::MoveRename, source, method(&dest, &format!("renamed{j}(long)")))
            }
        }
        CompositeKind::CompositeInlineMethod => (
            R::Inline,
            method(&core, "inlined()"),
            method(&core, &format!("caller{j}()")),
        ),
        CompositeKind::CompositePullUpMethod => (R::PullUpMethod, method(&sub, "shared()"), method(&base, "shared()")),
        CompositeKind::CompositePushDownMethod => {
            (R::PushDownMethod, method(&base, "special()"), method(&sub, "special()"))
        }
        CompositeKind::CompositePullUpField => (R::PullUpField, field(&sub, "state"), field(&base, "state")),
        CompositeKind::CompositePushDownField => (R::PushDownField, field(&base, "flag"), field(&sub, "flag")),
    }
}

/// A singleton record in a namespace no planted composite uses.
fn noise_member(b: &mut Builder, i: usize) -> (RefactoringKind, ElementRef, ElementRef) {
    use RefactoringKind as R;
    let kind = b.pick(&RefactoringKind::ALL);
    let src = format!("synth.noise.n{i}.Origin");
    let dst = format!("synth.noise.n{i}.Destination");
    let (source, target) = match kind {
        R::Extract | R::Inline => (method(&src, "a()"), method(&src, "b()")),
        R::PullUpField | R::PushDownField => (field(&src, "f"), field(&dst, "f")),
        _ => (method(&src, "a()"), method(&dst, "b()")),
    };
    (kind, source, target)
}

/// Builds a dataset from `cfg`. A pure function of the configuration.
pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset, SynthError> {
    cfg.validate()?;
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        next_id: 0,
        base: Utc.with_ymd_and_hms(2015, 1, 1, 0, 0, 0).unwrap(),
    };
    let mut noise = (cfg.singles as f64 * cfg.noise).round() as usize;
    let mut budget = cfg.singles - noise.min(cfg.singles);
    if budget == 1 {
        noise += 1;
        budget = 0;
    }
    let total_weight: f64 = cfg.mix.iter().map(|(_, w)| w).sum();

    let mut records = Vec::with_capacity(cfg.singles);
    let mut planted = Vec::new();
    let mut p = 0;
    while budget >= 2 {
        let mut draw = b.rng.gen_range(0.0..total_weight);
        let mut kind = cfg.mix.iter().rev().find(|(_, w)| *w > 0.0).map(|(k, _)| *k).unwrap();
        for &(k, w) in &cfg.mix {
            if draw < w {
                kind = k;
                break;
            }
            draw -= w;
        }
        let mut size = b.rng.gen_range(2..=budget.min(8));
        if budget - size == 1 {
            size += 1;
        }
        budget -= size;

        let pkg = format!("synth.p{p}");
        let project = b.pick(&PROJECTS);
        let spread = b.rng.gen_bool(cfg.multi_commit);
        let (shared_commit, shared_time) = (b.commit(), b.timestamp());
        let mut ids = Vec::with_capacity(size);
        for j in 0..size {
            let (rkind, source, target) = planted_member(&mut b, kind, &pkg, j);
            let (commit, time) = if spread && j > 0 {
                (b.commit(), b.timestamp())
            } else {
                (shared_commit.clone(), shared_time)
            };
            let id = b.id();
            ids.push(id.clone());
            records.push(
                RefactoringRecord::new(id, project, commit, Some(time), rkind, source, target)
                    .expect("planted records satisfy the model invariants"),
            );
        }
        ids.sort_by(|a, b| crate::model::compare_ids(a, b));
        let anchor_record = &records[records.len() - 1];
        let anchor = match kind {
            CompositeKind::ClassDecomposition => anchor_record.source.enclosing_class(),
            k if k.anchored_on_target() => anchor_record.target.clone(),
            _ => anchor_record.source.clone(),
        };
        planted.push(PlantedComposite {
            kind,
            anchor: AnchorEntry::from_element(&anchor),
            members: ids,
        });
        p += 1;
    }

    for i in 0..noise {
        let (kind, source, target) = noise_member(&mut b, i);
        let (id, project, commit, time) = (b.id(), b.pick(&PROJECTS), b.commit(), b.timestamp());
        records.push(
            RefactoringRecord::new(id, project, commit, Some(time), kind, source, target)
                .expect("noise records satisfy the model invariants"),
        );
    }
    records.shuffle(&mut b.rng);

    Ok(SynthDataset {
        records,
        truth: GroundTruth {
            seed: cfg.seed,
            singles: cfg.singles,
            noise_records: noise,
            planted,
        },
    })
}

/// `n` records over tiny element pools: every record kind appears (the
/// first nine records cycle through them) and keys collide often, so every
/// composite kind forms, with overlaps between composition and
/// decomposition.
pub fn dense_records(seed: u64, n: usize) -> Vec<RefactoringRecord> {
    use RefactoringKind as R;
    const CLASSES: [&str; 5] = ["pkg.A", "pkg.B", "pkg.C", "pkg.sub.D", "pkg.sub.E"];
    const METHODS: [&str; 6] = ["m()", "m(int)", "n()", "run(String, int)", "get(Map<K,V>)", "apply()"];
    const FIELDS: [&str; 3] = ["x", "count", "cache"];
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(seed),
        next_id: 0,
        base: Utc.with_ymd_and_hms(2018, 6, 1, 0, 0, 0).unwrap(),
    };
    let commits: Vec<String> = (0..12).map(|_| b.commit()).collect();
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let kind = if i < R::ALL.len() { R::ALL[i] } else { b.pick(&R::ALL) };
        let c1 = b.pick(&CLASSES);
        let c2 = match kind {
            R::Extract => c1,
            R::ExtractMove => loop {
                let c = b.pick(&CLASSES);
                if c != c1 {
                    break c;
                }
            },
            _ => b.pick(&CLASSES),
        };
        let (source, target) = if kind.is_field_level() {
            (field(c1, b.pick(&FIELDS)), field(c2, b.pick(&FIELDS)))
        } else {
            (method(c1, b.pick(&METHODS)), method(c2, b.pick(&METHODS)))
        };
        let commit = commits[b.rng.gen_range(0..commits.len())].clone();
        let timestamp = b.rng.gen_bool(0.7).then(|| b.timestamp());
        let project = if b.rng.gen_bool(0.5) { "dense-a" } else { "dense-b" };
        records.push(
            RefactoringRecord::new(format!("d{i}"), project, commit, timestamp, kind, source, target)
                .expect("dense records satisfy the model invariants"),
        );
    }
    records
}
