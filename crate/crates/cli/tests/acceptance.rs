//! Acceptance run: one PASS/FAIL/SKIP line per criterion, non-zero exit on
//! any failure.
//!
//! `COMPOSITE_ORACLE_CSV=<path>` enables the full-oracle reproduction.

mod common;

use std::collections::BTreeSet;
use std::fs::File;
use std::time::{Duration, Instant};

use chrono::Duration as Span;
use composite_core::ingest::{apply_filters, parse_oracle_csv, FilterConfig};
use composite_core::metrics::{corpus_stats, KindStats};
use composite_core::testkit::synth::dense_records;
use composite_core::testkit::{fixtures, pairwise_sound};
use composite_core::{
    brute_force_cluster, cluster, normalize_signature, CompositeKind, ElementRef, RefactoringKind, RefactoringRecord,
};
use proptest::prelude::*;
use proptest::sample::select;
use proptest::test_runner::{Config, TestRunner};

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Run {
    failed: usize,
}

impl Run {
    fn report(&mut self, name: &str, verdict: Verdict) {
        let (tag, detail) = match verdict {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                self.failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("{tag}  {name}: {detail}");
    }
}

fn fixture_reproduction(run: &mut Run) {
    for (name, fixture) in fixtures() {
        let start = Instant::now();
        let keyed = cluster(&fixture.records);
        let verdict = match fixture
            .check(&keyed)
            .and_then(|()| fixture.check(&brute_force_cluster(&fixture.records)))
        {
            Ok(()) => {
                let e = &fixture.expected[0];
                let scope = e.scope.map(|s| format!(", {s}")).unwrap_or_default();
                Verdict::Pass(format!("{} size {}{scope} ({:.1?})", e.kind, e.size, start.elapsed()))
            }
            Err(e) => Verdict::Fail(e),
        };
        run.report(&format!("fixture {name}"), verdict);
    }
}

fn oracle_equivalence(run: &mut Run) {
    const DATASETS: u64 = 1_000;
    const RECORDS: usize = 500;
    let start = Instant::now();
    let mut composite_kinds = BTreeSet::new();
    let mut failure = None;
    for seed in 0..DATASETS {
        let records = dense_records(seed, RECORDS);
        let kinds: BTreeSet<RefactoringKind> = records.iter().map(|r| r.kind).collect();
        if kinds.len() != RefactoringKind::ALL.len() {
            failure = Some(format!("seed {seed}: only {} record kinds", kinds.len()));
            break;
        }
        let keyed = cluster(&records);
        if keyed != brute_force_cluster(&records) {
            failure = Some(format!("seed {seed}: keyed and brute-force clusterings differ"));
            break;
        }
        composite_kinds.extend(keyed.iter().map(|c| c.kind));
    }
    let elapsed = start.elapsed();
    let verdict = match failure {
        Some(f) => Verdict::Fail(f),
        None if composite_kinds.len() != CompositeKind::ALL.len() => {
            Verdict::Fail(format!("only {} composite kinds formed", composite_kinds.len()))
        }
        None if elapsed > Duration::from_secs(60) => Verdict::Fail(format!("took {elapsed:.1?}, limit 60s")),
        None => Verdict::Pass(format!(
            "{DATASETS} datasets x {RECORDS} records, all 9 record kinds and 8 composite kinds, {elapsed:.1?}"
        )),
    };
    run.report("oracle equivalence", verdict);
}

fn planted_recovery(run: &mut Run) {
    let mut totals = common::Recovery::default();
    let mut failure = None;
    for seed in 0..100u64 {
        let dir = tempfile::tempdir().expect("temp dir");
        let seed_s = seed.to_string();
        match common::synth_detect(
            dir.path(),
            &["--seed", &seed_s, "--singles", "300", "--multi-commit", "0.3"],
        ) {
            Ok(r) => {
                totals.planted += r.planted;
                totals.detected += r.detected;
                totals.matched += r.matched;
            }
            Err(e) => {
                failure = Some(format!("seed {seed}: {e}"));
                break;
            }
        }
    }
    let precision = totals.matched as f64 / totals.detected.max(1) as f64;
    let recall = totals.matched as f64 / totals.planted.max(1) as f64;
    let detail = format!(
        "100 seeds, {} planted, {} detected, precision {precision:.3}, recall {recall:.3}",
        totals.planted, totals.detected
    );
    let verdict = match failure {
        Some(f) => Verdict::Fail(f),
        None if totals.planted > 0 && totals.matched == totals.planted && totals.matched == totals.detected => {
            Verdict::Pass(detail)
        }
        None => Verdict::Fail(detail),
    };
    run.report("planted-composite recovery", verdict);
}

fn random_records() -> impl Strategy<Value = Vec<RefactoringRecord>> {
    (any::<u64>(), 0usize..200).prop_map(|(seed, n)| dense_records(seed, n))
}

fn raw_signature() -> impl Strategy<Value = String> {
    let param = (
        select(&["int", "String", "List<String>", "Map<K, V>", "byte[]", "Object..."][..]),
        "[a-z]{1,5}",
    );
    (
        select(&["", "public ", "private static ", "protected final "][..]),
        "[a-z][a-zA-Z0-9_]{0,8}",
        prop::collection::vec(param, 0..4),
        select(&["", " : void", " : int", " : List<T>"][..]),
    )
        .prop_map(|(modifier, name, params, ret)| {
            let params: Vec<String> = params.iter().map(|(t, n)| format!("{t} {n}")).collect();
            format!("{modifier}{name}({}){ret}", params.join(", "))
        })
}

fn invariant_suite(run: &mut Run) {
    const CASES: u32 = 256;
    let runner = || {
        TestRunner::new(Config {
            cases: CASES,
            failure_persistence: None,
            ..Config::default()
        })
    };
    let mut failures = Vec::new();
    let mut check = |name: &str, result: Result<(), String>| {
        if let Err(e) = result {
            failures.push(format!("{name}: {e}"));
        }
    };

    check(
        "permutation invariance",
        runner()
            .run(&(random_records(), any::<u64>()), |(records, seed)| {
                use rand::seq::SliceRandom;
                use rand::SeedableRng;
                let mut shuffled = records.clone();
                shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                prop_assert_eq!(cluster(&records), cluster(&shuffled));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    check(
        "size, disjointness, pairwise predicate",
        runner()
            .run(&random_records(), |records| {
                let mut seen = BTreeSet::new();
                for c in cluster(&records) {
                    prop_assert!(c.size() >= 2);
                    prop_assert!(pairwise_sound(&c));
                    for id in c.member_ids() {
                        prop_assert!(seen.insert((c.kind, id.to_string())));
                    }
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    check(
        "signature normalization idempotence",
        runner()
            .run(&raw_signature(), |raw| {
                let once = normalize_signature(&raw).map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert_eq!(normalize_signature(&once).unwrap(), once);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    const PACKAGES: &[&str] = &[
        "com.latest",
        "com.contest",
        "org.test",
        "org.Test.util",
        "a.samples",
        "a.sample",
        "docs",
        "x.mydocs",
    ];
    check(
        "filter segment matching",
        runner()
            .run(
                &(select(PACKAGES), select(&["test", "sample", "docs"][..])),
                |(pkg, fragment)| {
                    let record = RefactoringRecord::new(
                        "1",
                        "p",
                        "abc",
                        None,
                        RefactoringKind::Move,
                        ElementRef::method(format!("{pkg}.A"), "m()").unwrap(),
                        ElementRef::method("z.B", "m()").unwrap(),
                    )
                    .unwrap();
                    let cfg = FilterConfig {
                        excluded_package_fragments: vec![fragment.to_string()],
                        ..FilterConfig::none()
                    };
                    let dropped = apply_filters(std::slice::from_ref(&record), &cfg).records.is_empty();
                    let whole_segment = pkg.split('.').any(|s| s.eq_ignore_ascii_case(fragment));
                    prop_assert_eq!(dropped, whole_segment);
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
    );

    check(
        "age translation invariance",
        runner()
            .run(
                &(random_records(), -5_000i64..5_000, 0i64..86_400),
                |(records, days, secs)| {
                    let shift = Span::days(days) + Span::seconds(secs);
                    let shifted: Vec<RefactoringRecord> = records
                        .iter()
                        .map(|r| RefactoringRecord {
                            timestamp: r.timestamp.map(|t| t + shift),
                            ..r.clone()
                        })
                        .collect();
                    let ages = |rs: &[RefactoringRecord]| {
                        let mut v: Vec<_> = cluster(rs)
                            .into_iter()
                            .map(|c| (c.kind, c.anchor, c.age_days))
                            .collect();
                        v.sort();
                        v
                    };
                    prop_assert_eq!(ages(&records), ages(&shifted));
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
    );

    let verdict = if failures.is_empty() {
        Verdict::Pass(format!("5 property groups x {CASES} cases"))
    } else {
        Verdict::Fail(failures.join("; "))
    };
    run.report("invariant suite", verdict);
}

fn full_oracle(run: &mut Run) {
    let Some(path) = std::env::var_os("COMPOSITE_ORACLE_CSV") else {
        run.report(
            "full-oracle reproduction",
            Verdict::Skip("set COMPOSITE_ORACLE_CSV to a converted oracle export".into()),
        );
        return;
    };
    let parsed = match File::open(&path)
        .map_err(|e| e.to_string())
        .and_then(|f| parse_oracle_csv(f).map_err(|e| e.to_string()))
    {
        Ok(p) => p,
        Err(e) => {
            run.report("full-oracle reproduction", Verdict::Fail(e));
            return;
        }
    };
    let records = parsed.records;
    let composites = cluster(&records);
    let stats = corpus_stats(&records, &composites).expect("composites come from these records");
    let column = |f: fn(&KindStats) -> usize| -> Vec<usize> {
        CompositeKind::ALL.iter().map(|k| f(&stats.per_kind[k])).collect()
    };
    let per_kind = column(|k| k.composite_count);
    let operations = column(|k| k.operation_count);
    let projects = column(|k| k.projects);
    let small = composites.iter().filter(|c| c.size() <= 3).count();
    let small_share = 100.0 * small as f64 / composites.len().max(1) as f64;

    let mut mismatches = Vec::new();
    let mut expect = |what: &str, ok: bool, got: String| {
        if !ok {
            mismatches.push(format!("{what} = {got}"));
        }
    };
    expect("singles", stats.singles_total == 1_725, stats.singles_total.to_string());
    expect(
        "in composites",
        stats.singles_in_composites == 1_043,
        stats.singles_in_composites.to_string(),
    );
    expect(
        "coverage",
        (stats.singles_in_composites_percent - 60.5).abs() <= 0.1,
        format!("{:.1}%", stats.singles_in_composites_percent),
    );
    expect(
        "composites",
        stats.composite_total == 366,
        stats.composite_total.to_string(),
    );
    expect(
        "per-kind",
        per_kind == [142, 125, 55, 21, 13, 2, 6, 2],
        format!("{per_kind:?}"),
    );
    expect(
        "per-kind operations",
        operations == [537, 295, 277, 48, 33, 4, 15, 4],
        format!("{operations:?}"),
    );
    expect(
        "per-kind projects",
        projects == [37, 37, 37, 11, 7, 2, 4, 1],
        format!("{projects:?}"),
    );
    expect(
        "projects with composites",
        stats.projects_with_composites == 81,
        stats.projects_with_composites.to_string(),
    );
    expect("size <= 3 share", small_share >= 84.0, format!("{small_share:.1}%"));

    let detail = format!(
        "{} singles, {} in composites ({:.1}%), {} composites, per kind {per_kind:?}, {small_share:.1}% of size <= 3",
        stats.singles_total, stats.singles_in_composites, stats.singles_in_composites_percent, stats.composite_total
    );
    let verdict = if mismatches.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; mismatched: {}", mismatches.join(", ")))
    };
    run.report("full-oracle reproduction", verdict);
}

fn main() {
    let mut run = Run { failed: 0 };
    fixture_reproduction(&mut run);
    oracle_equivalence(&mut run);
    planted_recovery(&mut run);
    invariant_suite(&mut run);
    full_oracle(&mut run);
    if run.failed > 0 {
        println!("{} criteria failed", run.failed);
        std::process::exit(1);
    }
}
