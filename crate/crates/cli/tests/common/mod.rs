#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use composite_core::report::{parse_report, AnchorEntry};
use composite_core::testkit::synth::GroundTruth;
use composite_core::CompositeKind;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

pub fn miner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_composite-miner"))
        .args(args)
        .env_remove("COMPOSITE_MINER_LOG")
        .output()
        .expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

type CompositeId = (CompositeKind, AnchorEntry, BTreeSet<String>);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Recovery {
    pub planted: usize,
    pub detected: usize,
    pub matched: usize,
}

/// Runs `synth` then `detect --emit json` in `dir` and scores the detected
/// composites against the ground truth.
pub fn synth_detect(dir: &Path, synth_args: &[&str]) -> Result<Recovery, String> {
    let dir_s = dir.to_str().unwrap();
    let mut args = vec!["synth", "--out", dir_s];
    args.extend_from_slice(synth_args);
    let out = miner(&args);
    if !out.status.success() {
        return Err(format!("synth failed: {}", stderr(&out)));
    }
    let dataset = dir.join("dataset.jsonl");
    let out = miner(&[
        "detect",
        "--input",
        dataset.to_str().unwrap(),
        "--format",
        "jsonl",
        "--emit",
        "json",
        "--out",
        dir_s,
        "--pin-timestamp",
        "2024-01-01T00:00:00Z",
    ]);
    if !out.status.success() {
        return Err(format!("detect failed: {}", stderr(&out)));
    }
    let truth: GroundTruth = serde_json::from_str(&std::fs::read_to_string(dir.join("ground_truth.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let report = parse_report(&std::fs::read_to_string(dir.join("report.json")).unwrap()).map_err(|e| e.to_string())?;

    let planted: BTreeSet<CompositeId> = truth
        .planted
        .iter()
        .map(|p| (p.kind, p.anchor.clone(), p.members.iter().cloned().collect()))
        .collect();
    let detected: BTreeSet<CompositeId> = report
        .composites
        .iter()
        .map(|c| (c.kind, c.anchor.clone(), c.members.iter().cloned().collect()))
        .collect();
    Ok(Recovery {
        planted: planted.len(),
        detected: detected.len(),
        matched: planted.intersection(&detected).count(),
    })
}

/// [`synth_detect`], failing unless detection is exact. Returns the number
/// of planted composites.
pub fn synth_detect_round_trip(dir: &Path, synth_args: &[&str]) -> Result<usize, String> {
    let r = synth_detect(dir, synth_args)?;
    if r.matched != r.planted || r.matched != r.detected {
        return Err(format!(
            "{} planted composites missed, {} spurious",
            r.planted - r.matched,
            r.detected - r.matched
        ));
    }
    Ok(r.planted)
}
