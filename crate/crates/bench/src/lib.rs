//! Inputs shared by the benchmarks.

use composite_core::report::render_record_message;
use composite_core::testkit::synth::{generate, SynthConfig};
use composite_core::RefactoringRecord;

/// A planted dataset of `n` records with the default composite mix.
pub fn planted(seed: u64, n: usize) -> Vec<RefactoringRecord> {
    generate(&SynthConfig::new(seed, n))
        .expect("default configuration is valid")
        .records
}

/// The records of [`planted`] rendered as miner console text.
pub fn miner_text(seed: u64, n: usize) -> String {
    planted(seed, n)
        .iter()
        .map(|r| render_record_message(r) + "\n")
        .collect()
}
