//! Deterministic stratified splitting: a seeded shuffle within each modality
//! followed by a prefix take.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Errors from stratified splitting.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitError {
    /// Fraction must lie strictly between 0 and 1.
    BadFraction(f64),
    /// A modality has fewer than two entries.
    TooFewEntries { modality: String, count: usize },
}

impl fmt::Display for SplitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitError::BadFraction(v) => write!(f, "split fraction {v} not in (0, 1)"),
            SplitError::TooFewEntries { modality, count } => {
                write!(f, "modality {modality:?} has {count} entries, need at least 2")
            }
        }
    }
}

/// Ceiling of `fraction * count` with a guard against float noise (so that
/// e.g. `0.8 * 10` is 8, not 9).
fn take_count(fraction: f64, count: usize) -> usize {
    let t = fraction * count as f64;
    (libm::ceil(t - 1e-9) as usize).min(count)
}

/// Splits indices `0..labels.len()` into two index sets. Within each
/// modality, `ceil(fraction * count)` shuffled entries go to the first set.
/// Deterministic for a fixed seed; the outputs partition the input. Output
/// indices are in ascending order within each set.
pub fn stratified_split_indices(
    labels: &[&str],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), SplitError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(SplitError::BadFraction(fraction));
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, &label) in labels.iter().enumerate() {
        groups.entry(label).or_default().push(i);
    }
    for (label, members) in &groups {
        if members.len() < 2 {
            return Err(SplitError::TooFewEntries {
                modality: String::from(*label),
                count: members.len(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (_, mut members) in groups {
        members.shuffle(&mut rng);
        let take = take_count(fraction, members.len());
        first.extend_from_slice(&members[..take]);
        second.extend_from_slice(&members[take..]);
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}
