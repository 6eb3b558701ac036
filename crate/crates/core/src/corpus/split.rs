use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Dataset, Label};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub stratified: bool,
}

fn default_true() -> bool {
    true
}

impl SplitSpec {
    pub fn new(test_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            test_fraction,
            seed,
            stratified: true,
        }
    }
}

/// Stratified held-out partition of label positions.
///
/// Each class with `n` members contributes `round(n * test_fraction)` members
/// to the held-out side, clamped to `[1, n - 1]` so both sides see every
/// class. Returned index lists are ascending.
pub fn stratified_partition(
    labels: &[Label],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), CorpusError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::InvalidSplit(format!(
            "test fraction {test_fraction} not in (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in Label::ALL {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        match members.len() {
            0 => continue,
            1 => return Err(CorpusError::ClassTooSmall(class)),
            _ => {}
        }
        members.shuffle(&mut rng);
        let n = members.len();
        let held_out = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
        test.extend_from_slice(&members[..held_out]);
        train.extend_from_slice(&members[held_out..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Split a dataset into `(train, test)`, preserving the original order on
/// each side.
pub fn make_split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset), CorpusError> {
    let labels = dataset.labels();
    let (train, test) = if spec.stratified {
        stratified_partition(&labels, spec.test_fraction, spec.seed)?
    } else {
        random_partition(labels.len(), spec.test_fraction, spec.seed)?
    };
    Ok((
        dataset.select(format!("{}-train", dataset.name()), &train),
        dataset.select(format!("{}-test", dataset.name()), &test),
    ))
}

fn random_partition(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), CorpusError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::InvalidSplit(format!(
            "test fraction {test_fraction} not in (0, 1)"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let held_out = (n as f64 * test_fraction).round() as usize;
    let (mut test, mut train) = (order[..held_out].to_vec(), order[held_out..].to_vec());
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
