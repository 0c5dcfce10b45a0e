use super::Dataset;
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stratified train/test split: each class contributes
/// `ceil(count * test_fraction)` samples to the test set, chosen by a seeded
/// shuffle. Classes with fewer than two samples go wholly to train (with a
/// warning). Within each subset the original sample order is preserved.
pub fn split(ds: Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let k = ds.class_names.len();
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, s) in ds.samples.iter().enumerate() {
        per_class[s.label].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; ds.samples.len()];
    for (label, mut indices) in per_class.into_iter().enumerate() {
        if indices.len() < 2 {
            if !indices.is_empty() {
                log::warn!(
                    "class '{}' has {} sample(s); keeping it wholly in train",
                    ds.class_names[label],
                    indices.len()
                );
            }
            continue;
        }
        indices.shuffle(&mut rng);
        let n_test = (indices.len() as f64 * test_fraction).ceil() as usize;
        for &i in indices.iter().take(n_test) {
            in_test[i] = true;
        }
    }

    let mut train = Dataset {
        samples: Vec::new(),
        class_names: ds.class_names.clone(),
    };
    let mut test = Dataset {
        samples: Vec::new(),
        class_names: ds.class_names,
    };
    for (i, sample) in ds.samples.into_iter().enumerate() {
        if in_test[i] {
            test.samples.push(sample);
        } else {
            train.samples.push(sample);
        }
    }
    Ok((train, test))
}
