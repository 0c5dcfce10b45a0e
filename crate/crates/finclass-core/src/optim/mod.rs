//! Adam, the training loop and evaluation metrics.

mod adam;
mod metrics;

pub use adam::{adam_step, AdamParams, AdamState};
pub use metrics::{evaluate, Metrics};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{Gradients, Network};
use crate::nn::{
    softmax_cross_entropy_grad, softmax_cross_entropy_loss, ActivationKind, LossForm,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Training-run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub activation: ActivationKind,
    pub loss: LossForm,
    pub shuffle: bool,
    /// 1 forces the bit-exact single-threaded mode. Larger values fan the
    /// per-sample passes of a batch out over a thread pool; the gradient
    /// reduction order stays fixed, so results do not depend on scheduling.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 16,
            learning_rate: 1e-3,
            seed: 0,
            activation: ActivationKind::Relu,
            loss: LossForm::TwoTerm,
            shuffle: true,
            threads: 1,
        }
    }
}

/// Per-epoch aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
}

/// Per-optimizer-step record streamed to the observer (the CLI writes these
/// as CSV rows).
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub epoch: usize,
    pub step: usize,
    pub loss: f64,
    /// Running accuracy over the samples visited so far in this epoch.
    pub train_accuracy: f64,
}

/// Loss/accuracy trajectory of one training run; one entry per epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochStats>,
}

/// Train with Adam. See [`fit_with`] for the step observer variant.
pub fn fit(network: &mut Network, dataset: &Dataset, cfg: &TrainConfig) -> Result<History> {
    fit_with(network, dataset, cfg, |_| {})
}

/// Run `epochs x ceil(N / batch_size)` optimizer steps of forward, loss,
/// backward and Adam update, averaging gradients over each batch. Shuffling
/// is driven by the seed; with `threads == 1` the whole run is sequential
/// and bit-exactly reproducible.
pub fn fit_with(
    network: &mut Network,
    dataset: &Dataset,
    cfg: &TrainConfig,
    mut on_step: impl FnMut(&StepRecord),
) -> Result<History> {
    if cfg.epochs == 0 {
        return Err(Error::InvalidConfig("epochs must be >= 1".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidConfig("batch size must be >= 1".into()));
    }
    if dataset.is_empty() {
        return Err(Error::InvalidInput("training on an empty dataset".into()));
    }
    let input_shape = network.architecture().input_shape;
    for s in &dataset.samples {
        if s.tensor.shape() != input_shape {
            return Err(Error::InvalidInput(format!(
                "sample '{}' has shape {:?}, expected {:?}",
                s.source,
                s.tensor.shape(),
                input_shape
            )));
        }
        if s.label >= network.num_classes() {
            return Err(Error::InvalidInput(format!(
                "sample '{}' has label {} outside {} classes",
                s.source,
                s.label,
                network.num_classes()
            )));
        }
    }

    let pool = if cfg.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let hyper = AdamParams {
        learning_rate: cfg.learning_rate,
        ..AdamParams::default()
    };
    let mut adam = AdamState::new(hyper, &network.parameters());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = History::default();
    let mut global_step = 0usize;
    let mut forward_counter = 0u64;

    for epoch in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss_sum = 0.0f64;
        let mut epoch_correct = 0usize;
        let mut epoch_seen = 0usize;

        for batch in order.chunks(cfg.batch_size) {
            let jobs: Vec<(usize, u64)> = batch
                .iter()
                .enumerate()
                .map(|(j, &idx)| (idx, forward_counter + j as u64))
                .collect();
            forward_counter += batch.len() as u64;

            let run = |&(idx, fid): &(usize, u64)| -> Result<(f64, bool, Gradients)> {
                let sample = &dataset.samples[idx];
                let cache = network.forward_train(&sample.tensor, fid)?;
                let target = dataset.one_hot(sample.label);
                let loss = softmax_cross_entropy_loss(&cache.logits, &target, cfg.loss)?;
                let grad_logits = softmax_cross_entropy_grad(&cache.logits, &target, cfg.loss)?;
                let grads = network.backward(&cache, &grad_logits)?;
                let logits = cache.logits.data();
                let mut best = 0usize;
                for (i, &v) in logits.iter().enumerate() {
                    if v > logits[best] {
                        best = i;
                    }
                }
                Ok((loss as f64, best == sample.label, grads))
            };

            let results: Vec<Result<(f64, bool, Gradients)>> = match &pool {
                Some(pool) => pool.install(|| jobs.par_iter().map(run).collect()),
                None => jobs.iter().map(run).collect(),
            };

            // Fixed-order reduction keeps parallel runs bit-identical to
            // sequential ones.
            let mut batch_grads = Gradients::zeros_like(network);
            let mut batch_loss = 0.0f64;
            for r in results {
                let (loss, correct, grads) = r?;
                batch_loss += loss;
                if correct {
                    epoch_correct += 1;
                }
                batch_grads.accumulate(&grads);
            }
            let batch_len = batch.len();
            batch_grads.scale(1.0 / batch_len as f32);
            let mean_loss = batch_loss / batch_len as f64;
            if !mean_loss.is_finite() {
                return Err(Error::Diverged {
                    step: global_step,
                    detail: format!("batch loss is {mean_loss}"),
                });
            }

            adam_step(&mut network.parameters_mut(), &batch_grads.0, &mut adam)?;

            epoch_loss_sum += batch_loss;
            epoch_seen += batch_len;
            on_step(&StepRecord {
                epoch,
                step: global_step,
                loss: mean_loss,
                train_accuracy: 100.0 * epoch_correct as f64 / epoch_seen as f64,
            });
            global_step += 1;
        }

        history.epochs.push(EpochStats {
            epoch,
            mean_loss: epoch_loss_sum / n as f64,
            train_accuracy: 100.0 * epoch_correct as f64 / n as f64,
        });
    }
    Ok(history)
}
