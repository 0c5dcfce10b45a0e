use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Inverted-dropout state. The keep mask for a forward call is a pure
/// function of `(rng_seed, step_counter)`, so replaying a training run
/// reproduces every mask bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropoutState {
    pub keep_prob: f32,
    pub rng_seed: u64,
    pub step_counter: u64,
}

impl DropoutState {
    pub fn new(keep_prob: f32, rng_seed: u64) -> Result<Self> {
        if !(keep_prob > 0.0 && keep_prob <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "keep probability must be in (0, 1], got {keep_prob}"
            )));
        }
        Ok(Self {
            keep_prob,
            rng_seed,
            step_counter: 0,
        })
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// The deterministic keep mask for one forward call.
pub fn dropout_mask(len: usize, keep_prob: f32, rng_seed: u64, step_counter: u64) -> Vec<bool> {
    let stream = splitmix64(rng_seed ^ splitmix64(step_counter));
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    (0..len).map(|_| rng.random::<f32>() < keep_prob).collect()
}

/// Training mode keeps each element with probability `keep_prob` and scales
/// it by `1 / keep_prob`; inference is the identity. Returns the mask used
/// (empty in inference mode) for the backward pass.
pub fn dropout_forward<S: Scalar>(
    input: &Tensor<S>,
    state: &DropoutState,
    training: bool,
) -> (Tensor<S>, Vec<bool>) {
    if !training || state.keep_prob >= 1.0 {
        return (input.clone(), Vec::new());
    }
    let mask = dropout_mask(input.len(), state.keep_prob, state.rng_seed, state.step_counter);
    let scale = S::from_f64(1.0 / state.keep_prob as f64);
    let data = input
        .data()
        .iter()
        .zip(&mask)
        .map(|(&v, &keep)| if keep { v * scale } else { S::zero() })
        .collect();
    (
        Tensor::from_vec(input.shape(), data).expect("dropout preserves shape"),
        mask,
    )
}

/// Apply the same mask and scale to the upstream gradient. An empty mask
/// (inference or full keep) passes the gradient through.
pub fn dropout_backward<S: Scalar>(
    grad_out: &Tensor<S>,
    mask: &[bool],
    keep_prob: f32,
) -> Tensor<S> {
    if mask.is_empty() {
        return grad_out.clone();
    }
    let scale = S::from_f64(1.0 / keep_prob as f64);
    let data = grad_out
        .data()
        .iter()
        .zip(mask)
        .map(|(&g, &keep)| if keep { g * scale } else { S::zero() })
        .collect();
    Tensor::from_vec(grad_out.shape(), data).expect("dropout preserves shape")
}
