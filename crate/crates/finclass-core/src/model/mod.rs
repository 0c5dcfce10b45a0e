//! The classifier network: architecture assembly, inference and checkpoints.

mod arch;
mod checkpoint;

pub use arch::{ArchitectureSpec, LayerSpec, DEFAULT_HIDDEN_WIDTH, DEFAULT_KEEP_PROB};
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};

use crate::error::{Error, Result};
use crate::nn::{
    activation_backward, activation_forward, conv2d_backward, conv2d_forward, dense_backward,
    dense_forward, dropout_backward, dropout_forward, maxpool_backward, maxpool_forward,
    softmax_slice, ActivationKind, ConvParams, DropoutState, PoolParams, Tensor, TensorF,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Layer {
    Conv(ConvParams<f32>),
    Activation(ActivationKind),
    MaxPool(PoolParams),
    Flatten,
    Dense { weights: TensorF, bias: TensorF },
    Dropout(DropoutState),
    SoftmaxOutput,
}

/// A built network: the architecture plus its parameter tensors.
pub struct Network {
    arch: ArchitectureSpec,
    layers: Vec<Layer>,
}

impl std::fmt::Debug for Network {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Network")
            .field("classes", &self.arch.num_classes)
            .field("activation", &self.arch.hidden_activation)
            .field("parameters", &self.parameter_count())
            .finish()
    }
}

/// Everything the backward pass needs from one training-mode forward pass.
pub struct ForwardCache {
    /// Input to every layer, in layer order.
    inputs: Vec<TensorF>,
    /// Output of every layer (shared references would do; clones keep it simple).
    outputs: Vec<TensorF>,
    /// Pool argmax tables, keyed by layer index.
    argmax: Vec<(usize, Vec<u32>)>,
    /// Dropout keep masks, keyed by layer index.
    masks: Vec<(usize, Vec<bool>)>,
    /// Pre-softmax activations of the final dense layer.
    pub logits: TensorF,
}

/// Gradients for every trainable tensor, in [`Network::parameters`] order.
pub struct Gradients(pub Vec<TensorF>);

impl Gradients {
    pub fn zeros_like(network: &Network) -> Self {
        Self(
            network
                .parameters()
                .iter()
                .map(|p| Tensor::zeros(p.shape()))
                .collect(),
        )
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            for (x, y) in a.data_mut().iter_mut().zip(b.data()) {
                *x += *y;
            }
        }
    }

    pub fn scale(&mut self, factor: f32) {
        for g in &mut self.0 {
            for v in g.data_mut() {
                *v *= factor;
            }
        }
    }
}

/// Build the classifier over 100x100x4 inputs (see
/// [`ArchitectureSpec::fishnet`] for the exact stack), seeding the parameter
/// initialisation.
pub fn build_fishnet(num_classes: usize, activation: ActivationKind, seed: u64) -> Result<Network> {
    Network::build(ArchitectureSpec::fishnet(num_classes, activation)?, seed)
}

impl Network {
    /// Materialise parameters for an architecture. Weights draw from a
    /// uniform He-style range `+-sqrt(6 / fan_in)`; biases start at zero.
    pub fn build(arch: ArchitectureSpec, seed: u64) -> Result<Self> {
        arch.shape_trace()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(arch.layers.len());
        for (i, spec) in arch.layers.iter().enumerate() {
            layers.push(match spec {
                LayerSpec::Conv {
                    kernel,
                    in_channels,
                    filters,
                    padding,
                } => {
                    let fan_in = kernel * kernel * in_channels;
                    let limit = (6.0 / fan_in as f32).sqrt();
                    let n = kernel * kernel * in_channels * filters;
                    let data: Vec<f32> = (0..n).map(|_| rng.random_range(-limit..limit)).collect();
                    Layer::Conv(ConvParams {
                        filters: Tensor::from_vec(&[*kernel, *kernel, *in_channels, *filters], data)?,
                        bias: Tensor::zeros(&[*filters]),
                        padding: *padding,
                    })
                }
                LayerSpec::Activation(kind) => Layer::Activation(*kind),
                LayerSpec::MaxPool { window, stride } => Layer::MaxPool(PoolParams {
                    window: *window,
                    stride: *stride,
                }),
                LayerSpec::Flatten => Layer::Flatten,
                LayerSpec::Dense { inputs, outputs } => {
                    let limit = (6.0 / *inputs as f32).sqrt();
                    let data: Vec<f32> = (0..inputs * outputs)
                        .map(|_| rng.random_range(-limit..limit))
                        .collect();
                    Layer::Dense {
                        weights: Tensor::from_vec(&[*outputs, *inputs], data)?,
                        bias: Tensor::zeros(&[*outputs]),
                    }
                }
                LayerSpec::Dropout { keep_prob } => {
                    // Mix the layer index into the stream so several dropout
                    // layers would not share masks.
                    Layer::Dropout(DropoutState::new(*keep_prob, seed ^ (i as u64) << 32)?)
                }
                LayerSpec::SoftmaxOutput => Layer::SoftmaxOutput,
            });
        }
        Ok(Self { arch, layers })
    }

    pub fn architecture(&self) -> &ArchitectureSpec {
        &self.arch
    }

    pub fn num_classes(&self) -> usize {
        self.arch.num_classes
    }

    pub fn class_names(&self) -> &[String] {
        &self.arch.class_names
    }

    pub fn set_class_names(&mut self, names: Vec<String>) -> Result<()> {
        if names.len() != self.arch.num_classes {
            return Err(Error::InvalidInput(format!(
                "{} class names for {} classes",
                names.len(),
                self.arch.num_classes
            )));
        }
        self.arch.class_names = names;
        Ok(())
    }

    /// Trainable tensors in a stable order (filters/weights then bias, per
    /// layer). The optimizer mirrors this order.
    pub fn parameters(&self) -> Vec<&TensorF> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv(p) => {
                    out.push(&p.filters);
                    out.push(&p.bias);
                }
                Layer::Dense { weights, bias } => {
                    out.push(weights);
                    out.push(bias);
                }
                _ => {}
            }
        }
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut TensorF> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Conv(p) => {
                    out.push(&mut p.filters);
                    out.push(&mut p.bias);
                }
                Layer::Dense { weights, bias } => {
                    out.push(weights);
                    out.push(bias);
                }
                _ => {}
            }
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|t| t.len()).sum()
    }

    fn check_input(&self, sample: &TensorF) -> Result<()> {
        if sample.shape() != self.arch.input_shape {
            return Err(Error::InvalidShape(format!(
                "input shape {:?} does not match network input {:?}",
                sample.shape(),
                self.arch.input_shape
            )));
        }
        Ok(())
    }

    /// Inference: dropout is an identity, the result is the class index
    /// (smallest index wins ties) plus the probability vector.
    pub fn predict(&self, sample: &TensorF) -> Result<(usize, Vec<f32>)> {
        self.check_input(sample)?;
        let mut current = sample.clone();
        for layer in &self.layers {
            current = match layer {
                Layer::Conv(p) => conv2d_forward(&current, p)?,
                Layer::Activation(kind) => activation_forward(*kind, &current)?,
                Layer::MaxPool(p) => maxpool_forward(&current, p)?.0,
                Layer::Flatten => {
                    let len = current.len();
                    current.reshaped(&[len])?
                }
                Layer::Dense { weights, bias } => dense_forward(&current, weights, bias)?,
                Layer::Dropout(_) => current,
                Layer::SoftmaxOutput => {
                    Tensor::from_vec(current.shape(), softmax_slice(current.data()))?
                }
            };
        }
        let probs = current.into_data();
        let mut best = 0;
        for (i, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = i;
            }
        }
        Ok((best, probs))
    }

    /// Training-mode forward pass. `forward_id` seeds the dropout masks (the
    /// trainer passes a global sample counter).
    pub fn forward_train(&self, sample: &TensorF, forward_id: u64) -> Result<ForwardCache> {
        self.check_input(sample)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut outputs = Vec::with_capacity(self.layers.len());
        let mut argmax = Vec::new();
        let mut masks = Vec::new();
        let mut logits = None;

        let mut current = sample.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            inputs.push(current.clone());
            current = match layer {
                Layer::Conv(p) => conv2d_forward(&current, p)?,
                Layer::Activation(kind) => activation_forward(*kind, &current)?,
                Layer::MaxPool(p) => {
                    let (out, arg) = maxpool_forward(&current, p)?;
                    argmax.push((i, arg));
                    out
                }
                Layer::Flatten => {
                    let len = current.len();
                    current.reshaped(&[len])?
                }
                Layer::Dense { weights, bias } => dense_forward(&current, weights, bias)?,
                Layer::Dropout(state) => {
                    let mut state = *state;
                    state.step_counter = forward_id;
                    let (out, mask) = dropout_forward(&current, &state, true);
                    masks.push((i, mask));
                    out
                }
                Layer::SoftmaxOutput => {
                    logits = Some(current.clone());
                    Tensor::from_vec(current.shape(), softmax_slice(current.data()))?
                }
            };
            outputs.push(current.clone());
        }
        Ok(ForwardCache {
            inputs,
            outputs,
            argmax,
            masks,
            logits: logits.ok_or_else(|| {
                Error::InvalidShape("network has no softmax output layer".into())
            })?,
        })
    }

    /// Backward pass from the loss gradient with respect to the logits
    /// (the softmax output layer is fused into the loss, so it is skipped).
    /// The first convolution's input gradient is never materialised.
    pub fn backward(&self, cache: &ForwardCache, grad_logits: &TensorF) -> Result<Gradients> {
        let mut grads = Vec::new();
        let mut upstream = grad_logits.clone();
        let first_conv = self
            .layers
            .iter()
            .position(|l| matches!(l, Layer::Conv(_)))
            .unwrap_or(0);

        for (i, layer) in self.layers.iter().enumerate().rev() {
            match layer {
                Layer::SoftmaxOutput => {
                    // Fused with the loss: `upstream` is already d loss / d logits.
                }
                Layer::Conv(p) => {
                    let need_input = i != first_conv;
                    let g = conv2d_backward(&cache.inputs[i], p, &upstream, need_input)?;
                    grads.push(g.bias);
                    grads.push(g.filters);
                    upstream = match g.input {
                        Some(gi) => gi,
                        None => break, // reached the first trainable layer
                    };
                }
                Layer::Activation(kind) => {
                    upstream = activation_backward(*kind, &cache.outputs[i], &upstream)?;
                }
                Layer::MaxPool(_) => {
                    let arg = &cache
                        .argmax
                        .iter()
                        .find(|(idx, _)| *idx == i)
                        .expect("argmax recorded for every pool layer")
                        .1;
                    upstream = maxpool_backward(cache.inputs[i].shape(), arg, &upstream)?;
                }
                Layer::Flatten => {
                    upstream = upstream.reshaped(cache.inputs[i].shape())?;
                }
                Layer::Dense { weights, bias } => {
                    let g = dense_backward(&cache.inputs[i], weights, bias, &upstream)?;
                    grads.push(g.bias);
                    grads.push(g.weights);
                    upstream = g.input;
                }
                Layer::Dropout(state) => {
                    let mask = &cache
                        .masks
                        .iter()
                        .find(|(idx, _)| *idx == i)
                        .expect("mask recorded for every dropout layer")
                        .1;
                    upstream = dropout_backward(&upstream, mask, state.keep_prob);
                }
            }
        }
        grads.reverse();
        Ok(Gradients(grads))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_and_count_parameters() {
        let net = build_fishnet(3, ActivationKind::Relu, 7).unwrap();
        assert_eq!(net.parameter_count(), 255_235);
        assert_eq!(net.parameters().len(), 10);
    }

    #[test]
    fn rejects_too_few_classes() {
        assert!(build_fishnet(1, ActivationKind::Relu, 7).is_err());
    }

    #[test]
    fn predict_probabilities_sum_to_one() {
        let net = build_fishnet(3, ActivationKind::Relu, 42).unwrap();
        let sample = Tensor::scalar_filled(&[100, 100, 4], 0.25f32);
        let (_, probs) = net.predict(&sample).unwrap();
        let sum: f32 = probs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-6);
    }

    #[test]
    fn predict_is_pure() {
        let net = build_fishnet(4, ActivationKind::Tanh, 11).unwrap();
        let mut sample = Tensor::zeros(&[100, 100, 4]);
        for (i, v) in sample.data_mut().iter_mut().enumerate() {
            *v = ((i * 2654435761) % 1000) as f32 / 1000.0;
        }
        let (c1, p1) = net.predict(&sample).unwrap();
        let (c2, p2) = net.predict(&sample).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(p1, p2);
    }

    #[test]
    fn fresh_networks_are_never_confident() {
        // Measured over ten seeds and 2..=5 classes: with zero biases the
        // worst class-probability deviation from uniform is 0.35, so an
        // untrained network never comes close to a confident prediction.
        let sample = Tensor::scalar_filled(&[100, 100, 4], 0.5f32);
        for k in 2..=5usize {
            for seed in 0..10 {
                let net = build_fishnet(k, ActivationKind::Relu, seed).unwrap();
                let (_, probs) = net.predict(&sample).unwrap();
                for &p in &probs {
                    assert!(
                        (p - 1.0 / k as f32).abs() < 0.45,
                        "k {k} seed {seed}: probs {probs:?}"
                    );
                    assert!(p < 0.95);
                }
            }
        }
    }

    #[test]
    fn wrong_input_shape_is_rejected() {
        let net = build_fishnet(2, ActivationKind::Relu, 1).unwrap();
        let sample = Tensor::zeros(&[50, 50, 4]);
        assert!(net.predict(&sample).is_err());
    }

    #[test]
    fn training_forward_exposes_logits() {
        let net = build_fishnet(2, ActivationKind::Relu, 5).unwrap();
        let sample = Tensor::scalar_filled(&[100, 100, 4], 0.1f32);
        let cache = net.forward_train(&sample, 0).unwrap();
        assert_eq!(cache.logits.shape(), &[2]);
        // Final output is the softmax of the logits.
        let probs = cache.outputs.last().unwrap();
        let expect = softmax_slice(cache.logits.data());
        assert_eq!(probs.data(), &expect[..]);
    }

    #[test]
    fn backward_produces_gradient_per_parameter() {
        let net = build_fishnet(2, ActivationKind::Relu, 5).unwrap();
        let sample = Tensor::scalar_filled(&[100, 100, 4], 0.3f32);
        let cache = net.forward_train(&sample, 0).unwrap();
        let grad_logits = Tensor::from_vec(&[2], vec![0.5f32, -0.5]).unwrap();
        let grads = net.backward(&cache, &grad_logits).unwrap();
        let params = net.parameters();
        assert_eq!(grads.0.len(), params.len());
        for (g, p) in grads.0.iter().zip(params) {
            assert_eq!(g.shape(), p.shape());
        }
    }
}
