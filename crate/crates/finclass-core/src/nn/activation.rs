use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Activation functions. `Softmax` normalises over the last axis, so it can
/// serve both as the output layer (rank-1 logits) and, for the activation
/// comparison harness, as a hidden activation applied per spatial position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActivationKind {
    #[default]
    Relu,
    Tanh,
    Sigmoid,
    Softmax,
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Self::Relu),
            "tanh" => Ok(Self::Tanh),
            "sigmoid" => Ok(Self::Sigmoid),
            "softmax" => Ok(Self::Softmax),
            other => Err(Error::InvalidParameter(format!(
                "unknown activation kind '{other}' (expected relu|tanh|sigmoid|softmax)"
            ))),
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Relu => "relu",
            Self::Tanh => "tanh",
            Self::Sigmoid => "sigmoid",
            Self::Softmax => "softmax",
        };
        f.write_str(s)
    }
}

/// Numerically-stable softmax of one vector (max subtraction).
pub fn softmax_slice<S: Scalar>(z: &[S]) -> Vec<S> {
    let max = z.iter().copied().fold(S::neg_infinity(), S::max);
    let exps: Vec<S> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum = exps.iter().copied().fold(S::zero(), |a, b| a + b);
    exps.into_iter().map(|e| e / sum).collect()
}

/// Element-wise activations; softmax normalises each last-axis vector.
pub fn activation_forward<S: Scalar>(kind: ActivationKind, input: &Tensor<S>) -> Result<Tensor<S>> {
    let out = match kind {
        ActivationKind::Relu => input
            .data()
            .iter()
            .map(|&v| if v > S::zero() { v } else { S::zero() })
            .collect(),
        // Standard tanh: (e^x - e^-x) / (e^x + e^-x).
        ActivationKind::Tanh => input.data().iter().map(|&v| v.tanh()).collect(),
        ActivationKind::Sigmoid => input
            .data()
            .iter()
            .map(|&v| S::one() / (S::one() + (-v).exp()))
            .collect(),
        ActivationKind::Softmax => {
            let n = *input.shape().last().ok_or_else(|| {
                Error::InvalidShape("softmax needs at least one axis".into())
            })?;
            if n == 0 {
                return Err(Error::InvalidShape("softmax over an empty axis".into()));
            }
            let mut out = Vec::with_capacity(input.len());
            for chunk in input.data().chunks_exact(n) {
                out.extend(softmax_slice(chunk));
            }
            out
        }
    };
    Tensor::from_vec(input.shape(), out)
}

/// Backward pass given the forward *output* `y` and the upstream gradient.
/// Element-wise kinds use their diagonal Jacobians; softmax applies the full
/// rank-one-update Jacobian per last-axis vector:
/// `dz_i = y_i * (g_i - sum_j g_j y_j)`.
pub fn activation_backward<S: Scalar>(
    kind: ActivationKind,
    output: &Tensor<S>,
    grad_out: &Tensor<S>,
) -> Result<Tensor<S>> {
    if output.shape() != grad_out.shape() {
        return Err(Error::InvalidShape(format!(
            "activation output shape {:?} does not match gradient shape {:?}",
            output.shape(),
            grad_out.shape()
        )));
    }
    let y = output.data();
    let g = grad_out.data();
    let data = match kind {
        ActivationKind::Relu => y
            .iter()
            .zip(g)
            .map(|(&yv, &gv)| if yv > S::zero() { gv } else { S::zero() })
            .collect(),
        ActivationKind::Tanh => y
            .iter()
            .zip(g)
            .map(|(&yv, &gv)| gv * (S::one() - yv * yv))
            .collect(),
        ActivationKind::Sigmoid => y
            .iter()
            .zip(g)
            .map(|(&yv, &gv)| gv * yv * (S::one() - yv))
            .collect(),
        ActivationKind::Softmax => {
            let n = *output.shape().last().unwrap();
            let mut data = Vec::with_capacity(y.len());
            for (ys, gs) in y.chunks_exact(n).zip(g.chunks_exact(n)) {
                let dot = ys
                    .iter()
                    .zip(gs)
                    .fold(S::zero(), |acc, (&yv, &gv)| acc + yv * gv);
                data.extend(ys.iter().zip(gs).map(|(&yv, &gv)| yv * (gv - dot)));
            }
            data
        }
    };
    Tensor::from_vec(output.shape(), data)
}
