use super::activation::softmax_slice;
use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Probability clamp applied before taking logarithms.
pub const PROB_EPS: f64 = 1e-12;

/// Cross-entropy variant. `TwoTerm` is the per-class binary sum
/// `-sum_i [t_i ln y_i + (1 - t_i) ln(1 - y_i)]`; `Categorical` is the
/// plain `-sum_i t_i ln y_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossForm {
    #[default]
    TwoTerm,
    Categorical,
}

impl FromStr for LossForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "two_term" | "two-term" | "twoterm" => Ok(Self::TwoTerm),
            "categorical" => Ok(Self::Categorical),
            other => Err(Error::InvalidParameter(format!(
                "unknown loss form '{other}' (expected two_term|categorical)"
            ))),
        }
    }
}

impl fmt::Display for LossForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TwoTerm => "two_term",
            Self::Categorical => "categorical",
        })
    }
}

fn validate<S: Scalar>(logits: &Tensor<S>, target: &Tensor<S>) -> Result<usize> {
    if logits.rank() != 1 || logits.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "logits must be a rank-1 tensor with K >= 2, got shape {:?}",
            logits.shape()
        )));
    }
    if target.shape() != logits.shape() {
        return Err(Error::InvalidInput(format!(
            "target shape {:?} does not match logits shape {:?}",
            target.shape(),
            logits.shape()
        )));
    }
    let mut ones = 0usize;
    for &v in target.data() {
        if v == S::one() {
            ones += 1;
        } else if v != S::zero() {
            return Err(Error::InvalidInput(
                "target must be one-hot (entries 0 or 1)".into(),
            ));
        }
    }
    if ones != 1 {
        return Err(Error::InvalidInput(format!(
            "target must have exactly one 1, found {ones}"
        )));
    }
    Ok(logits.len())
}

fn clamp64(v: f64) -> f64 {
    v.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// Loss value for one sample: softmax over the logits, then the selected
/// cross-entropy form with probabilities clamped to `[eps, 1 - eps]`.
///
/// The internal arithmetic runs in `f64` regardless of the tensor precision:
/// in `f32` the upper clamp `1 - 1e-12` rounds to exactly 1, so a saturated
/// wrong-class probability would divide by zero in the two-term form.
pub fn softmax_cross_entropy_loss<S: Scalar>(
    logits: &Tensor<S>,
    target: &Tensor<S>,
    form: LossForm,
) -> Result<S> {
    validate(logits, target)?;
    let z: Vec<f64> = logits.data().iter().map(|v| v.as_f64()).collect();
    let y = softmax_slice(&z);
    let mut loss = 0.0f64;
    for (t, &yv) in target.data().iter().zip(&y) {
        let t = t.as_f64();
        let p = clamp64(yv);
        match form {
            LossForm::TwoTerm => {
                loss -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
            }
            LossForm::Categorical => {
                loss -= t * p.ln();
            }
        }
    }
    Ok(S::from_f64(loss))
}

/// Exact gradient of the loss with respect to the logits, chained through
/// the softmax Jacobian. The clamp is treated as the identity away from the
/// saturation points; at saturation it bounds the gradient magnitude by
/// `1 / eps`, which is what keeps training finite when a class saturates.
pub fn softmax_cross_entropy_grad<S: Scalar>(
    logits: &Tensor<S>,
    target: &Tensor<S>,
    form: LossForm,
) -> Result<Tensor<S>> {
    let k = validate(logits, target)?;
    let z: Vec<f64> = logits.data().iter().map(|v| v.as_f64()).collect();
    let y = softmax_slice(&z);
    let t: Vec<f64> = target.data().iter().map(|v| v.as_f64()).collect();

    let grad: Vec<f64> = match form {
        LossForm::Categorical => {
            // dL/dz simplifies to y - t for one-hot targets.
            (0..k).map(|i| y[i] - t[i]).collect()
        }
        LossForm::TwoTerm => {
            // dL/dy_i = -t_i / y_i + (1 - t_i) / (1 - y_i), then the softmax
            // Jacobian: dL/dz_i = y_i (dL/dy_i - sum_j dL/dy_j y_j).
            let dy: Vec<f64> = (0..k)
                .map(|i| {
                    let p = clamp64(y[i]);
                    -t[i] / p + (1.0 - t[i]) / (1.0 - p)
                })
                .collect();
            let dot: f64 = dy.iter().zip(&y).map(|(&d, &yv)| d * yv).sum();
            (0..k).map(|i| y[i] * (dy[i] - dot)).collect()
        }
    };
    Tensor::from_vec(&[k], grad.into_iter().map(S::from_f64).collect())
}
