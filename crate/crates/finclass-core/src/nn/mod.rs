//! Tensors and differentiable layers with exact backward passes.
//!
//! Every kernel is generic over [`Scalar`] so the same code path that trains
//! in `f32` can be checked against central finite differences in `f64`.

mod activation;
mod conv;
mod dense;
mod dropout;
mod loss;
mod pool;
mod tensor;

pub use activation::{activation_backward, activation_forward, softmax_slice, ActivationKind};
pub use conv::{conv2d_backward, conv2d_forward, ConvGrads, ConvParams, Padding};
pub use dense::{dense_backward, dense_forward, DenseGrads};
pub use dropout::{dropout_backward, dropout_forward, dropout_mask, DropoutState};
pub use loss::{softmax_cross_entropy_grad, softmax_cross_entropy_loss, LossForm, PROB_EPS};
pub use pool::{maxpool_backward, maxpool_forward, PoolParams};
pub use tensor::{Scalar, Tensor, TensorF};
