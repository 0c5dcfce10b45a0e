//! Fish frame classification built from first principles: a classical
//! image-processing front end turns an RGB frame into a sure-foreground mask,
//! and a small convolutional network consumes the RGB channels stacked with
//! that mask as a fourth input plane.
//!
//! The crate is organised as five modules:
//!
//! - [`imgproc`] — grayscale conversion, Gaussian blur, Otsu thresholding,
//!   binary morphology, chamfer distance transforms and pyramid mean-shift
//!   filtering, composed into [`imgproc::segment_foreground`].
//! - [`nn`] — tensors and differentiable layers (convolution, max-pooling,
//!   dense, activations, dropout, softmax cross-entropy) with exact backward
//!   passes, generic over `f32`/`f64`.
//! - [`model`] — the fixed 100×100×4 network architecture, inference and
//!   binary checkpoints.
//! - [`optim`] — Adam, the training loop and evaluation metrics.
//! - [`data`] — dataset ingestion from directory trees, bilinear resizing,
//!   stratified splits and a procedural synthetic-data generator.

pub mod data;
pub mod error;
pub mod imgproc;
pub mod model;
pub mod nn;
pub mod optim;

pub use data::{Dataset, Sample};
pub use error::{Error, Result};
pub use imgproc::{BinaryMask, DistanceMap, Image, PreprocessConfig, StructuringElement};
pub use model::{ArchitectureSpec, Network};
pub use nn::{ActivationKind, Tensor, TensorF};
pub use optim::{Metrics, TrainConfig};
