//! Dataset ingestion, resizing, four-channel stacking, splitting and the
//! synthetic-data generator.

mod load;
mod resize;
mod split;
mod synth;

pub use load::{load_directory, write_manifest, LoadStats};
pub use resize::resize_bilinear;
pub use split::split;
pub use synth::{render_synthetic, synth_generate, SynthFrame, SHAPE_NAMES};

use crate::error::{Error, Result};
use crate::imgproc::{segment_foreground, Image, PreprocessConfig};
use crate::nn::{Tensor, TensorF};

/// Network input edge length; every sample is `INPUT_SIZE x INPUT_SIZE x 4`.
pub const INPUT_SIZE: usize = 100;

/// One training example: channels 0-2 are RGB / 255, channel 3 is the
/// segmentation mask / 255 (so exactly 0 or 1).
#[derive(Debug, Clone)]
pub struct Sample {
    pub tensor: TensorF,
    pub label: usize,
    pub source: String,
}

/// Samples plus the ordered (lexicographically sorted) class-name table.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// One-hot target vector for a sample.
    pub fn one_hot(&self, label: usize) -> TensorF {
        let mut t = Tensor::zeros(&[self.num_classes()]);
        t.data_mut()[label] = 1.0;
        t
    }
}

/// Resize an RGB image to the network extent, segment it, and stack RGB plus
/// mask into a normalised `[100, 100, 4]` tensor.
pub fn ingest_rgb_image(img: &Image, cfg: &PreprocessConfig) -> Result<TensorF> {
    if img.channels() != 3 {
        return Err(Error::InvalidInput(format!(
            "ingestion expects RGB, got {} channels",
            img.channels()
        )));
    }
    let resized = resize_bilinear(img, INPUT_SIZE, INPUT_SIZE)?;
    let mask = segment_foreground(&resized, cfg)?;
    let mut data = Vec::with_capacity(INPUT_SIZE * INPUT_SIZE * 4);
    for i in 0..INPUT_SIZE * INPUT_SIZE {
        let px = &resized.data()[i * 3..i * 3 + 3];
        data.push(px[0] as f32 / 255.0);
        data.push(px[1] as f32 / 255.0);
        data.push(px[2] as f32 / 255.0);
        data.push(mask.data()[i] as f32 / 255.0);
    }
    Tensor::from_vec(&[INPUT_SIZE, INPUT_SIZE, 4], data)
}
