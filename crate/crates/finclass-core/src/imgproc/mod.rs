//! Classical image operations that turn an RGB frame into the sure-foreground
//! mask used as the network's fourth input channel.
//!
//! The full chain, [`segment_foreground`], composes:
//! pyramid mean-shift denoising, grayscale conversion, Gaussian blur, Otsu
//! binarisation, morphological opening, a distance transform thresholded at a
//! fraction of its maximum (the sure-foreground marker), and the dilated
//! sure-background / unknown-band diagnostics.

mod blur;
mod color;
mod distance;
mod image;
mod io;
mod meanshift;
mod morphology;
mod otsu;

pub use blur::gaussian_blur;
pub use color::to_grayscale;
pub use distance::{distance_transform, mask_subtract, threshold_fraction, DistanceMetric};
pub use image::{BinaryMask, DistanceMap, Image, StructuringElement};
pub use io::{read_image, write_pgm, write_png, write_ppm};
pub use meanshift::{mean_shift_filter, pyramid_mean_shift, MeanShiftParams};
pub use morphology::{dilate, erode, morphological_open};
pub use otsu::otsu_threshold;

use crate::error::Result;

/// Tunable knobs of the preprocessing chain. Defaults follow the reference
/// pipeline: 3x3 kernel, two opening iterations, three dilation iterations,
/// 0.7 distance fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    pub blur_sigma: f32,
    pub blur_ksize: usize,
    pub kernel_size: usize,
    pub open_iterations: usize,
    pub dilate_iterations: usize,
    pub dist_metric: DistanceMetric,
    pub dist_fraction: f32,
    pub mean_shift: MeanShiftParams,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            blur_sigma: 1.0,
            blur_ksize: 3,
            kernel_size: 3,
            open_iterations: 2,
            dilate_iterations: 3,
            dist_metric: DistanceMetric::L1,
            dist_fraction: 0.7,
            mean_shift: MeanShiftParams::default(),
        }
    }
}

/// Every intermediate the segmentation chain produces, for diagnostics.
#[derive(Debug, Clone)]
pub struct SegmentationStages {
    pub mean_shifted: Image,
    pub grayscale: Image,
    pub blurred: Image,
    pub otsu_threshold: u8,
    pub binarized: BinaryMask,
    pub opened: BinaryMask,
    pub sure_background: BinaryMask,
    pub distance: DistanceMap,
    pub sure_foreground: BinaryMask,
    pub unknown: BinaryMask,
}

/// Run the full preprocessing chain and keep every stage.
pub fn segment_stages(img: &Image, cfg: &PreprocessConfig) -> Result<SegmentationStages> {
    let se = StructuringElement::square(cfg.kernel_size)?;
    let mean_shifted = pyramid_mean_shift(img, &cfg.mean_shift)?;
    let grayscale = to_grayscale(&mean_shifted)?;
    let blurred = gaussian_blur(&grayscale, cfg.blur_sigma, cfg.blur_ksize)?;
    let (otsu_t, binarized) = otsu_threshold(&blurred)?;
    let opened = morphological_open(&binarized, se, cfg.open_iterations)?;
    let sure_background = dilate(&opened, se, cfg.dilate_iterations)?;
    let distance = distance_transform(&opened, cfg.dist_metric)?;
    let sure_foreground = threshold_fraction(&distance, cfg.dist_fraction)?;
    let unknown = mask_subtract(&sure_background, &sure_foreground)?;
    Ok(SegmentationStages {
        mean_shifted,
        grayscale,
        blurred,
        otsu_threshold: otsu_t,
        binarized,
        opened,
        sure_background,
        distance,
        sure_foreground,
        unknown,
    })
}

/// The mask stacked as the fourth network channel: the sure-foreground
/// marker of the segmentation chain.
pub fn segment_foreground(img: &Image, cfg: &PreprocessConfig) -> Result<BinaryMask> {
    Ok(segment_stages(img, cfg)?.sure_foreground)
}
