use super::image::Image;
use crate::error::{Error, Result};

/// Rec. 601 luma conversion: `round(0.299 R + 0.587 G + 0.114 B)`.
pub fn to_grayscale(img: &Image) -> Result<Image> {
    if img.channels() != 3 {
        return Err(Error::InvalidInput(format!(
            "grayscale conversion expects 3 channels, got {}",
            img.channels()
        )));
    }
    let mut out = Vec::with_capacity(img.width() * img.height());
    for px in img.data().chunks_exact(3) {
        let luma = 0.299f32 * px[0] as f32 + 0.587 * px[1] as f32 + 0.114 * px[2] as f32;
        out.push(luma.round().clamp(0.0, 255.0) as u8);
    }
    Image::new(img.width(), img.height(), 1, out)
}
