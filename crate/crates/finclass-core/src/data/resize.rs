use crate::error::{Error, Result};
use crate::imgproc::Image;

/// Bilinear resize with half-pixel-centre source mapping:
/// `src = (dst + 0.5) * scale - 0.5`, clamped to the source extent.
/// Channels are interpolated independently; results round to u8.
pub fn resize_bilinear(img: &Image, out_w: usize, out_h: usize) -> Result<Image> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidParameter(format!(
            "target dimensions must be >= 1, got {out_w}x{out_h}"
        )));
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    if w == out_w && h == out_h {
        return Ok(img.clone());
    }
    let scale_x = w as f32 / out_w as f32;
    let scale_y = h as f32 / out_h as f32;

    let mut out = vec![0u8; out_w * out_h * ch];
    for y in 0..out_h {
        let sy = ((y as f32 + 0.5) * scale_y - 0.5).clamp(0.0, (h - 1) as f32);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let fy = sy - y0 as f32;
        for x in 0..out_w {
            let sx = ((x as f32 + 0.5) * scale_x - 0.5).clamp(0.0, (w - 1) as f32);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let fx = sx - x0 as f32;

            let p00 = img.pixel(x0, y0);
            let p10 = img.pixel(x1, y0);
            let p01 = img.pixel(x0, y1);
            let p11 = img.pixel(x1, y1);
            let dst = (y * out_w + x) * ch;
            for c in 0..ch {
                let top = p00[c] as f32 * (1.0 - fx) + p10[c] as f32 * fx;
                let bottom = p01[c] as f32 * (1.0 - fx) + p11[c] as f32 * fx;
                let v = top * (1.0 - fy) + bottom * fy;
                out[dst + c] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    Image::new(out_w, out_h, ch, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_resize_returns_equal_image() {
        let img = Image::new(3, 2, 3, (0..18).map(|v| v as u8 * 9).collect()).unwrap();
        assert_eq!(resize_bilinear(&img, 3, 2).unwrap(), img);
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = Image::filled(7, 5, 1, 93);
        for (w, h) in [(3, 3), (14, 10), (1, 1), (20, 2)] {
            let out = resize_bilinear(&img, w, h).unwrap();
            assert!(out.data().iter().all(|&v| v == 93), "{w}x{h}");
        }
    }

    #[test]
    fn two_by_two_average() {
        // Half-pixel mapping puts the single output pixel at src (0.5, 0.5):
        // all four corners weigh 0.25, so the value is round(12/4) = 3.
        let img = Image::new(2, 2, 1, vec![0, 2, 4, 6]).unwrap();
        let out = resize_bilinear(&img, 1, 1).unwrap();
        assert_eq!(out.data(), &[3]);
    }

    #[test]
    fn zero_target_rejected() {
        let img = Image::filled(2, 2, 1, 0);
        assert!(resize_bilinear(&img, 0, 2).is_err());
        assert!(resize_bilinear(&img, 2, 0).is_err());
    }
}
