use super::image::Image;
use crate::error::{Error, Result};

/// Separable Gaussian blur with edge replication at the borders. The 1-D
/// kernel is normalised to sum 1 before use, so constant images pass through
/// unchanged.
pub fn gaussian_blur(img: &Image, sigma: f32, ksize: usize) -> Result<Image> {
    if img.channels() != 1 {
        return Err(Error::InvalidInput(format!(
            "blur expects a single-channel image, got {} channels",
            img.channels()
        )));
    }
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if ksize == 0 || ksize % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "kernel size must be odd, got {ksize}"
        )));
    }

    let kernel = gaussian_kernel(sigma, ksize);
    let radius = (ksize / 2) as isize;
    let (w, h) = (img.width(), img.height());

    // Horizontal pass into a float buffer, vertical pass back to u8.
    let src = img.data();
    let mut tmp = vec![0.0f32; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0f32;
            for (k, &kv) in kernel.iter().enumerate() {
                let sx = (x as isize + k as isize - radius).clamp(0, w as isize - 1) as usize;
                acc += kv * row[sx] as f32;
            }
            tmp[y * w + x] = acc;
        }
    }

    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f32;
            for (k, &kv) in kernel.iter().enumerate() {
                let sy = (y as isize + k as isize - radius).clamp(0, h as isize - 1) as usize;
                acc += kv * tmp[sy * w + x];
            }
            out[y * w + x] = acc.round().clamp(0.0, 255.0) as u8;
        }
    }
    Image::new(w, h, 1, out)
}

fn gaussian_kernel(sigma: f32, ksize: usize) -> Vec<f32> {
    let radius = (ksize / 2) as isize;
    let mut kernel: Vec<f32> = (-radius..=radius)
        .map(|d| (-(d * d) as f32 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f32 = kernel.iter().sum();
    for v in &mut kernel {
        *v /= sum;
    }
    kernel
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        let img = Image::filled(4, 4, 1, 10);
        assert!(gaussian_blur(&img, 0.0, 3).is_err());
        assert!(gaussian_blur(&img, -1.0, 3).is_err());
        assert!(gaussian_blur(&img, 1.0, 4).is_err());
    }

    #[test]
    fn constant_image_is_preserved() {
        let img = Image::filled(9, 7, 1, 7);
        for sigma in [0.5, 1.0, 3.0] {
            let out = gaussian_blur(&img, sigma, 5).unwrap();
            assert!(out.data().iter().all(|&v| v == 7), "sigma {sigma}");
        }
    }

    #[test]
    fn impulse_response_matches_direct_kernel_evaluation() {
        // Independent oracle: evaluate exp(-(dx^2+dy^2)/(2 sigma^2)) on the
        // 3x3 grid, normalise, scale by 255 and round.
        let sigma = 1.0f64;
        let mut weights = [[0.0f64; 3]; 3];
        let mut sum = 0.0;
        for dy in -1i32..=1 {
            for dx in -1i32..=1 {
                let v = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                weights[(dy + 1) as usize][(dx + 1) as usize] = v;
                sum += v;
            }
        }
        // Spot-check the normalised weights the contract quotes.
        assert!((weights[0][0] / sum - 0.0751).abs() < 5e-4);
        assert!((weights[0][1] / sum - 0.1238).abs() < 5e-4);
        assert!((weights[1][1] / sum - 0.2042).abs() < 5e-4);

        let mut img = Image::filled(7, 7, 1, 0);
        img.pixel_mut(3, 3)[0] = 255;
        let out = gaussian_blur(&img, 1.0, 3).unwrap();
        for dy in -1i32..=1 {
            for dx in -1i32..=1 {
                let expected =
                    (weights[(dy + 1) as usize][(dx + 1) as usize] / sum * 255.0).round() as u8;
                let got = out.pixel((3 + dx) as usize, (3 + dy) as usize)[0];
                assert_eq!(got, expected, "offset ({dx},{dy})");
            }
        }
        // Outside the kernel footprint nothing is touched.
        assert_eq!(out.pixel(0, 0)[0], 0);
        assert_eq!(out.pixel(5, 3)[0], 0);
    }

    #[test]
    fn horizontally_symmetric_input_stays_symmetric() {
        let mut img = Image::filled(8, 5, 1, 0);
        for y in 0..5 {
            for x in 0..8 {
                let v = ((x.min(7 - x) * 40 + y * 13) % 256) as u8;
                img.pixel_mut(x, y)[0] = v;
            }
        }
        let out = gaussian_blur(&img, 1.2, 5).unwrap();
        for y in 0..5 {
            for x in 0..8 {
                assert_eq!(out.pixel(x, y)[0], out.pixel(7 - x, y)[0]);
            }
        }
    }
}
