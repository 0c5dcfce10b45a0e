use super::image::{BinaryMask, Image};
use crate::error::{Error, Result};

/// Otsu's method: picks the threshold `t` maximising the between-class
/// variance `w0(t) * w1(t) * (mu0(t) - mu1(t))^2` where class 0 holds pixels
/// `<= t` and class 1 pixels `> t`. Ties resolve to the smallest `t`; a
/// constant image returns its own value (all candidates score zero there),
/// which keeps the strict-greater binarisation all black.
///
/// Mask rule: a pixel is foreground (255) iff its value is strictly greater
/// than the threshold.
pub fn otsu_threshold(img: &Image) -> Result<(u8, BinaryMask)> {
    if img.channels() != 1 {
        return Err(Error::InvalidInput(format!(
            "otsu expects a single-channel image, got {} channels",
            img.channels()
        )));
    }
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::InvalidInput("otsu on zero-area image".into()));
    }

    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }

    let threshold = otsu_from_histogram(&hist);
    let mask: Vec<u8> = img
        .data()
        .iter()
        .map(|&v| if v > threshold { 255 } else { 0 })
        .collect();
    Ok((threshold, BinaryMask::new(img.width(), img.height(), mask)?))
}

fn otsu_from_histogram(hist: &[u64; 256]) -> u8 {
    let nonzero: Vec<usize> = (0..256).filter(|&i| hist[i] > 0).collect();
    if nonzero.len() == 1 {
        return nonzero[0] as u8;
    }

    let total: u64 = hist.iter().sum();
    let total_sum: u64 = hist.iter().enumerate().map(|(i, &h)| i as u64 * h).sum();

    let mut best_t = 0u8;
    let mut best_var = f64::NEG_INFINITY;
    let mut w0 = 0u64;
    let mut s0 = 0u64;
    for t in 0..256usize {
        w0 += hist[t];
        s0 += t as u64 * hist[t];
        let w1 = total - w0;
        let var = if w0 == 0 || w1 == 0 {
            0.0
        } else {
            let mu0 = s0 as f64 / w0 as f64;
            let mu1 = (total_sum - s0) as f64 / w1 as f64;
            let d = mu0 - mu1;
            (w0 as f64 / total as f64) * (w1 as f64 / total as f64) * d * d
        };
        if var > best_var {
            best_var = var;
            best_t = t as u8;
        }
    }
    best_t
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force oracle: recompute both class populations from scratch for
    /// every candidate threshold.
    fn otsu_brute_force(pixels: &[u8]) -> u8 {
        let mut best_t = 0u8;
        let mut best_var = f64::NEG_INFINITY;
        for t in 0..=255u8 {
            let low: Vec<f64> = pixels.iter().filter(|&&p| p <= t).map(|&p| p as f64).collect();
            let high: Vec<f64> = pixels.iter().filter(|&&p| p > t).map(|&p| p as f64).collect();
            let var = if low.is_empty() || high.is_empty() {
                0.0
            } else {
                let n = pixels.len() as f64;
                let w0 = low.len() as f64 / n;
                let w1 = high.len() as f64 / n;
                let mu0 = low.iter().sum::<f64>() / low.len() as f64;
                let mu1 = high.iter().sum::<f64>() / high.len() as f64;
                w0 * w1 * (mu0 - mu1) * (mu0 - mu1)
            };
            if var > best_var {
                best_var = var;
                best_t = t;
            }
        }
        best_t
    }

    #[test]
    fn bimodal_half_and_half() {
        // All t in [50, 199] tie; the smallest maximiser wins.
        let mut data = vec![50u8; 32];
        data.extend(vec![200u8; 32]);
        let img = Image::new(8, 8, 1, data).unwrap();
        let (t, mask) = otsu_threshold(&img).unwrap();
        assert_eq!(t, 50);
        assert_eq!(t, otsu_brute_force(img.data()));
        for (i, &m) in mask.data().iter().enumerate() {
            assert_eq!(m, if img.data()[i] == 200 { 255 } else { 0 });
        }
    }

    #[test]
    fn constant_image_returns_its_value_all_black() {
        for c in [0u8, 7, 255] {
            let img = Image::filled(5, 3, 1, c);
            let (t, mask) = otsu_threshold(&img).unwrap();
            assert_eq!(t, c);
            assert!(mask.data().iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn four_pixel_extremes() {
        let img = Image::new(4, 1, 1, vec![0, 0, 255, 255]).unwrap();
        let (t, mask) = otsu_threshold(&img).unwrap();
        assert_eq!(t, otsu_brute_force(img.data()));
        assert_eq!(t, 0);
        assert_eq!(mask.data(), &[0, 0, 255, 255]);
    }

    #[test]
    fn zero_area_image_is_rejected() {
        let img = Image::new(0, 0, 1, vec![]).unwrap();
        assert!(otsu_threshold(&img).is_err());
    }

    #[test]
    fn matches_brute_force_on_random_images() {
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for case in 0..40 {
            let data: Vec<u8> = (0..24 * 24)
                .map(|_| {
                    // Alternate flat-random and bimodal-ish histograms.
                    let r = next();
                    if case % 2 == 0 {
                        (r % 256) as u8
                    } else if r % 2 == 0 {
                        40 + (r >> 8) as u8 % 30
                    } else {
                        170 + (r >> 8) as u8 % 60
                    }
                })
                .collect();
            let img = Image::new(24, 24, 1, data).unwrap();
            let (t, _) = otsu_threshold(&img).unwrap();
            assert_eq!(t, otsu_brute_force(img.data()), "case {case}");
        }
    }
}
