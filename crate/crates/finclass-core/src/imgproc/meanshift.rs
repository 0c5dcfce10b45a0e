use super::image::Image;
use crate::error::{Error, Result};

/// Flat-kernel mean-shift parameters. The window around a point `(x, c)` is
/// `{(x', c') : |x' - x|_inf <= spatial_radius, |c' - c|_inf <= color_radius}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanShiftParams {
    pub spatial_radius: f32,
    pub color_radius: f32,
    pub max_pyramid_level: usize,
    pub max_iterations: usize,
    pub convergence_epsilon: f32,
}

impl Default for MeanShiftParams {
    fn default() -> Self {
        Self {
            spatial_radius: 10.0,
            color_radius: 30.0,
            max_pyramid_level: 1,
            max_iterations: 5,
            convergence_epsilon: 1.0,
        }
    }
}

impl MeanShiftParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.spatial_radius > 0.0) || !(self.color_radius > 0.0) {
            return Err(Error::InvalidParameter(
                "mean-shift radii must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "mean-shift max_iterations must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Mean-shift color filtering over a Gaussian pyramid.
///
/// The image is downscaled `max_pyramid_level` times (factor 2 per level,
/// 5-tap binomial smoothing). The coarsest level is filtered with plain
/// per-pixel mean shift; results then propagate down the pyramid, where a
/// pixel accepts the upsampled color when it lies within `color_radius`
/// (per channel) of the pixel's own color, and is re-filtered at the finer
/// level otherwise.
pub fn pyramid_mean_shift(img: &Image, params: &MeanShiftParams) -> Result<Image> {
    if img.channels() != 3 {
        return Err(Error::InvalidInput(format!(
            "mean shift expects an RGB image, got {} channels",
            img.channels()
        )));
    }
    params.validate()?;
    if img.width() == 0 || img.height() == 0 {
        return Ok(img.clone());
    }

    // Build the pyramid; stop early once a dimension cannot halve.
    let mut pyramid = vec![img.clone()];
    for _ in 0..params.max_pyramid_level {
        let top = pyramid.last().unwrap();
        if top.width() < 2 || top.height() < 2 {
            break;
        }
        pyramid.push(pyr_down(top));
    }

    let mut filtered = mean_shift_filter(pyramid.last().unwrap(), params)?;
    for level in (0..pyramid.len() - 1).rev() {
        let original = &pyramid[level];
        let mut out = Image::filled(original.width(), original.height(), 3, 0);
        for y in 0..original.height() {
            let sy = (y / 2).min(filtered.height() - 1);
            for x in 0..original.width() {
                let sx = (x / 2).min(filtered.width() - 1);
                let up = filtered.pixel(sx, sy);
                let own = original.pixel(x, y);
                let close = (0..3)
                    .all(|c| (own[c] as f32 - up[c] as f32).abs() <= params.color_radius);
                let result = if close {
                    [up[0], up[1], up[2]]
                } else {
                    converge_pixel(original, x, y, params)
                };
                out.pixel_mut(x, y).copy_from_slice(&result);
            }
        }
        filtered = out;
    }
    Ok(filtered)
}

/// Plain (single-level) mean-shift filtering: every pixel is iterated to its
/// converged window-mean color.
pub fn mean_shift_filter(img: &Image, params: &MeanShiftParams) -> Result<Image> {
    if img.channels() != 3 {
        return Err(Error::InvalidInput(format!(
            "mean shift expects an RGB image, got {} channels",
            img.channels()
        )));
    }
    params.validate()?;
    let mut out = Image::filled(img.width(), img.height(), 3, 0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let c = converge_pixel(img, x, y, params);
            out.pixel_mut(x, y).copy_from_slice(&c);
        }
    }
    Ok(out)
}

/// One pixel's mean-shift trajectory. Movement is the L-inf norm over the
/// joint (position, color) update; iteration stops when it drops below
/// `convergence_epsilon` or after `max_iterations`.
fn converge_pixel(img: &Image, x: usize, y: usize, params: &MeanShiftParams) -> [u8; 3] {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let sr = params.spatial_radius;
    let cr = params.color_radius;

    let mut cx = x as f32;
    let mut cy = y as f32;
    let start = img.pixel(x, y);
    let mut color = [start[0] as f32, start[1] as f32, start[2] as f32];

    for _ in 0..params.max_iterations {
        let x0 = ((cx - sr).ceil() as isize).max(0);
        let x1 = ((cx + sr).floor() as isize).min(w - 1);
        let y0 = ((cy - sr).ceil() as isize).max(0);
        let y1 = ((cy + sr).floor() as isize).min(h - 1);

        let mut count = 0u32;
        let mut sx = 0.0f32;
        let mut sy = 0.0f32;
        let mut sc = [0.0f32; 3];
        for iy in y0..=y1 {
            let row = &img.data()[(iy as usize * img.width()) * 3..];
            for ix in x0..=x1 {
                let px = &row[ix as usize * 3..ix as usize * 3 + 3];
                let d0 = px[0] as f32 - color[0];
                let d1 = px[1] as f32 - color[1];
                let d2 = px[2] as f32 - color[2];
                if d0.abs() <= cr && d1.abs() <= cr && d2.abs() <= cr {
                    count += 1;
                    sx += ix as f32;
                    sy += iy as f32;
                    sc[0] += px[0] as f32;
                    sc[1] += px[1] as f32;
                    sc[2] += px[2] as f32;
                }
            }
        }
        if count == 0 {
            break;
        }
        let n = count as f32;
        let nx = sx / n;
        let ny = sy / n;
        let nc = [sc[0] / n, sc[1] / n, sc[2] / n];
        let movement = (nx - cx)
            .abs()
            .max((ny - cy).abs())
            .max((nc[0] - color[0]).abs())
            .max((nc[1] - color[1]).abs())
            .max((nc[2] - color[2]).abs());
        cx = nx;
        cy = ny;
        color = nc;
        if movement < params.convergence_epsilon {
            break;
        }
    }
    [
        color[0].round().clamp(0.0, 255.0) as u8,
        color[1].round().clamp(0.0, 255.0) as u8,
        color[2].round().clamp(0.0, 255.0) as u8,
    ]
}

/// Halve the image: 5-tap binomial smoothing (edge replication) followed by
/// even-index subsampling. Output extent is ceil(n / 2).
fn pyr_down(img: &Image) -> Image {
    const K: [f32; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
    let (w, h) = (img.width(), img.height());
    let ch = img.channels();

    let mut tmp = vec![0.0f32; w * h * ch];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, &kv) in K.iter().enumerate() {
                    let sx = (x as isize + k as isize - 2).clamp(0, w as isize - 1) as usize;
                    acc += kv * img.pixel(sx, y)[c] as f32;
                }
                tmp[(y * w + x) * ch + c] = acc;
            }
        }
    }

    let (ow, oh) = (w.div_ceil(2), h.div_ceil(2));
    let mut out = vec![0u8; ow * oh * ch];
    for y in 0..oh {
        for x in 0..ow {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, &kv) in K.iter().enumerate() {
                    let sy = (2 * y as isize + k as isize - 2).clamp(0, h as isize - 1) as usize;
                    acc += kv * tmp[(sy * w + 2 * x) * ch + c];
                }
                out[(y * ow + x) * ch + c] = acc.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    Image::new(ow, oh, ch, out).expect("consistent pyramid dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        let img = Image::filled(4, 4, 3, 10);
        let mut p = MeanShiftParams::default();
        p.spatial_radius = 0.0;
        assert!(pyramid_mean_shift(&img, &p).is_err());
        p = MeanShiftParams::default();
        p.max_iterations = 0;
        assert!(pyramid_mean_shift(&img, &p).is_err());
    }

    #[test]
    fn constant_image_is_exact_fixed_point() {
        let img = Image::filled(12, 9, 3, 137);
        let params = MeanShiftParams::default();
        assert_eq!(pyramid_mean_shift(&img, &params).unwrap(), img);
        assert_eq!(mean_shift_filter(&img, &params).unwrap(), img);
    }

    #[test]
    fn separated_half_planes_are_untouched() {
        // 6x6, left half black, right half white; windows never mix the two
        // populations at color_radius 30.
        let mut img = Image::filled(6, 6, 3, 0);
        for y in 0..6 {
            for x in 3..6 {
                img.pixel_mut(x, y).copy_from_slice(&[255, 255, 255]);
            }
        }
        let params = MeanShiftParams {
            max_pyramid_level: 0,
            ..MeanShiftParams::default()
        };
        assert_eq!(pyramid_mean_shift(&img, &params).unwrap(), img);
    }

    #[test]
    fn level_zero_equals_plain_filter() {
        let mut img = Image::filled(10, 8, 3, 0);
        let mut state = 7u64;
        for v in img.data_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            *v = (state >> 33) as u8;
        }
        let params = MeanShiftParams {
            max_pyramid_level: 0,
            ..MeanShiftParams::default()
        };
        let a = pyramid_mean_shift(&img, &params).unwrap();
        let b = mean_shift_filter(&img, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn output_colors_stay_near_their_sources() {
        // Each iteration replaces the color with a mean of colors within
        // color_radius of it, so the total per-channel drift is bounded by
        // iterations * color_radius, and every output channel stays inside
        // the min/max envelope of the pixel's reachable neighbourhood.
        let mut img = Image::filled(16, 16, 3, 0);
        let mut state = 42u64;
        for v in img.data_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *v = (state >> 40) as u8;
        }
        let params = MeanShiftParams {
            spatial_radius: 3.0,
            color_radius: 25.0,
            max_pyramid_level: 0,
            max_iterations: 5,
            convergence_epsilon: 1.0,
        };
        let out = mean_shift_filter(&img, &params).unwrap();
        let reach = (params.spatial_radius * (params.max_iterations as f32 + 1.0)) as isize;
        let drift = params.color_radius * params.max_iterations as f32 + 0.5;
        for y in 0..16isize {
            for x in 0..16isize {
                let o = out.pixel(x as usize, y as usize);
                let i = img.pixel(x as usize, y as usize);
                for c in 0..3 {
                    assert!((o[c] as f32 - i[c] as f32).abs() <= drift);
                }
                // Envelope of all colors reachable by the trajectory.
                let mut lo = [255u8; 3];
                let mut hi = [0u8; 3];
                for ny in (y - reach).max(0)..=(y + reach).min(15) {
                    for nx in (x - reach).max(0)..=(x + reach).min(15) {
                        let p = img.pixel(nx as usize, ny as usize);
                        for c in 0..3 {
                            lo[c] = lo[c].min(p[c]);
                            hi[c] = hi[c].max(p[c]);
                        }
                    }
                }
                for c in 0..3 {
                    assert!(o[c] >= lo[c] && o[c] <= hi[c]);
                }
            }
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let mut img = Image::filled(20, 14, 3, 0);
        let mut state = 5u64;
        for v in img.data_mut() {
            state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            *v = (state >> 35) as u8;
        }
        let params = MeanShiftParams::default();
        let a = pyramid_mean_shift(&img, &params).unwrap();
        let b = pyramid_mean_shift(&img, &params).unwrap();
        assert_eq!(a, b);
    }
}
