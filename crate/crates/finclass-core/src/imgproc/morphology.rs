use super::image::{BinaryMask, StructuringElement};
use crate::error::{Error, Result};

/// Binary erosion: a pixel stays foreground iff every pixel under the kernel
/// is foreground. Out-of-image neighbours count as background, so foreground
/// touching the border always erodes.
pub fn erode(mask: &BinaryMask, se: StructuringElement, iterations: usize) -> Result<BinaryMask> {
    check_iterations(iterations)?;
    let mut current = mask.clone();
    for _ in 0..iterations {
        current = erode_once(&current, se);
    }
    Ok(current)
}

/// Binary dilation: a pixel becomes foreground iff at least one pixel under
/// the kernel is foreground.
pub fn dilate(mask: &BinaryMask, se: StructuringElement, iterations: usize) -> Result<BinaryMask> {
    check_iterations(iterations)?;
    let mut current = mask.clone();
    for _ in 0..iterations {
        current = dilate_once(&current, se);
    }
    Ok(current)
}

/// Opening: `iterations` erosions followed by the same number of dilations,
/// with the same structuring element.
pub fn morphological_open(
    mask: &BinaryMask,
    se: StructuringElement,
    iterations: usize,
) -> Result<BinaryMask> {
    let eroded = erode(mask, se, iterations)?;
    dilate(&eroded, se, iterations)
}

fn check_iterations(iterations: usize) -> Result<()> {
    if iterations == 0 {
        return Err(Error::InvalidParameter(
            "morphology iteration count must be >= 1".into(),
        ));
    }
    Ok(())
}

fn erode_once(mask: &BinaryMask, se: StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let r = se.radius() as isize;
    let src = mask.data();
    let mut out = vec![0u8; w * h];
    for y in 0..h as isize {
        'pixel: for x in 0..w as isize {
            for dy in -r..=r {
                let sy = y + dy;
                if sy < 0 || sy >= h as isize {
                    continue 'pixel; // window exits the image: background wins
                }
                for dx in -r..=r {
                    let sx = x + dx;
                    if sx < 0 || sx >= w as isize || src[sy as usize * w + sx as usize] == 0 {
                        continue 'pixel;
                    }
                }
            }
            out[y as usize * w + x as usize] = 255;
        }
    }
    BinaryMask::new(w, h, out).expect("erode preserves dimensions")
}

fn dilate_once(mask: &BinaryMask, se: StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let r = se.radius() as isize;
    let src = mask.data();
    let mut out = vec![0u8; w * h];
    for y in 0..h as isize {
        'pixel: for x in 0..w as isize {
            for dy in -r..=r {
                let sy = y + dy;
                if sy < 0 || sy >= h as isize {
                    continue;
                }
                for dx in -r..=r {
                    let sx = x + dx;
                    if sx >= 0 && sx < w as isize && src[sy as usize * w + sx as usize] == 255 {
                        out[y as usize * w + x as usize] = 255;
                        continue 'pixel;
                    }
                }
            }
        }
    }
    BinaryMask::new(w, h, out).expect("dilate preserves dimensions")
}
