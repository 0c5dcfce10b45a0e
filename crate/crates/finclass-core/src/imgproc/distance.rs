use super::image::{BinaryMask, DistanceMap};
use crate::error::{Error, Result};

/// Distance metric for [`distance_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMetric {
    /// Exact city-block distance via a two-pass chamfer with weights 1 / 2.
    #[default]
    L1,
    /// Euclidean distance approximated by a 5x5 chamfer with weights
    /// a = 1, b = sqrt(2), c = sqrt(5).
    L2,
}

/// Per foreground pixel, the distance to the nearest background (zero) pixel
/// of the mask. Background pixels map to 0. A mask with no background pixel
/// at all gets the sentinel `width + height` everywhere, which exceeds any
/// realisable in-image distance.
pub fn distance_transform(mask: &BinaryMask, metric: DistanceMetric) -> Result<DistanceMap> {
    let (w, h) = (mask.width(), mask.height());
    if !mask.data().iter().any(|&v| v == 0) {
        let sentinel = (w + h) as f32;
        return DistanceMap::new(w, h, vec![sentinel; w * h]);
    }

    const INF: f32 = f32::MAX / 4.0;
    let mut d: Vec<f32> = mask
        .data()
        .iter()
        .map(|&v| if v == 0 { 0.0 } else { INF })
        .collect();

    // (dx, dy, weight) offsets of the forward half-mask; the backward pass
    // uses the mirrored offsets.
    let offsets: Vec<(isize, isize, f32)> = match metric {
        DistanceMetric::L1 => vec![
            (-1, 0, 1.0),
            (0, -1, 1.0),
            (-1, -1, 2.0),
            (1, -1, 2.0),
        ],
        DistanceMetric::L2 => {
            let b = std::f32::consts::SQRT_2;
            let c = 5.0f32.sqrt();
            vec![
                (-1, 0, 1.0),
                (0, -1, 1.0),
                (-1, -1, b),
                (1, -1, b),
                (-2, -1, c),
                (2, -1, c),
                (-1, -2, c),
                (1, -2, c),
            ]
        }
    };

    let relax = |d: &mut [f32], x: isize, y: isize, offs: &[(isize, isize, f32)]| {
        let idx = (y as usize) * w + x as usize;
        let mut best = d[idx];
        for &(dx, dy, wgt) in offs {
            let (sx, sy) = (x + dx, y + dy);
            if sx >= 0 && sx < w as isize && sy >= 0 && sy < h as isize {
                let cand = d[(sy as usize) * w + sx as usize] + wgt;
                if cand < best {
                    best = cand;
                }
            }
        }
        d[idx] = best;
    };

    for y in 0..h as isize {
        for x in 0..w as isize {
            relax(&mut d, x, y, &offsets);
        }
    }
    let backward: Vec<(isize, isize, f32)> =
        offsets.iter().map(|&(dx, dy, wgt)| (-dx, -dy, wgt)).collect();
    for y in (0..h as isize).rev() {
        for x in (0..w as isize).rev() {
            relax(&mut d, x, y, &backward);
        }
    }

    DistanceMap::new(w, h, d)
}

/// Binarise a distance map at `fraction * max(map)`: a pixel is foreground
/// iff its value is strictly greater than the cutoff. An all-zero map yields
/// an all-zero mask.
pub fn threshold_fraction(map: &DistanceMap, fraction: f32) -> Result<BinaryMask> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fraction must be in (0, 1], got {fraction}"
        )));
    }
    let cutoff = fraction * map.max_value();
    let data: Vec<u8> = map
        .data()
        .iter()
        .map(|&v| if v > cutoff { 255 } else { 0 })
        .collect();
    BinaryMask::new(map.width(), map.height(), data)
}

/// Per-pixel saturating subtraction `max(a - b, 0)`. For binary inputs the
/// result stays binary.
pub fn mask_subtract(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::InvalidInput(format!(
            "mask dimensions differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let data: Vec<u8> = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| x.saturating_sub(y))
        .collect();
    BinaryMask::new(a.width(), a.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Multi-source BFS over the 4-connected grid: the defining computation
    /// for city-block distances.
    pub(crate) fn bfs_l1(mask: &BinaryMask) -> Vec<u32> {
        let (w, h) = (mask.width(), mask.height());
        let mut dist = vec![u32::MAX; w * h];
        let mut queue = std::collections::VecDeque::new();
        for i in 0..w * h {
            if mask.data()[i] == 0 {
                dist[i] = 0;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            let push = |nx: usize, ny: usize, dist: &mut Vec<u32>, q: &mut std::collections::VecDeque<usize>| {
                let j = ny * w + nx;
                if dist[j] == u32::MAX {
                    dist[j] = dist[i] + 1;
                    q.push_back(j);
                }
            };
            if x > 0 {
                push(x - 1, y, &mut dist, &mut queue);
            }
            if x + 1 < w {
                push(x + 1, y, &mut dist, &mut queue);
            }
            if y > 0 {
                push(x, y - 1, &mut dist, &mut queue);
            }
            if y + 1 < h {
                push(x, y + 1, &mut dist, &mut queue);
            }
        }
        dist
    }

    fn random_mask(w: usize, h: usize, fg_per_16: u64, state: &mut u64) -> BinaryMask {
        let data: Vec<u8> = (0..w * h)
            .map(|_| {
                *state ^= *state << 13;
                *state ^= *state >> 7;
                *state ^= *state << 17;
                if *state % 16 < fg_per_16 {
                    255
                } else {
                    0
                }
            })
            .collect();
        BinaryMask::new(w, h, data).unwrap()
    }

    #[test]
    fn row_distances_match_hand_bfs() {
        let mask = BinaryMask::new(5, 1, vec![0, 255, 255, 255, 0]).unwrap();
        let map = distance_transform(&mask, DistanceMetric::L1).unwrap();
        assert_eq!(map.data(), &[0.0, 1.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn background_pixels_are_zero() {
        let mut state = 99u64;
        let mask = random_mask(16, 16, 8, &mut state);
        for metric in [DistanceMetric::L1, DistanceMetric::L2] {
            let map = distance_transform(&mask, metric).unwrap();
            for i in 0..mask.data().len() {
                if mask.data()[i] == 0 {
                    assert_eq!(map.data()[i], 0.0);
                }
            }
        }
    }

    #[test]
    fn all_foreground_gets_sentinel() {
        let mask = BinaryMask::filled(3, 3, 255).unwrap();
        let map = distance_transform(&mask, DistanceMetric::L1).unwrap();
        assert!(map.data().iter().all(|&v| v == 6.0));
        let map2 = distance_transform(&mask, DistanceMetric::L2).unwrap();
        assert!(map2.data().iter().all(|&v| v == 6.0));
    }

    #[test]
    fn l1_matches_bfs_on_random_masks() {
        let mut state = 0xABCDu64;
        for case in 0..30 {
            let mask = random_mask(32, 32, 10, &mut state);
            let map = distance_transform(&mask, DistanceMetric::L1).unwrap();
            let oracle = bfs_l1(&mask);
            for i in 0..oracle.len() {
                assert_eq!(map.data()[i], oracle[i] as f32, "case {case}, pixel {i}");
            }
        }
    }

    #[test]
    fn l2_close_to_exact_euclidean() {
        let mut state = 0x5151u64;
        for case in 0..20 {
            let mask = random_mask(32, 32, 12, &mut state);
            let map = distance_transform(&mask, DistanceMetric::L2).unwrap();
            let zeros: Vec<(f64, f64)> = (0..32 * 32)
                .filter(|&i| mask.data()[i] == 0)
                .map(|i| ((i % 32) as f64, (i / 32) as f64))
                .collect();
            for i in 0..32 * 32 {
                let (x, y) = ((i % 32) as f64, (i / 32) as f64);
                let exact = zeros
                    .iter()
                    .map(|&(zx, zy)| ((x - zx).powi(2) + (y - zy).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                let got = map.data()[i] as f64;
                assert!(
                    (got - exact).abs() <= 0.3,
                    "case {case} pixel {i}: chamfer {got} vs exact {exact}"
                );
                // The chamfer path never undercuts the true Euclidean length.
                assert!(got >= exact - 1e-4);
            }
        }
    }

    #[test]
    fn threshold_fraction_strict_greater() {
        let map = DistanceMap::new(4, 1, vec![0.0, 5.0, 8.0, 10.0]).unwrap();
        let mask = threshold_fraction(&map, 0.7).unwrap();
        assert_eq!(mask.data(), &[0, 0, 255, 255]);

        let flat = DistanceMap::new(3, 1, vec![3.0, 3.0, 3.0]).unwrap();
        let mask = threshold_fraction(&flat, 0.7).unwrap();
        assert_eq!(mask.data(), &[255, 255, 255]);

        let zero = DistanceMap::new(3, 1, vec![0.0; 3]).unwrap();
        let mask = threshold_fraction(&zero, 0.7).unwrap();
        assert_eq!(mask.data(), &[0, 0, 0]);
    }

    #[test]
    fn threshold_fraction_range_checked() {
        let map = DistanceMap::new(1, 1, vec![1.0]).unwrap();
        assert!(threshold_fraction(&map, 0.0).is_err());
        assert!(threshold_fraction(&map, 1.5).is_err());
        assert!(threshold_fraction(&map, 1.0).is_ok());
    }

    #[test]
    fn subtract_basics() {
        let a = BinaryMask::new(3, 1, vec![255, 255, 0]).unwrap();
        let b = BinaryMask::new(3, 1, vec![255, 0, 0]).unwrap();
        assert_eq!(mask_subtract(&a, &b).unwrap().data(), &[0, 255, 0]);
        assert!(mask_subtract(&a, &a).unwrap().data().iter().all(|&v| v == 0));

        let lo = BinaryMask::new(1, 1, vec![0]).unwrap();
        let hi = BinaryMask::new(1, 1, vec![255]).unwrap();
        assert_eq!(mask_subtract(&lo, &hi).unwrap().data(), &[0]);

        let wide = BinaryMask::new(2, 1, vec![0, 0]).unwrap();
        assert!(mask_subtract(&a, &wide).is_err());
    }
}
