use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};

/// Max-pooling geometry. The network uses non-overlapping windows
/// (`stride == window`); trailing rows/columns that do not fill a window are
/// discarded (floor semantics).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolParams {
    pub window: usize,
    pub stride: usize,
}

impl PoolParams {
    pub fn square(window: usize) -> Self {
        Self {
            window,
            stride: window,
        }
    }
}

/// Forward max-pool over `[H, W, C]`. Returns the pooled tensor and the flat
/// input index of each block's maximum (first occurrence in row-major block
/// order wins ties); the backward pass routes gradients to those cells.
pub fn maxpool_forward<S: Scalar>(
    input: &Tensor<S>,
    p: &PoolParams,
) -> Result<(Tensor<S>, Vec<u32>)> {
    let is = input.shape();
    if is.len() != 3 {
        return Err(Error::InvalidShape(format!(
            "pool input must be [H,W,C], got {is:?}"
        )));
    }
    let (h, w, c) = (is[0], is[1], is[2]);
    if p.window == 0 || p.stride == 0 {
        return Err(Error::InvalidShape("pool window and stride must be >= 1".into()));
    }
    if p.window > h || p.window > w {
        return Err(Error::InvalidShape(format!(
            "pool window {} larger than input {h}x{w}",
            p.window
        )));
    }
    let oh = (h - p.window) / p.stride + 1;
    let ow = (w - p.window) / p.stride + 1;

    let src = input.data();
    let mut out = vec![S::zero(); oh * ow * c];
    let mut argmax = vec![0u32; oh * ow * c];
    for y in 0..oh {
        for x in 0..ow {
            let (y0, x0) = (y * p.stride, x * p.stride);
            for ch in 0..c {
                let mut best = src[(y0 * w + x0) * c + ch];
                let mut best_idx = (y0 * w + x0) * c + ch;
                for dy in 0..p.window {
                    for dx in 0..p.window {
                        let idx = ((y0 + dy) * w + x0 + dx) * c + ch;
                        if src[idx] > best {
                            best = src[idx];
                            best_idx = idx;
                        }
                    }
                }
                out[(y * ow + x) * c + ch] = best;
                argmax[(y * ow + x) * c + ch] = best_idx as u32;
            }
        }
    }
    Ok((
        Tensor::from_vec(&[oh, ow, c], out).expect("consistent pool output shape"),
        argmax,
    ))
}

/// Scatter the upstream gradient back to the recorded argmax cells.
pub fn maxpool_backward<S: Scalar>(
    input_shape: &[usize],
    argmax: &[u32],
    grad_out: &Tensor<S>,
) -> Result<Tensor<S>> {
    if argmax.len() != grad_out.len() {
        return Err(Error::InvalidShape(format!(
            "argmax length {} does not match upstream gradient length {}",
            argmax.len(),
            grad_out.len()
        )));
    }
    let mut grad = Tensor::zeros(input_shape);
    let data = grad.data_mut();
    for (&idx, &g) in argmax.iter().zip(grad_out.data()) {
        data[idx as usize] += g;
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_sized_shapes() {
        let input = Tensor::<f32>::zeros(&[96, 96, 32]);
        let (out, _) = maxpool_forward(&input, &PoolParams::square(5)).unwrap();
        assert_eq!(out.shape(), &[19, 19, 32]);

        let input = Tensor::<f32>::zeros(&[15, 15, 64]);
        let (out, _) = maxpool_forward(&input, &PoolParams::square(5)).unwrap();
        assert_eq!(out.shape(), &[3, 3, 64]);
    }

    #[test]
    fn constant_input_gives_constant_output() {
        let input = Tensor::scalar_filled(&[6, 6, 2], 3.5f32);
        let (out, _) = maxpool_forward(&input, &PoolParams::square(3)).unwrap();
        assert!(out.data().iter().all(|&v| v == 3.5));
    }

    #[test]
    fn four_by_four_blocks() {
        let input =
            Tensor::from_vec(&[4, 4, 1], (1..=16).map(|v| v as f32).collect()).unwrap();
        let (out, argmax) = maxpool_forward(&input, &PoolParams::square(2)).unwrap();
        assert_eq!(out.data(), &[6.0, 8.0, 14.0, 16.0]);
        assert_eq!(argmax, vec![5, 7, 13, 15]);
    }

    #[test]
    fn backward_routes_to_argmax_only() {
        let input =
            Tensor::from_vec(&[4, 4, 1], (1..=16).map(|v| v as f32).collect()).unwrap();
        let (out, argmax) = maxpool_forward(&input, &PoolParams::square(2)).unwrap();
        let g = Tensor::from_vec(out.shape(), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let gi = maxpool_backward(input.shape(), &argmax, &g).unwrap();
        let mut expect = vec![0.0f32; 16];
        expect[5] = 1.0;
        expect[7] = 2.0;
        expect[13] = 3.0;
        expect[15] = 4.0;
        assert_eq!(gi.data(), &expect[..]);
    }

    #[test]
    fn ties_take_first_occurrence() {
        let input = Tensor::from_vec(&[2, 2, 1], vec![7.0f32, 7.0, 7.0, 7.0]).unwrap();
        let (_, argmax) = maxpool_forward(&input, &PoolParams::square(2)).unwrap();
        assert_eq!(argmax, vec![0]);
    }

    #[test]
    fn at_most_one_nonzero_per_block() {
        let mut state = 17u64;
        let data: Vec<f32> = (0..10 * 10 * 3)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                ((state >> 33) as f32 / (1u64 << 31) as f32) - 1.0
            })
            .collect();
        let input = Tensor::from_vec(&[10, 10, 3], data).unwrap();
        let p = PoolParams::square(5);
        let (out, argmax) = maxpool_forward(&input, &p).unwrap();
        let g = Tensor::scalar_filled(out.shape(), 1.0f32);
        let gi = maxpool_backward(input.shape(), &argmax, &g).unwrap();
        for by in 0..2 {
            for bx in 0..2 {
                for c in 0..3 {
                    let mut nonzero = 0;
                    for dy in 0..5 {
                        for dx in 0..5 {
                            if gi.data()[((by * 5 + dy) * 10 + bx * 5 + dx) * 3 + c] != 0.0 {
                                nonzero += 1;
                            }
                        }
                    }
                    assert!(nonzero <= 1);
                }
            }
        }
    }

    #[test]
    fn oversized_window_rejected() {
        let input = Tensor::<f32>::zeros(&[4, 4, 1]);
        assert!(maxpool_forward(&input, &PoolParams::square(5)).is_err());
    }
}
