use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};

/// Border handling of [`conv2d_forward`]: `Valid` shrinks the output by
/// `K - 1`, `Same` zero-pads so the spatial extent is preserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    Valid,
    Same,
}

/// Convolution parameters: `filters` is `[K, K, Cin, F]` (filter index
/// innermost), `bias` is `[F]`. Stride is fixed at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams<S = f32> {
    pub filters: Tensor<S>,
    pub bias: Tensor<S>,
    pub padding: Padding,
}

/// Gradients of a convolution; `input` is `None` when the caller opted out
/// (the first layer of a network never needs it).
#[derive(Debug, Clone)]
pub struct ConvGrads<S = f32> {
    pub input: Option<Tensor<S>>,
    pub filters: Tensor<S>,
    pub bias: Tensor<S>,
}

impl<S: Scalar> ConvParams<S> {
    pub fn validate(&self) -> Result<(usize, usize, usize)> {
        let fs = self.filters.shape();
        if fs.len() != 4 || fs[0] != fs[1] {
            return Err(Error::InvalidShape(format!(
                "filters must be [K,K,Cin,F], got {fs:?}"
            )));
        }
        let (k, cin, f) = (fs[0], fs[2], fs[3]);
        if k == 0 || f == 0 {
            return Err(Error::InvalidShape(format!(
                "kernel size and filter count must be >= 1, got K={k}, F={f}"
            )));
        }
        // Symmetric zero padding only preserves the extent for odd kernels.
        if self.padding == Padding::Same && k % 2 == 0 {
            return Err(Error::InvalidShape(format!(
                "same padding requires an odd kernel, got K={k}"
            )));
        }
        if self.bias.shape() != [f] {
            return Err(Error::InvalidShape(format!(
                "bias shape {:?} does not match {f} filters",
                self.bias.shape()
            )));
        }
        Ok((k, cin, f))
    }
}

fn check_input<S: Scalar>(input: &Tensor<S>, p: &ConvParams<S>) -> Result<(usize, usize, usize, usize, usize)> {
    let (k, cin, f) = p.validate()?;
    let is = input.shape();
    if is.len() != 3 {
        return Err(Error::InvalidShape(format!(
            "conv input must be [H,W,C], got {is:?}"
        )));
    }
    let (h, w, c) = (is[0], is[1], is[2]);
    if c != cin {
        return Err(Error::InvalidShape(format!(
            "input has {c} channels but filters expect {cin}"
        )));
    }
    if p.padding == Padding::Valid && (h < k || w < k) {
        return Err(Error::InvalidShape(format!(
            "valid conv needs input >= {k}x{k}, got {h}x{w}"
        )));
    }
    Ok((h, w, k, cin, f))
}

/// `out[y,x,f] = bias[f] + sum_{dy,dx,c} input[y+dy, x+dx, c] * filters[dy,dx,c,f]`
pub fn conv2d_forward<S: Scalar>(input: &Tensor<S>, p: &ConvParams<S>) -> Result<Tensor<S>> {
    let (h, w, k, cin, f) = check_input(input, p)?;
    match p.padding {
        Padding::Valid => Ok(conv_valid(input, p, h, w, k, cin, f)),
        Padding::Same => {
            let padded = zero_pad(input, k / 2);
            Ok(conv_valid(&padded, p, h + k - 1, w + k - 1, k, cin, f))
        }
    }
}

/// Backward pass. `grad_out` has the forward output's shape; returns
/// gradients with the shapes of input, filters and bias.
pub fn conv2d_backward<S: Scalar>(
    input: &Tensor<S>,
    p: &ConvParams<S>,
    grad_out: &Tensor<S>,
    need_input_grad: bool,
) -> Result<ConvGrads<S>> {
    let (h, w, k, cin, f) = check_input(input, p)?;
    let (oh, ow) = match p.padding {
        Padding::Valid => (h - k + 1, w - k + 1),
        Padding::Same => (h, w),
    };
    if grad_out.shape() != [oh, ow, f] {
        return Err(Error::InvalidShape(format!(
            "upstream gradient shape {:?} does not match output [{oh},{ow},{f}]",
            grad_out.shape()
        )));
    }

    match p.padding {
        Padding::Valid => Ok(backward_valid(input, p, grad_out, need_input_grad, h, w, k, cin, f)),
        Padding::Same => {
            let pad = k / 2;
            let padded = zero_pad(input, pad);
            let mut grads = backward_valid(
                &padded,
                p,
                grad_out,
                need_input_grad,
                h + k - 1,
                w + k - 1,
                k,
                cin,
                f,
            );
            grads.input = grads.input.map(|g| crop(&g, pad, h, w, cin));
            Ok(grads)
        }
    }
}

fn conv_valid<S: Scalar>(
    input: &Tensor<S>,
    p: &ConvParams<S>,
    h: usize,
    w: usize,
    k: usize,
    cin: usize,
    f: usize,
) -> Tensor<S> {
    let (oh, ow) = (h - k + 1, w - k + 1);
    let src = input.data();
    let filters = p.filters.data();
    let bias = p.bias.data();
    let mut out = vec![S::zero(); oh * ow * f];

    // The filter axis is innermost in both `filters` and `out`, so the inner
    // loop is a contiguous multiply-accumulate of length F.
    let mut acc = vec![S::zero(); f];
    for y in 0..oh {
        for x in 0..ow {
            acc.copy_from_slice(bias);
            for dy in 0..k {
                let row = (y + dy) * w;
                for dx in 0..k {
                    let in_base = (row + x + dx) * cin;
                    let w_base = (dy * k + dx) * cin * f;
                    for c in 0..cin {
                        let v = src[in_base + c];
                        let wrow = &filters[w_base + c * f..w_base + c * f + f];
                        for (a, &wv) in acc.iter_mut().zip(wrow) {
                            *a += v * wv;
                        }
                    }
                }
            }
            out[(y * ow + x) * f..(y * ow + x) * f + f].copy_from_slice(&acc);
        }
    }
    Tensor::from_vec(&[oh, ow, f], out).expect("consistent conv output shape")
}

#[allow(clippy::too_many_arguments)]
fn backward_valid<S: Scalar>(
    input: &Tensor<S>,
    p: &ConvParams<S>,
    grad_out: &Tensor<S>,
    need_input_grad: bool,
    h: usize,
    w: usize,
    k: usize,
    cin: usize,
    f: usize,
) -> ConvGrads<S> {
    let (oh, ow) = (h - k + 1, w - k + 1);
    let src = input.data();
    let g = grad_out.data();

    let mut grad_filters = vec![S::zero(); k * k * cin * f];
    let mut grad_bias = vec![S::zero(); f];
    let mut grad_input = if need_input_grad {
        vec![S::zero(); h * w * cin]
    } else {
        Vec::new()
    };

    // Filters transposed to [K,K,F,Cin] so the input-gradient update is a
    // contiguous multiply-accumulate over channels.
    let filters = p.filters.data();
    let mut filters_t = vec![S::zero(); k * k * cin * f];
    if need_input_grad {
        for kk in 0..k * k {
            for c in 0..cin {
                for j in 0..f {
                    filters_t[(kk * f + j) * cin + c] = filters[(kk * cin + c) * f + j];
                }
            }
        }
    }

    for y in 0..oh {
        for x in 0..ow {
            let g_row = &g[(y * ow + x) * f..(y * ow + x) * f + f];
            for (b, &gv) in grad_bias.iter_mut().zip(g_row) {
                *b += gv;
            }
            for dy in 0..k {
                let row = (y + dy) * w;
                for dx in 0..k {
                    let in_base = (row + x + dx) * cin;
                    let w_base = (dy * k + dx) * cin * f;
                    for c in 0..cin {
                        let v = src[in_base + c];
                        let gw = &mut grad_filters[w_base + c * f..w_base + c * f + f];
                        for (a, &gv) in gw.iter_mut().zip(g_row) {
                            *a += v * gv;
                        }
                    }
                    if need_input_grad {
                        let gi = &mut grad_input[in_base..in_base + cin];
                        let wt_base = (dy * k + dx) * f * cin;
                        for (j, &gv) in g_row.iter().enumerate() {
                            let wt = &filters_t[wt_base + j * cin..wt_base + j * cin + cin];
                            for (a, &wv) in gi.iter_mut().zip(wt) {
                                *a += gv * wv;
                            }
                        }
                    }
                }
            }
        }
    }

    ConvGrads {
        input: need_input_grad.then(|| {
            Tensor::from_vec(&[h, w, cin], grad_input).expect("consistent input grad shape")
        }),
        filters: Tensor::from_vec(&[k, k, cin, f], grad_filters).expect("filter grad shape"),
        bias: Tensor::from_vec(&[f], grad_bias).expect("bias grad shape"),
    }
}

fn zero_pad<S: Scalar>(input: &Tensor<S>, pad: usize) -> Tensor<S> {
    let (h, w, c) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (ph, pw) = (h + 2 * pad, w + 2 * pad);
    let mut out = vec![S::zero(); ph * pw * c];
    for y in 0..h {
        let dst = ((y + pad) * pw + pad) * c;
        let srcrow = y * w * c;
        out[dst..dst + w * c].copy_from_slice(&input.data()[srcrow..srcrow + w * c]);
    }
    Tensor::from_vec(&[ph, pw, c], out).expect("consistent padded shape")
}

fn crop<S: Scalar>(padded: &Tensor<S>, pad: usize, h: usize, w: usize, c: usize) -> Tensor<S> {
    let pw = padded.shape()[1];
    let mut out = vec![S::zero(); h * w * c];
    for y in 0..h {
        let src = ((y + pad) * pw + pad) * c;
        out[y * w * c..(y + 1) * w * c].copy_from_slice(&padded.data()[src..src + w * c]);
    }
    Tensor::from_vec(&[h, w, c], out).expect("consistent cropped shape")
}
