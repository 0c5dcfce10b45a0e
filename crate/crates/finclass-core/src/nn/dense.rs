use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};

/// Gradients of a dense layer.
#[derive(Debug, Clone)]
pub struct DenseGrads<S = f32> {
    pub input: Tensor<S>,
    pub weights: Tensor<S>,
    pub bias: Tensor<S>,
}

fn check<S: Scalar>(input: &Tensor<S>, weights: &Tensor<S>, bias: &Tensor<S>) -> Result<(usize, usize)> {
    let ws = weights.shape();
    if ws.len() != 2 {
        return Err(Error::InvalidShape(format!(
            "dense weights must be [M,N], got {ws:?}"
        )));
    }
    let (m, n) = (ws[0], ws[1]);
    if input.shape() != [n] {
        return Err(Error::InvalidShape(format!(
            "dense input shape {:?} does not match weight columns {n}",
            input.shape()
        )));
    }
    if bias.shape() != [m] {
        return Err(Error::InvalidShape(format!(
            "dense bias shape {:?} does not match weight rows {m}",
            bias.shape()
        )));
    }
    Ok((m, n))
}

/// `a = W x + b` with `W: [M, N]`, `x: [N]`, `b: [M]`.
pub fn dense_forward<S: Scalar>(
    input: &Tensor<S>,
    weights: &Tensor<S>,
    bias: &Tensor<S>,
) -> Result<Tensor<S>> {
    let (m, n) = check(input, weights, bias)?;
    let x = input.data();
    let w = weights.data();
    let mut out = bias.data().to_vec();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &w[i * n..(i + 1) * n];
        let mut acc = S::zero();
        for (wv, xv) in row.iter().zip(x) {
            acc += *wv * *xv;
        }
        *o += acc;
    }
    Tensor::from_vec(&[m], out)
}

/// Backward pass: `d/dx = W^T g`, `d/dW = g x^T`, `d/db = g`.
pub fn dense_backward<S: Scalar>(
    input: &Tensor<S>,
    weights: &Tensor<S>,
    bias: &Tensor<S>,
    grad_out: &Tensor<S>,
) -> Result<DenseGrads<S>> {
    let (m, n) = check(input, weights, bias)?;
    if grad_out.shape() != [m] {
        return Err(Error::InvalidShape(format!(
            "upstream gradient shape {:?} does not match output [{m}]",
            grad_out.shape()
        )));
    }
    let x = input.data();
    let w = weights.data();
    let g = grad_out.data();

    let mut gx = vec![S::zero(); n];
    let mut gw = vec![S::zero(); m * n];
    for i in 0..m {
        let gi = g[i];
        let wrow = &w[i * n..(i + 1) * n];
        let gwrow = &mut gw[i * n..(i + 1) * n];
        for j in 0..n {
            gx[j] += wrow[j] * gi;
            gwrow[j] = gi * x[j];
        }
    }

    Ok(DenseGrads {
        input: Tensor::from_vec(&[n], gx)?,
        weights: Tensor::from_vec(&[m, n], gw)?,
        bias: grad_out.clone(),
    })
}
