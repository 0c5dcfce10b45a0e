use crate::error::{Error, Result};
use crate::nn::{Scalar, Tensor};

/// Adam hyperparameters with the standard defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Per-parameter first/second moment estimates plus the shared timestep.
#[derive(Debug, Clone)]
pub struct AdamState<S: Scalar = f32> {
    pub hyper: AdamParams,
    t: u64,
    m: Vec<Tensor<S>>,
    v: Vec<Tensor<S>>,
}

impl<S: Scalar> AdamState<S> {
    /// Moment buffers mirroring the given parameter shapes.
    pub fn new(hyper: AdamParams, params: &[&Tensor<S>]) -> Self {
        Self {
            hyper,
            t: 0,
            m: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            v: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
        }
    }

    pub fn timestep(&self) -> u64 {
        self.t
    }

    pub fn second_moments(&self) -> &[Tensor<S>] {
        &self.v
    }
}

/// One Adam update:
///
/// ```text
/// t <- t + 1
/// m <- b1 m + (1 - b1) g          v <- b2 v + (1 - b2) g^2
/// m_hat = m / (1 - b1^t)          v_hat = v / (1 - b2^t)
/// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
/// ```
pub fn adam_step<S: Scalar>(
    params: &mut [&mut Tensor<S>],
    grads: &[Tensor<S>],
    state: &mut AdamState<S>,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::InvalidInput(format!(
            "adam got {} parameters, {} gradients, state for {}",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    for ((p, g), m) in params.iter().zip(grads).zip(&state.m) {
        if p.shape() != g.shape() || p.shape() != m.shape() {
            return Err(Error::InvalidInput(format!(
                "adam shape mismatch: parameter {:?}, gradient {:?}, state {:?}",
                p.shape(),
                g.shape(),
                m.shape()
            )));
        }
    }

    state.t += 1;
    let t = state.t as i32;
    let h = state.hyper;
    let beta1 = S::from_f64(h.beta1);
    let beta2 = S::from_f64(h.beta2);
    let one_m_b1 = S::from_f64(1.0 - h.beta1);
    let one_m_b2 = S::from_f64(1.0 - h.beta2);
    let bc1 = S::from_f64(1.0 - h.beta1.powi(t));
    let bc2 = S::from_f64(1.0 - h.beta2.powi(t));
    let lr = S::from_f64(h.learning_rate);
    let eps = S::from_f64(h.epsilon);

    for ((param, grad), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        let pd = param.data_mut();
        let gd = grad.data();
        let md = m.data_mut();
        let vd = v.data_mut();
        for i in 0..pd.len() {
            let g = gd[i];
            md[i] = beta1 * md[i] + one_m_b1 * g;
            vd[i] = beta2 * vd[i] + one_m_b2 * g * g;
            let m_hat = md[i] / bc1;
            let v_hat = vd[i] / bc2;
            pd[i] = pd[i] - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
