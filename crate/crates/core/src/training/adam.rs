use crate::error::{Error, Result};
use crate::model::ClassifierParams;

use super::TrainConfig;

/// First and second moments for every parameter tensor, in
/// [`ClassifierParams::tensors`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &ClassifierParams) -> Self {
        let zeros: Vec<Vec<f64>> = params
            .tensors()
            .iter()
            .map(|(_, _, d)| vec![0.0; d.len()])
            .collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }
}

/// Hyperparameters of a single update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl From<&TrainConfig> for AdamHyper {
    fn from(c: &TrainConfig) -> Self {
        AdamHyper {
            lr: c.learning_rate,
            beta1: c.beta1,
            beta2: c.beta2,
            eps: c.adam_eps,
        }
    }
}

/// Bias-corrected Adam update of one flat tensor at step `t` (1-based).
pub fn adam_update(theta: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64], t: u64, h: AdamHyper) {
    let bc1 = 1.0 - h.beta1.powi(t as i32);
    let bc2 = 1.0 - h.beta2.powi(t as i32);
    for i in 0..theta.len() {
        let g = grad[i];
        m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
        v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        theta[i] -= h.lr * m_hat / (v_hat.sqrt() + h.eps);
    }
}

/// One optimizer step over all tensors. Gradients are checked before
/// anything is modified, so a failed step leaves `params` and `state` intact.
pub fn adam_step(
    params: &mut ClassifierParams,
    grads: &ClassifierParams,
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    let grad_tensors = grads.tensors();
    let shapes: Vec<Vec<usize>> = params.tensors().into_iter().map(|(_, s, _)| s).collect();
    if grad_tensors.len() != shapes.len()
        || grad_tensors.iter().zip(&shapes).any(|((_, s, _), p)| s != p)
        || state.m.len() != shapes.len()
    {
        return Err(Error::dim("gradient or optimizer state does not match the parameters"));
    }
    for (name, _, data) in &grad_tensors {
        if data.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!("non-finite gradient in `{name}`")));
        }
    }
    state.t += 1;
    let h = AdamHyper::from(config);
    for (k, ((_, theta), (_, _, g))) in params.tensors_mut().into_iter().zip(grad_tensors).enumerate() {
        adam_update(theta, g, &mut state.m[k], &mut state.v[k], state.t, h);
    }
    Ok(())
}
