use crate::error::CoreError;
use crate::net::param::ParamTensor;
use crate::real::{real, Real};

/// Adam optimizer state for one parameter group: step count, first/second
/// moment arrays and the hyperparameters.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Real> AdamState<T> {
    pub fn new(lr: f64, params: &[&ParamTensor<T>]) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: params.iter().map(|p| vec![T::zero(); p.numel()]).collect(),
            v: params.iter().map(|p| vec![T::zero(); p.numel()]).collect(),
        }
    }

    /// One Adam update with bias correction over the group's parameters,
    /// consuming (then zeroing) their accumulated gradients.
    pub fn step(&mut self, params: &mut [&mut ParamTensor<T>]) -> Result<(), CoreError> {
        if params.len() != self.m.len() {
            return Err(CoreError::domain(format!(
                "optimizer built for {} tensors, got {}",
                self.m.len(),
                params.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let b1 = real::<T>(self.beta1);
        let b2 = real::<T>(self.beta2);
        let one = T::one();
        let corr1 = real::<T>(1.0 - self.beta1.powi(t));
        let corr2 = real::<T>(1.0 - self.beta2.powi(t));
        let lr = real::<T>(self.lr);
        let eps = real::<T>(self.eps);

        for (p, (m, v)) in params.iter_mut().zip(self.m.iter_mut().zip(&mut self.v)) {
            if p.numel() != m.len() {
                return Err(CoreError::domain(format!(
                    "moment shape mismatch for `{}`",
                    p.name
                )));
            }
            if p.trainable {
                for i in 0..m.len() {
                    let g = p.grad[i];
                    m[i] = b1 * m[i] + (one - b1) * g;
                    v[i] = b2 * v[i] + (one - b2) * g * g;
                    let m_hat = m[i] / corr1;
                    let v_hat = v[i] / corr2;
                    p.values[i] = p.values[i] - lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
            p.zero_grad();
        }
        Ok(())
    }
}
