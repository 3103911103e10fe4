use alloc::vec;
use alloc::vec::Vec;

use super::net::Parameters;
use super::PolicyError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { alpha: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Bias-corrected first and second moment accumulators.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step_count: u64,
}

impl AdamState {
    pub fn new<P: Parameters + ?Sized>(config: AdamConfig, params: &P) -> Self {
        let zeros: Vec<Vec<f64>> = params.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        Self { config, first_moment: zeros.clone(), second_moment: zeros, step_count: 0 }
    }

    pub fn step<P, G>(&mut self, params: &mut P, grads: &G) -> Result<(), PolicyError>
    where
        P: Parameters + ?Sized,
        G: Parameters + ?Sized,
    {
        let grads = grads.tensors();
        let mut params = params.tensors_mut();
        let shapes_match = params.len() == grads.len()
            && params.len() == self.first_moment.len()
            && params.iter().zip(&grads).zip(&self.first_moment).all(|((p, g), m)| p.len() == g.len() && p.len() == m.len());
        if !shapes_match {
            return Err(PolicyError::ShapeMismatch);
        }
        self.step_count += 1;
        let AdamConfig { alpha, beta1, beta2, epsilon } = self.config;
        let t = self.step_count as i32;
        let c1 = 1.0 - libm::pow(beta1, t as f64);
        let c2 = 1.0 - libm::pow(beta2, t as f64);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(&grads)
            .zip(self.first_moment.iter_mut())
            .zip(self.second_moment.iter_mut())
        {
            for i in 0..p.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= alpha * m_hat / (libm::sqrt(v_hat) + epsilon);
            }
        }
        Ok(())
    }
}

pub fn adam_step<P, G>(params: &mut P, grads: &G, state: &mut AdamState) -> Result<(), PolicyError>
where
    P: Parameters + ?Sized,
    G: Parameters + ?Sized,
{
    state.step(params, grads)
}
