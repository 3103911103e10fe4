use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::PolicyError;
use crate::options::{MaskVector, OptionId};

/// Fully connected layer, weights stored `outputs × inputs` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    /// Uniform in `±1/√fan_in` for weights and biases.
    pub fn uniform<R: RngCore + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let bound = 1.0 / libm::sqrt(inputs.max(1) as f64);
        let mut draw = || rng.gen_range(-bound..=bound);
        let weights = (0..inputs * outputs).map(|_| draw()).collect();
        let bias = (0..outputs).map(|_| draw()).collect();
        Self { inputs, outputs, weights, bias }
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], bias: vec![0.0; outputs] }
    }

    pub fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out.iter_mut().zip(self.weights.chunks_exact(self.inputs).zip(&self.bias)) {
            *o = b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    pub fn row(&self, output: usize) -> &[f64] {
        &self.weights[output * self.inputs..(output + 1) * self.inputs]
    }

    pub fn row_mut(&mut self, output: usize) -> &mut [f64] {
        &mut self.weights[output * self.inputs..(output + 1) * self.inputs]
    }
}

/// Anything exposing its trainable tensors as flat slices in a fixed order.
pub trait Parameters {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;

    fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Gradients shaped like some [`Parameters`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like<P: Parameters + ?Sized>(p: &P) -> Self {
        Self { tensors: p.tensors().iter().map(|t| vec![0.0; t.len()]).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.tensors.iter().flatten().fold(0.0, |m, v| f64::max(m, libm::fabs(*v)))
    }
}

impl Parameters for Gradients {
    fn tensors(&self) -> Vec<&[f64]> {
        self.tensors.iter().map(Vec::as_slice).collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.tensors.iter_mut().map(Vec::as_mut_slice).collect()
    }
}

/// One-hot of the executing option, all zero at top level.
pub fn one_hot(context: Option<OptionId>, option_count: usize) -> Vec<f64> {
    let mut v = vec![0.0; option_count];
    if let Some(id) = context {
        v[id.0] = 1.0;
    }
    v
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Clone, Debug)]
pub(crate) struct PolicyCache {
    pub input: Vec<f64>,
    pub hidden: Vec<f64>,
    /// σ(W2 h + b2), before masking
    pub sig: Vec<f64>,
    pub y: Vec<f64>,
    /// Σ mask ∘ sig
    pub total: f64,
}

/// The joint top-level / option policy.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyNet {
    pub feature_dim: usize,
    pub option_count: usize,
    pub action_count: usize,
    pub hidden: Dense,
    pub output: Dense,
}

impl PolicyNet {
    pub fn new<R: RngCore + ?Sized>(
        feature_dim: usize,
        option_count: usize,
        action_count: usize,
        hidden: usize,
        rng: &mut R,
    ) -> Self {
        let hidden_layer = Dense::uniform(feature_dim + option_count, hidden, rng);
        let output = Dense::uniform(hidden, 2 * (option_count + action_count), rng);
        Self { feature_dim, option_count, action_count, hidden: hidden_layer, output }
    }

    pub fn zeros(feature_dim: usize, option_count: usize, action_count: usize, hidden: usize) -> Self {
        Self {
            feature_dim,
            option_count,
            action_count,
            hidden: Dense::zeros(feature_dim + option_count, hidden),
            output: Dense::zeros(hidden, 2 * (option_count + action_count)),
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden.outputs
    }

    pub fn output_len(&self) -> usize {
        self.output.outputs
    }

    pub(crate) fn input(&self, features: &[f64], option_onehot: &[f64]) -> Result<Vec<f64>, PolicyError> {
        if features.len() != self.feature_dim {
            return Err(PolicyError::DimensionMismatch {
                what: "features",
                expected: self.feature_dim,
                found: features.len(),
            });
        }
        if option_onehot.len() != self.option_count {
            return Err(PolicyError::DimensionMismatch {
                what: "option one-hot",
                expected: self.option_count,
                found: option_onehot.len(),
            });
        }
        let mut input = Vec::with_capacity(self.feature_dim + self.option_count);
        input.extend_from_slice(features);
        input.extend_from_slice(option_onehot);
        Ok(input)
    }

    pub(crate) fn forward_cached(
        &self,
        features: &[f64],
        option_onehot: &[f64],
        mask: &MaskVector,
    ) -> Result<PolicyCache, PolicyError> {
        if mask.len() != self.output_len() {
            return Err(PolicyError::DimensionMismatch {
                what: "mask",
                expected: self.output_len(),
                found: mask.len(),
            });
        }
        if mask.is_degenerate() {
            return Err(PolicyError::DegenerateMask);
        }
        let input = self.input(features, option_onehot)?;
        let mut hidden = vec![0.0; self.hidden.outputs];
        self.hidden.forward_into(&input, &mut hidden);
        hidden.iter_mut().for_each(|h| *h = libm::tanh(*h));
        let mut sig = vec![0.0; self.output.outputs];
        self.output.forward_into(&hidden, &mut sig);
        sig.iter_mut().for_each(|z| *z = sigmoid(*z));
        let mut y: Vec<f64> = sig.iter().zip(mask.entries()).map(|(s, &m)| s * f64::from(m)).collect();
        let total: f64 = y.iter().sum();
        if !(total > 0.0) {
            return Err(PolicyError::DegenerateMask);
        }
        y.iter_mut().for_each(|v| *v /= total);
        Ok(PolicyCache { input, hidden, sig, y, total })
    }

    /// Masked joint distribution `y`.
    pub fn forward(&self, features: &[f64], option_onehot: &[f64], mask: &MaskVector) -> Result<Vec<f64>, PolicyError> {
        Ok(self.forward_cached(features, option_onehot, mask)?.y)
    }

    pub fn forward_context(
        &self,
        features: &[f64],
        context: Option<OptionId>,
        mask: &MaskVector,
    ) -> Result<Vec<f64>, PolicyError> {
        self.forward(features, &one_hot(context, self.option_count), mask)
    }

    pub fn named_tensors(&self) -> [(&'static str, [usize; 2], &[f64]); 4] {
        [
            ("w1", [self.hidden.outputs, self.hidden.inputs], &self.hidden.weights),
            ("b1", [self.hidden.outputs, 1], &self.hidden.bias),
            ("w2", [self.output.outputs, self.output.inputs], &self.output.weights),
            ("b2", [self.output.outputs, 1], &self.output.bias),
        ]
    }
}

impl Parameters for PolicyNet {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![&self.hidden.weights, &self.hidden.bias, &self.output.weights, &self.output.bias]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.hidden.weights, &mut self.hidden.bias, &mut self.output.weights, &mut self.output.bias]
    }
}

/// Baseline `V(x, ω)`: same input layout as the policy, linear scalar output.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueNet {
    pub feature_dim: usize,
    pub option_count: usize,
    pub hidden: Dense,
    pub output: Dense,
}

impl ValueNet {
    pub fn new<R: RngCore + ?Sized>(feature_dim: usize, option_count: usize, hidden: usize, rng: &mut R) -> Self {
        Self {
            feature_dim,
            option_count,
            hidden: Dense::uniform(feature_dim + option_count, hidden, rng),
            output: Dense::uniform(hidden, 1, rng),
        }
    }

    pub(crate) fn forward_cached(&self, features: &[f64], option_onehot: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64), PolicyError> {
        if features.len() != self.feature_dim || option_onehot.len() != self.option_count {
            return Err(PolicyError::DimensionMismatch {
                what: "value input",
                expected: self.feature_dim + self.option_count,
                found: features.len() + option_onehot.len(),
            });
        }
        let mut input = Vec::with_capacity(self.feature_dim + self.option_count);
        input.extend_from_slice(features);
        input.extend_from_slice(option_onehot);
        let mut hidden = vec![0.0; self.hidden.outputs];
        self.hidden.forward_into(&input, &mut hidden);
        hidden.iter_mut().for_each(|h| *h = libm::tanh(*h));
        let mut out = [0.0];
        self.output.forward_into(&hidden, &mut out);
        Ok((input, hidden, out[0]))
    }

    pub fn predict(&self, features: &[f64], option_onehot: &[f64]) -> Result<f64, PolicyError> {
        Ok(self.forward_cached(features, option_onehot)?.2)
    }

    pub fn named_tensors(&self) -> [(&'static str, [usize; 2], &[f64]); 4] {
        [
            ("w1", [self.hidden.outputs, self.hidden.inputs], &self.hidden.weights),
            ("b1", [self.hidden.outputs, 1], &self.hidden.bias),
            ("w2", [self.output.outputs, self.output.inputs], &self.output.weights),
            ("b2", [self.output.outputs, 1], &self.output.bias),
        ]
    }
}

impl Parameters for ValueNet {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![&self.hidden.weights, &self.hidden.bias, &self.output.weights, &self.output.bias]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.hidden.weights, &mut self.hidden.bias, &mut self.output.weights, &mut self.output.bias]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::options::{build_mask, MaskContext};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_give_uniform_output() {
        let net = PolicyNet::zeros(3, 2, 3, 5);
        let mask = MaskVector::from_entries(2, 3, vec![1; 10]).unwrap();
        let y = net.forward(&[0.3, -1.0, 2.0], &[0.0, 0.0], &mask).unwrap();
        assert!(y.iter().all(|&p| (p - 0.1).abs() < 1e-15));
    }

    #[test]
    fn single_open_entry_is_a_point_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = PolicyNet::new(3, 2, 3, 8, &mut rng);
        let mut entries = vec![0; 10];
        entries[7] = 1;
        let mask = MaskVector::from_entries(2, 3, entries).unwrap();
        let y = net.forward(&[1.0, 0.0, 0.5], &[0.0, 1.0], &mask).unwrap();
        for (i, p) in y.iter().enumerate() {
            assert_eq!(*p, if i == 7 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn degenerate_mask_is_an_error() {
        let net = PolicyNet::zeros(1, 1, 1, 2);
        let mask = MaskVector::zeros(1, 1);
        assert_eq!(net.forward(&[0.0], &[0.0], &mask), Err(PolicyError::DegenerateMask));
    }

    #[test]
    fn wrong_feature_width_is_an_error() {
        let net = PolicyNet::zeros(2, 1, 1, 2);
        let mask = build_mask(MaskContext::InOption(OptionId(0)), &[], 1, 1).unwrap();
        assert!(matches!(net.forward(&[0.0], &[1.0], &mask), Err(PolicyError::DimensionMismatch { .. })));
    }

    /// Four equations written out with scalar loops, independent of `Dense`.
    fn reference_forward(net: &PolicyNet, x: &[f64], mask: &[u8]) -> Vec<f64> {
        let n_in = net.hidden.inputs;
        let mut h = Vec::new();
        for j in 0..net.hidden.outputs {
            let mut a = net.hidden.bias[j];
            for i in 0..n_in {
                a += net.hidden.weights[j * n_in + i] * x[i];
            }
            h.push(a.tanh());
        }
        let mut yhat = Vec::new();
        for k in 0..net.output.outputs {
            let mut z = net.output.bias[k];
            for j in 0..h.len() {
                z += net.output.weights[k * h.len() + j] * h[j];
            }
            yhat.push(1.0 / (1.0 + (-z).exp()) * mask[k] as f64);
        }
        let s: f64 = yhat.iter().sum();
        yhat.into_iter().map(|v| v / s).collect()
    }

    extern crate std;

    #[test]
    fn in_option_output_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let net = PolicyNet::new(4, 2, 3, 6, &mut rng);
        let mask = build_mask(MaskContext::InOption(OptionId(1)), &[], 3, 2).unwrap();
        let features = [0.5, -0.25, 1.0, 0.0];
        let y = net.forward(&features, &[0.0, 1.0], &mask).unwrap();
        let reference = reference_forward(&net, &[0.5, -0.25, 1.0, 0.0, 0.0, 1.0], mask.entries());
        for (a, b) in y.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12);
        }
        for (i, p) in y.iter().enumerate() {
            let option_col = i % 5 < 2;
            assert_eq!(option_col, *p == 0.0);
        }
    }
}
