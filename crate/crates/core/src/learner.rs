//! Monte-Carlo policy-gradient agent over an option set.
//!
//! The agent samples from a [`PolicyNet`] at every learned decision (top level
//! and inside learned options) and performs one update per episode: the
//! policy loss over the whole flattened trajectory with a [`ValueNet`]
//! baseline treated as a constant, then one value regression step on the
//! same Monte-Carlo returns.

use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::options::{discounted_returns, Agent, MaskVector, Observation, OptionId, OptionSpec, OptionsError, Trajectory};
use crate::policy::{
    one_hot, pg_loss_and_grads_regularised, value_update, AdamConfig, AdamState, PolicyError, PolicyNet, ValueNet,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerConfig {
    pub hidden: usize,
    pub gamma: f64,
    pub policy_adam: AdamConfig,
    pub value_adam: AdamConfig,
    pub entropy_coef: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            hidden: 100,
            gamma: 0.99,
            policy_adam: AdamConfig::default(),
            value_adam: AdamConfig::default(),
            entropy_coef: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LearnStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub decisions: usize,
}

#[derive(Clone, Debug)]
pub struct PolicyGradientAgent {
    options: Vec<OptionSpec>,
    action_count: usize,
    config: LearnerConfig,
    pub policy: PolicyNet,
    pub value: ValueNet,
    pub policy_opt: AdamState,
    pub value_opt: AdamState,
}

impl PolicyGradientAgent {
    pub fn new<R: RngCore + ?Sized>(
        options: Vec<OptionSpec>,
        feature_dim: usize,
        action_count: usize,
        config: LearnerConfig,
        init_rng: &mut R,
    ) -> Self {
        let policy = PolicyNet::new(feature_dim, options.len(), action_count, config.hidden, init_rng);
        let value = ValueNet::new(feature_dim, options.len(), config.hidden, init_rng);
        let policy_opt = AdamState::new(config.policy_adam, &policy);
        let value_opt = AdamState::new(config.value_adam, &value);
        Self { options, action_count, config, policy, value, policy_opt, value_opt }
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    /// One policy and one value update from a finished episode.
    pub fn learn(&mut self, trajectory: &Trajectory) -> Result<LearnStats, PolicyError> {
        let returns = discounted_returns(&trajectory.rewards(), self.config.gamma);
        let learned: Vec<usize> = (0..trajectory.steps.len()).filter(|&i| trajectory.steps[i].learned).collect();
        if learned.is_empty() {
            return Ok(LearnStats::default());
        }
        let onehots: Vec<Vec<f64>> = learned
            .iter()
            .map(|&i| one_hot(trajectory.steps[i].context, self.options.len()))
            .collect();
        let mut baselines = vec![0.0; trajectory.steps.len()];
        for (&i, o) in learned.iter().zip(&onehots) {
            baselines[i] = self.value.predict(&trajectory.steps[i].observation.features, o)?;
        }
        let (policy_loss, grads) = pg_loss_and_grads_regularised(
            &self.policy,
            trajectory,
            &returns,
            &baselines,
            self.config.entropy_coef,
        )?;
        self.policy_opt.step(&mut self.policy, &grads)?;

        let features: Vec<&[f64]> = learned.iter().map(|&i| trajectory.steps[i].observation.features.as_slice()).collect();
        let onehot_refs: Vec<&[f64]> = onehots.iter().map(Vec::as_slice).collect();
        let targets: Vec<f64> = learned.iter().map(|&i| returns[i]).collect();
        let value_loss = value_update(&mut self.value, &mut self.value_opt, &features, &onehot_refs, &targets)?;
        Ok(LearnStats { policy_loss, value_loss, decisions: learned.len() })
    }
}

impl Agent for PolicyGradientAgent {
    fn options(&self) -> &[OptionSpec] {
        &self.options
    }

    fn action_count(&self) -> usize {
        self.action_count
    }

    fn distribution(
        &mut self,
        obs: &Observation,
        context: Option<OptionId>,
        mask: &MaskVector,
    ) -> Result<Vec<f64>, OptionsError> {
        Ok(self.policy.forward_context(&obs.features, context, mask)?)
    }
}
