//! Options whose initiation sets are conditioned on the option that has just
//! terminated, and the call-and-return executor that runs them.
//!
//! The set of options available at a decision point is
//! `{ ω : (x_t, ω_{t-1}) ∈ I_ω }`, with `ω_0 = ∅` represented by
//! [`Predecessor`] `None`.
//!
//! Network outputs and masks share one layout: two rows (`end`, `cont`) of
//! `option_count + action_count` columns, options first, flattened row-major.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::envs::EnvError;
use crate::sample::sample_index;

/// Dense index of an option within one option set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OptionId(pub usize);

impl OptionId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for OptionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ω{}", self.0)
    }
}

/// The previously executed option; `None` at the first decision of an episode.
pub type Predecessor = Option<OptionId>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptionsError {
    #[error("no option is available at a top-level decision (previous option {prev:?})")]
    NoAvailableOption { prev: Predecessor },
    #[error("mask has no admissible entry")]
    DegenerateMask,
    #[error("option {0} is outside the option set")]
    UnknownOption(OptionId),
    #[error("agent selected entry {choice}, which is masked out")]
    MaskedChoice { choice: usize },
    #[error("fixed policy of option {0} produced no valid action distribution")]
    InvalidFixedPolicy(OptionId),
    #[error("option {0} has a fixed policy but a learned termination, which is unsupported")]
    UnsupportedOption(OptionId),
    #[error("environment error: {0}")]
    Env(#[from] EnvError),
    #[error("policy error: {0}")]
    Policy(#[from] crate::policy::PolicyError),
}

/// One observation: the real-valued network encoding plus a discrete code
/// identifying the raw observation within its environment's alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub features: Vec<f64>,
    pub code: usize,
}

impl Observation {
    pub fn new(features: Vec<f64>, code: usize) -> Self {
        Self { features, code }
    }

    /// Observation with a one-hot feature vector of width `dim` at `code`.
    pub fn one_hot(code: usize, dim: usize) -> Self {
        let mut features = vec![0.0; dim];
        features[code] = 1.0;
        Self { features, code }
    }
}

pub type ObservationPredicate = Arc<dyn Fn(&Observation) -> bool + Send + Sync>;
pub type FixedPolicy = Arc<dyn Fn(&Observation) -> Vec<f64> + Send + Sync>;
pub type FixedTermination = Arc<dyn Fn(&Observation) -> f64 + Send + Sync>;

/// `I_ω`: a set of admissible predecessors, optionally intersected with an
/// observation predicate.
#[derive(Clone)]
pub struct InitiationSet {
    /// Slot 0 is `∅`, slot `i + 1` is option `i`.
    admits: Vec<bool>,
    predicate: Option<ObservationPredicate>,
}

impl InitiationSet {
    /// Admits exactly the listed predecessors.
    pub fn from_predecessors<I>(option_count: usize, predecessors: I) -> Result<Self, OptionsError>
    where
        I: IntoIterator<Item = Predecessor>,
    {
        let mut admits = vec![false; option_count + 1];
        for p in predecessors {
            admits[Self::slot(option_count, p)?] = true;
        }
        Ok(Self { admits, predicate: None })
    }

    /// Every predecessor, including `∅`: a standard (non-OOI) initiation set.
    pub fn universe(option_count: usize) -> Self {
        Self { admits: vec![true; option_count + 1], predicate: None }
    }

    pub fn with_predicate(mut self, predicate: ObservationPredicate) -> Self {
        self.predicate = Some(predicate);
        self
    }

    fn slot(option_count: usize, p: Predecessor) -> Result<usize, OptionsError> {
        match p {
            None => Ok(0),
            Some(id) if id.0 < option_count => Ok(id.0 + 1),
            Some(id) => Err(OptionsError::UnknownOption(id)),
        }
    }

    pub fn option_count(&self) -> usize {
        self.admits.len() - 1
    }

    pub fn admits_predecessor(&self, prev: Predecessor) -> bool {
        match prev {
            None => self.admits[0],
            Some(id) => self.admits.get(id.0 + 1).copied().unwrap_or(false),
        }
    }

    pub fn contains(&self, obs: &Observation, prev: Predecessor) -> bool {
        self.admits_predecessor(prev) && self.predicate.as_ref().is_none_or(|p| p(obs))
    }

    /// Admitted predecessors in ascending order, `∅` first.
    pub fn predecessors(&self) -> impl Iterator<Item = Predecessor> + '_ {
        self.admits.iter().enumerate().filter(|(_, &a)| a).map(|(slot, _)| {
            if slot == 0 {
                None
            } else {
                Some(OptionId(slot - 1))
            }
        })
    }

    pub fn predicate(&self) -> Option<&ObservationPredicate> {
        self.predicate.as_ref()
    }

    /// Same observation predicate, every predecessor admitted.
    pub fn widened(&self) -> Self {
        Self { admits: vec![true; self.admits.len()], predicate: self.predicate.clone() }
    }
}

impl fmt::Debug for InitiationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitiationSet")
            .field("predecessors", &self.predecessors().collect::<Vec<_>>())
            .field("predicate", &self.predicate.is_some())
            .finish()
    }
}

#[derive(Clone)]
pub enum OptionPolicy {
    /// Distribution over primitive actions as a function of the observation.
    Fixed(FixedPolicy),
    Learned,
}

#[derive(Clone)]
pub enum Termination {
    /// Probability of terminating, evaluated before every action but the first.
    Fixed(FixedTermination),
    /// Sampled jointly with the action from the `end` row of the network output.
    Learned,
}

impl fmt::Debug for OptionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptionPolicy::Fixed(_) => f.write_str("Fixed"),
            OptionPolicy::Learned => f.write_str("Learned"),
        }
    }
}

impl fmt::Debug for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Fixed(_) => f.write_str("Fixed"),
            Termination::Learned => f.write_str("Learned"),
        }
    }
}

/// `⟨π_ω, I_ω, β_ω⟩`.
#[derive(Clone, Debug)]
pub struct OptionSpec {
    pub id: OptionId,
    pub policy: OptionPolicy,
    pub termination: Termination,
    pub initiation: InitiationSet,
}

impl OptionSpec {
    pub fn learned(id: OptionId, initiation: InitiationSet) -> Self {
        Self { id, policy: OptionPolicy::Learned, termination: Termination::Learned, initiation }
    }

    pub fn fixed(
        id: OptionId,
        policy: FixedPolicy,
        termination: FixedTermination,
        initiation: InitiationSet,
    ) -> Self {
        Self {
            id,
            policy: OptionPolicy::Fixed(policy),
            termination: Termination::Fixed(termination),
            initiation,
        }
    }

    /// True when `other` has the same id, policy and termination (shared by
    /// pointer for fixed handles). Initiation sets are not compared.
    pub fn same_behaviour(&self, other: &OptionSpec) -> bool {
        let policy = match (&self.policy, &other.policy) {
            (OptionPolicy::Fixed(a), OptionPolicy::Fixed(b)) => Arc::ptr_eq(a, b),
            (OptionPolicy::Learned, OptionPolicy::Learned) => true,
            _ => false,
        };
        let termination = match (&self.termination, &other.termination) {
            (Termination::Fixed(a), Termination::Fixed(b)) => Arc::ptr_eq(a, b),
            (Termination::Learned, Termination::Learned) => true,
            _ => false,
        };
        self.id == other.id && policy && termination
    }
}

/// Replaces every predecessor set by the full universe, keeping observation
/// predicates and behaviour: the same options without OOIs.
pub fn without_oois(options: &[OptionSpec]) -> Vec<OptionSpec> {
    options
        .iter()
        .map(|o| OptionSpec { initiation: o.initiation.widened(), ..o.clone() })
        .collect()
}

/// `O_t = { ω ∈ O : (x_t, ω_{t−1}) ∈ I_ω }`, in option order.
pub fn available_options(obs: &Observation, prev: Predecessor, options: &[OptionSpec]) -> Vec<OptionId> {
    options.iter().filter(|o| o.initiation.contains(obs, prev)).map(|o| o.id).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Row {
    End = 0,
    Cont = 1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    Option(OptionId),
    Action(usize),
}

/// Decoded position of an entry in the joint output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Choice {
    pub row: Row,
    pub column: Column,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskContext {
    TopLevel(Predecessor),
    InOption(OptionId),
}

/// Binary mask over the `2 × (|O| + |A|)` joint output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskVector {
    option_count: usize,
    action_count: usize,
    entries: Vec<u8>,
}

impl MaskVector {
    pub fn zeros(option_count: usize, action_count: usize) -> Self {
        Self { option_count, action_count, entries: vec![0; 2 * (option_count + action_count)] }
    }

    pub fn from_entries(option_count: usize, action_count: usize, entries: Vec<u8>) -> Option<Self> {
        (entries.len() == 2 * (option_count + action_count) && entries.iter().all(|&e| e <= 1))
            .then_some(Self { option_count, action_count, entries })
    }

    pub fn option_count(&self) -> usize {
        self.option_count
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn width(&self) -> usize {
        self.option_count + self.action_count
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn index(&self, row: Row, column: Column) -> usize {
        let col = match column {
            Column::Option(id) => id.0,
            Column::Action(a) => self.option_count + a,
        };
        row as usize * self.width() + col
    }

    pub fn decode(&self, index: usize) -> Choice {
        let width = self.width();
        let row = if index < width { Row::End } else { Row::Cont };
        let col = index % width;
        let column = if col < self.option_count {
            Column::Option(OptionId(col))
        } else {
            Column::Action(col - self.option_count)
        };
        Choice { row, column }
    }

    pub fn get(&self, index: usize) -> bool {
        self.entries[index] == 1
    }

    pub fn set(&mut self, row: Row, column: Column) {
        let i = self.index(row, column);
        self.entries[i] = 1;
    }

    pub fn is_degenerate(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// The two rows, for display and tests.
    pub fn rows(&self) -> (&[u8], &[u8]) {
        self.entries.split_at(self.width())
    }
}

/// Mask for one decision. At top level only the `cont` entries of available
/// options are open; inside an option only primitive actions, in both rows.
pub fn build_mask(
    context: MaskContext,
    available: &[OptionId],
    action_count: usize,
    option_count: usize,
) -> Result<MaskVector, OptionsError> {
    let mut mask = MaskVector::zeros(option_count, action_count);
    match context {
        MaskContext::TopLevel(prev) => {
            if available.is_empty() {
                return Err(OptionsError::NoAvailableOption { prev });
            }
            for &id in available {
                if id.0 >= option_count {
                    return Err(OptionsError::UnknownOption(id));
                }
                mask.set(Row::Cont, Column::Option(id));
            }
        }
        MaskContext::InOption(_) => {
            for a in 0..action_count {
                mask.set(Row::End, Column::Action(a));
                mask.set(Row::Cont, Column::Action(a));
            }
        }
    }
    if mask.is_degenerate() {
        return Err(OptionsError::DegenerateMask);
    }
    Ok(mask)
}

/// `R_t = Σ_{τ≥t} γ^{τ−t} r_τ`, one backward pass.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (t, &r) in rewards.iter().enumerate().rev() {
        acc = r + gamma * acc;
        out[t] = acc;
    }
    out
}

/// Result of one environment transition.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
}

/// A partially observable episodic environment with discrete actions.
pub trait Environment {
    fn feature_dim(&self) -> usize;
    fn action_count(&self) -> usize;
    fn reset(&mut self, rng: &mut dyn RngCore) -> Observation;
    fn step(&mut self, action: usize, rng: &mut dyn RngCore) -> Result<Transition, EnvError>;
}

/// Anything that turns (observation, current option, mask) into a
/// distribution over the joint output.
pub trait Agent {
    fn options(&self) -> &[OptionSpec];
    fn action_count(&self) -> usize;
    /// `context` is `None` for the top-level policy. The returned vector has
    /// the mask's length and is zero wherever the mask is.
    fn distribution(
        &mut self,
        obs: &Observation,
        context: Option<OptionId>,
        mask: &MaskVector,
    ) -> Result<Vec<f64>, OptionsError>;
}

/// One decision record.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub observation: Observation,
    /// `None` exactly at top-level decisions.
    pub context: Option<OptionId>,
    pub mask: MaskVector,
    /// Index into the joint output.
    pub choice: usize,
    /// Environment reward of the transition this record caused; 0 at top level.
    pub reward: f64,
    /// Whether the choice was sampled from the agent (as opposed to a fixed
    /// option policy). Only these enter the policy-gradient loss.
    pub learned: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    /// Set when the episode hit the step limit before the environment ended it.
    pub truncated: bool,
    /// Number of primitive environment transitions.
    pub env_steps: usize,
}

impl Trajectory {
    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

/// Resets `env` and runs one episode with call-and-return option semantics.
///
/// Top-level decisions sample an available option from the `cont` row. Inside
/// an option, learned policies sample action and end flag jointly (`end`
/// returns control after the action executes); fixed options draw from their
/// table and stop according to `β`, which is evaluated on the current
/// observation before every action except the first. `env_rng` drives the
/// environment, `policy_rng` every agent-side draw.
pub fn run_episode<E, A, R1, R2>(
    env: &mut E,
    agent: &mut A,
    env_rng: &mut R1,
    policy_rng: &mut R2,
    step_limit: usize,
) -> Result<Trajectory, OptionsError>
where
    E: Environment + ?Sized,
    A: Agent + ?Sized,
    R1: RngCore,
    R2: RngCore,
{
    let option_count = agent.options().len();
    let action_count = agent.action_count();
    let mut obs = env.reset(env_rng);
    let mut trajectory = Trajectory::default();
    let mut prev: Predecessor = None;
    // (option, has executed at least one action)
    let mut current: Option<(OptionId, bool)> = None;

    while trajectory.env_steps < step_limit {
        let (id, started) = match current {
            Some(c) => c,
            None => {
                let available = available_options(&obs, prev, agent.options());
                let mask = build_mask(MaskContext::TopLevel(prev), &available, action_count, option_count)?;
                let y = agent.distribution(&obs, None, &mask)?;
                let choice = sample_index(&y, policy_rng).ok_or(OptionsError::DegenerateMask)?;
                let id = match mask.decode(choice) {
                    Choice { row: Row::Cont, column: Column::Option(id) } if mask.get(choice) => id,
                    _ => return Err(OptionsError::MaskedChoice { choice }),
                };
                trajectory.steps.push(Step {
                    observation: obs.clone(),
                    context: None,
                    mask,
                    choice,
                    reward: 0.0,
                    learned: true,
                });
                (id, false)
            }
        };
        let option = agent.options().get(id.0).ok_or(OptionsError::UnknownOption(id))?.clone();

        if started {
            if let Termination::Fixed(beta) = &option.termination {
                if policy_rng.gen::<f64>() < beta(&obs) {
                    prev = Some(id);
                    current = None;
                    continue;
                }
            }
        }

        let mask = build_mask(MaskContext::InOption(id), &[], action_count, option_count)?;
        let (choice, action, learned) = match &option.policy {
            OptionPolicy::Learned => {
                let y = agent.distribution(&obs, Some(id), &mask)?;
                let choice = sample_index(&y, policy_rng).ok_or(OptionsError::DegenerateMask)?;
                match mask.decode(choice) {
                    Choice { column: Column::Action(a), .. } if mask.get(choice) => (choice, a, true),
                    _ => return Err(OptionsError::MaskedChoice { choice }),
                }
            }
            OptionPolicy::Fixed(pi) => {
                if matches!(option.termination, Termination::Learned) {
                    return Err(OptionsError::UnsupportedOption(id));
                }
                let probs = pi(&obs);
                if probs.len() != action_count {
                    return Err(OptionsError::InvalidFixedPolicy(id));
                }
                let a = sample_index(&probs, policy_rng).ok_or(OptionsError::InvalidFixedPolicy(id))?;
                (mask.index(Row::Cont, Column::Action(a)), a, false)
            }
        };

        let transition = env.step(action, env_rng)?;
        trajectory.env_steps += 1;
        let ends = matches!(option.termination, Termination::Learned) && mask.decode(choice).row == Row::End;
        trajectory.steps.push(Step {
            observation: core::mem::replace(&mut obs, transition.observation),
            context: Some(id),
            mask,
            choice,
            reward: transition.reward,
            learned,
        });
        if transition.done {
            return Ok(trajectory);
        }
        if ends {
            prev = Some(id);
            current = None;
        } else {
            current = Some((id, true));
        }
    }
    trajectory.truncated = true;
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn obs() -> Observation {
        Observation::one_hot(0, 1)
    }

    #[test]
    fn in_option_mask_matches_layout() {
        let m = build_mask(MaskContext::InOption(OptionId(1)), &[], 3, 2).unwrap();
        assert_eq!(m.rows(), (&[0, 0, 1, 1, 1][..], &[0, 0, 1, 1, 1][..]));
    }

    #[test]
    fn top_level_mask_opens_available_cont_entries_only() {
        let m = build_mask(MaskContext::TopLevel(None), &[OptionId(0)], 3, 2).unwrap();
        assert_eq!(m.rows(), (&[0, 0, 0, 0, 0][..], &[1, 0, 0, 0, 0][..]));
    }

    #[test]
    fn flat_agent_mask() {
        let m = build_mask(MaskContext::InOption(OptionId(0)), &[], 3, 0).unwrap();
        assert_eq!(m.entries(), &[1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn empty_top_level_is_rejected() {
        let e = build_mask(MaskContext::TopLevel(Some(OptionId(1))), &[], 3, 2).unwrap_err();
        assert_eq!(e, OptionsError::NoAvailableOption { prev: Some(OptionId(1)) });
    }

    #[test]
    fn out_of_range_option_is_rejected() {
        let e = build_mask(MaskContext::TopLevel(None), &[OptionId(5)], 3, 2).unwrap_err();
        assert_eq!(e, OptionsError::UnknownOption(OptionId(5)));
    }

    #[test]
    fn decode_inverts_index() {
        let m = MaskVector::zeros(2, 3);
        for i in 0..m.len() {
            let c = m.decode(i);
            assert_eq!(m.index(c.row, c.column), i);
        }
    }

    #[test]
    fn universe_sets_make_everything_available() {
        let options: Vec<_> = (0..4).map(|i| OptionSpec::learned(OptionId(i), InitiationSet::universe(4))).collect();
        for prev in [None, Some(OptionId(0)), Some(OptionId(3))] {
            assert_eq!(available_options(&obs(), prev, &options).len(), 4);
        }
    }

    #[test]
    fn predicate_restricts_availability() {
        let set = InitiationSet::universe(1).with_predicate(Arc::new(|o: &Observation| o.code == 1));
        let options = vec![OptionSpec::learned(OptionId(0), set)];
        assert!(available_options(&Observation::one_hot(0, 2), None, &options).is_empty());
        assert_eq!(available_options(&Observation::one_hot(1, 2), None, &options), vec![OptionId(0)]);
    }

    #[test]
    fn widening_keeps_predicate_and_behaviour() {
        let set = InitiationSet::from_predecessors(2, [Some(OptionId(1))])
            .unwrap()
            .with_predicate(Arc::new(|o: &Observation| o.code == 0));
        let options = vec![OptionSpec::learned(OptionId(0), set.clone()), OptionSpec::learned(OptionId(1), set)];
        let wide = without_oois(&options);
        for (a, b) in options.iter().zip(&wide) {
            assert!(a.same_behaviour(b));
            assert!(b.initiation.predicate().is_some());
            assert_eq!(b.initiation.predecessors().count(), 3);
        }
    }

    #[test]
    fn returns_examples() {
        assert_eq!(discounted_returns(&[1.0, -2.0, 3.0], 0.0), vec![1.0, -2.0, 3.0]);
        assert_eq!(discounted_returns(&[1.0, 1.0, 1.0], 1.0), vec![3.0, 2.0, 1.0]);
        assert_eq!(discounted_returns(&[0.0, 0.0, 4.0], 0.5), vec![1.0, 2.0, 4.0]);
    }
}
