//! Hand-written agents: the gathering expert and the scripted oracles of
//! TreeMaze and DuplicatedInput.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::envs::treemaze::{SuccessorRule, TreeMazeVariant};
use crate::envs::{dupinput, gathering, treemaze};
use crate::options::{Agent, Column, MaskVector, Observation, OptionId, OptionSpec, OptionsError, Row};

pub type Preferences = Arc<dyn Fn(&Observation) -> Vec<OptionId> + Send + Sync>;
/// In-option rule returning `(action, end)`.
pub type InOptionRule = Arc<dyn Fn(&Observation, OptionId) -> (usize, bool) + Send + Sync>;

/// Deterministic memoryless agent. At top level it takes the first preferred
/// option that the mask admits, falling back to uniform over admissible
/// entries; inside learned options it follows `inner`.
#[derive(Clone)]
pub struct ScriptedAgent {
    options: Vec<OptionSpec>,
    action_count: usize,
    top: Preferences,
    inner: Option<InOptionRule>,
}

impl ScriptedAgent {
    pub fn new(options: Vec<OptionSpec>, action_count: usize, top: Preferences, inner: Option<InOptionRule>) -> Self {
        Self { options, action_count, top, inner }
    }

    /// Expert top level over the twelve gathering options.
    pub fn gathering_expert() -> Self {
        Self::new(gathering::gathering_options(), gathering::ACTION_COUNT, Arc::new(gathering::expert_preferences), None)
    }

    /// Records the bit on display in the option identity, then lets the
    /// full-knowledge option walk to its leaf.
    pub fn treemaze_oracle(variant: TreeMazeVariant, rule: SuccessorRule) -> Self {
        Self::new(
            treemaze::treemaze_options(variant, rule),
            treemaze::ACTION_COUNT,
            Arc::new(move |obs: &Observation| treemaze::oracle_preferences(variant, obs)),
            None,
        )
    }

    /// Copy with ω1, skip with ω2, skip a B or D whenever allowed.
    pub fn dupinput_oracle() -> Self {
        let options = dupinput::dupinput_options(dupinput::DupOptionsMode::Designed, &mut NoRng);
        Self::new(
            options,
            dupinput::ACTION_COUNT,
            Arc::new(dupinput::oracle_preferences),
            Some(Arc::new(dupinput::oracle_action)),
        )
    }

    pub fn with_options(mut self, options: Vec<OptionSpec>) -> Self {
        self.options = options;
        self
    }
}

/// The designed DuplicatedInput options draw nothing from their generator.
struct NoRng;

impl RngCore for NoRng {
    fn next_u32(&mut self) -> u32 {
        unreachable!("designed options are deterministic")
    }
    fn next_u64(&mut self) -> u64 {
        unreachable!("designed options are deterministic")
    }
    fn fill_bytes(&mut self, _dest: &mut [u8]) {
        unreachable!("designed options are deterministic")
    }
    fn try_fill_bytes(&mut self, _dest: &mut [u8]) -> Result<(), rand::Error> {
        unreachable!("designed options are deterministic")
    }
}

fn uniform_over_mask(mask: &MaskVector) -> Vec<f64> {
    let open = mask.entries().iter().filter(|&&e| e == 1).count() as f64;
    mask.entries().iter().map(|&e| f64::from(e) / open).collect()
}

impl Agent for ScriptedAgent {
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
        if mask.is_degenerate() {
            return Err(OptionsError::DegenerateMask);
        }
        let mut y = vec![0.0; mask.len()];
        match context {
            None => {
                let pick = (self.top)(obs)
                    .into_iter()
                    .map(|id| mask.index(Row::Cont, Column::Option(id)))
                    .find(|&i| i < mask.len() && mask.get(i));
                match pick {
                    Some(i) => y[i] = 1.0,
                    None => return Ok(uniform_over_mask(mask)),
                }
            }
            Some(id) => match &self.inner {
                Some(rule) => {
                    let (action, end) = rule(obs, id);
                    let row = if end { Row::End } else { Row::Cont };
                    let i = mask.index(row, Column::Action(action));
                    if !mask.get(i) {
                        return Err(OptionsError::MaskedChoice { choice: i });
                    }
                    y[i] = 1.0;
                }
                None => return Ok(uniform_over_mask(mask)),
            },
        }
        Ok(y)
    }
}
