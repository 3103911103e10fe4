//! TreeMaze: a T-maze generalised to a binary tree of depth three.
//!
//! The maze is four corridor segments deep. Segment `k` has cells
//! `0..=SEGMENT_LENGTHS[k]`; the last cell of segments 0–2 is a junction where
//! LEFT (bit 0) or RIGHT (bit 1) enters cell 0 of the next segment. Reaching
//! the last cell of segment 3 ends the episode at leaf `b1b2b3`. Every path
//! from the start to a leaf takes 18 steps.
//!
//! The goal leaf is drawn uniformly at reset; its bits are shown one per
//! time-step during time-steps 1–3. Every step costs 0.1, and arriving at
//! the goal leaf pays 10.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::EnvError;
use crate::options::{
    Environment, FixedPolicy, FixedTermination, InitiationSet, Observation, OptionId, OptionSpec,
    Transition,
};

pub const FORWARD: usize = 0;
pub const LEFT: usize = 1;
pub const RIGHT: usize = 2;
pub const ACTION_COUNT: usize = 3;

pub const SEGMENT_LENGTHS: [usize; 4] = [4, 4, 4, 3];
pub const STEP_REWARD: f64 = -0.1;
pub const GOAL_REWARD: f64 = 10.0;
/// Position one-hot (5), junctions crossed (4), bit channel {0, 1, none} (3).
pub const FEATURE_DIM: usize = 12;
pub const OBSERVATION_COUNT: usize = 5 * 4 * 3;

/// Where the agent is, independent of time and goal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Place {
    pub segment: usize,
    pub position: usize,
    /// Turns taken so far, bit `k` set for RIGHT at junction `k`.
    pub turns: u8,
}

impl Place {
    pub const START: Place = Place { segment: 0, position: 0, turns: 0 };

    pub fn is_leaf(self) -> bool {
        self.segment == 3 && self.position == SEGMENT_LENGTHS[3]
    }

    /// Leaf index `b1b2b3` read as a binary number, first bit most significant.
    pub fn leaf(self) -> Option<u8> {
        self.is_leaf().then_some(self.turns)
    }

    fn at_junction(self) -> bool {
        self.segment < 3 && self.position == SEGMENT_LENGTHS[self.segment]
    }

    /// Deterministic maze dynamics. Blocked moves leave the agent in place.
    pub fn moved(self, action: usize) -> Place {
        match action {
            FORWARD if self.position < SEGMENT_LENGTHS[self.segment] => {
                Place { position: self.position + 1, ..self }
            }
            LEFT | RIGHT if self.at_junction() => Place {
                segment: self.segment + 1,
                position: 0,
                turns: (self.turns << 1) | u8::from(action == RIGHT),
            },
            _ => self,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeMazeState {
    pub goal: u8,
    pub place: Place,
    /// 1 at reset, incremented by every step.
    pub time: usize,
    pub done: bool,
}

impl TreeMazeState {
    pub fn goal_bit(&self, k: usize) -> bool {
        (self.goal >> (2 - k)) & 1 == 1
    }

    pub fn observe(&self) -> TreeMazeObs {
        let bit = (1..=3).contains(&self.time).then(|| self.goal_bit(self.time - 1));
        TreeMazeObs { position: self.place.position, junctions: self.place.segment, bit }
    }
}

/// Decoded observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeMazeObs {
    pub position: usize,
    pub junctions: usize,
    pub bit: Option<bool>,
}

impl TreeMazeObs {
    pub fn code(self) -> usize {
        let channel = match self.bit {
            Some(false) => 0,
            Some(true) => 1,
            None => 2,
        };
        self.position + 5 * (self.junctions + 4 * channel)
    }

    pub fn decode(code: usize) -> Self {
        let position = code % 5;
        let junctions = (code / 5) % 4;
        let bit = match code / 20 {
            0 => Some(false),
            1 => Some(true),
            _ => None,
        };
        Self { position, junctions, bit }
    }

    pub fn to_observation(self) -> Observation {
        let mut features = vec![0.0; FEATURE_DIM];
        features[self.position] = 1.0;
        features[5 + self.junctions] = 1.0;
        let channel = self.code() / 20;
        features[9 + channel] = 1.0;
        Observation::new(features, self.code())
    }
}

#[derive(Clone, Debug, Default)]
pub struct TreeMaze {
    state: Option<TreeMazeState>,
}

impl TreeMaze {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> Option<&TreeMazeState> {
        self.state.as_ref()
    }

    pub fn reset_with_goal(&mut self, goal: u8) -> Observation {
        let state = TreeMazeState { goal: goal & 7, place: Place::START, time: 1, done: false };
        self.state = Some(state);
        state.observe().to_observation()
    }
}

impl Environment for TreeMaze {
    fn feature_dim(&self) -> usize {
        FEATURE_DIM
    }

    fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Observation {
        let goal = rng.gen_range(0..8u8);
        self.reset_with_goal(goal)
    }

    fn step(&mut self, action: usize, _rng: &mut dyn RngCore) -> Result<Transition, EnvError> {
        let state = self.state.as_mut().ok_or(EnvError::NotReset)?;
        if state.done {
            return Err(EnvError::StepAfterDone);
        }
        if action >= ACTION_COUNT {
            return Err(EnvError::InvalidAction(action));
        }
        state.place = state.place.moved(action);
        state.time += 1;
        let mut reward = STEP_REWARD;
        if let Some(leaf) = state.place.leaf() {
            state.done = true;
            if leaf == state.goal {
                reward += GOAL_REWARD;
            }
        }
        Ok(Transition { observation: state.observe().to_observation(), reward, done: state.done })
    }
}

/// Breadth-first search over the maze graph: number of steps from the start
/// to each leaf, indexed by leaf.
pub fn shortest_paths_to_leaves() -> [Option<usize>; 8] {
    let mut dist = [None; 8];
    let mut seen = Vec::new();
    let mut queue = VecDeque::new();
    queue.push_back((Place::START, 0usize));
    seen.push(Place::START);
    while let Some((place, d)) = queue.pop_front() {
        if let Some(leaf) = place.leaf() {
            dist[leaf as usize].get_or_insert(d);
            continue;
        }
        for action in [FORWARD, LEFT, RIGHT] {
            let next = place.moved(action);
            if !seen.contains(&next) {
                seen.push(next);
                queue.push_back((next, d + 1));
            }
        }
    }
    dist
}

/// Partial knowledge of the three goal bits; `None` is unknown.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Memory(pub [Option<bool>; 3]);

impl Memory {
    pub fn full(leaf: u8) -> Self {
        Memory([0, 1, 2].map(|k| Some((leaf >> (2 - k)) & 1 == 1)))
    }

    pub fn is_full(self) -> bool {
        self.0.iter().all(Option::is_some)
    }

    pub fn leaf(self) -> Option<u8> {
        self.0.iter().try_fold(0u8, |acc, b| b.map(|b| (acc << 1) | u8::from(b)))
    }

    /// `true` when `next` specifies exactly one position unknown in `self`
    /// and agrees elsewhere.
    pub fn refined_by(self, next: Memory) -> bool {
        let mut changed = 0;
        for (a, b) in self.0.iter().zip(next.0.iter()) {
            match (a, b) {
                (None, Some(_)) => changed += 1,
                (x, y) if x == y => {}
                _ => return false,
            }
        }
        changed == 1
    }

    /// `true` when `next` equals `self` except for one `0` or unknown
    /// position set to `1`.
    pub fn single_flip_to_one(self, next: Memory) -> bool {
        let mut changed = 0;
        for (a, b) in self.0.iter().zip(next.0.iter()) {
            match (a, b) {
                (Some(false) | None, Some(true)) => changed += 1,
                (x, y) if x == y => {}
                _ => return false,
            }
        }
        changed == 1
    }

    pub fn name(self) -> String {
        self.0
            .iter()
            .map(|b| match b {
                Some(false) => '0',
                Some(true) => '1',
                None => '-',
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeMazeVariant {
    /// 6 partial-memory options plus the 8 full-knowledge options.
    Full14,
    /// Only the 8 full-knowledge options.
    Known8,
    /// Full-knowledge options for leaves 000, 010, 100 and 110.
    Known4,
}

/// How successors are derived in the 14-option set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SuccessorRule {
    /// Self, or a memory specifying exactly one previously-unknown bit.
    #[default]
    Refinement,
    /// Self, or a memory with one `0` or `-` turned into `1`.
    FlipToOne,
}

pub fn memories(variant: TreeMazeVariant) -> Vec<Memory> {
    let full = (0..8u8).map(Memory::full);
    match variant {
        TreeMazeVariant::Full14 => {
            let mut m = vec![
                Memory([Some(false), None, None]),
                Memory([Some(true), None, None]),
            ];
            for a in [false, true] {
                for b in [false, true] {
                    m.push(Memory([Some(a), Some(b), None]));
                }
            }
            m.extend(full);
            m
        }
        TreeMazeVariant::Known8 => full.collect(),
        TreeMazeVariant::Known4 => [0b000u8, 0b010, 0b100, 0b110].into_iter().map(Memory::full).collect(),
    }
}

pub fn option_names(variant: TreeMazeVariant) -> Vec<String> {
    memories(variant).into_iter().map(Memory::name).collect()
}

fn is_successor(variant: TreeMazeVariant, rule: SuccessorRule, from: Memory, to: Memory) -> bool {
    if from == to {
        return true;
    }
    match (variant, rule) {
        (TreeMazeVariant::Full14, SuccessorRule::Refinement) => from.refined_by(to),
        _ => from.single_flip_to_one(to),
    }
}

/// Walks forward and turns at junction `k` according to bit `k` of `leaf`.
fn leaf_policy(leaf: u8) -> impl Fn(&Observation) -> Vec<f64> + Send + Sync {
    move |obs| {
        let o = TreeMazeObs::decode(obs.code);
        let mut p = vec![0.0; ACTION_COUNT];
        let action = if o.junctions < 3 && o.position == SEGMENT_LENGTHS[o.junctions] {
            if (leaf >> (2 - o.junctions)) & 1 == 1 {
                RIGHT
            } else {
                LEFT
            }
        } else {
            FORWARD
        };
        p[action] = 1.0;
        p
    }
}

/// The option set of a TreeMaze agent, with fixed memoryless policies.
///
/// Partial-memory options take one FORWARD step. Full-knowledge options walk
/// to their leaf; in the reduced sets they also stop on entering cells 1 and
/// 2 of the first corridor so the top level sees the second and third bits.
pub fn treemaze_options(variant: TreeMazeVariant, rule: SuccessorRule) -> Vec<OptionSpec> {
    let mems = memories(variant);
    let n = mems.len();
    let forward: FixedPolicy = Arc::new(|_: &Observation| {
        let mut p = vec![0.0; ACTION_COUNT];
        p[FORWARD] = 1.0;
        p
    });
    let always: FixedTermination = Arc::new(|_: &Observation| 1.0);
    let never: FixedTermination = Arc::new(|_: &Observation| 0.0);
    let early: FixedTermination = Arc::new(|obs: &Observation| {
        let o = TreeMazeObs::decode(obs.code);
        if o.junctions == 0 && (1..=2).contains(&o.position) {
            1.0
        } else {
            0.0
        }
    });

    mems.iter()
        .enumerate()
        .map(|(i, &mem)| {
            let starts = match variant {
                TreeMazeVariant::Full14 => mem.0[1].is_none(),
                _ => true,
            };
            let preds = mems
                .iter()
                .enumerate()
                .filter(|(_, &from)| is_successor(variant, rule, from, mem))
                .map(|(j, _)| Some(OptionId(j)))
                .chain(starts.then_some(None));
            let initiation = InitiationSet::from_predecessors(n, preds).expect("indices are in range");
            let (policy, termination) = match (mem.leaf(), variant) {
                (None, _) => (forward.clone(), always.clone()),
                (Some(leaf), TreeMazeVariant::Full14) => {
                    (Arc::new(leaf_policy(leaf)) as _, never.clone())
                }
                (Some(leaf), _) => (Arc::new(leaf_policy(leaf)) as _, early.clone()),
            };
            OptionSpec::fixed(OptionId(i), policy, termination, initiation)
        })
        .collect()
}

/// Preferred option memories for the scripted controller: record the bit
/// shown now, keep everything else. Reduced sets list full memories in
/// ascending leaf order, so later bits start at 0.
pub fn oracle_preferences(variant: TreeMazeVariant, obs: &Observation) -> Vec<OptionId> {
    let o = TreeMazeObs::decode(obs.code);
    let mems = memories(variant);
    match (o.bit, o.junctions) {
        (Some(bit), 0) if o.position < 3 => {
            let k = o.position;
            mems.iter()
                .enumerate()
                .filter(|(_, m)| {
                    m.0[k] == Some(bit)
                        && (variant != TreeMazeVariant::Full14 || m.0[k + 1..].iter().all(Option::is_none))
                })
                .map(|(i, _)| OptionId(i))
                .collect()
        }
        _ => (0..mems.len()).map(OptionId).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::options::available_options;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn idx(variant: TreeMazeVariant, name: &str) -> OptionId {
        OptionId(option_names(variant).iter().position(|n| n == name).unwrap())
    }

    #[test]
    fn every_leaf_is_eighteen_steps_away() {
        assert_eq!(shortest_paths_to_leaves(), [Some(18); 8]);
    }

    #[test]
    fn bits_are_shown_for_three_steps() {
        let mut env = TreeMaze::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let o = env.reset_with_goal(0b101);
        assert_eq!(TreeMazeObs::decode(o.code).bit, Some(true));
        let bits: Vec<_> = (0..3)
            .map(|_| TreeMazeObs::decode(env.step(FORWARD, &mut rng).unwrap().observation.code).bit)
            .collect();
        assert_eq!(bits, vec![Some(false), Some(true), None]);
    }

    #[test]
    fn wrong_leaf_in_minimal_steps() {
        let mut env = TreeMaze::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        env.reset_with_goal(0b111);
        let mut ret = 0.0;
        let mut steps = 0;
        loop {
            let a = match env.state().unwrap().place {
                p if p.at_junction() => LEFT,
                _ => FORWARD,
            };
            let t = env.step(a, &mut rng).unwrap();
            ret += t.reward;
            steps += 1;
            if t.done {
                break;
            }
        }
        assert_eq!(steps, 18);
        assert!((ret - (-1.8)).abs() < 1e-9);
        assert_eq!(env.step(FORWARD, &mut rng), Err(EnvError::StepAfterDone));
    }

    #[test]
    fn sideways_off_junction_is_a_costly_no_op() {
        let mut env = TreeMaze::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        env.reset_with_goal(0);
        let t = env.step(LEFT, &mut rng).unwrap();
        assert_eq!(env.state().unwrap().place, Place::START);
        assert_eq!(t.reward, STEP_REWARD);
    }

    #[test]
    fn observation_codes_round_trip() {
        for code in 0..OBSERVATION_COUNT {
            let o = TreeMazeObs::decode(code);
            assert_eq!(o.code(), code);
            assert_eq!(o.to_observation().features.iter().sum::<f64>(), 3.0);
        }
    }

    #[test]
    fn full14_refinement_successors() {
        let v = TreeMazeVariant::Full14;
        let options = treemaze_options(v, SuccessorRule::Refinement);
        assert_eq!(options.len(), 14);
        let obs = TreeMazeObs { position: 1, junctions: 0, bit: Some(true) }.to_observation();
        let after = available_options(&obs, Some(idx(v, "0--")), &options);
        assert_eq!(after, vec![idx(v, "0--"), idx(v, "00-"), idx(v, "01-")]);
        let start = available_options(&obs, None, &options);
        assert_eq!(start, vec![idx(v, "0--"), idx(v, "1--")]);
        let after_full = available_options(&obs, Some(idx(v, "010")), &options);
        assert_eq!(after_full, vec![idx(v, "010")]);
    }

    #[test]
    fn full14_literal_successors() {
        let v = TreeMazeVariant::Full14;
        let options = treemaze_options(v, SuccessorRule::FlipToOne);
        let obs = TreeMazeObs { position: 1, junctions: 0, bit: Some(true) }.to_observation();
        let after = available_options(&obs, Some(idx(v, "0--")), &options);
        assert_eq!(after, vec![idx(v, "0--"), idx(v, "1--"), idx(v, "01-")]);
    }

    #[test]
    fn known8_top_option_only_follows_itself() {
        let v = TreeMazeVariant::Known8;
        let options = treemaze_options(v, SuccessorRule::Refinement);
        let obs = TreeMazeObs { position: 2, junctions: 0, bit: Some(true) }.to_observation();
        assert_eq!(available_options(&obs, Some(idx(v, "111")), &options), vec![idx(v, "111")]);
        assert_eq!(
            available_options(&obs, Some(idx(v, "000")), &options),
            vec![idx(v, "000"), idx(v, "001"), idx(v, "010"), idx(v, "100")]
        );
        assert_eq!(available_options(&obs, None, &options).len(), 8);
    }

    #[test]
    fn known4_cannot_name_odd_leaves() {
        let names = option_names(TreeMazeVariant::Known4);
        assert_eq!(names, vec!["000", "010", "100", "110"]);
    }
}
