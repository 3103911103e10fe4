//! Modified DuplicatedInput: copy a tape to the output while collapsing
//! every adjacent `BB` into `B` and `DD` into `D`.
//!
//! The agent sees only the symbol under the head. Actions combine a symbol,
//! whether to push it, and a head move. A correct push pays 1; a wrong push
//! pays −0.5 and ends the episode. Emitting the whole deduplicated target
//! ends the episode successfully. The head is clamped to the tape.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, RngCore};

use super::EnvError;
use crate::options::{Environment, InitiationSet, Observation, OptionId, OptionSpec, Transition};

pub const SYMBOL_COUNT: usize = 5;
pub const ACTION_COUNT: usize = SYMBOL_COUNT * 2 * 2;
pub const FEATURE_DIM: usize = SYMBOL_COUNT;
pub const MIN_LEN: usize = 20;
pub const MAX_LEN: usize = 30;
pub const CORRECT_REWARD: f64 = 1.0;
pub const WRONG_REWARD: f64 = -0.5;

pub const A: u8 = 0;
pub const B: u8 = 1;
pub const C: u8 = 2;
pub const D: u8 = 3;
pub const E: u8 = 4;

pub fn is_paired(symbol: u8) -> bool {
    symbol == B || symbol == D
}

pub fn symbol_char(symbol: u8) -> char {
    (b'A' + symbol) as char
}

/// Parses `"ABBC"`-style strings; `None` on any other character.
pub fn parse_tape(s: &str) -> Option<Vec<u8>> {
    s.bytes().map(|c| (b'A'..=b'E').contains(&c).then(|| c - b'A')).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DupAction {
    pub symbol: u8,
    pub push: bool,
    /// `true` increments the head, `false` decrements it.
    pub forward: bool,
}

impl DupAction {
    pub fn index(self) -> usize {
        self.symbol as usize * 4 + usize::from(!self.push) * 2 + usize::from(!self.forward)
    }

    pub fn from_index(i: usize) -> Option<Self> {
        (i < ACTION_COUNT).then_some(DupAction {
            symbol: (i / 4) as u8,
            push: (i / 2).is_multiple_of(2),
            forward: i.is_multiple_of(2),
        })
    }
}

/// Collapses each adjacent `BB`/`DD` pair; the optimal return equals the
/// target length.
pub fn dedup_oracle(tape: &[u8]) -> (Vec<u8>, f64) {
    let mut out = Vec::with_capacity(tape.len());
    let mut i = 0;
    while i < tape.len() {
        out.push(tape[i]);
        if is_paired(tape[i]) && tape.get(i + 1) == Some(&tape[i]) {
            i += 2;
        } else {
            i += 1;
        }
    }
    let reward = out.len() as f64;
    (out, reward)
}

/// Random tape of length uniform in `[20, 30]` where B and D only come in
/// adjacent pairs.
pub fn random_tape<R: RngCore + ?Sized>(rng: &mut R) -> Vec<u8> {
    let n = rng.gen_range(MIN_LEN..=MAX_LEN);
    let mut tape = Vec::with_capacity(n);
    while tape.len() < n {
        let s = rng.gen_range(0..SYMBOL_COUNT as u8);
        if is_paired(s) {
            if tape.len() + 2 <= n {
                tape.push(s);
                tape.push(s);
            }
        } else {
            tape.push(s);
        }
    }
    tape
}

/// Return of the policy that pushes every symbol it reads and moves right.
pub fn copy_only_return(tape: &[u8]) -> f64 {
    let (target, _) = dedup_oracle(tape);
    let mut ret = 0.0;
    for (k, &s) in tape.iter().enumerate() {
        if target.get(k) == Some(&s) {
            ret += CORRECT_REWARD;
            if k + 1 == target.len() {
                break;
            }
        } else {
            ret += WRONG_REWARD;
            break;
        }
    }
    ret
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DupInputState {
    pub tape: Vec<u8>,
    pub head: usize,
    pub output: Vec<u8>,
    pub target: Vec<u8>,
    pub time: usize,
    pub done: bool,
}

impl DupInputState {
    fn observe(&self) -> Observation {
        Observation::one_hot(self.tape[self.head] as usize, FEATURE_DIM)
    }
}

#[derive(Clone, Debug, Default)]
pub struct DupInput {
    state: Option<DupInputState>,
}

impl DupInput {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> Option<&DupInputState> {
        self.state.as_ref()
    }

    pub fn reset_with_tape(&mut self, tape: Vec<u8>) -> Observation {
        assert!(!tape.is_empty(), "tape must not be empty");
        let (target, _) = dedup_oracle(&tape);
        let state = DupInputState { tape, head: 0, output: Vec::new(), target, time: 1, done: false };
        let obs = state.observe();
        self.state = Some(state);
        obs
    }
}

impl Environment for DupInput {
    fn feature_dim(&self) -> usize {
        FEATURE_DIM
    }

    fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Observation {
        let tape = random_tape(rng);
        self.reset_with_tape(tape)
    }

    fn step(&mut self, action: usize, _rng: &mut dyn RngCore) -> Result<Transition, EnvError> {
        let state = self.state.as_mut().ok_or(EnvError::NotReset)?;
        if state.done {
            return Err(EnvError::StepAfterDone);
        }
        let action = DupAction::from_index(action).ok_or(EnvError::InvalidAction(action))?;
        let mut reward = 0.0;
        if action.push {
            if state.target.get(state.output.len()) == Some(&action.symbol) {
                state.output.push(action.symbol);
                reward = CORRECT_REWARD;
                state.done = state.output.len() == state.target.len();
            } else {
                reward = WRONG_REWARD;
                state.done = true;
            }
        }
        state.head = if action.forward {
            (state.head + 1).min(state.tape.len() - 1)
        } else {
            state.head.saturating_sub(1)
        };
        state.time += 1;
        Ok(Transition { observation: state.observe(), reward, done: state.done })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DupOptionsMode {
    /// ω1 unrestricted, ω2 cannot follow itself.
    Designed,
    /// `n` options, each admitting `n/2` random predecessors plus `∅`.
    Random(usize),
}

/// Two or more options with learned policies and terminations.
///
/// `rng` is only consumed by [`DupOptionsMode::Random`].
pub fn dupinput_options<R: RngCore + ?Sized>(mode: DupOptionsMode, rng: &mut R) -> Vec<OptionSpec> {
    match mode {
        DupOptionsMode::Designed => {
            let all = InitiationSet::universe(2);
            let not_after_self = InitiationSet::from_predecessors(2, [None, Some(OptionId(0))])
                .expect("indices are in range");
            vec![OptionSpec::learned(OptionId(0), all), OptionSpec::learned(OptionId(1), not_after_self)]
        }
        DupOptionsMode::Random(n) => {
            assert!(n >= 2 && n % 2 == 0, "random OOIs need an even option count ≥ 2");
            (0..n)
                .map(|i| {
                    let preds = sample(rng, n, n / 2).into_iter().map(|j| Some(OptionId(j)));
                    let set = InitiationSet::from_predecessors(n, preds.chain([None]))
                        .expect("indices are in range");
                    OptionSpec::learned(OptionId(i), set)
                })
                .collect()
        }
    }
}

/// Scripted behaviour for the designed options: ω1 copies, ω2 skips, the top
/// level skips a B or D whenever ω2 is allowed.
pub fn oracle_preferences(obs: &Observation) -> Vec<OptionId> {
    if is_paired(obs.code as u8) {
        vec![OptionId(1), OptionId(0)]
    } else {
        vec![OptionId(0)]
    }
}

/// In-option action of the scripted behaviour: `(action, end)`.
pub fn oracle_action(obs: &Observation, option: OptionId) -> (usize, bool) {
    let symbol = obs.code as u8;
    let push = option == OptionId(0);
    (DupAction { symbol, push, forward: true }.index(), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::options::available_options;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dedup_examples() {
        let (out, r) = dedup_oracle(&parse_tape("ABBCCEDD").unwrap());
        assert_eq!(out, parse_tape("ABCCED").unwrap());
        assert_eq!(r, 6.0);
        assert_eq!(dedup_oracle(&parse_tape("AAAA").unwrap()).1, 4.0);
        assert_eq!(dedup_oracle(&parse_tape("BBDD").unwrap()), (parse_tape("BD").unwrap(), 2.0));
    }

    #[test]
    fn action_index_round_trip() {
        for i in 0..ACTION_COUNT {
            assert_eq!(DupAction::from_index(i).unwrap().index(), i);
        }
        assert!(DupAction::from_index(ACTION_COUNT).is_none());
    }

    #[test]
    fn generated_tapes_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let t = random_tape(&mut rng);
            assert!((MIN_LEN..=MAX_LEN).contains(&t.len()));
            let mut i = 0;
            while i < t.len() {
                if is_paired(t[i]) {
                    assert_eq!(t[i + 1], t[i]);
                    i += 2;
                } else {
                    i += 1;
                }
            }
        }
    }

    #[test]
    fn wrong_first_push_ends_episode() {
        let mut env = DupInput::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        env.reset_with_tape(parse_tape("ACE").unwrap());
        let t = env.step(DupAction { symbol: C, push: true, forward: true }.index(), &mut rng).unwrap();
        assert_eq!((t.reward, t.done), (WRONG_REWARD, true));
        assert_eq!(env.step(0, &mut rng), Err(EnvError::StepAfterDone));
    }

    #[test]
    fn head_is_clamped() {
        let mut env = DupInput::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        env.reset_with_tape(parse_tape("AC").unwrap());
        env.step(DupAction { symbol: A, push: false, forward: false }.index(), &mut rng).unwrap();
        assert_eq!(env.state().unwrap().head, 0);
        for _ in 0..3 {
            env.step(DupAction { symbol: A, push: false, forward: true }.index(), &mut rng).unwrap();
        }
        assert_eq!(env.state().unwrap().head, 1);
    }

    #[test]
    fn copy_only_examples() {
        assert_eq!(copy_only_return(&parse_tape("ACE").unwrap()), 3.0);
        assert_eq!(copy_only_return(&parse_tape("ABBC").unwrap()), 1.5);
    }

    #[test]
    fn designed_oois() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let options = dupinput_options(DupOptionsMode::Designed, &mut rng);
        let obs = Observation::one_hot(0, FEATURE_DIM);
        assert_eq!(available_options(&obs, Some(OptionId(1)), &options), vec![OptionId(0)]);
        assert_eq!(available_options(&obs, Some(OptionId(0)), &options), vec![OptionId(0), OptionId(1)]);
        assert_eq!(available_options(&obs, None, &options), vec![OptionId(0), OptionId(1)]);
    }

    #[test]
    fn random_oois_have_half_the_predecessors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [2, 16] {
            for o in dupinput_options(DupOptionsMode::Random(n), &mut rng) {
                let preds: Vec<_> = o.initiation.predecessors().collect();
                assert_eq!(preds.iter().filter(|p| p.is_some()).count(), n / 2);
                assert!(preds.contains(&None));
            }
        }
    }
}
