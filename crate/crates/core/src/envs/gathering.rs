//! Object Gathering simulated at option granularity.
//!
//! Two terminals, green and blue, each start with 2–4 objects. Going to a
//! terminal that still holds an object pays +2 and removes one; going to an
//! empty terminal pays −2, refills the other terminal with 2–4 objects and
//! counts as an emptying. The episode ends after 2 or 3 emptyings. Whether a
//! terminal was full is only visible on arrival there.
//!
//! Each of the twelve options is one macro-transition: `R1..R4` return to the
//! root, `G1..G4` go to the green terminal, `B1..B4` to the blue one.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::EnvError;
use crate::options::{Environment, InitiationSet, Observation, OptionId, OptionSpec, Transition};

pub const OPTION_COUNT: usize = 12;
pub const ACTION_COUNT: usize = OPTION_COUNT;
/// Root, green full, green empty, blue full, blue empty.
pub const FEATURE_DIM: usize = 5;
pub const FULL_REWARD: f64 = 2.0;
pub const EMPTY_REWARD: f64 = -2.0;

pub const ROOT: usize = 0;
pub const GREEN_FULL: usize = 1;
pub const GREEN_EMPTY: usize = 2;
pub const BLUE_FULL: usize = 3;
pub const BLUE_EMPTY: usize = 4;

/// `R_i` for `i` in `1..=4`.
pub fn r(i: usize) -> OptionId {
    OptionId(i - 1)
}

/// `G_i` for `i` in `1..=4`.
pub fn g(i: usize) -> OptionId {
    OptionId(3 + i)
}

/// `B_i` for `i` in `1..=4`.
pub fn b(i: usize) -> OptionId {
    OptionId(7 + i)
}

pub fn option_name(id: OptionId) -> alloc::string::String {
    let kind = ['R', 'G', 'B'][id.0 / 4];
    alloc::format!("{kind}{}", id.0 % 4 + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Root,
    Green,
    Blue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GatherState {
    pub location: Location,
    pub green_count: u32,
    pub blue_count: u32,
    pub emptyings_done: u32,
    pub emptyings_target: u32,
    /// Whether the last terminal visit found an object.
    pub last_full: bool,
    pub done: bool,
}

impl GatherState {
    pub fn observation_code(&self) -> usize {
        match (self.location, self.last_full) {
            (Location::Root, _) => ROOT,
            (Location::Green, true) => GREEN_FULL,
            (Location::Green, false) => GREEN_EMPTY,
            (Location::Blue, true) => BLUE_FULL,
            (Location::Blue, false) => BLUE_EMPTY,
        }
    }
}

fn refill<R: RngCore + ?Sized>(rng: &mut R) -> u32 {
    rng.gen_range(2..=4)
}

#[derive(Clone, Debug, Default)]
pub struct Gathering {
    state: Option<GatherState>,
}

impl Gathering {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> Option<&GatherState> {
        self.state.as_ref()
    }

    pub fn reset_with(&mut self, green: u32, blue: u32, emptyings_target: u32) -> Observation {
        let state = GatherState {
            location: Location::Root,
            green_count: green,
            blue_count: blue,
            emptyings_done: 0,
            emptyings_target,
            last_full: false,
            done: false,
        };
        self.state = Some(state);
        Observation::one_hot(ROOT, FEATURE_DIM)
    }
}

impl Environment for Gathering {
    fn feature_dim(&self) -> usize {
        FEATURE_DIM
    }

    fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Observation {
        let green = refill(rng);
        let blue = refill(rng);
        let target = rng.gen_range(2..=3);
        self.reset_with(green, blue, target)
    }

    fn step(&mut self, action: usize, rng: &mut dyn RngCore) -> Result<Transition, EnvError> {
        let s = self.state.as_mut().ok_or(EnvError::NotReset)?;
        if s.done {
            return Err(EnvError::StepAfterDone);
        }
        if action >= ACTION_COUNT {
            return Err(EnvError::InvalidAction(action));
        }
        let to_root = action < 4;
        if to_root == (s.location == Location::Root) {
            return Err(EnvError::UnavailableOption(action));
        }
        let mut reward = 0.0;
        if to_root {
            s.location = Location::Root;
        } else {
            let green = action < 8;
            s.location = if green { Location::Green } else { Location::Blue };
            let (here, other) = if green {
                (&mut s.green_count, &mut s.blue_count)
            } else {
                (&mut s.blue_count, &mut s.green_count)
            };
            if *here > 0 {
                *here -= 1;
                s.last_full = true;
                reward = FULL_REWARD;
            } else {
                *other = refill(rng);
                s.last_full = false;
                reward = EMPTY_REWARD;
                s.emptyings_done += 1;
                s.done = s.emptyings_done >= s.emptyings_target;
            }
        }
        Ok(Transition {
            observation: Observation::one_hot(s.observation_code(), FEATURE_DIM),
            reward,
            done: s.done,
        })
    }
}

/// The twelve fixed options. `R1,R2` may follow any `G`, `R3,R4` any `B`, and
/// `G_i,B_i` follow `R_i` or start the episode. Observation predicates keep
/// `R` options at terminals and `G`/`B` options at the root.
pub fn gathering_options() -> Vec<OptionSpec> {
    let at_root: Arc<dyn Fn(&Observation) -> bool + Send + Sync> = Arc::new(|o: &Observation| o.code == ROOT);
    let at_terminal: Arc<dyn Fn(&Observation) -> bool + Send + Sync> = Arc::new(|o: &Observation| o.code != ROOT);
    let single_step: Arc<dyn Fn(&Observation) -> f64 + Send + Sync> = Arc::new(|_: &Observation| 1.0);
    (0..OPTION_COUNT)
        .map(|i| {
            let preds: Vec<Option<OptionId>> = match i {
                0 | 1 => (1..=4).map(|k| Some(g(k))).collect(),
                2 | 3 => (1..=4).map(|k| Some(b(k))).collect(),
                _ => vec![Some(r(i % 4 + 1)), None],
            };
            let predicate = if i < 4 { at_terminal.clone() } else { at_root.clone() };
            let initiation = InitiationSet::from_predecessors(OPTION_COUNT, preds)
                .expect("indices are in range")
                .with_predicate(predicate);
            let policy = Arc::new(move |_: &Observation| {
                let mut p = vec![0.0; ACTION_COUNT];
                p[i] = 1.0;
                p
            });
            OptionSpec::fixed(OptionId(i), policy, single_step.clone(), initiation)
        })
        .collect()
}

/// Expert preferences: leave a full terminal by `R1`/`R3` and an empty one by
/// `R2`/`R4`; at the root return to a full terminal and switch after an empty
/// one (`G1`, `B2`, `B3`, `G4`).
pub fn expert_preferences(obs: &Observation) -> Vec<OptionId> {
    match obs.code {
        GREEN_FULL => vec![r(1)],
        GREEN_EMPTY => vec![r(2)],
        BLUE_FULL => vec![r(3)],
        BLUE_EMPTY => vec![r(4)],
        _ => vec![g(1), b(2), b(3), g(4)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::options::available_options;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn at(code: usize) -> Observation {
        Observation::one_hot(code, FEATURE_DIM)
    }

    #[test]
    fn names() {
        assert_eq!(option_name(r(1)), "R1");
        assert_eq!(option_name(g(4)), "G4");
        assert_eq!(option_name(b(2)), "B2");
    }

    #[test]
    fn published_initiation_sets() {
        let o = gathering_options();
        assert_eq!(available_options(&at(BLUE_FULL), Some(b(2)), &o), vec![r(3), r(4)]);
        assert_eq!(available_options(&at(GREEN_EMPTY), Some(g(3)), &o), vec![r(1), r(2)]);
        assert_eq!(available_options(&at(ROOT), Some(r(4)), &o), vec![g(4), b(4)]);
        assert_eq!(available_options(&at(ROOT), None, &o), (4..12).map(OptionId).collect::<Vec<_>>());
    }

    #[test]
    fn reward_rules() {
        let mut env = Gathering::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        env.reset_with(1, 3, 2);
        let t = env.step(g(1).0, &mut rng).unwrap();
        assert_eq!((t.reward, t.observation.code), (FULL_REWARD, GREEN_FULL));
        assert_eq!(env.step(g(1).0, &mut rng), Err(EnvError::UnavailableOption(g(1).0)));
        env.step(r(1).0, &mut rng).unwrap();
        let t = env.step(g(1).0, &mut rng).unwrap();
        assert_eq!((t.reward, t.observation.code, t.done), (EMPTY_REWARD, GREEN_EMPTY, false));
        let s = env.state().unwrap();
        assert!((2..=4).contains(&s.blue_count));
        assert_eq!(s.emptyings_done, 1);
    }
}
