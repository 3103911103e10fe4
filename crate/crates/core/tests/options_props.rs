use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ooi_core::envs::gathering::{self, Gathering};
use ooi_core::options::{without_oois, Column, OptionPolicy, Row, Termination};
use ooi_core::scripted::ScriptedAgent;
use ooi_core::{
    available_options, build_mask, discounted_returns, run_episode, Agent, InitiationSet, MaskContext, MaskVector,
    Observation, OptionId, OptionSpec, OptionsError, Predecessor,
};

/// Options over `obs_count` one-hot observations: `admits[i][p]` for
/// predecessor slot `p` (0 = ∅) and `allowed[i][x]` for observation `x`.
fn options_from(admits: &[Vec<bool>], allowed: &[Vec<bool>]) -> Vec<OptionSpec> {
    let n = admits.len();
    admits
        .iter()
        .zip(allowed)
        .enumerate()
        .map(|(i, (adm, obs_ok))| {
            let preds = adm
                .iter()
                .enumerate()
                .filter(|(_, &a)| a)
                .map(|(p, _)| if p == 0 { None } else { Some(OptionId(p - 1)) });
            let obs_ok = obs_ok.clone();
            let set = InitiationSet::from_predecessors(n, preds)
                .unwrap()
                .with_predicate(Arc::new(move |o: &Observation| obs_ok[o.code]));
            OptionSpec::learned(OptionId(i), set)
        })
        .collect()
}

fn option_table(max_options: usize, obs_count: usize) -> impl Strategy<Value = (Vec<Vec<bool>>, Vec<Vec<bool>>)> {
    (1..=max_options).prop_flat_map(move |n| {
        (
            prop::collection::vec(prop::collection::vec(any::<bool>(), n + 1), n),
            prop::collection::vec(prop::collection::vec(any::<bool>(), obs_count), n),
        )
    })
}

proptest! {
    #[test]
    fn available_options_matches_brute_force(
        (admits, allowed) in option_table(6, 3),
        x in 0usize..3,
        prev_slot in 0usize..7,
    ) {
        let options = options_from(&admits, &allowed);
        let n = options.len();
        let prev: Predecessor = if prev_slot == 0 || prev_slot > n { None } else { Some(OptionId(prev_slot - 1)) };
        let slot = prev.map_or(0, |p| p.0 + 1);
        let obs = Observation::one_hot(x, 3);
        let expected: Vec<OptionId> = (0..n).filter(|&i| admits[i][slot] && allowed[i][x]).map(OptionId).collect();
        prop_assert_eq!(available_options(&obs, prev, &options), expected);
    }

    #[test]
    fn masks_open_exactly_the_available_options(
        (admits, allowed) in option_table(6, 3),
        x in 0usize..3,
        actions in 1usize..5,
    ) {
        let options = options_from(&admits, &allowed);
        let n = options.len();
        let obs = Observation::one_hot(x, 3);
        let available = available_options(&obs, None, &options);
        match build_mask(MaskContext::TopLevel(None), &available, actions, n) {
            Ok(mask) => {
                prop_assert!(!mask.is_degenerate());
                let (end, cont) = mask.rows();
                prop_assert!(end.iter().all(|&e| e == 0));
                for i in 0..n {
                    prop_assert_eq!(cont[i] == 1, available.contains(&OptionId(i)));
                }
                prop_assert!(cont[n..].iter().all(|&e| e == 0));
            }
            Err(e) => {
                prop_assert!(available.is_empty());
                prop_assert_eq!(e, OptionsError::NoAvailableOption { prev: None });
            }
        }
        for i in 0..n {
            let mask = build_mask(MaskContext::InOption(OptionId(i)), &[], actions, n).unwrap();
            prop_assert_eq!(mask.entries().iter().filter(|&&e| e == 1).count(), 2 * actions);
            prop_assert!(mask.get(mask.index(Row::End, Column::Action(actions - 1))));
            prop_assert!(!mask.get(mask.index(Row::Cont, Column::Option(OptionId(i)))));
        }
    }

    #[test]
    fn returns_satisfy_the_recursion(
        rewards in prop::collection::vec(-10.0f64..10.0, 0..40),
        gamma in 0.0f64..=1.0,
    ) {
        let r = discounted_returns(&rewards, gamma);
        prop_assert_eq!(r.len(), rewards.len());
        for t in 0..rewards.len() {
            let next = r.get(t + 1).copied().unwrap_or(0.0);
            prop_assert!((r[t] - (rewards[t] + gamma * next)).abs() < 1e-9);
        }
        if gamma == 1.0 && !rewards.is_empty() {
            prop_assert!((r[0] - rewards.iter().sum::<f64>()).abs() < 1e-9);
        }
    }

    #[test]
    fn universe_sets_admit_everything_the_predicate_allows(
        (admits, allowed) in option_table(5, 3),
        x in 0usize..3,
        prev_slot in 0usize..6,
    ) {
        let options = without_oois(&options_from(&admits, &allowed));
        let n = options.len();
        let prev: Predecessor = if prev_slot == 0 || prev_slot > n { None } else { Some(OptionId(prev_slot - 1)) };
        let obs = Observation::one_hot(x, 3);
        let expected: Vec<OptionId> = (0..n).filter(|&i| allowed[i][x]).map(OptionId).collect();
        prop_assert_eq!(available_options(&obs, prev, &options), expected);
    }

    #[test]
    fn episode_reward_is_conserved(seed in any::<u64>()) {
        // Sum of per-record rewards equals the environment's total, and
        // top-level records carry none of it.
        let mut env = Gathering::new();
        let mut agent = ScriptedAgent::gathering_expert();
        let mut er = ChaCha8Rng::seed_from_u64(seed);
        let mut pr = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let t = run_episode(&mut env, &mut agent, &mut er, &mut pr, 10_000).unwrap();
        prop_assert!(!t.truncated);
        let in_option: f64 = t.steps.iter().filter(|s| s.context.is_some()).map(|s| s.reward).sum();
        prop_assert!(t.steps.iter().filter(|s| s.context.is_none()).all(|s| s.reward == 0.0));
        prop_assert_eq!(in_option, t.total_reward());
        prop_assert_eq!(t.steps.iter().filter(|s| s.context.is_some()).count(), t.env_steps);
    }
}

#[test]
fn no_ooi_options_differ_only_in_initiation() {
    let ooi = gathering::gathering_options();
    let plain = without_oois(&ooi);
    for (a, b) in ooi.iter().zip(&plain) {
        assert!(a.same_behaviour(b));
        assert!(matches!(b.policy, OptionPolicy::Fixed(_)));
        assert!(matches!(b.termination, Termination::Fixed(_)));
        assert_eq!(b.initiation.predecessors().count(), ooi.len() + 1);
    }
}

/// Agent that always picks the first open entry, to drive the executor.
struct FirstOpen(Vec<OptionSpec>, usize);

impl Agent for FirstOpen {
    fn options(&self) -> &[OptionSpec] {
        &self.0
    }
    fn action_count(&self) -> usize {
        self.1
    }
    fn distribution(&mut self, _: &Observation, _: Option<OptionId>, mask: &MaskVector) -> Result<Vec<f64>, OptionsError> {
        let mut y = vec![0.0; mask.len()];
        let i = mask.entries().iter().position(|&e| e == 1).ok_or(OptionsError::DegenerateMask)?;
        y[i] = 1.0;
        Ok(y)
    }
}

#[test]
fn step_limit_truncates() {
    let mut env = ooi_core::envs::treemaze::TreeMaze::new();
    // FORWARD forever never reaches a leaf.
    let options = vec![OptionSpec::learned(OptionId(0), InitiationSet::universe(1))];
    let mut agent = FirstOpen(options, 3);
    let mut er = ChaCha8Rng::seed_from_u64(0);
    let mut pr = ChaCha8Rng::seed_from_u64(1);
    let t = run_episode(&mut env, &mut agent, &mut er, &mut pr, 25).unwrap();
    assert!(t.truncated);
    assert_eq!(t.env_steps, 25);
}

#[test]
fn fixed_policy_with_learned_termination_is_rejected() {
    let mut env = Gathering::new();
    let policy: ooi_core::options::FixedPolicy = Arc::new(|_: &Observation| {
        let mut p = vec![0.0; gathering::ACTION_COUNT];
        p[4] = 1.0;
        p
    });
    let spec = OptionSpec {
        id: OptionId(0),
        policy: OptionPolicy::Fixed(policy),
        termination: Termination::Learned,
        initiation: InitiationSet::universe(1),
    };
    let mut agent = FirstOpen(vec![spec], gathering::ACTION_COUNT);
    let mut er = ChaCha8Rng::seed_from_u64(0);
    let mut pr = ChaCha8Rng::seed_from_u64(1);
    let err = run_episode(&mut env, &mut agent, &mut er, &mut pr, 10).unwrap_err();
    assert_eq!(err, OptionsError::UnsupportedOption(OptionId(0)));
}
