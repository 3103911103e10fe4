//! Finite state controllers and their compilation into OOI option sets.
//!
//! An FSC `⟨N, ψ, η, η0⟩` samples its first node from `η0(x_1, ·)`, later
//! nodes from `η(n_{t−1}, x_t, ·)`, and emits an action from `ψ(n_t, ·)`.
//!
//! [`compile_fsc`] builds one single-step option per FSC edge `⟨n′, n⟩` and
//! one per start node `⟨∅, n⟩`. Option `⟨n′, n⟩` emits `ψ(n, ·)`, may only
//! follow an option ending in `n′`, and is chosen by the top level with
//! probability `η(n′, x, n)`. The initiation sets carry the node memory, so
//! the top-level policy stays memoryless.
//!
//! [`fsc_trace`] and [`options_trace`] compute exact per-step action
//! marginals by forward propagation over hidden state; they are the
//! equivalence oracle for the compilation.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::options::{
    available_options, Agent, FixedPolicy, FixedTermination, InitiationSet, MaskVector, Observation, OptionId, OptionPolicy,
    OptionSpec, OptionsError, Termination,
};
use crate::sample::sample_index;

pub const ROW_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_STATE_BOUND: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FscError {
    #[error("table {table} has {found} entries, expected {expected}")]
    Shape { table: &'static str, expected: usize, found: usize },
    #[error("row {row} of {table} is not a probability distribution")]
    InvalidRow { table: &'static str, row: usize },
    #[error("controller needs at least one node, observation and action")]
    Empty,
    #[error("observation {0} is outside the controller's alphabet")]
    UnknownObservation(usize),
    #[error("hidden-state support {support} exceeds the bound {bound}")]
    StateExplosion { support: usize, bound: usize },
    #[error("no option has positive top-level probability at step {step}")]
    NoTopLevelChoice { step: usize },
    #[error("fixed policy of option {0} is not a distribution over the action set")]
    InvalidOptionPolicy(OptionId),
    #[error("option {0} is not fixed and cannot be traced")]
    NotTabular(OptionId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fsc {
    node_count: usize,
    observation_count: usize,
    action_count: usize,
    /// node × action
    psi: Vec<f64>,
    /// node × observation × node
    eta: Vec<f64>,
    /// observation × node
    eta0: Vec<f64>,
}

fn check_rows(table: &'static str, data: &[f64], width: usize) -> Result<(), FscError> {
    for (row, chunk) in data.chunks(width).enumerate() {
        let sum: f64 = chunk.iter().sum();
        if chunk.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) || (sum - 1.0).abs() > ROW_TOLERANCE {
            return Err(FscError::InvalidRow { table, row });
        }
    }
    Ok(())
}

fn check_len(table: &'static str, data: &[f64], expected: usize) -> Result<(), FscError> {
    if data.len() != expected {
        return Err(FscError::Shape { table, expected, found: data.len() });
    }
    Ok(())
}

impl Fsc {
    /// Tables are row-major: `psi[node][action]`, `eta[node][obs][node]`,
    /// `eta0[obs][node]`.
    pub fn new(
        node_count: usize,
        observation_count: usize,
        action_count: usize,
        psi: Vec<f64>,
        eta: Vec<f64>,
        eta0: Vec<f64>,
    ) -> Result<Self, FscError> {
        if node_count == 0 || observation_count == 0 || action_count == 0 {
            return Err(FscError::Empty);
        }
        check_len("psi", &psi, node_count * action_count)?;
        check_len("eta", &eta, node_count * observation_count * node_count)?;
        check_len("eta0", &eta0, observation_count * node_count)?;
        check_rows("psi", &psi, action_count)?;
        check_rows("eta", &eta, node_count)?;
        check_rows("eta0", &eta0, node_count)?;
        Ok(Self { node_count, observation_count, action_count, psi, eta, eta0 })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn observation_count(&self) -> usize {
        self.observation_count
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn psi(&self, node: usize) -> &[f64] {
        &self.psi[node * self.action_count..(node + 1) * self.action_count]
    }

    pub fn eta(&self, node: usize, obs: usize) -> &[f64] {
        let start = (node * self.observation_count + obs) * self.node_count;
        &self.eta[start..start + self.node_count]
    }

    pub fn eta0(&self, obs: usize) -> &[f64] {
        &self.eta0[obs * self.node_count..(obs + 1) * self.node_count]
    }

    /// Successor distribution, with `η(∅, x, ·) = η0(x, ·)`.
    pub fn successor(&self, node: Option<usize>, obs: usize) -> &[f64] {
        match node {
            None => self.eta0(obs),
            Some(n) => self.eta(n, obs),
        }
    }

    pub fn tables(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.psi, &self.eta, &self.eta0)
    }

    /// One controller step: next node from `η`, then an action from `ψ`.
    pub fn step<R: RngCore + ?Sized>(
        &self,
        node: Option<usize>,
        obs: usize,
        rng: &mut R,
    ) -> Result<(usize, usize), FscError> {
        if obs >= self.observation_count {
            return Err(FscError::UnknownObservation(obs));
        }
        let next = sample_index(self.successor(node, obs), rng).expect("rows are distributions");
        let action = sample_index(self.psi(next), rng).expect("rows are distributions");
        Ok((next, action))
    }
}

/// Free-function form of [`Fsc::step`].
pub fn fsc_step<R: RngCore + ?Sized>(
    fsc: &Fsc,
    node: Option<usize>,
    obs: usize,
    rng: &mut R,
) -> Result<(usize, usize), FscError> {
    fsc.step(node, obs, rng)
}

/// Two nodes, one uninformative observation, actions A and B: the
/// controller alternates A, B, A, B, ... starting with A.
pub fn make_alternator() -> Fsc {
    Fsc::new(
        2,
        1,
        2,
        vec![1.0, 0.0, 0.0, 1.0],
        vec![0.0, 1.0, 1.0, 0.0],
        vec![1.0, 0.0],
    )
    .expect("alternator tables are valid")
}

/// Random controller with Dirichlet(1)-like rows, a fraction of them made
/// deterministic so traces exercise point masses too.
pub fn random_fsc<R: RngCore + ?Sized>(
    rng: &mut R,
    node_count: usize,
    observation_count: usize,
    action_count: usize,
) -> Fsc {
    fn row<R: RngCore + ?Sized>(rng: &mut R, width: usize) -> Vec<f64> {
        let mut r = vec![0.0; width];
        if rng.gen_bool(0.25) {
            r[rng.gen_range(0..width)] = 1.0;
            return r;
        }
        for v in r.iter_mut() {
            *v = -libm::log(1.0 - rng.gen::<f64>());
        }
        let s: f64 = r.iter().sum();
        r.iter_mut().for_each(|v| *v /= s);
        r
    }
    let psi = (0..node_count).flat_map(|_| row(rng, action_count)).collect();
    let eta = (0..node_count * observation_count).flat_map(|_| row(rng, node_count)).collect();
    let eta0 = (0..observation_count).flat_map(|_| row(rng, node_count)).collect();
    Fsc::new(node_count, observation_count, action_count, psi, eta, eta0).expect("rows are normalised")
}

pub fn observation(code: usize, observation_count: usize) -> Observation {
    Observation::one_hot(code, observation_count)
}

/// An FSC expressed as single-step options with OOIs and a memoryless
/// top-level table `μ`.
#[derive(Clone, Debug)]
pub struct CompiledController {
    node_count: usize,
    observation_count: usize,
    action_count: usize,
    pub options: Vec<OptionSpec>,
    /// observation × option
    mu: Vec<f64>,
}

impl CompiledController {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn observation_count(&self) -> usize {
        self.observation_count
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    /// Option for edge `⟨from, to⟩`.
    pub fn edge_option(&self, from: usize, to: usize) -> OptionId {
        OptionId(from * self.node_count + to)
    }

    /// Option `⟨∅, node⟩`.
    pub fn start_option(&self, node: usize) -> OptionId {
        OptionId(self.node_count * self.node_count + node)
    }

    /// FSC node an option moves into.
    pub fn destination(&self, option: OptionId) -> usize {
        option.0 % self.node_count
    }

    pub fn mu(&self, obs: usize, option: OptionId) -> f64 {
        self.mu[obs * self.options.len() + option.0]
    }

    /// The same options with every initiation set widened to the full
    /// predecessor universe.
    pub fn without_oois(&self) -> Vec<OptionSpec> {
        crate::options::without_oois(&self.options)
    }
}

/// Builds the option set and top-level table equivalent to `fsc`.
pub fn compile_fsc(fsc: &Fsc) -> CompiledController {
    let n = fsc.node_count;
    let total = n * n + n;
    let once: FixedTermination = Arc::new(|_: &Observation| 1.0);
    let emit: Vec<FixedPolicy> = (0..n)
        .map(|node| {
            let row = fsc.psi(node).to_vec();
            Arc::new(move |_: &Observation| row.clone()) as _
        })
        .collect();

    let mut options = Vec::with_capacity(total);
    for from in 0..n {
        for to in 0..n {
            // Predecessors ⟨m, from⟩ for every m, including the start option ⟨∅, from⟩.
            let preds = (0..n)
                .map(|m| Some(OptionId(m * n + from)))
                .chain([Some(OptionId(n * n + from))]);
            let initiation = InitiationSet::from_predecessors(total, preds).expect("indices are in range");
            options.push(OptionSpec::fixed(OptionId(from * n + to), emit[to].clone(), once.clone(), initiation));
        }
    }
    for node in 0..n {
        let initiation = InitiationSet::from_predecessors(total, [None]).expect("indices are in range");
        options.push(OptionSpec::fixed(OptionId(n * n + node), emit[node].clone(), once.clone(), initiation));
    }

    let mut mu = vec![0.0; fsc.observation_count * total];
    for x in 0..fsc.observation_count {
        let row = &mut mu[x * total..(x + 1) * total];
        for from in 0..n {
            row[from * n..(from + 1) * n].copy_from_slice(fsc.eta(from, x));
        }
        row[n * n..].copy_from_slice(fsc.eta0(x));
    }

    CompiledController {
        node_count: n,
        observation_count: fsc.observation_count,
        action_count: fsc.action_count,
        options,
        mu,
    }
}

/// The compiled top level as an [`Agent`]: `μ(x, ·)` restricted to the mask.
impl Agent for CompiledController {
    fn options(&self) -> &[OptionSpec] {
        &self.options
    }

    fn action_count(&self) -> usize {
        self.action_count
    }

    fn distribution(
        &mut self,
        obs: &Observation,
        _context: Option<OptionId>,
        mask: &MaskVector,
    ) -> Result<Vec<f64>, OptionsError> {
        let mut y = vec![0.0; mask.len()];
        let o = self.options.len();
        for (i, slot) in y.iter_mut().enumerate() {
            if mask.get(i) {
                if let crate::options::Column::Option(id) = mask.decode(i).column {
                    *slot = self.mu[obs.code * o + id.0];
                }
            }
        }
        let s: f64 = y.iter().sum();
        if !(s > 0.0) {
            return Err(OptionsError::DegenerateMask);
        }
        y.iter_mut().for_each(|v| *v /= s);
        Ok(y)
    }
}

/// Exact per-step action marginals of `fsc` given an observation sequence.
pub fn fsc_trace(fsc: &Fsc, observations: &[usize], state_bound: usize) -> Result<Vec<Vec<f64>>, FscError> {
    let n = fsc.node_count;
    let mut belief: Option<Vec<f64>> = None;
    let mut trace = Vec::with_capacity(observations.len());
    for &x in observations {
        if x >= fsc.observation_count {
            return Err(FscError::UnknownObservation(x));
        }
        let next = match &belief {
            None => fsc.eta0(x).to_vec(),
            Some(b) => {
                let mut next = vec![0.0; n];
                for (m, &p) in b.iter().enumerate() {
                    if p > 0.0 {
                        for (slot, &q) in next.iter_mut().zip(fsc.eta(m, x)) {
                            *slot += p * q;
                        }
                    }
                }
                next
            }
        };
        let support = next.iter().filter(|&&p| p > 0.0).count();
        if support > state_bound {
            return Err(FscError::StateExplosion { support, bound: state_bound });
        }
        let mut emitted = vec![0.0; fsc.action_count];
        for (node, &p) in next.iter().enumerate() {
            for (slot, &q) in emitted.iter_mut().zip(fsc.psi(node)) {
                *slot += p * q;
            }
        }
        trace.push(emitted);
        belief = Some(next);
    }
    Ok(trace)
}

/// Exact per-step action marginals of a set of fixed options driven by a
/// memoryless top-level table `top(x, ω)`, restricted at every decision to
/// the options available after the previous one.
///
/// Hidden state is the option executed at the previous step (or `∅`). An
/// option that ran last step continues with probability `1 − β(x)`.
pub fn options_trace<F>(
    options: &[OptionSpec],
    top: F,
    observation_count: usize,
    action_count: usize,
    observations: &[usize],
    state_bound: usize,
) -> Result<Vec<Vec<f64>>, FscError>
where
    F: Fn(usize, OptionId) -> f64,
{
    let k = options.len();
    let obs_table: Vec<Observation> = (0..observation_count).map(|x| observation(x, observation_count)).collect();
    // slot 0: ∅, slot i + 1: option i
    let mut state = vec![0.0; k + 1];
    state[0] = 1.0;
    let mut trace = Vec::with_capacity(observations.len());
    for (t, &x) in observations.iter().enumerate() {
        let obs = obs_table.get(x).ok_or(FscError::UnknownObservation(x))?;
        let mut next = vec![0.0; k + 1];
        for (slot, &p) in state.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let prev = (slot > 0).then(|| OptionId(slot - 1));
            let stop = match prev {
                None => 1.0,
                Some(id) => match &options[id.0].termination {
                    Termination::Fixed(beta) => beta(obs),
                    Termination::Learned => return Err(FscError::NotTabular(id)),
                },
            };
            if stop < 1.0 {
                next[slot] += p * (1.0 - stop);
            }
            if stop > 0.0 {
                let available = available_options(obs, prev, options);
                let total: f64 = available.iter().map(|&id| top(x, id)).sum();
                if !(total > 0.0) {
                    return Err(FscError::NoTopLevelChoice { step: t });
                }
                for id in available {
                    next[id.0 + 1] += p * stop * top(x, id) / total;
                }
            }
        }
        let support = next.iter().filter(|&&p| p > 0.0).count();
        if support > state_bound {
            return Err(FscError::StateExplosion { support, bound: state_bound });
        }
        let mut emitted = vec![0.0; action_count];
        for (slot, &p) in next.iter().enumerate().skip(1) {
            if p == 0.0 {
                continue;
            }
            let id = OptionId(slot - 1);
            let probs = match &options[id.0].policy {
                OptionPolicy::Fixed(pi) => pi(obs),
                OptionPolicy::Learned => return Err(FscError::NotTabular(id)),
            };
            if probs.len() != action_count {
                return Err(FscError::InvalidOptionPolicy(id));
            }
            for (e, q) in emitted.iter_mut().zip(probs) {
                *e += p * q;
            }
        }
        trace.push(emitted);
        state = next;
    }
    Ok(trace)
}

/// Trace of a compiled controller under its own top-level table.
pub fn compiled_trace(
    controller: &CompiledController,
    observations: &[usize],
    state_bound: usize,
) -> Result<Vec<Vec<f64>>, FscError> {
    options_trace(
        &controller.options,
        |x, id| controller.mu(x, id),
        controller.observation_count,
        controller.action_count,
        observations,
        state_bound,
    )
}

/// Either side of the equivalence check.
#[derive(Clone, Copy, Debug)]
pub enum Controller<'a> {
    Fsc(&'a Fsc),
    Compiled(&'a CompiledController),
}

pub fn action_distribution_trace(
    controller: Controller<'_>,
    observations: &[usize],
) -> Result<Vec<Vec<f64>>, FscError> {
    match controller {
        Controller::Fsc(f) => fsc_trace(f, observations, DEFAULT_STATE_BOUND),
        Controller::Compiled(c) => compiled_trace(c, observations, DEFAULT_STATE_BOUND),
    }
}

/// Largest element-wise difference between two traces of equal shape.
pub fn trace_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len(), "traces must have the same length");
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| {
            assert_eq!(x.len(), y.len(), "trace rows must have the same width");
            x.iter().zip(y).map(|(p, q)| libm::fabs(p - q))
        })
        .fold(0.0, f64::max)
}

/// Outcome of searching all deterministic memoryless top-level policies.
#[derive(Clone, Debug, PartialEq)]
pub struct MemorylessSearch {
    /// Number of policies enumerated.
    pub policies: usize,
    /// Longest prefix of the target reproduced by any policy.
    pub best_prefix: usize,
    /// A policy achieving it, as one option per observation.
    pub best_policy: Vec<OptionId>,
}

/// Enumerates every map from observation to option, traces it over
/// `options` and reports the longest matched prefix of `target`. Policies
/// that leave a decision without any admissible option stop matching there.
pub fn memoryless_search(
    options: &[OptionSpec],
    observation_count: usize,
    action_count: usize,
    observations: &[usize],
    target: &[Vec<f64>],
    tolerance: f64,
) -> Result<MemorylessSearch, FscError> {
    let k = options.len();
    let total = k.checked_pow(observation_count as u32).filter(|&t| t <= DEFAULT_STATE_BOUND).ok_or(
        FscError::StateExplosion { support: usize::MAX, bound: DEFAULT_STATE_BOUND },
    )?;
    let mut best = MemorylessSearch { policies: total, best_prefix: 0, best_policy: vec![OptionId(0); observation_count] };
    let mut policy = vec![OptionId(0); observation_count];
    for code in 0..total {
        let mut c = code;
        for slot in policy.iter_mut() {
            *slot = OptionId(c % k);
            c /= k;
        }
        let mut prefix = 0;
        for len in 1..=observations.len() {
            let trace = match options_trace(
                options,
                |x, id| if policy[x] == id { 1.0 } else { 0.0 },
                observation_count,
                action_count,
                &observations[..len],
                DEFAULT_STATE_BOUND,
            ) {
                Ok(t) => t,
                Err(FscError::NoTopLevelChoice { .. }) => break,
                Err(e) => return Err(e),
            };
            if trace_distance(&trace[len - 1..], &target[len - 1..len]) > tolerance {
                break;
            }
            prefix = len;
        }
        if prefix > best.best_prefix {
            best.best_prefix = prefix;
            best.best_policy = policy.clone();
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alternator_step_from_a_goes_to_b() {
        let f = make_alternator();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(f.step(Some(0), 0, &mut rng).unwrap(), (1, 1));
        assert_eq!(f.step(None, 0, &mut rng).unwrap(), (0, 0));
    }

    #[test]
    fn unknown_observation_is_reported() {
        let f = make_alternator();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(f.step(Some(0), 1, &mut rng), Err(FscError::UnknownObservation(1)));
        assert_eq!(fsc_trace(&f, &[0, 3], 10), Err(FscError::UnknownObservation(3)));
    }

    #[test]
    fn single_node_is_a_constant_policy() {
        let f = Fsc::new(1, 2, 3, vec![0.0, 1.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for x in [0, 1, 1, 0] {
            assert_eq!(f.step(Some(0), x, &mut rng).unwrap(), (0, 1));
        }
        let c = compile_fsc(&f);
        assert_eq!(c.options.len(), 2);
        let trace = compiled_trace(&c, &[0, 1, 1, 0], DEFAULT_STATE_BOUND).unwrap();
        assert!(trace.iter().all(|row| row == &vec![0.0, 1.0, 0.0]));
    }

    #[test]
    fn uniform_two_node_frequencies() {
        let f = Fsc::new(2, 1, 2, vec![0.5; 4], vec![0.5; 4], vec![0.5; 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut ones = 0;
        let mut node = None;
        for _ in 0..10_000 {
            let (n, _) = f.step(node, 0, &mut rng).unwrap();
            ones += n;
            node = Some(n);
        }
        let freq = ones as f64 / 10_000.0;
        assert!((freq - 0.5).abs() < 0.02, "{freq}");
    }

    #[test]
    fn invalid_rows_are_rejected() {
        let e = Fsc::new(1, 1, 2, vec![0.5, 0.6], vec![1.0], vec![1.0]).unwrap_err();
        assert_eq!(e, FscError::InvalidRow { table: "psi", row: 0 });
        let e = Fsc::new(1, 1, 2, vec![0.5, 0.5], vec![1.0, 0.0], vec![1.0]).unwrap_err();
        assert!(matches!(e, FscError::Shape { table: "eta", .. }));
        assert_eq!(Fsc::new(0, 1, 1, vec![], vec![], vec![]).unwrap_err(), FscError::Empty);
    }

    #[test]
    fn alternator_compiles_to_six_single_step_options() {
        let c = compile_fsc(&make_alternator());
        assert_eq!(c.options.len(), 6);
        let obs = observation(0, 1);
        for o in &c.options {
            match &o.termination {
                Termination::Fixed(beta) => assert_eq!(beta(&obs), 1.0),
                Termination::Learned => panic!("compiled options are fixed"),
            }
        }
    }

    #[test]
    fn alternator_traces_alternate() {
        let f = make_alternator();
        let a = vec![1.0, 0.0];
        let b = vec![0.0, 1.0];
        let expected = vec![a.clone(), b.clone(), a.clone(), b.clone(), a, b];
        assert_eq!(fsc_trace(&f, &[0; 6], 4).unwrap(), expected);
        assert_eq!(compiled_trace(&compile_fsc(&f), &[0; 6], 4).unwrap(), expected);
    }

    #[test]
    fn identical_emissions_make_a_constant_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base = random_fsc(&mut rng, 3, 2, 3);
        let (_, eta, eta0) = base.tables();
        let psi: Vec<f64> = [0.2, 0.3, 0.5].repeat(3);
        let f = Fsc::new(3, 2, 3, psi, eta.to_vec(), eta0.to_vec()).unwrap();
        for row in fsc_trace(&f, &[0, 1, 1, 0, 1], DEFAULT_STATE_BOUND).unwrap() {
            assert!(trace_distance(&[row], &[vec![0.2, 0.3, 0.5]]) < 1e-12);
        }
    }

    #[test]
    fn state_bound_is_enforced() {
        let f = Fsc::new(2, 1, 1, vec![1.0, 1.0], vec![0.5; 4], vec![0.5, 0.5]).unwrap();
        assert_eq!(fsc_trace(&f, &[0], 1), Err(FscError::StateExplosion { support: 2, bound: 1 }));
    }

    #[test]
    fn mu_is_zero_off_the_current_node() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_fsc(&mut rng, 3, 2, 2);
        let c = compile_fsc(&f);
        for x in 0..2 {
            let obs = observation(x, 2);
            for prev in 0..c.options.len() {
                let available = available_options(&obs, Some(OptionId(prev)), &c.options);
                let node = c.destination(OptionId(prev));
                for id in &available {
                    assert!(id.0 < 9 && id.0 / 3 == node);
                }
                let sum: f64 = available.iter().map(|&id| c.mu(x, id)).sum();
                assert!((sum - 1.0).abs() < 1e-9);
            }
            let start: f64 = available_options(&obs, None, &c.options).iter().map(|&id| c.mu(x, id)).sum();
            assert!((start - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn alternator_needs_oois() {
        let c = compile_fsc(&make_alternator());
        let target = fsc_trace(&make_alternator(), &[0; 6], 4).unwrap();
        let without = memoryless_search(&c.without_oois(), 1, 2, &[0; 6], &target, 1e-9).unwrap();
        assert_eq!(without.policies, 6);
        assert_eq!(without.best_prefix, 1);
        assert_eq!(trace_distance(&compiled_trace(&c, &[0; 6], 8).unwrap(), &target), 0.0);
    }
}
