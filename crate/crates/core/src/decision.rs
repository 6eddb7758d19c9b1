//! Two-stage decision process: a policy stage followed by a transmission
//! configuration stage, either per agent (individual mode) or over the
//! product action space of all agents (joint mode).
//!
//! Policy-stage rewards are utilities at the reference configuration. Config
//! stage rewards are utility differences against that reference, so the
//! reference entry is always exactly zero.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pls::{ActionProfile, AgentAction, MixedRadix};
use crate::utility::UtilityBreakdown;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionMode {
    /// Each agent decides against the other agents' previous-slot actions.
    Individual,
    /// One centralized decision over the product of all agents' actions.
    Joint,
}

impl DecisionMode {
    pub fn name(self) -> &'static str {
        match self {
            DecisionMode::Individual => "individual",
            DecisionMode::Joint => "joint",
        }
    }
}

impl fmt::Display for DecisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecisionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "individual" => Ok(DecisionMode::Individual),
            "joint" => Ok(DecisionMode::Joint),
            other => Err(Error::config(format!(
                "unknown decision mode `{other}` (expected individual or joint)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    pub mode: DecisionMode,
    pub policy_actions: usize,
    pub config_actions: usize,
    /// Policy states, configuration states and the current operational state.
    pub states: usize,
}

/// Per-agent state space (individual) or the single product space (joint).
pub fn build_state_space(mode: DecisionMode, policies: &[usize], configs: &[usize]) -> Result<Vec<StateSpace>> {
    if policies.is_empty() || policies.len() != configs.len() {
        return Err(Error::config("policy and config counts must be given for every agent"));
    }
    if policies.iter().chain(configs).any(|&c| c == 0) {
        return Err(Error::config("every agent needs at least one policy and one config"));
    }
    let space = |n: usize, m: usize| StateSpace {
        mode,
        policy_actions: n,
        config_actions: m,
        states: n + m + 1,
    };
    Ok(match mode {
        DecisionMode::Individual => policies.iter().zip(configs).map(|(&n, &m)| space(n, m)).collect(),
        DecisionMode::Joint => vec![space(policies.iter().product(), configs.iter().product())],
    })
}

/// A decision-making entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decider {
    Agent(usize),
    Joint,
}

/// Scores action profiles slot by slot.
pub trait Environment {
    /// Per-slot random state (a fading draw), shared by every candidate
    /// profile evaluated in that slot.
    type Slot;

    fn agent_count(&self) -> usize;
    fn policy_count(&self, agent: usize) -> usize;
    fn config_count(&self, agent: usize) -> usize;
    fn reference_config(&self, agent: usize) -> usize;
    /// The action profile assumed to precede slot 1.
    fn initial_profile(&self) -> ActionProfile;
    fn draw_slot<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Self::Slot>;
    /// Scores `profile` at slot `t`, with `previous` the profile of slot `t−1`.
    fn evaluate(&self, slot: &Self::Slot, profile: &ActionProfile, previous: &ActionProfile, t: usize) -> UtilityBreakdown;

    fn policy_label(&self, _agent: usize, k: usize) -> String {
        k.to_string()
    }

    fn config_label(&self, _agent: usize, m: usize) -> String {
        m.to_string()
    }
}

/// Product action spaces of the joint decider.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointActions {
    pub policies: MixedRadix,
    pub configs: MixedRadix,
}

impl JointActions {
    pub fn of<E: Environment>(env: &E) -> Self {
        let n = env.agent_count();
        Self {
            policies: MixedRadix::new((0..n).map(|i| env.policy_count(i)).collect()),
            configs: MixedRadix::new((0..n).map(|i| env.config_count(i)).collect()),
        }
    }

    pub fn profile(&self, policy_index: usize, config_index: usize) -> ActionProfile {
        let k = self.policies.decode(policy_index);
        let l = self.configs.decode(config_index);
        ActionProfile(k.into_iter().zip(l).map(|(k, l)| AgentAction::new(k, l)).collect())
    }

    pub fn reference_config_index<E: Environment>(&self, env: &E) -> usize {
        let refs: Vec<usize> = (0..env.agent_count()).map(|i| env.reference_config(i)).collect();
        self.configs.encode(&refs)
    }

    pub fn split(&self, profile: &ActionProfile) -> (usize, usize) {
        let k: Vec<usize> = profile.policies().collect();
        let l: Vec<usize> = profile.0.iter().map(|a| a.config).collect();
        (self.policies.encode(&k), self.configs.encode(&l))
    }
}

/// `1` when the policy is kept, `delta_switch` when it changes.
pub fn transition_penalty(k_prev: usize, k_next: usize, delta_switch: f64) -> f64 {
    if k_prev == k_next {
        1.0
    } else {
        delta_switch
    }
}

fn candidate<E: Environment>(
    env: &E,
    decider: Decider,
    previous: &ActionProfile,
    policy: usize,
    config: Option<usize>,
    joint: Option<&JointActions>,
) -> ActionProfile {
    match decider {
        Decider::Agent(i) => {
            let m = config.unwrap_or_else(|| env.reference_config(i));
            previous.with_action(i, AgentAction::new(policy, m))
        }
        Decider::Joint => {
            let joint = joint.expect("joint actions");
            let m = config.unwrap_or_else(|| joint.reference_config_index(env));
            joint.profile(policy, m)
        }
    }
}

fn score(decider: Decider, b: &UtilityBreakdown) -> f64 {
    match decider {
        Decider::Agent(i) => b.agents[i].utility,
        Decider::Joint => b.network_utility,
    }
}

/// Reward of every policy action: the decider's utility with the reference
/// configuration. Other agents stay at their `previous` actions in individual
/// mode.
pub fn policy_stage_rewards<E: Environment>(
    env: &E,
    slot: &E::Slot,
    decider: Decider,
    previous: &ActionProfile,
    t: usize,
) -> Vec<f64> {
    let joint = matches!(decider, Decider::Joint).then(|| JointActions::of(env));
    let count = match decider {
        Decider::Agent(i) => env.policy_count(i),
        Decider::Joint => joint.as_ref().map(|j| j.policies.len()).unwrap_or(0),
    };
    (0..count)
        .map(|k| {
            let p = candidate(env, decider, previous, k, None, joint.as_ref());
            score(decider, &env.evaluate(slot, &p, previous, t))
        })
        .collect()
}

/// Reward of every configuration action after `policy` was chosen:
/// `U(policy, m) − U(policy, reference)`.
pub fn config_stage_rewards<E: Environment>(
    env: &E,
    slot: &E::Slot,
    decider: Decider,
    policy: usize,
    previous: &ActionProfile,
    t: usize,
) -> Vec<f64> {
    let joint = matches!(decider, Decider::Joint).then(|| JointActions::of(env));
    let (count, reference) = match decider {
        Decider::Agent(i) => (env.config_count(i), env.reference_config(i)),
        Decider::Joint => {
            let j = joint.as_ref().expect("joint actions");
            (j.configs.len(), j.reference_config_index(env))
        }
    };
    let utility = |m: usize| {
        let p = candidate(env, decider, previous, policy, Some(m), joint.as_ref());
        score(decider, &env.evaluate(slot, &p, previous, t))
    };
    let base = utility(reference);
    (0..count)
        .map(|m| if m == reference { 0.0 } else { utility(m) - base })
        .collect()
}

/// Rewards of one chosen pair `(k, m)`: `(U(k, l_ref), U(k, m) − U(k, l_ref))`.
#[allow(clippy::too_many_arguments)]
pub fn chosen_rewards<E: Environment>(
    env: &E,
    slot: &E::Slot,
    decider: Decider,
    joint: Option<&JointActions>,
    previous: &ActionProfile,
    k: usize,
    m: usize,
    t: usize,
) -> (f64, f64) {
    let reference = match decider {
        Decider::Agent(i) => env.reference_config(i),
        Decider::Joint => joint.expect("joint actions").reference_config_index(env),
    };
    let at = |m: usize| {
        let p = candidate(env, decider, previous, k, Some(m), joint);
        score(decider, &env.evaluate(slot, &p, previous, t))
    };
    let base = at(reference);
    let diff = if m == reference { 0.0 } else { at(m) - base };
    (base, diff)
}

/// Lowest index among the maxima.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Greedy two-stage pick on exact rewards: best policy at the reference
/// configuration, then the best configuration for that policy.
pub fn greedy_two_stage<E: Environment>(
    env: &E,
    slot: &E::Slot,
    decider: Decider,
    previous: &ActionProfile,
    t: usize,
) -> (usize, usize) {
    let k = argmax(&policy_stage_rewards(env, slot, decider, previous, t));
    let m = argmax(&config_stage_rewards(env, slot, decider, k, previous, t));
    (k, m)
}

/// Exhaustive argmax of the decider's utility over all (policy, config) pairs.
pub fn exhaustive_best<E: Environment>(
    env: &E,
    slot: &E::Slot,
    decider: Decider,
    previous: &ActionProfile,
    t: usize,
) -> (usize, usize) {
    let joint = matches!(decider, Decider::Joint).then(|| JointActions::of(env));
    let (n, m) = match decider {
        Decider::Agent(i) => (env.policy_count(i), env.config_count(i)),
        Decider::Joint => {
            let j = joint.as_ref().expect("joint actions");
            (j.policies.len(), j.configs.len())
        }
    };
    let mut best = (0, 0);
    let mut best_u = f64::NEG_INFINITY;
    for k in 0..n {
        for l in 0..m {
            let p = candidate(env, decider, previous, k, Some(l), joint.as_ref());
            let u = score(decider, &env.evaluate(slot, &p, previous, t));
            if u > best_u {
                best_u = u;
                best = (k, l);
            }
        }
    }
    best
}
