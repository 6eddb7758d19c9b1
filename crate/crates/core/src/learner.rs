//! Tabular Q-learning over the two-stage decision process.
//!
//! Each decider owns one table: a policy-stage row (the "last state" row) and
//! one config-stage row per policy. Within a slot the policy stage is updated
//! first, bootstrapping from the chosen policy's config row; the config stage
//! is terminal.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::derive_stream;
use crate::decision::{argmax, chosen_rewards, Decider, DecisionMode, Environment, JointActions};
use crate::error::{Error, Result};
use crate::pls::{ActionProfile, AgentAction};
use crate::utility::UtilityBreakdown;

pub const TRAIN_SLOT_STREAM: &str = "train-slot";
pub const EVAL_SLOT_STREAM: &str = "eval-slot";
pub const EXPLORE_STREAM: &str = "explore";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    pub discount: f64,
    pub learning_rate: f64,
    pub epsilon: f64,
    pub episodes: usize,
    /// Slots per episode (frame).
    pub slots: usize,
}

impl Hyperparams {
    pub const fn individual() -> Self {
        Self {
            discount: 0.75,
            learning_rate: 0.02,
            epsilon: 0.95,
            episodes: 200,
            slots: 50,
        }
    }

    pub const fn joint() -> Self {
        Self {
            discount: 0.85,
            learning_rate: 0.035,
            epsilon: 0.7,
            episodes: 300,
            slots: 50,
        }
    }

    pub const fn for_mode(mode: DecisionMode) -> Self {
        match mode {
            DecisionMode::Individual => Self::individual(),
            DecisionMode::Joint => Self::joint(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(Error::config(format!("discount must lie in [0, 1], got {}", self.discount)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::config(format!("learning rate must lie in (0, 1], got {}", self.learning_rate)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if self.slots == 0 {
            return Err(Error::config("slots per episode must be at least 1"));
        }
        Ok(())
    }
}

/// One decider's Q-values and visit counts.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub policy: Vec<f64>,
    /// `[policy][config]`
    pub config: Vec<Vec<f64>>,
    pub policy_visits: Vec<u64>,
    pub config_visits: Vec<Vec<u64>>,
}

impl QTable {
    pub fn new(policies: usize, configs: usize) -> Self {
        Self {
            policy: vec![0.0; policies],
            config: vec![vec![0.0; configs]; policies],
            policy_visits: vec![0; policies],
            config_visits: vec![vec![0; configs]; policies],
        }
    }

    /// Greedy `(policy, config)`; ties go to the lowest index.
    pub fn greedy(&self) -> (usize, usize) {
        let k = argmax(&self.policy);
        (k, argmax(&self.config[k]))
    }

    pub fn total_visits(&self) -> u64 {
        self.policy_visits.iter().sum::<u64>() + self.config_visits.iter().flatten().sum::<u64>()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.policy.iter().chain(self.config.iter().flatten()).copied()
    }
}

/// Trained tables: one per agent (individual) or a single joint table.
type Labeler<'a> = Box<dyn Fn(usize) -> String + 'a>;

#[derive(Debug, Clone, PartialEq)]
pub struct QTables {
    pub mode: DecisionMode,
    pub tables: Vec<QTable>,
}

impl QTables {
    pub fn zeros<E: Environment>(env: &E, mode: DecisionMode) -> Self {
        let tables = match mode {
            DecisionMode::Individual => (0..env.agent_count())
                .map(|i| QTable::new(env.policy_count(i), env.config_count(i)))
                .collect(),
            DecisionMode::Joint => {
                let j = JointActions::of(env);
                vec![QTable::new(j.policies.len(), j.configs.len())]
            }
        };
        Self { mode, tables }
    }

    fn deciders(&self) -> Vec<Decider> {
        match self.mode {
            DecisionMode::Individual => (0..self.tables.len()).map(Decider::Agent).collect(),
            DecisionMode::Joint => vec![Decider::Joint],
        }
    }

    /// Writes the tables in long form: the policy-stage row under state
    /// `last_state`, then one row per (policy, config) pair.
    pub fn write_csv<E: Environment, W: Write>(&self, env: &E, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["decider", "stage", "state", "action", "value", "visits"])?;
        let joint = JointActions::of(env);
        for (d, table) in self.deciders().into_iter().zip(&self.tables) {
            let (name, policy_label, config_label): (String, Labeler<'_>, Labeler<'_>) =
                match d {
                    Decider::Agent(i) => (
                        format!("agent{}", i + 1),
                        Box::new(move |k| env.policy_label(i, k)),
                        Box::new(move |m| env.config_label(i, m)),
                    ),
                    Decider::Joint => {
                        let j1 = joint.clone();
                        let j2 = joint.clone();
                        (
                            "joint".to_string(),
                            Box::new(move |k| {
                                let digits = j1.policies.decode(k);
                                digits.iter().enumerate().map(|(i, &k)| env.policy_label(i, k)).collect::<Vec<_>>().join("+")
                            }),
                            Box::new(move |m| {
                                let digits = j2.configs.decode(m);
                                digits.iter().enumerate().map(|(i, &m)| env.config_label(i, m)).collect::<Vec<_>>().join("+")
                            }),
                        )
                    }
                };
            for (k, v) in table.policy.iter().enumerate() {
                w.write_record([
                    name.clone(),
                    "policy".into(),
                    "last_state".into(),
                    policy_label(k),
                    v.to_string(),
                    table.policy_visits[k].to_string(),
                ])?;
            }
            for (k, row) in table.config.iter().enumerate() {
                for (m, v) in row.iter().enumerate() {
                    w.write_record([
                        name.clone(),
                        "config".into(),
                        policy_label(k),
                        config_label(m),
                        v.to_string(),
                        table.config_visits[k][m].to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// With probability `1 − ε` the argmax (lowest index on ties), otherwise a
/// uniformly random index. Returns the index and whether it was explored.
pub fn epsilon_greedy<R: Rng + ?Sized>(values: &[f64], epsilon: f64, rng: &mut R) -> (usize, bool) {
    assert!(!values.is_empty(), "empty action-value row");
    if rng.random::<f64>() < epsilon {
        (rng.random_range(0..values.len()), true)
    } else {
        (argmax(values), false)
    }
}

/// `q + α·(r + γ·max_next − q)`.
pub fn q_update(q: f64, reward: f64, max_next: f64, alpha: f64, gamma: f64) -> f64 {
    q + alpha * (reward + gamma * max_next - q)
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn compose<E: Environment>(
    env: &E,
    mode: DecisionMode,
    joint: &JointActions,
    choices: &[(usize, usize)],
) -> ActionProfile {
    match mode {
        DecisionMode::Individual => ActionProfile(choices.iter().map(|&(k, m)| AgentAction::new(k, m)).collect()),
        DecisionMode::Joint => {
            let (k, m) = choices[0];
            let p = joint.profile(k, m);
            debug_assert_eq!(p.len(), env.agent_count());
            p
        }
    }
}

/// Trains tables for `mode` over `hp.episodes` frames of `hp.slots` slots.
/// One episode is one frame; every episode restarts from the initial profile.
pub fn train<E: Environment>(env: &E, mode: DecisionMode, hp: &Hyperparams, seed: u64) -> Result<QTables> {
    hp.validate()?;
    let mut tables = QTables::zeros(env, mode);
    let deciders = tables.deciders();
    let joint = JointActions::of(env);
    let mut explore: Vec<_> = (0..deciders.len())
        .map(|d| derive_stream(seed, EXPLORE_STREAM, &[d as u64]))
        .collect();

    for episode in 1..=hp.episodes {
        let mut previous = env.initial_profile();
        for t in 1..=hp.slots {
            let slot = env.draw_slot(&mut derive_stream(seed, TRAIN_SLOT_STREAM, &[episode as u64, t as u64]))?;
            let mut choices = Vec::with_capacity(deciders.len());
            for (d, &decider) in deciders.iter().enumerate() {
                let table = &mut tables.tables[d];
                let (k, _) = epsilon_greedy(&table.policy, hp.epsilon, &mut explore[d]);
                let (m, _) = epsilon_greedy(&table.config[k], hp.epsilon, &mut explore[d]);
                let (r_policy, r_config) = chosen_rewards(env, &slot, decider, Some(&joint), &previous, k, m, t);
                let bootstrap = max_of(&table.config[k]);
                table.policy[k] = q_update(table.policy[k], r_policy, bootstrap, hp.learning_rate, hp.discount);
                table.config[k][m] = q_update(table.config[k][m], r_config, 0.0, hp.learning_rate, hp.discount);
                table.policy_visits[k] += 1;
                table.config_visits[k][m] += 1;
                choices.push((k, m));
            }
            previous = compose(env, mode, &joint, &choices);
        }
    }
    Ok(tables)
}

/// One evaluated slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    /// 1-based.
    pub slot: usize,
    pub profile: ActionProfile,
    pub breakdown: UtilityBreakdown,
    /// Per agent; in joint mode every agent carries the joint decider's value.
    pub policy_rewards: Vec<f64>,
    pub config_rewards: Vec<f64>,
    pub explored: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub slots: Vec<SlotRecord>,
}

impl EpisodeTrace {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn network_utility(&self) -> Vec<f64> {
        self.slots.iter().map(|s| s.breakdown.network_utility).collect()
    }

    pub fn mean_network_utility(&self) -> f64 {
        if self.slots.is_empty() {
            return 0.0;
        }
        self.network_utility().iter().sum::<f64>() / self.slots.len() as f64
    }
}

/// Rolls out `T` slots on the evaluation fading streams. `choose(t, previous)`
/// returns one `(policy, config)` per decider of `mode`.
fn rollout<E: Environment>(
    env: &E,
    mode: DecisionMode,
    slots: usize,
    seed: u64,
    mut choose: impl FnMut(usize, &ActionProfile) -> Vec<(usize, usize)>,
) -> Result<EpisodeTrace> {
    let joint = JointActions::of(env);
    let n = env.agent_count();
    let mut previous = env.initial_profile();
    let mut records = Vec::with_capacity(slots);
    for t in 1..=slots {
        let slot = env.draw_slot(&mut derive_stream(seed, EVAL_SLOT_STREAM, &[t as u64]))?;
        let choices = choose(t, &previous);
        let profile = compose(env, mode, &joint, &choices);
        let breakdown = env.evaluate(&slot, &profile, &previous, t);
        let (policy_rewards, config_rewards) = match mode {
            DecisionMode::Individual => (0..n)
                .map(|i| {
                    let (k, m) = choices[i];
                    chosen_rewards(env, &slot, Decider::Agent(i), Some(&joint), &previous, k, m, t)
                })
                .unzip(),
            DecisionMode::Joint => {
                let (k, m) = choices[0];
                let (p, c) = chosen_rewards(env, &slot, Decider::Joint, Some(&joint), &previous, k, m, t);
                (vec![p; n], vec![c; n])
            }
        };
        records.push(SlotRecord {
            slot: t,
            profile: profile.clone(),
            breakdown,
            policy_rewards,
            config_rewards,
            explored: vec![false; n],
        });
        previous = profile;
    }
    Ok(EpisodeTrace { slots: records })
}

/// Greedy (ε = 0) rollout of trained tables.
pub fn evaluate<E: Environment>(env: &E, tables: &QTables, slots: usize, seed: u64) -> Result<EpisodeTrace> {
    let greedy: Vec<(usize, usize)> = tables.tables.iter().map(QTable::greedy).collect();
    rollout(env, tables.mode, slots, seed, |_, _| greedy.clone())
}

/// Every slot plays `profile`; rewards are the per-agent stage rewards.
/// Uses the same fading streams as [`evaluate`] with the same seed.
pub fn rollout_pinned<E: Environment>(env: &E, profile: &ActionProfile, slots: usize, seed: u64) -> Result<EpisodeTrace> {
    if profile.len() != env.agent_count() {
        return Err(Error::config("pinned profile has the wrong number of agents"));
    }
    let choices: Vec<(usize, usize)> = profile.0.iter().map(|a| (a.policy, a.config)).collect();
    rollout(env, DecisionMode::Individual, slots, seed, |_, _| choices.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::tests::TableEnv;
    use proptest::prelude::*;

    fn toy() -> TableEnv {
        TableEnv {
            u: vec![
                vec![vec![0.2, 0.3, 0.1], vec![0.5, 0.9, 0.4], vec![0.3, 0.2, 0.2]],
                vec![vec![0.6, 0.1, 0.1], vec![0.2, 0.2, 0.3], vec![0.1, 0.1, 0.1]],
            ],
            delta_switch: 0.95,
        }
    }

    #[test]
    fn presets() {
        let i = Hyperparams::individual();
        assert_eq!((i.discount, i.learning_rate, i.epsilon, i.episodes, i.slots), (0.75, 0.02, 0.95, 200, 50));
        let j = Hyperparams::joint();
        assert_eq!((j.discount, j.learning_rate, j.epsilon, j.episodes, j.slots), (0.85, 0.035, 0.7, 300, 50));
        assert!(Hyperparams { learning_rate: 0.0, ..i }.validate().is_err());
        assert!(Hyperparams { epsilon: 1.5, ..i }.validate().is_err());
    }

    #[test]
    fn q_update_examples() {
        assert!((q_update(0.0, 1.0, 0.0, 0.02, 0.75) - 0.02).abs() < 1e-15);
        let (r, g, next) = (0.3, 0.75, 0.4);
        let fixed = r + g * next;
        assert_eq!(q_update(fixed, r, next, 0.02, g), fixed);
        assert_eq!(q_update(0.77, 0.25, 9.0, 1.0, 0.0), 0.25);
    }

    #[test]
    fn epsilon_greedy_examples() {
        let mut rng = derive_stream(0, "eg", &[]);
        assert_eq!(epsilon_greedy(&[0.1, 0.9, 0.3], 0.0, &mut rng), (1, false));
        assert_eq!(epsilon_greedy(&[0.4, 0.4, 0.1], 0.0, &mut rng), (0, false));
        let n = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let (i, explored) = epsilon_greedy(&[0.0, 1.0, 0.0, 0.0], 1.0, &mut rng);
            assert!(explored);
            counts[i] += 1;
        }
        let p: f64 = 0.25;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn zero_episodes_leave_zero_tables() {
        let env = toy();
        let hp = Hyperparams {
            episodes: 0,
            ..Hyperparams::individual()
        };
        let tables = train(&env, DecisionMode::Individual, &hp, 3).unwrap();
        assert!(tables.tables.iter().all(|t| t.values().all(|v| v == 0.0) && t.total_visits() == 0));
        let trace = evaluate(&env, &tables, 50, 3).unwrap();
        assert_eq!(trace.len(), 50);
        assert_eq!(trace.slots[0].profile, ActionProfile::uniform(2, AgentAction::new(0, 0)));
        assert_eq!(trace.slots.iter().map(|s| s.slot).collect::<Vec<_>>(), (1..=50).collect::<Vec<_>>());
    }

    #[test]
    fn visit_counts_and_determinism() {
        let env = toy();
        let hp = Hyperparams {
            episodes: 7,
            slots: 11,
            ..Hyperparams::individual()
        };
        for mode in [DecisionMode::Individual, DecisionMode::Joint] {
            let a = train(&env, mode, &hp, 42).unwrap();
            let b = train(&env, mode, &hp, 42).unwrap();
            assert_eq!(a, b);
            for t in &a.tables {
                assert_eq!(t.total_visits(), 7 * 11 * 2);
            }
            assert_ne!(a, train(&env, mode, &hp, 43).unwrap());
        }
    }

    #[test]
    fn learns_dominant_pair() {
        let env = toy();
        for seed in 0..5 {
            let t = train(&env, DecisionMode::Individual, &Hyperparams::individual(), seed).unwrap();
            assert_eq!(t.tables[0].greedy(), (1, 1));
            assert_eq!(t.tables[1].greedy().0, 0);
        }
    }

    #[test]
    fn joint_shapes() {
        let env = toy();
        let t = QTables::zeros(&env, DecisionMode::Joint);
        assert_eq!(t.tables.len(), 1);
        assert_eq!(t.tables[0].policy.len(), 9);
        assert_eq!(t.tables[0].config.len(), 9);
        assert_eq!(t.tables[0].config[0].len(), 9);
    }

    #[test]
    fn pinned_rollout_has_no_switch_after_first_slot() {
        let env = toy();
        let pinned = ActionProfile(vec![AgentAction::new(2, 1), AgentAction::new(1, 2)]);
        let trace = rollout_pinned(&env, &pinned, 10, 1).unwrap();
        assert!(trace.slots[0].breakdown.agents.iter().all(|a| a.delta == 0.95));
        for s in &trace.slots[1..] {
            assert_eq!(s.profile, pinned);
            assert!(s.breakdown.agents.iter().all(|a| a.delta == 1.0));
        }
    }

    #[test]
    fn qtable_csv_layout() {
        let env = toy();
        let t = train(&env, DecisionMode::Individual, &Hyperparams { episodes: 2, ..Hyperparams::individual() }, 0).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&env, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "decider,stage,state,action,value,visits");
        // per agent: 3 policy rows + 3×3 config rows
        assert_eq!(lines.len(), 1 + 2 * (3 + 9));
        assert!(lines[1].starts_with("agent1,policy,last_state,0,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn q_values_stay_bounded(
            u in proptest::collection::vec(0.0f64..=1.0, 8),
            gamma in 0.0f64..0.95,
            alpha in 0.01f64..1.0,
            seed in any::<u64>(),
        ) {
            let env = TableEnv {
                u: vec![vec![u[0..2].to_vec(), u[2..4].to_vec()], vec![u[4..6].to_vec(), u[6..8].to_vec()]],
                delta_switch: 0.95,
            };
            let hp = Hyperparams { discount: gamma, learning_rate: alpha, epsilon: 0.5, episodes: 20, slots: 10 };
            for mode in [DecisionMode::Individual, DecisionMode::Joint] {
                let t = train(&env, mode, &hp, seed).unwrap();
                let bound = 1.0 / (1.0 - gamma) + 1.0;
                for table in &t.tables {
                    prop_assert!(table.values().all(|v| v.is_finite() && v.abs() <= bound));
                }
            }
        }
    }
}
