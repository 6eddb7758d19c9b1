//! The physical network as a decision environment: emissions resolved from
//! action profiles, cached secrecy pressures, per-slot fading.

use std::sync::Arc;

use rand::Rng;

use crate::channel::{db_to_linear, ChannelRealization, Network};
use crate::decision::{transition_penalty, Environment};
use crate::error::{Error, Result};
use crate::pls::{ActionProfile, AgentAction, Emission, PlsPolicy, ProfileSpace, ReceiverGains, TransmissionConfig};
use crate::secrecy::{EavesdropperPdf, SecrecyTable, SurfaceGrid};
use crate::utility::{weight_schedule, CostPower, SlotInputs, TimeImpacts, UtilityBreakdown, UtilityWeights};

/// One agent's action sets and preferences.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub policies: Vec<PlsPolicy>,
    pub configs: Vec<TransmissionConfig>,
    pub weights: UtilityWeights,
    /// Mass of this agent in the network utility.
    pub network_weight: f64,
}

/// Everything that determines utilities, short of the secrecy table.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub network: Network,
    pub agents: Vec<AgentSpec>,
    pub time_impacts: TimeImpacts,
    pub delta_switch: f64,
    /// Index into every agent's config set.
    pub reference_config: usize,
    /// Profile assumed to precede slot 1.
    pub initial_profile: ActionProfile,
    /// When set, every agent transmits its message at this level (dB)
    /// regardless of the selected configuration.
    pub equal_message_power_db: Option<f64>,
    pub cost_power: CostPower,
}

impl Model {
    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        if self.agents.len() != self.network.agent_count() {
            return Err(Error::config(format!(
                "{} agent specs for {} agents in the geometry",
                self.agents.len(),
                self.network.agent_count()
            )));
        }
        if !(self.delta_switch > 0.0 && self.delta_switch <= 1.0) {
            return Err(Error::config(format!("delta_switch must lie in (0, 1], got {}", self.delta_switch)));
        }
        self.time_impacts.validate()?;
        let mass: f64 = self.agents.iter().map(|a| a.network_weight).sum();
        if self.agents.iter().any(|a| a.network_weight < 0.0) || (mass - 1.0).abs() > 1e-9 {
            return Err(Error::config("agent network weights must be nonnegative and sum to 1"));
        }
        for (i, a) in self.agents.iter().enumerate() {
            if a.policies.is_empty() || a.configs.is_empty() {
                return Err(Error::config(format!("agent {} needs nonempty policy and config sets", i + 1)));
            }
            for c in &a.configs {
                c.validate()?;
            }
            if self.reference_config >= a.configs.len() {
                return Err(Error::config(format!(
                    "reference config index {} out of range for agent {}",
                    self.reference_config,
                    i + 1
                )));
            }
            let initial = self.initial_profile.0.get(i).copied().unwrap_or(AgentAction::new(usize::MAX, 0));
            if initial.policy >= a.policies.len() || initial.config >= a.configs.len() {
                return Err(Error::config(format!("initial action out of range for agent {}", i + 1)));
            }
            if a.policies.contains(&PlsPolicy::An) && self.network.antennas[i] < 2 {
                return Err(Error::PolicyInfeasible {
                    agent: i + 1,
                    policy: PlsPolicy::An.name(),
                    reason: "null-space artificial noise needs at least two antennas".into(),
                });
            }
        }
        Ok(())
    }

    pub fn profile_space(&self) -> ProfileSpace {
        ProfileSpace::new(
            self.agents.iter().map(|a| a.policies.len()).collect(),
            self.agents.iter().map(|a| a.configs.len()).collect(),
        )
    }

    pub fn policy(&self, agent: usize, k: usize) -> PlsPolicy {
        self.agents[agent].policies[k]
    }

    pub fn config(&self, agent: usize, m: usize) -> &TransmissionConfig {
        &self.agents[agent].configs[m]
    }

    pub fn emissions(&self, profile: &ActionProfile) -> Vec<Emission> {
        profile
            .0
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let config = self.config(i, a.config);
                let policy = self.policy(i, a.policy);
                Emission {
                    policy,
                    message_power: self.equal_message_power_db.map_or_else(|| config.message_power(), db_to_linear),
                    security_power: if policy.emits_security_signal() {
                        config.security_power()
                    } else {
                        0.0
                    },
                }
            })
            .collect()
    }

    /// Power entering the cost dimension, per agent: the selected
    /// configuration's power whether or not the policy radiates a security
    /// signal.
    pub fn cost_powers(&self, profile: &ActionProfile, emissions: &[Emission]) -> Vec<f64> {
        profile
            .0
            .iter()
            .zip(emissions)
            .enumerate()
            .map(|(i, (a, e))| {
                let security = self.config(i, a.config).security_power();
                match self.cost_power {
                    CostPower::Total => e.message_power + security,
                    CostPower::SecurityOnly => security,
                }
            })
            .collect()
    }

    pub fn secrecy_table(&self, grid: &SurfaceGrid, pdf: &EavesdropperPdf, n_mc: usize, seed: u64) -> Result<SecrecyTable> {
        SecrecyTable::build(&self.network, self.profile_space(), |p| self.emissions(p), grid, pdf, n_mc, seed)
    }
}

/// [`Model`] plus its secrecy table.
#[derive(Debug, Clone)]
pub struct NetworkEnvironment {
    model: Model,
    secrecy: Arc<SecrecyTable>,
    agent_weights: Vec<f64>,
}

impl NetworkEnvironment {
    pub fn new(model: Model, secrecy: Arc<SecrecyTable>) -> Result<Self> {
        model.validate()?;
        if secrecy.space() != &model.profile_space() {
            return Err(Error::config("secrecy table does not match the model's action sets"));
        }
        let agent_weights = model.agents.iter().map(|a| a.network_weight).collect();
        Ok(Self {
            model,
            secrecy,
            agent_weights,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn secrecy(&self) -> &SecrecyTable {
        &self.secrecy
    }
}

impl Environment for NetworkEnvironment {
    type Slot = ReceiverGains;

    fn agent_count(&self) -> usize {
        self.model.agent_count()
    }

    fn policy_count(&self, agent: usize) -> usize {
        self.model.agents[agent].policies.len()
    }

    fn config_count(&self, agent: usize) -> usize {
        self.model.agents[agent].configs.len()
    }

    fn reference_config(&self, _agent: usize) -> usize {
        self.model.reference_config
    }

    fn initial_profile(&self) -> ActionProfile {
        self.model.initial_profile.clone()
    }

    fn draw_slot<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ReceiverGains> {
        ReceiverGains::new(&ChannelRealization::draw(&self.model.network, rng)?)
    }

    fn evaluate(&self, slot: &ReceiverGains, profile: &ActionProfile, previous: &ActionProfile, t: usize) -> UtilityBreakdown {
        let n = self.agent_count();
        let emissions = self.model.emissions(profile);
        let omegas = self.secrecy.omegas(profile);
        let sinrs: Vec<f64> = (0..n).map(|i| slot.sinr(i, &emissions)).collect();
        let cost_powers = self.model.cost_powers(profile, &emissions);
        let weights: Vec<UtilityWeights> = self
            .model
            .agents
            .iter()
            .map(|a| weight_schedule(&a.weights, &self.model.time_impacts, t))
            .collect();
        let deltas: Vec<f64> = (0..n)
            .map(|i| transition_penalty(previous[i].policy, profile[i].policy, self.model.delta_switch))
            .collect();
        UtilityBreakdown::score(&SlotInputs {
            omegas: &omegas,
            sinrs: &sinrs,
            antennas: &self.model.network.antennas,
            cost_powers: &cost_powers,
            weights: &weights,
            deltas: &deltas,
            agent_weights: &self.agent_weights,
        })
    }

    fn policy_label(&self, agent: usize, k: usize) -> String {
        self.model.policy(agent, k).name().to_string()
    }

    fn config_label(&self, agent: usize, m: usize) -> String {
        self.model.config(agent, m).label()
    }
}
