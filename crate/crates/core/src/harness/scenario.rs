//! Scenario configuration: TOML files, built-in weight presets, defaults.
//!
//! Every key is optional; an empty file yields the two-agent default
//! scenario with preset C1 in individual mode and seed 0.

use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::channel::{Geometry, Network, NodePosition, Surface};
use crate::decision::DecisionMode;
use crate::environment::{AgentSpec, Model};
use crate::error::{Error, Result};
use crate::learner::Hyperparams;
use crate::pls::{ActionProfile, AgentAction, PlsPolicy, TransmissionConfig};
use crate::secrecy::{EavesdropperPdf, SurfaceGrid};
use crate::utility::{CostPower, TimeImpacts, UtilityWeights};

/// Weight rows are accepted this far off the simplex and rescaled onto it.
pub const WEIGHT_TOLERANCE: f64 = 0.011;

/// Built-in utility-weight presets, one row per agent: (security, QoS, cost).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    C1,
    C2,
    C3,
    C4,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::C1, Preset::C2, Preset::C3, Preset::C4];

    pub fn rows(self) -> [[f64; 3]; 2] {
        match self {
            Preset::C1 => [[0.4, 0.3, 0.3], [0.33, 0.33, 0.33]],
            Preset::C2 => [[0.3, 0.5, 0.2], [0.4, 0.4, 0.2]],
            Preset::C3 => [[0.2, 0.3, 0.5], [0.5, 0.1, 0.4]],
            Preset::C4 => [[0.3, 0.2, 0.5], [0.2, 0.2, 0.6]],
        }
    }

    pub fn application(self) -> &'static str {
        match self {
            Preset::C1 => "drone swarms",
            Preset::C2 => "URLLC / V2X",
            Preset::C3 => "mMTC / smart grid",
            Preset::C4 => "health networks",
        }
    }

    pub fn weights(self) -> Vec<UtilityWeights> {
        self.rows()
            .iter()
            .map(|r| UtilityWeights::normalized(r[0], r[1], r[2], WEIGHT_TOLERANCE).expect("preset rows are valid"))
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::C1 => "C1",
            Preset::C2 => "C2",
            Preset::C3 => "C3",
            Preset::C4 => "C4",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "C1" => Ok(Preset::C1),
            "C2" => Ok(Preset::C2),
            "C3" => Ok(Preset::C3),
            "C4" => Ok(Preset::C4),
            other => Err(Error::config(format!("unknown scenario preset `{other}` (expected C1..C4)"))),
        }
    }
}

// ---------------------------------------------------------------------------
// file layout

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<Spanned<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<DecisionMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seeds: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    antennas: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    receiver_noise: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eavesdropper_noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    policies: Option<Vec<Spanned<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    configs: Option<Vec<Spanned<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<Spanned<[f64; 3]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    network_weights: Option<Spanned<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_switch: Option<Spanned<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_config: Option<Spanned<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline_config: Option<Spanned<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    enforce_equal_msg_power: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message_power_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cost_power: Option<CostPower>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_resolution: Option<Spanned<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_mc: Option<Spanned<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_action: Option<Spanned<InitialActionFile>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_impacts: Option<Spanned<TimeImpacts>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    geometry: Option<GeometryFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hyperparams: Option<HyperparamsFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agents: Option<Vec<AgentFile>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialActionFile {
    policy: String,
    config: usize,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    transmitters: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    receivers: Option<Vec<[f64; 2]>>,
    /// `[x_min, x_max, y_min, y_max]`
    #[serde(skip_serializing_if = "Option::is_none")]
    surface: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eavesdropper_mean: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eavesdropper_variance: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperparamsFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    individual: Option<Spanned<HyperparamsPatch>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    joint: Option<Spanned<HyperparamsPatch>>,
}

/// Hyperparameters in a file: omitted keys keep the mode's defaults.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperparamsPatch {
    #[serde(skip_serializing_if = "Option::is_none")]
    discount: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    episodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slots: Option<usize>,
}

impl HyperparamsPatch {
    fn full(hp: Hyperparams) -> Self {
        Self {
            discount: Some(hp.discount),
            learning_rate: Some(hp.learning_rate),
            epsilon: Some(hp.epsilon),
            episodes: Some(hp.episodes),
            slots: Some(hp.slots),
        }
    }

    fn apply(&self, base: Hyperparams) -> Hyperparams {
        Hyperparams {
            discount: self.discount.unwrap_or(base.discount),
            learning_rate: self.learning_rate.unwrap_or(base.learning_rate),
            epsilon: self.epsilon.unwrap_or(base.epsilon),
            episodes: self.episodes.unwrap_or(base.episodes),
            slots: self.slots.unwrap_or(base.slots),
        }
    }
}

/// Per-agent overrides of the shared policy and config sets.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    policies: Option<Vec<Spanned<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    configs: Option<Vec<Spanned<[f64; 2]>>>,
}

// ---------------------------------------------------------------------------

/// A fully resolved, validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Preset the weights came from, if any.
    pub preset: Option<Preset>,
    pub mode: DecisionMode,
    pub seed: u64,
    /// Seeds for sweeps; empty means just `seed`.
    pub seeds: Vec<u64>,
    pub geometry: Geometry,
    pub antennas: Vec<usize>,
    pub receiver_noise: Vec<f64>,
    pub eavesdropper_noise: f64,
    /// Per agent.
    pub policies: Vec<Vec<PlsPolicy>>,
    /// Per agent.
    pub configs: Vec<Vec<TransmissionConfig>>,
    pub weights: Vec<UtilityWeights>,
    pub network_weights: Vec<f64>,
    pub time_impacts: TimeImpacts,
    pub delta_switch: f64,
    pub reference_config: usize,
    pub initial_policy: PlsPolicy,
    pub initial_config: usize,
    /// Configuration every fixed-policy baseline runs at.
    pub baseline_config: TransmissionConfig,
    pub enforce_equal_msg_power: bool,
    pub message_power_db: f64,
    pub cost_power: CostPower,
    pub grid_resolution: usize,
    pub n_mc: usize,
    pub individual: Hyperparams,
    pub joint: Hyperparams,
}

pub fn default_configs() -> Vec<TransmissionConfig> {
    vec![
        TransmissionConfig::new(5.0, 5.0),
        TransmissionConfig::new(5.0, 10.0),
        TransmissionConfig::new(10.0, 5.0),
        TransmissionConfig::new(10.0, 10.0),
    ]
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::preset(Preset::C1)
    }
}

/// Unanchored span for values built in code.
fn s<T>(v: T) -> Spanned<T> {
    Spanned::new(0..0, v)
}

fn line_of(text: Option<&str>, span: Range<usize>) -> Option<usize> {
    let text = text?;
    if span.start > text.len() || (span.start == 0 && span.end == 0) {
        return None;
    }
    Some(text[..span.start].matches('\n').count() + 1)
}

fn parse_policy(name: &str) -> Result<PlsPolicy> {
    name.parse()
}

impl ScenarioConfig {
    /// The two-agent default scenario with the given weight preset.
    pub fn preset(preset: Preset) -> Self {
        Self {
            preset: Some(preset),
            mode: DecisionMode::Individual,
            seed: 0,
            seeds: Vec::new(),
            geometry: Geometry::two_agent_default(),
            antennas: vec![2, 2],
            receiver_noise: vec![1.0, 1.0],
            eavesdropper_noise: 1.0,
            policies: vec![PlsPolicy::ALL.to_vec(); 2],
            configs: vec![default_configs(); 2],
            weights: preset.weights(),
            network_weights: vec![0.5, 0.5],
            time_impacts: TimeImpacts::default(),
            delta_switch: 0.95,
            reference_config: 0,
            initial_policy: PlsPolicy::Beamforming,
            initial_config: 0,
            baseline_config: TransmissionConfig::new(10.0, 10.0),
            enforce_equal_msg_power: false,
            message_power_db: 10.0,
            cost_power: CostPower::Total,
            grid_resolution: 21,
            n_mc: 500,
            individual: Hyperparams::individual(),
            joint: Hyperparams::joint(),
        }
    }

    pub fn agent_count(&self) -> usize {
        self.geometry.agent_count()
    }

    pub fn name(&self) -> String {
        self.preset.map_or_else(|| "custom".to_string(), |p| p.name().to_string())
    }

    pub fn hyperparams(&self, mode: DecisionMode) -> Hyperparams {
        match mode {
            DecisionMode::Individual => self.individual,
            DecisionMode::Joint => self.joint,
        }
    }

    pub fn hyperparams_mut(&mut self, mode: DecisionMode) -> &mut Hyperparams {
        match mode {
            DecisionMode::Individual => &mut self.individual,
            DecisionMode::Joint => &mut self.joint,
        }
    }

    /// Seeds a sweep runs over.
    pub fn sweep_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.seed]
        } else {
            self.seeds.clone()
        }
    }

    /// Switches to another weight preset (keeping everything else).
    pub fn with_preset(mut self, preset: Preset) -> Result<Self> {
        if self.agent_count() != 2 {
            return Err(Error::config(format!(
                "presets define two agents, the scenario has {}",
                self.agent_count()
            )));
        }
        self.preset = Some(preset);
        self.weights = preset.weights();
        Ok(self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| {
            let line = e.span().and_then(|s| line_of(Some(text), s));
            Error::config_at(line, e.message().to_string())
        })?;
        let config = Self::resolve(file, Some(text))?;
        config.validate()?;
        Ok(config)
    }

    fn resolve(file: ScenarioFile, text: Option<&str>) -> Result<Self> {
        let at = |span: Range<usize>| line_of(text, span);
        let preset = match &file.scenario {
            Some(s) => Some(
                s.get_ref()
                    .parse::<Preset>()
                    .map_err(|e| Error::config_at(at(s.span()), bare(e)))?,
            ),
            None => (file.weights.is_none()).then_some(Preset::C1),
        };
        let mut c = Self::preset(preset.unwrap_or(Preset::C1));
        c.preset = preset;

        if let Some(g) = file.geometry {
            let pos = |v: Vec<[f64; 2]>| v.into_iter().map(|[x, y]| NodePosition::new(x, y)).collect::<Vec<_>>();
            if let Some(t) = g.transmitters {
                c.geometry.transmitters = pos(t);
            }
            if let Some(r) = g.receivers {
                c.geometry.receivers = pos(r);
            }
            if let Some([x_min, x_max, y_min, y_max]) = g.surface {
                c.geometry.surface = Surface { x_min, x_max, y_min, y_max };
            }
            if let Some([x, y]) = g.eavesdropper_mean {
                c.geometry.eavesdropper_mean = NodePosition::new(x, y);
            }
            if let Some(v) = g.eavesdropper_variance {
                c.geometry.eavesdropper_variance = v;
            }
        }
        if c.geometry.transmitters.len() != c.geometry.receivers.len() {
            return Err(Error::config("geometry needs one receiver per transmitter"));
        }
        let n = c.agent_count();
        if n == 0 {
            return Err(Error::config("geometry has no agents"));
        }

        let per_agent = |v: Option<Vec<f64>>, default: f64, what: &str| -> Result<Vec<f64>> {
            match v {
                Some(v) if v.len() == n => Ok(v),
                Some(v) => Err(Error::config(format!("{what} lists {} values for {n} agents", v.len()))),
                None => Ok(vec![default; n]),
            }
        };
        c.antennas = match file.antennas {
            Some(a) if a.len() == n => a,
            Some(a) => return Err(Error::config(format!("antennas lists {} values for {n} agents", a.len()))),
            None => vec![2; n],
        };
        c.receiver_noise = per_agent(file.receiver_noise, 1.0, "receiver_noise")?;
        if let Some(v) = file.eavesdropper_noise {
            c.eavesdropper_noise = v;
        }
        if let Some(m) = file.mode {
            c.mode = m;
        }
        if let Some(s) = file.seed {
            c.seed = s;
        }
        if let Some(s) = file.seeds {
            c.seeds = s;
        }

        let policies = |list: &[Spanned<String>]| -> Result<Vec<PlsPolicy>> {
            list.iter()
                .map(|p| parse_policy(p.get_ref()).map_err(|e| Error::config_at(at(p.span()), bare(e))))
                .collect()
        };
        let configs = |list: &[Spanned<[f64; 2]>]| -> Result<Vec<TransmissionConfig>> {
            list.iter()
                .map(|s| {
                    let [m, sec] = *s.get_ref();
                    let cfg = TransmissionConfig::new(m, sec);
                    cfg.validate().map_err(|e| Error::config_at(at(s.span()), bare(e)))?;
                    Ok(cfg)
                })
                .collect()
        };
        let shared_policies = match &file.policies {
            Some(p) => policies(p)?,
            None => PlsPolicy::ALL.to_vec(),
        };
        let shared_configs = match &file.configs {
            Some(p) => configs(p)?,
            None => default_configs(),
        };
        c.policies = vec![shared_policies; n];
        c.configs = vec![shared_configs; n];
        if let Some(agents) = &file.agents {
            if agents.len() != n {
                return Err(Error::config(format!("[[agents]] lists {} entries for {n} agents", agents.len())));
            }
            for (i, a) in agents.iter().enumerate() {
                if let Some(p) = &a.policies {
                    c.policies[i] = policies(p)?;
                }
                if let Some(p) = &a.configs {
                    c.configs[i] = configs(p)?;
                }
            }
        }
        for i in 0..n {
            if c.policies[i].is_empty() || c.configs[i].is_empty() {
                return Err(Error::config(format!("agent {} has an empty policy or config set", i + 1)));
            }
        }

        match &file.weights {
            Some(rows) => {
                if rows.len() != n {
                    return Err(Error::config(format!("weights lists {} rows for {n} agents", rows.len())));
                }
                c.weights = rows
                    .iter()
                    .map(|r| {
                        let [s, q, w] = *r.get_ref();
                        UtilityWeights::normalized(s, q, w, WEIGHT_TOLERANCE).map_err(|e| Error::config_at(at(r.span()), bare(e)))
                    })
                    .collect::<Result<_>>()?;
            }
            None if n != 2 => {
                return Err(Error::config(format!("weight presets define two agents; give `weights` for {n} agents")));
            }
            None => {}
        }
        c.network_weights = match &file.network_weights {
            Some(w) => {
                let v = w.get_ref().clone();
                let sum: f64 = v.iter().sum();
                if v.len() != n || v.iter().any(|x| *x < 0.0) || (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::config_at(
                        at(w.span()),
                        format!("network_weights must list {n} nonnegative values summing to 1"),
                    ));
                }
                v
            }
            None => vec![1.0 / n as f64; n],
        };

        if let Some(t) = &file.time_impacts {
            c.time_impacts = *t.get_ref();
            c.time_impacts.validate().map_err(|e| Error::config_at(at(t.span()), bare(e)))?;
        }
        if let Some(d) = &file.delta_switch {
            c.delta_switch = *d.get_ref();
            if !(c.delta_switch > 0.0 && c.delta_switch <= 1.0) {
                return Err(Error::config_at(at(d.span()), format!("delta_switch must lie in (0, 1], got {}", c.delta_switch)));
            }
        }
        if let Some(r) = &file.reference_config {
            c.reference_config = *r.get_ref();
            if c.configs.iter().any(|set| c.reference_config >= set.len()) {
                return Err(Error::config_at(at(r.span()), format!("reference_config {} is out of range", c.reference_config)));
            }
        }
        if let Some(ia) = &file.initial_action {
            let v = ia.get_ref();
            c.initial_policy = parse_policy(&v.policy).map_err(|e| Error::config_at(at(ia.span()), bare(e)))?;
            c.initial_config = v.config;
            if c.policies.iter().any(|p| !p.contains(&c.initial_policy)) || c.configs.iter().any(|s| v.config >= s.len()) {
                return Err(Error::config_at(
                    at(ia.span()),
                    "initial_action must name a policy and config index available to every agent",
                ));
            }
        }
        if let Some(b) = &file.baseline_config {
            let [m, s] = *b.get_ref();
            c.baseline_config = TransmissionConfig::new(m, s);
            c.baseline_config.validate().map_err(|e| Error::config_at(at(b.span()), bare(e)))?;
        }
        if let Some(f) = file.enforce_equal_msg_power {
            c.enforce_equal_msg_power = f;
        }
        if let Some(p) = file.message_power_db {
            c.message_power_db = p;
        }
        if let Some(p) = file.cost_power {
            c.cost_power = p;
        }
        if let Some(g) = &file.grid_resolution {
            c.grid_resolution = *g.get_ref();
            if c.grid_resolution < 2 {
                return Err(Error::config_at(at(g.span()), "grid_resolution must be at least 2"));
            }
        }
        if let Some(m) = &file.n_mc {
            c.n_mc = *m.get_ref();
            if c.n_mc == 0 {
                return Err(Error::config_at(at(m.span()), "n_mc must be at least 1"));
            }
        }
        if let Some(h) = &file.hyperparams {
            for (slot, hp) in [(&mut c.individual, &h.individual), (&mut c.joint, &h.joint)] {
                if let Some(hp) = hp {
                    let merged = hp.get_ref().apply(*slot);
                    merged.validate().map_err(|e| Error::config_at(at(hp.span()), bare(e)))?;
                    *slot = merged;
                }
            }
        }
        Ok(c)
    }

    /// Whole-scenario checks that do not map to a single line.
    pub fn validate(&self) -> Result<()> {
        self.model().map(|_| ())?;
        self.baseline_profile()?;
        self.individual.validate()?;
        self.joint.validate()
    }

    pub fn network(&self) -> Network {
        Network {
            geometry: self.geometry.clone(),
            antennas: self.antennas.clone(),
            receiver_noise: self.receiver_noise.clone(),
            eavesdropper_noise: self.eavesdropper_noise,
        }
    }

    pub fn initial_profile(&self) -> Result<ActionProfile> {
        self.policies
            .iter()
            .map(|set| {
                set.iter()
                    .position(|p| *p == self.initial_policy)
                    .map(|k| AgentAction::new(k, self.initial_config))
                    .ok_or_else(|| Error::config(format!("initial policy {} is not available to every agent", self.initial_policy)))
            })
            .collect::<Result<Vec<_>>>()
            .map(ActionProfile)
    }

    pub fn model(&self) -> Result<Model> {
        let model = Model {
            network: self.network(),
            agents: (0..self.agent_count())
                .map(|i| AgentSpec {
                    policies: self.policies[i].clone(),
                    configs: self.configs[i].clone(),
                    weights: self.weights[i],
                    network_weight: self.network_weights[i],
                })
                .collect(),
            time_impacts: self.time_impacts,
            delta_switch: self.delta_switch,
            reference_config: self.reference_config,
            initial_profile: self.initial_profile()?,
            equal_message_power_db: self.enforce_equal_msg_power.then_some(self.message_power_db),
            cost_power: self.cost_power,
        };
        model.validate()?;
        Ok(model)
    }

    /// Config index of the baseline configuration in each agent's set.
    pub fn baseline_config_indices(&self) -> Result<Vec<usize>> {
        self.configs
            .iter()
            .enumerate()
            .map(|(i, set)| {
                set.iter().position(|c| *c == self.baseline_config).ok_or_else(|| {
                    Error::config(format!(
                        "baseline config {} dB is not in the config set of agent {}",
                        self.baseline_config.label(),
                        i + 1
                    ))
                })
            })
            .collect()
    }

    /// Profile with every agent on `policy` at the baseline configuration.
    pub fn baseline_profile_for(&self, policy: PlsPolicy) -> Result<ActionProfile> {
        let configs = self.baseline_config_indices()?;
        self.policies
            .iter()
            .zip(configs)
            .enumerate()
            .map(|(i, (set, m))| {
                set.iter().position(|p| *p == policy).map(|k| AgentAction::new(k, m)).ok_or_else(|| {
                    Error::config(format!("baseline policy {policy} is not in the policy set of agent {}", i + 1))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(ActionProfile)
    }

    fn baseline_profile(&self) -> Result<Vec<usize>> {
        // only the config is mandatory; policies are checked per baseline run
        self.baseline_config_indices()
    }

    /// Grid and eavesdropper pdf used for secrecy pressures.
    pub fn secrecy_grid(&self) -> Result<(SurfaceGrid, EavesdropperPdf)> {
        let network = self.network();
        let grid = SurfaceGrid::for_network(&network, self.grid_resolution)?;
        let pdf = EavesdropperPdf::gaussian(&grid, self.geometry.eavesdropper_mean, self.geometry.eavesdropper_variance)?;
        Ok((grid, pdf))
    }

    /// Canonical string of everything the secrecy table depends on
    /// (geometry, antennas, noise, action sets, power resolution, quadrature).
    pub fn secrecy_fingerprint(&self) -> String {
        serde_json::json!({
            "network": self.network(),
            "policies": self.policies,
            "configs": self.configs,
            "equal_msg": self.enforce_equal_msg_power.then_some(self.message_power_db),
            "grid": self.grid_resolution,
            "n_mc": self.n_mc,
        })
        .to_string()
    }

    fn to_file(&self) -> ScenarioFile {
        let xy = |p: &NodePosition| [p.x, p.y];
        let shared = self.policies.iter().all(|p| *p == self.policies[0]) && self.configs.iter().all(|c| *c == self.configs[0]);
        let policy_list = |p: &[PlsPolicy]| p.iter().map(|p| s(p.name().to_string())).collect::<Vec<_>>();
        let config_list = |c: &[TransmissionConfig]| c.iter().map(|c| s([c.message_db, c.security_db])).collect::<Vec<_>>();
        let g = &self.geometry;
        ScenarioFile {
            scenario: self.preset.map(|p| s(p.name().to_string())),
            mode: Some(self.mode),
            seed: Some(self.seed),
            seeds: (!self.seeds.is_empty()).then(|| self.seeds.clone()),
            antennas: Some(self.antennas.clone()),
            receiver_noise: Some(self.receiver_noise.clone()),
            eavesdropper_noise: Some(self.eavesdropper_noise),
            policies: Some(policy_list(&self.policies[0])),
            configs: Some(config_list(&self.configs[0])),
            weights: Some(self.weights.iter().map(|w| s([w.security, w.qos, w.cost])).collect()),
            network_weights: Some(s(self.network_weights.clone())),
            delta_switch: Some(s(self.delta_switch)),
            reference_config: Some(s(self.reference_config)),
            baseline_config: Some(s([self.baseline_config.message_db, self.baseline_config.security_db])),
            enforce_equal_msg_power: Some(self.enforce_equal_msg_power),
            message_power_db: Some(self.message_power_db),
            cost_power: Some(self.cost_power),
            grid_resolution: Some(s(self.grid_resolution)),
            n_mc: Some(s(self.n_mc)),
            initial_action: Some(s(InitialActionFile {
                policy: self.initial_policy.name().to_string(),
                config: self.initial_config,
            })),
            time_impacts: Some(s(self.time_impacts)),
            geometry: Some(GeometryFile {
                transmitters: Some(g.transmitters.iter().map(xy).collect()),
                receivers: Some(g.receivers.iter().map(xy).collect()),
                surface: Some([g.surface.x_min, g.surface.x_max, g.surface.y_min, g.surface.y_max]),
                eavesdropper_mean: Some(xy(&g.eavesdropper_mean)),
                eavesdropper_variance: Some(g.eavesdropper_variance),
            }),
            hyperparams: Some(HyperparamsFile {
                individual: Some(s(HyperparamsPatch::full(self.individual))),
                joint: Some(s(HyperparamsPatch::full(self.joint))),
            }),
            agents: (!shared).then(|| {
                (0..self.agent_count())
                    .map(|i| AgentFile {
                        policies: Some(policy_list(&self.policies[i])),
                        configs: Some(config_list(&self.configs[i])),
                    })
                    .collect()
            }),
        }
    }

    /// Serializes the resolved scenario; loading the text gives back an
    /// equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("scenario serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }
}

/// The message of a config error, without its prefix, for re-anchoring.
fn bare(e: Error) -> String {
    match e {
        Error::Config { message, .. } => message,
        other => other.to_string(),
    }
}
