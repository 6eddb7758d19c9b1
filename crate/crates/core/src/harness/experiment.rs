//! Training/evaluation runs, fixed-policy baselines and relative indicators.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decision::DecisionMode;
use crate::environment::NetworkEnvironment;
use crate::error::{Error, Result};
use crate::learner::{evaluate, rollout_pinned, train, EpisodeTrace, QTables};
use crate::pls::PlsPolicy;
use crate::secrecy::SecrecyTable;

use super::scenario::ScenarioConfig;

/// Secrecy tables keyed by (physical fingerprint, seed). Weight presets and
/// decision modes share the same table.
#[derive(Debug, Default)]
pub struct SecrecyCache {
    tables: Mutex<HashMap<(String, u64), Arc<SecrecyTable>>>,
}

impl SecrecyCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, scenario: &ScenarioConfig, seed: u64) -> Result<Arc<SecrecyTable>> {
        let key = (scenario.secrecy_fingerprint(), seed);
        if let Some(t) = self.tables.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(t));
        }
        let (grid, pdf) = scenario.secrecy_grid()?;
        let table = Arc::new(scenario.model()?.secrecy_table(&grid, &pdf, scenario.n_mc, seed)?);
        self.tables.lock().expect("cache lock").insert(key, Arc::clone(&table));
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.tables.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn environment(scenario: &ScenarioConfig, seed: u64, cache: &SecrecyCache) -> Result<NetworkEnvironment> {
    NetworkEnvironment::new(scenario.model()?, cache.get(scenario, seed)?)
}

/// Both agents pinned to `policy` at the baseline configuration for `slots`
/// slots, on the same fading streams as the adaptive evaluation.
pub fn run_baseline(env: &NetworkEnvironment, scenario: &ScenarioConfig, policy: PlsPolicy, slots: usize, seed: u64) -> Result<EpisodeTrace> {
    rollout_pinned(env, &scenario.baseline_profile_for(policy)?, slots, seed)
}

/// Policies every agent can run, i.e. the baselines that exist.
pub fn baseline_policies(scenario: &ScenarioConfig) -> Vec<PlsPolicy> {
    PlsPolicy::ALL
        .into_iter()
        .filter(|p| scenario.policies.iter().all(|set| set.contains(p)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Utility,
    Security,
    Qos,
    /// Raw normalized cost `c`; lower is better, so a negative indicator
    /// favors the adaptive scheme.
    Cost,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Utility, Metric::Security, Metric::Qos, Metric::Cost];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Utility => "utility",
            Metric::Security => "security",
            Metric::Qos => "qos",
            Metric::Cost => "cost",
        }
    }

    fn value(self, trace: &EpisodeTrace, slot: usize, agent: usize) -> f64 {
        let a = &trace.slots[slot].breakdown.agents[agent];
        match self {
            Metric::Utility => a.utility,
            Metric::Security => a.security,
            Metric::Qos => a.qos,
            Metric::Cost => a.cost,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config(format!("unknown metric `{s}`")))
    }
}

/// `100 · mean_t (X_adaptive[t] − X_baseline[t]) / X_baseline[t]` for one
/// agent. `None` when some baseline slot value is zero.
pub fn relative_indicator(adaptive: &EpisodeTrace, baseline: &EpisodeTrace, agent: usize, metric: Metric) -> Result<Option<f64>> {
    if adaptive.len() != baseline.len() || adaptive.is_empty() {
        return Err(Error::Numerical(format!(
            "relative indicator needs equal, nonempty traces (got {} and {} slots)",
            adaptive.len(),
            baseline.len()
        )));
    }
    let mut sum = 0.0;
    for t in 0..adaptive.len() {
        let b = metric.value(baseline, t, agent);
        if b <= 0.0 {
            return Ok(None);
        }
        sum += (metric.value(adaptive, t, agent) - b) / b;
    }
    Ok(Some(100.0 * sum / adaptive.len() as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorCell {
    /// 1-based.
    pub agent: usize,
    pub baseline: PlsPolicy,
    pub metric: Metric,
    /// Signed percentage; `None` is undefined.
    pub percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RelativeIndicatorReport {
    pub cells: Vec<IndicatorCell>,
}

impl RelativeIndicatorReport {
    pub fn build(adaptive: &EpisodeTrace, baselines: &[(PlsPolicy, EpisodeTrace)], agents: usize) -> Result<Self> {
        let mut cells = Vec::new();
        for agent in 0..agents {
            for (policy, trace) in baselines {
                for metric in Metric::ALL {
                    cells.push(IndicatorCell {
                        agent: agent + 1,
                        baseline: *policy,
                        metric,
                        percent: relative_indicator(adaptive, trace, agent, metric)?,
                    });
                }
            }
        }
        Ok(Self { cells })
    }

    pub fn get(&self, agent: usize, baseline: PlsPolicy, metric: Metric) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.agent == agent && c.baseline == baseline && c.metric == metric)
            .and_then(|c| c.percent)
    }

    /// Cell-wise mean over reports with identical layout; a cell undefined in
    /// any report stays undefined.
    pub fn average(reports: &[RelativeIndicatorReport]) -> Result<Self> {
        let first = reports.first().ok_or_else(|| Error::Numerical("no reports to average".into()))?;
        let mut cells = first.cells.clone();
        for (k, cell) in cells.iter_mut().enumerate() {
            let mut sum = 0.0;
            for r in reports {
                let other = r
                    .cells
                    .get(k)
                    .filter(|o| o.agent == cell.agent && o.baseline == cell.baseline && o.metric == cell.metric)
                    .ok_or_else(|| Error::Numerical("reports have different layouts".into()))?;
                match other.percent {
                    Some(v) => sum += v,
                    None => {
                        sum = f64::NAN;
                        break;
                    }
                }
            }
            cell.percent = (!sum.is_nan()).then(|| sum / reports.len() as f64);
        }
        Ok(Self { cells })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub secrecy_ms: f64,
    pub train_ms: f64,
    pub evaluate_ms: f64,
}

/// Everything one (scenario, mode, seed) run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scenario: ScenarioConfig,
    pub mode: DecisionMode,
    pub seed: u64,
    pub env: NetworkEnvironment,
    pub tables: QTables,
    pub trace: EpisodeTrace,
    pub baselines: Vec<(PlsPolicy, EpisodeTrace)>,
    pub report: RelativeIndicatorReport,
    pub timings: Timings,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Train, evaluate, run every baseline, build the indicator report.
pub fn run(scenario: &ScenarioConfig, mode: DecisionMode, seed: u64, cache: &SecrecyCache) -> Result<RunOutput> {
    let started = Instant::now();
    let env = environment(scenario, seed, cache)?;
    let secrecy_ms = ms(started);

    let hp = scenario.hyperparams(mode);
    let started = Instant::now();
    let tables = train(&env, mode, &hp, seed)?;
    let train_ms = ms(started);

    let started = Instant::now();
    let trace = evaluate(&env, &tables, hp.slots, seed)?;
    let baselines = baseline_policies(scenario)
        .into_iter()
        .map(|p| Ok((p, run_baseline(&env, scenario, p, hp.slots, seed)?)))
        .collect::<Result<Vec<_>>>()?;
    let report = RelativeIndicatorReport::build(&trace, &baselines, scenario.agent_count())?;
    let evaluate_ms = ms(started);

    Ok(RunOutput {
        scenario: scenario.clone(),
        mode,
        seed,
        env,
        tables,
        trace,
        baselines,
        report,
        timings: Timings {
            secrecy_ms,
            train_ms,
            evaluate_ms,
        },
    })
}

/// Independent runs over `seeds`, in parallel; results are in seed order.
pub fn run_sweep(scenario: &ScenarioConfig, mode: DecisionMode, seeds: &[u64], cache: &SecrecyCache) -> Result<Vec<RunOutput>> {
    seeds.par_iter().map(|&s| run(scenario, mode, s, cache)).collect()
}
