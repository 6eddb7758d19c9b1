//! Security, QoS and cost dimensions, the per-slot weight schedule, agent
//! utility and network utility.
//!
//! Each dimension is normalized by its maximum across agents in the same
//! slot, so exactly one agent (barring ties) scores 1 on each dimension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-9;

/// Dimension weights `(w_s, w_q, w_c)`, summing to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityWeights {
    pub security: f64,
    pub qos: f64,
    pub cost: f64,
}

impl UtilityWeights {
    pub fn new(security: f64, qos: f64, cost: f64) -> Result<Self> {
        let w = Self { security, qos, cost };
        w.check_components()?;
        if (w.sum() - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::config(format!(
                "utility weights ({security}, {qos}, {cost}) must sum to 1, got {}",
                w.sum()
            )));
        }
        Ok(w)
    }

    /// Accepts a row whose sum misses 1 by at most `tolerance` (rows printed
    /// with two decimals such as `(0.33, 0.33, 0.33)`), then rescales it onto
    /// the simplex.
    pub fn normalized(security: f64, qos: f64, cost: f64, tolerance: f64) -> Result<Self> {
        let w = Self { security, qos, cost };
        w.check_components()?;
        let sum = w.sum();
        if (sum - 1.0).abs() > tolerance {
            return Err(Error::config(format!(
                "utility weights ({security}, {qos}, {cost}) must sum to 1, got {sum}"
            )));
        }
        Ok(w.renormalized())
    }

    fn check_components(&self) -> Result<()> {
        let ok = [self.security, self.qos, self.cost]
            .iter()
            .all(|w| (0.0..=1.0).contains(w));
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!(
                "utility weights ({}, {}, {}) must each lie in [0, 1]",
                self.security, self.qos, self.cost
            )))
        }
    }

    pub fn sum(&self) -> f64 {
        self.security + self.qos + self.cost
    }

    fn renormalized(self) -> Self {
        let s = self.sum();
        Self {
            security: self.security / s,
            qos: self.qos / s,
            cost: self.cost / s,
        }
    }
}

/// Per-slot multiplicative drift of each weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeImpacts {
    pub security: f64,
    pub qos: f64,
    pub cost: f64,
}

impl Default for TimeImpacts {
    fn default() -> Self {
        Self {
            security: 0.99,
            qos: 1.005,
            cost: 1.005,
        }
    }
}

impl TimeImpacts {
    pub const NEUTRAL: TimeImpacts = TimeImpacts {
        security: 1.0,
        qos: 1.0,
        cost: 1.0,
    };

    /// Security may only shrink; QoS and cost may only grow.
    pub fn validate(&self) -> Result<()> {
        if !(self.security > 0.0 && self.security <= 1.0 && self.qos >= 1.0 && self.cost >= 1.0)
            || ![self.security, self.qos, self.cost].iter().all(|g| g.is_finite())
        {
            return Err(Error::config(format!(
                "time impacts must satisfy 0 < security <= 1 <= qos, cost; got ({}, {}, {})",
                self.security, self.qos, self.cost
            )));
        }
        Ok(())
    }
}

/// Weights in effect at slot `t` (1-based): `base ∘ γ^(t−1)`, rescaled onto
/// the simplex.
pub fn weight_schedule(base: &UtilityWeights, impacts: &TimeImpacts, t: usize) -> UtilityWeights {
    assert!(t >= 1, "slots are 1-based");
    if t == 1 {
        return *base;
    }
    let e = (t - 1) as i32;
    UtilityWeights {
        security: base.security * impacts.security.powi(e),
        qos: base.qos * impacts.qos.powi(e),
        cost: base.cost * impacts.cost.powi(e),
    }
    .renormalized()
}

/// Which power levels count toward the cost dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostPower {
    /// Message power plus security-signal power.
    #[default]
    Total,
    SecurityOnly,
}

/// Divides by the maximum; all-zero input maps to all zeros.
fn normalize_by_max(values: &[f64]) -> Vec<f64> {
    let max = values.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter().map(|v| v / max).collect()
    } else {
        vec![0.0; values.len()]
    }
}

/// `s_i = Ω_i / max_j Ω_j`.
pub fn security_dim(omegas: &[f64]) -> Vec<f64> {
    normalize_by_max(omegas)
}

/// `q_i = SINR_i / max_j SINR_j`.
pub fn qos_dim(sinrs: &[f64]) -> Vec<f64> {
    normalize_by_max(sinrs)
}

/// `c_i = (W_i + R_i) / max_j (W_j + R_j)`, with `R_i` a linear power.
pub fn cost_dim(antennas: &[usize], powers: &[f64]) -> Vec<f64> {
    assert_eq!(antennas.len(), powers.len());
    let raw: Vec<f64> = antennas.iter().zip(powers).map(|(&w, &r)| w as f64 + r).collect();
    normalize_by_max(&raw)
}

/// `δ · (w_s·s + w_q·q + w_c·(1 − c))`.
pub fn agent_utility(s: f64, q: f64, c: f64, w: &UtilityWeights, delta: f64) -> f64 {
    delta * (w.security * s + w.qos * q + w.cost * (1.0 - c))
}

pub fn network_utility(utilities: &[f64], agent_weights: &[f64]) -> f64 {
    assert_eq!(utilities.len(), agent_weights.len());
    utilities.iter().zip(agent_weights).map(|(u, w)| u * w).sum()
}

/// One agent's scored slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentScore {
    pub security: f64,
    pub qos: f64,
    pub cost: f64,
    pub delta: f64,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityBreakdown {
    pub agents: Vec<AgentScore>,
    pub network_utility: f64,
}

/// Everything needed to score one slot, already evaluated per agent.
#[derive(Debug, Clone)]
pub struct SlotInputs<'a> {
    pub omegas: &'a [f64],
    pub sinrs: &'a [f64],
    pub antennas: &'a [usize],
    pub cost_powers: &'a [f64],
    pub weights: &'a [UtilityWeights],
    pub deltas: &'a [f64],
    pub agent_weights: &'a [f64],
}

impl UtilityBreakdown {
    pub fn score(inputs: &SlotInputs<'_>) -> Self {
        let s = security_dim(inputs.omegas);
        let q = qos_dim(inputs.sinrs);
        let c = cost_dim(inputs.antennas, inputs.cost_powers);
        let agents: Vec<AgentScore> = (0..s.len())
            .map(|i| {
                let utility = agent_utility(s[i], q[i], c[i], &inputs.weights[i], inputs.deltas[i]);
                AgentScore {
                    security: s[i],
                    qos: q[i],
                    cost: c[i],
                    delta: inputs.deltas[i],
                    utility,
                }
            })
            .collect();
        let utilities: Vec<f64> = agents.iter().map(|a| a.utility).collect();
        let network_utility = network_utility(&utilities, inputs.agent_weights);
        Self {
            agents,
            network_utility,
        }
    }

    pub fn utilities(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.utility).collect()
    }
}
