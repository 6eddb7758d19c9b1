//! Signal model of the four physical-layer-security policies.
//!
//! Every agent beamforms its message along the normalized direct channel. The
//! policies differ in the security signal they add:
//!
//! * `SCAN`: subcarrier artificial noise, emitted from the first transmit
//!   antenna; the legitimate receiver suffers a cancellation error factor 2.
//! * `FDAI`: full-duplex jamming emitted by the agent's own receiver.
//! * `AN`: artificial noise precoded into the null space of the direct channel.
//! * `B`: beamforming only, no security signal.
//!
//! Gains are split from powers: [`ReceiverGains`] and [`EavesdropperGains`]
//! hold unit-power channel gains of one realization, so that many action
//! profiles can be scored against the same fading draw.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, CVec, ChannelRealization, EavesdropperLinks};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlsPolicy {
    Scan,
    Fdai,
    An,
    Beamforming,
}

impl PlsPolicy {
    pub const ALL: [PlsPolicy; 4] = [
        PlsPolicy::Scan,
        PlsPolicy::Fdai,
        PlsPolicy::An,
        PlsPolicy::Beamforming,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlsPolicy::Scan => "SCAN",
            PlsPolicy::Fdai => "FDAI",
            PlsPolicy::An => "AN",
            PlsPolicy::Beamforming => "B",
        }
    }

    /// Position in [`PlsPolicy::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn cancellation_coefficient(self) -> f64 {
        cancellation_coefficient(self)
    }

    pub fn emits_security_signal(self) -> bool {
        self != PlsPolicy::Beamforming
    }
}

impl fmt::Display for PlsPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlsPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "scan" => Ok(PlsPolicy::Scan),
            "fdai" => Ok(PlsPolicy::Fdai),
            "an" => Ok(PlsPolicy::An),
            "b" | "beamforming" => Ok(PlsPolicy::Beamforming),
            _ => Err(Error::config(format!(
                "unknown PLS policy `{s}` (expected scan, fdai, an or b)"
            ))),
        }
    }
}

/// Interference cancellation error coefficient at the legitimate receiver.
pub fn cancellation_coefficient(policy: PlsPolicy) -> f64 {
    match policy {
        PlsPolicy::Scan => 2.0,
        PlsPolicy::Fdai | PlsPolicy::An | PlsPolicy::Beamforming => 1.0,
    }
}

/// Message and security-signal power levels, in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionConfig {
    pub message_db: f64,
    pub security_db: f64,
}

impl TransmissionConfig {
    pub const fn new(message_db: f64, security_db: f64) -> Self {
        Self {
            message_db,
            security_db,
        }
    }

    pub fn message_power(&self) -> f64 {
        db_to_linear(self.message_db)
    }

    pub fn security_power(&self) -> f64 {
        db_to_linear(self.security_db)
    }

    /// `"msg/sec"` in dB, e.g. `"10/5"`.
    pub fn label(&self) -> String {
        format!("{}/{}", self.message_db, self.security_db)
    }

    pub fn validate(&self) -> Result<()> {
        if self.message_db.is_finite() && self.security_db.is_finite() {
            Ok(())
        } else {
            Err(Error::config(format!("non-finite transmission config {}", self.label())))
        }
    }
}

/// Indices `(k_i, l_i)` into an agent's policy set and configuration set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentAction {
    pub policy: usize,
    pub config: usize,
}

impl AgentAction {
    pub const fn new(policy: usize, config: usize) -> Self {
        Self { policy, config }
    }
}

/// The actions of all agents in one slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionProfile(pub Vec<AgentAction>);

impl ActionProfile {
    pub fn uniform(agents: usize, action: AgentAction) -> Self {
        Self(vec![action; agents])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn with_action(&self, agent: usize, action: AgentAction) -> Self {
        let mut next = self.clone();
        next.0[agent] = action;
        next
    }

    pub fn policies(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|a| a.policy)
    }
}

impl std::ops::Index<usize> for ActionProfile {
    type Output = AgentAction;

    fn index(&self, i: usize) -> &AgentAction {
        &self.0[i]
    }
}

/// Mixed-radix enumeration of index tuples; the first digit is the most
/// significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedRadix {
    radices: Vec<usize>,
}

impl MixedRadix {
    pub fn new(radices: Vec<usize>) -> Self {
        assert!(radices.iter().all(|&r| r >= 1), "radices must be positive");
        Self { radices }
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn len(&self) -> usize {
        self.radices.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.radices.len());
        digits.iter().zip(&self.radices).fold(0, |acc, (&d, &r)| {
            assert!(d < r, "digit {d} out of range {r}");
            acc * r + d
        })
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.radices.len()];
        for (d, &r) in digits.iter_mut().zip(&self.radices).rev() {
            *d = index % r;
            index /= r;
        }
        digits
    }
}

/// Enumeration of every joint action profile: all policy tuples times all
/// configuration tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSpace {
    policies: MixedRadix,
    configs: MixedRadix,
}

impl ProfileSpace {
    pub fn new(policy_counts: Vec<usize>, config_counts: Vec<usize>) -> Self {
        assert_eq!(policy_counts.len(), config_counts.len());
        Self {
            policies: MixedRadix::new(policy_counts),
            configs: MixedRadix::new(config_counts),
        }
    }

    pub fn len(&self) -> usize {
        self.policies.len() * self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, profile: &ActionProfile) -> usize {
        let k: Vec<usize> = profile.0.iter().map(|a| a.policy).collect();
        let l: Vec<usize> = profile.0.iter().map(|a| a.config).collect();
        self.policies.encode(&k) * self.configs.len() + self.configs.encode(&l)
    }

    pub fn profile(&self, index: usize) -> ActionProfile {
        let k = self.policies.decode(index / self.configs.len());
        let l = self.configs.decode(index % self.configs.len());
        ActionProfile(k.into_iter().zip(l).map(|(k, l)| AgentAction::new(k, l)).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = ActionProfile> + '_ {
        (0..self.len()).map(|i| self.profile(i))
    }
}

/// An agent's resolved transmission in one slot: policy and linear powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emission {
    pub policy: PlsPolicy,
    pub message_power: f64,
    pub security_power: f64,
}

/// `vᴴh`.
pub fn inner(v: &[Complex64], h: &[Complex64]) -> Complex64 {
    assert_eq!(v.len(), h.len(), "vector length mismatch");
    v.iter().zip(h).map(|(a, b)| a.conj() * b).sum()
}

fn norm(h: &[Complex64]) -> f64 {
    h.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit-norm maximum-ratio transmit direction `h/‖h‖`.
pub fn beamform(h: &[Complex64]) -> Result<CVec> {
    let n = norm(h);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Numerical("cannot beamform along a zero channel".into()));
    }
    Ok(h.iter().map(|c| c / n).collect())
}

/// Uniformly random unit vector `u` with `uᴴh = 0`. Needs `h.len() >= 2`.
pub fn null_space_direction<R: Rng + ?Sized>(h: &[Complex64], rng: &mut R) -> Result<CVec> {
    if h.len() < 2 {
        return Err(Error::Numerical("null space of a scalar channel is empty".into()));
    }
    let hh = h.iter().map(|c| c.norm_sqr()).sum::<f64>();
    if hh <= 0.0 {
        return Err(Error::Numerical("null space of a zero channel is undefined".into()));
    }
    loop {
        let z: CVec = (0..h.len())
            .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        // project out the channel direction
        let coef = inner(h, &z) / hh;
        let u: CVec = z.iter().zip(h).map(|(zk, hk)| zk - coef * hk).collect();
        let n = norm(&u);
        if n > 1e-12 {
            let mut u: CVec = u.iter().map(|c| c / n).collect();
            // one Gram-Schmidt refinement keeps |uᴴh| at round-off level
            let c2 = inner(h, &u) / hh;
            for (uk, hk) in u.iter_mut().zip(h) {
                *uk -= c2 * hk;
            }
            let n2 = norm(&u);
            return Ok(u.iter().map(|c| c / n2).collect());
        }
    }
}

/// Message-signal interference `|v_jᴴ h|² · P_j`.
pub fn message_interference(v_j: &[Complex64], h_to_target: &[Complex64], msg_power: f64) -> f64 {
    inner(v_j, h_to_target).norm_sqr() * msg_power
}

/// Where a security signal lands.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    /// The receiver `b_i` of agent `i`.
    Receiver(usize),
    Eavesdropper(&'a EavesdropperLinks),
}

/// Security-signal interference of agent `j` at `target` for one realization.
pub fn security_interference(
    policy: PlsPolicy,
    realization: &ChannelRealization,
    j: usize,
    target: Target<'_>,
    sec_power: f64,
) -> Result<f64> {
    let own_receiver = matches!(target, Target::Receiver(i) if i == j);
    let gain = match policy {
        PlsPolicy::Beamforming => 0.0,
        PlsPolicy::Scan => match target {
            // γ = 2 accounts for the agent's own subcarrier noise
            Target::Receiver(_) if own_receiver => 0.0,
            Target::Receiver(i) => realization.tx_rx[j][i][0].norm_sqr(),
            Target::Eavesdropper(e) => e.tx_e[j][0].norm_sqr(),
        },
        PlsPolicy::Fdai => match target {
            // full-duplex receiver cancels its own jamming
            Target::Receiver(_) if own_receiver => 0.0,
            Target::Receiver(i) => realization.rx_rx[j][i].norm_sqr(),
            Target::Eavesdropper(e) => e.rx_e[j].norm_sqr(),
        },
        PlsPolicy::An => {
            let dir = realization.an_directions[j].as_ref().ok_or_else(|| Error::PolicyInfeasible {
                agent: j + 1,
                policy: PlsPolicy::An.name(),
                reason: "artificial noise needs at least two transmit antennas".into(),
            })?;
            let h = match target {
                Target::Receiver(i) => &realization.tx_rx[j][i],
                Target::Eavesdropper(e) => &e.tx_e[j],
            };
            inner(dir, h).norm_sqr()
        }
    };
    Ok(gain * sec_power)
}

/// Unit-power gains at the legitimate receivers for one realization.
#[derive(Debug, Clone)]
pub struct ReceiverGains {
    beamformers: Vec<CVec>,
    /// `|v_iᴴ h_{a_i b_i}|²`
    signal: Vec<f64>,
    /// `[j][i]`: `|v_jᴴ h_{a_j b_i}|²`
    message: Vec<Vec<f64>>,
    /// `[j][i][policy]`: security gain of agent `j` at `b_i`, NaN if infeasible.
    security: Vec<Vec<[f64; 4]>>,
    noise: Vec<f64>,
}

impl ReceiverGains {
    pub fn new(realization: &ChannelRealization) -> Result<Self> {
        let n = realization.agent_count();
        let beamformers = (0..n)
            .map(|i| beamform(&realization.tx_rx[i][i]))
            .collect::<Result<Vec<_>>>()?;
        let signal = (0..n)
            .map(|i| message_interference(&beamformers[i], &realization.tx_rx[i][i], 1.0))
            .collect();
        let message = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| message_interference(&beamformers[j], &realization.tx_rx[j][i], 1.0))
                    .collect()
            })
            .collect();
        let security = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| security_gains(realization, j, Target::Receiver(i)))
                    .collect()
            })
            .collect();
        Ok(Self {
            beamformers,
            signal,
            message,
            security,
            noise: realization.receiver_noise.clone(),
        })
    }

    pub fn agent_count(&self) -> usize {
        self.signal.len()
    }

    pub fn beamformer(&self, i: usize) -> &[Complex64] {
        &self.beamformers[i]
    }

    /// Interference `Υ_i` from all other agents at receiver `b_i`.
    pub fn interference(&self, i: usize, emissions: &[Emission]) -> f64 {
        emissions
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, e)| {
                self.message[j][i] * e.message_power + self.security[j][i][e.policy.index()] * e.security_power
            })
            .sum()
    }

    pub fn sinr(&self, i: usize, emissions: &[Emission]) -> f64 {
        let e = &emissions[i];
        self.signal[i] * e.message_power
            / (e.policy.cancellation_coefficient() * (self.interference(i, emissions) + self.noise[i]))
    }
}

/// Unit-power gains toward one eavesdropper location.
#[derive(Debug, Clone)]
pub struct EavesdropperGains {
    /// `|v_iᴴ h_{a_i e}|²`
    signal: Vec<f64>,
    /// `[j][policy]`: security gain of agent `j` at the eavesdropper.
    security: Vec<[f64; 4]>,
    noise: f64,
}

impl EavesdropperGains {
    pub fn new(receivers: &ReceiverGains, realization: &ChannelRealization, eve: &EavesdropperLinks) -> Self {
        let n = receivers.agent_count();
        let signal = (0..n)
            .map(|i| message_interference(&receivers.beamformers[i], &eve.tx_e[i], 1.0))
            .collect();
        let security = (0..n)
            .map(|j| security_gains(realization, j, Target::Eavesdropper(eve)))
            .collect();
        Self {
            signal,
            security,
            noise: eve.noise,
        }
    }

    /// Interference at the eavesdropper when decoding agent `i`: the other
    /// agents' messages plus every agent's security signal, including `i`'s.
    pub fn interference(&self, i: usize, emissions: &[Emission]) -> f64 {
        let messages: f64 = emissions
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, e)| self.signal[j] * e.message_power)
            .sum();
        let security: f64 = emissions
            .iter()
            .enumerate()
            .map(|(j, e)| self.security[j][e.policy.index()] * e.security_power)
            .sum();
        messages + security
    }

    pub fn sinr(&self, i: usize, emissions: &[Emission]) -> f64 {
        self.signal[i] * emissions[i].message_power / (self.interference(i, emissions) + self.noise)
    }
}

fn security_gains(realization: &ChannelRealization, j: usize, target: Target<'_>) -> [f64; 4] {
    PlsPolicy::ALL.map(|p| security_interference(p, realization, j, target, 1.0).unwrap_or(f64::NAN))
}

/// SINR at receiver `b_i`.
pub fn receiver_sinr(i: usize, emissions: &[Emission], realization: &ChannelRealization) -> Result<f64> {
    Ok(ReceiverGains::new(realization)?.sinr(i, emissions))
}

/// SINR of agent `i`'s message at the eavesdropper location in `eve`.
pub fn eavesdropper_sinr(
    i: usize,
    emissions: &[Emission],
    realization: &ChannelRealization,
    eve: &EavesdropperLinks,
) -> Result<f64> {
    let rx = ReceiverGains::new(realization)?;
    Ok(EavesdropperGains::new(&rx, realization, eve).sinr(i, emissions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{derive_stream, Geometry, Network, NodePosition};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn network() -> Network {
        Network {
            geometry: Geometry::two_agent_default(),
            antennas: vec![2, 2],
            receiver_noise: vec![1.0, 1.0],
            eavesdropper_noise: 1.0,
        }
    }

    fn single_agent(h: CVec) -> ChannelRealization {
        ChannelRealization {
            tx_rx: vec![vec![h]],
            rx_rx: vec![vec![c(0.0, 0.0)]],
            an_directions: vec![None],
            receiver_noise: vec![1.0],
        }
    }

    fn emission(policy: PlsPolicy, msg: f64, sec: f64) -> Emission {
        Emission {
            policy,
            message_power: msg,
            security_power: sec,
        }
    }

    #[test]
    fn policy_names_round_trip() {
        for p in PlsPolicy::ALL {
            assert_eq!(p.name().parse::<PlsPolicy>().unwrap(), p);
        }
        assert_eq!("sc-an".parse::<PlsPolicy>().unwrap(), PlsPolicy::Scan);
        assert!("xyz".parse::<PlsPolicy>().is_err());
    }

    #[test]
    fn cancellation_coefficients() {
        assert_eq!(cancellation_coefficient(PlsPolicy::Scan), 2.0);
        assert_eq!(cancellation_coefficient(PlsPolicy::Beamforming), 1.0);
        assert_eq!(cancellation_coefficient(PlsPolicy::An), 1.0);
        assert_eq!(cancellation_coefficient(PlsPolicy::Fdai), 1.0);
    }

    #[test]
    fn beamform_normalizes() {
        assert_eq!(beamform(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap(), vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let v = beamform(&[c(3.0, 4.0)]).unwrap();
        assert!((v[0] - c(0.6, 0.8)).norm() < 1e-15);
        assert!(beamform(&[c(0.0, 0.0)]).is_err());
        let mut rng = derive_stream(2, "bf", &[]);
        for _ in 0..1000 {
            let h = crate::channel::sample_fading(&mut rng, 1.3, 3).unwrap();
            assert!((norm(&beamform(&h).unwrap()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn message_interference_examples() {
        let v = [c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(message_interference(&v, &[c(0.0, 0.0), c(7.0, 1.0)], 10.0), 0.0);
        assert!((message_interference(&v, &[c(0.5, 0.0), c(-3.0, 2.0)], 10.0) - 2.5).abs() < 1e-12);
        // hand-expanded conj(v1)h1 + conj(v2)h2
        let v = [c(0.3, -0.2), c(-0.7, 0.4)];
        let h = [c(1.1, 0.5), c(0.2, -0.9)];
        let re = 0.3 * 1.1 + (-0.2) * 0.5 + (-0.7) * 0.2 + 0.4 * (-0.9);
        let im = 0.3 * 0.5 - (-0.2) * 1.1 + (-0.7) * (-0.9) - 0.4 * 0.2;
        let expected = (re * re + im * im) * 2.0;
        assert!((message_interference(&v, &h, 2.0) - expected).abs() < 1e-12);
    }

    #[test]
    #[should_panic(expected = "length mismatch")]
    fn message_interference_length_mismatch() {
        message_interference(&[c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 1.0)], 1.0);
    }

    #[test]
    fn security_interference_examples() {
        let net = network();
        let mut r = ChannelRealization::draw(&net, &mut derive_stream(4, "sec", &[])).unwrap();
        let eve = EavesdropperLinks::draw(&net, NodePosition::new(0.3, 0.1), &mut derive_stream(4, "e", &[])).unwrap();
        for target in [Target::Receiver(0), Target::Receiver(1), Target::Eavesdropper(&eve)] {
            let v = security_interference(PlsPolicy::Beamforming, &r, 0, target, 10.0).unwrap();
            assert_eq!(v, 0.0);
        }
        let an_own = security_interference(PlsPolicy::An, &r, 0, Target::Receiver(0), 10.0).unwrap();
        assert!(an_own < 1e-10);
        r.tx_rx[0][1][0] = c(0.3, 0.4);
        let scan = security_interference(PlsPolicy::Scan, &r, 0, Target::Receiver(1), db_to_linear(5.0)).unwrap();
        assert!((scan - 0.79057).abs() < 1e-5);
        r.an_directions[1] = None;
        let err = security_interference(PlsPolicy::An, &r, 1, Target::Receiver(0), 1.0);
        assert!(matches!(err, Err(Error::PolicyInfeasible { .. })));
    }

    #[test]
    fn an_self_orthogonality() {
        let net = network();
        let mut rng = derive_stream(9, "an", &[]);
        for _ in 0..1000 {
            let r = ChannelRealization::draw(&net, &mut rng).unwrap();
            for j in 0..2 {
                let v = security_interference(PlsPolicy::An, &r, j, Target::Receiver(j), 1.0).unwrap();
                assert!(v < 1e-10);
                let u = r.an_directions[j].as_ref().unwrap();
                assert!((norm(u) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_agent_sinr() {
        let r = single_agent(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let b = receiver_sinr(0, &[emission(PlsPolicy::Beamforming, 10.0, 10.0)], &r).unwrap();
        assert!((b - 20.0).abs() < 1e-12);
        let s = receiver_sinr(0, &[emission(PlsPolicy::Scan, 10.0, 10.0)], &r).unwrap();
        assert!((s - 10.0).abs() < 1e-12);
    }

    #[test]
    fn eavesdropper_sinr_collapses_for_beamforming() {
        let net = Network {
            geometry: Geometry {
                transmitters: vec![NodePosition::new(-1.0, 1.0)],
                receivers: vec![NodePosition::new(1.0, 1.0)],
                ..Geometry::two_agent_default()
            },
            antennas: vec![2],
            receiver_noise: vec![1.0],
            eavesdropper_noise: 1.0,
        };
        let mut rng = derive_stream(1, "eve", &[]);
        let r = ChannelRealization::draw(&net, &mut rng).unwrap();
        let eve = EavesdropperLinks::draw(&net, NodePosition::new(0.0, 0.0), &mut rng).unwrap();
        let em = [emission(PlsPolicy::Beamforming, 10.0, 10.0)];
        let v = beamform(&r.tx_rx[0][0]).unwrap();
        let expected = inner(&v, &eve.tx_e[0]).norm_sqr() * 10.0 / 1.0;
        assert!((eavesdropper_sinr(0, &em, &r, &eve).unwrap() - expected).abs() < 1e-12);
        let an = [emission(PlsPolicy::An, 10.0, 10.0)];
        assert!(eavesdropper_sinr(0, &an, &r, &eve).unwrap() < expected);
    }

    #[test]
    fn interference_monotone_in_security_power() {
        let net = network();
        let mut rng = derive_stream(21, "mono", &[]);
        for _ in 0..200 {
            let r = ChannelRealization::draw(&net, &mut rng).unwrap();
            let g = ReceiverGains::new(&r).unwrap();
            for p in PlsPolicy::ALL {
                let lo = [emission(PlsPolicy::Beamforming, 10.0, 1.0), emission(p, 10.0, 1.0)];
                let hi = [emission(PlsPolicy::Beamforming, 10.0, 1.0), emission(p, 10.0, 10.0)];
                if p == PlsPolicy::Beamforming {
                    assert_eq!(g.sinr(0, &lo), g.sinr(0, &hi));
                } else {
                    assert!(g.sinr(0, &hi) <= g.sinr(0, &lo));
                }
            }
        }
    }

    #[test]
    fn sinr_scale_covariance() {
        let net = network();
        let mut rng = derive_stream(22, "scale", &[]);
        for _ in 0..100 {
            let r = ChannelRealization::draw(&net, &mut rng).unwrap();
            let eve = EavesdropperLinks::draw(&net, NodePosition::new(0.5, -0.2), &mut rng).unwrap();
            let em = [emission(PlsPolicy::Fdai, 3.0, 5.0), emission(PlsPolicy::An, 7.0, 2.0)];
            let scale = 4.5;
            let em2 = em.map(|e| emission(e.policy, e.message_power * scale, e.security_power * scale));
            let mut r2 = r.clone();
            r2.receiver_noise.iter_mut().for_each(|n| *n *= scale);
            let mut eve2 = eve.clone();
            eve2.noise *= scale;
            for i in 0..2 {
                let a = receiver_sinr(i, &em, &r).unwrap();
                let b = receiver_sinr(i, &em2, &r2).unwrap();
                assert!((a - b).abs() < 1e-10 * a.max(1.0));
                let a = eavesdropper_sinr(i, &em, &r, &eve).unwrap();
                let b = eavesdropper_sinr(i, &em2, &r2, &eve2).unwrap();
                assert!((a - b).abs() < 1e-10 * a.max(1.0));
            }
        }
    }

    #[test]
    fn profile_space_is_a_bijection() {
        let space = ProfileSpace::new(vec![4, 3], vec![2, 4]);
        assert_eq!(space.len(), 96);
        let mut seen = std::collections::HashSet::new();
        for (idx, p) in space.iter().enumerate() {
            assert_eq!(space.index(&p), idx);
            assert!(seen.insert(p));
        }
        let r = MixedRadix::new(vec![4, 4]);
        assert_eq!(r.decode(r.encode(&[2, 3])), vec![2, 3]);
        assert_eq!(r.encode(&[1, 0]), 4);
    }

    #[test]
    fn scan_halves_receiver_sinr() {
        let net = network();
        let mut rng = derive_stream(23, "half", &[]);
        let r = ChannelRealization::draw(&net, &mut rng).unwrap();
        let g = ReceiverGains::new(&r).unwrap();
        let other = emission(PlsPolicy::An, 10.0, 10.0);
        let scan = g.sinr(0, &[emission(PlsPolicy::Scan, 10.0, 3.0), other]);
        let fdai = g.sinr(0, &[emission(PlsPolicy::Fdai, 10.0, 3.0), other]);
        assert_eq!(scan, fdai / 2.0);
    }
}
