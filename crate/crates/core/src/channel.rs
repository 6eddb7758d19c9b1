//! Node geometry, seeded random streams and Rayleigh block fading.
//!
//! Every fading coefficient between two nodes separated by `D` meters is a
//! circularly-symmetric complex Gaussian with variance `1/D`. Fading is drawn
//! independently for every time slot. Receivers and the eavesdropper carry a
//! single antenna, so a link vector has the length of the source's antenna
//! count (one for receiver-emitted jamming).

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type CVec = Vec<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodePosition {
    pub x: f64,
    pub y: f64,
}

impl NodePosition {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &NodePosition) -> f64 {
        distance(*self, *other)
    }
}

/// Euclidean distance in meters.
pub fn distance(p: NodePosition, q: NodePosition) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Surface {
    pub fn centered_square(side: f64) -> Self {
        let h = side / 2.0;
        Self {
            x_min: -h,
            x_max: h,
            y_min: -h,
            y_max: h,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: NodePosition) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub transmitters: Vec<NodePosition>,
    pub receivers: Vec<NodePosition>,
    pub surface: Surface,
    pub eavesdropper_mean: NodePosition,
    /// Per-axis variance of the eavesdropper location pdf, m².
    pub eavesdropper_variance: f64,
}

impl Geometry {
    /// Two agents on a 4 m x 4 m surface, eavesdropper pdf centered at the origin.
    pub fn two_agent_default() -> Self {
        Self {
            transmitters: vec![NodePosition::new(-1.0, 1.0), NodePosition::new(-1.0, -1.0)],
            receivers: vec![NodePosition::new(1.0, 1.0), NodePosition::new(1.0, -1.0)],
            surface: Surface::centered_square(4.0),
            eavesdropper_mean: NodePosition::new(0.0, 0.0),
            eavesdropper_variance: 1.0,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.transmitters.len()
    }

    /// Every node position (transmitters first, then receivers).
    pub fn nodes(&self) -> impl Iterator<Item = NodePosition> + '_ {
        self.transmitters.iter().chain(self.receivers.iter()).copied()
    }
}

/// The physical layer shared by all agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub geometry: Geometry,
    /// Transmit antenna count `W_i` per agent.
    pub antennas: Vec<usize>,
    /// Noise variance at each agent's receiver, watts.
    pub receiver_noise: Vec<f64>,
    pub eavesdropper_noise: f64,
}

impl Network {
    pub fn agent_count(&self) -> usize {
        self.antennas.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.agent_count();
        let g = &self.geometry;
        if n == 0 {
            return Err(Error::config("at least one agent is required"));
        }
        if g.transmitters.len() != n || g.receivers.len() != n || self.receiver_noise.len() != n {
            return Err(Error::config("per-agent geometry, antennas and noise must have equal length"));
        }
        for p in g.nodes().chain(std::iter::once(g.eavesdropper_mean)) {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::config(format!("non-finite node coordinate ({}, {})", p.x, p.y)));
            }
        }
        if !(g.surface.width() > 0.0 && g.surface.height() > 0.0) {
            return Err(Error::config("surface must have positive area"));
        }
        if !(g.eavesdropper_variance > 0.0 && g.eavesdropper_variance.is_finite()) {
            return Err(Error::config("eavesdropper pdf variance must be positive"));
        }
        if let Some(i) = self.antennas.iter().position(|&w| w == 0) {
            return Err(Error::config(format!("agent {} has no transmit antenna", i + 1)));
        }
        let noises = self.receiver_noise.iter().chain(std::iter::once(&self.eavesdropper_noise));
        if noises.into_iter().any(|&n0| !(n0 > 0.0 && n0.is_finite())) {
            return Err(Error::config("noise variances must be positive"));
        }
        for j in 0..n {
            for i in 0..n {
                if distance(g.transmitters[j], g.receivers[i]) <= 0.0 {
                    return Err(Error::config(format!(
                        "transmitter {} coincides with receiver {}",
                        j + 1,
                        i + 1
                    )));
                }
                if i != j && distance(g.receivers[j], g.receivers[i]) <= 0.0 {
                    return Err(Error::config(format!(
                        "receivers {} and {} coincide",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Nodes placed outside the surface. Not an error.
    pub fn warnings(&self) -> Vec<String> {
        let g = &self.geometry;
        g.nodes()
            .filter(|p| !g.surface.contains(*p))
            .map(|p| format!("node ({}, {}) lies outside the surface", p.x, p.y))
            .collect()
    }
}

/// Derives an independent ChaCha8 stream from a master seed, a label and a
/// list of indices. Streams with different labels or indices never overlap,
/// so adding a consumer never perturbs existing streams.
pub fn derive_stream(master: u64, label: &str, indices: &[u64]) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    for idx in indices {
        hasher.update(idx.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest[..32]);
    ChaCha8Rng::from_seed(seed)
}

/// Draws `w` i.i.d. CN(0, 1/d) coefficients.
pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R, d: f64, w: usize) -> Result<CVec> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::config(format!("fading link distance must be positive, got {d}")));
    }
    let normal = Normal::new(0.0, (0.5 / d).sqrt()).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok((0..w)
        .map(|_| {
            let re = normal.sample(rng);
            let im = normal.sample(rng);
            Complex64::new(re, im)
        })
        .collect())
}

/// One block-fading draw for every agent-to-agent link, plus the null-space
/// artificial-noise direction of each agent able to form one.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `tx_rx[j][i]`: transmitter `a_j` to receiver `b_i`, length `W_j`.
    pub tx_rx: Vec<Vec<CVec>>,
    /// `rx_rx[j][i]`: receiver `b_j` to receiver `b_i` (scalar); zero on the diagonal.
    pub rx_rx: Vec<Vec<Complex64>>,
    /// Unit AN precoder in the null space of `tx_rx[j][j]`; `None` when `W_j < 2`.
    pub an_directions: Vec<Option<CVec>>,
    pub receiver_noise: Vec<f64>,
}

impl ChannelRealization {
    pub fn draw<R: Rng + ?Sized>(network: &Network, rng: &mut R) -> Result<Self> {
        let g = &network.geometry;
        let n = network.agent_count();
        let mut tx_rx = Vec::with_capacity(n);
        for j in 0..n {
            let row = (0..n)
                .map(|i| {
                    sample_fading(rng, distance(g.transmitters[j], g.receivers[i]), network.antennas[j])
                })
                .collect::<Result<Vec<_>>>()?;
            tx_rx.push(row);
        }
        let mut rx_rx = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (j, row) in rx_rx.iter_mut().enumerate() {
            for (i, h) in row.iter_mut().enumerate() {
                if i != j {
                    *h = sample_fading(rng, distance(g.receivers[j], g.receivers[i]), 1)?[0];
                }
            }
        }
        let an_directions = (0..n)
            .map(|j| {
                if network.antennas[j] >= 2 {
                    crate::pls::null_space_direction(&tx_rx[j][j], rng).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tx_rx,
            rx_rx,
            an_directions,
            receiver_noise: network.receiver_noise.clone(),
        })
    }

    pub fn agent_count(&self) -> usize {
        self.tx_rx.len()
    }
}

/// Fading from every agent node toward one eavesdropper location.
#[derive(Debug, Clone, PartialEq)]
pub struct EavesdropperLinks {
    pub point: NodePosition,
    /// Transmitter `a_j` to the eavesdropper, length `W_j`.
    pub tx_e: Vec<CVec>,
    /// Receiver `b_j` to the eavesdropper (scalar).
    pub rx_e: Vec<Complex64>,
    pub noise: f64,
}

impl EavesdropperLinks {
    pub fn draw<R: Rng + ?Sized>(network: &Network, point: NodePosition, rng: &mut R) -> Result<Self> {
        let g = &network.geometry;
        let tx_e = g
            .transmitters
            .iter()
            .zip(&network.antennas)
            .map(|(&a, &w)| sample_fading(rng, distance(a, point), w))
            .collect::<Result<Vec<_>>>()?;
        let rx_e = g
            .receivers
            .iter()
            .map(|&b| sample_fading(rng, distance(b, point), 1).map(|v| v[0]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            point,
            tx_e,
            rx_e,
            noise: network.eavesdropper_noise,
        })
    }
}
