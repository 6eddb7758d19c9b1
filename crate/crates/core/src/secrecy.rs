//! Secrecy capacity, its ergodic Monte-Carlo estimate, and secrecy pressure:
//! the ergodic secrecy map averaged over the surface with the eavesdropper
//! location pdf as weight.
//!
//! Quadrature is the midpoint rule on a uniform grid with the pdf renormalized
//! over the grid points. Each grid point owns a random stream derived from the
//! master seed and the point index, so results do not depend on evaluation
//! order or thread count. All agents (and, in [`SecrecyTable`], all action
//! profiles) are scored on the same fading draws.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{derive_stream, ChannelRealization, EavesdropperLinks, Network, NodePosition, Surface};
use crate::error::{Error, Result};
use crate::pls::{ActionProfile, Emission, EavesdropperGains, ProfileSpace, ReceiverGains};

const SECRECY_STREAM: &str = "secrecy";

/// `max{0, ½log₂(1+sinr_b) − ½log₂(1+sinr_e)}` in bits per channel use.
pub fn secrecy_capacity(sinr_b: f64, sinr_e: f64) -> f64 {
    if sinr_b <= sinr_e {
        0.0
    } else {
        0.5 * ((1.0 + sinr_b) / (1.0 + sinr_e)).log2()
    }
}

/// A Monte-Carlo mean with its standard error. `std_error` is 0 for a
/// single sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    sum: f64,
    sum_sq: f64,
}

impl Accumulator {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn finish(&self, n: usize) -> Estimate {
        let nf = n as f64;
        let mean = self.sum / nf;
        let std_error = if n > 1 {
            let var = ((self.sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean,
            std_error,
            samples: n,
        }
    }
}

/// Cell centers of a uniform grid over the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub surface: Surface,
    pub resolution: usize,
    pub cell_area: f64,
    pub points: Vec<NodePosition>,
}

impl SurfaceGrid {
    pub fn new(surface: Surface, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::config(format!("grid resolution must be at least 2, got {resolution}")));
        }
        let dx = surface.width() / resolution as f64;
        let dy = surface.height() / resolution as f64;
        let mut points = Vec::with_capacity(resolution * resolution);
        for iy in 0..resolution {
            for ix in 0..resolution {
                points.push(NodePosition::new(
                    surface.x_min + (ix as f64 + 0.5) * dx,
                    surface.y_min + (iy as f64 + 0.5) * dy,
                ));
            }
        }
        Ok(Self {
            surface,
            resolution,
            cell_area: dx * dy,
            points,
        })
    }

    /// Drops grid points that coincide with a node; their pdf mass is
    /// redistributed when the pdf is normalized.
    pub fn excluding(mut self, nodes: &[NodePosition]) -> Self {
        self.points
            .retain(|p| nodes.iter().all(|n| n.distance(p) > 1e-9));
        self
    }

    /// Grid over the network's surface without the points that coincide
    /// with a transmitter or receiver.
    pub fn for_network(network: &Network, resolution: usize) -> Result<Self> {
        let nodes: Vec<NodePosition> = network.geometry.nodes().collect();
        Ok(Self::new(network.geometry.surface, resolution)?.excluding(&nodes))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Probability mass of the eavesdropper location at each grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct EavesdropperPdf {
    pub weights: Vec<f64>,
}

impl EavesdropperPdf {
    /// Isotropic Gaussian with per-axis `variance`, renormalized over the grid.
    pub fn gaussian(grid: &SurfaceGrid, mean: NodePosition, variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::config("eavesdropper pdf variance must be positive"));
        }
        let raw: Vec<f64> = grid
            .points
            .iter()
            .map(|p| {
                let d2 = (p.x - mean.x).powi(2) + (p.y - mean.y).powi(2);
                (-d2 / (2.0 * variance)).exp()
            })
            .collect();
        Self::normalized(raw)
    }

    pub fn uniform(grid: &SurfaceGrid) -> Self {
        let n = grid.len();
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    fn normalized(raw: Vec<f64>) -> Result<Self> {
        let total: f64 = raw.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Numerical("eavesdropper pdf has no mass on the grid".into()));
        }
        Ok(Self {
            weights: raw.into_iter().map(|w| w / total).collect(),
        })
    }
}

/// Ergodic secrecy capacity of every agent and every emission set at one
/// location, on shared fading draws. Returns `[profile][agent]`.
pub fn ergodic_secrecy_capacities<R: Rng + ?Sized>(
    network: &Network,
    point: NodePosition,
    profiles: &[Vec<Emission>],
    n_mc: usize,
    rng: &mut R,
) -> Result<Vec<Vec<Estimate>>> {
    if n_mc == 0 {
        return Err(Error::config("Monte-Carlo sample count must be at least 1"));
    }
    let agents = network.agent_count();
    let mut acc = vec![vec![Accumulator::default(); agents]; profiles.len()];
    for _ in 0..n_mc {
        let realization = ChannelRealization::draw(network, rng)?;
        let eve = EavesdropperLinks::draw(network, point, rng)?;
        let rx = ReceiverGains::new(&realization)?;
        let ev = EavesdropperGains::new(&rx, &realization, &eve);
        for (emissions, acc) in profiles.iter().zip(acc.iter_mut()) {
            for (i, a) in acc.iter_mut().enumerate() {
                a.push(secrecy_capacity(rx.sinr(i, emissions), ev.sinr(i, emissions)));
            }
        }
    }
    Ok(acc
        .iter()
        .map(|row| row.iter().map(|a| a.finish(n_mc)).collect())
        .collect())
}

/// Ergodic secrecy capacity of agent `i` at `point`.
pub fn ergodic_secrecy_capacity<R: Rng + ?Sized>(
    network: &Network,
    i: usize,
    point: NodePosition,
    emissions: &[Emission],
    n_mc: usize,
    rng: &mut R,
) -> Result<Estimate> {
    let est = ergodic_secrecy_capacities(network, point, &[emissions.to_vec()], n_mc, rng)?;
    Ok(est[0][i])
}

fn point_stream(seed: u64, grid: &SurfaceGrid, index: usize) -> rand_chacha::ChaCha8Rng {
    derive_stream(seed, SECRECY_STREAM, &[grid.resolution as u64, index as u64])
}

/// Per-point estimates `[point][profile][agent]`, one stream per point.
fn grid_estimates(
    network: &Network,
    profiles: &[Vec<Emission>],
    grid: &SurfaceGrid,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<Vec<Vec<Estimate>>>> {
    grid.points
        .par_iter()
        .enumerate()
        .map(|(idx, &p)| {
            let mut rng = point_stream(seed, grid, idx);
            ergodic_secrecy_capacities(network, p, profiles, n_mc, &mut rng)
        })
        .collect()
}

/// Weighted sum over points in point-index order.
fn integrate(per_point: impl Iterator<Item = Estimate>, pdf: &EavesdropperPdf) -> Estimate {
    let mut mean = 0.0;
    let mut var = 0.0;
    let mut samples = 0;
    for (est, &w) in per_point.zip(&pdf.weights) {
        mean += w * est.mean;
        var += w * w * est.std_error * est.std_error;
        samples = est.samples;
    }
    Estimate {
        mean,
        std_error: var.sqrt(),
        samples,
    }
}

/// Ergodic secrecy capacity of every agent at every grid point.
#[derive(Debug, Clone)]
pub struct SecrecyMap {
    pub points: Vec<NodePosition>,
    /// `[agent][point]`
    pub capacity: Vec<Vec<Estimate>>,
}

impl SecrecyMap {
    pub fn compute(
        network: &Network,
        emissions: &[Emission],
        grid: &SurfaceGrid,
        n_mc: usize,
        seed: u64,
    ) -> Result<Self> {
        let per_point = grid_estimates(network, &[emissions.to_vec()], grid, n_mc, seed)?;
        let capacity = (0..network.agent_count())
            .map(|i| per_point.iter().map(|p| p[0][i]).collect())
            .collect();
        Ok(Self {
            points: grid.points.clone(),
            capacity,
        })
    }

    /// Secrecy pressure Ω of agent `i`.
    pub fn pressure(&self, i: usize, pdf: &EavesdropperPdf) -> Estimate {
        integrate(self.capacity[i].iter().copied(), pdf)
    }

    /// CSV with columns `x,y,agent_id,ergodic_secrecy_capacity,std_error`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "agent_id", "ergodic_secrecy_capacity", "std_error"])?;
        for (i, caps) in self.capacity.iter().enumerate() {
            for (p, est) in self.points.iter().zip(caps) {
                w.write_record([
                    p.x.to_string(),
                    p.y.to_string(),
                    (i + 1).to_string(),
                    est.mean.to_string(),
                    est.std_error.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Secrecy pressure Ω of agent `i` under one set of emissions.
pub fn secrecy_pressure(
    network: &Network,
    i: usize,
    emissions: &[Emission],
    grid: &SurfaceGrid,
    pdf: &EavesdropperPdf,
    n_mc: usize,
    seed: u64,
) -> Result<Estimate> {
    Ok(SecrecyMap::compute(network, emissions, grid, n_mc, seed)?.pressure(i, pdf))
}

/// Secrecy pressure of every agent for every joint action profile.
///
/// Ergodic quantities do not change from slot to slot, so the table is built
/// once and looked up by the decision loop. Entries are bit-identical to
/// [`secrecy_pressure`] with the same seed and grid.
#[derive(Debug, Clone)]
pub struct SecrecyTable {
    space: ProfileSpace,
    /// `[profile][agent]`
    pressure: Vec<Vec<Estimate>>,
}

impl SecrecyTable {
    pub fn build(
        network: &Network,
        space: ProfileSpace,
        emissions_for: impl Fn(&ActionProfile) -> Vec<Emission>,
        grid: &SurfaceGrid,
        pdf: &EavesdropperPdf,
        n_mc: usize,
        seed: u64,
    ) -> Result<Self> {
        let profiles: Vec<Vec<Emission>> = space.iter().map(|p| emissions_for(&p)).collect();
        let per_point = grid_estimates(network, &profiles, grid, n_mc, seed)?;
        let pressure = (0..profiles.len())
            .map(|k| {
                (0..network.agent_count())
                    .map(|i| integrate(per_point.iter().map(|p| p[k][i]), pdf))
                    .collect()
            })
            .collect();
        Ok(Self { space, pressure })
    }

    pub fn space(&self) -> &ProfileSpace {
        &self.space
    }

    pub fn estimates(&self, profile: &ActionProfile) -> &[Estimate] {
        &self.pressure[self.space.index(profile)]
    }

    /// Ω of every agent for `profile`.
    pub fn omegas(&self, profile: &ActionProfile) -> Vec<f64> {
        self.estimates(profile).iter().map(|e| e.mean).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Geometry;
    use crate::pls::PlsPolicy;
    use proptest::prelude::*;

    fn network() -> Network {
        Network {
            geometry: Geometry::two_agent_default(),
            antennas: vec![2, 2],
            receiver_noise: vec![1.0, 1.0],
            eavesdropper_noise: 1.0,
        }
    }

    fn em(policy: PlsPolicy) -> Emission {
        Emission {
            policy,
            message_power: 10.0,
            security_power: 10.0,
        }
    }

    #[test]
    fn capacity_examples() {
        assert!((secrecy_capacity(3.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(secrecy_capacity(1.0, 3.0), 0.0);
        for x in [0.0, 0.3, 5.0, 1e4] {
            assert_eq!(secrecy_capacity(x, x), 0.0);
        }
    }

    proptest! {
        #[test]
        fn capacity_monotone(b in 0.0..1e3f64, e in 0.0..1e3f64, db in 0.0..10.0f64) {
            prop_assert!(secrecy_capacity(b + db, e) >= secrecy_capacity(b, e));
            prop_assert!(secrecy_capacity(b, e + db) <= secrecy_capacity(b, e));
            prop_assert!(secrecy_capacity(b, e) >= 0.0);
        }
    }

    #[test]
    fn grid_invariants() {
        let s = Surface::centered_square(4.0);
        let g = SurfaceGrid::new(s, 21).unwrap();
        assert_eq!(g.len(), 441);
        assert!((g.cell_area * g.len() as f64 - s.area()).abs() < 1e-9);
        assert!(SurfaceGrid::new(s, 1).is_err());
        let g2 = SurfaceGrid::new(s, 4).unwrap().excluding(&[NodePosition::new(-0.5, -0.5)]);
        assert_eq!(g2.len(), 15);
    }

    #[test]
    fn pdf_properties() {
        let g = SurfaceGrid::new(Surface::centered_square(4.0), 20).unwrap();
        let pdf = EavesdropperPdf::gaussian(&g, NodePosition::new(0.0, 0.0), 1.0).unwrap();
        assert!((pdf.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(pdf.weights.iter().all(|&w| w >= 0.0));
        // point (x, y) at index iy*n+ix mirrors to (n-1-ix, n-1-iy)
        let n = g.resolution;
        for iy in 0..n {
            for ix in 0..n {
                let a = pdf.weights[iy * n + ix];
                let b = pdf.weights[(n - 1 - iy) * n + (n - 1 - ix)];
                assert!((a - b).abs() < 1e-15);
            }
        }
        let flat = EavesdropperPdf::gaussian(&g, NodePosition::new(0.0, 0.0), 1e6).unwrap();
        let max = flat.weights.iter().cloned().fold(f64::MIN, f64::max);
        let min = flat.weights.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 1.001);
        assert!(EavesdropperPdf::gaussian(&g, NodePosition::new(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn single_sample_equals_single_realization() {
        let net = network();
        let point = NodePosition::new(0.2, -0.4);
        let emissions = [em(PlsPolicy::An), em(PlsPolicy::Scan)];
        let est = ergodic_secrecy_capacity(&net, 1, point, &emissions, 1, &mut derive_stream(3, "one", &[])).unwrap();
        let mut rng = derive_stream(3, "one", &[]);
        let r = ChannelRealization::draw(&net, &mut rng).unwrap();
        let eve = EavesdropperLinks::draw(&net, point, &mut rng).unwrap();
        let b = crate::pls::receiver_sinr(1, &emissions, &r).unwrap();
        let e = crate::pls::eavesdropper_sinr(1, &emissions, &r, &eve).unwrap();
        assert_eq!(est.mean, secrecy_capacity(b, e));
        assert_eq!(est.samples, 1);
    }

    #[test]
    fn symmetric_eavesdropper_gives_half_absolute_gap() {
        // single antenna, single agent, eavesdropper at the receiver's
        // distance from the transmitter: C_B and C_E are i.i.d.
        let net = Network {
            geometry: Geometry {
                transmitters: vec![NodePosition::new(-1.0, 1.0)],
                receivers: vec![NodePosition::new(1.0, 1.0)],
                ..Geometry::two_agent_default()
            },
            antennas: vec![1],
            receiver_noise: vec![1.0],
            eavesdropper_noise: 1.0,
        };
        let point = NodePosition::new(-1.0, -1.0);
        let emissions = [em(PlsPolicy::Beamforming)];
        let n = 20_000;
        let est = ergodic_secrecy_capacity(&net, 0, point, &emissions, n, &mut derive_stream(8, "sym", &[])).unwrap();
        let mut rng = derive_stream(8, "sym", &[]);
        let mut signed = Accumulator::default();
        let mut abs = Accumulator::default();
        for _ in 0..n {
            let r = ChannelRealization::draw(&net, &mut rng).unwrap();
            let eve = EavesdropperLinks::draw(&net, point, &mut rng).unwrap();
            let cb = 0.5 * (1.0 + crate::pls::receiver_sinr(0, &emissions, &r).unwrap()).log2();
            let ce = 0.5 * (1.0 + crate::pls::eavesdropper_sinr(0, &emissions, &r, &eve).unwrap()).log2();
            signed.push(cb - ce);
            abs.push((cb - ce).abs());
        }
        let signed = signed.finish(n);
        assert!(signed.mean.abs() < 3.0 * signed.std_error, "{signed:?}");
        // max(0, d) = (|d| + d) / 2 sample by sample
        assert!((est.mean - (abs.finish(n).mean + signed.mean) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_sizes_agree() {
        let net = network();
        let point = NodePosition::new(0.5, 0.5);
        let emissions = [em(PlsPolicy::Fdai), em(PlsPolicy::Beamforming)];
        let small = ergodic_secrecy_capacity(&net, 0, point, &emissions, 1_000, &mut derive_stream(1, "s", &[])).unwrap();
        let large = ergodic_secrecy_capacity(&net, 0, point, &emissions, 100_000, &mut derive_stream(2, "l", &[])).unwrap();
        let combined = (small.std_error.powi(2) + large.std_error.powi(2)).sqrt();
        assert!((small.mean - large.mean).abs() < 3.0 * combined, "{small:?} vs {large:?}");
    }

    #[test]
    fn pressure_is_convex_combination() {
        let net = network();
        let g = SurfaceGrid::for_network(&net, 6).unwrap();
        let pdf = EavesdropperPdf::gaussian(&g, NodePosition::new(0.0, 0.0), 1.0).unwrap();
        let map = SecrecyMap::compute(&net, &[em(PlsPolicy::An), em(PlsPolicy::Fdai)], &g, 50, 4).unwrap();
        for i in 0..2 {
            let omega = map.pressure(i, &pdf).mean;
            let min = map.capacity[i].iter().map(|e| e.mean).fold(f64::MAX, f64::min);
            let max = map.capacity[i].iter().map(|e| e.mean).fold(f64::MIN, f64::max);
            assert!(omega >= 0.0);
            assert!(omega >= min - 1e-12 && omega <= max + 1e-12);
        }
        let constant = SecrecyMap {
            points: g.points.clone(),
            capacity: vec![vec![Estimate { mean: 0.7, std_error: 0.0, samples: 1 }; g.len()]],
        };
        assert!((constant.pressure(0, &EavesdropperPdf::uniform(&g)).mean - 0.7).abs() < 1e-12);
    }

    #[test]
    fn grid_refinement_is_stable() {
        let net = network();
        let emissions = [em(PlsPolicy::An), em(PlsPolicy::An)];
        let omega = |res| {
            let g = SurfaceGrid::for_network(&net, res).unwrap();
            let pdf = EavesdropperPdf::gaussian(&g, NodePosition::new(0.0, 0.0), 1.0).unwrap();
            secrecy_pressure(&net, 0, &emissions, &g, &pdf, 500, 12).unwrap().mean
        };
        let coarse = omega(21);
        let fine = omega(42);
        assert!((coarse - fine).abs() / fine < 0.05, "{coarse} vs {fine}");
    }

    #[test]
    fn table_matches_direct_pressure_bitwise() {
        let net = network();
        let g = SurfaceGrid::new(net.geometry.surface, 5).unwrap();
        let pdf = EavesdropperPdf::gaussian(&g, NodePosition::new(0.0, 0.0), 1.0).unwrap();
        let policies = [PlsPolicy::Scan, PlsPolicy::An];
        let powers = [3.0, 10.0];
        let resolve = |p: &ActionProfile| -> Vec<Emission> {
            p.0.iter()
                .map(|a| Emission {
                    policy: policies[a.policy],
                    message_power: 10.0,
                    security_power: powers[a.config],
                })
                .collect()
        };
        let space = ProfileSpace::new(vec![2, 2], vec![2, 2]);
        let table = SecrecyTable::build(&net, space.clone(), resolve, &g, &pdf, 20, 77).unwrap();
        let again = SecrecyTable::build(&net, space.clone(), resolve, &g, &pdf, 20, 77).unwrap();
        for p in space.iter() {
            let direct: Vec<f64> = (0..2)
                .map(|i| secrecy_pressure(&net, i, &resolve(&p), &g, &pdf, 20, 77).unwrap().mean)
                .collect();
            assert_eq!(table.omegas(&p), direct);
            assert_eq!(again.omegas(&p), direct);
        }
    }

    #[test]
    fn secrecy_map_csv_columns() {
        let net = network();
        let g = SurfaceGrid::for_network(&net, 3).unwrap();
        let map = SecrecyMap::compute(&net, &[em(PlsPolicy::An), em(PlsPolicy::An)], &g, 3, 0).unwrap();
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,y,agent_id,ergodic_secrecy_capacity,std_error");
        assert_eq!(lines.count(), 18);
    }
}
