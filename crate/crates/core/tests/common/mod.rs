//! Independent reference computations shared by the integration tests.
//! Everything here works on raw `f64` pairs, not on the library's gain
//! caches or complex helpers.
#![allow(dead_code)]

use adaptive_pls::channel::{ChannelRealization, EavesdropperLinks};
use adaptive_pls::pls::{Emission, PlsPolicy};
use num_complex::Complex64;

/// `|Σ_k conj(v_k)·h_k|²`, expanded into real and imaginary parts.
pub fn abs2_inner(v: &[Complex64], h: &[Complex64]) -> f64 {
    assert_eq!(v.len(), h.len());
    let mut re = 0.0;
    let mut im = 0.0;
    for k in 0..v.len() {
        let (a, b) = (v[k].re, v[k].im);
        let (c, d) = (h[k].re, h[k].im);
        // (a − ib)(c + id) = (ac + bd) + i(ad − bc)
        re += a * c + b * d;
        im += a * d - b * c;
    }
    re * re + im * im
}

pub fn abs2(z: Complex64) -> f64 {
    z.re * z.re + z.im * z.im
}

/// Maximum-ratio beamformer `h/‖h‖`.
pub fn mrt(h: &[Complex64]) -> Vec<Complex64> {
    let norm = h.iter().map(|z| z.re * z.re + z.im * z.im).sum::<f64>().sqrt();
    h.iter().map(|z| Complex64::new(z.re / norm, z.im / norm)).collect()
}

fn gamma(policy: PlsPolicy) -> f64 {
    match policy {
        PlsPolicy::Scan => 2.0,
        _ => 1.0,
    }
}

/// Security power of agent `j` landing at receiver `b_i` (`i ≠ j`).
fn security_at_receiver(r: &ChannelRealization, e: &Emission, j: usize, i: usize) -> f64 {
    let gain = match e.policy {
        PlsPolicy::Beamforming => 0.0,
        PlsPolicy::Scan => abs2(r.tx_rx[j][i][0]),
        PlsPolicy::Fdai => abs2(r.rx_rx[j][i]),
        PlsPolicy::An => abs2_inner(r.an_directions[j].as_ref().expect("AN direction"), &r.tx_rx[j][i]),
    };
    gain * e.security_power
}

fn security_at_eve(r: &ChannelRealization, eve: &EavesdropperLinks, e: &Emission, j: usize) -> f64 {
    let gain = match e.policy {
        PlsPolicy::Beamforming => 0.0,
        PlsPolicy::Scan => abs2(eve.tx_e[j][0]),
        PlsPolicy::Fdai => abs2(eve.rx_e[j]),
        PlsPolicy::An => abs2_inner(r.an_directions[j].as_ref().expect("AN direction"), &eve.tx_e[j]),
    };
    gain * e.security_power
}

pub fn receiver_sinr(i: usize, emissions: &[Emission], r: &ChannelRealization) -> f64 {
    let v_i = mrt(&r.tx_rx[i][i]);
    let signal = abs2_inner(&v_i, &r.tx_rx[i][i]) * emissions[i].message_power;
    let mut interference = 0.0;
    for (j, e) in emissions.iter().enumerate() {
        if j == i {
            continue;
        }
        let v_j = mrt(&r.tx_rx[j][j]);
        interference += abs2_inner(&v_j, &r.tx_rx[j][i]) * e.message_power;
        interference += security_at_receiver(r, e, j, i);
    }
    signal / (gamma(emissions[i].policy) * (interference + r.receiver_noise[i]))
}

pub fn eavesdropper_sinr(i: usize, emissions: &[Emission], r: &ChannelRealization, eve: &EavesdropperLinks) -> f64 {
    let v_i = mrt(&r.tx_rx[i][i]);
    let signal = abs2_inner(&v_i, &eve.tx_e[i]) * emissions[i].message_power;
    let mut interference = 0.0;
    for (j, e) in emissions.iter().enumerate() {
        if j != i {
            let v_j = mrt(&r.tx_rx[j][j]);
            interference += abs2_inner(&v_j, &eve.tx_e[j]) * e.message_power;
        }
        interference += security_at_eve(r, eve, e, j);
    }
    signal / (interference + eve.noise)
}

pub fn secrecy_capacity(b: f64, e: f64) -> f64 {
    (0.5 * ((1.0 + b) / (1.0 + e)).log2()).max(0.0)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
