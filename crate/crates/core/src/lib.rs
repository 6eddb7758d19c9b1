//! Adaptive physical-layer-security policy selection for multi-agent
//! wireless networks.
//!
//! Agents pick, slot by slot, a PLS policy (SCAN, FDAI, AN or plain
//! beamforming) and a transmission configuration. Utilities combine ergodic
//! secrecy pressure, per-slot SINR and power cost; tabular Q-learning over a
//! two-stage decision process learns the selection, individually or jointly.

pub mod channel;
pub mod decision;
pub mod environment;
pub mod error;
pub mod harness;
pub mod learner;
pub mod pls;
pub mod secrecy;
pub mod utility;

pub use error::{Error, Result};
