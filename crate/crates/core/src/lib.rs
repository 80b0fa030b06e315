//! Simulation of a teleportation link whose EPR halves are protected by the
//! nine-qubit Shor code and whose measurement bits travel over a turbo-coded
//! QPSK link with Rician fading, plus virtual-pair eavesdropper detection.
//!
//! Module map:
//!
//! - [`qstate`]: dense state-vector register (qubit 0 is the most significant
//!   bit of the basis index), gates, measurement and fidelity.
//! - [`teleport`]: single-qubit teleportation and the receiver correction table.
//! - [`qchannel`]: depolarizing channel sampling and eavesdropper models.
//! - [`cchannel`]: QPSK, Rician fading, AWGN and soft demodulation.
//! - [`turbo`]: rate-1/3 parallel concatenated convolutional code.
//! - [`shor`]: nine-qubit code on the state vector plus a Pauli-frame fast path.
//! - [`qsdc`]: virtual-pair detection protocol and payload teleportation.
//! - [`metrics`], [`sweep`], [`config`]: estimators, experiment sweeps and CSV output.

pub mod cchannel;
pub mod config;
mod error;
pub mod link;
pub mod metrics;
pub mod qchannel;
pub mod qsdc;
pub mod qstate;
pub mod rng;
pub mod selftest;
pub mod shor;
pub mod sweep;
pub mod teleport;
pub mod turbo;

pub use error::{Error, Result};

/// Version string recorded in CSV provenance headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
