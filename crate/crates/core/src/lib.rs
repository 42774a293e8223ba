//! Physics, protocol and simulation core for an entanglement-based
//! intersatellite quantum key distribution (QKD) simulator.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no I/O. It models a
//! polarization-entangled photon-pair source, liquid-crystal polarization
//! rotators (LCPRs) in front of polarizing beam splitters, Geiger-mode
//! avalanche photodiodes, a vacuum free-space optical link between two
//! drifting CubeSats, and the BBM92 protocol run on the resulting
//! coincidences.
//!
//! Module map:
//!
//! - [`polarization`]: exact two-qubit polarization math (Werner states,
//!   outcome probabilities, correlations, CHSH, QBER) used as the analytic
//!   oracle for everything Monte Carlo.
//! - [`devices`]: source, LCPR and detector models, photon streams,
//!   coincidence matching and correlation-curve fitting.
//! - [`link`]: Gaussian-beam link budget, pointing jitter, drift geometry and
//!   orbital thermal profile.
//! - [`protocol`]: BBM92 sifting, QBER estimation, key accounting, Toeplitz
//!   privacy amplification and the two-party classical message session.
//! - [`sim`]: mission steps, mission runs and canned experiments.
//!
//! All randomness flows through caller-supplied generators; see [`rng`] for
//! the counter-based stream derivation used by the simulation engine.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

extern crate alloc;

pub mod devices;
pub mod error;
pub mod link;
pub mod math;
pub mod polarization;
pub mod protocol;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
