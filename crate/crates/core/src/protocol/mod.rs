//! BBM92 entanglement-based key distribution.
//!
//! Both parties measure their photon of each pair in a randomly chosen basis.
//! They publicly compare bases, keep the rounds where the bases agree, reveal
//! a random sample of the kept bits to estimate the quantum bit error rate,
//! and either abort or compress the rest with a Toeplitz hash. Error
//! correction is not run; its cost is charged as `f · H2(Q)` leaked bits.

mod basis;
mod key;
mod message;
mod qber;
mod session;
mod toeplitz;

pub use basis::{choose_basis, sift, Basis, RawRecord, SiftResult};
pub use key::{binary_entropy, key_fraction, secret_key_length, zero_rate_qber};
pub use message::{AbortReason, ClassicalMessage, MessageBody, MessageKind};
pub use qber::{estimate_qber, qber_from_sample, select_test_positions, MIN_SIFTED_FOR_QBER};
pub use session::{run_session, Initiator, KeyMaterial, Responder, SessionOutcome, SessionParams};
pub use toeplitz::toeplitz_hash;
