//! Spectator-qubit control of qubit dephasing caused by random telegraph noise.
//!
//! A data qubit (sensitivity `kappa`) and a spectator qubit (sensitivity `k_big`)
//! see the same two-state telegraph noise. The spectator is measured repeatedly,
//! and the record is folded into a complex 2-vector that carries both the
//! Bayesian belief about the noise and the conditional data-qubit coherence.
//!
//! Modules, bottom up:
//! - [`rtp`]: the telegraph process itself.
//! - [`bayes_maps`]: closed-form propagation and measurement maps.
//! - [`state`]: coherence vectors and their sufficient statistics.
//! - [`strategies`]: measurement policies.
//! - [`evaluate`]: expected coherence, decoherence rates and sweeps.

pub mod bayes_maps;
pub mod error;
pub mod evaluate;
pub mod rtp;
pub mod state;
pub mod strategies;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
