//! Exciton dynamics coupled to continuous and discrete vibrational baths.
//!
//! The pipeline: a spectral density is decomposed into damped bosonic modes
//! ([`spectral`]); the exciton register, mode ladder, thermal representation
//! and jump channels are assembled into an immutable [`model::SystemModel`];
//! the resulting Lindblad dynamics is unraveled into quantum-jump pure-state
//! trajectories ([`trajectories`]) over either an exact dense backend
//! ([`dense`]) or a projected-purification tensor-train backend ([`mps`]).
//! Ensemble statistics, a batch CLI and file outputs sit on top.

pub mod expm;
pub mod krylov;
pub mod linalg;
pub mod spectral;
pub mod units;
