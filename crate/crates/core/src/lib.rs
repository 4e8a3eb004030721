//! Quantum position verification lab: protocol definitions, attack
//! strategies, PPT state-discrimination SDPs with exact certificates,
//! analytic security bounds and a seeded Monte Carlo harness.

pub mod bounds;
pub mod error;
pub mod montecarlo;
pub mod protocols;
pub mod qcore;
pub mod sdp;
pub mod strategies;

pub use error::{QpvError, Result};
