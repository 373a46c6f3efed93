//! Edgeworth and multiplicative local limit expansions for Birkhoff sums of
//! finite-state Markov shifts, expanding circle maps and random matrix
//! products, computed from the leading eigenvalue of a twisted transfer
//! operator.

pub mod error;
pub mod linalg;
pub mod models;
pub mod montecarlo;
pub mod oracle;
pub mod perturb;
pub mod polyexp;
pub mod quad;
pub mod validate;

pub use error::{Error, Result};
