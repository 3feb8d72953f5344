//! Numerical tools for entanglement-assisted communication over compound
//! quantum channels: states and channels, a small Hermitian SDP solver,
//! one-shot entropies, capacity solvers, and explicit random code
//! constructions with Monte-Carlo checks of their decoupling bounds.
//!
//! All logarithms are base 2.

pub mod error;
pub mod io;
pub mod linalg;
pub mod qcore;
pub mod rng;
pub mod sdp;
pub mod capacity;
pub mod codes;
pub mod compound;
pub mod entropy;

pub use error::{Error, Result};
pub use rng::SeedStream;
