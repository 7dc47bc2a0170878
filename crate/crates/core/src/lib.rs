//! Exit probabilities and Balayage operators of constrained random walks
//! arising from Jackson networks.
//!
//! The walk `X` lives on `Z_+^d` and models the queue lengths of a network
//! with `d` nodes. The probability that the total queue length reaches `n`
//! before the system empties is approximated by the probability that a
//! limit walk `Y` (obtained by the affine change of variables
//! [`network::transform`]) ever hits the boundary of the set
//! `B = {y : y(1) >= y(2) + ... + y(d)}`. For tandem networks this limit
//! probability has an exact finite formula built from harmonic systems of
//! log-linear functions ([`harmonic`]); for general two dimensional walks it
//! is approximated with certified error bounds by a perturbed Fourier basis
//! ([`fourier2d`]). Finite grid oracles ([`solve`]) and Monte Carlo estimators
//! ([`montecarlo`]) are provided for validation.

pub mod charsurf;
pub mod error;
pub mod fourier2d;
pub mod harmonic;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod network;
pub mod solve;

pub use charsurf::{SurfacePoint, C64};
pub use error::{Error, Result};
pub use harmonic::LogLinearCombination;
pub use network::{JacksonNetwork, LatticePoint};
