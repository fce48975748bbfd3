//! Numerical toolbox for invasion fronts in parabolic gradient systems
//! `u_t = -∇V(u) + u_xx`.
//!
//! The crate computes the speed hierarchy attached to an invaded critical
//! point (linear, quadratic-hull, nonlinear bracket, upper bounds), locates
//! pushed travelling fronts by steep-manifold shooting, simulates the PDE
//! with travelling-frame energy/dissipation diagnostics, and evaluates
//! exponentially weighted energies and norms on discretized profiles.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats and the CLI
//! live in the companion `front-lab` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod linalg;
pub mod math;
pub mod ode;
pub mod pde;
pub mod potential;
pub mod profile;
pub mod speeds;
pub mod wave;

pub use error::Error;
pub use pde::{InvasionTrace, SimConfig};
pub use potential::{CriticalPoint, PotentialSpec};
pub use profile::{GridProfile, WeightedEnergy};
pub use speeds::SpeedAtlas;
pub use wave::FrontProfile;
