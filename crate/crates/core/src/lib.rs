//! Brownian particles on the line with asymmetric collision local times.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] holds the ranked-system parameters, the derived reflection and
//!   covariance matrices, and the closed-form regime checks.
//! * [`skorokhod`] solves the Harrison–Reiman orthant reflection problem on a
//!   grid and audits the modified representation of the jump system.
//! * [`diffusion`] builds the ranked diffusion from reflected spacings and
//!   offers an approximate simulator for the unranked ("names") system.
//! * [`jumpsim`] is an event-driven simulator of interacting lattice walkers
//!   together with their diffusive rescaling and limit parameters.
//! * [`analytics`] covers the product-of-exponentials invariant law, the
//!   q-Atlas family and capital distribution curves.
//! * [`determinantal`] evaluates Karlin–McGregor-type transition densities.
//!
//! Monte Carlo batches go through [`replicas`], which farms independent
//! replicas over rayon when the `parallel` feature is on.

pub mod analytics;
pub mod determinantal;
pub mod diffusion;
pub mod jumpsim;
pub mod numeric;
pub mod params;
pub mod path;
pub mod replicas;
pub mod skorokhod;
pub mod stats;

pub use params::{ParticleParams, ReflectionSpec};
pub use path::SamplePath;
