pub mod check;
pub mod converge;
pub mod curve;
pub mod density;
pub mod invariant;
pub mod simulate;

use crate::config::RunConfig;

pub fn seed(cfg: &RunConfig) -> u64 {
    cfg.seed.unwrap_or(0)
}

/// Replica count from the config or flags, recorded back so the manifest
/// carries the value actually used.
pub fn replicas(cfg: &mut RunConfig, default: usize) -> usize {
    *cfg.replicas.get_or_insert(default)
}
