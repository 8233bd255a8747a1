use super::{replicas, seed};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Artifacts;
use crate::row;
use asymcoll::analytics::{invariant_gamma, levels_from_spacings, sample_stationary};
use asymcoll::diffusion::simulate_ranked;
use asymcoll::replicas as reps;
use asymcoll::stats::{ks_critical_value, ks_two_sample, mean};

/// Significance level of the stationarity test.
pub const ALPHA: f64 = 0.01;

pub fn run(cfg: &mut RunConfig, art: &mut Artifacts) -> Result<(), CliError> {
    let p = cfg.particles()?;
    let ic = cfg.section(&cfg.invariant, "invariant")?.clone();
    let m = replicas(cfg, 10_000);
    let seed = seed(cfg);
    let spec = invariant_gamma(&p).map_err(|e| CliError::Rejected(e.to_string()))?;
    let start = sample_stationary(&spec, m, seed).map_err(|e| CliError::Rejected(e.to_string()))?;
    let end: Vec<Vec<f64>> = reps::map(m, seed ^ 0x5eed, |i, s| {
        let r0 = levels_from_spacings(&start[i]);
        simulate_ranked(&p, &r0, ic.horizon, ic.dt, s).map(|sim| sim.z.last_row().to_vec())
    })
    .into_iter()
    .collect::<Result<_, _>>()
    .map_err(CliError::runtime)?;

    let crit = ks_critical_value(ALPHA, m, m);
    let mut t = art.csv("invariant.csv", &["k", "gamma", "mean_start", "mean_end", "ks", "ks_critical", "pass"]);
    let mut all = true;
    for k in 0..spec.gamma.len() {
        let a: Vec<f64> = start.iter().map(|v| v[k]).collect();
        let b: Vec<f64> = end.iter().map(|v| v[k]).collect();
        let ks = ks_two_sample(&a, &b);
        all &= ks < crit;
        println!("spacing {}: gamma {:.6}  KS {:.4} (critical {:.4})", k + 1, spec.gamma[k], ks, crit);
        t.row(row![k + 1, spec.gamma[k], mean(&a), mean(&b), ks, crit, ks < crit]);
    }
    art.push(t)?;
    if all {
        Ok(())
    } else {
        Err(CliError::Runtime("spacing marginals moved away from the invariant law".into()))
    }
}
