use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Artifacts;
use crate::row;
use asymcoll::analytics::{capital_curve, invariant_gamma, levels_from_spacings, log_log_slope_changes, variance_log_slopes};

pub fn run(cfg: &mut RunConfig, art: &mut Artifacts) -> Result<(), CliError> {
    let p = cfg.particles()?;
    let want_slopes = cfg.curve.as_ref().is_none_or(|c| c.variance_slopes);
    let spec = invariant_gamma(&p).map_err(|e| CliError::Rejected(e.to_string()))?;
    let spacings = spec.mean_spacings().map_err(|e| CliError::Rejected(e.to_string()))?;
    let w = capital_curve(&levels_from_spacings(&spacings));
    let kinks = log_log_slope_changes(&w);
    let mut t = art.csv("curve.csv", &["rank", "weight", "log_rank", "log_weight", "slope_change"]);
    for (i, wi) in w.iter().enumerate() {
        // The slope change is attributed to the middle rank of its three points.
        let kink = if i >= 1 && i <= kinks.len() { kinks[i - 1] } else { f64::NAN };
        t.row(row![i + 1, *wi, ((i + 1) as f64).ln(), wi.ln(), kink]);
    }
    art.push(t)?;
    let mut g = art.csv("gamma.csv", &["k", "gamma", "mean_spacing"]);
    for (k, (gk, sk)) in spec.gamma.iter().zip(&spacings).enumerate() {
        g.row(row![k + 1, *gk, *sk]);
    }
    art.push(g)?;
    if want_slopes {
        let s2: Vec<f64> = p.sigma.iter().map(|s| s * s).collect();
        let mut v = art.csv("variance_slopes.csv", &["k", "sigma_sq", "slope"]);
        let slopes = variance_log_slopes(&s2);
        for (k, s) in s2.iter().enumerate() {
            let slope = if k >= 1 && k <= slopes.len() { slopes[k - 1] } else { f64::NAN };
            v.row(row![k + 1, *s, slope]);
        }
        art.push(v)?;
    }
    let concave_from = kinks.iter().rposition(|&c| c > 0.0).map_or(1, |i| i + 3);
    println!("n = {}  min gamma = {:.4}  concave from rank {concave_from}", p.n(), spec.gamma.iter().copied().fold(f64::INFINITY, f64::min));
    Ok(())
}
