//! Stationary analysis of skew-symmetric systems and capital distribution
//! curves.

use crate::params::{build_reflection_spec, check_condition_b, solve, ParamsError, ParticleParams, SKEW_TOL, UNUSED_Q};
use crate::replicas::rng_from_seed;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("skew-symmetry fails at rank {k} (residuals {minus:e}, {plus:e})")]
    NotSkew { k: usize, minus: f64, plus: f64 },
    #[error("no stationary law: gamma is not positive in coordinates {0:?}")]
    NonNormalizable(Vec<usize>),
    #[error("variance chain breaks at index {index}: sigma^2 = {value}")]
    ChainBreakdown { index: usize, value: f64 },
    #[error("bad input: {0}")]
    Input(String),
}

/// Product-exponential stationary law of the spacings.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarySpec {
    pub gamma: Vec<f64>,
    pub skew_ok: bool,
    /// `q_2^-`, the parameter of the alternating reflection matrix (`n ≥ 3`).
    pub q: Option<f64>,
    /// 1-based coordinates with `γ_k ≤ 0`.
    pub non_normalizable: Vec<usize>,
}

impl StationarySpec {
    pub fn is_normalizable(&self) -> bool {
        self.non_normalizable.is_empty()
    }

    /// Stationary mean spacings `1/γ_k`.
    pub fn mean_spacings(&self) -> Result<Vec<f64>, AnalyticsError> {
        self.require_normalizable()?;
        Ok(self.gamma.iter().map(|g| 1.0 / g).collect())
    }

    fn require_normalizable(&self) -> Result<(), AnalyticsError> {
        if self.is_normalizable() {
            Ok(())
        } else {
            Err(AnalyticsError::NonNormalizable(self.non_normalizable.clone()))
        }
    }
}

fn require_skew(params: &ParticleParams) -> Result<Option<f64>, AnalyticsError> {
    if params.n() < 3 {
        return Ok(None);
    }
    let rep = check_condition_b(params)?;
    if !rep.holds {
        let &(k, minus, plus) =
            rep.residuals.iter().find(|&&(_, a, b)| a.abs() > SKEW_TOL || b.abs() > SKEW_TOL).expect("a failing rank");
        return Err(AnalyticsError::NotSkew { k, minus, plus });
    }
    Ok(Some(params.q_minus[1]))
}

/// `γ = 2 D^{-1} R^{-1} (b_2 - b_1, …, b_n - b_{n-1})`.
pub fn invariant_gamma(params: &ParticleParams) -> Result<StationarySpec, AnalyticsError> {
    let q = require_skew(params)?;
    let spec = build_reflection_spec(params)?;
    let diffs: Vec<f64> = params.b.windows(2).map(|w| w[1] - w[0]).collect();
    let y = solve(&spec.r, &diffs, "R")?;
    let gamma: Vec<f64> = y.iter().zip(&spec.d).map(|(yk, dk)| 2.0 * yk / dk).collect();
    let non_normalizable = gamma.iter().enumerate().filter(|(_, &g)| g <= 0.0).map(|(k, _)| k + 1).collect();
    Ok(StationarySpec { gamma, skew_ok: true, q, non_normalizable })
}

/// `count` independent draws of the spacings, one row each.
pub fn sample_stationary(spec: &StationarySpec, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, AnalyticsError> {
    spec.require_normalizable()?;
    let dists: Vec<Exp<f64>> = spec.gamma.iter().map(|&g| Exp::new(g).expect("positive rate")).collect();
    let mut rng = rng_from_seed(seed);
    Ok((0..count).map(|_| dists.iter().map(|d| d.sample(&mut rng)).collect()).collect())
}

/// Levels with `R_n = 0` and the given spacings.
pub fn levels_from_spacings(spacings: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; spacings.len() + 1];
    for k in (0..spacings.len()).rev() {
        r[k] = r[k + 1] + spacings[k];
    }
    r
}

/// Market weights `e^{R_k} / Σ_ℓ e^{R_ℓ}`.
pub fn capital_curve(r: &[f64]) -> Vec<f64> {
    let m = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = r.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// `(log k, log w_k)` pairs, `k` 1-based.
pub fn log_log_curve(weights: &[f64]) -> Vec<(f64, f64)> {
    weights.iter().enumerate().map(|(i, w)| (((i + 1) as f64).ln(), w.ln())).collect()
}

/// Changes of slope between consecutive chords of the log-log curve. Entry
/// `j` compares the chords ending at ranks `j+2` and `j+3`; nonpositive
/// values mean the curve bends down there.
pub fn log_log_slope_changes(weights: &[f64]) -> Vec<f64> {
    let pts = log_log_curve(weights);
    let slopes: Vec<f64> = pts.windows(2).map(|p| (p[1].1 - p[0].1) / (p[1].0 - p[0].0)).collect();
    slopes.windows(2).map(|s| s[1] - s[0]).collect()
}

/// Extends `σ_1², σ_2², σ_3²` to length `n` along the skew-symmetry chain
/// `2σ_2²/(σ_1²+σ_3²) = (σ_2²+σ_4²)/(2σ_3²) = 2σ_4²/(σ_3²+σ_5²) = …`.
pub fn skew_variance_chain(n: usize, s1: f64, s2: f64, s3: f64) -> Result<Vec<f64>, AnalyticsError> {
    for (i, v) in [s1, s2, s3].into_iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(AnalyticsError::ChainBreakdown { index: i + 1, value: v });
        }
    }
    let mut s = vec![s1, s2, s3];
    s.truncate(n);
    let r = 2.0 * s2 / (s1 + s3);
    while s.len() < n {
        // s.len() is the 1-based index of the last known variance.
        let k = s.len();
        let next = if k % 2 == 1 { 2.0 * r * s[k - 1] - s[k - 2] } else { 2.0 * s[k - 1] / r - s[k - 2] };
        if !(next > 0.0 && next.is_finite()) {
            return Err(AnalyticsError::ChainBreakdown { index: k + 1, value: next });
        }
        s.push(next);
    }
    Ok(s)
}

/// q-Atlas model: zero drifts except `g·n` on the bottom rank, skew-symmetric
/// variances grown from the three seeds, and collision shares from the
/// skew-symmetry formula. For `n = 2` the shares are 1/2.
pub fn q_atlas(n: usize, g: f64, s1: f64, s2: f64, s3: f64) -> Result<ParticleParams, AnalyticsError> {
    if n < 2 {
        return Err(AnalyticsError::Input(format!("need n ≥ 2, got {n}")));
    }
    let s = skew_variance_chain(n, s1, s2, s3)?;
    let mut b = vec![0.0; n];
    b[n - 1] = g * n as f64;
    let sigma: Vec<f64> = s.iter().map(|v| v.sqrt()).collect();
    if n == 2 {
        return Ok(ParticleParams::symmetric(b, sigma)?);
    }
    let mut q_minus = vec![0.0; n];
    let mut q_plus = vec![0.0; n];
    for k in 2..n {
        let q = crate::params::skew_symmetric_q(&s, k);
        q_minus[k - 1] = q;
        q_plus[k - 1] = q;
    }
    q_minus[0] = 1.0 - q_plus[1];
    q_plus[n - 1] = 1.0 - q_minus[n - 2];
    q_plus[0] = UNUSED_Q;
    q_minus[n - 1] = UNUSED_Q;
    Ok(ParticleParams::new(b, sigma, q_minus, q_plus)?)
}

/// Slopes `(log(σ_{k+1}² - σ_1²) - log(σ_k² - σ_1²)) / (log k - log(k-1))`
/// for `k = 2..n-1`.
pub fn variance_log_slopes(sigma_sq: &[f64]) -> Vec<f64> {
    let s1 = sigma_sq[0];
    (2..sigma_sq.len())
        .map(|k| {
            let kf = k as f64;
            ((sigma_sq[k] - s1).ln() - (sigma_sq[k - 1] - s1).ln()) / (kf.ln() - (kf - 1.0).ln())
        })
        .collect()
}

/// Inverse of [`invariant_gamma`]: drift differences `b_{k+1} - b_k = ½ (R D γ)_k`.
pub fn fit_gamma(gamma: &[f64], template: &ParticleParams) -> Result<Vec<f64>, AnalyticsError> {
    require_skew(template)?;
    let spec = build_reflection_spec(template)?;
    if gamma.len() != spec.dim() {
        return Err(AnalyticsError::Input(format!("gamma has {} entries, expected {}", gamma.len(), spec.dim())));
    }
    let dg: Vec<f64> = gamma.iter().zip(&spec.d).map(|(g, d)| d * g).collect();
    Ok((0..spec.dim()).map(|i| 0.5 * (0..spec.dim()).map(|j| spec.r[(i, j)] * dg[j]).sum::<f64>()).collect())
}

/// Fit from observed stationary mean spacings (`γ_k = 1/spacing_k`).
pub fn fit_gamma_from_spacings(spacings: &[f64], template: &ParticleParams) -> Result<Vec<f64>, AnalyticsError> {
    if let Some(k) = spacings.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(AnalyticsError::Input(format!("spacing {} is {}", k + 1, spacings[k])));
    }
    let gamma: Vec<f64> = spacings.iter().map(|s| 1.0 / s).collect();
    fit_gamma(&gamma, template)
}

/// Fit from a ranked capital distribution curve (spacings are log-weight
/// differences).
pub fn fit_gamma_from_weights(weights: &[f64], template: &ParticleParams) -> Result<Vec<f64>, AnalyticsError> {
    if let Some(k) = weights.iter().position(|&w| !(w > 0.0)) {
        return Err(AnalyticsError::Input(format!("weight {} is {}", k + 1, weights[k])));
    }
    let spacings: Vec<f64> = weights.windows(2).map(|w| w[0].ln() - w[1].ln()).collect();
    fit_gamma_from_spacings(&spacings, template)
}

/// Drifts with `b_1 = base` and the given successive differences.
pub fn drifts_from_differences(diffs: &[f64], base: f64) -> Vec<f64> {
    let mut b = vec![base];
    for d in diffs {
        b.push(b.last().unwrap() + d);
    }
    b
}
