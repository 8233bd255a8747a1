//! Independent reference computations shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

use asymcoll::params::ParticleParams;
use asymcoll::path::SamplePath;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Step-by-step linear complementarity solution of the discrete Skorokhod
/// problem: at every grid point find the face set `S` with
/// `R_SS Δy_S = -w_S`, `Δy_S ≥ 0` and `w + R Δy ≥ 0` elsewhere.
pub fn active_set_reflection(x: &SamplePath, r: &DMatrix<f64>) -> (SamplePath, SamplePath) {
    let d = x.dim();
    let mut z = x.row(0).to_vec();
    let mut y = vec![0.0; d];
    let mut zs = z.clone();
    let mut ys = y.clone();
    for i in 1..x.len() {
        let w: Vec<f64> = (0..d).map(|k| z[k] + x.get(i, k) - x.get(i - 1, k)).collect();
        let mut found = None;
        for mask in 0u32..(1 << d) {
            let s: Vec<usize> = (0..d).filter(|k| mask & (1 << k) != 0).collect();
            let mut du = vec![0.0; d];
            if !s.is_empty() {
                let rs = DMatrix::from_fn(s.len(), s.len(), |a, b| r[(s[a], s[b])]);
                let rhs = DVector::from_iterator(s.len(), s.iter().map(|&k| -w[k]));
                let Some(u) = rs.lu().solve(&rhs) else { continue };
                if u.iter().any(|&v| v < -1e-13) {
                    continue;
                }
                for (a, &k) in s.iter().enumerate() {
                    du[k] = u[a].max(0.0);
                }
            }
            let zn: Vec<f64> = (0..d).map(|k| w[k] + (0..d).map(|j| r[(k, j)] * du[j]).sum::<f64>()).collect();
            if zn.iter().enumerate().all(|(k, &v)| s.contains(&k) || v >= -1e-13) {
                found = Some((zn, du));
                break;
            }
        }
        let (zn, du) = found.expect("P-matrix LCP has a solution");
        for k in 0..d {
            z[k] = if du[k] > 0.0 { 0.0 } else { zn[k] };
            y[k] += du[k];
        }
        zs.extend_from_slice(&z);
        ys.extend_from_slice(&y);
    }
    let t = x.times().to_vec();
    (SamplePath::new(t.clone(), zs, d).unwrap(), SamplePath::new(t, ys, d).unwrap())
}

/// One-dimensional reflection at zero: `y(t) = max(0, sup_{s≤t} -x(s))`.
pub fn tanaka(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut run: f64 = 0.0;
    let mut y = Vec::with_capacity(x.len());
    let mut z = Vec::with_capacity(x.len());
    for &v in x {
        run = run.max(-v);
        y.push(run);
        z.push(v + run);
    }
    (z, y)
}

/// Random walk path in `d` dimensions started inside the orthant.
pub fn random_walk<R: Rng>(rng: &mut R, d: usize, steps: usize, dt: f64) -> SamplePath {
    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..0.5)).collect();
    let mut vals = v.clone();
    for _ in 0..steps {
        for x in v.iter_mut() {
            let g: f64 = rng.sample(rand_distr::StandardNormal);
            *x += g * dt.sqrt() - 0.2 * dt;
        }
        vals.extend_from_slice(&v);
    }
    SamplePath::new((0..=steps).map(|i| i as f64 * dt).collect(), vals, d).unwrap()
}

/// Random valid parameters with interface shares in `[lo, hi]`.
pub fn random_params<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> ParticleParams {
    let b = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let s = (0..n).map(|_| rng.random_range(0.3..2.0)).collect();
    let q: Vec<f64> = (0..n - 1).map(|_| rng.random_range(lo..hi)).collect();
    ParticleParams::from_interfaces(b, s, &q).unwrap()
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Reflection-principle density of two ordered Brownian motions with unit
/// variance: `φ_t(r̃_1 - r_1) φ_t(r̃_2 - r_2) + φ_t(r̃_1 - r_2) φ_t(r̃_2 - r_1)`.
pub fn two_term_reflection(t: f64, r: [f64; 2], rt: [f64; 2]) -> f64 {
    let s = t.sqrt();
    let p = |x: f64| std_normal_pdf(x / s) / s;
    p(rt[0] - r[0]) * p(rt[1] - r[1]) + p(rt[0] - r[1]) * p(rt[1] - r[0])
}

/// Inverse normal CDF by bisection, good to 1e-12.
pub fn std_normal_quantile(p: f64) -> f64 {
    let cdf = |x: f64| 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2);
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
