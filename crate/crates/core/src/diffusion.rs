//! Ranked diffusions built from reflected spacings, plus an approximate
//! simulator for the unranked particle ("names") system.
//!
//! The ranked construction follows the recipe that makes the collision local
//! times exact on a grid: simulate free auxiliary levels `R̃_k`, reflect their
//! spacings with the Harrison–Reiman map, read the pushing processes as the
//! local times, and recover the levels from the conserved weighted sum
//! `Σ c_k R_k = Σ c_k R̃_k`.
//!
//! With [`BoundaryScheme::Bridge`] the noise path gets one extra point per
//! step holding the per-coordinate Brownian-bridge minimum over that step.
//! In one dimension this makes the grid values of the reflected path exact
//! in law; in higher dimensions it removes the leading `O(√dt)` bias of
//! grid-only reflection.

use crate::params::{build_reflection_spec, ParamsError, ParticleParams, ReflectionSpec};
use crate::path::{uniform_grid, SamplePath};
use crate::replicas::{rng_from_seed, SimRng};
use crate::skorokhod::{hr_map, SkorokhodError};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiffusionError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Skorokhod(#[from] SkorokhodError),
    #[error("initial point is outside the Weyl chamber at rank {k}: {upper} < {lower}")]
    Chamber { k: usize, upper: f64, lower: f64 },
    #[error("expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("time step {dt} and horizon {horizon} must be positive and finite")]
    Grid { dt: f64, horizon: f64 },
    #[error("the ranked construction needs every interface share in (0,1): {0}")]
    Degenerate(ParamsError),
}

/// How the reflection sees the noise between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryScheme {
    /// Reflect the grid values only.
    Grid,
    /// Insert the sampled bridge minimum of every spacing coordinate.
    #[default]
    Bridge,
}

impl BoundaryScheme {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryScheme::Grid => "grid",
            BoundaryScheme::Bridge => "bridge",
        }
    }
}

/// Driving randomness for one ranked path.
#[derive(Debug, Clone, PartialEq)]
pub struct Noise {
    pub n: usize,
    pub steps: usize,
    pub dt: f64,
    /// Brownian increments, `steps × n`, each `N(0, dt)`.
    pub increments: Vec<f64>,
    /// Uniforms in `(0, 1]` for the bridge minima, `steps × (n-1)`.
    pub bridge: Option<Vec<f64>>,
}

impl Noise {
    pub fn sample(n: usize, steps: usize, dt: f64, scheme: BoundaryScheme, rng: &mut SimRng) -> Self {
        let sd = dt.sqrt();
        let mut increments = Vec::with_capacity(steps * n);
        let mut bridge = match scheme {
            BoundaryScheme::Grid => None,
            BoundaryScheme::Bridge => Some(Vec::with_capacity(steps * (n - 1))),
        };
        for _ in 0..steps {
            for _ in 0..n {
                let g: f64 = rng.sample(StandardNormal);
                increments.push(sd * g);
            }
            if let Some(u) = bridge.as_mut() {
                for _ in 0..n - 1 {
                    u.push(1.0 - rng.random::<f64>());
                }
            }
        }
        Self { n, steps, dt, increments, bridge }
    }

    /// No randomness at all: the levels follow their drifts.
    pub fn zero(n: usize, steps: usize, dt: f64) -> Self {
        Self { n, steps, dt, increments: vec![0.0; steps * n], bridge: None }
    }
}

/// One ranked path together with its collision local times.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedSim {
    /// Levels `R_1 ≥ … ≥ R_n`.
    pub r: SamplePath,
    /// Collision local times `Λ^{(k,k+1)}`, `k = 1..n-1`.
    pub lambda: SamplePath,
    /// Spacings `R_k - R_{k+1}`.
    pub z: SamplePath,
    /// Conserved functional `Σ c_k R̃_k` on the grid.
    pub s_tilde: Vec<f64>,
    pub seed: u64,
    pub dt: f64,
    pub scheme: BoundaryScheme,
    /// Final fixed-point change reported by the reflection solver.
    pub hr_residual: f64,
}

fn steps_for(horizon: f64, dt: f64) -> Result<usize, DiffusionError> {
    if !(dt > 0.0 && horizon > 0.0 && dt.is_finite() && horizon.is_finite()) {
        return Err(DiffusionError::Grid { dt, horizon });
    }
    Ok(((horizon / dt).round() as usize).max(1))
}

fn check_chamber(r0: &[f64]) -> Result<(), DiffusionError> {
    for k in 0..r0.len().saturating_sub(1) {
        if r0[k] < r0[k + 1] {
            return Err(DiffusionError::Chamber { k: k + 1, upper: r0[k], lower: r0[k + 1] });
        }
    }
    Ok(())
}

/// Simulates the ranked system from `r0` up to `horizon` with step `dt`
/// using the bridge-corrected reflection.
pub fn simulate_ranked(params: &ParticleParams, r0: &[f64], horizon: f64, dt: f64, seed: u64) -> Result<RankedSim, DiffusionError> {
    simulate_ranked_with(params, r0, horizon, dt, seed, BoundaryScheme::default())
}

pub fn simulate_ranked_with(
    params: &ParticleParams,
    r0: &[f64],
    horizon: f64,
    dt: f64,
    seed: u64,
    scheme: BoundaryScheme,
) -> Result<RankedSim, DiffusionError> {
    let spec = ranked_spec(params)?;
    let steps = steps_for(horizon, dt)?;
    let mut rng = rng_from_seed(seed);
    let noise = Noise::sample(params.n(), steps, dt, scheme, &mut rng);
    let mut sim = ranked_from_noise(params, &spec, r0, &noise)?;
    sim.seed = seed;
    Ok(sim)
}

/// Reflection data for the ranked construction, which needs c-weights.
pub fn ranked_spec(params: &ParticleParams) -> Result<ReflectionSpec, DiffusionError> {
    let spec = build_reflection_spec(params)?;
    spec.c().map_err(DiffusionError::Degenerate)?;
    Ok(spec)
}

/// Runs the construction on given noise. Deterministic.
pub fn ranked_from_noise(params: &ParticleParams, spec: &ReflectionSpec, r0: &[f64], noise: &Noise) -> Result<RankedSim, DiffusionError> {
    let n = params.n();
    if r0.len() != n || noise.n != n {
        return Err(DiffusionError::Dimension { expected: n, got: if r0.len() != n { r0.len() } else { noise.n } });
    }
    check_chamber(r0)?;
    let c = spec.c().map_err(DiffusionError::Degenerate)?;
    let d = n - 1;
    let steps = noise.steps;
    let dt = noise.dt;
    let t = uniform_grid(dt, steps);

    // Auxiliary free levels R̃_k(t_i) = r0_k + b_k t_i + σ_k B_k(t_i).
    let mut brown = vec![0.0; n];
    let mut aux = Vec::with_capacity((steps + 1) * n);
    let mut s_tilde = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        if i > 0 {
            for k in 0..n {
                brown[k] += noise.increments[(i - 1) * n + k];
            }
        }
        let mut s = 0.0;
        for k in 0..n {
            let v = r0[k] + params.b[k] * t[i] + params.sigma[k] * brown[k];
            aux.push(v);
            s += c[k] * v;
        }
        s_tilde.push(s);
    }
    // Spacings noise x_k = R̃_k - R̃_{k+1}.
    let x: Vec<f64> = (0..=steps).flat_map(|i| (0..d).map(move |k| (i, k))).map(|(i, k)| aux[i * n + k] - aux[i * n + k + 1]).collect();

    let (xpath, stride) = match &noise.bridge {
        None => (SamplePath::new(t.clone(), x, d).expect("uniform grid"), 1),
        Some(u) => {
            let mut ta = Vec::with_capacity(2 * steps + 1);
            let mut xa = Vec::with_capacity((2 * steps + 1) * d);
            for i in 0..=steps {
                ta.push(t[i]);
                xa.extend_from_slice(&x[i * d..(i + 1) * d]);
                if i == steps {
                    break;
                }
                ta.push(t[i] + 0.5 * dt);
                for k in 0..d {
                    let dx = x[(i + 1) * d + k] - x[i * d + k];
                    let var = spec.d[k] * dt;
                    let m = 0.5 * (dx - (dx * dx - 2.0 * var * u[i * d + k].ln()).sqrt());
                    xa.push(x[i * d + k] + m);
                }
            }
            (SamplePath::new(ta, xa, d).expect("refined grid"), 2)
        }
    };
    let sol = hr_map(&xpath, &spec.r)?;
    let z = sol.z.subsampled(stride);
    let y = sol.y.subsampled(stride);
    let lambda = local_time_identification(spec, &y);
    let s_path = SamplePath::new(t, s_tilde.clone(), 1).expect("uniform grid");
    let r = reconstruct_levels(spec, &s_path, &z)?;
    Ok(RankedSim { r, lambda, z, s_tilde, seed: 0, dt, scheme: if noise.bridge.is_some() { BoundaryScheme::Bridge } else { BoundaryScheme::Grid }, hr_residual: sol.residual })
}

/// The pushing process on face `k` of the spacings problem is the collision
/// local time `Λ^{(k,k+1)}`: the elastic constraint gives it coefficient one.
pub fn local_time_identification(spec: &ReflectionSpec, y: &SamplePath) -> SamplePath {
    debug_assert_eq!(y.dim(), spec.dim());
    y.clone()
}

/// Levels from the conserved functional and the spacings:
/// `R_n = (s̃ - Σ_k c_k Σ_{j≥k} z_j) / Σ_k c_k`, `R_k = R_n + Σ_{j≥k} z_j`.
pub fn reconstruct_levels(spec: &ReflectionSpec, s_tilde: &SamplePath, z: &SamplePath) -> Result<SamplePath, DiffusionError> {
    let c = spec.c().map_err(DiffusionError::Degenerate)?;
    let n = c.len();
    if z.dim() != n - 1 {
        return Err(DiffusionError::Dimension { expected: n - 1, got: z.dim() });
    }
    if s_tilde.dim() != 1 || s_tilde.len() != z.len() {
        return Err(DiffusionError::Dimension { expected: z.len(), got: s_tilde.len() });
    }
    let csum: f64 = c.iter().sum();
    let mut out = z.map_rows(n, |zi, tail| {
        tail[n - 1] = 0.0;
        for k in (0..n - 1).rev() {
            tail[k] = tail[k + 1] + zi[k];
        }
    });
    for i in 0..out.len() {
        let row = out.row_mut(i);
        let weighted: f64 = c.iter().zip(row.iter()).map(|(ck, tk)| ck * tk).sum();
        let rn = (s_tilde.get(i, 0) - weighted) / csum;
        for v in row.iter_mut() {
            *v += rn;
        }
    }
    Ok(out)
}

/// Fraction of grid points at which two adjacent spacings are both below
/// `threshold`; a grid surrogate for triple collisions.
pub fn near_triple_fraction(z: &SamplePath, threshold: f64) -> f64 {
    if z.dim() < 2 {
        return 0.0;
    }
    let hits = (0..z.len())
        .filter(|&i| {
            let row = z.row(i);
            row.windows(2).any(|w| w[0] < threshold && w[1] < threshold)
        })
        .count();
    hits as f64 / z.len() as f64
}

/// Unranked particle paths from the approximate names simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct NamesSim {
    pub x: SamplePath,
    /// `rank[i * n + p]` is the 1-based rank of particle `p` at grid point `i`.
    pub rank: Vec<u16>,
    /// Grid time during which some adjacent pair was within `tie_band`.
    pub tie_occupation: f64,
    pub tie_band: f64,
    pub epsilon: f64,
}

impl NamesSim {
    /// Descending order statistics of the names at every grid point.
    pub fn ranked(&self) -> SamplePath {
        self.x.map_rows(self.x.dim(), |row, out| {
            out.copy_from_slice(row);
            out.sort_by(|a, b| b.total_cmp(a));
        })
    }
}

/// Default mollification width `ε = dt^{1/4}`.
pub fn default_epsilon(dt: f64) -> f64 {
    dt.powf(0.25)
}

/// Rank-based Euler scheme for the names system.
///
/// Particles take the drift and dispersion of their current rank (ties go to
/// the lower index). For `q ≠ 1/2` the collision drag uses the occupation
/// estimate `dΛ^{(k,k+1)} ≈ (σ_k² + σ_{k+1}²) 1{Z_k < ε} dt / (2ε)`, which is
/// biased by `O(ε)`; for `q ≡ 1/2` the drag vanishes and the scheme is the
/// plain rank-based Euler scheme.
pub fn simulate_names(params: &ParticleParams, x0: &[f64], horizon: f64, dt: f64, seed: u64, epsilon: f64) -> Result<NamesSim, DiffusionError> {
    let report = crate::params::validate(params);
    if !report.is_ok() {
        return Err(ParamsError::Invalid(report).into());
    }
    let n = params.n();
    if x0.len() != n {
        return Err(DiffusionError::Dimension { expected: n, got: x0.len() });
    }
    let steps = steps_for(horizon, dt)?;
    let mut rng = rng_from_seed(seed);
    let sd = dt.sqrt();
    let tie_band = dt;
    let var: Vec<f64> = (0..n - 1).map(|k| params.sigma[k].powi(2) + params.sigma[k + 1].powi(2)).collect();
    let drag = params.q_minus.iter().chain(&params.q_plus).any(|&q| q != 0.5);

    let mut x = x0.to_vec();
    let mut values = Vec::with_capacity((steps + 1) * n);
    let mut rank = Vec::with_capacity((steps + 1) * n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rank_of = vec![0usize; n];
    let mut dlam = vec![0.0; n + 1];
    let mut tie_occupation = 0.0;
    for i in 0..=steps {
        order.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
        for (r, &p) in order.iter().enumerate() {
            rank_of[p] = r;
        }
        values.extend_from_slice(&x);
        rank.extend(rank_of.iter().map(|&r| (r + 1) as u16));
        if i == steps {
            break;
        }
        let mut tied = false;
        for k in 0..n - 1 {
            let gap = x[order[k]] - x[order[k + 1]];
            tied |= gap <= tie_band;
            dlam[k + 1] = if drag && gap < epsilon { var[k] * dt / (2.0 * epsilon) } else { 0.0 };
        }
        if tied {
            tie_occupation += dt;
        }
        // dlam[k] holds the increment of Λ^{(k,k+1)} for 1-based k; slots 0 and n stay zero.
        let mut next = x.clone();
        for p in 0..n {
            let r = rank_of[p];
            let g: f64 = rng.sample(StandardNormal);
            let mut dx = params.b[r] * dt + params.sigma[r] * sd * g;
            if drag {
                dx += (params.q_minus[r] - 0.5) * dlam[r + 1] - (params.q_plus[r] - 0.5) * dlam[r];
            }
            next[p] += dx;
        }
        x = next;
    }
    Ok(NamesSim {
        x: SamplePath::new(uniform_grid(dt, steps), values, n).expect("uniform grid"),
        rank,
        tie_occupation,
        tie_band,
        epsilon,
    })
}
