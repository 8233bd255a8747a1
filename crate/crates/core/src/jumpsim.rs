//! Event-driven simulation of interacting jump particles on the integers,
//! their occupation functionals and the diffusive rescaling.
//!
//! Particle `k` (0-based here, `Γ_0 ≥ Γ_1 ≥ …`) carries a leftward and a
//! rightward renewal clock. A clock consumes its current inter-jump time at a
//! speed fixed by the neighbouring gaps: the leftward clock stops while the
//! particle sits on the one below, runs at `θ^L` while it only touches the one
//! above, and at 1 otherwise; the rightward clock mirrors this. Speeds change
//! only at jumps, so expiry times between events are exact.

use crate::numeric::CompensatedSum;
use crate::params::{ParamsError, ParticleParams, UNUSED_Q};
use crate::path::{uniform_grid, SamplePath};
use crate::replicas::{rng_from_seed, SimRng};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance for matching a waiting law to its required moments.
pub const LAW_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum JumpError {
    #[error("invalid jump parameters: {0}")]
    Invalid(String),
    #[error("assumption violated: {}", .0.join("; "))]
    Assumption(Vec<String>),
    #[error("zero denominator in reflection entry ({row}, {col})")]
    ZeroDenominator { row: usize, col: usize },
    #[error("initial positions are not ordered at particle {0}")]
    Unordered(usize),
    #[error("trace horizon {have} is shorter than the required {need}")]
    Horizon { have: f64, need: f64 },
    #[error(transparent)]
    Params(#[from] ParamsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WaitingLaw {
    /// Exponential inter-jump times; the standard deviation must equal the mean.
    #[default]
    Exponential,
    /// Gamma law with the prescribed mean and standard deviation.
    Gamma,
    /// Constant inter-jump times; the standard deviation must be zero.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
}

/// Parameters of the jump system at scale `n_scale` (the `N` of the rescaling).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpParams {
    /// Base rate of rightward jumps.
    pub a: f64,
    /// Base rate of leftward jumps.
    pub b: f64,
    pub lambda_l: Vec<f64>,
    pub lambda_r: Vec<f64>,
    pub sigma_l: Vec<f64>,
    pub sigma_r: Vec<f64>,
    pub theta_l: Vec<f64>,
    pub theta_r: Vec<f64>,
    pub n_scale: f64,
    #[serde(default)]
    pub law: WaitingLaw,
}

impl JumpParams {
    /// Exponential clocks with unit-variance-matched rates and no drift
    /// perturbation: `σ = 1/a` on the right, `1/b` on the left.
    pub fn exponential(n: usize, a: f64, b: f64, theta_l: Vec<f64>, theta_r: Vec<f64>, n_scale: f64) -> Self {
        let inv = |r: f64| if r > 0.0 { 1.0 / r } else { 1.0 };
        Self {
            a,
            b,
            lambda_l: vec![0.0; n],
            lambda_r: vec![0.0; n],
            sigma_l: vec![inv(b); n],
            sigma_r: vec![inv(a); n],
            theta_l,
            theta_r,
            n_scale,
            law: WaitingLaw::Exponential,
        }
    }

    pub fn n(&self) -> usize {
        self.lambda_l.len()
    }

    /// Jump rate `b + λ^L/√N` of the leftward clock of particle `k`.
    pub fn rate_l(&self, k: usize) -> f64 {
        self.b + self.lambda_l[k] / self.n_scale.sqrt()
    }

    pub fn rate_r(&self, k: usize) -> f64 {
        self.a + self.lambda_r[k] / self.n_scale.sqrt()
    }

    /// Shape checks plus positivity of rates, σ's and θ's. Does not look at
    /// the waiting law.
    pub fn validate_structure(&self) -> Result<(), JumpError> {
        let n = self.n();
        let bad = |m: String| Err(JumpError::Invalid(m));
        if n < 1 {
            return bad("need at least one particle".into());
        }
        for (name, v) in [
            ("lambda_r", &self.lambda_r),
            ("sigma_l", &self.sigma_l),
            ("sigma_r", &self.sigma_r),
            ("theta_l", &self.theta_l),
            ("theta_r", &self.theta_r),
        ] {
            if v.len() != n {
                return bad(format!("{name} has {} entries, expected {n}", v.len()));
            }
        }
        if !(self.a >= 0.0 && self.b >= 0.0 && self.a.is_finite() && self.b.is_finite()) || self.a + self.b <= 0.0 {
            return bad(format!("base rates must be nonnegative and not both zero (a = {}, b = {})", self.a, self.b));
        }
        if !(self.n_scale > 0.0 && self.n_scale.is_finite()) {
            return bad(format!("scale N must be positive, got {}", self.n_scale));
        }
        for k in 0..n {
            for (name, v) in [("sigma_l", self.sigma_l[k]), ("sigma_r", self.sigma_r[k])] {
                if !(v >= 0.0 && v.is_finite()) {
                    return bad(format!("{name}[{}] = {v} must be nonnegative", k + 1));
                }
            }
            for (name, v) in [("theta_l", self.theta_l[k]), ("theta_r", self.theta_r[k])] {
                if !(v >= 0.0 && v.is_finite()) {
                    return bad(format!("{name}[{}] = {v} must be nonnegative", k + 1));
                }
            }
            for (name, v) in [("left", self.rate_l(k)), ("right", self.rate_r(k))] {
                if !(v >= 0.0 && v.is_finite()) {
                    return bad(format!("{name} jump rate of particle {} is {v}", k + 1));
                }
            }
        }
        Ok(())
    }

    /// Structure plus the moment match of the waiting law for every enabled
    /// direction.
    pub fn validate(&self) -> Result<(), JumpError> {
        self.validate_structure()?;
        for k in 0..self.n() {
            for (dir, rate, sd) in [("left", self.rate_l(k), self.sigma_l[k]), ("right", self.rate_r(k), self.sigma_r[k])] {
                if rate == 0.0 {
                    continue;
                }
                let mean = 1.0 / rate;
                let ok = match self.law {
                    WaitingLaw::Exponential => (sd - mean).abs() <= LAW_TOL * mean,
                    WaitingLaw::Gamma => sd > 0.0,
                    WaitingLaw::Deterministic => sd == 0.0,
                };
                if !ok {
                    return Err(JumpError::Invalid(format!(
                        "{:?} law cannot have mean {mean} and standard deviation {sd} ({dir} clock of particle {})",
                        self.law,
                        k + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One inter-jump-time sampler per clock.
#[derive(Debug, Clone)]
enum Sampler {
    Disabled,
    Exp(Exp<f64>),
    Gamma(Gamma<f64>),
    Const(f64),
}

impl Sampler {
    fn new(law: WaitingLaw, rate: f64, sd: f64) -> Self {
        if rate <= 0.0 {
            return Sampler::Disabled;
        }
        let mean = 1.0 / rate;
        match law {
            WaitingLaw::Exponential => Sampler::Exp(Exp::new(rate).expect("positive rate")),
            WaitingLaw::Gamma => Sampler::Gamma(Gamma::new(mean * mean / (sd * sd), sd * sd / mean).expect("positive moments")),
            WaitingLaw::Deterministic => Sampler::Const(mean),
        }
    }

    fn draw(&self, rng: &mut SimRng) -> f64 {
        match self {
            Sampler::Disabled => f64::INFINITY,
            Sampler::Exp(d) => d.sample(rng),
            Sampler::Gamma(d) => d.sample(rng),
            Sampler::Const(c) => *c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    /// 1-based particle index.
    pub particle: usize,
    pub direction: Direction,
    pub position: i64,
}

/// Options for one jump run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRun {
    pub horizon: f64,
    /// Spacing of the recording grid.
    pub sample_dt: f64,
    pub record_events: bool,
}

/// Recorded jump trajectory. Every path shares the grid `0, sample_dt, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpTrace {
    pub params: JumpParams,
    pub gamma0: Vec<i64>,
    /// Positions `Γ_k`.
    pub gamma: SamplePath,
    /// Gaps `Q_k = Γ_k - Γ_{k+1}`.
    pub gaps: SamplePath,
    /// `I_k`: time with `Q_k = 0`.
    pub occupation: SamplePath,
    /// `I_{k,k+1}`: time with `Q_k = Q_{k+1} = 0` (`n-2` columns).
    pub double_occupation: SamplePath,
    /// Clock times `T^L_k`, `T^R_k`.
    pub clock_l: SamplePath,
    pub clock_r: SamplePath,
    /// Jump counts `S^L_k(T^L_k)`, `S^R_k(T^R_k)`.
    pub jumps_l: SamplePath,
    pub jumps_r: SamplePath,
    pub events: Vec<JumpEvent>,
    pub event_count: u64,
    /// Events that expired at exactly the same time as another clock.
    pub simultaneous: u64,
    /// Time from which no clock could run, if that happened.
    pub stall_time: Option<f64>,
    /// 1-based particles whose clocks are all stopped at the horizon.
    pub frozen: Vec<usize>,
    pub horizon: f64,
    pub seed: u64,
}

/// Assumption report: the clauses that failed, empty when the assumption holds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssumptionReport {
    pub failures: Vec<String>,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

fn ratio_ok(num: f64, den: f64, strict: bool) -> bool {
    if den <= 0.0 {
        return false;
    }
    let r = num / den;
    r.is_finite() && if strict { r > 0.0 } else { r >= 0.0 }
}

/// Checks the ratio and sign-pattern conditions on `(a, b, θ)`.
///
/// With `a, b > 0` the ratios must lie in `(0, ∞)`. When exactly one base rate
/// is zero the ratios may also vanish, which admits the totally asymmetric
/// systems.
pub fn check_assumption(jp: &JumpParams) -> AssumptionReport {
    let mut rep = AssumptionReport::default();
    if let Err(e) = jp.validate_structure() {
        rep.failures.push(e.to_string());
        return rep;
    }
    let n = jp.n();
    let (a, b) = (jp.a, jp.b);
    let strict = a > 0.0 && b > 0.0;
    let (tl, tr) = (&jp.theta_l, &jp.theta_r);
    // 1-based k in 1..n-1 indexes the gaps.
    for k in 1..n {
        if k >= 2 {
            let num = a + b * (tl[k - 1] - 1.0);
            let den = a * tr[k - 2] + b * tl[k - 1];
            if !ratio_ok(num, den, strict) {
                rep.failures.push(format!("(i) lower ratio at gap {k}: {num} / {den}"));
            }
        }
        if k < n - 1 {
            let num = b + a * (tr[k] - 1.0);
            let den = a * tr[k] + b * tl[k + 1];
            if !ratio_ok(num, den, strict) {
                rep.failures.push(format!("(i) upper ratio at gap {k}: {num} / {den}"));
            }
        }
    }
    // Sign pattern: nonpositive, then nonnegative.
    let s: Vec<f64> = (0..n).map(|k| a * (tr[k] - 1.0) - b * (tl[k] - 1.0)).collect();
    if let Some(first_pos) = s.iter().position(|&v| v > 0.0) {
        if let Some(j) = (first_pos..n).find(|&j| s[j] < 0.0) {
            rep.failures.push(format!("(ii) sign pattern breaks at particle {}: {} after a positive entry", j + 1, s[j]));
        }
    }
    rep
}

/// Rows `Q_k` of the occupation identity without normalisation:
/// `Q = Q(0) + X̄ + M I + ℜ̃ I₂`. `M` always exists; `ℜ = M diag(w)^{-1}`
/// with `w_k = aθ^R_k + bθ^L_{k+1}`.
pub fn occupation_matrices(jp: &JumpParams) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = jp.n();
    let d = n.saturating_sub(1);
    let e = n.saturating_sub(2);
    let (a, b, tl, tr) = (jp.a, jp.b, &jp.theta_l, &jp.theta_r);
    let mut m = DMatrix::zeros(d, d);
    let mut rt = DMatrix::zeros(d, e);
    for i in 0..d {
        // 0-based gap i sits between particles i and i+1.
        m[(i, i)] = a * tr[i] + b * tl[i + 1];
        if i >= 1 {
            m[(i, i - 1)] = -(a + b * (tl[i] - 1.0));
            rt[(i, i - 1)] = -a * (tr[i] - 1.0) + b * (tl[i] - 1.0);
        }
        if i + 1 < d {
            m[(i, i + 1)] = -(b + a * (tr[i + 1] - 1.0));
        }
        if i < e {
            rt[(i, i)] = a * (tr[i + 1] - 1.0) - b * (tl[i + 1] - 1.0);
        }
    }
    (m, rt)
}

/// Weights `w_k = aθ^R_k + bθ^L_{k+1}` turning `I_k` into `𝔜_k`.
pub fn local_time_weights(jp: &JumpParams) -> Vec<f64> {
    (0..jp.n().saturating_sub(1)).map(|i| jp.a * jp.theta_r[i] + jp.b * jp.theta_l[i + 1]).collect()
}

/// The reflection matrices `ℜ` (`(n-1)×(n-1)`) and `ℜ̃` (`(n-1)×(n-2)`).
pub fn build_limit_matrices(jp: &JumpParams) -> Result<(DMatrix<f64>, DMatrix<f64>), JumpError> {
    jp.validate_structure()?;
    let (m, rt) = occupation_matrices(jp);
    let w = local_time_weights(jp);
    let d = w.len();
    let mut r = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i.saturating_sub(1)..(i + 2).min(d) {
            if j == i {
                r[(i, i)] = 1.0;
            } else if w[j] > 0.0 {
                r[(i, j)] = m[(i, j)] / w[j];
            } else {
                return Err(JumpError::ZeroDenominator { row: i + 1, col: j + 1 });
            }
        }
    }
    Ok((r, rt))
}

/// Column sums of `I - ℜ` with the entries of the two boundary rows kept.
///
/// Column `k` of `I - ℜ` splits the pushing on gap `k` between the gaps
/// above and below it. For the first and last gap one of those rows lies
/// outside the `(n-1)×(n-1)` matrix, so the truncated sums fall short of 1.
/// Here the missing share is added back, which gives 1 for every column.
pub fn reflection_column_sums(jp: &JumpParams) -> Result<Vec<f64>, JumpError> {
    jp.validate_structure()?;
    let w = local_time_weights(jp);
    let (a, b, tl, tr) = (jp.a, jp.b, &jp.theta_l, &jp.theta_r);
    w.iter()
        .enumerate()
        .map(|(j, &wj)| {
            if wj <= 0.0 {
                return Err(JumpError::ZeroDenominator { row: j + 1, col: j + 1 });
            }
            let above = (b + a * (tr[j] - 1.0)) / wj;
            let below = (a + b * (tl[j + 1] - 1.0)) / wj;
            Ok(above + below)
        })
        .collect()
}

/// Collision shares of the limit system, before any projection:
/// `q^-_k` for `k = 1..n-1` and `q^+_k` for `k = 2..n`.
pub fn limit_collision_shares(jp: &JumpParams) -> Result<(Vec<f64>, Vec<f64>), JumpError> {
    jp.validate_structure()?;
    let (a, b, tl, tr) = (jp.a, jp.b, &jp.theta_l, &jp.theta_r);
    let n = jp.n();
    let mut qm = Vec::with_capacity(n - 1);
    let mut qp = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let den = a * tr[k] + b * tl[k + 1];
        if den <= 0.0 {
            return Err(JumpError::ZeroDenominator { row: k + 1, col: k + 1 });
        }
        qm.push((a * (tr[k] - 1.0) + b) / den);
        qp.push((b * (tl[k + 1] - 1.0) + a) / den);
    }
    Ok((qm, qp))
}

/// Limit ranked system with its drift and dispersion.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitSpec {
    pub params: ParticleParams,
    pub drift: Vec<f64>,
    pub dispersion: Vec<f64>,
    /// Largest `|q^-_k + q^+_{k+1} - 1|` before projection.
    pub elastic_residual: f64,
}

pub fn limit_spec(jp: &JumpParams) -> Result<LimitSpec, JumpError> {
    let rep = check_assumption(jp);
    if !rep.holds() {
        return Err(JumpError::Assumption(rep.failures));
    }
    let n = jp.n();
    let (qm_i, qp_i) = limit_collision_shares(jp)?;
    let elastic_residual = qm_i.iter().zip(&qp_i).map(|(m, p)| (m + p - 1.0).abs()).fold(0.0, f64::max);
    if elastic_residual > 1e-12 {
        return Err(JumpError::Invalid(format!("limit shares miss the elastic constraint by {elastic_residual:e}")));
    }
    let drift: Vec<f64> = (0..n).map(|k| jp.lambda_r[k] - jp.lambda_l[k]).collect();
    let dispersion: Vec<f64> =
        (0..n).map(|k| (jp.a.powi(3) * jp.sigma_r[k].powi(2) + jp.b.powi(3) * jp.sigma_l[k].powi(2)).sqrt()).collect();
    let mut q_minus = qm_i.iter().map(|v| v.clamp(0.0, 1.0)).collect::<Vec<_>>();
    q_minus.push(UNUSED_Q);
    let mut q_plus = vec![UNUSED_Q];
    q_plus.extend(qp_i.iter().map(|v| v.clamp(0.0, 1.0)));
    let params = ParticleParams::new(drift.clone(), dispersion.clone(), q_minus, q_plus)?;
    Ok(LimitSpec { params, drift, dispersion, elastic_residual })
}

fn speeds(jp: &JumpParams, gaps: &[i64], k: usize) -> (f64, f64) {
    let n = jp.n();
    let below_tied = k + 1 < n && gaps[k] == 0;
    let above_tied = k > 0 && gaps[k - 1] == 0;
    let left = if below_tied {
        0.0
    } else if above_tied {
        jp.theta_l[k]
    } else {
        1.0
    };
    let right = if above_tied {
        0.0
    } else if below_tied {
        jp.theta_r[k]
    } else {
        1.0
    };
    (left, right)
}

/// Running accumulators between two events.
struct Accum {
    occ: Vec<CompensatedSum>,
    occ2: Vec<CompensatedSum>,
    tl: Vec<CompensatedSum>,
    tr: Vec<CompensatedSum>,
}

struct Recorder {
    grid: Vec<f64>,
    next: usize,
    gamma: Vec<f64>,
    gaps: Vec<f64>,
    occ: Vec<f64>,
    occ2: Vec<f64>,
    tl: Vec<f64>,
    tr: Vec<f64>,
    sl: Vec<f64>,
    sr: Vec<f64>,
}

/// Simulates the jump system from `gamma0` (descending) up to `run.horizon`.
pub fn simulate_jumps(jp: &JumpParams, gamma0: &[i64], run: JumpRun, seed: u64) -> Result<JumpTrace, JumpError> {
    jp.validate()?;
    let n = jp.n();
    if gamma0.len() != n {
        return Err(JumpError::Invalid(format!("gamma0 has {} entries, expected {n}", gamma0.len())));
    }
    if let Some(k) = (0..n.saturating_sub(1)).find(|&k| gamma0[k] < gamma0[k + 1]) {
        return Err(JumpError::Unordered(k + 1));
    }
    if !(run.horizon > 0.0 && run.sample_dt > 0.0 && run.horizon.is_finite()) {
        return Err(JumpError::Invalid(format!("horizon {} and sample_dt {} must be positive", run.horizon, run.sample_dt)));
    }
    let mut rng = rng_from_seed(seed);
    let samplers: Vec<[Sampler; 2]> = (0..n)
        .map(|k| [Sampler::new(jp.law, jp.rate_l(k), jp.sigma_l[k]), Sampler::new(jp.law, jp.rate_r(k), jp.sigma_r[k])])
        .collect();
    let d = n.saturating_sub(1);
    let e = n.saturating_sub(2);

    let mut pos = gamma0.to_vec();
    let mut gaps: Vec<i64> = (0..d).map(|k| pos[k] - pos[k + 1]).collect();
    // residual[k][0] is leftward, [1] rightward, in clock time.
    let mut residual: Vec<[f64; 2]> = samplers.iter().map(|s| [s[0].draw(&mut rng), s[1].draw(&mut rng)]).collect();
    let mut counts = vec![[0u64; 2]; n];
    let mut acc = Accum {
        occ: vec![CompensatedSum::default(); d],
        occ2: vec![CompensatedSum::default(); e],
        tl: vec![CompensatedSum::default(); n],
        tr: vec![CompensatedSum::default(); n],
    };
    let steps = (run.horizon / run.sample_dt * (1.0 + 1e-12)).floor() as usize;
    let mut rec = Recorder {
        grid: uniform_grid(run.sample_dt, steps),
        next: 0,
        gamma: Vec::new(),
        gaps: Vec::new(),
        occ: Vec::new(),
        occ2: Vec::new(),
        tl: Vec::new(),
        tr: Vec::new(),
        sl: Vec::new(),
        sr: Vec::new(),
    };
    let mut events = Vec::new();
    let mut event_count = 0u64;
    let mut simultaneous = 0u64;
    let mut stall_time = None;
    let mut t = 0.0;
    let mut sp: Vec<(f64, f64)> = (0..n).map(|k| speeds(jp, &gaps, k)).collect();

    loop {
        // Earliest expiry among running clocks; lowest particle, then left, wins ties.
        let mut best: Option<(f64, usize, usize)> = None;
        let mut tie = false;
        for k in 0..n {
            for (dir, s) in [(0usize, sp[k].0), (1usize, sp[k].1)] {
                if s <= 0.0 || !residual[k][dir].is_finite() {
                    continue;
                }
                let dt = residual[k][dir] / s;
                match best {
                    Some((b, _, _)) if dt > b => {}
                    Some((b, _, _)) if dt == b => tie = true,
                    _ => {
                        best = Some((dt, k, dir));
                        tie = false;
                    }
                }
            }
        }
        let t_next = match best {
            Some((dt, _, _)) => t + dt,
            None => {
                if stall_time.is_none() {
                    stall_time = Some(t);
                }
                f64::INFINITY
            }
        };
        // Paths are right-continuous: a grid point at an event time is
        // recorded after that event.
        while rec.next < rec.grid.len() && rec.grid[rec.next] < t_next {
            let tau = rec.grid[rec.next] - t;
            record(&mut rec, &pos, &gaps, &acc, &sp, &counts, tau);
        }
        if t_next > run.horizon {
            break;
        }
        let (dt, k, dir) = best.expect("finite next event");
        advance(&mut acc, &gaps, &sp, dt);
        for (j, r) in residual.iter_mut().enumerate() {
            let s = [sp[j].0, sp[j].1];
            for dd in 0..2 {
                if s[dd] > 0.0 && r[dd].is_finite() {
                    r[dd] = (r[dd] - s[dd] * dt).max(0.0);
                }
            }
        }
        t = t_next;
        if tie {
            simultaneous += 1;
        }
        residual[k][dir] = samplers[k][dir].draw(&mut rng);
        counts[k][dir] += 1;
        if dir == 0 {
            pos[k] -= 1;
        } else {
            pos[k] += 1;
        }
        if k > 0 {
            gaps[k - 1] = pos[k - 1] - pos[k];
        }
        if k + 1 < n {
            gaps[k] = pos[k] - pos[k + 1];
        }
        debug_assert!(gaps.iter().all(|&g| g >= 0));
        for j in k.saturating_sub(1)..(k + 2).min(n) {
            sp[j] = speeds(jp, &gaps, j);
        }
        event_count += 1;
        if run.record_events {
            events.push(JumpEvent {
                time: t,
                particle: k + 1,
                direction: if dir == 0 { Direction::Left } else { Direction::Right },
                position: pos[k],
            });
        }
    }

    let frozen = (0..n)
        .filter(|&k| {
            let (l, r) = sp[k];
            (l <= 0.0 || matches!(samplers[k][0], Sampler::Disabled)) && (r <= 0.0 || matches!(samplers[k][1], Sampler::Disabled))
        })
        .map(|k| k + 1)
        .collect();
    let grid = rec.grid.clone();
    let mk = |v: Vec<f64>, dim: usize| SamplePath::new(grid.clone(), v, dim).expect("recorded grid");
    Ok(JumpTrace {
        params: jp.clone(),
        gamma0: gamma0.to_vec(),
        gamma: mk(rec.gamma, n),
        gaps: mk(rec.gaps, d),
        occupation: mk(rec.occ, d),
        double_occupation: mk(rec.occ2, e),
        clock_l: mk(rec.tl, n),
        clock_r: mk(rec.tr, n),
        jumps_l: mk(rec.sl, n),
        jumps_r: mk(rec.sr, n),
        events,
        event_count,
        simultaneous,
        stall_time,
        frozen,
        horizon: run.horizon,
        seed,
    })
}

fn advance(acc: &mut Accum, gaps: &[i64], sp: &[(f64, f64)], dt: f64) {
    if dt <= 0.0 {
        return;
    }
    for (k, g) in gaps.iter().enumerate() {
        if *g == 0 {
            acc.occ[k].add(dt);
        }
    }
    for k in 0..acc.occ2.len() {
        if gaps[k] == 0 && gaps[k + 1] == 0 {
            acc.occ2[k].add(dt);
        }
    }
    for (k, &(l, r)) in sp.iter().enumerate() {
        if l > 0.0 {
            acc.tl[k].add(l * dt);
        }
        if r > 0.0 {
            acc.tr[k].add(r * dt);
        }
    }
}

/// Appends the state `tau` time units after the last event.
fn record(rec: &mut Recorder, pos: &[i64], gaps: &[i64], acc: &Accum, sp: &[(f64, f64)], counts: &[[u64; 2]], tau: f64) {
    rec.gamma.extend(pos.iter().map(|&p| p as f64));
    rec.gaps.extend(gaps.iter().map(|&g| g as f64));
    rec.occ.extend(acc.occ.iter().zip(gaps).map(|(s, &g)| s.value() + if g == 0 { tau } else { 0.0 }));
    for k in 0..acc.occ2.len() {
        let both = gaps[k] == 0 && gaps[k + 1] == 0;
        rec.occ2.push(acc.occ2[k].value() + if both { tau } else { 0.0 });
    }
    rec.tl.extend(acc.tl.iter().zip(sp).map(|(s, &(l, _))| s.value() + l * tau));
    rec.tr.extend(acc.tr.iter().zip(sp).map(|(s, &(_, r))| s.value() + r * tau));
    rec.sl.extend(counts.iter().map(|c| c[0] as f64));
    rec.sr.extend(counts.iter().map(|c| c[1] as f64));
    rec.next += 1;
}

impl JumpTrace {
    /// Largest discrepancy between the recorded clocks and their expression
    /// through the occupation times,
    /// `T^L_k = t - I_k + (θ^L_k - 1)(I_{k-1} - I_{k-1,k})` and
    /// `T^R_k = t - I_{k-1} + (θ^R_k - 1)(I_k - I_{k-1,k})`.
    pub fn clock_identity_defect(&self) -> f64 {
        let n = self.params.n();
        let mut worst: f64 = 0.0;
        for i in 0..self.gamma.len() {
            let t = self.gamma.times()[i];
            let occ = |k: usize| if k >= 1 && k < n { self.occupation.get(i, k - 1) } else { 0.0 };
            let occ2 = |k: usize| if k >= 1 && k + 1 < n { self.double_occupation.get(i, k - 1) } else { 0.0 };
            for k in 1..=n {
                let tl = t - occ(k) + (self.params.theta_l[k - 1] - 1.0) * (occ(k - 1) - occ2(k - 1));
                let tr = t - occ(k - 1) + (self.params.theta_r[k - 1] - 1.0) * (occ(k) - occ2(k - 1));
                worst = worst.max((tl - self.clock_l.get(i, k - 1)).abs());
                worst = worst.max((tr - self.clock_r.get(i, k - 1)).abs());
            }
        }
        worst
    }

    /// Largest violation of `Γ_1 ≥ … ≥ Γ_n` on the grid (0 when ordered).
    pub fn order_defect(&self) -> f64 {
        self.gaps.values().iter().fold(0.0, |m, &g| m.max(-g))
    }

    /// Writes the event log as CSV: `time,particle,direction,position`.
    pub fn write_events_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time", "particle", "direction", "position"])?;
        for ev in &self.events {
            let dir = match ev.direction {
                Direction::Left => "L",
                Direction::Right => "R",
            };
            w.write_record([crate::path::fmt_f64(ev.time), ev.particle.to_string(), dir.to_string(), ev.position.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Diffusively rescaled functionals of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    /// `Q(Nt)/√N`.
    pub q: SamplePath,
    /// `X̄^N`.
    pub xbar: SamplePath,
    /// `𝔜^N_k = (aθ^R_k + bθ^L_{k+1}) I_k(Nt)/√N`.
    pub y: SamplePath,
    /// `𝔜̃^N_k = I_{k,k+1}(Nt)/√N`.
    pub ytilde: SamplePath,
    /// `I_k(Nt)/√N`, defined even when a weight vanishes.
    pub occupation: SamplePath,
    /// `Γ(Nt)/√N - (a - b) t √N`.
    pub gamma: SamplePath,
}

/// Rescales the recorded grid points with `t ≤ t_target` (in rescaled time).
pub fn rescale(trace: &JumpTrace, t_target: f64) -> Result<Rescaled, JumpError> {
    let jp = &trace.params;
    let big_n = jp.n_scale;
    let need = big_n * t_target;
    if trace.horizon < need * (1.0 - 1e-12) {
        return Err(JumpError::Horizon { have: trace.horizon, need });
    }
    let n = jp.n();
    let d = n.saturating_sub(1);
    let rows = trace.gamma.times().iter().take_while(|&&t| t <= need * (1.0 + 1e-12)).count();
    let sq = big_n.sqrt();
    let times: Vec<f64> = trace.gamma.times()[..rows].iter().map(|t| t / big_n).collect();
    let w = local_time_weights(jp);
    let mut q = Vec::with_capacity(rows * d);
    let mut xbar = Vec::with_capacity(rows * d);
    let mut y = Vec::with_capacity(rows * d);
    let mut occ = Vec::with_capacity(rows * d);
    let mut yt = Vec::with_capacity(rows * n.saturating_sub(2));
    let mut gamma = Vec::with_capacity(rows * n);
    for i in 0..rows {
        let tr = times[i];
        // Centred counts S̄^L_k(T^L_k) and S̄^R_k(T^R_k).
        let sl: Vec<f64> = (0..n).map(|k| trace.jumps_l.get(i, k) - jp.b * trace.clock_l.get(i, k)).collect();
        let sr: Vec<f64> = (0..n).map(|k| trace.jumps_r.get(i, k) - jp.a * trace.clock_r.get(i, k)).collect();
        for k in 0..d {
            q.push(trace.gaps.get(i, k) / sq);
            xbar.push((-sl[k] + sr[k] + sl[k + 1] - sr[k + 1]) / sq);
            let o = trace.occupation.get(i, k) / sq;
            occ.push(o);
            y.push(w[k] * o);
        }
        yt.extend(trace.double_occupation.row(i).iter().map(|v| v / sq));
        gamma.extend(trace.gamma.row(i).iter().map(|g| g / sq - (jp.a - jp.b) * tr * sq));
    }
    let mk = |v: Vec<f64>, dim: usize| SamplePath::new(times.clone(), v, dim).expect("rescaled grid");
    Ok(Rescaled {
        q: mk(q, d),
        xbar: mk(xbar, d),
        y: mk(y, d),
        ytilde: mk(yt, n.saturating_sub(2)),
        occupation: mk(occ, d),
        gamma: mk(gamma, n),
    })
}

/// Sup-norm defect of `Q^N = Q^N(0) + X̄^N + M I^N + ℜ̃ 𝔜̃^N` with the
/// unnormalised occupation matrix. Works when `ℜ` itself is undefined.
pub fn occupation_identity_defect(jp: &JumpParams, r: &Rescaled) -> f64 {
    let (m, rt) = occupation_matrices(jp);
    let d = r.q.dim();
    let e = r.ytilde.dim();
    let q0 = r.q.row(0).to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..r.q.len() {
        for k in 0..d {
            let mut rhs = q0[k] + r.xbar.get(i, k);
            for j in 0..d {
                rhs += m[(k, j)] * r.occupation.get(i, j);
            }
            for j in 0..e {
                rhs += rt[(k, j)] * r.ytilde.get(i, j);
            }
            worst = worst.max((r.q.get(i, k) - rhs).abs());
        }
    }
    worst
}

/// Draws a random parameter set satisfying [`check_assumption`], with gamma
/// waiting laws, for property sweeps.
pub fn random_admissible(rng: &mut SimRng, n: usize) -> JumpParams {
    loop {
        let a: f64 = rng.random_range(0.2..3.0);
        let b: f64 = rng.random_range(0.2..3.0);
        let theta_l: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..3.0)).collect();
        // Pick the sign-pattern numbers sorted, then solve for θ^R.
        let mut s: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        s.sort_by(f64::total_cmp);
        let theta_r: Vec<f64> = (0..n).map(|k| 1.0 + (s[k] + b * (theta_l[k] - 1.0)) / a).collect();
        if theta_r.iter().any(|&v| v < 0.0) {
            continue;
        }
        let jp = JumpParams {
            a,
            b,
            lambda_l: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            lambda_r: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            sigma_l: (0..n).map(|_| rng.random_range(0.2..2.0)).collect(),
            sigma_r: (0..n).map(|_| rng.random_range(0.2..2.0)).collect(),
            theta_l,
            theta_r,
            n_scale: 100.0,
            law: WaitingLaw::Gamma,
        };
        if check_assumption(&jp).holds() {
            return jp;
        }
    }
}
