//! Transition densities of permutation-sum (Karlin–McGregor) type.
//!
//! When all drifts agree, all dispersions agree and every interface is either
//! symmetric (`q^- = ½`), TASEP-like (`q^- = 0, q^+ = 1`) or reversed
//! (`q^- = 1, q^+ = 0`), the density is
//! `p(t, r, r̃) = Σ_σ κ_σ Π_k f^{k,σ(k)}(t, r̃_{σ(k)} - r_k)` where each
//! kernel is a Gaussian density differentiated or integrated a number of
//! times fixed by the interfaces between `k` and `σ(k)`.
//!
//! Kernel rules, with the chain read from row `ℓ` (where `f^{ℓ,ℓ} = φ`):
//! an interface with `q^- = ½` copies the kernel, `q^- = 1` makes the row
//! below the derivative of the row above, `q^- = 0` the reverse. For `ℓ > k`
//! this means ones integrate and zeros differentiate; for `ℓ < k` the roles
//! swap. Antiderivatives vanish at `-∞` above the diagonal and at `+∞` below
//! it, which keeps every term integrable.
//!
//! Permutation weights: `κ ≡ 1` when all interfaces are symmetric and
//! `κ_σ = sgn σ` when none is. Mixed systems admit no constant weights with
//! these kernels (the symmetric interface needs `κ_σ = κ_{σ∘τ}`, the
//! asymmetric one `κ_σ = -κ_{σ∘τ}`, and adjacent transpositions are
//! conjugate), so [`eval_density`] refuses them.

use crate::diffusion::{simulate_ranked, DiffusionError};
use crate::jumpsim::{rescale, simulate_jumps, JumpError, JumpParams, JumpRun};
use crate::numeric::{std_normal_pdf, std_normal_sf, GaussLegendre};
use crate::params::ParticleParams;
use crate::replicas;
use crate::stats::histogram;
use nalgebra::DMatrix;
use thiserror::Error;

/// Permutation sums are exact; larger systems are refused.
pub const MAX_N: usize = 8;
/// Smallest finite-difference step accepted by [`verify_pde`].
pub const MIN_STEP: f64 = 1e-5;
const EQ_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("not determinantal: {0}")]
    Rejected(String),
    #[error("time must be positive, got {0}")]
    Time(f64),
    #[error("point is outside the Weyl chamber at index {0}")]
    Chamber(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("n = {0} exceeds the exact permutation-sum limit {MAX_N}")]
    TooLarge(usize),
    #[error("no constant permutation weights exist for mixed symmetric/asymmetric interfaces")]
    MixedKappa,
    #[error("finite-difference step {0} is below {MIN_STEP}")]
    Step(f64),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Jump(#[from] JumpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceCase {
    Symmetric,
    /// `q^- = 0, q^+ = 1`, the TASEP-like interface.
    MinusZero,
    /// `q^- = 1, q^+ = 0`.
    MinusOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaRule {
    One,
    Sign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    pub n: usize,
    pub b: f64,
    pub sigma: f64,
    pub interface: Vec<InterfaceCase>,
    /// `uz_table[k][ℓ] = (derivatives, antiderivatives)` applied to `φ` for
    /// `f^{k,ℓ}` (0-based).
    pub uz_table: Vec<Vec<(u32, u32)>>,
    /// `None` for mixed systems.
    pub kappa: Option<KappaRule>,
}

impl DensitySpec {
    /// Net derivative order of `f^{k,ℓ}`; negative means antiderivatives.
    pub fn order(&self, k: usize, l: usize) -> i32 {
        let (u, z) = self.uz_table[k][l];
        u as i32 - z as i32
    }
}

/// Accepts exactly the determinantal parameter sets.
pub fn classify(params: &ParticleParams) -> Result<DensitySpec, DensityError> {
    let n = params.n();
    for k in 1..n {
        if (params.b[k] - params.b[0]).abs() > EQ_TOL {
            return Err(DensityError::Rejected(format!("drift b[{}] = {} differs from b[1] = {}", k + 1, params.b[k], params.b[0])));
        }
        if (params.sigma[k] - params.sigma[0]).abs() > EQ_TOL {
            return Err(DensityError::Rejected(format!(
                "dispersion sigma[{}] = {} differs from sigma[1] = {}",
                k + 1,
                params.sigma[k],
                params.sigma[0]
            )));
        }
    }
    let close = |a: f64, b: f64| (a - b).abs() <= EQ_TOL;
    let mut interface = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let (qm, qp) = (params.q_minus[k], params.q_plus[k + 1]);
        let case = if close(qm, 0.5) && close(qp, 0.5) {
            InterfaceCase::Symmetric
        } else if close(qm, 0.0) && close(qp, 1.0) {
            InterfaceCase::MinusZero
        } else if close(qm, 1.0) && close(qp, 0.0) {
            InterfaceCase::MinusOne
        } else {
            return Err(DensityError::Rejected(format!("interface {} has (q_minus, q_plus) = ({qm}, {qp})", k + 1)));
        };
        interface.push(case);
    }
    Ok(spec_from_cases(n, params.b[0], params.sigma[0], interface))
}

/// Builds the kernel table for given interface cases.
pub fn spec_from_cases(n: usize, b: f64, sigma: f64, interface: Vec<InterfaceCase>) -> DensitySpec {
    assert_eq!(interface.len() + 1, n);
    let mut uz = vec![vec![(0u32, 0u32); n]; n];
    for k in 0..n {
        for l in 0..n {
            let (lo, hi) = if l > k { (k, l) } else { (l, k) };
            let mut ones = 0;
            let mut zeros = 0;
            for c in &interface[lo..hi] {
                match c {
                    InterfaceCase::MinusOne => ones += 1,
                    InterfaceCase::MinusZero => zeros += 1,
                    InterfaceCase::Symmetric => {}
                }
            }
            uz[k][l] = if l > k { (zeros, ones) } else { (ones, zeros) };
        }
    }
    let sym = interface.iter().all(|c| *c == InterfaceCase::Symmetric);
    let asym = interface.iter().all(|c| *c != InterfaceCase::Symmetric);
    let kappa = if sym {
        Some(KappaRule::One)
    } else if asym {
        Some(KappaRule::Sign)
    } else {
        None
    };
    DensitySpec { n, b, sigma, interface, uz_table: uz, kappa }
}

/// Hermite polynomial `He_m(y)`.
fn hermite(m: u32, y: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, y);
    if m == 0 {
        return h0;
    }
    for j in 1..m {
        let h2 = y * h1 - j as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Repeated tail integrals of the standard normal density:
/// `J^0 = φ`, `J^p(x) = ∫_x^∞ J^{p-1}`, via `p J^{p+1} = J^{p-1} - x J^p`.
pub fn normal_tail_integral(p: u32, x: f64) -> f64 {
    let (mut j0, mut j1) = (std_normal_pdf(x), std_normal_sf(x));
    if p == 0 {
        return j0;
    }
    for q in 1..p {
        let j2 = (j0 - x * j1) / q as f64;
        j0 = j1;
        j1 = j2;
    }
    j1
}

/// Kernel of net derivative `order`, with antiderivatives vanishing at `-∞`
/// when `above_diagonal` and at `+∞` otherwise.
pub fn kernel(order: i32, above_diagonal: bool, b: f64, sigma: f64, t: f64, x: f64) -> f64 {
    let s = sigma * t.sqrt();
    let y = (x - b * t) / s;
    if order >= 0 {
        let m = order as u32;
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * s.powi(-(order + 1)) * hermite(m, y) * std_normal_pdf(y)
    } else {
        let p = (-order) as u32;
        let scale = s.powi(p as i32 - 1);
        if above_diagonal {
            scale * normal_tail_integral(p, -y)
        } else {
            let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * scale * normal_tail_integral(p, y)
        }
    }
}

/// `f^{k,ℓ}(t, x)` with 0-based `k`, `ℓ`.
pub fn eval_kernel(spec: &DensitySpec, k: usize, l: usize, t: f64, x: f64) -> Result<f64, DensityError> {
    if !(t > 0.0) {
        return Err(DensityError::Time(t));
    }
    if k >= spec.n || l >= spec.n {
        return Err(DensityError::Dimension { expected: spec.n, got: k.max(l) + 1 });
    }
    Ok(kernel(spec.order(k, l), l > k, spec.b, spec.sigma, t, x))
}

fn check_chamber(x: &[f64]) -> Result<(), DensityError> {
    match (1..x.len()).find(|&i| x[i] > x[i - 1]) {
        Some(i) => Err(DensityError::Chamber(i)),
        None => Ok(()),
    }
}

/// Calls `f(perm, sign)` for every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation<F: FnMut(&[usize], f64)>(n: usize, mut f: F) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    f(&a, sign);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            f(&a, sign);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Kernel matrix `K[k][ℓ] = f^{k,ℓ}(t, r̃_ℓ - r_k)`.
pub fn kernel_matrix(spec: &DensitySpec, t: f64, r: &[f64], rtilde: &[f64]) -> DMatrix<f64> {
    let n = spec.n;
    DMatrix::from_fn(n, n, |k, l| kernel(spec.order(k, l), l > k, spec.b, spec.sigma, t, rtilde[l] - r[k]))
}

fn density_unchecked(spec: &DensitySpec, t: f64, r: &[f64], rtilde: &[f64], rule: KappaRule) -> f64 {
    let k = kernel_matrix(spec, t, r, rtilde);
    let mut total = 0.0;
    for_each_permutation(spec.n, |perm, sign| {
        let w = match rule {
            KappaRule::One => 1.0,
            KappaRule::Sign => sign,
        };
        total += w * perm.iter().enumerate().map(|(i, &j)| k[(i, j)]).product::<f64>();
    });
    total
}

fn check_inputs(spec: &DensitySpec, t: f64, r: &[f64], rtilde: &[f64]) -> Result<(), DensityError> {
    if spec.n > MAX_N {
        return Err(DensityError::TooLarge(spec.n));
    }
    if !(t > 0.0) {
        return Err(DensityError::Time(t));
    }
    for v in [r, rtilde] {
        if v.len() != spec.n {
            return Err(DensityError::Dimension { expected: spec.n, got: v.len() });
        }
    }
    check_chamber(r)?;
    check_chamber(rtilde)
}

/// `p(t, r, r̃)` with the weights the interfaces admit.
pub fn eval_density(spec: &DensitySpec, t: f64, r: &[f64], rtilde: &[f64]) -> Result<f64, DensityError> {
    let rule = spec.kappa.ok_or(DensityError::MixedKappa)?;
    eval_density_with_kappa(spec, t, r, rtilde, rule)
}

/// Permutation sum with explicitly chosen weights; for mixed systems this
/// shows how the boundary condition fails.
pub fn eval_density_with_kappa(spec: &DensitySpec, t: f64, r: &[f64], rtilde: &[f64], rule: KappaRule) -> Result<f64, DensityError> {
    check_inputs(spec, t, r, rtilde)?;
    Ok(density_unchecked(spec, t, r, rtilde, rule))
}

/// Finite-difference residuals at one step size.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeResidual {
    pub h: f64,
    /// `∂_t p - ½σ² Σ ∂²_{r_k} p - b Σ ∂_{r_k} p`.
    pub heat: f64,
    /// `q_k^- ∂_{r_k} p - q_{k+1}^+ ∂_{r_{k+1}} p` at each tied pair of `r`
    /// (`None` for pairs that are not tied).
    pub boundary: Vec<Option<f64>>,
}

/// Residuals at `h` and `h/2`; a second-order scheme shows ratios near 4.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeReport {
    pub coarse: PdeResidual,
    pub fine: PdeResidual,
}

impl PdeReport {
    pub fn heat_ratio(&self) -> f64 {
        self.coarse.heat.abs() / self.fine.heat.abs()
    }

    /// Every residual is either negligible or shrinks like `h²`.
    pub fn second_order(&self) -> bool {
        let ok = |c: f64, f: f64| f.abs() < 1e-11 || (3.0..5.0).contains(&(c.abs() / f.abs()));
        ok(self.coarse.heat, self.fine.heat)
            && self.coarse.boundary.iter().zip(&self.fine.boundary).all(|(c, f)| match (c, f) {
                (Some(c), Some(f)) => ok(*c, *f),
                _ => true,
            })
    }

    /// Ratios for the tied pairs.
    pub fn boundary_ratios(&self) -> Vec<f64> {
        self.coarse
            .boundary
            .iter()
            .zip(&self.fine.boundary)
            .filter_map(|(c, f)| Some(c.as_ref()?.abs() / f.as_ref()?.abs()))
            .collect()
    }
}

fn shares(case: InterfaceCase) -> (f64, f64) {
    match case {
        InterfaceCase::Symmetric => (0.5, 0.5),
        InterfaceCase::MinusZero => (0.0, 1.0),
        InterfaceCase::MinusOne => (1.0, 0.0),
    }
}

fn residual_at(spec: &DensitySpec, t: f64, r: &[f64], rtilde: &[f64], h: f64, rule: KappaRule) -> PdeResidual {
    let p = |t: f64, r: &[f64]| density_unchecked(spec, t, r, rtilde, rule);
    let n = spec.n;
    let p0 = p(t, r);
    let dt = (p(t + h, r) - p(t - h, r)) / (2.0 * h);
    let mut lap = 0.0;
    let mut grad = vec![0.0; n];
    let mut shifted = r.to_vec();
    for k in 0..n {
        shifted[k] = r[k] + h;
        let up = p(t, &shifted);
        shifted[k] = r[k] - h;
        let down = p(t, &shifted);
        shifted[k] = r[k];
        lap += (up - 2.0 * p0 + down) / (h * h);
        grad[k] = (up - down) / (2.0 * h);
    }
    let heat = dt - 0.5 * spec.sigma * spec.sigma * lap - spec.b * grad.iter().sum::<f64>();
    let boundary = (0..n - 1)
        .map(|k| {
            (r[k] == r[k + 1]).then(|| {
                let (qm, qp) = shares(spec.interface[k]);
                qm * grad[k] - qp * grad[k + 1]
            })
        })
        .collect();
    PdeResidual { h, heat, boundary }
}

/// Central-difference residuals of the backward heat equation and of the
/// elastic boundary condition at the ties of `r`, at steps `h` and `h/2`.
pub fn verify_pde(spec: &DensitySpec, t: f64, r: &[f64], rtilde: &[f64], h: f64) -> Result<PdeReport, DensityError> {
    let rule = spec.kappa.ok_or(DensityError::MixedKappa)?;
    verify_pde_with_kappa(spec, t, r, rtilde, h, rule)
}

pub fn verify_pde_with_kappa(spec: &DensitySpec, t: f64, r: &[f64], rtilde: &[f64], h: f64, rule: KappaRule) -> Result<PdeReport, DensityError> {
    check_inputs(spec, t, r, rtilde)?;
    if h / 2.0 < MIN_STEP {
        return Err(DensityError::Step(h / 2.0));
    }
    if t - h <= 0.0 {
        return Err(DensityError::Time(t - h));
    }
    Ok(PdeReport { coarse: residual_at(spec, t, r, rtilde, h, rule), fine: residual_at(spec, t, r, rtilde, h / 2.0, rule) })
}

/// Quadrature settings for integrals over the chamber.
#[derive(Debug, Clone)]
pub struct ChamberQuadrature {
    pub rule: GaussLegendre,
    pub panels: usize,
    /// Half-width of the integration box in units of `σ√t`.
    pub width: f64,
}

impl Default for ChamberQuadrature {
    fn default() -> Self {
        Self { rule: GaussLegendre::new(20), panels: 24, width: 12.0 }
    }
}

impl ChamberQuadrature {
    /// Coarser panels in higher dimension; the cost grows like `panels^n`.
    pub fn for_dim(n: usize) -> Self {
        let panels = match n {
            0..=2 => 24,
            3 => 8,
            _ => 4,
        };
        Self { panels, ..Self::default() }
    }

    /// `∫ f(u) du` over `{u_1 ≥ … ≥ u_n, lo ≤ u_n ≤ hi_last, u_1 ≤ top}`.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, n: usize, lo: f64, hi_last: f64, top: f64, mut f: F) -> f64 {
        let mut u = vec![0.0; n];
        self.level(n - 1, lo, hi_last, top, &mut u, &mut f)
    }

    fn level<F: FnMut(&[f64]) -> f64>(&self, j: usize, lo: f64, hi: f64, top: f64, u: &mut [f64], f: &mut F) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        // Panel count shrinks with the interval so inner levels stay cheap.
        let frac = ((hi - lo) / (top - lo).max(hi - lo)).clamp(0.0, 1.0);
        let panels = ((self.panels as f64 * frac).ceil() as usize).max(1);
        let nodes = self.rule.mapped(lo, hi, panels);
        let mut total = 0.0;
        for (x, w) in nodes {
            u[j] = x;
            total += w * if j == 0 { f(u) } else { self.level(j - 1, x, top, top, u, f) };
        }
        total
    }

    fn bounds(&self, spec: &DensitySpec, t: f64, r: &[f64]) -> (f64, f64) {
        let s = spec.sigma * t.sqrt();
        let centre = spec.b * t;
        (r[spec.n - 1] + centre - self.width * s, r[0] + centre + self.width * s)
    }
}

/// `∫ p(t, r, ·)` over the chamber.
pub fn total_mass(spec: &DensitySpec, t: f64, r: &[f64], quad: &ChamberQuadrature) -> Result<f64, DensityError> {
    let rule = spec.kappa.ok_or(DensityError::MixedKappa)?;
    check_inputs(spec, t, r, r)?;
    let (lo, hi) = quad.bounds(spec, t, r);
    Ok(quad.integrate(spec.n, lo, hi, hi, |u| density_unchecked(spec, t, r, u, rule)))
}

/// Probability that the lowest level `R_n(t)` falls in each bin.
pub fn bin_probabilities(spec: &DensitySpec, t: f64, r: &[f64], edges: &[f64], quad: &ChamberQuadrature) -> Result<Vec<f64>, DensityError> {
    let rule = spec.kappa.ok_or(DensityError::MixedKappa)?;
    check_inputs(spec, t, r, r)?;
    let (_, hi) = quad.bounds(spec, t, r);
    let top = hi.max(*edges.last().unwrap_or(&hi));
    Ok(edges.windows(2).map(|e| quad.integrate(spec.n, e[0], e[1], top, |u| density_unchecked(spec, t, r, u, rule))).collect())
}

/// `∫ p(s, r, u) p(t, u, r̃) du` over the chamber.
pub fn chapman_kolmogorov(spec: &DensitySpec, s: f64, t: f64, r: &[f64], rtilde: &[f64], quad: &ChamberQuadrature) -> Result<f64, DensityError> {
    let rule = spec.kappa.ok_or(DensityError::MixedKappa)?;
    check_inputs(spec, s, r, rtilde)?;
    let (lo, hi) = quad.bounds(spec, s + t, r);
    let (lo2, hi2) = quad.bounds(spec, s + t, rtilde);
    let (lo, hi) = (lo.min(lo2), hi.max(hi2));
    Ok(quad.integrate(spec.n, lo, hi, hi, |u| density_unchecked(spec, s, r, u, rule) * density_unchecked(spec, t, u, rtilde, rule)))
}

/// Where the Monte Carlo sample of `R(t)` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McSource {
    /// Ranked diffusion with the given step.
    Diffusion { dt: f64 },
    /// Totally asymmetric jump system at scale `n_scale`.
    Jump { n_scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    pub edges: Vec<f64>,
    pub expected: Vec<f64>,
    pub observed: Vec<f64>,
    /// Binomial standard error of each observed frequency.
    pub std_err: Vec<f64>,
    /// Extra per-bin allowance: one count, plus `max_k p_k / √N` for
    /// lattice-valued jump sources.
    pub allowance: f64,
    pub chi_square: f64,
    /// Largest `|observed - expected| / std_err`.
    pub max_z: f64,
    /// Largest `|observed - expected|` in excess of `3·std_err + allowance`
    /// (zero when every bin is inside its band).
    pub excess: f64,
    pub paths: usize,
    /// Starting point actually used (snapped to the lattice for jumps).
    pub r0: Vec<f64>,
}

impl CrosscheckReport {
    pub fn within_bands(&self) -> bool {
        self.excess == 0.0
    }
}

/// Histogram of `R_n(t)` from simulation against the density integrated over
/// the same bins. `bins` equal-width bins cover `r_n ± 4σ√t` shifted by the
/// drift; bins are snapped to mid-lattice points for jump sources.
pub fn mc_crosscheck(
    spec: &DensitySpec,
    params: &ParticleParams,
    t: f64,
    r: &[f64],
    bins: usize,
    paths: usize,
    seed: u64,
    source: McSource,
) -> Result<CrosscheckReport, DensityError> {
    spec.kappa.ok_or(DensityError::MixedKappa)?;
    check_inputs(spec, t, r, r)?;
    let n = spec.n;
    let s = spec.sigma * t.sqrt();
    let centre = r[n - 1] + spec.b * t;
    let (lo, hi) = (centre - 4.0 * s, centre + 4.0 * s);
    let mut edges: Vec<f64> = (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();

    let (samples, r0, allowance) = match source {
        McSource::Diffusion { dt } => {
            let out = replicas::map(paths, seed, |_, sd| simulate_ranked(params, r, t, dt, sd).map(|sim| sim.r.last_row()[n - 1]));
            (out.into_iter().collect::<Result<Vec<_>, _>>()?, r.to_vec(), 0.0)
        }
        McSource::Jump { n_scale } => {
            let jp = tasep_jump_params(spec, n_scale)?;
            let sq = n_scale.sqrt();
            let g0: Vec<i64> = r.iter().map(|x| (x * sq).round() as i64).collect();
            let r0: Vec<f64> = g0.iter().map(|&g| g as f64 / sq).collect();
            let shift = (jp.a - jp.b) * t * sq;
            // Rescaled values live on k/√N - shift; put edges half-way between.
            for e in edges.iter_mut() {
                *e = (((*e + shift) * sq - 0.5).round() + 0.5) / sq - shift;
            }
            let run = JumpRun { horizon: n_scale * t, sample_dt: n_scale * t, record_events: false };
            let out = replicas::map(paths, seed, |_, sd| -> Result<f64, DensityError> {
                let tr = simulate_jumps(&jp, &g0, run, sd)?;
                let res = rescale(&tr, t)?;
                Ok(res.gamma.last_row()[n - 1])
            });
            (out.into_iter().collect::<Result<Vec<_>, _>>()?, r0, 1.0 / sq)
        }
    };
    let quad = ChamberQuadrature::for_dim(n);
    let expected = bin_probabilities(spec, t, &r0, &edges, &quad)?;
    let counts = histogram(&samples, &edges);
    let m = samples.len() as f64;
    let observed: Vec<f64> = counts.iter().map(|&c| c as f64 / m).collect();
    // Frequencies move in steps of 1/m, so a band narrower than one count
    // would fail on any single hit in a far-tail bin.
    let allowance = allowance * expected.iter().copied().fold(0.0, f64::max) + 1.0 / m;
    let std_err: Vec<f64> = expected.iter().map(|&p| (p * (1.0 - p) / m).sqrt()).collect();
    let mut chi_square = 0.0;
    let mut max_z: f64 = 0.0;
    let mut excess: f64 = 0.0;
    for i in 0..expected.len() {
        let dev = (observed[i] - expected[i]).abs();
        if expected[i] > 0.0 {
            chi_square += m * (observed[i] - expected[i]).powi(2) / expected[i];
        }
        if std_err[i] > 0.0 {
            max_z = max_z.max(dev / std_err[i]);
        }
        excess = excess.max(dev - 3.0 * std_err[i] - allowance);
    }
    Ok(CrosscheckReport { edges, expected, observed, std_err, allowance, chi_square, max_z, excess, paths, r0 })
}

/// Exponential-clock jump system whose limit is the all-asymmetric system in
/// `spec`: rightward jumps only when every `q^- = 0`, leftward only when every
/// `q^- = 1`.
pub fn tasep_jump_params(spec: &DensitySpec, n_scale: f64) -> Result<JumpParams, DensityError> {
    let n = spec.n;
    let lower = spec.interface.iter().all(|c| *c == InterfaceCase::MinusZero);
    let upper = spec.interface.iter().all(|c| *c == InterfaceCase::MinusOne);
    if !(lower || upper) || spec.b != 0.0 || spec.sigma != 1.0 {
        return Err(DensityError::Rejected(
            "jump sampling needs all interfaces pushing the same way, zero drift and unit dispersion".into(),
        ));
    }
    let (a, b) = if lower { (1.0, 0.0) } else { (0.0, 1.0) };
    Ok(JumpParams::exponential(n, a, b, vec![1.0; n], vec![1.0; n], n_scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sym(n: usize) -> DensitySpec {
        spec_from_cases(n, 0.0, 1.0, vec![InterfaceCase::Symmetric; n - 1])
    }

    #[test]
    fn kernel_examples() {
        let s = sym(2);
        assert!((eval_kernel(&s, 0, 0, 1.0, 0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        let tasep = spec_from_cases(2, 0.0, 1.0, vec![InterfaceCase::MinusOne]);
        // One antiderivative above the diagonal, from -∞.
        assert_eq!(tasep.uz_table[0][1], (0, 1));
        assert!((eval_kernel(&tasep, 0, 1, 1.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        // One derivative: -x φ(x).
        assert_eq!(tasep.uz_table[1][0], (1, 0));
        let v = eval_kernel(&tasep, 1, 0, 1.0, 1.0).unwrap();
        assert!((v + 0.241_970_724_519_143_37).abs() < 1e-15);
        assert!(eval_kernel(&s, 0, 0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tail_integrals_closed_forms() {
        for x in [-3.0, -0.5, 0.0, 0.7, 2.5] {
            let phi = std_normal_pdf(x);
            let sf = std_normal_sf(x);
            assert!((normal_tail_integral(2, x) - (phi - x * sf)).abs() < 1e-15);
            // J^3 = ((1 + x²) Φ̄ - x φ) / 2.
            assert!((normal_tail_integral(3, x) - ((1.0 + x * x) * sf - x * phi) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn heap_permutations() {
        let mut seen = Vec::new();
        let mut signsum = 0.0;
        for_each_permutation(4, |p, s| {
            seen.push(p.to_vec());
            signsum += s;
        });
        assert_eq!(seen.len(), 24);
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 24);
        assert_eq!(signsum, 0.0);
    }

    #[test]
    fn symmetric_origin_value() {
        let v = eval_density(&sym(2), 1.0, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((v - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn classification() {
        let p = ParticleParams::symmetric(vec![0.0; 3], vec![1.0; 3]).unwrap();
        let s = classify(&p).unwrap();
        assert_eq!(s.kappa, Some(KappaRule::One));
        assert!(s.uz_table.iter().flatten().all(|&e| e == (0, 0)));
        let t = ParticleParams::from_interfaces(vec![0.0; 3], vec![1.0; 3], &[0.0, 0.0]).unwrap();
        let ts = classify(&t).unwrap();
        assert_eq!(ts.interface, vec![InterfaceCase::MinusZero; 2]);
        assert_eq!(ts.kappa, Some(KappaRule::Sign));
        assert_eq!(ts.uz_table[0][2], (2, 0));
        assert_eq!(ts.uz_table[2][0], (0, 2));
        let u = ParticleParams::symmetric(vec![0.0; 3], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(classify(&u), Err(DensityError::Rejected(m)) if m.contains("sigma[2]")));
        let mixed = ParticleParams::from_interfaces(vec![0.0; 3], vec![1.0; 3], &[0.5, 1.0]).unwrap();
        let ms = classify(&mixed).unwrap();
        assert_eq!(ms.kappa, None);
        assert!(matches!(eval_density(&ms, 1.0, &[0.0; 3], &[0.0; 3]), Err(DensityError::MixedKappa)));
    }

    #[test]
    fn chamber_and_size_checks() {
        assert!(matches!(eval_density(&sym(2), 1.0, &[0.0, 1.0], &[0.0, 0.0]), Err(DensityError::Chamber(1))));
        assert!(matches!(eval_density(&sym(9), 1.0, &[0.0; 9], &[0.0; 9]), Err(DensityError::TooLarge(9))));
    }
}
