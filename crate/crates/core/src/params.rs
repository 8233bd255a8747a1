//! Parameters of the ranked system and the closed-form regime checks.
//!
//! Ranks are 1-based in reports and error messages (rank 1 is the top
//! particle); vectors are stored 0-based, so `b[k - 1]` is the drift of rank
//! `k`. Interface `k` sits between ranks `k` and `k + 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Absolute tolerance on `q_minus[k] + q_plus[k+1] = 1`.
pub const ELASTIC_TOL: f64 = 1e-12;
/// Tolerance on the skew-symmetry formula.
pub const SKEW_TOL: f64 = 1e-10;
/// Off-diagonal entries of `A^{-1}(I - Q)` above this count as nonnegative.
pub const LEMMA3_TOL: f64 = -1e-10;
/// Relative slack on the condition (A) inequalities, so that parameters on
/// the equality boundary are not rejected for rounding.
pub const CONDITION_A_TOL: f64 = 1e-12;
/// Placeholder stored in the carried-but-unused slots `q_plus[1]`, `q_minus[n]`.
pub const UNUSED_Q: f64 = 0.5;

const RHO_REL_TOL: f64 = 1e-10;
const RHO_MAX_ITER: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("invalid parameters: {0}")]
    Invalid(ValidationReport),
    #[error("check needs n {expected} but the system has n = {n}")]
    Dimension { expected: &'static str, n: usize },
    #[error("c-weights unavailable: interface {k} has q_minus = {q_minus}, q_plus = {q_plus}")]
    DegenerateCollision { k: usize, q_minus: f64, q_plus: f64 },
    #[error("singular matrix in {0}")]
    Singular(&'static str),
}

/// Drift, dispersion and collision parameters of the ranked system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleParams {
    pub b: Vec<f64>,
    pub sigma: Vec<f64>,
    pub q_minus: Vec<f64>,
    pub q_plus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    TooFewParticles,
    LengthMismatch,
    NonFinite,
    NonPositiveSigma,
    QOutOfRange,
    Elastic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// 1-based rank or interface index; 0 when the violation is global.
    pub index: usize,
    pub residual: f64,
    pub message: String,
}

/// Outcome of [`validate`]; empty means the parameters are usable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        let msgs: Vec<&str> = self.violations.iter().map(|v| v.message.as_str()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

impl ParticleParams {
    /// Validates, then snaps `q_plus[k+1]` to `1 - q_minus[k]` so that the
    /// elastic identity holds exactly downstream.
    pub fn new(b: Vec<f64>, sigma: Vec<f64>, q_minus: Vec<f64>, q_plus: Vec<f64>) -> Result<Self, ParamsError> {
        let mut p = Self { b, sigma, q_minus, q_plus };
        let report = validate(&p);
        if !report.is_ok() {
            return Err(ParamsError::Invalid(report));
        }
        for k in 0..p.n() - 1 {
            p.q_plus[k + 1] = 1.0 - p.q_minus[k];
        }
        Ok(p)
    }

    /// Builds parameters from the `n - 1` interface values `q_minus[1..n-1]`;
    /// `q_plus` follows from the elastic constraint.
    pub fn from_interfaces(b: Vec<f64>, sigma: Vec<f64>, interface_q_minus: &[f64]) -> Result<Self, ParamsError> {
        let n = b.len();
        if interface_q_minus.len() + 1 != n {
            let mut report = ValidationReport::default();
            report.violations.push(Violation {
                kind: ViolationKind::LengthMismatch,
                index: 0,
                residual: 0.0,
                message: format!("expected {} interface values, got {}", n.saturating_sub(1), interface_q_minus.len()),
            });
            return Err(ParamsError::Invalid(report));
        }
        let mut q_minus = interface_q_minus.to_vec();
        q_minus.push(UNUSED_Q);
        let mut q_plus = vec![UNUSED_Q];
        q_plus.extend(interface_q_minus.iter().map(|q| 1.0 - q));
        Self::new(b, sigma, q_minus, q_plus)
    }

    /// Equal split of every collision (`q = 1/2` everywhere).
    pub fn symmetric(b: Vec<f64>, sigma: Vec<f64>) -> Result<Self, ParamsError> {
        let n = b.len();
        Self::from_interfaces(b, sigma, &vec![0.5; n.saturating_sub(1)])
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// True when every interface weight used by the diffusion construction
    /// lies strictly inside `(0, 1)`.
    pub fn interior_q_positive(&self) -> bool {
        (0..self.n() - 1).all(|k| self.q_minus[k] > 0.0 && self.q_plus[k + 1] > 0.0)
    }
}

/// Reports every violated invariant of `params` with its index and residual.
pub fn validate(params: &ParticleParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = params.b.len();
    let mut push = |kind, index, residual, message: String| {
        report.violations.push(Violation { kind, index, residual, message });
    };
    if n < 2 {
        push(ViolationKind::TooFewParticles, 0, n as f64, format!("n = {n} < 2"));
    }
    for (name, len) in [("sigma", params.sigma.len()), ("q_minus", params.q_minus.len()), ("q_plus", params.q_plus.len())] {
        if len != n {
            push(ViolationKind::LengthMismatch, 0, len as f64 - n as f64, format!("{name} has length {len}, expected {n}"));
        }
    }
    if !report.violations.is_empty() {
        return report;
    }
    let mut push = |kind, index, residual, message: String| {
        report.violations.push(Violation { kind, index, residual, message });
    };
    for k in 0..n {
        for (name, v) in [("b", params.b[k]), ("sigma", params.sigma[k]), ("q_minus", params.q_minus[k]), ("q_plus", params.q_plus[k])] {
            if !v.is_finite() {
                push(ViolationKind::NonFinite, k + 1, v, format!("{name}[{}] is not finite", k + 1));
            }
        }
        if params.sigma[k] <= 0.0 {
            push(ViolationKind::NonPositiveSigma, k + 1, params.sigma[k], format!("sigma[{}] ≤ 0", k + 1));
        }
        for (name, q) in [("q_minus", params.q_minus[k]), ("q_plus", params.q_plus[k])] {
            if !(0.0..=1.0).contains(&q) {
                let residual = if q < 0.0 { q } else { q - 1.0 };
                push(ViolationKind::QOutOfRange, k + 1, residual, format!("{name}[{}] = {q} outside [0,1]", k + 1));
            }
        }
    }
    for k in 0..n - 1 {
        let residual = params.q_minus[k] + params.q_plus[k + 1] - 1.0;
        if residual.abs() > ELASTIC_TOL || !residual.is_finite() {
            push(
                ViolationKind::Elastic,
                k + 1,
                residual,
                format!("q_minus[{}] + q_plus[{}] - 1 = {residual:e}", k + 1, k + 2),
            );
        }
    }
    report
}

/// Matrices derived from [`ParticleParams`] for the spacings problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionSpec {
    /// Off-diagonal reflection part, `(n-1)×(n-1)`.
    pub q: DMatrix<f64>,
    /// Reflection matrix `I - Q`.
    pub r: DMatrix<f64>,
    /// Covariance of the spacings noise.
    pub a: DMatrix<f64>,
    /// Diagonal of `a`.
    pub d: Vec<f64>,
    /// Null-weights of the local times (`c[0] = 1`), absent when an interface
    /// has a zero collision share.
    pub c: Option<Vec<f64>>,
    /// Spectral radius of `q`.
    pub rho: f64,
    degenerate_interface: Option<(usize, f64, f64)>,
}

impl ReflectionSpec {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// The c-weights, or the interface that prevents them from existing.
    pub fn c(&self) -> Result<&[f64], ParamsError> {
        match (&self.c, self.degenerate_interface) {
            (Some(c), _) => Ok(c),
            (None, Some((k, q_minus, q_plus))) => Err(ParamsError::DegenerateCollision { k, q_minus, q_plus }),
            (None, None) => unreachable!("c is only absent for a degenerate interface"),
        }
    }
}

/// Builds `Q`, `R = I - Q`, `A`, `D`, the c-weights and `rho(Q)`.
pub fn build_reflection_spec(params: &ParticleParams) -> Result<ReflectionSpec, ParamsError> {
    let report = validate(params);
    if !report.is_ok() {
        return Err(ParamsError::Invalid(report));
    }
    let n = params.n();
    let d = n - 1;
    let mut q = DMatrix::zeros(d, d);
    // Row i corresponds to interface i+1; rank k interacts with k-1 through
    // q_plus[k] and with k+1 through q_minus[k].
    for i in 0..d {
        if i >= 1 {
            q[(i, i - 1)] = params.q_plus[i];
        }
        if i + 1 < d {
            q[(i, i + 1)] = params.q_minus[i + 1];
        }
    }
    let r = DMatrix::identity(d, d) - &q;
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        a[(i, i)] = params.sigma[i].powi(2) + params.sigma[i + 1].powi(2);
        if i + 1 < d {
            let s = params.sigma[i + 1].powi(2);
            a[(i, i + 1)] = -s;
            a[(i + 1, i)] = -s;
        }
    }
    let diag = (0..d).map(|i| a[(i, i)]).collect();

    let mut degenerate = None;
    for k in 0..d {
        if params.q_minus[k] <= 0.0 || params.q_plus[k + 1] <= 0.0 {
            degenerate = Some((k + 1, params.q_minus[k], params.q_plus[k + 1]));
            break;
        }
    }
    let c = if degenerate.is_none() {
        let mut c = vec![1.0; n];
        for k in 0..d {
            c[k + 1] = c[k] * params.q_minus[k] / params.q_plus[k + 1];
        }
        Some(c)
    } else {
        None
    };

    Ok(ReflectionSpec { rho: spectral_radius_tridiagonal(&q), q, r, a, d: diag, c, degenerate_interface: degenerate })
}

/// Spectral radius of an entrywise nonnegative tridiagonal matrix.
///
/// A tridiagonal matrix is similar to the symmetric one whose off-diagonal
/// entries are `sqrt(m[i][i+1] * m[i+1][i])`, so the power iteration runs on
/// that symmetric form shifted by the identity (the shift makes the Perron
/// root strictly dominant even for bipartite patterns). Iteration stops when
/// the Collatz–Wielandt bracket is relatively narrower than `1e-10`.
pub fn spectral_radius_tridiagonal(m: &DMatrix<f64>) -> f64 {
    let d = m.nrows();
    if d == 0 {
        return 0.0;
    }
    let diag: Vec<f64> = (0..d).map(|i| m[(i, i)]).collect();
    let off: Vec<f64> = (0..d.saturating_sub(1)).map(|i| (m[(i, i + 1)] * m[(i + 1, i)]).max(0.0).sqrt()).collect();
    let apply = |v: &[f64], out: &mut [f64]| {
        for i in 0..d {
            let mut s = (1.0 + diag[i]) * v[i];
            if i > 0 {
                s += off[i - 1] * v[i - 1];
            }
            if i + 1 < d {
                s += off[i] * v[i + 1];
            }
            out[i] = s;
        }
    };
    let mut v = vec![1.0; d];
    let mut w = vec![0.0; d];
    let mut upper = f64::INFINITY;
    for _ in 0..RHO_MAX_ITER {
        apply(&v, &mut w);
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..d {
            let ratio = w[i] / v[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        upper = hi;
        if hi - lo <= RHO_REL_TOL * hi {
            return (0.5 * (hi + lo) - 1.0).max(0.0);
        }
        let norm = w.iter().cloned().fold(0.0, f64::max);
        for i in 0..d {
            v[i] = w[i] / norm;
        }
    }
    // The upper Collatz–Wielandt bound is the conservative answer.
    (upper - 1.0).max(0.0)
}

/// Per-index residuals of a two-sided inequality check; nonnegative is good.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub holds: bool,
    /// `(k, first residual, second residual)` with `k` a 1-based rank.
    pub residuals: Vec<(usize, f64, f64)>,
}

/// Condition (A): `(1 - q_k^-) σ_k² ≥ q_k^- σ_{k+1}²` and
/// `(1 - q_k^+) σ_k² ≥ q_k^+ σ_{k-1}²` for `k = 2..n-1`.
pub fn check_condition_a(params: &ParticleParams) -> Result<ConditionReport, ParamsError> {
    let n = params.n();
    if n < 3 {
        return Err(ParamsError::Dimension { expected: "≥ 3", n });
    }
    let s2 = |k: usize| params.sigma[k].powi(2);
    let mut residuals = Vec::with_capacity(n - 2);
    let mut slack = Vec::with_capacity(n - 2);
    for k in 1..n - 1 {
        let qm = params.q_minus[k];
        let qp = params.q_plus[k];
        let r1 = (1.0 - qm) * s2(k) - qm * s2(k + 1);
        let r2 = (1.0 - qp) * s2(k) - qp * s2(k - 1);
        residuals.push((k + 1, r1, r2));
        slack.push(CONDITION_A_TOL * (s2(k - 1) + s2(k) + s2(k + 1)));
    }
    let holds = residuals.iter().zip(&slack).all(|(&(_, a, b), &e)| a >= -e && b >= -e);
    Ok(ConditionReport { holds, residuals })
}

/// The skew-symmetric value of `q_k^± = (1 + (σ_{k-1}² + σ_{k+1}²)/(2σ_k²))^{-1}`
/// for an interior 1-based rank `k`.
pub fn skew_symmetric_q(sigma_sq: &[f64], k: usize) -> f64 {
    let i = k - 1;
    1.0 / (1.0 + (sigma_sq[i - 1] + sigma_sq[i + 1]) / (2.0 * sigma_sq[i]))
}

/// Condition (B): both `q_k^-` and `q_k^+` equal the skew-symmetric value for
/// `k = 2..n-1`. Residuals are `q - formula`.
pub fn check_condition_b(params: &ParticleParams) -> Result<ConditionReport, ParamsError> {
    let n = params.n();
    if n < 3 {
        return Err(ParamsError::Dimension { expected: "≥ 3", n });
    }
    let s2: Vec<f64> = params.sigma.iter().map(|s| s * s).collect();
    let mut residuals = Vec::with_capacity(n - 2);
    for k in 2..n {
        let target = skew_symmetric_q(&s2, k);
        residuals.push((k, params.q_minus[k - 1] - target, params.q_plus[k - 1] - target));
    }
    let holds = residuals.iter().all(|&(_, a, b)| a.abs() <= SKEW_TOL && b.abs() <= SKEW_TOL);
    Ok(ConditionReport { holds, residuals })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerReport {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Three-particle criterion for the absence of triple collisions:
/// `2σ₂² ≥ q₂^-(σ₂² + σ₃²) + q₂^+(σ₁² + σ₂²)`.
pub fn check_corner_n3(params: &ParticleParams) -> Result<CornerReport, ParamsError> {
    let n = params.n();
    if n != 3 {
        return Err(ParamsError::Dimension { expected: "= 3", n });
    }
    let s: Vec<f64> = params.sigma.iter().map(|s| s * s).collect();
    let lhs = 2.0 * s[1];
    let rhs = params.q_minus[1] * (s[1] + s[2]) + params.q_plus[1] * (s[0] + s[1]);
    Ok(CornerReport { holds: lhs >= rhs, lhs, rhs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma3Report {
    pub holds: bool,
    /// 1-based `(row, column, value)` of every negative off-diagonal entry.
    pub offending: Vec<(usize, usize, f64)>,
    pub matrix: DMatrix<f64>,
}

/// Sign test on the off-diagonal entries of `A^{-1}(I - Q)`; equivalent to
/// condition (A).
pub fn check_lemma3_signs(params: &ParticleParams) -> Result<Lemma3Report, ParamsError> {
    let n = params.n();
    if n < 3 {
        return Err(ParamsError::Dimension { expected: "≥ 3", n });
    }
    let spec = build_reflection_spec(params)?;
    let m = spec.a.clone().lu().solve(&spec.r).ok_or(ParamsError::Singular("A"))?;
    let mut offending = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j && m[(i, j)] < LEMMA3_TOL {
                offending.push((i + 1, j + 1, m[(i, j)]));
            }
        }
    }
    Ok(Lemma3Report { holds: offending.is_empty(), offending, matrix: m })
}

/// Solves `m x = rhs` by LU.
pub(crate) fn solve(m: &DMatrix<f64>, rhs: &[f64], what: &'static str) -> Result<Vec<f64>, ParamsError> {
    let b = DVector::from_column_slice(rhs);
    m.clone().lu().solve(&b).map(|x| x.iter().copied().collect()).ok_or(ParamsError::Singular(what))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3(sigma: [f64; 3], q2_minus: f64, q2_plus: f64) -> ParticleParams {
        ParticleParams {
            b: vec![0.0; 3],
            sigma: sigma.to_vec(),
            q_minus: vec![1.0 - q2_plus, q2_minus, UNUSED_Q],
            q_plus: vec![UNUSED_Q, q2_plus, 1.0 - q2_minus],
        }
    }

    #[test]
    fn validate_symmetric_pair() {
        let p = ParticleParams { b: vec![0.0; 2], sigma: vec![1.0; 2], q_minus: vec![0.5, 0.3], q_plus: vec![0.9, 0.5] };
        assert!(validate(&p).is_ok());
    }

    #[test]
    fn validate_reports_elastic_residual() {
        let p = ParticleParams { b: vec![0.0; 2], sigma: vec![1.0; 2], q_minus: vec![0.3, 0.5], q_plus: vec![0.5, 0.6] };
        let r = validate(&p);
        assert_eq!(r.violations.len(), 1);
        let v = &r.violations[0];
        assert_eq!(v.kind, ViolationKind::Elastic);
        assert_eq!(v.index, 1);
        assert!((v.residual + 0.1).abs() < 1e-15);
    }

    #[test]
    fn validate_reports_negative_sigma() {
        let mut p = ParticleParams::symmetric(vec![0.0; 3], vec![1.0; 3]).unwrap();
        p.sigma[1] = -1.0;
        let r = validate(&p);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, ViolationKind::NonPositiveSigma);
        assert_eq!(r.violations[0].index, 2);
        assert!(r.violations[0].message.contains("sigma[2] ≤ 0"));
    }

    #[test]
    fn new_projects_within_tolerance() {
        let p = ParticleParams::new(vec![0.0; 2], vec![1.0; 2], vec![0.3, 0.5], vec![0.5, 0.7 + 5e-13]).unwrap();
        assert_eq!(p.q_plus[1], 1.0 - 0.3);
        assert!(ParticleParams::new(vec![0.0; 2], vec![1.0; 2], vec![0.3, 0.5], vec![0.5, 0.7 + 1e-9]).is_err());
    }

    #[test]
    fn reflection_spec_symmetric_three() {
        let p = ParticleParams::symmetric(vec![0.0; 3], vec![1.0; 3]).unwrap();
        let s = build_reflection_spec(&p).unwrap();
        assert_eq!(s.q, DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]));
        assert!((s.rho - 0.5).abs() < 1e-10);
        assert_eq!(s.r, DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]));
        assert_eq!(s.c.as_deref(), Some(&[1.0, 1.0, 1.0][..]));
    }

    #[test]
    fn c_weights_by_hand_recursion() {
        let p = ParticleParams::from_interfaces(vec![0.0; 3], vec![1.0; 3], &[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let s = build_reflection_spec(&p).unwrap();
        let c = s.c().unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15);
        assert!((c[1] - 0.5).abs() < 1e-15);
        assert!((c[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn covariance_one_by_one() {
        let p = ParticleParams::symmetric(vec![0.0; 2], vec![1.0; 2]).unwrap();
        let s = build_reflection_spec(&p).unwrap();
        assert_eq!(s.a, DMatrix::from_element(1, 1, 2.0));
        assert_eq!(s.d, vec![2.0]);
        assert_eq!(s.rho, 0.0);
    }

    #[test]
    fn degenerate_collision_flags_c() {
        let p = ParticleParams::from_interfaces(vec![0.0; 3], vec![1.0; 3], &[0.0, 0.0]).unwrap();
        let s = build_reflection_spec(&p).unwrap();
        assert!(s.c.is_none());
        assert!(matches!(s.c(), Err(ParamsError::DegenerateCollision { k: 1, .. })));
        // The totally asymmetric pattern is nilpotent.
        assert_eq!(s.rho, 0.0);
    }

    #[test]
    fn spectral_radius_matches_closed_form() {
        // Symmetric q = 1/2 chain: eigenvalues cos(j π / d) for the path graph with weight 1/2.
        for n in [3usize, 5, 12, 40] {
            let p = ParticleParams::symmetric(vec![0.0; n], vec![1.0; n]).unwrap();
            let s = build_reflection_spec(&p).unwrap();
            let d = n - 1;
            let exact = (std::f64::consts::PI / (d as f64 + 1.0)).cos();
            assert!((s.rho - exact).abs() < 1e-8, "n={n}: {} vs {exact}", s.rho);
        }
    }

    #[test]
    fn condition_a_examples() {
        let sym = p3([1.0; 3], 0.5, 0.5);
        let r = check_condition_a(&sym).unwrap();
        assert!(r.holds);
        assert_eq!(r.residuals, vec![(2, 0.0, 0.0)]);
        let r = check_condition_a(&p3([1.0; 3], 0.9, 0.5)).unwrap();
        assert!(!r.holds);
        assert!((r.residuals[0].1 - (0.1 - 0.9)).abs() < 1e-15);
        assert!(matches!(
            check_condition_a(&ParticleParams::symmetric(vec![0.0; 2], vec![1.0; 2]).unwrap()),
            Err(ParamsError::Dimension { .. })
        ));
    }

    #[test]
    fn condition_b_examples() {
        assert!(check_condition_b(&p3([1.0; 3], 0.5, 0.5)).unwrap().holds);
        assert!(!check_condition_b(&p3([1.0; 3], 0.4, 0.5)).unwrap().holds);
        let s2 = [0.1, 0.11, 0.121];
        let q = skew_symmetric_q(&s2, 2);
        let sigma = s2.map(f64::sqrt);
        assert!(check_condition_b(&p3(sigma, q, q)).unwrap().holds);
    }

    #[test]
    fn corner_examples() {
        let r = check_corner_n3(&p3([1.0; 3], 0.5, 0.5)).unwrap();
        assert!(r.holds && r.lhs == 2.0 && r.rhs == 2.0);
        let r = check_corner_n3(&p3([1.0; 3], 0.9, 0.9)).unwrap();
        assert!(!r.holds && (r.rhs - 3.6).abs() < 1e-15);
        // q2^- = 1 forces q3^+ = 0 and q2^+ = 0 forces q1^- = 1
        let r = check_corner_n3(&p3([2.0, 1.0, 1.0], 1.0, 0.0)).unwrap();
        assert!(r.holds && r.lhs == 2.0 && r.rhs == 2.0);
    }

    #[test]
    fn lemma3_examples() {
        assert!(check_lemma3_signs(&p3([1.0; 3], 0.5, 0.5)).unwrap().holds);
        let r = check_lemma3_signs(&p3([1.0; 3], 0.9, 0.5)).unwrap();
        assert!(!r.holds);
        assert!(!r.offending.is_empty());
    }

    #[test]
    fn skew_seed_condition_a_agrees_with_lemma3() {
        let s2 = [0.1, 0.11, 0.121];
        let q = skew_symmetric_q(&s2, 2);
        let p = p3(s2.map(f64::sqrt), q, q);
        assert_eq!(check_condition_a(&p).unwrap().holds, check_lemma3_signs(&p).unwrap().holds);
    }
}
