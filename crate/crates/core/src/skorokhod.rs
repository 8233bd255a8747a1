//! Orthant Skorokhod problems on a time grid.
//!
//! Paths are treated as piecewise constant between grid points, so the
//! reflection problem on a grid is a sequence of one-step complementarity
//! problems; [`hr_map`] solves all of them at once by Picard iteration of the
//! Harrison–Reiman fixed point.

use crate::path::SamplePath;
use nalgebra::DMatrix;
use thiserror::Error;

/// Picard iteration stops once the estimated distance to the fixed point is
/// below this.
pub const HR_TOL: f64 = 1e-10;
/// Sweep cap for the Picard iteration.
pub const HR_MAX_SWEEPS: usize = 100_000;
/// A coordinate at or below this level counts as "on the face".
pub const EPS_ACT: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkorokhodError {
    #[error("reflection matrix is {rows}×{cols} but the path has {dim} coordinates")]
    Dimension { rows: usize, cols: usize, dim: usize },
    #[error("I - R has a negative entry {value} at ({row}, {col}); not a Harrison–Reiman matrix")]
    NotHarrisonReiman { row: usize, col: usize, value: f64 },
    #[error("path starts outside the orthant: coordinate {coord} is {value}")]
    NegativeStart { coord: usize, value: f64 },
    #[error("fixed point not reached after {sweeps} sweeps (last change {change:e})")]
    NonConvergence { sweeps: usize, change: f64 },
    #[error("empty path")]
    Empty,
    #[error("interval [{t1}, {t2}] is not inside the grid [{lo}, {hi}]")]
    Range { t1: f64, t2: f64, lo: f64, hi: f64 },
    #[error("paths are not on a common grid ({0})")]
    GridMismatch(&'static str),
}

/// Reflected path, pushing processes and the final fixed-point change.
#[derive(Debug, Clone, PartialEq)]
pub struct SkorokhodSolution {
    pub z: SamplePath,
    pub y: SamplePath,
    pub residual: f64,
    pub sweeps: usize,
}

impl SkorokhodSolution {
    /// `max |z - x - R y|` over the grid.
    pub fn identity_defect(&self, x: &SamplePath, r: &DMatrix<f64>) -> f64 {
        let d = x.dim();
        let mut worst: f64 = 0.0;
        for i in 0..x.len() {
            let (xi, yi, zi) = (x.row(i), self.y.row(i), self.z.row(i));
            for k in 0..d {
                let mut v = xi[k];
                for j in 0..d {
                    v += r[(k, j)] * yi[j];
                }
                worst = worst.max((zi[k] - v).abs());
            }
        }
        worst
    }

    /// `Σ_i 1{z_k(t_i) > eps and z_k(t_{i+1}) > eps} Δy_k(t_i)` summed over faces.
    pub fn complementarity_defect(&self, eps: f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.z.len().saturating_sub(1) {
            for k in 0..self.z.dim() {
                if self.z.get(i, k) > eps && self.z.get(i + 1, k) > eps {
                    total += self.y.get(i + 1, k) - self.y.get(i, k);
                }
            }
        }
        total
    }
}

/// Harrison–Reiman reflection of `x` in the orthant with reflection matrix
/// `r = I - Q`, `Q ≥ 0` entrywise with spectral radius below one.
///
/// Iterates `y ← running sup of (-x + Q y)⁺` from `y = 0`. The iteration is a
/// contraction; its rate `κ` is estimated from successive changes and the
/// loop stops when `change · κ / (1 - κ)`, a bound on the remaining error,
/// drops below [`HR_TOL`].
pub fn hr_map(x: &SamplePath, r: &DMatrix<f64>) -> Result<SkorokhodSolution, SkorokhodError> {
    let d = x.dim();
    if r.nrows() != d || r.ncols() != d {
        return Err(SkorokhodError::Dimension { rows: r.nrows(), cols: r.ncols(), dim: d });
    }
    let m = x.len();
    if m == 0 {
        return Err(SkorokhodError::Empty);
    }
    // Sparse rows of Q = I - R.
    let mut q_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
    for i in 0..d {
        for j in 0..d {
            let q = if i == j { 1.0 - r[(i, j)] } else { -r[(i, j)] };
            if q < -1e-15 {
                return Err(SkorokhodError::NotHarrisonReiman { row: i + 1, col: j + 1, value: q });
            }
            if q > 0.0 {
                q_rows[i].push((j, q));
            }
        }
    }
    if let Some(k) = (0..d).find(|&k| x.get(0, k) < 0.0) {
        return Err(SkorokhodError::NegativeStart { coord: k + 1, value: x.get(0, k) });
    }

    let xc: Vec<Vec<f64>> = (0..d).map(|k| x.column(k)).collect();
    let mut y = vec![vec![0.0; m]; d];
    let mut next = vec![vec![0.0; m]; d];
    let mut sweeps = 0;
    let mut change = f64::INFINITY;
    let mut bound = f64::INFINITY;
    while sweeps < HR_MAX_SWEEPS {
        let prev = change;
        sweeps += 1;
        change = 0.0;
        for k in 0..d {
            let mut run = 0.0f64;
            let row = &q_rows[k];
            let out = &mut next[k];
            for i in 0..m {
                let mut w = -xc[k][i];
                for &(j, q) in row {
                    w += q * y[j][i];
                }
                if w > run {
                    run = w;
                }
                out[i] = run;
                change = change.max((run - y[k][i]).abs());
            }
        }
        std::mem::swap(&mut y, &mut next);
        if change == 0.0 {
            bound = 0.0;
            break;
        }
        if prev.is_finite() && change < prev {
            let kappa = change / prev;
            bound = change * kappa / (1.0 - kappa);
            // The rate estimate wobbles from sweep to sweep; aim well below.
            if bound < 1e-2 * HR_TOL {
                break;
            }
        }
    }
    if bound >= HR_TOL {
        return Err(SkorokhodError::NonConvergence { sweeps, change });
    }

    let mut zv = Vec::with_capacity(m * d);
    let mut yv = Vec::with_capacity(m * d);
    for i in 0..m {
        for k in 0..d {
            let mut z = xc[k][i] + y[k][i];
            for &(j, q) in &q_rows[k] {
                z -= q * y[j][i];
            }
            zv.push(z);
        }
        for col in y.iter() {
            yv.push(col[i]);
        }
    }
    let t = x.times().to_vec();
    Ok(SkorokhodSolution {
        z: SamplePath::new(t.clone(), zv, d).expect("grid inherited from x"),
        y: SamplePath::new(t, yv, d).expect("grid inherited from x"),
        residual: bound,
        sweeps,
    })
}

/// Largest coordinate increment between two grid points of `[t1, t2]`.
pub fn oscillation(x: &SamplePath, t1: f64, t2: f64) -> Result<f64, SkorokhodError> {
    if x.is_empty() {
        return Err(SkorokhodError::Empty);
    }
    let t = x.times();
    let (lo, hi) = (t[0], t[t.len() - 1]);
    if !(t1 >= lo && t2 <= hi && t1 < t2) {
        return Err(SkorokhodError::Range { t1, t2, lo, hi });
    }
    let start = t.partition_point(|&s| s < t1);
    let end = t.partition_point(|&s| s <= t2);
    let mut osc: f64 = 0.0;
    for k in 0..x.dim() {
        let mut mn = f64::INFINITY;
        let mut mx = f64::NEG_INFINITY;
        for i in start..end {
            let v = x.get(i, k);
            mn = mn.min(v);
            mx = mx.max(v);
        }
        if end > start {
            osc = osc.max(mx - mn);
        }
    }
    Ok(osc)
}

/// Defects of the modified Skorokhod representation
/// `Q = Q(0) + X̄ + ℜ𝔜 + ℜ̃𝔜̃`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RepresentationReport {
    /// Sup-norm residual of the identity.
    pub identity: f64,
    /// Largest decrease of any 𝔜 coordinate between consecutive grid points.
    pub y_monotonicity: f64,
    /// Largest decrease of any 𝔜̃ coordinate.
    pub ytilde_monotonicity: f64,
    /// Largest `|𝔜(0)|`, `|𝔜̃(0)|`.
    pub start: f64,
    /// Largest excess of a 𝔜̃_k increment over `min(Δ𝔜_k, Δ𝔜_{k+1})`.
    pub domination: f64,
}

impl RepresentationReport {
    pub fn max(&self) -> f64 {
        self.identity.max(self.y_monotonicity).max(self.ytilde_monotonicity).max(self.start).max(self.domination)
    }
}

pub fn check_modified_representation(
    q: &SamplePath,
    xbar: &SamplePath,
    y: &SamplePath,
    ytilde: &SamplePath,
    rfrak: &DMatrix<f64>,
    rtildefrak: &DMatrix<f64>,
) -> Result<RepresentationReport, SkorokhodError> {
    for (p, what) in [(xbar, "xbar"), (y, "y"), (ytilde, "ytilde")] {
        if p.times() != q.times() {
            return Err(SkorokhodError::GridMismatch(what));
        }
    }
    let d = q.dim();
    if xbar.dim() != d || y.dim() != d || rfrak.nrows() != d || rfrak.ncols() != d {
        return Err(SkorokhodError::Dimension { rows: rfrak.nrows(), cols: rfrak.ncols(), dim: d });
    }
    let e = ytilde.dim();
    if rtildefrak.nrows() != d || rtildefrak.ncols() != e {
        return Err(SkorokhodError::Dimension { rows: rtildefrak.nrows(), cols: rtildefrak.ncols(), dim: e });
    }
    let mut rep = RepresentationReport::default();
    if q.is_empty() {
        return Ok(rep);
    }
    let q0 = q.row(0).to_vec();
    for i in 0..q.len() {
        let (qi, xi, yi, ti) = (q.row(i), xbar.row(i), y.row(i), ytilde.row(i));
        for k in 0..d {
            let mut rhs = q0[k] + xi[k];
            for j in 0..d {
                rhs += rfrak[(k, j)] * yi[j];
            }
            for j in 0..e {
                rhs += rtildefrak[(k, j)] * ti[j];
            }
            rep.identity = rep.identity.max((qi[k] - rhs).abs());
        }
        if i == 0 {
            rep.start = yi.iter().chain(ti).fold(0.0, |m, v| m.max(v.abs()));
            continue;
        }
        let (yp, tp) = (y.row(i - 1), ytilde.row(i - 1));
        for k in 0..d {
            rep.y_monotonicity = rep.y_monotonicity.max(yp[k] - yi[k]);
        }
        for k in 0..e {
            let dt = ti[k] - tp[k];
            rep.ytilde_monotonicity = rep.ytilde_monotonicity.max(-dt);
            let bound = (yi[k] - yp[k]).min(yi[k + 1] - yp[k + 1]);
            rep.domination = rep.domination.max(dt - bound);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::uniform_grid;

    fn line(slope: f64, steps: usize) -> SamplePath {
        let t = uniform_grid(1.0 / steps as f64, steps);
        let v = t.iter().map(|s| slope * s).collect();
        SamplePath::new(t, v, 1).unwrap()
    }

    #[test]
    fn pure_push() {
        let x = line(-1.0, 100);
        let s = hr_map(&x, &DMatrix::identity(1, 1)).unwrap();
        for i in 0..x.len() {
            assert!((s.y.get(i, 0) - x.times()[i]).abs() < 1e-15);
            assert!(s.z.get(i, 0).abs() < 1e-15);
        }
    }

    #[test]
    fn interior_path_untouched() {
        let x = line(1.0, 100);
        let s = hr_map(&x, &DMatrix::identity(1, 1)).unwrap();
        assert!(s.y.values().iter().all(|&v| v == 0.0));
        assert_eq!(s.z, x);
    }

    #[test]
    fn rejects_negative_start_and_bad_matrix() {
        let x = SamplePath::new(vec![0.0, 1.0], vec![-0.1, 0.0], 1).unwrap();
        assert!(matches!(hr_map(&x, &DMatrix::identity(1, 1)), Err(SkorokhodError::NegativeStart { .. })));
        let x = SamplePath::new(vec![0.0], vec![0.0, 0.0], 2).unwrap();
        let r = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(hr_map(&x, &r), Err(SkorokhodError::NotHarrisonReiman { .. })));
    }

    #[test]
    fn non_convergence_is_reported() {
        // rho(Q) = 1: the push on one face feeds the other without bound.
        let x = SamplePath::new(vec![0.0, 1.0], vec![0.0, 0.0, -1.0, -1.0], 2).unwrap();
        let r = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!(matches!(hr_map(&x, &r), Err(SkorokhodError::NonConvergence { .. })));
    }

    #[test]
    fn oscillation_examples() {
        let c = SamplePath::new(uniform_grid(0.1, 10), vec![3.0; 11], 1).unwrap();
        assert_eq!(oscillation(&c, 0.0, 1.0).unwrap(), 0.0);
        let x = line(1.0, 10);
        assert!((oscillation(&x, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((oscillation(&x, 0.25, 0.75).unwrap() - 0.4).abs() < 1e-12);
        assert!(matches!(oscillation(&x, 0.5, 1.5), Err(SkorokhodError::Range { .. })));
    }

    #[test]
    fn representation_zero_case_and_fault_injection() {
        let t = uniform_grid(0.1, 10);
        let zeros = |d: usize| SamplePath::new(t.clone(), vec![0.0; t.len() * d], d).unwrap();
        let rf = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]);
        let rt = DMatrix::zeros(2, 1);
        let rep = check_modified_representation(&zeros(2), &zeros(2), &zeros(2), &zeros(1), &rf, &rt).unwrap();
        assert_eq!(rep.max(), 0.0);

        let mut y = zeros(2);
        for i in 0..y.len() {
            y.row_mut(i)[0] = i as f64;
        }
        y.row_mut(6)[0] = 5.0 - 0.37;
        let mut q = zeros(2);
        for i in 0..q.len() {
            let yi = y.row(i)[0];
            q.row_mut(i).copy_from_slice(&[yi, -0.5 * yi]);
        }
        let rep = check_modified_representation(&q, &zeros(2), &y, &zeros(1), &rf, &rt).unwrap();
        assert!(rep.identity < 1e-15);
        assert!((rep.y_monotonicity - 0.37).abs() < 1e-12);
    }

    #[test]
    fn representation_grid_mismatch() {
        let a = SamplePath::new(vec![0.0, 1.0], vec![0.0; 2], 1).unwrap();
        let b = SamplePath::new(vec![0.0, 2.0], vec![0.0; 2], 1).unwrap();
        let e = SamplePath::new(vec![0.0, 1.0], vec![], 0).unwrap();
        let r = check_modified_representation(&a, &b, &a, &e, &DMatrix::identity(1, 1), &DMatrix::zeros(1, 0));
        assert!(matches!(r, Err(SkorokhodError::GridMismatch("xbar"))));
    }
}
