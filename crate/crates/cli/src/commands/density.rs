use super::{replicas, seed};
use crate::config::{McConfig, RunConfig};
use crate::error::CliError;
use crate::output::{Artifacts, Cell};
use crate::row;
use asymcoll::determinantal::{
    classify, eval_density, mc_crosscheck, total_mass, verify_pde, ChamberQuadrature, DensityError, McSource,
};

pub const NORMALIZATION_TOL: f64 = 1e-6;

fn reject(e: DensityError) -> CliError {
    match e {
        DensityError::Rejected(_) | DensityError::MixedKappa => CliError::Rejected(e.to_string()),
        other => CliError::runtime(other),
    }
}

pub fn run(cfg: &mut RunConfig, art: &mut Artifacts) -> Result<(), CliError> {
    let p = cfg.particles()?;
    let dc = cfg.section(&cfg.density, "density")?.clone();
    let spec = classify(&p).map_err(reject)?;
    if spec.kappa.is_none() {
        return Err(reject(DensityError::MixedKappa));
    }
    let n = spec.n;

    let mut points = dc.points.clone();
    if let Some(g) = &dc.grid {
        if n != 2 {
            return Err(CliError::Config("[density.grid] needs n = 2; use points otherwise".into()));
        }
        let step = if g.points > 1 { (g.hi - g.lo) / (g.points - 1) as f64 } else { 0.0 };
        for i in 0..g.points {
            for j in 0..g.points {
                let (x, y) = (g.lo + i as f64 * step, g.lo + j as f64 * step);
                if x >= y {
                    points.push(vec![x, y]);
                }
            }
        }
    }
    let mut h: Vec<String> = (1..=n).map(|k| format!("rt{k}")).collect();
    h.push("p".into());
    let mut grid = art.csv("density.csv", &h.iter().map(String::as_str).collect::<Vec<_>>());
    for pt in &points {
        let v = eval_density(&spec, dc.t, &dc.r, pt).map_err(reject)?;
        let mut cells: Vec<Cell> = pt.iter().map(|&x| Cell::F(x)).collect();
        cells.push(Cell::F(v));
        grid.row(cells);
    }
    art.push(grid)?;

    let mut ver = art.csv("verification.csv", &["check", "value", "tolerance", "pass"]);
    let mut failed = Vec::new();
    let mut note = |ver: &mut crate::output::Table, name: String, value: f64, tol: &str, pass: bool| {
        println!("{name:<28} {value:<24e} {}", if pass { "pass" } else { "FAIL" });
        ver.row(row![name.as_str(), value, tol, pass]);
        if !pass {
            failed.push(name);
        }
    };
    if let Some(h) = dc.pde_h {
        let rt = points.first().cloned().unwrap_or_else(|| dc.r.iter().map(|x| x + spec.b * dc.t).collect());
        // The given start, then each adjacent pair tied.
        let mut starts = vec![dc.r.clone()];
        for k in 0..n - 1 {
            let mut r = dc.r.clone();
            r[k + 1] = r[k];
            for j in k + 2..n {
                r[j] = r[j].min(r[j - 1]);
            }
            starts.push(r);
        }
        for (i, r) in starts.iter().enumerate() {
            let rep = verify_pde(&spec, dc.t, r, &rt, h).map_err(reject)?;
            let tag = if i == 0 { "start".to_string() } else { format!("tie{i}") };
            note(&mut ver, format!("pde_heat_{tag}"), rep.fine.heat, "O(h^2)", rep.second_order());
            for (k, b) in rep.fine.boundary.iter().enumerate() {
                if let Some(b) = b {
                    note(&mut ver, format!("pde_boundary{}_{tag}", k + 1), *b, "O(h^2)", rep.second_order());
                }
            }
        }
    }
    if dc.normalization {
        let mass = total_mass(&spec, dc.t, &dc.r, &ChamberQuadrature::for_dim(n)).map_err(reject)?;
        note(&mut ver, "normalization_defect".into(), (mass - 1.0).abs(), "1e-6", (mass - 1.0).abs() <= NORMALIZATION_TOL);
    }
    if let Some(mc) = &dc.mc {
        let m = replicas(cfg, 10_000);
        let (bins, source) = match *mc {
            McConfig::Diffusion { bins, dt } => (bins, McSource::Diffusion { dt }),
            McConfig::Jumps { bins, n_scale } => (bins, McSource::Jump { n_scale }),
        };
        let rep = mc_crosscheck(&spec, &p, dc.t, &dc.r, bins, m, seed(cfg), source).map_err(reject)?;
        let mut t = art.csv("mc.csv", &["lo", "hi", "expected", "observed", "std_err"]);
        for i in 0..rep.expected.len() {
            t.row(row![rep.edges[i], rep.edges[i + 1], rep.expected[i], rep.observed[i], rep.std_err[i]]);
        }
        art.push(t)?;
        note(&mut ver, "mc_max_z".into(), rep.max_z, "3 sigma + allowance", rep.within_bands());
        note(&mut ver, "mc_band_excess".into(), rep.excess, "0", rep.within_bands());
    }
    art.push(ver)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("verification failed: {}", failed.join(", "))))
    }
}
