use super::{replicas, seed};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Artifacts, Cell};
use crate::row;
use asymcoll::diffusion::simulate_ranked;
use asymcoll::jumpsim::{limit_spec, rescale, simulate_jumps, JumpRun};
use asymcoll::replicas as reps;
use asymcoll::stats::{ks_two_sample, median};

/// Fewer jump replicas than this cannot resolve KS differences of a few percent.
pub const MIN_REPLICAS: usize = 1000;

pub fn run(cfg: &mut RunConfig, art: &mut Artifacts) -> Result<(), CliError> {
    let cc = cfg.section(&cfg.converge, "converge")?.clone();
    let base = cfg.jump_params()?;
    let m = replicas(cfg, 1000);
    let seed = seed(cfg);
    let n = base.n();
    let d = n.saturating_sub(1);
    if cc.r0.len() != n {
        return Err(CliError::Config(format!("[converge] r0 has {} entries, expected {n}", cc.r0.len())));
    }
    if m < MIN_REPLICAS {
        eprintln!("warning: {m} replicas are too few to resolve the KS distances (need {MIN_REPLICAS})");
    }

    // Reference spacings of the limit diffusion at time t.
    let reference: Vec<Vec<f64>> = if d == 0 {
        Vec::new()
    } else {
        let limit = limit_spec(&base).map_err(|e| CliError::Rejected(e.to_string()))?;
        reps::map(cc.diffusion_replicas, seed ^ 0xd1ff, |_, s| {
            simulate_ranked(&limit.params, &cc.r0, cc.t, cc.diffusion_dt, s).map(|sim| sim.z.last_row().to_vec())
        })
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(CliError::runtime)?
    };

    let mut header = vec!["n_scale".to_string(), "replicas".into(), "ks_max".into()];
    header.extend((1..=d).map(|k| format!("ks_{k}")));
    header.extend(["ytilde_median".into(), "ytilde_mean".into(), "insufficient_replicas".into()]);
    let mut table = art.csv("converge.csv", &header.iter().map(String::as_str).collect::<Vec<_>>());
    let mut ks_series = Vec::new();
    let mut med_series = Vec::new();
    for (level, &big_n) in cc.ladder.iter().enumerate() {
        let mut jp = base.clone();
        jp.n_scale = big_n;
        let sq = big_n.sqrt();
        let g0: Vec<i64> = cc.r0.iter().map(|x| (x * sq).round() as i64).collect();
        let run = JumpRun { horizon: big_n * cc.t, sample_dt: big_n * cc.t, record_events: false };
        let level_seed = reps::replica_seed(seed, 1_000_000 + level as u64);
        let finals: Vec<(Vec<f64>, f64)> = reps::map(m, level_seed, |_, s| -> Result<_, CliError> {
            let tr = simulate_jumps(&jp, &g0, run, s).map_err(CliError::runtime)?;
            let res = rescale(&tr, cc.t).map_err(CliError::runtime)?;
            Ok((res.q.last_row().to_vec(), res.ytilde.last_row().iter().sum()))
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
        let ks: Vec<f64> = (0..d)
            .map(|k| {
                let a: Vec<f64> = finals.iter().map(|f| f.0[k]).collect();
                let b: Vec<f64> = reference.iter().map(|r| r[k]).collect();
                ks_two_sample(&a, &b)
            })
            .collect();
        let ks_max = ks.iter().copied().fold(0.0, f64::max);
        let mut cells = row![big_n, m, ks_max];
        cells.extend(ks.iter().map(|&v| Cell::F(v)));
        // Two-face occupation needs at least three particles.
        if n >= 3 {
            let yt: Vec<f64> = finals.iter().map(|f| f.1).collect();
            let med = median(&yt);
            let mean = yt.iter().sum::<f64>() / yt.len() as f64;
            println!("N = {big_n:>10}  KS = {ks_max:.5}  median ytilde = {med:.5}");
            cells.extend(row![med, mean]);
            med_series.push(med);
        } else {
            println!("N = {big_n:>10}  KS = {ks_max:.5}");
            cells.extend(row!["", ""]);
        }
        cells.extend(row![m < MIN_REPLICAS]);
        table.row(cells);
        ks_series.push(ks_max);
    }
    art.push(table)?;
    let down = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    println!("KS decreasing: {}", down(&ks_series));
    if n >= 3 {
        println!("median ytilde decreasing: {}", down(&med_series));
    }
    Ok(())
}
