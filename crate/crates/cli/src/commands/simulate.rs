use super::{replicas, seed};
use crate::config::{Engine, RunConfig};
use crate::error::CliError;
use crate::output::{Artifacts, Cell};
use crate::row;
use asymcoll::diffusion::{default_epsilon, simulate_names, simulate_ranked_with, BoundaryScheme};
use asymcoll::jumpsim::{simulate_jumps, Direction, JumpRun};
use asymcoll::replicas as reps;

fn header(prefixes: &[(&str, usize)]) -> Vec<String> {
    let mut h = vec!["replica".to_string(), "t".to_string()];
    for (p, n) in prefixes {
        h.extend((1..=*n).map(|k| format!("{p}{k}")));
    }
    h
}

pub fn run(cfg: &mut RunConfig, art: &mut Artifacts) -> Result<(), CliError> {
    let sc = cfg.section(&cfg.simulate, "simulate")?.clone();
    let m = replicas(cfg, 1);
    let seed = seed(cfg);
    match sc.engine {
        Engine::Diffusion => {
            let p = cfg.particles()?;
            let n = p.n();
            let dt = sc.dt.ok_or_else(|| CliError::Config("[simulate] needs dt".into()))?;
            let scheme = match sc.scheme.as_deref() {
                None | Some("bridge") => BoundaryScheme::Bridge,
                Some("grid") => BoundaryScheme::Grid,
                Some(o) => return Err(CliError::Config(format!("unknown scheme {o:?} (bridge or grid)"))),
            };
            let r0 = sc.r0.clone().unwrap_or(vec![0.0; n]);
            let sims = reps::map(m, seed, |_, s| simulate_ranked_with(&p, &r0, sc.horizon, dt, s, scheme))
                .into_iter()
                .collect::<Result<Vec<_>, _>>()
                .map_err(CliError::runtime)?;
            let h = header(&[("R", n), ("Z", n - 1), ("L", n - 1)]);
            let mut t = art.csv("paths.csv", &h.iter().map(String::as_str).collect::<Vec<_>>());
            let mut s = art.csv("summary.csv", &["replica", "seed", "hr_residual", "scheme"]);
            for (i, sim) in sims.iter().enumerate() {
                for j in 0..sim.r.len() {
                    let mut cells = row![i, sim.r.times()[j]];
                    cells.extend(sim.r.row(j).iter().chain(sim.z.row(j)).chain(sim.lambda.row(j)).map(|&v| Cell::F(v)));
                    t.row(cells);
                }
                s.row(row![i, sim.seed, sim.hr_residual, sim.scheme.name()]);
            }
            art.push(t)?;
            art.push(s)?;
        }
        Engine::Names => {
            let p = cfg.particles()?;
            let n = p.n();
            let dt = sc.dt.ok_or_else(|| CliError::Config("[simulate] needs dt".into()))?;
            let eps = sc.epsilon.unwrap_or_else(|| default_epsilon(dt));
            let x0 = sc.r0.clone().unwrap_or(vec![0.0; n]);
            let sims = reps::map(m, seed, |_, s| simulate_names(&p, &x0, sc.horizon, dt, s, eps))
                .into_iter()
                .collect::<Result<Vec<_>, _>>()
                .map_err(CliError::runtime)?;
            let h = header(&[("X", n), ("rank", n)]);
            let mut t = art.csv("names.csv", &h.iter().map(String::as_str).collect::<Vec<_>>());
            let mut s = art.csv("summary.csv", &["replica", "tie_occupation", "tie_band", "epsilon"]);
            for (i, sim) in sims.iter().enumerate() {
                for j in 0..sim.x.len() {
                    let mut cells = row![i, sim.x.times()[j]];
                    cells.extend(sim.x.row(j).iter().map(|&v| Cell::F(v)));
                    cells.extend(sim.rank[j * n..(j + 1) * n].iter().map(|&r| Cell::U(r as u64)));
                    t.row(cells);
                }
                s.row(row![i, sim.tie_occupation, sim.tie_band, sim.epsilon]);
            }
            art.push(t)?;
            art.push(s)?;
            if !p.q_minus[..n - 1].iter().all(|&q| q == 0.5) {
                eprintln!("note: the names scheme is approximate unless every q is 1/2");
            }
        }
        Engine::Jumps => {
            let jp = cfg.jump_params()?;
            let n = jp.n();
            let g0 = sc.gamma0.clone().unwrap_or(vec![0; n]);
            let run = JumpRun { horizon: sc.horizon, sample_dt: sc.sample_dt.unwrap_or(sc.horizon), record_events: sc.record_events };
            let traces = reps::map(m, seed, |_, s| simulate_jumps(&jp, &g0, run, s))
                .into_iter()
                .collect::<Result<Vec<_>, _>>()
                .map_err(CliError::runtime)?;
            let d = n.saturating_sub(1);
            let h = header(&[("Gamma", n), ("Q", d), ("I", d), ("I2_", n.saturating_sub(2)), ("TL", n), ("TR", n)]);
            let mut t = art.csv("trace.csv", &h.iter().map(String::as_str).collect::<Vec<_>>());
            let mut ev = art.csv("events.csv", &["replica", "time", "particle", "direction", "position"]);
            let mut s = art.csv("summary.csv", &["replica", "seed", "events", "simultaneous", "stall_time", "frozen"]);
            for (i, tr) in traces.iter().enumerate() {
                for j in 0..tr.gamma.len() {
                    let mut cells = row![i, tr.gamma.times()[j]];
                    for p in [&tr.gamma, &tr.gaps, &tr.occupation, &tr.double_occupation, &tr.clock_l, &tr.clock_r] {
                        cells.extend(p.row(j).iter().map(|&v| Cell::F(v)));
                    }
                    t.row(cells);
                }
                for e in &tr.events {
                    let dir = if e.direction == Direction::Left { "L" } else { "R" };
                    ev.row(row![i, e.time, e.particle, dir, e.position]);
                }
                let frozen = tr.frozen.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" ");
                let stall = tr.stall_time.map_or(String::new(), asymcoll::path::fmt_f64);
                if let Some(st) = tr.stall_time {
                    eprintln!("replica {i}: every clock stopped at t = {st}");
                }
                if !tr.frozen.is_empty() {
                    eprintln!("replica {i}: frozen particles at the horizon: {frozen}");
                }
                s.row(row![i, tr.seed, tr.event_count, tr.simultaneous, stall, frozen]);
            }
            art.push(t)?;
            if sc.record_events {
                art.push(ev)?;
            }
            art.push(s)?;
        }
    }
    Ok(())
}
