use crate::config::{CheckName, RunConfig};
use crate::error::CliError;
use crate::output::Artifacts;
use crate::row;
use asymcoll::jumpsim::check_assumption;
use asymcoll::params::{check_condition_a, check_condition_b, check_corner_n3, check_lemma3_signs, validate};

struct Outcome {
    name: CheckName,
    holds: bool,
    detail: String,
}

pub fn run(cfg: &mut RunConfig, require_condition_a: bool, art: &mut Artifacts) -> Result<(), CliError> {
    let mut required = cfg.check.as_ref().map(|c| c.require.clone()).unwrap_or_default();
    if require_condition_a && !required.contains(&CheckName::ConditionA) {
        required.push(CheckName::ConditionA);
    }
    if cfg.particles.is_none() && cfg.jumps.is_none() {
        return Err(CliError::Config("check needs a [particles] or [jumps] table".into()));
    }
    let mut out = Vec::new();
    if let Some(pc) = &cfg.particles {
        let p = pc.build()?;
        let rep = validate(&p);
        out.push(Outcome { name: CheckName::Validate, holds: rep.is_ok(), detail: rep.violations.iter().map(|v| v.message.clone()).collect::<Vec<_>>().join("; ") });
        if rep.is_ok() && p.n() >= 3 {
            let fmt = |res: &[(usize, f64, f64)], bad: &dyn Fn(f64, f64) -> bool| {
                res.iter().filter(|r| bad(r.1, r.2)).map(|r| format!("rank {}: ({:e}, {:e})", r.0, r.1, r.2)).collect::<Vec<_>>().join("; ")
            };
            let a = check_condition_a(&p).map_err(CliError::runtime)?;
            out.push(Outcome { name: CheckName::ConditionA, holds: a.holds, detail: fmt(&a.residuals, &|x, y| x < 0.0 || y < 0.0) });
            let b = check_condition_b(&p).map_err(CliError::runtime)?;
            out.push(Outcome {
                name: CheckName::ConditionB,
                holds: b.holds,
                detail: fmt(&b.residuals, &|x, y| x.abs() > asymcoll::params::SKEW_TOL || y.abs() > asymcoll::params::SKEW_TOL),
            });
            let l = check_lemma3_signs(&p).map_err(CliError::runtime)?;
            out.push(Outcome {
                name: CheckName::Lemma3,
                holds: l.holds,
                detail: l.offending.iter().map(|(i, j, v)| format!("entry ({i}, {j}) = {v:e}")).collect::<Vec<_>>().join("; "),
            });
            if p.n() == 3 {
                let c = check_corner_n3(&p).map_err(CliError::runtime)?;
                out.push(Outcome { name: CheckName::Corner, holds: c.holds, detail: format!("lhs {} rhs {}", c.lhs, c.rhs) });
            }
        }
    }
    if cfg.jumps.is_some() {
        let rep = check_assumption(&cfg.jump_params()?);
        out.push(Outcome { name: CheckName::Assumption, holds: rep.holds(), detail: rep.failures.join("; ") });
    }

    let mut table = art.csv("check.csv", &["check", "holds", "required", "detail"]);
    let mut failures = Vec::new();
    for o in &out {
        let name = serde_name(o.name);
        let req = required.contains(&o.name);
        // The CSV keeps the full detail; the console gets the start of it.
        let mut detail: String = o.detail.chars().take(100).collect();
        if detail.len() < o.detail.len() {
            detail.push_str(" ...");
        }
        println!("{name:<13} {}{}", if o.holds { "pass" } else { "FAIL" }, if detail.is_empty() { String::new() } else { format!("  {detail}") });
        table.row(row![name.as_str(), o.holds, req, o.detail.as_str()]);
        if !o.holds && (req || o.name == CheckName::Validate) {
            failures.push(format!("{name}: {}", o.detail));
        }
    }
    for r in &required {
        if !out.iter().any(|o| o.name == *r) {
            failures.push(format!("{} is not applicable to this config", serde_name(*r)));
        }
    }
    art.push(table)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Rejected(failures.join(" | ")))
    }
}

fn serde_name(c: CheckName) -> String {
    toml::Value::try_from(c).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}
