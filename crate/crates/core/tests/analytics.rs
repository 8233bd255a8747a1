use asymcoll::analytics::*;
use asymcoll::params::{check_condition_b, ParticleParams};
use asymcoll::stats::mean;
use proptest::prelude::*;

fn atlas_100() -> ParticleParams {
    q_atlas(100, 1.0, 0.1, 0.11, 0.121).unwrap()
}

#[test]
fn hundred_particle_chain_is_positive_and_skew() {
    let p = atlas_100();
    assert!(check_condition_b(&p).unwrap().holds);
    let s2: Vec<f64> = p.sigma.iter().map(|s| s * s).collect();
    assert!(s2.iter().all(|&v| v > 0.0));
    let spec = invariant_gamma(&p).unwrap();
    let q = spec.q.unwrap();
    assert!((q - 0.498_87).abs() < 1e-5, "q = {q}");
    assert!(spec.is_normalizable());
    let gmin = spec.gamma.iter().copied().fold(f64::INFINITY, f64::min);
    assert!((gmin - 19.05).abs() < 0.01, "min gamma {gmin}");
}

#[test]
fn hundred_particle_capital_curve_shape() {
    let spec = invariant_gamma(&atlas_100()).unwrap();
    let r = levels_from_spacings(&spec.mean_spacings().unwrap());
    let w = capital_curve(&r);
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(w.windows(2).all(|p| p[1] < p[0]));
    let kinks = log_log_slope_changes(&w);
    // Nearly straight at the very top, concave from rank 2 on.
    assert!(kinks[0].abs() < 0.01, "{}", kinks[0]);
    assert!(kinks[1..].iter().all(|&c| c <= 1e-12), "{:?}", &kinks[..6]);
}

#[test]
fn linear_variances_give_unit_slopes() {
    let s = skew_variance_chain(40, 1.0, 2.0, 3.0).unwrap();
    for (k, v) in s.iter().enumerate() {
        assert!((v - (k + 1) as f64).abs() < 1e-9);
    }
    assert!(variance_log_slopes(&s).iter().all(|&x| (x - 1.0).abs() < 1e-9));
}

#[test]
fn atlas_three_gamma() {
    for g in [0.5, 1.0, 3.0] {
        let spec = invariant_gamma(&q_atlas(3, g, 1.0, 1.0, 1.0).unwrap()).unwrap();
        assert!((spec.gamma[0] - 2.0 * g).abs() < 1e-12);
        assert!((spec.gamma[1] - 4.0 * g).abs() < 1e-12);
    }
}

#[test]
fn stationary_sampler_means() {
    let spec = invariant_gamma(&q_atlas(4, 1.0, 1.0, 1.2, 1.3).unwrap()).unwrap();
    let draws = sample_stationary(&spec, 100_000, 8).unwrap();
    for k in 0..3 {
        let col: Vec<f64> = draws.iter().map(|d| d[k]).collect();
        assert!((mean(&col) * spec.gamma[k] - 1.0).abs() < 0.02);
    }
}

#[test]
fn fit_from_weights_recovers_drifts() {
    let p = q_atlas(6, 1.0, 1.0, 1.1, 1.15).unwrap();
    let spec = invariant_gamma(&p).unwrap();
    let w = capital_curve(&levels_from_spacings(&spec.mean_spacings().unwrap()));
    let diffs = fit_gamma_from_weights(&w, &p).unwrap();
    let b = drifts_from_differences(&diffs, p.b[0]);
    for (x, y) in b.iter().zip(&p.b) {
        assert!((x - y).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gamma_round_trip(n in 3usize..10, s2 in 1.0..1.2f64, s3 in 1.0..1.4f64,
                        gamma in prop::collection::vec(0.1..10.0f64, 9)) {
        let Ok(template) = q_atlas(n, 1.0, 1.0, s2, s3) else { return Ok(()) };
        let gamma = &gamma[..n - 1];
        let diffs = fit_gamma(gamma, &template).unwrap();
        let mut p = template.clone();
        p.b = drifts_from_differences(&diffs, 0.0);
        let back = invariant_gamma(&p).unwrap();
        for (a, b) in back.gamma.iter().zip(gamma) {
            prop_assert!((a - b).abs() <= 1e-10 * b.max(1.0));
        }
    }
}
