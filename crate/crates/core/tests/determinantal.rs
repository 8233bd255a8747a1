mod support;

use asymcoll::determinantal::*;
use asymcoll::params::ParticleParams;
use support::oracles::two_term_reflection;
use InterfaceCase::*;

fn spec(cases: &[InterfaceCase]) -> DensitySpec {
    spec_from_cases(cases.len() + 1, 0.0, 1.0, cases.to_vec())
}

#[test]
fn symmetric_pair_is_the_reflection_formula() {
    let s = spec(&[Symmetric]);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let r = [0.5, 0.5 - 0.2 * i as f64];
            let rt = [1.0 - 0.1 * j as f64, -0.3 - 0.05 * (i + j) as f64];
            let v = eval_density(&s, 0.7, &r, &rt).unwrap();
            worst = worst.max((v - two_term_reflection(0.7, r, rt)).abs());
        }
    }
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn asymmetric_sum_is_a_determinant() {
    let s = spec(&[MinusZero, MinusZero, MinusZero]);
    let r = [0.9, 0.4, 0.4, -0.2];
    let rt = [1.3, 0.2, 0.1, -1.0];
    let det = kernel_matrix(&s, 1.1, &r, &rt).determinant();
    let v = eval_density(&s, 1.1, &r, &rt).unwrap();
    assert!((v - det).abs() < 1e-14, "{v} vs {det}");
}

#[test]
fn kernel_chain_is_consistent() {
    // d/dx of the order -p kernel is the order -p+1 kernel on both sides.
    let h = 1e-5;
    for p in 1..5 {
        for above in [true, false] {
            for x in [-2.0, -0.3, 0.0, 0.8, 2.5] {
                let d = (kernel(-p, above, 0.2, 1.3, 0.9, x + h) - kernel(-p, above, 0.2, 1.3, 0.9, x - h)) / (2.0 * h);
                let k = kernel(-p + 1, above, 0.2, 1.3, 0.9, x);
                assert!((d - k).abs() < 1e-8, "p {p} above {above} x {x}: {d} vs {k}");
            }
        }
    }
    // Antiderivatives vanish at the requested end.
    assert!(kernel(-3, true, 0.0, 1.0, 1.0, -12.0).abs() < 1e-20);
    assert!(kernel(-3, false, 0.0, 1.0, 1.0, 12.0).abs() < 1e-20);
}

#[test]
fn pde_residuals_are_second_order() {
    for cases in [vec![Symmetric], vec![MinusZero], vec![MinusOne], vec![MinusZero, MinusZero], vec![Symmetric, Symmetric], vec![MinusOne, MinusOne]] {
        let n = cases.len() + 1;
        let s = spec_from_cases(n, 0.4, 0.8, cases.clone());
        let rt: Vec<f64> = (0..n).map(|k| 0.6 - 0.5 * k as f64).collect();
        // Interior point, then every pair tied in turn.
        let mut points = vec![(0..n).map(|k| 0.3 - 0.4 * k as f64).collect::<Vec<_>>()];
        for k in 0..n - 1 {
            let mut r: Vec<f64> = (0..n).map(|j| 0.3 - 0.4 * j as f64).collect();
            r[k + 1] = r[k];
            for j in k + 2..n {
                r[j] = r[k] - 0.4 * (j - k - 1) as f64;
            }
            points.push(r);
        }
        for r in points {
            let rep = verify_pde(&s, 0.9, &r, &rt, 1e-2).unwrap();
            assert!(rep.second_order(), "{cases:?} at {r:?}: {rep:?}");
            assert!(rep.fine.heat.abs() < 1e-4);
            assert!(rep.fine.boundary.iter().flatten().all(|b| b.abs() < 1e-5), "{rep:?}");
        }
    }
}

#[test]
fn mixed_interfaces_break_the_boundary_condition() {
    let s = spec(&[Symmetric, MinusZero]);
    assert!(s.kappa.is_none());
    let rt = [0.5, 0.1, -0.4];
    let worst = |rule, r: [f64; 3]| {
        let rep = verify_pde_with_kappa(&s, 1.0, &r, &rt, 1e-2, rule).unwrap();
        rep.fine.boundary.iter().flatten().fold(0.0f64, |m, b| m.max(b.abs()))
    };
    // Each choice of weights fails at the interface of the other kind.
    assert!(worst(KappaRule::One, [0.2, 0.0, 0.0]) > 1e-3);
    assert!(worst(KappaRule::Sign, [0.2, 0.2, 0.0]) > 1e-3);
    // and holds at its own.
    assert!(worst(KappaRule::One, [0.2, 0.2, 0.0]) < 1e-6);
    assert!(worst(KappaRule::Sign, [0.2, 0.0, 0.0]) < 1e-6);
}

#[test]
fn two_particle_densities_integrate_to_one() {
    let quad = ChamberQuadrature::for_dim(2);
    for cases in [[Symmetric], [MinusZero], [MinusOne]] {
        let s = spec_from_cases(2, -0.3, 1.4, cases.to_vec());
        for r in [[0.0, 0.0], [1.0, -0.5]] {
            let m = total_mass(&s, 0.8, &r, &quad).unwrap();
            assert!((m - 1.0).abs() <= 1e-6, "{cases:?} {r:?}: {m}");
        }
    }
}

#[test]
fn three_particle_tasep_density_integrates_to_one() {
    let s = spec(&[MinusZero, MinusZero]);
    let m = total_mass(&s, 1.0, &[0.5, 0.0, -0.5], &ChamberQuadrature::for_dim(3)).unwrap();
    assert!((m - 1.0).abs() <= 1e-6, "{m}");
}

#[test]
fn semigroup_property() {
    let quad = ChamberQuadrature::for_dim(2);
    for cases in [[Symmetric], [MinusZero]] {
        let s = spec(&cases);
        let (r, rt) = ([0.4, -0.1], [0.8, -0.6]);
        let lhs = chapman_kolmogorov(&s, 0.4, 0.6, &r, &rt, &quad).unwrap();
        let rhs = eval_density(&s, 1.0, &r, &rt).unwrap();
        assert!((lhs - rhs).abs() < 1e-5, "{cases:?}: {lhs} vs {rhs}");
    }
}

#[test]
fn symmetric_density_matches_diffusion_histogram() {
    let p = ParticleParams::symmetric(vec![0.0; 2], vec![1.0; 2]).unwrap();
    let s = classify(&p).unwrap();
    let rep = mc_crosscheck(&s, &p, 1.0, &[0.5, 0.0], 20, 20_000, 31, McSource::Diffusion { dt: 0.05 }).unwrap();
    assert!(rep.within_bands(), "{rep:?}");
    assert!((rep.expected.iter().sum::<f64>() - 1.0).abs() < 0.01);
}

#[test]
fn tasep_density_matches_jump_histogram() {
    let p = ParticleParams::from_interfaces(vec![0.0; 2], vec![1.0; 2], &[0.0]).unwrap();
    let s = classify(&p).unwrap();
    let rep = mc_crosscheck(&s, &p, 1.0, &[0.0, 0.0], 20, 5_000, 32, McSource::Jump { n_scale: 1e3 }).unwrap();
    assert!(rep.within_bands(), "{rep:?}");
}

#[test]
fn unequal_dispersion_is_rejected_with_reason() {
    let p = ParticleParams::symmetric(vec![0.0; 2], vec![1.0, 2.0]).unwrap();
    match classify(&p) {
        Err(DensityError::Rejected(m)) => assert!(m.contains("sigma")),
        other => panic!("{other:?}"),
    }
}
