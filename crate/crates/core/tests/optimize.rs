mod common;

use ou_design::imspe::imspe_closed;
use ou_design::optimize::{
    imspe_surface, linspace, mspe_profile, optimize_design, Criterion, OptimizerConfig,
};
use ou_design::{Design, OuParams};
use proptest::prelude::*;

#[test]
fn three_point_optimum_is_the_midpoint() {
    let p = OuParams::new(1.0, 4.0).unwrap();
    let opt = optimize_design(3, &p, &OptimizerConfig::default()).unwrap();
    assert!((opt.design.points()[1] - 0.5).abs() < 1e-6);
}

#[test]
fn same_seed_same_result() {
    let p = OuParams::new(2.4522, -4.1274).unwrap();
    let config = OptimizerConfig { seed: 42, ..OptimizerConfig::default() };
    let a = optimize_design(5, &p, &config).unwrap();
    let b = optimize_design(5, &p, &config).unwrap();
    assert_eq!(a, b);
}

#[test]
fn optimum_is_never_worse_than_equispaced() {
    for (l, w) in [(2.4522, -4.1274), (4.9968, -0.3561), (0.3, 7.0), (8.0, 1.0)] {
        let p = OuParams::new(l, w).unwrap();
        for n in 3..=6 {
            let opt = optimize_design(n, &p, &OptimizerConfig::default()).unwrap();
            let equi = imspe_closed(&Design::equispaced(n).unwrap(), &p).value;
            assert!(opt.value <= equi + 1e-9);
        }
    }
}

#[test]
fn entropy_criterion_reports_logdet() {
    let p = OuParams::new(1.0, 1.0).unwrap();
    let config = OptimizerConfig { criterion: Criterion::Entropy, n_starts: 4, ..OptimizerConfig::default() };
    let opt = optimize_design(4, &p, &config).unwrap();
    assert!(opt.value < 0.0);
}

#[test]
fn profile_vanishes_at_design_points() {
    let p = OuParams::new(2.0, -3.0).unwrap();
    let d = Design::new(vec![0.0, 0.37, 1.0]).unwrap();
    let prof = mspe_profile(&d, &p, 21).unwrap();
    for t in d.points() {
        let pt = prof.iter().find(|q| q.x == *t).unwrap();
        assert!(pt.mspe.abs() < 1e-10);
    }
    assert!(prof.iter().all(|q| q.mspe >= 0.0));
}

#[test]
fn surface_is_symmetric_in_omega() {
    let lambdas = linspace(0.5, 6.0, 5);
    let omegas = linspace(-6.0, 6.0, 7);
    let s = imspe_surface(4, &lambdas, &omegas).unwrap();
    for (k, pt) in s.iter().enumerate() {
        let row = k / omegas.len();
        let col = k % omegas.len();
        let mirror = s[row * omegas.len() + omegas.len() - 1 - col];
        assert_eq!(pt.imspe, mirror.imspe);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn optimized_designs_are_feasible(
        lambda in 0.2f64..8.0,
        omega in -8.0f64..8.0,
        n in 2usize..=6,
        seed in any::<u64>(),
    ) {
        let p = OuParams::new(lambda, omega).unwrap();
        let config = OptimizerConfig { seed, n_starts: 4, ..OptimizerConfig::default() };
        let opt = optimize_design(n, &p, &config).unwrap();
        let t = opt.design.points();
        prop_assert_eq!(t.len(), n);
        prop_assert_eq!(t[0], 0.0);
        prop_assert!((t[n - 1] - 1.0).abs() < 1e-12);
        prop_assert!(t.windows(2).all(|w| w[1] > w[0]));
    }
}
