mod common;

use common::{random_design, random_params, rng};
use ou_design::entropy::{entropy, logdet_c_closed, logdet_c_oracle, optimize_entropy_check, LOGDET_MATCH_TOL};
use ou_design::{Design, OuParams};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn closed_logdet_matches_cholesky_on_random_designs() {
    let mut g = rng(101);
    for _ in 0..200 {
        let n = g.random_range(2..=10);
        let d = random_design(&mut g, n);
        let p = random_params(&mut g, (0.2, 8.0), (-8.0, 8.0));
        let closed = logdet_c_closed(&d, &p).unwrap();
        let oracle = logdet_c_oracle(&d, &p).unwrap();
        assert!((closed - oracle).abs() < LOGDET_MATCH_TOL, "{closed} vs {oracle}");
    }
}

#[test]
fn equispaced_design_dominates() {
    let mut g = rng(7);
    for n in 3..=8 {
        let p = random_params(&mut g, (0.2, 8.0), (-8.0, 8.0));
        let best = logdet_c_closed(&Design::equispaced(n).unwrap(), &p).unwrap();
        for _ in 0..1000 {
            let d = random_design(&mut g, n);
            assert!(logdet_c_closed(&d, &p).unwrap() <= best + 1e-12);
        }
    }
}

#[test]
fn sigma_enters_only_the_constant() {
    let d = Design::new(vec![0.0, 0.2, 0.55, 1.0]).unwrap();
    let a = OuParams::with_sigma(2.0, 3.0, 1.0).unwrap();
    let b = OuParams::with_sigma(2.0, 3.0, 5.0).unwrap();
    let ea = entropy(&d, &a).unwrap();
    let eb = entropy(&d, &b).unwrap();
    assert_eq!(ea.logdet, eb.logdet);
    let shift = 4.0 * (25.0_f64).ln();
    assert!((eb.value - ea.value - shift).abs() < 1e-12);
}

#[test]
fn optimizer_recovers_equispaced_design() {
    for (n, p) in [
        (3, OuParams::new(1.0, 4.0).unwrap()),
        (5, OuParams::new(4.9968, -0.3561).unwrap()),
    ] {
        let d = optimize_entropy_check(n, &p).unwrap();
        let target = 1.0 / (n - 1) as f64;
        for gap in d.gaps() {
            assert!((gap - target).abs() < 1e-6, "gap {gap} for n = {n}");
        }
    }
}

#[test]
fn logdet_is_concave_in_the_gaps() {
    let p = OuParams::new(2.0, 1.0).unwrap();
    let mut g = rng(13);
    let h = 1e-4;
    for _ in 0..50 {
        let d = random_design(&mut g, 5);
        let gaps = d.gaps().to_vec();
        // move mass between two random gaps
        let i = g.random_range(0..4);
        let j = (i + 1 + g.random_range(0..3)) % 4;
        if gaps[i] < 2.0 * h || gaps[j] < 2.0 * h {
            continue;
        }
        let shifted = |s: f64| {
            let mut v = gaps.clone();
            v[i] += s;
            v[j] -= s;
            logdet_c_closed(&Design::from_gaps(&v).unwrap(), &p).unwrap()
        };
        let second = shifted(h) - 2.0 * shifted(0.0) + shifted(-h);
        assert!(second <= 1e-9, "second difference {second:e}");
    }
}

#[test]
fn single_gap_block_is_concave() {
    let f = |d: f64, l: f64| 2.0 * (-(-2.0 * l * d).exp_m1()).ln();
    let h = 1e-4;
    for l in [0.3, 1.0, 4.9968, 8.0] {
        for k in 1..100 {
            let d = k as f64 / 100.0;
            assert!(f(d + h, l) - 2.0 * f(d, l) + f(d - h, l) < 0.0, "d={d} lambda={l}");
        }
    }
}

#[test]
fn entropy_does_not_depend_on_omega() {
    let d = Design::new(vec![0.0, 0.1, 0.45, 0.8, 1.0]).unwrap();
    let base = entropy(&d, &OuParams::new(2.0, 0.0).unwrap()).unwrap();
    for k in 0..=32 {
        let w = -8.0 + 0.5 * k as f64;
        assert_eq!(entropy(&d, &OuParams::new(2.0, w).unwrap()).unwrap(), base);
    }
}

proptest! {
    #[test]
    fn gap_permutation_leaves_logdet_unchanged(
        lambda in 0.2f64..8.0,
        omega in -8.0f64..8.0,
        raw_gaps in prop::collection::vec(0.02f64..1.0, 2..8),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let p = OuParams::new(lambda, omega).unwrap();
        let a = logdet_c_closed(&Design::from_gaps(&raw_gaps).unwrap(), &p).unwrap();
        let mut perm = raw_gaps.clone();
        perm.shuffle(&mut rng(seed));
        let b = logdet_c_closed(&Design::from_gaps(&perm).unwrap(), &p).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }
}
