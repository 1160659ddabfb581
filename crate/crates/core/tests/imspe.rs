mod common;

use common::{random_design, random_params, rng};
use nalgebra::DMatrix;
use ou_design::imspe::{
    fim_g, imspe_closed, imspe_quadrature, mspe_point, mspe_point_expanded, scalar_ou_imspe_quadrature,
    RhoVeeTable,
};
use ou_design::ou::build_c;
use ou_design::{Design, OuParams};
use proptest::prelude::*;
use rand::Rng;

/// Composite Simpson on each segment between design points.
fn simpson(f: impl Fn(f64) -> f64, breaks: &[f64], panels: usize) -> f64 {
    breaks
        .windows(2)
        .map(|w| {
            let h = (w[1] - w[0]) / panels as f64;
            let mut s = f(w[0]) + f(w[1]);
            for k in 1..panels {
                let x = w[0] + k as f64 * h;
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
            }
            s * h / 3.0
        })
        .sum()
}

#[test]
fn fisher_information_is_scalar_multiple_of_identity() {
    let p = OuParams::new(4.9366, -5.7767).unwrap();
    let mut g = rng(8);
    for n in [2, 3, 5, 8] {
        let d = random_design(&mut g, n);
        let c = build_c(&d, &p).to_dense();
        let h = DMatrix::from_fn(2, 2 * n, |r, c| if c % 2 == r { 1.0 } else { 0.0 });
        let fim = &h * c.lu().solve(&h.transpose()).unwrap();
        let gv = fim_g(&d, &p);
        assert!((fim[(0, 0)] - gv).abs() < 1e-9 * gv);
        assert!((fim[(1, 1)] - gv).abs() < 1e-9 * gv);
        assert!(fim[(0, 1)].abs() < 1e-9 && fim[(1, 0)].abs() < 1e-9);
    }
}

#[test]
fn rho_and_vee_match_numerical_integrals() {
    let p = OuParams::new(2.4522, -4.1274).unwrap();
    let d = Design::new(vec![0.0, 0.17, 0.5, 0.81, 1.0]).unwrap();
    let t = d.points();
    let tab = RhoVeeTable::new(&d, &p);
    let (l, w) = (p.lambda(), p.omega());
    for i in 0..t.len() {
        for j in 0..t.len() {
            let r = simpson(|x| (-l * ((x - t[i]).abs() + (x - t[j]).abs())).exp(), t, 2000);
            let v = simpson(|x| (-l * (x - t[i]).abs()).exp() * (w * (x - t[j])).cos(), t, 2000);
            assert!((tab.rho(i, j) - r).abs() < 1e-9, "rho({i},{j})");
            assert!((tab.vee(i, j) - v).abs() < 1e-9, "vee({i},{j})");
        }
    }
}

#[test]
fn closed_form_matches_quadrature_equispaced() {
    let p = OuParams::new(4.9968, -0.3561).unwrap();
    let d = Design::equispaced(4).unwrap();
    let closed = imspe_closed(&d, &p).value;
    let quad = imspe_quadrature(&d, &p, 1e-11).unwrap();
    assert!((closed - quad).abs() < 1e-6 * quad);
}

#[test]
fn closed_form_matches_quadrature_random() {
    let mut g = rng(21);
    for _ in 0..25 {
        let n = g.random_range(2..=7);
        let d = random_design(&mut g, n);
        let p = random_params(&mut g, (0.2, 8.0), (-8.0, 8.0));
        let closed = imspe_closed(&d, &p).value;
        let quad = imspe_quadrature(&d, &p, 1e-11).unwrap();
        assert!((closed - quad).abs() < 1e-8 * quad.max(1e-3), "{closed} vs {quad}");
    }
}

#[test]
fn zero_frequency_is_twice_scalar_process() {
    let mut g = rng(33);
    for _ in 0..10 {
        let d = random_design(&mut g, 4);
        let lambda = g.random_range(0.3..6.0);
        let p = OuParams::new(lambda, 0.0).unwrap();
        let closed = imspe_closed(&d, &p).value;
        let scalar = scalar_ou_imspe_quadrature(&d, lambda, 1e-11).unwrap();
        assert!((closed - 2.0 * scalar).abs() < 1e-8 * closed);
    }
}

#[test]
fn bordered_and_expanded_mspe_agree() {
    let mut g = rng(55);
    for _ in 0..20 {
        let d = random_design(&mut g, 5);
        let p = random_params(&mut g, (0.2, 8.0), (-8.0, 8.0));
        for _ in 0..5 {
            let x: f64 = g.random_range(0.0..1.0);
            let a = mspe_point(x, &d, &p).unwrap();
            let b = mspe_point_expanded(x, &d, &p).unwrap();
            assert!((a - b).abs() < 1e-10, "x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn mspe_vanishes_at_design_points() {
    let p = OuParams::new(1.5, 2.0).unwrap();
    let d = Design::new(vec![0.0, 0.3, 0.7, 1.0]).unwrap();
    for t in d.points() {
        assert!(mspe_point(*t, &d, &p).unwrap().abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn omega_sign_leaves_imspe_unchanged(
        lambda in 0.2f64..8.0,
        omega in -8.0f64..8.0,
        raw_gaps in prop::collection::vec(0.05f64..1.0, 1..8),
    ) {
        let d = Design::from_gaps(&raw_gaps).unwrap();
        let p = OuParams::new(lambda, omega).unwrap();
        let a = imspe_closed(&d, &p).value;
        let b = imspe_closed(&d, &p.mirrored()).value;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn adding_a_point_never_increases_imspe(
        lambda in 0.2f64..8.0,
        omega in -8.0f64..8.0,
        raw_gaps in prop::collection::vec(0.05f64..1.0, 1..6),
        extra in 0.01f64..0.99,
    ) {
        let d = Design::from_gaps(&raw_gaps).unwrap();
        prop_assume!(d.points().iter().all(|t| (t - extra).abs() > 1e-3));
        let p = OuParams::new(lambda, omega).unwrap();
        let refined = d.with_point(extra).unwrap();
        let before = imspe_closed(&d, &p).value;
        let after = imspe_closed(&refined, &p).value;
        prop_assert!(after <= before + 1e-12, "{after} > {before}");
    }
}
