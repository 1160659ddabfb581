#![allow(dead_code)]

use ou_design::{Design, OuParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sorted uniform interior points; redrawn while any gap is below 1e-3.
pub fn random_design(rng: &mut ChaCha8Rng, n: usize) -> Design {
    loop {
        let mut pts: Vec<f64> = (0..n - 2).map(|_| rng.random::<f64>()).collect();
        pts.push(0.0);
        pts.push(1.0);
        pts.sort_by(f64::total_cmp);
        if pts.windows(2).all(|w| w[1] - w[0] >= 1e-3) {
            return Design::new(pts).unwrap();
        }
    }
}

pub fn random_params(rng: &mut ChaCha8Rng, lambda: (f64, f64), omega: (f64, f64)) -> OuParams {
    let l = rng.random_range(lambda.0..lambda.1);
    let w = rng.random_range(omega.0..omega.1);
    OuParams::new(l, w).unwrap()
}

pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}
