//! Exact sampler for the trend-shifted two-dimensional OU process.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::OuParams;
use crate::ou::damped_rotation;

/// One realization: `(Z1(t), Z2(t))` at each requested time.
pub type Path = Vec<[f64; 2]>;

/// Draws `count` independent stationary paths observed at `times`.
///
/// The first state is drawn from the stationary law `N(0, v I)` with
/// `v = sigma^2 / (2 lambda)`; each step applies
/// `Y(t + d) = M(d) Y(t) + eps`, `eps ~ N(0, v (1 - e^{-2 lambda d}) I)`,
/// and the trend `(m1, m2)` is added to every state.
pub fn simulate(params: &OuParams, times: &[f64], seed: u64, count: usize) -> Result<Vec<Path>> {
    if count == 0 {
        return Err(Error::arg("count must be at least 1"));
    }
    if times.is_empty() {
        return Err(Error::arg("no observation times"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::arg("observation times must be finite"));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::arg(format!(
            "observation times must be sorted ({} follows {})",
            w[1], w[0]
        )));
    }

    let var = params.variance();
    let steps: Vec<_> = times
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let pi2 = (-2.0 * params.lambda() * d).exp();
            (damped_rotation(params, d), (var * (1.0 - pi2)).sqrt())
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };
    let trend = [params.m1, params.m2];

    let paths = (0..count)
        .map(|_| {
            let sd = var.sqrt();
            let mut y = [sd * normal(), sd * normal()];
            let mut path = Vec::with_capacity(times.len());
            path.push([y[0] + trend[0], y[1] + trend[1]]);
            for (m, noise_sd) in &steps {
                let mean = m.mul_vec(y);
                y = [
                    mean[0] + noise_sd * normal(),
                    mean[1] + noise_sd * normal(),
                ];
                path.push([y[0] + trend[0], y[1] + trend[1]]);
            }
            path
        })
        .collect();
    Ok(paths)
}

/// Times `0, dt, 2 dt, ...` with `len` entries.
pub fn regular_times(len: usize, dt: f64) -> Vec<f64> {
    (0..len).map(|k| k as f64 * dt).collect()
}
