//! Covariance kernels of the complex OU process, the observation covariance
//! `C(n)` with its block-tridiagonal inverse, and the kriging predictor.
//!
//! Observations are ordered `(Z1(t1), Z2(t1), ..., Z1(tn), Z2(tn))` and held
//! as `n` pairs. `C(n)` is the correlation matrix of that vector; block
//! `(i, j)` with `i > j` is the lag correlation at `t_i - t_j`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{BlockMat, Mat2};
use crate::model::{Design, OuParams, MIN_GAP};

/// `e^{-lambda tau} [[cos w tau, sin w tau], [-sin w tau, cos w tau]]`.
///
/// This is the lag-`tau` correlation of the two-dimensional process and the
/// one-step regression matrix of the exact sampler.
pub fn rotation_exp(params: &OuParams, tau: f64) -> Result<Mat2> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::arg(format!("lag must be non-negative, got {tau}")));
    }
    Ok(damped_rotation(params, tau))
}

/// Unchecked kernel for internal callers that already know `tau >= 0`.
#[inline]
pub(crate) fn damped_rotation(params: &OuParams, tau: f64) -> Mat2 {
    let decay = (-params.lambda() * tau).exp();
    rotation(params.omega() * tau).scale(decay)
}

/// `[[cos a, sin a], [-sin a, cos a]]`.
#[inline]
pub(crate) fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, s, -s, c)
}

/// Cross-covariance `E[Y(t + tau) Y(t)^T]`. For `tau < 0` this is the
/// transpose of the value at `|tau|`.
pub fn cov_r(params: &OuParams, tau: f64) -> Mat2 {
    let m = damped_rotation(params, tau.abs()).scale(params.variance());
    if tau < 0.0 {
        m.transpose()
    } else {
        m
    }
}

/// Complex covariance `E[Y(t + tau) conj(Y(t))] = 2 (R11 + i R21)`.
pub fn complex_cov(params: &OuParams, tau: f64) -> Complex64 {
    let r = cov_r(params, tau);
    Complex64::new(2.0 * r.get(0, 0), 2.0 * r.get(1, 0))
}

/// Correlation matrix `C(n)` of the stacked observation vector.
pub fn build_c(design: &Design, params: &OuParams) -> BlockMat {
    let t = design.points();
    let n = t.len();
    let mut c = BlockMat::identity(n);
    for i in 1..n {
        for j in 0..i {
            let b = damped_rotation(params, t[i] - t[j]);
            c.set(i, j, b);
            c.set(j, i, b.transpose());
        }
    }
    c
}

/// Closed-form inverse of [`build_c`].
///
/// With `M_k` the lag correlation over gap `k` and `U_k = (1 - pi_k^2)^{-1} I`
/// (the rotation part of `M_k` is orthogonal, so `M_k^T M_k = pi_k^2 I`):
/// diagonal blocks are `U_1`, `U_k + pi_{k-1}^2 U_{k-1}`, `U_{n-1}`;
/// off-diagonal blocks are `-M_k^T U_k` above and `-M_k U_k` below.
pub fn build_c_inv(design: &Design, params: &OuParams) -> Result<BlockMat> {
    let gaps = design.gaps();
    let n = design.len();
    if let Some(g) = gaps.iter().find(|g| **g < MIN_GAP) {
        return Err(Error::Singular(format!("coincident design points (gap {g:e})")));
    }
    let pis = design.pis(params);
    let u: Vec<f64> = pis.iter().map(|p| 1.0 / (1.0 - p * p)).collect();

    let mut inv = BlockMat::zeros(n);
    for k in 0..n {
        let diag = match k {
            0 => u[0],
            _ if k == n - 1 => u[n - 2],
            _ => u[k] + pis[k - 1] * pis[k - 1] * u[k - 1],
        };
        inv.set(k, k, Mat2::scalar(diag));
    }
    for k in 0..n - 1 {
        let m = damped_rotation(params, gaps[k]);
        inv.set(k + 1, k, m.scale(-u[k]));
        inv.set(k, k + 1, m.transpose().scale(-u[k]));
    }
    Ok(inv)
}

/// Cross-covariance between `Z(x)` and each observation: block `i` is
/// `Q(x, t_i) = cov_r(x - t_i)`, the `2 x 2n` matrix returned as `n` blocks.
///
/// Locations outside `[0, 1]` are refused unless `allow_extrapolation`.
pub fn cross_q(
    x: f64,
    design: &Design,
    params: &OuParams,
    allow_extrapolation: bool,
) -> Result<Vec<Mat2>> {
    check_location(x, allow_extrapolation)?;
    Ok(design
        .points()
        .iter()
        .map(|t| cov_r(params, x - t))
        .collect())
}

pub(crate) fn check_location(x: f64, allow_extrapolation: bool) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::arg(format!("location must be finite, got {x}")));
    }
    if !allow_extrapolation && !(0.0..=1.0).contains(&x) {
        return Err(Error::arg(format!(
            "location {x} lies outside [0, 1]; extrapolation is disabled"
        )));
    }
    Ok(())
}

/// Correlation version of [`cross_q`] (unit marginal variance).
pub(crate) fn cross_corr(x: f64, design: &Design, params: &OuParams) -> Vec<Mat2> {
    design
        .points()
        .iter()
        .map(|t| {
            let tau = x - t;
            let m = damped_rotation(params, tau.abs());
            if tau < 0.0 {
                m.transpose()
            } else {
                m
            }
        })
        .collect()
}

/// Output of [`blue_predict`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    /// `(Z1_hat(x), Z2_hat(x))`.
    pub value: [f64; 2],
    /// Generalized least squares estimate of `(m1, m2)`.
    pub mean_hat: [f64; 2],
}

/// Best linear unbiased predictor of `Z(x)` with a GLS-estimated constant
/// mean. `observations` holds `(Z1(t_i), Z2(t_i))` in design order.
pub fn blue_predict(
    x: f64,
    observations: &[[f64; 2]],
    design: &Design,
    params: &OuParams,
) -> Result<Prediction> {
    if observations.len() != design.len() {
        return Err(Error::arg(format!(
            "expected {} observation pairs, got {}",
            design.len(),
            observations.len()
        )));
    }
    check_location(x, false)?;
    let c_inv = build_c_inv(design, params)?;
    let n = design.len();

    // H C^-1 H^T and H C^-1 z
    let mut fim = Mat2::ZERO;
    for i in 0..n {
        for j in 0..n {
            fim = fim + c_inv.block(i, j);
        }
    }
    let w = c_inv.mul_vec(observations);
    let hw = w.iter().fold([0.0, 0.0], |a, b| [a[0] + b[0], a[1] + b[1]]);
    let mean_hat = fim
        .inverse()
        .ok_or_else(|| Error::Singular("information matrix for the mean".into()))?
        .mul_vec(hw);

    let resid: Vec<[f64; 2]> = observations
        .iter()
        .map(|z| [z[0] - mean_hat[0], z[1] - mean_hat[1]])
        .collect();
    let alpha = c_inv.mul_vec(&resid);
    let q = cross_corr(x, design, params);
    let mut value = mean_hat;
    for (qi, ai) in q.iter().zip(&alpha) {
        let p = qi.mul_vec(*ai);
        value[0] += p[0];
        value[1] += p[1];
    }
    Ok(Prediction { value, mean_hat })
}
