//! Integrated mean squared prediction error (IMSPE) of the kriging
//! predictor.
//!
//! Two independent routes are provided:
//!
//! * [`imspe_closed`] assembles the criterion from gap-level quantities
//!   (the scalar Fisher information `G`, and the integrals `rho`, `vee` of
//!   products of kernels) without touching a matrix.
//! * [`imspe_quadrature`] integrates the pointwise MSPE, evaluated through
//!   the dense bordered kriging system, with adaptive quadrature.
//!
//! All values are reported in correlation units, i.e. multiplied by
//! `2 lambda / sigma^2`, which makes the criterion independent of `sigma`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::model::{Design, OuParams};
use crate::ou::{build_c, build_c_inv, check_location, cross_corr};
use crate::quadrature;

/// Per-gap contribution to the Fisher information for the mean,
/// `g(d) = (1 - 2 e^{-l d} cos(w d) + e^{-2 l d}) / (1 - e^{-2 l d})`, `g(0) = 0`.
pub fn g_scalar(d: f64, params: &OuParams) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(Error::arg(format!("gap must be non-negative, got {d}")));
    }
    Ok(g_unchecked(d, params))
}

fn g_unchecked(d: f64, params: &OuParams) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    let pi = (-params.lambda() * d).exp();
    if pi == 0.0 {
        return 1.0;
    }
    // 1 - 2 pi cos + pi^2 = (1 - pi)^2 + 4 pi sin^2(w d / 2)
    let half = (0.5 * params.omega() * d).sin();
    let num = (1.0 - pi).powi(2) + 4.0 * pi * half * half;
    num / one_minus_pi_sq(params.lambda(), d)
}

/// `1 - e^{-2 lambda d}` without cancellation for small `d`.
#[inline]
fn one_minus_pi_sq(lambda: f64, d: f64) -> f64 {
    -(-2.0 * lambda * d).exp_m1()
}

/// `G(n) = 1 + sum_k g(d_k)`, so that `H C^{-1} H^T = G I`.
pub fn fim_g(design: &Design, params: &OuParams) -> f64 {
    1.0 + design
        .gaps()
        .iter()
        .map(|d| g_unchecked(*d, params))
        .sum::<f64>()
}

/// Integrals over `[0, 1]` of products of kernels at design points.
///
/// * `rho(i, j) = int e^{-l (|x - t_i| + |x - t_j|)} dx`
/// * `vee(i, j) = int e^{-l |x - t_i|} cos(w (x - t_j)) dx`
///
/// Indices are 0-based design indices.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoVeeTable {
    n: usize,
    rho: Vec<f64>,
    vee: Vec<f64>,
}

impl RhoVeeTable {
    pub fn new(design: &Design, params: &OuParams) -> Self {
        let n = design.len();
        let lambda = params.lambda();
        let omega = params.omega();
        let t = design.points();
        // distance from each point to the right end, summed from the gaps
        let mut to_end = vec![0.0; n];
        for k in (0..n - 1).rev() {
            to_end[k] = to_end[k + 1] + design.gaps()[k];
        }

        let mut rho = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let inner = t[i] - t[j];
                let e_in = (-lambda * inner).exp();
                let left = (-lambda * (2.0 * t[j] + inner)).exp();
                let right = (-lambda * (inner + 2.0 * to_end[i])).exp();
                let r = (2.0 * e_in - left - right) / (2.0 * lambda) + inner * e_in;
                rho[i * n + j] = r;
                rho[j * n + i] = r;
            }
        }

        let norm = lambda * lambda + omega * omega;
        let mut vee = vec![0.0; n * n];
        for i in 0..n {
            let e_left = (-lambda * t[i]).exp();
            let e_right = (-lambda * to_end[i]).exp();
            for j in 0..n {
                let (sl, cl) = (omega * t[j]).sin_cos();
                let (sr, cr) = (omega * to_end[j]).sin_cos();
                vee[i * n + j] = (2.0 * lambda * (omega * (t[i] - t[j])).cos()
                    + e_left * (omega * sl - lambda * cl)
                    + e_right * (omega * sr - lambda * cr))
                    / norm;
            }
        }
        RhoVeeTable { n, rho, vee }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.n + j]
    }

    #[inline]
    pub fn vee(&self, i: usize, j: usize) -> f64 {
        self.vee[i * self.n + j]
    }
}

fn check_index(i: usize, design: &Design) -> Result<()> {
    if i < design.len() {
        Ok(())
    } else {
        Err(Error::arg(format!(
            "index {i} out of range for a design with {} points",
            design.len()
        )))
    }
}

/// `int_0^1 e^{-l (|x - t_i| + |x - t_j|)} dx` (0-based indices, symmetric).
pub fn rho(i: usize, j: usize, design: &Design, params: &OuParams) -> Result<f64> {
    check_index(i, design)?;
    check_index(j, design)?;
    Ok(RhoVeeTable::new(design, params).rho(i, j))
}

/// `int_0^1 e^{-l |x - t_i|} cos(w (x - t_j)) dx` (0-based indices).
pub fn vee(i: usize, j: usize, design: &Design, params: &OuParams) -> Result<f64> {
    check_index(i, design)?;
    check_index(j, design)?;
    Ok(RhoVeeTable::new(design, params).vee(i, j))
}

/// The five sums making up `B_n`, kept apart for term-level inspection.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BTerms {
    /// `1 - 2 vee(n, n) + rho(n, n)`.
    pub base: f64,
    /// Cross terms between the mean and the kriging weights (the `vee` sum).
    pub cross: f64,
    /// Interaction of each gap with the last point.
    pub tail: f64,
    /// Same-gap quadratic terms.
    pub diagonal: f64,
    /// Pairwise terms over gaps `i > j`.
    pub pairwise: f64,
}

impl BTerms {
    pub fn total(&self) -> f64 {
        self.base + self.cross + self.tail + self.diagonal + self.pairwise
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImspeBreakdown {
    pub g_values: Vec<f64>,
    /// `G(n) = 1 + sum g(d_k)`.
    pub g_total: f64,
    pub a_n: f64,
    pub b_n: f64,
    pub b_terms: BTerms,
    /// `2 (1 - A_n + B_n / G)`.
    pub value: f64,
}

/// Closed-form IMSPE of the kriging predictor for `design`.
pub fn imspe_closed(design: &Design, params: &OuParams) -> ImspeBreakdown {
    let n = design.len();
    let lambda = params.lambda();
    let omega = params.omega();
    let t = design.points();
    let gaps = design.gaps();
    let pis = design.pis(params);
    let den: Vec<f64> = gaps.iter().map(|d| one_minus_pi_sq(lambda, *d)).collect();
    let tab = RhoVeeTable::new(design, params);
    let last = n - 1;

    let g_values: Vec<f64> = gaps.iter().map(|d| g_unchecked(*d, params)).collect();
    let g_total = 1.0 + g_values.iter().sum::<f64>();

    // rho_{k,k} - 2 pi_k rho_{k+1,k} + pi_k^2 rho_{k+1,k+1}, shared by A_n and B_n
    let quad: Vec<f64> = (0..n - 1)
        .map(|k| {
            let p = pis[k];
            tab.rho(k, k) - 2.0 * p * tab.rho(k + 1, k) + p * p * tab.rho(k + 1, k + 1)
        })
        .collect();

    let a_n = tab.rho(last, last) + (0..n - 1).map(|k| quad[k] / den[k]).sum::<f64>();

    let base = 1.0 - 2.0 * tab.vee(last, last) + tab.rho(last, last);

    let cross = -2.0
        * (0..n - 1)
            .map(|k| {
                let p = pis[k];
                ((tab.vee(k, k) - p * tab.vee(k, k + 1))
                    - p * (tab.vee(k + 1, k) - p * tab.vee(k + 1, k + 1)))
                    / den[k]
            })
            .sum::<f64>();

    // t_n - t_k accumulated from the right
    let mut to_end = vec![0.0; n];
    for k in (0..n - 1).rev() {
        to_end[k] = to_end[k + 1] + gaps[k];
    }
    let tail = 2.0
        * (0..n - 1)
            .map(|k| {
                let p = pis[k];
                (tab.rho(last, k) - p * tab.rho(last, k + 1))
                    * ((omega * to_end[k]).cos() - p * (omega * to_end[k + 1]).cos())
                    / den[k]
            })
            .sum::<f64>();

    let diagonal = (0..n - 1)
        .map(|k| {
            let p = pis[k];
            let half = (0.5 * omega * gaps[k]).sin();
            let osc = (1.0 - p).powi(2) + 4.0 * p * half * half;
            quad[k] * osc / (den[k] * den[k])
        })
        .sum::<f64>();

    let mut pairwise = 0.0;
    for i in 1..n - 1 {
        let pi_i = pis[i];
        for j in 0..i {
            let pi_j = pis[j];
            let r = tab.rho(i, j) - pi_i * tab.rho(i + 1, j) - pi_j * tab.rho(i, j + 1)
                + pi_i * pi_j * tab.rho(i + 1, j + 1);
            let c = (omega * (t[i] - t[j])).cos()
                - pi_i * (omega * (t[i + 1] - t[j])).cos()
                - pi_j * (omega * (t[i] - t[j + 1])).cos()
                + pi_i * pi_j * (omega * (t[i + 1] - t[j + 1])).cos();
            pairwise += r * c / (den[i] * den[j]);
        }
    }
    pairwise *= 2.0;

    let b_terms = BTerms { base, cross, tail, diagonal, pairwise };
    let b_n = b_terms.total();
    ImspeBreakdown {
        g_values,
        g_total,
        a_n,
        b_n,
        b_terms,
        value: 2.0 * (1.0 - a_n + b_n / g_total),
    }
}

/// MSPE of the kriging predictor through the dense bordered system
/// `[[0, H], [H^T, C]]`, factorized once and reused across locations.
#[derive(Debug, Clone)]
pub struct BorderedMspe {
    design: Design,
    params: OuParams,
    bordered_inv: DMatrix<f64>,
}

impl BorderedMspe {
    pub fn new(design: &Design, params: &OuParams) -> Result<Self> {
        let n = design.len();
        let dim = 2 * n + 2;
        let c = build_c(design, params).to_dense();
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((2, 2), (2 * n, 2 * n)).copy_from(&c);
        for i in 0..n {
            for k in 0..2 {
                m[(k, 2 + 2 * i + k)] = 1.0;
                m[(2 + 2 * i + k, k)] = 1.0;
            }
        }
        let bordered_inv = m
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Singular("bordered kriging system".into()))?;
        if bordered_inv.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("bordered kriging system".into()));
        }
        Ok(BorderedMspe {
            design: design.clone(),
            params: *params,
            bordered_inv,
        })
    }

    /// MSPE in correlation units (divide-out of `sigma^2 / (2 lambda)`).
    pub fn eval_unit(&self, x: f64) -> f64 {
        let q = cross_corr(x, &self.design, &self.params);
        let dim = self.bordered_inv.nrows();
        let mut total = 2.0;
        for row in 0..2 {
            let mut b = DVector::zeros(dim);
            b[row] = 1.0;
            for (i, qi) in q.iter().enumerate() {
                b[2 + 2 * i] = qi.get(row, 0);
                b[2 + 2 * i + 1] = qi.get(row, 1);
            }
            total -= b.dot(&(&self.bordered_inv * &b));
        }
        clamp_roundoff(total)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        check_location(x, false)?;
        Ok(self.params.variance() * self.eval_unit(x))
    }
}

fn clamp_roundoff(v: f64) -> f64 {
    if (-1e-12..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// Pointwise MSPE at `x` via the bordered kriging system.
pub fn mspe_point(x: f64, design: &Design, params: &OuParams) -> Result<f64> {
    check_location(x, false)?;
    BorderedMspe::new(design, params)?.eval(x)
}

/// Pointwise MSPE from the expanded trace form
/// `tr[I - Q C^-1 Q^T + G^-1 (I - Q C^-1 H^T)(I - Q C^-1 H^T)^T]`
/// using the closed-form inverse and the scalar `G`.
pub fn mspe_point_expanded(x: f64, design: &Design, params: &OuParams) -> Result<f64> {
    check_location(x, false)?;
    let c_inv = build_c_inv(design, params)?;
    let q = cross_corr(x, design, params);
    let n = design.len();
    let g = fim_g(design, params);

    // W = Q C^-1 as n blocks
    let w: Vec<Mat2> = (0..n)
        .map(|j| {
            let lo = j.saturating_sub(1);
            let hi = (j + 1).min(n - 1);
            (lo..=hi).fold(Mat2::ZERO, |acc, k| acc + q[k] * c_inv.block(k, j))
        })
        .collect();
    let qcq = w
        .iter()
        .zip(&q)
        .fold(Mat2::ZERO, |acc, (wj, qj)| acc + *wj * qj.transpose());
    let resid = w.iter().fold(Mat2::IDENTITY, |acc, wj| acc - *wj);
    let unit = (Mat2::IDENTITY - qcq).trace() + (resid * resid.transpose()).trace() / g;
    Ok(params.variance() * clamp_roundoff(unit))
}

/// Numerical IMSPE: `(2 lambda / sigma^2) int_0^1 MSPE(x) dx` with adaptive
/// Gauss-Kronrod panels split at every design point.
pub fn imspe_quadrature(design: &Design, params: &OuParams, tol: f64) -> Result<f64> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(Error::arg(format!("tolerance must lie in [1e-12, 1e-4], got {tol:e}")));
    }
    let mspe = BorderedMspe::new(design, params)?;
    let r = quadrature::integrate(|x| mspe.eval_unit(x), design.points(), tol, tol, 4000)?;
    Ok(r.value)
}

/// IMSPE of the scalar real OU process with correlation `e^{-lambda |tau|}`
/// on the same design: dense bordered kriging system integrated by adaptive
/// quadrature. At `omega = 0` the two coordinates of the complex process
/// decouple and its IMSPE is twice this value.
pub fn scalar_ou_imspe_quadrature(design: &Design, lambda: f64, tol: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::arg(format!("lambda must be positive, got {lambda}")));
    }
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(Error::arg(format!("tolerance must lie in [1e-12, 1e-4], got {tol:e}")));
    }
    let t = design.points();
    let n = t.len();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        m[(0, i + 1)] = 1.0;
        m[(i + 1, 0)] = 1.0;
        for j in 0..n {
            m[(i + 1, j + 1)] = (-lambda * (t[i] - t[j]).abs()).exp();
        }
    }
    let inv = m
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("scalar bordered kriging system".into()))?;
    let mspe = |x: f64| {
        let b = DVector::from_fn(n + 1, |k, _| {
            if k == 0 {
                1.0
            } else {
                (-lambda * (x - t[k - 1]).abs()).exp()
            }
        });
        clamp_roundoff(1.0 - b.dot(&(&inv * &b)))
    };
    Ok(quadrature::integrate(mspe, t, tol, tol, 4000)?.value)
}
