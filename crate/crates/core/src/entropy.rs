//! Entropy criterion: differential entropy of the observation vector,
//! `Ent(Z) = n (1 + ln(pi sigma^2 / lambda)) + ln det C(n) / 2`.
//!
//! `C(n)` factorizes as `L D L^T` with unit block-triangular `L` and
//! `D = diag(I, I - pi_1^2 I, ..., I - pi_{n-1}^2 I)`, so
//! `ln det C(n) = sum_k 2 ln(1 - pi_k^2)` depends on the gaps only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Design, OuParams};
use crate::optimize::{optimize_design, Criterion, OptimizerConfig};
use crate::ou::build_c;

/// Closed form and oracle must agree to this absolute tolerance.
pub const LOGDET_MATCH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    /// `ln det C(n)` of the correlation matrix; never positive.
    pub logdet: f64,
    pub value: f64,
}

/// `ln det C(n)` from a dense Cholesky factorization of [`build_c`].
pub fn logdet_c_oracle(design: &Design, params: &OuParams) -> Result<f64> {
    let c = build_c(design, params).to_dense();
    let chol = c
        .cholesky()
        .ok_or_else(|| Error::Singular("C(n) is not positive definite".into()))?;
    let l = chol.l_dirty();
    let mut total = 0.0;
    for k in 0..l.nrows() {
        let pivot = l[(k, k)];
        if !(pivot > 0.0) {
            return Err(Error::Singular(format!("non-positive pivot {pivot:e} at {k}")));
        }
        total += 2.0 * pivot.ln();
    }
    Ok(total)
}

/// `sum_k ln det(I - pi_k^2 I) = sum_k 2 ln(1 - pi_k^2)`.
pub fn logdet_c_closed(design: &Design, params: &OuParams) -> Result<f64> {
    let lambda = params.lambda();
    let mut total = 0.0;
    for d in design.gaps() {
        let factor = -(-2.0 * lambda * d).exp_m1();
        if !(factor > 0.0) {
            return Err(Error::Singular(format!("zero gap factor at gap {d:e}")));
        }
        total += 2.0 * factor.ln();
    }
    Ok(total)
}

/// `sum_k ln(1 - 2 pi_k^2)`, the single-factor product form. `None` once any
/// factor is non-positive, which happens for gaps below `ln 2 / (2 lambda)`.
pub fn logdet_single_factor(design: &Design, params: &OuParams) -> Option<f64> {
    let lambda = params.lambda();
    design.gaps().iter().try_fold(0.0, |acc, d| {
        let f = 1.0 - 2.0 * (-2.0 * lambda * d).exp();
        (f > 0.0).then(|| acc + f.ln())
    })
}

/// Which closed-form determinant reproduces the factorization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminantDiagnostic {
    pub oracle: f64,
    /// `sum 2 ln(1 - pi^2)`
    pub squared_form: f64,
    /// `sum ln(1 - 2 pi^2)`, absent when a factor is non-positive.
    pub single_factor_form: Option<f64>,
    pub squared_matches: bool,
    pub single_factor_matches: bool,
    /// Some gap is below `ln 2 / (2 lambda)`.
    pub single_factor_undefined_regime: bool,
}

pub fn determinant_diagnostic(design: &Design, params: &OuParams) -> Result<DeterminantDiagnostic> {
    let oracle = logdet_c_oracle(design, params)?;
    let squared_form = logdet_c_closed(design, params)?;
    let single = logdet_single_factor(design, params);
    let threshold = std::f64::consts::LN_2 / (2.0 * params.lambda());
    Ok(DeterminantDiagnostic {
        oracle,
        squared_form,
        single_factor_form: single,
        squared_matches: (squared_form - oracle).abs() < LOGDET_MATCH_TOL,
        single_factor_matches: single.is_some_and(|s| (s - oracle).abs() < LOGDET_MATCH_TOL),
        single_factor_undefined_regime: design.gaps().iter().any(|d| *d <= threshold),
    })
}

pub fn entropy(design: &Design, params: &OuParams) -> Result<EntropyValue> {
    let logdet = logdet_c_closed(design, params)?;
    let n = design.len() as f64;
    let sigma2 = params.sigma() * params.sigma();
    let constant = n * (1.0 + (std::f64::consts::PI * sigma2 / params.lambda()).ln());
    Ok(EntropyValue {
        logdet,
        value: constant + 0.5 * logdet,
    })
}

/// Numerically maximizes the entropy over the gap simplex. The maximizer is
/// the equispaced design; this routine exists to confirm it.
pub fn optimize_entropy_check(n: usize, params: &OuParams) -> Result<Design> {
    if n < 3 {
        return Err(Error::arg(format!("entropy check needs n >= 3, got {n}")));
    }
    let config = OptimizerConfig {
        criterion: Criterion::Entropy,
        ..OptimizerConfig::default()
    };
    Ok(optimize_design(n, params, &config)?.design)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_logdet() {
        let p = OuParams::new(1.0, 2.0).unwrap();
        let d = Design::equispaced(2).unwrap();
        let expect = 2.0 * (1.0 - (-2.0_f64).exp()).ln();
        assert!((logdet_c_closed(&d, &p).unwrap() - expect).abs() < 1e-14);
        assert!((logdet_c_oracle(&d, &p).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn equispaced_logdet() {
        let p = OuParams::new(2.2, -1.0).unwrap();
        for n in 2..10 {
            let d = Design::equispaced(n).unwrap();
            let m = (n - 1) as f64;
            let expect = m * 2.0 * (1.0 - (-2.0 * 2.2 / m).exp()).ln();
            assert!((logdet_c_closed(&d, &p).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_ignores_frequency_sign() {
        let d = Design::equispaced(4).unwrap();
        let a = logdet_c_oracle(&d, &OuParams::new(1.0, 3.0).unwrap()).unwrap();
        let b = logdet_c_oracle(&d, &OuParams::new(1.0, -3.0).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn entropy_constant_term() {
        let d = Design::equispaced(3).unwrap();
        let p = OuParams::new(1.3, 0.5).unwrap();
        let e = entropy(&d, &p).unwrap();
        let c = 3.0 * (1.0 + (2.0 * std::f64::consts::PI).ln());
        assert!((e.value - c - 0.5 * e.logdet).abs() < 1e-12);
        assert!(e.logdet <= 0.0);

        let raw = OuParams::with_sigma(1.3, 0.5, 0.4).unwrap();
        let er = entropy(&d, &raw).unwrap();
        assert_eq!(er.logdet, e.logdet);
        let c = 3.0 * (1.0 + (std::f64::consts::PI * 0.16 / 1.3).ln());
        assert!((er.value - c - 0.5 * er.logdet).abs() < 1e-12);
    }

    #[test]
    fn single_factor_form_undefined_for_short_gaps() {
        let p = OuParams::new(1.0, 0.0).unwrap();
        let d = Design::equispaced(5).unwrap();
        assert!(logdet_single_factor(&d, &p).is_none());
        let diag = determinant_diagnostic(&d, &p).unwrap();
        assert!(diag.squared_matches);
        assert!(!diag.single_factor_matches);
        assert!(diag.single_factor_undefined_regime);
    }
}
