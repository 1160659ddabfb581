//! Model parameters and sampling designs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaps shorter than this are treated as coincident points.
pub const MIN_GAP: f64 = 1e-9;

/// Tolerance on the pinned endpoints and on the gap sum.
pub const ENDPOINT_TOL: f64 = 1e-12;

/// Parameters of the trend-shifted complex OU process
/// `dY = -(lambda - i omega) Y dt + sigma dW`, `Z = m + Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    lambda: f64,
    omega: f64,
    sigma: f64,
    /// Real part of the trend mean.
    pub m1: f64,
    /// Imaginary part of the trend mean.
    pub m2: f64,
    normalized: bool,
}

impl OuParams {
    /// Unit-variance parameterization: `sigma^2 / (2 lambda) = 1`.
    pub fn new(lambda: f64, omega: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !omega.is_finite() {
            return Err(Error::arg(format!("omega must be finite, got {omega}")));
        }
        Ok(OuParams {
            lambda,
            omega,
            sigma: (2.0 * lambda).sqrt(),
            m1: 0.0,
            m2: 0.0,
            normalized: true,
        })
    }

    /// Raw parameterization with an explicit diffusion scale.
    pub fn with_sigma(lambda: f64, omega: f64, sigma: f64) -> Result<Self> {
        let mut p = Self::new(lambda, omega)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::arg(format!("sigma must be positive, got {sigma}")));
        }
        p.sigma = sigma;
        p.normalized = false;
        Ok(p)
    }

    pub fn with_trend(mut self, m1: f64, m2: f64) -> Self {
        self.m1 = m1;
        self.m2 = m2;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Marginal variance of each coordinate, `sigma^2 / (2 lambda)`.
    pub fn variance(&self) -> f64 {
        if self.normalized {
            1.0
        } else {
            self.sigma * self.sigma / (2.0 * self.lambda)
        }
    }

    /// Same process with the sign of the frequency flipped.
    pub fn mirrored(&self) -> Self {
        OuParams {
            omega: -self.omega,
            ..*self
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("lambda must be positive, got {lambda}")))
    }
}

/// An ordered set of sampling locations `0 = t_1 < ... < t_n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    points: Vec<f64>,
    gaps: Vec<f64>,
}

impl Design {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::arg(format!(
                "a design needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::arg("design points must be finite"));
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if first.abs() > ENDPOINT_TOL || (last - 1.0).abs() > ENDPOINT_TOL {
            return Err(Error::arg(format!(
                "design must start at 0 and end at 1, got [{first}, {last}]"
            )));
        }
        let mut points = points;
        points[0] = 0.0;
        let n = points.len();
        points[n - 1] = 1.0;
        let gaps: Vec<f64> = points.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some((i, g)) = gaps.iter().enumerate().find(|(_, g)| **g < MIN_GAP) {
            return Err(if *g >= 0.0 {
                Error::Singular(format!(
                    "points {i} and {} are coincident (gap {g:e})",
                    i + 1
                ))
            } else {
                Error::arg(format!("design points must be increasing (gap {i} is {g:e})"))
            });
        }
        Ok(Design { points, gaps })
    }

    /// Builds a design from positive gaps; they are rescaled to sum to 1.
    pub fn from_gaps(gaps: &[f64]) -> Result<Self> {
        if gaps.is_empty() {
            return Err(Error::arg("a design needs at least one gap"));
        }
        if gaps.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::arg("gaps must be positive and finite"));
        }
        let total: f64 = gaps.iter().sum();
        let mut points = Vec::with_capacity(gaps.len() + 1);
        let mut acc = 0.0;
        points.push(0.0);
        for g in &gaps[..gaps.len() - 1] {
            acc += g / total;
            points.push(acc);
        }
        points.push(1.0);
        Self::new(points)
    }

    /// `n` equally spaced points on `[0, 1]`.
    pub fn equispaced(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::arg(format!("equispaced design needs n >= 2, got {n}")));
        }
        let h = (n - 1) as f64;
        Self::new((0..n).map(|i| i as f64 / h).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// `d_i = t_{i+1} - t_i`.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// `pi_i = exp(-lambda d_i)`.
    pub fn pis(&self, params: &OuParams) -> Vec<f64> {
        self.gaps
            .iter()
            .map(|d| (-params.lambda() * d).exp())
            .collect()
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max)
    }

    /// A copy with `t` inserted, keeping the points sorted.
    pub fn with_point(&self, t: f64) -> Result<Self> {
        let mut pts = self.points.clone();
        let pos = pts.partition_point(|p| *p < t);
        pts.insert(pos, t);
        Self::new(pts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(OuParams::new(0.0, 1.0).is_err());
        assert!(OuParams::new(-1.0, 1.0).is_err());
        assert!(OuParams::new(f64::NAN, 1.0).is_err());
        assert!(OuParams::with_sigma(1.0, 1.0, 0.0).is_err());
        assert!(OuParams::with_sigma(1.0, -3.0, 2.0).is_ok());
    }

    #[test]
    fn normalized_variance_is_one() {
        let p = OuParams::new(2.5, 1.0).unwrap();
        assert_eq!(p.variance(), 1.0);
        assert!((p.sigma().powi(2) / (2.0 * p.lambda()) - 1.0).abs() < 1e-15);
        let raw = OuParams::with_sigma(2.0, 0.0, 3.0).unwrap();
        assert!((raw.variance() - 9.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn design_validation() {
        assert!(Design::new(vec![0.0]).is_err());
        assert!(Design::new(vec![0.1, 1.0]).is_err());
        assert!(Design::new(vec![0.0, 0.9]).is_err());
        assert!(matches!(
            Design::new(vec![0.0, 0.6, 0.4, 1.0]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            Design::new(vec![0.0, 0.5, 0.5, 1.0]),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            Design::new(vec![0.0, 0.5, 0.5 + 1e-10, 1.0]),
            Err(Error::Singular(_))
        ));
        let d = Design::new(vec![0.0, 0.25, 1.0]).unwrap();
        assert_eq!(d.gaps(), &[0.25, 0.75]);
    }

    #[test]
    fn equispaced_gaps() {
        assert_eq!(Design::equispaced(2).unwrap().points(), &[0.0, 1.0]);
        assert_eq!(Design::equispaced(3).unwrap().points(), &[0.0, 0.5, 1.0]);
        let d = Design::equispaced(5).unwrap();
        assert!(d.gaps().iter().all(|g| (g - 0.25).abs() < 1e-15));
        assert!(Design::equispaced(1).is_err());
    }

    #[test]
    fn from_gaps_normalizes() {
        let d = Design::from_gaps(&[1.0, 3.0]).unwrap();
        assert_eq!(d.points(), &[0.0, 0.25, 1.0]);
        assert!((d.gaps().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(Design::from_gaps(&[1.0, -1.0]).is_err());
    }
}
