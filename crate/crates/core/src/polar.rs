//! Pole-coordinate series: parsing, periodic trend removal and estimation of
//! the complex OU parameters from the residual.
//!
//! The trend model is `Z(t) = c + m e^{i 2 pi f t} + Y(t)` with `Z = x + i y`
//! in arcseconds and `t` in decimal years.

use std::f64::consts::PI;
use std::io::BufRead;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Annual frequency (cycles per year).
pub const ANNUAL_CYCLES_PER_YEAR: f64 = 1.0;
/// Chandler period of 435 days.
pub const CHANDLER_CYCLES_PER_YEAR: f64 = 365.25 / 435.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyPreset {
    Annual,
    Chandler,
}

impl FrequencyPreset {
    pub fn cycles_per_year(self) -> f64 {
        match self {
            FrequencyPreset::Annual => ANNUAL_CYCLES_PER_YEAR,
            FrequencyPreset::Chandler => CHANDLER_CYCLES_PER_YEAR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarMotionSeries {
    epochs: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PolarMotionSeries {
    pub fn new(epochs: Vec<f64>, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if epochs.len() != x.len() || epochs.len() != y.len() {
            return Err(Error::arg("epochs, x and y must have equal lengths"));
        }
        if epochs.len() < 2 {
            return Err(Error::arg("a series needs at least 2 samples"));
        }
        if epochs.iter().chain(&x).chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::arg("series values must be finite"));
        }
        if let Some(w) = epochs.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::arg(format!(
                "epochs must be strictly increasing ({} follows {})",
                w[1], w[0]
            )));
        }
        Ok(PolarMotionSeries { epochs, x, y })
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn epochs(&self) -> &[f64] {
        &self.epochs
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn pairs(&self) -> Vec<[f64; 2]> {
        self.x.iter().zip(&self.y).map(|(a, b)| [*a, *b]).collect()
    }

    /// Common spacing, if every step matches the first within `rel_tol`.
    pub fn regular_step(&self, rel_tol: f64) -> Option<f64> {
        let dt = self.epochs[1] - self.epochs[0];
        self.epochs
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= rel_tol * dt)
            .then_some(dt)
    }

    /// Keeps the samples lying on the grid `epochs[0] + k dt` (within
    /// `tol`), requiring every grid node up to the last kept one.
    pub fn subset_regular(&self, dt: f64, tol: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::arg(format!("dt must be positive, got {dt}")));
        }
        let start = self.epochs[0];
        let (mut e, mut x, mut y) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..self.len() {
            let k = ((self.epochs[i] - start) / dt).round();
            if (self.epochs[i] - (start + k * dt)).abs() > tol {
                continue;
            }
            if k as usize != e.len() {
                return Err(Error::arg(format!(
                    "grid node {} is missing near epoch {}",
                    e.len(),
                    start + e.len() as f64 * dt
                )));
            }
            e.push(self.epochs[i]);
            x.push(self.x[i]);
            y.push(self.y[i]);
        }
        Self::new(e, x, y)
    }
}

/// 0-based whitespace-separated column positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnConfig {
    pub epoch: usize,
    pub x: usize,
    pub y: usize,
}

impl Default for ColumnConfig {
    /// EOP C01 layout: epoch, x, sigma_x, y, sigma_y, ...
    fn default() -> Self {
        ColumnConfig { epoch: 0, x: 1, y: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSeries {
    pub series: PolarMotionSeries,
    /// Data rows read (after skipping comments and headers).
    pub rows: usize,
    /// Rows dropped because a later row repeated their epoch.
    pub duplicates: usize,
    /// Non-comment lines skipped because the columns were not numeric.
    pub skipped: usize,
}

/// Reads an EOP C01-style text stream. `#` lines and lines whose configured
/// columns are not numeric are skipped; repeated epochs keep the last row.
pub fn parse_eop<R: BufRead>(reader: R, columns: ColumnConfig) -> Result<ParsedSeries> {
    let (mut epochs, mut x, mut y) = (Vec::new(), Vec::new(), Vec::new());
    let (mut rows, mut duplicates, mut skipped) = (0, 0, 0);
    for line in reader.lines() {
        let line = line.map_err(|e| Error::Format(format!("read failed: {e}")))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let get = |i: usize| fields.get(i).and_then(|s| s.parse::<f64>().ok());
        let (Some(t), Some(xv), Some(yv)) = (get(columns.epoch), get(columns.x), get(columns.y))
        else {
            skipped += 1;
            continue;
        };
        rows += 1;
        if epochs.last() == Some(&t) {
            duplicates += 1;
            *x.last_mut().unwrap() = xv;
            *y.last_mut().unwrap() = yv;
            continue;
        }
        epochs.push(t);
        x.push(xv);
        y.push(yv);
    }
    if epochs.is_empty() {
        return Err(Error::Format("no parseable data rows".into()));
    }
    if let Some(w) = epochs.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Format(format!(
            "epochs are not increasing ({} follows {})",
            w[1], w[0]
        )));
    }
    let series = PolarMotionSeries::new(epochs, x, y).map_err(|e| Error::Format(e.to_string()))?;
    Ok(ParsedSeries { series, rows, duplicates, skipped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    /// Constant offset `c`.
    pub mean_hat: Complex64,
    /// Periodic amplitude `m`.
    pub m_hat: Complex64,
    pub cycles_per_year: f64,
    /// Set when `f = 0` and the periodic term collapses onto the constant.
    pub confounded: bool,
    pub residuals: PolarMotionSeries,
}

/// Complex least squares of `Z(t) = c + m e^{i 2 pi f t}`.
///
/// `f = 0` reduces to mean removal with `m = 0` and `confounded` set; any
/// other rank deficiency is an error.
pub fn fit_trend(series: &PolarMotionSeries, cycles_per_year: f64) -> Result<TrendFit> {
    if series.len() < 5 {
        return Err(Error::arg(format!("trend fit needs >= 5 samples, got {}", series.len())));
    }
    if !cycles_per_year.is_finite() {
        return Err(Error::arg("frequency must be finite"));
    }
    let z: Vec<Complex64> = series
        .x()
        .iter()
        .zip(series.y())
        .map(|(a, b)| Complex64::new(*a, *b))
        .collect();
    let n = z.len() as f64;

    let (mean_hat, m_hat, confounded) = if cycles_per_year == 0.0 {
        (z.iter().sum::<Complex64>() / n, Complex64::new(0.0, 0.0), true)
    } else {
        let basis: Vec<Complex64> = series
            .epochs()
            .iter()
            .map(|t| Complex64::from_polar(1.0, 2.0 * PI * cycles_per_year * t))
            .collect();
        // Hermitian normal equations [[n, s], [conj(s), n]] [c, m] = [sum z, sum conj(e) z]
        let s: Complex64 = basis.iter().sum();
        let rhs0: Complex64 = z.iter().sum();
        let rhs1: Complex64 = basis.iter().zip(&z).map(|(e, zi)| e.conj() * zi).sum();
        let det = n * n - s.norm_sqr();
        if det <= 1e-10 * n * n {
            return Err(Error::Degenerate(format!(
                "periodic regressor is collinear with the constant (f = {cycles_per_year})"
            )));
        }
        let c = (n * rhs0 - s * rhs1) / det;
        let m = (n * rhs1 - s.conj() * rhs0) / det;
        (c, m, false)
    };

    let (mut rx, mut ry) = (Vec::with_capacity(z.len()), Vec::with_capacity(z.len()));
    for (t, zi) in series.epochs().iter().zip(&z) {
        let fitted = mean_hat + m_hat * Complex64::from_polar(1.0, 2.0 * PI * cycles_per_year * t);
        let r = zi - fitted;
        rx.push(r.re);
        ry.push(r.im);
    }
    Ok(TrendFit {
        mean_hat,
        m_hat,
        cycles_per_year,
        confounded,
        residuals: PolarMotionSeries::new(series.epochs().to_vec(), rx, ry)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    /// Damping rate, 1/yr.
    pub lambda_hat: f64,
    /// Angular frequency, rad/yr.
    pub omega_hat: f64,
    pub sigma_hat: f64,
    /// Periodic trend amplitude, when a trend was fitted.
    pub m_hat: Option<Complex64>,
    /// Constant offset, when a trend was fitted.
    pub mean_hat: Option<Complex64>,
    /// Least squares one-step regression matrix before projection.
    pub transition: [[f64; 2]; 2],
    /// Per-coordinate innovation variance.
    pub residual_variance: f64,
    pub samples: usize,
    /// `|omega_hat dt|` is within 0.05 rad of the Nyquist limit.
    pub aliasing_flag: bool,
    /// The fitted transition is indistinguishable from zero (white noise).
    pub low_confidence: bool,
}

/// Estimates `(lambda, omega, sigma)` from an equally spaced residual series.
///
/// The one-step regression `Y_{k+1} = B Y_k + eps` is fitted by least
/// squares and projected on the damped rotations
/// `e^{-lambda dt} [[cos w dt, sin w dt], [-sin w dt, cos w dt]]`.
pub fn estimate_ou(residuals: &[[f64; 2]], dt: f64) -> Result<EstimationResult> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::arg(format!("dt must be positive, got {dt}")));
    }
    if residuals.len() < 10 {
        return Err(Error::arg(format!(
            "estimation needs >= 10 samples, got {}",
            residuals.len()
        )));
    }
    let (mut sxx, mut syx) = ([[0.0; 2]; 2], [[0.0; 2]; 2]);
    for w in residuals.windows(2) {
        let (prev, next) = (w[0], w[1]);
        for r in 0..2 {
            for c in 0..2 {
                sxx[r][c] += prev[r] * prev[c];
                syx[r][c] += next[r] * prev[c];
            }
        }
    }
    let det = sxx[0][0] * sxx[1][1] - sxx[0][1] * sxx[1][0];
    if !(det > 0.0) {
        return Err(Error::Estimation("residual second moments are singular".into()));
    }
    let inv = [
        [sxx[1][1] / det, -sxx[0][1] / det],
        [-sxx[1][0] / det, sxx[0][0] / det],
    ];
    let mut b = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            b[r][c] = syx[r][0] * inv[0][c] + syx[r][1] * inv[1][c];
        }
    }

    let a = 0.5 * (b[0][0] + b[1][1]);
    let s = 0.5 * (b[0][1] - b[1][0]);
    let rho = a.hypot(s);
    if rho >= 1.0 {
        return Err(Error::Estimation(format!(
            "fitted transition is not contractive (|B| = {rho:.6}); residuals look non-stationary"
        )));
    }
    if rho == 0.0 {
        return Err(Error::Estimation("fitted transition vanishes".into()));
    }
    let lambda_hat = -rho.ln() / dt;
    let angle = s.atan2(a);
    let omega_hat = angle / dt;

    let steps = (residuals.len() - 1) as f64;
    let mut sse = 0.0;
    for w in residuals.windows(2) {
        let pred = [
            a * w[0][0] + s * w[0][1],
            -s * w[0][0] + a * w[0][1],
        ];
        sse += (w[1][0] - pred[0]).powi(2) + (w[1][1] - pred[1]).powi(2);
    }
    let residual_variance = sse / (2.0 * steps);
    // v = (sigma^2 / 2 lambda) (1 - rho^2)
    let sigma_hat = (2.0 * lambda_hat * residual_variance / (1.0 - rho * rho)).sqrt();

    Ok(EstimationResult {
        lambda_hat,
        omega_hat,
        sigma_hat,
        m_hat: None,
        mean_hat: None,
        transition: b,
        residual_variance,
        samples: residuals.len(),
        aliasing_flag: angle.abs() > PI - 0.05,
        low_confidence: rho < 3.0 / steps.sqrt(),
    })
}

/// Trend removal followed by [`estimate_ou`] on a regularly sampled series.
pub fn estimate_series(series: &PolarMotionSeries, cycles_per_year: f64) -> Result<(TrendFit, EstimationResult)> {
    let dt = series.regular_step(1e-6).ok_or_else(|| {
        Error::arg("series is not equally spaced; subset it to a regular grid first")
    })?;
    let fit = fit_trend(series, cycles_per_year)?;
    let mut est = estimate_ou(&fit.residuals.pairs(), dt)?;
    est.m_hat = Some(fit.m_hat);
    est.mean_hat = Some(fit.mean_hat);
    Ok((fit, est))
}
