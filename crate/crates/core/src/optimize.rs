//! Design optimization over the gap simplex, efficiency reports and
//! profile tables.
//!
//! Interior points are parameterized by `z` in `R^{n-2}`; the gaps are
//! `softmax(z_1, ..., z_{n-2}, 0)`, which are positive and sum to one, so the
//! ordering and endpoint constraints never need to be enforced explicitly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::logdet_c_closed;
use crate::error::{Error, Result};
use crate::imspe::{imspe_closed, BorderedMspe};
use crate::model::{Design, OuParams};
use crate::nelder_mead::{self, NmSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Minimize the IMSPE.
    Imspe,
    /// Maximize the entropy (equivalently `ln det C(n)`).
    Entropy,
}

impl std::str::FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "imspe" => Ok(Criterion::Imspe),
            "entropy" => Ok(Criterion::Entropy),
            other => Err(Error::arg(format!("unknown criterion `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub n_starts: usize,
    pub max_iters: usize,
    pub x_tol: f64,
    pub f_tol: f64,
    pub seed: u64,
    pub criterion: Criterion,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            n_starts: 16,
            max_iters: 20_000,
            x_tol: 1e-10,
            f_tol: 1e-15,
            seed: 0,
            criterion: Criterion::Imspe,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::arg("n_starts must be at least 1"));
        }
        if !(self.x_tol > 0.0 && self.f_tol > 0.0) {
            return Err(Error::arg("tolerances must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::arg("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Positive gaps summing to one.
pub fn gaps_from_unconstrained(z: &[f64]) -> Vec<f64> {
    let shift = z.iter().copied().fold(0.0_f64, f64::max);
    let mut g: Vec<f64> = z.iter().map(|v| (v - shift).exp()).collect();
    g.push((-shift).exp());
    let total: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= total);
    g
}

/// Criterion value in its natural orientation: IMSPE, or `ln det C(n)` for
/// the entropy criterion (the entropy up to a design-free constant).
pub fn criterion_value(design: &Design, params: &OuParams, criterion: Criterion) -> Result<f64> {
    match criterion {
        Criterion::Imspe => Ok(imspe_closed(design, params).value),
        Criterion::Entropy => logdet_c_closed(design, params),
    }
}

/// Value minimized by the search.
fn objective(design: &Design, params: &OuParams, criterion: Criterion) -> f64 {
    match criterion_value(design, params, criterion) {
        Ok(v) if criterion == Criterion::Imspe => v,
        Ok(v) => -v,
        Err(_) => f64::INFINITY,
    }
}

/// Record of one local search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub start: usize,
    pub initial_gaps: Vec<f64>,
    pub gaps: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimized {
    pub design: Design,
    /// Criterion value of `design` (see [`criterion_value`]).
    pub value: f64,
    pub trace: Vec<StartRecord>,
}

pub fn equispaced(n: usize) -> Result<Design> {
    Design::equispaced(n)
}

/// Multistart Nelder-Mead over the gap simplex.
///
/// Start 0 is the equispaced design; the others are drawn from a standard
/// normal in the unconstrained coordinates, each from its own stream of
/// `seed`. Among starts whose objective is within `f_tol` of the best, the
/// one with the smallest maximum gap wins (then the lowest start index).
pub fn optimize_design(n: usize, params: &OuParams, config: &OptimizerConfig) -> Result<Optimized> {
    config.validate()?;
    if n < 2 {
        return Err(Error::arg(format!("a design needs n >= 2, got {n}")));
    }
    if n == 2 {
        let design = Design::equispaced(2)?;
        let value = criterion_value(&design, params, config.criterion)?;
        let record = StartRecord {
            start: 0,
            initial_gaps: vec![1.0],
            gaps: vec![1.0],
            value,
            iterations: 0,
            evaluations: 1,
            converged: true,
        };
        return Ok(Optimized { design, value, trace: vec![record] });
    }

    let dim = n - 2;
    let settings = NmSettings {
        max_iters: config.max_iters,
        x_tol: config.x_tol,
        f_tol: config.f_tol,
        initial_step: 0.5,
    };

    let trace: Vec<StartRecord> = (0..config.n_starts)
        .into_par_iter()
        .map(|start| {
            let z0: Vec<f64> = if start == 0 {
                vec![0.0; dim]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(start as u64);
                (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
            };
            let eval = |z: &[f64]| {
                Design::from_gaps(&gaps_from_unconstrained(z))
                    .map(|d| objective(&d, params, config.criterion))
                    .unwrap_or(f64::INFINITY)
            };
            // restart from the returned vertex until the simplex stops moving
            let mut result = nelder_mead::minimize(eval, &z0, &settings);
            let mut iterations = result.iterations;
            let mut evaluations = result.evaluations;
            for _ in 0..3 {
                let again = nelder_mead::minimize(
                    eval,
                    &result.x,
                    &NmSettings { initial_step: 0.05, ..settings },
                );
                iterations += again.iterations;
                evaluations += again.evaluations;
                let improved = again.value < result.value;
                if improved {
                    result = again;
                } else {
                    result.converged &= again.converged;
                    break;
                }
            }
            let value = match config.criterion {
                Criterion::Imspe => result.value,
                Criterion::Entropy => -result.value,
            };
            StartRecord {
                start,
                initial_gaps: gaps_from_unconstrained(&z0),
                gaps: gaps_from_unconstrained(&result.x),
                value,
                iterations,
                evaluations,
                converged: result.converged && value.is_finite(),
            }
        })
        .collect();

    let oriented = |r: &StartRecord| match config.criterion {
        Criterion::Imspe => r.value,
        Criterion::Entropy => -r.value,
    };
    let finite: Vec<&StartRecord> = trace.iter().filter(|r| r.value.is_finite()).collect();
    let best_value = finite
        .iter()
        .map(|r| oriented(r))
        .fold(f64::INFINITY, f64::min);
    if !trace.iter().any(|r| r.converged) {
        return Err(Error::Convergence {
            message: format!("none of {} starts converged", config.n_starts),
            best: match config.criterion {
                Criterion::Imspe => best_value,
                Criterion::Entropy => -best_value,
            },
        });
    }
    let max_gap = |r: &StartRecord| r.gaps.iter().copied().fold(0.0, f64::max);
    let winner = finite
        .iter()
        .filter(|r| oriented(r) <= best_value + config.f_tol)
        .min_by(|a, b| max_gap(a).total_cmp(&max_gap(b)).then(a.start.cmp(&b.start)))
        .ok_or_else(|| Error::Convergence {
            message: "no start produced a finite criterion".into(),
            best: f64::NAN,
        })?;
    let design = Design::from_gaps(&winner.gaps)?;
    let value = criterion_value(&design, params, config.criterion)?;
    Ok(Optimized { design, value, trace })
}

/// Relative efficiency of the equispaced design for one `(params, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub n: usize,
    pub lambda: f64,
    pub omega: f64,
    pub imspe_optimal: f64,
    pub imspe_equispaced: f64,
    pub optimal_design: Vec<f64>,
    /// `100 * imspe_optimal / imspe_equispaced`.
    pub relative_efficiency_pct: f64,
}

pub fn efficiency_report(n: usize, params: &OuParams, config: &OptimizerConfig) -> Result<EfficiencyReport> {
    let config = OptimizerConfig {
        criterion: Criterion::Imspe,
        ..*config
    };
    let opt = optimize_design(n, params, &config)?;
    let equi = imspe_closed(&Design::equispaced(n)?, params).value;
    let optimal = opt.value;
    Ok(EfficiencyReport {
        n,
        lambda: params.lambda(),
        omega: params.omega(),
        imspe_optimal: optimal,
        imspe_equispaced: equi,
        optimal_design: opt.design.points().to_vec(),
        relative_efficiency_pct: 100.0 * optimal / equi,
    })
}

/// One report per `(params, n)`, parameter sets outermost.
pub fn efficiency_table(
    param_sets: &[OuParams],
    n_values: &[usize],
    config: &OptimizerConfig,
) -> Result<Vec<EfficiencyReport>> {
    if param_sets.is_empty() || n_values.is_empty() {
        return Err(Error::arg("parameter sets and sample sizes must be nonempty"));
    }
    param_sets
        .iter()
        .flat_map(|p| n_values.iter().map(move |n| (p, *n)))
        .map(|(p, n)| efficiency_report(n, p, config))
        .collect()
}

/// A reference cell for the three estimated parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceCell {
    pub label: &'static str,
    pub lambda: f64,
    pub omega: f64,
    pub n: usize,
    pub imspe_optimal: f64,
    pub imspe_equispaced: f64,
    pub efficiency_pct: f64,
}

const fn cell(
    label: &'static str,
    lambda: f64,
    omega: f64,
    n: usize,
    opt: f64,
    equi: f64,
    eff: f64,
) -> ReferenceCell {
    ReferenceCell {
        label,
        lambda,
        omega,
        n,
        imspe_optimal: opt,
        imspe_equispaced: equi,
        efficiency_pct: eff,
    }
}

/// Reference efficiencies of the equispaced design for parameters estimated
/// from 2017, 2016 and 2015 polar motion (absolute IMSPE values carry an
/// unknown scale).
pub const REFERENCE_TABLE: [ReferenceCell; 9] = [
    cell("2017", 2.4522, -4.1274, 3, 11416.0, 11416.0, 100.0),
    cell("2017", 2.4522, -4.1274, 4, 14724.0, 15470.0, 95.18),
    cell("2017", 2.4522, -4.1274, 5, 14152.0, 20226.0, 69.97),
    cell("2016", 4.9968, -0.3561, 3, 33633.0, 33633.0, 100.0),
    cell("2016", 4.9968, -0.3561, 4, 25472.0, 25473.0, 99.99),
    cell("2016", 4.9968, -0.3561, 5, 16305.0, 16320.0, 99.91),
    cell("2015", 4.9366, -5.7767, 3, 18388.0, 18388.0, 100.0),
    cell("2015", 4.9366, -5.7767, 4, 16959.0, 17977.0, 94.34),
    cell("2015", 4.9366, -5.7767, 5, 11785.0, 11785.0, 89.15),
];

/// Comparison of one computed cell against [`REFERENCE_TABLE`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub label: &'static str,
    pub n: usize,
    pub lambda: f64,
    pub omega: f64,
    pub computed_efficiency_pct: f64,
    pub reference_efficiency_pct: f64,
    pub deviation_pp: f64,
    pub within_tolerance: bool,
    pub computed_imspe_optimal: f64,
    pub computed_imspe_equispaced: f64,
    pub reference_imspe_optimal: f64,
    pub reference_imspe_equispaced: f64,
    /// The reference efficiency disagrees with its own IMSPE ratio.
    pub reference_internally_inconsistent: bool,
}

pub fn compare_with_reference(reports: &[EfficiencyReport], tolerance_pp: f64) -> Vec<Discrepancy> {
    REFERENCE_TABLE
        .iter()
        .filter_map(|r| {
            let c = reports
                .iter()
                .find(|c| c.n == r.n && c.lambda == r.lambda && c.omega == r.omega)?;
            let deviation = c.relative_efficiency_pct - r.efficiency_pct;
            let ratio = 100.0 * r.imspe_optimal / r.imspe_equispaced;
            Some(Discrepancy {
                label: r.label,
                n: r.n,
                lambda: r.lambda,
                omega: r.omega,
                computed_efficiency_pct: c.relative_efficiency_pct,
                reference_efficiency_pct: r.efficiency_pct,
                deviation_pp: deviation,
                within_tolerance: deviation.abs() <= tolerance_pp,
                computed_imspe_optimal: c.imspe_optimal,
                computed_imspe_equispaced: c.imspe_equispaced,
                reference_imspe_optimal: r.imspe_optimal,
                reference_imspe_equispaced: r.imspe_equispaced,
                reference_internally_inconsistent: (ratio - r.efficiency_pct).abs() > 0.01,
            })
        })
        .collect()
}

/// A reference parameter set whose optimal IMSPE grows when a point is added,
/// which no design criterion can do (the larger design may reuse the smaller).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityViolation {
    pub label: &'static str,
    pub n_from: usize,
    pub n_to: usize,
    pub imspe_from: f64,
    pub imspe_to: f64,
}

pub fn reference_monotonicity_violations() -> Vec<MonotonicityViolation> {
    REFERENCE_TABLE
        .windows(2)
        .filter(|w| w[0].label == w[1].label && w[1].imspe_optimal > w[0].imspe_optimal)
        .map(|w| MonotonicityViolation {
            label: w[0].label,
            n_from: w[0].n,
            n_to: w[1].n,
            imspe_from: w[0].imspe_optimal,
            imspe_to: w[1].imspe_optimal,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub x: f64,
    pub mspe: f64,
}

/// MSPE on a uniform grid of `grid_size` points, merged with the design
/// points so the interpolation zeros appear in the table.
pub fn mspe_profile(design: &Design, params: &OuParams, grid_size: usize) -> Result<Vec<ProfilePoint>> {
    if grid_size < 2 {
        return Err(Error::arg("grid_size must be at least 2"));
    }
    let h = (grid_size - 1) as f64;
    let mut xs: Vec<f64> = (0..grid_size).map(|k| k as f64 / h).collect();
    xs.extend_from_slice(design.points());
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mspe = BorderedMspe::new(design, params)?;
    xs.into_iter()
        .map(|x| Ok(ProfilePoint { x, mspe: mspe.eval(x)? }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub lambda: f64,
    pub omega: f64,
    pub imspe: f64,
}

/// IMSPE of the `n`-point equispaced design over a `lambda x omega` grid,
/// `lambda` outermost.
pub fn imspe_surface(n: usize, lambdas: &[f64], omegas: &[f64]) -> Result<Vec<SurfacePoint>> {
    let design = Design::equispaced(n)?;
    let mut out = Vec::with_capacity(lambdas.len() * omegas.len());
    for &lambda in lambdas {
        for &omega in omegas {
            let p = OuParams::new(lambda, omega)?;
            out.push(SurfacePoint {
                lambda,
                omega,
                imspe: imspe_closed(&design, &p).value,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub d: f64,
    pub imspe: f64,
}

/// IMSPE of `{0, d, 1}` for `d = k / grid_size`, `k = 1 .. grid_size - 1`.
pub fn three_point_sweep(params: &OuParams, grid_size: usize) -> Result<Vec<SweepPoint>> {
    if grid_size < 2 {
        return Err(Error::arg("grid_size must be at least 2"));
    }
    (1..grid_size)
        .map(|k| {
            let d = k as f64 / grid_size as f64;
            let design = Design::new(vec![0.0, d, 1.0])?;
            Ok(SweepPoint { d, imspe: imspe_closed(&design, params).value })
        })
        .collect()
}

/// Grid of `count` equally spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_gaps_are_feasible() {
        for z in [vec![0.0, 0.0], vec![700.0, -700.0], vec![-3.0, 12.0, 0.5]] {
            let g = gaps_from_unconstrained(&z);
            assert_eq!(g.len(), z.len() + 1);
            assert!(g.iter().all(|v| *v >= 0.0));
            assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn criterion_parsing() {
        assert_eq!("IMSPE".parse::<Criterion>().unwrap(), Criterion::Imspe);
        assert_eq!("entropy".parse::<Criterion>().unwrap(), Criterion::Entropy);
        assert!("maximin".parse::<Criterion>().is_err());
    }

    #[test]
    fn two_point_design_is_forced() {
        let p = OuParams::new(1.0, 1.0).unwrap();
        let r = optimize_design(2, &p, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.design.points(), &[0.0, 1.0]);
    }

    #[test]
    fn invalid_config() {
        let p = OuParams::new(1.0, 1.0).unwrap();
        let bad = OptimizerConfig { n_starts: 0, ..Default::default() };
        assert!(optimize_design(4, &p, &bad).is_err());
    }

    #[test]
    fn reference_monotonicity_flags_one_step() {
        let v = reference_monotonicity_violations();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].label, v[0].n_from, v[0].n_to), ("2017", 3, 4));
    }

    #[test]
    fn reference_table_flags_inconsistent_cell() {
        let fake: Vec<EfficiencyReport> = REFERENCE_TABLE
            .iter()
            .map(|r| EfficiencyReport {
                n: r.n,
                lambda: r.lambda,
                omega: r.omega,
                imspe_optimal: 1.0,
                imspe_equispaced: 1.0,
                optimal_design: vec![],
                relative_efficiency_pct: 100.0,
            })
            .collect();
        let d = compare_with_reference(&fake, 1.0);
        assert_eq!(d.len(), 9);
        let bad: Vec<_> = d.iter().filter(|c| c.reference_internally_inconsistent).collect();
        assert_eq!(bad.len(), 1);
        assert_eq!((bad[0].label, bad[0].n), ("2015", 5));
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.5, 5.0, 10).first(), Some(&0.5));
        assert_eq!(linspace(0.5, 5.0, 10).last(), Some(&5.0));
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
    }
}
