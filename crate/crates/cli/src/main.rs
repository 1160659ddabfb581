//! `ou-design` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or network failure, 2 usage or validation,
//! 3 optimizer non-convergence, 4 malformed input data.

mod output;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ou_design::entropy::{determinant_diagnostic, entropy, DeterminantDiagnostic, EntropyValue};
use ou_design::imspe::{imspe_closed, imspe_quadrature, scalar_ou_imspe_quadrature, ImspeBreakdown};
use ou_design::optimize::{
    compare_with_reference, efficiency_table, imspe_surface, linspace, mspe_profile, optimize_design,
    reference_monotonicity_violations, three_point_sweep, Criterion, Discrepancy, MonotonicityViolation,
    OptimizerConfig, StartRecord, REFERENCE_TABLE,
};
use ou_design::polar::{estimate_series, parse_eop, ColumnConfig, EstimationResult, FrequencyPreset};
use ou_design::report::{fmt_num, CsvTable};
use ou_design::simulate::{regular_times, simulate};
use ou_design::{Design, OuParams};

use output::{emit, emit_manifest_for_files, Artifact, Run};

#[derive(Debug)]
pub enum CliError {
    Lib(ou_design::Error),
    Io(String, std::io::Error),
    Usage(String),
    Network(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use ou_design::Error as E;
        match self {
            CliError::Lib(E::Convergence { .. }) => 3,
            CliError::Lib(E::Format(_)) => 4,
            CliError::Lib(_) | CliError::Usage(_) => 2,
            CliError::Io(..) | CliError::Network(_) | CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{path}: {e}"),
            CliError::Usage(m) | CliError::Network(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<ou_design::Error> for CliError {
    fn from(e: ou_design::Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "ou-design", version, about = "Optimal sampling designs for complex OU processes")]
struct Cli {
    /// Write outputs and manifest.json into this directory instead of stdout.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form IMSPE of a design, optionally checked by quadrature.
    Imspe(ImspeArgs),
    /// Entropy and determinant diagnostics of a design.
    Entropy(EntropyArgs),
    /// Optimal design for a criterion.
    Optimize(OptimizeArgs),
    /// Relative efficiency of equispaced designs for the reference parameter sets.
    Table1(Table1Args),
    /// Pointwise MSPE over [0, 1].
    Profile(ProfileArgs),
    /// IMSPE of the equispaced design over a (lambda, omega) grid.
    Surface(SurfaceArgs),
    /// IMSPE of {0, d, 1} over a grid of d.
    Sweep(SweepArgs),
    /// Sample paths of the process on a regular grid.
    Simulate(SimulateArgs),
    /// Trend fit and parameter estimation from a pole-coordinate file.
    Estimate(EstimateArgs),
    /// Download a pole-coordinate file.
    Fetch(FetchArgs),
}

#[derive(Args, Debug, Serialize)]
struct DesignArgs {
    /// Number of equispaced points.
    #[arg(long, required_unless_present = "design", conflicts_with = "design")]
    n: Option<usize>,
    /// Explicit comma-separated design points, e.g. 0,0.5,1.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    design: Option<Vec<f64>>,
}

impl DesignArgs {
    fn build(&self) -> CliResult<Design> {
        match (&self.design, self.n) {
            (Some(points), _) => Ok(Design::new(points.clone())?),
            (None, Some(n)) => Ok(Design::equispaced(n)?),
            (None, None) => Err(CliError::Usage("either --n or --design is required".into())),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct ProcessArgs {
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, allow_negative_numbers = true)]
    omega: f64,
}

impl ProcessArgs {
    fn params(&self) -> CliResult<OuParams> {
        Ok(OuParams::new(self.lambda, self.omega)?)
    }
}

#[derive(Args, Debug, Serialize)]
struct ImspeArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    process: ProcessArgs,
    /// Also integrate the MSPE numerically.
    #[arg(long)]
    oracle: bool,
    /// Quadrature tolerance for --oracle.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Serialize)]
struct EntropyArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    process: ProcessArgs,
    /// Diffusion scale; unit variance when omitted.
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct OptimizeArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long, value_enum, default_value_t = CriterionArg::Imspe)]
    criterion: CriterionArg,
    #[arg(long, default_value_t = 16)]
    starts: usize,
    #[arg(long, env = "OU_DESIGN_SEED", default_value_t = 0)]
    seed: u64,
    /// Include the per-start search records.
    #[arg(long)]
    trace: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum CriterionArg {
    Imspe,
    Entropy,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Imspe => Criterion::Imspe,
            CriterionArg::Entropy => Criterion::Entropy,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct Table1Args {
    #[arg(long, default_value_t = 16)]
    starts: usize,
    #[arg(long, env = "OU_DESIGN_SEED", default_value_t = 0)]
    seed: u64,
    /// Allowed deviation from the reference efficiencies, percentage points.
    #[arg(long, default_value_t = 1.0)]
    tolerance_pp: f64,
}

#[derive(Args, Debug, Serialize)]
struct ProfileArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    process: ProcessArgs,
    #[arg(long, default_value_t = 201)]
    grid: usize,
}

#[derive(Args, Debug, Serialize)]
struct SurfaceArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    lambda_min: f64,
    #[arg(long, default_value_t = 5.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 46)]
    lambda_steps: usize,
    #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
    omega_min: f64,
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    omega_max: f64,
    #[arg(long, default_value_t = 61)]
    omega_steps: usize,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// d runs over k / grid for k = 1 .. grid - 1.
    #[arg(long, default_value_t = 1000)]
    grid: usize,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// Diffusion scale; unit variance when omitted.
    #[arg(long)]
    sigma: Option<f64>,
    /// Real part of the trend mean.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    m1: f64,
    /// Imaginary part of the trend mean.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    m2: f64,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    /// Samples per path.
    #[arg(long, default_value_t = 100)]
    len: usize,
    #[arg(long, default_value_t = 1)]
    paths: usize,
    #[arg(long, env = "OU_DESIGN_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum PresetArg {
    Annual,
    Chandler,
}

#[derive(Args, Debug, Serialize)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = PresetArg::Annual)]
    freq_preset: PresetArg,
    /// Trend frequency in cycles per year; overrides --freq-preset.
    #[arg(long)]
    freq: Option<f64>,
    /// 0-based epoch, x, y columns.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0, 1, 3])]
    columns: Vec<usize>,
    /// Keep only samples on a regular grid with this step (years).
    #[arg(long)]
    subset_dt: Option<f64>,
    /// Also emit the residual series as CSV.
    #[arg(long)]
    residuals: bool,
}

#[derive(Args, Debug, Serialize)]
struct FetchArgs {
    #[arg(long)]
    url: String,
    #[arg(long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run_record<T: Serialize>(command: &'static str, args: &T, seed: Option<u64>) -> CliResult<Run> {
    Ok(Run {
        command,
        parameters: serde_json::to_value(args).map_err(|e| CliError::Internal(e.to_string()))?,
        seed,
        started: Instant::now(),
    })
}

fn run(cli: Cli) -> CliResult<()> {
    let out = cli.out_dir.as_deref();
    match &cli.command {
        Command::Imspe(a) => finish(run_record("imspe", a, None)?, cmd_imspe(a)?, out),
        Command::Entropy(a) => finish(run_record("entropy", a, None)?, cmd_entropy(a)?, out),
        Command::Optimize(a) => finish(run_record("optimize", a, Some(a.seed))?, cmd_optimize(a)?, out),
        Command::Table1(a) => finish(run_record("table1", a, Some(a.seed))?, cmd_table1(a)?, out),
        Command::Profile(a) => finish(run_record("profile", a, None)?, cmd_profile(a)?, out),
        Command::Surface(a) => finish(run_record("surface", a, None)?, cmd_surface(a)?, out),
        Command::Sweep(a) => finish(run_record("sweep", a, None)?, cmd_sweep(a)?, out),
        Command::Simulate(a) => finish(run_record("simulate", a, Some(a.seed))?, cmd_simulate(a)?, out),
        Command::Estimate(a) => finish(run_record("estimate", a, None)?, cmd_estimate(a)?, out),
        Command::Fetch(a) => cmd_fetch(run_record("fetch", a, None)?, a, out),
    }
}

fn finish(run: Run, artifacts: Vec<Artifact>, out: Option<&Path>) -> CliResult<()> {
    emit(&run, &artifacts, out)
}

#[derive(Serialize)]
struct ImspeReport<'a> {
    lambda: f64,
    omega: f64,
    design: &'a [f64],
    #[serde(flatten)]
    breakdown: &'a ImspeBreakdown,
    imspe_quadrature: Option<f64>,
    relative_gap: Option<f64>,
    /// Twice the scalar real-OU IMSPE; reported at omega = 0 with --oracle.
    scalar_oracle_doubled: Option<f64>,
}

fn cmd_imspe(a: &ImspeArgs) -> CliResult<Vec<Artifact>> {
    let design = a.design.build()?;
    let params = a.process.params()?;
    let breakdown = imspe_closed(&design, &params);
    let (quad, gap, scalar) = if a.oracle {
        let q = imspe_quadrature(&design, &params, a.tol)?;
        let scalar = if params.omega() == 0.0 {
            Some(2.0 * scalar_ou_imspe_quadrature(&design, params.lambda(), a.tol)?)
        } else {
            None
        };
        (Some(q), Some((breakdown.value - q).abs() / breakdown.value), scalar)
    } else {
        (None, None, None)
    };
    let report = ImspeReport {
        lambda: params.lambda(),
        omega: params.omega(),
        design: design.points(),
        breakdown: &breakdown,
        imspe_quadrature: quad,
        relative_gap: gap,
        scalar_oracle_doubled: scalar,
    };
    if a.json {
        return Ok(vec![Artifact::json("imspe.json", &report)?]);
    }
    let mut t = CsvTable::new(["quantity", "value"]);
    let mut row = |k: &str, v: f64| t.push_raw(vec![k.to_string(), fmt_num(v)]);
    row("imspe", breakdown.value);
    row("g_total", breakdown.g_total);
    row("a_n", breakdown.a_n);
    row("b_n", breakdown.b_n);
    row("b_base", breakdown.b_terms.base);
    row("b_cross", breakdown.b_terms.cross);
    row("b_tail", breakdown.b_terms.tail);
    row("b_diagonal", breakdown.b_terms.diagonal);
    row("b_pairwise", breakdown.b_terms.pairwise);
    for (k, v) in [("imspe_quadrature", quad), ("relative_gap", gap), ("scalar_oracle_doubled", scalar)] {
        if let Some(v) = v {
            row(k, v);
        }
    }
    Ok(vec![Artifact::new("imspe.csv", t.to_csv())])
}

#[derive(Serialize)]
struct EntropyReport<'a> {
    lambda: f64,
    omega: f64,
    sigma: f64,
    design: &'a [f64],
    entropy: EntropyValue,
    determinant: DeterminantDiagnostic,
}

fn cmd_entropy(a: &EntropyArgs) -> CliResult<Vec<Artifact>> {
    let design = a.design.build()?;
    let params = match a.sigma {
        Some(s) => OuParams::with_sigma(a.process.lambda, a.process.omega, s)?,
        None => a.process.params()?,
    };
    let diag = determinant_diagnostic(&design, &params)?;
    if diag.single_factor_undefined_regime {
        eprintln!(
            "warning: a gap is at most ln 2 / (2 lambda) = {:.6}; the single-factor determinant form is undefined there",
            std::f64::consts::LN_2 / (2.0 * params.lambda())
        );
    }
    let report = EntropyReport {
        lambda: params.lambda(),
        omega: params.omega(),
        sigma: params.sigma(),
        design: design.points(),
        entropy: entropy(&design, &params)?,
        determinant: diag,
    };
    Ok(vec![Artifact::json("entropy.json", &report)?])
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    criterion: Criterion,
    n: usize,
    lambda: f64,
    omega: f64,
    seed: u64,
    starts: usize,
    design: &'a [f64],
    gaps: &'a [f64],
    /// IMSPE, or ln det C(n) for the entropy criterion.
    value: f64,
    equispaced_value: f64,
    converged_starts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [StartRecord]>,
}

fn cmd_optimize(a: &OptimizeArgs) -> CliResult<Vec<Artifact>> {
    let params = a.process.params()?;
    let config = OptimizerConfig {
        n_starts: a.starts,
        seed: a.seed,
        criterion: a.criterion.into(),
        ..OptimizerConfig::default()
    };
    let opt = optimize_design(a.n, &params, &config)?;
    let equi = ou_design::optimize::criterion_value(&Design::equispaced(a.n)?, &params, config.criterion)?;
    let report = OptimizeReport {
        criterion: config.criterion,
        n: a.n,
        lambda: params.lambda(),
        omega: params.omega(),
        seed: a.seed,
        starts: a.starts,
        design: opt.design.points(),
        gaps: opt.design.gaps(),
        value: opt.value,
        equispaced_value: equi,
        converged_starts: opt.trace.iter().filter(|r| r.converged).count(),
        trace: a.trace.then_some(opt.trace.as_slice()),
    };
    Ok(vec![Artifact::json("optimize.json", &report)?])
}

#[derive(Serialize)]
struct Table1Report {
    tolerance_pp: f64,
    cells: Vec<Discrepancy>,
    out_of_tolerance: usize,
    reference_inconsistent_cells: usize,
    reference_monotonicity_violations: Vec<MonotonicityViolation>,
}

fn cmd_table1(a: &Table1Args) -> CliResult<Vec<Artifact>> {
    let config = OptimizerConfig {
        n_starts: a.starts,
        seed: a.seed,
        ..OptimizerConfig::default()
    };
    let mut sets = Vec::new();
    for r in REFERENCE_TABLE.iter() {
        if !sets.iter().any(|(l, _): &(&str, OuParams)| *l == r.label) {
            sets.push((r.label, OuParams::new(r.lambda, r.omega)?));
        }
    }
    let params: Vec<OuParams> = sets.iter().map(|(_, p)| *p).collect();
    let reports = efficiency_table(&params, &[3, 4, 5], &config)?;
    let cells = compare_with_reference(&reports, a.tolerance_pp);

    let mut t = CsvTable::new([
        "label",
        "lambda",
        "omega",
        "n",
        "imspe_optimal",
        "imspe_equispaced",
        "efficiency_pct",
        "reference_efficiency_pct",
        "deviation_pp",
        "within_tolerance",
        "optimal_design",
    ]);
    for (c, r) in cells.iter().zip(&reports) {
        t.push_raw(vec![
            c.label.to_string(),
            fmt_num(c.lambda),
            fmt_num(c.omega),
            c.n.to_string(),
            fmt_num(c.computed_imspe_optimal),
            fmt_num(c.computed_imspe_equispaced),
            fmt_num(c.computed_efficiency_pct),
            fmt_num(c.reference_efficiency_pct),
            fmt_num(c.deviation_pp),
            c.within_tolerance.to_string(),
            r.optimal_design.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(";"),
        ]);
    }
    let report = Table1Report {
        tolerance_pp: a.tolerance_pp,
        out_of_tolerance: cells.iter().filter(|c| !c.within_tolerance).count(),
        reference_inconsistent_cells: cells.iter().filter(|c| c.reference_internally_inconsistent).count(),
        reference_monotonicity_violations: reference_monotonicity_violations(),
        cells,
    };
    Ok(vec![
        Artifact::new("table1.csv", t.to_csv()),
        Artifact::json("table1_discrepancies.json", &report)?,
    ])
}

fn cmd_profile(a: &ProfileArgs) -> CliResult<Vec<Artifact>> {
    let design = a.design.build()?;
    let params = a.process.params()?;
    let mut t = CsvTable::new(["x", "mspe"]);
    for p in mspe_profile(&design, &params, a.grid)? {
        t.push_numbers(&[p.x, p.mspe]);
    }
    Ok(vec![Artifact::new("profile.csv", t.to_csv())])
}

fn cmd_surface(a: &SurfaceArgs) -> CliResult<Vec<Artifact>> {
    if a.lambda_steps == 0 || a.omega_steps == 0 {
        return Err(CliError::Usage("grid steps must be positive".into()));
    }
    let lambdas = linspace(a.lambda_min, a.lambda_max, a.lambda_steps);
    let omegas = linspace(a.omega_min, a.omega_max, a.omega_steps);
    let mut t = CsvTable::new(["lambda", "omega", "imspe"]);
    for p in imspe_surface(a.n, &lambdas, &omegas)? {
        t.push_numbers(&[p.lambda, p.omega, p.imspe]);
    }
    Ok(vec![Artifact::new("surface.csv", t.to_csv())])
}

fn cmd_sweep(a: &SweepArgs) -> CliResult<Vec<Artifact>> {
    let params = a.process.params()?;
    let mut t = CsvTable::new(["d", "imspe"]);
    for p in three_point_sweep(&params, a.grid)? {
        t.push_numbers(&[p.d, p.imspe]);
    }
    Ok(vec![Artifact::new("sweep.csv", t.to_csv())])
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<Vec<Artifact>> {
    let params = match a.sigma {
        Some(s) => OuParams::with_sigma(a.process.lambda, a.process.omega, s)?,
        None => a.process.params()?,
    }
    .with_trend(a.m1, a.m2);
    if a.len == 0 {
        return Err(CliError::Usage("--len must be positive".into()));
    }
    let times = regular_times(a.len, a.dt);
    let paths = simulate(&params, &times, a.seed, a.paths)?;
    let mut t = CsvTable::new(["path", "t", "x", "y"]);
    for (k, path) in paths.iter().enumerate() {
        for (ti, z) in times.iter().zip(path) {
            t.push_raw(vec![k.to_string(), fmt_num(*ti), fmt_num(z[0]), fmt_num(z[1])]);
        }
    }
    Ok(vec![Artifact::new("simulate.csv", t.to_csv())])
}

#[derive(Serialize)]
struct EstimateReport {
    input: String,
    rows: usize,
    duplicates: usize,
    skipped: usize,
    samples: usize,
    dt: f64,
    cycles_per_year: f64,
    trend_confounded: bool,
    estimate: EstimationResult,
}

fn cmd_estimate(a: &EstimateArgs) -> CliResult<Vec<Artifact>> {
    let file = File::open(&a.input).map_err(|e| CliError::Io(a.input.display().to_string(), e))?;
    let cols = ColumnConfig {
        epoch: a.columns[0],
        x: a.columns[1],
        y: a.columns[2],
    };
    let parsed = parse_eop(BufReader::new(file), cols)?;
    let series = match a.subset_dt {
        Some(dt) => parsed.series.subset_regular(dt, 1e-6 * dt.max(1.0))?,
        None => parsed.series.clone(),
    };
    let f = a.freq.unwrap_or(match a.freq_preset {
        PresetArg::Annual => FrequencyPreset::Annual,
        PresetArg::Chandler => FrequencyPreset::Chandler,
    }
    .cycles_per_year());
    let (fit, est) = estimate_series(&series, f)?;
    if est.low_confidence {
        eprintln!("warning: the fitted transition is indistinguishable from zero; estimates are low confidence");
    }
    if est.aliasing_flag {
        eprintln!("warning: the fitted rotation per step is near the Nyquist limit");
    }
    let mut artifacts = vec![Artifact::json(
        "estimate.json",
        &EstimateReport {
            input: a.input.display().to_string(),
            rows: parsed.rows,
            duplicates: parsed.duplicates,
            skipped: parsed.skipped,
            samples: series.len(),
            dt: series.regular_step(1e-6).unwrap_or(f64::NAN),
            cycles_per_year: f,
            trend_confounded: fit.confounded,
            estimate: est,
        },
    )?];
    if a.residuals {
        let r = &fit.residuals;
        let mut t = CsvTable::new(["epoch", "x", "y"]);
        for i in 0..r.len() {
            t.push_numbers(&[r.epochs()[i], r.x()[i], r.y()[i]]);
        }
        artifacts.push(Artifact::new("residuals.csv", t.to_csv()));
    }
    Ok(artifacts)
}

fn cmd_fetch(run: Run, a: &FetchArgs, out: Option<&Path>) -> CliResult<()> {
    let mut response = ureq::get(&a.url)
        .call()
        .map_err(|e| CliError::Network(format!("{}: {e}", a.url)))?;
    let body = response
        .body_mut()
        .with_config()
        .limit(256 * 1024 * 1024)
        .read_to_vec()
        .map_err(|e| CliError::Network(format!("{}: {e}", a.url)))?;
    std::fs::write(&a.output, &body).map_err(|e| CliError::Io(a.output.display().to_string(), e))?;
    let name = a.output.display().to_string();
    emit_manifest_for_files(&run, &[(name.as_str(), body.as_slice())], out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("ou-design").chain(args.iter().copied())).unwrap()
    }

    fn json_of(artifact: &Artifact) -> serde_json::Value {
        serde_json::from_str(&artifact.content).unwrap()
    }

    fn artifacts(args: &[&str]) -> CliResult<Vec<Artifact>> {
        match parse(args).command {
            Command::Imspe(a) => cmd_imspe(&a),
            Command::Entropy(a) => cmd_entropy(&a),
            Command::Optimize(a) => cmd_optimize(&a),
            Command::Profile(a) => cmd_profile(&a),
            Command::Estimate(a) => cmd_estimate(&a),
            other => panic!("not covered here: {other:?}"),
        }
    }

    fn excerpt() -> String {
        format!("{}/data/eop_c01_2015_2017_synthetic.txt", env!("CARGO_MANIFEST_DIR"))
    }

    #[test]
    fn imspe_oracle_gap_is_small() {
        let out = artifacts(&["imspe", "--design", "0,0.5,1", "--lambda", "1", "--omega", "4", "--oracle", "--json"]).unwrap();
        let v = json_of(&out[0]);
        assert!(v["relative_gap"].as_f64().unwrap() < 1e-6);
    }

    #[test]
    fn imspe_zero_frequency_reports_scalar_oracle() {
        let out = artifacts(&["imspe", "--n", "3", "--lambda", "1", "--omega", "0", "--oracle", "--json"]).unwrap();
        let v = json_of(&out[0]);
        let closed = v["value"].as_f64().unwrap();
        let scalar = v["scalar_oracle_doubled"].as_f64().unwrap();
        assert!((closed - scalar).abs() < 1e-6 * closed);
    }

    #[test]
    fn two_point_design_is_valid() {
        let out = artifacts(&["imspe", "--design", "0,1", "--lambda", "1", "--omega", "-2"]).unwrap();
        assert!(out[0].content.starts_with("quantity,value\nimspe,"));
    }

    #[test]
    fn invalid_design_exits_with_validation_code() {
        let err = artifacts(&["imspe", "--design", "0,0.7,0.5,1", "--lambda", "1", "--omega", "1"])
            .err()
            .unwrap();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn optimize_three_points() {
        let out = artifacts(&["optimize", "--n", "3", "--lambda", "1", "--omega", "4"]).unwrap();
        let v = json_of(&out[0]);
        let d: Vec<f64> = serde_json::from_value(v["design"].clone()).unwrap();
        assert!((d[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn optimize_entropy_is_equispaced() {
        let out = artifacts(&["optimize", "--n", "6", "--lambda", "2", "--omega", "1", "--criterion", "entropy"]).unwrap();
        let gaps: Vec<f64> = serde_json::from_value(json_of(&out[0])["gaps"].clone()).unwrap();
        assert!(gaps.iter().all(|g| (g - 0.2).abs() < 1e-6));
    }

    #[test]
    fn profile_has_zeros_at_design_points() {
        let out = artifacts(&["profile", "--design", "0,0.3,1", "--lambda", "2", "--omega", "1", "--grid", "11"]).unwrap();
        for line in out[0].content.lines().skip(1) {
            let (x, m) = line.split_once(',').unwrap();
            let (x, m): (f64, f64) = (x.parse().unwrap(), m.parse().unwrap());
            if [0.0, 0.3, 1.0].contains(&x) {
                assert!(m.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn estimate_on_vendored_excerpt() {
        let path = excerpt();
        let out = artifacts(&["estimate", "--input", &path, "--residuals"]).unwrap();
        let v = json_of(&out[0]);
        let data_lines = std::fs::read_to_string(&path)
            .unwrap()
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .count();
        assert_eq!(v["rows"].as_u64().unwrap() as usize, data_lines);
        let lambda = v["estimate"]["lambda_hat"].as_f64().unwrap();
        assert!(lambda > 0.0 && lambda.is_finite());
        assert!(v["estimate"]["sigma_hat"].as_f64().unwrap().is_finite());
        assert_eq!(out[1].content.lines().count(), data_lines + 1);
    }

    #[test]
    fn malformed_input_exits_with_format_code() {
        let path = std::env::temp_dir().join(format!("ou-design-bad-{}.txt", std::process::id()));
        std::fs::write(&path, "# nothing numeric\nfoo bar baz\n").unwrap();
        let err = artifacts(&["estimate", "--input", path.to_str().unwrap()]).err().unwrap();
        let _ = std::fs::remove_file(&path);
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn convergence_failure_code() {
        let e = CliError::Lib(ou_design::Error::Convergence { message: "x".into(), best: 1.0 });
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn design_and_n_conflict() {
        let r = Cli::try_parse_from(["ou-design", "imspe", "--n", "3", "--design", "0,1", "--lambda", "1", "--omega", "1"]);
        assert_eq!(r.unwrap_err().exit_code(), 2);
    }
}
