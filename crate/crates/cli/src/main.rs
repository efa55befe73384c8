//! `evolv`: batch analyzer for constant-coefficient evolution operators.
//!
//! Three subcommands cover the workflow. `analyze` decides whether the real
//! parts of the dispersion roots are bounded, estimates the spectral bound,
//! and fits the constrained-supremum growth curve. `fundsol` builds the
//! causal fundamental solution on a grid via the shifted-line inversion and
//! runs the verification battery against it. `solve` convolves a stored
//! right-hand side with the fundamental solution. All three print a JSON
//! report; exit codes encode the verdict so shell pipelines can branch
//! without parsing anything:
//!
//! * 0: success (for `analyze`: bounded)
//! * 1: usage, parse or I/O error
//! * 2: unbounded
//! * 3: undetermined
//! * 4: the requested line touches the spectrum (shift too small)
//! * 5: right-hand side violates the causal support requirement

mod battery;
mod charts;
mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use evolv_core::{
    build_fundamental_solution, check_log_region, convolution_solve_with_residual,
    estimate_omega0, exact_verdict_with_depth, fit_growth, min_modulus_scan, parse_operator,
    petrovskii_verdict_exact_1d, read_gfield, sigma_curve, write_gfield, Classification,
    GridError, GridSpec, LogRegion, OmegaBound, OperatorSymbol, PetrovskiiVerdict,
    QuadratureConfig, SamplerBudget, Window, DEFAULT_BUDGET, MIN_MODULUS_REL,
};

use report::{
    AnalysisReport, ConfigEcho, Figures, LogRegionReport, OperatorEcho, SigmaCurveReport,
    SolveReport, Timings, Verdicts, ANALYSIS_SCHEMA, SOLVE_RESIDUAL_TOL, SOLVE_SCHEMA,
};

const EXIT_UNBOUNDED: i32 = 2;
const EXIT_UNDETERMINED: i32 = 3;
const EXIT_SIGMA: i32 = 4;
const EXIT_SUPPORT: i32 = 5;

/// Radii for the growth curve: dyadic from 1 to 1024.
const CURVE_RADII: [f64; 11] = [
    1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0,
];
/// Sample cap for the log-region scan, independent of the main budget.
const LOG_REGION_SAMPLES: u64 = 100_000;
/// Ball radius for the pre-flight minimum-modulus scan of the shift line.
const MIN_SCAN_RADIUS: f64 = 100.0;
const MIN_SCAN_SAMPLES: usize = 4000;

#[derive(Parser)]
#[command(
    name = "evolv",
    version,
    about = "Analyze evolution operators and build their causal fundamental solutions",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide boundedness, estimate the spectral bound, fit the growth curve
    Analyze(AnalyzeArgs),
    /// Build the causal fundamental solution and run the verification battery
    Fundsol(FundsolArgs),
    /// Convolve a right-hand side field with the fundamental solution
    Solve(SolveArgs),
}

#[derive(Args)]
struct OperatorInput {
    /// Operator text, e.g. "d0 - d1^2"; d0 differentiates the evolution axis
    #[arg(value_name = "OPERATOR", required_unless_present = "json", conflicts_with = "json")]
    operator: Option<String>,

    /// Read the operator from a JSON terms file {"n":..,"terms":[..]} instead
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,

    /// Number of spatial variables for operator text (default 1)
    #[arg(long, value_name = "N")]
    n: Option<usize>,
}

#[derive(Args)]
struct CommonFlags {
    /// Evaluation budget for the sampling analyses
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,

    /// Seed folded into the sampling streams
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Worker thread cap; the EVOLV_THREADS variable is the fallback
    #[arg(long, value_name = "COUNT")]
    threads: Option<usize>,

    /// Write the JSON report to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,

    /// Include wall-clock timings (makes the report non-reproducible)
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    op: OperatorInput,
    #[command(flatten)]
    common: CommonFlags,

    /// Starting expansion depth for the exact one-variable analysis
    #[arg(long, value_name = "TERMS")]
    depth: Option<usize>,

    /// Emit an SVG chart and CSV of the growth curve next to the report
    #[arg(long)]
    charts: bool,
}

#[derive(Args)]
struct FundsolArgs {
    #[command(flatten)]
    op: OperatorInput,
    #[command(flatten)]
    common: CommonFlags,

    /// Shift line Re lambda; defaults to the estimated spectral bound plus one
    #[arg(long)]
    sigma: Option<f64>,

    /// Frequency half-extent per axis
    #[arg(long = "grid-xi", value_name = "EXTENT", default_value_t = 16.0)]
    grid_xi: f64,

    /// Grid points per axis (even)
    #[arg(long = "grid-points", value_name = "M", default_value_t = 256)]
    grid_points: usize,

    /// Raised-cosine taper fraction per band side in (0, 0.5]; 0 disables it
    #[arg(long, value_name = "RHO", default_value_t = 0.25)]
    taper: f64,

    /// Output path for the field container
    #[arg(long, value_name = "FILE", default_value = "n.gfield")]
    out: PathBuf,

    /// Emit SVG charts (growth curve, decay fit, |N| slice) and the curve CSV
    #[arg(long)]
    charts: bool,

    /// Run the pairing battery only; skip the grid build and write no field
    #[arg(long = "pair-only")]
    pair_only: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    op: OperatorInput,
    #[command(flatten)]
    common: CommonFlags,

    /// Right-hand side field container (role "rhs")
    #[arg(long, value_name = "FILE", required = true)]
    rhs: PathBuf,

    /// Shift line Re lambda; defaults to the estimated spectral bound plus one
    #[arg(long)]
    sigma: Option<f64>,

    /// Output path for the solution container
    #[arg(long, value_name = "FILE", default_value = "solution.gfield")]
    out: PathBuf,
}

/// Failure that already knows its exit code.
struct CmdError {
    code: i32,
    message: String,
}

impl CmdError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CmdError { code, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        CmdError::new(1, message)
    }
}

fn grid_error(e: GridError) -> CmdError {
    let code = match &e {
        GridError::SigmaTooCloseToSpectrum { .. } => EXIT_SIGMA,
        GridError::SupportViolation { .. } => EXIT_SUPPORT,
        _ => 1,
    };
    CmdError::new(code, e.to_string())
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Fundsol(args) => cmd_fundsol(args),
        Command::Solve(args) => cmd_solve(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Applies the thread cap to the global worker pool before any parallel work.
fn apply_threads(flag: Option<usize>) -> Result<Option<usize>, CmdError> {
    let requested = match flag {
        Some(t) => Some(t),
        None => match std::env::var("EVOLV_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                CmdError::usage(format!("EVOLV_THREADS is not a thread count: {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(t) = requested {
        if t == 0 {
            return Err(CmdError::usage("thread cap must be at least 1"));
        }
        // A failure here means a pool already exists; the cap then simply
        // does not shrink it, which is fine for a second call in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(requested)
}

fn load_operator(input: &OperatorInput) -> Result<OperatorSymbol, CmdError> {
    match (&input.operator, &input.json) {
        (Some(text), None) => {
            let n = input.n.unwrap_or(1);
            if n == 0 {
                return Err(CmdError::usage("--n must be at least 1"));
            }
            parse_operator(text, n)
                .map_err(|e| CmdError::usage(format!("operator {text:?}: {e}")))
        }
        (None, Some(path)) => {
            let body = std::fs::read_to_string(path).map_err(|e| {
                CmdError::usage(format!("cannot read {}: {e}", path.display()))
            })?;
            let p = OperatorSymbol::from_json_str(&body).map_err(|e| {
                CmdError::usage(format!("terms file {}: {e}", path.display()))
            })?;
            if let Some(n) = input.n {
                if n != p.spatial_dims() {
                    return Err(CmdError::usage(format!(
                        "--n {n} contradicts the terms file, which declares n = {}",
                        p.spatial_dims()
                    )));
                }
            }
            Ok(p)
        }
        // clap enforces exactly one source; this arm is unreachable in
        // practice but keeps the match total.
        _ => Err(CmdError::usage("provide an operator or --json FILE")),
    }
}

fn operator_echo(p: &OperatorSymbol) -> OperatorEcho {
    OperatorEcho {
        text: p.to_string(),
        spatial_dims: p.spatial_dims(),
        lambda_degree: p.lambda_degree(),
        terms: p.to_json_value(),
    }
}

/// Both verdict routes plus the merged decision the exit code reports.
struct Decision {
    exact: Option<PetrovskiiVerdict>,
    numeric: PetrovskiiVerdict,
}

impl Decision {
    /// The exact route wins whenever it ran and reached a decision.
    fn final_verdict(&self) -> &PetrovskiiVerdict {
        match &self.exact {
            Some(v) if v.classification != Classification::Undetermined => v,
            _ => &self.numeric,
        }
    }

    fn classification(&self) -> Classification {
        self.final_verdict().classification
    }

    fn omega0(&self) -> Option<OmegaBound> {
        self.final_verdict().omega0
    }
}

/// Runs the exact route (single spatial variable only) and the sampling
/// route. An explicit depth that the expansion cannot honor is a usage
/// error; with the default depth the exact route degrades to absent.
fn decide(
    p: &OperatorSymbol,
    budget: SamplerBudget,
    depth: Option<usize>,
) -> Result<Decision, CmdError> {
    let exact = if p.spatial_dims() == 1 {
        match depth {
            Some(d) => Some(
                exact_verdict_with_depth(p, d)
                    .map_err(|e| CmdError::usage(format!("exact analysis: {e}")))?,
            ),
            None => petrovskii_verdict_exact_1d(p).ok(),
        }
    } else {
        None
    };
    let numeric = estimate_omega0(p, budget)
        .map_err(|e| CmdError::new(1, format!("sampling analysis: {e}")))?;
    Ok(Decision { exact, numeric })
}

fn exit_for(classification: Classification) -> i32 {
    match classification {
        Classification::Bounded => 0,
        Classification::Unbounded => EXIT_UNBOUNDED,
        Classification::Undetermined => EXIT_UNDETERMINED,
    }
}

/// File stem (directory preserved, extension dropped) used to name chart
/// files next to the main output.
fn output_stem(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_string());
    path.with_file_name(stem)
}

fn write_text(path: &Path, body: &str) -> Result<(), CmdError> {
    std::fs::write(path, body)
        .map_err(|e| CmdError::new(1, format!("cannot write {}: {e}", path.display())))
}

fn stem_file(stem: &Path, suffix: &str) -> PathBuf {
    let mut name = stem.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    name.push('.');
    name.push_str(suffix);
    stem.with_file_name(name)
}

/// Computes the growth curve, fits it, optionally writes the CSV and SVG
/// next to `stem`, and returns the report section plus the files written.
fn curve_section(
    p: &OperatorSymbol,
    budget: SamplerBudget,
    charts: bool,
    stem: &Path,
) -> Result<(SigmaCurveReport, Vec<String>), CmdError> {
    let curve = sigma_curve(p, &CURVE_RADII, budget)
        .map_err(|e| CmdError::new(1, format!("growth curve: {e}")))?;
    let fit = fit_growth(&curve).ok();
    let mut files = Vec::new();
    let mut csv_file = None;
    if charts {
        let csv_path = stem_file(stem, "sigma_curve.csv");
        write_text(&csv_path, &curve.to_csv(p.spatial_dims()))?;
        csv_file = Some(csv_path.to_string_lossy().into_owned());

        let observed: Vec<(f64, f64)> = curve
            .samples
            .iter()
            .filter_map(|s| s.sigma.map(|v| (s.r.log2(), v)))
            .collect();
        let fitted: Vec<(f64, f64)> = match &fit {
            Some(f) => CURVE_RADII
                .iter()
                .map(|&r| {
                    let v = match f.model {
                        evolv_core::GrowthModelKind::Constant => f.parameters[0],
                        evolv_core::GrowthModelKind::Logarithmic => {
                            f.parameters[0] + f.parameters[1] * (1.0 + r).ln()
                        }
                        evolv_core::GrowthModelKind::Power => {
                            f.parameters[0] * r.powf(f.parameters[1])
                        }
                    };
                    (r.log2(), v)
                })
                .collect(),
            None => Vec::new(),
        };
        let mut series = vec![charts::Series { label: "sigma(r)", points: &observed, markers: true }];
        if !fitted.is_empty() {
            series.push(charts::Series { label: "fit", points: &fitted, markers: false });
        }
        let svg = charts::line_chart(
            "Constrained supremum of root real parts",
            "log2 r",
            "sigma",
            &series,
        );
        let svg_path = stem_file(stem, "sigma_curve.svg");
        write_text(&svg_path, &svg)?;
        files.push(csv_file.clone().unwrap());
        files.push(svg_path.to_string_lossy().into_owned());
    }
    let section = SigmaCurveReport {
        radii: CURVE_RADII.to_vec(),
        samples: curve.samples,
        fit,
        config_hash: curve.config_hash,
        csv_file,
    };
    Ok((section, files))
}

/// Log-region scan at (a, b) = (omega0 + 1, 1), capped sample count.
fn log_region_section(
    p: &OperatorSymbol,
    omega0: f64,
    budget: SamplerBudget,
) -> Result<LogRegionReport, CmdError> {
    let a = if omega0 == f64::NEG_INFINITY { 1.0 } else { omega0 + 1.0 };
    let region = LogRegion { a, b: 1.0 };
    let scan_budget = SamplerBudget {
        max_evaluations: budget.max_evaluations.min(LOG_REGION_SAMPLES),
        seed: budget.seed,
    };
    let violations = check_log_region(p, region, scan_budget)
        .map_err(|e| CmdError::new(1, format!("log-region scan: {e}")))?;
    let violation_count = violations.len();
    let witnesses = violations.into_iter().take(8).collect();
    Ok(LogRegionReport {
        a,
        b: 1.0,
        samples_budget: scan_budget.max_evaluations,
        violation_count,
        witnesses,
    })
}

fn emit_report(bytes: &[u8], target: &Option<PathBuf>) -> Result<(), CmdError> {
    match target {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CmdError::new(1, format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CmdError::new(1, format!("stdout: {e}")))
        }
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<i32, CmdError> {
    let started = Instant::now();
    let threads = apply_threads(args.common.threads)?;
    let p = load_operator(&args.op)?;
    let budget = SamplerBudget { max_evaluations: args.common.budget, seed: args.common.seed };

    let analysis_start = Instant::now();
    let decision = decide(&p, budget, args.depth)?;
    let stem = args
        .common
        .report
        .as_deref()
        .map(output_stem)
        .unwrap_or_else(|| PathBuf::from("analysis"));
    let (curve, files) = curve_section(&p, budget, args.charts, &stem)?;
    let log_region = match decision.classification() {
        Classification::Bounded => {
            Some(log_region_section(&p, decision.omega0().map(|o| o.as_f64()).unwrap_or(0.0), budget)?)
        }
        _ => None,
    };
    let analysis_ms = analysis_start.elapsed().as_millis() as u64;

    let figures = if args.charts {
        Some(Figures { decay_points: Vec::new(), n_slice: None, files })
    } else {
        None
    };
    let timings = args.common.timings.then(|| Timings {
        analysis_ms: Some(analysis_ms),
        grid_ms: None,
        battery_ms: None,
        total_ms: started.elapsed().as_millis() as u64,
    });

    let report = AnalysisReport {
        schema: ANALYSIS_SCHEMA,
        tool_version: env!("CARGO_PKG_VERSION"),
        operator: operator_echo(&p),
        config: ConfigEcho {
            command: "analyze",
            budget: budget.max_evaluations,
            seed: budget.seed,
            threads,
            depth: args.depth,
            sigma: None,
            sigma_source: None,
            grid: None,
            pair_only: None,
            charts: args.charts,
            output: None,
        },
        classification: decision.classification(),
        omega0: decision.omega0(),
        verdicts: Verdicts { exact_1d: decision.exact, numeric: decision.numeric },
        sigma_curve: Some(curve),
        log_region,
        battery: None,
        figures,
        timings,
    };
    emit_report(&report::to_json_bytes(&report), &args.common.report)?;
    Ok(exit_for(report.classification))
}

/// Picks the shift line: forced by the user, or the spectral bound plus one.
fn resolve_sigma(
    sigma_flag: Option<f64>,
    decision: &Decision,
) -> Result<(f64, &'static str), CmdError> {
    if let Some(s) = sigma_flag {
        if !s.is_finite() {
            return Err(CmdError::usage("--sigma must be finite"));
        }
        return Ok((s, "user"));
    }
    match decision.classification() {
        Classification::Bounded => {
            let w = decision.omega0().map(|o| o.as_f64()).unwrap_or(0.0);
            let sigma = if w == f64::NEG_INFINITY { 1.0 } else { w + 1.0 };
            Ok((sigma, "omega0+1"))
        }
        Classification::Unbounded => Err(CmdError::new(
            EXIT_SIGMA,
            "no admissible line: the root real parts are unbounded; \
             every shift touches the spectrum (pass --sigma to override)",
        )),
        Classification::Undetermined => Err(CmdError::new(
            EXIT_UNDETERMINED,
            "boundedness is undetermined, so no default line can be chosen; \
             pass --sigma explicitly",
        )),
    }
}

fn cmd_fundsol(args: FundsolArgs) -> Result<i32, CmdError> {
    let started = Instant::now();
    let threads = apply_threads(args.common.threads)?;
    let p = load_operator(&args.op)?;
    let budget = SamplerBudget { max_evaluations: args.common.budget, seed: args.common.seed };

    let analysis_start = Instant::now();
    let decision = decide(&p, budget, None)?;
    let (sigma, sigma_source) = resolve_sigma(args.sigma, &decision)?;

    // Pre-flight: reject lines the quadrature and the grid division cannot
    // use before spending time on either.
    let scale = p.coeff_scale();
    let (min_abs, min_exponent) = min_modulus_scan(&p, sigma, MIN_SCAN_RADIUS, MIN_SCAN_SAMPLES);
    let threshold = MIN_MODULUS_REL * scale;
    if min_abs < threshold {
        return Err(CmdError::new(
            EXIT_SIGMA,
            format!(
                "line Re lambda = {sigma} touches the spectrum: \
                 min |P| over the scan ball is {min_abs:.3e}, below {threshold:.3e}"
            ),
        ));
    }
    let analysis_ms = analysis_start.elapsed().as_millis() as u64;

    if !(0.0..=0.5).contains(&args.taper) {
        return Err(CmdError::usage("--taper must lie in [0, 0.5]"));
    }
    let window = if args.taper == 0.0 {
        Window::None
    } else {
        Window::RaisedCosine { rho: args.taper }
    };
    let spec = GridSpec {
        n: p.spatial_dims(),
        freq_extent: vec![args.grid_xi; p.spatial_dims() + 1],
        points_per_axis: args.grid_points,
        sigma,
        window,
    };

    let grid_start = Instant::now();
    let n_slice = if args.pair_only {
        None
    } else {
        spec.validate().map_err(grid_error)?;
        let field = build_fundamental_solution(&p, &spec).map_err(grid_error)?;
        write_gfield(&field, &args.out).map_err(grid_error)?;
        // |N| along the x0 axis through the spatial origin, for the report
        // and the slice chart.
        let m = spec.points_per_axis;
        let slab = field.values().len() / m;
        let center_rest = {
            let mut rest = 0usize;
            let mut stride = slab;
            for _ in 1..spec.axes() {
                stride /= m;
                rest += (m / 2) * stride;
            }
            rest
        };
        let slice: Vec<[f64; 2]> = (0..m)
            .map(|k| [spec.coordinate(0, k), field.values()[k * slab + center_rest].norm()])
            .collect();
        Some(slice)
    };
    let grid_ms = grid_start.elapsed().as_millis() as u64;

    let battery_start = Instant::now();
    let quad = QuadratureConfig::default();
    let outcome = battery::run(&p, sigma, &quad)
        .map_err(|e| CmdError::new(1, format!("verification battery: {e}")))?;
    let mut checks = Vec::with_capacity(outcome.checks.len() + 1);
    checks.push(battery::BatteryCheck {
        name: "line_min_modulus",
        measured: min_abs,
        tolerance: threshold,
        pass: true,
        note: format!(
            "smallest |P| over the scan ball around the line, gate {:.1e} times \
             the coefficient scale; empirical log-radius decay exponent {:.3}",
            MIN_MODULUS_REL, min_exponent
        ),
        details: vec![min_abs, min_exponent],
    });
    checks.extend(outcome.checks);
    let battery_ms = battery_start.elapsed().as_millis() as u64;

    let stem = output_stem(&args.out);
    let (curve_report, mut files) = if args.charts {
        let (c, f) = curve_section(&p, budget, true, &stem)?;
        (Some(c), f)
    } else {
        (None, Vec::new())
    };

    if args.charts {
        let decay_svg = {
            let points: Vec<(f64, f64)> = outcome.decay_points.clone();
            let fit_line = fit_line_points(&points);
            let mut series =
                vec![charts::Series { label: "log |pairing|", points: &points, markers: true }];
            if let Some(fit) = &fit_line {
                series.push(charts::Series { label: "fit", points: fit, markers: false });
            }
            charts::line_chart(
                "Reweighted pairing decay along the time axis",
                "probe center x0",
                "log magnitude",
                &series,
            )
        };
        let decay_path = stem_file(&stem, "decay.svg");
        write_text(&decay_path, &decay_svg)?;
        files.push(decay_path.to_string_lossy().into_owned());

        if let Some(slice) = &n_slice {
            let pts: Vec<(f64, f64)> = slice.iter().map(|p| (p[0], p[1])).collect();
            let svg = charts::line_chart(
                "|N| along the x0 axis through x = 0",
                "x0",
                "|N|",
                &[charts::Series { label: "|N|", points: &pts, markers: false }],
            );
            let slice_path = stem_file(&stem, "n_slice.svg");
            write_text(&slice_path, &svg)?;
            files.push(slice_path.to_string_lossy().into_owned());
        }
    }

    let timings = args.common.timings.then(|| Timings {
        analysis_ms: Some(analysis_ms),
        grid_ms: Some(grid_ms),
        battery_ms: Some(battery_ms),
        total_ms: started.elapsed().as_millis() as u64,
    });
    let report = AnalysisReport {
        schema: ANALYSIS_SCHEMA,
        tool_version: env!("CARGO_PKG_VERSION"),
        operator: operator_echo(&p),
        config: ConfigEcho {
            command: "fundsol",
            budget: budget.max_evaluations,
            seed: budget.seed,
            threads,
            depth: None,
            sigma: Some(sigma),
            sigma_source: Some(sigma_source),
            grid: Some(spec.clone()),
            pair_only: Some(args.pair_only),
            charts: args.charts,
            output: (!args.pair_only).then(|| args.out.to_string_lossy().into_owned()),
        },
        classification: decision.classification(),
        omega0: decision.omega0(),
        verdicts: Verdicts { exact_1d: decision.exact, numeric: decision.numeric },
        sigma_curve: curve_report,
        log_region: None,
        battery: Some(checks),
        figures: Some(Figures {
            decay_points: outcome.decay_points.iter().map(|&(t, l)| [t, l]).collect(),
            n_slice,
            files,
        }),
        timings,
    };
    emit_report(&report::to_json_bytes(&report), &args.common.report)?;
    Ok(0)
}

/// Least-squares line through the points, returned as its two endpoint
/// samples for chart overlay; None with fewer than two points.
fn fit_line_points(points: &[(f64, f64)]) -> Option<Vec<(f64, f64)>> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let x0 = points.first().unwrap().0;
    let x1 = points.last().unwrap().0;
    Some(vec![(x0, my + slope * (x0 - mx)), (x1, my + slope * (x1 - mx))])
}

fn cmd_solve(args: SolveArgs) -> Result<i32, CmdError> {
    let started = Instant::now();
    let threads = apply_threads(args.common.threads)?;
    let p = load_operator(&args.op)?;
    let budget = SamplerBudget { max_evaluations: args.common.budget, seed: args.common.seed };

    let rhs = read_gfield(&args.rhs).map_err(grid_error)?;

    let (sigma, sigma_source) = match args.sigma {
        Some(s) => {
            if !s.is_finite() {
                return Err(CmdError::usage("--sigma must be finite"));
            }
            (s, "user")
        }
        None => {
            let decision = decide(&p, budget, None)?;
            resolve_sigma(None, &decision)?
        }
    };

    let grid_start = Instant::now();
    let (solution, residual) =
        convolution_solve_with_residual(&p, sigma, &rhs).map_err(grid_error)?;
    write_gfield(&solution, &args.out).map_err(grid_error)?;
    let grid_ms = grid_start.elapsed().as_millis() as u64;

    let timings = args.common.timings.then(|| Timings {
        analysis_ms: None,
        grid_ms: Some(grid_ms),
        battery_ms: None,
        total_ms: started.elapsed().as_millis() as u64,
    });
    let report = SolveReport {
        schema: SOLVE_SCHEMA,
        tool_version: env!("CARGO_PKG_VERSION"),
        operator: operator_echo(&p),
        config: ConfigEcho {
            command: "solve",
            budget: budget.max_evaluations,
            seed: budget.seed,
            threads,
            depth: None,
            sigma: Some(sigma),
            sigma_source: Some(sigma_source),
            grid: None,
            pair_only: None,
            charts: false,
            output: Some(args.out.to_string_lossy().into_owned()),
        },
        grid: solution.spec().clone(),
        residual,
        residual_tolerance: SOLVE_RESIDUAL_TOL,
        pass: residual <= SOLVE_RESIDUAL_TOL,
        timings,
    };
    emit_report(&report::to_json_bytes(&report), &args.common.report)?;
    Ok(0)
}
