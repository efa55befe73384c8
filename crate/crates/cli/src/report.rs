//! Machine-readable report types emitted by the subcommands.
//!
//! Reports are flat serde structs with a fixed field order and no maps, so a
//! run with a fixed operator, configuration and seed serializes to the same
//! bytes every time. Wall-clock timings are the one intentionally
//! nondeterministic section; they are included only when requested and are
//! omitted from the output otherwise, keeping the default report
//! byte-reproducible. Both report shapes are described by the JSON Schema
//! documents published in the repository's `schema/` directory.

use evolv_core::{
    Classification, GridSpec, GrowthFit, LogViolation, OmegaBound, PetrovskiiVerdict, SigmaSample,
};
use serde::Serialize;

/// Schema identifier for analysis and fundamental-solution reports.
pub const ANALYSIS_SCHEMA: &str = "evolv.analysis_report.v1";
/// Schema identifier for convolution-solver reports.
pub const SOLVE_SCHEMA: &str = "evolv.solve_report.v1";
/// Residual gate applied to the solver's frequency-side identity check.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-3;

/// The operator as parsed, echoed back in canonical text and term form.
#[derive(Debug, Serialize)]
pub struct OperatorEcho {
    /// Canonical rendering; reparsing it reproduces the same symbol.
    pub text: String,
    pub spatial_dims: usize,
    pub lambda_degree: u32,
    /// Term list in the same JSON shape `--json` accepts as input.
    pub terms: serde_json::Value,
}

/// Invocation snapshot: everything that influenced the numbers in the report.
#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub command: &'static str,
    pub budget: u64,
    pub seed: u64,
    pub threads: Option<usize>,
    pub depth: Option<usize>,
    /// Shift line actually used (fundamental-solution and solve runs).
    pub sigma: Option<f64>,
    /// "user" when forced on the command line, "omega0+1" when derived.
    pub sigma_source: Option<&'static str>,
    pub grid: Option<GridSpec>,
    pub pair_only: Option<bool>,
    pub charts: bool,
    /// Field output path for runs that write one.
    pub output: Option<String>,
}

/// Boundedness decisions: the exact expansion route when the operator has a
/// single spatial variable, and the sampling route always.
#[derive(Debug, Serialize)]
pub struct Verdicts {
    pub exact_1d: Option<PetrovskiiVerdict>,
    pub numeric: PetrovskiiVerdict,
}

/// Constrained-supremum curve with its growth fit and CSV location.
#[derive(Debug, Serialize)]
pub struct SigmaCurveReport {
    pub radii: Vec<f64>,
    pub samples: Vec<SigmaSample>,
    pub fit: Option<GrowthFit>,
    pub config_hash: String,
    /// CSV file name when the curve was exported next to the report.
    pub csv_file: Option<String>,
}

/// Root-free log-region scan outcome.
#[derive(Debug, Serialize)]
pub struct LogRegionReport {
    pub a: f64,
    pub b: f64,
    pub samples_budget: u64,
    pub violation_count: usize,
    /// At most eight witnesses are echoed; the count above is the full tally.
    pub witnesses: Vec<LogViolation>,
}

/// Data behind the emitted charts, stored so the pictures can be redrawn
/// from the report alone.
#[derive(Debug, Serialize)]
pub struct Figures {
    /// (probe center, log pairing magnitude) points behind the decay fit.
    pub decay_points: Vec<[f64; 2]>,
    /// |N| along the x0 axis through the spatial origin, as (x0, |N|) pairs.
    pub n_slice: Option<Vec<[f64; 2]>>,
    /// Files written next to the output stem, empty when charts were off.
    pub files: Vec<String>,
}

/// Wall-clock phase durations in milliseconds. Opt-in via `--timings`.
#[derive(Debug, Serialize)]
pub struct Timings {
    pub analysis_ms: Option<u64>,
    pub grid_ms: Option<u64>,
    pub battery_ms: Option<u64>,
    pub total_ms: u64,
}

/// Report for `analyze` and `fundsol` runs. Sections that a run does not
/// produce are null rather than absent, so the shape is stable.
#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub operator: OperatorEcho,
    pub config: ConfigEcho,
    pub verdicts: Verdicts,
    /// Decision the exit code reports: the exact route when it decided,
    /// otherwise the sampling route.
    pub classification: Classification,
    pub omega0: Option<OmegaBound>,
    pub sigma_curve: Option<SigmaCurveReport>,
    pub log_region: Option<LogRegionReport>,
    pub battery: Option<Vec<crate::battery::BatteryCheck>>,
    pub figures: Option<Figures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

/// Report for `solve` runs: geometry, the identity residual, and the gate.
#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub operator: OperatorEcho,
    pub config: ConfigEcho,
    pub grid: GridSpec,
    /// Relative frequency-side residual of P * U-hat against the windowed
    /// right-hand side, measured after the solve.
    pub residual: f64,
    pub residual_tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

/// Serializes a report as pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(report: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(report).expect("reports serialize");
    out.push(b'\n');
    out
}
