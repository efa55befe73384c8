//! Numerical estimation of the spectral bound in any spatial dimension.
//!
//! The exact classifier is limited to one spatial variable; this module
//! trades proof for sampling. Frequencies come from a low-discrepancy
//! Halton stream pushed through a tangent compactification so that a single
//! fixed stream covers all of frequency space, and the growth of the
//! ball-constrained supremum
//!
//! ```text
//! sigma(r) = sup { Re lambda : P(lambda, i xi) = 0, |lambda|^2 + |xi|^2 <= r^2/2 }
//! ```
//!
//! over a geometric radius grid separates bounded operators (sigma plateaus)
//! from unbounded ones (sigma grows like a power of r).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::NumericError;
use crate::roots;
use crate::symbol::{LambdaPolynomial, OperatorSymbol};
use crate::verdict::{Classification, Evidence, OmegaBound, PetrovskiiVerdict, VerdictMethod};

/// Default total slice-root evaluations per top-level call.
pub const DEFAULT_BUDGET: u64 = 200_000;
/// Dense-scan size for one radius or one global sweep.
const SCAN_POINTS: usize = 4096;
/// Number of best seeds kept for local refinement.
const TOP_SEEDS: usize = 8;
/// Golden-section iterations per coordinate line search.
const LINE_ITERS: usize = 40;
/// Coordinate sweeps per refined seed.
const SWEEPS: usize = 3;
/// Power-fit exponent above which growth counts as genuine.
const POWER_EXPONENT_MIN: f64 = 0.05;
/// Plateau variation (top octave) below which the curve counts as flat.
const PLATEAU_TOL: f64 = 1e-4;
/// Geometric radius grid r = 2^j, j = 0..=CURVE_OCTAVES.
const CURVE_OCTAVES: u32 = 10;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Sampler configuration: evaluation budget and reproducibility seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerBudget {
    /// Total slice-root evaluations the call may spend.
    pub max_evaluations: u64,
    /// Offset folded into the Halton stream; same seed, same samples.
    pub seed: u64,
}

impl Default for SamplerBudget {
    fn default() -> Self {
        SamplerBudget { max_evaluations: DEFAULT_BUDGET, seed: 0 }
    }
}

/// Root of P attaining a sampled maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootWitness {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub xi: Vec<f64>,
}

/// One point of the growth curve; `sigma` is absent when no admissible root
/// was found inside the ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSample {
    pub r: f64,
    pub sigma: Option<f64>,
    pub witness: Option<RootWitness>,
    /// Set when the evaluation budget ran out before refinement finished.
    pub low_confidence: bool,
}

/// Growth curve r -> sigma(r) with the sampler configuration fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaCurve {
    pub samples: Vec<SigmaSample>,
    pub config_hash: String,
}

impl SigmaCurve {
    /// CSV export with header `r,sigma,lambda_re,lambda_im,xi_0,...`;
    /// undefined samples leave their fields empty.
    pub fn to_csv(&self, spatial_dims: usize) -> String {
        let mut out = String::from("r,sigma,lambda_re,lambda_im");
        for i in 0..spatial_dims {
            out.push_str(&format!(",xi_{i}"));
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!("{}", s.r));
            match (&s.sigma, &s.witness) {
                (Some(v), Some(w)) => {
                    out.push_str(&format!(",{},{},{}", v, w.lambda_re, w.lambda_im));
                    for x in &w.xi {
                        out.push_str(&format!(",{x}"));
                    }
                }
                _ => {
                    for _ in 0..(3 + spatial_dims) {
                        out.push(',');
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Root-free region claim: no roots with Re lambda > a + b log(1+|lambda|+|xi|).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegion {
    pub a: f64,
    pub b: f64,
}

impl LogRegion {
    /// Re lambda minus the boundary value; positive inside the region.
    pub fn margin(&self, lambda: Complex64, xi: &[f64]) -> f64 {
        let xi_norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        lambda.re - self.a - self.b * (1.0 + lambda.norm() + xi_norm).ln()
    }
}

/// A root found inside a claimed root-free region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogViolation {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub xi: Vec<f64>,
    pub margin: f64,
}

/// Growth law fitted to a sigma curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModelKind {
    Constant,
    Logarithmic,
    Power,
}

/// Best of the three candidate laws by residual, simpler model on ties.
/// Parameters: constant `[c]`; logarithmic `[a, b]` for a + b log(1+r);
/// power `[c, alpha]` for c r^alpha with alpha > 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub model: GrowthModelKind,
    pub parameters: Vec<f64>,
    pub residual_rms: f64,
}

/// Evaluation meter: counts slice-root evaluations against the budget.
struct Meter {
    spent: u64,
    cap: u64,
    exhausted: bool,
}

impl Meter {
    fn new(budget: SamplerBudget) -> Result<Meter, NumericError> {
        if budget.max_evaluations == 0 {
            return Err(NumericError::EmptyBudget);
        }
        Ok(Meter { spent: 0, cap: budget.max_evaluations, exhausted: false })
    }

    /// Grants up to `want` evaluations; marks exhaustion when cut short.
    fn take(&mut self, want: u64) -> u64 {
        let granted = want.min(self.cap - self.spent);
        self.spent += granted;
        if granted < want {
            self.exhausted = true;
        }
        granted
    }
}

pub(crate) fn halton(index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

pub(crate) const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Unbounded frequency from the unit cube: per-axis tangent map, clipped.
fn compactify(u: f64) -> f64 {
    (std::f64::consts::PI * (u - 0.5)).tan().clamp(-1e8, 1e8)
}

/// The `count` leading stream frequencies, ornamented with an explicit origin
/// probe (index 0). Independent of any radius so that scans at nested radii
/// see nested admissible sets.
fn frequency_stream(n: usize, seed: u64, count: usize) -> Vec<Vec<f64>> {
    let offset = 1 + seed.wrapping_mul(1_000_003);
    let mut out = Vec::with_capacity(count);
    out.push(vec![0.0; n]);
    for k in 0..count.saturating_sub(1) {
        let idx = offset + k as u64;
        let xi: Vec<f64> = (0..n)
            .map(|axis| compactify(halton(idx, PRIMES[axis % PRIMES.len()])))
            .collect();
        out.push(xi);
    }
    out
}

/// Per-frequency outcome of a slice-root computation.
#[derive(Clone, Copy)]
enum SliceMax {
    /// Best (possibly constrained) root: Re lambda and the root.
    Root(f64, Complex64),
    /// Slice vanishes identically; every lambda is a root.
    Degenerate,
    /// No admissible root at this frequency.
    Empty,
}

/// Max Re lambda over admissible roots at one frequency, under the ball
/// |lambda|^2 + |xi|^2 <= half_r2 (pass infinity for no constraint).
fn slice_max(
    p: &OperatorSymbol,
    xi: &[f64],
    half_r2: f64,
) -> Result<SliceMax, NumericError> {
    let norm2: f64 = xi.iter().map(|x| x * x).sum();
    if norm2 > half_r2 {
        return Ok(SliceMax::Empty);
    }
    let slice = p.lambda_slice(xi);
    if slice.is_zero() {
        return Ok(SliceMax::Degenerate);
    }
    if slice.degree() == Some(0) {
        return Ok(SliceMax::Empty);
    }
    let set = roots::roots(&slice)?;
    let budget2 = half_r2 * (1.0 + 1e-12);
    let best = set
        .roots
        .iter()
        .filter(|l| !half_r2.is_finite() || l.norm_sqr() + norm2 <= budget2)
        .max_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    Ok(match best {
        Some(l) => SliceMax::Root(l.re, *l),
        None => SliceMax::Empty,
    })
}

/// For a degenerate slice the admissible lambda ball has radius
/// sqrt(half_r2 - |xi|^2); its rightmost point is real.
fn degenerate_value(xi: &[f64], half_r2: f64) -> Option<(f64, Complex64)> {
    if !half_r2.is_finite() {
        return None;
    }
    let norm2: f64 = xi.iter().map(|x| x * x).sum();
    let v = (half_r2 - norm2).max(0.0).sqrt();
    Some((v, Complex64::new(v, 0.0)))
}

struct ScanBest {
    value: f64,
    lambda: Complex64,
    xi: Vec<f64>,
}

/// Parallel map over frequency batches: the slice value at each frequency
/// (NEG_INFINITY when no admissible root, INFINITY for an unconstrained
/// degenerate slice).
fn scan_values(
    p: &OperatorSymbol,
    xis: &[Vec<f64>],
    half_r2: f64,
) -> Result<Vec<f64>, NumericError> {
    let evals: Vec<SliceMax> = xis
        .par_chunks(256)
        .map(|chunk| {
            chunk
                .iter()
                .map(|xi| slice_max(p, xi, half_r2))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(xis
        .iter()
        .zip(evals)
        .map(|(xi, e)| match e {
            SliceMax::Root(v, _) => v,
            SliceMax::Degenerate => degenerate_value(xi, half_r2)
                .map_or(f64::INFINITY, |(v, _)| v),
            SliceMax::Empty => f64::NEG_INFINITY,
        })
        .collect())
}

/// Witness at the largest scanned value: one extra slice evaluation.
fn scan_argmax(
    p: &OperatorSymbol,
    xis: &[Vec<f64>],
    values: &[f64],
    half_r2: f64,
    meter: &mut Meter,
) -> Result<Option<ScanBest>, NumericError> {
    let arg = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > f64::NEG_INFINITY)
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap());
    let Some((i, &v)) = arg else {
        return Ok(None);
    };
    meter.take(1);
    let lambda = match slice_max(p, &xis[i], half_r2)? {
        SliceMax::Root(_, l) => l,
        SliceMax::Degenerate => degenerate_value(&xis[i], half_r2)
            .map_or(Complex64::new(0.0, 0.0), |(_, l)| l),
        SliceMax::Empty => return Ok(None),
    };
    Ok(Some(ScanBest { value: v, lambda, xi: xis[i].clone() }))
}

/// Coordinate-wise golden-section ascent from one seed. Returns the best
/// point found; stops early when the meter empties.
fn refine_seed(
    p: &OperatorSymbol,
    seed: &[f64],
    half_r2: f64,
    brackets: &[f64],
    meter: &mut Meter,
) -> Result<Option<ScanBest>, NumericError> {
    let n = seed.len();
    let mut xi = seed.to_vec();
    let mut best: Option<ScanBest> = None;
    let note = |xi: &[f64], e: SliceMax, best: &mut Option<ScanBest>| {
        let cand = match e {
            SliceMax::Root(v, l) => Some((v, l)),
            // Unconstrained mode surfaces a degenerate slice as +inf so the
            // caller can return an immediate unbounded verdict.
            SliceMax::Degenerate => degenerate_value(xi, half_r2)
                .or(Some((f64::INFINITY, Complex64::new(0.0, 0.0)))),
            SliceMax::Empty => None,
        };
        if let Some((v, l)) = cand {
            if best.as_ref().map_or(true, |b| v > b.value) {
                *best = Some(ScanBest { value: v, lambda: l, xi: xi.to_vec() });
            }
        }
    };
    let e0 = slice_max(p, &xi, half_r2)?;
    meter.take(1);
    note(&xi, e0, &mut best);
    let mut widths: Vec<f64> = brackets.to_vec();
    for _ in 0..SWEEPS {
        for axis in 0..n {
            let mut lo = xi[axis] - widths[axis];
            let mut hi = xi[axis] + widths[axis];
            if half_r2.is_finite() {
                let others: f64 = xi
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != axis)
                    .map(|(_, x)| x * x)
                    .sum();
                let cap = (half_r2 - others).max(0.0).sqrt();
                lo = lo.max(-cap);
                hi = hi.min(cap);
            }
            if !(hi > lo) {
                continue;
            }
            let probe = |t: f64,
                             meter: &mut Meter,
                             best: &mut Option<ScanBest>|
             -> Result<f64, NumericError> {
                if meter.take(1) == 0 {
                    return Ok(f64::NEG_INFINITY);
                }
                let mut q = xi.clone();
                q[axis] = t;
                let e = slice_max(p, &q, half_r2)?;
                note(&q, e, best);
                Ok(match e {
                    SliceMax::Root(v, _) => v,
                    SliceMax::Degenerate => {
                        degenerate_value(&q, half_r2).map_or(f64::INFINITY, |(v, _)| v)
                    }
                    SliceMax::Empty => f64::NEG_INFINITY,
                })
            };
            let (mut a, mut b) = (lo, hi);
            let mut c = b - INV_PHI * (b - a);
            let mut d = a + INV_PHI * (b - a);
            let mut fc = probe(c, meter, &mut best)?;
            let mut fd = probe(d, meter, &mut best)?;
            for _ in 0..LINE_ITERS {
                if meter.exhausted {
                    break;
                }
                if fc >= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - INV_PHI * (b - a);
                    fc = probe(c, meter, &mut best)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + INV_PHI * (b - a);
                    fd = probe(d, meter, &mut best)?;
                }
            }
            xi[axis] = if fc >= fd { c } else { d };
            if meter.exhausted {
                return Ok(best);
            }
        }
        for w in widths.iter_mut() {
            *w *= 0.25;
        }
    }
    Ok(best)
}

/// Indices of the `TOP_SEEDS` largest finite values.
fn top_seed_indices(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len())
        .filter(|&i| values[i].is_finite())
        .collect();
    idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
    idx.truncate(TOP_SEEDS);
    idx
}

fn config_hash(budget: SamplerBudget, n: usize, tag: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(
        format!(
            "{tag}/n={n}/seed={}/cap={}/scan={SCAN_POINTS}/seeds={TOP_SEEDS}/iters={LINE_ITERS}x{SWEEPS}",
            budget.seed, budget.max_evaluations
        )
        .as_bytes(),
    );
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn sigma_of_r_metered(
    p: &OperatorSymbol,
    r: f64,
    budget: SamplerBudget,
    meter: &mut Meter,
) -> Result<SigmaSample, NumericError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(NumericError::BadRadii);
    }
    let n = p.spatial_dims();
    let half_r2 = r * r / 2.0;
    let stream = frequency_stream(n, budget.seed, SCAN_POINTS);
    let keep: Vec<Vec<f64>> = stream
        .into_iter()
        .filter(|xi| xi.iter().map(|x| x * x).sum::<f64>() <= half_r2)
        .collect();
    let granted = meter.take(keep.len() as u64) as usize;
    let keep = &keep[..granted];
    let values = scan_values(p, keep, half_r2)?;
    let mut best = scan_argmax(p, keep, &values, half_r2, meter)?;
    let cap = half_r2.sqrt();
    for &i in &top_seed_indices(&values) {
        let brackets = vec![cap / 8.0; n];
        if let Some(b) = refine_seed(p, &keep[i], half_r2, &brackets, meter)? {
            if best.as_ref().map_or(true, |c| b.value > c.value) {
                best = Some(b);
            }
        }
        if meter.exhausted {
            break;
        }
    }
    let sample = match best {
        Some(b) => SigmaSample {
            r,
            sigma: Some(b.value),
            witness: Some(RootWitness {
                lambda_re: b.lambda.re,
                lambda_im: b.lambda.im,
                xi: b.xi,
            }),
            low_confidence: meter.exhausted,
        },
        None => SigmaSample { r, sigma: None, witness: None, low_confidence: meter.exhausted },
    };
    Ok(sample)
}

/// Largest Re lambda over roots of P inside the ball |lambda|^2+|xi|^2 <= r^2/2:
/// dense low-discrepancy scan of admissible frequencies followed by
/// constrained coordinate-wise refinement of the best seeds. `sigma` is None
/// when the ball contains no root.
pub fn sigma_of_r(
    p: &OperatorSymbol,
    r: f64,
    budget: SamplerBudget,
) -> Result<SigmaSample, NumericError> {
    let mut meter = Meter::new(budget)?;
    sigma_of_r_metered(p, r, budget, &mut meter)
}

/// Growth curve over strictly increasing radii. A witness admissible at one
/// radius stays admissible at every larger radius, so earlier maxima are
/// carried forward; the curve is nondecreasing wherever defined.
pub fn sigma_curve(
    p: &OperatorSymbol,
    radii: &[f64],
    budget: SamplerBudget,
) -> Result<SigmaCurve, NumericError> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(NumericError::BadRadii);
    }
    let mut meter = Meter::new(budget)?;
    let mut samples: Vec<SigmaSample> = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut sample = sigma_of_r_metered(p, r, budget, &mut meter)?;
        if let Some(prev) = samples.last() {
            let carry = match (prev.sigma, sample.sigma) {
                (Some(a), Some(b)) => a > b,
                (Some(_), None) => true,
                _ => false,
            };
            if carry {
                sample.sigma = prev.sigma;
                sample.witness = prev.witness.clone();
            }
        }
        samples.push(sample);
    }
    Ok(SigmaCurve {
        samples,
        config_hash: config_hash(budget, p.spatial_dims(), "sigma_curve"),
    })
}

/// Least-squares fit of the curve against constant, a + b log(1+r), and
/// c r^alpha; returns the smallest-residual model, preferring the simpler
/// one on ties. The power exponent comes from log-log regression over the
/// upper half of the radius range and must be positive.
pub fn fit_growth(curve: &SigmaCurve) -> Result<GrowthFit, NumericError> {
    let pts: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .filter_map(|s| s.sigma.map(|v| (s.r, v)))
        .collect();
    if pts.len() < 6 {
        return Err(NumericError::InsufficientSamples { needed: 6, got: pts.len() });
    }
    let rms = |residuals: &[f64]| -> f64 {
        (residuals.iter().map(|e| e * e).sum::<f64>() / residuals.len() as f64).sqrt()
    };
    let mut candidates: Vec<GrowthFit> = Vec::new();

    let mean = pts.iter().map(|(_, v)| v).sum::<f64>() / pts.len() as f64;
    let res: Vec<f64> = pts.iter().map(|(_, v)| v - mean).collect();
    candidates.push(GrowthFit {
        model: GrowthModelKind::Constant,
        parameters: vec![mean],
        residual_rms: rms(&res),
    });

    let (a, b) = linear_regression(
        &pts.iter().map(|(r, _)| (1.0 + r).ln()).collect::<Vec<_>>(),
        &pts.iter().map(|(_, v)| *v).collect::<Vec<_>>(),
    );
    let res: Vec<f64> = pts
        .iter()
        .map(|(r, v)| v - (a + b * (1.0 + r).ln()))
        .collect();
    candidates.push(GrowthFit {
        model: GrowthModelKind::Logarithmic,
        parameters: vec![a, b],
        residual_rms: rms(&res),
    });

    let r_mid = (pts[0].0 * pts[pts.len() - 1].0).sqrt();
    let upper: Vec<&(f64, f64)> = pts.iter().filter(|(r, _)| *r >= r_mid).collect();
    if upper.len() >= 2 && upper.iter().all(|(_, v)| *v > 0.0) {
        let (lc, alpha) = linear_regression(
            &upper.iter().map(|(r, _)| r.ln()).collect::<Vec<_>>(),
            &upper.iter().map(|(_, v)| v.ln()).collect::<Vec<_>>(),
        );
        if alpha > 0.0 {
            let c = lc.exp();
            let res: Vec<f64> = pts.iter().map(|(r, v)| v - c * r.powf(alpha)).collect();
            candidates.push(GrowthFit {
                model: GrowthModelKind::Power,
                parameters: vec![c, alpha],
                residual_rms: rms(&res),
            });
        }
    }
    let best_rms = candidates
        .iter()
        .map(|c| c.residual_rms)
        .fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * (1.0 + best_rms);
    Ok(candidates
        .into_iter()
        .find(|c| c.residual_rms <= best_rms + tie)
        .expect("candidate list is nonempty"))
}

fn linear_regression(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Sampling-based boundedness verdict, any spatial dimension.
///
/// A global compactified sweep locates the largest spectral abscissa (any
/// identically vanishing slice yields an immediate unbounded verdict); the
/// classification itself reads the growth of sigma(r) over r = 2^j: a plateau
/// means bounded with omega0 at the plateau, a genuine power law means
/// unbounded, anything else is undetermined.
pub fn estimate_omega0(
    p: &OperatorSymbol,
    budget: SamplerBudget,
) -> Result<PetrovskiiVerdict, NumericError> {
    let n = p.spatial_dims();
    let mut meter = Meter::new(budget)?;
    let stream = frequency_stream(n, budget.seed, SCAN_POINTS);
    let granted = meter.take(stream.len() as u64) as usize;
    let stream = &stream[..granted];
    let values = scan_values(p, stream, f64::INFINITY)?;
    if let Some(i) = values.iter().position(|v| *v == f64::INFINITY) {
        return Ok(PetrovskiiVerdict {
            classification: Classification::Unbounded,
            omega0: Some(OmegaBound::PlusInfinity),
            method: VerdictMethod::Numeric,
            evidence: vec![
                Evidence::ZeroSlice { xi: stream[i].clone() },
                Evidence::SamplerStats {
                    root_evaluations: meter.spent,
                    seeds: granted as u32,
                    refinements: 0,
                },
            ],
        });
    }
    let mut best = scan_argmax(p, stream, &values, f64::INFINITY, &mut meter)?;
    let seeds = top_seed_indices(&values);
    let mut refinements = 0u32;
    for &i in &seeds {
        let brackets: Vec<f64> = stream[i].iter().map(|x| 0.5 * (1.0 + x.abs())).collect();
        if let Some(b) = refine_seed(p, &stream[i], f64::INFINITY, &brackets, &mut meter)? {
            if b.value == f64::INFINITY {
                return Ok(PetrovskiiVerdict {
                    classification: Classification::Unbounded,
                    omega0: Some(OmegaBound::PlusInfinity),
                    method: VerdictMethod::Numeric,
                    evidence: vec![
                        Evidence::ZeroSlice { xi: b.xi },
                        Evidence::SamplerStats {
                            root_evaluations: meter.spent,
                            seeds: seeds.len() as u32,
                            refinements,
                        },
                    ],
                });
            }
            if best.as_ref().map_or(true, |c| b.value > c.value) {
                best = Some(b);
            }
        }
        refinements += 1;
        if meter.exhausted {
            break;
        }
    }
    let radii: Vec<f64> = (0..=CURVE_OCTAVES).map(|j| 2.0f64.powi(j as i32)).collect();
    let mut samples: Vec<SigmaSample> = Vec::with_capacity(radii.len());
    for &r in &radii {
        let mut sample = sigma_of_r_metered(p, r, budget, &mut meter)?;
        if let Some(prev) = samples.last() {
            let carry = match (prev.sigma, sample.sigma) {
                (Some(a), Some(b)) => a > b,
                (Some(_), None) => true,
                _ => false,
            };
            if carry {
                sample.sigma = prev.sigma;
                sample.witness = prev.witness.clone();
            }
        }
        samples.push(sample);
    }
    let curve = SigmaCurve {
        samples,
        config_hash: config_hash(budget, n, "estimate_omega0"),
    };
    let stats = Evidence::SamplerStats {
        root_evaluations: meter.spent,
        seeds: seeds.len() as u32,
        refinements,
    };
    let defined: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .filter_map(|s| s.sigma.map(|v| (s.r, v)))
        .collect();
    if defined.is_empty() && best.is_none() {
        // Every sampled slice was a root-free constant.
        return Ok(PetrovskiiVerdict {
            classification: Classification::Bounded,
            omega0: Some(OmegaBound::MinusInfinity),
            method: VerdictMethod::Numeric,
            evidence: vec![Evidence::NoRootsAnywhere, stats],
        });
    }
    let witness_evidence = |b: &Option<ScanBest>| {
        b.as_ref().map(|b| Evidence::AbscissaWitness {
            xi: b.xi.clone(),
            value: b.value,
            lambda_re: b.lambda.re,
            lambda_im: b.lambda.im,
        })
    };
    let fit = if defined.len() >= 6 { Some(fit_growth(&curve)?) } else { None };
    if let Some(f) = &fit {
        let range = defined
            .iter()
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max)
            - defined.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
        if f.model == GrowthModelKind::Power
            && f.parameters[1] > POWER_EXPONENT_MIN
            && f.residual_rms < 0.1 * range.max(f64::MIN_POSITIVE)
        {
            let mut evidence = vec![Evidence::GrowthModel {
                model: "power".to_string(),
                parameters: f.parameters.clone(),
                residual_rms: f.residual_rms,
            }];
            if let Some(w) = witness_evidence(&best) {
                evidence.push(w);
            }
            evidence.push(stats);
            return Ok(PetrovskiiVerdict {
                classification: Classification::Unbounded,
                omega0: Some(OmegaBound::PlusInfinity),
                method: VerdictMethod::Numeric,
                evidence,
            });
        }
    }
    // Plateau test over the top octave of the radius grid.
    let r_max = radii[radii.len() - 1];
    let top: Vec<f64> = defined
        .iter()
        .filter(|(r, _)| *r >= r_max / 2.0)
        .map(|(_, v)| *v)
        .collect();
    let plateau = top.len() >= 2
        && top.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - top.iter().cloned().fold(f64::INFINITY, f64::min)
            < PLATEAU_TOL;
    if plateau {
        let mut omega = top.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if let Some(b) = &best {
            omega = omega.max(b.value);
        }
        let mut evidence = Vec::new();
        if let Some(f) = fit {
            evidence.push(Evidence::GrowthModel {
                model: match f.model {
                    GrowthModelKind::Constant => "constant",
                    GrowthModelKind::Logarithmic => "logarithmic",
                    GrowthModelKind::Power => "power",
                }
                .to_string(),
                parameters: f.parameters,
                residual_rms: f.residual_rms,
            });
        }
        if let Some(w) = witness_evidence(&best) {
            evidence.push(w);
        }
        evidence.push(stats);
        return Ok(PetrovskiiVerdict {
            classification: Classification::Bounded,
            omega0: Some(OmegaBound::Finite { value: omega }),
            method: VerdictMethod::Numeric,
            evidence,
        });
    }
    let mut evidence = Vec::new();
    if let Some(f) = fit {
        evidence.push(Evidence::GrowthModel {
            model: match f.model {
                GrowthModelKind::Constant => "constant",
                GrowthModelKind::Logarithmic => "logarithmic",
                GrowthModelKind::Power => "power",
            }
            .to_string(),
            parameters: f.parameters,
            residual_rms: f.residual_rms,
        });
    }
    if let Some(w) = witness_evidence(&best) {
        evidence.push(w);
    }
    evidence.push(stats);
    Ok(PetrovskiiVerdict {
        classification: Classification::Undetermined,
        omega0: None,
        method: VerdictMethod::Numeric,
        evidence,
    })
}

/// Searches for roots inside the region Re lambda > a + b log(1+|lambda|+|xi|).
/// Returned violations are Newton-polished and sorted by margin, largest
/// first; an empty list means none found within budget, not a proof.
pub fn check_log_region(
    p: &OperatorSymbol,
    region: LogRegion,
    budget: SamplerBudget,
) -> Result<Vec<LogViolation>, NumericError> {
    assert!(region.b >= 0.0, "log-region slope must be nonnegative");
    let n = p.spatial_dims();
    let mut meter = Meter::new(budget)?;
    let count = meter.take(budget.max_evaluations.min(1 << 20)) as usize;
    let stream = frequency_stream(n, budget.seed, count);
    let batches: Vec<Vec<LogViolation>> = stream
        .par_chunks(256)
        .map(|chunk| -> Result<Vec<LogViolation>, NumericError> {
            let mut found = Vec::new();
            for xi in chunk {
                let slice = p.lambda_slice(xi);
                if slice.is_zero() || slice.degree().map_or(true, |d| d == 0) {
                    continue;
                }
                let set = roots::roots(&slice)?;
                for root in &set.roots {
                    let polished = newton_polish(&slice, *root, 3);
                    let margin = region.margin(polished, xi);
                    if margin > 0.0 {
                        found.push(LogViolation {
                            lambda_re: polished.re,
                            lambda_im: polished.im,
                            xi: xi.clone(),
                            margin,
                        });
                    }
                }
            }
            Ok(found)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut violations: Vec<LogViolation> = batches.into_iter().flatten().collect();
    violations.sort_by(|a, b| b.margin.partial_cmp(&a.margin).unwrap());
    violations.truncate(64);
    Ok(violations)
}

fn newton_polish(slice: &LambdaPolynomial, mut z: Complex64, steps: usize) -> Complex64 {
    let deriv = slice.derivative();
    for _ in 0..steps {
        let d = deriv.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let step = slice.eval(z) / d;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::parse_operator;

    fn op(text: &str) -> OperatorSymbol {
        parse_operator(text, 1).unwrap()
    }

    fn budget() -> SamplerBudget {
        SamplerBudget::default()
    }

    #[test]
    fn halton_base_two_prefix() {
        assert!((halton(1, 2) - 0.5).abs() < 1e-15);
        assert!((halton(2, 2) - 0.25).abs() < 1e-15);
        assert!((halton(3, 2) - 0.75).abs() < 1e-15);
        assert!((halton(4, 2) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn sigma_heat_attains_zero_at_origin() {
        let s = sigma_of_r(&op("d0 - d1^2"), 2.0, budget()).unwrap();
        let sigma = s.sigma.unwrap();
        assert!(sigma.abs() <= 1e-9, "{sigma}");
        let w = s.witness.unwrap();
        assert!(w.lambda_re.abs() <= 1e-9 && w.lambda_im.abs() <= 1e-9);
        assert!(w.xi[0].abs() <= 1e-9);
    }

    #[test]
    fn sigma_respects_the_ball_constraint() {
        let p = op("d0 - 3");
        assert_eq!(sigma_of_r(&p, 2.0, budget()).unwrap().sigma, None);
        let s = sigma_of_r(&p, 5.0, budget()).unwrap();
        assert!((s.sigma.unwrap() - 3.0).abs() <= 1e-9);
    }

    #[test]
    fn sigma_monotone_over_nested_balls() {
        for text in ["d0 - d1^2", "d0 - i*(d1+1)^2", "d0 + d1^2"] {
            let p = op(text);
            let mut prev: Option<f64> = None;
            for r in [1.0, 2.0, 4.0, 8.0] {
                let s = sigma_of_r(&p, r, budget()).unwrap();
                if let (Some(a), Some(b)) = (prev, s.sigma) {
                    assert!(a <= b + 1e-9, "{text}: sigma({r}) dropped {a} -> {b}");
                }
                prev = s.sigma.or(prev);
            }
        }
    }

    #[test]
    fn degenerate_slice_fills_the_lambda_ball() {
        // At xi = 0 the slice of d1*d0 vanishes identically, so the
        // admissible lambda disk has radius r/sqrt(2).
        let s = sigma_of_r(&op("d1*d0"), 2.0, budget()).unwrap();
        assert!((s.sigma.unwrap() - 2.0f64.sqrt()).abs() <= 1e-9);
    }

    #[test]
    fn curve_rejects_bad_radii() {
        let p = op("d0 - d1^2");
        assert!(matches!(
            sigma_curve(&p, &[2.0, 1.0], budget()),
            Err(NumericError::BadRadii)
        ));
        assert!(matches!(
            sigma_curve(&p, &[], budget()),
            Err(NumericError::BadRadii)
        ));
        assert!(matches!(
            sigma_of_r(&p, -1.0, budget()),
            Err(NumericError::BadRadii)
        ));
    }

    #[test]
    fn curve_csv_has_empty_fields_for_undefined_samples() {
        let curve = sigma_curve(&op("d0 - 3"), &[1.0, 8.0], budget()).unwrap();
        let csv = curve.to_csv(1);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "r,sigma,lambda_re,lambda_im,xi_0");
        assert_eq!(lines.next().unwrap(), "1,,,,");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "8");
        assert!((row[1].parse::<f64>().unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn fit_recovers_constant_log_and_power() {
        let mk = |f: &dyn Fn(f64) -> f64| SigmaCurve {
            samples: (0..=8)
                .map(|j| {
                    let r = 2.0f64.powi(j);
                    SigmaSample {
                        r,
                        sigma: Some(f(r)),
                        witness: None,
                        low_confidence: false,
                    }
                })
                .collect(),
            config_hash: String::new(),
        };
        let c = fit_growth(&mk(&|_| 0.0)).unwrap();
        assert_eq!(c.model, GrowthModelKind::Constant);
        assert!(c.parameters[0].abs() < 1e-12);

        let l = fit_growth(&mk(&|r| 2.0 + 3.0 * (1.0 + r).ln())).unwrap();
        assert_eq!(l.model, GrowthModelKind::Logarithmic);
        assert!((l.parameters[0] - 2.0).abs() < 1e-6);
        assert!((l.parameters[1] - 3.0).abs() < 1e-6);

        let w = fit_growth(&mk(&|r| 0.5 * r.sqrt())).unwrap();
        assert_eq!(w.model, GrowthModelKind::Power);
        assert!((w.parameters[1] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn fit_needs_six_samples() {
        let curve = SigmaCurve {
            samples: (0..5)
                .map(|j| SigmaSample {
                    r: 2.0f64.powi(j),
                    sigma: Some(1.0),
                    witness: None,
                    low_confidence: false,
                })
                .collect(),
            config_hash: String::new(),
        };
        assert!(matches!(
            fit_growth(&curve),
            Err(NumericError::InsufficientSamples { needed: 6, got: 5 })
        ));
    }

    #[test]
    fn estimates_match_known_bounds() {
        let v = estimate_omega0(&op("d0 - d1^2"), budget()).unwrap();
        assert_eq!(v.classification, Classification::Bounded);
        assert!(v.omega0_f64().abs() <= 1e-6);

        let v = estimate_omega0(&op("d0 - 3"), budget()).unwrap();
        assert_eq!(v.classification, Classification::Bounded);
        assert!((v.omega0_f64() - 3.0).abs() <= 1e-6);
    }

    #[test]
    fn estimate_flags_power_growth_as_unbounded() {
        for text in ["d0 + d1^2", "d0 - i*(d1+1)^2"] {
            let v = estimate_omega0(&op(text), budget()).unwrap();
            assert_eq!(v.classification, Classification::Unbounded, "{text}");
            let alpha = v
                .evidence
                .iter()
                .find_map(|e| match e {
                    Evidence::GrowthModel { model, parameters, .. } if model == "power" => {
                        Some(parameters[1])
                    }
                    _ => None,
                })
                .expect("power model evidence");
            assert!(alpha > 0.3 && alpha < 1.2, "{text}: alpha = {alpha}");
        }
    }

    #[test]
    fn degenerate_slice_is_immediately_unbounded() {
        let v = estimate_omega0(&op("d1"), budget()).unwrap();
        assert_eq!(v.classification, Classification::Unbounded);
        assert!(matches!(v.evidence[0], Evidence::ZeroSlice { .. }));
    }

    #[test]
    fn rootless_operator_estimates_to_minus_infinity() {
        let v = estimate_omega0(&op("1"), budget()).unwrap();
        assert_eq!(v.classification, Classification::Bounded);
        assert_eq!(v.omega0, Some(OmegaBound::MinusInfinity));
    }

    #[test]
    fn log_region_clear_for_heat() {
        let hits = check_log_region(
            &op("d0 - d1^2"),
            LogRegion { a: 1.0, b: 1.0 },
            SamplerBudget { max_evaluations: 20_000, seed: 0 },
        )
        .unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn log_region_violated_with_checkable_witness() {
        let p = op("d0 - i*(d1+1)^2");
        let hits = check_log_region(
            &p,
            LogRegion { a: 0.0, b: 1.0 },
            SamplerBudget { max_evaluations: 20_000, seed: 0 },
        )
        .unwrap();
        assert!(!hits.is_empty());
        let top = &hits[0];
        assert!(top.margin > 0.0);
        let residual = p
            .eval(Complex64::new(top.lambda_re, top.lambda_im), &top.xi)
            .norm();
        assert!(residual <= 1e-8, "witness residual {residual}");
    }

    #[test]
    fn empty_budget_is_an_error() {
        let b = SamplerBudget { max_evaluations: 0, seed: 0 };
        assert!(matches!(
            sigma_of_r(&op("d0"), 1.0, b),
            Err(NumericError::EmptyBudget)
        ));
    }

    #[test]
    fn results_are_reproducible() {
        let p = op("d0 - i*(d1+1)^2");
        let a = sigma_of_r(&p, 8.0, budget()).unwrap();
        let b = sigma_of_r(&p, 8.0, budget()).unwrap();
        assert_eq!(a, b);
        let va = estimate_omega0(&p, budget()).unwrap();
        let vb = estimate_omega0(&p, budget()).unwrap();
        assert_eq!(serde_json::to_string(&va).unwrap(), serde_json::to_string(&vb).unwrap());
    }
}
