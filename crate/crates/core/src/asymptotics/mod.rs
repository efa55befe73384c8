//! Exact boundedness classification for operators with one spatial variable.
//!
//! The λ-roots of the slice family P(λ, iξ) are expanded at ξ → ±∞ as
//! fractional-power series (Newton polygon plus edge-polynomial recursion).
//! Whether sup over real ξ of the spectral abscissa is finite can be read off
//! the branch coefficients: a branch sheet whose first non-imaginary
//! coefficient at a positive exponent has positive real part drives the
//! abscissa to +∞; otherwise every sheet contributes a finite limit and the
//! supremum is attained over a compact frequency interval, which a dense scan
//! with golden-section refinement then resolves.

mod puiseux;

use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::AsymptoticsError;
use crate::roots;
use crate::symbol::OperatorSymbol;
use crate::verdict::{Classification, Evidence, OmegaBound, PetrovskiiVerdict, VerdictMethod};

/// Hard cap on the number of series terms per branch.
pub const DEPTH_CAP: usize = 32;
/// Default number of series terms per branch.
pub const DEFAULT_DEPTH: usize = 8;
/// |Re c| ≤ IMAG_TOL·|c| is treated as a purely imaginary coefficient.
pub const IMAG_TOL: f64 = 1e-10;
/// |Re c| ≥ DECISIVE_REL·|c| decides a sign; the band between the two
/// thresholds escalates instead of guessing.
pub const DECISIVE_REL: f64 = 1e-7;

/// Frequency direction of an expansion at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    PlusInfinity,
    MinusInfinity,
}

impl Direction {
    pub fn both() -> [Direction; 2] {
        [Direction::PlusInfinity, Direction::MinusInfinity]
    }

    fn toward_plus(self) -> bool {
        matches!(self, Direction::PlusInfinity)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::PlusInfinity => write!(f, "+inf"),
            Direction::MinusInfinity => write!(f, "-inf"),
        }
    }
}

/// One lower-hull edge of the exponent diagram at infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonEdge {
    /// Candidate leading exponent of a root branch in |ξ|.
    pub exponent: Ratio<i64>,
    /// Diagram points supporting the edge: (λ power, cleared 1/ξ power).
    pub points: Vec<(u32, i64)>,
}

/// One root branch λ(ξ) = Σ c_p |ξ|^{e_p} at large |ξ|, with its conjugate
/// sheets represented implicitly through the ramification index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuiseuxBranch {
    pub direction: Direction,
    /// Common denominator of the exponents; the deck group has this order.
    pub ramification: u32,
    /// (exponent, principal-sheet coefficient), strictly decreasing exponents.
    /// Empty iff the branch is identically zero.
    pub terms: Vec<(Ratio<i64>, Complex64)>,
    /// Number of conjugate sheets (= ramification).
    pub sheet_count: u32,
    /// Coincident copies of this branch (squarefree symbols give 1).
    pub multiplicity: u32,
    /// True when the series terminated with an exactly vanishing remainder,
    /// i.e. the partial sum is the exact root.
    pub exact: bool,
}

impl PuiseuxBranch {
    /// Whether this is the identically-zero root branch.
    pub fn is_identically_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of term `term` on conjugate sheet `sheet`: the principal
    /// coefficient twisted by the root of unity e^{i2πdn/q} where the term
    /// exponent is n/q over the common denominator q.
    pub fn sheet_coefficient(&self, term: usize, sheet: u32) -> Complex64 {
        let (e, c) = self.terms[term];
        let q = self.ramification.max(1) as i64;
        let scaled = e * Ratio::from_integer(q);
        debug_assert!(scaled.is_integer(), "exponent denominator must divide q");
        let n = scaled.to_integer();
        let angle = 2.0 * std::f64::consts::PI * sheet as f64 * n as f64 / q as f64;
        c * Complex64::from_polar(1.0, angle)
    }

    /// Partial sum of the series on the given sheet at |ξ| = xi_abs > 0.
    pub fn evaluate_sheet(&self, sheet: u32, xi_abs: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.terms.len() {
            let (e, _) = self.terms[i];
            let ef = *e.numer() as f64 / *e.denom() as f64;
            acc += self.sheet_coefficient(i, sheet) * xi_abs.powf(ef);
        }
        acc
    }
}

/// Classification of one branch across all of its sheets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchClass {
    /// Every sheet has Re λ bounded above; `limit` is the largest sheet limit
    /// of Re λ at infinity (−∞ when every sheet decays to −∞).
    BoundedAbove { limit: f64 },
    /// Some sheet drives Re λ → +∞; `sheet` is a witness.
    UnboundedAbove { sheet: u32 },
    /// The computed terms do not decide; more terms are required.
    NeedsDeeper,
}

fn check_1d(p: &OperatorSymbol) -> Result<(), AsymptoticsError> {
    if p.spatial_dims() != 1 {
        return Err(AsymptoticsError::NotOneDimensional(p.spatial_dims()));
    }
    Ok(())
}

/// Lower-hull edges of the exponent diagram of P(λ, iξ) at ξ → direction,
/// ordered by decreasing candidate exponent.
pub fn newton_polygon(
    p: &OperatorSymbol,
    direction: Direction,
) -> Result<Vec<PolygonEdge>, AsymptoticsError> {
    check_1d(p)?;
    if !p.involves_lambda() {
        return Err(AsymptoticsError::NoLambdaVariable);
    }
    let mut edges: Vec<PolygonEdge> = puiseux::polygon_edges(p, direction.toward_plus())
        .into_iter()
        .map(|(slope, points)| PolygonEdge { exponent: slope, points })
        .collect();
    edges.sort_by(|a, b| b.exponent.cmp(&a.exponent));
    Ok(edges)
}

/// All root branches of P at ξ → direction, to at most `depth` terms each.
/// Ordered by decreasing leading exponent, then leading coefficient.
pub fn puiseux_branches(
    p: &OperatorSymbol,
    direction: Direction,
    depth: usize,
) -> Result<Vec<PuiseuxBranch>, AsymptoticsError> {
    check_1d(p)?;
    if !p.involves_lambda() {
        return Err(AsymptoticsError::NoLambdaVariable);
    }
    if depth == 0 || depth > DEPTH_CAP {
        return Err(AsymptoticsError::DepthExceeded { requested: depth, cap: DEPTH_CAP });
    }
    let raw = puiseux::expand(p, direction.toward_plus(), depth)?;
    let mut out: Vec<PuiseuxBranch> = raw
        .into_iter()
        .map(|b| PuiseuxBranch {
            direction,
            ramification: b.ramification as u32,
            sheet_count: b.ramification as u32,
            terms: b.terms,
            multiplicity: b.multiplicity,
            exact: b.exact,
        })
        .collect();
    out.sort_by(|a, b| {
        let ka = a.terms.first().map(|(e, c)| (*e, c.re, c.im));
        let kb = b.terms.first().map(|(e, c)| (*e, c.re, c.im));
        match (ka, kb) {
            (Some((ea, ra, ia)), Some((eb, rb, ib))) => eb
                .cmp(&ea)
                .then(ra.partial_cmp(&rb).unwrap())
                .then(ia.partial_cmp(&ib).unwrap()),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        }
    });
    Ok(out)
}

enum SheetClass {
    Unbounded,
    Limit(f64),
    Needs,
}

fn classify_sheet(b: &PuiseuxBranch, sheet: u32) -> SheetClass {
    let mut limit = 0.0f64;
    for (idx, &(e, _)) in b.terms.iter().enumerate() {
        let tc = b.sheet_coefficient(idx, sheet);
        if e > Ratio::zero() {
            let m = tc.norm();
            if m == 0.0 {
                continue;
            }
            let re = tc.re.abs();
            if re <= IMAG_TOL * m {
                continue;
            }
            if re >= DECISIVE_REL * m {
                return if tc.re > 0.0 {
                    SheetClass::Unbounded
                } else {
                    SheetClass::Limit(f64::NEG_INFINITY)
                };
            }
            // Borderline real part: refuse to guess the sign.
            return SheetClass::Needs;
        } else if e == Ratio::zero() {
            limit += tc.re;
        } else {
            // Negative exponents vanish at infinity; the scan is complete.
            return SheetClass::Limit(limit);
        }
    }
    let settled = b.exact || b.terms.last().map_or(true, |(e, _)| *e <= Ratio::zero());
    if settled {
        SheetClass::Limit(limit)
    } else {
        SheetClass::Needs
    }
}

/// Scans the terms of each sheet in decreasing exponent order and decides
/// whether Re λ is bounded above along the branch.
pub fn classify_branch(b: &PuiseuxBranch) -> BranchClass {
    let q = b.ramification.max(1);
    let mut best = f64::NEG_INFINITY;
    let mut needs = false;
    for d in 0..q {
        match classify_sheet(b, d) {
            SheetClass::Unbounded => return BranchClass::UnboundedAbove { sheet: d },
            SheetClass::Limit(v) => best = best.max(v),
            SheetClass::Needs => needs = true,
        }
    }
    if needs {
        BranchClass::NeedsDeeper
    } else {
        BranchClass::BoundedAbove { limit: best }
    }
}

/// Coefficients of Q(iξ) as a polynomial in ξ, lowest power first, for a
/// symbol that does not involve λ.
fn xi_poly_coeffs(q: &OperatorSymbol) -> Vec<Complex64> {
    let deg = q.terms().iter().map(|t| t.exponents[1]).max().unwrap_or(0) as usize;
    let mut c = vec![Complex64::new(0.0, 0.0); deg + 1];
    for t in q.terms() {
        let j = t.exponents[1];
        c[j as usize] += t.coeff * Complex64::new(0.0, 1.0).powu(j);
    }
    c
}

/// A real frequency at which every λ-coefficient vanishes, if one exists:
/// there the frozen slice is the zero polynomial and every λ is a root.
fn zero_slice_xi(p: &OperatorSymbol) -> Result<Option<f64>, AsymptoticsError> {
    if p.is_zero() {
        return Ok(Some(0.0));
    }
    let qs = p.lambda_coefficients();
    let nonzero: Vec<&OperatorSymbol> = qs.iter().filter(|q| !q.is_zero()).collect();
    let pivot = nonzero
        .iter()
        .min_by_key(|q| q.total_degree())
        .expect("a nonzero symbol has a nonzero coefficient");
    if pivot.total_degree() == 0 {
        return Ok(None);
    }
    let set = roots::roots(&crate::symbol::LambdaPolynomial::new(
        xi_poly_coeffs(pivot),
        Vec::new(),
    ))?;
    let mut candidates: Vec<f64> = set
        .roots
        .iter()
        .filter(|r| r.im.abs() <= 1e-8 * (1.0 + r.re.abs()))
        .map(|r| r.re)
        .collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for x0 in candidates {
        let all_vanish = nonzero.iter().all(|q| {
            let scale = q.coeff_scale() * x0.abs().max(1.0).powi(q.total_degree() as i32);
            q.eval(Complex64::new(0.0, 0.0), &[x0]).norm() <= 1e-9 * scale
        });
        if all_vanish {
            return Ok(Some(x0));
        }
    }
    Ok(None)
}

/// Interval radius beyond which every asymptotic regime is active: twice
/// (1 + the largest root modulus over all λ-coefficients + the largest root
/// modulus of the leading λ-coefficient).
fn xi_star(p: &OperatorSymbol) -> Result<f64, AsymptoticsError> {
    let qs = p.lambda_coefficients();
    let m = qs.len() - 1;
    let mut max_all = 0.0f64;
    let mut max_lead = 0.0f64;
    for (k, q) in qs.iter().enumerate() {
        if q.is_zero() || q.total_degree() == 0 {
            continue;
        }
        let set = roots::roots(&crate::symbol::LambdaPolynomial::new(
            xi_poly_coeffs(q),
            Vec::new(),
        ))?;
        let mx = set.roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
        max_all = max_all.max(mx);
        if k == m {
            max_lead = mx;
        }
    }
    Ok(2.0 * (1.0 + max_all + max_lead))
}

/// Extended-real spectral abscissa at one frequency.
fn abscissa(p: &OperatorSymbol, x: f64) -> Result<f64, AsymptoticsError> {
    Ok(roots::spectral_abscissa(p, &[x])?.as_f64())
}

fn golden_max<F>(mut f: F, mut a: f64, mut b: f64) -> Result<(f64, f64), AsymptoticsError>
where
    F: FnMut(f64) -> Result<f64, AsymptoticsError>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..90 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

struct FiniteScan {
    best: f64,
    xi: f64,
    lambda: Complex64,
}

/// Dense scan of the abscissa over [−Ξ*, Ξ*] with golden-section refinement
/// of the best local maxima, plus a geometric tail probe to catch suprema
/// approached from above beyond the compact interval.
fn finite_sup(p: &OperatorSymbol, xi_star: f64) -> Result<FiniteScan, AsymptoticsError> {
    const SAMPLES: usize = 4097;
    let step = 2.0 * xi_star / (SAMPLES - 1) as f64;
    let mut vals = vec![f64::NEG_INFINITY; SAMPLES];
    for (i, v) in vals.iter_mut().enumerate() {
        *v = abscissa(p, -xi_star + step * i as f64)?;
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_xi = 0.0f64;
    let mut maxima: Vec<usize> = (0..SAMPLES)
        .filter(|&i| {
            vals[i].is_finite()
                && (i == 0 || vals[i] >= vals[i - 1])
                && (i == SAMPLES - 1 || vals[i] >= vals[i + 1])
        })
        .collect();
    maxima.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
    maxima.truncate(8);
    for &i in &maxima {
        if vals[i] > best {
            best = vals[i];
            best_xi = -xi_star + step * i as f64;
        }
        let lo = (-xi_star + step * (i as f64 - 1.0)).max(-xi_star);
        let hi = (-xi_star + step * (i as f64 + 1.0)).min(xi_star);
        let (x, v) = golden_max(|x| abscissa(p, x), lo, hi)?;
        if v > best {
            best = v;
            best_xi = x;
        }
    }
    // Tail probe out to 2^10 · Ξ* in both directions.
    for j in 1..=80 {
        let m = xi_star * 2.0f64.powf(j as f64 / 8.0);
        for &x in &[m, -m] {
            let v = abscissa(p, x)?;
            if v > best {
                best = v;
                best_xi = x;
            }
        }
    }
    let lambda = if best.is_finite() {
        let set = roots::roots(&p.lambda_slice(&[best_xi]))?;
        set.roots
            .iter()
            .max_by(|a, b| a.re.partial_cmp(&b.re).unwrap())
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(FiniteScan { best, xi: best_xi, lambda })
}

fn branch_evidence(b: &PuiseuxBranch, class: &BranchClass) -> Evidence {
    Evidence::BranchSummary {
        direction: b.direction.to_string(),
        exponents: b.terms.iter().map(|(e, _)| e.to_string()).collect(),
        leading_coeff: b.terms.first().map(|(_, c)| (c.re, c.im)),
        ramification: b.ramification,
        multiplicity: b.multiplicity,
        exact: b.exact,
        class: match class {
            BranchClass::BoundedAbove { .. } => "bounded_above",
            BranchClass::UnboundedAbove { .. } => "unbounded_above",
            BranchClass::NeedsDeeper => "needs_deeper",
        }
        .to_string(),
        sheet: match class {
            BranchClass::UnboundedAbove { sheet } => Some(*sheet),
            _ => None,
        },
        limit: match class {
            BranchClass::BoundedAbove { limit } if limit.is_finite() => Some(*limit),
            _ => None,
        },
    }
}

/// Exact boundedness verdict for one spatial variable, starting from the
/// default expansion depth and escalating to the cap when needed.
pub fn petrovskii_verdict_exact_1d(
    p: &OperatorSymbol,
) -> Result<PetrovskiiVerdict, AsymptoticsError> {
    exact_verdict_with_depth(p, DEFAULT_DEPTH)
}

/// Exact boundedness verdict with a caller-chosen starting depth.
pub fn exact_verdict_with_depth(
    p: &OperatorSymbol,
    depth: usize,
) -> Result<PetrovskiiVerdict, AsymptoticsError> {
    check_1d(p)?;
    if depth == 0 || depth > DEPTH_CAP {
        return Err(AsymptoticsError::DepthExceeded { requested: depth, cap: DEPTH_CAP });
    }
    if let Some(x0) = zero_slice_xi(p)? {
        return Ok(PetrovskiiVerdict {
            classification: Classification::Unbounded,
            omega0: Some(OmegaBound::PlusInfinity),
            method: VerdictMethod::Exact1d,
            evidence: vec![Evidence::ZeroSlice { xi: vec![x0] }],
        });
    }
    if !p.involves_lambda() {
        // Every slice is a nonzero constant: the symbol has no roots at all.
        return Ok(PetrovskiiVerdict {
            classification: Classification::Bounded,
            omega0: Some(OmegaBound::MinusInfinity),
            method: VerdictMethod::Exact1d,
            evidence: vec![Evidence::NoRootsAnywhere],
        });
    }
    let mut d = depth;
    let (branches, classes) = loop {
        let mut branches = Vec::new();
        for dir in Direction::both() {
            branches.extend(puiseux_branches(p, dir, d)?);
        }
        let classes: Vec<BranchClass> = branches.iter().map(classify_branch).collect();
        let unbounded = classes.iter().any(|c| matches!(c, BranchClass::UnboundedAbove { .. }));
        let needs = classes.iter().any(|c| matches!(c, BranchClass::NeedsDeeper));
        if unbounded || !needs || d >= DEPTH_CAP {
            break (branches, classes);
        }
        d = (d * 2).min(DEPTH_CAP);
    };
    let summaries: Vec<Evidence> = branches
        .iter()
        .zip(&classes)
        .map(|(b, c)| branch_evidence(b, c))
        .collect();
    if classes.iter().any(|c| matches!(c, BranchClass::UnboundedAbove { .. })) {
        return Ok(PetrovskiiVerdict {
            classification: Classification::Unbounded,
            omega0: Some(OmegaBound::PlusInfinity),
            method: VerdictMethod::Exact1d,
            evidence: summaries,
        });
    }
    if classes.iter().any(|c| matches!(c, BranchClass::NeedsDeeper)) {
        return Ok(PetrovskiiVerdict {
            classification: Classification::Undetermined,
            omega0: None,
            method: VerdictMethod::Exact1d,
            evidence: summaries,
        });
    }
    let scan = finite_sup(p, xi_star(p)?)?;
    if scan.best == f64::INFINITY {
        // A degenerate slice surfaced during the scan.
        return Ok(PetrovskiiVerdict {
            classification: Classification::Unbounded,
            omega0: Some(OmegaBound::PlusInfinity),
            method: VerdictMethod::Exact1d,
            evidence: vec![Evidence::ZeroSlice { xi: vec![scan.xi] }],
        });
    }
    let mut omega = scan.best;
    for class in &classes {
        if let BranchClass::BoundedAbove { limit } = class {
            omega = omega.max(*limit);
        }
    }
    let mut evidence = vec![Evidence::FiniteSup {
        xi: vec![scan.xi],
        value: scan.best,
        lambda_re: scan.lambda.re,
        lambda_im: scan.lambda.im,
    }];
    evidence.extend(summaries);
    Ok(PetrovskiiVerdict {
        classification: Classification::Bounded,
        omega0: Some(OmegaBound::from_f64(omega)),
        method: VerdictMethod::Exact1d,
        evidence,
    })
}
