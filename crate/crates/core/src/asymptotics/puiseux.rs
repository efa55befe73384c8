//! Internal Newton-polygon recursion.
//!
//! The operator symbol P(λ, iξ) with one spatial variable is rewritten at
//! ξ → ±∞ by substituting ξ = ±1/t and clearing denominators, giving a
//! polynomial G(λ, t) whose root branches λ(t) at t → 0⁺ are exactly the
//! large-frequency root branches of the slice family. Each branch is expanded
//! as a fractional-power series by the classical polygon iteration: pick a
//! lower-hull edge, solve its edge polynomial for the leading coefficient,
//! substitute λ = τ^{-u}(c + μ), t = τ^v, and recurse on the correction μ.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Ratio;

use crate::error::AsymptoticsError;
use crate::roots;
use crate::symbol::{LambdaPolynomial, OperatorSymbol};

/// Coefficients produced by a substitution below this size, relative to the
/// largest coefficient of the substituted polynomial, are treated as exact
/// cancellations and dropped.
const PRUNE_REL: f64 = 1e-12;

/// Edge-polynomial roots closer than this (relative) are merged into one
/// multiple root and expanded as a single cluster.
const CLUSTER_REL: f64 = 1e-5;

/// Accumulated ramification beyond this is numerically meaningless; the
/// expansion stops and reports the branch as inexact.
const RAMIFICATION_CAP: i64 = 1 << 20;

/// One expanded root branch in the variable η = |ξ|.
#[derive(Debug, Clone)]
pub(super) struct RawBranch {
    /// (exponent, principal-sheet coefficient), strictly decreasing exponents.
    pub terms: Vec<(Ratio<i64>, Complex64)>,
    /// Product of the substitution ramifications along the expansion path.
    pub ramification: i64,
    /// Number of coincident root branches sharing these terms.
    pub multiplicity: u32,
    /// True when the expansion closed with an exactly vanishing remainder.
    pub exact: bool,
}

/// Sparse polynomial in the current root variable and the perturbation
/// variable; the perturbation variable tends to 0⁺.
#[derive(Debug, Clone)]
struct BiPoly {
    /// (root-variable power, perturbation power, coefficient); sorted keys,
    /// no zero coefficients.
    terms: Vec<(u32, i64, Complex64)>,
}

impl BiPoly {
    fn from_map(map: BTreeMap<(u32, i64), Complex64>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|((k, j), a)| (k, j, a))
            .collect();
        BiPoly { terms }
    }

    /// Clears denominators of P(λ, ±i/t): term λ^k (iξ)^j picks up t^{J−j}
    /// where J is the largest spatial exponent.
    fn from_symbol(p: &OperatorSymbol, toward_plus: bool) -> Self {
        let dir = Complex64::new(0.0, if toward_plus { 1.0 } else { -1.0 });
        let jmax = p
            .terms()
            .iter()
            .map(|t| t.exponents[1])
            .max()
            .unwrap_or(0) as i64;
        let mut map: BTreeMap<(u32, i64), Complex64> = BTreeMap::new();
        for t in p.terms() {
            let k = t.exponents[0];
            let j = t.exponents[1];
            let coeff = t.coeff * dir.powu(j);
            *map.entry((k, jmax - j as i64))
                .or_insert(Complex64::new(0.0, 0.0)) += coeff;
        }
        BiPoly::from_map(map)
    }

    fn coeff(&self, k: u32, j: i64) -> Complex64 {
        self.terms
            .iter()
            .find(|t| t.0 == k && t.1 == j)
            .map(|t| t.2)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Minimal perturbation power per root-variable power, ascending.
    fn min_powers(&self) -> Vec<(i64, i64)> {
        let mut m: BTreeMap<i64, i64> = BTreeMap::new();
        for &(k, j, _) in &self.terms {
            m.entry(k as i64)
                .and_modify(|e| {
                    if j < *e {
                        *e = j;
                    }
                })
                .or_insert(j);
        }
        m.into_iter().collect()
    }

    /// τ^{shift} · F(τ^{-u}(c + μ), τ^v), normalized so the smallest
    /// perturbation power is 0, with cancellation noise pruned.
    fn substitute(&self, u: i64, v: i64, c: Complex64) -> BiPoly {
        let kmax = self.terms.iter().map(|t| t.0).max().unwrap_or(0) as usize;
        let mut cpow = vec![Complex64::new(1.0, 0.0); kmax + 1];
        for i in 1..=kmax {
            cpow[i] = cpow[i - 1] * c;
        }
        let mut map: BTreeMap<(u32, i64), Complex64> = BTreeMap::new();
        for &(k, j, a) in &self.terms {
            let base = v * j - u * k as i64;
            let mut binom = 1.0f64;
            for l in 0..=k as usize {
                *map.entry((l as u32, base))
                    .or_insert(Complex64::new(0.0, 0.0)) += a * binom * cpow[k as usize - l];
                binom = binom * (k as usize - l) as f64 / (l + 1) as f64;
            }
        }
        let scale = map.values().map(|a| a.norm()).fold(0.0, f64::max);
        let mut terms: Vec<(u32, i64, Complex64)> = map
            .into_iter()
            .filter(|(_, a)| a.norm() > PRUNE_REL * scale)
            .map(|((k, j), a)| (k, j, a))
            .collect();
        let minj = terms.iter().map(|t| t.1).min().unwrap_or(0);
        for t in &mut terms {
            t.1 -= minj;
        }
        BiPoly { terms }
    }
}

/// Strict lower convex hull (collinear interior points dropped) of points
/// sorted by ascending abscissa with unique abscissas.
fn lower_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) as i128 * (p.1 - a.1) as i128
                - (b.1 - a.1) as i128 * (p.0 - a.0) as i128;
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Lower-hull edges of the exponent diagram of P at the requested direction,
/// as (slope, points of the diagram lying exactly on the edge).
pub(super) fn polygon_edges(
    p: &OperatorSymbol,
    toward_plus: bool,
) -> Vec<(Ratio<i64>, Vec<(u32, i64)>)> {
    let g = BiPoly::from_symbol(p, toward_plus);
    let points = g.min_powers();
    let hull = lower_hull(&points);
    let mut out = Vec::new();
    for w in hull.windows(2) {
        let (k1, j1) = w[0];
        let (k2, j2) = w[1];
        let slope = Ratio::new(j2 - j1, k2 - k1);
        let on_edge = points
            .iter()
            .filter(|&&(k, j)| {
                k1 <= k
                    && k <= k2
                    && (k - k1) as i128 * (j2 - j1) as i128
                        == (j - j1) as i128 * (k2 - k1) as i128
            })
            .map(|&(k, j)| (k as u32, j))
            .collect();
        out.push((slope, on_edge));
    }
    out
}

/// Deterministic clustering of near-coincident roots: (center, multiplicity).
fn cluster(roots: &[Complex64]) -> Vec<(Complex64, u32)> {
    let mut rs: Vec<Complex64> = roots.to_vec();
    rs.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut used = vec![false; rs.len()];
    let mut out = Vec::new();
    for i in 0..rs.len() {
        if used[i] {
            continue;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut count = 0u32;
        for j in i..rs.len() {
            if !used[j] && (rs[j] - rs[i]).norm() <= CLUSTER_REL * (1.0 + rs[i].norm()) {
                used[j] = true;
                sum += rs[j];
                count += 1;
            }
        }
        out.push((sum / count as f64, count));
    }
    out
}

fn principal_nth_root(y: Complex64, v: i64) -> Complex64 {
    if v == 1 {
        y
    } else {
        y.powf(1.0 / v as f64)
    }
}

/// Expands all root branches of the symbol at ξ → +∞ (or −∞), to at most
/// `depth` terms per branch.
pub(super) fn expand(
    sym: &OperatorSymbol,
    toward_plus: bool,
    depth: usize,
) -> Result<Vec<RawBranch>, AsymptoticsError> {
    let g = BiPoly::from_symbol(sym, toward_plus);
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    descend(&g, depth, true, Ratio::from_integer(0), 1, &mut prefix, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    f: &BiPoly,
    depth: usize,
    top: bool,
    factor_exp: Ratio<i64>,
    ram: i64,
    prefix: &mut Vec<(Ratio<i64>, Complex64)>,
    out: &mut Vec<RawBranch>,
) -> Result<(), AsymptoticsError> {
    let points = f.min_powers();
    if points.is_empty() {
        return Ok(());
    }
    let k_min = points[0].0;
    if k_min > 0 {
        // The root variable divides the remainder exactly: the series closes
        // here. At the top level this is the identically-zero root branch.
        out.push(RawBranch {
            terms: prefix.clone(),
            ramification: ram,
            multiplicity: k_min as u32,
            exact: true,
        });
    }
    if points.len() < 2 {
        return Ok(());
    }
    let hull = lower_hull(&points);
    for w in hull.windows(2) {
        let (k1, j1) = w[0];
        let (k2, j2) = w[1];
        let slope = Ratio::new(j2 - j1, k2 - k1);
        // In the recursion only vanishing corrections continue the branch.
        if !top && slope >= Ratio::from_integer(0) {
            continue;
        }
        let u = *slope.numer();
        let v = *slope.denom();
        let len = ((k2 - k1) / v) as usize;
        let mut edge = vec![Complex64::new(0.0, 0.0); len + 1];
        for (l, e) in edge.iter_mut().enumerate() {
            *e = f.coeff((k1 + l as i64 * v) as u32, j1 + l as i64 * u);
        }
        let set = roots::roots(&LambdaPolynomial::new(edge, Vec::new()))?;
        for (y, mult) in cluster(&set.roots) {
            let c = principal_nth_root(y, v);
            let exp = factor_exp + Ratio::new(u, ram * v);
            let new_ram = ram * v;
            prefix.push((exp, c));
            if prefix.len() >= depth || new_ram > RAMIFICATION_CAP {
                out.push(RawBranch {
                    terms: prefix.clone(),
                    ramification: new_ram,
                    multiplicity: mult,
                    exact: false,
                });
            } else {
                let next = f.substitute(u, v, c);
                let before = out.len();
                descend(&next, depth, false, exp, new_ram, prefix, out)?;
                if out.len() == before {
                    // Numerical dead end: no continuation was recoverable.
                    out.push(RawBranch {
                        terms: prefix.clone(),
                        ramification: new_ram,
                        multiplicity: mult,
                        exact: false,
                    });
                }
            }
            prefix.pop();
        }
    }
    Ok(())
}
