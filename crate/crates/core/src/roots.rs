//! Simultaneous root finding for frozen lambda-polynomials and the spectral
//! abscissa a(xi) = max Re lambda over the roots of a slice.

use crate::error::RootError;
use crate::symbol::{LambdaPolynomial, OperatorSymbol};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Leading coefficients at or below this fraction of the largest coefficient
/// magnitude are treated as zero before root finding (degree deflation).
pub const LEADING_TRIM_REL: f64 = 1e-14;

/// Per-root residual acceptance: |p(r)| <= RESIDUAL_REL * sum_k |c_k| max(1,|r|)^k.
pub const RESIDUAL_REL: f64 = 1e-9;

const CORRECTION_TOL: f64 = 1e-13;
const MAX_ITERATIONS: usize = 300;
const POLISH_STEPS: usize = 3;

/// Roots of a deflated lambda-polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    /// One entry per root of the deflated polynomial, unordered multiset.
    pub roots: Vec<Complex64>,
    /// max over roots of |p(root)| / (sum_k |c_k| max(1,|root|)^k).
    pub residual_bound: f64,
    /// Degree after trimming near-zero leading coefficients.
    pub deflated_degree: usize,
}

/// The spectral abscissa of one frozen slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbscissaValue {
    /// max Re lambda over the roots of the slice.
    Finite { value: f64 },
    /// The slice is a nonzero constant: no lambda is a root.
    NoRoots,
    /// The slice vanishes identically: every lambda is a root.
    AllLambda,
}

impl AbscissaValue {
    /// Collapses to the extended real line: NoRoots -> -inf, AllLambda -> +inf.
    pub fn as_f64(&self) -> f64 {
        match self {
            AbscissaValue::Finite { value } => *value,
            AbscissaValue::NoRoots => f64::NEG_INFINITY,
            AbscissaValue::AllLambda => f64::INFINITY,
        }
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        d = d * z + p;
        p = p * z + c;
    }
    (p, d)
}

/// Residual scale sum_k |c_k| max(1,|r|)^k for one candidate root.
fn residual_scale(coeffs: &[Complex64], r: Complex64) -> f64 {
    let b = r.norm().max(1.0);
    let mut pw = 1.0;
    let mut acc = 0.0;
    for c in coeffs {
        acc += c.norm() * pw;
        pw *= b;
    }
    acc
}

/// Trims leading coefficients that are negligible relative to the largest one.
/// Returns the deflated coefficient slice (never empty for nonzero input).
fn trim_leading(coeffs: &[Complex64]) -> &[Complex64] {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut end = coeffs.len();
    while end > 1 && coeffs[end - 1].norm() <= LEADING_TRIM_REL * scale {
        end -= 1;
    }
    &coeffs[..end]
}

/// All roots of a nonzero lambda-polynomial via Aberth-Ehrlich iteration with
/// perturbed-circle starting points and Newton polishing.
pub fn roots(p: &LambdaPolynomial) -> Result<RootSet, RootError> {
    if p.is_zero() {
        return Err(RootError::ZeroPolynomial);
    }
    let coeffs = trim_leading(p.coeffs());
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(RootSet { roots: Vec::new(), residual_bound: 0.0, deflated_degree: 0 });
    }

    let lead = coeffs[deg].norm();
    let radius = 1.0 + coeffs[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max) / lead;

    // perturbed circle: irrational angle offset and radial stagger break the
    // symmetric configurations Aberth can stall on
    let mut z: Vec<Complex64> = (0..deg)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * (j as f64) / (deg as f64) + 0.41;
            let stagger = 1.0 + 0.05 * (((j as f64) * 0.618_033_988_749).fract() - 0.5);
            Complex64::from_polar(0.7 * radius * stagger, theta)
        })
        .collect();

    let mut iterations = 0;
    for it in 0..MAX_ITERATIONS {
        iterations = it + 1;
        let mut max_step = 0.0f64;
        for i in 0..deg {
            let (pv, dv) = horner_with_derivative(coeffs, z[i]);
            if pv == Complex64::new(0.0, 0.0) {
                continue;
            }
            let dv = if dv == Complex64::new(0.0, 0.0) {
                Complex64::new(f64::MIN_POSITIVE.sqrt(), 0.0)
            } else {
                dv
            };
            let newton = pv / dv;
            let mut repulse = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let mut diff = z[i] - z[j];
                    if diff == Complex64::new(0.0, 0.0) {
                        diff = Complex64::new(1e-12 * (1.0 + z[i].norm()), 0.0);
                    }
                    repulse += diff.finv();
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulse;
            let w = if denom == Complex64::new(0.0, 0.0) { newton } else { newton / denom };
            z[i] -= w;
            max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
        }
        if max_step < CORRECTION_TOL {
            break;
        }
    }

    for zi in z.iter_mut() {
        for _ in 0..POLISH_STEPS {
            let (pv, dv) = horner_with_derivative(coeffs, *zi);
            if dv == Complex64::new(0.0, 0.0) {
                break;
            }
            let step = pv / dv;
            // polishing must not throw a converged root away
            if step.norm() > 0.1 * (1.0 + zi.norm()) {
                break;
            }
            *zi -= step;
        }
    }

    let mut residual_bound = 0.0f64;
    for &r in &z {
        let res = horner(coeffs, r).norm() / residual_scale(coeffs, r);
        residual_bound = residual_bound.max(res);
    }
    if residual_bound > RESIDUAL_REL {
        return Err(RootError::NonConvergence { iterations, residual: residual_bound });
    }
    Ok(RootSet { roots: z, residual_bound, deflated_degree: deg })
}

/// Spectral abscissa of the slice of `sym` frozen at `xi`.
pub fn spectral_abscissa(sym: &OperatorSymbol, xi: &[f64]) -> Result<AbscissaValue, RootError> {
    let slice = sym.lambda_slice(xi);
    if slice.is_zero() {
        return Ok(AbscissaValue::AllLambda);
    }
    let set = roots(&slice)?;
    if set.deflated_degree == 0 {
        return Ok(AbscissaValue::NoRoots);
    }
    let value = set.roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(AbscissaValue::Finite { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::parse_operator;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[Complex64]) -> LambdaPolynomial {
        LambdaPolynomial::new(coeffs.to_vec(), Vec::new())
    }

    fn sorted_re(set: &RootSet) -> Vec<f64> {
        let mut v: Vec<f64> = set.roots.iter().map(|r| r.re).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn cubic_with_known_roots() {
        // (z-1)(z-2)(z-3) = z^3 - 6z^2 + 11z - 6
        let set = roots(&poly(&[c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert_eq!(set.deflated_degree, 3);
        let re = sorted_re(&set);
        for (got, want) in re.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-10, "{} vs {}", got, want);
        }
        for r in &set.roots {
            assert!(r.im.abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_quartic() {
        // z^4 + 1: fourth roots of -1
        let set = roots(&poly(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]))
            .unwrap();
        assert_eq!(set.roots.len(), 4);
        for r in &set.roots {
            assert!((r.norm() - 1.0).abs() < 1e-10);
            assert!((r.re.abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        }
    }

    #[test]
    fn double_root_passes_residual_gate() {
        // (z-1)^2
        let set = roots(&poly(&[c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)])).unwrap();
        for r in &set.roots {
            assert!((r - c(1.0, 0.0)).norm() < 1e-6, "root {} too far from 1", r);
        }
        assert!(set.residual_bound <= RESIDUAL_REL);
    }

    #[test]
    fn near_zero_leading_coefficient_is_deflated() {
        // 1 + 1e-20 z: effectively a nonzero constant
        let set = roots(&poly(&[c(1.0, 0.0), c(1e-20, 0.0)])).unwrap();
        assert_eq!(set.deflated_degree, 0);
        assert!(set.roots.is_empty());
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert_eq!(roots(&poly(&[])).unwrap_err(), RootError::ZeroPolynomial);
    }

    #[test]
    fn abscissa_trichotomy() {
        let heat = parse_operator("d0 - d1^2", 1).unwrap();
        match spectral_abscissa(&heat, &[2.0]).unwrap() {
            AbscissaValue::Finite { value } => assert!((value + 4.0).abs() < 1e-12),
            other => panic!("expected finite abscissa, got {:?}", other),
        }

        let constant = parse_operator("1", 1).unwrap();
        assert_eq!(spectral_abscissa(&constant, &[0.5]).unwrap(), AbscissaValue::NoRoots);

        let degenerate = parse_operator("d1*d0", 1).unwrap();
        assert_eq!(spectral_abscissa(&degenerate, &[0.0]).unwrap(), AbscissaValue::AllLambda);
        assert_eq!(
            spectral_abscissa(&degenerate, &[0.0]).unwrap().as_f64(),
            f64::INFINITY
        );
    }

    #[test]
    fn residual_bound_is_reported() {
        let set = roots(&poly(&[c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert!(set.residual_bound < 1e-12);
    }
}
