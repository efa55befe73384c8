//! Sparse symbols of constant-coefficient evolution operators.
//!
//! An operator P(d0, d1, ..., dn) acts on functions of (x0, x1, ..., xn) with
//! d_v = partial derivative along x_v. Its symbol is the polynomial
//! P(lambda, i xi_1, ..., i xi_n): the time slot d0 maps to a free complex
//! variable lambda, each spatial slot d_k maps to i xi_k.

mod parse;

pub use parse::parse_operator;

use crate::error::SymbolError;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// One monomial of an operator: coeff * d0^e0 * d1^e1 * ... * dn^en.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    /// Exponent tuple, length 1 + n, time slot first.
    pub exponents: Vec<u32>,
    pub coeff: Complex64,
}

/// A constant-coefficient operator in 1 + n variables, stored as a sparse
/// polynomial with canonically ordered terms (descending lexicographic on the
/// exponent tuple, no zero coefficients, no duplicate tuples).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSymbol {
    n: usize,
    terms: Vec<Term>,
}

fn scrub(c: Complex64) -> Complex64 {
    // normalize -0.0 so canonical printing round-trips
    Complex64::new(
        if c.re == 0.0 { 0.0 } else { c.re },
        if c.im == 0.0 { 0.0 } else { c.im },
    )
}

impl OperatorSymbol {
    /// The zero operator in 1 + n variables.
    pub fn zero(n: usize) -> Self {
        OperatorSymbol { n, terms: Vec::new() }
    }

    /// A constant operator.
    pub fn constant(n: usize, c: Complex64) -> Self {
        Self::from_terms(n, vec![(vec![0; n + 1], c)]).expect("constant term is well formed")
    }

    /// The single variable d_index as an operator.
    pub fn variable(n: usize, index: usize) -> Result<Self, SymbolError> {
        if index > n {
            return Err(SymbolError::DimensionMismatch { expected: n, got: index });
        }
        let mut exps = vec![0u32; n + 1];
        exps[index] = 1;
        Self::from_terms(n, vec![(exps, Complex64::new(1.0, 0.0))])
    }

    /// Builds a symbol from raw (exponents, coefficient) pairs. Duplicate
    /// exponent tuples are merged by addition; exact-zero coefficients are
    /// dropped; terms are put into canonical order.
    pub fn from_terms(
        n: usize,
        raw: Vec<(Vec<u32>, Complex64)>,
    ) -> Result<Self, SymbolError> {
        let mut map: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (exps, coeff) in raw {
            if exps.len() != n + 1 {
                return Err(SymbolError::ExponentLength {
                    got: exps.len(),
                    expected: n + 1,
                    spatial: n,
                });
            }
            if !coeff.re.is_finite() || !coeff.im.is_finite() {
                return Err(SymbolError::NonFiniteCoefficient { re: coeff.re, im: coeff.im });
            }
            *map.entry(exps).or_insert(Complex64::new(0.0, 0.0)) += coeff;
        }
        let mut terms: Vec<Term> = map
            .into_iter()
            .map(|(exponents, coeff)| Term { exponents, coeff: scrub(coeff) })
            .filter(|t| t.coeff != Complex64::new(0.0, 0.0))
            .collect();
        terms.sort_by(|a, b| b.exponents.cmp(&a.exponents));
        Ok(OperatorSymbol { n, terms })
    }

    /// Number of spatial dimensions n (variables are d0 ..= dn).
    pub fn spatial_dims(&self) -> usize {
        self.n
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest power of d0, i.e. the lambda-degree m of the symbol.
    /// Zero for the zero operator.
    pub fn lambda_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exponents[0]).max().unwrap_or(0)
    }

    /// True if some term carries a positive power of d0.
    pub fn involves_lambda(&self) -> bool {
        self.terms.iter().any(|t| t.exponents[0] > 0)
    }

    /// Total degree of the symbol (max over terms of the exponent sum).
    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.exponents.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Largest coefficient magnitude; zero for the zero operator.
    pub fn coeff_scale(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    /// Evaluates the symbol P(lambda, i xi_1, ..., i xi_n) at a complex lambda
    /// and a real frequency vector xi of length n.
    pub fn eval(&self, lambda: Complex64, xi: &[f64]) -> Complex64 {
        debug_assert_eq!(xi.len(), self.n, "xi must have length n");
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut v = t.coeff * lambda.powu(t.exponents[0]);
            for (k, &e) in t.exponents[1..].iter().enumerate() {
                if e > 0 {
                    v *= Complex64::new(0.0, xi[k]).powu(e);
                }
            }
            acc += v;
        }
        acc
    }

    /// Freezes the spatial frequencies: returns the polynomial
    /// lambda -> P(lambda, i xi) with coefficients Q_k(i xi).
    pub fn lambda_slice(&self, xi: &[f64]) -> LambdaPolynomial {
        debug_assert_eq!(xi.len(), self.n, "xi must have length n");
        let m = self.lambda_degree() as usize;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m + 1];
        for t in &self.terms {
            let mut v = t.coeff;
            for (k, &e) in t.exponents[1..].iter().enumerate() {
                if e > 0 {
                    v *= Complex64::new(0.0, xi[k]).powu(e);
                }
            }
            coeffs[t.exponents[0] as usize] += v;
        }
        LambdaPolynomial::new(coeffs, xi.to_vec())
    }

    /// Coefficient polynomials of the decomposition P = sum_k d0^k Q_k(d1..dn):
    /// returns, for each lambda-power k, the spatial-only operator Q_k.
    pub fn lambda_coefficients(&self) -> Vec<OperatorSymbol> {
        let m = self.lambda_degree() as usize;
        let mut buckets: Vec<Vec<(Vec<u32>, Complex64)>> = vec![Vec::new(); m + 1];
        for t in &self.terms {
            let mut exps = t.exponents.clone();
            let k = exps[0] as usize;
            exps[0] = 0;
            buckets[k].push((exps, t.coeff));
        }
        buckets
            .into_iter()
            .map(|raw| OperatorSymbol::from_terms(self.n, raw).expect("terms stay well formed"))
            .collect()
    }

    fn merge(n: usize, raw: Vec<(Vec<u32>, Complex64)>) -> Self {
        OperatorSymbol::from_terms(n, raw).expect("arithmetic preserves term shape")
    }

    pub fn add(&self, other: &OperatorSymbol) -> Result<OperatorSymbol, SymbolError> {
        if self.n != other.n {
            return Err(SymbolError::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut raw: Vec<(Vec<u32>, Complex64)> = Vec::with_capacity(self.terms.len() + other.terms.len());
        raw.extend(self.terms.iter().map(|t| (t.exponents.clone(), t.coeff)));
        raw.extend(other.terms.iter().map(|t| (t.exponents.clone(), t.coeff)));
        Ok(Self::merge(self.n, raw))
    }

    pub fn mul(&self, other: &OperatorSymbol) -> Result<OperatorSymbol, SymbolError> {
        if self.n != other.n {
            return Err(SymbolError::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let exps: Vec<u32> = a
                    .exponents
                    .iter()
                    .zip(&b.exponents)
                    .map(|(&x, &y)| x.checked_add(y).expect("exponent overflow in product"))
                    .collect();
                raw.push((exps, a.coeff * b.coeff));
            }
        }
        Ok(Self::merge(self.n, raw))
    }

    pub fn scale(&self, c: Complex64) -> OperatorSymbol {
        let raw = self
            .terms
            .iter()
            .map(|t| (t.exponents.clone(), t.coeff * c))
            .collect();
        Self::merge(self.n, raw)
    }

    pub fn pow(&self, e: u32) -> OperatorSymbol {
        let mut acc = OperatorSymbol::constant(self.n, Complex64::new(1.0, 0.0));
        for _ in 0..e {
            acc = acc.mul(self).expect("same dimension");
        }
        acc
    }

    /// Parses the `{"n": ..., "terms": [{"exp": [...], "re": ..., "im": ...}]}`
    /// JSON form of a symbol.
    pub fn from_json_str(text: &str) -> Result<Self, SymbolError> {
        let doc: SymbolJson =
            serde_json::from_str(text).map_err(|e| SymbolError::Json(e.to_string()))?;
        doc.into_symbol()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(SymbolJson::from_symbol(self)).expect("symbol serializes")
    }
}

/// JSON mirror of an operator symbol.
#[derive(Debug, Serialize, Deserialize)]
struct SymbolJson {
    n: usize,
    terms: Vec<TermJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermJson {
    exp: Vec<u32>,
    re: f64,
    im: f64,
}

impl SymbolJson {
    fn into_symbol(self) -> Result<OperatorSymbol, SymbolError> {
        let raw = self
            .terms
            .into_iter()
            .map(|t| (t.exp, Complex64::new(t.re, t.im)))
            .collect();
        OperatorSymbol::from_terms(self.n, raw)
    }

    fn from_symbol(sym: &OperatorSymbol) -> SymbolJson {
        SymbolJson {
            n: sym.n,
            terms: sym
                .terms
                .iter()
                .map(|t| TermJson { exp: t.exponents.clone(), re: t.coeff.re, im: t.coeff.im })
                .collect(),
        }
    }
}

impl Serialize for OperatorSymbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SymbolJson::from_symbol(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorSymbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = SymbolJson::deserialize(d)?;
        doc.into_symbol().map_err(serde::de::Error::custom)
    }
}

fn write_coeff(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "({})", c.re)
    } else if c.re == 0.0 {
        write!(f, "({}*i)", c.im)
    } else if c.im < 0.0 {
        write!(f, "({}-{}*i)", c.re, -c.im)
    } else {
        write!(f, "({}+{}*i)", c.re, c.im)
    }
}

impl fmt::Display for OperatorSymbol {
    /// Canonical text form. Reparsing the output reproduces the symbol exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "(0)");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write_coeff(f, t.coeff)?;
            for (v, &e) in t.exponents.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*d{}", v)?,
                    _ => write!(f, "*d{}^{}", v, e)?,
                }
            }
        }
        Ok(())
    }
}

/// A polynomial in lambda obtained by freezing the spatial frequencies of a
/// symbol at a concrete real xi. Coefficients are stored lowest power first;
/// trailing exact zeros are trimmed so the last entry is nonzero, the zero
/// polynomial being the empty coefficient list.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPolynomial {
    coeffs: Vec<Complex64>,
    frozen_xi: Vec<f64>,
}

impl LambdaPolynomial {
    pub fn new(mut coeffs: Vec<Complex64>, frozen_xi: Vec<f64>) -> Self {
        while coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        LambdaPolynomial { coeffs, frozen_xi }
    }

    /// Coefficients c_0 ..= c_m, lowest power first.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// The xi this slice was frozen at.
    pub fn frozen_xi(&self) -> &[f64] {
        &self.frozen_xi
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * lambda + c;
        }
        acc
    }

    pub fn derivative(&self) -> LambdaPolynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        LambdaPolynomial::new(coeffs, self.frozen_xi.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn canonical_order_merges_duplicates_and_drops_zeros() {
        let sym = OperatorSymbol::from_terms(
            1,
            vec![
                (vec![0, 2], c(1.0, 0.0)),
                (vec![1, 0], c(2.0, 0.0)),
                (vec![0, 2], c(-1.0, 0.0)),
                (vec![0, 0], c(0.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(sym.terms().len(), 1);
        assert_eq!(sym.terms()[0].exponents, vec![1, 0]);
        assert_eq!(sym.terms()[0].coeff, c(2.0, 0.0));
    }

    #[test]
    fn eval_heat_symbol() {
        // d0 - d1^2 evaluated at (lambda, i xi): lambda - (i xi)^2 = lambda + xi^2
        let sym = OperatorSymbol::from_terms(
            1,
            vec![(vec![1, 0], c(1.0, 0.0)), (vec![0, 2], c(-1.0, 0.0))],
        )
        .unwrap();
        let v = sym.eval(c(2.0, 0.0), &[3.0]);
        assert_eq!(v, c(11.0, 0.0));
    }

    #[test]
    fn slice_trims_trailing_zeros() {
        // d1*d0 + 1 at xi = 0: the lambda coefficient vanishes exactly
        let sym = OperatorSymbol::from_terms(
            1,
            vec![(vec![1, 1], c(1.0, 0.0)), (vec![0, 0], c(1.0, 0.0))],
        )
        .unwrap();
        let slice = sym.lambda_slice(&[0.0]);
        assert_eq!(slice.degree(), Some(0));
        assert_eq!(slice.coeffs(), &[c(1.0, 0.0)]);
    }

    #[test]
    fn zero_slice_detection() {
        // d1*d0 at xi = 0 is identically zero in lambda
        let sym = OperatorSymbol::from_terms(1, vec![(vec![1, 1], c(1.0, 0.0))]).unwrap();
        assert!(sym.lambda_slice(&[0.0]).is_zero());
        assert!(!sym.lambda_slice(&[1.0]).is_zero());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"n":1,"terms":[{"exp":[2,0],"re":1.0,"im":0.0},{"exp":[0,3],"re":-1.0,"im":0.0}]}"#;
        let sym = OperatorSymbol::from_json_str(text).unwrap();
        // lambda^2 - (i xi)^3 = lambda^2 + i xi^3
        let v = sym.eval(c(0.0, 0.0), &[2.0]);
        assert_eq!(v, c(0.0, 8.0));
        let back = serde_json::to_string(&sym).unwrap();
        let sym2: OperatorSymbol = serde_json::from_str(&back).unwrap();
        assert_eq!(sym, sym2);
    }

    #[test]
    fn lambda_coefficients_split() {
        let sym = OperatorSymbol::from_terms(
            1,
            vec![
                (vec![2, 0], c(1.0, 0.0)),
                (vec![1, 1], c(3.0, 0.0)),
                (vec![0, 2], c(-1.0, 0.0)),
            ],
        )
        .unwrap();
        let qs = sym.lambda_coefficients();
        assert_eq!(qs.len(), 3);
        assert_eq!(qs[0].eval(c(0.0, 0.0), &[2.0]), c(4.0, 0.0));
        assert_eq!(qs[1].eval(c(0.0, 0.0), &[2.0]), c(0.0, 6.0));
        assert_eq!(qs[2].eval(c(0.0, 0.0), &[2.0]), c(1.0, 0.0));
    }
}
