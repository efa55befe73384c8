//! Rapidly decreasing test functions with closed-form derivatives and
//! Fourier transforms.
//!
//! The family is the product Hermite-Gaussian class: per axis
//! g_k(x) = H_k(u) exp(-u^2/2) with u = (x - c)/w and H_k the (physicists')
//! Hermite polynomial. Differentiation acts as a ladder on the expansion
//! coefficients, d/dx g_k = (1/w)(k g_{k-1} - g_{k+1}/2), so applying a
//! constant-coefficient operator keeps the class closed. The transform
//! integral e^{-i x zeta} g_k(x) dx = w sqrt(2pi) (-i)^k H_k(w zeta)
//! exp(-(w zeta)^2/2) e^{-i c zeta} extends to complex zeta, which is what
//! pairings on a shifted line need.

use crate::error::SymbolError;
use crate::symbol::OperatorSymbol;
use num_complex::Complex64;

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// A single product Hermite-Gaussian test function.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    center: Vec<f64>,
    width: Vec<f64>,
    orders: Vec<u32>,
}

impl TestFunction {
    /// Plain Gaussian bump (all Hermite orders zero).
    pub fn gaussian(center: Vec<f64>, width: Vec<f64>) -> Self {
        let orders = vec![0; center.len()];
        Self::hermite(center, width, orders)
    }

    /// Hermite-Gaussian with the given per-axis orders.
    pub fn hermite(center: Vec<f64>, width: Vec<f64>, orders: Vec<u32>) -> Self {
        assert_eq!(center.len(), width.len(), "center/width length mismatch");
        assert_eq!(center.len(), orders.len(), "center/orders length mismatch");
        assert!(!center.is_empty(), "need at least one axis");
        assert!(width.iter().all(|&w| w > 0.0 && w.is_finite()), "widths must be positive");
        TestFunction { center, width, orders }
    }

    /// Number of axes (1 + n for an operator in n spatial dimensions).
    pub fn axes(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn width(&self) -> &[f64] {
        &self.width
    }

    pub fn value(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.axes());
        let mut acc = 1.0;
        for v in 0..self.axes() {
            let u = (point[v] - self.center[v]) / self.width[v];
            acc *= hermite_real(self.orders[v], u) * (-0.5 * u * u).exp();
        }
        acc
    }

    /// Transform integral e^{-i x . zeta} phi(x) dx at a complex frequency
    /// vector, evaluated in closed form.
    pub fn fourier(&self, zeta: &[Complex64]) -> Complex64 {
        self.expansion().fourier(zeta)
    }

    /// The function as a one-term Hermite expansion.
    pub fn expansion(&self) -> HermiteExpansion {
        let shape: Vec<usize> = self.orders.iter().map(|&k| k as usize + 1).collect();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); shape.iter().product()];
        let strides = row_major_strides(&shape);
        let flat: usize = self
            .orders
            .iter()
            .zip(&strides)
            .map(|(&k, &s)| k as usize * s)
            .sum();
        coeffs[flat] = Complex64::new(1.0, 0.0);
        HermiteExpansion {
            center: self.center.clone(),
            width: self.width.clone(),
            shape,
            coeffs,
        }
    }

    /// Per-axis radius (from the center) beyond which the axis profile stays
    /// below `rel` times its maximum. With the default 1e-16 this is the
    /// effective support radius used by the grid and support checks.
    pub fn effective_radius(&self, rel: f64) -> Vec<f64> {
        (0..self.axes())
            .map(|v| self.width[v] * profile_radius(self.orders[v], rel))
            .collect()
    }
}

/// Radius in the normalized variable u where |H_k(u)| e^{-u^2/2} drops below
/// rel * max forever.
fn profile_radius(k: u32, rel: f64) -> f64 {
    // the profile's outermost extremum sits below sqrt(2k+1) + 2
    let turn = (2.0 * k as f64 + 1.0).sqrt() + 2.0;
    let profile = |u: f64| hermite_real(k, u).abs() * (-0.5 * u * u).exp();
    let mut fmax: f64 = 0.0;
    let samples = 400;
    for i in 0..=samples {
        fmax = fmax.max(profile(turn * i as f64 / samples as f64));
    }
    let target = rel * fmax;
    let mut lo = turn;
    let mut hi = turn;
    while profile(hi) > target {
        lo = hi;
        hi *= 1.25;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if profile(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn hermite_real(k: u32, u: f64) -> f64 {
    let mut h0 = 1.0;
    if k == 0 {
        return h0;
    }
    let mut h1 = 2.0 * u;
    for j in 1..k {
        let next = 2.0 * u * h1 - 2.0 * j as f64 * h0;
        h0 = h1;
        h1 = next;
    }
    h1
}

fn hermite_complex(k: u32, u: Complex64) -> Complex64 {
    let mut h0 = Complex64::new(1.0, 0.0);
    if k == 0 {
        return h0;
    }
    let mut h1 = 2.0 * u;
    for j in 1..k {
        let next = 2.0 * u * h1 - 2.0 * j as f64 * h0;
        h0 = h1;
        h1 = next;
    }
    h1
}

fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for v in (0..shape.len().saturating_sub(1)).rev() {
        strides[v] = strides[v + 1] * shape[v + 1];
    }
    strides
}

/// A finite linear combination of product Hermite-Gaussians sharing one
/// center and width vector; closed under differentiation.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion {
    center: Vec<f64>,
    width: Vec<f64>,
    /// Tensor extent per axis: coefficients exist for orders 0..shape[v].
    shape: Vec<usize>,
    /// Row-major coefficient tensor.
    coeffs: Vec<Complex64>,
}

impl HermiteExpansion {
    pub fn axes(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn width(&self) -> &[f64] {
        &self.width
    }

    /// Highest Hermite order present along each axis.
    pub fn orders(&self) -> Vec<usize> {
        self.shape.iter().map(|s| s.saturating_sub(1)).collect()
    }

    fn get(&self, idx: &[usize]) -> Complex64 {
        let strides = row_major_strides(&self.shape);
        let mut flat = 0;
        for (v, &i) in idx.iter().enumerate() {
            if i >= self.shape[v] {
                return Complex64::new(0.0, 0.0);
            }
            flat += i * strides[v];
        }
        self.coeffs[flat]
    }

    pub fn value(&self, point: &[f64]) -> Complex64 {
        assert_eq!(point.len(), self.axes());
        let tables: Vec<Vec<f64>> = (0..self.axes())
            .map(|v| {
                let u = (point[v] - self.center[v]) / self.width[v];
                let damp = (-0.5 * u * u).exp();
                (0..self.shape[v]).map(|k| hermite_real(k as u32, u) * damp).collect()
            })
            .collect();
        self.contract(|idx| {
            let mut p = 1.0;
            for (v, &i) in idx.iter().enumerate() {
                p *= tables[v][i];
            }
            Complex64::new(p, 0.0)
        })
    }

    /// Transform integral e^{-i x . zeta} f(x) dx at complex zeta.
    pub fn fourier(&self, zeta: &[Complex64]) -> Complex64 {
        assert_eq!(zeta.len(), self.axes());
        let minus_i_pow = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        let tables: Vec<Vec<Complex64>> = (0..self.axes())
            .map(|v| {
                let w = self.width[v];
                let wz = w * zeta[v];
                let base = w
                    * SQRT_TWO_PI
                    * (-0.5 * wz * wz).exp()
                    * (-Complex64::i() * self.center[v] * zeta[v]).exp();
                (0..self.shape[v])
                    .map(|k| base * minus_i_pow[k % 4] * hermite_complex(k as u32, wz))
                    .collect()
            })
            .collect();
        self.contract(|idx| {
            let mut p = Complex64::new(1.0, 0.0);
            for (v, &i) in idx.iter().enumerate() {
                p *= tables[v][i];
            }
            p
        })
    }

    fn contract(&self, factor: impl Fn(&[usize]) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut idx = vec![0usize; self.shape.len()];
        for flat in 0..self.coeffs.len() {
            decode(flat, &self.shape, &mut idx);
            let c = self.coeffs[flat];
            if c != Complex64::new(0.0, 0.0) {
                acc += c * factor(&idx);
            }
        }
        acc
    }

    /// Partial derivative along one axis via the coefficient ladder.
    pub fn differentiate(&self, axis: usize) -> HermiteExpansion {
        assert!(axis < self.axes());
        let mut shape = self.shape.clone();
        shape[axis] += 1;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); shape.iter().product()];
        let w_inv = 1.0 / self.width[axis];
        let mut idx = vec![0usize; shape.len()];
        for flat in 0..coeffs.len() {
            decode(flat, &shape, &mut idx);
            let j = idx[axis];
            let mut up = idx.clone();
            up[axis] = j + 1;
            let mut acc = (j + 1) as f64 * self.get(&up);
            if j >= 1 {
                let mut down = idx.clone();
                down[axis] = j - 1;
                acc -= 0.5 * self.get(&down);
            }
            coeffs[flat] = w_inv * acc;
        }
        HermiteExpansion { center: self.center.clone(), width: self.width.clone(), shape, coeffs }
    }

    pub fn scale(&self, c: Complex64) -> HermiteExpansion {
        let mut out = self.clone();
        for v in out.coeffs.iter_mut() {
            *v *= c;
        }
        out
    }

    /// Sum of two expansions sharing the same center and width frame.
    /// Panics if the frames differ: only same-frame expansions combine
    /// coefficient-wise.
    pub fn add(&self, other: &HermiteExpansion) -> HermiteExpansion {
        assert_eq!(self.center, other.center, "expansion centers must match");
        assert_eq!(self.width, other.width, "expansion widths must match");
        let shape: Vec<usize> = self
            .shape
            .iter()
            .zip(other.shape.iter())
            .map(|(a, b)| (*a).max(*b))
            .collect();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); shape.iter().product()];
        let mut idx = vec![0usize; shape.len()];
        for (flat, slot) in coeffs.iter_mut().enumerate() {
            decode(flat, &shape, &mut idx);
            *slot = self.get(&idx) + other.get(&idx);
        }
        HermiteExpansion { center: self.center.clone(), width: self.width.clone(), shape, coeffs }
    }

    /// Applies P(d) (or P(-d) with `sign_flip`) to the expansion.
    pub fn apply_symbol(
        &self,
        sym: &OperatorSymbol,
        sign_flip: bool,
    ) -> Result<HermiteExpansion, SymbolError> {
        if sym.spatial_dims() + 1 != self.axes() {
            return Err(SymbolError::DimensionMismatch {
                expected: self.axes().saturating_sub(1),
                got: sym.spatial_dims(),
            });
        }
        let mut parts: Vec<HermiteExpansion> = Vec::with_capacity(sym.terms().len());
        for term in sym.terms() {
            let mut cur = self.clone();
            let mut total: u32 = 0;
            for (axis, &e) in term.exponents.iter().enumerate() {
                total += e;
                for _ in 0..e {
                    cur = cur.differentiate(axis);
                }
            }
            let mut factor = term.coeff;
            if sign_flip && total % 2 == 1 {
                factor = -factor;
            }
            parts.push(cur.scale(factor));
        }
        Ok(combine(self.center.clone(), self.width.clone(), self.axes(), &parts))
    }
}

fn combine(
    center: Vec<f64>,
    width: Vec<f64>,
    axes: usize,
    parts: &[HermiteExpansion],
) -> HermiteExpansion {
    let mut shape = vec![1usize; axes];
    for p in parts {
        for v in 0..axes {
            shape[v] = shape[v].max(p.shape[v]);
        }
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); shape.iter().product()];
    let mut idx = vec![0usize; axes];
    for flat in 0..coeffs.len() {
        decode(flat, &shape, &mut idx);
        let mut acc = Complex64::new(0.0, 0.0);
        for p in parts {
            acc += p.get(&idx);
        }
        coeffs[flat] = acc;
    }
    HermiteExpansion { center, width, shape, coeffs }
}

fn decode(mut flat: usize, shape: &[usize], idx: &mut [usize]) {
    for v in (0..shape.len()).rev() {
        idx[v] = flat % shape[v];
        flat /= shape[v];
    }
}

/// Value of P(d)phi (or P(-d)phi with `sign_flip`) at a point, all in closed
/// form through the coefficient ladder.
pub fn apply_operator(
    sym: &OperatorSymbol,
    sign_flip: bool,
    phi: &TestFunction,
    point: &[f64],
) -> Result<Complex64, SymbolError> {
    Ok(phi.expansion().apply_symbol(sym, sign_flip)?.value(point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::parse_operator;

    #[test]
    fn unit_gaussian_peaks_at_one() {
        let phi = TestFunction::gaussian(vec![0.0, 0.0], vec![1.0, 1.0]);
        assert_eq!(phi.value(&[0.0, 0.0]), 1.0);
        assert!((phi.value(&[1.0, 0.0]) - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn flipped_time_derivative_of_gaussian() {
        // (-d0) e^{-(x0^2+x1^2)/2} = x0 e^{-...}; at (1,0) this is e^{-1/2}
        let p = parse_operator("d0", 1).unwrap();
        let phi = TestFunction::gaussian(vec![0.0, 0.0], vec![1.0, 1.0]);
        let v = apply_operator(&p, true, &phi, &[1.0, 0.0]).unwrap();
        assert!((v.re - (-0.5f64).exp()).abs() < 1e-14, "{}", v);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn constant_operator_is_identity_times_constant() {
        let p = parse_operator("1", 1).unwrap();
        let phi = TestFunction::hermite(vec![0.3, -0.2], vec![0.7, 1.1], vec![2, 1]);
        let v = apply_operator(&p, true, &phi, &[0.5, 0.1]).unwrap();
        assert!((v.re - phi.value(&[0.5, 0.1])).abs() < 1e-14);
    }

    #[test]
    fn ladder_matches_finite_differences() {
        let phi = TestFunction::hermite(vec![0.2, -0.4], vec![0.8, 1.3], vec![3, 2]);
        let d0 = phi.expansion().differentiate(0);
        let d11 = phi.expansion().differentiate(1).differentiate(1);
        let h = 1e-5;
        let pt = [0.7, -0.1];
        let fd0 = (phi.value(&[pt[0] + h, pt[1]]) - phi.value(&[pt[0] - h, pt[1]])) / (2.0 * h);
        let fd11 = (phi.value(&[pt[0], pt[1] + h]) - 2.0 * phi.value(&pt)
            + phi.value(&[pt[0], pt[1] - h]))
            / (h * h);
        // central differences carry O(h^2) truncation error scaled by high
        // derivatives, so compare relatively
        let e0 = (d0.value(&pt).re - fd0).abs();
        assert!(e0 < 1e-6 * (1.0 + fd0.abs()), "{} vs {}", d0.value(&pt).re, fd0);
        let e11 = (d11.value(&pt).re - fd11).abs();
        assert!(e11 < 1e-4 * (1.0 + fd11.abs()), "{} vs {}", d11.value(&pt).re, fd11);
    }

    #[test]
    fn fourier_of_unit_gaussian_at_zero() {
        let phi = TestFunction::gaussian(vec![0.0, 0.0], vec![1.0, 1.0]);
        let zeta = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let v = phi.fourier(&zeta);
        let want = 2.0 * std::f64::consts::PI; // (2 pi)^{(1+n)/2} with n = 1
        assert!((v.re - want).abs() < 1e-12, "{}", v);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn fourier_matches_direct_quadrature_at_complex_frequency() {
        let phi = TestFunction::hermite(vec![0.5], vec![0.8], vec![2]);
        let zeta = Complex64::new(1.3, -0.7);
        // direct integral of e^{-i x zeta} phi(x)
        let f_re = evolv_oracles::integrate(
            &|x: f64| ((-Complex64::i() * x * zeta).exp() * phi.value(&[x])).re,
            -14.0,
            14.0,
            1e-12,
        );
        let f_im = evolv_oracles::integrate(
            &|x: f64| ((-Complex64::i() * x * zeta).exp() * phi.value(&[x])).im,
            -14.0,
            14.0,
            1e-12,
        );
        let closed = phi.fourier(&[zeta]);
        assert!((closed.re - f_re).abs() < 1e-8, "{} vs {}", closed.re, f_re);
        assert!((closed.im - f_im).abs() < 1e-8, "{} vs {}", closed.im, f_im);
    }

    #[test]
    fn operator_application_composes() {
        // second derivative equals applying d1 twice
        let p1 = parse_operator("d1", 1).unwrap();
        let p2 = parse_operator("d1^2", 1).unwrap();
        let phi = TestFunction::hermite(vec![0.0, 0.1], vec![1.0, 0.9], vec![1, 2]);
        let once = phi.expansion().apply_symbol(&p1, false).unwrap();
        let twice = once.apply_symbol(&p1, false).unwrap();
        let direct = phi.expansion().apply_symbol(&p2, false).unwrap();
        let pt = [0.3, -0.6];
        assert!((twice.value(&pt) - direct.value(&pt)).norm() < 1e-12);
    }

    #[test]
    fn effective_radius_bounds_the_profile() {
        let phi = TestFunction::hermite(vec![0.0], vec![0.5], vec![4]);
        let r = phi.effective_radius(1e-16)[0];
        let peak = (0..2000)
            .map(|i| phi.value(&[3.0 * i as f64 / 2000.0]).abs())
            .fold(0.0f64, f64::max);
        for i in 0..200 {
            let x = r + i as f64 * 0.05;
            assert!(phi.value(&[x]).abs() <= 1.0000001e-16 * peak, "leak at {}", x);
        }
    }
}
