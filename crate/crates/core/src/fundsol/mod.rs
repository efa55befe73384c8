//! Construction of the causal fundamental solution on shifted frequency grids.
//!
//! For an operator P(d0, ..., dn) whose characteristic roots stay to the left
//! of the line Re lambda = sigma, the reciprocal symbol 1/P(sigma + i xi0, i xi)
//! is bounded on that line.  Its inverse Fourier transform, multiplied back by
//! e^{sigma x0}, is the fundamental solution N supported in the half space
//! x0 >= 0, and convolution with N solves P U = F for causal right-hand sides.
//!
//! Two independent routes to N are provided and cross-checked:
//!
//! * sampled grid fields: [`symbol_inverse_on_line`], [`build_fundamental_solution`]
//!   and the convolution solver [`convolution_solve`];
//! * direct adaptive quadrature against smooth test functions:
//!   [`pair_with_test`] and the verification battery
//!   ([`verify_delta_property`], [`verify_sigma_independence`],
//!   [`verify_support`], [`verify_decay`]).
//!
//! The quadrature path has controllable tails and is the default verification
//! route; the grid path is the workhorse for field output and solving.

use std::f64::consts::PI;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::GridError;
use crate::symbol::OperatorSymbol;

mod pairing;

pub use pairing::{
    decay_profile, pair_with_expansion, pair_with_test, verify_decay, verify_delta_property,
    verify_sigma_independence, verify_support, PairingResult, QuadratureConfig,
    DECAY_PROBE_WIDTH, PAIRING_FLOOR,
};

/// Hard cap on the total number of grid points, to keep fields in memory.
pub const MAX_GRID_ELEMENTS: u128 = 1 << 24;

/// Relative threshold on the minimum symbol modulus over the grid: below
/// `1e-8 * coefficient scale` the shifted line is treated as touching the
/// characteristic set.
pub const MIN_MODULUS_REL: f64 = 1e-8;

/// Fraction of the rhs mass allowed below the causal cutoff in
/// [`convolution_solve`].
pub const RHS_SUPPORT_TOL: f64 = 1e-6;

/// Frequency window applied to the sampled symbol inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// No tapering: the raw reciprocal symbol on the full band.
    None,
    /// Raised-cosine taper over the outer `rho` fraction of each axis band.
    RaisedCosine { rho: f64 },
}

impl Window {
    /// Window profile as a function of |xi|/extent in [0, 1].
    fn profile(&self, u: f64) -> f64 {
        match *self {
            Window::None => 1.0,
            Window::RaisedCosine { rho } => {
                // rho is the taper fraction per band side, so the cosine
                // roll-off occupies the outer 2*rho of [0, 1] and rho = 0.5
                // degenerates to a full Hann profile.
                let flat = 1.0 - 2.0 * rho;
                if u <= flat {
                    1.0
                } else {
                    0.5 * (1.0 + (PI * (u - flat) / (2.0 * rho)).cos())
                }
            }
        }
    }
}

/// Uniform centered grid over the 1+n frequency axes.
///
/// Axis `a` covers frequencies in `[-freq_extent[a], freq_extent[a])` with
/// `points_per_axis` samples; the dual spatial grid has spacing
/// `pi / freq_extent[a]` and period `points_per_axis * pi / freq_extent[a]`.
/// Axis 0 is the evolution direction; `sigma` is the line shift Re lambda.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Number of spatial dimensions n (the grid has 1+n axes).
    pub n: usize,
    /// Frequency half-extent per axis, length 1+n.
    pub freq_extent: Vec<f64>,
    /// Samples per axis; even, at least 8.
    pub points_per_axis: usize,
    /// Real part of the shifted integration line.
    pub sigma: f64,
    /// Taper applied to the sampled symbol inverse.
    pub window: Window,
}

impl GridSpec {
    /// Number of grid axes (1 + n).
    pub fn axes(&self) -> usize {
        self.n + 1
    }

    /// Checks all structural invariants of the grid description.
    pub fn validate(&self) -> Result<(), GridError> {
        if self.n == 0 {
            return Err(GridError::BadSpec(
                "at least one spatial dimension is required".into(),
            ));
        }
        if self.freq_extent.len() != self.axes() {
            return Err(GridError::BadSpec(format!(
                "freq_extent needs {} entries, got {}",
                self.axes(),
                self.freq_extent.len()
            )));
        }
        if self.freq_extent.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(GridError::BadSpec(
                "freq_extent entries must be positive and finite".into(),
            ));
        }
        if self.points_per_axis < 8 || self.points_per_axis % 2 != 0 {
            return Err(GridError::BadSpec(format!(
                "points_per_axis must be even and at least 8, got {}",
                self.points_per_axis
            )));
        }
        let count = (self.points_per_axis as u128).pow(self.axes() as u32);
        if count > MAX_GRID_ELEMENTS {
            return Err(GridError::BadSpec(format!(
                "grid would hold {count} points, cap is {MAX_GRID_ELEMENTS}"
            )));
        }
        if !self.sigma.is_finite() {
            return Err(GridError::BadSpec("sigma must be finite".into()));
        }
        if let Window::RaisedCosine { rho } = self.window {
            if !rho.is_finite() || rho <= 0.0 || rho > 0.5 {
                return Err(GridError::BadSpec(format!(
                    "taper fraction must lie in (0, 0.5], got {rho}"
                )));
            }
        }
        Ok(())
    }

    /// Total number of grid points.
    pub fn element_count(&self) -> usize {
        self.points_per_axis.pow(self.axes() as u32)
    }

    /// Frequency step along an axis.
    pub fn freq_spacing(&self, axis: usize) -> f64 {
        2.0 * self.freq_extent[axis] / self.points_per_axis as f64
    }

    /// Spatial step along an axis on the dual grid.
    pub fn spatial_spacing(&self, axis: usize) -> f64 {
        PI / self.freq_extent[axis]
    }

    /// Spatial period along an axis.
    pub fn period(&self, axis: usize) -> f64 {
        self.points_per_axis as f64 * self.spatial_spacing(axis)
    }

    /// Frequency of the `index`-th sample along an axis.
    pub fn frequency(&self, axis: usize, index: usize) -> f64 {
        (index as f64 - (self.points_per_axis / 2) as f64) * self.freq_spacing(axis)
    }

    /// Spatial coordinate of the `index`-th sample along an axis.
    pub fn coordinate(&self, axis: usize, index: usize) -> f64 {
        (index as f64 - (self.points_per_axis / 2) as f64) * self.spatial_spacing(axis)
    }

    /// Product window profile at a frequency point.
    pub fn window_value(&self, xi: &[f64]) -> f64 {
        xi.iter()
            .enumerate()
            .map(|(a, &x)| self.window.profile(x.abs() / self.freq_extent[a]))
            .product()
    }
}

/// What a sampled field holds: the stages of the construction pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldRole {
    /// Windowed reciprocal symbol on the shifted line (frequency domain).
    SymbolInverse,
    /// Inverse transform of the symbol inverse (spatial, before reweighting).
    NSigma,
    /// Fundamental solution e^{sigma x0} N_sigma (spatial).
    N,
    /// Right-hand side for the convolution solver (spatial).
    Rhs,
    /// Solution returned by the convolution solver (spatial).
    Solution,
}

impl std::fmt::Display for FieldRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FieldRole::SymbolInverse => "symbol_inverse",
            FieldRole::NSigma => "n_sigma",
            FieldRole::N => "n",
            FieldRole::Rhs => "rhs",
            FieldRole::Solution => "solution",
        };
        f.write_str(s)
    }
}

/// Complex samples over the full (1+n)-dimensional grid, row-major with the
/// x0 / xi0 axis first.  Values are written once at construction and then
/// immutable.
#[derive(Debug, Clone)]
pub struct GridField {
    spec: GridSpec,
    role: FieldRole,
    values: Vec<Complex64>,
}

impl GridField {
    /// Wraps raw values after checking them against the grid description.
    pub fn new(spec: GridSpec, role: FieldRole, values: Vec<Complex64>) -> Result<Self, GridError> {
        spec.validate()?;
        if values.len() != spec.element_count() {
            return Err(GridError::ShapeMismatch);
        }
        Ok(GridField { spec, role, values })
    }

    /// Samples a spatial function on the grid (used to set up right-hand
    /// sides). The function receives the spatial coordinates of each point.
    pub fn sample_spatial<F>(spec: GridSpec, role: FieldRole, f: F) -> Result<Self, GridError>
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        spec.validate()?;
        let d = spec.axes();
        let m = spec.points_per_axis;
        let total = spec.element_count();
        let slab = total / m;
        let values: Vec<Complex64> = (0..m)
            .into_par_iter()
            .flat_map_iter(|i0| {
                let spec = spec.clone();
                let f = &f;
                let x0 = spec.coordinate(0, i0);
                (0..slab).map(move |r| {
                    let mut x = vec![0.0; d];
                    x[0] = x0;
                    let mut rem = r;
                    for a in (1..d).rev() {
                        x[a] = spec.coordinate(a, rem % m);
                        rem /= m;
                    }
                    f(&x)
                })
            })
            .collect();
        GridField::new(spec, role, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn role(&self) -> FieldRole {
        self.role
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Decodes a flat index into per-axis indices.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let d = self.spec.axes();
        let m = self.spec.points_per_axis;
        let mut idx = vec![0; d];
        let mut rem = flat;
        for a in (0..d).rev() {
            idx[a] = rem % m;
            rem /= m;
        }
        idx
    }

    /// Multilinear interpolation at a spatial point.  Returns `None` outside
    /// the reliable subdomain |x_a| <= L_a / 4, where periodization artifacts
    /// amplified by e^{sigma x0} are no longer controlled.
    pub fn sample_at(&self, x: &[f64]) -> Option<Complex64> {
        let d = self.spec.axes();
        if x.len() != d {
            return None;
        }
        let m = self.spec.points_per_axis;
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for a in 0..d {
            if x[a].abs() > self.spec.period(a) / 4.0 {
                return None;
            }
            let t = x[a] / self.spec.spatial_spacing(a) + (m / 2) as f64;
            let i = t.floor();
            if i < 0.0 || i as usize + 1 >= m {
                return None;
            }
            base[a] = i as usize;
            frac[a] = t - i;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0;
            for a in 0..d {
                let hi = (corner >> a) & 1;
                w *= if hi == 1 { frac[a] } else { 1.0 - frac[a] };
                flat = flat * m + base[a] + hi;
            }
            acc += w * self.values[flat];
        }
        Some(acc)
    }

    /// Sum of |value| over the whole grid.
    pub fn abs_mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    /// Sum of |value| over the spatial points satisfying a predicate on the
    /// coordinate vector.
    pub fn abs_mass_where<F>(&self, pred: F) -> f64
    where
        F: Fn(&[f64]) -> bool,
    {
        let d = self.spec.axes();
        let mut x = vec![0.0; d];
        let mut acc = 0.0;
        for (flat, v) in self.values.iter().enumerate() {
            let idx = self.multi_index(flat);
            for a in 0..d {
                x[a] = self.spec.coordinate(a, idx[a]);
            }
            if pred(&x) {
                acc += v.norm();
            }
        }
        acc
    }
}

/// Centered discrete Fourier transform along every axis, in place.
///
/// With samples at x_k = (k - M/2) dx and frequencies xi_j = (j - M/2) dxi,
/// dx dxi = 2 pi / M, the centered exponential splits into a plain DFT plus
/// (-1)^index phases on both sides and a global factor (+-1) per axis.  No
/// 1/M or measure normalization is applied here; callers multiply by the
/// appropriate Riemann factors.
fn centered_transform(values: &mut [Complex64], m: usize, axes: usize, inverse: bool) {
    let mut planner = rustfft::FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    // i^M for the inverse direction, (-i)^M for the forward one; for even M
    // both equal (-1)^{M/2}.
    let fac = if m % 4 == 0 { 1.0 } else { -1.0 };
    let total = values.len();
    let lines = total / m;
    let mut gathered = vec![Complex64::new(0.0, 0.0); total];
    for axis in 0..axes {
        let stride = m.pow((axes - 1 - axis) as u32);
        for line in 0..lines {
            let outer = line / stride;
            let inner = line % stride;
            let start = outer * stride * m + inner;
            let row = &mut gathered[line * m..(line + 1) * m];
            for (j, slot) in row.iter_mut().enumerate() {
                let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
                *slot = values[start + j * stride] * sign;
            }
        }
        gathered.par_chunks_mut(m).for_each(|row| fft.process(row));
        for line in 0..lines {
            let outer = line / stride;
            let inner = line % stride;
            let start = outer * stride * m + inner;
            let row = &gathered[line * m..(line + 1) * m];
            for (k, &v) in row.iter().enumerate() {
                let sign = if k % 2 == 1 { -fac } else { fac };
                values[start + k * stride] = v * sign;
            }
        }
    }
}

/// Samples the windowed reciprocal symbol 1/P(sigma + i xi0, i xi) on the
/// grid and returns it together with the minimum |P| over the grid.
///
/// Fails with [`GridError::SigmaTooCloseToSpectrum`] when that minimum drops
/// below `1e-8` times the coefficient scale: the shifted line then runs too
/// close to a characteristic root for the reciprocal to be trustworthy
/// (either sigma is at or below the spectral bound, or the grid hits a
/// near-zero of the symbol).
pub fn symbol_inverse_on_line(
    p: &OperatorSymbol,
    spec: &GridSpec,
) -> Result<(GridField, f64), GridError> {
    spec.validate()?;
    if p.spatial_dims() != spec.n {
        return Err(GridError::DimensionMismatch {
            operator: p.spatial_dims(),
            grid: spec.n,
        });
    }
    if p.is_zero() {
        return Err(GridError::BadSpec("operator is identically zero".into()));
    }
    let m = spec.points_per_axis;
    let n = spec.n;
    let slab = spec.element_count() / m;
    let threshold = MIN_MODULUS_REL * p.coeff_scale();
    let sigma = spec.sigma;

    let slabs: Vec<(Vec<Complex64>, f64)> = (0..m)
        .into_par_iter()
        .map(|i0| {
            let xi0 = spec.frequency(0, i0);
            let lambda = Complex64::new(sigma, xi0);
            let w0 = spec.window.profile(xi0.abs() / spec.freq_extent[0]);
            let mut vals = Vec::with_capacity(slab);
            let mut min_abs = f64::INFINITY;
            let mut xi = vec![0.0; n];
            for r in 0..slab {
                let mut rem = r;
                let mut win = w0;
                for a in (0..n).rev() {
                    let f = spec.frequency(a + 1, rem % m);
                    xi[a] = f;
                    win *= spec.window.profile(f.abs() / spec.freq_extent[a + 1]);
                    rem /= m;
                }
                let v = p.eval(lambda, &xi);
                let abs = v.norm();
                if abs < min_abs {
                    min_abs = abs;
                }
                vals.push(if abs > 0.0 {
                    win / v
                } else {
                    Complex64::new(0.0, 0.0)
                });
            }
            (vals, min_abs)
        })
        .collect();

    let min_abs = slabs.iter().map(|(_, m)| *m).fold(f64::INFINITY, f64::min);
    if min_abs < threshold {
        return Err(GridError::SigmaTooCloseToSpectrum { min_abs, threshold });
    }
    let mut values = Vec::with_capacity(spec.element_count());
    for (vals, _) in slabs {
        values.extend_from_slice(&vals);
    }
    let field = GridField {
        spec: spec.clone(),
        role: FieldRole::SymbolInverse,
        values,
    };
    Ok((field, min_abs))
}

/// Builds the causal fundamental solution N on the spatial grid: inverse
/// transform of the windowed symbol inverse, then multiplication by
/// e^{sigma x0}.
///
/// Values are reliable on the centered subdomain |x_a| <= L_a / 4 (see
/// [`GridField::sample_at`]); beyond it the exponential reweighting amplifies
/// the periodized tails.
pub fn build_fundamental_solution(
    p: &OperatorSymbol,
    spec: &GridSpec,
) -> Result<GridField, GridError> {
    let (mut field, _) = symbol_inverse_on_line(p, spec)?;
    let m = spec.points_per_axis;
    let d = spec.axes();
    centered_transform(&mut field.values, m, d, true);
    let scale: f64 = (0..d).map(|a| spec.freq_spacing(a) / (2.0 * PI)).product();
    let slab = field.values.len() / m;
    for i0 in 0..m {
        let w = scale * (spec.sigma * spec.coordinate(0, i0)).exp();
        for v in &mut field.values[i0 * slab..(i0 + 1) * slab] {
            *v *= w;
        }
    }
    field.role = FieldRole::N;
    Ok(field)
}

/// Solves P U = F by frequency-domain convolution with the fundamental
/// solution: U = e^{sigma x0} IFT( FT(e^{-sigma x0} F) / P(sigma + i xi0, i xi) ).
///
/// The right-hand side must carry the `rhs` role and be supported (up to a
/// `1e-6` mass fraction) in x0 >= -L0/40; the grid construction is only
/// causal for right-hand sides living in the forward half space.
pub fn convolution_solve(
    p: &OperatorSymbol,
    sigma: f64,
    rhs: &GridField,
) -> Result<GridField, GridError> {
    convolution_solve_with_residual(p, sigma, rhs).map(|(field, _)| field)
}

/// As [`convolution_solve`], additionally reporting the frequency-side
/// residual max |P * U_hat - F_hat| / scale of the computed solution. The
/// residual costs one extra forward transform of the solution.
pub fn convolution_solve_with_residual(
    p: &OperatorSymbol,
    sigma: f64,
    rhs: &GridField,
) -> Result<(GridField, f64), GridError> {
    if rhs.role != FieldRole::Rhs {
        return Err(GridError::RoleMismatch {
            expected: FieldRole::Rhs.to_string(),
            got: rhs.role.to_string(),
        });
    }
    let mut spec = rhs.spec.clone();
    spec.sigma = sigma;
    spec.validate()?;
    if p.spatial_dims() != spec.n {
        return Err(GridError::DimensionMismatch {
            operator: p.spatial_dims(),
            grid: spec.n,
        });
    }

    let m = spec.points_per_axis;
    let d = spec.axes();
    let slab = rhs.values.len() / m;
    let cutoff = -spec.period(0) / 40.0;
    let mut below = 0.0;
    let mut total = 0.0;
    for i0 in 0..m {
        let x0 = spec.coordinate(0, i0);
        let s: f64 = rhs.values[i0 * slab..(i0 + 1) * slab]
            .iter()
            .map(|v| v.norm())
            .sum();
        total += s;
        if x0 < cutoff {
            below += s;
        }
    }
    if total > 0.0 {
        let fraction = below / total;
        if fraction > RHS_SUPPORT_TOL {
            return Err(GridError::SupportViolation { fraction, cutoff });
        }
    }

    // Forward transform of e^{-sigma x0} F with Riemann measure.
    let mut work = rhs.values.clone();
    let fwd_scale: f64 = (0..d).map(|a| spec.spatial_spacing(a)).product();
    for i0 in 0..m {
        let w = (-sigma * spec.coordinate(0, i0)).exp();
        for v in &mut work[i0 * slab..(i0 + 1) * slab] {
            *v *= w;
        }
    }
    centered_transform(&mut work, m, d, false);
    for v in &mut work {
        *v *= fwd_scale;
    }

    let rhs_hat = work.clone();

    let (inv, _) = symbol_inverse_on_line(p, &spec)?;
    for (v, i) in work.iter_mut().zip(inv.values.iter()) {
        *v *= i;
    }

    // Back to space, restore the exponential weight.
    centered_transform(&mut work, m, d, true);
    let inv_scale: f64 = (0..d).map(|a| spec.freq_spacing(a) / (2.0 * PI)).product();
    for i0 in 0..m {
        let w = inv_scale * (sigma * spec.coordinate(0, i0)).exp();
        for v in &mut work[i0 * slab..(i0 + 1) * slab] {
            *v *= w;
        }
    }

    let solution = GridField {
        spec: spec.clone(),
        role: FieldRole::Solution,
        values: work,
    };

    let residual = convolution_residual(p, &solution, &rhs_hat);
    debug_assert!(
        residual < 1e-8,
        "symbol-multiplication residual {residual} after convolution solve"
    );

    Ok((solution, residual))
}

/// Relative residual of the solver identity: transforms e^{-sigma x0} U back
/// to frequency space, multiplies by the symbol on the shifted line, and
/// compares against the windowed transform of e^{-sigma x0} F.
fn convolution_residual(
    p: &OperatorSymbol,
    solution: &GridField,
    rhs_hat: &[Complex64],
) -> f64 {
    let spec = &solution.spec;
    let m = spec.points_per_axis;
    let d = spec.axes();
    let n = spec.n;
    let slab = solution.values.len() / m;
    let mut back = solution.values.clone();
    for i0 in 0..m {
        let w = (-spec.sigma * spec.coordinate(0, i0)).exp();
        for v in &mut back[i0 * slab..(i0 + 1) * slab] {
            *v *= w;
        }
    }
    centered_transform(&mut back, m, d, false);
    let fwd_scale: f64 = (0..d).map(|a| spec.spatial_spacing(a)).product();
    let inv_scale: f64 = (0..d).map(|a| spec.freq_spacing(a) / (2.0 * PI)).product();
    // The two transforms compose to the identity only with both measures in
    // place; `back` currently carries one inverse measure too few.
    let roundtrip = fwd_scale * inv_scale * m.pow(d as u32) as f64;
    debug_assert!((roundtrip - 1.0).abs() < 1e-12);
    for v in &mut back {
        *v *= fwd_scale;
    }

    let mut num = 0.0f64;
    let mut den = 0.0f64;
    let mut xi = vec![0.0; n];
    for (flat, v) in back.iter().enumerate() {
        let mut rem = flat;
        let mut idx = vec![0usize; d];
        for a in (0..d).rev() {
            idx[a] = rem % m;
            rem /= m;
        }
        let xi0 = spec.frequency(0, idx[0]);
        let mut win = spec.window.profile(xi0.abs() / spec.freq_extent[0]);
        for a in 0..n {
            let f = spec.frequency(a + 1, idx[a + 1]);
            xi[a] = f;
            win *= spec.window.profile(f.abs() / spec.freq_extent[a + 1]);
        }
        let sym = p.eval(Complex64::new(spec.sigma, xi0), &xi);
        let lhs = sym * v;
        let rhs = win * rhs_hat[flat];
        num = num.max((lhs - rhs).norm());
        den = den.max(rhs.norm());
    }
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Smallest |P(sigma + i xi0, i xi)| over sampled points with
/// |(xi0, xi)| <= radius, together with an empirical decay exponent.
///
/// The exponent comes from regressing the per-shell minimum against
/// log(1 + shell radius) over dyadic shells radius * 2^{-s}; a positive value
/// means the infimum decays toward large radii, a negative one that it grows.
/// The sample set is the origin, axis points on every shell radius, and a
/// low-discrepancy fill of the ball.
///
/// Panics if `radius` is not positive and finite or `samples` is zero.
pub fn min_modulus_scan(
    p: &OperatorSymbol,
    sigma: f64,
    radius: f64,
    samples: usize,
) -> (f64, f64) {
    assert!(radius.is_finite() && radius > 0.0, "radius must be positive");
    assert!(samples > 0, "need at least one sample");
    let n = p.spatial_dims();
    let d = n + 1;
    const SHELLS: usize = 9;

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(samples + 2 * d * SHELLS + 1);
    points.push(vec![0.0; d]);
    for s in 0..SHELLS {
        let r = radius * 0.5f64.powi(s as i32);
        for a in 0..d {
            for sign in [-1.0, 1.0] {
                let mut pt = vec![0.0; d];
                pt[a] = sign * r;
                points.push(pt);
            }
        }
    }
    let mut index = 1u64;
    let mut tries = 0usize;
    while points.len() < samples && tries < samples.saturating_mul(64) {
        let mut pt = Vec::with_capacity(d);
        let mut norm2 = 0.0;
        for a in 0..d {
            let coord = crate::numeric::halton(index, crate::numeric::PRIMES[a]);
            let x = (2.0 * coord - 1.0) * radius;
            norm2 += x * x;
            pt.push(x);
        }
        index += 1;
        tries += 1;
        if norm2 <= radius * radius {
            points.push(pt);
        }
    }

    let evals: Vec<(f64, f64)> = points
        .par_iter()
        .map(|pt| {
            let norm = pt.iter().map(|x| x * x).sum::<f64>().sqrt();
            let v = p.eval(Complex64::new(sigma, pt[0]), &pt[1..]);
            (norm, v.norm())
        })
        .collect();

    let mut inf = f64::INFINITY;
    let mut shell_min = [f64::INFINITY; SHELLS];
    for &(norm, abs) in &evals {
        inf = inf.min(abs);
        if norm > 0.0 {
            let s = (radius / norm).log2().floor();
            if s >= 0.0 {
                let s = (s as usize).min(SHELLS - 1);
                shell_min[s] = shell_min[s].min(abs);
            }
        }
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (s, &mn) in shell_min.iter().enumerate() {
        if mn.is_finite() && mn > 0.0 {
            let r = radius * 0.5f64.powi(s as i32);
            xs.push((1.0 + r).ln());
            ys.push(mn.ln());
        }
    }
    let mu_prime = if xs.len() >= 2 {
        let nn = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / nn;
        let my = ys.iter().sum::<f64>() / nn;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (x, y) in xs.iter().zip(ys.iter()) {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
        if sxx > 0.0 {
            -(sxy / sxx)
        } else {
            0.0
        }
    } else {
        0.0
    };
    (inf, mu_prime)
}

#[derive(Serialize, Deserialize)]
struct GfieldHeader {
    format: String,
    spec: GridSpec,
    role: FieldRole,
    endianness: String,
    count: usize,
    sha256: String,
}

const GFIELD_FORMAT: &str = "gfield.v1";

/// Writes a field to the `.gfield` container: one line of JSON header
/// followed by the flat little-endian complex-double payload, row-major with
/// the x0 axis first.  The header records a SHA-256 checksum of the payload.
pub fn write_gfield(field: &GridField, path: &Path) -> Result<(), GridError> {
    let mut payload = Vec::with_capacity(field.values.len() * 16);
    for v in &field.values {
        payload.extend_from_slice(&v.re.to_le_bytes());
        payload.extend_from_slice(&v.im.to_le_bytes());
    }
    let mut hasher = Sha256::new();
    hasher.update(&payload);
    let digest = hasher.finalize();
    let header = GfieldHeader {
        format: GFIELD_FORMAT.into(),
        spec: field.spec.clone(),
        role: field.role,
        endianness: "little".into(),
        count: field.values.len(),
        sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
    };
    let header_text =
        serde_json::to_string(&header).map_err(|e| GridError::Format(e.to_string()))?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(header_text.as_bytes())?;
    file.write_all(b"\n")?;
    file.write_all(&payload)?;
    Ok(())
}

/// Reads a `.gfield` container back, verifying the format marker, payload
/// length, and checksum.
pub fn read_gfield(path: &Path) -> Result<GridField, GridError> {
    let bytes = std::fs::read(path)?;
    let split = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| GridError::Format("missing header delimiter".into()))?;
    let header: GfieldHeader = serde_json::from_slice(&bytes[..split])
        .map_err(|e| GridError::Format(format!("bad header: {e}")))?;
    if header.format != GFIELD_FORMAT {
        return Err(GridError::Format(format!(
            "unsupported format marker {:?}",
            header.format
        )));
    }
    if header.endianness != "little" {
        return Err(GridError::Format(format!(
            "unsupported endianness {:?}",
            header.endianness
        )));
    }
    let payload = &bytes[split + 1..];
    if payload.len() != header.count * 16 {
        return Err(GridError::Format(format!(
            "payload holds {} bytes, header promises {}",
            payload.len(),
            header.count * 16
        )));
    }
    let mut hasher = Sha256::new();
    hasher.update(payload);
    let digest: String = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    if digest != header.sha256 {
        return Err(GridError::Format("checksum mismatch".into()));
    }
    let mut values = Vec::with_capacity(header.count);
    for chunk in payload.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[..8].try_into().expect("8-byte chunk"));
        let im = f64::from_le_bytes(chunk[8..].try_into().expect("8-byte chunk"));
        values.push(Complex64::new(re, im));
    }
    GridField::new(header.spec, header.role, values)
}
