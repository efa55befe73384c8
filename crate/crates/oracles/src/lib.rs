//! Independent reference implementations used by the test suites.
//!
//! Nothing here is called from production code. Each helper deliberately takes
//! a different route than the implementation it checks: eigenvalues come from
//! a companion-matrix Schur decomposition instead of simultaneous iteration,
//! pairings come from closed-form kernels instead of symbol inversion.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Roots of c_0 + c_1 z + ... + c_m z^m as eigenvalues of the companion matrix,
/// computed with nalgebra's complex Schur decomposition. The leading
/// coefficient must be meaningfully nonzero; no deflation is attempted.
pub fn companion_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    assert!(coeffs.len() >= 2, "need degree >= 1");
    let m = coeffs.len() - 1;
    let lead = coeffs[m];
    assert!(lead.norm() > 0.0, "leading coefficient must be nonzero");
    let mut mat = DMatrix::<Complex64>::zeros(m, m);
    for i in 1..m {
        mat[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..m {
        mat[(i, m - 1)] = -coeffs[i] / lead;
    }
    let (_q, t) = mat.schur().unpack();
    t.diagonal().iter().copied().collect()
}

/// Greedy minimum-distance matching of two equal-length root multisets,
/// returning the largest matched distance. Falls back to an exact assignment
/// over all permutations (Hungarian-style cost minimization is overkill at the
/// degrees the suites use) whenever the greedy result looks tie-contaminated.
pub fn max_matched_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "root counts differ");
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let greedy = greedy_match(a, b);
    // ties: two candidates within 10% of each other for the same slot
    if n <= 8 {
        let exact = exact_match(a, b);
        exact.min(greedy)
    } else {
        greedy
    }
}

fn greedy_match(a: &[Complex64], b: &[Complex64]) -> f64 {
    let n = a.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            pairs.push(((a[i] - b[j]).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut used_a = vec![false; n];
    let mut used_b = vec![false; n];
    let mut worst = 0.0f64;
    let mut matched = 0;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
            matched += 1;
            if matched == n {
                break;
            }
        }
    }
    worst
}

fn exact_match(a: &[Complex64], b: &[Complex64]) -> f64 {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let worst = (0..n)
            .map(|i| (a[i] - b[p[i]]).norm())
            .fold(0.0f64, f64::max);
        best = best.min(worst);
    });
    best
}

fn permute(v: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, visit);
        v.swap(k, i);
    }
}

/// Adaptive Simpson quadrature on a finite interval. The interval is first
/// cut into fixed panels so narrow features cannot slip between the initial
/// sample points of the adaptive recursion.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let panels = 24;
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let pa = a + p as f64 * h;
        let pb = pa + h;
        let fa = f(pa);
        let fb = f(pb);
        let m = 0.5 * (pa + pb);
        let fm = f(m);
        acc += simpson_step(
            f,
            pa,
            pb,
            fa,
            fm,
            fb,
            simpson(pa, pb, fa, fm, fb),
            tol / panels as f64,
            50,
        );
    }
    acc
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Heat kernel on the line: fundamental solution of d0 - d1^2.
pub fn heat_kernel(t: f64, x: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (4.0 * std::f64::consts::PI * t).powf(-0.5) * (-x * x / (4.0 * t)).exp()
}

/// Pairing of the causal wave fundamental solution (d0^2 - d1^2) with a test
/// function: one half of the integral of phi over the forward light cone.
pub fn dalembert_pairing<F: Fn(f64, f64) -> f64>(phi: &F, t_max: f64, tol: f64) -> f64 {
    let inner = |t: f64| integrate(&|x| phi(t, x), -t, t, tol);
    0.5 * integrate(&inner, 0.0, t_max, tol)
}

/// Pairing of the causal transport fundamental solution (d0 + d1) with a test
/// function: integral of phi along the characteristic x1 = x0, x0 >= 0.
pub fn transport_pairing<F: Fn(f64, f64) -> f64>(phi: &F, t_max: f64, tol: f64) -> f64 {
    integrate(&|t| phi(t, t), 0.0, t_max, tol)
}

/// Pairing of the causal fundamental solution of d0 - a (an ODE in time,
/// delta sheet in space) with a test function: integral of e^{a t} phi(t, 0).
pub fn ode_pairing<F: Fn(f64, f64) -> f64>(a: f64, phi: &F, t_max: f64, tol: f64) -> f64 {
    integrate(&|t| (a * t).exp() * phi(t, 0.0), 0.0, t_max, tol)
}

/// Pairing of the causal heat fundamental solution with a test function via
/// the closed-form kernel.
pub fn heat_pairing<F: Fn(f64, f64) -> f64>(
    phi: &F,
    t_max: f64,
    x_max: f64,
    tol: f64,
) -> f64 {
    let inner =
        |t: f64| integrate(&|x| heat_kernel(t, x) * phi(t, x), -x_max, x_max, tol);
    integrate(&inner, 1e-12, t_max, tol)
}
