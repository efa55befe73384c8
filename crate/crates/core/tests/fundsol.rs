//! End-to-end checks for the grid construction of the causal fundamental
//! solution and the shifted-line pairing quadrature, cross-validated against
//! the closed-form oracles for the classical 1+1 dimensional operators.

use evolv_core::{
    build_fundamental_solution, convolution_solve, pair_with_expansion, pair_with_test,
    parse_operator, verify_decay, verify_delta_property, verify_sigma_independence,
    verify_support, FieldRole, GridField, GridSpec, OperatorSymbol, QuadratureConfig,
    TestFunction, Window,
};
use evolv_oracles::{dalembert_pairing, heat_kernel, heat_pairing, integrate};
use num_complex::Complex64;

fn spec2(xi: f64, m: usize, sigma: f64, rho: f64) -> GridSpec {
    GridSpec {
        n: 1,
        freq_extent: vec![xi, xi],
        points_per_axis: m,
        sigma,
        window: Window::RaisedCosine { rho },
    }
}

fn cfg(tol: f64) -> QuadratureConfig {
    QuadratureConfig {
        tolerance: tol,
        ..QuadratureConfig::default()
    }
}

/// Riemann sum of `f * field` over the full grid, weighted by the cell volume.
fn riemann_pair<F: Fn(&[f64]) -> Complex64>(field: &GridField, f: F) -> Complex64 {
    let spec = field.spec();
    let d = spec.axes();
    let volume: f64 = (0..d).map(|a| spec.spatial_spacing(a)).product();
    let mut acc = Complex64::new(0.0, 0.0);
    for (flat, v) in field.values().iter().enumerate() {
        let idx = field.multi_index(flat);
        let x: Vec<f64> = (0..d).map(|a| spec.coordinate(a, idx[a])).collect();
        acc += v * f(&x);
    }
    acc * volume
}

/// Grid-path residual of the fundamental-solution property for one Gaussian:
/// |sum N * (P applied to the reflected argument of phi) - phi(0)|.
fn grid_delta_residual(p: &OperatorSymbol, spec: &GridSpec, phi: &TestFunction) -> f64 {
    let field = build_fundamental_solution(p, spec).unwrap();
    let applied = phi.expansion().apply_symbol(p, true).unwrap();
    let quarter: Vec<f64> = (0..spec.axes()).map(|a| spec.period(a) / 4.0).collect();
    let paired = riemann_pair(&field, |x| {
        if x.iter().zip(quarter.iter()).all(|(c, q)| c.abs() <= *q) {
            applied.value(x)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let origin = vec![0.0; spec.axes()];
    (paired - Complex64::new(phi.value(&origin), 0.0)).norm()
}

#[test]
fn heat_field_matches_heat_kernel() {
    let heat = parse_operator("d0 - d1^2", 1).unwrap();
    let spec = spec2(32.0, 512, 1.0, 0.25);
    let field = build_fundamental_solution(&heat, &spec).unwrap();

    let probe = field.sample_at(&[1.0, 0.0]).unwrap();
    let kernel = heat_kernel(1.0, 0.0);
    assert!(
        (probe.re - kernel).abs() <= 2e-3,
        "kernel mismatch at (1,0): got {} want {kernel}",
        probe.re
    );
    assert!(probe.im.abs() <= 2e-3);

    for (t, x) in [(1.0, 1.0), (2.0, 0.0), (2.0, 2.0)] {
        let v = field.sample_at(&[t, x]).unwrap();
        assert!(
            (v.re - heat_kernel(t, x)).abs() <= 2e-3,
            "kernel mismatch at ({t},{x})"
        );
    }
}

#[test]
fn transport_field_concentrates_on_characteristic() {
    let transport = parse_operator("d0 + d1", 1).unwrap();
    // Full Hann taper: the band criterion counts absolute sidelobe mass, and
    // only the smoothest window pushes it below one percent.
    let spec = spec2(32.0, 512, 1.0, 0.5);
    let field = build_fundamental_solution(&transport, &spec).unwrap();

    let quarter = spec.period(0) / 4.0;
    let band = 3.0 * spec.spatial_spacing(1);
    let slab = field.abs_mass_where(|x| x[0] >= 0.0 && x[0] <= quarter);
    let on_diag =
        field.abs_mass_where(|x| x[0] >= 0.0 && x[0] <= quarter && (x[1] - x[0]).abs() <= band);
    assert!(slab > 0.0);
    assert!(
        on_diag >= 0.99 * slab,
        "characteristic band holds only {:.4} of the slab mass",
        on_diag / slab
    );
}

#[test]
fn bounded_corpus_fields_are_causal() {
    let cases = [
        ("d0 - d1^2", 1.0),
        ("d0 + d1", 1.0),
        ("d0^2 - d1^2", 1.0),
        ("d0 - 3", 4.0),
    ];
    for (text, sigma) in cases {
        let p = parse_operator(text, 1).unwrap();
        let spec = spec2(16.0, 256, sigma, 0.25);
        let field = build_fundamental_solution(&p, &spec).unwrap();
        let quarter = spec.period(0) / 4.0;
        let inside = |x: &[f64]| x.iter().all(|c| c.abs() <= quarter);
        let total = field.abs_mass_where(|x| inside(x));
        let acausal = field.abs_mass_where(|x| inside(x) && x[0] < -0.5);
        assert!(
            acausal <= 1e-3 * total,
            "{text}: acausal mass fraction {}",
            acausal / total
        );
    }
}

#[test]
fn heat_pairing_matches_kernel_oracle() {
    let heat = parse_operator("d0 - d1^2", 1).unwrap();
    let phi = TestFunction::gaussian(vec![1.0, 0.0], vec![0.3, 0.3]);
    let got = pair_with_test(&heat, 1.0, &phi, &cfg(1e-8)).unwrap();
    assert!(got.converged);

    let want = heat_pairing(&|t, x| phi.value(&[t, x]), 4.0, 6.0, 1e-9);
    assert!(
        (got.value.re - want).abs() <= 1e-4 * want.abs(),
        "got {} want {want}",
        got.value.re
    );
}

#[test]
fn wave_pairing_matches_dalembert_oracle() {
    let wave = parse_operator("d0^2 - d1^2", 1).unwrap();
    let phi = TestFunction::gaussian(vec![1.0, 0.0], vec![0.3, 0.3]);
    let got = pair_with_test(&wave, 1.0, &phi, &cfg(1e-8)).unwrap();
    assert!(got.converged);

    let want = dalembert_pairing(&|t, x| phi.value(&[t, x]), 4.0, 1e-9);
    assert!(
        (got.value.re - want).abs() <= 1e-4 * want.abs(),
        "got {} want {want}",
        got.value.re
    );
}

#[test]
fn heat_delta_property_five_gaussians() {
    let heat = parse_operator("d0 - d1^2", 1).unwrap();
    let suite = vec![
        TestFunction::gaussian(vec![0.5, 0.0], vec![0.5, 0.5]),
        TestFunction::gaussian(vec![1.0, 0.0], vec![0.3, 0.4]),
        TestFunction::gaussian(vec![1.5, -0.5], vec![0.4, 0.6]),
        TestFunction::gaussian(vec![0.8, 0.3], vec![0.6, 0.5]),
        TestFunction::gaussian(vec![2.0, 1.0], vec![0.5, 0.8]),
    ];
    let residuals = verify_delta_property(&heat, 1.0, &suite, &cfg(1e-8)).unwrap();
    for (k, r) in residuals.iter().enumerate() {
        assert!(*r <= 1e-3, "gaussian {k}: delta residual {r}");
    }
}

#[test]
fn sigma_independence_heat_and_wave() {
    let heat = parse_operator("d0 - d1^2", 1).unwrap();
    let wave = parse_operator("d0^2 - d1^2", 1).unwrap();
    let phi = TestFunction::gaussian(vec![1.0, 0.0], vec![0.4, 0.5]);
    let c = cfg(1e-8);

    let drift = verify_sigma_independence(&heat, 0.5, 2.0, &phi, &c).unwrap();
    assert!(drift <= 1e-4, "heat drift {drift}");

    let drift = verify_sigma_independence(&wave, 1.0, 2.0, &phi, &c).unwrap();
    assert!(drift <= 1e-4, "wave drift {drift}");

    // Three shifts, pairwise. The pairing must not see the line height at all.
    let shifts = [0.5, 1.0, 2.0];
    for i in 0..shifts.len() {
        for j in (i + 1)..shifts.len() {
            let d = verify_sigma_independence(&heat, shifts[i], shifts[j], &phi, &c).unwrap();
            assert!(d <= 1e-4, "heat drift {} between shifts {i},{j}", d);
        }
    }
}

#[test]
fn support_probes_vanish_for_heat_and_wave() {
    let heat = parse_operator("d0 - d1^2", 1).unwrap();
    let wave = parse_operator("d0^2 - d1^2", 1).unwrap();
    let c = cfg(1e-10);

    let mags = verify_support(&heat, 1.0, &[-0.5], &c).unwrap();
    assert!(mags[0] <= 1e-6, "heat support leak {}", mags[0]);

    let mags = verify_support(&wave, 1.0, &[-0.5], &c).unwrap();
    assert!(mags[0] <= 1e-6, "wave support leak {}", mags[0]);
}

#[test]
fn heat_decay_rate_with_unit_shift() {
    let heat = parse_operator("d0 - d1^2", 1).unwrap();
    let probes: Vec<f64> = (1..=8).map(|t| t as f64).collect();
    let rate = verify_decay(&heat, 1.0, Complex64::new(1.0, 0.0), &probes, &cfg(1e-8)).unwrap();
    assert!(rate <= -0.9, "decay rate {rate}");
}

#[test]
fn convolution_reproduces_pairing_identity() {
    let heat = parse_operator("d0 - d1^2", 1).unwrap();
    let spec = spec2(32.0, 512, 1.0, 0.25);
    let bump_width = 0.2_f64;
    let rhs = GridField::sample_spatial(spec.clone(), FieldRole::Rhs, |x| {
        let q = x.iter().map(|c| c * c).sum::<f64>();
        Complex64::new((-0.5 * q / (bump_width * bump_width)).exp(), 0.0)
    })
    .unwrap();
    let solution = convolution_solve(&heat, 1.0, &rhs).unwrap();

    let phi = TestFunction::gaussian(vec![1.0, 0.0], vec![0.3, 0.3]);
    let grid_value = riemann_pair(&solution, |x| Complex64::new(phi.value(x), 0.0));

    // The bump is even, so pairing the solution against phi must equal the
    // pairing of the plain fundamental solution against bump * phi, which is
    // again a Gaussian: widths add in quadrature and the amplitude picks up
    // one sqrt(2 pi) u w / sqrt(u^2 + w^2) factor per axis.
    let w = 0.3_f64;
    let conv_width = (bump_width * bump_width + w * w).sqrt();
    let per_axis = (2.0 * std::f64::consts::PI).sqrt() * bump_width * w / conv_width;
    let amplitude = per_axis * per_axis;
    let conv_phi = TestFunction::gaussian(vec![1.0, 0.0], vec![conv_width, conv_width]);
    let direct = pair_with_test(&heat, 1.0, &conv_phi, &cfg(1e-8)).unwrap();
    let want = amplitude * direct.value.re;

    assert!(
        (grid_value.re - want).abs() <= 1e-3,
        "convolution identity defect: grid {} oracle {want}",
        grid_value.re
    );
    assert!(grid_value.im.abs() <= 1e-3);
}

#[test]
fn convolution_evolves_heat_sheet() {
    let heat = parse_operator("d0 - d1^2", 1).unwrap();
    let spec = spec2(32.0, 512, 1.0, 0.25);
    let tau = 0.1_f64;
    let sheet_w = 0.5_f64;
    let rhs = GridField::sample_spatial(spec.clone(), FieldRole::Rhs, |x| {
        let t = (x[0] - 0.5) / tau;
        let s = x[1] / sheet_w;
        Complex64::new((-0.5 * (t * t + s * s)).exp(), 0.0)
    })
    .unwrap();
    let solution = convolution_solve(&heat, 1.0, &rhs).unwrap();

    // Closed form: each time slice of the source releases a Gaussian that
    // spreads under the heat flow, variance w^2 + 2 (t - s).
    let oracle = |t: f64, x: f64| {
        integrate(
            &|s: f64| {
                let var = sheet_w * sheet_w + 2.0 * (t - s);
                let g = (-0.5 * ((s - 0.5) / tau).powi(2)).exp();
                g * (sheet_w / var.sqrt()) * (-0.5 * x * x / var).exp()
            },
            0.0,
            t.min(1.2),
            1e-10,
        )
    };

    for (t, x) in [(1.5, 0.0), (1.5, 1.0), (2.5, 0.5)] {
        let got = solution.sample_at(&[t, x]).unwrap();
        let want = oracle(t, x);
        assert!(
            (got.re - want).abs() <= 2e-3,
            "sheet evolution mismatch at ({t},{x}): got {} want {want}",
            got.re
        );
        assert!(got.im.abs() <= 2e-3);
    }
}

#[test]
fn grid_and_direct_pairings_agree() {
    let heat = parse_operator("d0 - d1^2", 1).unwrap();
    // Widths chosen so the Fourier content of P applied to phi inside the
    // untapered band carries all but a negligible sliver of its mass; the
    // window then cannot bias the grid-path pairing.
    let suite = [
        TestFunction::gaussian(vec![1.0, 0.0], vec![0.6, 0.7]),
        TestFunction::gaussian(vec![0.8, -0.3], vec![0.7, 0.8]),
    ];
    let coarse = spec2(32.0, 256, 1.0, 0.25);
    let fine = spec2(32.0, 512, 1.0, 0.25);
    let field_coarse = build_fundamental_solution(&heat, &coarse).unwrap();
    let field_fine = build_fundamental_solution(&heat, &fine).unwrap();
    let quarter = coarse.period(0) / 4.0;

    for phi in &suite {
        let applied = phi.expansion().apply_symbol(&heat, true).unwrap();
        let eval = |x: &[f64]| {
            if x.iter().all(|c| c.abs() <= quarter) {
                applied.value(x)
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        let r_coarse = riemann_pair(&field_coarse, eval);
        let r_fine = riemann_pair(&field_fine, eval);
        let grid_estimate = (r_fine - r_coarse).norm() + 1e-9;

        let direct = pair_with_expansion(&heat, 1.0, &applied, &cfg(1e-8)).unwrap();
        let defect = (r_fine - direct.value).norm();
        assert!(
            defect <= grid_estimate + direct.error_estimate,
            "grid/direct defect {defect} exceeds combined estimate {}",
            grid_estimate + direct.error_estimate
        );
    }
}

#[test]
fn window_refinement_does_not_worsen_delta_residual() {
    let heat = parse_operator("d0 - d1^2", 1).unwrap();
    let phi = TestFunction::gaussian(vec![1.0, 0.0], vec![0.6, 0.7]);

    let coarse = spec2(32.0, 256, 1.0, 0.25);
    let refined = spec2(32.0, 512, 1.0, 0.125);
    let r_coarse = grid_delta_residual(&heat, &coarse, &phi);
    let r_refined = grid_delta_residual(&heat, &refined, &phi);

    // Sharpening the window and doubling the grid may shuffle quadrature
    // noise around, but it must not degrade the residual beyond the direct
    // quadrature's own error estimate for the same pairing.
    let applied = phi.expansion().apply_symbol(&heat, true).unwrap();
    let direct = pair_with_expansion(&heat, 1.0, &applied, &cfg(1e-8)).unwrap();
    assert!(
        r_refined <= r_coarse + 2.0 * direct.error_estimate + 1e-9,
        "refined residual {r_refined} vs coarse {r_coarse}"
    );
}
