use fbm_lift_core::levy::*;
use fbm_lift_core::scaling::fit_power_law;
use fbm_lift_core::special::{gauss_legendre, phase_increment};
use fbm_lift_core::spectral::{build_grid, sample_noise, GridScheme, GridSpec, ModelParams};
use fbm_lift_core::{Complex64, Error};
use proptest::prelude::*;

fn cis(x: f64) -> Complex64 {
    Complex64::new(x.cos(), x.sin())
}

/// `∫_s^t e^{iu₁ξ₁} ∫_s^{u₁} e^{iu₂ξ₂} du₂ du₁` by nested Gauss–Legendre.
fn nested_oracle(t: f64, s: f64, xi1: f64, xi2: f64, n: usize) -> Complex64 {
    let (x, w) = gauss_legendre(n);
    let mut outer = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let u1 = 0.5 * (t - s) * x[i] + 0.5 * (t + s);
        let mut inner = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let u2 = 0.5 * (u1 - s) * x[j] + 0.5 * (u1 + s);
            inner += cis(u2 * xi2) * (0.5 * (u1 - s) * w[j]);
        }
        outer += cis(u1 * xi1) * inner * (0.5 * (t - s) * w[i]);
    }
    outer
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

#[test]
fn kernel_i_matches_nested_quadrature() {
    let cases = [
        (1.0, 0.0, 1.0, -1.0),
        (1.0, 0.0, 0.3, 2.0),
        (0.7, -0.4, -3.0, 1.5),
        (2.0, 0.5, 1e-9, 4.0),
        (1.0, 0.0, 2.0, 3e-6),
        (1.0, 0.0, -2.0, 2.0 + 1e-7),
    ];
    for (t, s, a, b) in cases {
        let k = kernel_I(t, s, a, b);
        let o = nested_oracle(t, s, a, b, 40);
        assert!(close(k, o, 1e-10), "({t},{s},{a},{b}): {k} vs {o}");
    }
}

#[test]
fn mirror_symmetry_of_boundary_terms() {
    for (t, s, a, b) in [(1.0, 0.0, 0.5, 2.0), (0.3, -1.2, -4.0, 1.5), (2.0, 1.0, 3.0, -3.0)] {
        let plus = kernel_boundary(Sign::Plus, s, t, b, a).unwrap();
        let minus = kernel_boundary(Sign::Minus, t, s, a, b).unwrap();
        assert!(close(plus, minus, 1e-14));
    }
}

#[test]
fn minus_pole_is_at_the_first_frequency() {
    assert_eq!(
        kernel_boundary(Sign::Minus, 1.0, 0.0, 0.0, 1.0),
        Err(Error::Singular { denominator: "xi1" })
    );
    assert!(kernel_boundary(Sign::Minus, 1.0, 0.0, 1.0, 0.0).is_ok());
}

#[test]
fn tiny_cut_constant_recovers_the_raw_kernel() {
    for (a, b) in [(0.3, 2.0), (-1.0, 0.4), (2.5, -2.6), (1.0, -1.0 + 1e-3)] {
        let reg = kernel_regularized(1.0, 0.0, a, b, 1e-12).unwrap();
        assert!(close(reg, kernel_I(1.0, 0.0, a, b), 1e-12));
    }
}

#[test]
fn cut_rejects_the_antidiagonal_cone() {
    // |ξ1 + ξ2| small against |ξ2|: the increment term is removed
    let (a, b) = (-0.95, 1.0);
    assert!(!in_cut_domain_2(a, b, 0.5));
    let reg = kernel_regularized(1.0, 0.0, a, b, 0.5).unwrap();
    let bdry = kernel_boundary(Sign::Plus, 1.0, 0.0, a, b).unwrap();
    assert_eq!(reg, bdry);
}

#[test]
fn regularized_variance_decreases_with_the_cut_constant() {
    let g = GridSpec {
        n_bins: 256,
        ..GridSpec::default()
    }
    .build()
    .unwrap();
    let p = ModelParams::new(0.2, 1e-3).unwrap();
    let v: Vec<f64> = [0.2, 0.5, 0.8]
        .iter()
        .map(|&c| variance_increment_regularized(&p, c, &g, 0.0, 1.0).unwrap())
        .collect();
    assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
    let raw = variance_increment_unregularized(&p, &g, 0.0, 1.0).unwrap();
    assert!(raw > v[0]);
}

#[test]
fn boundary_term_converges_as_eps_vanishes() {
    // below α = 1/4 the increment term diverges as ε → 0, the boundary term converges
    let g = GridSpec {
        xi_min: 1e-4,
        xi_max: 1e6,
        n_bins: 512,
        scheme: GridScheme::Geometric,
    }
    .build()
    .unwrap();
    let at = |eps: f64| {
        let p = ModelParams::new(0.1, eps).unwrap();
        (
            variance_boundary(&p, Sign::Plus, &g, 0.0, 1.0).unwrap(),
            variance_increment_unregularized(&p, &g, 0.0, 1.0).unwrap(),
        )
    };
    let v: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4, 1e-5].iter().map(|&e| at(e)).collect();
    // boundary: successive changes shrink geometrically (rate ε^{4α})
    let d: Vec<f64> = v.windows(2).map(|w| (w[1].0 - w[0].0).abs()).collect();
    assert!(d[1] < 0.6 * d[0] && d[2] < 0.6 * d[1], "{v:?}");
    // increment: each decade multiplies the variance (rate ε^{-(1-4α)})
    assert!(v.windows(2).all(|w| w[1].1 > 2.0 * w[0].1), "{v:?}");
}

#[test]
fn boundary_coefficient_envelope() {
    // coefficient variance ~ |ξ1|^{-1-4α} at ε = 0
    let alpha = 0.2;
    let p = ModelParams::new(alpha, 0.0).unwrap();
    let g = GridSpec {
        xi_min: 1e-6,
        xi_max: 1e8,
        n_bins: 4096,
        scheme: GridScheme::Geometric,
    }
    .build()
    .unwrap();
    let pairs: Vec<(f64, f64)> = (0..8)
        .map(|k| {
            let x = 10f64.powf(-2.0 + 0.5 * k as f64);
            (x, boundary_coefficient_variance(&p, &g, x).unwrap())
        })
        .collect();
    let f = fit_power_law(&pairs).unwrap();
    assert!((f.exponent - (-1.0 - 4.0 * alpha)).abs() < 0.02, "{}", f.exponent);
}

#[test]
fn sampled_area_variance_matches_discrete_variance() {
    let g = build_grid(200.0, 32, GridScheme::Geometric).unwrap();
    let p = ModelParams::new(0.3, 1e-2).unwrap();
    let (s, t, c) = (0.0, 0.5, 0.5);
    let n = 10_000u64;
    let (mut m1, mut m2) = (0.0, 0.0);
    for seed in 0..n {
        let z = sample_noise(&g, 2, 1000 + seed).unwrap();
        let a = area_regularized(&p, c, &g, &z, s, t, 0, 1).unwrap().value;
        m1 += a;
        m2 += a * a;
    }
    let nf = n as f64;
    let var = m2 / nf - (m1 / nf).powi(2);
    let exact = discrete_variance_area_regularized(&p, c, &g, s, t).unwrap();
    assert!((var / exact - 1.0).abs() < 0.1, "{var} vs {exact}");
    // distinct components: the mean vanishes
    assert!((m1 / nf).abs() < 4.0 * (exact / nf).sqrt());
}

#[test]
fn symmetric_pair_quadrature_matches_product_integral() {
    // ∫∫ e^{-|ξ1|-|ξ2|} = 4, and the half |ξ1| ≤ |ξ2| carries half of it
    let g = GridSpec {
        xi_min: 1e-8,
        xi_max: 60.0,
        n_bins: 2048,
        scheme: GridScheme::Geometric,
    }
    .build()
    .unwrap();
    let exec = Default::default();
    let total = quad_pair_symmetric(&g, exec, |a, b| Ok((-a.abs() - b.abs()).exp())).unwrap();
    assert!((total - 4.0).abs() < 1e-2, "{total}");
    let half = quad_pair_symmetric(&g, exec, |a, b| {
        Ok(if half_of(a, b) == Sign::Plus { (-a.abs() - b.abs()).exp() } else { 0.0 })
    })
    .unwrap();
    assert!((half - 2.0).abs() < 1e-2, "{half}");
}

#[test]
fn rate_variance_vanishes_for_equal_smoothing() {
    let g = build_grid(1e3, 64, GridScheme::Geometric).unwrap();
    let p = ModelParams::new(0.2, 1e-3).unwrap();
    assert_eq!(variance_rate(&p, (1e-2, 1e-2), 0.5, &g, 0.0, 1.0).unwrap(), 0.0);
    assert!(variance_rate(&p, (1e-2, 5e-3), 0.5, &g, 0.0, 1.0).unwrap() > 0.0);
}

fn nonzero(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi, prop::bool::ANY).prop_map(|(m, s)| if s { m } else { -m })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn both_decompositions_hold(
        t in -2.0f64..2.0, s in -2.0f64..2.0,
        a in nonzero(0.01, 20.0), b in nonzero(0.01, 20.0),
    ) {
        prop_assume!((a + b).abs() > 1e-3);
        let i = kernel_I(t, s, a, b);
        let plus = kernel_G(Sign::Plus, t, a, b).unwrap() - kernel_G(Sign::Plus, s, a, b).unwrap()
            + kernel_boundary(Sign::Plus, t, s, a, b).unwrap();
        let minus = kernel_G(Sign::Minus, t, b, a).unwrap() - kernel_G(Sign::Minus, s, b, a).unwrap()
            + kernel_boundary(Sign::Minus, t, s, a, b).unwrap();
        let scale = 1.0 / (a.abs().min(b.abs()) * (a + b).abs());
        prop_assert!((i - plus).norm() < 1e-10 * (1.0 + scale), "plus {} {}", i, plus);
        prop_assert!((i - minus).norm() < 1e-10 * (1.0 + scale), "minus {} {}", i, minus);
    }

    #[test]
    fn regularized_minus_counterterm_is_raw(
        t in -2.0f64..2.0, s in -2.0f64..2.0,
        a in nonzero(0.01, 20.0), b in nonzero(0.01, 20.0), c in 0.05f64..0.95,
    ) {
        let reg = kernel_regularized(t, s, a, b, c).unwrap();
        let ct = kernel_counterterm(t, s, a, b, c);
        let i = kernel_I(t, s, a, b);
        prop_assert!((reg - ct - i).norm() < 1e-10 * (1.0 + reg.norm() + ct.norm()));
    }

    #[test]
    fn counterterm_is_antisymmetric(
        t in -2.0f64..2.0, s in -2.0f64..2.0,
        a in nonzero(0.01, 20.0), b in nonzero(0.01, 20.0), c in 0.05f64..0.95,
    ) {
        prop_assume!(a.abs() != b.abs());
        let x = kernel_counterterm(t, s, a, b, c);
        let y = kernel_counterterm(t, s, b, a, c);
        prop_assert!((x + y).norm() <= 1e-12 * (1.0 + x.norm()));
    }

    #[test]
    fn kernel_i_is_a_two_point_increment(
        s in -1.0f64..1.0, u in -1.0f64..1.0, t in -1.0f64..1.0,
        a in -10.0f64..10.0, b in -10.0f64..10.0,
    ) {
        // I_ts = I_tu + I_us + (∫_u^t e^{iξ1 x}dx)(∫_s^u e^{iξ2 x}dx)
        let inc = phase_increment;
        let lhs = kernel_I(t, s, a, b);
        let rhs = kernel_I(t, u, a, b) + kernel_I(u, s, a, b) + inc(t, u, a) * inc(u, s, b);
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }
}
