//! Special functions and small numerical kernels shared by the spectral
//! modules.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (Lanczos, g = 7, with reflection below
/// 1/2). Relative accuracy is about 1e-15 away from the poles.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        PI / (libm::sin(PI * x) * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + k as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        libm::sqrt(2.0 * PI) * libm::pow(t, x + 0.5) * libm::exp(-t) * acc
    }
}

#[inline]
pub fn cis(theta: f64) -> Complex64 {
    let (s, c) = libm::sincos(theta);
    Complex64::new(c, s)
}

#[inline]
pub fn sinc(theta: f64) -> f64 {
    if theta == 0.0 {
        1.0
    } else {
        libm::sin(theta) / theta
    }
}

/// `(e^{iθ} - 1) / (iθ)`, entire in θ and free of cancellation.
#[inline]
pub fn phi1_imag(theta: f64) -> Complex64 {
    let half = 0.5 * theta;
    Complex64::new(sinc(theta), libm::sin(half) * sinc(half))
}

/// `∫_s^t e^{iuξ} du`, i.e. `(e^{itξ} - e^{isξ}) / (iξ)` with the removable
/// singularity at ξ = 0 filled in.
#[inline]
pub fn phase_increment(t: f64, s: f64, xi: f64) -> Complex64 {
    let h = t - s;
    cis(s * xi) * phi1_imag(h * xi) * h
}

/// `m_k(iθ) = ∫_0^1 r^k e^{iθr} dr` for k = 0..=K, returned in `out`.
pub(crate) fn exp_moments(theta: f64, out: &mut [Complex64]) {
    let x = Complex64::new(0.0, theta);
    if theta.abs() < 1.0 {
        // power series: Σ_j x^j / (j! (k + j + 1))
        for (k, m) in out.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(1.0 / (k as f64 + 1.0), 0.0);
            for j in 1..40 {
                term = term * x / j as f64;
                let add = term / (k as f64 + j as f64 + 1.0);
                acc += add;
                if add.norm() < 1e-18 * acc.norm() {
                    break;
                }
            }
            *m = acc;
        }
    } else {
        let e = cis(theta);
        let mut prev = phi1_imag(theta);
        for (k, m) in out.iter_mut().enumerate() {
            if k > 0 {
                prev = (e - prev * k as f64) / x;
            }
            *m = prev;
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
