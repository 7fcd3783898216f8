//! Model parameters, frequency grids, seeded spectral noise and deterministic
//! quadrature over frequency tuples.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::special::gamma;

/// Hurst index, smoothing scale and the derived normalization constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub eps: f64,
    pub c_alpha: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, eps: f64) -> Result<Self> {
        let c_alpha = compute_c_alpha(alpha)?;
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::OutOfRange {
                name: "eps",
                value: eps,
                range: "[0, inf)",
            });
        }
        Ok(ModelParams {
            alpha,
            eps,
            c_alpha,
        })
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        ModelParams::new(self.alpha, eps)
    }

    /// Amplitude multiplying every spectral integral against unit-intensity
    /// noise (`E|W(dξ)|² = dξ`). It is `c_α/√α`, which makes `E B_1² = 1` in
    /// the ε → 0 limit.
    pub fn amplitude(&self) -> f64 {
        self.c_alpha / libm::sqrt(self.alpha)
    }

    /// `e^{-ε|ξ|} |ξ|^{1/2-α}`.
    #[inline]
    pub fn spectral_weight(&self, xi: f64) -> f64 {
        let a = xi.abs();
        libm::exp(-self.eps * a) * libm::pow(a, 0.5 - self.alpha)
    }

    /// Square of [`spectral_weight`](Self::spectral_weight).
    #[inline]
    pub fn spectral_density(&self, xi: f64) -> f64 {
        let a = xi.abs();
        libm::exp(-2.0 * self.eps * a) * libm::pow(a, 1.0 - 2.0 * self.alpha)
    }
}

/// `½ √(−α / (cos πα · Γ(−2α)))` for α in (0, 1/2).
pub fn compute_c_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "(0, 1/2)",
        });
    }
    let radicand = -alpha / (libm::cos(PI * alpha) * gamma(-2.0 * alpha));
    Ok(0.5 * libm::sqrt(radicand))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridScheme {
    Linear,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub center: f64,
    pub width: f64,
}

/// Positive frequency bins covering `(xi_min, xi_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub xi_min: f64,
    pub xi_max: f64,
    pub scheme: GridScheme,
    pub bins: Vec<Bin>,
}

/// Ratio `xi_max / xi_min` used by [`build_grid`] for geometric grids.
pub const DEFAULT_GEOMETRIC_SPAN: f64 = 1e8;

/// Builds a grid on `(0, xi_max]` (linear) or `(xi_max / 1e8, xi_max]`
/// (geometric). Use [`build_grid_from`] to choose the geometric lower edge.
pub fn build_grid(xi_max: f64, n_bins: usize, scheme: GridScheme) -> Result<FrequencyGrid> {
    let xi_min = match scheme {
        GridScheme::Linear => 0.0,
        GridScheme::Geometric => xi_max / DEFAULT_GEOMETRIC_SPAN,
    };
    build_grid_from(xi_min, xi_max, n_bins, scheme)
}

pub fn build_grid_from(
    xi_min: f64,
    xi_max: f64,
    n_bins: usize,
    scheme: GridScheme,
) -> Result<FrequencyGrid> {
    if !xi_max.is_finite() || xi_max <= 0.0 {
        return Err(Error::OutOfRange {
            name: "xi_max",
            value: xi_max,
            range: "(0, inf)",
        });
    }
    if n_bins < 2 {
        return Err(Error::invalid("a frequency grid needs at least 2 bins"));
    }
    if !(xi_min >= 0.0 && xi_min < xi_max) {
        return Err(Error::OutOfRange {
            name: "xi_min",
            value: xi_min,
            range: "[0, xi_max)",
        });
    }
    let n = n_bins as f64;
    let edge = |k: usize| -> f64 {
        if k == n_bins {
            return xi_max;
        }
        match scheme {
            GridScheme::Linear => xi_min + (xi_max - xi_min) * k as f64 / n,
            GridScheme::Geometric => xi_min * libm::pow(xi_max / xi_min, k as f64 / n),
        }
    };
    if scheme == GridScheme::Geometric && xi_min <= 0.0 {
        return Err(Error::invalid("geometric grid needs xi_min > 0"));
    }
    let bins = (0..n_bins)
        .map(|k| {
            let (a, b) = (edge(k), edge(k + 1));
            Bin {
                center: 0.5 * (a + b),
                width: b - a,
            }
        })
        .collect();
    Ok(FrequencyGrid {
        xi_min,
        xi_max,
        scheme,
        bins,
    })
}

impl FrequencyGrid {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn total_width(&self) -> f64 {
        self.bins.iter().map(|b| b.width).sum()
    }

    /// Every bin mirrored to negative frequency, ordered by ascending centre.
    pub fn signed_nodes(&self) -> Vec<Bin> {
        let mut out: Vec<Bin> = self
            .bins
            .iter()
            .rev()
            .map(|b| Bin {
                center: -b.center,
                width: b.width,
            })
            .collect();
        out.extend_from_slice(&self.bins);
        out
    }
}

/// Grid settings, defaulting to a geometric grid from 1e-4 to 1e4 with 2048
/// bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub xi_min: f64,
    pub xi_max: f64,
    pub n_bins: usize,
    pub scheme: GridScheme,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            xi_min: 1e-4,
            xi_max: 1e4,
            n_bins: 2048,
            scheme: GridScheme::Geometric,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<FrequencyGrid> {
        let xi_min = match self.scheme {
            GridScheme::Linear => 0.0,
            GridScheme::Geometric => self.xi_min,
        };
        build_grid_from(xi_min, self.xi_max, self.n_bins, self.scheme)
    }

    /// Same span with `factor` times as many bins.
    pub fn refined(&self, factor: f64) -> Self {
        GridSpec {
            n_bins: libm::round(self.n_bins as f64 * factor) as usize,
            ..*self
        }
    }
}

/// Seeded complex Gaussian increments `W(dξ)` on the positive bins of a grid,
/// one independent family per component.
///
/// `samples[c][k]` has mean zero and `E|Z|² = width_k`. Negative frequencies
/// are not stored; they are `W(−dξ) = conj(W(dξ))`, which makes every
/// integral of a Hermitian kernel twice the real part of a positive sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralNoiseField {
    pub component_count: usize,
    pub seed: u64,
    pub samples: Vec<Vec<Complex64>>,
    grid: FrequencyGrid,
}

pub fn sample_noise(grid: &FrequencyGrid, d: usize, seed: u64) -> Result<SpectralNoiseField> {
    if d == 0 {
        return Err(Error::invalid("noise needs at least one component"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..d)
        .map(|_| {
            grid.bins
                .iter()
                .map(|b| {
                    let sd = libm::sqrt(0.5 * b.width);
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(sd * re, sd * im)
                })
                .collect()
        })
        .collect();
    Ok(SpectralNoiseField {
        component_count: d,
        seed,
        samples,
        grid: grid.clone(),
    })
}

impl SpectralNoiseField {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Noise value at a signed node: bin `k` with sign `+1` or `-1`.
    #[inline]
    pub fn at(&self, component: usize, bin: usize, positive: bool) -> Complex64 {
        let z = self.samples[component][bin];
        if positive {
            z
        } else {
            z.conj()
        }
    }

    pub(crate) fn check(&self, grid: &FrequencyGrid, needed: usize) -> Result<()> {
        if self.grid != *grid {
            return Err(Error::GridMismatch {
                noise: self.grid.len(),
                grid: grid.len(),
            });
        }
        if self.component_count < needed {
            return Err(Error::ComponentCount {
                needed,
                available: self.component_count,
            });
        }
        Ok(())
    }
}

/// A pure acceptance test on frequency tuples of fixed arity.
pub trait DomainPredicate {
    fn arity(&self) -> usize;
    fn accepts(&self, xi: &[f64]) -> bool;
}

/// Accepts every tuple.
#[derive(Debug, Clone, Copy)]
pub struct Everywhere(pub usize);

impl DomainPredicate for Everywhere {
    fn arity(&self) -> usize {
        self.0
    }
    fn accepts(&self, _xi: &[f64]) -> bool {
        true
    }
}

/// Wraps a closure as a [`DomainPredicate`].
#[derive(Clone, Copy)]
pub struct Predicate<F> {
    pub arity: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> bool> DomainPredicate for Predicate<F> {
    fn arity(&self) -> usize {
        self.arity
    }
    fn accepts(&self, xi: &[f64]) -> bool {
        (self.f)(xi)
    }
}

/// How one quadrature axis ranges over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Positive bin centres only.
    Positive,
    /// Both signs, negative frequencies first.
    Signed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Serial
        }
    }
}

/// Sums `row(0) + row(1) + ... + row(n-1)` left to right. Rows may be
/// evaluated concurrently, the reduction order never changes.
pub fn reduce_rows<T, F>(n: usize, exec: Execution, row: F) -> Result<T>
where
    T: Copy + Default + Send + core::ops::Add<Output = T>,
    F: Fn(usize) -> Result<T> + Sync,
{
    let parts: Vec<Result<T>> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(&row).collect()
        }
        _ => (0..n).map(&row).collect(),
    };
    let mut acc = T::default();
    for p in parts {
        acc = acc + p?;
    }
    Ok(acc)
}

/// Weighted sum of `kernel` over accepted tuples of bin centres:
/// `Σ kernel(ξ) Π width`, lexicographic in the bins of each axis.
pub fn quad<K, D>(kernel: K, domain: &D, grid: &FrequencyGrid, axes: &[Axis]) -> Result<Complex64>
where
    K: Fn(&[f64]) -> Complex64 + Sync,
    D: DomainPredicate + Sync + ?Sized,
{
    quad_with(kernel, domain, grid, axes, Execution::default())
}

pub fn quad_with<K, D>(
    kernel: K,
    domain: &D,
    grid: &FrequencyGrid,
    axes: &[Axis],
    exec: Execution,
) -> Result<Complex64>
where
    K: Fn(&[f64]) -> Complex64 + Sync,
    D: DomainPredicate + Sync + ?Sized,
{
    let arity = axes.len();
    if !(1..=3).contains(&arity) || domain.arity() != arity {
        return Err(Error::invalid("quadrature arity must be 1..=3 and match the domain"));
    }
    let signed = grid.signed_nodes();
    let nodes: Vec<&[Bin]> = axes
        .iter()
        .map(|a| match a {
            Axis::Positive => grid.bins.as_slice(),
            Axis::Signed => signed.as_slice(),
        })
        .collect();

    reduce_rows(nodes[0].len(), exec, |i| {
        let b0 = nodes[0][i];
        let mut xi = [b0.center, 0.0, 0.0];
        let mut acc = Complex64::new(0.0, 0.0);
        let mut visit = |xi: &[f64], w: f64| -> Result<()> {
            if domain.accepts(xi) {
                let v = kernel(xi);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFiniteKernel { node: xi.to_vec() });
                }
                acc += v * w;
            }
            Ok(())
        };
        match arity {
            1 => visit(&xi[..1], b0.width)?,
            2 => {
                for b1 in nodes[1] {
                    xi[1] = b1.center;
                    visit(&xi[..2], b0.width * b1.width)?;
                }
            }
            _ => {
                for b1 in nodes[1] {
                    xi[1] = b1.center;
                    for b2 in nodes[2] {
                        xi[2] = b2.center;
                        visit(&xi[..3], b0.width * b1.width * b2.width)?;
                    }
                }
            }
        }
        Ok(acc)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_alpha_matches_gamma_oracle() {
        // Γ(-1/2) = -2√π, cos(π/4) = 1/√2
        let expected = 0.5 * libm::sqrt(0.25 / (libm::sqrt(0.5) * 2.0 * libm::sqrt(PI)));
        let c = compute_c_alpha(0.25).unwrap();
        assert!((c - expected).abs() < 1e-14);
        assert!((c - 0.157_904_694_436_516).abs() < 1e-12);
        assert!((compute_c_alpha(0.1).unwrap() - 0.067_198_951_952_934_4).abs() < 1e-12);
        assert!(compute_c_alpha(0.5).is_err());
        assert!(compute_c_alpha(0.0).is_err());
    }

    #[test]
    fn linear_halving() {
        let g = build_grid(1.0, 2, GridScheme::Linear).unwrap();
        assert_eq!(
            g.bins,
            [
                Bin { center: 0.25, width: 0.5 },
                Bin { center: 0.75, width: 0.5 }
            ]
        );
        assert!(build_grid(0.0, 4, GridScheme::Linear).is_err());
        assert!(build_grid(1.0, 1, GridScheme::Linear).is_err());
    }

    #[test]
    fn geometric_ratio_is_constant() {
        let g = build_grid_from(1e-3, 1e3, 60, GridScheme::Geometric).unwrap();
        let r0 = g.bins[1].width / g.bins[0].width;
        for w in g.bins.windows(2) {
            assert!((w[1].width / w[0].width / r0 - 1.0).abs() < 1e-9);
        }
        assert!((g.total_width() - (1e3 - 1e-3)).abs() < 1e-9);
    }

    #[test]
    fn unit_square_area() {
        let g = build_grid(1.0, 16, GridScheme::Linear).unwrap();
        let v = quad(|_| Complex64::new(1.0, 0.0), &Everywhere(2), &g, &[Axis::Positive; 2]).unwrap();
        assert!((v.re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn annulus_inverse_square() {
        let g = build_grid(2.0, 4000, GridScheme::Linear).unwrap();
        let annulus = Predicate {
            arity: 1,
            f: |x: &[f64]| (1.0..=2.0).contains(&x[0].abs()),
        };
        let v = quad(|x| Complex64::new(x[0].powi(-2), 0.0), &annulus, &g, &[Axis::Signed]).unwrap();
        assert!((v.re - 1.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn rejecting_domain_gives_zero() {
        let g = build_grid(1.0, 8, GridScheme::Linear).unwrap();
        let never = Predicate { arity: 3, f: |_: &[f64]| false };
        let v = quad(|_| Complex64::new(f64::NAN, 0.0), &never, &g, &[Axis::Signed; 3]).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn non_finite_kernel_names_the_node() {
        let g = build_grid(1.0, 2, GridScheme::Linear).unwrap();
        let err = quad(|x| Complex64::new(1.0 / (x[0] - 0.25), 0.0), &Everywhere(1), &g, &[Axis::Positive]);
        assert_eq!(err, Err(Error::NonFiniteKernel { node: alloc::vec![0.25] }));
    }

    #[test]
    fn parallel_reduction_is_bit_identical() {
        let g = build_grid(50.0, 40, GridScheme::Geometric).unwrap();
        let k = |x: &[f64]| Complex64::new(libm::sin(x[0] * x[1]) / (1.0 + x[2] * x[2]), x[0] - x[2]);
        let a = quad_with(k, &Everywhere(3), &g, &[Axis::Signed; 3], Execution::Serial).unwrap();
        let b = quad_with(k, &Everywhere(3), &g, &[Axis::Signed; 3], Execution::Parallel).unwrap();
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    #[test]
    fn noise_is_reproducible_and_checked() {
        let g = build_grid(10.0, 32, GridScheme::Linear).unwrap();
        let a = sample_noise(&g, 2, 7).unwrap();
        assert_eq!(a, sample_noise(&g, 2, 7).unwrap());
        assert_ne!(a, sample_noise(&g, 2, 8).unwrap());
        assert!(a.check(&g, 2).is_ok());
        assert!(matches!(a.check(&g, 3), Err(Error::ComponentCount { .. })));
        let other = build_grid(10.0, 16, GridScheme::Linear).unwrap();
        assert!(matches!(a.check(&other, 1), Err(Error::GridMismatch { .. })));
        assert!(sample_noise(&g, 0, 1).is_err());
    }
}
