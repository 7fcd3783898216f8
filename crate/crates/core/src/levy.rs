//! Second-order kernels, the cut Fourier domain, the regularized Lévy area
//! and the variance quadratures built on them.
//!
//! Frequencies are named after the integration variables of
//! `I_ts(ξ1, ξ2) = ∫_s^t e^{iu₁ξ₁} ∫_s^{u₁} e^{iu₂ξ₂} du₂ du₁`: `ξ1` is the
//! outer variable (first component), `ξ2` the inner one (second component).
//! The plane splits into the `+` half `|ξ1| ≤ |ξ2|` (ties included) and the
//! `−` half `|ξ2| < |ξ1|`, so every grid pair lands in exactly one half.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::{cis, exp_moments, phase_increment, phi1_imag};
use crate::spectral::{reduce_rows, Bin, Execution, FrequencyGrid, ModelParams, SpectralNoiseField};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Below this value of `|(t−s)ξ2|` the closed form of [`kernel_I`] switches to
/// its Taylor expansion in `ξ2`.
pub const TAYLOR_SWITCH: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// Which normal-ordered half a frequency pair belongs to.
#[inline]
pub fn half_of(xi1: f64, xi2: f64) -> Sign {
    if xi1.abs() <= xi2.abs() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// The double iterated integral `I_ts(ξ1, ξ2)`, total in all arguments.
#[allow(non_snake_case)]
pub fn kernel_I(t: f64, s: f64, xi1: f64, xi2: f64) -> Complex64 {
    let h = t - s;
    let x = h * xi1;
    let y = h * xi2;
    // I = e^{is(ξ1+ξ2)} h² F with F = ∫₀¹ e^{ixr} (e^{iyr} − 1)/(iy) dr
    let f = if y.abs() < TAYLOR_SWITCH {
        let mut m = [Complex64::new(0.0, 0.0); 6];
        exp_moments(x, &mut m);
        let iy = Complex64::new(0.0, y);
        let mut pow = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, mk) in m.iter().enumerate().skip(1) {
            fact *= k as f64;
            acc += *mk * pow / fact;
            pow *= iy;
        }
        acc
    } else {
        (phi1_imag(x + y) - phi1_imag(x)) / Complex64::new(0.0, y)
    };
    cis(s * (xi1 + xi2)) * f * (h * h)
}

/// `G^+_u(ξ1, ξ2) = e^{iu(ξ1+ξ2)} / ([i(ξ1+ξ2)][iξ2])`, or its `−`
/// counterpart `G^−_u(ξ1, ξ2) = −e^{iu(ξ1+ξ2)} / ([i(ξ1+ξ2)][iξ1])`.
///
/// The kernel is written in terms of the variable paired with the
/// normal-ordering: `inner` is the one appearing alone in the denominator, so
/// `G^+_u(ξ1, ξ2) = kernel_G(Plus, u, ξ1, ξ2)` and
/// `G^−_u(ξ1, ξ2) = kernel_G(Minus, u, ξ2, ξ1)`.
#[allow(non_snake_case)]
pub fn kernel_G(sign: Sign, u: f64, xi_outer: f64, xi_inner: f64) -> Result<Complex64> {
    let sum = xi_outer + xi_inner;
    if sum == 0.0 {
        return Err(Error::Singular {
            denominator: "xi_outer + xi_inner",
        });
    }
    if xi_inner == 0.0 {
        return Err(Error::Singular {
            denominator: "xi_inner",
        });
    }
    let v = cis(u * sum) / (I * sum * I * xi_inner);
    Ok(match sign {
        Sign::Plus => v,
        Sign::Minus => -v,
    })
}

/// `G^±_t − G^±_s` as a function of the actual pair `(ξ1, ξ2)`; finite at
/// `ξ1 + ξ2 = 0`.
#[inline]
fn g_increment(sign: Sign, t: f64, s: f64, xi1: f64, xi2: f64) -> Complex64 {
    let p = phase_increment(t, s, xi1 + xi2);
    match sign {
        Sign::Plus => p / (I * xi2),
        Sign::Minus => -p / (I * xi1),
    }
}

/// Boundary terms `I^±_ts(ξ1, ξ2)(∂)`:
/// `+`: `−(e^{isξ2}/iξ2) · ∫_s^t e^{iuξ1} du`, pole at `ξ2 = 0`;
/// `−`: `(e^{itξ1}/iξ1) · ∫_s^t e^{iuξ2} du`, pole at `ξ1 = 0`.
pub fn kernel_boundary(sign: Sign, t: f64, s: f64, xi1: f64, xi2: f64) -> Result<Complex64> {
    match sign {
        Sign::Plus => {
            if xi2 == 0.0 {
                return Err(Error::Singular { denominator: "xi2" });
            }
            Ok(-cis(s * xi2) / (I * xi2) * phase_increment(t, s, xi1))
        }
        Sign::Minus => {
            if xi1 == 0.0 {
                return Err(Error::Singular { denominator: "xi1" });
            }
            Ok(cis(t * xi1) / (I * xi1) * phase_increment(t, s, xi2))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel2Kind {
    IFull,
    GPlus,
    GMinus,
    BdryPlus,
    BdryMinus,
}

/// One of the five second-order kernels as a function of `(t, s, ξ1, ξ2)`.
/// The `G` kernels are evaluated at `t` and ignore `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kernel2 {
    pub kind: Kernel2Kind,
}

impl Kernel2 {
    pub fn new(kind: Kernel2Kind) -> Self {
        Kernel2 { kind }
    }

    pub fn eval(&self, t: f64, s: f64, xi1: f64, xi2: f64) -> Result<Complex64> {
        match self.kind {
            Kernel2Kind::IFull => Ok(kernel_I(t, s, xi1, xi2)),
            Kernel2Kind::GPlus => kernel_G(Sign::Plus, t, xi1, xi2),
            Kernel2Kind::GMinus => kernel_G(Sign::Minus, t, xi2, xi1),
            Kernel2Kind::BdryPlus => kernel_boundary(Sign::Plus, t, s, xi1, xi2),
            Kernel2Kind::BdryMinus => kernel_boundary(Sign::Minus, t, s, xi1, xi2),
        }
    }
}

/// `|ξ1| ≤ |ξ2|` and `|ξ1 + ξ2| > c_reg |ξ2|`.
#[inline]
pub fn in_cut_domain_2(xi1: f64, xi2: f64, c_reg: f64) -> bool {
    xi1.abs() <= xi2.abs() && (xi1 + xi2).abs() > c_reg * xi2.abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutDomain2 {
    pub c_reg: f64,
}

impl CutDomain2 {
    pub fn new(c_reg: f64) -> Result<Self> {
        check_c_reg("c_reg", c_reg)?;
        Ok(CutDomain2 { c_reg })
    }

    pub fn accepts(&self, xi1: f64, xi2: f64) -> bool {
        in_cut_domain_2(xi1, xi2, self.c_reg)
    }
}

impl crate::spectral::DomainPredicate for CutDomain2 {
    fn arity(&self) -> usize {
        2
    }
    fn accepts(&self, xi: &[f64]) -> bool {
        in_cut_domain_2(xi[0], xi[1], self.c_reg)
    }
}

pub(crate) fn check_c_reg(name: &'static str, c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: c,
            range: "(0, 1)",
        })
    }
}

/// Whether the pair lies in the cut domain of its own half.
#[inline]
fn accepted(xi1: f64, xi2: f64, c_reg: f64) -> bool {
    match half_of(xi1, xi2) {
        Sign::Plus => in_cut_domain_2(xi1, xi2, c_reg),
        Sign::Minus => in_cut_domain_2(xi2, xi1, c_reg),
    }
}

/// Regularized kernel: the boundary term of the pair's half plus the
/// `G`-increment restricted to the cut domain.
pub fn kernel_regularized(t: f64, s: f64, xi1: f64, xi2: f64, c_reg: f64) -> Result<Complex64> {
    let sign = half_of(xi1, xi2);
    let mut k = kernel_boundary(sign, t, s, xi1, xi2)?;
    if accepted(xi1, xi2, c_reg) {
        k += g_increment(sign, t, s, xi1, xi2);
    }
    Ok(k)
}

/// `regularized − raw`: minus the `G`-increment over the rejected cone.
pub fn kernel_counterterm(t: f64, s: f64, xi1: f64, xi2: f64, c_reg: f64) -> Complex64 {
    if accepted(xi1, xi2, c_reg) {
        Complex64::new(0.0, 0.0)
    } else {
        -g_increment(half_of(xi1, xi2), t, s, xi1, xi2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Raw,
    Regularized,
    Counterterm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaSample {
    pub value: f64,
    pub order: (usize, usize),
    pub interval: (f64, f64),
    pub provenance: Provenance,
}

/// Signed grid nodes with the spectral weight and noise of two components.
struct PairNodes {
    xi: Vec<f64>,
    weight: Vec<f64>,
    z1: Vec<Complex64>,
    z2: Vec<Complex64>,
    /// Index of the first positive node.
    positive_start: usize,
}

impl PairNodes {
    fn new(params: &ModelParams, noise: &SpectralNoiseField, i1: usize, i2: usize) -> Self {
        let bins = &noise.grid().bins;
        let n = bins.len();
        let mut out = PairNodes {
            xi: Vec::with_capacity(2 * n),
            weight: Vec::with_capacity(2 * n),
            z1: Vec::with_capacity(2 * n),
            z2: Vec::with_capacity(2 * n),
            positive_start: n,
        };
        let nodes = bins.iter().enumerate().rev().map(|(k, b)| (k, -b.center, false));
        let nodes = nodes.chain(bins.iter().enumerate().map(|(k, b)| (k, b.center, true)));
        for (k, xi, positive) in nodes {
            out.xi.push(xi);
            out.weight.push(params.spectral_weight(xi));
            out.z1.push(noise.at(i1, k, positive));
            out.z2.push(noise.at(i2, k, positive));
        }
        out
    }
}

fn validate_pair(noise: &SpectralNoiseField, grid: &FrequencyGrid, i1: usize, i2: usize) -> Result<()> {
    if i1 == i2 {
        return Err(Error::invalid(
            "diagonal areas need no regularization: use half the squared increment",
        ));
    }
    noise.check(grid, i1.max(i2) + 1)
}

/// `A² Σ_{a,b} φ(ξa)φ(ξb) K(ξa, ξb) Z_{i1}(a) Z_{i2}(b)` over signed nodes,
/// computed as twice the real part of the half with `ξa > 0`.
fn noise_double_sum<K>(
    params: &ModelParams,
    noise: &SpectralNoiseField,
    i1: usize,
    i2: usize,
    kernel: K,
) -> Result<f64>
where
    K: Fn(f64, f64) -> Result<Complex64> + Sync,
{
    let nodes = PairNodes::new(params, noise, i1, i2);
    let n_pos = nodes.xi.len() - nodes.positive_start;
    let sum = reduce_rows(n_pos, Execution::default(), |r| {
        let a = nodes.positive_start + r;
        let mut row = Complex64::new(0.0, 0.0);
        for b in 0..nodes.xi.len() {
            let k = kernel(nodes.xi[a], nodes.xi[b])?;
            row += k * nodes.z2[b] * nodes.weight[b];
        }
        Ok(row * nodes.z1[a] * nodes.weight[a])
    })?;
    let amp = params.amplitude();
    Ok(2.0 * amp * amp * sum.re)
}

fn require_smoothing(params: &ModelParams) -> Result<()> {
    if params.eps > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "eps",
            value: params.eps,
            range: "(0, inf) for sampling",
        })
    }
}

/// `B^{2,ε}_ts(i1, i2)` from the full kernel `I_ts`.
#[allow(clippy::too_many_arguments)]
pub fn area_raw(
    params: &ModelParams,
    grid: &FrequencyGrid,
    noise: &SpectralNoiseField,
    s: f64,
    t: f64,
    i1: usize,
    i2: usize,
) -> Result<AreaSample> {
    require_smoothing(params)?;
    validate_pair(noise, grid, i1, i2)?;
    let value = noise_double_sum(params, noise, i1, i2, |x1, x2| Ok(kernel_I(t, s, x1, x2)))?;
    Ok(AreaSample {
        value,
        order: (i1, i2),
        interval: (s, t),
        provenance: Provenance::Raw,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn area_regularized(
    params: &ModelParams,
    c_reg: f64,
    grid: &FrequencyGrid,
    noise: &SpectralNoiseField,
    s: f64,
    t: f64,
    i1: usize,
    i2: usize,
) -> Result<AreaSample> {
    require_smoothing(params)?;
    check_c_reg("c_reg", c_reg)?;
    validate_pair(noise, grid, i1, i2)?;
    let value = noise_double_sum(params, noise, i1, i2, |x1, x2| {
        kernel_regularized(t, s, x1, x2, c_reg)
    })?;
    Ok(AreaSample {
        value,
        order: (i1, i2),
        interval: (s, t),
        provenance: Provenance::Regularized,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn counterterm_sample(
    params: &ModelParams,
    c_reg: f64,
    grid: &FrequencyGrid,
    noise: &SpectralNoiseField,
    s: f64,
    t: f64,
    i1: usize,
    i2: usize,
) -> Result<AreaSample> {
    require_smoothing(params)?;
    check_c_reg("c_reg", c_reg)?;
    validate_pair(noise, grid, i1, i2)?;
    let value = noise_double_sum(params, noise, i1, i2, |x1, x2| {
        Ok(kernel_counterterm(t, s, x1, x2, c_reg))
    })?;
    Ok(AreaSample {
        value,
        order: (i1, i2),
        interval: (s, t),
        provenance: Provenance::Counterterm,
    })
}

/// Node of the variance quadrature in coordinates `(b, σ)` where `b > 0` is
/// the larger frequency of the pair and `σ = ξ1 + ξ2 ∈ (0, 2b]`.
fn clipped_sum_bins(bins: &[Bin], big: f64) -> impl Iterator<Item = Bin> + '_ {
    let top = 2.0 * big;
    bins.iter().map_while(move |b| {
        let lo = b.center - 0.5 * b.width;
        let hi = b.center + 0.5 * b.width;
        if lo >= top {
            None
        } else if hi <= top {
            Some(*b)
        } else {
            Some(Bin {
                center: 0.5 * (lo + top),
                width: top - lo,
            })
        }
    })
}

/// `∫∫_{ℝ²} f(ξ1, ξ2) dξ1 dξ2` for integrands invariant under the global sign
/// flip, with quadrature nodes adapted to the diagonal `ξ1 + ξ2 = 0`.
///
/// Each half is parametrised by its larger frequency `b` (a grid bin) and the
/// sum `σ` (grid bins clipped to `σ ≤ 2b`); the change of variables has unit
/// Jacobian. Mirrored pairs with `σ < 0` are covered by the factor 2.
pub fn quad_pair_symmetric<F>(grid: &FrequencyGrid, exec: Execution, f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let bins = &grid.bins;
    let total = reduce_rows(bins.len(), exec, |k| {
        let b = bins[k];
        let mut row = 0.0;
        for sb in clipped_sum_bins(bins, b.center) {
            let small = sb.center - b.center;
            // + half: ξ2 = b is the larger one; − half: ξ1 = b.
            let v = f(small, b.center)? + f(b.center, small)?;
            if !v.is_finite() {
                return Err(Error::NonFiniteKernel {
                    node: alloc::vec![b.center, sb.center],
                });
            }
            row += v * sb.width;
        }
        Ok(row * b.width)
    })?;
    Ok(2.0 * total)
}

fn amp4(params: &ModelParams) -> f64 {
    let a2 = params.amplitude() * params.amplitude();
    a2 * a2
}

fn density2(params: &ModelParams, xi1: f64, xi2: f64) -> f64 {
    params.spectral_density(xi1) * params.spectral_density(xi2)
}

/// `E|𝓡B²_ts(i1, i2)|²` for distinct components.
pub fn variance_area_regularized(
    params: &ModelParams,
    c_reg: f64,
    grid: &FrequencyGrid,
    s: f64,
    t: f64,
) -> Result<f64> {
    check_c_reg("c_reg", c_reg)?;
    let v = quad_pair_symmetric(grid, Execution::default(), |x1, x2| {
        Ok(density2(params, x1, x2) * kernel_regularized(t, s, x1, x2, c_reg)?.norm_sqr())
    })?;
    Ok(amp4(params) * v)
}

/// Variance of the sum of both `G`-increment terms, without any cut.
pub fn variance_increment_unregularized(
    params: &ModelParams,
    grid: &FrequencyGrid,
    s: f64,
    t: f64,
) -> Result<f64> {
    let v = quad_pair_symmetric(grid, Execution::default(), |x1, x2| {
        let g = g_increment(half_of(x1, x2), t, s, x1, x2);
        Ok(density2(params, x1, x2) * g.norm_sqr())
    })?;
    Ok(amp4(params) * v)
}

/// Same as [`variance_increment_unregularized`] with the cut domain restored.
pub fn variance_increment_regularized(
    params: &ModelParams,
    c_reg: f64,
    grid: &FrequencyGrid,
    s: f64,
    t: f64,
) -> Result<f64> {
    check_c_reg("c_reg", c_reg)?;
    let v = quad_pair_symmetric(grid, Execution::default(), |x1, x2| {
        if !accepted(x1, x2, c_reg) {
            return Ok(0.0);
        }
        let g = g_increment(half_of(x1, x2), t, s, x1, x2);
        Ok(density2(params, x1, x2) * g.norm_sqr())
    })?;
    Ok(amp4(params) * v)
}

/// Variance of one boundary term alone, integrated over its own half.
pub fn variance_boundary(
    params: &ModelParams,
    sign: Sign,
    grid: &FrequencyGrid,
    s: f64,
    t: f64,
) -> Result<f64> {
    let v = quad_pair_symmetric(grid, Execution::default(), |x1, x2| {
        if half_of(x1, x2) != sign {
            return Ok(0.0);
        }
        Ok(density2(params, x1, x2) * kernel_boundary(sign, t, s, x1, x2)?.norm_sqr())
    })?;
    Ok(amp4(params) * v)
}

/// `E|𝓡B²,ε_ts − 𝓡B²,η_ts|²`.
pub fn variance_rate(
    params: &ModelParams,
    eps_eta: (f64, f64),
    c_reg: f64,
    grid: &FrequencyGrid,
    s: f64,
    t: f64,
) -> Result<f64> {
    let (eps, eta) = eps_eta;
    if !(eps > 0.0 && eta > 0.0) {
        return Err(Error::invalid("rate needs eps, eta > 0"));
    }
    check_c_reg("c_reg", c_reg)?;
    let power = 1.0 - 2.0 * params.alpha;
    let v = quad_pair_symmetric(grid, Execution::default(), |x1, x2| {
        let l1 = x1.abs() + x2.abs();
        let dw = libm::exp(-eps * l1) - libm::exp(-eta * l1);
        let w = libm::pow((x1 * x2).abs(), power) * dw * dw;
        Ok(w * kernel_regularized(t, s, x1, x2, c_reg)?.norm_sqr())
    })?;
    Ok(amp4(params) * v)
}

/// Variance of the coefficient of `W_{ξ1}(1)` in the `+` boundary term at
/// `s = 0`: `e^{-2ε|ξ1|} |ξ1|^{-1-2α} ∫_{|ξ2| ≥ |ξ1|} e^{-2ε|ξ2|} |ξ2|^{-1-2α} dξ2`
/// (times `A⁴`), integrated over the signed grid.
pub fn boundary_coefficient_variance(params: &ModelParams, grid: &FrequencyGrid, xi1: f64) -> Result<f64> {
    let inner: f64 = grid
        .bins
        .iter()
        .filter(|b| b.center >= xi1.abs())
        .map(|b| params.spectral_density(b.center) / (b.center * b.center) * b.width)
        .sum();
    let outer = params.spectral_density(xi1) / (xi1 * xi1);
    let v = amp4(params) * outer * 2.0 * inner;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteKernel {
            node: alloc::vec![xi1],
        })
    }
}

/// Exact variance of [`area_regularized`] on the product grid the noise lives
/// on, i.e. the quantity a Monte Carlo estimate converges to.
pub fn discrete_variance_area_regularized(
    params: &ModelParams,
    c_reg: f64,
    grid: &FrequencyGrid,
    s: f64,
    t: f64,
) -> Result<f64> {
    check_c_reg("c_reg", c_reg)?;
    let signed = grid.signed_nodes();
    let v = reduce_rows(grid.len(), Execution::default(), |k| {
        let a = grid.bins[k];
        let mut row = 0.0;
        for b in &signed {
            let kv = kernel_regularized(t, s, a.center, b.center, c_reg)?;
            row += density2(params, a.center, b.center) * kv.norm_sqr() * b.width;
        }
        Ok(row * a.width)
    })?;
    Ok(2.0 * amp4(params) * v)
}
