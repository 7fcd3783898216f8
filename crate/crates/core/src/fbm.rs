//! The smoothed process `B^ε` and its covariance.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::phase_increment;
use crate::spectral::{reduce_rows, Execution, FrequencyGrid, ModelParams, SpectralNoiseField};

/// Values of every noise component at the requested times.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    /// `values[c][k]` is component `c` at `times[k]`.
    pub values: Vec<Vec<f64>>,
    pub params: ModelParams,
    pub seed: u64,
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

/// `B^ε_t − B^ε_s` for one component of the noise.
pub fn increment(
    params: &ModelParams,
    noise: &SpectralNoiseField,
    component: usize,
    s: f64,
    t: f64,
) -> Result<f64> {
    require_smoothing(params)?;
    noise.check(noise.grid(), component + 1)?;
    Ok(increment_unchecked(params, noise, component, s, t))
}

pub(crate) fn increment_unchecked(
    params: &ModelParams,
    noise: &SpectralNoiseField,
    component: usize,
    s: f64,
    t: f64,
) -> f64 {
    let z = &noise.samples[component];
    let mut acc = Complex64::new(0.0, 0.0);
    for (bin, z) in noise.grid().bins.iter().zip(z) {
        acc += phase_increment(t, s, bin.center) * *z * params.spectral_weight(bin.center);
    }
    2.0 * params.amplitude() * acc.re
}

pub fn sample_path(
    params: &ModelParams,
    grid: &FrequencyGrid,
    times: &[f64],
    noise: &SpectralNoiseField,
) -> Result<PathSample> {
    require_smoothing(params)?;
    noise.check(grid, 1)?;
    let values = (0..noise.component_count)
        .map(|c| {
            times
                .iter()
                .map(|&t| increment_unchecked(params, noise, c, 0.0, t))
                .collect()
        })
        .collect();
    Ok(PathSample {
        times: times.to_vec(),
        values,
        params: *params,
        seed: noise.seed,
    })
}

/// `½(|s|^{2α} + |t|^{2α} − |t−s|^{2α})`.
pub fn covariance_exact(s: f64, t: f64, alpha: f64) -> f64 {
    let p = 2.0 * alpha;
    0.5 * (libm::pow(s.abs(), p) + libm::pow(t.abs(), p) - libm::pow((t - s).abs(), p))
}

/// `E[B^ε_s B^ε_t]` by quadrature of the spectral integrand over the grid
/// (both signs of ξ). `eps = 0` is allowed.
pub fn covariance_eps(s: f64, t: f64, params: &ModelParams, grid: &FrequencyGrid) -> Result<f64> {
    covariance_eps_with(s, t, params, grid, Execution::Serial)
}

pub fn covariance_eps_with(
    s: f64,
    t: f64,
    params: &ModelParams,
    grid: &FrequencyGrid,
    exec: Execution,
) -> Result<f64> {
    let amp2 = params.amplitude() * params.amplitude();
    let sum = reduce_rows(grid.len(), exec, |k| {
        let b = grid.bins[k];
        let ps = phase_increment(s, 0.0, b.center);
        let pt = phase_increment(t, 0.0, b.center);
        let v = (ps * pt.conj()).re * params.spectral_density(b.center) * b.width;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteKernel {
                node: alloc::vec![b.center],
            })
        }
    })?;
    Ok(2.0 * amp2 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_grid, sample_noise, GridScheme};

    #[test]
    fn exact_covariance_examples() {
        assert_eq!(covariance_exact(1.0, 1.0, 0.3), 1.0);
        assert!((covariance_exact(1.0, 2.0, 0.5) - 1.0).abs() < 1e-15);
        let v = covariance_exact(1.0, -1.0, 0.25);
        assert!((v - 0.5 * (2.0 - libm::sqrt(2.0))).abs() < 1e-15);
        assert!((v - 0.29289).abs() < 1e-5);
    }

    #[test]
    fn path_starts_at_zero() {
        let p = ModelParams::new(0.3, 0.01).unwrap();
        let g = build_grid(100.0, 64, GridScheme::Geometric).unwrap();
        let noise = sample_noise(&g, 3, 5).unwrap();
        let path = sample_path(&p, &g, &[0.0, 0.5, 1.0], &noise).unwrap();
        for c in 0..3 {
            assert_eq!(path.values[c][0], 0.0);
        }
        assert_eq!(path.values.len(), 3);
    }

    #[test]
    fn sampling_requires_smoothing() {
        let p = ModelParams::new(0.3, 0.0).unwrap();
        let g = build_grid(1.0, 4, GridScheme::Linear).unwrap();
        let noise = sample_noise(&g, 1, 5).unwrap();
        assert!(sample_path(&p, &g, &[1.0], &noise).is_err());
    }

    #[test]
    fn covariance_eps_trivial_cases() {
        let p = ModelParams::new(0.35, 1e-3).unwrap();
        let g = build_grid(1e3, 256, GridScheme::Geometric).unwrap();
        assert_eq!(covariance_eps(0.0, 0.0, &p, &g).unwrap(), 0.0);
        let a = covariance_eps(0.3, 1.7, &p, &g).unwrap();
        let b = covariance_eps(1.7, 0.3, &p, &g).unwrap();
        assert_eq!(a, b);
    }
}
