//! Least-squares power-law fits in log-log coordinates.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    pub pairs: Vec<(f64, f64)>,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    pub fn predict(&self, x: f64) -> f64 {
        libm::exp(self.intercept) * libm::pow(x, self.exponent)
    }
}

/// Fits `value ≈ e^{intercept} · x^{exponent}` by ordinary least squares on
/// `(ln x, ln value)`.
pub fn fit_power_law(pairs: &[(f64, f64)]) -> Result<PowerLawFit> {
    if pairs.len() < 3 {
        return Err(Error::invalid("a power-law fit needs at least 3 pairs"));
    }
    if let Some(&(x, v)) = pairs.iter().find(|(x, v)| !(*x > 0.0 && *v > 0.0 && x.is_finite() && v.is_finite())) {
        return Err(Error::invalid(alloc::format!(
            "power-law fit needs positive finite data, got ({x}, {v})"
        )));
    }
    let n = pairs.len() as f64;
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(x, v)| (libm::log(x), libm::log(v))).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("power-law fit needs at least two distinct abscissae"));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(PowerLawFit {
        pairs: pairs.to_vec(),
        exponent,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pairs: Vec<_> = (1..=8).map(|k| {
            let x = libm::pow(2.0, -(k as f64));
            (x, libm::pow(x, 1.3))
        }).collect();
        let fit = fit_power_law(&pairs).unwrap();
        assert!((fit.exponent - 1.3).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_data() {
        let fit = fit_power_law(&[(1.0, 2.0), (2.0, 2.0), (4.0, 2.0)]).unwrap();
        assert!(fit.exponent.abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_data() {
        assert!(fit_power_law(&[(1.0, 2.0), (2.0, 2.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 2.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(fit_power_law(&[(-1.0, 2.0), (2.0, 1.0), (3.0, 1.0)]).is_err());
    }
}
