//! Covariance recovery and the second-order variance experiments.

use std::time::Instant;

use anyhow::Context;
use fbm_lift_core::fbm::{covariance_eps, covariance_exact};
use fbm_lift_core::levy::{
    variance_area_regularized, variance_increment_regularized, variance_increment_unregularized, variance_rate,
};
use fbm_lift_core::order3::variance_skeleton_rate;
use fbm_lift_core::spectral::{GridScheme, GridSpec, ModelParams};
use fbm_lift_core::tree::DecoratedTree;

use super::{build_grid, dyadic, fit};
use crate::config::ExperimentConfig;
use crate::report::Report;

pub const COVARIANCE_POINTS: [(f64, f64); 3] = [(0.5, 1.0), (1.0, 2.0), (-1.0, 1.0)];
const COVARIANCE_TOL: f64 = 0.02;

/// Grid for the experiments that push ε down to 1e-4.
pub fn wide_grid() -> GridSpec {
    GridSpec {
        xi_min: 1e-4,
        xi_max: 1e6,
        n_bins: 2048,
        scheme: GridScheme::Geometric,
    }
}

fn params(alpha: f64, eps: f64) -> anyhow::Result<ModelParams> {
    ModelParams::new(alpha, eps).with_context(|| format!("model parameters alpha={alpha}, eps={eps}"))
}

pub fn covariance(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let spec = cfg.grid_or(GridSpec::default());
    let grid = build_grid(spec)?;
    let fine = build_grid(spec.refined(2.0))?;
    let mut r = Report::new("covariance", cfg.seed(), &["alpha", "eps", "s", "t", "exact", "approx", "rel_err"]);
    r.note("deterministic quadrature: the seed is unused");
    for alpha in cfg.alphas_or(&[0.2, 0.35]) {
        for eps in cfg.eps_or(&[1e-3]) {
            let p = params(alpha, eps)?;
            let (mut worst, mut drift): (f64, f64) = (0.0, 0.0);
            for (s, t) in COVARIANCE_POINTS {
                let exact = covariance_exact(s, t, alpha);
                let approx = covariance_eps(s, t, &p, &grid).context("covariance quadrature")?;
                let refined = covariance_eps(s, t, &p, &fine).context("covariance quadrature")?;
                let rel = ((approx - exact) / exact).abs();
                worst = worst.max(rel);
                drift = drift.max(((refined - approx) / exact).abs());
                r.row(vec![alpha.into(), eps.into(), s.into(), t.into(), exact.into(), approx.into(), rel.into()]);
            }
            r.check(
                format!("max rel_err <= {COVARIANCE_TOL} (alpha={alpha}, eps={eps:e})"),
                format!("{worst:.4e}"),
                worst <= COVARIANCE_TOL,
            );
            r.check(
                format!("2x refinement change <= {} (alpha={alpha}, eps={eps:e})", COVARIANCE_TOL / 2.0),
                format!("{drift:.4e}"),
                drift <= COVARIANCE_TOL / 2.0,
            );
        }
    }
    Ok(r)
}

pub fn levy_variance(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let grid = build_grid(cfg.grid_or(GridSpec::default()))?;
    let lags = cfg.lags_or(&dyadic(1, 8));
    let mut r = Report::new("levy_variance", cfg.seed(), &["alpha", "c_reg", "eps", "lag_or_eps", "value"]);
    for alpha in cfg.alphas_or(&[0.1, 0.2, 0.4]) {
        for c in cfg.c_reg_or(&[0.2, 0.5, 0.8]) {
            for eps in cfg.eps_or(&[1e-3]) {
                let p = params(alpha, eps)?;
                let start = Instant::now();
                let mut pairs = Vec::with_capacity(lags.len());
                for &h in &lags {
                    let v = variance_area_regularized(&p, c, &grid, 0.0, h)
                        .with_context(|| format!("area variance at lag {h}"))?;
                    r.row(vec![alpha.into(), c.into(), eps.into(), h.into(), v.into()]);
                    pairs.push((h, v));
                }
                let f = fit(&pairs, "area variance")?;
                let target = 4.0 * alpha;
                r.note(format!(
                    "alpha={alpha} c_reg={c} eps={eps:e}: slope {:.4} (target {target:.2}), r2 {:.6}, {:.1} s",
                    f.exponent,
                    f.r_squared,
                    start.elapsed().as_secs_f64()
                ));
                r.check(
                    format!("|slope - 4alpha| <= 0.2 (alpha={alpha}, c_reg={c}, eps={eps:e})"),
                    format!("{:.4}", f.exponent),
                    (f.exponent - target).abs() <= 0.2,
                );
            }
        }
    }
    Ok(r)
}

/// Unregularized increment variance as ε decreases, on `(0, lag)` with a
/// single lag (default 10). Below α = 1/4 the ε-exponent is fitted and the
/// regularized variance must be grid-stable; above 1/4 the unregularized one
/// must be.
pub fn divergence(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let spec = cfg.grid_or(wide_grid());
    let grid = build_grid(spec)?;
    let fine = build_grid(spec.refined(2.0))?;
    let t = cfg.lags_or(&[10.0])[0];
    let c = cfg.c_reg_or(&[0.5])[0];
    let mut eps_list = cfg.eps_or(&[1e-1, 1e-2, 1e-3, 1e-4]);
    eps_list.sort_by(|a, b| b.total_cmp(a));
    let eps_min = *eps_list.last().unwrap();
    let mut r = Report::new("divergence", cfg.seed(), &["series", "alpha", "lag_or_eps", "value"]);
    r.note(format!("interval (0, {t}), c_reg {c}, refinement 2x bins"));
    for alpha in cfg.alphas_or(&[0.1, 0.35]) {
        let mut pairs = Vec::new();
        for &eps in &eps_list {
            let v = variance_increment_unregularized(&params(alpha, eps)?, &grid, 0.0, t)
                .with_context(|| format!("unregularized variance at eps {eps}"))?;
            r.row(vec!["unregularized".into(), alpha.into(), eps.into(), v.into()]);
            pairs.push((eps, v));
        }
        let p = params(alpha, eps_min)?;
        let refinement = |label: &str, coarse: f64, fine_v: f64, r: &mut Report| {
            r.row(vec![format!("{label}_refined").into(), alpha.into(), eps_min.into(), fine_v.into()]);
            let change = ((fine_v - coarse) / coarse).abs();
            r.check(
                format!("{label} refinement change <= 0.02 (alpha={alpha}, eps={eps_min:e})"),
                format!("{change:.4e}"),
                change <= 0.02,
            );
        };
        if alpha < 0.25 {
            let target = -(1.0 - 4.0 * alpha);
            if pairs.len() >= 3 {
                let f = fit(&pairs, "divergence")?;
                r.note(format!(
                    "alpha={alpha}: eps-exponent {:.4} (target {target:.2}), r2 {:.6}",
                    f.exponent, f.r_squared
                ));
                r.check(
                    format!("|eps-exponent - ({target:.2})| <= 0.15 (alpha={alpha})"),
                    format!("{:.4}", f.exponent),
                    (f.exponent - target).abs() <= 0.15,
                );
            }
            let coarse = variance_increment_regularized(&p, c, &grid, 0.0, t).context("regularized variance")?;
            let fine_v = variance_increment_regularized(&p, c, &fine, 0.0, t).context("regularized variance")?;
            r.row(vec!["regularized".into(), alpha.into(), eps_min.into(), coarse.into()]);
            refinement("regularized", coarse, fine_v, &mut r);
        } else {
            if pairs.len() >= 3 {
                let f = fit(&pairs, "divergence")?;
                r.note(format!("alpha={alpha}: eps-exponent {:.4} (bounded regime)", f.exponent));
            }
            let coarse = pairs.last().unwrap().1;
            let fine_v = variance_increment_unregularized(&p, &fine, 0.0, t).context("unregularized variance")?;
            refinement("unregularized", coarse, fine_v, &mut r);
        }
    }
    Ok(r)
}

/// `E|X^ε − X^{ε/2}|²` against `|ε − ε/2|` for the regularized area on
/// `(0, lag)` (default lag 1). With `order = 3` the skeleton of the chain
/// `[1[2[3]]]` is measured instead, without a threshold.
pub fn rate(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let order = cfg.order.unwrap_or(2);
    let t = cfg.lags_or(&[1.0])[0];
    let eps_list = cfg.eps_or(&dyadic(3, 10));
    let mut r = Report::new("rate", cfg.seed(), &["order", "alpha", "c_reg", "lag_or_eps", "value"]);
    r.note(format!("pairs (eps, eps/2) on the interval (0, {t})"));
    for alpha in cfg.alphas_or(&[0.2]) {
        let p = params(alpha, eps_list[0])?;
        let (c, pairs) = if order == 2 {
            let grid = build_grid(cfg.grid_or(wide_grid()))?;
            let c = cfg.c_reg_or(&[0.5])[0];
            let mut pairs = Vec::new();
            for &e in &eps_list {
                let v = variance_rate(&p, (e, e / 2.0), c, &grid, 0.0, t)
                    .with_context(|| format!("rate variance at eps {e}"))?;
                pairs.push((e / 2.0, v));
            }
            (c, pairs)
        } else {
            let grid = build_grid(cfg.grid_or(GridSpec {
                n_bins: 256,
                ..GridSpec::default()
            }))?;
            let c = cfg.c_reg_prime.unwrap_or(0.5);
            let chain = DecoratedTree::chain(&[1, 2, 3])?;
            let mut pairs = Vec::new();
            for &e in &eps_list {
                let v = variance_skeleton_rate(&chain, &p, (e, e / 2.0), c, &grid, 0.0, t)
                    .with_context(|| format!("skeleton rate variance at eps {e}"))?;
                pairs.push((e / 2.0, v));
            }
            (c, pairs)
        };
        for &(d, v) in &pairs {
            r.row(vec![(order as f64).into(), alpha.into(), c.into(), d.into(), v.into()]);
        }
        let f = fit(&pairs, "rate")?;
        r.note(format!(
            "order {order}, alpha={alpha}: |eps-eta|-exponent {:.4}, r2 {:.6}",
            f.exponent, f.r_squared
        ));
        if order == 2 {
            let bound = 2.0 * alpha - 0.15;
            r.check(
                format!("exponent >= {bound:.2} (alpha={alpha})"),
                format!("{:.4}", f.exponent),
                f.exponent >= bound,
            );
        } else {
            r.note("order 3: measured only, no threshold");
        }
    }
    Ok(r)
}
