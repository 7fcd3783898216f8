//! Scaling of the regularized order-3 skeleton variance.

use std::time::Instant;

use anyhow::Context;
use fbm_lift_core::order3::variance_skeleton_regularized;
use fbm_lift_core::spectral::{GridSpec, ModelParams};
use fbm_lift_core::tree::DecoratedTree;

use super::{build_grid, dyadic, fit};
use crate::config::ExperimentConfig;
use crate::report::Report;

/// Default grid: the standard span at 256 bins, since the quadrature is
/// cubic in the bin count.
pub fn order3_grid() -> GridSpec {
    GridSpec {
        n_bins: 256,
        ..GridSpec::default()
    }
}

/// Slope of `Var(δ𝓡Sk I_T)` over the lags for the chain `[1[2[3]]]`, and a
/// 1.5× refinement check at the largest lag.
pub fn order3_variance(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let spec = cfg.grid_or(order3_grid());
    let grid = build_grid(spec)?;
    let lags = cfg.lags_or(&dyadic(1, 8));
    let c = cfg.c_reg_prime.unwrap_or(0.5);
    let tree = DecoratedTree::chain(&[1, 2, 3])?;
    let mut r = Report::new("order3_variance", cfg.seed(), &["alpha", "eps", "lag_or_eps", "value"]);
    r.note(format!("tree {}, c_reg_prime {c}, {} bins", tree.to_bracket(), spec.n_bins));
    for alpha in cfg.alphas_or(&[0.2]) {
        for eps in cfg.eps_or(&[1e-3]) {
            let p = ModelParams::new(alpha, eps).context("model parameters")?;
            let start = Instant::now();
            let mut pairs = Vec::new();
            for &h in &lags {
                let v = variance_skeleton_regularized(&tree, &p, c, &grid, 0.0, h)
                    .with_context(|| format!("skeleton variance at lag {h}"))?;
                r.row(vec![alpha.into(), eps.into(), h.into(), v.into()]);
                pairs.push((h, v));
            }
            let f = fit(&pairs, "skeleton variance")?;
            let target = 6.0 * alpha;
            r.note(format!(
                "alpha={alpha} eps={eps:e}: slope {:.4} (target {target:.2}), r2 {:.6}, {:.1} s",
                f.exponent,
                f.r_squared,
                start.elapsed().as_secs_f64()
            ));
            r.check(
                format!("|slope - 6alpha| <= 0.4 (alpha={alpha}, eps={eps:e})"),
                format!("{:.4}", f.exponent),
                (f.exponent - target).abs() <= 0.4,
            );
            let (h, coarse) = pairs.iter().copied().fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
            let fine = build_grid(spec.refined(1.5))?;
            let fine_v = variance_skeleton_regularized(&tree, &p, c, &fine, 0.0, h).context("refined skeleton variance")?;
            let change = ((fine_v - coarse) / coarse).abs();
            r.check(
                format!("1.5x refinement change <= 0.05 at lag {h} (alpha={alpha}, eps={eps:e})"),
                format!("{change:.4e}"),
                change <= 0.05,
            );
        }
    }
    Ok(r)
}
