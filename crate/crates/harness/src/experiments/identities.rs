//! Pathwise algebraic identities on seeded noise, and the Fubini expansion
//! listing.

use anyhow::Context;
use fbm_lift_core::fbm::increment;
use fbm_lift_core::levy::{area_raw, area_regularized, counterterm_sample};
use fbm_lift_core::order3::regularized_integral_order3;
use fbm_lift_core::spectral::{sample_noise, GridScheme, GridSpec, ModelParams, SpectralNoiseField};
use fbm_lift_core::tree::fubini_expand;

use super::{build_grid, relative};
use crate::config::ExperimentConfig;
use crate::report::Report;

/// Coarse grid for the realization-heavy order-2 identity checks.
pub fn coarse_grid() -> GridSpec {
    GridSpec {
        xi_min: 1e-2,
        xi_max: 1e3,
        n_bins: 64,
        scheme: GridScheme::Geometric,
    }
}

/// Coarse grid for order 3, where each sample costs `(2N)³` kernel calls.
pub fn coarse_grid_order3() -> GridSpec {
    GridSpec {
        xi_min: 5e-2,
        xi_max: 50.0,
        n_bins: 24,
        scheme: GridScheme::Geometric,
    }
}

/// Ten `(s, u, t)` triples with varied spacing, including negative times.
pub fn chen_triples() -> Vec<(f64, f64, f64)> {
    (0..10)
        .map(|k| {
            let k = k as f64;
            let s = -0.5 + 0.13 * k;
            let u = s + 0.1 + 0.07 * k;
            (s, u, u + 0.05 + 0.11 * k)
        })
        .collect()
}

const ORDER3_TRIPLES: [(f64, f64, f64); 2] = [(0.1, 0.45, 1.0), (-0.3, 0.2, 0.6)];
const SHUFFLE_INTERVALS: [(f64, f64); 2] = [(0.0, 1.0), (0.3, 0.55)];

struct Setup {
    params: ModelParams,
    c_reg: f64,
    seeds: Vec<u64>,
}

fn setup(cfg: &ExperimentConfig, alpha: f64, realizations: usize) -> anyhow::Result<Setup> {
    let alpha = cfg.alphas_or(&[alpha])[0];
    let eps = cfg.eps_or(&[1e-3])[0];
    let params = ModelParams::new(alpha, eps).context("model parameters")?;
    let base = cfg.seed();
    let n = cfg.realizations.unwrap_or(realizations) as u64;
    Ok(Setup {
        params,
        c_reg: cfg.c_reg_or(&[0.5])[0],
        seeds: (0..n).map(|k| base.wrapping_add(k)).collect(),
    })
}

fn noise_for(grid: &fbm_lift_core::spectral::FrequencyGrid, d: usize, seed: u64) -> anyhow::Result<SpectralNoiseField> {
    sample_noise(grid, d, seed).with_context(|| format!("sampling noise for seed {seed}"))
}

pub fn chen(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    match cfg.order.unwrap_or(2) {
        2 => chen2(cfg),
        _ => chen3(cfg),
    }
}

fn chen2(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let st = setup(cfg, 0.2, 100)?;
    let grid = build_grid(cfg.grid_or(coarse_grid()))?;
    let mut r = Report::new("chen", cfg.seed(), &["case_id", "residual"]);
    r.note(format!(
        "order 2, alpha={}, eps={:e}, c_reg={}, {} realizations from seed {}, components (1,2)",
        st.params.alpha,
        st.params.eps,
        st.c_reg,
        st.seeds.len(),
        cfg.seed()
    ));
    let mut worst: f64 = 0.0;
    for &seed in &st.seeds {
        let noise = noise_for(&grid, 2, seed)?;
        let area = |a: f64, b: f64| -> anyhow::Result<f64> {
            Ok(area_regularized(&st.params, st.c_reg, &grid, &noise, a, b, 0, 1)
                .context("regularized area")?
                .value)
        };
        for (s, u, t) in chen_triples() {
            let (ts, tu, us) = (area(s, t)?, area(u, t)?, area(s, u)?);
            let rhs = increment(&st.params, &noise, 0, u, t)? * increment(&st.params, &noise, 1, s, u)?;
            let scale = ts.abs().max(tu.abs()).max(us.abs());
            let res = relative(ts - tu - us, rhs, scale);
            worst = worst.max(res);
            r.row(vec![format!("seed={seed};s={s};u={u};t={t}").into(), res.into()]);
        }
    }
    r.check("max_residual < 1e-10", format!("{worst:.3e}"), worst < 1e-10);
    Ok(r)
}

fn chen3(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let st = setup(cfg, 0.35, 20)?;
    let c_prime = cfg.c_reg_prime.unwrap_or(0.5);
    let grid = build_grid(cfg.grid_or(coarse_grid_order3()))?;
    let mut r = Report::new("chen", cfg.seed(), &["case_id", "residual"]);
    r.note(format!(
        "order 3, alpha={}, eps={:e}, c_reg={}, c_reg_prime={c_prime}, {} realizations from seed {}, components (1,2,3)",
        st.params.alpha,
        st.params.eps,
        st.c_reg,
        st.seeds.len(),
        cfg.seed()
    ));
    let mut worst: f64 = 0.0;
    for &seed in &st.seeds {
        let noise = noise_for(&grid, 3, seed)?;
        let p = &st.params;
        let third = |a: f64, b: f64| -> anyhow::Result<f64> {
            regularized_integral_order3(p, st.c_reg, c_prime, &grid, &noise, a, b, [0, 1, 2])
                .context("third-order integral")
        };
        let area = |a: f64, b: f64, i: usize, j: usize| -> anyhow::Result<f64> {
            Ok(area_regularized(p, st.c_reg, &grid, &noise, a, b, i, j)
                .context("regularized area")?
                .value)
        };
        for (s, u, t) in ORDER3_TRIPLES {
            let (ts, tu, us) = (third(s, t)?, third(u, t)?, third(s, u)?);
            let a = increment(p, &noise, 0, u, t)? * area(s, u, 1, 2)?;
            let b = area(u, t, 0, 1)? * increment(p, &noise, 2, s, u)?;
            let scale = ts.abs().max(tu.abs()).max(us.abs()).max(a.abs()).max(b.abs());
            let res = relative(ts - tu - us, a + b, scale);
            worst = worst.max(res);
            r.row(vec![format!("seed={seed};s={s};u={u};t={t}").into(), res.into()]);
        }
    }
    r.check("max_residual < 1e-8", format!("{worst:.3e}"), worst < 1e-8);
    Ok(r)
}

/// Shuffle `A(1,2) + A(2,1) = δB(1) δB(2)` for raw and regularized areas, and
/// antisymmetry of the counterterm, on identical noise.
pub fn shuffle(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let st = setup(cfg, 0.2, 100)?;
    let grid = build_grid(cfg.grid_or(coarse_grid()))?;
    let p = &st.params;
    let mut r = Report::new("shuffle", cfg.seed(), &["case_id", "residual"]);
    r.note(format!(
        "alpha={}, eps={:e}, c_reg={}, {} realizations from seed {}",
        p.alpha,
        p.eps,
        st.c_reg,
        st.seeds.len(),
        cfg.seed()
    ));
    let (mut w_raw, mut w_reg, mut w_anti): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &seed in &st.seeds {
        let noise = noise_for(&grid, 2, seed)?;
        for (s, t) in SHUFFLE_INTERVALS {
            let bb = increment(p, &noise, 0, s, t)? * increment(p, &noise, 1, s, t)?;
            let raw12 = area_raw(p, &grid, &noise, s, t, 0, 1)?.value;
            let raw21 = area_raw(p, &grid, &noise, s, t, 1, 0)?.value;
            let reg12 = area_regularized(p, st.c_reg, &grid, &noise, s, t, 0, 1)?.value;
            let reg21 = area_regularized(p, st.c_reg, &grid, &noise, s, t, 1, 0)?.value;
            let ct12 = counterterm_sample(p, st.c_reg, &grid, &noise, s, t, 0, 1)?.value;
            let ct21 = counterterm_sample(p, st.c_reg, &grid, &noise, s, t, 1, 0)?.value;
            let id = format!("seed={seed};s={s};t={t}");
            let raw = relative(raw12 + raw21, bb, raw12.abs().max(raw21.abs()));
            let reg = relative(reg12 + reg21, bb, reg12.abs().max(reg21.abs()));
            let anti = relative(ct12, -ct21, reg12.abs().max(reg21.abs()));
            w_raw = w_raw.max(raw);
            w_reg = w_reg.max(reg);
            w_anti = w_anti.max(anti);
            r.row(vec![format!("shuffle_raw;{id}").into(), raw.into()]);
            r.row(vec![format!("shuffle_regularized;{id}").into(), reg.into()]);
            r.row(vec![format!("counterterm_antisymmetry;{id}").into(), anti.into()]);
        }
    }
    r.check("max shuffle_raw residual < 1e-10", format!("{w_raw:.3e}"), w_raw < 1e-10);
    r.check("max shuffle_regularized residual < 1e-10", format!("{w_reg:.3e}"), w_reg < 1e-10);
    r.check("max counterterm_antisymmetry residual < 1e-10", format!("{w_anti:.3e}"), w_anti < 1e-10);
    Ok(r)
}

pub fn permutations3() -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 1..=3 {
        for b in 1..=3 {
            for c in 1..=3 {
                if a != b && b != c && a != c {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

pub fn expand(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let mut r = Report::new("expand", cfg.seed(), &["permutation", "expansion"]);
    for sigma in permutations3() {
        let e = fubini_expand(&sigma).context("Fubini expansion")?;
        let name = format!("{}{}{}", sigma[0], sigma[1], sigma[2]);
        r.note(format!("sigma={name}: {}", e.to_bracket()));
        r.row(vec![name.into(), e.to_bracket().into()]);
    }
    Ok(r)
}
