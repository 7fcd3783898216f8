//! The experiment kinds. Each one resolves its defaults from the config,
//! computes, and returns a [`Report`] whose checks carry the acceptance
//! thresholds.

use std::fmt;
use std::str::FromStr;

use anyhow::Context;
use fbm_lift_core::scaling::{fit_power_law, PowerLawFit};
use fbm_lift_core::spectral::{FrequencyGrid, GridSpec};

use crate::config::{ConfigError, ExperimentConfig};
use crate::report::Report;

mod identities;
mod second_order;
mod third_order;
mod trees;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Covariance,
    LevyVariance,
    Divergence,
    Rate,
    Chen,
    Shuffle,
    TreeIdentities,
    Order3Variance,
    Expand,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Covariance,
        Kind::LevyVariance,
        Kind::Divergence,
        Kind::Rate,
        Kind::Chen,
        Kind::Shuffle,
        Kind::TreeIdentities,
        Kind::Order3Variance,
        Kind::Expand,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Covariance => "covariance",
            Kind::LevyVariance => "levy_variance",
            Kind::Divergence => "divergence",
            Kind::Rate => "rate",
            Kind::Chen => "chen",
            Kind::Shuffle => "shuffle",
            Kind::TreeIdentities => "tree_identities",
            Kind::Order3Variance => "order3_variance",
            Kind::Expand => "expand",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().replace('-', "_");
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ConfigError(format!("unknown experiment kind '{s}'")))
    }
}

/// Validate the config and run one experiment.
pub fn run_experiment(config: &ExperimentConfig, kind: Kind) -> anyhow::Result<Report> {
    config.validate()?;
    let report = match kind {
        Kind::Covariance => second_order::covariance(config),
        Kind::LevyVariance => second_order::levy_variance(config),
        Kind::Divergence => second_order::divergence(config),
        Kind::Rate => second_order::rate(config),
        Kind::Chen => identities::chen(config),
        Kind::Shuffle => identities::shuffle(config),
        Kind::TreeIdentities => trees::tree_identities(config),
        Kind::Order3Variance => third_order::order3_variance(config),
        Kind::Expand => identities::expand(config),
    };
    report.with_context(|| format!("experiment {kind} failed"))
}

fn build_grid(spec: GridSpec) -> anyhow::Result<FrequencyGrid> {
    spec.build().with_context(|| format!("building grid {spec:?}"))
}

fn fit(pairs: &[(f64, f64)], what: &str) -> anyhow::Result<PowerLawFit> {
    fit_power_law(pairs).with_context(|| format!("fitting {what}"))
}

/// Dyadic lags `2^-1 .. 2^-8`.
pub(crate) fn dyadic(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

/// `|a − b| / max(|a|, |b|, floor)`.
pub(crate) fn relative(a: f64, b: f64, scale: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / scale.max(a.abs()).max(b.abs())
    }
}
