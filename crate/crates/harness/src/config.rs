//! Flat `key = value` experiment configuration.
//!
//! Every field is optional; each experiment fills the gaps with its own
//! defaults. A file and the command line are merged with the command line
//! taking precedence.

use std::fmt;
use std::path::{Path, PathBuf};

use fbm_lift_core::spectral::{GridScheme, GridSpec};

pub const DEFAULT_SEED: u64 = 42;

/// A usage or validation problem. The CLI maps it to exit status 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub alpha: Option<Vec<f64>>,
    pub eps: Option<Vec<f64>>,
    pub c_reg: Option<Vec<f64>>,
    pub c_reg_prime: Option<f64>,
    pub grid_bins: Option<usize>,
    pub grid_max: Option<f64>,
    pub grid_min: Option<f64>,
    pub grid_scheme: Option<GridScheme>,
    pub lags: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// Noise realizations, or random tuples for the cut-domain check.
    pub realizations: Option<usize>,
    /// Chen and rate experiments: iterated-integral order, 2 or 3.
    pub order: Option<usize>,
    pub out: Option<PathBuf>,
}

pub const KEYS: &[&str] = &[
    "alpha",
    "eps",
    "c_reg",
    "c_reg_prime",
    "grid_bins",
    "grid_max",
    "grid_min",
    "grid_scheme",
    "lags",
    "seed",
    "realizations",
    "order",
    "out",
];

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| bad(format!("{key}: cannot parse '{v}' as a number")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let out: Vec<f64> = v
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| parse_f64(key, x))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(bad(format!("{key}: empty list")));
    }
    Ok(out)
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.trim()
        .parse::<T>()
        .map_err(|_| bad(format!("{key}: cannot parse '{v}' as a non-negative integer")))
}

pub fn parse_scheme(v: &str) -> Result<GridScheme, ConfigError> {
    match v.trim().to_ascii_lowercase().as_str() {
        "linear" => Ok(GridScheme::Linear),
        "geometric" => Ok(GridScheme::Geometric),
        other => Err(bad(format!("grid_scheme: expected linear or geometric, got '{other}'"))),
    }
}

fn scheme_name(s: GridScheme) -> &'static str {
    match s {
        GridScheme::Linear => "linear",
        GridScheme::Geometric => "geometric",
    }
}

impl ExperimentConfig {
    /// Set one key. Dashes and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "alpha" => self.alpha = Some(parse_list("alpha", value)?),
            "eps" => self.eps = Some(parse_list("eps", value)?),
            "c_reg" => self.c_reg = Some(parse_list("c_reg", value)?),
            "c_reg_prime" => self.c_reg_prime = Some(parse_f64("c_reg_prime", value)?),
            "grid_bins" => self.grid_bins = Some(parse_int("grid_bins", value)?),
            "grid_max" => self.grid_max = Some(parse_f64("grid_max", value)?),
            "grid_min" => self.grid_min = Some(parse_f64("grid_min", value)?),
            "grid_scheme" => self.grid_scheme = Some(parse_scheme(value)?),
            "lags" => self.lags = Some(parse_list("lags", value)?),
            "seed" => self.seed = Some(parse_int("seed", value)?),
            "realizations" => self.realizations = Some(parse_int("realizations", value)?),
            "order" => self.order = Some(parse_int("order", value)?),
            "out" => self.out = Some(PathBuf::from(value.trim())),
            other => return Err(bad(format!("unknown key '{other}' (known: {})", KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k, v).map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(self, over: ExperimentConfig) -> Self {
        ExperimentConfig {
            alpha: over.alpha.or(self.alpha),
            eps: over.eps.or(self.eps),
            c_reg: over.c_reg.or(self.c_reg),
            c_reg_prime: over.c_reg_prime.or(self.c_reg_prime),
            grid_bins: over.grid_bins.or(self.grid_bins),
            grid_max: over.grid_max.or(self.grid_max),
            grid_min: over.grid_min.or(self.grid_min),
            grid_scheme: over.grid_scheme.or(self.grid_scheme),
            lags: over.lags.or(self.lags),
            seed: over.seed.or(self.seed),
            realizations: over.realizations.or(self.realizations),
            order: over.order.or(self.order),
            out: over.out.or(self.out),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let open_unit = |name: &str, v: f64, hi: f64| {
            if v > 0.0 && v < hi {
                Ok(())
            } else {
                Err(bad(format!("{name} = {v} outside (0, {hi})")))
            }
        };
        for &a in self.alpha.iter().flatten() {
            open_unit("alpha", a, 0.5)?;
        }
        for &c in self.c_reg.iter().flatten() {
            open_unit("c_reg", c, 1.0)?;
        }
        if let Some(c) = self.c_reg_prime {
            open_unit("c_reg_prime", c, 1.0)?;
        }
        for &e in self.eps.iter().flatten() {
            if !(e.is_finite() && e >= 0.0) {
                return Err(bad(format!("eps = {e} must be finite and >= 0")));
            }
        }
        for &l in self.lags.iter().flatten() {
            if !(l.is_finite() && l > 0.0) {
                return Err(bad(format!("lag {l} must be positive")));
            }
        }
        if let Some(n) = self.grid_bins {
            if n < 2 {
                return Err(bad("grid_bins must be at least 2"));
            }
        }
        for (name, v) in [("grid_max", self.grid_max), ("grid_min", self.grid_min)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(bad(format!("{name} = {v} must be positive")));
                }
            }
        }
        if let (Some(lo), Some(hi)) = (self.grid_min, self.grid_max) {
            if lo >= hi {
                return Err(bad("grid_min must be below grid_max"));
            }
        }
        if self.realizations == Some(0) {
            return Err(bad("realizations must be at least 1"));
        }
        if let Some(o) = self.order {
            if o != 2 && o != 3 {
                return Err(bad(format!("order = {o}: expected 2 or 3")));
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn alphas_or(&self, d: &[f64]) -> Vec<f64> {
        self.alpha.clone().unwrap_or_else(|| d.to_vec())
    }

    pub fn eps_or(&self, d: &[f64]) -> Vec<f64> {
        self.eps.clone().unwrap_or_else(|| d.to_vec())
    }

    pub fn c_reg_or(&self, d: &[f64]) -> Vec<f64> {
        self.c_reg.clone().unwrap_or_else(|| d.to_vec())
    }

    pub fn lags_or(&self, d: &[f64]) -> Vec<f64> {
        self.lags.clone().unwrap_or_else(|| d.to_vec())
    }

    /// The experiment's default grid with any configured fields applied.
    pub fn grid_or(&self, d: GridSpec) -> GridSpec {
        GridSpec {
            xi_min: self.grid_min.unwrap_or(d.xi_min),
            xi_max: self.grid_max.unwrap_or(d.xi_max),
            n_bins: self.grid_bins.unwrap_or(d.n_bins),
            scheme: self.grid_scheme.unwrap_or(d.scheme),
        }
    }

    /// The set keys, one `key = value` per line, in [`KEYS`] order. Parsing
    /// the output gives back the same config.
    pub fn to_kv(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        let mut lines = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                lines.push(format!("{k} = {v}"));
            }
        };
        push("alpha", self.alpha.as_deref().map(list));
        push("eps", self.eps.as_deref().map(list));
        push("c_reg", self.c_reg.as_deref().map(list));
        push("c_reg_prime", self.c_reg_prime.map(|x| format!("{x:e}")));
        push("grid_bins", self.grid_bins.map(|x| x.to_string()));
        push("grid_max", self.grid_max.map(|x| format!("{x:e}")));
        push("grid_min", self.grid_min.map(|x| format!("{x:e}")));
        push("grid_scheme", self.grid_scheme.map(|s| scheme_name(s).to_string()));
        push("lags", self.lags.as_deref().map(list));
        push("seed", self.seed.map(|x| x.to_string()));
        push("realizations", self.realizations.map(|x| x.to_string()));
        push("order", self.order.map(|x| x.to_string()));
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        lines.join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_syntax() {
        let cfg = ExperimentConfig::parse(
            "# comment\nalpha = 0.1, 0.2\ngrid-bins=128\ngrid_scheme = Linear # trailing\nseed=7\n",
        )
        .unwrap();
        assert_eq!(cfg.alpha, Some(vec![0.1, 0.2]));
        assert_eq!(cfg.grid_bins, Some(128));
        assert_eq!(cfg.grid_scheme, Some(GridScheme::Linear));
        assert_eq!(cfg.seed(), 7);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ExperimentConfig::parse("colour = red").is_err());
        assert!(ExperimentConfig::parse("alpha").is_err());
        assert!(ExperimentConfig::parse("alpha = x").is_err());
        assert!(ExperimentConfig::parse("seed = -1").is_err());
    }

    #[test]
    fn override_wins() {
        let file = ExperimentConfig::parse("alpha = 0.1\nseed = 3").unwrap();
        let cli = ExperimentConfig::parse("alpha = 0.3").unwrap();
        let m = file.merged(cli);
        assert_eq!(m.alpha, Some(vec![0.3]));
        assert_eq!(m.seed, Some(3));
    }

    #[test]
    fn validation() {
        for bad in ["alpha = 0.5", "c_reg = 1", "eps = -1", "grid_bins = 1", "order = 4", "lags = 0"] {
            assert!(ExperimentConfig::parse(bad).unwrap().validate().is_err(), "{bad}");
        }
        assert!(ExperimentConfig::parse("grid_min = 10\ngrid_max = 1").unwrap().validate().is_err());
        assert!(ExperimentConfig::parse("alpha = 0.2\nc_reg = 0.5").unwrap().validate().is_ok());
    }

    #[test]
    fn kv_round_trip() {
        let cfg = ExperimentConfig::parse("alpha = 0.1,0.35\neps=1e-3\ngrid_scheme=geometric\nout=/tmp/x").unwrap();
        assert_eq!(ExperimentConfig::parse(&cfg.to_kv()).unwrap(), cfg);
    }
}
