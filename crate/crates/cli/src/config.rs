//! Flat `key = value` run configuration.
//!
//! Grammar: one `key = value` per line; `#` starts a comment; blank lines are
//! ignored; keys are unique. List values are comma separated. Command-line
//! `--set` overrides are applied after the file, in order.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rfi_qsdc::{AttenuationGrid, ChannelSpec, ModelOptions, MuSearch, ScanConfig, ScanMode, Y0Source};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: {reason}")]
    Value { key: String, reason: String },
}

fn bad(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuMode {
    Fixed,
    Optimized,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub channel: ChannelSpec,
    pub attenuation_db: f64,
    pub grid: AttenuationGrid,
    pub betas_deg: Vec<f64>,
    pub mu_mode: MuMode,
    pub mus: Vec<f64>,
    pub mu_search: MuSearch,
    pub options: ModelOptions,
    pub cutoff_hi_db: f64,
    pub selftest_seed: u64,
}

/// Every accepted key with its default, in documentation order.
pub const KEYS: &[(&str, &str)] = &[
    ("alpha_db_per_km", "0.2"),
    ("eta_opt_ba", "0.21"),
    ("eta_opt_bab", "0.088"),
    ("eta_d", "0.7"),
    ("pd", "8e-8"),
    ("ed_a", "0.0131"),
    ("ed_b", "0.0026"),
    ("attenuation_db", "10"),
    ("att_start", "0"),
    ("att_stop", "12"),
    ("att_step", "0.5"),
    ("beta_deg", "0"),
    ("mode", "optimized"),
    ("mu", "0.1,0.05,0.01"),
    ("mu_lo", "0.001"),
    ("mu_hi", "0.5"),
    ("mu_grid", "25"),
    ("mu_rel_tol", "1e-5"),
    ("decoy_ratio1", "0.05"),
    ("decoy_ratio2", "0.01"),
    ("n_cut", "10"),
    ("y0_source", "lp"),
    ("complement_bounds", "true"),
    ("tight_z_bounds", "false"),
    ("cutoff_hi_db", "20"),
    ("selftest_seed", "20240101"),
];

impl Default for RunConfig {
    fn default() -> Self {
        let mut cfg = RunConfig {
            channel: ChannelSpec::REFERENCE,
            attenuation_db: 0.0,
            grid: AttenuationGrid {
                start: 0.0,
                stop: 0.0,
                step: 1.0,
            },
            betas_deg: Vec::new(),
            mu_mode: MuMode::Optimized,
            mus: Vec::new(),
            mu_search: MuSearch::default(),
            options: ModelOptions::default(),
            cutoff_hi_db: 0.0,
            selftest_seed: 0,
        };
        for (k, v) in KEYS {
            cfg.set(k, v).expect("defaults parse");
        }
        cfg
    }
}

fn num(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| bad(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(bad(key, format!("`{v}` is not finite")));
    }
    Ok(x)
}

fn prob(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = num(key, v)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(bad(key, format!("{x} is not in [0, 1]")));
    }
    Ok(x)
}

fn positive(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = num(key, v)?;
    if x <= 0.0 {
        return Err(bad(key, format!("{x} must be > 0")));
    }
    Ok(x)
}

fn non_negative(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = num(key, v)?;
    if x < 0.0 {
        return Err(bad(key, format!("{x} must be >= 0")));
    }
    Ok(x)
}

fn list(key: &str, v: &str, each: fn(&str, &str) -> Result<f64, ConfigError>) -> Result<Vec<f64>, ConfigError> {
    let items: Vec<f64> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| each(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(bad(key, "list is empty"));
    }
    Ok(items)
}

fn boolean(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, format!("`{v}` is not a boolean"))),
    }
}

fn integer<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| bad(key, format!("`{v}` is not a non-negative integer")))
}

impl RunConfig {
    /// Sets one key, checking its own range.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let c = &mut self.channel;
        match key {
            "alpha_db_per_km" => c.alpha_db_per_km = positive(key, v)?,
            "eta_opt_ba" => c.eta_opt_ba = prob(key, v)?,
            "eta_opt_bab" => c.eta_opt_bab = prob(key, v)?,
            "eta_d" => c.eta_d = prob(key, v)?,
            "pd" => c.pd = prob(key, v)?,
            "ed_a" => c.ed_a = prob(key, v)?,
            "ed_b" => c.ed_b = prob(key, v)?,
            "attenuation_db" => self.attenuation_db = non_negative(key, v)?,
            "att_start" => self.grid.start = non_negative(key, v)?,
            "att_stop" => self.grid.stop = non_negative(key, v)?,
            "att_step" => self.grid.step = positive(key, v)?,
            "beta_deg" => self.betas_deg = list(key, v, num)?,
            "mode" => {
                self.mu_mode = match v {
                    "fixed" => MuMode::Fixed,
                    "optimized" => MuMode::Optimized,
                    _ => return Err(bad(key, format!("`{v}` is not `fixed` or `optimized`"))),
                }
            }
            "mu" => self.mus = list(key, v, positive)?,
            "mu_lo" => self.mu_search.lo = positive(key, v)?,
            "mu_hi" => self.mu_search.hi = positive(key, v)?,
            "mu_grid" => self.mu_search.grid_points = integer(key, v)?,
            "mu_rel_tol" => self.mu_search.rel_tol = positive(key, v)?,
            "decoy_ratio1" => self.options.decoy_ratios.0 = prob(key, v)?,
            "decoy_ratio2" => self.options.decoy_ratios.1 = prob(key, v)?,
            "n_cut" => self.options.estimate.n_cut = integer(key, v)?,
            "y0_source" => {
                self.options.y0_source = match v {
                    "lp" => Y0Source::Lp,
                    "model" => Y0Source::Model,
                    _ => return Err(bad(key, format!("`{v}` is not `lp` or `model`"))),
                }
            }
            "complement_bounds" => self.options.estimate.complement_bounds = boolean(key, v)?,
            "tight_z_bounds" => self.options.estimate.tight_z_bounds = boolean(key, v)?,
            "cutoff_hi_db" => self.cutoff_hi_db = positive(key, v)?,
            "selftest_seed" => self.selftest_seed = integer(key, v)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Cross-key checks, delegated to the model's own validation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let model = |e: rfi_qsdc::Error| match e {
            rfi_qsdc::Error::InvalidParameter { name, reason } => bad(name, reason),
            other => bad("config", other.to_string()),
        };
        self.scan_config().validate().map_err(model)?;
        self.channel.with_attenuation(self.attenuation_db).validate().map_err(model)
    }

    pub fn betas_rad(&self) -> Vec<f64> {
        self.betas_deg.iter().map(|d| d.to_radians()).collect()
    }

    pub fn scan_mode(&self) -> ScanMode {
        match self.mu_mode {
            MuMode::Fixed => ScanMode::Fixed(self.mus.clone()),
            MuMode::Optimized => ScanMode::Optimized,
        }
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            channel: self.channel,
            grid: self.grid,
            betas_rad: self.betas_rad(),
            mode: self.scan_mode(),
            mu_search: self.mu_search,
            options: self.options,
        }
    }

    /// Key/value listing of the resolved configuration.
    pub fn resolved(&self) -> BTreeMap<&'static str, String> {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let c = &self.channel;
        let mut m = BTreeMap::new();
        m.insert("alpha_db_per_km", c.alpha_db_per_km.to_string());
        m.insert("eta_opt_ba", c.eta_opt_ba.to_string());
        m.insert("eta_opt_bab", c.eta_opt_bab.to_string());
        m.insert("eta_d", c.eta_d.to_string());
        m.insert("pd", c.pd.to_string());
        m.insert("ed_a", c.ed_a.to_string());
        m.insert("ed_b", c.ed_b.to_string());
        m.insert("attenuation_db", self.attenuation_db.to_string());
        m.insert("att_start", self.grid.start.to_string());
        m.insert("att_stop", self.grid.stop.to_string());
        m.insert("att_step", self.grid.step.to_string());
        m.insert("beta_deg", join(&self.betas_deg));
        m.insert(
            "mode",
            match self.mu_mode {
                MuMode::Fixed => "fixed",
                MuMode::Optimized => "optimized",
            }
            .to_string(),
        );
        m.insert("mu", join(&self.mus));
        m.insert("mu_lo", self.mu_search.lo.to_string());
        m.insert("mu_hi", self.mu_search.hi.to_string());
        m.insert("mu_grid", self.mu_search.grid_points.to_string());
        m.insert("mu_rel_tol", self.mu_search.rel_tol.to_string());
        m.insert("decoy_ratio1", self.options.decoy_ratios.0.to_string());
        m.insert("decoy_ratio2", self.options.decoy_ratios.1.to_string());
        m.insert("n_cut", self.options.estimate.n_cut.to_string());
        m.insert(
            "y0_source",
            match self.options.y0_source {
                Y0Source::Lp => "lp",
                Y0Source::Model => "model",
            }
            .to_string(),
        );
        m.insert("complement_bounds", self.options.estimate.complement_bounds.to_string());
        m.insert("tight_z_bounds", self.options.estimate.tight_z_bounds.to_string());
        m.insert("cutoff_hi_db", self.cutoff_hi_db.to_string());
        m.insert("selftest_seed", self.selftest_seed.to_string());
        m
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.resolved() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Parses config text into ordered `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            });
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                reason: "empty key".into(),
            });
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(ConfigError::Syntax {
                line: i + 1,
                reason: format!("duplicate key `{k}`"),
            });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Splits a `--set key=value` argument.
pub fn parse_override(arg: &str) -> Result<(String, String), ConfigError> {
    match arg.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(ConfigError::Syntax {
            line: 0,
            reason: format!("override `{arg}` is not `key=value`"),
        }),
    }
}

/// Defaults, then the file, then overrides.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
            path: p.display().to_string(),
            source,
        })?;
        for (k, v) in parse_pairs(&text)? {
            cfg.set(&k, &v)?;
        }
    }
    for o in overrides {
        let (k, v) = parse_override(o)?;
        cfg.set(&k, &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_reference_values() {
        let c = load_config(None, &[]).unwrap();
        assert_eq!(c.channel, ChannelSpec::REFERENCE);
        assert_eq!(c.betas_deg, vec![0.0]);
        assert_eq!(c.options.estimate.n_cut, 10);
        assert_eq!(c.options.decoy_ratios, (0.05, 0.01));
        assert_eq!(c.mus, vec![0.1, 0.05, 0.01]);
    }

    #[test]
    fn every_key_has_a_default_and_is_listed() {
        let c = RunConfig::default();
        let resolved = c.resolved();
        assert_eq!(resolved.len(), KEYS.len());
        for (k, _) in KEYS {
            assert!(resolved.contains_key(k), "{k}");
        }
    }

    #[test]
    fn beta_is_converted_once() {
        let c = load_config(None, &["beta_deg=45".into()]).unwrap();
        assert!((c.betas_rad()[0] - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let c = load_config(None, &["beta_deg = 0, 45".into()]).unwrap();
        assert_eq!(c.betas_deg, vec![0.0, 45.0]);
    }

    #[test]
    fn bad_values_name_the_key() {
        let e = load_config(None, &["pd=1.5".into()]).unwrap_err();
        assert!(e.to_string().contains("pd"), "{e}");
        let e = load_config(None, &["colour=red".into()]).unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey(ref k) if k == "colour"));
        let e = load_config(None, &["decoy_ratio2=0.2".into()]).unwrap_err();
        assert!(e.to_string().contains("decoy_ratios"), "{e}");
        let e = load_config(None, &["mu_grid=abc".into()]).unwrap_err();
        assert!(e.to_string().contains("mu_grid"), "{e}");
    }

    #[test]
    fn file_grammar() {
        let pairs = parse_pairs("# header\n\npd = 1e-6  # darker\n ed_a=0.02\n").unwrap();
        assert_eq!(pairs, vec![("pd".into(), "1e-6".into()), ("ed_a".into(), "0.02".into())]);
        assert!(parse_pairs("pd 1e-6").is_err());
        assert!(parse_pairs("pd=1\npd=2").is_err());
        assert!(parse_override("=3").is_err());
    }
}
