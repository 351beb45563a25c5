//! Experiment configuration: a flat TOML table with a mandatory `version`.
//!
//! Every key has a CLI flag of the same name (dashes for underscores), and
//! flags override file values. The resolved configuration is written next to
//! the outputs so a run can be replayed with `--config`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub version: u32,
    pub seed: u64,
    pub threads: usize,
    pub out_dir: PathBuf,
    /// `epoch` or `step`.
    pub granularity: String,

    // pca-eigengap
    pub d: usize,
    pub n: usize,
    pub deltas: Vec<f64>,
    pub epochs: usize,
    pub eta: f64,
    /// Inner-loop length; 0 means `10·n`.
    pub m: usize,
    pub window: usize,

    // centroid-bench
    pub centroid_d: usize,
    pub ns: Vec<usize>,
    pub qs: Vec<f64>,
    /// IFO budget per algorithm, in multiples of `N`.
    pub budget_factor: usize,
    /// 0 means `1/(100·N)`.
    pub rsvrg_eta: f64,
    /// 0 means `N`.
    pub rsvrg_m: usize,
    /// 0 means `1/L`.
    pub rgd_eta: f64,
    /// `sqrt-horizon`, `decaying` or `constant`.
    pub rsgd_schedule: String,
    /// Initial (or constant) RSGD step; 0 means `1/(2N)`.
    pub rsgd_eta: f64,
    pub rsgd_decay: f64,

    // check-geometry
    pub samples: usize,
    pub sphere_dims: Vec<usize>,
    pub spd_dims: Vec<usize>,
    pub fd_trials: usize,
    /// Relative scaling error injected into every transport (self-test hook).
    pub transport_perturbation: f64,

    // params-report
    pub mus: Vec<f64>,
    pub ls: Vec<f64>,
    pub zetas: Vec<f64>,
    pub taus: Vec<f64>,
    pub param_ns: Vec<usize>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub mu0: f64,
    pub nu: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            version: CONFIG_VERSION,
            seed: 1,
            threads: 1,
            out_dir: PathBuf::from("out"),
            granularity: "epoch".into(),

            d: 100,
            n: 1000,
            deltas: vec![1e-2, 5e-3, 2e-3, 1e-3],
            epochs: 50,
            eta: 1e-3,
            m: 0,
            window: 5,

            centroid_d: 10,
            ns: vec![100, 1000],
            qs: vec![10.0, 100.0],
            budget_factor: 180,
            rsvrg_eta: 0.0,
            rsvrg_m: 0,
            rgd_eta: 0.0,
            rsgd_schedule: "sqrt-horizon".into(),
            rsgd_eta: 0.0,
            rsgd_decay: 0.5,

            samples: 1000,
            sphere_dims: vec![2, 3, 10, 50],
            spd_dims: vec![2, 5, 10, 30],
            fd_trials: 20,
            transport_perturbation: 0.0,

            mus: vec![0.1, 1.0],
            ls: vec![1.0, 10.0],
            zetas: vec![1.0, 2.0],
            taus: vec![10.0],
            param_ns: vec![1000],
            alpha1: 2.0 / 3.0,
            alpha2: 0.5,
            mu0: 0.1,
            nu: 0.5,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("cannot parse config: {e}")))?;
        match raw.get("version").and_then(|v| v.as_integer()) {
            Some(v) if v == i64::from(CONFIG_VERSION) => {}
            Some(v) => return Err(Error::Config(format!("unsupported config version {v}"))),
            None => return Err(Error::Config("config is missing `version`".into())),
        }
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Writes the resolved configuration as `<name>.config.toml` in the output directory.
    pub fn save_resolved(&self, name: &str) -> Result<()> {
        std::fs::write(
            self.out_dir.join(format!("{name}.config.toml")),
            self.to_toml(),
        )?;
        Ok(())
    }

    pub fn inner_len(&self) -> usize {
        if self.m == 0 {
            10 * self.n
        } else {
            self.m
        }
    }

    pub fn granularity(&self) -> Result<crate::solvers::Granularity> {
        match self.granularity.as_str() {
            "epoch" => Ok(crate::solvers::Granularity::Epoch),
            "step" => Ok(crate::solvers::Granularity::Step),
            g => Err(Error::Config(format!(
                "granularity must be `epoch` or `step`, got `{g}`"
            ))),
        }
    }

    fn check(cond: bool, msg: impl Into<String>) -> Result<()> {
        if cond {
            Ok(())
        } else {
            Err(Error::Config(msg.into()))
        }
    }

    pub fn validate_common(&self) -> Result<()> {
        Self::check(
            self.version == CONFIG_VERSION,
            format!("unsupported config version {}", self.version),
        )?;
        Self::check(self.threads >= 1, "threads must be at least 1")?;
        self.granularity()?;
        Ok(())
    }

    pub fn validate_pca(&self) -> Result<()> {
        self.validate_common()?;
        Self::check(self.d >= 2 && self.n >= self.d, "need d >= 2 and n >= d")?;
        Self::check(!self.deltas.is_empty(), "deltas must not be empty")?;
        Self::check(
            self.deltas.iter().all(|d| *d > 0.0 && *d < 1.0),
            "every delta must lie in (0, 1)",
        )?;
        Self::check(self.eta > 0.0, "eta must be positive")?;
        Self::check(
            self.window >= 1 && self.epochs >= self.window,
            "need 1 <= window <= epochs",
        )?;
        Ok(())
    }

    pub fn validate_centroid(&self) -> Result<()> {
        self.validate_common()?;
        Self::check(self.centroid_d >= 2, "centroid_d must be at least 2")?;
        Self::check(
            !self.ns.is_empty() && self.ns.iter().all(|n| *n >= 1),
            "ns must be nonempty and positive",
        )?;
        Self::check(
            !self.qs.is_empty() && self.qs.iter().all(|q| *q >= 1.0),
            "qs must be nonempty and >= 1",
        )?;
        Self::check(self.budget_factor >= 3, "budget_factor must be at least 3")?;
        Self::check(
            self.rsvrg_eta >= 0.0 && self.rgd_eta >= 0.0 && self.rsgd_eta >= 0.0,
            "step sizes must be nonnegative",
        )?;
        Self::check(
            matches!(
                self.rsgd_schedule.as_str(),
                "sqrt-horizon" | "decaying" | "constant"
            ),
            format!("unknown rsgd_schedule `{}`", self.rsgd_schedule),
        )?;
        Ok(())
    }

    pub fn validate_geometry(&self) -> Result<()> {
        self.validate_common()?;
        Self::check(self.samples >= 1, "samples must be at least 1")?;
        Self::check(
            self.sphere_dims.iter().all(|d| *d >= 2),
            "sphere dims must be >= 2",
        )?;
        Self::check(
            self.spd_dims.iter().all(|d| *d >= 1),
            "spd dims must be >= 1",
        )?;
        Self::check(
            self.transport_perturbation.is_finite(),
            "transport_perturbation must be finite",
        )?;
        Ok(())
    }

    pub fn validate_params(&self) -> Result<()> {
        self.validate_common()?;
        Self::check(
            !self.mus.is_empty()
                && !self.ls.is_empty()
                && !self.zetas.is_empty()
                && !self.param_ns.is_empty(),
            "mus, ls, zetas and param_ns must be nonempty",
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_through_toml() {
        let cfg = ExperimentConfig {
            deltas: vec![0.1, 0.05],
            seed: 99,
            ..Default::default()
        };
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = ExperimentConfig::from_toml("version = 1\nd = 20\nn = 40\n").unwrap();
        assert_eq!((cfg.d, cfg.n), (20, 40));
        assert_eq!(cfg.epochs, 50);
    }

    #[test]
    fn version_and_keys_are_checked() {
        assert!(matches!(
            ExperimentConfig::from_toml("d = 3"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_toml("version = 2"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_toml("version = 1\nbogus = 3"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_toml("version = 1\nd = \"x\""),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate_pca().is_ok());
        cfg.deltas = vec![];
        assert!(cfg.validate_pca().is_err());
        let mut cfg = ExperimentConfig {
            rsgd_schedule: "adam".into(),
            ..Default::default()
        };
        assert!(cfg.validate_centroid().is_err());
        cfg.granularity = "minute".into();
        assert!(cfg.validate_common().is_err());
    }
}
