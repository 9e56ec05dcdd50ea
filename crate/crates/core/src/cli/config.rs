//! Experiment configuration files (TOML). Powers and path losses are given in
//! dB here and converted to linear values once, in [`ExperimentConfig::params`]
//! and [`ExperimentConfig::path_losses`].

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::UplinkBoundForm;
use crate::error::{Error, Result};
use crate::model::{sample_path_losses, DiskModel, PathLossModel, PathLossProfile, RngStream, SystemParams};
use crate::montecarlo::{CsiMode, PowerLaw, RateModel};
use crate::optimizer::{default_alpha_grid, ConstraintForm, Lift, OptimizeOptions};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RateRegion,
    UlRateVsAntennas,
    ValidateBounds,
    OptimizeOnce,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::RateRegion => "rate-region",
            ExperimentKind::UlRateVsAntennas => "ul-rate-vs-antennas",
            ExperimentKind::ValidateBounds => "validate-bounds",
            ExperimentKind::OptimizeOnce => "optimize-once",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub k_dl: usize,
    pub k_ul: usize,
    pub p_ap_db: f64,
    pub p_dl_db: f64,
    /// Pilot length; `K_d + N_t` when omitted.
    pub tau: Option<usize>,
    pub alpha: f64,
    pub eta: f64,
    pub noise_db: f64,
    pub si_db: f64,
    pub r_ul_min: f64,
    pub csi: CsiMode,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n_tx: 10,
            n_rx: 50,
            k_dl: 5,
            k_ul: 3,
            p_ap_db: 20.0,
            p_dl_db: 0.0,
            tau: None,
            alpha: 0.5,
            eta: 0.5,
            noise_db: 0.0,
            si_db: 0.0,
            r_ul_min: 0.0,
            csi: CsiMode::Perfect,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LossConfig {
    #[default]
    Unit,
    Disk {
        radius: f64,
        exponent: f64,
        #[serde(default)]
        reference_gain_db: f64,
        #[serde(default = "one")]
        reference_distance: f64,
    },
    /// Matrices are given row by row; see [`PathLossProfile`] for the layout.
    Explicit {
        beta_ap_dl_db: Vec<f64>,
        beta_ap_ul_db: Vec<f64>,
        beta_dl_ul_db: Vec<Vec<f64>>,
        beta_ul_dl_db: Vec<Vec<f64>>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub alpha: Vec<f64>,
    pub r_ul: Vec<f64>,
    pub n_tx: Vec<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            alpha: default_alpha_grid(),
            r_ul: (0..8).map(f64::from).collect(),
            n_tx: vec![16, 32, 64, 128, 256],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    /// Monte Carlo trials per rate estimate.
    pub rate: usize,
    /// Channel realizations per rate-region point.
    pub region: usize,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig { rate: 10_000, region: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub e_ap_db: f64,
    pub power_law: PowerLaw,
    pub bound_form: UplinkBoundForm,
    pub rate_model: RateModel,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            e_ap_db: 20.0,
            power_law: PowerLaw::InvSquare,
            bound_form: UplinkBoundForm::AsPrinted,
            rate_model: RateModel::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub form: ConstraintForm,
    pub lift: Lift,
    pub sca_tol: f64,
    pub sca_max_iter: usize,
    pub candidates: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let o = OptimizeOptions::default();
        OptimizerConfig {
            form: o.form,
            lift: o.sca.lift,
            sca_tol: o.sca.tol,
            sca_max_iter: o.sca.max_iter,
            candidates: o.recovery.candidates,
        }
    }
}

impl OptimizerConfig {
    pub fn options(&self) -> OptimizeOptions {
        let mut o = OptimizeOptions { form: self.form, ..OptimizeOptions::default() };
        o.sca.lift = self.lift;
        o.sca.tol = self.sca_tol;
        o.sca.max_iter = self.sca_max_iter;
        o.recovery.candidates = self.candidates;
        o
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment for the `run` subcommand; the other subcommands ignore it.
    pub experiment: Option<ExperimentKind>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub system: SystemConfig,
    pub losses: LossConfig,
    pub grids: GridConfig,
    pub trials: TrialConfig,
    pub scaling: ScalingConfig,
    pub optimizer: OptimizerConfig,
}

fn prefixed(e: Error, prefix: &str) -> Error {
    match e {
        Error::Config { field, message } => Error::Config {
            field: format!("{prefix}.{field}"),
            message,
        },
        other => other,
    }
}

fn matrix(rows: &[Vec<f64>], shape: (usize, usize), field: &str) -> Result<DMatrix<f64>> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(Error::config(
            format!("losses.{field}"),
            format!("expected {} rows of {} values", shape.0, shape.1),
        ));
    }
    Ok(DMatrix::from_fn(shape.0, shape.1, |i, j| db_to_linear(rows[i][j])))
}

impl ExperimentConfig {
    /// Parses TOML text; missing keys take their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.to_string().trim_end().to_string()))
    }

    /// Linear-scale system parameters.
    pub fn params(&self) -> Result<SystemParams> {
        let s = &self.system;
        let p = SystemParams {
            n_tx: s.n_tx,
            n_rx: s.n_rx,
            k_dl: s.k_dl,
            k_ul: s.k_ul,
            p_ap: db_to_linear(s.p_ap_db),
            p_dl: db_to_linear(s.p_dl_db),
            tau: s.tau.unwrap_or(s.k_dl + s.n_tx),
            alpha: s.alpha,
            eta: s.eta,
            sigma_n2: db_to_linear(s.noise_db),
            sigma_si2: db_to_linear(s.si_db),
            r_ul_min: s.r_ul_min,
        };
        p.validate().map_err(|e| prefixed(e, "system"))?;
        Ok(p)
    }

    pub fn loss_model(&self) -> Result<PathLossModel> {
        let p = &self.system;
        Ok(match &self.losses {
            LossConfig::Unit => PathLossModel::Unit,
            LossConfig::Disk { radius, exponent, reference_gain_db, reference_distance } => {
                PathLossModel::Disk(DiskModel {
                    radius: *radius,
                    exponent: *exponent,
                    reference_gain: db_to_linear(*reference_gain_db),
                    reference_distance: *reference_distance,
                })
            }
            LossConfig::Explicit { beta_ap_dl_db, beta_ap_ul_db, beta_dl_ul_db, beta_ul_dl_db } => {
                PathLossModel::Explicit(PathLossProfile {
                    beta_ap_dl: beta_ap_dl_db.iter().map(|&b| db_to_linear(b)).collect(),
                    beta_ap_ul: beta_ap_ul_db.iter().map(|&b| db_to_linear(b)).collect(),
                    beta_dl_ul: matrix(beta_dl_ul_db, (p.k_ul, p.k_dl), "beta_dl_ul_db")?,
                    beta_ul_dl: matrix(beta_ul_dl_db, (p.k_dl, p.k_ul), "beta_ul_dl_db")?,
                })
            }
        })
    }

    /// Path losses for the whole experiment. Random drops use a stream
    /// reserved for this purpose, so they depend on the seed only.
    pub fn path_losses(&self) -> Result<PathLossProfile> {
        let params = self.params()?;
        sample_path_losses(&self.loss_model()?, &params, RngStream::new(self.seed, u64::MAX))
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        self.path_losses()?;
        let s = &self.system;
        if let Some(tau) = s.tau.filter(|&t| t < s.k_dl + s.n_tx) {
            return Err(Error::config(
                "system.tau",
                format!("training length {tau} cannot host K_d + N_t = {} orthogonal sequences", s.k_dl + s.n_tx),
            ));
        }
        let g = &self.grids;
        if g.alpha.is_empty() {
            return Err(Error::config("grids.alpha", "grid is empty"));
        }
        if let Some(a) = g.alpha.iter().find(|a| !(0.0..1.0).contains(*a)) {
            return Err(Error::config("grids.alpha", format!("value {a} outside [0, 1)")));
        }
        if g.r_ul.is_empty() {
            return Err(Error::config("grids.r_ul", "grid is empty"));
        }
        if let Some(r) = g.r_ul.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::config("grids.r_ul", format!("floor {r} must be nonnegative")));
        }
        if g.n_tx.is_empty() {
            return Err(Error::config("grids.n_tx", "grid is empty"));
        }
        if g.n_tx[0] < 2 || g.n_tx.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("grids.n_tx", "must be increasing with every entry at least 2"));
        }
        if self.trials.rate == 0 {
            return Err(Error::config("trials.rate", "must be at least 1"));
        }
        if self.trials.region == 0 {
            return Err(Error::config("trials.region", "must be at least 1"));
        }
        if !self.scaling.e_ap_db.is_finite() {
            return Err(Error::config("scaling.e_ap_db", "must be finite"));
        }
        let o = &self.optimizer;
        if !(o.sca_tol > 0.0 && o.sca_tol.is_finite()) {
            return Err(Error::config("optimizer.sca_tol", "must be positive"));
        }
        if o.sca_max_iter == 0 {
            return Err(Error::config("optimizer.sca_max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// Reads, defaults and validates a configuration file.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::config("config", format!("cannot read {}: {e}", path.display()))
    })?;
    let cfg = ExperimentConfig::from_toml(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_parameters() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        cfg.validate().unwrap();
        let p = cfg.params().unwrap();
        assert_eq!((p.n_tx, p.n_rx, p.k_ul, p.k_dl, p.tau), (10, 50, 3, 5, 15));
        assert!((p.p_ap - 100.0).abs() < 1e-12);
        assert_eq!((p.eta, p.sigma_n2, p.sigma_si2), (0.5, 1.0, 1.0));
        assert_eq!(cfg.grids.alpha.len(), 99);
    }

    #[test]
    fn alpha_one_is_rejected() {
        let cfg = ExperimentConfig::from_toml("[system]\nalpha = 1.0\n").unwrap();
        match cfg.validate() {
            Err(Error::Config { field, message }) => {
                assert_eq!(field, "system.alpha");
                assert!(message.contains("[0, 1)"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(matches!(
            ExperimentConfig::from_toml("[system]\nn_txx = 3\n"),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn negative_linear_value_is_rejected() {
        let cfg = ExperimentConfig::from_toml("[scaling]\ne_ap_db = nan\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig::from_toml("[system]\nr_ul_min = -1.0\n").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config { field, .. }) if field == "system.r_ul_min"));
    }

    #[test]
    fn explicit_losses_convert_from_db() {
        let text = r#"
[system]
k_dl = 1
k_ul = 2
[losses]
model = "explicit"
beta_ap_dl_db = [-10.0]
beta_ap_ul_db = [0.0, 10.0]
beta_dl_ul_db = [[-20.0], [-30.0]]
beta_ul_dl_db = [[-20.0, -30.0]]
"#;
        let l = ExperimentConfig::from_toml(text).unwrap().path_losses().unwrap();
        assert!((l.beta_ap_dl[0] - 0.1).abs() < 1e-15);
        assert!((l.beta_ap_ul[1] - 10.0).abs() < 1e-12);
        assert!((l.beta_dl_ul[(1, 0)] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn disk_drops_depend_on_seed_only() {
        let text = "seed = 4\n[losses]\nmodel = \"disk\"\nradius = 20.0\nexponent = 3.0\n";
        let a = ExperimentConfig::from_toml(text).unwrap().path_losses().unwrap();
        let b = ExperimentConfig::from_toml(text).unwrap().path_losses().unwrap();
        assert_eq!(a, b);
    }
}
