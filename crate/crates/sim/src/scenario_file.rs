//! JSON scenario files.
//!
//! Power fields are in dBm (`*_dbm`), the Rician factor and pruning threshold in dB
//! (`*_db`); everything else is SI. Per-surface fields accept either one value for
//! every surface or an array with one entry per surface.

use std::path::Path;

use anyhow::{bail, Context, Result};
use riscc_core::scenario::{db_to_linear, dbm_to_watts, watts_to_dbm, Point2, ScenarioConfig};
use serde::{Deserialize, Serialize};

/// The bundled default deployment, identical to `ScenarioConfig::paper_default()`.
pub const PAPER_DEFAULT: &str = include_str!("../scenarios/paper_default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerRis<T> {
    Shared(T),
    Each(Vec<T>),
}

impl<T: Clone> PerRis<T> {
    fn expand(&self, n: usize, field: &str) -> Result<Vec<T>> {
        match self {
            PerRis::Shared(v) => Ok(vec![v.clone(); n]),
            PerRis::Each(v) if v.len() == n => Ok(v.clone()),
            PerRis::Each(v) => bail!("{field}: {} entries for {n} surfaces", v.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub carrier_frequency_hz: f64,
    pub n_tx: usize,
    pub n_rx: usize,
    pub tx_position: [f64; 2],
    pub ris_plane_x: f64,
    #[serde(default)]
    pub dft_offset: f64,
    pub dft_indices: Vec<i64>,
    pub blind_area_center: [f64; 2],
    pub blind_area_radius: f64,
    pub rician_factor_db: PerRis<f64>,
    pub n_nlos_tx: PerRis<usize>,
    pub n_paths_rx: PerRis<usize>,
    pub prune_threshold_db: f64,
    pub noise_power_dbm: f64,
    pub transmit_power_dbm: f64,
    pub xi0: f64,
    pub feedback_budget: u32,
    pub rng_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_override: Option<Vec<usize>>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed scenario file")
    }

    pub fn into_config(self) -> Result<ScenarioConfig> {
        let k = self.dft_indices.len();
        let cfg = ScenarioConfig {
            carrier_frequency: self.carrier_frequency_hz,
            n_tx: self.n_tx,
            n_rx: self.n_rx,
            tx_position: Point2::new(self.tx_position[0], self.tx_position[1]),
            ris_plane_x: self.ris_plane_x,
            dft_offset: self.dft_offset,
            dft_indices: self.dft_indices,
            blind_area_center: Point2::new(self.blind_area_center[0], self.blind_area_center[1]),
            blind_area_radius: self.blind_area_radius,
            rician_factor: self
                .rician_factor_db
                .expand(k, "rician_factor_db")?
                .into_iter()
                .map(db_to_linear)
                .collect(),
            n_nlos_tx: self.n_nlos_tx.expand(k, "n_nlos_tx")?,
            n_paths_rx: self.n_paths_rx.expand(k, "n_paths_rx")?,
            prune_threshold_db: self.prune_threshold_db,
            noise_power: dbm_to_watts(self.noise_power_dbm),
            transmit_power: dbm_to_watts(self.transmit_power_dbm),
            xi0: self.xi0,
            feedback_budget: self.feedback_budget,
            rng_seed: self.rng_seed,
            element_override: self.element_override,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            carrier_frequency_hz: cfg.carrier_frequency,
            n_tx: cfg.n_tx,
            n_rx: cfg.n_rx,
            tx_position: [cfg.tx_position.x, cfg.tx_position.y],
            ris_plane_x: cfg.ris_plane_x,
            dft_offset: cfg.dft_offset,
            dft_indices: cfg.dft_indices.clone(),
            blind_area_center: [cfg.blind_area_center.x, cfg.blind_area_center.y],
            blind_area_radius: cfg.blind_area_radius,
            rician_factor_db: PerRis::Each(cfg.rician_factor.iter().map(|k| 10.0 * k.log10()).collect()),
            n_nlos_tx: PerRis::Each(cfg.n_nlos_tx.clone()),
            n_paths_rx: PerRis::Each(cfg.n_paths_rx.clone()),
            prune_threshold_db: cfg.prune_threshold_db,
            noise_power_dbm: watts_to_dbm(cfg.noise_power),
            transmit_power_dbm: watts_to_dbm(cfg.transmit_power),
            xi0: cfg.xi0,
            feedback_budget: cfg.feedback_budget,
            rng_seed: cfg.rng_seed,
            element_override: cfg.element_override.clone(),
        }
    }
}

/// Loads a scenario; the name `paper_default` resolves to the bundled file.
pub fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = if path.as_os_str() == "paper_default" {
        PAPER_DEFAULT.to_owned()
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?
    };
    ScenarioFile::parse(&text)
        .and_then(ScenarioFile::into_config)
        .with_context(|| format!("loading scenario {}", path.display()))
}
