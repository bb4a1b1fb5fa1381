//! Deployment geometry: transmitter, RIS placement on DFT directions, path loss
//! and the RIS sizing rule that equalizes the average cascaded gain of every surface.
//!
//! Geometry is planar (top view). The transmit array and every RIS are uniform
//! linear arrays whose axis is parallel to the y axis, so a unit direction `u`
//! has directional parameter `Θ = π u_y` and broadside points along +x.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::linalg::wrap_to_pi;
use crate::{Error, Result};

/// Propagation speed used to derive the wavelength from the carrier frequency.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    libm::pow(10.0, (dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * libm::log10(w) + 30.0
}

/// Full system parameterization. Every quantity is in linear SI units; the
/// scenario file loader in `riscc-sim` converts the dB/dBm fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Hz.
    pub carrier_frequency: f64,
    pub n_tx: usize,
    pub n_rx: usize,
    pub tx_position: Point2,
    pub ris_plane_x: f64,
    /// Offset Δ of the DFT grid, radians.
    pub dft_offset: f64,
    /// One DFT index per RIS; RIS `k` sits on direction `2π n_k / N_T + Δ`.
    pub dft_indices: Vec<i64>,
    pub blind_area_center: Point2,
    pub blind_area_radius: f64,
    /// Rician factor of each Tx–RIS link, linear.
    pub rician_factor: Vec<f64>,
    /// NLoS path count of each Tx–RIS link.
    pub n_nlos_tx: Vec<usize>,
    /// Path count of each RIS–Rx link.
    pub n_paths_rx: Vec<usize>,
    /// Pruning threshold in dB below the strongest RIS–Rx path.
    pub prune_threshold_db: f64,
    /// Watts.
    pub noise_power: f64,
    /// Watts.
    pub transmit_power: f64,
    /// Target average squared cascaded gain used by the sizing rule.
    pub xi0: f64,
    /// Total feedback budget B in bits.
    pub feedback_budget: u32,
    pub rng_seed: u64,
    /// Replaces the sizing rule with explicit element counts (one per RIS).
    pub element_override: Option<Vec<usize>>,
}

impl ScenarioConfig {
    /// The four-RIS deployment used for the numerical study: 3.5 GHz, 16×4 MIMO,
    /// RIS plane at x = 150 m, blind area centered at (200, 0) with radius 50 m.
    ///
    /// The surfaces sit on DFT indices 14, 15, 1, 2 with Δ = 0, ordered by y.
    pub fn paper_default() -> Self {
        let k = 4;
        Self {
            carrier_frequency: 3.5e9,
            n_tx: 16,
            n_rx: 4,
            tx_position: Point2::new(0.0, 0.0),
            ris_plane_x: 150.0,
            dft_offset: 0.0,
            dft_indices: alloc::vec![14, 15, 1, 2],
            blind_area_center: Point2::new(200.0, 0.0),
            blind_area_radius: 50.0,
            rician_factor: alloc::vec![db_to_linear(10.0); k],
            n_nlos_tx: alloc::vec![2; k],
            n_paths_rx: alloc::vec![10; k],
            prune_threshold_db: 10.0,
            noise_power: dbm_to_watts(-100.0),
            transmit_power: dbm_to_watts(0.0),
            xi0: 2.27e-11,
            feedback_budget: 40,
            rng_seed: 1,
            element_override: None,
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    pub fn n_ris(&self) -> usize {
        self.dft_indices.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.n_ris();
        let cfg = |msg: alloc::string::String| Err(Error::Config(msg));
        if self.n_rx == 0 || self.n_tx <= self.n_rx {
            return cfg(format!("need N_T > N_R >= 1, got N_T={} N_R={}", self.n_tx, self.n_rx));
        }
        if k < self.n_rx {
            return cfg(format!("need at least N_R={} surfaces, got {}", self.n_rx, k));
        }
        for (name, len) in [
            ("rician_factor", self.rician_factor.len()),
            ("n_nlos_tx", self.n_nlos_tx.len()),
            ("n_paths_rx", self.n_paths_rx.len()),
        ] {
            if len != k {
                return cfg(format!("{name} has {len} entries for {k} surfaces"));
            }
        }
        if let Some(ns) = &self.element_override {
            if ns.len() != k || ns.iter().any(|&n| n == 0) {
                return cfg(format!("element_override must hold {k} positive counts"));
            }
        }
        let n_t = self.n_tx as i64;
        for i in 0..k {
            for j in 0..i {
                if (self.dft_indices[i] - self.dft_indices[j]).rem_euclid(n_t) == 0 {
                    return cfg(format!(
                        "RIS {j} and RIS {i} share DFT direction {}",
                        self.dft_indices[i].rem_euclid(n_t)
                    ));
                }
            }
        }
        let positive = [
            ("carrier_frequency", self.carrier_frequency),
            ("blind_area_radius", self.blind_area_radius),
            ("noise_power", self.noise_power),
            ("transmit_power", self.transmit_power),
            ("xi0", self.xi0),
            ("ris_plane_x - tx.x", self.ris_plane_x - self.tx_position.x),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return cfg(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.rician_factor.iter().any(|&r| !(r > 0.0)) {
            return cfg("rician factors must be positive".into());
        }
        if self.n_paths_rx.iter().any(|&l| l == 0) {
            return cfg("every RIS-Rx link needs at least one path".into());
        }
        if !(0.0..=2.0 * PI).contains(&self.dft_offset) {
            return cfg(format!("dft_offset {} outside [0, 2π]", self.dft_offset));
        }
        if !(self.prune_threshold_db >= 0.0) {
            return cfg("prune threshold must be nonnegative".into());
        }
        Ok(())
    }
}

/// One surface of the deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct RisPlacement {
    pub index: usize,
    pub position: Point2,
    /// Distance from the transmitter.
    pub d_tx: f64,
    /// Distance to the blind-area center.
    pub d_ref: f64,
    pub n_elements: usize,
    /// Departure directional parameter of the LoS path at the Tx (wrapped to (−π, π]).
    pub theta_tx_aod: f64,
    /// Arrival directional parameter of the LoS path at the RIS.
    pub theta_tx_aoa: f64,
}

/// Places every RIS where its DFT ray from the transmitter meets the plane
/// `x = ris_plane_x`, then sizes it with [`ris_size`] (or the override).
pub fn place_ris(config: &ScenarioConfig) -> Result<Vec<RisPlacement>> {
    config.validate()?;
    let n_t = config.n_tx as f64;
    let mut out = Vec::with_capacity(config.n_ris());
    for (k, &idx) in config.dft_indices.iter().enumerate() {
        let theta = wrap_to_pi(2.0 * PI * idx as f64 / n_t + config.dft_offset);
        let uy = theta / PI;
        let ux = libm::sqrt((1.0 - uy * uy).max(0.0));
        if ux <= 1e-12 {
            return Err(Error::DirectionMissesPlane { ris: k, index: idx });
        }
        let t = (config.ris_plane_x - config.tx_position.x) / ux;
        let position = Point2::new(config.ris_plane_x, config.tx_position.y + t * uy);
        let mut p = RisPlacement {
            index: k,
            position,
            d_tx: position.distance(&config.tx_position),
            d_ref: position.distance(&config.blind_area_center),
            n_elements: 0,
            theta_tx_aod: theta,
            // direction RIS -> Tx is -u
            theta_tx_aoa: -theta,
        };
        p.n_elements = match &config.element_override {
            Some(ns) => ns[k],
            None => ris_size(&p, config),
        };
        out.push(p);
    }
    Ok(out)
}

/// Product of the free-space losses of the two hops, `(λ/4πd_tx)(λ/4πd_rx)`.
pub fn path_loss(d_tx: f64, d_rx: f64, wavelength: f64) -> f64 {
    (wavelength / (4.0 * PI * d_tx)) * (wavelength / (4.0 * PI * d_rx))
}

/// Element count that makes `E|ξ^r|² ≈ ξ₀*` at the reference distance.
pub fn ris_size(placement: &RisPlacement, config: &ScenarioConfig) -> usize {
    libm::ceil(ris_size_unrounded(placement, config)) as usize
}

pub fn ris_size_unrounded(placement: &RisPlacement, config: &ScenarioConfig) -> f64 {
    let k = placement.index;
    let lambda = config.wavelength();
    let kappa = config.rician_factor[k];
    let l_rx = config.n_paths_rx[k] as f64;
    let geometric = 16.0 * PI * PI * placement.d_tx * placement.d_ref / (lambda * lambda);
    // (κ+1)/κ written as 1 + 1/κ so that κ = ∞ is well defined
    let ratio = (1.0 + 1.0 / kappa) * l_rx * config.xi0 / ((config.n_tx * config.n_rx) as f64);
    geometric * libm::sqrt(ratio)
}

/// Uniform point on the blind-area disk.
pub fn sample_rx_position<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Point2 {
    let u: f64 = rng.random();
    let phi: f64 = rng.random::<f64>() * 2.0 * PI;
    let r = config.blind_area_radius * libm::sqrt(u);
    let (s, c) = libm::sincos(phi);
    Point2::new(config.blind_area_center.x + r * c, config.blind_area_center.y + r * s)
}

/// A validated configuration together with its RIS placements.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub config: ScenarioConfig,
    pub placements: Vec<RisPlacement>,
}

impl Deployment {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let placements = place_ris(&config)?;
        Ok(Self { config, placements })
    }

    pub fn n_elements(&self) -> Vec<usize> {
        self.placements.iter().map(|p| p.n_elements).collect()
    }

    /// Copy of this deployment with a different transmit power (watts).
    pub fn with_transmit_power(&self, watts: f64) -> Self {
        let mut d = self.clone();
        d.config.transmit_power = watts;
        d
    }
}
