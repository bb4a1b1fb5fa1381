//! Geometric multipath segments and the cascaded Tx–RIS–Rx channel.
//!
//! The composite channel can be built two ways: as dense products of the
//! segment matrices through the RIS phase responses ([`compose_product`]) or
//! as a sum over cascaded paths weighted by their effective gains
//! ([`compose_pathsum`]). The two are algebraically identical and serve as
//! mutual oracles.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{cis, CMatrix, CVector};
use crate::scenario::{path_loss, sample_rx_position, Deployment, Point2, RisPlacement, ScenarioConfig};
use crate::{Error, Result};

/// ULA response `e^{jmΘ}/√n`, `m = 0..n`.
pub fn array_response(n: usize, theta: f64) -> CVector {
    let scale = 1.0 / libm::sqrt(n as f64);
    CVector::from_fn(n, |m, _| cis(m as f64 * theta) * scale)
}

/// `sin²(nδ/2) / (n² sin²(δ/2))`, the normalized array gain under a mismatch δ.
pub fn dirichlet_gain(n: usize, delta: f64) -> f64 {
    let den = libm::sin(delta / 2.0);
    if den.abs() < 1e-300 {
        return 1.0;
    }
    let nf = n as f64;
    let num = libm::sin(nf * delta / 2.0);
    (num * num) / (nf * nf * den * den)
}

/// `a(θ_out)ᴴ Γ a(θ_in)` for an `n`-element surface, evaluated as a length-`n` sum.
/// `omegas = None` means Γ = I.
pub fn surface_response(n: usize, theta_out: f64, omegas: Option<&[f64]>, theta_in: f64) -> Complex64 {
    let step = theta_in - theta_out;
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..n {
        let w = omegas.map_or(0.0, |o| o[m]);
        acc += cis(m as f64 * step + w);
    }
    acc / n as f64
}

/// Circularly-symmetric complex normal draw with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

fn uniform_direction<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-PI..=PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    TxToRis,
    RisToRx,
}

/// One propagation path of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    /// Position of the path in the segment as originally sampled. Survives pruning.
    pub index: usize,
    /// Effective gain including array size and Rician scaling.
    pub gain: Complex64,
    /// Unit-variance small-scale draw; `None` for the LoS path.
    pub beta: Option<Complex64>,
    pub theta_arrival: f64,
    pub theta_departure: f64,
    pub is_los: bool,
}

/// A Tx–RIS (`N_S × N_T`) or RIS–Rx (`N_R × N_S`) channel described by its paths.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentChannel {
    pub kind: SegmentKind,
    pub ris_index: usize,
    /// Array size at the arrival side (matrix rows).
    pub n_arrival: usize,
    /// Array size at the departure side (matrix columns).
    pub n_departure: usize,
    pub paths: Vec<Path>,
}

impl SegmentChannel {
    /// Dense matrix `Σ α a_arr(Θ^A) a_dep(Θ^D)ᴴ`.
    pub fn matrix(&self) -> CMatrix {
        let mut h = CMatrix::zeros(self.n_arrival, self.n_departure);
        for p in &self.paths {
            let a = array_response(self.n_arrival, p.theta_arrival) * p.gain;
            let d = array_response(self.n_departure, p.theta_departure);
            h += a * d.adjoint();
        }
        h
    }

    pub fn los_path(&self) -> Option<&Path> {
        self.paths.iter().find(|p| p.is_los)
    }
}

fn rician_split(kappa: f64) -> (f64, f64) {
    if kappa.is_infinite() {
        (1.0, 0.0)
    } else {
        (kappa / (kappa + 1.0), 1.0 / (kappa + 1.0))
    }
}

/// Tx–RIS channel: a deterministic LoS path followed by `L_T` Rayleigh paths.
pub fn sample_tx_ris<R: Rng + ?Sized>(
    placement: &RisPlacement,
    config: &ScenarioConfig,
    rng: &mut R,
) -> SegmentChannel {
    let k = placement.index;
    let n_s = placement.n_elements;
    let size = (config.n_tx * n_s) as f64;
    let (los, nlos) = rician_split(config.rician_factor[k]);
    let l_t = config.n_nlos_tx[k];
    let mut paths = Vec::with_capacity(l_t + 1);
    paths.push(Path {
        index: 0,
        gain: Complex64::new(libm::sqrt(size * los), 0.0),
        beta: None,
        theta_arrival: placement.theta_tx_aoa,
        theta_departure: placement.theta_tx_aod,
        is_los: true,
    });
    let scale = if l_t > 0 { libm::sqrt(size * nlos / l_t as f64) } else { 0.0 };
    for l in 1..=l_t {
        let theta_arrival = uniform_direction(rng);
        let theta_departure = uniform_direction(rng);
        let beta = complex_normal(rng);
        paths.push(Path {
            index: l,
            gain: beta * scale,
            beta: Some(beta),
            theta_arrival,
            theta_departure,
            is_los: false,
        });
    }
    SegmentChannel { kind: SegmentKind::TxToRis, ris_index: k, n_arrival: n_s, n_departure: config.n_tx, paths }
}

/// RIS–Rx channel: `L_R` Rayleigh paths with gains `√(N_R N_S / L_R) β`.
pub fn sample_ris_rx<R: Rng + ?Sized>(
    placement: &RisPlacement,
    config: &ScenarioConfig,
    rng: &mut R,
) -> SegmentChannel {
    let k = placement.index;
    let n_s = placement.n_elements;
    let l_r = config.n_paths_rx[k];
    let scale = libm::sqrt((config.n_rx * n_s) as f64 / l_r as f64);
    let paths = (0..l_r)
        .map(|l| {
            let theta_arrival = uniform_direction(rng);
            let theta_departure = uniform_direction(rng);
            let beta = complex_normal(rng);
            Path { index: l, gain: beta * scale, beta: Some(beta), theta_arrival, theta_departure, is_los: false }
        })
        .collect();
    SegmentChannel { kind: SegmentKind::RisToRx, ris_index: k, n_arrival: config.n_rx, n_departure: n_s, paths }
}

/// The two hops through one surface and their combined path loss ρ_k.
#[derive(Debug, Clone, PartialEq)]
pub struct RisLink {
    pub tx_ris: SegmentChannel,
    pub ris_rx: SegmentChannel,
    pub path_loss: f64,
}

impl RisLink {
    pub fn n_elements(&self) -> usize {
        self.tx_ris.n_arrival
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadedChannel {
    pub n_tx: usize,
    pub n_rx: usize,
    pub links: Vec<RisLink>,
}

impl CascadedChannel {
    pub fn n_elements(&self) -> Vec<usize> {
        self.links.iter().map(RisLink::n_elements).collect()
    }

    fn check(&self, phases: &RisPhaseConfig) -> Result<()> {
        if phases.omegas.len() != self.links.len() {
            return Err(Error::Dimension(alloc::format!(
                "{} phase vectors for {} surfaces",
                phases.omegas.len(),
                self.links.len()
            )));
        }
        for (k, (link, w)) in self.links.iter().zip(&phases.omegas).enumerate() {
            let ok = link.tx_ris.n_departure == self.n_tx
                && link.ris_rx.n_arrival == self.n_rx
                && link.tx_ris.n_arrival == link.ris_rx.n_departure
                && w.len() == link.tx_ris.n_arrival;
            if !ok {
                return Err(Error::Dimension(alloc::format!("inconsistent segment sizes at RIS {k}")));
            }
        }
        Ok(())
    }
}

/// One channel realization: the Rx position and the cascaded channel it sees.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub rx_position: Point2,
    pub channel: CascadedChannel,
}

impl Realization {
    /// Distance from each RIS to the Rx.
    pub fn rx_distances(&self, deployment: &Deployment) -> Vec<f64> {
        deployment.placements.iter().map(|p| p.position.distance(&self.rx_position)).collect()
    }
}

/// Draws the Rx position, then for each surface its Tx–RIS and RIS–Rx segments.
pub fn sample_realization<R: Rng + ?Sized>(deployment: &Deployment, rng: &mut R) -> Realization {
    let config = &deployment.config;
    let rx_position = sample_rx_position(config, rng);
    let lambda = config.wavelength();
    let links = deployment
        .placements
        .iter()
        .map(|p| {
            let tx_ris = sample_tx_ris(p, config, rng);
            let ris_rx = sample_ris_rx(p, config, rng);
            let rho = path_loss(p.d_tx, p.position.distance(&rx_position), lambda);
            RisLink { tx_ris, ris_rx, path_loss: rho }
        })
        .collect();
    Realization { rx_position, channel: CascadedChannel { n_tx: config.n_tx, n_rx: config.n_rx, links } }
}

/// Phase shifts ω_{k,n} of every surface; Γ_k = diag(e^{jω_{k,n}}).
#[derive(Debug, Clone, PartialEq)]
pub struct RisPhaseConfig {
    pub omegas: Vec<Vec<f64>>,
}

impl RisPhaseConfig {
    pub fn identity(n_elements: &[usize]) -> Self {
        Self { omegas: n_elements.iter().map(|&n| alloc::vec![0.0; n]).collect() }
    }

    pub fn gamma(&self, k: usize) -> CVector {
        CVector::from_iterator(self.omegas[k].len(), self.omegas[k].iter().map(|&w| cis(w)))
    }
}

/// `H = Σ_k ρ_k H_{k,R} Γ_k H_{T,k}` by dense products.
pub fn compose_product(channel: &CascadedChannel, phases: &RisPhaseConfig) -> Result<CMatrix> {
    channel.check(phases)?;
    let mut h = CMatrix::zeros(channel.n_rx, channel.n_tx);
    for (k, link) in channel.links.iter().enumerate() {
        let gamma = phases.gamma(k);
        let mut h_r = link.ris_rx.matrix();
        for (j, g) in gamma.iter().enumerate() {
            for i in 0..h_r.nrows() {
                h_r[(i, j)] *= g;
            }
        }
        h += (h_r * link.tx_ris.matrix()) * Complex64::new(link.path_loss, 0.0);
    }
    Ok(h)
}

/// Effective gains ξ_{k,l,j} of every cascaded path, indexed by (RIS, RIS–Rx path,
/// Tx–RIS path) in the order the paths appear in the segments.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadedGains {
    /// `blocks[k]` is the `L_{k,R} × (L_{T,k}+1)` matrix Ξ_k.
    pub blocks: Vec<CMatrix>,
}

impl CascadedGains {
    pub fn get(&self, k: usize, l: usize, j: usize) -> Complex64 {
        self.blocks[k][(l, j)]
    }

    /// Block-diagonal Ξ = blkdiag(Ξ_1, …, Ξ_K).
    pub fn block_diagonal(&self) -> CMatrix {
        let rows: usize = self.blocks.iter().map(|b| b.nrows()).sum();
        let cols: usize = self.blocks.iter().map(|b| b.ncols()).sum();
        let mut xi = CMatrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in &self.blocks {
            xi.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
            r0 += b.nrows();
            c0 += b.ncols();
        }
        xi
    }

    pub fn total_power(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.iter()).map(|z| z.norm_sqr()).sum()
    }
}

/// ξ_{k,l,j} = ρ_k α_{k,R,l} α_{T,k,j} a_S(Θ^D_{k,R,l})ᴴ Γ_k a_S(Θ^A_{T,k,j}).
pub fn cascaded_gains(channel: &CascadedChannel, phases: &RisPhaseConfig) -> Result<CascadedGains> {
    channel.check(phases)?;
    let blocks = channel
        .links
        .iter()
        .zip(&phases.omegas)
        .map(|(link, w)| {
            let n_s = link.n_elements();
            let rx = &link.ris_rx.paths;
            let tx = &link.tx_ris.paths;
            CMatrix::from_fn(rx.len(), tx.len(), |l, j| {
                let inner = surface_response(n_s, rx[l].theta_departure, Some(w), tx[j].theta_arrival);
                rx[l].gain * tx[j].gain * inner * link.path_loss
            })
        })
        .collect();
    Ok(CascadedGains { blocks })
}

/// `H = A_R Ξ A_Tᴴ`, the path-sum form of the composite channel.
pub fn compose_pathsum(channel: &CascadedChannel, phases: &RisPhaseConfig) -> Result<CMatrix> {
    let gains = cascaded_gains(channel, phases)?;
    let rx_paths: Vec<&Path> = channel.links.iter().flat_map(|l| l.ris_rx.paths.iter()).collect();
    let tx_paths: Vec<&Path> = channel.links.iter().flat_map(|l| l.tx_ris.paths.iter()).collect();
    if rx_paths.is_empty() {
        return Ok(CMatrix::zeros(channel.n_rx, channel.n_tx));
    }
    let mut a_r = CMatrix::zeros(channel.n_rx, rx_paths.len());
    for (c, p) in rx_paths.iter().enumerate() {
        a_r.set_column(c, &array_response(channel.n_rx, p.theta_arrival));
    }
    let mut a_t = CMatrix::zeros(channel.n_tx, tx_paths.len());
    for (c, p) in tx_paths.iter().enumerate() {
        a_t.set_column(c, &array_response(channel.n_tx, p.theta_departure));
    }
    Ok(a_r * gains.block_diagonal() * a_t.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_norm;
    use crate::scenario::ScenarioConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn deployment() -> Deployment {
        Deployment::new(ScenarioConfig::paper_default()).unwrap()
    }

    #[test]
    fn array_response_examples() {
        let a = array_response(1, 1.234);
        assert_eq!(a.len(), 1);
        assert!((a[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let b = array_response(4, 0.0);
        for z in b.iter() {
            assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        let x = array_response(16, 2.0 * PI / 16.0);
        let y = array_response(16, 4.0 * PI / 16.0);
        assert!(x.dotc(&y).norm() < 1e-12);
    }

    #[test]
    fn array_response_is_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..600);
            let t = rng.random_range(-PI..PI);
            assert!((array_response(n, t).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_identity_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.random_range(1..=512);
            let theta = rng.random_range(-PI..PI);
            let delta = rng.random_range(-PI..PI);
            let direct = array_response(n, theta - delta).dotc(&array_response(n, theta)).norm_sqr();
            assert!((direct - dirichlet_gain(n, delta)).abs() <= 1e-10);
        }
    }

    #[test]
    fn sampled_segments_have_expected_shape() {
        let dep = deployment();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = sample_tx_ris(&dep.placements[0], &dep.config, &mut rng);
        assert_eq!(t.paths.len(), 3);
        assert!(t.paths[0].is_los);
        let n_s = dep.placements[0].n_elements as f64;
        assert_eq!(t.paths[0].gain, Complex64::new(libm::sqrt(16.0 * n_s * 10.0 / 11.0), 0.0));
        let r = sample_ris_rx(&dep.placements[0], &dep.config, &mut rng);
        assert_eq!(r.paths.len(), 10);
        assert_eq!((r.n_arrival, r.n_departure), (4, 416));
        for p in t.paths.iter().chain(&r.paths) {
            assert!(p.theta_arrival.abs() <= PI && p.theta_departure.abs() <= PI);
        }
    }

    #[test]
    fn pure_los_limit() {
        let mut dep = deployment();
        dep.config.rician_factor = alloc::vec![f64::INFINITY; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = sample_tx_ris(&dep.placements[1], &dep.config, &mut rng);
        let n_s = dep.placements[1].n_elements as f64;
        assert!(t.paths[1..].iter().all(|p| p.gain.norm() == 0.0));
        assert!((frobenius_norm(&t.matrix()) - libm::sqrt(16.0 * n_s)).abs() < 1e-9);
    }

    #[test]
    fn segment_energy_normalization() {
        // E‖H‖_F² = N_T N_S (Tx–RIS) and N_R N_S (RIS–Rx); path-sum energy is used
        // since distinct-angle cross terms average out.
        let dep = deployment();
        let p = &dep.placements[2];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 10_000;
        let (mut et, mut er) = (0.0, 0.0);
        for _ in 0..n {
            let t = sample_tx_ris(p, &dep.config, &mut rng);
            let r = sample_ris_rx(p, &dep.config, &mut rng);
            et += frobenius_norm(&t.matrix()).powi(2);
            er += frobenius_norm(&r.matrix()).powi(2);
        }
        let n_s = p.n_elements as f64;
        assert!((et / n as f64 / (16.0 * n_s) - 1.0).abs() < 0.02, "{}", et / n as f64 / (16.0 * n_s));
        assert!((er / n as f64 / (4.0 * n_s) - 1.0).abs() < 0.02, "{}", er / n as f64 / (4.0 * n_s));
    }

    #[test]
    fn single_path_rx_segment() {
        let mut dep = deployment();
        dep.config.n_paths_rx = alloc::vec![1; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 20_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let r = sample_ris_rx(&dep.placements[0], &dep.config, &mut rng);
            assert_eq!(r.paths.len(), 1);
            acc += r.paths[0].gain.norm_sqr();
        }
        let expected = 4.0 * dep.placements[0].n_elements as f64;
        assert!((acc / n as f64 / expected - 1.0).abs() < 0.03);
    }

    #[test]
    fn seeded_sampling_is_identical() {
        let dep = deployment();
        let a = sample_realization(&dep, &mut ChaCha8Rng::seed_from_u64(42));
        let b = sample_realization(&dep, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn segment_matrix_matches_path_sum() {
        let dep = deployment();
        let r = sample_realization(&dep, &mut ChaCha8Rng::seed_from_u64(6));
        let seg = &r.channel.links[0].ris_rx;
        let m = seg.matrix();
        let mut direct = CMatrix::zeros(seg.n_arrival, seg.n_departure);
        for p in &seg.paths {
            for i in 0..seg.n_arrival {
                for j in 0..seg.n_departure {
                    direct[(i, j)] += p.gain * cis(i as f64 * p.theta_arrival - j as f64 * p.theta_departure)
                        / libm::sqrt((seg.n_arrival * seg.n_departure) as f64);
                }
            }
        }
        assert!(frobenius_norm(&(m - &direct)) / frobenius_norm(&direct) < 1e-12);
    }

    fn random_phases(n: &[usize], rng: &mut ChaCha8Rng) -> RisPhaseConfig {
        RisPhaseConfig { omegas: n.iter().map(|&k| (0..k).map(|_| rng.random_range(-PI..PI)).collect()).collect() }
    }

    #[test]
    fn dual_construction_agrees() {
        let dep = deployment();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let r = sample_realization(&dep, &mut rng);
            let ph = random_phases(&r.channel.n_elements(), &mut rng);
            let a = compose_product(&r.channel, &ph).unwrap();
            let b = compose_pathsum(&r.channel, &ph).unwrap();
            assert!(frobenius_norm(&(&a - &b)) / frobenius_norm(&a) <= 1e-10);
        }
    }

    #[test]
    fn zero_path_loss_gives_zero_channel() {
        let dep = deployment();
        let mut r = sample_realization(&dep, &mut ChaCha8Rng::seed_from_u64(9));
        for l in &mut r.channel.links {
            l.path_loss = 0.0;
        }
        let ph = RisPhaseConfig::identity(&r.channel.n_elements());
        assert_eq!(frobenius_norm(&compose_product(&r.channel, &ph).unwrap()), 0.0);
        assert_eq!(frobenius_norm(&compose_pathsum(&r.channel, &ph).unwrap()), 0.0);
    }

    #[test]
    fn empty_surface_list_gives_zero_channel() {
        let ch = CascadedChannel { n_tx: 16, n_rx: 4, links: Vec::new() };
        let ph = RisPhaseConfig { omegas: Vec::new() };
        let h = compose_pathsum(&ch, &ph).unwrap();
        assert_eq!((h.nrows(), h.ncols()), (4, 16));
        assert_eq!(frobenius_norm(&h), 0.0);
        assert_eq!(frobenius_norm(&compose_product(&ch, &ph).unwrap()), 0.0);
    }

    fn single_path_link(n_s: usize, theta_r: f64, theta_t: f64, g_r: f64, g_t: f64, rho: f64) -> RisLink {
        let path = |theta_a, theta_d, g| Path {
            index: 0,
            gain: Complex64::new(g, 0.0),
            beta: None,
            theta_arrival: theta_a,
            theta_departure: theta_d,
            is_los: true,
        };
        RisLink {
            tx_ris: SegmentChannel {
                kind: SegmentKind::TxToRis,
                ris_index: 0,
                n_arrival: n_s,
                n_departure: 16,
                paths: alloc::vec![path(theta_t, 0.3, g_t)],
            },
            ris_rx: SegmentChannel {
                kind: SegmentKind::RisToRx,
                ris_index: 0,
                n_arrival: 4,
                n_departure: n_s,
                paths: alloc::vec![path(-0.7, theta_r, g_r)],
            },
            path_loss: rho,
        }
    }

    #[test]
    fn rank_one_single_surface() {
        let link = single_path_link(64, 0.4, 1.1, 3.0, 5.0, 0.5);
        let ch = CascadedChannel { n_tx: 16, n_rx: 4, links: alloc::vec![link] };
        let ph = RisPhaseConfig::identity(&[64]);
        let h = compose_product(&ch, &ph).unwrap();
        let inner = array_response(64, 0.4).dotc(&array_response(64, 1.1)).norm();
        assert!((frobenius_norm(&h) - 0.5 * 3.0 * 5.0 * inner).abs() < 1e-12);
        let s = h.clone().svd(false, false).singular_values;
        assert!(s[1] < 1e-12 * s[0]);
    }

    #[test]
    fn asymptotic_orthogonality_without_design() {
        let link = single_path_link(4096, 0.4, 1.1, 1.0, 1.0, 1.0);
        let ch = CascadedChannel { n_tx: 16, n_rx: 4, links: alloc::vec![link] };
        let h = compose_pathsum(&ch, &RisPhaseConfig::identity(&[4096])).unwrap();
        assert!(frobenius_norm(&h) < 1e-3);
    }

    #[test]
    fn aligned_identity_gain_is_product_of_path_gains() {
        let link = single_path_link(128, 0.9, 0.9, 2.0, 7.0, 0.25);
        let ch = CascadedChannel { n_tx: 16, n_rx: 4, links: alloc::vec![link] };
        let g = cascaded_gains(&ch, &RisPhaseConfig::identity(&[128])).unwrap();
        assert!((g.get(0, 0, 0) - Complex64::new(0.25 * 2.0 * 7.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn gains_match_direct_triple_product() {
        let dep = deployment();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let r = sample_realization(&dep, &mut rng);
        let ph = random_phases(&r.channel.n_elements(), &mut rng);
        let g = cascaded_gains(&r.channel, &ph).unwrap();
        for (k, link) in r.channel.links.iter().enumerate() {
            let gamma = ph.gamma(k);
            for (l, pr) in link.ris_rx.paths.iter().enumerate() {
                for (j, pt) in link.tx_ris.paths.iter().enumerate() {
                    let a_out = array_response(link.n_elements(), pr.theta_departure);
                    let a_in = array_response(link.n_elements(), pt.theta_arrival).component_mul(&gamma);
                    let direct = a_out.dotc(&a_in) * pr.gain * pt.gain * link.path_loss;
                    assert!((direct - g.get(k, l, j)).norm() <= 1e-12 * direct.norm().max(1e-300) + 1e-300);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let dep = deployment();
        let r = sample_realization(&dep, &mut ChaCha8Rng::seed_from_u64(1));
        let ph = RisPhaseConfig::identity(&[4, 4, 4, 4]);
        assert!(matches!(compose_product(&r.channel, &ph), Err(Error::Dimension(_))));
        assert!(matches!(compose_pathsum(&r.channel, &ph), Err(Error::Dimension(_))));
    }

    #[test]
    fn phases_preserve_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let ph = random_phases(&[50], &mut rng);
        let x = CVector::from_fn(50, |i, _| Complex64::new(i as f64, 1.0 - i as f64 * 0.1));
        let y = ph.gamma(0).component_mul(&x);
        assert!((y.norm() - x.norm()).abs() < 1e-12 * x.norm());
    }
}
