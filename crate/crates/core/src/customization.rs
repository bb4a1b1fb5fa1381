//! Channel customization: path pruning, orthogonal path selection and RIS phase design.
//!
//! One RIS–Rx path is chosen per active surface so that the Rx array responses of
//! the chosen paths are as close to orthonormal as possible. Together with the Tx
//! LoS paths on DFT directions, the designed phases then turn the composite
//! channel into `A_{R,⊥} Ξ_⊥ A_{T,⊥}ᴴ`, an SVD-shaped matrix whose factors are known
//! from a handful of directional parameters.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::channel::{array_response, dirichlet_gain, surface_response, CascadedChannel, CascadedGains, RisPhaseConfig, SegmentChannel};
use crate::linalg::{wrap_to_pi, CMatrix};
use crate::{Error, Result};

/// Keeps paths whose amplitude is within `threshold_db` of the strongest one.
pub fn prune_paths(segment: &SegmentChannel, threshold_db: f64) -> SegmentChannel {
    let max = segment.paths.iter().map(|p| p.gain.norm()).fold(0.0, f64::max);
    let floor = libm::pow(10.0, -threshold_db / 20.0);
    let paths = segment
        .paths
        .iter()
        .filter(|p| {
            let a = p.gain.norm();
            a == max || a / max >= floor
        })
        .copied()
        .collect();
    SegmentChannel { paths, ..segment.clone() }
}

/// Number of candidate combinations: over every `n_rx`-subset of surfaces, the product
/// of their path counts.
pub fn enumeration_count(n_ris: usize, n_rx: usize, path_counts: &[usize]) -> u128 {
    if n_rx > n_ris || path_counts.len() != n_ris {
        return 0;
    }
    let mut total = 0u128;
    for_each_subset(n_ris, n_rx, |subset| {
        total += subset.iter().map(|&k| path_counts[k] as u128).product::<u128>();
    });
    total
}

/// Visits every `r`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, r: usize, mut visit: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + n - r) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Chosen orthogonal paths and the SVD-form factors they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Active surfaces in ascending order; stream `s` is carried by `active_ris[s]`.
    pub active_ris: Vec<usize>,
    /// Sampled index of the chosen RIS–Rx path of each active surface.
    pub rx_paths: Vec<usize>,
    /// Rx-side directional parameter of each chosen RIS–Rx path.
    pub rx_theta_arrival: Vec<f64>,
    /// RIS-side directional parameter of each chosen RIS–Rx path. This is what gets fed back.
    pub rx_theta_departure: Vec<f64>,
    /// RIS-side directional parameter of the Tx LoS path of each active surface.
    pub tx_theta_arrival: Vec<f64>,
    /// Tx-side DFT direction of each active surface.
    pub tx_theta_departure: Vec<f64>,
    /// `N_R × N_R` Rx array responses of the chosen paths.
    pub a_r_orth: CMatrix,
    /// `N_T × N_R` Tx array responses of the LoS paths.
    pub a_t_orth: CMatrix,
    /// `ρ_k α_{k,R,l*} α_{T,k,0}`, the cascaded gain under exact phase design.
    pub xi_star: Vec<Complex64>,
    /// `‖A_{R,⊥}ᴴ A_{R,⊥} − I‖_F²` of the winning combination.
    pub objective: f64,
    /// Number of combinations searched.
    pub candidates: u128,
}

impl SelectionResult {
    pub fn n_streams(&self) -> usize {
        self.active_ris.len()
    }

    pub fn xi_star_power(&self) -> Vec<f64> {
        self.xi_star.iter().map(|x| x.norm_sqr()).collect()
    }

    /// Cascaded gain of each chosen path pair under `phases`.
    pub fn chosen_gains(&self, gains: &CascadedGains) -> Vec<Complex64> {
        self.active_ris.iter().zip(&self.rx_paths).map(|(&k, &l)| gains.get(k, l, 0)).collect()
    }
}

/// Exhaustive search for `N_R` surfaces and one RIS–Rx path each minimizing
/// `‖AᴴA − I‖_F²` over the candidate Rx array responses.
///
/// `rx_segments` are the (possibly pruned) RIS–Rx segments, one per surface of `channel`.
/// Ties go to the lexicographically first (surface subset, path positions).
pub fn select_paths(channel: &CascadedChannel, rx_segments: &[SegmentChannel]) -> Result<SelectionResult> {
    let k_total = channel.links.len();
    let n_r = channel.n_rx;
    if rx_segments.len() != k_total {
        return Err(Error::Dimension(alloc::format!("{} rx segments for {k_total} surfaces", rx_segments.len())));
    }
    if k_total < n_r {
        return Err(Error::Infeasible { surfaces: k_total, streams: n_r });
    }
    if let Some(k) = rx_segments.iter().position(|s| s.paths.is_empty()) {
        return Err(Error::NoCandidatePath(k));
    }
    let theta: Vec<Vec<f64>> =
        rx_segments.iter().map(|s| s.paths.iter().map(|p| p.theta_arrival).collect()).collect();

    // Off-diagonal Gram terms |a_iᴴ a_j|² between every pair of candidates on different surfaces.
    let mut pair = alloc::vec![alloc::vec![Vec::<f64>::new(); k_total]; k_total];
    for k in 0..k_total {
        for m in k + 1..k_total {
            let mut t = Vec::with_capacity(theta[k].len() * theta[m].len());
            for &a in &theta[k] {
                for &b in &theta[m] {
                    t.push(dirichlet_gain(n_r, b - a));
                }
            }
            pair[k][m] = t;
        }
    }

    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    let mut candidates = 0u128;
    let mut choice = alloc::vec![0usize; n_r];
    for_each_subset(k_total, n_r, |subset| {
        choice.iter_mut().for_each(|c| *c = 0);
        loop {
            candidates += 1;
            let mut obj = 0.0;
            for i in 0..n_r {
                for j in i + 1..n_r {
                    let (k, m) = (subset[i], subset[j]);
                    obj += pair[k][m][choice[i] * theta[m].len() + choice[j]];
                }
            }
            obj *= 2.0;
            if best.as_ref().is_none_or(|(b, _, _)| obj < *b) {
                best = Some((obj, subset.to_vec(), choice.clone()));
            }
            // Odometer with the last position fastest.
            let Some(i) = (0..n_r).rev().find(|&i| choice[i] + 1 < theta[subset[i]].len()) else {
                break;
            };
            choice[i] += 1;
            for c in &mut choice[i + 1..] {
                *c = 0;
            }
        }
    });
    let (objective, active_ris, positions) = best.ok_or(Error::Infeasible { surfaces: k_total, streams: n_r })?;

    let n_t = channel.n_tx;
    let mut sel = SelectionResult {
        active_ris: Vec::with_capacity(n_r),
        rx_paths: Vec::with_capacity(n_r),
        rx_theta_arrival: Vec::with_capacity(n_r),
        rx_theta_departure: Vec::with_capacity(n_r),
        tx_theta_arrival: Vec::with_capacity(n_r),
        tx_theta_departure: Vec::with_capacity(n_r),
        a_r_orth: CMatrix::zeros(n_r, n_r),
        a_t_orth: CMatrix::zeros(n_t, n_r),
        xi_star: Vec::with_capacity(n_r),
        objective,
        candidates,
    };
    for (s, (&k, &pos)) in active_ris.iter().zip(&positions).enumerate() {
        let rx = &rx_segments[k].paths[pos];
        let link = &channel.links[k];
        let los = link.tx_ris.los_path().ok_or(Error::Undefined("Tx–RIS segment without LoS path"))?;
        sel.active_ris.push(k);
        sel.rx_paths.push(rx.index);
        sel.rx_theta_arrival.push(rx.theta_arrival);
        sel.rx_theta_departure.push(rx.theta_departure);
        sel.tx_theta_arrival.push(los.theta_arrival);
        sel.tx_theta_departure.push(los.theta_departure);
        sel.a_r_orth.set_column(s, &array_response(n_r, rx.theta_arrival));
        sel.a_t_orth.set_column(s, &array_response(n_t, los.theta_departure));
        sel.xi_star.push(rx.gain * los.gain * link.path_loss);
    }
    Ok(sel)
}

/// Phases steering each active surface from its Tx LoS direction to the chosen RIS–Rx
/// path, using `rx_directions[s]` (exact or quantized) for stream `s`. Inactive surfaces
/// get zero phases.
pub fn design_phases(channel: &CascadedChannel, selection: &SelectionResult, rx_directions: &[f64]) -> RisPhaseConfig {
    let mut phases = RisPhaseConfig::identity(&channel.n_elements());
    for (s, &k) in selection.active_ris.iter().enumerate() {
        let step = rx_directions[s] - selection.tx_theta_arrival[s];
        for (n, w) in phases.omegas[k].iter_mut().enumerate() {
            *w = wrap_to_pi(n as f64 * step);
        }
    }
    phases
}

/// Phases for exact directions, i.e. perfect limited CSI.
pub fn design_phases_exact(channel: &CascadedChannel, selection: &SelectionResult) -> RisPhaseConfig {
    design_phases(channel, selection, &selection.rx_theta_departure)
}

/// `A_{R,⊥} diag(ξ) A_{T,⊥}ᴴ`.
pub fn customized_approx(selection: &SelectionResult, xi: &[Complex64]) -> CMatrix {
    let mut scaled = selection.a_r_orth.clone();
    for (j, x) in xi.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= x;
        }
    }
    scaled * selection.a_t_orth.adjoint()
}

/// Power share of the chosen cascaded paths among all cascaded paths.
pub fn orthogonal_power_ratio(gains: &CascadedGains, selection: &SelectionResult) -> Result<f64> {
    let total = gains.total_power();
    if !(total > 0.0) {
        return Err(Error::Undefined("cascaded channel carries no power"));
    }
    let chosen: f64 = selection.chosen_gains(gains).iter().map(|x| x.norm_sqr()).sum();
    Ok(chosen / total)
}

/// Gain factor `|a_Sᴴ(Θ) Γ a_S(Θ^A)|` when the phases were designed for a direction off by `delta`.
pub fn mismatch_factor(n_elements: usize, delta: f64) -> f64 {
    surface_response(n_elements, 0.0, None, delta).norm()
}
