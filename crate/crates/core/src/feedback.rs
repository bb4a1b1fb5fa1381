//! Direction quantization, SE-loss expressions and feedback-bit partitioning.
//!
//! Each stream needs enough bits to land its quantized direction inside the main
//! lobe of the surface (`min_bits`); whatever is left of the budget is split by
//! [`greedy_partition`], which is optimal for the loss approximation
//! [`se_loss_approx`].

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::channel::complex_normal;
use crate::harness::{run_trial, trial_rng, CsiRegime, TrialOptions};
use crate::scenario::{path_loss, Deployment};
use crate::stats::MeanEstimate;
use crate::{Error, Result};

/// Largest exhaustive search accepted by [`exhaustive_partition`].
pub const EXHAUSTIVE_GUARD: u128 = 10_000_000;

/// Beyond this many bits the codebook is finer than `f64` resolution on [−π, π].
const MAX_EFFECTIVE_BITS: u32 = 52;

/// `max(0, ⌈log2(N_S / 2)⌉)`: bits that keep the quantization error inside the first null.
pub fn min_bits(n_elements: usize) -> u32 {
    if n_elements <= 2 {
        return 0;
    }
    // ⌈log2(n/2)⌉ is the smallest b with 2^(b+1) ≥ n.
    let mut b = 0u32;
    while (2usize << b) < n_elements {
        b += 1;
    }
    b
}

/// Nearest codeword of the midpoint codebook `−π + 2π(i + ½)/2^b`; ties go to the smaller one.
pub fn quantize_direction(theta: f64, bits: u32) -> f64 {
    if bits >= MAX_EFFECTIVE_BITS {
        return theta;
    }
    let levels = (1u64 << bits) as f64;
    let step = 2.0 * PI / levels;
    let codeword = |i: f64| -PI + step * (i + 0.5);
    let t = (theta + PI) / step;
    let guess = (libm::ceil(t) - 1.0).clamp(0.0, levels - 1.0);
    let mut best = guess;
    let mut best_err = libm::fabs(codeword(guess) - theta);
    for cand in [guess - 1.0, guess + 1.0] {
        if cand < 0.0 || cand > levels - 1.0 {
            continue;
        }
        let err = libm::fabs(codeword(cand) - theta);
        if err < best_err || (err == best_err && cand < best) {
            best = cand;
            best_err = err;
        }
    }
    codeword(best)
}

/// Worst-case quantization error `2π / 2^{b+1}`.
pub fn max_quantization_error(bits: u32) -> f64 {
    PI / libm::exp2(bits as f64)
}

/// Per-stream feedback bits `b_k = b_min,k + x_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizationPlan {
    pub min_bits: Vec<u32>,
    pub extra_bits: Vec<u32>,
}

impl QuantizationPlan {
    pub fn new(min_bits: Vec<u32>, extra_bits: Vec<u32>) -> Result<Self> {
        if min_bits.len() != extra_bits.len() {
            return Err(Error::Dimension(alloc::format!(
                "{} minimum-bit entries, {} extra-bit entries",
                min_bits.len(),
                extra_bits.len()
            )));
        }
        Ok(Self { min_bits, extra_bits })
    }

    pub fn bits(&self) -> Vec<u32> {
        self.min_bits.iter().zip(&self.extra_bits).map(|(m, x)| m + x).collect()
    }

    pub fn total_bits(&self) -> u32 {
        self.bits().iter().sum()
    }

    pub fn minimum_total(&self) -> u32 {
        self.min_bits.iter().sum()
    }

    pub fn extra_total(&self) -> u32 {
        self.extra_bits.iter().sum()
    }
}

/// `C̄ = (E/(N_R σ²)) ξ₀* (d^r/d)²`, the average link quality of one stream.
pub fn c_bar_closed_form(
    transmit_power: f64,
    noise_power: f64,
    n_rx: usize,
    xi0: f64,
    d_ref: f64,
    d_rx: f64,
) -> f64 {
    let ratio = d_ref / d_rx;
    transmit_power / (n_rx as f64 * noise_power) * xi0 * ratio * ratio
}

/// Instantaneous link quality `C_k = |ξ_k|² p_k / σ²` under water-filling with every
/// stream active, from the squared gains `|ξ_i|²`. With gains normalized by σ² this is
/// `|ξ_k|² (E/(N_R σ²) + Σ_i 1/(N_R |ξ_i|²) − 1/|ξ_k|²)`.
pub fn sample_c_k(xi_power: &[f64], transmit_power: f64, noise_power: f64) -> Result<Vec<f64>> {
    if let Some(k) = xi_power.iter().position(|x| !(*x > 0.0)) {
        return Err(Error::DegenerateDraw(k));
    }
    let n = xi_power.len() as f64;
    let inv_sum: f64 = xi_power.iter().map(|x| noise_power / (n * x)).sum();
    let base = transmit_power / n + inv_sum;
    Ok(xi_power.iter().map(|x| x / noise_power * (base - noise_power / x)).collect())
}

/// Squared chosen-path gains at the reference Rx position, one per surface in `surfaces`:
/// `ρ_ref² |α_R|² α_{T,0}²` with a fresh draw of the RIS–Rx small-scale gain.
pub fn sample_reference_gains<R: Rng + ?Sized>(deployment: &Deployment, surfaces: &[usize], rng: &mut R) -> Vec<f64> {
    let cfg = &deployment.config;
    let lambda = cfg.wavelength();
    surfaces
        .iter()
        .map(|&k| {
            let p = &deployment.placements[k];
            let n_s = p.n_elements as f64;
            let kappa = cfg.rician_factor[k];
            let los = if kappa.is_infinite() { 1.0 } else { kappa / (kappa + 1.0) };
            let alpha_t_sq = cfg.n_tx as f64 * n_s * los;
            let alpha_r_sq = cfg.n_rx as f64 * n_s / cfg.n_paths_rx[k] as f64 * complex_normal(rng).norm_sqr();
            let rho = path_loss(p.d_tx, p.d_ref, lambda);
            rho * rho * alpha_t_sq * alpha_r_sq
        })
        .collect()
}

fn stream_loss(c_bar: f64, x: u32) -> f64 {
    let keep = 1.0 - libm::exp2(-1.0 - x as f64);
    libm::log2((1.0 + c_bar) / (1.0 + c_bar * keep))
}

/// `Σ_k log2((1 + C̄_k) / (1 + C̄_k (1 − 2^{−1−x_k})))`.
pub fn se_loss_approx(c_bar: &[f64], extra_bits: &[u32]) -> f64 {
    c_bar.iter().zip(extra_bits).map(|(&c, &x)| stream_loss(c, x)).sum()
}

/// `Σ_k log2(1 / (1 − 2^{−1−x_k}))`, the high-SNR limit of [`se_loss_approx`].
pub fn se_loss_upper(extra_bits: &[u32]) -> f64 {
    extra_bits.iter().map(|&x| -libm::log2(1.0 - libm::exp2(-1.0 - x as f64))).sum()
}

/// Loss reduction from giving one more bit to a stream at `x` extra bits:
/// `log2(1 + 1/(2^{2+x}(1/C̄ + 1) − 2))`.
pub fn se_increase(c_bar: f64, x: u32) -> f64 {
    libm::log2(1.0 + 1.0 / (libm::exp2(2.0 + x as f64) * (1.0 / c_bar + 1.0) - 2.0))
}

/// Assigns `extra` bits one at a time to the stream minimizing `x_k + log2(1/C̄_k + 1)`,
/// lowest index on ties.
pub fn greedy_partition(c_bar: &[f64], extra: u32) -> Vec<u32> {
    let mut x = alloc::vec![0u32; c_bar.len()];
    if c_bar.is_empty() {
        return x;
    }
    for _ in 0..extra {
        let k = greedy_step(c_bar, &x);
        x[k] += 1;
    }
    x
}

/// Stream that receives the next bit given the current extra bits `x`.
pub fn greedy_step(c_bar: &[f64], x: &[u32]) -> usize {
    let mut best = 0;
    let mut best_key = f64::INFINITY;
    for (k, (&c, &xk)) in c_bar.iter().zip(x).enumerate() {
        let key = xk as f64 + libm::log2(1.0 / c + 1.0);
        if key < best_key {
            best = k;
            best_key = key;
        }
    }
    best
}

/// `floor(extra / n)` bits per stream, the remainder one each to the lowest indices.
pub fn equal_partition(n_streams: usize, extra: u32) -> Vec<u32> {
    if n_streams == 0 {
        return Vec::new();
    }
    let n = n_streams as u32;
    (0..n).map(|k| extra / n + u32::from(k < extra % n)).collect()
}

/// Each extra bit goes to a uniformly drawn stream.
pub fn random_partition<R: Rng + ?Sized>(n_streams: usize, extra: u32, rng: &mut R) -> Vec<u32> {
    let mut x = alloc::vec![0u32; n_streams];
    if n_streams == 0 {
        return x;
    }
    for _ in 0..extra {
        x[rng.random_range(0..n_streams)] += 1;
    }
    x
}

/// Minimizes [`se_loss_approx`] over every split of `extra` bits. Refuses searches with
/// `N_R^extra` above [`EXHAUSTIVE_GUARD`].
pub fn exhaustive_partition(c_bar: &[f64], extra: u32) -> Result<Vec<u32>> {
    let n = c_bar.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let size = (n as u128).checked_pow(extra).unwrap_or(u128::MAX);
    if size > EXHAUSTIVE_GUARD {
        return Err(Error::SearchTooLarge(size));
    }
    let mut best: Option<(f64, Vec<u32>)> = None;
    let mut x = alloc::vec![0u32; n];
    compositions(&mut x, 0, extra, &mut |x| {
        let loss = se_loss_approx(c_bar, x);
        if best.as_ref().is_none_or(|(b, _)| loss < *b) {
            best = Some((loss, x.to_vec()));
        }
    });
    Ok(best.map(|b| b.1).unwrap_or_default())
}

fn compositions(x: &mut [u32], pos: usize, remaining: u32, visit: &mut impl FnMut(&[u32])) {
    if pos + 1 == x.len() {
        x[pos] = remaining;
        visit(x);
        return;
    }
    for v in 0..=remaining {
        x[pos] = v;
        compositions(x, pos + 1, remaining - v, visit);
    }
}

/// Monte Carlo ergodic SE loss of one quantized regime: the mean over trials of the SE
/// with exact directions minus the SE with quantized directions, both through the full
/// channel. Trial `i` draws from `trial_rng(seed, i)`.
pub fn ergodic_se_loss_mc(
    deployment: &Deployment,
    regime: &CsiRegime,
    options: &TrialOptions,
    n_trials: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if regime.quantization.is_none() {
        return Err(Error::Regime { regime: regime.tag.label(), problem: "has no quantization to measure" });
    }
    let mut losses = Vec::with_capacity(n_trials);
    for i in 0..n_trials {
        let outcome = run_trial(deployment, core::slice::from_ref(regime), options, &mut trial_rng(seed, i as u64))?;
        losses.push(outcome.regimes[0].se_loss.unwrap_or(0.0));
    }
    Ok(MeanEstimate::from_samples(&losses))
}
