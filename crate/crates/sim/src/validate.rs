//! Invariant checks on a single channel realization, as run by `riscc validate`.

use riscc_core::channel::{cascaded_gains, compose_pathsum, compose_product, sample_realization, RisPhaseConfig};
use riscc_core::customization::{
    design_phases_exact, enumeration_count, orthogonal_power_ratio, prune_paths, select_paths,
};
use riscc_core::feedback::{equal_partition, max_quantization_error, min_bits, quantize_direction};
use riscc_core::harness::{run_trial, trial_rng, BitPolicy, CsiRegime, RegimeTag, TrialOptions};
use riscc_core::linalg::{frobenius_norm, orthonormality_defect};
use riscc_core::scenario::Deployment;
use riscc_core::transceiver::{svd_factors, water_filling};

const DUAL_TOLERANCE: f64 = 1e-10;
const POWER_TOLERANCE: f64 = 1e-12;
const SE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

/// Runs every check on realization `index` of `seed`. Model errors abort; violated
/// invariants are reported as failed checks.
pub fn run(deployment: &Deployment, seed: u64, index: u64) -> anyhow::Result<Vec<Check>> {
    let cfg = &deployment.config;
    let mut checks = Vec::new();

    let sizes = deployment.n_elements();
    let sizes_ok = sizes.iter().all(|&n| {
        let b = min_bits(n);
        n >= 1 && (2u128 << b) >= n as u128 && (b == 0 || (1u128 << b) < n as u128)
    });
    checks.push(Check::new("surface sizes and minimum bits", sizes_ok, format!("elements {sizes:?}")));

    let mut rng = trial_rng(seed, index);
    let realization = sample_realization(deployment, &mut rng);
    let channel = &realization.channel;

    let identity = RisPhaseConfig::identity(&channel.n_elements());
    let pruned: Vec<_> = channel.links.iter().map(|l| prune_paths(&l.ris_rx, cfg.prune_threshold_db)).collect();
    let selection = select_paths(channel, &pruned)?;
    let designed = design_phases_exact(channel, &selection);

    let mut worst = 0.0f64;
    for phases in [&identity, &designed] {
        let a = compose_product(channel, phases)?;
        let b = compose_pathsum(channel, phases)?;
        worst = worst.max(frobenius_norm(&(&a - &b)) / frobenius_norm(&a));
    }
    checks.push(Check::new(
        "product and path-sum channels agree",
        worst <= DUAL_TOLERANCE,
        format!("relative Frobenius gap {worst:.3e}"),
    ));

    let floor = 10f64.powf(-cfg.prune_threshold_db / 20.0);
    let prune_ok = channel.links.iter().zip(&pruned).all(|(link, kept)| {
        let max = link.ris_rx.paths.iter().map(|p| p.gain.norm()).fold(0.0, f64::max);
        let kept_ok = kept.paths.iter().all(|p| p.gain.norm() / max >= floor);
        let dropped_ok = link
            .ris_rx
            .paths
            .iter()
            .filter(|p| !kept.paths.iter().any(|q| q.index == p.index))
            .all(|p| p.gain.norm() / max < floor);
        !kept.paths.is_empty() && kept_ok && dropped_ok
    });
    checks.push(Check::new("pruning keeps exactly the paths above threshold", prune_ok, String::new()));

    let counts: Vec<usize> = pruned.iter().map(|s| s.paths.len()).collect();
    let expected = enumeration_count(cfg.n_ris(), cfg.n_rx, &counts);
    let ascending = selection.active_ris.windows(2).all(|w| w[0] < w[1]);
    checks.push(Check::new(
        "selection covers one path on N_R distinct surfaces",
        ascending && selection.n_streams() == cfg.n_rx && selection.candidates == expected,
        format!("active {:?}, {} of {expected} candidates", selection.active_ris, selection.candidates),
    ));

    let unit = selection
        .a_r_orth
        .column_iter()
        .chain(selection.a_t_orth.column_iter())
        .map(|c| (c.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new("array responses have unit norm", unit <= 1e-12, format!("max deviation {unit:.3e}")));

    let ratio_designed = orthogonal_power_ratio(&cascaded_gains(channel, &designed)?, &selection)?;
    let ratio_identity = orthogonal_power_ratio(&cascaded_gains(channel, &identity)?, &selection)?;
    let ratio_ok = [ratio_designed, ratio_identity].iter().all(|r| (0.0..=1.0 + 1e-12).contains(r));
    checks.push(Check::new(
        "orthogonal power ratio lies in [0, 1]",
        ratio_ok,
        format!("designed {ratio_designed:.4}, identity {ratio_identity:.4}"),
    ));

    let h = compose_pathsum(channel, &designed)?;
    let svd = svd_factors(&h)?;
    let wf = water_filling(&svd.singular_values, cfg.transmit_power, cfg.noise_power)?;
    let sum: f64 = wf.powers.iter().sum();
    let kkt = svd
        .singular_values
        .iter()
        .zip(&wf.powers)
        .filter(|(_, p)| **p > 0.0)
        .map(|(l, p)| (p + cfg.noise_power / l - wf.water_level).abs() / wf.water_level)
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "water-filling spends E and levels active streams",
        (sum / cfg.transmit_power - 1.0).abs() <= POWER_TOLERANCE && kkt <= 1e-10,
        format!("sum/E − 1 = {:.3e}, relative KKT residual {kkt:.3e}", sum / cfg.transmit_power - 1.0),
    ));
    checks.push(Check::new(
        "left singular vectors are orthonormal",
        orthonormality_defect(&svd.u) <= 1e-10,
        format!("defect {:.3e}", orthonormality_defect(&svd.u)),
    ));

    let plan_bits: Vec<u32> = selection
        .active_ris
        .iter()
        .zip(equal_partition(selection.n_streams(), 8))
        .map(|(&k, x)| min_bits(sizes[k]) + x)
        .collect();
    let q_err = selection
        .rx_theta_departure
        .iter()
        .zip(&plan_bits)
        .map(|(&t, &b)| (quantize_direction(t, b) - t).abs() / max_quantization_error(b))
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "quantization error within half a cell",
        q_err <= 1.0,
        format!("bits {plan_bits:?}, worst error / bound {q_err:.4}"),
    ));

    let regimes = [
        CsiRegime::perfect(),
        CsiRegime::perfect_limited(),
        CsiRegime::quantized_limited(8, BitPolicy::Greedy),
        CsiRegime::perfect_limited_statistical(),
        CsiRegime::quantized_limited_statistical(8, BitPolicy::Equal),
    ];
    let out = run_trial(deployment, &regimes, &TrialOptions::default(), &mut trial_rng(seed, index))?;
    let p = out.regime(RegimeTag::Perfect).map(|m| m.se).unwrap_or(f64::NAN);
    let dominated = out.regimes.iter().all(|m| m.se.is_finite() && m.se >= 0.0 && m.se <= p * (1.0 + SE_TOLERANCE));
    let listing: Vec<String> = out.regimes.iter().map(|m| format!("{} {:.4}", m.tag.label(), m.se)).collect();
    checks.push(Check::new(
        "P-CSI spectral efficiency bounds every regime",
        dominated,
        listing.join(", "),
    ));
    checks.push(Check::new(
        "trial is reproducible",
        out == run_trial(deployment, &regimes, &TrialOptions::default(), &mut trial_rng(seed, index))?,
        String::new(),
    ));

    Ok(checks)
}
