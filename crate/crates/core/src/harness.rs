//! One Monte Carlo trial of the full pipeline across CSI regimes.
//!
//! A trial samples a receiver position and the cascaded channel, selects the
//! orthogonal paths, designs the surfaces and then evaluates every requested
//! regime on the resulting full channel:
//!
//! | regime  | RIS directions | transceiver | power        |
//! |---------|----------------|-------------|--------------|
//! | P-CSI   | exact          | SVD of H    | water-filling|
//! | PL-CSI  | exact          | customized  | water-filling|
//! | QL-CSI  | quantized      | customized  | water-filling|
//! | PLS-CSI | exact          | customized  | equal        |
//! | QLS-CSI | quantized      | customized  | equal        |
//!
//! Quantized regimes report their loss against the matching exact-direction regime.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::channel::{cascaded_gains, compose_pathsum, sample_realization, RisPhaseConfig};
use crate::customization::{design_phases, design_phases_exact, orthogonal_power_ratio, prune_paths, select_paths, SelectionResult};
use crate::feedback::{c_bar_closed_form, equal_partition, greedy_partition, min_bits, quantize_direction, random_partition, QuantizationPlan};
use crate::linalg::CMatrix;
use crate::scenario::{Deployment, Point2};
use crate::transceiver::{
    cc_transceiver_with_powers, equal_power, spectral_efficiency, spectral_efficiency_with, svd_transceiver, water_filling,
    AllocationMode, NoiseModel, Transceiver,
};
use crate::{Error, Result};

/// Independent, reproducible RNG stream for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegimeTag {
    Perfect,
    PerfectLimited,
    QuantizedLimited,
    PerfectLimitedStatistical,
    QuantizedLimitedStatistical,
}

impl RegimeTag {
    pub const ALL: [RegimeTag; 5] = [
        RegimeTag::Perfect,
        RegimeTag::PerfectLimited,
        RegimeTag::QuantizedLimited,
        RegimeTag::PerfectLimitedStatistical,
        RegimeTag::QuantizedLimitedStatistical,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RegimeTag::Perfect => "P-CSI",
            RegimeTag::PerfectLimited => "PL-CSI",
            RegimeTag::QuantizedLimited => "QL-CSI",
            RegimeTag::PerfectLimitedStatistical => "PLS-CSI",
            RegimeTag::QuantizedLimitedStatistical => "QLS-CSI",
        }
    }

    pub fn allocation(self) -> AllocationMode {
        match self {
            RegimeTag::PerfectLimitedStatistical | RegimeTag::QuantizedLimitedStatistical => AllocationMode::EqualPower,
            _ => AllocationMode::WaterFilling,
        }
    }

    pub fn is_quantized(self) -> bool {
        matches!(self, RegimeTag::QuantizedLimited | RegimeTag::QuantizedLimitedStatistical)
    }
}

/// How the extra bits of a quantized regime are split across streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitPolicy {
    Equal,
    Greedy,
    Random,
}

/// Bits available on top of the per-stream minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitBudget {
    /// Extra bits beyond the minimum.
    Extra(u32),
    /// Total budget; the extra bits are what remains after the minimum.
    Total(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizationSpec {
    pub budget: BitBudget,
    pub policy: BitPolicy,
}

/// A CSI regime. Quantized regimes carry the budget from which each trial derives its
/// [`QuantizationPlan`], since the minimum bits depend on the active surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsiRegime {
    pub tag: RegimeTag,
    pub quantization: Option<QuantizationSpec>,
}

impl CsiRegime {
    pub fn perfect() -> Self {
        Self { tag: RegimeTag::Perfect, quantization: None }
    }

    pub fn perfect_limited() -> Self {
        Self { tag: RegimeTag::PerfectLimited, quantization: None }
    }

    pub fn perfect_limited_statistical() -> Self {
        Self { tag: RegimeTag::PerfectLimitedStatistical, quantization: None }
    }

    pub fn quantized_limited(extra_bits: u32, policy: BitPolicy) -> Self {
        Self {
            tag: RegimeTag::QuantizedLimited,
            quantization: Some(QuantizationSpec { budget: BitBudget::Extra(extra_bits), policy }),
        }
    }

    pub fn quantized_limited_statistical(extra_bits: u32, policy: BitPolicy) -> Self {
        Self {
            tag: RegimeTag::QuantizedLimitedStatistical,
            quantization: Some(QuantizationSpec { budget: BitBudget::Extra(extra_bits), policy }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.tag.is_quantized(), self.quantization.is_some()) {
            (true, false) => Err(Error::Regime { regime: self.tag.label(), problem: "requires a quantization plan" }),
            (false, true) => Err(Error::Regime { regime: self.tag.label(), problem: "forbids a quantization plan" }),
            _ => Ok(()),
        }
    }
}

/// Which cascaded gains drive the power allocation of quantized regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AllocationSource {
    /// Reuse the allocation computed from exact-direction gains.
    #[default]
    PerfectGains,
    /// Recompute it from the gains realized with quantized directions.
    RealizedGains,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOptions {
    pub prune: bool,
    pub noise_model: NoiseModel,
    pub allocation_source: AllocationSource,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self { prune: true, noise_model: NoiseModel::Whitened, allocation_source: AllocationSource::PerfectGains }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeMetrics {
    pub tag: RegimeTag,
    pub se: f64,
    /// SE of the exact-direction counterpart minus this SE; quantized regimes only.
    pub se_loss: Option<f64>,
    pub plan: Option<QuantizationPlan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub rx_position: Point2,
    pub active_ris: Vec<usize>,
    pub candidates: u128,
    /// `|ξ*_k|²` of each stream under exact design.
    pub xi_star_power: Vec<f64>,
    /// Average link quality of each stream at the sampled Rx distance.
    pub c_bar: Vec<f64>,
    pub power_ratio_designed: f64,
    pub power_ratio_undesigned: f64,
    /// SVD benchmark on the channel with every surface left at zero phase.
    pub se_undesigned: f64,
    /// One entry per requested regime, in request order.
    pub regimes: Vec<RegimeMetrics>,
}

impl TrialOutcome {
    pub fn regime(&self, tag: RegimeTag) -> Option<&RegimeMetrics> {
        self.regimes.iter().find(|r| r.tag == tag)
    }
}

struct Context<'a> {
    deployment: &'a Deployment,
    selection: &'a SelectionResult,
    options: &'a TrialOptions,
    h_designed: CMatrix,
    xi_power: Vec<f64>,
    c_bar: Vec<f64>,
}

impl Context<'_> {
    fn e(&self) -> f64 {
        self.deployment.config.transmit_power
    }

    fn noise(&self) -> f64 {
        self.deployment.config.noise_power
    }

    fn powers(&self, gains: &[f64], mode: AllocationMode) -> Result<(Vec<f64>, Option<f64>)> {
        match mode {
            AllocationMode::WaterFilling => {
                let wf = water_filling(gains, self.e(), self.noise())?;
                Ok((wf.powers, Some(wf.water_level)))
            }
            AllocationMode::EqualPower => Ok((equal_power(self.e(), gains.len()), None)),
        }
    }

    fn se(&self, h: &CMatrix, t: &Transceiver) -> Result<f64> {
        spectral_efficiency_with(self.options.noise_model, h, &t.precoder, &t.combiner, self.noise())
    }

    fn customized_se(&self, mode: AllocationMode) -> Result<f64> {
        let (p, mu) = self.powers(&self.xi_power, mode)?;
        self.se(&self.h_designed, &cc_transceiver_with_powers(self.selection, p, mu))
    }

    fn plan<R: Rng + ?Sized>(&self, spec: &QuantizationSpec, rng: &mut R) -> Result<QuantizationPlan> {
        let n_elements = self.deployment.n_elements();
        let mins: Vec<u32> = self.selection.active_ris.iter().map(|&k| min_bits(n_elements[k])).collect();
        let floor: u32 = mins.iter().sum();
        let extra = match spec.budget {
            BitBudget::Extra(x) => x,
            BitBudget::Total(b) => b
                .checked_sub(floor)
                .ok_or(Error::Config(alloc::format!("feedback budget {b} is below the minimum {floor}")))?,
        };
        let n = mins.len();
        let x = match spec.policy {
            BitPolicy::Equal => equal_partition(n, extra),
            BitPolicy::Greedy => greedy_partition(&self.c_bar, extra),
            BitPolicy::Random => random_partition(n, extra, rng),
        };
        QuantizationPlan::new(mins, x)
    }
}

/// Runs one trial for every regime in `regimes`. All randomness comes from `rng`:
/// the channel draw first, then any random bit splits in regime order.
pub fn run_trial<R: Rng + ?Sized>(
    deployment: &Deployment,
    regimes: &[CsiRegime],
    options: &TrialOptions,
    rng: &mut R,
) -> Result<TrialOutcome> {
    for r in regimes {
        r.validate()?;
    }
    let cfg = &deployment.config;
    let realization = sample_realization(deployment, rng);
    let channel = &realization.channel;
    let rx_segments: Vec<_> = channel
        .links
        .iter()
        .map(|l| if options.prune { prune_paths(&l.ris_rx, cfg.prune_threshold_db) } else { l.ris_rx.clone() })
        .collect();
    let selection = select_paths(channel, &rx_segments)?;

    let designed = design_phases_exact(channel, &selection);
    let h_designed = compose_pathsum(channel, &designed)?;
    let power_ratio_designed = orthogonal_power_ratio(&cascaded_gains(channel, &designed)?, &selection)?;

    let identity = RisPhaseConfig::identity(&channel.n_elements());
    let h_undesigned = compose_pathsum(channel, &identity)?;
    let power_ratio_undesigned = orthogonal_power_ratio(&cascaded_gains(channel, &identity)?, &selection)?;
    let se_undesigned = {
        let t = svd_transceiver(&h_undesigned, cfg.transmit_power, cfg.noise_power, AllocationMode::WaterFilling)?;
        spectral_efficiency(&h_undesigned, &t.precoder, &t.combiner, cfg.noise_power)?
    };

    let distances = realization.rx_distances(deployment);
    let c_bar = selection
        .active_ris
        .iter()
        .map(|&k| {
            let p = &deployment.placements[k];
            c_bar_closed_form(cfg.transmit_power, cfg.noise_power, cfg.n_rx, cfg.xi0, p.d_ref, distances[k])
        })
        .collect();

    let ctx = Context {
        deployment,
        selection: &selection,
        options,
        h_designed,
        xi_power: selection.xi_star_power(),
        c_bar,
    };

    let mut reference = [None::<f64>; 2];
    let mut reference_se = |mode: AllocationMode| -> Result<f64> {
        let slot = usize::from(mode == AllocationMode::EqualPower);
        if let Some(v) = reference[slot] {
            return Ok(v);
        }
        let v = ctx.customized_se(mode)?;
        reference[slot] = Some(v);
        Ok(v)
    };

    let mut metrics = Vec::with_capacity(regimes.len());
    for regime in regimes {
        let mode = regime.tag.allocation();
        let m = match regime.tag {
            RegimeTag::Perfect => {
                let t = svd_transceiver(&ctx.h_designed, ctx.e(), ctx.noise(), mode)?;
                let se = spectral_efficiency(&ctx.h_designed, &t.precoder, &t.combiner, ctx.noise())?;
                RegimeMetrics { tag: regime.tag, se, se_loss: None, plan: None }
            }
            RegimeTag::PerfectLimited | RegimeTag::PerfectLimitedStatistical => {
                RegimeMetrics { tag: regime.tag, se: reference_se(mode)?, se_loss: None, plan: None }
            }
            RegimeTag::QuantizedLimited | RegimeTag::QuantizedLimitedStatistical => {
                let spec = regime.quantization.as_ref().expect("validated");
                let plan = ctx.plan(spec, rng)?;
                let directions: Vec<f64> = selection
                    .rx_theta_departure
                    .iter()
                    .zip(plan.bits())
                    .map(|(&t, b)| quantize_direction(t, b))
                    .collect();
                let phases = design_phases(channel, &selection, &directions);
                let h_q = compose_pathsum(channel, &phases)?;
                let gains = match options.allocation_source {
                    AllocationSource::PerfectGains => ctx.xi_power.clone(),
                    AllocationSource::RealizedGains => selection
                        .chosen_gains(&cascaded_gains(channel, &phases)?)
                        .iter()
                        .map(|x| x.norm_sqr())
                        .collect(),
                };
                let (p, mu) = ctx.powers(&gains, mode)?;
                let se = ctx.se(&h_q, &cc_transceiver_with_powers(&selection, p, mu))?;
                let loss = reference_se(mode)? - se;
                RegimeMetrics { tag: regime.tag, se, se_loss: Some(loss), plan: Some(plan) }
            }
        };
        metrics.push(m);
    }

    Ok(TrialOutcome {
        rx_position: realization.rx_position,
        active_ris: selection.active_ris.clone(),
        candidates: selection.candidates,
        xi_star_power: ctx.xi_power.clone(),
        c_bar: ctx.c_bar.clone(),
        power_ratio_designed,
        power_ratio_undesigned,
        se_undesigned,
        regimes: metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;
    use crate::transceiver::r_pl_closed_form;

    fn deployment() -> Deployment {
        Deployment::new(ScenarioConfig::paper_default()).unwrap()
    }

    fn all_regimes() -> Vec<CsiRegime> {
        alloc::vec![
            CsiRegime::perfect(),
            CsiRegime::perfect_limited(),
            CsiRegime::quantized_limited(2, BitPolicy::Greedy),
            CsiRegime::perfect_limited_statistical(),
            CsiRegime::quantized_limited_statistical(2, BitPolicy::Random),
        ]
    }

    #[test]
    fn same_seed_same_outcome() {
        let dep = deployment();
        let a = run_trial(&dep, &all_regimes(), &TrialOptions::default(), &mut trial_rng(9, 4)).unwrap();
        let b = run_trial(&dep, &all_regimes(), &TrialOptions::default(), &mut trial_rng(9, 4)).unwrap();
        assert_eq!(a, b);
        let c = run_trial(&dep, &all_regimes(), &TrialOptions::default(), &mut trial_rng(9, 5)).unwrap();
        assert_ne!(a.rx_position, c.rx_position);
    }

    #[test]
    fn perfect_regime_is_svd_benchmark() {
        let dep = deployment();
        let mut rng = trial_rng(1, 0);
        let out = run_trial(&dep, &[CsiRegime::perfect()], &TrialOptions::default(), &mut rng).unwrap();

        // Recreate the designed channel from the same stream.
        let mut rng = trial_rng(1, 0);
        let r = sample_realization(&dep, &mut rng);
        let segs: Vec<_> = r.channel.links.iter().map(|l| prune_paths(&l.ris_rx, 10.0)).collect();
        let sel = select_paths(&r.channel, &segs).unwrap();
        let h = compose_pathsum(&r.channel, &design_phases_exact(&r.channel, &sel)).unwrap();
        let svd = crate::transceiver::svd_factors(&h).unwrap();
        let wf = water_filling(&svd.singular_values, dep.config.transmit_power, dep.config.noise_power).unwrap();
        let expected = r_pl_closed_form(&svd.singular_values, &wf.powers, dep.config.noise_power);
        assert!((out.regimes[0].se - expected).abs() < 1e-9);
    }

    #[test]
    fn regime_contracts() {
        assert!(CsiRegime { tag: RegimeTag::QuantizedLimited, quantization: None }.validate().is_err());
        let bad = CsiRegime { tag: RegimeTag::Perfect, ..CsiRegime::quantized_limited(1, BitPolicy::Equal) };
        assert!(bad.validate().is_err());
        for r in all_regimes() {
            r.validate().unwrap();
        }
        let dep = deployment();
        let err = run_trial(&dep, &[bad], &TrialOptions::default(), &mut trial_rng(0, 0));
        assert!(matches!(err, Err(Error::Regime { .. })));
    }

    #[test]
    fn plans_follow_budget() {
        let dep = deployment();
        let regimes = [
            CsiRegime::quantized_limited(5, BitPolicy::Equal),
            CsiRegime {
                tag: RegimeTag::QuantizedLimited,
                quantization: Some(QuantizationSpec { budget: BitBudget::Total(40), policy: BitPolicy::Greedy }),
            },
        ];
        let out = run_trial(&dep, &regimes, &TrialOptions::default(), &mut trial_rng(2, 0)).unwrap();
        let p0 = out.regimes[0].plan.as_ref().unwrap();
        assert_eq!(p0.extra_bits, alloc::vec![2, 1, 1, 1]);
        assert_eq!(p0.min_bits, alloc::vec![8; 4]);
        let p1 = out.regimes[1].plan.as_ref().unwrap();
        assert_eq!(p1.total_bits(), 40);
        assert_eq!(p1.extra_total(), 8);

        let too_small = CsiRegime {
            tag: RegimeTag::QuantizedLimited,
            quantization: Some(QuantizationSpec { budget: BitBudget::Total(10), policy: BitPolicy::Greedy }),
        };
        assert!(matches!(run_trial(&dep, &[too_small], &TrialOptions::default(), &mut trial_rng(2, 0)), Err(Error::Config(_))));
    }

    #[test]
    fn limited_regimes_never_beat_svd_benchmark() {
        let dep = deployment().with_transmit_power(1.0);
        for i in 0..20 {
            let out = run_trial(&dep, &all_regimes(), &TrialOptions::default(), &mut trial_rng(3, i)).unwrap();
            let p = out.regime(RegimeTag::Perfect).unwrap().se;
            for r in &out.regimes[1..] {
                assert!(r.se <= p + 1e-9, "{:?} {} > {}", r.tag, r.se, p);
            }
            assert!(out.power_ratio_designed > out.power_ratio_undesigned);
        }
    }

    #[test]
    fn huge_surfaces_close_the_gap() {
        let mut cfg = ScenarioConfig::paper_default();
        cfg.element_override = Some(alloc::vec![8192; 4]);
        let dep = Deployment::new(cfg).unwrap().with_transmit_power(1.0);
        let regimes = [CsiRegime::perfect(), CsiRegime::perfect_limited()];
        let (mut p, mut pl) = (0.0, 0.0);
        for i in 0..20 {
            let out = run_trial(&dep, &regimes, &TrialOptions::default(), &mut trial_rng(4, i)).unwrap();
            p += out.regimes[0].se;
            pl += out.regimes[1].se;
        }
        assert!((p - pl) / p < 0.02, "P {p} PL {pl}");
    }

    #[test]
    fn trial_streams_differ() {
        let a: u64 = trial_rng(1, 0).random();
        let b: u64 = trial_rng(1, 1).random();
        let c: u64 = trial_rng(1, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
