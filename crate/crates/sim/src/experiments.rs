//! Parameter sweeps behind the `simulate` subcommand.
//!
//! Every grid point reuses the same seed, so trial `i` sees the same receiver
//! position and channel draw at every point and differences along the sweep are
//! not masked by sampling noise.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Result};
use rayon::prelude::*;
use riscc_core::feedback::{se_loss_approx, se_loss_upper};
use riscc_core::harness::{run_trial, trial_rng, BitBudget, BitPolicy, CsiRegime, QuantizationSpec, RegimeTag, TrialOptions, TrialOutcome};
use riscc_core::scenario::{dbm_to_watts, Deployment, ScenarioConfig};
use riscc_core::stats::{empirical_cdf, MeanEstimate};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    PathRatioCdf,
    SeLossVsPower,
    ErgodicSeVsPower,
    WfVsEqual,
    PruningAblation,
    SeLossVsBits,
    SeVsNs,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::PathRatioCdf,
        Experiment::SeLossVsPower,
        Experiment::ErgodicSeVsPower,
        Experiment::WfVsEqual,
        Experiment::PruningAblation,
        Experiment::SeLossVsBits,
        Experiment::SeVsNs,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::PathRatioCdf => "path_ratio_cdf",
            Experiment::SeLossVsPower => "se_loss_vs_power",
            Experiment::ErgodicSeVsPower => "ergodic_se_vs_power",
            Experiment::WfVsEqual => "wf_vs_equal",
            Experiment::PruningAblation => "pruning_ablation",
            Experiment::SeLossVsBits => "se_loss_vs_bits",
            Experiment::SeVsNs => "se_vs_ns",
        }
    }

    /// What the sweep variable means for this experiment.
    pub fn sweep_variable(self) -> &'static str {
        match self {
            Experiment::PathRatioCdf => "power ratio threshold",
            Experiment::SeLossVsPower
            | Experiment::ErgodicSeVsPower
            | Experiment::WfVsEqual
            | Experiment::PruningAblation => "transmit power (dBm)",
            Experiment::SeLossVsBits => "extra feedback bits",
            Experiment::SeVsNs => "base element count N_S (surface k gets N_S k^2)",
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            Experiment::PathRatioCdf => (0..=20).map(|i| i as f64 * 0.05).collect(),
            Experiment::SeLossVsPower
            | Experiment::ErgodicSeVsPower
            | Experiment::PruningAblation => vec![-20.0, -15.0, -10.0, -5.0, 0.0],
            Experiment::WfVsEqual => (0..=5).map(|i| -20.0 + i as f64).collect(),
            Experiment::SeLossVsBits => (0..=8).map(f64::from).collect(),
            Experiment::SeVsNs => vec![16.0, 32.0, 64.0, 128.0],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Experiment {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL.into_iter().find(|e| e.id() == s).ok_or_else(|| {
            let known: Vec<_> = Experiment::ALL.iter().map(|e| e.id()).collect();
            anyhow::anyhow!("unknown experiment {s:?}; expected one of {}", known.join(", "))
        })
    }
}

/// One emitted number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub sweep_value: f64,
    pub regime: String,
    pub metric: String,
    pub value: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub sweep_variable: String,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub trials: usize,
    pub seed: u64,
    /// Overrides the experiment's default grid.
    pub grid: Option<Vec<f64>>,
    pub trial: TrialOptions,
}

/// Runs trials `0..n` in parallel; the output is in trial order.
pub fn run_trials(
    deployment: &Deployment,
    regimes: &[CsiRegime],
    options: &TrialOptions,
    n: usize,
    seed: u64,
) -> Result<Vec<TrialOutcome>> {
    let outcomes: riscc_core::Result<Vec<_>> = (0..n as u64)
        .into_par_iter()
        .map(|i| run_trial(deployment, regimes, options, &mut trial_rng(seed, i)))
        .collect();
    Ok(outcomes?)
}

fn regime_label(regime: &CsiRegime) -> String {
    match regime.quantization {
        None => regime.tag.label().to_owned(),
        Some(QuantizationSpec { budget, policy }) => {
            let budget = match budget {
                BitBudget::Extra(x) => format!("extra={x}"),
                BitBudget::Total(b) => format!("B={b}"),
            };
            let policy = match policy {
                BitPolicy::Equal => "equal",
                BitPolicy::Greedy => "greedy",
                BitPolicy::Random => "random",
            };
            format!("{}[{budget},{policy}]", regime.tag.label())
        }
    }
}

fn quantized(tag: RegimeTag, budget: BitBudget, policy: BitPolicy) -> CsiRegime {
    CsiRegime { tag, quantization: Some(QuantizationSpec { budget, policy }) }
}

struct Emitter<'a> {
    rows: &'a mut Vec<Row>,
    sweep_value: f64,
    seed: u64,
}

impl Emitter<'_> {
    fn mean(&mut self, regime: &str, metric: &str, samples: &[f64]) {
        let e = MeanEstimate::from_samples(samples);
        self.push(regime, metric, e.mean, e.std_error, e.n);
    }

    fn push(&mut self, regime: &str, metric: &str, value: f64, std_error: f64, trials: usize) {
        self.rows.push(Row {
            sweep_value: self.sweep_value,
            regime: regime.to_owned(),
            metric: metric.to_owned(),
            value,
            std_error,
            trials,
            seed: self.seed,
        });
    }
}

/// Per-regime ergodic SE rows of one grid point.
fn se_rows(out: &mut Emitter<'_>, regimes: &[CsiRegime], trials: &[TrialOutcome], label_suffix: &str) {
    for (i, regime) in regimes.iter().enumerate() {
        let se: Vec<f64> = trials.iter().map(|t| t.regimes[i].se).collect();
        out.mean(&format!("{}{label_suffix}", regime_label(regime)), "ergodic_se", &se);
    }
}

fn loss_rows(out: &mut Emitter<'_>, regimes: &[CsiRegime], trials: &[TrialOutcome]) {
    for (i, regime) in regimes.iter().enumerate() {
        let label = regime_label(regime);
        let mc: Vec<f64> = trials.iter().map(|t| t.regimes[i].se_loss.unwrap_or(f64::NAN)).collect();
        let approx: Vec<f64> = trials
            .iter()
            .map(|t| se_loss_approx(&t.c_bar, &t.regimes[i].plan.as_ref().map_or(vec![], |p| p.extra_bits.clone())))
            .collect();
        let upper: Vec<f64> = trials
            .iter()
            .map(|t| se_loss_upper(&t.regimes[i].plan.as_ref().map_or(vec![], |p| p.extra_bits.clone())))
            .collect();
        out.mean(&label, "se_loss_mc", &mc);
        out.mean(&label, "se_loss_approx", &approx);
        out.mean(&label, "se_loss_upper", &upper);
    }
}

pub fn sweep(config: &ScenarioConfig, experiment: Experiment, options: &SweepOptions) -> Result<ExperimentResult> {
    let grid = options.grid.clone().unwrap_or_else(|| experiment.default_grid());
    if grid.is_empty() {
        bail!("empty sweep grid");
    }
    if options.trials == 0 {
        bail!("at least one trial is required");
    }
    let base = Deployment::new(config.clone())?;
    let (n, seed) = (options.trials, options.seed);
    let mut rows = Vec::new();
    let budget = BitBudget::Total(config.feedback_budget);

    match experiment {
        Experiment::PathRatioCdf => {
            let trials = run_trials(&base, &[], &options.trial, n, seed)?;
            let designed: Vec<f64> = trials.iter().map(|t| t.power_ratio_designed).collect();
            let undesigned: Vec<f64> = trials.iter().map(|t| t.power_ratio_undesigned).collect();
            for (label, samples) in [("designed", &designed), ("undesigned", &undesigned)] {
                for (&x, p) in grid.iter().zip(empirical_cdf(samples, &grid)) {
                    let se = (p * (1.0 - p) / n as f64).sqrt();
                    Emitter { rows: &mut rows, sweep_value: x, seed }.push(label, "cdf", p, se, n);
                }
            }
        }
        Experiment::SeLossVsPower => {
            let regimes: Vec<_> = [1, 2, 4, 8]
                .map(|x| quantized(RegimeTag::QuantizedLimited, BitBudget::Extra(x), BitPolicy::Greedy))
                .to_vec();
            for &dbm in &grid {
                let dep = base.with_transmit_power(dbm_to_watts(dbm));
                let trials = run_trials(&dep, &regimes, &options.trial, n, seed)?;
                loss_rows(&mut Emitter { rows: &mut rows, sweep_value: dbm, seed }, &regimes, &trials);
            }
        }
        Experiment::ErgodicSeVsPower => {
            let regimes = vec![
                CsiRegime::perfect(),
                CsiRegime::perfect_limited(),
                quantized(RegimeTag::QuantizedLimited, budget, BitPolicy::Greedy),
                CsiRegime::perfect_limited_statistical(),
                quantized(RegimeTag::QuantizedLimitedStatistical, budget, BitPolicy::Greedy),
            ];
            for &dbm in &grid {
                let dep = base.with_transmit_power(dbm_to_watts(dbm));
                let trials = run_trials(&dep, &regimes, &options.trial, n, seed)?;
                let mut out = Emitter { rows: &mut rows, sweep_value: dbm, seed };
                se_rows(&mut out, &regimes, &trials, "");
                let undesigned: Vec<f64> = trials.iter().map(|t| t.se_undesigned).collect();
                out.mean("undesigned", "ergodic_se", &undesigned);
            }
        }
        Experiment::WfVsEqual => {
            let regimes = vec![
                CsiRegime::perfect_limited(),
                CsiRegime::perfect_limited_statistical(),
                quantized(RegimeTag::QuantizedLimited, BitBudget::Extra(2), BitPolicy::Greedy),
                quantized(RegimeTag::QuantizedLimitedStatistical, BitBudget::Extra(2), BitPolicy::Greedy),
                quantized(RegimeTag::QuantizedLimitedStatistical, BitBudget::Extra(4), BitPolicy::Greedy),
            ];
            for &dbm in &grid {
                let dep = base.with_transmit_power(dbm_to_watts(dbm));
                let trials = run_trials(&dep, &regimes, &options.trial, n, seed)?;
                se_rows(&mut Emitter { rows: &mut rows, sweep_value: dbm, seed }, &regimes, &trials, "");
            }
        }
        Experiment::PruningAblation => {
            let regimes = [CsiRegime::perfect_limited()];
            for &dbm in &grid {
                let dep = base.with_transmit_power(dbm_to_watts(dbm));
                let mut out = Emitter { rows: &mut rows, sweep_value: dbm, seed };
                for (prune, suffix) in [(true, "[pruned]"), (false, "[unpruned]")] {
                    let opts = TrialOptions { prune, ..options.trial };
                    let trials = run_trials(&dep, &regimes, &opts, n, seed)?;
                    se_rows(&mut out, &regimes, &trials, suffix);
                    let candidates: Vec<f64> = trials.iter().map(|t| t.candidates as f64).collect();
                    out.mean(&format!("PL-CSI{suffix}"), "candidates", &candidates);
                }
            }
        }
        Experiment::SeLossVsBits => {
            for &x in &grid {
                if x < 0.0 || x.fract() != 0.0 {
                    bail!("extra bits must be nonnegative integers, got {x}");
                }
                let policies = [(BitPolicy::Greedy, "QL-CSI[greedy]"), (BitPolicy::Random, "QL-CSI[random]")];
                let regimes: Vec<_> = policies
                    .iter()
                    .map(|&(p, _)| quantized(RegimeTag::QuantizedLimited, BitBudget::Extra(x as u32), p))
                    .collect();
                let trials = run_trials(&base, &regimes, &options.trial, n, seed)?;
                let mut out = Emitter { rows: &mut rows, sweep_value: x, seed };
                for (i, (_, label)) in policies.iter().enumerate() {
                    let mc: Vec<f64> = trials.iter().map(|t| t.regimes[i].se_loss.unwrap_or(f64::NAN)).collect();
                    out.mean(label, "se_loss_mc", &mc);
                }
            }
        }
        Experiment::SeVsNs => {
            let regimes = vec![
                CsiRegime::perfect(),
                CsiRegime::perfect_limited(),
                quantized(RegimeTag::QuantizedLimited, budget, BitPolicy::Greedy),
                CsiRegime::perfect_limited_statistical(),
            ];
            for &ns in &grid {
                if ns < 1.0 || ns.fract() != 0.0 {
                    bail!("element counts must be positive integers, got {ns}");
                }
                let mut cfg = config.clone();
                cfg.element_override = Some((1..=cfg.n_ris()).map(|k| ns as usize * k * k).collect());
                let dep = Deployment::new(cfg)?;
                let trials = run_trials(&dep, &regimes, &options.trial, n, seed)?;
                se_rows(&mut Emitter { rows: &mut rows, sweep_value: ns, seed }, &regimes, &trials, "");
            }
        }
    }
    Ok(ExperimentResult { experiment: experiment.id().to_owned(), sweep_variable: experiment.sweep_variable().to_owned(), rows })
}
