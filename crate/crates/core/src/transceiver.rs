//! SVD and channel-customization transceivers, power allocation and spectral efficiency.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::customization::SelectionResult;
use crate::linalg::{log2_det_hpd, orthonormality_defect, orthonormalize_columns, CMatrix};
use crate::{Error, Result};

/// Streams whose eigenmode SNR `λ/σ²` falls below this never receive power.
pub const MIN_EIGEN_SNR: f64 = 1e-15;

/// Largest combiner orthonormality defect accepted by [`spectral_efficiency`].
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-8;

/// Thin SVD of an `N_R × N_T` channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    /// `N_R × N_R` unitary.
    pub u: CMatrix,
    /// Squared singular values λ_i, descending.
    pub singular_values: Vec<f64>,
    /// `N_T × N_R` with orthonormal columns.
    pub v: CMatrix,
}

pub fn svd_factors(h: &CMatrix) -> Result<SvdFactors> {
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if h.nrows() > h.ncols() {
        return Err(Error::Dimension(alloc::format!("channel is {}x{}, expected wide", h.nrows(), h.ncols())));
    }
    let svd = h.clone().svd(true, true);
    let u = svd.u.ok_or(Error::NonFinite)?;
    let v_t = svd.v_t.ok_or(Error::NonFinite)?;
    let s = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let n = order.len();
    let mut u_sorted = CMatrix::zeros(u.nrows(), n);
    let mut v_sorted = CMatrix::zeros(v_t.ncols(), n);
    let mut lambdas = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_sorted.set_column(dst, &v_t.row(src).adjoint());
        lambdas.push(s[src] * s[src]);
    }
    Ok(SvdFactors { u: u_sorted, singular_values: lambdas, v: v_sorted })
}

/// Per-stream powers and the water level μ.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFilling {
    pub powers: Vec<f64>,
    pub water_level: f64,
}

/// `p_i = max(0, μ − σ²/λ_i)` with `Σ p_i = E`, solved exactly by scanning active sets
/// over the eigenmodes sorted by strength.
pub fn water_filling(lambdas: &[f64], total_power: f64, noise_power: f64) -> Result<WaterFilling> {
    if !(total_power > 0.0 && noise_power > 0.0) || lambdas.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::Undefined("water-filling needs E > 0, σ² > 0 and λ ≥ 0"));
    }
    let mut order: Vec<usize> =
        (0..lambdas.len()).filter(|&i| lambdas[i] / noise_power >= MIN_EIGEN_SNR).collect();
    if order.is_empty() {
        return Err(Error::NoFeasibleAllocation);
    }
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]));
    let floors: Vec<f64> = order.iter().map(|&i| noise_power / lambdas[i]).collect();

    // Largest m such that the level with the m strongest modes clears the m-th floor.
    let mut prefix = 0.0;
    let mut best = (1, total_power + floors[0]);
    for m in 1..=floors.len() {
        prefix += floors[m - 1];
        let mu = (total_power + prefix) / m as f64;
        if mu > floors[m - 1] {
            best = (m, mu);
        } else {
            break;
        }
    }
    let (active, mu) = best;
    let mut powers = alloc::vec![0.0; lambdas.len()];
    for (rank, &i) in order.iter().enumerate().take(active) {
        powers[i] = mu - floors[rank];
    }
    // μ can dwarf E when the floors are large; restore Σp = E after cancellation.
    let sum: f64 = powers.iter().sum();
    for p in &mut powers {
        *p *= total_power / sum;
    }
    Ok(WaterFilling { powers, water_level: mu })
}

/// `E / n` on each of `n` streams.
pub fn equal_power(total_power: f64, n_active: usize) -> Vec<f64> {
    alloc::vec![total_power / n_active as f64; n_active]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationMode {
    WaterFilling,
    EqualPower,
}

fn allocate(lambdas: &[f64], e: f64, noise: f64, mode: AllocationMode) -> Result<(Vec<f64>, Option<f64>)> {
    match mode {
        AllocationMode::WaterFilling => {
            let wf = water_filling(lambdas, e, noise)?;
            Ok((wf.powers, Some(wf.water_level)))
        }
        AllocationMode::EqualPower => Ok((equal_power(e, lambdas.len()), None)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transceiver {
    /// `N_T × N_R` precoder F.
    pub precoder: CMatrix,
    /// `N_R × N_R` combiner W.
    pub combiner: CMatrix,
    pub powers: Vec<f64>,
    pub water_level: Option<f64>,
}

fn scale_columns(m: &CMatrix, powers: &[f64]) -> CMatrix {
    let mut out = m.clone();
    for (j, p) in powers.iter().enumerate() {
        let s = Complex64::new(libm::sqrt(*p), 0.0);
        for i in 0..out.nrows() {
            out[(i, j)] *= s;
        }
    }
    out
}

/// `F = V P^{1/2}`, `W = U` from the SVD of the full channel.
pub fn svd_transceiver(h: &CMatrix, total_power: f64, noise_power: f64, mode: AllocationMode) -> Result<Transceiver> {
    let svd = svd_factors(h)?;
    let (powers, water_level) = allocate(&svd.singular_values, total_power, noise_power, mode)?;
    Ok(Transceiver { precoder: scale_columns(&svd.v, &powers), combiner: svd.u, powers, water_level })
}

/// `F = A_{T,⊥} P^{1/2}`, `W = A_{R,⊥}` with `P` allocated over `|ξ*_k|²`.
pub fn cc_transceiver(
    selection: &SelectionResult,
    total_power: f64,
    noise_power: f64,
    mode: AllocationMode,
) -> Result<Transceiver> {
    let (powers, water_level) = allocate(&selection.xi_star_power(), total_power, noise_power, mode)?;
    Ok(cc_transceiver_with_powers(selection, powers, water_level))
}

/// Channel-customization transceiver with a given power vector (one entry per active RIS).
pub fn cc_transceiver_with_powers(selection: &SelectionResult, powers: Vec<f64>, water_level: Option<f64>) -> Transceiver {
    Transceiver {
        precoder: scale_columns(&selection.a_t_orth, &powers),
        combiner: selection.a_r_orth.clone(),
        powers,
        water_level,
    }
}

fn se_core(h: &CMatrix, f: &CMatrix, w: &CMatrix, noise_power: f64) -> Result<f64> {
    if h.ncols() != f.nrows() || h.nrows() != w.nrows() {
        return Err(Error::Dimension(alloc::format!(
            "H {}x{}, F {}x{}, W {}x{}",
            h.nrows(),
            h.ncols(),
            f.nrows(),
            f.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    let g = w.adjoint() * h * f;
    let n = g.nrows();
    let m = CMatrix::identity(n, n) + (&g * g.adjoint()) / Complex64::new(noise_power, 0.0);
    log2_det_hpd(&m)
}

/// `log2 det(I + Wᴴ H F Fᴴ Hᴴ W / σ²)`. The combiner must have orthonormal columns.
pub fn spectral_efficiency(h: &CMatrix, f: &CMatrix, w: &CMatrix, noise_power: f64) -> Result<f64> {
    let defect = orthonormality_defect(w);
    if !(defect <= ORTHONORMAL_TOLERANCE) {
        return Err(Error::CombinerNotOrthonormal(defect));
    }
    se_core(h, f, w, noise_power)
}

/// How the combiner is treated when it is only approximately orthonormal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseModel {
    /// Replace W by the QR factor of its columns so the combined noise stays white.
    #[default]
    Whitened,
    /// Evaluate the log-det with W as given, ignoring noise coloring.
    Raw,
}

pub fn spectral_efficiency_with(
    model: NoiseModel,
    h: &CMatrix,
    f: &CMatrix,
    w: &CMatrix,
    noise_power: f64,
) -> Result<f64> {
    match model {
        NoiseModel::Whitened => spectral_efficiency(h, f, &orthonormalize_columns(w), noise_power),
        NoiseModel::Raw => se_core(h, f, w, noise_power),
    }
}

/// `Σ_k log2(1 + |ξ*_k|² p_k / σ²)`.
pub fn r_pl_closed_form(xi_power: &[f64], powers: &[f64], noise_power: f64) -> f64 {
    xi_power.iter().zip(powers).map(|(x, p)| libm::log2(1.0 + x * p / noise_power)).sum()
}
