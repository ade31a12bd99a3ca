//! EDoF, eigen-spectra and capacity of channel matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{composite_channel, los_channel_pwm, ChannelMatrix, WavefrontModel};
use crate::error::{Error, Result};
use crate::geometry::LinkScene;

/// Eigenvalues below this fraction of the largest count as zero for rank.
const RANK_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdofReport {
    pub edof: f64,
    pub trace: f64,
    pub frobenius: f64,
    /// Eigenvalues of the Gram matrix, descending, negatives clamped to zero.
    pub eigenvalues: Vec<f64>,
    pub numerical_rank: usize,
    pub model: WavefrontModel,
    pub rx_count: usize,
    pub tx_count: usize,
}

/// Gram matrix on the smaller side: `H Hᴴ` when `Nr ≤ Nt`, else `Hᴴ H`.
pub fn covariance(h: &ChannelMatrix) -> DMatrix<Complex64> {
    gram(h.entries())
}

fn gram(h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    if h.nrows() <= h.ncols() {
        h * h.adjoint()
    } else {
        h.adjoint() * h
    }
}

fn trace_and_frobenius(r: &DMatrix<Complex64>) -> (f64, f64) {
    let trace: f64 = r.diagonal().iter().map(|z| z.re).sum();
    let frob = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (trace, frob)
}

/// Descending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(r: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(r.clone())
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0))
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// `(tr R / ‖R‖_F)²` without the eigen-decomposition.
pub fn edof_value(h: &ChannelMatrix) -> Result<f64> {
    let (trace, frob) = trace_and_frobenius(&covariance(h));
    if trace <= 0.0 || frob == 0.0 {
        return Err(Error::ZeroChannel);
    }
    Ok((trace / frob).powi(2))
}

pub fn edof(h: &ChannelMatrix) -> Result<EdofReport> {
    let r = covariance(h);
    let (trace, frobenius) = trace_and_frobenius(&r);
    if trace <= 0.0 || frobenius == 0.0 {
        return Err(Error::ZeroChannel);
    }
    let eigenvalues = hermitian_eigenvalues(&r);
    let max = eigenvalues.first().copied().unwrap_or(0.0);
    let numerical_rank = eigenvalues.iter().filter(|&&v| v > RANK_TOL * max).count();
    Ok(EdofReport {
        edof: (trace / frobenius).powi(2),
        trace,
        frobenius,
        eigenvalues,
        numerical_rank,
        model: h.model(),
        rx_count: h.rx_count(),
        tx_count: h.tx_count(),
    })
}

/// Ratio `λ_m / λ_1` of the Gram spectrum in dB (`m` is 1-based, `m ≥ 2`).
/// Returns `-∞` when `λ_m` vanishes.
pub fn eigen_ratio_db(h: &ChannelMatrix, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "eigenvalue index must be >= 2, got {m}"
        )));
    }
    let ev = hermitian_eigenvalues(&covariance(h));
    if m > ev.len() {
        return Err(Error::InvalidParameter(format!(
            "eigenvalue index {m} exceeds Gram size {}",
            ev.len()
        )));
    }
    if ev[0] <= 0.0 {
        return Err(Error::ZeroChannel);
    }
    Ok(10.0 * (ev[m - 1] / ev[0]).log10())
}

/// Planar reference used as the EDoF-ratio denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanarReference {
    /// Rank-one planar LoS channel, scatterers ignored.
    #[default]
    LineOfSight,
    /// Planar LoS plus planar-approximated scattered paths.
    Multipath,
}

impl PlanarReference {
    pub fn label(self) -> &'static str {
        match self {
            PlanarReference::LineOfSight => "planar_los",
            PlanarReference::Multipath => "planar_multipath",
        }
    }
}

fn planar_channel(scene: &LinkScene, reference: PlanarReference) -> Result<ChannelMatrix> {
    match reference {
        PlanarReference::LineOfSight => los_channel_pwm(scene),
        PlanarReference::Multipath => composite_channel(scene, WavefrontModel::Planar),
    }
}

/// `EDoF(SWM) / EDoF(PWM)` at distance `d`.
pub fn edof_ratio(scene: &LinkScene, d: f64) -> Result<f64> {
    edof_ratio_with(scene, d, PlanarReference::default())
}

pub fn edof_ratio_with(scene: &LinkScene, d: f64, reference: PlanarReference) -> Result<f64> {
    let scene = scene.with_distance(d)?;
    let spherical = composite_channel(&scene, WavefrontModel::Spherical)?;
    let planar = planar_channel(&scene, reference)?;
    edof_ratio_of(&spherical, &planar)
}

pub fn edof_ratio_of(spherical: &ChannelMatrix, planar: &ChannelMatrix) -> Result<f64> {
    Ok(edof_value(spherical)? / edof_value(planar)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityNormalization {
    /// Divide `H` by the free-space gain at the centre distance, so `snr` is
    /// the per-branch receive SNR referenced to the array centres.
    #[default]
    CenterGain,
    /// Use `H` as is.
    Absolute,
}

/// Equal-power capacity `log₂ det(I + (γ / Nt) H̃ H̃ᴴ)` in bit/s/Hz.
pub fn capacity(h: &ChannelMatrix, snr: f64) -> Result<f64> {
    capacity_with(h, snr, CapacityNormalization::CenterGain)
}

pub fn capacity_with(
    h: &ChannelMatrix,
    snr: f64,
    normalization: CapacityNormalization,
) -> Result<f64> {
    if !(snr.is_finite() && snr > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "snr must be positive, got {snr}"
        )));
    }
    let scale = match normalization {
        CapacityNormalization::CenterGain => 1.0 / h.reference_gain(),
        CapacityNormalization::Absolute => 1.0,
    };
    let r = covariance(h);
    let n = r.nrows();
    // det(I + c H Hᴴ) = det(I + c Hᴴ H), so either Gram side works.
    let c = snr * scale * scale / h.tx_count() as f64;
    let a = DMatrix::<Complex64>::identity(n, n) + r * Complex64::from(c);
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("I + cR is not positive definite".into()))?;
    let log_det: f64 = chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|z| 2.0 * z.re.ln())
        .sum();
    Ok(log_det / std::f64::consts::LN_2)
}

/// `|C_SWM − C_PWM| / C_SWM` with the planar LoS channel as reference.
pub fn capacity_error(scene: &LinkScene, d: f64, snr: f64) -> Result<f64> {
    capacity_error_with(scene, d, snr, PlanarReference::default())
}

pub fn capacity_error_with(
    scene: &LinkScene,
    d: f64,
    snr: f64,
    reference: PlanarReference,
) -> Result<f64> {
    let scene = scene.with_distance(d)?;
    let spherical = composite_channel(&scene, WavefrontModel::Spherical)?;
    let planar = planar_channel(&scene, reference)?;
    capacity_error_of(&spherical, &planar, snr)
}

pub fn capacity_error_of(
    spherical: &ChannelMatrix,
    planar: &ChannelMatrix,
    snr: f64,
) -> Result<f64> {
    let cs = capacity(spherical, snr)?;
    let cp = capacity(planar, snr)?;
    if cs == 0.0 {
        return Err(Error::ZeroCapacity);
    }
    Ok((cs - cp).abs() / cs)
}

/// `C_SWM / C_PWM` at distance `d`.
pub fn capacity_ratio(
    scene: &LinkScene,
    d: f64,
    snr: f64,
    reference: PlanarReference,
) -> Result<f64> {
    let scene = scene.with_distance(d)?;
    let cs = capacity(&composite_channel(&scene, WavefrontModel::Spherical)?, snr)?;
    let cp = capacity(&planar_channel(&scene, reference)?, snr)?;
    if cp == 0.0 {
        return Err(Error::ZeroCapacity);
    }
    Ok(cs / cp)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
