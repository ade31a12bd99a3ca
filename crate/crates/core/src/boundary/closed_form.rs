//! Tabulated boundary expressions. Apertures, spacings and lengths in metres,
//! angles in radians.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::BoundaryCriterion;

/// `2 D_r² / λ` (point to array) or `2 (D_t + D_r)² / λ` (array to array).
pub fn rayleigh(tx_aperture: f64, rx_aperture: f64, wavelength: f64, point_to_array: bool) -> f64 {
    let d = if point_to_array {
        rx_aperture
    } else {
        tx_aperture + rx_aperture
    };
    2.0 * d * d / wavelength
}

pub fn mimo_ard(tx_aperture: f64, rx_aperture: f64, wavelength: f64) -> f64 {
    4.0 * tx_aperture * rx_aperture / wavelength
}

pub fn critical_distance(aperture: f64) -> f64 {
    9.0 * aperture
}

/// Uniform-power distance for a weakest/strongest power-ratio threshold `gamma_th ∈ (0, 1)`.
pub fn uniform_power_distance(gamma_th: f64, aperture: f64) -> f64 {
    let g = gamma_th.powf(2.0 / 3.0);
    (g / (1.0 - g)).sqrt() * aperture / 2.0
}

/// `0.367 cos²(φ) 2 D² / λ` for incidence angle `phi`.
pub fn effective_rayleigh(phi: f64, aperture: f64, wavelength: f64) -> f64 {
    0.367 * phi.cos().powi(2) * 2.0 * aperture * aperture / wavelength
}

/// `2 L √N` with `L` the diagonal of one element.
pub fn bjornson(element_diagonal: f64, n_antennas: usize) -> f64 {
    2.0 * element_diagonal * (n_antennas as f64).sqrt()
}

/// `2.86 D` for a linear array, `3.96 D` for a planar one.
pub fn equi_power(aperture: f64, planar: bool) -> f64 {
    if planar {
        3.96 * aperture
    } else {
        2.86 * aperture
    }
}

/// Largest-eigenvalue threshold distance; `d_t`, `d_r` are element spacings.
pub fn eigen_threshold(
    tau_g: f64,
    tx_spacing: f64,
    rx_spacing: f64,
    tx_angle: f64,
    rx_angle: f64,
    wavelength: f64,
) -> f64 {
    tau_g * tx_spacing * rx_spacing * tx_angle.cos() * rx_angle.cos() / wavelength
}

pub fn capacity_threshold(
    epsilon: f64,
    tx_aperture: f64,
    rx_aperture: f64,
    tx_angle: f64,
    rx_angle: f64,
    wavelength: f64,
) -> f64 {
    epsilon * tx_aperture * rx_aperture / wavelength * tx_angle.cos() * rx_angle.cos()
}

/// Closed-form EBD for two ULAs:
/// `π D_t D_r / (λ a) · |cos β − sin α sin(α + β)|`.
pub fn ebd_closed_form_ula_ula(
    tx_aperture: f64,
    rx_aperture: f64,
    wavelength: f64,
    alpha: f64,
    beta: f64,
    aux_a: f64,
) -> f64 {
    let orientation = (beta.cos() - alpha.sin() * (alpha + beta).sin()).abs();
    PI * tx_aperture * rx_aperture / (wavelength * aux_a) * orientation
}

/// Closed-form EBD for a URA (sides `D_tx`, `D_tz`) and a ULA rotated by `theta`:
/// `π D_r √(D_tx² sin²θ + D_tz² cos²θ) / (λ b)`.
pub fn ebd_closed_form_ura_ula(
    rx_aperture: f64,
    tx_length_x: f64,
    tx_length_z: f64,
    wavelength: f64,
    theta: f64,
    aux_b: f64,
) -> f64 {
    PI * rx_aperture * projected_aperture(tx_length_x, tx_length_z, theta) / (wavelength * aux_b)
}

/// Extent of a URA seen along a ULA rotated by `theta` from +Z toward +X.
pub fn projected_aperture(length_x: f64, length_z: f64, theta: f64) -> f64 {
    (length_x.powi(2) * theta.sin().powi(2) + length_z.powi(2) * theta.cos().powi(2)).sqrt()
}

/// Inputs for [`benchmark_distances`]. `tx_aperture` is the one used by the
/// point-to-array forms (critical, UPD, effective Rayleigh, equi-power).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkParams {
    pub tx_aperture: f64,
    pub rx_aperture: f64,
    pub wavelength: f64,
    pub gamma_th: f64,
    pub phi: f64,
    pub element_diagonal: f64,
    pub n_antennas: usize,
    pub planar: bool,
    pub tx_spacing: f64,
    pub rx_spacing: f64,
    pub tx_angle: f64,
    pub rx_angle: f64,
    pub tau_g: f64,
    pub epsilon: f64,
}

impl Default for BenchmarkParams {
    fn default() -> Self {
        BenchmarkParams {
            tx_aperture: 0.5,
            rx_aperture: 0.1,
            wavelength: crate::geometry::wavelength_from_ghz(100.0),
            gamma_th: 0.9,
            phi: 0.0,
            element_diagonal: 0.0015 * std::f64::consts::SQRT_2,
            n_antennas: 64,
            planar: true,
            tx_spacing: 0.0015,
            rx_spacing: 0.1,
            tx_angle: 0.0,
            rx_angle: 0.0,
            tau_g: 1.0,
            epsilon: 4.0,
        }
    }
}

/// Every closed-form benchmark other than the EBD.
pub fn benchmark_distances(p: &BenchmarkParams) -> Vec<(BoundaryCriterion, f64)> {
    vec![
        (
            BoundaryCriterion::Rayleigh {
                point_to_array: true,
            },
            rayleigh(p.rx_aperture, p.tx_aperture, p.wavelength, true),
        ),
        (
            BoundaryCriterion::Rayleigh {
                point_to_array: false,
            },
            rayleigh(p.tx_aperture, p.rx_aperture, p.wavelength, false),
        ),
        (
            BoundaryCriterion::MimoArd,
            mimo_ard(p.tx_aperture, p.rx_aperture, p.wavelength),
        ),
        (
            BoundaryCriterion::Critical,
            critical_distance(p.tx_aperture),
        ),
        (
            BoundaryCriterion::UniformPower {
                gamma_th: p.gamma_th,
            },
            uniform_power_distance(p.gamma_th, p.tx_aperture),
        ),
        (
            BoundaryCriterion::EffectiveRayleigh { phi: p.phi },
            effective_rayleigh(p.phi, p.tx_aperture, p.wavelength),
        ),
        (
            BoundaryCriterion::Bjornson {
                element_diagonal: p.element_diagonal,
                n_antennas: p.n_antennas,
            },
            bjornson(p.element_diagonal, p.n_antennas),
        ),
        (
            BoundaryCriterion::EquiPower { planar: p.planar },
            equi_power(p.tx_aperture, p.planar),
        ),
        (
            BoundaryCriterion::EigenThreshold { tau_g: p.tau_g },
            eigen_threshold(
                p.tau_g,
                p.tx_spacing,
                p.rx_spacing,
                p.tx_angle,
                p.rx_angle,
                p.wavelength,
            ),
        ),
        (
            BoundaryCriterion::CapacityThreshold { epsilon: p.epsilon },
            capacity_threshold(
                p.epsilon,
                p.tx_aperture,
                p.rx_aperture,
                p.tx_angle,
                p.rx_angle,
                p.wavelength,
            ),
        ),
    ]
}
