//! Boundary distances against the maximum URA aperture.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fmt_f64, linspace};
use crate::boundary::{
    capacity_threshold, mimo_ard, projected_aperture, rayleigh, solve_numerical, BoundaryCriterion,
    BoundaryResult, Objective,
};
use crate::error::{Error, Result};
use crate::geometry::{wavelength_from_ghz, ArraySpec, LinkScene, SceneKind};

pub(super) const COLUMNS: [&str; 5] = [
    "aperture_m",
    "criterion",
    "distance_m",
    "converged",
    "residual",
];

pub(super) const NOTES: [&str; 3] = [
    "aperture_m is the nominal URA diagonal; the vertical side is sqrt(aperture^2 - horizontal^2) rounded down to half-wavelength spacing",
    "rayleigh is the point-to-array form on the realised URA diagonal",
    "mimo_ard and capacity_threshold use the URA extent projected on the ULA axis",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Params {
    pub frequency_ghz: f64,
    /// URA side along X; the vertical side follows from the diagonal.
    pub horizontal_length: f64,
    pub ula_elements: usize,
    pub ula_length: f64,
    /// ULA rotation in degrees.
    pub theta_deg: f64,
    pub aperture_min: f64,
    pub aperture_max: f64,
    pub aperture_points: usize,
    pub edof_thresholds: Vec<f64>,
    pub emd_db: Vec<f64>,
    pub capacity_epsilons: Vec<f64>,
}

impl Default for Fig2Params {
    fn default() -> Self {
        Fig2Params {
            frequency_ghz: 100.0,
            horizontal_length: 0.05,
            ula_elements: 2,
            ula_length: 0.1,
            theta_deg: 0.0,
            aperture_min: 0.1,
            aperture_max: 0.5,
            aperture_points: 20,
            edof_thresholds: vec![1.01, 1.05],
            emd_db: vec![-20.0, -10.0],
            capacity_epsilons: vec![4.0, 12.0],
        }
    }
}

impl Fig2Params {
    pub fn wavelength(&self) -> f64 {
        wavelength_from_ghz(self.frequency_ghz)
    }

    pub fn apertures(&self) -> Vec<f64> {
        linspace(self.aperture_min, self.aperture_max, self.aperture_points)
    }

    pub fn scene(&self, aperture: f64) -> Result<LinkScene> {
        ura_family_scene(
            self.horizontal_length,
            aperture,
            self.ula_elements,
            self.ula_length,
            self.theta_deg.to_radians(),
            self.wavelength(),
        )
    }
}

/// Half-wavelength URA with horizontal side `horizontal` and diagonal
/// `aperture`, facing a ULA at broadside distance 1 m.
pub fn ura_family_scene(
    horizontal: f64,
    aperture: f64,
    ula_elements: usize,
    ula_length: f64,
    theta: f64,
    wavelength: f64,
) -> Result<LinkScene> {
    if aperture.is_nan() || aperture <= horizontal {
        return Err(Error::InvalidGeometry(format!(
            "aperture {aperture} must exceed the horizontal side {horizontal}"
        )));
    }
    let vertical = (aperture * aperture - horizontal * horizontal).sqrt();
    let tx = ArraySpec::ura_half_wavelength(horizontal, vertical, wavelength)?;
    let rx = ArraySpec::ula(ula_elements, ula_length)?;
    LinkScene::new(tx, rx, 1.0, wavelength, SceneKind::UraToUla { theta })
}

/// Closed-form benchmarks of a URA-to-ULA scene, as used in the aperture sweeps.
pub(crate) fn benchmarks(scene: &LinkScene, epsilons: &[f64]) -> Vec<BoundaryResult> {
    let (lx, lz) = scene.tx.side_lengths();
    let theta = match scene.kind {
        SceneKind::UraToUla { theta } => theta,
        SceneKind::UlaToUla { .. } => 0.0,
    };
    let projected = projected_aperture(lx, lz, theta);
    let dr = scene.rx.aperture();
    let lambda = scene.wavelength;
    let mut out = vec![BoundaryResult::closed(
        BoundaryCriterion::Rayleigh {
            point_to_array: true,
        },
        rayleigh(0.0, scene.tx.aperture(), lambda, true),
    )];
    out.extend(epsilons.iter().map(|&epsilon| {
        BoundaryResult::closed(
            BoundaryCriterion::CapacityThreshold { epsilon },
            capacity_threshold(epsilon, projected, dr, 0.0, 0.0, lambda),
        )
        .with_meta("projected_aperture", projected)
    }));
    out.push(
        BoundaryResult::closed(BoundaryCriterion::MimoArd, mimo_ard(projected, dr, lambda))
            .with_meta("projected_aperture", projected),
    );
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub aperture: f64,
    pub result: BoundaryResult,
}

impl Fig2Row {
    pub(super) fn record(&self) -> Vec<String> {
        vec![
            fmt_f64(self.aperture),
            self.result.criterion.label(),
            fmt_f64(self.result.distance),
            self.result.converged.to_string(),
            fmt_f64(self.result.residual),
        ]
    }
}

/// One row per (aperture, criterion), apertures ascending.
pub fn run_fig2(p: &Fig2Params) -> Result<Vec<Fig2Row>> {
    let per_aperture: Vec<Vec<Fig2Row>> = p
        .apertures()
        .par_iter()
        .map(|&aperture| {
            let scene = p.scene(aperture)?;
            let mut results = Vec::new();
            for &threshold in &p.edof_thresholds {
                results.push(solve_numerical(
                    &scene,
                    Objective::EdofRatio { threshold },
                    None,
                )?);
            }
            for &db in &p.emd_db {
                results.push(solve_numerical(
                    &scene,
                    Objective::EigenRatio { db, m: 2 },
                    None,
                )?);
            }
            results.extend(benchmarks(&scene, &p.capacity_epsilons));
            Ok(results
                .into_iter()
                .map(|result| Fig2Row { aperture, result })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_aperture.into_iter().flatten().collect())
}
