//! Capacity estimation error of the planar model at each boundary distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fig2::{benchmarks, ura_family_scene};
use super::{fmt_f64, linspace};
use crate::analysis::{capacity_error, db_to_linear};
use crate::boundary::{solve_numerical, BoundaryResult, Objective};
use crate::error::Result;
use crate::geometry::{wavelength_from_ghz, LinkScene};

pub(super) const COLUMNS: [&str; 6] = [
    "snr_db",
    "aperture_m",
    "criterion",
    "distance_m",
    "converged",
    "capacity_error",
];

pub(super) const NOTES: [&str; 2] = [
    "capacity_error = |C_swm - C_pwm| / C_swm with both channels normalised by the centre free-space gain",
    "capacity_error is NaN where a boundary distance is zero",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig5Params {
    pub frequency_ghz: f64,
    pub horizontal_length: f64,
    pub ula_elements: usize,
    pub ula_length: f64,
    pub threshold: f64,
    pub emd_db: f64,
    pub capacity_epsilon: f64,
    /// URA diagonal for the SNR sweep.
    pub sweep_aperture: f64,
    pub snr_db: Vec<f64>,
    /// SNR for the aperture sweep.
    pub sweep_snr_db: f64,
    pub aperture_min: f64,
    pub aperture_max: f64,
    pub aperture_points: usize,
}

impl Default for Fig5Params {
    fn default() -> Self {
        Fig5Params {
            frequency_ghz: 100.0,
            horizontal_length: 0.05,
            ula_elements: 2,
            ula_length: 0.1,
            threshold: 1.01,
            emd_db: -20.0,
            capacity_epsilon: 12.0,
            sweep_aperture: 0.3,
            snr_db: linspace(0.0, 30.0, 7),
            sweep_snr_db: 20.0,
            aperture_min: 0.1,
            aperture_max: 0.5,
            aperture_points: 9,
        }
    }
}

impl Fig5Params {
    pub fn scene(&self, aperture: f64) -> Result<LinkScene> {
        ura_family_scene(
            self.horizontal_length,
            aperture,
            self.ula_elements,
            self.ula_length,
            0.0,
            wavelength_from_ghz(self.frequency_ghz),
        )
    }

    /// EBD, EMD and the closed-form benchmarks for one aperture.
    pub fn boundaries(&self, scene: &LinkScene) -> Result<Vec<BoundaryResult>> {
        let mut out = vec![
            solve_numerical(
                scene,
                Objective::EdofRatio {
                    threshold: self.threshold,
                },
                None,
            )?,
            solve_numerical(
                scene,
                Objective::EigenRatio {
                    db: self.emd_db,
                    m: 2,
                },
                None,
            )?,
        ];
        out.extend(benchmarks(scene, &[self.capacity_epsilon]));
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig5Row {
    pub snr_db: f64,
    pub aperture: f64,
    pub boundary: BoundaryResult,
    pub capacity_error: f64,
}

impl Fig5Row {
    pub(super) fn record(&self) -> Vec<String> {
        vec![
            fmt_f64(self.snr_db),
            fmt_f64(self.aperture),
            self.boundary.criterion.label(),
            fmt_f64(self.boundary.distance),
            self.boundary.converged.to_string(),
            fmt_f64(self.capacity_error),
        ]
    }
}

fn rows_for(
    scene: &LinkScene,
    aperture: f64,
    snr_db: f64,
    boundaries: &[BoundaryResult],
) -> Result<Vec<Fig5Row>> {
    boundaries
        .iter()
        .map(|b| {
            let capacity_error = if b.distance > 0.0 {
                capacity_error(scene, b.distance, db_to_linear(snr_db))?
            } else {
                f64::NAN
            };
            Ok(Fig5Row {
                snr_db,
                aperture,
                boundary: b.clone(),
                capacity_error,
            })
        })
        .collect()
}

/// Error against SNR at `sweep_aperture`; rows ordered by SNR, then criterion.
pub fn run_fig5a(p: &Fig5Params) -> Result<Vec<Fig5Row>> {
    let scene = p.scene(p.sweep_aperture)?;
    let boundaries = p.boundaries(&scene)?;
    let per_snr: Vec<Vec<Fig5Row>> = p
        .snr_db
        .par_iter()
        .map(|&snr| rows_for(&scene, p.sweep_aperture, snr, &boundaries))
        .collect::<Result<_>>()?;
    Ok(per_snr.into_iter().flatten().collect())
}

/// Error against aperture at `sweep_snr_db`; rows ordered by aperture, then criterion.
pub fn run_fig5b(p: &Fig5Params) -> Result<Vec<Fig5Row>> {
    let per_aperture: Vec<Vec<Fig5Row>> =
        linspace(p.aperture_min, p.aperture_max, p.aperture_points)
            .par_iter()
            .map(|&a| {
                let scene = p.scene(a)?;
                let boundaries = p.boundaries(&scene)?;
                rows_for(&scene, a, p.sweep_snr_db, &boundaries)
            })
            .collect::<Result<_>>()?;
    Ok(per_aperture.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_are_fractions_and_grow_with_snr() {
        let p = Fig5Params {
            snr_db: vec![0.0, 30.0],
            ..Default::default()
        };
        let rows = run_fig5a(&p).unwrap();
        let n = rows.len() / 2;
        for (lo, hi) in rows[..n].iter().zip(&rows[n..]) {
            assert_eq!(lo.boundary.criterion, hi.boundary.criterion);
            assert!((0.0..1.0).contains(&lo.capacity_error));
            assert!(hi.capacity_error > lo.capacity_error);
        }
    }
}
