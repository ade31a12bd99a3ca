//! Numerical EBD over ULA rotation and URA aspect ratio at fixed diagonal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fmt_f64, linspace};
use crate::boundary::{solve_numerical, BoundaryResult, Objective};
use crate::error::{Error, Result};
use crate::geometry::{wavelength_from_ghz, ArraySpec, LinkScene, SceneKind};

pub(super) const COLUMNS: [&str; 6] = [
    "theta_deg",
    "vertical_m",
    "horizontal_m",
    "distance_m",
    "converged",
    "residual",
];

pub(super) const NOTES: [&str; 1] =
    ["horizontal_m = sqrt(aperture^2 - vertical_m^2); element counts fixed"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Params {
    pub frequency_ghz: f64,
    /// URA diagonal.
    pub aperture: f64,
    pub ura_elements_x: usize,
    pub ura_elements_z: usize,
    pub ula_elements: usize,
    pub ula_length: f64,
    pub threshold: f64,
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub theta_points: usize,
    pub vertical_min: f64,
    pub vertical_max: f64,
    pub vertical_points: usize,
}

impl Default for Fig3Params {
    fn default() -> Self {
        Fig3Params {
            frequency_ghz: 100.0,
            aperture: 0.5,
            ura_elements_x: 8,
            ura_elements_z: 8,
            ula_elements: 2,
            ula_length: 0.1,
            threshold: 1.01,
            theta_min_deg: 0.0,
            theta_max_deg: 90.0,
            theta_points: 19,
            vertical_min: 0.05,
            vertical_max: 0.495,
            vertical_points: 19,
        }
    }
}

impl Fig3Params {
    pub fn scene(&self, theta_deg: f64, vertical: f64) -> Result<LinkScene> {
        if !(vertical > 0.0 && vertical < self.aperture) {
            return Err(Error::InvalidGeometry(format!(
                "vertical length {vertical} must lie in (0, {})",
                self.aperture
            )));
        }
        let horizontal = (self.aperture.powi(2) - vertical.powi(2)).sqrt();
        let tx = ArraySpec::ura(
            self.ura_elements_x,
            self.ura_elements_z,
            horizontal,
            vertical,
        )?;
        let rx = ArraySpec::ula(self.ula_elements, self.ula_length)?;
        LinkScene::new(
            tx,
            rx,
            1.0,
            wavelength_from_ghz(self.frequency_ghz),
            SceneKind::UraToUla {
                theta: theta_deg.to_radians(),
            },
        )
    }

    /// EBD across θ at one vertical length.
    pub fn theta_sweep(&self, vertical: f64) -> Result<Vec<Fig3Row>> {
        linspace(self.theta_min_deg, self.theta_max_deg, self.theta_points)
            .par_iter()
            .map(|&t| self.cell(t, vertical))
            .collect()
    }

    fn cell(&self, theta_deg: f64, vertical: f64) -> Result<Fig3Row> {
        let scene = self.scene(theta_deg, vertical)?;
        let result = solve_numerical(
            &scene,
            Objective::EdofRatio {
                threshold: self.threshold,
            },
            None,
        )?;
        Ok(Fig3Row {
            theta_deg,
            vertical,
            horizontal: scene.tx.side_lengths().0,
            result,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub theta_deg: f64,
    pub vertical: f64,
    pub horizontal: f64,
    pub result: BoundaryResult,
}

impl Fig3Row {
    pub(super) fn record(&self) -> Vec<String> {
        vec![
            fmt_f64(self.theta_deg),
            fmt_f64(self.vertical),
            fmt_f64(self.horizontal),
            fmt_f64(self.result.distance),
            self.result.converged.to_string(),
            fmt_f64(self.result.residual),
        ]
    }
}

/// Rows ordered by vertical length, then θ.
pub fn run_fig3(p: &Fig3Params) -> Result<Vec<Fig3Row>> {
    let verticals = linspace(p.vertical_min, p.vertical_max, p.vertical_points);
    let thetas = linspace(p.theta_min_deg, p.theta_max_deg, p.theta_points);
    let cells: Vec<(f64, f64)> = verticals
        .iter()
        .flat_map(|&v| thetas.iter().map(move |&t| (t, v)))
        .collect();
    cells.par_iter().map(|&(t, v)| p.cell(t, v)).collect()
}
