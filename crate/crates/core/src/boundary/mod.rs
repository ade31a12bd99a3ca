//! Near-field / far-field boundary distances.
//!
//! [`closed_form`] evaluates the tabulated expressions, [`solver`] locates a
//! boundary numerically as the outermost threshold crossing of an objective,
//! and [`calibrate`] fits the auxiliary constant of the closed-form EBD to the
//! numerical solver.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub mod calibrate;
pub mod closed_form;
pub mod solver;

pub use calibrate::{calibrate_aux, closed_form_ebd, fit_aux, AuxFit};
pub use closed_form::{
    benchmark_distances, bjornson, capacity_threshold, critical_distance, ebd_closed_form_ula_ula,
    ebd_closed_form_ura_ula, effective_rayleigh, eigen_threshold, equi_power, mimo_ard,
    projected_aperture, rayleigh, uniform_power_distance, BenchmarkParams,
};
pub use solver::{auto_bracket, solve_numerical, solve_numerical_with, Objective, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "criterion", rename_all = "snake_case")]
pub enum BoundaryCriterion {
    Rayleigh {
        point_to_array: bool,
    },
    MimoArd,
    Critical,
    UniformPower {
        gamma_th: f64,
    },
    EffectiveRayleigh {
        phi: f64,
    },
    Bjornson {
        element_diagonal: f64,
        n_antennas: usize,
    },
    EquiPower {
        planar: bool,
    },
    EigenThreshold {
        tau_g: f64,
    },
    Emd {
        eigenratio_db: f64,
        m: usize,
    },
    CapacityThreshold {
        epsilon: f64,
    },
    CapacityRatioNumerical {
        factor: f64,
        snr: f64,
    },
    EbdNumerical {
        threshold: f64,
    },
    EbdClosedForm {
        aux: f64,
    },
}

impl BoundaryCriterion {
    /// Short stable name used in CSV output.
    pub fn label(&self) -> String {
        match *self {
            BoundaryCriterion::Rayleigh {
                point_to_array: true,
            } => "rayleigh".into(),
            BoundaryCriterion::Rayleigh {
                point_to_array: false,
            } => "rayleigh_array".into(),
            BoundaryCriterion::MimoArd => "mimo_ard".into(),
            BoundaryCriterion::Critical => "critical".into(),
            BoundaryCriterion::UniformPower { gamma_th } => format!("uniform_power_{gamma_th}"),
            BoundaryCriterion::EffectiveRayleigh { .. } => "effective_rayleigh".into(),
            BoundaryCriterion::Bjornson { .. } => "bjornson".into(),
            BoundaryCriterion::EquiPower { planar: false } => "equi_power_ula".into(),
            BoundaryCriterion::EquiPower { planar: true } => "equi_power_upa".into(),
            BoundaryCriterion::EigenThreshold { tau_g } => format!("eigen_threshold_{tau_g}"),
            BoundaryCriterion::Emd { eigenratio_db, .. } => format!("emd_{eigenratio_db}db"),
            BoundaryCriterion::CapacityThreshold { epsilon } => {
                format!("capacity_threshold_eps{epsilon}")
            }
            BoundaryCriterion::CapacityRatioNumerical { factor, .. } => {
                format!("capacity_ratio_{factor}")
            }
            BoundaryCriterion::EbdNumerical { threshold } => format!("ebd_{threshold}"),
            BoundaryCriterion::EbdClosedForm { aux } => format!("ebd_closed_form_{aux}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResult {
    pub criterion: BoundaryCriterion,
    pub distance: f64,
    pub converged: bool,
    pub residual: f64,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl BoundaryResult {
    /// Result of a closed-form evaluation; exact by construction.
    pub fn closed(criterion: BoundaryCriterion, distance: f64) -> Self {
        let mut metadata = BTreeMap::new();
        if distance == 0.0 {
            metadata.insert("degenerate".into(), "true".into());
        }
        BoundaryResult {
            criterion,
            distance,
            converged: true,
            residual: 0.0,
            metadata,
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.into(), value.to_string());
        self
    }
}
