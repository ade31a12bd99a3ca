//! Numerical EBD against the number of scatterers between two ULAs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fmt_f64;
use crate::boundary::{solve_numerical, Objective};
use crate::channel::{PhaseModel, PowerCoupling, ScatterBox, ScattererScaling, ScattererSet};
use crate::error::{Error, Result};
use crate::geometry::{wavelength_from_ghz, ArraySpec, LinkScene, SceneKind};

pub(super) const COLUMNS: [&str; 8] = [
    "mode",
    "scatterers",
    "mean_ebd_m",
    "std_ebd_m",
    "min_ebd_m",
    "max_ebd_m",
    "seeds",
    "all_converged",
];

pub(super) const NOTES: [&str; 4] = [
    "scatterers drawn uniformly in a box spanning the middle box_fraction of a reference_distance link, cross-section box_width_x x box_width_z, guard radius guard_wavelengths",
    "as the searched distance changes, scatterer coordinates along the link stretch proportionally while the cross-section stays fixed",
    "counts are nested: the first k scatterers of a seed are shared by every count >= k",
    "fixed_ratio uses random per-pair phases with scattered power normalised to fixed_ratio_rho times the LoS power at reference_distance",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fig4Mode {
    RandomPerPair,
    PerScatterer,
    FixedRatio,
}

impl Fig4Mode {
    pub const ALL: [Fig4Mode; 3] = [
        Fig4Mode::RandomPerPair,
        Fig4Mode::PerScatterer,
        Fig4Mode::FixedRatio,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Fig4Mode::RandomPerPair => "random_per_pair",
            Fig4Mode::PerScatterer => "per_scatterer",
            Fig4Mode::FixedRatio => "fixed_ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig4Params {
    pub frequency_ghz: f64,
    pub tx_elements: usize,
    pub tx_length: f64,
    pub rx_elements: usize,
    pub rx_length: f64,
    pub threshold: f64,
    pub counts: Vec<usize>,
    pub seeds: usize,
    pub modes: Vec<Fig4Mode>,
    pub reference_distance: f64,
    pub box_fraction: f64,
    pub box_width_x: f64,
    pub box_width_z: f64,
    pub guard_wavelengths: f64,
    pub fixed_ratio_rho: f64,
}

impl Default for Fig4Params {
    fn default() -> Self {
        Fig4Params {
            frequency_ghz: 100.0,
            tx_elements: 16,
            tx_length: 2.0,
            rx_elements: 8,
            rx_length: 0.1,
            threshold: 1.05,
            counts: vec![0, 1, 2, 4, 8, 16],
            seeds: 20,
            modes: Fig4Mode::ALL.to_vec(),
            reference_distance: 20.0,
            box_fraction: 0.8,
            box_width_x: 2.0,
            box_width_z: 2.0,
            guard_wavelengths: 10.0,
            fixed_ratio_rho: 0.1,
        }
    }
}

impl Fig4Params {
    pub fn los_scene(&self) -> Result<LinkScene> {
        LinkScene::new(
            ArraySpec::ula(self.tx_elements, self.tx_length)?,
            ArraySpec::ula(self.rx_elements, self.rx_length)?,
            self.reference_distance,
            wavelength_from_ghz(self.frequency_ghz),
            SceneKind::broadside(),
        )
    }

    /// Scene with the first `count` scatterers of draw `seed` under `mode`.
    pub fn scene(&self, mode: Fig4Mode, count: usize, seed: u64) -> Result<LinkScene> {
        let los = self.los_scene()?;
        if count == 0 {
            return Ok(los);
        }
        let max = self
            .counts
            .iter()
            .copied()
            .max()
            .unwrap_or(count)
            .max(count);
        let region = ScatterBox::between_arrays(
            self.reference_distance,
            self.box_fraction,
            self.box_width_x,
            self.box_width_z,
        );
        let mut elements = los.tx_positions()?;
        elements.extend(los.rx_positions()?);
        let guard = self.guard_wavelengths * los.wavelength;
        let all = ScattererSet::random_in_box(max, region, guard, &elements, None, seed)?;
        let (phase_model, power_coupling) = match mode {
            Fig4Mode::RandomPerPair => (PhaseModel::RandomPerPair, PowerCoupling::FreeSpaceProduct),
            Fig4Mode::PerScatterer => (PhaseModel::PerScatterer, PowerCoupling::FreeSpaceProduct),
            Fig4Mode::FixedRatio => (
                PhaseModel::RandomPerPair,
                PowerCoupling::FixedRatioAt {
                    rho: self.fixed_ratio_rho,
                    reference_distance: self.reference_distance,
                },
            ),
        };
        let set = ScattererSet::new(all[..count].to_vec(), phase_model, power_coupling, seed)?
            .with_scaling(ScattererScaling::AlongLink {
                reference_distance: self.reference_distance,
            });
        Ok(los.with_scatterers(set))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig4Row {
    pub mode: Fig4Mode,
    pub scatterers: usize,
    /// Numerical EBD per seed, in seed order.
    pub distances: Vec<f64>,
    pub all_converged: bool,
}

impl Fig4Row {
    pub fn mean(&self) -> f64 {
        self.distances.iter().sum::<f64>() / self.distances.len() as f64
    }

    /// Sample standard deviation; 0 for a single seed.
    pub fn std(&self) -> f64 {
        let n = self.distances.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        (self.distances.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    }

    pub(super) fn record(&self) -> Vec<String> {
        let min = self.distances.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self
            .distances
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        vec![
            self.mode.label().into(),
            self.scatterers.to_string(),
            fmt_f64(self.mean()),
            fmt_f64(self.std()),
            fmt_f64(min),
            fmt_f64(max),
            self.distances.len().to_string(),
            self.all_converged.to_string(),
        ]
    }
}

/// One row per (mode, count); seeds run `base_seed, base_seed + 1, …`.
pub fn run_fig4(p: &Fig4Params, base_seed: u64) -> Result<Vec<Fig4Row>> {
    if p.seeds == 0 {
        return Err(Error::InvalidParameter(
            "fig4 needs at least one seed".into(),
        ));
    }
    let objective = Objective::EdofRatio {
        threshold: p.threshold,
    };
    let cells: Vec<(Fig4Mode, usize, u64)> = p
        .modes
        .iter()
        .flat_map(|&m| {
            p.counts.iter().flat_map(move |&c| {
                (0..p.seeds as u64).map(move |i| (m, c, base_seed.wrapping_add(i)))
            })
        })
        .collect();
    let results: Vec<(f64, bool)> = cells
        .par_iter()
        .map(|&(mode, count, seed)| {
            let r = solve_numerical(&p.scene(mode, count, seed)?, objective, None)?;
            Ok((r.distance, r.converged))
        })
        .collect::<Result<_>>()?;
    Ok(cells
        .chunks(p.seeds)
        .zip(results.chunks(p.seeds))
        .map(|(c, r)| Fig4Row {
            mode: c[0].0,
            scatterers: c[0].1,
            distances: r.iter().map(|x| x.0).collect(),
            all_converged: r.iter().all(|x| x.1),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scatterers_match_line_of_sight() {
        let p = Fig4Params {
            counts: vec![0],
            seeds: 2,
            ..Default::default()
        };
        let rows = run_fig4(&p, 7).unwrap();
        assert_eq!(rows.len(), 3);
        let los = solve_numerical(
            &p.los_scene().unwrap(),
            Objective::EdofRatio { threshold: 1.05 },
            None,
        )
        .unwrap()
        .distance;
        for r in &rows {
            assert!(r.distances.iter().all(|&d| d == los));
            assert_eq!(r.std(), 0.0);
        }
    }

    #[test]
    fn counts_are_nested() {
        let p = Fig4Params::default();
        let a = p.scene(Fig4Mode::RandomPerPair, 2, 3).unwrap();
        let b = p.scene(Fig4Mode::RandomPerPair, 8, 3).unwrap();
        let (sa, sb) = (a.scatterers.unwrap(), b.scatterers.unwrap());
        assert_eq!(sa.scatterers[..], sb.scatterers[..2]);
    }
}
