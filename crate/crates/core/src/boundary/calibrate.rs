//! Least-squares fit of the auxiliary constant in the closed-form EBD.
//!
//! Both closed forms read `K / aux`, where `K` is the expression evaluated
//! with `aux = 1`. Minimising `Σ (K_i / aux − y_i)²` over `u = 1 / aux` is
//! linear, giving `u = Σ K_i y_i / Σ K_i²`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closed_form::{ebd_closed_form_ula_ula, ebd_closed_form_ura_ula};
use super::solver::{solve_numerical, Objective};
use crate::error::{Error, Result};
use crate::geometry::{ArraySpec, LinkScene, SceneKind};

/// Fits whose worst point deviates by more than this are rejected.
pub const MAX_FIT_DEVIATION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxFit {
    pub aux: f64,
    /// `max_i |K_i / aux − y_i| / y_i`.
    pub max_relative_deviation: f64,
    pub kernels: Vec<f64>,
    pub targets: Vec<f64>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl AuxFit {
    /// Closed-form prediction at each sweep point.
    pub fn predictions(&self) -> Vec<f64> {
        self.kernels.iter().map(|k| k / self.aux).collect()
    }
}

/// Fit `aux` to `targets ≈ kernels / aux`.
pub fn fit_aux(kernels: &[f64], targets: &[f64]) -> Result<AuxFit> {
    if kernels.len() != targets.len() || kernels.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 matching points, got {} kernels and {} targets",
            kernels.len(),
            targets.len()
        )));
    }
    if kernels
        .iter()
        .chain(targets)
        .any(|v| !(v.is_finite() && *v > 0.0))
    {
        return Err(Error::InvalidParameter(
            "kernels and targets must be positive".into(),
        ));
    }
    let kk: f64 = kernels.iter().map(|k| k * k).sum();
    let ky: f64 = kernels.iter().zip(targets).map(|(k, y)| k * y).sum();
    let aux = kk / ky;
    let max_relative_deviation = kernels
        .iter()
        .zip(targets)
        .map(|(k, y)| (k / aux - y).abs() / y)
        .fold(0.0, f64::max);
    if max_relative_deviation > MAX_FIT_DEVIATION {
        return Err(Error::FitDiverged {
            aux,
            max_relative_deviation,
        });
    }
    let mut metadata = BTreeMap::new();
    metadata.insert("points".into(), kernels.len().to_string());
    metadata.insert(
        "max_relative_deviation".into(),
        max_relative_deviation.to_string(),
    );
    Ok(AuxFit {
        aux,
        max_relative_deviation,
        kernels: kernels.to_vec(),
        targets: targets.to_vec(),
        metadata,
    })
}

/// Closed-form EBD of `scene` for constant `aux` (`a` for ULA transmitters,
/// `b` for URA transmitters), using the realised array lengths.
pub fn closed_form_ebd(scene: &LinkScene, aux: f64) -> Result<f64> {
    if !(aux.is_finite() && aux > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "aux must be positive, got {aux}"
        )));
    }
    let dr = scene.rx.aperture();
    match (&scene.tx, scene.kind) {
        (ArraySpec::Ula { length, .. }, SceneKind::UlaToUla { alpha, beta }) => Ok(
            ebd_closed_form_ula_ula(*length, dr, scene.wavelength, alpha, beta, aux),
        ),
        (
            ArraySpec::Ura {
                length_x, length_z, ..
            },
            SceneKind::UraToUla { theta },
        ) => Ok(ebd_closed_form_ura_ula(
            dr,
            *length_x,
            *length_z,
            scene.wavelength,
            theta,
            aux,
        )),
        _ => Err(Error::InvalidGeometry(
            "closed-form EBD needs a ULA-to-ULA or URA-to-ULA scene".into(),
        )),
    }
}

/// Fit `aux` so the closed form tracks the numerical EBD at `threshold`
/// across `family(aperture)` for each sweep aperture.
pub fn calibrate_aux<F>(family: F, threshold: f64, apertures: &[f64]) -> Result<AuxFit>
where
    F: Fn(f64) -> Result<LinkScene> + Sync,
{
    if apertures.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "calibration needs at least 3 apertures, got {}",
            apertures.len()
        )));
    }
    let points: Vec<(f64, f64, (usize, usize))> = apertures
        .par_iter()
        .map(|&a| {
            let scene = family(a)?;
            let kernel = closed_form_ebd(&scene, 1.0)?;
            let r = solve_numerical(&scene, Objective::EdofRatio { threshold }, None)?;
            if r.distance <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "no EBD crossing at aperture {a}"
                )));
            }
            Ok((
                kernel,
                r.distance,
                (scene.tx.element_count(), scene.rx.element_count()),
            ))
        })
        .collect::<Result<_>>()?;
    let kernels: Vec<f64> = points.iter().map(|p| p.0).collect();
    let targets: Vec<f64> = points.iter().map(|p| p.1).collect();
    let counts_fixed = points.windows(2).all(|w| w[0].2 == w[1].2);
    let mut fit = fit_aux(&kernels, &targets)?;
    fit.metadata
        .insert("threshold".into(), threshold.to_string());
    fit.metadata
        .insert("counts_fixed".into(), counts_fixed.to_string());
    Ok(fit)
}
