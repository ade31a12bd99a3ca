//! Numerical boundary search: a coarse geometric scan finds the outermost
//! sign change of `objective(d) − threshold`, then log-space bisection refines it.

use serde::{Deserialize, Serialize};

use super::{BoundaryCriterion, BoundaryResult};
use crate::analysis::{capacity_ratio, edof_ratio_with, eigen_ratio_db, PlanarReference};
use crate::channel::{composite_channel, WavefrontModel};
use crate::error::{Error, Result};
use crate::geometry::LinkScene;

/// Quantity whose threshold crossing defines a boundary. Each objective is
/// above its threshold on the near-field side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "objective", rename_all = "snake_case")]
pub enum Objective {
    /// `EDoF(SWM) / EDoF(PWM)` against `threshold > 1`.
    EdofRatio { threshold: f64 },
    /// `10 log₁₀(λ_m / λ₁)` of the spherical Gram matrix against `db`.
    EigenRatio { db: f64, m: usize },
    /// `C_SWM / C_PWM` at linear `snr` against `factor > 1`.
    CapacityRatio { factor: f64, snr: f64 },
}

impl Objective {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Objective::EdofRatio { threshold } if !(threshold.is_finite() && threshold > 1.0) => {
                Err(Error::InvalidParameter(format!(
                    "EDoF-ratio threshold must exceed 1, got {threshold}"
                )))
            }
            Objective::EigenRatio { db, m } if !db.is_finite() || m < 2 => {
                Err(Error::InvalidParameter(format!(
                    "eigenratio needs finite dB and m ≥ 2, got {db} dB, m = {m}"
                )))
            }
            Objective::CapacityRatio { factor, snr }
                if !(factor.is_finite() && factor > 1.0 && snr.is_finite() && snr > 0.0) =>
            {
                Err(Error::InvalidParameter(format!(
                    "capacity ratio needs factor > 1 and snr > 0, got {factor}, {snr}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn criterion(&self) -> BoundaryCriterion {
        match *self {
            Objective::EdofRatio { threshold } => BoundaryCriterion::EbdNumerical { threshold },
            Objective::EigenRatio { db, m } => BoundaryCriterion::Emd {
                eigenratio_db: db,
                m,
            },
            Objective::CapacityRatio { factor, snr } => {
                BoundaryCriterion::CapacityRatioNumerical { factor, snr }
            }
        }
    }

    pub fn threshold(&self) -> f64 {
        match *self {
            Objective::EdofRatio { threshold } => threshold,
            Objective::EigenRatio { db, .. } => db,
            Objective::CapacityRatio { factor, .. } => factor,
        }
    }

    /// Objective value at distance `d`.
    pub fn value(&self, scene: &LinkScene, d: f64, reference: PlanarReference) -> Result<f64> {
        match *self {
            Objective::EdofRatio { .. } => edof_ratio_with(scene, d, reference),
            Objective::EigenRatio { m, .. } => {
                let h = composite_channel(&scene.with_distance(d)?, WavefrontModel::Spherical)?;
                eigen_ratio_db(&h, m)
            }
            Objective::CapacityRatio { snr, .. } => capacity_ratio(scene, d, snr, reference),
        }
    }

    /// `value − threshold`; positive on the near-field side.
    pub fn excess(&self, scene: &LinkScene, d: f64, reference: PlanarReference) -> Result<f64> {
        Ok(self.value(scene, d, reference)? - self.threshold())
    }

    fn default_residual_tol(&self) -> f64 {
        match self {
            Objective::EigenRatio { .. } => 0.01,
            _ => 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Ratio between consecutive coarse-scan distances.
    pub scan_factor: f64,
    /// Relative bracket width at which bisection may stop.
    pub rel_tol: f64,
    /// Objective residual required for `converged`; `None` uses 1e-6
    /// (EDoF, capacity) or 0.01 dB (eigenratio).
    pub residual_tol: Option<f64>,
    pub max_bisections: usize,
    pub reference: PlanarReference,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            scan_factor: 1.2,
            rel_tol: 1e-4,
            residual_tol: None,
            max_bisections: 200,
            reference: PlanarReference::LineOfSight,
        }
    }
}

/// From the summed aperture up to 10⁴ array-to-array Rayleigh distances.
pub fn auto_bracket(scene: &LinkScene) -> (f64, f64) {
    let lo = scene.tx.aperture() + scene.rx.aperture();
    (lo, 1e4 * scene.rayleigh_distance().max(lo))
}

pub fn solve_numerical(
    scene: &LinkScene,
    objective: Objective,
    bracket: Option<(f64, f64)>,
) -> Result<BoundaryResult> {
    solve_numerical_with(scene, objective, bracket, &SolverOptions::default())
}

/// Largest distance at which `objective` crosses its threshold.
///
/// If the objective stays below the threshold across the bracket the result
/// has distance 0 and `converged = false`; if it is still above at the upper
/// end, the upper end is returned unconverged.
pub fn solve_numerical_with(
    scene: &LinkScene,
    objective: Objective,
    bracket: Option<(f64, f64)>,
    options: &SolverOptions,
) -> Result<BoundaryResult> {
    objective.validate()?;
    scene.validate()?;
    if !(options.scan_factor.is_finite() && options.scan_factor > 1.0) {
        return Err(Error::InvalidParameter("scan factor must exceed 1".into()));
    }
    let (lo, hi) = bracket.unwrap_or_else(|| auto_bracket(scene));
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    let f = |d: f64| objective.excess(scene, d, options.reference);
    let tol = options
        .residual_tol
        .unwrap_or_else(|| objective.default_residual_tol());

    let mut grid = Vec::new();
    let mut d = lo;
    while d < hi {
        grid.push(d);
        d *= options.scan_factor;
    }
    grid.push(hi);

    let mut samples = Vec::with_capacity(grid.len());
    let mut skipped = 0usize;
    for &d in &grid {
        match f(d) {
            Ok(v) => samples.push((d, v)),
            // Elements or scatterers can collide at very short range; such
            // points carry no boundary information.
            Err(Error::CoincidentElements { .. }) | Err(Error::ScattererCoincident(_)) => {
                skipped += 1
            }
            Err(e) => return Err(e),
        }
    }
    let evaluations = samples.len();
    let crossings: Vec<usize> = (0..samples.len().saturating_sub(1))
        .filter(|&i| samples[i].1 > 0.0 && samples[i + 1].1 <= 0.0)
        .collect();

    let base = |distance: f64, converged: bool, residual: f64| {
        BoundaryResult {
            criterion: objective.criterion(),
            distance,
            converged,
            residual,
            metadata: Default::default(),
        }
        .with_meta("bracket_lo", lo)
        .with_meta("bracket_hi", hi)
        .with_meta("planar_reference", options.reference.label())
        .with_meta("skipped_points", skipped)
    };

    let Some(&(d_last, v_last)) = samples.last() else {
        return Ok(base(0.0, false, f64::NAN).with_meta("no_crossing", true));
    };
    if v_last > 0.0 {
        return Ok(base(d_last, false, v_last.abs()).with_meta("above_threshold_at_upper", true));
    }
    let Some(&k) = crossings.last() else {
        let max = samples
            .iter()
            .map(|s| s.1)
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(base(0.0, false, max.abs()).with_meta("no_crossing", true));
    };

    let (mut a, mut b) = (samples[k].0, samples[k + 1].0);
    let mut best = (b, samples[k + 1].1);
    let mut converged = false;
    let mut steps = 0;
    while steps < options.max_bisections {
        steps += 1;
        let mid = (a * b).sqrt();
        let v = f(mid)?;
        if v.abs() < best.1.abs() || (b / a - 1.0) <= options.rel_tol {
            best = (mid, v);
        }
        if v > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b / a - 1.0 <= options.rel_tol && best.1.abs() < tol {
            converged = true;
            break;
        }
        if b - a <= f64::EPSILON * b {
            break;
        }
    }

    let mut result = base(best.0, converged, best.1.abs())
        .with_meta("evaluations", evaluations + steps)
        .with_meta("crossings", crossings.len());
    if crossings.len() > 1 {
        let all: Vec<String> = crossings
            .iter()
            .map(|&i| format!("{:.6}", samples[i].0))
            .collect();
        result = result
            .with_meta("non_monotone", true)
            .with_meta("crossing_brackets", all.join(";"));
    }
    Ok(result)
}
