//! Narrowband channel matrices under the spherical and planar wavefront models.
//!
//! Every entry is a free-space element-to-element gain `λ / (4π d) e^{-i 2π d / λ}`.
//! Rows index receive elements, columns index transmit elements.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LinkScene, Point3};

/// Element pairs closer than this are treated as coincident.
/// Path length and amplitude distance of one scattered leg.
type Leg = (f64, f64);

const COINCIDENCE_TOL: f64 = 1e-12;

/// Domain separator between the placement stream and the phase streams.
const PHASE_SEED_DOMAIN: u64 = 0x5ca7_7e12_9a5e_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WavefrontModel {
    #[serde(rename = "swm")]
    Spherical,
    #[serde(rename = "pwm")]
    Planar,
}

impl WavefrontModel {
    pub fn label(self) -> &'static str {
        match self {
            WavefrontModel::Spherical => "swm",
            WavefrontModel::Planar => "pwm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: DMatrix<Complex64>,
    wavelength: f64,
    model: WavefrontModel,
    reference_gain: f64,
}

impl ChannelMatrix {
    /// Wraps raw entries. `reference_gain` is the free-space gain at the
    /// centre-to-centre distance used to normalise capacity.
    pub fn from_entries(
        entries: DMatrix<Complex64>,
        wavelength: f64,
        model: WavefrontModel,
        reference_gain: f64,
    ) -> Result<Self> {
        if entries
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::InvalidParameter("non-finite channel entry".into()));
        }
        if !(reference_gain.is_finite() && reference_gain > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reference gain must be positive, got {reference_gain}"
            )));
        }
        Ok(Self {
            entries,
            wavelength,
            model,
            reference_gain,
        })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn model(&self) -> WavefrontModel {
        self.model
    }

    pub fn reference_gain(&self) -> f64 {
        self.reference_gain
    }

    pub fn rx_count(&self) -> usize {
        self.entries.nrows()
    }

    pub fn tx_count(&self) -> usize {
        self.entries.ncols()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// One line per receive element, each entry written as two fields `re,im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let header: Vec<String> = (0..self.tx_count())
            .flat_map(|n| [format!("tx{n}_re"), format!("tx{n}_im")])
            .collect();
        wtr.write_record(&header)?;
        for m in 0..self.rx_count() {
            let row: Vec<String> = self
                .entries
                .row(m)
                .iter()
                .flat_map(|z| [z.re.to_string(), z.im.to_string()])
                .collect();
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    fn add_assign(&mut self, other: &DMatrix<Complex64>) {
        self.entries += other;
    }
}

pub fn free_space_gain(distance: f64, wavelength: f64) -> f64 {
    wavelength / (4.0 * PI * distance)
}

fn propagation(amplitude: f64, path: f64, wavenumber: f64) -> Complex64 {
    Complex64::from_polar(amplitude, -wavenumber * path)
}

pub fn los_channel(scene: &LinkScene, model: WavefrontModel) -> Result<ChannelMatrix> {
    match model {
        WavefrontModel::Spherical => los_channel_swm(scene),
        WavefrontModel::Planar => los_channel_pwm(scene),
    }
}

pub fn los_channel_swm(scene: &LinkScene) -> Result<ChannelMatrix> {
    scene.validate()?;
    let tx = scene.tx_positions()?;
    let rx = scene.rx_positions()?;
    let lambda = scene.wavelength;
    let k = 2.0 * PI / lambda;
    let mut h = DMatrix::<Complex64>::zeros(rx.len(), tx.len());
    for (m, r) in rx.iter().enumerate() {
        for (n, t) in tx.iter().enumerate() {
            let d = r.distance(*t);
            if d < COINCIDENCE_TOL {
                return Err(Error::CoincidentElements { rx: m, tx: n });
            }
            h[(m, n)] = propagation(free_space_gain(d, lambda), d, k);
        }
    }
    ChannelMatrix::from_entries(
        h,
        lambda,
        WavefrontModel::Spherical,
        free_space_gain(scene.distance, lambda),
    )
}

/// Rank-one planar channel: one amplitude at the centre distance and a phase
/// that is linear in the element offsets.
pub fn los_channel_pwm(scene: &LinkScene) -> Result<ChannelMatrix> {
    scene.validate()?;
    let tx = scene.tx_positions()?;
    let rx = scene.rx_positions()?;
    let lambda = scene.wavelength;
    let k = 2.0 * PI / lambda;
    let (ct, cr) = (scene.tx_center(), scene.rx_center());
    let d0 = cr.distance(ct);
    let u = (cr - ct) * (1.0 / d0);
    let g0 = free_space_gain(d0, lambda);

    for (m, r) in rx.iter().enumerate() {
        if let Some(n) = tx.iter().position(|t| r.distance(*t) < COINCIDENCE_TOL) {
            return Err(Error::CoincidentElements { rx: m, tx: n });
        }
    }
    let rx_phase: Vec<Complex64> = rx
        .iter()
        .map(|r| propagation(1.0, u.dot(*r - cr), k))
        .collect();
    let tx_phase: Vec<Complex64> = tx
        .iter()
        .map(|t| propagation(1.0, -u.dot(*t - ct), k))
        .collect();
    let centre = propagation(g0, d0, k);
    let h = DMatrix::from_fn(rx.len(), tx.len(), |m, n| {
        centre * rx_phase[m] * tx_phase[n]
    });
    ChannelMatrix::from_entries(h, lambda, WavefrontModel::Planar, g0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub position: Point3,
    /// Amplitude attenuation in `[0, 1]`.
    pub attenuation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseModel {
    /// Independent phase for every (scatterer, rx, tx) triple.
    RandomPerPair,
    /// One phase per scatterer shared by all of its paths.
    PerScatterer,
}

impl PhaseModel {
    pub fn label(self) -> &'static str {
        match self {
            PhaseModel::RandomPerPair => "random_per_pair",
            PhaseModel::PerScatterer => "per_scatterer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "coupling", rename_all = "snake_case")]
pub enum PowerCoupling {
    /// Path amplitude `Γ λ / (4π d_ts d_sr)`.
    FreeSpaceProduct,
    /// Scattered matrix rescaled so `‖H_s‖_F² = rho ‖H_los‖_F²` for the scene at hand.
    FixedRatio { rho: f64 },
    /// The `FixedRatio` rescaling factor is computed once with the link at
    /// `reference_distance` and then held fixed, so the scattered power keeps
    /// its free-space distance dependence but no longer grows with the
    /// number of scatterers.
    FixedRatioAt { rho: f64, reference_distance: f64 },
}

/// How scatterer coordinates follow the link when the distance changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "scaling", rename_all = "snake_case")]
pub enum ScattererScaling {
    /// Positions are absolute.
    #[default]
    Fixed,
    /// Positions are given for a link of length `reference_distance`; the
    /// component along the link axis is stretched by `d / reference_distance`
    /// while the lateral offsets stay put.
    AlongLink { reference_distance: f64 },
}

/// Axis-aligned placement region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterBox {
    pub min: Point3,
    pub max: Point3,
}

impl ScatterBox {
    /// Box spanning the middle `fraction` of a link along +Y, with a
    /// `width_x × width_z` cross-section centred on the link.
    pub fn between_arrays(distance: f64, fraction: f64, width_x: f64, width_z: f64) -> Self {
        let margin = 0.5 * (1.0 - fraction) * distance;
        ScatterBox {
            min: Point3::new(-0.5 * width_x, margin, -0.5 * width_z),
            max: Point3::new(0.5 * width_x, distance - margin, 0.5 * width_z),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererSet {
    pub scatterers: Vec<Scatterer>,
    pub phase_model: PhaseModel,
    pub power_coupling: PowerCoupling,
    #[serde(default)]
    pub scaling: ScattererScaling,
    pub seed: u64,
}

impl ScattererSet {
    pub fn new(
        scatterers: Vec<Scatterer>,
        phase_model: PhaseModel,
        power_coupling: PowerCoupling,
        seed: u64,
    ) -> Result<Self> {
        let set = ScattererSet {
            scatterers,
            phase_model,
            power_coupling,
            scaling: ScattererScaling::Fixed,
            seed,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn with_scaling(mut self, scaling: ScattererScaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.scatterers.iter().enumerate() {
            if !s.position.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "scatterer {i}: non-finite position"
                )));
            }
            if !(0.0..=1.0).contains(&s.attenuation) {
                return Err(Error::InvalidParameter(format!(
                    "scatterer {i}: attenuation {} outside [0, 1]",
                    s.attenuation
                )));
            }
        }
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{what} must be positive, got {v}"
                )))
            }
        };
        match self.power_coupling {
            PowerCoupling::FreeSpaceProduct => {}
            PowerCoupling::FixedRatio { rho } => positive(rho, "rho")?,
            PowerCoupling::FixedRatioAt {
                rho,
                reference_distance,
            } => {
                positive(rho, "rho")?;
                positive(reference_distance, "reference distance")?;
            }
        }
        if let ScattererScaling::AlongLink { reference_distance } = self.scaling {
            positive(reference_distance, "reference distance")?;
        }
        Ok(())
    }

    /// Draws `count` scatterers uniformly inside `region`, rejecting any within
    /// `guard` metres of an element. Attenuations are uniform in `[0, 1]`
    /// unless `attenuation` is given. The draw is sequential, so the first `k`
    /// scatterers do not depend on `count`.
    pub fn random_in_box(
        count: usize,
        region: ScatterBox,
        guard: f64,
        elements: &[Point3],
        attenuation: Option<f64>,
        seed: u64,
    ) -> Result<Vec<Scatterer>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (region.min, region.max);
        if !(lo.x <= hi.x && lo.y <= hi.y && lo.z <= hi.z) {
            return Err(Error::InvalidParameter("scatter box has min > max".into()));
        }
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count {
            attempts += 1;
            if attempts > 1000 * (count + 1) {
                return Err(Error::InvalidParameter(
                    "could not place scatterers outside the guard radius".into(),
                ));
            }
            let p = Point3::new(
                lo.x + (hi.x - lo.x) * rng.random::<f64>(),
                lo.y + (hi.y - lo.y) * rng.random::<f64>(),
                lo.z + (hi.z - lo.z) * rng.random::<f64>(),
            );
            let gamma = rng.random::<f64>();
            if elements.iter().any(|e| e.distance(p) < guard) {
                continue;
            }
            out.push(Scatterer {
                position: p,
                attenuation: attenuation.unwrap_or(gamma),
            });
        }
        Ok(out)
    }

    /// Scatterer positions for a link of length `distance` along `axis`.
    pub fn positions_for(&self, distance: f64, axis: Point3) -> Vec<Point3> {
        match self.scaling {
            ScattererScaling::Fixed => self.scatterers.iter().map(|s| s.position).collect(),
            ScattererScaling::AlongLink { reference_distance } => {
                let stretch = distance / reference_distance - 1.0;
                self.scatterers
                    .iter()
                    .map(|s| s.position + axis * (s.position.dot(axis) * stretch))
                    .collect()
            }
        }
    }

    /// Truncated copy holding the first `count` scatterers.
    pub fn prefix(&self, count: usize) -> Self {
        ScattererSet {
            scatterers: self.scatterers[..count.min(self.scatterers.len())].to_vec(),
            ..self.clone()
        }
    }
}

/// Counter-keyed phase stream for one scatterer: the `j`-th draw is the
/// phase of the `j`-th (rx, tx) pair in row-major order regardless of how
/// many other scatterers or pairs are evaluated.
fn phase_stream(seed: u64, scatterer: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ PHASE_SEED_DOMAIN);
    rng.set_stream(scatterer as u64);
    rng
}

fn unit_phase(rng: &mut ChaCha8Rng) -> Complex64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    Complex64::from_polar(1.0, 2.0 * PI * u)
}

/// Sum of all scattered paths with the free-space product-of-distances law,
/// before any power rescaling.
fn raw_scattered(
    scene: &LinkScene,
    set: &ScattererSet,
    model: WavefrontModel,
) -> Result<DMatrix<Complex64>> {
    let tx = scene.tx_positions()?;
    let rx = scene.rx_positions()?;
    let lambda = scene.wavelength;
    let k = 2.0 * PI / lambda;
    let c_amp = lambda / (4.0 * PI);
    let (ct, cr) = (scene.tx_center(), scene.rx_center());
    let positions = set.positions_for(scene.distance, scene.link_axis());
    let mut h = DMatrix::<Complex64>::zeros(rx.len(), tx.len());

    for (s, (scatterer, &p)) in set.scatterers.iter().zip(&positions).enumerate() {
        if tx
            .iter()
            .chain(&rx)
            .any(|e| e.distance(p) < COINCIDENCE_TOL)
        {
            return Err(Error::ScattererCoincident(s));
        }
        if scatterer.attenuation == 0.0 {
            continue;
        }
        // (path length, amplitude distance) per element on each side
        let (tx_leg, rx_leg): (Vec<Leg>, Vec<Leg>) = match model {
            WavefrontModel::Spherical => (
                tx.iter()
                    .map(|t| (p.distance(*t), p.distance(*t)))
                    .collect(),
                rx.iter().map(|r| (r.distance(p), r.distance(p))).collect(),
            ),
            WavefrontModel::Planar => {
                let d1 = p.distance(ct);
                let v1 = (p - ct) * (1.0 / d1);
                let d2 = cr.distance(p);
                let v2 = (cr - p) * (1.0 / d2);
                (
                    tx.iter().map(|t| (d1 - v1.dot(*t - ct), d1)).collect(),
                    rx.iter().map(|r| (d2 + v2.dot(*r - cr), d2)).collect(),
                )
            }
        };
        let mut phases = phase_stream(set.seed, s);
        let shared = unit_phase(&mut phases);
        for (m, &(path_r, amp_r)) in rx_leg.iter().enumerate() {
            for (n, &(path_t, amp_t)) in tx_leg.iter().enumerate() {
                let phi = match set.phase_model {
                    PhaseModel::PerScatterer => shared,
                    PhaseModel::RandomPerPair if m == 0 && n == 0 => shared,
                    PhaseModel::RandomPerPair => unit_phase(&mut phases),
                };
                let amp = scatterer.attenuation * c_amp / (amp_t * amp_r);
                h[(m, n)] += propagation(amp, path_t + path_r, k) * phi;
            }
        }
    }
    Ok(h)
}

fn frob_sq(h: &DMatrix<Complex64>) -> f64 {
    h.iter().map(|z| z.norm_sqr()).sum()
}

fn ratio_gain(rho: f64, los: &DMatrix<Complex64>, scattered: &DMatrix<Complex64>) -> f64 {
    let ps = frob_sq(scattered);
    if ps == 0.0 {
        0.0
    } else {
        (rho * frob_sq(los) / ps).sqrt()
    }
}

/// Aggregate scattered channel. Requires `scene.scatterers`.
pub fn scattered_channel(scene: &LinkScene, model: WavefrontModel) -> Result<ChannelMatrix> {
    scene.validate()?;
    let set = scene.scatterers.as_ref().ok_or(Error::NoScatterers)?;
    set.validate()?;
    if set.scatterers.is_empty() {
        return Err(Error::EmptyScatterers);
    }
    let mut h = raw_scattered(scene, set, model)?;
    match set.power_coupling {
        PowerCoupling::FreeSpaceProduct => {}
        PowerCoupling::FixedRatio { rho } => {
            let los = los_channel(scene, model)?;
            h *= Complex64::from(ratio_gain(rho, los.entries(), &h));
        }
        PowerCoupling::FixedRatioAt {
            rho,
            reference_distance,
        } => {
            let reference = scene.with_distance(reference_distance)?;
            let los = los_channel(&reference, model)?;
            let raw = raw_scattered(&reference, set, model)?;
            h *= Complex64::from(ratio_gain(rho, los.entries(), &raw));
        }
    }
    ChannelMatrix::from_entries(
        h,
        scene.wavelength,
        model,
        free_space_gain(scene.distance, scene.wavelength),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeOptions {
    pub include_los: bool,
}

impl Default for CompositeOptions {
    fn default() -> Self {
        Self { include_los: true }
    }
}

/// LoS plus scattered paths (or LoS alone when the scene has no scatterers).
pub fn composite_channel(scene: &LinkScene, model: WavefrontModel) -> Result<ChannelMatrix> {
    composite_channel_with(scene, model, CompositeOptions::default())
}

pub fn composite_channel_with(
    scene: &LinkScene,
    model: WavefrontModel,
    options: CompositeOptions,
) -> Result<ChannelMatrix> {
    let has_scatterers = scene
        .scatterers
        .as_ref()
        .is_some_and(|s| !s.scatterers.is_empty());
    if !has_scatterers {
        if !options.include_los {
            return Err(Error::NoScatterers);
        }
        return los_channel(scene, model);
    }
    let scattered = scattered_channel(scene, model)?;
    if !options.include_los {
        return Ok(scattered);
    }
    let mut h = los_channel(scene, model)?;
    h.add_assign(scattered.entries());
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ArraySpec, SceneKind};
    use approx::assert_relative_eq;

    const LAMBDA: f64 = 0.003;

    fn ula_pair(len_t: f64, nt: usize, len_r: f64, nr: usize, d: f64) -> LinkScene {
        LinkScene::new(
            ArraySpec::ula(nt, len_t).unwrap(),
            ArraySpec::ula(nr, len_r).unwrap(),
            d,
            LAMBDA,
            SceneKind::broadside(),
        )
        .unwrap()
    }

    /// Singular values via nalgebra's SVD, descending.
    fn singular_values(h: &ChannelMatrix) -> Vec<f64> {
        let mut s: Vec<f64> = h
            .entries()
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    #[test]
    fn single_pair_one_wavelength_apart() {
        // Direct construction: one tx element at the origin, one rx element at (0, λ, 0).
        let t = Point3::ORIGIN;
        let r = Point3::new(0.0, LAMBDA, 0.0);
        let d = r.distance(t);
        let entry = propagation(free_space_gain(d, LAMBDA), d, 2.0 * PI / LAMBDA);
        assert_relative_eq!(entry.re, 1.0 / (4.0 * PI), epsilon = 1e-15);
        assert!(entry.im.abs() < 1e-15);
    }

    #[test]
    fn far_broadside_magnitudes_equalise() {
        let h = los_channel_swm(&ula_pair(0.1, 2, 0.1, 2, 1e7)).unwrap();
        let mags: Vec<f64> = h.entries().iter().map(|z| z.norm()).collect();
        for m in &mags {
            assert_relative_eq!(*m, mags[0], max_relative = 1e-9);
        }
    }

    #[test]
    fn swm_matches_hand_computed_pairs() {
        // tx at z = ±0.05 on the Z axis, rx at (0, 1, ±0.05)
        let h = los_channel_swm(&ula_pair(0.1, 2, 0.1, 2, 1.0)).unwrap();
        let same = 1.0f64;
        let cross = (1.0f64 + 0.1 * 0.1).sqrt();
        let expect = |d: f64| {
            let g = LAMBDA / (4.0 * PI * d);
            let ph = -2.0 * PI * d / LAMBDA;
            Complex64::new(g * ph.cos(), g * ph.sin())
        };
        let e = h.entries();
        for (idx, d) in [
            ((0, 0), same),
            ((1, 1), same),
            ((0, 1), cross),
            ((1, 0), cross),
        ] {
            assert_relative_eq!(e[idx].re, expect(d).re, epsilon = 1e-12);
            assert_relative_eq!(e[idx].im, expect(d).im, epsilon = 1e-12);
        }
    }

    #[test]
    fn coincident_elements_rejected() {
        // A 4 m user ULA at 1 m and α = 90° passes through the BS element at z = 1.
        let tx = ArraySpec::ula(3, 2.0).unwrap();
        let rx = ArraySpec::ula(3, 2.0).unwrap();
        let scene = LinkScene::new(
            tx,
            rx,
            1.0,
            LAMBDA,
            SceneKind::UlaToUla {
                alpha: PI / 2.0,
                beta: 0.0,
            },
        )
        .unwrap();
        assert!(matches!(
            los_channel_swm(&scene),
            Err(Error::CoincidentElements { .. })
        ));
        assert!(matches!(
            los_channel_pwm(&scene),
            Err(Error::CoincidentElements { .. })
        ));
    }

    #[test]
    fn pwm_is_rank_one_with_uniform_magnitude() {
        let scene = LinkScene::new(
            ArraySpec::ura(6, 5, 0.3, 0.2).unwrap(),
            ArraySpec::ula(4, 0.1).unwrap(),
            3.0,
            LAMBDA,
            SceneKind::UraToUla { theta: 0.4 },
        )
        .unwrap();
        let h = los_channel_pwm(&scene).unwrap();
        let s = singular_values(&h);
        assert!(s[1] < 1e-10 * s[0]);
        let g0 = free_space_gain(3.0, LAMBDA);
        for z in h.entries().iter() {
            assert_relative_eq!(z.norm(), g0, max_relative = 1e-14);
        }
    }

    #[test]
    fn pwm_and_swm_agree_far_away() {
        let scene = ula_pair(0.1, 2, 0.1, 2, 1e6);
        let s = los_channel_swm(&scene).unwrap();
        let p = los_channel_pwm(&scene).unwrap();
        for (a, b) in s.entries().iter().zip(p.entries().iter()) {
            assert_relative_eq!(a.norm(), b.norm(), max_relative = 1e-6);
            // Residual curvature (Δz)²/(2d) is ~1e-5 rad here.
            assert!((a / b).arg().abs() < 1e-4);
        }
    }

    #[test]
    fn swm_to_pwm_phase_error_shrinks_with_distance() {
        // Path-length residual between the exact distance and its first-order
        // expansion, in radians; evaluated without phase wrapping.
        let base = LinkScene::new(
            ArraySpec::ura(5, 7, 0.2, 0.3).unwrap(),
            ArraySpec::ula(4, 0.1).unwrap(),
            1.0,
            LAMBDA,
            SceneKind::UraToUla { theta: 0.7 },
        )
        .unwrap();
        let max_error = |d: f64| {
            let s = base.with_distance(d).unwrap();
            let (tx, rx) = (s.tx_positions().unwrap(), s.rx_positions().unwrap());
            let u = s.link_axis();
            let cr = s.rx_center();
            let mut worst = 0.0f64;
            for r in &rx {
                for t in &tx {
                    let linear = d + u.dot(*r - cr) - u.dot(*t);
                    worst = worst.max((r.distance(*t) - linear).abs());
                }
            }
            worst * 2.0 * PI / LAMBDA
        };
        let start = 2.0 * (base.tx.aperture() + base.rx.aperture());
        let grid: Vec<f64> = (0..60).map(|i| start * 1.25f64.powi(i)).collect();
        let errs: Vec<f64> = grid.iter().map(|&d| max_error(d)).collect();
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{} > {}", w[1], w[0]);
        }
        assert!(*errs.last().unwrap() < 1e-3);
        assert!(*errs.last().unwrap() < 1e-4 * errs[0]);
    }

    #[test]
    fn swapping_ends_transposes_swm() {
        let a = ula_pair(0.3, 5, 0.1, 3, 2.0);
        let b = ula_pair(0.1, 3, 0.3, 5, 2.0);
        let ha = los_channel_swm(&a).unwrap();
        let hb = los_channel_swm(&b).unwrap();
        // rx of `a` sits at +Y; in `b` the roles swap but the geometry is the
        // mirror image through y = d/2, which leaves all pair distances intact.
        let diff = ha.entries().transpose() - hb.entries();
        assert!(diff.iter().all(|z| z.norm() < 1e-15));
    }

    fn scene_with(set: ScattererSet) -> LinkScene {
        ula_pair(0.5, 4, 0.1, 3, 10.0).with_scatterers(set)
    }

    fn some_scatterers(n: usize, seed: u64) -> Vec<Scatterer> {
        let region = ScatterBox::between_arrays(10.0, 0.8, 2.0, 2.0);
        ScattererSet::random_in_box(n, region, 10.0 * LAMBDA, &[], None, seed).unwrap()
    }

    #[test]
    fn zero_attenuation_gives_zero_matrix() {
        let s = vec![Scatterer {
            position: Point3::new(0.3, 5.0, 0.1),
            attenuation: 0.0,
        }];
        let set = ScattererSet::new(
            s,
            PhaseModel::RandomPerPair,
            PowerCoupling::FreeSpaceProduct,
            1,
        )
        .unwrap();
        let scene = scene_with(set);
        let h = scattered_channel(&scene, WavefrontModel::Spherical).unwrap();
        assert!(h.entries().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        let c = composite_channel(&scene, WavefrontModel::Spherical).unwrap();
        assert_eq!(c, los_channel_swm(&scene).unwrap());
    }

    #[test]
    fn seeded_output_is_bit_identical() {
        let set = ScattererSet::new(
            some_scatterers(5, 3),
            PhaseModel::RandomPerPair,
            PowerCoupling::FreeSpaceProduct,
            42,
        )
        .unwrap();
        let scene = scene_with(set);
        let a = scattered_channel(&scene, WavefrontModel::Spherical).unwrap();
        let b = scattered_channel(&scene, WavefrontModel::Spherical).unwrap();
        assert_eq!(a, b);
        let mut other = scene.clone();
        other.scatterers.as_mut().unwrap().seed = 43;
        assert_ne!(
            a,
            scattered_channel(&other, WavefrontModel::Spherical).unwrap()
        );
    }

    #[test]
    fn product_of_distances_law() {
        // Scatterer equidistant (r) from a single tx and a single rx element;
        // modelled with two-element arrays of which the far elements are masked
        // out by reading the (0, 0) entry only.
        let scene = LinkScene::new(
            ArraySpec::ula(2, 0.1).unwrap(),
            ArraySpec::ula(2, 0.1).unwrap(),
            4.0,
            LAMBDA,
            SceneKind::broadside(),
        )
        .unwrap();
        let t0 = scene.tx_positions().unwrap()[0];
        let r0 = scene.rx_positions().unwrap()[0];
        let p = Point3::new(1.5, 2.0, -0.05);
        let r = p.distance(t0);
        assert_relative_eq!(r, p.distance(r0), epsilon = 1e-15);
        let set = ScattererSet::new(
            vec![Scatterer {
                position: p,
                attenuation: 1.0,
            }],
            PhaseModel::PerScatterer,
            PowerCoupling::FreeSpaceProduct,
            9,
        )
        .unwrap();
        let h = scattered_channel(&scene.with_scatterers(set), WavefrontModel::Spherical).unwrap();
        assert_relative_eq!(
            h.entries()[(0, 0)].norm(),
            LAMBDA / (4.0 * PI) / (r * r),
            max_relative = 1e-14
        );
    }

    #[test]
    fn per_scatterer_single_is_rank_one() {
        let set = ScattererSet::new(
            some_scatterers(1, 5),
            PhaseModel::PerScatterer,
            PowerCoupling::FreeSpaceProduct,
            8,
        )
        .unwrap();
        for model in [WavefrontModel::Spherical, WavefrontModel::Planar] {
            let h = scattered_channel(&scene_with(set.clone()), model).unwrap();
            let s = singular_values(&h);
            assert!(s[1] < 1e-10 * s[0], "{model:?}: {s:?}");
        }
    }

    #[test]
    fn random_per_pair_is_full_rank() {
        let set = ScattererSet::new(
            some_scatterers(1, 5),
            PhaseModel::RandomPerPair,
            PowerCoupling::FreeSpaceProduct,
            8,
        )
        .unwrap();
        let h = scattered_channel(&scene_with(set), WavefrontModel::Spherical).unwrap();
        let s = singular_values(&h);
        assert!(s[2] > 1e-3 * s[0]);
    }

    #[test]
    fn fixed_ratio_sets_power_exactly() {
        let set = ScattererSet::new(
            some_scatterers(6, 11),
            PhaseModel::RandomPerPair,
            PowerCoupling::FixedRatio { rho: 0.1 },
            2,
        )
        .unwrap();
        let scene = scene_with(set);
        let hs = scattered_channel(&scene, WavefrontModel::Spherical).unwrap();
        let hl = los_channel_swm(&scene).unwrap();
        assert_relative_eq!(
            hs.frobenius_sq() / hl.frobenius_sq(),
            0.1,
            max_relative = 1e-9
        );
        let hc = composite_channel(&scene, WavefrontModel::Spherical).unwrap();
        let diff = hc.entries() - hl.entries() - hs.entries();
        assert!(diff.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn fixed_ratio_at_reference_distance() {
        let region = ScatterBox::between_arrays(20.0, 0.8, 2.0, 2.0);
        let pts = ScattererSet::random_in_box(4, region, 0.03, &[], None, 1).unwrap();
        let set = ScattererSet::new(
            pts,
            PhaseModel::RandomPerPair,
            PowerCoupling::FixedRatioAt {
                rho: 0.2,
                reference_distance: 20.0,
            },
            4,
        )
        .unwrap()
        .with_scaling(ScattererScaling::AlongLink {
            reference_distance: 20.0,
        });
        let at = |d: f64| {
            let s = ula_pair(0.5, 4, 0.1, 3, d).with_scatterers(set.clone());
            scattered_channel(&s, WavefrontModel::Spherical)
                .unwrap()
                .frobenius_sq()
                / los_channel_swm(&s).unwrap().frobenius_sq()
        };
        assert_relative_eq!(at(20.0), 0.2, max_relative = 1e-9);
        // Scattered power falls off faster than LoS as the link stretches.
        assert!(at(80.0) < 0.1 * at(20.0));
    }

    #[test]
    fn along_link_scaling_keeps_lateral_offsets() {
        let set = ScattererSet::new(
            vec![Scatterer {
                position: Point3::new(0.4, 5.0, -0.3),
                attenuation: 0.5,
            }],
            PhaseModel::PerScatterer,
            PowerCoupling::FreeSpaceProduct,
            0,
        )
        .unwrap()
        .with_scaling(ScattererScaling::AlongLink {
            reference_distance: 10.0,
        });
        let p = set.positions_for(30.0, Point3::new(0.0, 1.0, 0.0))[0];
        assert_relative_eq!(p.x, 0.4);
        assert_relative_eq!(p.y, 15.0, epsilon = 1e-12);
        assert_relative_eq!(p.z, -0.3);
    }

    #[test]
    fn scatterer_errors() {
        let scene = ula_pair(0.5, 4, 0.1, 3, 10.0);
        assert!(matches!(
            scattered_channel(&scene, WavefrontModel::Spherical),
            Err(Error::NoScatterers)
        ));
        let empty = ScattererSet::new(
            vec![],
            PhaseModel::PerScatterer,
            PowerCoupling::FreeSpaceProduct,
            0,
        )
        .unwrap();
        assert!(matches!(
            scattered_channel(
                &scene.clone().with_scatterers(empty.clone()),
                WavefrontModel::Spherical
            ),
            Err(Error::EmptyScatterers)
        ));
        // composite with an empty set falls back to LoS
        assert_eq!(
            composite_channel(
                &scene.clone().with_scatterers(empty),
                WavefrontModel::Spherical
            )
            .unwrap(),
            los_channel_swm(&scene).unwrap()
        );
        let on_element = scene.tx_positions().unwrap()[1];
        let bad = ScattererSet::new(
            vec![Scatterer {
                position: on_element,
                attenuation: 1.0,
            }],
            PhaseModel::PerScatterer,
            PowerCoupling::FreeSpaceProduct,
            0,
        )
        .unwrap();
        assert!(matches!(
            scattered_channel(
                &scene.clone().with_scatterers(bad),
                WavefrontModel::Spherical
            ),
            Err(Error::ScattererCoincident(0))
        ));
        let gamma = vec![Scatterer {
            position: Point3::new(0.0, 5.0, 0.0),
            attenuation: 1.5,
        }];
        assert!(ScattererSet::new(
            gamma,
            PhaseModel::PerScatterer,
            PowerCoupling::FreeSpaceProduct,
            0
        )
        .is_err());
        assert!(ScattererSet::new(
            vec![],
            PhaseModel::PerScatterer,
            PowerCoupling::FixedRatio { rho: 0.0 },
            0
        )
        .is_err());
    }

    #[test]
    fn placement_respects_guard_and_is_nested() {
        let scene = ula_pair(0.5, 4, 0.1, 3, 10.0);
        let elements: Vec<Point3> = scene
            .tx_positions()
            .unwrap()
            .into_iter()
            .chain(scene.rx_positions().unwrap())
            .collect();
        let region = ScatterBox::between_arrays(10.0, 0.8, 2.0, 2.0);
        let many = ScattererSet::random_in_box(16, region, 0.03, &elements, None, 77).unwrap();
        let few = ScattererSet::random_in_box(4, region, 0.03, &elements, None, 77).unwrap();
        assert_eq!(&many[..4], &few[..]);
        for s in &many {
            assert!(elements.iter().all(|e| e.distance(s.position) >= 0.03));
            assert!((1.0..=9.0).contains(&s.position.y));
            assert!((0.0..=1.0).contains(&s.attenuation));
        }
    }

    #[test]
    fn csv_export_layout() {
        let h = los_channel_swm(&ula_pair(0.1, 2, 0.1, 3, 1.0)).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "tx0_re,tx0_im,tx1_re,tx1_im");
        let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first[0], h.entries()[(0, 0)].re);
        assert_eq!(first[3], h.entries()[(0, 1)].im);
    }
}
