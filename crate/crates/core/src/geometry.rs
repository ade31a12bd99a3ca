//! Array layouts and element coordinates.
//!
//! Frame conventions: the base-station array is centred at the origin with its
//! boresight along +Y. A BS ULA lies on the Z axis; a BS URA lies in the
//! XZ-plane with `elements_x` columns along X and `elements_z` rows along Z.
//!
//! The user is always a ULA. In the ULA-to-ULA scene its centre sits at
//! `d (0, cos α, sin α)` (α measured from +Y toward +Z) and its axis is
//! `(0, sin β, cos β)` (β measured from +Z toward +Y), so `α = β = 0` is the
//! broadside-parallel link. In the URA-to-ULA scene the centre sits at
//! `(0, d, 0)` and the axis is `(sin θ, 0, cos θ)`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::channel::ScattererSet;
use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn wavelength_from_ghz(freq_ghz: f64) -> f64 {
    SPEED_OF_LIGHT / (freq_ghz * 1e9)
}

/// Wraps an angle in radians into `(-π, π]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn unit(self) -> Point3 {
        self * (1.0 / self.norm())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Arithmetic mean of a non-empty set of points.
    pub fn centroid(points: &[Point3]) -> Point3 {
        let sum = points.iter().fold(Point3::ORIGIN, |acc, &p| acc + p);
        sum * (1.0 / points.len() as f64)
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// Layout of a uniform array. Lengths are element-centre to element-centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArraySpec {
    Ula {
        elements: usize,
        length: f64,
    },
    Ura {
        elements_x: usize,
        elements_z: usize,
        length_x: f64,
        length_z: f64,
    },
}

fn check_axis(count: usize, length: f64, axis: &str) -> Result<()> {
    if count < 2 {
        return Err(Error::InvalidGeometry(format!(
            "{axis}: need at least 2 elements, got {count}"
        )));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "{axis}: length must be positive and finite, got {length}"
        )));
    }
    Ok(())
}

/// Largest element count with spacing no smaller than half a wavelength.
fn half_wavelength_count(length: f64, wavelength: f64) -> Result<usize> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "length must be positive, got {length}"
        )));
    }
    // The epsilon keeps exact multiples of λ/2 from losing an element to rounding.
    let n = (length / (0.5 * wavelength) * (1.0 + 1e-12)).floor() as usize + 1;
    if n < 2 {
        return Err(Error::InvalidGeometry(format!(
            "length {length} m is shorter than half a wavelength"
        )));
    }
    Ok(n)
}

impl ArraySpec {
    pub fn ula(elements: usize, length: f64) -> Result<Self> {
        let spec = ArraySpec::Ula { elements, length };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ura(elements_x: usize, elements_z: usize, length_x: f64, length_z: f64) -> Result<Self> {
        let spec = ArraySpec::Ura {
            elements_x,
            elements_z,
            length_x,
            length_z,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Half-wavelength-spaced ULA no longer than `length`; the realised length
    /// is `(n - 1) λ / 2`.
    pub fn ula_half_wavelength(length: f64, wavelength: f64) -> Result<Self> {
        let n = half_wavelength_count(length, wavelength)?;
        Self::ula(n, (n - 1) as f64 * 0.5 * wavelength)
    }

    pub fn ura_half_wavelength(length_x: f64, length_z: f64, wavelength: f64) -> Result<Self> {
        let nx = half_wavelength_count(length_x, wavelength)?;
        let nz = half_wavelength_count(length_z, wavelength)?;
        Self::ura(
            nx,
            nz,
            (nx - 1) as f64 * 0.5 * wavelength,
            (nz - 1) as f64 * 0.5 * wavelength,
        )
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ArraySpec::Ula { elements, length } => check_axis(elements, length, "ULA"),
            ArraySpec::Ura {
                elements_x,
                elements_z,
                length_x,
                length_z,
            } => {
                check_axis(elements_x, length_x, "URA x")?;
                check_axis(elements_z, length_z, "URA z")
            }
        }
    }

    pub fn element_count(&self) -> usize {
        match *self {
            ArraySpec::Ula { elements, .. } => elements,
            ArraySpec::Ura {
                elements_x,
                elements_z,
                ..
            } => elements_x * elements_z,
        }
    }

    /// Maximum aperture: the ULA length, or the URA diagonal.
    pub fn aperture(&self) -> f64 {
        match *self {
            ArraySpec::Ula { length, .. } => length,
            ArraySpec::Ura {
                length_x, length_z, ..
            } => length_x.hypot(length_z),
        }
    }

    /// `(horizontal, vertical)` side lengths. A ULA is treated as vertical.
    pub fn side_lengths(&self) -> (f64, f64) {
        match *self {
            ArraySpec::Ula { length, .. } => (0.0, length),
            ArraySpec::Ura {
                length_x, length_z, ..
            } => (length_x, length_z),
        }
    }

    pub fn is_ula(&self) -> bool {
        matches!(self, ArraySpec::Ula { .. })
    }
}

fn centred_axis(count: usize, length: f64) -> impl Iterator<Item = f64> {
    let step = length / (count - 1) as f64;
    (0..count).map(move |i| -0.5 * length + i as f64 * step)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scene", rename_all = "snake_case")]
pub enum SceneKind {
    UlaToUla { alpha: f64, beta: f64 },
    UraToUla { theta: f64 },
}

impl SceneKind {
    /// ULA-to-ULA with `α = β = 0`.
    pub fn broadside() -> Self {
        SceneKind::UlaToUla {
            alpha: 0.0,
            beta: 0.0,
        }
    }

    pub fn normalized(self) -> Self {
        match self {
            SceneKind::UlaToUla { alpha, beta } => SceneKind::UlaToUla {
                alpha: normalize_angle(alpha),
                beta: normalize_angle(beta),
            },
            SceneKind::UraToUla { theta } => SceneKind::UraToUla {
                theta: normalize_angle(theta),
            },
        }
    }

    fn is_finite(self) -> bool {
        match self {
            SceneKind::UlaToUla { alpha, beta } => alpha.is_finite() && beta.is_finite(),
            SceneKind::UraToUla { theta } => theta.is_finite(),
        }
    }

    /// Centre of the user array for a centre-to-centre distance `d`.
    pub fn user_center(self, distance: f64) -> Point3 {
        match self {
            SceneKind::UlaToUla { alpha, .. } => {
                Point3::new(0.0, distance * alpha.cos(), distance * alpha.sin())
            }
            SceneKind::UraToUla { .. } => Point3::new(0.0, distance, 0.0),
        }
    }

    /// Unit vector along the user ULA.
    pub fn user_axis(self) -> Point3 {
        match self {
            SceneKind::UlaToUla { beta, .. } => Point3::new(0.0, beta.sin(), beta.cos()),
            SceneKind::UraToUla { theta } => Point3::new(theta.sin(), 0.0, theta.cos()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    BsAtOrigin,
    UserAt { center: Point3, kind: SceneKind },
}

pub fn element_positions(spec: &ArraySpec, placement: &Placement) -> Result<Vec<Point3>> {
    spec.validate()?;
    match *placement {
        Placement::BsAtOrigin => Ok(match *spec {
            ArraySpec::Ula { elements, length } => centred_axis(elements, length)
                .map(|z| Point3::new(0.0, 0.0, z))
                .collect(),
            ArraySpec::Ura {
                elements_x,
                elements_z,
                length_x,
                length_z,
            } => centred_axis(elements_z, length_z)
                .flat_map(|z| {
                    centred_axis(elements_x, length_x).map(move |x| Point3::new(x, 0.0, z))
                })
                .collect(),
        }),
        Placement::UserAt { center, kind } => {
            if !center.is_finite() || !kind.is_finite() {
                return Err(Error::InvalidGeometry("non-finite user placement".into()));
            }
            let ArraySpec::Ula { elements, length } = *spec else {
                return Err(Error::InvalidGeometry(
                    "the user array must be a ULA".into(),
                ));
            };
            let axis = kind.user_axis();
            Ok(centred_axis(elements, length)
                .map(|t| center + axis * t)
                .collect())
        }
    }
}

/// A point-to-point link: BS array at the origin, user ULA at `distance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkScene {
    pub tx: ArraySpec,
    pub rx: ArraySpec,
    pub distance: f64,
    pub wavelength: f64,
    pub kind: SceneKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatterers: Option<ScattererSet>,
}

impl LinkScene {
    pub fn new(
        tx: ArraySpec,
        rx: ArraySpec,
        distance: f64,
        wavelength: f64,
        kind: SceneKind,
    ) -> Result<Self> {
        let scene = LinkScene {
            tx,
            rx,
            distance,
            wavelength,
            kind: kind.normalized(),
            scatterers: None,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn with_scatterers(mut self, scatterers: ScattererSet) -> Self {
        self.scatterers = Some(scatterers);
        self
    }

    pub fn without_scatterers(&self) -> Self {
        LinkScene {
            scatterers: None,
            ..self.clone()
        }
    }

    /// Same scene at a different centre-to-centre distance.
    pub fn with_distance(&self, distance: f64) -> Result<Self> {
        let scene = LinkScene {
            distance,
            ..self.clone()
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        self.tx.validate()?;
        self.rx.validate()?;
        if !self.rx.is_ula() {
            return Err(Error::InvalidGeometry(
                "the user array must be a ULA".into(),
            ));
        }
        if !(self.distance.is_finite() && self.distance > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "distance must be positive, got {}",
                self.distance
            )));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        if !self.kind.is_finite() {
            return Err(Error::InvalidGeometry(
                "non-finite orientation angle".into(),
            ));
        }
        Ok(())
    }

    pub fn tx_center(&self) -> Point3 {
        Point3::ORIGIN
    }

    pub fn rx_center(&self) -> Point3 {
        self.kind.user_center(self.distance)
    }

    /// Unit vector from the transmit centre to the receive centre.
    pub fn link_axis(&self) -> Point3 {
        (self.rx_center() - self.tx_center()).unit()
    }

    pub fn tx_positions(&self) -> Result<Vec<Point3>> {
        element_positions(&self.tx, &Placement::BsAtOrigin)
    }

    pub fn rx_positions(&self) -> Result<Vec<Point3>> {
        element_positions(
            &self.rx,
            &Placement::UserAt {
                center: self.rx_center(),
                kind: self.kind,
            },
        )
    }

    /// Classic Rayleigh distance of the whole link, `2 (D_t + D_r)² / λ`.
    pub fn rayleigh_distance(&self) -> f64 {
        let s = self.tx.aperture() + self.rx.aperture();
        2.0 * s * s / self.wavelength
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_points(actual: &[Point3], expected: &[Point3]) {
        assert_eq!(actual.len(), expected.len());
        for (a, e) in actual.iter().zip(expected) {
            assert!(a.distance(*e) < 1e-12, "{a:?} != {e:?}");
        }
    }

    #[test]
    fn bs_ula_two_elements() {
        let spec = ArraySpec::ula(2, 0.1).unwrap();
        let p = element_positions(&spec, &Placement::BsAtOrigin).unwrap();
        assert_points(
            &p,
            &[Point3::new(0.0, 0.0, -0.05), Point3::new(0.0, 0.0, 0.05)],
        );
    }

    #[test]
    fn bs_ura_two_by_two() {
        let spec = ArraySpec::ura(2, 2, 0.05, 0.05).unwrap();
        let p = element_positions(&spec, &Placement::BsAtOrigin).unwrap();
        assert_points(
            &p,
            &[
                Point3::new(-0.025, 0.0, -0.025),
                Point3::new(0.025, 0.0, -0.025),
                Point3::new(-0.025, 0.0, 0.025),
                Point3::new(0.025, 0.0, 0.025),
            ],
        );
    }

    #[test]
    fn user_ula_theta_zero() {
        let kind = SceneKind::UraToUla { theta: 0.0 };
        let spec = ArraySpec::ula(2, 0.1).unwrap();
        let p = element_positions(
            &spec,
            &Placement::UserAt {
                center: kind.user_center(10.0),
                kind,
            },
        )
        .unwrap();
        assert_points(
            &p,
            &[Point3::new(0.0, 10.0, -0.05), Point3::new(0.0, 10.0, 0.05)],
        );
    }

    #[test]
    fn theta_ninety_points_along_x() {
        let axis = SceneKind::UraToUla { theta: PI / 2.0 }.user_axis();
        assert_abs_diff_eq!(axis.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(axis.y, 0.0);
        assert_abs_diff_eq!(axis.z, 0.0, epsilon = 1e-16);
    }

    #[test]
    fn rejects_degenerate_arrays() {
        assert!(ArraySpec::ula(1, 0.1).is_err());
        assert!(ArraySpec::ula(4, 0.0).is_err());
        assert!(ArraySpec::ula(4, f64::NAN).is_err());
        assert!(ArraySpec::ura(2, 1, 0.1, 0.1).is_err());
        assert!(ArraySpec::ura(2, 2, 0.1, -0.1).is_err());
    }

    #[test]
    fn rejects_bad_scenes() {
        let ula = ArraySpec::ula(2, 0.1).unwrap();
        let ura = ArraySpec::ura(2, 2, 0.1, 0.1).unwrap();
        let k = SceneKind::broadside();
        assert!(LinkScene::new(ula, ula, 0.0, 0.003, k).is_err());
        assert!(LinkScene::new(ula, ula, 1.0, -0.003, k).is_err());
        assert!(LinkScene::new(ula, ura, 1.0, 0.003, k).is_err());
        assert!(LinkScene::new(ula, ula, f64::INFINITY, 0.003, k).is_err());
        assert!(LinkScene::new(
            ula,
            ula,
            1.0,
            0.003,
            SceneKind::UlaToUla {
                alpha: f64::NAN,
                beta: 0.0
            }
        )
        .is_err());
    }

    #[test]
    fn half_wavelength_helper_rounds_down() {
        let lambda = 0.003;
        let spec = ArraySpec::ula_half_wavelength(0.05, lambda).unwrap();
        // 0.05 / 0.0015 = 33.3 -> 34 elements, realised length 33 * 1.5 mm
        assert_eq!(spec.element_count(), 34);
        assert_abs_diff_eq!(spec.aperture(), 0.0495, epsilon = 1e-15);
        let exact = ArraySpec::ula_half_wavelength(0.003, lambda).unwrap();
        assert_eq!(exact.element_count(), 3);
        assert!(ArraySpec::ula_half_wavelength(0.001, lambda).is_err());
    }

    #[test]
    fn angles_normalize_into_half_open_interval() {
        assert_abs_diff_eq!(normalize_angle(PI), PI);
        assert_abs_diff_eq!(normalize_angle(-PI), PI);
        assert_abs_diff_eq!(normalize_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(normalize_angle(0.3 + 4.0 * PI), 0.3, epsilon = 1e-14);
    }

    #[test]
    fn ura_diagonal_aperture() {
        let spec = ArraySpec::ura(3, 5, 0.3, 0.4).unwrap();
        assert_abs_diff_eq!(spec.aperture(), 0.5, epsilon = 1e-15);
        assert_eq!(spec.element_count(), 15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn spec_strategy() -> impl Strategy<Value = ArraySpec> {
            prop_oneof![
                (2usize..40, 0.01f64..3.0).prop_map(|(n, l)| ArraySpec::ula(n, l).unwrap()),
                (2usize..12, 2usize..12, 0.01f64..1.0, 0.01f64..1.0)
                    .prop_map(|(a, b, c, d)| ArraySpec::ura(a, b, c, d).unwrap()),
            ]
        }

        fn spacing_is_uniform(points: &[Point3], stride: usize, count: usize) {
            let step = |i: usize| points[i + stride].distance(points[i]);
            let first = step(0);
            // Coordinates far from the origin carry proportionally larger rounding.
            let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
            for i in 0..count - 1 {
                assert!((step(i * stride) - first).abs() < 1e-13 * scale);
            }
        }

        proptest! {
            #[test]
            fn bs_arrays_are_centred_and_uniform(spec in spec_strategy()) {
                let p = element_positions(&spec, &Placement::BsAtOrigin).unwrap();
                prop_assert_eq!(p.len(), spec.element_count());
                prop_assert!(Point3::centroid(&p).norm() < 1e-12);
                match spec {
                    ArraySpec::Ula { elements, .. } => spacing_is_uniform(&p, 1, elements),
                    ArraySpec::Ura { elements_x, elements_z, .. } => {
                        spacing_is_uniform(&p[..elements_x], 1, elements_x);
                        spacing_is_uniform(&p, elements_x, elements_z);
                    }
                }
            }

            #[test]
            fn user_ula_centred_on_declared_center(
                n in 2usize..32, len in 0.01f64..2.0, d in 0.5f64..1e4,
                alpha in -3.0f64..3.0, beta in -3.0f64..3.0,
            ) {
                let rx = ArraySpec::ula(n, len).unwrap();
                let scene = LinkScene::new(rx, rx, d, 0.003, SceneKind::UlaToUla { alpha, beta }).unwrap();
                let p = scene.rx_positions().unwrap();
                prop_assert!(Point3::centroid(&p).distance(scene.rx_center()) < 1e-12 * d.max(1.0));
                spacing_is_uniform(&p, 1, n);
            }

            #[test]
            fn beta_full_turn_is_identity(beta in -3.0f64..3.0, alpha in -1.5f64..1.5) {
                let rx = ArraySpec::ula(5, 0.2).unwrap();
                let a = LinkScene::new(rx, rx, 7.0, 0.003, SceneKind::UlaToUla { alpha, beta }).unwrap();
                let b = LinkScene::new(rx, rx, 7.0, 0.003, SceneKind::UlaToUla { alpha, beta: beta + 2.0 * PI }).unwrap();
                for (p, q) in a.rx_positions().unwrap().iter().zip(b.rx_positions().unwrap()) {
                    prop_assert!(p.distance(q) < 1e-12);
                }
            }
        }
    }
}
