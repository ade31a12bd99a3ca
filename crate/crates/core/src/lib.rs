//! Near-field / far-field demarcation for MIMO links.
//!
//! The crate builds line-of-sight and multipath channel matrices under the
//! spherical (SWM) and planar (PWM) wavefront models, measures their effective
//! degrees of freedom, and locates the distance at which the two models stop
//! differing by more than a chosen EDoF ratio. The classic closed-form
//! boundaries (Rayleigh distance and friends) are available for comparison, and
//! [`experiments`] scripts the standard sweeps as CSV-emitting runs.
//!
//! ```
//! use nearfar::geometry::{wavelength_from_ghz, ArraySpec, LinkScene, SceneKind};
//! use nearfar::boundary::{solve_numerical, Objective};
//!
//! let lambda = wavelength_from_ghz(100.0);
//! let tx = ArraySpec::ula(2, 0.1).unwrap();
//! let rx = ArraySpec::ula(2, 0.1).unwrap();
//! let scene = LinkScene::new(tx, rx, 10.0, lambda, SceneKind::broadside()).unwrap();
//! let ebd = solve_numerical(&scene, Objective::EdofRatio { threshold: 1.01 }, None).unwrap();
//! assert!(ebd.converged && ebd.distance > 1.0);
//! ```

pub mod analysis;
pub mod boundary;
pub mod channel;
mod error;
pub mod experiments;
pub mod geometry;

pub use analysis::{capacity, capacity_error, covariance, edof, edof_ratio, EdofReport};
pub use boundary::{BoundaryCriterion, BoundaryResult, Objective};
pub use channel::{
    composite_channel, los_channel, scattered_channel, ChannelMatrix, PhaseModel, PowerCoupling,
    ScattererSet, WavefrontModel,
};
pub use error::{Error, Result};
pub use geometry::{ArraySpec, LinkScene, Point3, SceneKind};
