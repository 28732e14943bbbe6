//! Pontryagin extremals for kinematic and dynamic optimal control of
//! nonholonomic systems, modelled on Lie algebroids with quasi-velocities.
//!
//! The numerical core is generic over [`Real`] (`f64` or `f32`); the aliases
//! below fix it to `f64`.

pub mod algebroid;
pub mod cli;
pub mod diff;
pub mod error;
pub mod examples;
pub mod integrator;
pub mod linalg;
pub mod pontryagin;
pub mod sampling;
pub mod scalar;
pub mod validate;

pub use algebroid::{BasePoint, ConstraintDistribution, LieAlgebroid, Matrix, StructureTensor};
pub use error::{Error, Result};
pub use examples::{ExampleProblem, ProblemKind};
pub use integrator::{integrate, integrate_adaptive, Monitor, Trajectory};
pub use pontryagin::{
    DynamicCost, DynamicProblem, DynamicState, KinematicCost, KinematicProblem, KinematicState,
};
pub use scalar::Real;
pub use validate::ValidationReport;

pub type Algebroid = LieAlgebroid<f64>;
pub type Point = BasePoint<f64>;
pub type Example = ExampleProblem<f64>;
pub type Kinematic = KinematicProblem<f64>;
pub type Dynamic = DynamicProblem<f64>;
pub type KinState = KinematicState<f64>;
pub type DynState = DynamicState<f64>;
pub type Path = Trajectory<f64>;
pub type Report = ValidationReport<f64>;
