//! Pontryagin extremal systems for kinematic and dynamic optimal control on
//! a Lie algebroid with an adapted constraint distribution.

mod control;
mod cost;
mod dynamic;
mod kinematic;

pub use control::{solve_stationary, ControlSolve, ControlSolveOptions};
pub use cost::{DynamicCost, KinematicCost};
pub use dynamic::{dynamic_abnormal_rhs, DynamicProblem, DynamicState};
pub use kinematic::{kinematic_abnormal_rhs, KinematicProblem, KinematicState};

/// Input bound on `|mu_a|` (and `|pi|`) for abnormal extremals.
pub const ABNORMAL_TOL: f64 = 1e-9;

/// Algebraic side conditions of an abnormal extremal, evaluated at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbnormalResiduals<T> {
    /// `|mu_a|_inf`, must stay zero.
    pub constrained_momentum: T,
    /// `|mu_B C^B_{ab} v^b|_inf` over the constrained rows.
    pub bracket_condition: T,
    /// `|mu_A|_inf`; an abnormal extremal needs this nonzero.
    pub complementary_momentum: T,
    /// `|pi|_inf`, dynamic problems only.
    pub pi: Option<T>,
}
