use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value from {what}")]
    NonFinite { what: String },

    #[error("structure functions not antisymmetric: |C^{gamma}_{{{alpha}{beta}}} + C^{gamma}_{{{beta}{alpha}}}| = {residual:e}")]
    Antisymmetry {
        gamma: usize,
        alpha: usize,
        beta: usize,
        residual: f64,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("control Hessian singular or ill-conditioned (condition {condition:e})")]
    Regularity { condition: f64 },

    #[error("control solve did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("abnormal extremal precondition violated: {what} = {value:e}")]
    AbnormalityViolated { what: &'static str, value: f64 },

    #[error("unknown {kind}: {name}")]
    Unknown { kind: &'static str, name: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
