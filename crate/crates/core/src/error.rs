use thiserror::Error;

use crate::robot::JointId;

pub type Result<T, E = VineError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum VineError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate stiffness: EI = {0} N·m² (must be > 0)")]
    DegenerateStiffness(f64),

    #[error("stiffness calibration missing for {0}")]
    UnfittedCalibration(String),

    #[error("no pressure given for joint {0}")]
    MissingJointPressure(JointId),

    #[error("equilibrium did not converge after {iterations} iterations (residual {residual:.3e} m)")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("target angle {target_deg:.1}° unreachable: {reason}")]
    UnreachableAngle { target_deg: f64, reason: String },

    #[error("overpressure: {pressure:.0} Pa reached limit {limit:.0} Pa ({what})")]
    Overpressure { what: String, pressure: f64, limit: f64 },

    #[error("pressurized joint {0} reached the inversion front")]
    BoundaryViolation(JointId),

    #[error("nothing to retract: deployed length is zero")]
    EmptyPlan,

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("zero pressure differential")]
    ZeroDifferential,

    #[error("catalog key not found: {0}")]
    NotFound(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("operation not valid in phase {0}")]
    InvalidPhase(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> VineError {
    VineError::Domain(msg.into())
}
