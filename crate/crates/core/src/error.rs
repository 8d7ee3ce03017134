use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric (‖M + Mᵀ‖ = {defect:e})")]
    NonSkewInput { defect: f64 },

    #[error("matrix cannot be projected onto SO(3) (det = {det:e})")]
    DegenerateMatrix { det: f64 },

    #[error("vector cannot be normalized onto S² (norm = {norm:e})")]
    DegenerateDirection { norm: f64 },

    #[error("desired force vector vanishes (norm = {norm:e} N)")]
    ZeroThrustDirection { norm: f64 },

    #[error("desired heading b1d is parallel to the thrust axis b3d")]
    DegenerateHeading,

    #[error("controller singular at t = {t} s: {reason}")]
    ControllerSingular { t: f64, reason: String },

    #[error("mixer is singular (d = {arm_length}, c_tau_f = {torque_coeff})")]
    SingularMixer { arm_length: f64, torque_coeff: f64 },

    #[error("payload mass matrix is singular (condition number {condition:e})")]
    SingularMassMatrix { condition: f64 },

    #[error("invalid vehicle count {n} (need at least {min})")]
    BadCount { n: usize, min: usize },

    #[error("simulation diverged at t = {t} s")]
    Diverged { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state size mismatch: {links} links, {quads} quadrotors, {inputs} inputs")]
    SizeMismatch { links: usize, quads: usize, inputs: usize },
}
