//! Single-quadrotor plant, geometric tracking controller and rotor mixer.
//!
//! Axis convention: the inertial frame is z-down. Gravity acts along `+g e3`
//! and the total rotor thrust acts along `−R e3`, so a level hovering vehicle
//! has `R = I` and `f = m g`.

mod tracking;
mod trajectory;

pub use tracking::{simulate_tracking, TrackingConfig, TrackingRecord};
pub use trajectory::{
    Circle, DesiredTrajectory, Hover, LineSegment, TrajectorySample, TrajectoryTable,
    TRAJECTORY_HEADER,
};

use crate::error::{Error, Result};
use crate::geometry::{
    angular_velocity_error, attitude_error_fn, attitude_error_vec, hat, normalize_unit,
    project_to_rotation, E3,
};
use crate::integrator::ManifoldState;
use crate::{Mat3, Vec3, GRAVITY};

/// Desired force norm below which the thrust axis is undefined (N).
pub const THRUST_EPS: f64 = 1e-9;
/// Minimum `‖b3d × b1d‖` for a well-defined heading.
pub const ALIGN_EPS: f64 = 1e-9;

/// Physical constants of one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrotorParams {
    /// kg
    pub mass: f64,
    /// kg·m², body frame
    pub inertia: Mat3,
    /// Rotor arm length `d` (m).
    pub arm_length: f64,
    /// Torque-to-thrust ratio `c_τf` (m).
    pub torque_coeff: f64,
    /// m/s²
    pub gravity: f64,
    /// Total thrust capability of the vehicle (N).
    pub thrust_max: f64,
    /// Center to propeller-tip radius (m).
    pub prop_radius: f64,
}

impl Default for QuadrotorParams {
    /// 0.755 kg airframe with inertia diag(0.0820, 0.0845, 0.1377).
    fn default() -> Self {
        Self {
            mass: 0.755,
            inertia: Mat3::from_diagonal(&Vec3::new(0.0820, 0.0845, 0.1377)),
            arm_length: 0.315,
            torque_coeff: 0.0135,
            gravity: GRAVITY,
            thrust_max: 40.0,
            prop_radius: 0.1,
        }
    }
}

impl QuadrotorParams {
    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("arm_length", self.arm_length),
            ("torque_coeff", self.torque_coeff),
            ("thrust_max", self.thrust_max),
            ("prop_radius", self.prop_radius),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            return Err(Error::InvalidParameter(format!("gravity must be non-negative, got {}", self.gravity)));
        }
        check_spd("inertia", &self.inertia)
    }
}

pub(crate) fn check_spd(name: &str, m: &Mat3) -> Result<()> {
    if (m - m.transpose()).norm() > 1e-12 * m.norm().max(1.0) {
        return Err(Error::InvalidParameter(format!("{name} must be symmetric")));
    }
    if m.cholesky().is_none() {
        return Err(Error::InvalidParameter(format!("{name} must be positive definite")));
    }
    Ok(())
}

/// Position, velocity, attitude and body rate of one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadState {
    pub x: Vec3,
    pub v: Vec3,
    pub r: Mat3,
    pub omega: Vec3,
}

impl QuadState {
    /// At rest at `x`, level.
    pub fn at_rest(x: Vec3) -> Self {
        Self { x, v: Vec3::zeros(), r: Mat3::identity(), omega: Vec3::zeros() }
    }
}

/// Time derivative of a [`QuadState`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadStateDot {
    pub x_dot: Vec3,
    pub v_dot: Vec3,
    pub r_dot: Mat3,
    pub omega_dot: Vec3,
}

impl ManifoldState for QuadState {
    type Tangent = QuadStateDot;

    fn advance(&self, d: &QuadStateDot, h: f64) -> Self {
        Self {
            x: self.x + d.x_dot * h,
            v: self.v + d.v_dot * h,
            r: self.r + d.r_dot * h,
            omega: self.omega + d.omega_dot * h,
        }
    }

    fn retract(&mut self) -> Result<()> {
        self.r = project_to_rotation(&self.r)?;
        Ok(())
    }

    fn max_abs(&self) -> f64 {
        self.x.amax().max(self.v.amax()).max(self.r.amax()).max(self.omega.amax())
    }
}

/// Feedback gains `k_x, k_v, k_R, k_Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub kx: f64,
    pub kv: f64,
    pub kr: f64,
    pub komega: f64,
}

impl Gains {
    /// Shipped defaults: `k_x = 16 m`, `k_v = 5.6 m`, `k_R = 8.81`, `k_Ω = 2.54`.
    pub fn for_vehicle(params: &QuadrotorParams) -> Self {
        Self { kx: 16.0 * params.mass, kv: 5.6 * params.mass, kr: 8.81, komega: 2.54 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, k) in [("kx", self.kx), ("kv", self.kv), ("kr", self.kr), ("komega", self.komega)] {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidParameter(format!("gain {name} must be positive, got {k}")));
            }
        }
        Ok(())
    }
}

/// Total thrust `f` (N) and body moment `M` (N·m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrenchCommand {
    pub thrust: f64,
    pub moment: Vec3,
}

impl WrenchCommand {
    pub fn new(thrust: f64, moment: Vec3) -> Self {
        Self { thrust, moment }
    }
}

/// Rigid-body equations of motion for one vehicle.
pub fn quad_derivatives(s: &QuadState, u: &WrenchCommand, p: &QuadrotorParams) -> QuadStateDot {
    let v_dot = p.gravity * E3 - (u.thrust / p.mass) * (s.r * E3);
    let gyro = s.omega.cross(&(p.inertia * s.omega));
    let omega_dot = solve_spd(&p.inertia, &(u.moment - gyro));
    QuadStateDot { x_dot: s.v, v_dot, r_dot: s.r * hat(&s.omega), omega_dot }
}

/// `J⁻¹ b` for a symmetric positive-definite `J`.
pub(crate) fn solve_spd(j: &Mat3, b: &Vec3) -> Vec3 {
    match j.cholesky() {
        Some(ch) => ch.solve(b),
        None => j.try_inverse().map(|inv| inv * b).unwrap_or_else(|| Vec3::repeat(f64::NAN)),
    }
}

/// `−k_x e_x − k_v e_v − m g e3 + m ẍ_d`, the negated desired force.
fn force_vector(e_x: &Vec3, e_v: &Vec3, acc_d: &Vec3, gains: &Gains, p: &QuadrotorParams) -> Vec3 {
    -gains.kx * e_x - gains.kv * e_v - p.mass * p.gravity * E3 + p.mass * acc_d
}

/// Desired attitude `[b2d × b3d, b2d, b3d]` from the translational errors
/// and the desired heading `b1d`.
pub fn desired_attitude(
    e_x: &Vec3,
    e_v: &Vec3,
    acc_d: &Vec3,
    b1d: &Vec3,
    gains: &Gains,
    p: &QuadrotorParams,
) -> Result<Mat3> {
    let a = force_vector(e_x, e_v, acc_d, gains, p);
    let norm = a.norm();
    if !(norm > THRUST_EPS) {
        return Err(Error::ZeroThrustDirection { norm });
    }
    let b3 = -a / norm;
    let b1d = normalize_unit(b1d)?;
    let c = b3.cross(&b1d);
    let c_norm = c.norm();
    if !(c_norm > ALIGN_EPS) {
        return Err(Error::DegenerateHeading);
    }
    let b2 = c / c_norm;
    let b1 = b2.cross(&b3);
    Ok(Mat3::from_columns(&[b1, b2, b3]))
}

/// Total thrust `f = −(−k_x e_x − k_v e_v − m g e3 + m ẍ_d)·(R e3)`.
pub fn thrust_command(
    e_x: &Vec3,
    e_v: &Vec3,
    acc_d: &Vec3,
    r: &Mat3,
    gains: &Gains,
    p: &QuadrotorParams,
) -> f64 {
    -force_vector(e_x, e_v, acc_d, gains, p).dot(&(r * E3))
}

/// Body moment
/// `M = −k_R e_R − k_Ω e_Ω + Ω × JΩ − J(hat(Ω) RᵀR_d Ω_d − RᵀR_d Ω̇_d)`.
pub fn moment_command(
    r: &Mat3,
    r_d: &Mat3,
    omega: &Vec3,
    omega_d: &Vec3,
    omega_dot_d: &Vec3,
    gains: &Gains,
    p: &QuadrotorParams,
) -> Vec3 {
    let e_r = attitude_error_vec(r, r_d);
    let e_w = angular_velocity_error(r, r_d, omega, omega_d);
    let rel = r.transpose() * r_d;
    let j = &p.inertia;
    -gains.kr * e_r - gains.komega * e_w + omega.cross(&(j * omega))
        - j * (hat(omega) * rel * omega_d - rel * omega_dot_d)
}

/// Forward allocation matrix mapping rotor thrusts `(f1..f4)` to `(f, M1, M2, M3)`.
#[rustfmt::skip]
pub fn mixer_matrix(p: &QuadrotorParams) -> nalgebra::Matrix4<f64> {
    let (d, c) = (p.arm_length, p.torque_coeff);
    nalgebra::Matrix4::new(
        1.0, 1.0, 1.0, 1.0,
        0.0,  -d, 0.0,   d,
          d, 0.0,  -d, 0.0,
         -c,   c,  -c,   c,
    )
}

/// Rotor thrusts realizing a wrench (exact inverse of [`mixer_matrix`]).
pub fn mix_thrusts(w: &WrenchCommand, p: &QuadrotorParams) -> Result<[f64; 4]> {
    let (d, c) = (p.arm_length, p.torque_coeff);
    if !(d > 0.0 && c > 0.0) {
        return Err(Error::SingularMixer { arm_length: d, torque_coeff: c });
    }
    let base = 0.25 * w.thrust;
    let roll = w.moment.x / (2.0 * d);
    let pitch = w.moment.y / (2.0 * d);
    let yaw = w.moment.z / (4.0 * c);
    Ok([base + pitch - yaw, base - roll + yaw, base - pitch - yaw, base + roll + yaw])
}

/// Wrench produced by the given rotor thrusts.
pub fn forward_mix(rotors: &[f64; 4], p: &QuadrotorParams) -> WrenchCommand {
    let out = mixer_matrix(p) * nalgebra::Vector4::from_column_slice(rotors);
    WrenchCommand::new(out[0], Vec3::new(out[1], out[2], out[3]))
}

/// Clip each rotor to `[0, T_max / 4]`. Returns the clipped thrusts and
/// whether any rotor was limited.
pub fn saturate_rotors(rotors: &[f64; 4], p: &QuadrotorParams) -> ([f64; 4], bool) {
    let limit = 0.25 * p.thrust_max;
    let mut out = *rotors;
    let mut clipped = false;
    for f in out.iter_mut() {
        let c = f.clamp(0.0, limit);
        if c != *f {
            clipped = true;
            *f = c;
        }
    }
    (out, clipped)
}

/// Rotor thrusts that stay within `[0, T_max / 4]` while giving up as little
/// of the wrench as possible. Collective thrust is clamped first, then the
/// yaw moment is scaled down, then roll and pitch together. The result is
/// passed through [`saturate_rotors`] and flagged when any of this applied.
pub fn allocate_rotors(w: &WrenchCommand, p: &QuadrotorParams) -> Result<([f64; 4], bool)> {
    let full = mix_thrusts(w, p)?;
    let limit = 0.25 * p.thrust_max;
    let feasible = |r: &[f64; 4]| r.iter().all(|f| (0.0..=limit).contains(f));
    if feasible(&full) {
        return Ok((full, false));
    }
    let thrust = w.thrust.clamp(0.0, p.thrust_max);
    let tilt = mix_thrusts(&WrenchCommand::new(thrust, Vec3::new(w.moment.x, w.moment.y, 0.0)), p)?;
    let out = if feasible(&tilt) {
        let yaw = mix_thrusts(&WrenchCommand::new(0.0, Vec3::new(0.0, 0.0, w.moment.z)), p)?;
        blend(&tilt, &yaw, limit)
    } else {
        let base = mix_thrusts(&WrenchCommand::new(thrust, Vec3::zeros()), p)?;
        let dir = mix_thrusts(&WrenchCommand::new(0.0, Vec3::new(w.moment.x, w.moment.y, 0.0)), p)?;
        blend(&base, &dir, limit)
    };
    Ok((saturate_rotors(&out, p).0, true))
}

/// `a + λ b` for the largest `λ ∈ [0, 1]` keeping every rotor in
/// `[0, limit]`; `a` must already be inside.
fn blend(a: &[f64; 4], b: &[f64; 4], limit: f64) -> [f64; 4] {
    let lambda = a.iter().zip(b).fold(1.0_f64, |lam, (&ai, &bi)| {
        if bi > 0.0 {
            lam.min((limit - ai) / bi)
        } else if bi < 0.0 {
            lam.min(ai / -bi)
        } else {
            lam
        }
    });
    let lambda = lambda.max(0.0);
    std::array::from_fn(|i| a[i] + lambda * b[i])
}

/// Tracking errors at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingErrors {
    pub e_x: Vec3,
    pub e_v: Vec3,
    pub e_r: Vec3,
    pub e_omega: Vec3,
    pub psi: f64,
}

/// Controller output together with the errors it acted on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingStep {
    pub command: WrenchCommand,
    pub errors: TrackingErrors,
    pub r_d: Mat3,
}

/// Evaluate the full tracking controller at time `t`.
pub fn track_step(
    s: &QuadState,
    traj: &dyn DesiredTrajectory,
    t: f64,
    gains: &Gains,
    p: &QuadrotorParams,
) -> Result<TrackingStep> {
    let d = traj.sample(t);
    let r_d = desired_attitude(&(s.x - d.x), &(s.v - d.v), &d.a, &d.b1, gains, p)?;
    Ok(track_attitude(s, &d, &r_d, &d.omega, &d.omega_dot, gains, p))
}

/// Controller output for an already resolved desired attitude and body rate.
pub fn track_attitude(
    s: &QuadState,
    d: &TrajectorySample,
    r_d: &Mat3,
    omega_d: &Vec3,
    omega_dot_d: &Vec3,
    gains: &Gains,
    p: &QuadrotorParams,
) -> TrackingStep {
    let e_x = s.x - d.x;
    let e_v = s.v - d.v;
    let thrust = thrust_command(&e_x, &e_v, &d.a, &s.r, gains, p);
    let moment = moment_command(&s.r, r_d, &s.omega, omega_d, omega_dot_d, gains, p);
    let errors = TrackingErrors {
        e_x,
        e_v,
        e_r: attitude_error_vec(&s.r, r_d),
        e_omega: angular_velocity_error(&s.r, r_d, &s.omega, omega_d),
        psi: attitude_error_fn(&s.r, r_d),
    };
    TrackingStep { command: WrenchCommand::new(thrust, moment), errors, r_d: *r_d }
}
