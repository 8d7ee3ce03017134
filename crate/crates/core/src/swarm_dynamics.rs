//! Coupled dynamics of a rigid payload carried by `n` quadrotors on massless
//! rigid cables.
//!
//! Stored state is the payload pose and twist, each cable's direction `q_i`
//! (from the quadrotor towards its attachment point, inertial frame) and
//! angular velocity `ω_i`, and each quadrotor's attitude `R_i` and body rate
//! `Ω_i`. Quadrotor positions are derived from the payload pose and cable
//! directions, so cable lengths hold exactly.
//!
//! The payload translational and rotational equations are coupled through
//! `(ẍ₀, Ω̇₀)` and are solved together as one 6×6 linear system:
//!
//! ```text
//! M_q (ẍ₀ − g e3) − Σ mᵢ qᵢqᵢᵀ R₀ ρ̂ᵢ Ω̇₀                      = Σ Fᵢ
//! J̄₀ Ω̇₀ + Σ mᵢ ρ̂ᵢ R₀ᵀ qᵢqᵢᵀ (ẍ₀ − g e3) + Ω̂₀ J₀ Ω₀          = Σ ρ̂ᵢ R₀ᵀ Fᵢ
//!
//! M_q = m₀ I + Σ mᵢ qᵢqᵢᵀ
//! J̄₀  = J₀ − Σ mᵢ ρ̂ᵢ R₀ᵀ qᵢqᵢᵀ R₀ ρ̂ᵢ
//! Fᵢ  = uᵢ∥ − mᵢ lᵢ ‖ωᵢ‖² qᵢ − mᵢ qᵢqᵢᵀ R₀ Ω̂₀² ρᵢ
//! ```
//!
//! The rotational right-hand side carries no extra `mᵢ` in front of `Fᵢ`:
//! `Fᵢ` already has units of force and `ρ̂ᵢ R₀ᵀ Fᵢ` is the cable moment on the
//! payload. Scaling it by `mᵢ` again breaks agreement with a tension-based
//! Newton-Euler model whenever the attachment pattern is not symmetric.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::geometry::{hat, normalize_unit, project_to_rotation, project_transverse, E3};
use crate::integrator::ManifoldState;
use crate::quadrotor::{check_spd, solve_spd, QuadrotorParams, WrenchCommand};
use crate::{Mat3, Vec3};

/// Condition number above which the payload mass matrix counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Rigid box payload.
#[derive(Debug, Clone, PartialEq)]
pub struct PayloadParams {
    /// kg
    pub mass: f64,
    /// kg·m², body frame
    pub inertia: Mat3,
    /// (length, width, height) along the body x, y, z axes (m).
    pub dims: Vec3,
}

impl PayloadParams {
    /// Solid homogeneous box.
    pub fn solid_box(mass: f64, dims: Vec3) -> Self {
        let (l2, w2, h2) = (dims.x * dims.x, dims.y * dims.y, dims.z * dims.z);
        let inertia = Mat3::from_diagonal(&Vec3::new(w2 + h2, l2 + h2, l2 + w2)) * (mass / 12.0);
        Self { mass, inertia, dims }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("payload mass must be positive, got {}", self.mass)));
        }
        if self.dims.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidParameter("payload dimensions must be positive".into()));
        }
        check_spd("payload inertia", &self.inertia)
    }
}

impl Default for PayloadParams {
    /// 1.5 kg, 1 × 0.8 × 0.2 m box.
    fn default() -> Self {
        Self::solid_box(1.5, Vec3::new(1.0, 0.8, 0.2))
    }
}

/// Cable attachment point on the payload (body frame) and cable length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub rho: Vec3,
    pub length: f64,
}

impl LinkSpec {
    pub fn new(rho: Vec3, length: f64) -> Self {
        Self { rho, length }
    }

    /// Cable length must be positive and the attachment point must lie in the
    /// payload bounding box grown by 10 %.
    pub fn validate(&self, payload: &PayloadParams) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidParameter(format!("cable length must be positive, got {}", self.length)));
        }
        let half = payload.dims * 0.55;
        if self.rho.iter().zip(half.iter()).any(|(r, h)| !(r.abs() <= *h + 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "attachment {:?} lies outside the payload",
                self.rho.as_slice()
            )));
        }
        Ok(())
    }
}

/// Direction and angular velocity of one cable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub q: Vec3,
    pub omega: Vec3,
}

/// Attitude and body rate of one quadrotor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadAttitude {
    pub r: Mat3,
    pub omega: Vec3,
}

impl Default for QuadAttitude {
    fn default() -> Self {
        Self { r: Mat3::identity(), omega: Vec3::zeros() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub x0: Vec3,
    pub v0: Vec3,
    pub r0: Mat3,
    pub omega0: Vec3,
    pub links: Vec<LinkState>,
    pub quads: Vec<QuadAttitude>,
}

impl SwarmState {
    /// Level payload at rest at `x0`, cables vertical with every quadrotor
    /// directly above its attachment point.
    pub fn hover(x0: Vec3, n: usize) -> Self {
        Self {
            x0,
            v0: Vec3::zeros(),
            r0: Mat3::identity(),
            omega0: Vec3::zeros(),
            links: vec![LinkState { q: E3, omega: Vec3::zeros() }; n],
            quads: vec![QuadAttitude::default(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.links.len()
    }
}

/// Time derivative of a [`SwarmState`].
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmStateDot {
    pub x0_dot: Vec3,
    pub v0_dot: Vec3,
    pub r0_dot: Mat3,
    pub omega0_dot: Vec3,
    /// `(q̇ᵢ, ω̇ᵢ)`
    pub links: Vec<(Vec3, Vec3)>,
    /// `(Ṙᵢ, Ω̇ᵢ)`
    pub quads: Vec<(Mat3, Vec3)>,
}

impl SwarmStateDot {
    /// Euclidean norm of every component stacked together.
    pub fn norm(&self) -> f64 {
        let mut sum = self.x0_dot.norm_squared()
            + self.v0_dot.norm_squared()
            + self.r0_dot.norm_squared()
            + self.omega0_dot.norm_squared();
        for (a, b) in &self.links {
            sum += a.norm_squared() + b.norm_squared();
        }
        for (a, b) in &self.quads {
            sum += a.norm_squared() + b.norm_squared();
        }
        sum.sqrt()
    }
}

impl ManifoldState for SwarmState {
    type Tangent = SwarmStateDot;

    fn advance(&self, d: &SwarmStateDot, h: f64) -> Self {
        Self {
            x0: self.x0 + d.x0_dot * h,
            v0: self.v0 + d.v0_dot * h,
            r0: self.r0 + d.r0_dot * h,
            omega0: self.omega0 + d.omega0_dot * h,
            links: self
                .links
                .iter()
                .zip(&d.links)
                .map(|(l, (q_dot, w_dot))| LinkState { q: l.q + q_dot * h, omega: l.omega + w_dot * h })
                .collect(),
            quads: self
                .quads
                .iter()
                .zip(&d.quads)
                .map(|(a, (r_dot, w_dot))| QuadAttitude { r: a.r + r_dot * h, omega: a.omega + w_dot * h })
                .collect(),
        }
    }

    fn retract(&mut self) -> Result<()> {
        self.r0 = project_to_rotation(&self.r0)?;
        for link in &mut self.links {
            link.q = normalize_unit(&link.q)?;
            link.omega = project_transverse(&link.omega, &link.q);
        }
        for quad in &mut self.quads {
            quad.r = project_to_rotation(&quad.r)?;
        }
        Ok(())
    }

    fn max_abs(&self) -> f64 {
        let mut m = self.x0.amax().max(self.v0.amax()).max(self.r0.amax()).max(self.omega0.amax());
        for l in &self.links {
            m = m.max(l.q.amax()).max(l.omega.amax());
        }
        for a in &self.quads {
            m = m.max(a.r.amax()).max(a.omega.amax());
        }
        m
    }
}

/// Everything the dynamics need besides the state.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmParams {
    pub payload: PayloadParams,
    pub quads: Vec<QuadrotorParams>,
    pub links: Vec<LinkSpec>,
    pub gravity: f64,
}

impl SwarmParams {
    /// Identical quadrotors on the given cables.
    pub fn homogeneous(payload: PayloadParams, quad: QuadrotorParams, links: Vec<LinkSpec>) -> Self {
        let gravity = quad.gravity;
        Self { payload, quads: vec![quad; links.len()], links, gravity }
    }

    pub fn n(&self) -> usize {
        self.links.len()
    }

    /// `M_t = m₀ + Σ mᵢ`.
    pub fn total_mass(&self) -> f64 {
        self.payload.mass + self.quads.iter().map(|q| q.mass).sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        if self.links.is_empty() {
            return Err(Error::BadCount { n: 0, min: 1 });
        }
        if self.quads.len() != self.links.len() {
            return Err(Error::SizeMismatch { links: self.links.len(), quads: self.quads.len(), inputs: 0 });
        }
        if !(self.gravity >= 0.0 && self.gravity.is_finite()) {
            return Err(Error::InvalidParameter(format!("gravity must be non-negative, got {}", self.gravity)));
        }
        self.payload.validate()?;
        for q in &self.quads {
            q.validate()?;
        }
        for l in &self.links {
            l.validate(&self.payload)?;
        }
        Ok(())
    }
}

/// Per-quadrotor thrust and moment.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmInput {
    pub commands: Vec<WrenchCommand>,
}

impl SwarmInput {
    pub fn n(&self) -> usize {
        self.commands.len()
    }

    /// `uᵢ = −fᵢ Rᵢ e3`.
    pub fn force(&self, i: usize, r_i: &Mat3) -> Vec3 {
        -self.commands[i].thrust * (r_i * E3)
    }
}

/// Split `u` into components along and across the unit vector `q`.
pub fn control_decompose(u: &Vec3, q: &Vec3) -> (Vec3, Vec3) {
    let par = q * q.dot(u);
    (par, u - par)
}

/// Payload linear and angular acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayloadAccel {
    pub x0_dd: Vec3,
    pub omega0_dot: Vec3,
}

type Mat6 = SMatrix<f64, 6, 6>;
type Vec6 = SVector<f64, 6>;

fn check_sizes(s: &SwarmState, u: &SwarmInput, p: &SwarmParams) -> Result<()> {
    let n = p.n();
    if s.links.len() != n || s.quads.len() != n || u.n() != n || p.quads.len() != n {
        return Err(Error::SizeMismatch { links: s.links.len(), quads: s.quads.len(), inputs: u.n() });
    }
    Ok(())
}

/// `Fᵢ = uᵢ∥ − mᵢ lᵢ ‖ωᵢ‖² qᵢ − mᵢ qᵢqᵢᵀ R₀ Ω̂₀² ρᵢ`.
fn cable_force(i: usize, s: &SwarmState, u: &SwarmInput, p: &SwarmParams, omega0_hat2: &Mat3) -> Vec3 {
    let link = &s.links[i];
    let q = link.q;
    let m = p.quads[i].mass;
    let (u_par, _) = control_decompose(&u.force(i, &s.quads[i].r), &q);
    let centripetal = s.r0 * (omega0_hat2 * p.links[i].rho);
    u_par - m * p.links[i].length * link.omega.norm_squared() * q - m * q * q.dot(&centripetal)
}

/// Assemble the coupled payload system `A [ẍ₀; Ω̇₀] = b`.
fn payload_system(s: &SwarmState, u: &SwarmInput, p: &SwarmParams) -> (Mat6, Vec6) {
    let g = p.gravity * E3;
    let omega0_hat = hat(&s.omega0);
    let omega0_hat2 = omega0_hat * omega0_hat;
    let j0 = &p.payload.inertia;

    let mut m_q = Mat3::identity() * p.payload.mass;
    let mut a12 = Mat3::zeros();
    let mut a21 = Mat3::zeros();
    let mut j_bar = *j0;
    let mut force_sum = Vec3::zeros();
    let mut moment_sum = Vec3::zeros();

    // fixed summation order over i keeps results bitwise reproducible
    for i in 0..p.n() {
        let q = s.links[i].q;
        let m = p.quads[i].mass;
        let qq = q * q.transpose();
        let rho_hat = hat(&p.links[i].rho);
        let r0_rho_hat = s.r0 * rho_hat;
        let lever = rho_hat * s.r0.transpose();
        m_q += qq * m;
        a12 -= qq * r0_rho_hat * m;
        a21 += lever * qq * m;
        j_bar -= lever * qq * r0_rho_hat * m;
        let f = cable_force(i, s, u, p, &omega0_hat2);
        force_sum += f;
        moment_sum += lever * f;
    }

    let mut a = Mat6::zeros();
    a.fixed_view_mut::<3, 3>(0, 0).copy_from(&m_q);
    a.fixed_view_mut::<3, 3>(0, 3).copy_from(&a12);
    a.fixed_view_mut::<3, 3>(3, 0).copy_from(&a21);
    a.fixed_view_mut::<3, 3>(3, 3).copy_from(&j_bar);

    let top = m_q * g + force_sum;
    let bottom = a21 * g - omega0_hat * (j0 * s.omega0) + moment_sum;
    let mut b = Vec6::zeros();
    b.fixed_rows_mut::<3>(0).copy_from(&top);
    b.fixed_rows_mut::<3>(3).copy_from(&bottom);
    (a, b)
}

/// Solve the two payload equations for `(ẍ₀, Ω̇₀)`.
pub fn payload_accel(s: &SwarmState, u: &SwarmInput, p: &SwarmParams) -> Result<PayloadAccel> {
    check_sizes(s, u, p)?;
    let (a, b) = payload_system(s, u, p);
    let sv = a.singular_values();
    let condition = sv.max() / sv.min();
    if !(condition.is_finite() && condition <= MAX_CONDITION) {
        return Err(Error::SingularMassMatrix { condition });
    }
    let x = a.lu().solve(&b).ok_or(Error::SingularMassMatrix { condition })?;
    Ok(PayloadAccel {
        x0_dd: x.fixed_rows::<3>(0).into_owned(),
        omega0_dot: x.fixed_rows::<3>(3).into_owned(),
    })
}

/// Residuals of the translational and rotational payload equations for a
/// candidate acceleration pair.
pub fn payload_residual(s: &SwarmState, u: &SwarmInput, p: &SwarmParams, acc: &PayloadAccel) -> Result<(Vec3, Vec3)> {
    check_sizes(s, u, p)?;
    let (a, b) = payload_system(s, u, p);
    let mut x = Vec6::zeros();
    x.fixed_rows_mut::<3>(0).copy_from(&acc.x0_dd);
    x.fixed_rows_mut::<3>(3).copy_from(&acc.omega0_dot);
    let r = a * x - b;
    Ok((r.fixed_rows::<3>(0).into_owned(), r.fixed_rows::<3>(3).into_owned()))
}

/// Angular acceleration of cable `i`:
/// `ω̇ᵢ = (1/lᵢ) q̂ᵢ (ẍ₀ − g e3 − R₀ ρ̂ᵢ Ω̇₀ + R₀ Ω̂₀² ρᵢ) − (1/(mᵢ lᵢ)) q̂ᵢ uᵢ⊥`.
pub fn link_accel(
    i: usize,
    s: &SwarmState,
    acc: &PayloadAccel,
    u_perp: &Vec3,
    gravity: f64,
    quad: &QuadrotorParams,
    link: &LinkSpec,
) -> Vec3 {
    let q_hat = hat(&s.links[i].q);
    let omega0_hat = hat(&s.omega0);
    let rho = link.rho;
    let attach_acc = acc.x0_dd - gravity * E3 - s.r0 * (hat(&rho) * acc.omega0_dot)
        + s.r0 * (omega0_hat * (omega0_hat * rho));
    (q_hat * attach_acc) / link.length - (q_hat * u_perp) / (quad.mass * link.length)
}

/// `Ω̇ᵢ = Jᵢ⁻¹ (Mᵢ − Ωᵢ × Jᵢ Ωᵢ)`.
pub fn quad_attitude_accel(attitude: &QuadAttitude, moment: &Vec3, quad: &QuadrotorParams) -> Vec3 {
    let j = &quad.inertia;
    solve_spd(j, &(moment - attitude.omega.cross(&(j * attitude.omega))))
}

/// Full time derivative of the swarm state.
pub fn swarm_derivatives(s: &SwarmState, u: &SwarmInput, p: &SwarmParams) -> Result<SwarmStateDot> {
    let acc = payload_accel(s, u, p)?;
    let links = (0..p.n())
        .map(|i| {
            let link = &s.links[i];
            let (_, u_perp) = control_decompose(&u.force(i, &s.quads[i].r), &link.q);
            let omega_dot = link_accel(i, s, &acc, &u_perp, p.gravity, &p.quads[i], &p.links[i]);
            (link.omega.cross(&link.q), omega_dot)
        })
        .collect();
    let quads = s
        .quads
        .iter()
        .enumerate()
        .map(|(i, a)| (a.r * hat(&a.omega), quad_attitude_accel(a, &u.commands[i].moment, &p.quads[i])))
        .collect();
    Ok(SwarmStateDot {
        x0_dot: s.v0,
        v0_dot: acc.x0_dd,
        r0_dot: s.r0 * hat(&s.omega0),
        omega0_dot: acc.omega0_dot,
        links,
        quads,
    })
}

/// Quadrotor positions and velocities `(xᵢ, ẋᵢ)` implied by the state.
pub fn reconstruct_quads(s: &SwarmState, links: &[LinkSpec]) -> Vec<(Vec3, Vec3)> {
    let r0_dot = s.r0 * hat(&s.omega0);
    s.links
        .iter()
        .zip(links)
        .map(|(ls, spec)| {
            let x = s.x0 + s.r0 * spec.rho - spec.length * ls.q;
            let x_dot = s.v0 + r0_dot * spec.rho - spec.length * ls.omega.cross(&ls.q);
            (x, x_dot)
        })
        .collect()
}

/// Equal thrust `M_t g / n` on every vehicle, zero moments.
pub fn hover_inputs(p: &SwarmParams) -> SwarmInput {
    let n = p.n();
    let f = p.total_mass() * p.gravity / n as f64;
    SwarmInput { commands: vec![WrenchCommand::new(f, Vec3::zeros()); n] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::exp_so3;
    use crate::GRAVITY;
    use proptest::prelude::*;

    const REFERENCE_RHO: [[f64; 3]; 3] = [[-0.2309, 0.4, -0.1], [-0.2309, -0.4, -0.1], [0.4619, 0.0, -0.1]];

    fn symmetric_three() -> SwarmParams {
        let r = 0.8 / 3f64.sqrt();
        let links = (1..=3)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / 3.0;
                LinkSpec::new(Vec3::new(r * th.cos(), r * th.sin(), -0.1), 1.0)
            })
            .collect();
        SwarmParams::homogeneous(PayloadParams::default(), QuadrotorParams::default(), links)
    }

    fn vec3(scale: f64) -> impl Strategy<Value = Vec3> {
        (-scale..scale, -scale..scale, -scale..scale).prop_map(|(a, b, c)| Vec3::new(a, b, c))
    }

    fn unit3() -> impl Strategy<Value = Vec3> {
        vec3(1.0).prop_filter("nonzero", |v| v.norm() > 0.1).prop_map(|v| v.normalize())
    }

    #[test]
    fn decompose_examples() {
        let (p, q) = control_decompose(&E3, &E3);
        assert_eq!((p, q), (E3, Vec3::zeros()));
        let (p, q) = control_decompose(&Vec3::x(), &E3);
        assert_eq!((p, q), (Vec3::zeros(), Vec3::x()));
    }

    #[test]
    fn hover_inputs_match_total_weight() {
        let p = symmetric_three();
        assert!((p.total_mass() - 3.765).abs() < 1e-12);
        let u = hover_inputs(&p);
        for c in &u.commands {
            assert!((c.thrust - 12.31155).abs() < 1e-12, "{}", c.thrust);
            assert_eq!(c.moment, Vec3::zeros());
        }
        let single = SwarmParams::homogeneous(
            PayloadParams::default(),
            QuadrotorParams::default(),
            vec![LinkSpec::new(Vec3::new(0.0, 0.0, -0.1), 1.0)],
        );
        let f = hover_inputs(&single).commands[0].thrust;
        assert!((f - (1.5 + 0.755) * GRAVITY).abs() < 1e-12);
    }

    #[test]
    fn hover_equilibrium_has_zero_accelerations() {
        let p = symmetric_three();
        let s = SwarmState::hover(Vec3::zeros(), 3);
        let acc = payload_accel(&s, &hover_inputs(&p), &p).unwrap();
        assert!(acc.x0_dd.norm() < 1e-12, "{}", acc.x0_dd);
        assert!(acc.omega0_dot.norm() < 1e-12, "{}", acc.omega0_dot);
        let d = swarm_derivatives(&s, &hover_inputs(&p), &p).unwrap();
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn free_fall_without_thrust() {
        let p = symmetric_three();
        let s = SwarmState::hover(Vec3::zeros(), 3);
        let u = SwarmInput { commands: vec![WrenchCommand::new(0.0, Vec3::zeros()); 3] };
        let d = swarm_derivatives(&s, &u, &p).unwrap();
        assert!((d.v0_dot - GRAVITY * E3).norm() < 1e-12);
        assert!(d.omega0_dot.norm() < 1e-12);
        for (q_dot, w_dot) in &d.links {
            assert_eq!(*q_dot, Vec3::zeros());
            assert!(w_dot.norm() < 1e-12);
        }
    }

    #[test]
    fn single_vehicle_scalar_reduction() {
        // M_q = (m0 + m1) along e3 with q = e3, so u = −(m0 + m1) g e3 holds the payload
        let quad = QuadrotorParams::default();
        let payload = PayloadParams::default();
        let p = SwarmParams::homogeneous(payload.clone(), quad.clone(), vec![LinkSpec::new(Vec3::zeros(), 1.0)]);
        let s = SwarmState::hover(Vec3::zeros(), 1);
        let u = SwarmInput { commands: vec![WrenchCommand::new((payload.mass + quad.mass) * GRAVITY, Vec3::zeros())] };
        let acc = payload_accel(&s, &u, &p).unwrap();
        assert!(acc.x0_dd.norm() < 1e-13);
    }

    #[test]
    fn single_vehicle_sideways_push() {
        // n = 1, ρ = 0, q = e3, u⊥ = c e1. Point-mass pendulum by hand: the
        // payload feels only the tension, so ẍ₀ stays on e3 and the cable
        // turns with ω̇ = −(c / (m₁ l)) q × e1 = −(c / (m₁ l)) e2.
        let quad = QuadrotorParams::default();
        let p = SwarmParams::homogeneous(PayloadParams::default(), quad.clone(), vec![LinkSpec::new(Vec3::zeros(), 1.0)]);
        let s = SwarmState::hover(Vec3::zeros(), 1);
        let c = 0.8;
        let f_hover = p.total_mass() * GRAVITY;
        // tilted thrust whose e1 component is c
        let u_vec = Vec3::new(c, 0.0, -f_hover);
        let f = u_vec.norm();
        let b3 = -u_vec / f;
        let b2 = b3.cross(&Vec3::x()).normalize();
        let r = Mat3::from_columns(&[b2.cross(&b3), b2, b3]);
        let mut s = s;
        s.quads[0].r = r;
        let u = SwarmInput { commands: vec![WrenchCommand::new(f, Vec3::zeros())] };
        assert!((u.force(0, &r) - u_vec).norm() < 1e-12);
        let d = swarm_derivatives(&s, &u, &p).unwrap();
        assert!(d.v0_dot.norm() < 1e-12);
        let expected = -(c / (quad.mass * 1.0)) * Vec3::y();
        assert!((d.links[0].1 - expected).norm() < 1e-12, "{}", d.links[0].1);
    }

    #[test]
    fn attitude_accel_examples() {
        let quad = QuadrotorParams { inertia: Mat3::from_diagonal(&Vec3::new(2.0, 3.0, 4.0)), ..Default::default() };
        let rest = QuadAttitude::default();
        assert_eq!(quad_attitude_accel(&rest, &Vec3::zeros(), &quad), Vec3::zeros());
        let w = quad_attitude_accel(&rest, &Vec3::x(), &quad);
        assert!((w - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-15);

        // J = diag(0.0820, 0.0845, 0.1377), Ω = (1, 1, 0): Ω × JΩ = (0, 0, 0.0845 − 0.0820)
        let quad = QuadrotorParams::default();
        let spin = QuadAttitude { r: Mat3::identity(), omega: Vec3::new(1.0, 1.0, 0.0) };
        let w = quad_attitude_accel(&spin, &Vec3::zeros(), &quad);
        let expected = Vec3::new(0.0, 0.0, -(0.0845 - 0.0820) / 0.1377);
        assert!((w - expected).norm() < 1e-15, "{w}");
    }

    #[test]
    fn reconstruct_example() {
        let links = [LinkSpec::new(Vec3::new(0.4619, 0.0, -0.1), 1.0)];
        let s = SwarmState::hover(Vec3::zeros(), 1);
        let (x, x_dot) = reconstruct_quads(&s, &links)[0];
        assert!((x - Vec3::new(0.4619, 0.0, -1.1)).norm() < 1e-15);
        assert_eq!(x_dot, Vec3::zeros());
    }

    #[test]
    fn four_decimal_attachment_set_is_slightly_asymmetric() {
        // The reference ρ are rounded to four decimals and leave a 1e-4 m
        // centroid offset along x. The resulting hover torque is small but
        // not zero.
        let links = REFERENCE_RHO.iter().map(|r| LinkSpec::new(Vec3::from(*r), 1.0)).collect();
        let p = SwarmParams::homogeneous(PayloadParams::default(), QuadrotorParams::default(), links);
        let s = SwarmState::hover(Vec3::zeros(), 3);
        let acc = payload_accel(&s, &hover_inputs(&p), &p).unwrap();
        assert!(acc.omega0_dot.norm() > 1e-5);
        assert!(acc.omega0_dot.norm() < 1e-2);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let p = symmetric_three();
        let s = SwarmState::hover(Vec3::zeros(), 2);
        assert!(matches!(payload_accel(&s, &hover_inputs(&p), &p), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn degenerate_payload_is_singular() {
        let mut p = symmetric_three();
        p.payload.inertia = Mat3::from_diagonal(&Vec3::new(1e-16, 1e-16, 1e-16));
        for l in &mut p.links {
            l.rho = Vec3::zeros();
        }
        let s = SwarmState::hover(Vec3::zeros(), 3);
        assert!(matches!(payload_accel(&s, &hover_inputs(&p), &p), Err(Error::SingularMassMatrix { .. })));
    }

    #[test]
    fn params_validation() {
        assert!(symmetric_three().validate().is_ok());
        let mut p = symmetric_three();
        p.links[0].rho = Vec3::new(2.0, 0.0, 0.0);
        assert!(p.validate().is_err());
        let mut p = symmetric_three();
        p.links.clear();
        p.quads.clear();
        assert!(matches!(p.validate(), Err(Error::BadCount { .. })));
    }

    #[test]
    fn retraction_restores_invariants() {
        let mut s = SwarmState::hover(Vec3::zeros(), 2);
        s.r0 += Mat3::identity() * 1e-6;
        s.links[0].q = Vec3::new(0.01, 0.0, 1.1);
        s.links[0].omega = Vec3::new(0.0, 1.0, 0.5);
        s.quads[1].r = exp_so3(&Vec3::new(0.1, 0.2, 0.3)) * 1.001;
        s.retract().unwrap();
        assert!(crate::geometry::orthonormality_defect(&s.r0) < 1e-12);
        assert!((s.links[0].q.norm() - 1.0).abs() < 1e-15);
        assert!(s.links[0].q.dot(&s.links[0].omega).abs() < 1e-15);
        assert!(crate::geometry::orthonormality_defect(&s.quads[1].r) < 1e-12);
    }

    proptest! {
        #[test]
        fn decompose_reconstructs_and_is_orthogonal(u in vec3(10.0), q in unit3()) {
            let (par, perp) = control_decompose(&u, &q);
            prop_assert!((par + perp - u).amax() <= 1e-12);
            prop_assert!(perp.dot(&q).abs() <= 1e-12);
            prop_assert!(par.cross(&q).norm() <= 1e-12);
        }

        #[test]
        fn derivatives_satisfy_payload_equations(
            q1 in unit3(), q2 in unit3(), q3 in unit3(),
            w in vec3(1.0), w0 in vec3(1.0), att in vec3(0.5), tilt in vec3(0.4),
        ) {
            let p = symmetric_three();
            let mut s = SwarmState::hover(Vec3::zeros(), 3);
            s.r0 = exp_so3(&att);
            s.omega0 = w0;
            for (link, q) in s.links.iter_mut().zip([q1, q2, q3]) {
                link.q = q;
                link.omega = project_transverse(&w, &q);
            }
            for quad in &mut s.quads {
                quad.r = exp_so3(&tilt);
            }
            let u = hover_inputs(&p);
            let d = swarm_derivatives(&s, &u, &p).unwrap();
            let acc = PayloadAccel { x0_dd: d.v0_dot, omega0_dot: d.omega0_dot };
            let (rt, rr) = payload_residual(&s, &u, &p, &acc).unwrap();
            prop_assert!(rt.norm() <= 1e-9 && rr.norm() <= 1e-9);
            for (link, (q_dot, w_dot)) in s.links.iter().zip(&d.links) {
                prop_assert!(q_dot.dot(&link.q).abs() <= 1e-12);
                prop_assert!(w_dot.dot(&link.q).abs() <= 1e-12);
            }
        }

        #[test]
        fn reconstructed_cables_keep_their_length(q in unit3(), att in vec3(1.0), x0 in vec3(5.0)) {
            let p = symmetric_three();
            let mut s = SwarmState::hover(x0, 3);
            s.r0 = exp_so3(&att);
            s.links[1].q = q;
            for ((x, _), spec) in reconstruct_quads(&s, &p.links).iter().zip(&p.links) {
                let attach = s.x0 + s.r0 * spec.rho;
                prop_assert!(((x - attach).norm() - spec.length).abs() <= 1e-12);
            }
        }
    }
}
