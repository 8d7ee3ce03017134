//! Point-mass pendulum reference shared by the integration tests.
//!
//! One vehicle on a cable attached at the payload centre is a pair of point
//! masses joined by a rigid rod. The oracle integrates that pair in plain
//! Cartesian coordinates with an explicit rod tension.

use swarmsling::geometry::rot_x;
use swarmsling::integrator::{simulate, ConstantInput, IntegratorConfig};
use swarmsling::quadrotor::{QuadrotorParams, WrenchCommand};
use swarmsling::swarm_dynamics::{LinkSpec, LinkState, PayloadParams, SwarmInput, SwarmParams, SwarmState};
use swarmsling::{Vec3, GRAVITY};

pub struct Pendulum {
    pub m0: f64,
    pub m1: f64,
    pub l: f64,
    pub g: f64,
    /// Constant force on the vehicle mass.
    pub u: Vec3,
}

/// `[p0, v0, p1, v1]`.
pub type PendulumState = [Vec3; 4];

impl Pendulum {
    fn deriv(&self, s: &PendulumState) -> PendulumState {
        let [_, v0, _, v1] = *s;
        let d = s[0] - s[2];
        let d_dot = v0 - v1;
        let tension = (d_dot.norm_squared() - d.dot(&self.u) / self.m1) / (self.l * (1.0 / self.m0 + 1.0 / self.m1));
        let e = d / self.l;
        let ge = self.g * Vec3::z();
        [v0, ge - tension * e / self.m0, v1, ge + (self.u + tension * e) / self.m1]
    }

    pub fn run(&self, s0: PendulumState, dt: f64, steps: usize) -> Vec<PendulumState> {
        let add = |s: &PendulumState, k: &PendulumState, h: f64| -> PendulumState { std::array::from_fn(|i| s[i] + k[i] * h) };
        let mut out = vec![s0];
        let mut s = s0;
        for _ in 0..steps {
            let k1 = self.deriv(&s);
            let k2 = self.deriv(&add(&s, &k1, dt / 2.0));
            let k3 = self.deriv(&add(&s, &k2, dt / 2.0));
            let k4 = self.deriv(&add(&s, &k3, dt));
            s = std::array::from_fn(|i| s[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0));
            out.push(s);
        }
        out
    }
}

/// Largest position gap between the swarm model and the oracle over `t_final`.
pub fn max_gap(t_final: f64, dt: f64) -> f64 {
    let quad = QuadrotorParams::default();
    let payload = PayloadParams::default();
    let l = 1.3;
    let params = SwarmParams::homogeneous(payload.clone(), quad.clone(), vec![LinkSpec::new(Vec3::zeros(), l)]);

    let tilt = rot_x(0.25);
    let thrust = 1.1 * (payload.mass + quad.mass) * GRAVITY;
    let input = SwarmInput { commands: vec![WrenchCommand::new(thrust, Vec3::zeros())] };
    let mut s = SwarmState::hover(Vec3::new(0.2, -0.1, 0.0), 1);
    s.v0 = Vec3::new(0.3, 0.1, -0.2);
    let q = Vec3::new(0.3, -0.2, 1.0).normalize();
    let w_raw = Vec3::new(0.4, 0.7, -0.1);
    s.links[0] = LinkState { q, omega: w_raw - q * q.dot(&w_raw) };
    s.quads[0].r = tilt;

    let cfg = IntegratorConfig::new(dt, t_final);
    let series = simulate(&s, &ConstantInput(input.clone()), &params, &cfg).unwrap();

    let w = s.links[0].omega;
    let oracle = Pendulum { m0: payload.mass, m1: quad.mass, l, g: GRAVITY, u: input.force(0, &tilt) };
    let s0 = [s.x0, s.v0, s.x0 - l * q, s.v0 - l * w.cross(&q)];
    let reference = oracle.run(s0, dt, cfg.steps());

    series
        .samples
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a.state.x0 - b[0]).norm().max((a.quad_positions[0] - b[2]).norm()))
        .fold(0.0, f64::max)
}
