//! Fixed-step explicit RK4 for states that live partly on manifolds.
//!
//! Stage states are formed additively in the embedding space (rotation
//! matrices are added entrywise) and the accepted state is pulled back onto
//! its manifold by [`ManifoldState::retract`].

use crate::error::{Error, Result};
use crate::quadrotor::{moment_command, Gains, QuadrotorParams, WrenchCommand};
use crate::swarm_dynamics::{reconstruct_quads, swarm_derivatives, SwarmInput, SwarmParams, SwarmState};
use crate::{Mat3, Vec3};

/// A state that can be advanced along a tangent in its embedding space.
pub trait ManifoldState: Clone {
    type Tangent;

    /// `self + h * d`, evaluated entrywise in the embedding.
    fn advance(&self, d: &Self::Tangent, h: f64) -> Self;

    /// Project the state back onto its manifold.
    fn retract(&mut self) -> Result<()>;

    /// Largest absolute entry, used by the divergence guard.
    fn max_abs(&self) -> f64;
}

impl ManifoldState for f64 {
    type Tangent = f64;

    fn advance(&self, d: &f64, h: f64) -> f64 {
        self + h * d
    }

    fn retract(&mut self) -> Result<()> {
        Ok(())
    }

    fn max_abs(&self) -> f64 {
        self.abs()
    }
}

/// Step size, horizon and retraction cadence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
    pub retraction_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_final: 10.0, retraction_every: 1 }
    }
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self { dt, t_final, retraction_every: 1 }
    }

    /// A zero horizon is accepted and yields only the initial sample.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        if self.retraction_every == 0 {
            return Err(Error::InvalidParameter("retraction_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps, rounding `t_final / dt` to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// State magnitude above which a run is declared diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// One classical Runge-Kutta step of size `dt` from time `t`. The result is
/// not retracted.
pub fn rk4_step<S, F>(state: &S, t: f64, dt: f64, mut deriv: F) -> Result<S>
where
    S: ManifoldState,
    F: FnMut(f64, &S) -> Result<S::Tangent>,
{
    let half = 0.5 * dt;
    let k1 = deriv(t, state)?;
    let k2 = deriv(t + half, &state.advance(&k1, half))?;
    let k3 = deriv(t + half, &state.advance(&k2, half))?;
    let k4 = deriv(t + dt, &state.advance(&k3, dt))?;
    Ok(state
        .advance(&k1, dt / 6.0)
        .advance(&k2, dt / 3.0)
        .advance(&k3, dt / 3.0)
        .advance(&k4, dt / 6.0))
}

/// Integrate from `t = 0` over `cfg`, calling `observe(step, t, state)` on
/// the initial state and after every accepted step.
pub fn integrate<S, F, O>(initial: &S, cfg: &IntegratorConfig, mut deriv: F, mut observe: O) -> Result<S>
where
    S: ManifoldState,
    F: FnMut(f64, &S) -> Result<S::Tangent>,
    O: FnMut(usize, f64, &S) -> Result<()>,
{
    cfg.validate()?;
    let mut state = initial.clone();
    observe(0, 0.0, &state)?;
    for k in 0..cfg.steps() {
        let t = k as f64 * cfg.dt;
        let mut next = rk4_step(&state, t, cfg.dt, &mut deriv)?;
        let t_next = (k + 1) as f64 * cfg.dt;
        if (k + 1) % cfg.retraction_every == 0 {
            next.retract()?;
        }
        let size = next.max_abs();
        if !size.is_finite() || size > DIVERGENCE_LIMIT {
            return Err(Error::Diverged { t: t_next });
        }
        state = next;
        observe(k + 1, t_next, &state)?;
    }
    Ok(state)
}

/// Source of per-vehicle thrust and moment during a swarm run.
pub trait InputPolicy {
    fn inputs(&self, t: f64, state: &SwarmState) -> SwarmInput;
}

/// Fixed commands, e.g. [`hover_inputs`](crate::swarm_dynamics::hover_inputs).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantInput(pub SwarmInput);

impl InputPolicy for ConstantInput {
    fn inputs(&self, _t: f64, _state: &SwarmState) -> SwarmInput {
        self.0.clone()
    }
}

/// Fixed thrusts with each vehicle's moment from the geometric attitude
/// controller regulating `Rᵢ` to level (`R_d = I`, `Ω_d = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct AttitudeHold {
    pub thrusts: Vec<f64>,
    pub gains: Gains,
    pub vehicles: Vec<QuadrotorParams>,
}

impl InputPolicy for AttitudeHold {
    fn inputs(&self, _t: f64, state: &SwarmState) -> SwarmInput {
        let level = Mat3::identity();
        let zero = Vec3::zeros();
        let commands = self
            .thrusts
            .iter()
            .zip(&state.quads)
            .zip(&self.vehicles)
            .map(|((&f, q), p)| {
                WrenchCommand::new(f, moment_command(&q.r, &level, &q.omega, &zero, &zero, &self.gains, p))
            })
            .collect();
        SwarmInput { commands }
    }
}

/// One sampled instant of a swarm run.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: SwarmState,
    pub input: SwarmInput,
    /// Derived vehicle positions `xᵢ`.
    pub quad_positions: Vec<Vec3>,
}

/// Trajectory of a swarm run, one sample per step including `t = 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub samples: Vec<Sample>,
}

impl TimeSeries {
    /// Largest `|z₀(t) − z₀(0)|`.
    pub fn max_payload_dz(&self) -> f64 {
        let z0 = self.samples.first().map_or(0.0, |s| s.state.x0.z);
        self.samples.iter().map(|s| (s.state.x0.z - z0).abs()).fold(0.0, f64::max)
    }

    /// Largest `‖x₀(t) − x₀(0)‖`.
    pub fn max_payload_displacement(&self) -> f64 {
        let Some(first) = self.samples.first() else { return 0.0 };
        self.samples.iter().map(|s| (s.state.x0 - first.state.x0).norm()).fold(0.0, f64::max)
    }
}

/// Simulate the swarm from `initial` under `policy`.
pub fn simulate(
    initial: &SwarmState,
    policy: &dyn InputPolicy,
    params: &SwarmParams,
    cfg: &IntegratorConfig,
) -> Result<TimeSeries> {
    params.validate()?;
    let mut series = TimeSeries { samples: Vec::with_capacity(cfg.steps() + 1) };
    integrate(
        initial,
        cfg,
        |t, s| swarm_derivatives(s, &policy.inputs(t, s), params),
        |_, t, s| {
            series.samples.push(Sample {
                t,
                state: s.clone(),
                input: policy.inputs(t, s),
                quad_positions: reconstruct_quads(s, &params.links).into_iter().map(|(x, _)| x).collect(),
            });
            Ok(())
        },
    )?;
    Ok(series)
}
