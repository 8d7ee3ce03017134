use std::cell::Cell;

use log::warn;

use super::{
    allocate_rotors, desired_attitude, forward_mix, mix_thrusts, quad_derivatives, track_attitude,
    DesiredTrajectory, Gains, QuadState, QuadrotorParams, TrackingErrors, WrenchCommand,
};
use crate::error::{Error, Result};
use crate::geometry::vee_unchecked;
use crate::integrator::{integrate, IntegratorConfig};
use crate::{Mat3, Vec3};

/// Closed-loop run settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingConfig {
    pub integrator: IntegratorConfig,
    /// Keep rotor thrusts within `[0, T_max / 4]` via [`allocate_rotors`].
    pub saturate: bool,
    /// Feed forward `Ω_d` and `Ω̇_d` estimated by differencing `R_d` between
    /// control updates. Otherwise the trajectory's own rates are used.
    pub rate_feedforward: bool,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self { integrator: IntegratorConfig::new(1e-3, 10.0), saturate: true, rate_feedforward: true }
    }
}

/// One row of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingRecord {
    pub t: f64,
    pub state: QuadState,
    pub errors: TrackingErrors,
    /// Wrench requested by the controller.
    pub command: WrenchCommand,
    /// Rotor thrusts actually applied.
    pub rotors: [f64; 4],
    pub saturated: bool,
}

/// Backward-difference estimate of the desired body rate and its derivative.
/// Both read zero until enough history exists.
#[derive(Debug, Default)]
struct RateEstimator {
    attitude: Option<(f64, Mat3)>,
    rate: Option<(f64, Vec3)>,
}

impl RateEstimator {
    fn update(&mut self, t: f64, r_d: &Mat3) -> (Vec3, Vec3) {
        let omega = match self.attitude {
            Some((t0, r0)) if t > t0 => {
                let rel = r0.transpose() * r_d;
                Some(0.5 * vee_unchecked(&(rel - rel.transpose())) / (t - t0))
            }
            _ => None,
        };
        let omega_dot = match (self.rate, omega) {
            (Some((t0, w0)), Some(w)) if t > t0 => (w - w0) / (t - t0),
            _ => Vec3::zeros(),
        };
        self.attitude = Some((t, *r_d));
        if let Some(w) = omega {
            self.rate = Some((t, w));
        }
        (omega.unwrap_or_else(Vec3::zeros), omega_dot)
    }
}

/// Fly the geometric controller against `traj`. The command is computed at
/// the start of each step and held for its duration.
pub fn simulate_tracking(
    initial: &QuadState,
    traj: &dyn DesiredTrajectory,
    gains: &Gains,
    params: &QuadrotorParams,
    cfg: &TrackingConfig,
) -> Result<Vec<TrackingRecord>> {
    params.validate()?;
    gains.validate()?;
    let mut records = Vec::with_capacity(cfg.integrator.steps() + 1);
    let mut saturation_warned = false;

    let mut rates = RateEstimator::default();
    let mut control = |t: f64, s: &QuadState| -> Result<(TrackingRecord, WrenchCommand)> {
        let d = traj.sample(t);
        let r_d = desired_attitude(&(s.x - d.x), &(s.v - d.v), &d.a, &d.b1, gains, params)
            .map_err(|e| match e {
                Error::DegenerateHeading | Error::ZeroThrustDirection { .. } => {
                    Error::ControllerSingular { t, reason: e.to_string() }
                }
                other => other,
            })?;
        let (omega_d, omega_dot_d) =
            if cfg.rate_feedforward { rates.update(t, &r_d) } else { (d.omega, d.omega_dot) };
        let step = track_attitude(s, &d, &r_d, &omega_d, &omega_dot_d, gains, params);
        let (rotors, saturated) = if cfg.saturate {
            allocate_rotors(&step.command, params)?
        } else {
            (mix_thrusts(&step.command, params)?, false)
        };
        let applied = if saturated { forward_mix(&rotors, params) } else { step.command };
        let rec = TrackingRecord {
            t,
            state: s.clone(),
            errors: step.errors,
            command: step.command,
            rotors,
            saturated,
        };
        Ok((rec, applied))
    };

    let held = Cell::new(WrenchCommand::new(0.0, Default::default()));
    integrate(
        initial,
        &cfg.integrator,
        |_, s| Ok(quad_derivatives(s, &held.get(), params)),
        |_, t, s| {
            let (rec, applied) = control(t, s)?;
            if rec.saturated && !saturation_warned {
                warn!("rotor thrust saturated at t = {t:.3} s");
                saturation_warned = true;
            }
            held.set(applied);
            records.push(rec);
            Ok(())
        },
    )?;
    Ok(records)
}
