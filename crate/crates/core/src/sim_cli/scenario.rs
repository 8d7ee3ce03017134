//! Hover scenario files. Every dimensional key carries its SI unit.

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::config_planner::{attachment_points, plan, PlannerRequest, RadiusPolicy, Scenario as PlanScenario};
use crate::integrator::IntegratorConfig;
use crate::quadrotor::{Gains, QuadrotorParams};
use crate::swarm_dynamics::{hover_inputs, LinkSpec, PayloadParams, SwarmParams, SwarmState};
use crate::{Mat3, Vec3, GRAVITY};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayloadSpec {
    pub mass_kg: f64,
    pub dims_m: [f64; 3],
    /// Solid-box inertia when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia_kg_m2: Option<[[f64; 3]; 3]>,
}

impl Default for PayloadSpec {
    fn default() -> Self {
        Self { mass_kg: 1.5, dims_m: [1.0, 0.8, 0.2], inertia_kg_m2: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleSpec {
    pub mass_kg: f64,
    pub inertia_kg_m2: [[f64; 3]; 3],
    pub arm_length_m: f64,
    pub torque_coeff_m: f64,
    pub thrust_max_n: f64,
    pub prop_radius_m: f64,
}

impl Default for VehicleSpec {
    fn default() -> Self {
        Self::from(&QuadrotorParams::default())
    }
}

impl From<&QuadrotorParams> for VehicleSpec {
    fn from(p: &QuadrotorParams) -> Self {
        Self {
            mass_kg: p.mass,
            inertia_kg_m2: mat_rows(&p.inertia),
            arm_length_m: p.arm_length,
            torque_coeff_m: p.torque_coeff,
            thrust_max_n: p.thrust_max,
            prop_radius_m: p.prop_radius,
        }
    }
}

impl VehicleSpec {
    pub fn params(&self, gravity: f64) -> QuadrotorParams {
        QuadrotorParams {
            mass: self.mass_kg,
            inertia: rows_mat(&self.inertia_kg_m2),
            arm_length: self.arm_length_m,
            torque_coeff: self.torque_coeff_m,
            gravity,
            thrust_max: self.thrust_max_n,
            prop_radius: self.prop_radius_m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FleetKeyword {
    Auto,
}

/// Vehicle count, or `"auto"` to take it from the planner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Fleet {
    Count(usize),
    Keyword(FleetKeyword),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSpec {
    pub kx: f64,
    pub kv: f64,
    pub kr: f64,
    pub komega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSpec {
    pub dt_s: f64,
    pub t_final_s: f64,
    pub retraction_every: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        let c = IntegratorConfig::default();
        Self { dt_s: c.dt, t_final_s: c.t_final, retraction_every: c.retraction_every }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Perturbation {
    /// Per-vehicle multiplier on the equal-share hover thrust.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thrust_scale: Option<Vec<f64>>,
    /// Initial payload velocity.
    pub v0_mps: [f64; 3],
    /// Initial payload body rate.
    pub omega0_radps: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column_map: Option<String>,
}

/// A swarm hover run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HoverScenario {
    pub payload: PayloadSpec,
    pub vehicle: VehicleSpec,
    pub fleet: Fleet,
    pub link_length_m: f64,
    pub radius_policy: RadiusPolicy,
    /// Explicit attachment points; generated from the fleet size when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attachments_m: Option<Vec<[f64; 3]>>,
    pub gravity_mps2: f64,
    pub safety_factor: f64,
    pub x0_m: [f64; 3],
    pub perturbation: Perturbation,
    /// Regulate every vehicle to level attitude instead of holding zero moment.
    pub attitude_control: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gains: Option<GainSpec>,
    pub integrator: IntegratorSpec,
    pub output: OutputSpec,
}

impl Default for HoverScenario {
    /// Three vehicles of 0.755 kg under a 1.5 kg, 1 × 0.8 × 0.2 m payload on
    /// 1 m cables, attached at the vertices of an equilateral triangle.
    fn default() -> Self {
        Self {
            payload: PayloadSpec::default(),
            vehicle: VehicleSpec::default(),
            fleet: Fleet::Count(3),
            link_length_m: 1.0,
            radius_policy: RadiusPolicy::Side,
            attachments_m: None,
            gravity_mps2: GRAVITY,
            safety_factor: 1.2,
            x0_m: [0.0; 3],
            perturbation: Perturbation::default(),
            attitude_control: false,
            gains: None,
            integrator: IntegratorSpec::default(),
            output: OutputSpec::default(),
        }
    }
}

/// Everything needed to run a scenario.
#[derive(Debug, Clone)]
pub struct ResolvedHover {
    pub params: SwarmParams,
    pub initial: SwarmState,
    pub thrusts: Vec<f64>,
    pub gains: Gains,
    pub integrator: IntegratorConfig,
}

impl HoverScenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("scenario: {e}")))
    }

    pub fn resolve(&self) -> Result<ResolvedHover, CliError> {
        let g = self.gravity_mps2;
        let dims = Vec3::from(self.payload.dims_m);
        let payload = match self.payload.inertia_kg_m2 {
            Some(j) => PayloadParams { mass: self.payload.mass_kg, inertia: rows_mat(&j), dims },
            None => PayloadParams::solid_box(self.payload.mass_kg, dims),
        };
        let quad = self.vehicle.params(g);

        let links: Vec<LinkSpec> = match (&self.attachments_m, self.fleet) {
            (Some(points), Fleet::Count(n)) if n != points.len() => {
                return Err(CliError::Input(format!("fleet is {n} but {} attachments are given", points.len())));
            }
            (Some(points), _) => points.iter().map(|&p| LinkSpec::new(Vec3::from(p), self.link_length_m)).collect(),
            (None, fleet) => {
                let n = match fleet {
                    Fleet::Count(n) => n,
                    Fleet::Keyword(FleetKeyword::Auto) => self.planned_fleet(&payload, &quad)?,
                };
                attachment_points(n, &dims, self.link_length_m, self.radius_policy)?
            }
        };
        let n = links.len();
        let params = SwarmParams { payload, quads: vec![quad.clone(); n], links, gravity: g };
        params.validate()?;

        let share = hover_inputs(&params).commands[0].thrust;
        let thrusts = match &self.perturbation.thrust_scale {
            None => vec![share; n],
            Some(s) if s.len() == n => s.iter().map(|k| k * share).collect(),
            Some(s) => {
                return Err(CliError::Input(format!("thrust_scale has {} entries for {n} vehicles", s.len())));
            }
        };

        let gains = match &self.gains {
            Some(k) => Gains::from(k),
            None => Gains::for_vehicle(&quad),
        };
        gains.validate()?;

        let mut initial = SwarmState::hover(Vec3::from(self.x0_m), n);
        initial.v0 = Vec3::from(self.perturbation.v0_mps);
        initial.omega0 = Vec3::from(self.perturbation.omega0_radps);

        let integrator = IntegratorConfig {
            dt: self.integrator.dt_s,
            t_final: self.integrator.t_final_s,
            retraction_every: self.integrator.retraction_every,
        };
        integrator.validate()?;
        Ok(ResolvedHover { params, initial, thrusts, gains, integrator })
    }

    fn planned_fleet(&self, payload: &PayloadParams, quad: &QuadrotorParams) -> Result<usize, CliError> {
        let req = PlannerRequest {
            safety_factor: self.safety_factor,
            hover_height: self.link_length_m,
            radius_policy: self.radius_policy,
            ..PlannerRequest::new(
                payload.mass * self.gravity_mps2,
                quad.weight(),
                quad.thrust_max,
                quad.prop_radius,
                payload.dims,
            )
        };
        let p = plan(&req)?;
        match p.scenario {
            PlanScenario::Infeasible => Err(CliError::Input("planner found no feasible fleet".into())),
            _ => Ok(p.n),
        }
    }
}

fn mat_rows(m: &Mat3) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn rows_mat(rows: &[[f64; 3]; 3]) -> Mat3 {
    Mat3::from_fn(|i, j| rows[i][j])
}
