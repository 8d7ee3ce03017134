//! Hover formations around a rectangular payload and minimum fleet size.
//!
//! Attachment points sit on a regular polygon centred on the payload so the
//! combined centre of mass stays above the payload's own in the x-y plane.
//! Fleet size follows from the thrust margin of one vehicle, inflated by a
//! safety factor, and is checked against a minimum spacing of three propeller
//! radii between neighbouring vehicles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::swarm_dynamics::LinkSpec;
use crate::Vec3;

/// Minimum vehicle spacing in propeller radii.
pub const SPACING_RADII: f64 = 3.0;

/// How the placement circle is sized from the payload footprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusPolicy {
    /// Circumradius equals half the smaller footprint dimension.
    #[default]
    Circumradius,
    /// Polygon side equals the smaller footprint dimension.
    Side,
}

impl std::str::FromStr for RadiusPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circumradius" => Ok(Self::Circumradius),
            "side" => Ok(Self::Side),
            other => Err(Error::InvalidParameter(format!("unknown radius policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    Feasible,
    FeasibleWithCaution,
    Infeasible,
}

/// Alternative vehicle specification that would make the plan comfortable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    /// Largest propeller radius at which the safety-factor fleet fits (m).
    #[serde(rename = "max_radius_m")]
    pub max_radius: f64,
    /// Thrust per vehicle needed at the current radius (N).
    #[serde(rename = "min_thrust_N")]
    pub min_thrust: f64,
}

/// Planner inputs. Weights are forces in newtons.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerRequest {
    pub payload_weight: f64,
    pub quad_weight: f64,
    /// Thrust capability of one vehicle (N).
    pub thrust: f64,
    /// Propeller tip radius of one vehicle (m).
    pub prop_radius: f64,
    /// Payload (length, width, height) (m).
    pub dims: Vec3,
    pub safety_factor: f64,
    /// Height of the vehicles above the payload top face, which is also the
    /// cable length of the vertical hover formation (m).
    pub hover_height: f64,
    pub radius_policy: RadiusPolicy,
}

impl PlannerRequest {
    /// Request with the default safety factor 1.2, 1 m hover height and the
    /// circumradius policy.
    pub fn new(payload_weight: f64, quad_weight: f64, thrust: f64, prop_radius: f64, dims: Vec3) -> Self {
        Self {
            payload_weight,
            quad_weight,
            thrust,
            prop_radius,
            dims,
            safety_factor: 1.2,
            hover_height: 1.0,
            radius_policy: RadiusPolicy::Circumradius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("payload weight", self.payload_weight),
            ("quad weight", self.quad_weight),
            ("prop radius", self.prop_radius),
            ("hover height", self.hover_height),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.thrust.is_finite() {
            return Err(Error::InvalidParameter("thrust must be finite".into()));
        }
        if !(self.safety_factor >= 1.0 && self.safety_factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "safety factor must be at least 1, got {}",
                self.safety_factor
            )));
        }
        if self.dims.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidParameter("payload dimensions must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationPlan {
    /// Fleet size, zero when infeasible.
    pub n: usize,
    /// Half vertex angle, defined for `n ≥ 3`.
    pub alpha: Option<f64>,
    pub r_circ: f64,
    pub attachments: Vec<LinkSpec>,
    pub scenario: Scenario,
    pub recommendation: Option<Recommendation>,
    /// Unrounded thrust-limited minimum, `m₀g / (T − mᵢg)`.
    pub n_raw: f64,
    pub n_min: Option<usize>,
    pub n_fs: Option<usize>,
}

/// JSON form of a [`ConfigurationPlan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub n: usize,
    pub alpha_rad: Option<f64>,
    pub r_circ_m: f64,
    pub scenario: Scenario,
    pub attachments: Vec<[f64; 3]>,
    pub link_length_m: f64,
    pub recommendation: Option<Recommendation>,
}

impl ConfigurationPlan {
    pub fn report(&self, link_length: f64) -> PlanReport {
        PlanReport {
            n: self.n,
            alpha_rad: self.alpha,
            r_circ_m: self.r_circ,
            scenario: self.scenario,
            attachments: self.attachments.iter().map(|l| [l.rho.x, l.rho.y, l.rho.z]).collect(),
            link_length_m: link_length,
            recommendation: self.recommendation,
        }
    }
}

/// Half the interior angle of a regular `n`-gon, `(n − 2)π / (2n)`.
pub fn half_vertex_angle(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::BadCount { n, min: 3 });
    }
    Ok((n as f64 - 2.0) * PI / (2.0 * n as f64))
}

/// Radius of the placement circle for `n` vehicles.
pub fn placement_radius(n: usize, dims: &Vec3, policy: RadiusPolicy) -> f64 {
    let footprint = dims.x.min(dims.y);
    match (policy, n) {
        (_, 0 | 1) => 0.0,
        (RadiusPolicy::Circumradius, _) | (RadiusPolicy::Side, 2) => 0.5 * footprint,
        (RadiusPolicy::Side, _) => footprint / (2.0 * (PI / n as f64).sin()),
    }
}

/// Cable attachment points on the payload top face for `n` vehicles, each
/// with cable length `hover_height`.
///
/// One vehicle attaches at the centre, two sit on the ±y axis, and `n ≥ 3`
/// occupy polygon vertices at angles `2πi/n`, `i = 1..=n`.
pub fn attachment_points(n: usize, dims: &Vec3, hover_height: f64, policy: RadiusPolicy) -> Result<Vec<LinkSpec>> {
    if n < 1 {
        return Err(Error::BadCount { n, min: 1 });
    }
    let z = -0.5 * dims.z;
    let r = placement_radius(n, dims, policy);
    let points: Vec<Vec3> = match n {
        1 => vec![Vec3::new(0.0, 0.0, z)],
        2 => vec![Vec3::new(0.0, r, z), Vec3::new(0.0, -r, z)],
        _ => (1..=n)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / n as f64;
                Vec3::new(r * theta.cos(), r * theta.sin(), z)
            })
            .collect(),
    };
    Ok(points.into_iter().map(|rho| LinkSpec::new(rho, hover_height)).collect())
}

/// Hover positions of the vehicles, straight above their attachment points
/// (z-down frame), for a payload centred at the origin.
pub fn hover_positions(links: &[LinkSpec]) -> Vec<Vec3> {
    links.iter().map(|l| l.rho - l.length * crate::geometry::E3).collect()
}

/// Thrust-limited fleet size `m₀g / (T − mᵢg)`. Non-positive or non-finite
/// results mean one vehicle cannot lift itself.
pub fn min_quadrotors(payload_weight: f64, quad_weight: f64, thrust: f64) -> f64 {
    payload_weight / (thrust - quad_weight)
}

/// Distance between neighbouring vehicles on the placement circle.
pub fn side_length(n: usize, r_circ: f64) -> f64 {
    match n {
        0 | 1 => f64::INFINITY,
        2 => 2.0 * r_circ,
        _ => 2.0 * r_circ * (PI / n as f64).sin(),
    }
}

/// Whether `n` vehicles of propeller radius `prop_radius` keep three radii
/// apart on a circle of radius `r_circ`.
pub fn spacing_ok(n: usize, prop_radius: f64, r_circ: f64) -> bool {
    n <= 1 || side_length(n, r_circ) >= SPACING_RADII * prop_radius
}

/// Largest fleet that satisfies the spacing rule at this radius.
fn max_spaced_fleet(prop_radius: f64, dims: &Vec3, policy: RadiusPolicy) -> usize {
    let fits = |n: usize| spacing_ok(n, prop_radius, placement_radius(n, dims, policy));
    if !fits(2) {
        return 1;
    }
    // side ≈ 2πr/n for large n bounds the search
    let bound = (2.0 * PI * placement_radius(3, dims, policy).max(dims.x.max(dims.y))
        / (SPACING_RADII * prop_radius))
        .ceil() as usize
        + 3;
    (3..=bound).take_while(|&n| fits(n)).last().unwrap_or(2)
}

/// Alternative specification for a plan that is not comfortably feasible.
///
/// `max_radius` is the propeller radius at which the safety-factor fleet
/// would fit. `min_thrust` sizes each vehicle so the largest fleet that fits
/// at the current radius can carry the payload, `W₀/n_max + Wᵢ`, inflated by
/// the safety factor. A single vehicle has no redundancy to protect, so the
/// factor is not applied when `n_max = 1`.
pub fn recommend(req: &PlannerRequest, n_fs: Option<usize>) -> Recommendation {
    let max_radius = match n_fs {
        Some(n) => side_length(n, placement_radius(n, &req.dims, req.radius_policy)) / SPACING_RADII,
        None => req.prop_radius,
    };
    let n_max = max_spaced_fleet(req.prop_radius, &req.dims, req.radius_policy);
    let factor = if n_max > 1 { req.safety_factor } else { 1.0 };
    let min_thrust = (req.payload_weight / n_max as f64 + req.quad_weight) * factor;
    Recommendation { max_radius, min_thrust }
}

/// Choose fleet size, scenario and attachment points for a request.
pub fn plan(req: &PlannerRequest) -> Result<ConfigurationPlan> {
    req.validate()?;
    let n_raw = min_quadrotors(req.payload_weight, req.quad_weight, req.thrust);
    let fits = |n: usize| spacing_ok(n, req.prop_radius, placement_radius(n, &req.dims, req.radius_policy));

    let (n, scenario, n_min, n_fs) = if !(n_raw.is_finite() && n_raw > 0.0) {
        (0, Scenario::Infeasible, None, None)
    } else {
        let n_min = (n_raw.ceil() as usize).max(1);
        let n_fs = ((n_min as f64 * req.safety_factor).round() as usize).max(n_min);
        if fits(n_fs) {
            (n_fs, Scenario::Feasible, Some(n_min), Some(n_fs))
        } else if fits(n_min) {
            (n_min, Scenario::FeasibleWithCaution, Some(n_min), Some(n_fs))
        } else {
            (0, Scenario::Infeasible, Some(n_min), Some(n_fs))
        }
    };

    let recommendation = match scenario {
        Scenario::Feasible => None,
        _ => Some(recommend(req, n_fs)),
    };
    let attachments = if n >= 1 {
        attachment_points(n, &req.dims, req.hover_height, req.radius_policy)?
    } else {
        Vec::new()
    };
    Ok(ConfigurationPlan {
        n,
        alpha: half_vertex_angle(n).ok(),
        r_circ: placement_radius(if n == 0 { n_fs.unwrap_or(3) } else { n }, &req.dims, req.radius_policy),
        attachments,
        scenario,
        recommendation,
        n_raw,
        n_min,
        n_fs,
    })
}
