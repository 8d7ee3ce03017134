//! `track`: closed-loop flight of a single quadrotor.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};

use super::{create, parse_triple, CliError, GainSpec, VehicleSpec};
use crate::geometry::exp_so3;
use crate::integrator::IntegratorConfig;
use crate::quadrotor::{
    desired_attitude, simulate_tracking, Circle, DesiredTrajectory, Gains, Hover, LineSegment, QuadState,
    TrackingConfig, TrackingRecord, TrajectoryTable,
};
use crate::{Error, Vec3, GRAVITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrajectoryKind {
    Hover,
    Circle,
    Line,
    Table,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long, value_enum, default_value = "hover")]
    trajectory: TrajectoryKind,
    /// Trajectory CSV for `--trajectory table`.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Hover point, circle centre, or line start.
    #[arg(long, value_parser = parse_triple, default_value = "0,0,-2", allow_hyphen_values = true)]
    setpoint_m: [f64; 3],
    /// Initial position minus the reference position at t = 0.
    #[arg(long, value_parser = parse_triple, default_value = "1,0,0", allow_hyphen_values = true)]
    offset_m: [f64; 3],
    /// Rotation vector applied to the reference attitude at t = 0.
    #[arg(long, value_parser = parse_triple, default_value = "0,0,0", allow_hyphen_values = true)]
    attitude_rotvec_rad: [f64; 3],
    #[arg(long, default_value_t = 1.0)]
    radius_m: f64,
    #[arg(long, default_value_t = 10.0)]
    period_s: f64,
    #[arg(long, value_parser = parse_triple, default_value = "2,0,-2", allow_hyphen_values = true)]
    line_end_m: [f64; 3],
    #[arg(long, default_value_t = 5.0)]
    line_duration_s: f64,
    #[arg(long, default_value_t = 10.0)]
    duration_s: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt_s: f64,
    /// Length of the trailing window summarised on exit.
    #[arg(long, default_value_t = 1.0)]
    window_s: f64,
    /// Vehicle JSON with the same keys as a scenario's `vehicle` block.
    #[arg(long)]
    vehicle: Option<PathBuf>,
    /// Gains as `kx,kv,kr,komega`.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    gains: Option<Vec<f64>>,
    #[arg(long)]
    no_saturation: bool,
    /// Use the trajectory's own body rate instead of differencing `R_d`.
    #[arg(long)]
    no_rate_feedforward: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Column names of the tracking CSV.
pub fn track_header() -> Vec<&'static str> {
    vec![
        "t", "ex_x", "ex_y", "ex_z", "ev_x", "ev_y", "ev_z", "Psi", "eR_x", "eR_y", "eR_z", "eW_x", "eW_y", "eW_z",
        "f", "M_x", "M_y", "M_z", "f1", "f2", "f3", "f4",
    ]
}

fn record_values(r: &TrackingRecord) -> Vec<f64> {
    let e = &r.errors;
    let mut v = vec![r.t];
    v.extend(e.e_x.iter().chain(&e.e_v));
    v.push(e.psi);
    v.extend(e.e_r.iter().chain(&e.e_omega));
    v.push(r.command.thrust);
    v.extend(r.command.moment.iter());
    v.extend(r.rotors);
    v
}

fn trajectory(a: &TrackArgs) -> Result<Box<dyn DesiredTrajectory>, CliError> {
    let p = Vec3::from(a.setpoint_m);
    Ok(match a.trajectory {
        TrajectoryKind::Hover => Box::new(Hover::new(p)),
        TrajectoryKind::Circle => Box::new(Circle::new(p, a.radius_m, a.period_s)),
        TrajectoryKind::Line => Box::new(LineSegment::new(p, Vec3::from(a.line_end_m), a.line_duration_s)),
        TrajectoryKind::Table => {
            let path = a.table.as_ref().ok_or_else(|| CliError::Input("--trajectory table needs --table".into()))?;
            Box::new(TrajectoryTable::from_path(path)?)
        }
    })
}

pub(super) fn cmd_track(a: &TrackArgs) -> Result<i32, CliError> {
    let vehicle = match &a.vehicle {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<VehicleSpec>(&text).map_err(|e| CliError::Input(format!("vehicle: {e}")))?
        }
        None => VehicleSpec::default(),
    };
    let params = vehicle.params(GRAVITY);
    let gains = match a.gains.as_deref() {
        Some(&[kx, kv, kr, komega]) => Gains::from(&GainSpec { kx, kv, kr, komega }),
        _ => Gains::for_vehicle(&params),
    };
    let traj = trajectory(a)?;

    let d = traj.sample(0.0);
    let reference = desired_attitude(&Vec3::zeros(), &Vec3::zeros(), &d.a, &d.b1, &gains, &params)?;
    let initial = QuadState {
        x: d.x + Vec3::from(a.offset_m),
        v: d.v,
        r: reference * exp_so3(&Vec3::from(a.attitude_rotvec_rad)),
        omega: Vec3::zeros(),
    };
    let cfg = TrackingConfig {
        integrator: IntegratorConfig::new(a.dt_s, a.duration_s),
        saturate: !a.no_saturation,
        rate_feedforward: !a.no_rate_feedforward,
    };
    let records = simulate_tracking(&initial, traj.as_ref(), &gains, &params, &cfg).map_err(|e| match e {
        Error::ControllerSingular { t, reason } => CliError::Input(format!("controller singular at t = {t}: {reason}")),
        other => other.into(),
    })?;

    if let Some(path) = &a.out {
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(track_header())?;
        for r in &records {
            w.write_record(record_values(r).iter().map(f64::to_string))?;
        }
        w.flush()?;
    }

    let last = records.last().expect("a run always has its initial sample");
    let from = last.t - a.window_s;
    let window = records.iter().filter(|r| r.t >= from);
    let (ex, psi) = window.fold((0.0_f64, 0.0_f64), |(ex, psi), r| (ex.max(r.errors.e_x.norm()), psi.max(r.errors.psi)));
    let saturated = records.iter().filter(|r| r.saturated).count();
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "final |e_x| = {:e} m, Psi = {:e}; last {} s max |e_x| = {ex:e} m, max Psi = {psi:e}; saturated steps = {saturated}",
        last.errors.e_x.norm(),
        last.errors.psi,
        a.window_s,
    )?;
    Ok(0)
}

impl From<&GainSpec> for Gains {
    fn from(k: &GainSpec) -> Self {
        Gains { kx: k.kx, kv: k.kv, kr: k.kr, komega: k.komega }
    }
}
