//! `swarmsling` command line: `plan`, `hover`, `track` and `check`.
//!
//! Exit codes: `plan` returns 0, 2 or 3 for a feasible, cautious or
//! infeasible fleet. Every other command returns 0 on success. Any error,
//! including malformed arguments, returns 1.

mod scenario;
mod series;
mod track;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use scenario::{Fleet, FleetKeyword, GainSpec, HoverScenario, IntegratorSpec, Perturbation, ResolvedHover, VehicleSpec};
pub use series::{check_rows, header, read_series, write_column_map, write_series, InvariantSummary, SeriesRow, Violation, INVARIANT_TOL};
pub use track::{track_header, TrajectoryKind};
use track::TrackArgs;

use crate::config_planner::{plan, PlannerRequest, RadiusPolicy, Scenario};
use crate::integrator::{simulate, AttitudeHold, ConstantInput, InputPolicy};
use crate::swarm_dynamics::SwarmInput;
use crate::quadrotor::WrenchCommand;
use crate::{Error, Vec3, GRAVITY};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant breached: {0}")]
    Invariant(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "swarmsling", version, about = "Quadrotor swarm payload planner and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Size a fleet and place it over the payload.
    Plan(PlanArgs),
    /// Simulate a swarm holding a payload in hover.
    Hover(HoverArgs),
    /// Fly one quadrotor with the geometric tracking controller.
    Track(TrackArgs),
    /// Verify the invariants of a hover CSV.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[arg(long, required_unless_present = "payload_mass_kg", conflicts_with = "payload_mass_kg")]
    payload_weight_n: Option<f64>,
    #[arg(long)]
    payload_mass_kg: Option<f64>,
    #[arg(long, required_unless_present = "quad_mass_kg", conflicts_with = "quad_mass_kg")]
    quad_weight_n: Option<f64>,
    #[arg(long)]
    quad_mass_kg: Option<f64>,
    /// Thrust capability of one vehicle.
    #[arg(long)]
    thrust_n: f64,
    /// Centre-to-propeller-tip radius of one vehicle.
    #[arg(long)]
    quad_radius_m: f64,
    /// Payload length x width x height.
    #[arg(long, value_parser = parse_triple, default_value = "1x0.8x0.2")]
    dims_m: [f64; 3],
    #[arg(long, default_value_t = 1.2)]
    safety_factor: f64,
    #[arg(long, default_value_t = 1.0)]
    hover_height_m: f64,
    /// Cable length written to the report; defaults to the hover height.
    #[arg(long)]
    link_length_m: Option<f64>,
    #[arg(long, default_value = "circumradius")]
    radius_policy: RadiusPolicy,
    /// Used to convert masses to weights.
    #[arg(long, default_value_t = GRAVITY)]
    gravity_mps2: f64,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HoverArgs {
    /// Scenario JSON; the built-in three-vehicle scenario when absent.
    scenario: Option<PathBuf>,
    /// CSV output path, overriding the scenario's.
    #[arg(long)]
    out: Option<PathBuf>,
    /// gnuplot column map path, overriding the scenario's.
    #[arg(long)]
    column_map: Option<PathBuf>,
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    dt_s: Option<f64>,
    /// Print the effective scenario as JSON and exit.
    #[arg(long)]
    dump_scenario: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    series: PathBuf,
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    run(std::env::args_os())
}

/// Parse `args` (including the program name), execute, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Plan(a) => cmd_plan(&a),
        Command::Hover(a) => cmd_hover(&a),
        Command::Track(a) => track::cmd_track(&a),
        Command::Check(a) => cmd_check(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split([',', 'x']).map(str::trim).collect();
    match parts.as_slice() {
        [a, b, c] => {
            let f = |p: &str| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
            Ok([f(a)?, f(b)?, f(c)?])
        }
        _ => Err(format!("expected three numbers, got `{s}`")),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn cmd_plan(a: &PlanArgs) -> Result<i32, CliError> {
    let g = a.gravity_mps2;
    let weight = |w: Option<f64>, m: Option<f64>| w.or(m.map(|m| m * g)).unwrap_or(f64::NAN);
    let req = PlannerRequest {
        safety_factor: a.safety_factor,
        hover_height: a.hover_height_m,
        radius_policy: a.radius_policy,
        ..PlannerRequest::new(
            weight(a.payload_weight_n, a.payload_mass_kg),
            weight(a.quad_weight_n, a.quad_mass_kg),
            a.thrust_n,
            a.quad_radius_m,
            Vec3::from(a.dims_m),
        )
    };
    let p = plan(&req)?;
    let report = p.report(a.link_length_m.unwrap_or(a.hover_height_m));
    let text = serde_json::to_string_pretty(&report)?;
    match &a.out {
        Some(path) => {
            let mut f = create(path)?;
            writeln!(f, "{text}")?;
            f.flush()?;
        }
        None => writeln!(std::io::stdout().lock(), "{text}")?,
    }
    Ok(match p.scenario {
        Scenario::Feasible => 0,
        Scenario::FeasibleWithCaution => 2,
        Scenario::Infeasible => 3,
    })
}

fn cmd_hover(a: &HoverArgs) -> Result<i32, CliError> {
    let mut sc = match &a.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            HoverScenario::from_json(&text)?
        }
        None => HoverScenario::default(),
    };
    if let Some(t) = a.duration_s {
        sc.integrator.t_final_s = t;
    }
    if let Some(dt) = a.dt_s {
        sc.integrator.dt_s = dt;
    }
    if a.dump_scenario {
        writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&sc)?)?;
        return Ok(0);
    }
    let r = sc.resolve()?;
    let policy: Box<dyn InputPolicy> = if sc.attitude_control {
        Box::new(AttitudeHold { thrusts: r.thrusts.clone(), gains: r.gains, vehicles: r.params.quads.clone() })
    } else {
        let commands = r.thrusts.iter().map(|&f| WrenchCommand::new(f, Vec3::zeros())).collect();
        Box::new(ConstantInput(SwarmInput { commands }))
    };
    let series = simulate(&r.initial, policy.as_ref(), &r.params, &r.integrator)?;

    let csv_path = a.out.clone().or(sc.output.csv.as_ref().map(PathBuf::from));
    if let Some(path) = csv_path {
        write_series(create(&path)?, &series)?;
    }
    let map_path = a.column_map.clone().or(sc.output.column_map.as_ref().map(PathBuf::from));
    if let Some(path) = map_path {
        let mut f = create(&path)?;
        write_column_map(&mut f, r.params.n())?;
        f.flush()?;
    }

    let rows: Vec<SeriesRow> = series.samples.iter().map(SeriesRow::from).collect();
    let summary = match check_rows(&rows) {
        Ok(s) => s,
        Err(v) => return Err(CliError::Invariant(format!("{} at sample {}: {}", v.invariant, v.line - 1, v.detail))),
    };
    writeln!(
        std::io::stdout().lock(),
        "n = {}, samples = {}, max |dz0| = {:e} m, max |dx0| = {:e} m, rotation defect = {:e}, link-norm defect = {:e}, transversality = {:e}",
        r.params.n(),
        rows.len(),
        series.max_payload_dz(),
        series.max_payload_displacement(),
        summary.rotation_defect,
        summary.link_norm_defect,
        summary.transversality,
    )?;
    Ok(0)
}

fn cmd_check(a: &CheckArgs) -> Result<i32, CliError> {
    let file = File::open(&a.series).map_err(|e| CliError::Input(format!("{}: {e}", a.series.display())))?;
    let rows = read_series(std::io::BufReader::new(file))?;
    match check_rows(&rows) {
        Ok(s) => {
            writeln!(
                std::io::stdout().lock(),
                "ok: {} rows, rotation defect {:e}, link-norm defect {:e}, transversality {:e}",
                rows.len(),
                s.rotation_defect,
                s.link_norm_defect,
                s.transversality
            )?;
            Ok(0)
        }
        Err(v) => {
            eprintln!("fail: {} invariant violated at line {}: {}", v.invariant, v.line, v.detail);
            Ok(1)
        }
    }
}
