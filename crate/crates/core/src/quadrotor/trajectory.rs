use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::Vec3;

/// Header of a sampled trajectory table.
pub const TRAJECTORY_HEADER: [&str; 13] = [
    "t", "xd1", "xd2", "xd3", "vd1", "vd2", "vd3", "ad1", "ad2", "ad3", "b1d1", "b1d2", "b1d3",
];

/// Reference position, its first two derivatives, heading and desired body
/// rate at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub x: Vec3,
    pub v: Vec3,
    pub a: Vec3,
    pub b1: Vec3,
    pub omega: Vec3,
    pub omega_dot: Vec3,
}

impl TrajectorySample {
    pub fn stationary(x: Vec3, b1: Vec3) -> Self {
        Self { x, v: Vec3::zeros(), a: Vec3::zeros(), b1, omega: Vec3::zeros(), omega_dot: Vec3::zeros() }
    }
}

pub trait DesiredTrajectory {
    fn sample(&self, t: f64) -> TrajectorySample;
}

/// Hold a point with a fixed heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hover {
    pub point: Vec3,
    pub heading: Vec3,
}

impl Hover {
    pub fn new(point: Vec3) -> Self {
        Self { point, heading: Vec3::x() }
    }
}

impl DesiredTrajectory for Hover {
    fn sample(&self, _t: f64) -> TrajectorySample {
        TrajectorySample::stationary(self.point, self.heading)
    }
}

/// Horizontal circle about `center`, starting on the `+x` side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Vec3,
    pub radius: f64,
    pub period: f64,
    pub heading: Vec3,
}

impl Circle {
    pub fn new(center: Vec3, radius: f64, period: f64) -> Self {
        Self { center, radius, period, heading: Vec3::x() }
    }
}

impl DesiredTrajectory for Circle {
    fn sample(&self, t: f64) -> TrajectorySample {
        let w = 2.0 * std::f64::consts::PI / self.period;
        let (s, c) = (w * t).sin_cos();
        let r = self.radius;
        TrajectorySample {
            x: self.center + Vec3::new(r * c, r * s, 0.0),
            v: Vec3::new(-r * w * s, r * w * c, 0.0),
            a: Vec3::new(-r * w * w * c, -r * w * w * s, 0.0),
            b1: self.heading,
            omega: Vec3::zeros(),
            omega_dot: Vec3::zeros(),
        }
    }
}

/// Constant-velocity move from `start` to `end` over `duration`, then hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSegment {
    pub start: Vec3,
    pub end: Vec3,
    pub duration: f64,
    pub heading: Vec3,
}

impl LineSegment {
    pub fn new(start: Vec3, end: Vec3, duration: f64) -> Self {
        Self { start, end, duration, heading: Vec3::x() }
    }
}

impl DesiredTrajectory for LineSegment {
    fn sample(&self, t: f64) -> TrajectorySample {
        if t <= 0.0 {
            return TrajectorySample::stationary(self.start, self.heading);
        }
        if t >= self.duration {
            return TrajectorySample::stationary(self.end, self.heading);
        }
        let v = (self.end - self.start) / self.duration;
        TrajectorySample { x: self.start + v * t, v, ..TrajectorySample::stationary(self.start, self.heading) }
    }
}

/// Sampled reference, linearly interpolated and held constant outside its
/// time range.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    times: Vec<f64>,
    samples: Vec<TrajectorySample>,
}

impl TrajectoryTable {
    pub fn new(times: Vec<f64>, samples: Vec<TrajectorySample>) -> Result<Self> {
        if times.is_empty() || times.len() != samples.len() {
            return Err(Error::InvalidParameter("trajectory table needs matching non-empty columns".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("trajectory times must be strictly increasing".into()));
        }
        for (t, s) in times.iter().zip(&samples) {
            let finite = [s.x, s.v, s.a, s.b1].iter().all(|v| v.iter().all(|c| c.is_finite()));
            if !t.is_finite() || !finite {
                return Err(Error::InvalidParameter(format!("non-finite trajectory sample at t = {t}")));
            }
            if (s.b1.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("b1d is not unit length at t = {t}")));
            }
        }
        Ok(Self { times, samples })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_reader(file)
    }

    /// Parse a CSV with the [`TRAJECTORY_HEADER`] columns.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::InvalidParameter(e.to_string()))?.clone();
        if header.iter().ne(TRAJECTORY_HEADER.iter().copied()) {
            return Err(Error::InvalidParameter(format!(
                "trajectory header must be `{}`",
                TRAJECTORY_HEADER.join(",")
            )));
        }
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidParameter(format!("row {}: {e}", row + 2)))?;
            let v3 = |i: usize| Vec3::new(vals[i], vals[i + 1], vals[i + 2]);
            times.push(vals[0]);
            samples.push(TrajectorySample { x: v3(1), v: v3(4), a: v3(7), ..TrajectorySample::stationary(v3(1), v3(10)) });
        }
        Self::new(times, samples)
    }
}

impl DesiredTrajectory for TrajectoryTable {
    fn sample(&self, t: f64) -> TrajectorySample {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            return self.samples[0];
        }
        if t >= self.times[last] {
            return self.samples[last];
        }
        let hi = self.times.partition_point(|&ti| ti <= t);
        let lo = hi - 1;
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        let (a, b) = (&self.samples[lo], &self.samples[hi]);
        let lerp = |p: Vec3, q: Vec3| p + (q - p) * w;
        let b1 = lerp(a.b1, b.b1);
        let n = b1.norm();
        TrajectorySample {
            x: lerp(a.x, b.x),
            v: lerp(a.v, b.v),
            a: lerp(a.a, b.a),
            // antipodal headings interpolate through zero; keep the earlier one
            b1: if n > 1e-9 { b1 / n } else { a.b1 },
            omega: Vec3::zeros(),
            omega_dot: Vec3::zeros(),
        }
    }
}
