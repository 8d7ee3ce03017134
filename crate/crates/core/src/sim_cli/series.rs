//! CSV form of a swarm time series and its invariant check.

use std::io::{Read, Write};

use super::CliError;
use crate::geometry::orthonormality_defect;
use crate::integrator::{Sample, TimeSeries};
use crate::{Mat3, Vec3};

/// Largest tolerated defect for any checked invariant.
pub const INVARIANT_TOL: f64 = 1e-9;

const PAYLOAD_COLUMNS: usize = 19;
const QUAD_COLUMNS: usize = 21;

/// Column names for a run with `n` vehicles.
pub fn header(n: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["t", "x0x", "x0y", "x0z", "v0x", "v0y", "v0z"].map(String::from).to_vec();
    cols.extend(matrix_names("R0_"));
    cols.extend(["W0x", "W0y", "W0z"].map(String::from));
    for i in 1..=n {
        for v in ["q", "w", "x"] {
            cols.extend(["x", "y", "z"].map(|c| format!("{v}{i}{c}")));
        }
        cols.extend(matrix_names(&format!("R{i}_")));
        cols.extend(["x", "y", "z"].map(|c| format!("W{i}_{c}")));
    }
    cols
}

fn matrix_names(prefix: &str) -> impl Iterator<Item = String> + '_ {
    (1..=3).flat_map(move |i| (1..=3).map(move |j| format!("{prefix}{i}{j}")))
}

/// One vehicle's columns.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRow {
    pub q: Vec3,
    pub w: Vec3,
    pub x: Vec3,
    pub r: Mat3,
    pub omega: Vec3,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub x0: Vec3,
    pub v0: Vec3,
    pub r0: Mat3,
    pub omega0: Vec3,
    pub quads: Vec<QuadRow>,
}

impl From<&Sample> for SeriesRow {
    fn from(s: &Sample) -> Self {
        let st = &s.state;
        let quads = st
            .links
            .iter()
            .zip(&st.quads)
            .zip(&s.quad_positions)
            .map(|((l, a), x)| QuadRow { q: l.q, w: l.omega, x: *x, r: a.r, omega: a.omega })
            .collect();
        Self { t: s.t, x0: st.x0, v0: st.v0, r0: st.r0, omega0: st.omega0, quads }
    }
}

impl SeriesRow {
    fn values(&self) -> Vec<f64> {
        let mut v = vec![self.t];
        v.extend(self.x0.iter().chain(&self.v0));
        v.extend(row_major(&self.r0));
        v.extend(self.omega0.iter());
        for q in &self.quads {
            v.extend(q.q.iter().chain(&q.w).chain(&q.x));
            v.extend(row_major(&q.r));
            v.extend(q.omega.iter());
        }
        v
    }

    fn from_values(v: &[f64]) -> Self {
        let v3 = |i: usize| Vec3::new(v[i], v[i + 1], v[i + 2]);
        let m3 = |i: usize| Mat3::from_row_slice(&v[i..i + 9]);
        let quads = v[PAYLOAD_COLUMNS..]
            .chunks_exact(QUAD_COLUMNS)
            .enumerate()
            .map(|(k, _)| {
                let b = PAYLOAD_COLUMNS + k * QUAD_COLUMNS;
                QuadRow { q: v3(b), w: v3(b + 3), x: v3(b + 6), r: m3(b + 9), omega: v3(b + 18) }
            })
            .collect();
        Self { t: v[0], x0: v3(1), v0: v3(4), r0: m3(7), omega0: v3(16), quads }
    }
}

fn row_major(m: &Mat3) -> impl Iterator<Item = f64> + '_ {
    (0..3).flat_map(move |i| (0..3).map(move |j| m[(i, j)]))
}

/// Write `series` with full round-trip precision.
pub fn write_series<W: Write>(out: W, series: &TimeSeries) -> Result<(), CliError> {
    let n = series.samples.first().map_or(0, |s| s.state.n());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(n))?;
    for s in &series.samples {
        w.write_record(SeriesRow::from(s).values().iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a series CSV, checking the header and that every field is a number.
pub fn read_series<R: Read>(input: R) -> Result<Vec<SeriesRow>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = rdr.records();
    let head = match records.next() {
        Some(h) => h?,
        None => return Err(CliError::Schema("empty file, expected a header".into())),
    };
    let width = head.len();
    let n = width.saturating_sub(PAYLOAD_COLUMNS) / QUAD_COLUMNS;
    if n == 0 || PAYLOAD_COLUMNS + n * QUAD_COLUMNS != width || head.iter().ne(header(n).iter().map(String::as_str)) {
        return Err(CliError::Schema(format!("header does not match the swarm series layout ({width} columns)")));
    }
    let mut rows = Vec::new();
    for (k, rec) in records.enumerate() {
        let line = k + 2;
        let rec = rec?;
        if rec.len() != width {
            return Err(CliError::Schema(format!("line {line}: {} fields, expected {width}", rec.len())));
        }
        let vals = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Schema(format!("line {line}: {e}")))?;
        rows.push(SeriesRow::from_values(&vals));
    }
    if rows.is_empty() {
        return Err(CliError::Schema("no data rows".into()));
    }
    Ok(rows)
}

/// Worst-case invariant defects over a series.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantSummary {
    pub rotation_defect: f64,
    pub link_norm_defect: f64,
    pub transversality: f64,
}

impl InvariantSummary {
    pub fn within(&self, tol: f64) -> bool {
        self.rotation_defect <= tol && self.link_norm_defect <= tol && self.transversality <= tol
    }
}

/// First violated invariant, with its 1-based file line.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: &'static str,
    pub line: usize,
    pub detail: String,
}

/// Check every row; stops at the first violation.
pub fn check_rows(rows: &[SeriesRow]) -> Result<InvariantSummary, Violation> {
    let mut sum = InvariantSummary::default();
    let mut prev_t = f64::NEG_INFINITY;
    for (k, row) in rows.iter().enumerate() {
        let line = k + 2;
        let fail = |invariant, detail: String| Violation { invariant, line, detail };
        if row.values().iter().any(|v| !v.is_finite()) {
            return Err(fail("finite", "non-finite value".into()));
        }
        if !(row.t > prev_t) {
            return Err(fail("monotonic-time", format!("t = {} after {prev_t}", row.t)));
        }
        prev_t = row.t;
        let rotations = std::iter::once(&row.r0).chain(row.quads.iter().map(|q| &q.r));
        for (i, r) in rotations.enumerate() {
            let d = orthonormality_defect(r);
            if d > INVARIANT_TOL || r.determinant() <= 0.0 {
                return Err(fail("rotation", format!("R{i} orthonormality defect {d:e}")));
            }
            sum.rotation_defect = sum.rotation_defect.max(d);
        }
        for (i, q) in row.quads.iter().enumerate() {
            let d = (q.q.norm() - 1.0).abs();
            if d > INVARIANT_TOL {
                return Err(fail("link-norm", format!("|q{}| - 1 = {d:e}", i + 1)));
            }
            let tr = q.q.dot(&q.w).abs();
            if tr > INVARIANT_TOL {
                return Err(fail("transversality", format!("|q{0}.w{0}| = {tr:e}", i + 1)));
            }
            sum.link_norm_defect = sum.link_norm_defect.max(d);
            sum.transversality = sum.transversality.max(tr);
        }
    }
    Ok(sum)
}

/// Column map readable by gnuplot's `using` clauses, one `index name` pair per line.
pub fn write_column_map<W: Write>(mut out: W, n: usize) -> std::io::Result<()> {
    writeln!(out, "# column name")?;
    for (i, name) in header(n).iter().enumerate() {
        writeln!(out, "{} {name}", i + 1)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let h = header(2);
        assert_eq!(h.len(), PAYLOAD_COLUMNS + 2 * QUAD_COLUMNS);
        assert_eq!(&h[..8], ["t", "x0x", "x0y", "x0z", "v0x", "v0y", "v0z", "R0_11"]);
        assert_eq!(&h[16..19], ["W0x", "W0y", "W0z"]);
        assert_eq!(&h[19..22], ["q1x", "q1y", "q1z"]);
        assert_eq!(h[28], "R1_11");
        assert_eq!(h[36], "R1_33");
        assert_eq!(&h[37..43], ["W1_x", "W1_y", "W1_z", "q2x", "q2y", "q2z"]);
    }

    #[test]
    fn empty_and_malformed_inputs() {
        assert!(matches!(read_series("".as_bytes()), Err(CliError::Schema(_))));
        assert!(matches!(read_series("t,x\n1,2\n".as_bytes()), Err(CliError::Schema(_))));
        let head = header(1).join(",");
        assert!(matches!(read_series(format!("{head}\n").as_bytes()), Err(CliError::Schema(_))));
    }
}
