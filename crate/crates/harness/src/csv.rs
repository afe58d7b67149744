//! Comma-separated output with a mandatory header row. Numbers are written in
//! the shortest decimal form that parses back to the same `f64`, always with
//! `.` as the decimal point.

use std::fmt::Write as _;

use hhw_core::analysis::GapSeries;
use hhw_core::Trajectory;

use crate::error::{HarnessError, Result};

/// Shortest round-trip representation; non-finite values as `NaN`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    let mut buf = ryu::Buffer::new();
    buf.format(x).to_owned()
}

fn push_row(out: &mut String, t: f64, values: &[f64]) {
    let mut buf = ryu::Buffer::new();
    out.push_str(buf.format(t));
    for v in values {
        out.push(',');
        out.push_str(buf.format(*v));
    }
    out.push('\n');
}

pub fn trajectory_header(n: usize, memristive: bool) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("V_{i}")));
    h.extend((1..=n).map(|i| format!("R_{i}")));
    if memristive {
        h.push("rho".into());
    }
    h
}

/// Columns `t, V_1..V_n, R_1..R_n[, rho]`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = trajectory_header(traj.n(), traj.is_memristive()).join(",");
    out.push('\n');
    for (t, row) in traj.rows() {
        push_row(&mut out, t, row);
    }
    out
}

/// Columns `t, max_gap_sq, gap_sq_i_j` for every pair i < j (1-based).
pub fn gaps_csv(gaps: &GapSeries) -> String {
    let mut out = String::from("t,max_gap_sq");
    for (i, j) in &gaps.pairs {
        let _ = write!(out, ",gap_sq_{}_{}", i + 1, j + 1);
    }
    out.push('\n');
    let mut values = Vec::with_capacity(gaps.pairs.len() + 1);
    for k in 0..gaps.len() {
        values.clear();
        values.push(gaps.max_gap[k]);
        values.extend_from_slice(gaps.row(k));
        push_row(&mut out, gaps.times[k], &values);
    }
    out
}

/// A parsed numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Parse a table written by this module. Every row must have as many
/// fields as the header.
pub fn parse_table(text: &str) -> Result<Table> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| HarnessError::Config("csv: missing header row".into()))?
        .split(',')
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| HarnessError::Config(format!("csv line {}: {e}", k + 2)))?;
        if row.len() != header.len() {
            return Err(HarnessError::Config(format!(
                "csv line {}: {} fields, header has {}",
                k + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip_formatting() {
        for x in [
            0.1,
            1.0,
            -2.5e-300,
            1e300,
            0.30000000000000004,
            f64::MIN_POSITIVE,
            5e-324,
        ] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.1), "0.1");
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(parse_table("t,a\n1,2\n3\n").is_err());
        assert!(parse_table("t,a\n1,x\n").is_err());
        let t = parse_table("t,a\n1,2\n").unwrap();
        assert_eq!(t.column("a"), Some(vec![2.0]));
    }
}
