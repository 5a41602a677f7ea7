//! Matrix Market and CSV writers. Floats use Rust's shortest round-trip
//! decimal form; infinities print as `inf`.

use std::fmt::Write as _;

use carleman_core::sim::Trajectory;
use carleman_core::SparseMatrix;

/// Coordinate-format Matrix Market text with 1-based indices, row-major order.
pub fn matrix_market(m: &SparseMatrix) -> String {
    let mut out = String::with_capacity(32 * (m.nnz() + 2));
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", m.rows(), m.cols(), m.nnz());
    for (r, c, v) in m.iter() {
        let _ = writeln!(out, "{} {} {v}", r + 1, c + 1);
    }
    out
}

/// `t,comp_1,...,comp_n`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for i in 1..=traj.dim() {
        let _ = write!(out, ",comp_{i}");
    }
    out.push('\n');
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let _ = write!(out, "{t}");
        for v in state {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// One row of `t,err,bound_E2,bound_E1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub t: f64,
    pub err: f64,
    pub bound_e2: f64,
    pub bound_e1: f64,
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("t,err,bound_E2,bound_E1\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.t, r.err, r.bound_e2, r.bound_e1);
    }
    out
}

/// `t,bound_E2,bound_E1`.
pub fn envelope_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("t,bound_E2,bound_E1\n");
    for (t, e2, e1) in rows {
        let _ = writeln!(out, "{t},{e2},{e1}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_market_layout() {
        let m = SparseMatrix::from_dense(2, 3, &[0.0, 1.5, 0.0, -2.0, 0.0, 0.1]).unwrap();
        assert_eq!(
            matrix_market(&m),
            "%%MatrixMarket matrix coordinate real general\n2 3 3\n1 2 1.5\n2 1 -2\n2 3 0.1\n"
        );
    }

    #[test]
    fn trajectory_layout() {
        let traj = Trajectory {
            times: vec![0.0, 0.5],
            states: vec![vec![1.0, 0.25], vec![0.1, 1e-20]],
        };
        assert_eq!(
            trajectory_csv(&traj),
            "t,comp_1,comp_2\n0,1,0.25\n0.5,0.1,0.00000000000000000001\n"
        );
    }

    #[test]
    fn floats_round_trip() {
        let values = [0.1 + 0.2, 1.0 / 3.0, 6.02214076e23, -5e-324];
        let rows: Vec<_> = values.iter().map(|&v| (v, v, v)).collect();
        let csv = envelope_csv(&rows);
        for (line, v) in csv.lines().skip(1).zip(values) {
            let parsed: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert_eq!(parsed, [v, v, v]);
        }
        assert_eq!(
            envelope_csv(&[(1.0, f64::INFINITY, 2.0)]),
            "t,bound_E2,bound_E1\n1,inf,2\n"
        );
    }

    #[test]
    fn comparison_header() {
        let csv = comparison_csv(&[ComparisonRow {
            t: 0.0,
            err: 0.0,
            bound_e2: 0.0,
            bound_e1: 0.0,
        }]);
        assert_eq!(csv, "t,err,bound_E2,bound_E1\n0,0,0,0\n");
    }
}
