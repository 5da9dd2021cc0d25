//! Contest versus Nash comparison for the differentiated linear market
//! (`b = 1` is the homogeneous linear case), and parameter sweeps.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::contest::unbeatable_differentiated;
use crate::equilibrium::nash_differentiated;
use crate::error::{Error, Result};
use crate::report::format_sig;
use crate::scalar::Scalar;

/// Exact CSV header for [`ComparisonReport`] rows.
pub const CSV_HEADER: &str =
    "c,b,q_nash,Q_nash,p_nash,phi_nash,q_contest,Q_contest,p_contest,phi_contest,output_drop,profit_gap";
pub const CSV_SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct ComparisonReport<T = f64> {
    pub c: T,
    pub b: T,
    pub q_nash: T,
    pub Q_nash: T,
    pub p_nash: T,
    pub phi_nash: T,
    pub q_contest: T,
    pub Q_contest: T,
    pub p_contest: T,
    pub phi_contest: T,
    /// `1 - Q_nash / Q_contest`: the output lost moving from contest to competition.
    pub output_drop: T,
    /// `phi_nash - phi_contest`.
    pub profit_gap: T,
}

impl<T: Scalar> ComparisonReport<T> {
    /// Values in [`CSV_HEADER`] column order.
    pub fn values(&self) -> [T; 12] {
        [
            self.c,
            self.b,
            self.q_nash,
            self.Q_nash,
            self.p_nash,
            self.phi_nash,
            self.q_contest,
            self.Q_contest,
            self.p_contest,
            self.phi_contest,
            self.output_drop,
            self.profit_gap,
        ]
    }

    pub fn csv_row(&self) -> String {
        self.values()
            .iter()
            .map(|v| format_sig(v.as_f64(), CSV_SIG_DIGITS))
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub fn compare<T: Scalar>(c: T, b: T) -> Result<ComparisonReport<T>> {
    let nash = nash_differentiated(c, b)?;
    let contest = unbeatable_differentiated(c, b)?;
    Ok(ComparisonReport {
        c,
        b,
        q_nash: nash.q_hat,
        Q_nash: nash.total,
        p_nash: nash.p_hat,
        phi_nash: nash.phi_hat,
        q_contest: contest.q_star,
        Q_contest: contest.total,
        p_contest: contest.p_star,
        phi_contest: contest.phi_star,
        output_drop: T::one() - nash.total / contest.total,
        profit_gap: nash.phi_hat - contest.phi_star,
    })
}

/// `(2 + b)^2 (1 - b)`; Nash profit dominates contest profit iff this is at most 4.
pub fn gamma<T: Scalar>(b: T) -> Result<T> {
    if !(b >= T::zero() && b <= T::one()) {
        return Err(Error::invalid(format!(
            "substitutability must lie in [0, 1], got {b}"
        )));
    }
    Ok((T::lit(2.0) + b).powi(2) * (T::one() - b))
}

/// Analytic derivative of [`gamma`], `-6b - 3b^2`.
pub fn gamma_derivative<T: Scalar>(b: T) -> T {
    -T::lit(6.0) * b - T::lit(3.0) * b * b
}

fn sweep_point<T: Scalar>(
    c_values: &[T],
    b_values: &[T],
    i: usize,
    j: usize,
) -> Result<ComparisonReport<T>> {
    compare(c_values[i], b_values[j]).map_err(|e| Error::InvalidSweepPoint {
        c_index: i,
        b_index: j,
        reason: e.to_string(),
    })
}

/// One report per `(c, b)` pair, `c` outer and `b` inner. The first
/// invalid pair aborts the sweep.
pub fn sweep<T: Scalar>(c_values: &[T], b_values: &[T]) -> Result<Vec<ComparisonReport<T>>> {
    let mut rows = Vec::with_capacity(c_values.len() * b_values.len());
    for i in 0..c_values.len() {
        for j in 0..b_values.len() {
            rows.push(sweep_point(c_values, b_values, i, j)?);
        }
    }
    Ok(rows)
}

/// Parallel [`sweep`]; row order and the reported failure (the first
/// invalid pair in row-major order) match the serial version.
pub fn sweep_parallel<T: Scalar>(
    c_values: &[T],
    b_values: &[T],
) -> Result<Vec<ComparisonReport<T>>> {
    let nb = b_values.len();
    let results: Vec<Result<ComparisonReport<T>>> = (0..c_values.len() * nb)
        .into_par_iter()
        .map(|k| sweep_point(c_values, b_values, k / nb, k % nb))
        .collect();
    results.into_iter().collect()
}

pub fn write_csv<T: Scalar, W: Write>(
    rows: &[ComparisonReport<T>],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_row())?;
    }
    Ok(())
}

/// Plot-ready blocks: for each metric a `# metric` comment, then
/// `b value` lines, blocks separated by a blank line. With several costs
/// each block also restarts per cost (comment `# metric c=<c>`).
pub fn write_plot<T: Scalar, W: Write>(
    rows: &[ComparisonReport<T>],
    mut out: W,
) -> std::io::Result<()> {
    let names: Vec<&str> = CSV_HEADER.split(',').collect();
    let mut costs: Vec<T> = Vec::new();
    for r in rows {
        if !costs.contains(&r.c) {
            costs.push(r.c);
        }
    }
    let mut first = true;
    for (m, name) in names.iter().enumerate().skip(2) {
        for &c in &costs {
            if !first {
                writeln!(out)?;
            }
            first = false;
            writeln!(out, "# {name} c={}", format_sig(c.as_f64(), CSV_SIG_DIGITS))?;
            for r in rows.iter().filter(|r| r.c == c) {
                let v = r.values();
                writeln!(
                    out,
                    "{} {}",
                    format_sig(r.b.as_f64(), CSV_SIG_DIGITS),
                    format_sig(v[m].as_f64(), CSV_SIG_DIGITS)
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compare_examples() {
        let r = compare(0.5_f64, 1.0).unwrap();
        assert_eq!(r.Q_contest, 0.5);
        assert!((r.Q_nash - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.output_drop - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.phi_contest, 0.0);
        assert!((r.phi_nash - 1.0 / 36.0).abs() < 1e-15);

        let r = compare(0.5_f64, 0.0).unwrap();
        assert_eq!(r.output_drop, 0.0);
        assert_eq!(r.profit_gap, 0.0);
        assert!(compare(0.0_f64, 0.5).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(0.0).unwrap(), 4.0);
        assert_eq!(gamma(1.0).unwrap(), 0.0);
        assert_eq!(gamma(0.5).unwrap(), 3.125);
        assert!(gamma(1.5).is_err());
    }

    #[test]
    fn sweep_examples() {
        let rows = sweep(&[0.5], &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.windows(2).all(|w| w[1].output_drop > w[0].output_drop));

        let rows = sweep(&[0.2, 0.5], &[1.0]).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.phi_contest == 0.0));
        assert_eq!(rows[0].c, 0.2);

        assert!(sweep::<f64>(&[0.5], &[]).unwrap().is_empty());
    }

    #[test]
    fn sweep_reports_first_invalid_pair() {
        let err = sweep(&[0.5, 1.5], &[0.0, 2.0]).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidSweepPoint {
                c_index: 0,
                b_index: 1,
                ..
            }
        ));
        let err = sweep_parallel(&[0.5, 1.5], &[0.0, 2.0]).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidSweepPoint {
                c_index: 0,
                b_index: 1,
                ..
            }
        ));
    }

    #[test]
    fn csv_layout() {
        let rows = sweep(&[0.5], &[1.0]).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row = lines.next().unwrap();
        assert!(row.starts_with("0.5,1,"));
        assert!(row.contains(",0.333333333333,"));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn plot_blocks() {
        let rows = sweep(&[0.5], &[0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_plot(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let blocks: Vec<&str> = text.split("\n\n").collect();
        assert_eq!(blocks.len(), 10);
        assert!(blocks
            .iter()
            .any(|b| b.starts_with("# output_drop c=0.5\n0 0\n1 0.333333333333")));
    }
}
