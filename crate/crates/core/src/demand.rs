//! Inverse demand curves for the homogeneous-good market, condition (C)
//! checking and the break-even quantity `Q̄` where `P(Q̄) = c`.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{scaled_tol, Scalar};

/// Default root tolerance, relative to `max(1, c)`.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
/// Default number of uniform samples used when checking condition (C).
pub const DEFAULT_CONDITION_SAMPLES: usize = 1000;
/// Default search bound for the exponential curve.
pub const DEFAULT_EXPONENTIAL_Q_MAX: f64 = 10.0;

const MAX_DOUBLINGS: usize = 60;
const MAX_BISECTIONS: usize = 2000;

/// Piecewise-linear demand through strictly decreasing knots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table<T> {
    points: Vec<(T, T)>,
    extrapolate: bool,
}

impl<T: Scalar> Table<T> {
    /// Builds a table. Quantities must be nonnegative and strictly
    /// increasing, prices strictly decreasing, and the price at zero output
    /// (first segment extended back to 0 if needed) positive.
    pub fn new(points: Vec<(T, T)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("a demand table needs at least two knots"));
        }
        for &(q, p) in &points {
            if !q.is_finite() || !p.is_finite() || q < T::zero() {
                return Err(Error::invalid(format!(
                    "table knot ({q}, {p}) must be finite with q >= 0"
                )));
            }
        }
        for w in points.windows(2) {
            let ((q0, p0), (q1, p1)) = (w[0], w[1]);
            if q1 <= q0 {
                return Err(Error::invalid(format!(
                    "table quantities must be strictly increasing ({q0} then {q1})"
                )));
            }
            if p1 >= p0 {
                return Err(Error::invalid(format!(
                    "table prices must be strictly decreasing ({p0} then {p1})"
                )));
            }
        }
        let table = Table {
            points,
            extrapolate: false,
        };
        let p0 = table.interpolate(T::zero());
        if !(p0 > T::zero()) {
            return Err(Error::invalid(format!(
                "table price at zero output is {p0}, must be positive"
            )));
        }
        Ok(table)
    }

    /// Allows queries past the last knot using the last segment's slope.
    pub fn with_extrapolation(mut self, enabled: bool) -> Self {
        self.extrapolate = enabled;
        self
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn extrapolates(&self) -> bool {
        self.extrapolate
    }

    pub fn last_knot(&self) -> T {
        self.points[self.points.len() - 1].0
    }

    /// Loads a `q,p` CSV file.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Table(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    /// Parses a two-column CSV with header exactly `q,p`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            q: f64,
            p: f64,
        }

        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Table(e.to_string()))?;
        if headers.len() != 2 || &headers[0] != "q" || &headers[1] != "p" {
            return Err(Error::Table(format!(
                "expected header `q,p`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut points = Vec::new();
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| Error::Table(e.to_string()))?;
            points.push((T::lit(row.q), T::lit(row.p)));
        }
        Self::new(points)
    }

    fn interpolate(&self, q: T) -> T {
        let pts = &self.points;
        // index of the segment [k, k+1] used for q; the outer segments extend
        let upper = pts.partition_point(|&(x, _)| x <= q);
        let k = upper.clamp(1, pts.len() - 1) - 1;
        let ((q0, p0), (q1, p1)) = (pts[k], pts[k + 1]);
        p0 + (p1 - p0) * (q - q0) / (q1 - q0)
    }
}

/// Inverse demand `P(Q)` for a homogeneous good.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DemandModel<T = f64> {
    /// `P(Q) = intercept - slope * Q`; negative prices are allowed past the
    /// zero-price quantity.
    LinearHomogeneous {
        intercept: T,
        slope: T,
    },
    /// `P(Q) = scale * exp(-Q)`.
    Exponential {
        scale: T,
    },
    Tabulated(Table<T>),
}

impl<T: Scalar> DemandModel<T> {
    pub fn linear(intercept: T, slope: T) -> Result<Self> {
        if !(intercept > T::zero() && intercept.is_finite()) {
            return Err(Error::invalid(format!(
                "linear intercept must be positive, got {intercept}"
            )));
        }
        if !(slope > T::zero() && slope.is_finite()) {
            return Err(Error::invalid(format!(
                "linear slope must be positive, got {slope}"
            )));
        }
        Ok(DemandModel::LinearHomogeneous { intercept, slope })
    }

    pub fn exponential(scale: T) -> Result<Self> {
        if !(scale > T::zero() && scale.is_finite()) {
            return Err(Error::invalid(format!(
                "exponential scale must be positive, got {scale}"
            )));
        }
        Ok(DemandModel::Exponential { scale })
    }

    pub fn tabulated(points: Vec<(T, T)>) -> Result<Self> {
        Table::new(points).map(DemandModel::Tabulated)
    }

    /// Market-clearing price at total output `q`.
    pub fn price(&self, q: T) -> Result<T> {
        if !(q >= T::zero()) {
            return Err(Error::Domain {
                quantity: q.as_f64(),
            });
        }
        match self {
            DemandModel::LinearHomogeneous { intercept, slope } => Ok(*intercept - *slope * q),
            DemandModel::Exponential { scale } => Ok(*scale * (-q).exp()),
            DemandModel::Tabulated(table) => {
                if q > table.last_knot() && !table.extrapolate {
                    return Err(Error::Extrapolation {
                        quantity: q.as_f64(),
                        last_knot: table.last_knot().as_f64(),
                    });
                }
                Ok(table.interpolate(q))
            }
        }
    }

    /// Choke price `P(0)`.
    pub fn choke_price(&self) -> T {
        match self {
            DemandModel::LinearHomogeneous { intercept, .. } => *intercept,
            DemandModel::Exponential { scale } => *scale,
            DemandModel::Tabulated(table) => table.interpolate(T::zero()),
        }
    }

    /// Largest quantity the model may be queried at, if bounded.
    pub fn domain_max(&self) -> Option<T> {
        match self {
            DemandModel::Tabulated(table) if !table.extrapolate => Some(table.last_knot()),
            _ => None,
        }
    }

    /// Default strategy-space bound used by grids and searches.
    pub fn default_q_max(&self) -> T {
        match self {
            DemandModel::LinearHomogeneous { intercept, slope } => *intercept / *slope,
            DemandModel::Exponential { .. } => T::lit(DEFAULT_EXPONENTIAL_Q_MAX),
            DemandModel::Tabulated(table) => table.last_knot(),
        }
    }
}

/// Clause of condition (C).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Clause {
    /// `P(Q̄) = c` for some `Q̄ > 0`.
    I,
    /// `P(Q) < c` above `Q̄`.
    Ii,
    /// `P(Q) > c` below `Q̄`.
    Iii,
}

impl std::fmt::Display for Clause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Clause::I => "i",
            Clause::Ii => "ii",
            Clause::Iii => "iii",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCReport<T = f64> {
    pub holds: bool,
    pub q_bar: Option<T>,
    pub failed_clause: Option<Clause>,
    /// Upper end of the range the clauses were sampled on.
    pub checked_upper_bound: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCOptions<T> {
    pub samples: usize,
    pub tol: T,
}

impl<T: Scalar> Default for ConditionCOptions<T> {
    fn default() -> Self {
        ConditionCOptions {
            samples: DEFAULT_CONDITION_SAMPLES,
            tol: T::lit(DEFAULT_ROOT_TOL),
        }
    }
}

fn check_cost<T: Scalar>(c: T) -> Result<()> {
    if !(c > T::zero() && c.is_finite()) {
        return Err(Error::invalid(format!("cost must be positive, got {c}")));
    }
    Ok(())
}

/// Locates `Q̄` with `|P(Q̄) - c| <= tol * max(1, c)`.
///
/// The bracket's upper end is found by doubling from 1; the root is then
/// refined by bisection. Bisection is used rather than Newton's method
/// because tabulated curves are only piecewise differentiable.
pub fn find_q_bar<T: Scalar>(demand: &DemandModel<T>, c: T, tol: T) -> Result<T> {
    check_cost(c)?;
    if !(tol > T::zero()) {
        return Err(Error::invalid(format!(
            "root tolerance must be positive, got {tol}"
        )));
    }
    let p0 = demand.choke_price();
    if c >= p0 {
        return Err(Error::InvalidCost {
            cost: c.as_f64(),
            p0: p0.as_f64(),
        });
    }
    let resid_tol = scaled_tol(tol, c);
    let excess = |q: T| demand.price(q).map(|p| p - c);

    let mut hi = T::one();
    let mut found = false;
    for _ in 0..MAX_DOUBLINGS {
        if let Some(cap) = demand.domain_max() {
            hi = hi.min(cap);
        }
        if excess(hi)? <= T::zero() {
            found = true;
            break;
        }
        if demand.domain_max().is_some_and(|cap| hi >= cap) {
            break;
        }
        hi = hi + hi;
    }
    if !found {
        return Err(Error::NoBracket {
            cost: c.as_f64(),
            searched_to: hi.as_f64(),
        });
    }

    let mut lo = T::zero();
    let two = T::lit(2.0);
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo + hi) / two;
        let r = excess(mid)?;
        if r.abs() <= resid_tol {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if r > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // bracket exhausted at machine precision
    let (r_lo, r_hi) = (excess(lo)?.abs(), excess(hi)?.abs());
    Ok(if r_lo <= r_hi { lo } else { hi })
}

/// Checks condition (C) on `[0, q_max]` with default sampling.
pub fn verify_condition_c<T: Scalar>(
    demand: &DemandModel<T>,
    c: T,
    q_max: T,
) -> Result<ConditionCReport<T>> {
    verify_condition_c_with(demand, c, q_max, &ConditionCOptions::default())
}

/// Checks condition (C): a root `Q̄` of `P(Q) = c` exists, `P < c` above it
/// and `P > c` below it, on a uniform sample of `[0, q_max]` plus the knots
/// of tabulated curves. A failure is reported, not raised; only invalid
/// inputs are errors.
pub fn verify_condition_c_with<T: Scalar>(
    demand: &DemandModel<T>,
    c: T,
    q_max: T,
    opts: &ConditionCOptions<T>,
) -> Result<ConditionCReport<T>> {
    check_cost(c)?;
    if !(q_max > T::zero() && q_max.is_finite()) {
        return Err(Error::invalid(format!(
            "q_max must be positive, got {q_max}"
        )));
    }
    if opts.samples < 2 {
        return Err(Error::invalid("condition (C) needs at least two samples"));
    }
    let upper = demand.domain_max().map_or(q_max, |cap| q_max.min(cap));
    let fail = |clause| ConditionCReport {
        holds: false,
        q_bar: None,
        failed_clause: Some(clause),
        checked_upper_bound: upper,
    };

    let q_bar = match find_q_bar(demand, c, opts.tol) {
        Ok(q) => q,
        Err(Error::InvalidCost { .. }) => return Ok(fail(Clause::Iii)),
        Err(Error::NoBracket { .. }) => return Ok(fail(Clause::I)),
        Err(e) => return Err(e),
    };
    if q_bar > upper {
        return Ok(fail(Clause::I));
    }

    let resid_tol = scaled_tol(opts.tol, c);
    let n = opts.samples;
    let step = upper / T::from_usize_lossy(n - 1);
    let uniform = (0..n).map(|i| {
        if i == n - 1 {
            upper
        } else {
            step * T::from_usize_lossy(i)
        }
    });
    let knots: Vec<T> = match demand {
        DemandModel::Tabulated(table) => table
            .points()
            .iter()
            .map(|&(q, _)| q)
            .filter(|&q| q <= upper)
            .collect(),
        _ => Vec::new(),
    };
    for q in uniform.chain(knots) {
        let excess = demand.price(q)? - c;
        if q > q_bar && excess > resid_tol {
            return Ok(ConditionCReport {
                q_bar: Some(q_bar),
                ..fail(Clause::Ii)
            });
        }
        if q < q_bar && excess < -resid_tol {
            return Ok(ConditionCReport {
                q_bar: Some(q_bar),
                ..fail(Clause::Iii)
            });
        }
    }
    Ok(ConditionCReport {
        holds: true,
        q_bar: Some(q_bar),
        failed_clause: None,
        checked_upper_bound: upper,
    })
}
