//! Unbeatable strategies: closed forms for both market kinds and a
//! grid verifier for unbeatability, strictness and uniqueness.
//!
//! A quantity `q*` is unbeatable when `f(q*, q) = π1(q*, q) - π2(q*, q) >= 0`
//! for every opponent quantity `q`, and strictly unbeatable when the
//! inequality is strict for all `q != q*`. Over a continuum this can only be
//! certified on a grid; every [`VerificationReport`] carries its [`GridSpec`].

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::demand::{find_q_bar, verify_condition_c, DemandModel, DEFAULT_ROOT_TOL};
use crate::error::{Error, Result};
use crate::payoffs::{
    profits, relative_payoff, validate_differentiated, MarketParams, StrategyProfile,
};
use crate::scalar::Scalar;

pub const DEFAULT_VERIFY_POINTS: usize = 10_001;
pub const DEFAULT_PROBE_POINTS: usize = 2_001;
pub const DEFAULT_STRICT_TOL: f64 = 1e-9;

/// Uniform grid `lo, lo + h, ..., hi` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec<T = f64> {
    lo: T,
    hi: T,
    count: usize,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(lo: T, hi: T, count: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!(
                "grid needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        if count < 2 {
            return Err(Error::invalid(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        Ok(GridSpec { lo, hi, count })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn step(&self) -> T {
        (self.hi - self.lo) / T::from_usize_lossy(self.count - 1)
    }

    /// The `i`-th point; the last one is exactly `hi`.
    pub fn point(&self, i: usize) -> T {
        if i + 1 == self.count {
            self.hi
        } else {
            self.lo
                + (self.hi - self.lo) * T::from_usize_lossy(i) / T::from_usize_lossy(self.count - 1)
        }
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.count).map(|i| self.point(i))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContestSolution<T = f64> {
    pub q_star: T,
    /// Total output `2 q_star`.
    pub total: T,
    pub p_star: T,
    pub phi_star: T,
    /// Strict unbeatability as measured by the verifier.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport<T = f64> {
    pub candidate: T,
    pub is_unbeatable: bool,
    pub is_strict: bool,
    pub min_relative_payoff: T,
    /// Opponent quantity attaining the minimum, present only when beaten.
    pub witness: Option<T>,
    pub grid: GridSpec<T>,
}

impl<T: Scalar> VerificationReport<T> {
    /// Flat `key=value` record, one pair per line.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let fmt = |x: T| crate::report::format_sig(x.as_f64(), 12);
        let _ = writeln!(out, "candidate={}", fmt(self.candidate));
        let _ = writeln!(out, "is_unbeatable={}", self.is_unbeatable);
        let _ = writeln!(out, "is_strict={}", self.is_strict);
        let _ = writeln!(out, "min_relative_payoff={}", fmt(self.min_relative_payoff));
        let _ = writeln!(out, "witness={}", self.witness.map(fmt).unwrap_or_default());
        let _ = writeln!(out, "grid_lo={}", fmt(self.grid.lo));
        let _ = writeln!(out, "grid_hi={}", fmt(self.grid.hi));
        let _ = writeln!(out, "grid_count={}", self.grid.count);
        out
    }
}

/// Unbeatable strategy for a homogeneous market: half the break-even
/// quantity `Q̄`, at which price equals cost and both profits vanish.
///
/// Condition (C) is checked on `[0, default_q_max]` first; strictness is
/// measured on a default 10 001-point grid over the same range.
pub fn unbeatable_homogeneous<T: Scalar>(
    demand: &DemandModel<T>,
    c: T,
    tol: T,
) -> Result<ContestSolution<T>> {
    let q_max = demand.default_q_max();
    let report = verify_condition_c(demand, c, q_max)?;
    if let Some(clause) = report.failed_clause {
        return Err(Error::ConditionCViolated {
            clause: clause.to_string(),
        });
    }
    let q_bar = find_q_bar(demand, c, tol)?;
    let q_star = q_bar / T::lit(2.0);
    let params = MarketParams::homogeneous(demand.clone(), c)?;
    let pp = profits(&params, StrategyProfile::new(q_star, q_star)?)?;
    // opponents may not push total output past a bounded table
    let opponent_hi = match demand.domain_max() {
        Some(cap) => cap - q_star,
        None => q_max.max(q_bar),
    };
    let grid = GridSpec::new(T::zero(), opponent_hi, DEFAULT_VERIFY_POINTS)?;
    let check = verify_unbeatable(&params, q_star, &grid, T::lit(DEFAULT_STRICT_TOL))?;
    Ok(ContestSolution {
        q_star,
        total: q_star + q_star,
        p_star: demand.price(q_star + q_star)?,
        phi_star: pp.pi1,
        strict: check.is_strict,
    })
}

/// [`unbeatable_homogeneous`] with the default root tolerance.
pub fn unbeatable_homogeneous_default<T: Scalar>(
    demand: &DemandModel<T>,
    c: T,
) -> Result<ContestSolution<T>> {
    unbeatable_homogeneous(demand, c, T::lit(DEFAULT_ROOT_TOL))
}

/// Unbeatable strategy for the differentiated market.
///
/// The `b q` cross terms cancel in `φ1 - φ2`, so `q*` maximizes
/// `q (1 - q) - c q` and does not depend on `b`.
pub fn unbeatable_differentiated<T: Scalar>(c: T, b: T) -> Result<ContestSolution<T>> {
    validate_differentiated(c, b)?;
    let one = T::one();
    let two = T::lit(2.0);
    let q_star = (one - c) / two;
    let params = MarketParams::differentiated(c, b)?;
    let grid = GridSpec::new(T::zero(), one, DEFAULT_VERIFY_POINTS)?;
    let check = verify_unbeatable(&params, q_star, &grid, T::lit(DEFAULT_STRICT_TOL))?;
    Ok(ContestSolution {
        q_star,
        total: one - c,
        p_star: (one + c) / two - b * (one - c) / two,
        phi_star: (one - c).powi(2) * (one - b) / T::lit(4.0),
        strict: check.is_strict,
    })
}

/// Evaluates `f(candidate, q)` at every grid point.
///
/// Unbeatable iff the minimum is `>= -strict_tol`; strict iff
/// `f > strict_tol` at every point farther than one grid step from the
/// candidate. The minimum is reduced with ties going to the smaller `q`.
pub fn verify_unbeatable<T: Scalar>(
    params: &MarketParams<T>,
    candidate: T,
    grid: &GridSpec<T>,
    strict_tol: T,
) -> Result<VerificationReport<T>> {
    if !(strict_tol >= T::zero()) {
        return Err(Error::invalid(format!(
            "strict tolerance must be >= 0, got {strict_tol}"
        )));
    }
    if !(candidate >= T::zero() && candidate.is_finite()) {
        return Err(Error::invalid(format!(
            "candidate must be finite and >= 0, got {candidate}"
        )));
    }
    if grid.lo < T::zero() {
        return Err(Error::invalid("grid extends below zero output"));
    }
    let step = grid.step();
    let mut min_f = T::infinity();
    let mut argmin = grid.lo;
    let mut strict = true;
    for q in grid.points() {
        let f = relative_payoff(
            params,
            StrategyProfile {
                q1: candidate,
                q2: q,
            },
        )?;
        if f < min_f {
            min_f = f;
            argmin = q;
        }
        if (q - candidate).abs() > step && !(f > strict_tol) {
            strict = false;
        }
    }
    let is_unbeatable = min_f >= -strict_tol;
    Ok(VerificationReport {
        candidate,
        is_unbeatable,
        is_strict: is_unbeatable && strict,
        min_relative_payoff: min_f,
        witness: (!is_unbeatable).then_some(argmin),
        grid: *grid,
    })
}

/// Every grid point's verification report, candidates in grid order.
/// Runs in parallel; each report is computed independently, so results
/// match a serial run exactly.
pub fn uniqueness_probe_reports<T: Scalar>(
    params: &MarketParams<T>,
    grid: &GridSpec<T>,
    strict_tol: T,
) -> Result<Vec<VerificationReport<T>>> {
    (0..grid.count)
        .into_par_iter()
        .map(|i| verify_unbeatable(params, grid.point(i), grid, strict_tol))
        .collect()
}

/// Grid candidates that the verifier finds unbeatable against the same grid.
pub fn uniqueness_probe<T: Scalar>(
    params: &MarketParams<T>,
    grid: &GridSpec<T>,
    strict_tol: T,
) -> Result<Vec<T>> {
    Ok(uniqueness_probe_reports(params, grid, strict_tol)?
        .into_iter()
        .filter(|r| r.is_unbeatable)
        .map(|r| r.candidate)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_market(c: f64) -> MarketParams<f64> {
        MarketParams::homogeneous(DemandModel::<f64>::linear(1.0, 1.0).unwrap(), c).unwrap()
    }

    #[test]
    fn grid_points() {
        let g = GridSpec::new(0.0, 1.0, 5).unwrap();
        let pts: Vec<f64> = g.points().collect();
        assert_eq!(pts, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(GridSpec::new(1.0, 1.0, 5).is_err());
        assert!(GridSpec::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn homogeneous_linear() {
        let d = DemandModel::<f64>::linear(1.0, 1.0).unwrap();
        let s = unbeatable_homogeneous_default(&d, 0.5).unwrap();
        assert!((s.q_star - 0.25).abs() < 1e-12);
        assert_eq!(s.total, 2.0 * s.q_star);
        assert!((s.p_star - 0.5).abs() < 1e-12);
        assert!(s.phi_star.abs() < 1e-12);
        assert!(s.strict);

        let s = unbeatable_homogeneous_default(&d, 0.999999).unwrap();
        assert!((s.q_star - 5e-7).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_exponential() {
        let d = DemandModel::<f64>::exponential(1.0).unwrap();
        let s = unbeatable_homogeneous_default(&d, 0.5).unwrap();
        assert!((s.q_star - 0.346_573_590_279_972_65).abs() < 1e-11);
        assert!((s.p_star - 0.5).abs() < 1e-12);
        assert!(s.phi_star.abs() < 1e-9);
        assert!(s.strict);
    }

    #[test]
    fn homogeneous_requires_condition_c() {
        let d = DemandModel::<f64>::linear(1.0, 1.0).unwrap();
        assert!(unbeatable_homogeneous_default(&d, 1.2).is_err());
        let t = DemandModel::<f64>::tabulated(vec![(0.0, 2.0), (1.0, 1.5)]).unwrap();
        assert!(matches!(
            unbeatable_homogeneous_default(&t, 1.0),
            Err(Error::ConditionCViolated { .. })
        ));
    }

    #[test]
    fn differentiated_examples() {
        let s = unbeatable_differentiated(0.5_f64, 1.0).unwrap();
        assert_eq!(
            (s.q_star, s.total, s.p_star, s.phi_star),
            (0.25, 0.5, 0.5, 0.0)
        );

        let s = unbeatable_differentiated(0.2_f64, 0.5).unwrap();
        assert!((s.q_star - 0.4).abs() < 1e-15);
        assert!((s.total - 0.8).abs() < 1e-15);
        assert!((s.p_star - 0.4).abs() < 1e-15);
        assert!((s.phi_star - 0.08).abs() < 1e-15);

        let s = unbeatable_differentiated(0.5_f64, 0.0).unwrap();
        assert_eq!(s.phi_star, 0.0625);
        assert!(unbeatable_differentiated(0.5_f64, 1.1).is_err());
    }

    #[test]
    fn differentiated_q_star_is_b_independent_and_argmax() {
        for c in [0.1, 0.37, 0.9] {
            let reference = unbeatable_differentiated(c, 0.0).unwrap().q_star;
            for i in 0..=10 {
                let s = unbeatable_differentiated(c, i as f64 / 10.0).unwrap();
                assert_eq!(s.q_star, reference);
            }
            let g = |q: f64| q * (1.0 - q) - c * q;
            let grid = GridSpec::new(0.0, 1.0, 10_001).unwrap();
            let arg = grid
                .points()
                .fold(0.0, |a, q| if g(q) > g(a) { q } else { a });
            assert!((arg - reference).abs() <= grid.step());
        }
    }

    #[test]
    fn verify_examples() {
        let m = linear_market(0.5);
        let grid = GridSpec::new(0.0, 1.0, 10_001).unwrap();
        let r = verify_unbeatable(&m, 0.25, &grid, 1e-9).unwrap();
        assert!(r.is_unbeatable && r.is_strict);
        assert_eq!(r.witness, None);

        let r = verify_unbeatable(&m, 0.30, &grid, 1e-9).unwrap();
        assert!(!r.is_unbeatable && !r.is_strict);
        let w = r.witness.unwrap();
        assert!((w - 0.25).abs() < 1e-9);
        assert!((r.min_relative_payoff + 0.0025).abs() < 1e-12);
        let direct = relative_payoff(&m, StrategyProfile::new(0.30, w).unwrap()).unwrap();
        assert_eq!(direct, r.min_relative_payoff);

        let d = MarketParams::differentiated(0.5, 0.5).unwrap();
        assert!(
            verify_unbeatable(&d, 0.25, &grid, 1e-9)
                .unwrap()
                .is_unbeatable
        );
    }

    #[test]
    fn degenerate_probe_returns_both_points() {
        let m = linear_market(0.5);
        let grid = GridSpec::new(0.25, 0.2500001, 2).unwrap();
        let found = uniqueness_probe(&m, &grid, 1e-9).unwrap();
        assert_eq!(found, vec![0.25, 0.2500001]);
    }

    #[test]
    fn key_value_record() {
        let m = linear_market(0.5);
        let grid = GridSpec::new(0.0, 1.0, 11).unwrap();
        let r = verify_unbeatable(&m, 0.35, &grid, 1e-9).unwrap();
        let text = r.to_key_value();
        assert!(text.contains("is_unbeatable=false\n"));
        assert!(text.contains("grid_count=11\n"));
        assert!(text.lines().all(|l| l.contains('=')));
    }
}
