//! Cournot-Nash equilibria: closed form for the differentiated linear
//! market and damped best-response iteration for general homogeneous demand.

use serde::Serialize;

use crate::demand::{verify_condition_c, DemandModel};
use crate::error::{Error, Result};
use crate::payoffs::{profits, validate_differentiated, MarketParams, StrategyProfile};
use crate::scalar::Scalar;

pub const DEFAULT_NASH_TOL: f64 = 1e-8;
pub const DEFAULT_DAMPING: f64 = 0.5;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Points in the coarse scan preceding golden-section refinement.
pub const BEST_RESPONSE_GRID: usize = 1024;

const GOLDEN_MAX_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Analytic,
    Iterative,
}

/// Symmetric equilibrium outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashSolution<T = f64> {
    /// Per-player quantity.
    pub q_hat: T,
    /// Total output `2 q_hat`.
    pub total: T,
    pub p_hat: T,
    pub phi_hat: T,
    pub method: SolveMethod,
    /// `|BR(q_hat) - q_hat|`; zero for the analytic path.
    pub residual: T,
    pub iterations: Option<usize>,
}

/// Closed-form equilibrium of the differentiated market.
pub fn nash_differentiated<T: Scalar>(c: T, b: T) -> Result<NashSolution<T>> {
    validate_differentiated(c, b)?;
    let one = T::one();
    let two = T::lit(2.0);
    let denom = two + b;
    Ok(NashSolution {
        q_hat: (one - c) / denom,
        total: two * (one - c) / denom,
        p_hat: (one + c * (one + b)) / denom,
        phi_hat: (one - c).powi(2) / denom.powi(2),
        method: SolveMethod::Analytic,
        residual: T::zero(),
        iterations: None,
    })
}

/// Profit-maximizing reply to `q_other` on `[0, domain_hi]`.
///
/// A 1024-point scan finds the best grid point (ties go to the smaller
/// quantity), then golden-section search refines within the neighbouring
/// grid cells down to width `tol`. The scan guards against non-concave
/// profit on tabulated demand.
pub fn best_response_homogeneous<T: Scalar>(
    demand: &DemandModel<T>,
    c: T,
    q_other: T,
    domain_hi: T,
    tol: T,
) -> Result<T> {
    if !(q_other >= T::zero()) {
        return Err(Error::invalid(format!(
            "opponent quantity must be >= 0, got {q_other}"
        )));
    }
    if !(domain_hi > T::zero() && domain_hi.is_finite()) {
        return Err(Error::invalid(format!(
            "domain bound must be positive, got {domain_hi}"
        )));
    }
    if !(tol > T::zero()) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut hi = domain_hi;
    if let Some(cap) = demand.domain_max() {
        hi = hi.min(cap - q_other);
        if hi <= T::zero() {
            return Ok(T::zero());
        }
    }
    let profit = |q: T| demand.price(q + q_other).map(|p| q * p - c * q);

    let n = BEST_RESPONSE_GRID;
    let step = hi / T::from_usize_lossy(n - 1);
    let node = |i: usize| {
        if i == n - 1 {
            hi
        } else {
            step * T::from_usize_lossy(i)
        }
    };
    let mut best = 0;
    let mut best_val = profit(T::zero())?;
    for i in 1..n {
        let v = profit(node(i))?;
        if v > best_val {
            best = i;
            best_val = v;
        }
    }

    let lo = node(best.saturating_sub(1));
    let up = node((best + 1).min(n - 1));
    let refined = golden_section_max(&profit, lo, up, tol)?;
    if profit(refined)? >= best_val {
        Ok(refined)
    } else {
        Ok(node(best))
    }
}

/// Golden-section maximization on `[lo, hi]` until the bracket is narrower
/// than `tol`; returns the bracket midpoint.
fn golden_section_max<T: Scalar>(
    f: &impl Fn(T) -> Result<T>,
    mut lo: T,
    mut hi: T,
    tol: T,
) -> Result<T> {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..GOLDEN_MAX_STEPS {
        if hi - lo <= tol {
            break;
        }
        // keep the left part on ties so the smaller quantity wins
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

/// Settings for the damped best-response iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NashOptions<T = f64> {
    /// Strategy bound; `None` uses the demand curve's default.
    pub domain_hi: Option<T>,
    pub tol: T,
    pub damping: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for NashOptions<T> {
    fn default() -> Self {
        NashOptions {
            domain_hi: None,
            tol: T::lit(DEFAULT_NASH_TOL),
            damping: T::lit(DEFAULT_DAMPING),
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Symmetric equilibrium of a homogeneous-good market as a fixed point of
/// `q <- (1 - damping) q + damping BR(q)`, started at `domain_hi / 4`.
///
/// Condition (C) is checked first. Uniqueness is not claimed: the returned
/// point is whichever fixed point the iteration reaches.
pub fn nash_homogeneous<T: Scalar>(
    demand: &DemandModel<T>,
    c: T,
    opts: &NashOptions<T>,
) -> Result<NashSolution<T>> {
    if !(opts.damping > T::zero() && opts.damping <= T::one()) {
        return Err(Error::invalid(format!(
            "damping must lie in (0, 1], got {}",
            opts.damping
        )));
    }
    let params = MarketParams::homogeneous(demand.clone(), c)?;
    let domain_hi = opts.domain_hi.unwrap_or_else(|| demand.default_q_max());
    let report = verify_condition_c(demand, c, domain_hi)?;
    if let Some(clause) = report.failed_clause {
        return Err(Error::ConditionCViolated {
            clause: clause.to_string(),
        });
    }

    let mut q = domain_hi / T::lit(4.0);
    let mut residual = T::infinity();
    for iter in 0..opts.max_iter {
        let br = best_response_homogeneous(demand, c, q, domain_hi, opts.tol)?;
        residual = (br - q).abs();
        if residual <= opts.tol {
            let total = q + q;
            let pp = profits(&params, StrategyProfile::new(q, q)?)?;
            return Ok(NashSolution {
                q_hat: q,
                total,
                p_hat: demand.price(total)?,
                phi_hat: pp.pi1,
                method: SolveMethod::Iterative,
                residual,
                iterations: Some(iter),
            });
        }
        q = (T::one() - opts.damping) * q + opts.damping * br;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: residual.as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_linear() -> DemandModel<f64> {
        DemandModel::<f64>::linear(1.0, 1.0).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let s = nash_differentiated(0.5_f64, 1.0).unwrap();
        assert!((s.q_hat - 1.0 / 6.0).abs() < 1e-15);
        assert!((s.p_hat - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.phi_hat - 1.0 / 36.0).abs() < 1e-15);
        assert_eq!(s.method, SolveMethod::Analytic);
        assert_eq!(s.residual, 0.0);

        let s = nash_differentiated(0.2_f64, 0.5).unwrap();
        assert!((s.q_hat - 0.32).abs() < 1e-15);
        assert!((s.total - 0.64).abs() < 1e-15);
        assert!((s.p_hat - 0.52).abs() < 1e-15);
        assert!((s.phi_hat - 0.1024).abs() < 1e-15);

        let s = nash_differentiated(0.5_f64, 0.0).unwrap();
        assert_eq!(s.q_hat, 0.25);
        assert_eq!(s.phi_hat, 0.0625);
    }

    #[test]
    fn closed_form_satisfies_first_order_condition() {
        for i in 0..=100 {
            let b = i as f64 / 100.0;
            for c in [0.1, 0.5, 0.9] {
                let q = nash_differentiated(c, b).unwrap().q_hat;
                assert!((-2.0 * q + 1.0 - c - b * q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quantity_decreases_in_b() {
        let qs: Vec<f64> = (0..=100)
            .map(|i| {
                nash_differentiated(0.3_f64, i as f64 / 100.0)
                    .unwrap()
                    .q_hat
            })
            .collect();
        assert!(qs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn closed_form_in_f32() {
        let s = nash_differentiated(0.5f32, 1.0).unwrap();
        assert!((s.q_hat - 1.0 / 6.0).abs() < 1e-7);
    }

    #[test]
    fn best_response_linear() {
        let d = unit_linear();
        let br = best_response_homogeneous(&d, 0.5, 0.25, 1.0, 1e-10).unwrap();
        assert!((br - 0.125).abs() < 1e-8);
        let br = best_response_homogeneous(&d, 0.5, 0.0, 1.0, 1e-10).unwrap();
        assert!((br - 0.25).abs() < 1e-8);
        // opponent floods the market: stay out
        let br = best_response_homogeneous(&d, 0.5, 0.9, 1.0, 1e-10).unwrap();
        assert_eq!(br, 0.0);
    }

    #[test]
    fn best_response_exponential_matches_fine_grid() {
        let d = DemandModel::<f64>::exponential(1.0).unwrap();
        let profit = |q: f64| q * (-q).exp() - 0.5 * q;
        // 10^6-point argmax oracle on [0, 10]
        let n = 1_000_000;
        let (mut arg, mut best) = (0.0, profit(0.0));
        for i in 1..=n {
            let q = 10.0 * i as f64 / n as f64;
            let v = profit(q);
            if v > best {
                arg = q;
                best = v;
            }
        }
        let br = best_response_homogeneous(&d, 0.5, 0.0, 10.0, 1e-10).unwrap();
        assert!((br - arg).abs() <= 2e-5, "br={br} oracle={arg}");
        // frozen: argmax of q e^{-q} - q/2, root of e^{-q}(1-q) = 1/2
        assert!((br - 0.314_923_058).abs() < 1e-6, "br={br}");
    }

    #[test]
    fn best_response_validates() {
        let d = unit_linear();
        assert!(best_response_homogeneous(&d, 0.5, -1.0, 1.0, 1e-9).is_err());
        assert!(best_response_homogeneous(&d, 0.5, 0.0, 0.0, 1e-9).is_err());
        assert!(best_response_homogeneous(&d, 0.5, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn iterative_linear() {
        let d = unit_linear();
        for (c, expect) in [(0.5, 1.0 / 6.0), (0.2, 0.8 / 3.0)] {
            let s = nash_homogeneous(&d, c, &NashOptions::default()).unwrap();
            assert!((s.q_hat - expect).abs() < 1e-7, "c={c}: {}", s.q_hat);
            assert_eq!(s.total, 2.0 * s.q_hat);
            assert_eq!(s.method, SolveMethod::Iterative);
            assert!(s.residual <= 1e-8);
        }
    }

    #[test]
    fn iterative_rejects_condition_c_failure() {
        let d = unit_linear();
        let opts = NashOptions {
            domain_hi: Some(0.1),
            ..NashOptions::default()
        };
        assert!(matches!(
            nash_homogeneous(&d, 0.5, &opts),
            Err(Error::ConditionCViolated { .. })
        ));
    }

    #[test]
    fn iterative_reports_no_convergence() {
        let opts = NashOptions {
            max_iter: 2,
            ..NashOptions::default()
        };
        assert!(matches!(
            nash_homogeneous(&unit_linear(), 0.5, &opts),
            Err(Error::NoConvergence { iterations: 2, .. })
        ));
    }

    #[test]
    fn damping_validated() {
        let opts = NashOptions {
            damping: 0.0,
            ..NashOptions::default()
        };
        assert!(nash_homogeneous(&unit_linear(), 0.5, &opts).is_err());
    }
}
