//! Profit kernels for both market kinds, the relative payoff and the
//! contest bonus rule.

use serde::Serialize;

use crate::demand::DemandModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default relative tolerance for declaring two profits tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MarketKind<T = f64> {
    /// One good priced by `demand(q1 + q2)`.
    Homogeneous(DemandModel<T>),
    /// Two goods with `P_i = 1 - q_i - b q_j`.
    Differentiated { b: T },
}

/// A validated duopoly: market kind plus common marginal cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketParams<T = f64> {
    kind: MarketKind<T>,
    cost: T,
}

impl<T: Scalar> MarketParams<T> {
    /// Homogeneous good; requires `0 < c < P(0)`.
    pub fn homogeneous(demand: DemandModel<T>, c: T) -> Result<Self> {
        let p0 = demand.choke_price();
        if !(c > T::zero() && c.is_finite()) {
            return Err(Error::invalid(format!("cost must be positive, got {c}")));
        }
        if c >= p0 {
            return Err(Error::InvalidCost {
                cost: c.as_f64(),
                p0: p0.as_f64(),
            });
        }
        Ok(MarketParams {
            kind: MarketKind::Homogeneous(demand),
            cost: c,
        })
    }

    /// Differentiated goods; requires `0 < c < 1` and `0 <= b <= 1`.
    pub fn differentiated(c: T, b: T) -> Result<Self> {
        validate_differentiated(c, b)?;
        Ok(MarketParams {
            kind: MarketKind::Differentiated { b },
            cost: c,
        })
    }

    /// Builds from loose parts: a demand curve selects the homogeneous
    /// market, otherwise `b` is required. Supplying `b` together with a
    /// demand curve is rejected.
    pub fn from_parts(demand: Option<DemandModel<T>>, c: T, b: Option<T>) -> Result<Self> {
        match (demand, b) {
            (Some(_), Some(_)) => Err(Error::invalid(
                "substitutability b is meaningless for a homogeneous market",
            )),
            (Some(d), None) => Self::homogeneous(d, c),
            (None, Some(b)) => Self::differentiated(c, b),
            (None, None) => Err(Error::invalid("a differentiated market needs b")),
        }
    }

    pub fn kind(&self) -> &MarketKind<T> {
        &self.kind
    }

    pub fn cost(&self) -> T {
        self.cost
    }

    pub fn demand(&self) -> Option<&DemandModel<T>> {
        match &self.kind {
            MarketKind::Homogeneous(d) => Some(d),
            MarketKind::Differentiated { .. } => None,
        }
    }

    pub fn substitutability(&self) -> Option<T> {
        match self.kind {
            MarketKind::Differentiated { b } => Some(b),
            MarketKind::Homogeneous(_) => None,
        }
    }

    /// Upper end of the strategy space used by default grids.
    pub fn default_q_max(&self) -> T {
        match &self.kind {
            MarketKind::Homogeneous(d) => d.default_q_max(),
            MarketKind::Differentiated { .. } => T::one(),
        }
    }
}

pub(crate) fn validate_differentiated<T: Scalar>(c: T, b: T) -> Result<()> {
    if !(c > T::zero() && c < T::one()) {
        return Err(Error::invalid(format!("cost must lie in (0, 1), got {c}")));
    }
    if !(b >= T::zero() && b <= T::one()) {
        return Err(Error::invalid(format!(
            "substitutability must lie in [0, 1], got {b}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyProfile<T = f64> {
    pub q1: T,
    pub q2: T,
}

impl<T: Scalar> StrategyProfile<T> {
    pub fn new(q1: T, q2: T) -> Result<Self> {
        for q in [q1, q2] {
            if !(q >= T::zero() && q.is_finite()) {
                return Err(Error::invalid(format!(
                    "quantities must be finite and >= 0, got {q}"
                )));
            }
        }
        Ok(StrategyProfile { q1, q2 })
    }

    pub fn swapped(self) -> Self {
        StrategyProfile {
            q1: self.q2,
            q2: self.q1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfitPair<T = f64> {
    pub pi1: T,
    pub pi2: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContestConfig<T = f64> {
    prize: T,
    tie_tol: T,
}

impl<T: Scalar> ContestConfig<T> {
    pub fn new(prize: T, tie_tol: T) -> Result<Self> {
        if !(prize > T::zero() && prize.is_finite()) {
            return Err(Error::invalid(format!(
                "prize must be positive, got {prize}"
            )));
        }
        if !(tie_tol >= T::zero()) {
            return Err(Error::invalid(format!(
                "tie tolerance must be >= 0, got {tie_tol}"
            )));
        }
        Ok(ContestConfig { prize, tie_tol })
    }

    /// Prize `B` with the default tie tolerance.
    pub fn with_prize(prize: T) -> Result<Self> {
        Self::new(prize, T::lit(DEFAULT_TIE_TOL))
    }

    pub fn prize(&self) -> T {
        self.prize
    }

    pub fn tie_tol(&self) -> T {
        self.tie_tol
    }
}

/// Own profit `q_own * (price - c)` for the differentiated market.
fn differentiated_profit<T: Scalar>(own: T, other: T, b: T, c: T) -> T {
    own * (T::one() - own - b * other) - c * own
}

/// Profits of both players. Negative profits are returned as is.
pub fn profits<T: Scalar>(
    params: &MarketParams<T>,
    profile: StrategyProfile<T>,
) -> Result<ProfitPair<T>> {
    let c = params.cost;
    let StrategyProfile { q1, q2 } = profile;
    match &params.kind {
        MarketKind::Homogeneous(demand) => {
            let p = demand.price(q1 + q2)?;
            Ok(ProfitPair {
                pi1: q1 * p - c * q1,
                pi2: q2 * p - c * q2,
            })
        }
        MarketKind::Differentiated { b } => Ok(ProfitPair {
            pi1: differentiated_profit(q1, q2, *b, c),
            pi2: differentiated_profit(q2, q1, *b, c),
        }),
    }
}

/// `f(q1, q2) = π1 - π2`; player 1 wins the contest when positive.
pub fn relative_payoff<T: Scalar>(
    params: &MarketParams<T>,
    profile: StrategyProfile<T>,
) -> Result<T> {
    let pp = profits(params, profile)?;
    Ok(pp.pi1 - pp.pi2)
}

/// Splits prize `B`: all to the strictly better player, half each on a
/// tie (`|π1 - π2| <= tie_tol * max(1, |π1|, |π2|)`).
pub fn allocate_bonus<T: Scalar>(pp: ProfitPair<T>, cfg: &ContestConfig<T>) -> (T, T) {
    let scale = T::one().max(pp.pi1.abs()).max(pp.pi2.abs());
    let gap = pp.pi1 - pp.pi2;
    let prize = cfg.prize;
    if gap.abs() <= cfg.tie_tol * scale {
        let half = prize / T::lit(2.0);
        (half, half)
    } else if gap > T::zero() {
        (prize, T::zero())
    } else {
        (T::zero(), prize)
    }
}
