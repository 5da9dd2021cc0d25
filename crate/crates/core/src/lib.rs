//! Cournot duopoly under two incentive schemes: profit maximization
//! (Cournot-Nash equilibrium) and a relative-profit contest solved by
//! unbeatable strategies.
//!
//! The solvers are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the CLI uses.

// NaN-rejecting guards are written as negated comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compare;
pub mod contest;
pub mod demand;
pub mod equilibrium;
pub mod error;
pub mod payoffs;
pub mod report;
pub mod scalar;

pub use compare::{compare, gamma, gamma_derivative, sweep, sweep_parallel};
pub use contest::{
    unbeatable_differentiated, unbeatable_homogeneous, uniqueness_probe, uniqueness_probe_reports,
    verify_unbeatable,
};
pub use demand::{find_q_bar, verify_condition_c, Clause};
pub use equilibrium::{
    best_response_homogeneous, nash_differentiated, nash_homogeneous, SolveMethod,
};
pub use error::{Error, Result};
pub use payoffs::{allocate_bonus, profits, relative_payoff, MarketKind};
pub use scalar::Scalar;

pub type DemandModel = demand::DemandModel<f64>;
pub type Table = demand::Table<f64>;
pub type ConditionCReport = demand::ConditionCReport<f64>;
pub type ConditionCOptions = demand::ConditionCOptions<f64>;
pub type MarketParams = payoffs::MarketParams<f64>;
pub type StrategyProfile = payoffs::StrategyProfile<f64>;
pub type ProfitPair = payoffs::ProfitPair<f64>;
pub type ContestConfig = payoffs::ContestConfig<f64>;
pub type NashSolution = equilibrium::NashSolution<f64>;
pub type NashOptions = equilibrium::NashOptions<f64>;
pub type ContestSolution = contest::ContestSolution<f64>;
pub type VerificationReport = contest::VerificationReport<f64>;
pub type GridSpec = contest::GridSpec<f64>;
pub type ComparisonReport = compare::ComparisonReport<f64>;

/// Single-precision variants.
pub mod f32 {
    use crate::{compare, contest, demand, equilibrium, payoffs};

    pub type DemandModel = demand::DemandModel<f32>;
    pub type MarketParams = payoffs::MarketParams<f32>;
    pub type NashSolution = equilibrium::NashSolution<f32>;
    pub type ContestSolution = contest::ContestSolution<f32>;
    pub type VerificationReport = contest::VerificationReport<f32>;
    pub type ComparisonReport = compare::ComparisonReport<f32>;
}
