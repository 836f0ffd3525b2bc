//! # mechsched
//!
//! Truthful single-task scheduling without payments, where machines are bound
//! by their declarations, and the average-case behaviour of its approximation
//! ratio.
//!
//! The allocation rule gives the task to the cheapest machine with the highest
//! probability while keeping every machine's best response truthful. Its
//! worst-case ratio is `(n + 1) / 2`; under i.i.d. costs the expected ratio is
//! bounded by `2h + 1.33`, where `h` is any constant with `F(h · t_min) >= 11/12`.
//!
//! * [`mechanism`]: allocation probabilities, social cost, deviations, plus an
//!   analytic oracle that also runs over exact rationals.
//! * [`distributions`]: Pareto, exponential and log-logistic costs and the
//!   threshold solver.
//! * [`bounds`]: central binomial estimate, event-A tail probability and the
//!   assembled bounds.
//! * [`simulation`]: reproducible Monte Carlo estimates.
//! * [`cli`]: the `mechsched` command line front end.
//!
//! ```
//! use mechsched::{allocate, Costs};
//!
//! let t = Costs::new(vec![1.0, 2.0]).unwrap();
//! let p = allocate(&t).unwrap();
//! assert!((p.as_slice()[0] - 0.75).abs() < 1e-12);
//! ```

pub mod bounds;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod mechanism;
pub mod quadrature;
pub mod scalar;
pub mod simulation;
pub mod stats;

pub use distributions::{
    solve_threshold, Convention, DistributionSpec, Family, ThresholdChoice, THRESHOLD_QUANTILE,
};
pub use error::{Error, Result};
pub use mechanism::{
    allocate, allocate_oracle, best_deviation, deviation_cost, social_cost,
    AllocationProbabilities, CostVector, DeviationReport, MechanismOutcome,
};
pub use scalar::{Real, Scalar};
pub use simulation::{estimate_average_ratio, RatioEstimate, SimulationConfig};

pub use num_rational::BigRational;

/// Double precision cost vector.
pub type Costs = CostVector<f64>;
/// Double precision allocation.
pub type Allocation = AllocationProbabilities<f64>;
/// Double precision outcome.
pub type Outcome = MechanismOutcome<f64>;
/// Single precision cost vector.
pub type Costs32 = CostVector<f32>;
/// Exact rational cost vector, usable with [`allocate_oracle`].
pub type ExactCosts = CostVector<BigRational>;
/// Exact rational allocation.
pub type ExactAllocation = AllocationProbabilities<BigRational>;
