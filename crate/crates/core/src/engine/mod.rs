//! Exact and Monte Carlo evaluation of `e₁(G)` and `C(G)`, the lower-bound
//! series, the k-set statistic `i(r,k)`, and checks of the known bounds.

pub mod bounds;
pub mod chebotarev;
pub mod e1;
pub mod fixset;
pub mod series;
pub mod waiting;

use num_rational::BigRational;

use crate::frac::to_f64;

pub use bounds::{theorem_bounds, BoundCheck, BoundReport, Estimate};
pub use chebotarev::{
    exact_chebotarev, failure_curve, failure_probability_by_enumeration, intersection_fugacity,
    intersection_size, truncated_chebotarev, union_tail_bound, FugacitySystem, DEFAULT_EXACT_CAP,
};
pub use e1::{exact_e1, generation_failure_probability};
pub use fixset::{
    fix_kset_brute_counts, fix_kset_profile, fix_kset_proportion, BRUTE_FORCE_LIMIT,
    DEFAULT_PARTITION_CAP,
};
pub use series::lower_bound_series;
pub use waiting::{mc_waiting_time, Mode, WaitingTimeEstimate, MAX_DRAWS_PER_TRIAL};

/// A series value, exact when possible.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesValue {
    pub exact: Option<BigRational>,
    pub float: f64,
    /// Bound on the omitted tail; zero for exact values.
    pub truncation_bound: f64,
    /// Set when `float` bounds a partial sum from above rather than
    /// evaluating it.
    pub upper_bound: bool,
}

impl SeriesValue {
    pub fn exact(q: BigRational) -> Self {
        SeriesValue {
            float: to_f64(&q),
            exact: Some(q),
            truncation_bound: 0.0,
            upper_bound: false,
        }
    }
}
