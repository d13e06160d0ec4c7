//! Monte Carlo estimates of the waiting times τ_G and τ_{I,G}.
//!
//! Trial `i` draws from `RandomStream::derive(seed, i)`, so estimates are
//! identical under any thread schedule.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::RandomStream;
use crate::product::{
    maximal_descriptors, uniform_product_element, GenerationTracker, InvariableTracker,
    MaximalDescriptor, ProductGroup,
};

/// Hard stop for a single trial; unreachable unless a predicate is broken.
pub const MAX_DRAWS_PER_TRIAL: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Generation,
    Invariable,
}

#[derive(Clone, Debug, Serialize)]
pub struct WaitingTimeEstimate {
    pub mean: f64,
    /// Unbiased sample variance; zero for a single trial.
    pub variance: f64,
    pub trials: usize,
    pub ci95: f64,
    pub seed: u64,
    pub mode: Mode,
    /// Set when `trials == 1` and the interval carries no information.
    pub degenerate: bool,
}

fn one_trial(
    g: &ProductGroup,
    descriptors: &[MaximalDescriptor],
    mode: Mode,
    stream: &mut RandomStream,
) -> Result<usize> {
    match mode {
        Mode::Invariable => {
            let mut tracker = InvariableTracker::new(g, descriptors);
            for n in 1..=MAX_DRAWS_PER_TRIAL {
                if tracker.push(&uniform_product_element(g, stream)) {
                    return Ok(n);
                }
            }
        }
        Mode::Generation => {
            let mut tracker = GenerationTracker::new(g);
            for n in 1..=MAX_DRAWS_PER_TRIAL {
                if tracker.push(uniform_product_element(g, stream)) {
                    return Ok(n);
                }
            }
        }
    }
    Err(Error::WaitingTimeCap(MAX_DRAWS_PER_TRIAL))
}

pub fn mc_waiting_time(
    g: &ProductGroup,
    mode: Mode,
    trials: usize,
    seed: u64,
) -> Result<WaitingTimeEstimate> {
    if trials == 0 {
        return Err(Error::OutOfRange("at least one trial is required".into()));
    }
    let descriptors = match mode {
        Mode::Invariable => maximal_descriptors(g),
        Mode::Generation => Vec::new(),
    };
    let counts = (0..trials as u64)
        .into_par_iter()
        .map(|i| one_trial(g, &descriptors, mode, &mut RandomStream::derive(seed, i)))
        .collect::<Result<Vec<usize>>>()?;
    Ok(summarize(&counts, seed, mode))
}

fn summarize(counts: &[usize], seed: u64, mode: Mode) -> WaitingTimeEstimate {
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let variance = if counts.len() > 1 {
        counts
            .iter()
            .map(|&c| (c as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    WaitingTimeEstimate {
        mean,
        variance,
        trials: counts.len(),
        ci95: 1.96 * (variance / n).sqrt(),
        seed,
        mode,
        degenerate: counts.len() == 1,
    }
}

impl WaitingTimeEstimate {
    pub fn std_error(&self) -> f64 {
        (self.variance / self.trials as f64).sqrt()
    }

    /// |mean − target| ≤ 3 standard errors.
    pub fn within_3_sigma(&self, target: f64) -> bool {
        (self.mean - target).abs() <= 3.0 * self.std_error()
    }
}
