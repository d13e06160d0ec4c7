//! `Σ_{t≥0} 1 − (1 − α^{−t})^k`, the lower bound for `C(T^k)` in terms of
//! `α(T)`.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::SeriesValue;
use crate::error::{Error, Result};
use crate::frac::to_f64;

/// Largest `k` summed exactly through the binomial expansion.
pub const EXACT_K_LIMIT: u64 = 64;

const FLOAT_TAIL_TARGET: f64 = 1e-12;

/// For `k ≤ EXACT_K_LIMIT` the value is the exact rational
/// `Σ_{j=1}^{k} (−1)^{j+1} C(k,j) / (1 − α^{−j})`; otherwise terms are summed
/// in floating point until the tail bound `k α^{−T} / (1 − α^{−1})` is
/// negligible.
pub fn lower_bound_series(alpha: &BigRational, k: u64) -> Result<SeriesValue> {
    if *alpha <= BigRational::one() {
        return Err(Error::OutOfRange(format!("alpha = {alpha} must exceed 1")));
    }
    if k == 0 {
        return Err(Error::OutOfRange("k must be at least 1".into()));
    }
    if k <= EXACT_K_LIMIT {
        let inv = alpha.recip();
        let mut sum = BigRational::zero();
        for j in 1..=k {
            let term = BigRational::from(BigInt::from(binomial(k, j)))
                / (BigRational::one() - num_traits::pow(inv.clone(), j as usize));
            if j % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        return Ok(SeriesValue::exact(sum));
    }
    let a = to_f64(alpha);
    let kf = k as f64;
    let tail = |t: i32| kf * a.powi(-t) / (1.0 - 1.0 / a);
    let mut float = 0.0;
    let mut t = 0i32;
    while tail(t) > FLOAT_TAIL_TARGET {
        let x = a.powi(-t);
        // 1 − (1 − x)^k without cancellation
        float += -(kf * (-x).ln_1p()).exp_m1();
        t += 1;
    }
    Ok(SeriesValue {
        exact: None,
        float,
        truncation_bound: tail(t),
        upper_bound: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::ratio;

    #[test]
    fn small_cases() {
        let a = ratio(3, 2);
        assert_eq!(lower_bound_series(&a, 1).unwrap().exact, Some(ratio(3, 1)));
        assert_eq!(lower_bound_series(&a, 2).unwrap().exact, Some(ratio(21, 5)));
        assert!(lower_bound_series(&ratio(1, 1), 2).is_err());
        assert!(lower_bound_series(&a, 0).is_err());
    }

    /// Oracle: direct term-by-term summation.
    #[test]
    fn exact_matches_direct_summation() {
        for (p, q) in [(3, 2), (7, 5), (2, 1)] {
            let a = ratio(p, q);
            let af = p as f64 / q as f64;
            for k in [1u64, 3, 8, 20] {
                let direct: f64 = (0..2000)
                    .map(|t| 1.0 - (1.0 - af.powi(-t)).powi(k as i32))
                    .sum();
                let v = lower_bound_series(&a, k).unwrap();
                assert!((v.float - direct).abs() < 1e-9, "{p}/{q} {k}");
            }
        }
    }

    #[test]
    fn float_branch_continues_exact_branch() {
        let a = ratio(3, 2);
        let exact = lower_bound_series(&a, EXACT_K_LIMIT).unwrap().float;
        let next = lower_bound_series(&a, EXACT_K_LIMIT + 1).unwrap();
        assert!(next.exact.is_none());
        assert!(next.float > exact && next.float - exact < 1.0);
    }

    #[test]
    fn growth_envelope() {
        let a = ratio(3, 2);
        let mut last = 0.0;
        for k in [1u64, 2, 5, 10, 30, 64, 100, 1000, 10_000] {
            let v = lower_bound_series(&a, k).unwrap().float;
            assert!(v >= last);
            last = v;
            // the additive constant dominates below k ≈ 100
            if k >= 100 {
                let r = v / ((k as f64).ln() / 1.5f64.ln());
                assert!(r > 0.3 && r <= 1.2, "k={k} ratio={r}");
            }
        }
    }
}
