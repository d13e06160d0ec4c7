//! `i(r,k)`: the proportion of `S_r` stabilizing some `k`-subset setwise.
//!
//! A permutation fixes a `k`-set iff some sub-multiset of its cycle lengths
//! sums to `k`, so `i(r,k)` is a sum of `1/z_λ` over qualifying partitions.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::frac::from_biguint;

pub const DEFAULT_PARTITION_CAP: usize = 60;

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Visits each partition of `r` as `(part, multiplicity)` pairs with parts
/// in decreasing order.
fn for_each_partition(r: usize, mut f: impl FnMut(&[(usize, usize)])) {
    fn go(
        rest: usize,
        max_part: usize,
        parts: &mut Vec<(usize, usize)>,
        f: &mut impl FnMut(&[(usize, usize)]),
    ) {
        if rest == 0 {
            f(parts);
            return;
        }
        for p in (1..=max_part.min(rest)).rev() {
            for m in 1..=rest / p {
                parts.push((p, m));
                go(rest - p * m, p - 1, parts, f);
                parts.pop();
            }
        }
    }
    go(r, r, &mut Vec::new(), &mut f);
}

/// Bit `s` is set iff some sub-multiset of the parts sums to `s`.
fn subset_sums(parts: &[(usize, usize)]) -> u128 {
    let mut reach = 1u128;
    for &(p, m) in parts {
        for _ in 0..m {
            reach |= reach << p;
        }
    }
    reach
}

/// `[i(r,0), i(r,1), …, i(r,r)]` in one pass over the partitions of `r`.
pub fn fix_kset_profile(r: usize, cap: usize) -> Result<Vec<BigRational>> {
    if r == 0 || r > cap || r > 127 {
        return Err(Error::OutOfRange(format!(
            "r = {r} outside 1..={}",
            cap.min(127)
        )));
    }
    let r_fact = factorial(r);
    let mut counts = vec![BigUint::zero(); r + 1];
    for_each_partition(r, |parts| {
        // r!/z_λ permutations have cycle type λ
        let z = parts.iter().fold(BigUint::one(), |acc, &(p, m)| {
            acc * BigUint::from(p).pow(m as u32) * factorial(m)
        });
        let class_size = &r_fact / z;
        let reach = subset_sums(parts);
        for (k, count) in counts.iter_mut().enumerate() {
            if reach >> k & 1 == 1 {
                *count += &class_size;
            }
        }
    });
    Ok(counts.iter().map(|c| from_biguint(c, &r_fact)).collect())
}

pub fn fix_kset_proportion(r: usize, k: usize, cap: usize) -> Result<BigRational> {
    if k == 0 || k > r {
        return Err(Error::OutOfRange(format!("k = {k} outside 1..={r}")));
    }
    Ok(fix_kset_profile(r, cap)?.swap_remove(k))
}

/// Largest degree accepted by [`fix_kset_brute_counts`].
pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Number of permutations of S_r stabilizing some k-set, for every k, by
/// walking S_r with Heap's algorithm and testing every subset of points.
pub fn fix_kset_brute_counts(r: usize) -> Result<Vec<u64>> {
    if r == 0 || r > BRUTE_FORCE_LIMIT {
        return Err(Error::OutOfRange(format!(
            "r = {r} outside 1..={BRUTE_FORCE_LIMIT}"
        )));
    }
    let mut perm: Vec<usize> = (0..r).collect();
    let mut hits = vec![0u64; r + 1];
    let mut visit = |p: &[usize]| {
        let mut found = vec![false; r + 1];
        for set in 0u32..1 << r {
            let stable = (0..r).all(|x| set >> x & 1 == 0 || set >> p[x] & 1 == 1);
            if stable {
                found[set.count_ones() as usize] = true;
            }
        }
        for (k, f) in found.iter().enumerate() {
            if *f {
                hits[k] += 1;
            }
        }
    };
    let mut c = vec![0usize; r];
    visit(&perm);
    let mut i = 0;
    while i < r {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(hits)
}

/// 1 − (1 + ln ln 2)/ln 2 ≈ 0.08607, the exponent in the decay of i(r,k).
pub fn decay_exponent() -> f64 {
    let ln2 = std::f64::consts::LN_2;
    1.0 - (1.0 + ln2.ln()) / ln2
}
