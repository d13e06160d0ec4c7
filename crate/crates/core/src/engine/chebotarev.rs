//! The Chebotarev invariant by inclusion–exclusion over maximal classes.
//!
//! With `q_J = |∩_{d∈J} M̃_d| / |G|`, the failure probability after `t`
//! draws is `1 − P_I(G,t) = Σ_{∅≠J} (−1)^{|J|+1} q_J^t`, and summing from
//! `t = 0` gives `C(G) = Σ_{∅≠J} (−1)^{|J|+1} / (1 − q_J)`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use super::SeriesValue;
use crate::error::{Error, Result};
use crate::frac::{from_biguint, to_f64};
use crate::product::{
    in_mtilde, maximal_descriptors, ClassSignature, DescriptorKind, MaximalDescriptor, ProductGroup,
};

pub const DEFAULT_EXACT_CAP: usize = 20;

/// |∩_{d∈J} M̃_d|, counted class by class.
///
/// Product constraints restrict the admissible classes of one coordinate;
/// diagonal constraints link two coordinates through a class bijection.
/// Each linked component is enumerated from its root class, and
/// components multiply.
pub fn intersection_size(g: &ProductGroup, j: &[&MaximalDescriptor]) -> BigUint {
    let k = g.k();
    let mut allowed: Vec<Vec<bool>> = (0..k)
        .map(|c| vec![true; g.factor_of(c).group.classes.num_classes()])
        .collect();
    // (neighbour, class map along the edge)
    let mut edges: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); k];
    for d in j {
        match d.kind {
            DescriptorKind::Product { coord, class } => {
                let mask = &g.factor_of(coord).maximals[class].mtilde_class_mask;
                for (a, &m) in allowed[coord].iter_mut().zip(mask) {
                    *a &= m;
                }
            }
            DescriptorKind::Diagonal { i, j, coset } => {
                let forward = g.factor_of(i).group.out_class_actions[coset]
                    .perm_of_classes
                    .clone();
                let mut backward = vec![0; forward.len()];
                for (c, &img) in forward.iter().enumerate() {
                    backward[img] = c;
                }
                edges[i].push((j, forward));
                edges[j].push((i, backward));
            }
        }
    }

    let mut visited = vec![false; k];
    let mut total = BigUint::one();
    for root in 0..k {
        if visited[root] {
            continue;
        }
        let sizes = &g.factor_of(root).group.classes.class_sizes;
        let mut component = vec![root];
        visited[root] = true;
        let mut head = 0;
        while head < component.len() {
            let u = component[head];
            head += 1;
            for (v, _) in &edges[u] {
                if !visited[*v] {
                    visited[*v] = true;
                    component.push(*v);
                }
            }
        }
        let mut sum = BigUint::zero();
        let mut assigned = vec![usize::MAX; k];
        for c in 0..sizes.len() {
            if !allowed[root][c] {
                continue;
            }
            for &u in &component {
                assigned[u] = usize::MAX;
            }
            assigned[root] = c;
            let mut stack = vec![root];
            let mut consistent = true;
            'walk: while let Some(u) = stack.pop() {
                for (v, map) in &edges[u] {
                    let img = map[assigned[u]];
                    if assigned[*v] == usize::MAX {
                        if !allowed[*v][img] {
                            consistent = false;
                            break 'walk;
                        }
                        assigned[*v] = img;
                        stack.push(*v);
                    } else if assigned[*v] != img {
                        consistent = false;
                        break 'walk;
                    }
                }
            }
            if consistent {
                sum += component
                    .iter()
                    .fold(BigUint::one(), |acc, &u| acc * sizes[assigned[u]]);
            }
        }
        total *= sum;
    }
    total
}

pub fn intersection_fugacity(g: &ProductGroup, j: &[&MaximalDescriptor]) -> Result<BigRational> {
    if j.is_empty() {
        return Err(Error::OutOfRange("empty descriptor set".into()));
    }
    Ok(from_biguint(&intersection_size(g, j), &g.order))
}

/// All inclusion–exclusion terms, aggregated by intersection size: each
/// distinct `|∩ M̃|` maps to Σ (−1)^{|J|+1} over the subsets attaining it.
#[derive(Clone, Debug)]
pub struct FugacitySystem {
    pub descriptors: Vec<MaximalDescriptor>,
    pub group_order: BigUint,
    pub terms: BTreeMap<BigUint, i64>,
}

impl FugacitySystem {
    pub fn build(g: &ProductGroup, cap: usize) -> Result<Self> {
        let descriptors = maximal_descriptors(g);
        let m = descriptors.len();
        if m > cap || m >= 63 {
            return Err(Error::CapExceeded {
                what: "descriptors for exact inclusion-exclusion",
                cap,
            });
        }
        let terms: HashMap<BigUint, i64> = (1u64..1u64 << m)
            .into_par_iter()
            .fold(HashMap::new, |mut acc, mask| {
                let j: Vec<&MaximalDescriptor> = (0..m)
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| &descriptors[b])
                    .collect();
                let sign = if mask.count_ones() % 2 == 1 { 1 } else { -1 };
                *acc.entry(intersection_size(g, &j)).or_insert(0) += sign;
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (n, c) in b {
                    *a.entry(n).or_insert(0) += c;
                }
                a
            });
        Ok(FugacitySystem {
            descriptors,
            group_order: g.order.clone(),
            terms: terms.into_iter().filter(|(_, c)| *c != 0).collect(),
        })
    }

    fn weighted_sum(&self, f: impl Fn(&BigRational) -> BigRational) -> BigRational {
        self.terms
            .iter()
            .map(|(n, &c)| f(&from_biguint(n, &self.group_order)) * BigInt::from(c))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// 1 − P_I(G, t).
    pub fn failure_probability(&self, t: u32) -> BigRational {
        self.weighted_sum(|q| num_traits::pow(q.clone(), t as usize))
    }

    /// Σ_J (−1)^{|J|+1} / (1 − q_J).
    pub fn chebotarev(&self) -> BigRational {
        self.weighted_sum(|q| BigRational::one() / (BigRational::one() - q))
    }

    /// Σ_{t<T} (1 − P_I(G, t)), via the geometric partial sums.
    pub fn partial_sum(&self, terms: u32) -> BigRational {
        self.weighted_sum(|q| {
            (BigRational::one() - num_traits::pow(q.clone(), terms as usize))
                / (BigRational::one() - q)
        })
    }
}

pub fn exact_chebotarev(g: &ProductGroup, cap: usize) -> Result<SeriesValue> {
    Ok(SeriesValue::exact(
        FugacitySystem::build(g, cap)?.chebotarev(),
    ))
}

/// Σ_d q_d^T / (1 − q_d): bounds the tail Σ_{t≥T} (1 − P_I(G, t)).
pub fn union_tail_bound(descriptors: &[MaximalDescriptor], terms: u32) -> f64 {
    descriptors
        .iter()
        .map(|d| {
            let q = to_f64(&d.fugacity_q);
            q.powi(terms as i32) / (1.0 - q)
        })
        .sum()
}

/// First `T` terms of the series. Within the exact cap the terms are exact;
/// above it each term is replaced by the union bound `min(1, Σ_d q_d^t)`
/// and the result is an upper bound on the partial sum.
pub fn truncated_chebotarev(g: &ProductGroup, terms: u32, cap: usize) -> Result<SeriesValue> {
    if terms == 0 {
        return Err(Error::OutOfRange(
            "truncation length must be at least 1".into(),
        ));
    }
    let descriptors = maximal_descriptors(g);
    let truncation_bound = union_tail_bound(&descriptors, terms);
    if descriptors.len() <= cap {
        let partial = FugacitySystem::build(g, cap)?.partial_sum(terms);
        return Ok(SeriesValue {
            float: to_f64(&partial),
            exact: None,
            truncation_bound,
            upper_bound: false,
        });
    }
    let qs: Vec<f64> = descriptors.iter().map(|d| to_f64(&d.fugacity_q)).collect();
    let float = (0..terms)
        .map(|t| qs.iter().map(|q| q.powi(t as i32)).sum::<f64>().min(1.0))
        .sum();
    Ok(SeriesValue {
        exact: None,
        float,
        truncation_bound,
        upper_bound: true,
    })
}

/// 1 − P_I(G,t) by enumerating every t-tuple of class signatures, weighted
/// by class sizes, and testing whether one union of conjugates contains the
/// whole tuple. Independent of the inclusion–exclusion machinery; `cap`
/// bounds the number of tuples visited.
pub fn failure_probability_by_enumeration(
    g: &ProductGroup,
    t: u32,
    cap: usize,
) -> Result<BigRational> {
    let descriptors = maximal_descriptors(g);
    let signatures: Vec<(ClassSignature, BigUint)> = all_signatures(g);
    let tuples = (signatures.len() as u128).checked_pow(t);
    if tuples.is_none_or(|n| n > cap as u128) {
        return Err(Error::CapExceeded {
            what: "signature tuples",
            cap,
        });
    }
    let n = signatures.len();
    let mut trapped = BigUint::zero();
    let mut digits = vec![0usize; t as usize];
    loop {
        let caught = descriptors
            .iter()
            .any(|d| digits.iter().all(|&s| in_mtilde(g, &signatures[s].0, d)));
        if caught {
            trapped += digits
                .iter()
                .fold(BigUint::one(), |acc, &s| acc * &signatures[s].1);
        }
        let mut pos = 0;
        while pos < digits.len() {
            digits[pos] += 1;
            if digits[pos] < n {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
        if pos == digits.len() {
            break;
        }
    }
    Ok(from_biguint(&trapped, &g.order.pow(t)))
}

/// Every class signature of the product with the size of its class.
fn all_signatures(g: &ProductGroup) -> Vec<(ClassSignature, BigUint)> {
    let mut out = vec![(Vec::new(), BigUint::one())];
    for c in 0..g.k() {
        let sizes = &g.factor_of(c).group.classes.class_sizes;
        out = out
            .into_iter()
            .flat_map(|(sig, w)| {
                sizes.iter().enumerate().map(move |(cls, &s)| {
                    let mut sig = sig.clone();
                    sig.push(cls);
                    (sig, &w * s)
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|(classes, w)| (ClassSignature { classes }, w))
        .collect()
}

/// Rows `(t, 1 − P_I(G,t))` for plotting.
pub fn failure_curve(system: &FugacitySystem, max_t: u32) -> Vec<(u32, f64)> {
    (0..=max_t)
        .map(|t| {
            (
                t,
                system.failure_probability(t).to_f64().unwrap_or(f64::NAN),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::Atlas;
    use crate::frac::ratio;
    use crate::product::FactorCache;

    fn product(spec: &str) -> ProductGroup {
        FactorCache::new(Atlas::bundled()).build_spec(spec).unwrap()
    }

    #[test]
    fn single_descriptor_is_its_fugacity() {
        let g = product("A5^2");
        for d in maximal_descriptors(&g) {
            assert_eq!(intersection_fugacity(&g, &[&d]).unwrap(), d.fugacity_q);
        }
        assert!(intersection_fugacity(&g, &[]).is_err());
    }

    #[test]
    fn a5_pair_intersections() {
        let g = product("A5");
        let ds = maximal_descriptors(&g);
        let by_index = |n: u64| ds.iter().find(|d| d.index_n == BigUint::from(n)).unwrap();
        let (a4, d10) = (by_index(5), by_index(6));
        assert_eq!(intersection_fugacity(&g, &[a4, d10]).unwrap(), ratio(4, 15));

        let g = product("A5^2");
        let diag: Vec<_> = maximal_descriptors(&g)
            .into_iter()
            .filter(|d| d.is_diagonal())
            .collect();
        let j: Vec<&MaximalDescriptor> = diag.iter().collect();
        assert_eq!(intersection_fugacity(&g, &j).unwrap(), ratio(626, 3600));
    }

    /// Oracle: enumerate every class signature of the product, weight it by
    /// the product of class sizes, and test membership descriptor by
    /// descriptor.
    fn brute_intersection(g: &ProductGroup, j: &[&MaximalDescriptor]) -> BigUint {
        let counts: Vec<usize> = (0..g.k())
            .map(|c| g.factor_of(c).group.classes.num_classes())
            .collect();
        let mut sig = vec![0usize; g.k()];
        let mut total = BigUint::zero();
        loop {
            let s = crate::product::ClassSignature {
                classes: sig.clone(),
            };
            if j.iter().all(|d| crate::product::in_mtilde(g, &s, d)) {
                total += (0..g.k()).fold(BigUint::one(), |acc, c| {
                    acc * g.factor_of(c).group.classes.class_sizes[sig[c]]
                });
            }
            let mut pos = 0;
            while pos < sig.len() {
                sig[pos] += 1;
                if sig[pos] < counts[pos] {
                    break;
                }
                sig[pos] = 0;
                pos += 1;
            }
            if pos == sig.len() {
                return total;
            }
        }
    }

    #[test]
    fn intersections_match_signature_enumeration() {
        for spec in ["A5^3", "A6^2", "A5^2xPSL(2,7)"] {
            let g = product(spec);
            let ds = maximal_descriptors(&g);
            let mut stream = crate::perm::RandomStream::new(17);
            for _ in 0..60 {
                let j: Vec<&MaximalDescriptor> =
                    ds.iter().filter(|_| stream.below(3) == 0).collect();
                if j.is_empty() {
                    continue;
                }
                assert_eq!(
                    intersection_size(&g, &j),
                    brute_intersection(&g, &j),
                    "{spec}"
                );
            }
        }
    }

    #[test]
    fn subset_fugacities_are_proper_and_monotone() {
        let g = product("A5^2");
        let ds = maximal_descriptors(&g);
        let m = ds.len();
        let q = |mask: u32| {
            let j: Vec<&MaximalDescriptor> = (0..m)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| &ds[b])
                .collect();
            intersection_fugacity(&g, &j).unwrap()
        };
        let one = BigRational::one();
        for mask in 1u32..1 << m {
            let qj = q(mask);
            assert!(qj > BigRational::zero() && qj < one);
            for b in 0..m {
                if mask >> b & 1 == 0 {
                    assert!(q(mask | 1 << b) <= qj);
                }
            }
        }
    }

    #[test]
    fn a5_chebotarev_is_91_over_22() {
        let sys = FugacitySystem::build(&product("A5"), DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(sys.chebotarev(), ratio(91, 22));
        assert_eq!(sys.failure_probability(0), BigRational::one());
        assert_eq!(sys.failure_probability(1), BigRational::one());
        for t in 0..6u32 {
            let closed = num_traits::pow(ratio(3, 5), t as usize)
                + num_traits::pow(ratio(2, 3), t as usize)
                - num_traits::pow(ratio(4, 15), t as usize);
            assert_eq!(sys.failure_probability(t), closed);
        }
    }

    #[test]
    fn failure_probability_matches_tuple_enumeration() {
        for spec in ["A5", "PSL(2,7)"] {
            let g = product(spec);
            let sys = FugacitySystem::build(&g, DEFAULT_EXACT_CAP).unwrap();
            for t in 0..=3u32 {
                assert_eq!(
                    sys.failure_probability(t),
                    failure_probability_by_enumeration(&g, t, 1 << 16).unwrap()
                );
            }
        }
    }

    #[test]
    fn series_limit_matches_closed_form() {
        let sys = FugacitySystem::build(&product("A5"), DEFAULT_EXACT_CAP).unwrap();
        let series: f64 = (0..400).map(|t| to_f64(&sys.failure_probability(t))).sum();
        assert!((series - 91.0 / 22.0).abs() < 1e-12);
        assert!(sys.partial_sum(400) < sys.chebotarev());
    }

    #[test]
    fn truncation_bound_shrinks_and_covers_the_gap() {
        let g = product("A5");
        let exact = 91.0 / 22.0;
        let mut last = f64::INFINITY;
        for t in [1, 5, 10, 40, 200] {
            let s = truncated_chebotarev(&g, t, DEFAULT_EXACT_CAP).unwrap();
            assert!(!s.upper_bound);
            assert!(s.truncation_bound < last);
            last = s.truncation_bound;
            assert!(exact - s.float >= -1e-12 && exact - s.float <= s.truncation_bound + 1e-12);
        }
    }

    #[test]
    fn a5_cubed_exact_and_truncated_agree() {
        let g = product("A5^3");
        let sys = FugacitySystem::build(&g, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(sys.descriptors.len(), 15);
        let exact = to_f64(&sys.chebotarev());
        let s = truncated_chebotarev(&g, 200, DEFAULT_EXACT_CAP).unwrap();
        assert!((exact - s.float).abs() <= s.truncation_bound + 1e-9);
    }

    #[test]
    fn over_cap_falls_back_to_union_bound() {
        let g = product("A5^4");
        assert!(matches!(
            exact_chebotarev(&g, DEFAULT_EXACT_CAP),
            Err(Error::CapExceeded { .. })
        ));
        let s = truncated_chebotarev(&g, 60, DEFAULT_EXACT_CAP).unwrap();
        assert!(s.upper_bound);
        let below = exact_chebotarev(&product("A5^3"), DEFAULT_EXACT_CAP).unwrap();
        assert!(s.float > below.float);
    }
}
