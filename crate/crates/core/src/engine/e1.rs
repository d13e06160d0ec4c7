//! Exact `e₁` of a simple group from the Möbius function of its lattice.
//!
//! `P(G,t) = Σ_H μ(H) (|H|/|G|)^t`, so with `μ(G) = 1`,
//! `e₁(G) = Σ_{t≥0} (1 − P(G,t)) = −Σ_{H<G} μ(H) |G| / (|G| − |H|)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::SeriesValue;
use crate::error::{Error, Result};
use crate::frac::ratio;
use crate::lattice::{FactorData, SubgroupLattice};

fn lattice_of(factor: &FactorData) -> Result<&SubgroupLattice> {
    factor
        .lattice
        .as_ref()
        .ok_or_else(|| Error::LatticeUnavailable(factor.name().to_string()))
}

/// Σ over proper subgroups, one term per conjugacy class weighted by its
/// size.
fn proper_sum(lattice: &SubgroupLattice, f: impl Fn(u64) -> BigRational) -> BigRational {
    lattice
        .classes
        .iter()
        .filter(|c| c.order < lattice.group_order && c.mobius != 0)
        .map(|c| f(c.order) * BigInt::from(c.mobius * c.size as i64))
        .fold(BigRational::zero(), |a, b| a + b)
}

pub fn exact_e1(factor: &FactorData) -> Result<SeriesValue> {
    let lattice = lattice_of(factor)?;
    let n = lattice.group_order;
    Ok(SeriesValue::exact(-proper_sum(lattice, |h| {
        ratio(n, n - h)
    })))
}

/// 1 − P(G,t) = −Σ_{H<G} μ(H) (|H|/|G|)^t.
pub fn generation_failure_probability(factor: &FactorData, t: u32) -> Result<BigRational> {
    let lattice = lattice_of(factor)?;
    let n = lattice.group_order;
    Ok(-proper_sum(lattice, |h| {
        num_traits::pow(ratio(h, n), t as usize)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::Atlas;
    use crate::frac::to_f64;
    use num_traits::One;

    fn factor(name: &str) -> FactorData {
        FactorData::analyze(Atlas::bundled().build(name).unwrap()).unwrap()
    }

    #[test]
    fn a6_e1_rounds_to_2_494() {
        let e = exact_e1(&factor("A6")).unwrap();
        assert_eq!(format!("{:.3}", e.float), "2.494");
    }

    #[test]
    fn mobius_normalization() {
        for name in ["A5", "PSL(2,7)"] {
            let f = factor(name);
            assert_eq!(
                generation_failure_probability(&f, 0).unwrap(),
                BigRational::one()
            );
        }
    }

    /// Oracle for t = 1, 2: count generating tuples of A5 by closure.
    #[test]
    fn a5_generation_probability_matches_closure_count() {
        let f = factor("A5");
        let t = &f.group.table;
        let one = (0..60).filter(|&x| t.generates(&[x])).count() as u64;
        assert_eq!(one, 0);
        let mut two = 0u64;
        for x in 0..60 {
            for y in 0..60 {
                if t.generates(&[x, y]) {
                    two += 1;
                }
            }
        }
        assert_eq!(
            generation_failure_probability(&f, 1).unwrap(),
            BigRational::one()
        );
        assert_eq!(
            generation_failure_probability(&f, 2).unwrap(),
            ratio(3600 - two, 3600)
        );
        let e = exact_e1(&f).unwrap();
        let series: f64 = (0..200)
            .map(|t| to_f64(&generation_failure_probability(&f, t).unwrap()))
            .sum();
        assert!((series - e.float).abs() < 1e-9);
    }

    #[test]
    fn imported_factors_have_no_lattice() {
        let g = Atlas::bundled().build("A5").unwrap();
        let doc = serde_json::json!({"maximal_classes": [
            {"generators": ["(0 1 2)", "(1 2 3)"]},
            {"generators": ["(0 1 2 3 4)", "(1 4)(2 3)"]},
            {"generators": ["(0 1 2)", "(0 1)(3 4)"]}
        ]});
        let f = FactorData::from_import(g, &doc).unwrap();
        assert!(matches!(exact_e1(&f), Err(Error::LatticeUnavailable(_))));
    }
}
