//! Direct products `T₁^{k₁} × … × T_r^{k_r}` of simple groups, handled
//! coordinatewise and never materialized.
//!
//! Maximal subgroups of such a product come in two kinds: product type,
//! which restricts one coordinate to a maximal subgroup of its factor, and
//! diagonal type, which ties two coordinates carrying the same factor
//! through an automorphism. The union of conjugates of either kind is a
//! union of classes of the product, and the classes of the product are
//! tuples of factor classes, so class signatures decide invariable
//! generation exactly.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::atlas::{extend_homomorphism, Atlas};
use crate::error::{Error, Result};
use crate::frac::ratio;
use crate::lattice::FactorData;
use crate::perm::{ClassIndex, ElementIndex, RandomStream};

#[derive(Debug)]
pub struct ProductGroup {
    /// Distinct factors with multiplicities.
    pub factors: Vec<(Arc<FactorData>, usize)>,
    /// Factor index of each of the k coordinates.
    pub coordinates: Vec<usize>,
    /// Coordinate pairs `(i, j)`, `i < j`, carrying the same factor table.
    pub iso_pairs: Vec<(usize, usize)>,
    pub order: BigUint,
}

impl ProductGroup {
    pub fn k(&self) -> usize {
        self.coordinates.len()
    }

    pub fn factor_of(&self, coord: usize) -> &FactorData {
        &self.factors[self.coordinates[coord]].0
    }

    /// Canonical spec string such as `A5^2xPSL(2,7)`.
    pub fn spec_string(&self) -> String {
        self.factors
            .iter()
            .map(|(f, m)| {
                if *m == 1 {
                    f.name().to_string()
                } else {
                    format!("{}^{m}", f.name())
                }
            })
            .collect::<Vec<_>>()
            .join("x")
    }

    /// The factor, when the product is a direct power `T^k`.
    pub fn power_of(&self) -> Option<&FactorData> {
        (self.factors.len() == 1).then(|| &*self.factors[0].0)
    }
}

/// Assembles a product from factors and multiplicities. Factors are matched
/// by table identity, so the same `Arc` must be passed for repeated
/// factors.
pub fn build_product(spec: &[(Arc<FactorData>, usize)]) -> Result<ProductGroup> {
    let mut factors: Vec<(Arc<FactorData>, usize)> = Vec::new();
    for (f, m) in spec {
        if *m == 0 {
            return Err(Error::SpecSyntax(format!("{}^0", f.name())));
        }
        match factors.iter_mut().find(|(g, _)| Arc::ptr_eq(g, f)) {
            Some((_, k)) => *k += m,
            None => factors.push((f.clone(), *m)),
        }
    }
    if factors.is_empty() {
        return Err(Error::SpecSyntax(String::new()));
    }
    let coordinates: Vec<usize> = factors
        .iter()
        .enumerate()
        .flat_map(|(i, (_, m))| std::iter::repeat_n(i, *m))
        .collect();
    let mut iso_pairs = Vec::new();
    for i in 0..coordinates.len() {
        for j in i + 1..coordinates.len() {
            if coordinates[i] == coordinates[j] {
                iso_pairs.push((i, j));
            }
        }
    }
    let order = factors.iter().fold(BigUint::one(), |acc, (f, m)| {
        acc * BigUint::from(f.group.order()).pow(*m as u32)
    });
    Ok(ProductGroup {
        factors,
        coordinates,
        iso_pairs,
        order,
    })
}

/// Resolves atlas names to analyzed factors, building each group once.
pub struct FactorCache {
    atlas: Atlas,
    built: HashMap<String, Arc<FactorData>>,
}

impl FactorCache {
    pub fn new(atlas: Atlas) -> Self {
        FactorCache {
            atlas,
            built: HashMap::new(),
        }
    }

    pub fn atlas(&self) -> &Atlas {
        &self.atlas
    }

    pub fn factor(&mut self, name: &str) -> Result<Arc<FactorData>> {
        let canonical = self.atlas.entry(name)?.name.clone();
        if let Some(f) = self.built.get(&canonical) {
            return Ok(f.clone());
        }
        let f = Arc::new(FactorData::analyze(self.atlas.build(&canonical)?)?);
        self.built.insert(canonical, f.clone());
        Ok(f)
    }

    /// Inserts a factor built elsewhere, e.g. from imported maximals.
    pub fn insert(&mut self, factor: FactorData) -> Arc<FactorData> {
        let f = Arc::new(factor);
        self.built.insert(f.name().to_string(), f.clone());
        f
    }

    pub fn build(&mut self, spec: &[(String, usize)]) -> Result<ProductGroup> {
        let factors = spec
            .iter()
            .map(|(name, m)| Ok((self.factor(name)?, *m)))
            .collect::<Result<Vec<_>>>()?;
        build_product(&factors)
    }

    pub fn build_spec(&mut self, spec: &str) -> Result<ProductGroup> {
        self.build(&parse_product_spec(spec)?)
    }
}

/// Parses `A5^3`, `A5^2xPSL(2,7)`; the `x` separator is case-insensitive
/// and is only recognized outside parentheses.
pub fn parse_product_spec(spec: &str) -> Result<Vec<(String, usize)>> {
    let err = || Error::SpecSyntax(spec.to_string());
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for ch in spec.trim().chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return Err(err());
        }
        if depth == 0 && (ch == 'x' || ch == 'X') {
            parts.push(std::mem::take(&mut current));
        } else {
            current.push(ch);
        }
    }
    if depth != 0 {
        return Err(err());
    }
    parts.push(current);
    parts
        .into_iter()
        .map(|p| {
            let p = p.trim();
            let (name, mult) = match p.rsplit_once('^') {
                Some((n, m)) => (n.trim(), m.trim().parse::<usize>().map_err(|_| err())?),
                None => (p, 1),
            };
            if name.is_empty() || mult == 0 {
                return Err(err());
            }
            Ok((name.to_string(), mult))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DescriptorKind {
    /// Coordinate `coord` restricted to maximal class `class` of its factor.
    Product { coord: usize, class: usize },
    /// Coordinates `i < j` tied by an automorphism in Out-coset `coset`.
    Diagonal { i: usize, j: usize, coset: usize },
}

/// One conjugacy class of maximal subgroups of a product.
#[derive(Clone, Debug)]
pub struct MaximalDescriptor {
    pub kind: DescriptorKind,
    /// |M̃| / |G|
    pub fugacity_q: BigRational,
    /// |G : M|
    pub index_n: BigUint,
    /// Number of subgroups in the class.
    pub class_size: BigUint,
}

impl MaximalDescriptor {
    pub fn is_diagonal(&self) -> bool {
        matches!(self.kind, DescriptorKind::Diagonal { .. })
    }
}

pub fn maximal_descriptors(g: &ProductGroup) -> Vec<MaximalDescriptor> {
    let mut out = Vec::new();
    for coord in 0..g.k() {
        let f = g.factor_of(coord);
        for (class, m) in f.maximals.iter().enumerate() {
            out.push(MaximalDescriptor {
                kind: DescriptorKind::Product { coord, class },
                fugacity_q: m.fugacity_q.clone(),
                index_n: BigUint::from(m.index_n),
                class_size: BigUint::from(m.class_size()),
            });
        }
    }
    for &(i, j) in &g.iso_pairs {
        let t = &g.factor_of(i).group;
        let order = t.order();
        let q = ratio(t.classes.sum_of_squared_class_sizes(), order * order);
        for coset in 0..t.out_order() {
            out.push(MaximalDescriptor {
                kind: DescriptorKind::Diagonal { i, j, coset },
                fugacity_q: q.clone(),
                index_n: BigUint::from(order),
                class_size: BigUint::from(order),
            });
        }
    }
    out
}

/// m_n(G) by weighting each descriptor with its class size.
pub fn m_n_by_descriptors(descriptors: &[MaximalDescriptor]) -> BTreeMap<BigUint, BigUint> {
    let mut table = BTreeMap::new();
    for d in descriptors {
        *table
            .entry(d.index_n.clone())
            .or_insert_with(BigUint::default) += &d.class_size;
    }
    table
}

/// m_n(G) = Σ_{i∈Λ_n} k_i m_n(T_i) + Σ_{i∈Σ_n} C(k_i, 2) |Aut(T_i)|, where
/// Λ_n holds factors with index-n maximal subgroups and Σ_n factors of
/// order n.
pub fn m_n_by_formula(g: &ProductGroup) -> BTreeMap<BigUint, BigUint> {
    let mut ns: Vec<u64> = Vec::new();
    for (f, _) in &g.factors {
        ns.extend(f.invariants.m_n_table.keys());
        ns.push(f.group.order());
    }
    ns.sort_unstable();
    ns.dedup();
    let mut table = BTreeMap::new();
    for n in ns {
        let mut count = BigUint::default();
        for (f, k) in &g.factors {
            if let Some(&m) = f.invariants.m_n_table.get(&n) {
                count += BigUint::from(*k as u64 * m);
            }
            if f.group.order() == n {
                let pairs = (*k as u64) * (*k as u64).saturating_sub(1) / 2;
                count += BigUint::from(pairs) * BigUint::from(f.group.aut_order);
            }
        }
        if count > BigUint::default() {
            table.insert(BigUint::from(n), count);
        }
    }
    table
}

/// 𝓜(G) = max over realized n ≥ 2 of log m_n / log n.
pub fn script_m(table: &BTreeMap<BigUint, BigUint>) -> f64 {
    table
        .iter()
        .map(|(n, m)| biguint_ln(m) / biguint_ln(n))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn biguint_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        num_traits::ToPrimitive::to_f64(x).map_or(f64::NAN, f64::ln)
    } else {
        let shift = bits - 64;
        let top: BigUint = x >> shift;
        num_traits::ToPrimitive::to_f64(&top).map_or(f64::NAN, f64::ln)
            + shift as f64 * std::f64::consts::LN_2
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ProductElement {
    pub components: Vec<ElementIndex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ClassSignature {
    pub classes: Vec<ClassIndex>,
}

pub fn class_signature(g: &ProductGroup, x: &ProductElement) -> ClassSignature {
    ClassSignature {
        classes: x
            .components
            .iter()
            .enumerate()
            .map(|(c, &e)| g.factor_of(c).group.classes.class_of[e])
            .collect(),
    }
}

/// Membership of any element with signature `sig` in the union of
/// conjugates of the descriptor's class.
pub fn in_mtilde(g: &ProductGroup, sig: &ClassSignature, d: &MaximalDescriptor) -> bool {
    match d.kind {
        DescriptorKind::Product { coord, class } => {
            g.factor_of(coord).maximals[class].contains_class(sig.classes[coord])
        }
        DescriptorKind::Diagonal { i, j, coset } => {
            let action = &g.factor_of(i).group.out_class_actions[coset];
            action.apply(sig.classes[i]) == sig.classes[j]
        }
    }
}

/// Invariable generation: no descriptor's union of conjugates contains
/// every element.
pub fn invariably_generates(
    g: &ProductGroup,
    descriptors: &[MaximalDescriptor],
    xs: &[ProductElement],
) -> bool {
    let sigs: Vec<ClassSignature> = xs.iter().map(|x| class_signature(g, x)).collect();
    descriptors
        .iter()
        .all(|d| sigs.iter().any(|s| !in_mtilde(g, s, d)))
}

/// True when the pairs `(x_i, x_j)` over `xs` lie in the graph of an
/// automorphism, assuming both projections already generate the factor.
fn pair_is_diagonal(g: &ProductGroup, i: usize, j: usize, xs: &[ProductElement]) -> bool {
    let table = &g.factor_of(i).group.table;
    let a: Vec<ElementIndex> = xs.iter().map(|x| x.components[i]).collect();
    let b: Vec<ElementIndex> = xs.iter().map(|x| x.components[j]).collect();
    extend_homomorphism(table, &a, &b).is_some()
}

/// Generation: every coordinate projection generates its factor and no
/// pair of same-factor coordinates is tied by an automorphism.
pub fn generates(g: &ProductGroup, xs: &[ProductElement]) -> bool {
    for c in 0..g.k() {
        let gens: Vec<ElementIndex> = xs.iter().map(|x| x.components[c]).collect();
        if !g.factor_of(c).group.table.generates(&gens) {
            return false;
        }
    }
    g.iso_pairs.iter().all(|&(i, j)| {
        let classes = &g.factor_of(i).group.classes;
        // cheap necessary condition: element orders agree pairwise
        let orders_agree = xs.iter().all(|x| {
            classes.element_orders[classes.class_of[x.components[i]]]
                == classes.element_orders[classes.class_of[x.components[j]]]
        });
        !(orders_agree && pair_is_diagonal(g, i, j, xs))
    })
}

pub fn uniform_product_element(g: &ProductGroup, stream: &mut RandomStream) -> ProductElement {
    ProductElement {
        components: (0..g.k())
            .map(|c| stream.below(g.factor_of(c).group.table.order()))
            .collect(),
    }
}

/// Incremental invariable-generation test for sequential draws: keeps the
/// descriptors whose union of conjugates still contains every draw.
pub struct InvariableTracker<'a> {
    g: &'a ProductGroup,
    descriptors: &'a [MaximalDescriptor],
    alive: Vec<usize>,
}

impl<'a> InvariableTracker<'a> {
    pub fn new(g: &'a ProductGroup, descriptors: &'a [MaximalDescriptor]) -> Self {
        InvariableTracker {
            g,
            descriptors,
            alive: (0..descriptors.len()).collect(),
        }
    }

    /// Adds an element; returns true once the draws invariably generate.
    pub fn push(&mut self, x: &ProductElement) -> bool {
        let sig = class_signature(self.g, x);
        let (g, ds) = (self.g, self.descriptors);
        self.alive.retain(|&d| in_mtilde(g, &sig, &ds[d]));
        self.alive.is_empty()
    }
}

/// Incremental generation test for sequential draws.
pub struct GenerationTracker<'a> {
    g: &'a ProductGroup,
    draws: Vec<ProductElement>,
    full: Vec<bool>,
    /// Per iso pair, bitmask of Out-cosets whose class action is consistent
    /// with every draw so far.
    pair_cosets: Vec<((usize, usize), u64)>,
}

impl<'a> GenerationTracker<'a> {
    pub fn new(g: &'a ProductGroup) -> Self {
        let pair_cosets = g
            .iso_pairs
            .iter()
            .map(|&(i, j)| {
                let out = g.factor_of(i).group.out_order();
                let mask = if out >= 64 {
                    u64::MAX
                } else {
                    (1u64 << out) - 1
                };
                ((i, j), mask)
            })
            .collect();
        GenerationTracker {
            g,
            draws: Vec::new(),
            full: vec![false; g.k()],
            pair_cosets,
        }
    }

    /// Adds an element; returns true once the draws generate.
    pub fn push(&mut self, x: ProductElement) -> bool {
        let g = self.g;
        let sig = class_signature(g, &x);
        self.draws.push(x);
        for ((i, j), mask) in &mut self.pair_cosets {
            let actions = &g.factor_of(*i).group.out_class_actions;
            for (c, a) in actions.iter().enumerate().take(64) {
                if a.apply(sig.classes[*i]) != sig.classes[*j] {
                    *mask &= !(1u64 << c);
                }
            }
        }
        self.pair_cosets.retain(|(_, mask)| *mask != 0);
        for c in 0..g.k() {
            if !self.full[c] {
                let gens: Vec<ElementIndex> = self.draws.iter().map(|x| x.components[c]).collect();
                self.full[c] = g.factor_of(c).group.table.generates(&gens);
            }
        }
        if !self.full.iter().all(|&f| f) {
            return false;
        }
        let draws = &self.draws;
        self.pair_cosets
            .retain(|&((i, j), _)| pair_is_diagonal(g, i, j, draws));
        self.pair_cosets.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;

    fn factor(name: &str) -> Arc<FactorData> {
        Arc::new(FactorData::analyze(Atlas::bundled().build(name).unwrap()).unwrap())
    }

    fn elem(f: &FactorData, s: &str) -> ElementIndex {
        let t = &f.group.table;
        t.index_of(&Permutation::parse_cycles(s, t.degree()).unwrap())
            .unwrap()
    }

    #[test]
    fn spec_grammar() {
        assert_eq!(parse_product_spec("A5^3").unwrap(), vec![("A5".into(), 3)]);
        assert_eq!(
            parse_product_spec("A5^2xPSL(2,7)").unwrap(),
            vec![("A5".into(), 2), ("PSL(2,7)".into(), 1)]
        );
        assert_eq!(parse_product_spec("a5 X a6").unwrap().len(), 2);
        assert!(parse_product_spec("A5^0").is_err());
        assert!(parse_product_spec("PSL(2,7").is_err());
        assert!(parse_product_spec("A5x").is_err());
    }

    #[test]
    fn cache_resolves_names() {
        let mut cache = FactorCache::new(Atlas::bundled());
        let g = cache.build_spec("a5^2xA5").unwrap();
        assert_eq!(g.factors.len(), 1);
        assert_eq!(g.k(), 3);
        assert!(matches!(
            cache.build_spec("M11"),
            Err(Error::UnknownGroup(_))
        ));
        assert!(matches!(cache.build_spec("A5^"), Err(Error::SpecSyntax(_))));
    }

    #[test]
    fn build_product_examples() {
        let a5 = factor("A5");
        let g = build_product(&[(a5.clone(), 3)]).unwrap();
        assert_eq!(g.k(), 3);
        assert_eq!(g.order, BigUint::from(216_000u32));
        assert_eq!(g.iso_pairs.len(), 3);
        assert_eq!(g.spec_string(), "A5^3");

        let g = build_product(&[(a5.clone(), 1), (factor("PSL(2,7)"), 1)]).unwrap();
        assert_eq!(g.k(), 2);
        assert!(g.iso_pairs.is_empty());

        let g = build_product(&[(a5.clone(), 2), (factor("A6"), 1)]).unwrap();
        assert_eq!(g.iso_pairs, vec![(0, 1)]);
    }

    #[test]
    fn a5_squared_descriptors() {
        let a5 = factor("A5");
        let g = build_product(&[(a5, 2)]).unwrap();
        let ds = maximal_descriptors(&g);
        assert_eq!(ds.iter().filter(|d| !d.is_diagonal()).count(), 6);
        let diag: Vec<_> = ds.iter().filter(|d| d.is_diagonal()).collect();
        assert_eq!(diag.len(), 2);
        for d in diag {
            assert_eq!(d.fugacity_q, ratio(914, 3600));
        }
    }

    #[test]
    fn a5_cubed_m_n_table() {
        let g = build_product(&[(factor("A5"), 3)]).unwrap();
        let want: BTreeMap<BigUint, BigUint> = [(5u32, 15u32), (6, 18), (10, 30), (60, 360)]
            .into_iter()
            .map(|(n, m)| (BigUint::from(n), BigUint::from(m)))
            .collect();
        assert_eq!(m_n_by_formula(&g), want);
        assert_eq!(m_n_by_descriptors(&maximal_descriptors(&g)), want);
    }

    #[test]
    fn mixed_m_n_routes_agree() {
        let a5 = factor("A5");
        let g = build_product(&[(a5.clone(), 1), (factor("A6"), 1)]).unwrap();
        let ds = maximal_descriptors(&g);
        assert!(ds.iter().all(|d| !d.is_diagonal()));
        assert_eq!(m_n_by_formula(&g), m_n_by_descriptors(&ds));
        let g = build_product(&[(a5, 1), (factor("PSL(2,7)"), 1)]).unwrap();
        assert_eq!(
            maximal_descriptors(&g)
                .iter()
                .filter(|d| d.is_diagonal())
                .count(),
            0
        );
    }

    #[test]
    fn signatures_and_membership() {
        let a5 = factor("A5");
        let g = build_product(&[(a5.clone(), 2)]).unwrap();
        let ds = maximal_descriptors(&g);
        let id = ProductElement {
            components: vec![0, 0],
        };
        let sig = class_signature(&g, &id);
        assert_eq!(sig.classes, vec![0, 0]);
        assert!(ds.iter().all(|d| in_mtilde(&g, &sig, d)));

        let five_a = elem(&a5, "(0 1 2 3 4)");
        let three = elem(&a5, "(0 1 2)");
        let cls = &a5.group.classes;
        let outer = &a5.group.out_class_actions[1];
        let five_b = (0..60)
            .find(|&x| cls.class_of[x] == outer.apply(cls.class_of[five_a]))
            .unwrap();
        let diag_id = ds
            .iter()
            .find(|d| {
                d.kind
                    == DescriptorKind::Diagonal {
                        i: 0,
                        j: 1,
                        coset: 0,
                    }
            })
            .unwrap();
        let diag_out = ds
            .iter()
            .find(|d| {
                d.kind
                    == DescriptorKind::Diagonal {
                        i: 0,
                        j: 1,
                        coset: 1,
                    }
            })
            .unwrap();
        let x = ProductElement {
            components: vec![five_a, three],
        };
        assert!(!in_mtilde(&g, &class_signature(&g, &x), diag_id));
        let y = ProductElement {
            components: vec![five_a, five_b],
        };
        assert!(in_mtilde(&g, &class_signature(&g, &y), diag_out));
        assert!(!in_mtilde(&g, &class_signature(&g, &y), diag_id));

        // conjugate tuples share a signature
        let c = elem(&a5, "(0 2 4)");
        let t = &a5.group.table;
        let z = ProductElement {
            components: vec![t.conj(five_a, c), t.conj(three, 7)],
        };
        assert_eq!(class_signature(&g, &z), class_signature(&g, &x));
    }

    #[test]
    fn a5_invariable_generation_examples() {
        let a5 = factor("A5");
        let g = build_product(&[(a5.clone(), 1)]).unwrap();
        let ds = maximal_descriptors(&g);
        let e = |s: &str| ProductElement {
            components: vec![elem(&a5, s)],
        };
        assert!(!invariably_generates(&g, &ds, &[e("()")]));
        assert!(invariably_generates(
            &g,
            &ds,
            &[e("(0 1 2 3 4)"), e("(0 1 2)")]
        ));
        assert!(!invariably_generates(
            &g,
            &ds,
            &[e("(0 1 2 3 4)"), e("(0 1)(2 3)")]
        ));
    }

    /// Oracle: {x, y} invariably generates A5 iff every pair of conjugates
    /// generates, checked by closure over all conjugators.
    #[test]
    fn invariable_generation_matches_conjugate_closure_oracle() {
        let a5 = factor("A5");
        let g = build_product(&[(a5.clone(), 1)]).unwrap();
        let ds = maximal_descriptors(&g);
        let t = &a5.group.table;
        let cls = &a5.group.classes;
        for &x in &cls.class_reps {
            let single = ProductElement {
                components: vec![x],
            };
            let oracle1 = (0..60).all(|u| t.generates(&[t.conj(x, u)]));
            assert_eq!(
                invariably_generates(&g, &ds, std::slice::from_ref(&single)),
                oracle1
            );
            for &y in &cls.class_reps {
                let oracle = (0..60).all(|v| t.generates(&[x, t.conj(y, v)]));
                let pair = [
                    single.clone(),
                    ProductElement {
                        components: vec![y],
                    },
                ];
                assert_eq!(invariably_generates(&g, &ds, &pair), oracle, "{x} {y}");
            }
        }
    }

    #[test]
    fn generation_examples() {
        let a5 = factor("A5");
        let g = build_product(&[(a5.clone(), 2)]).unwrap();
        let a = elem(&a5, "(0 1 2 3 4)");
        let b = elem(&a5, "(0 1 2)");
        let t = &a5.group.table;
        let pe = |x, y| ProductElement {
            components: vec![x, y],
        };
        assert!(!generates(&g, &[pe(a, a), pe(b, b)]));
        let c = elem(&a5, "(1 2 3)");
        assert!(generates(&g, &[pe(a, a), pe(b, t.conj(b, c))]));
        assert!(!generates(&g, &[pe(a, a), pe(a, b)]));
    }

    /// Oracle: materialize A5² (3600 elements) and compare closure orders.
    #[test]
    fn generation_matches_closure_oracle_on_a5_squared() {
        let a5 = factor("A5");
        let g = build_product(&[(a5.clone(), 2)]).unwrap();
        let t = &a5.group.table;
        let mut stream = RandomStream::new(11);
        for trial in 0..200 {
            let n = 1 + trial % 3;
            let xs: Vec<ProductElement> = (0..n)
                .map(|_| uniform_product_element(&g, &mut stream))
                .collect();
            let mut seen = std::collections::HashSet::from([(0usize, 0usize)]);
            let mut queue = vec![(0usize, 0usize)];
            while let Some((u, v)) = queue.pop() {
                for x in &xs {
                    let w = (t.mul(u, x.components[0]), t.mul(v, x.components[1]));
                    if seen.insert(w) {
                        queue.push(w);
                    }
                }
            }
            assert_eq!(generates(&g, &xs), seen.len() == 3600, "{xs:?}");
        }
    }

    #[test]
    fn invariable_implies_generation() {
        let a5 = factor("A5");
        let g = build_product(&[(a5, 2)]).unwrap();
        let ds = maximal_descriptors(&g);
        let mut stream = RandomStream::new(5);
        for _ in 0..300 {
            let xs: Vec<_> = (0..3)
                .map(|_| uniform_product_element(&g, &mut stream))
                .collect();
            if invariably_generates(&g, &ds, &xs) {
                assert!(generates(&g, &xs));
            }
        }
    }

    #[test]
    fn trackers_agree_with_batch_predicates() {
        let a5 = factor("A5");
        let g = build_product(&[(a5, 3)]).unwrap();
        let ds = maximal_descriptors(&g);
        let mut stream = RandomStream::new(21);
        for _ in 0..100 {
            let mut inv = InvariableTracker::new(&g, &ds);
            let mut gen = GenerationTracker::new(&g);
            let mut xs = Vec::new();
            for _ in 0..8 {
                let x = uniform_product_element(&g, &mut stream);
                xs.push(x.clone());
                assert_eq!(inv.push(&x), invariably_generates(&g, &ds, &xs));
                assert_eq!(gen.push(x), generates(&g, &xs));
            }
        }
    }

    #[test]
    fn diagonal_fugacity_bounds() {
        for name in ["A5", "A6", "PSL(2,7)"] {
            let f = factor(name);
            let g = build_product(&[(f.clone(), 2)]).unwrap();
            let alpha = &f.invariants.alpha;
            let four = ratio(4, 1);
            let bound = std::cmp::min(four, alpha * alpha);
            for d in maximal_descriptors(&g).iter().filter(|d| d.is_diagonal()) {
                let inv_q = BigRational::one() / &d.fugacity_q;
                assert!(inv_q > ratio(2, 1));
                assert!(inv_q >= bound);
            }
        }
    }

    #[test]
    fn componentwise_sampling_is_uniform_and_independent() {
        let a5 = factor("A5");
        let g = build_product(&[(a5.clone(), 2)]).unwrap();
        let cls = &a5.group.classes;
        let mut stream = RandomStream::new(3);
        let draws = 40_000;
        let nc = cls.num_classes();
        let mut joint = vec![0u64; nc * nc];
        for _ in 0..draws {
            let s = class_signature(&g, &uniform_product_element(&g, &mut stream));
            joint[s.classes[0] * nc + s.classes[1]] += 1;
        }
        for a in 0..nc {
            for b in 0..nc {
                let p = (cls.class_sizes[a] * cls.class_sizes[b]) as f64 / 3600.0;
                let mean = draws as f64 * p;
                let sd = (draws as f64 * p * (1.0 - p)).sqrt();
                assert!((joint[a * nc + b] as f64 - mean).abs() <= 4.0 * sd + 1.0);
            }
        }
    }
}
