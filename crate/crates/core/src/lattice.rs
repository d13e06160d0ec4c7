//! Subgroup lattices of small simple groups and the invariants read off
//! their maximal subgroups.
//!
//! Subgroups are found by cyclic extension: starting from the trivial
//! group, every conjugacy-class representative `H` is extended by each
//! cyclic subgroup not contained in it, and new subgroups are closed under
//! conjugation. Every subgroup `K > 1` contains a maximal subgroup `H'` of
//! itself and equals `⟨H', z⟩` for any `z ∈ K \ H'`, so extending class
//! representatives reaches every class.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use num_rational::BigRational;
use num_traits::One;
use serde_json::Value;

use crate::atlas::SimpleGroupTable;
use crate::bitset::ElementSet;
use crate::error::{Error, Result};
use crate::frac::ratio;
use crate::perm::{ClassData, ElementIndex, ElementTable};

pub const DEFAULT_LATTICE_CAP: usize = 3000;

/// Boston–Shalev check constant α₀ = 0.016/0.984 (derangement proportion
/// at least 0.016).
pub const BOSTON_SHALEV_DELTA: f64 = 0.016;

#[derive(Clone, Debug)]
pub struct SubgroupRecord {
    pub members: ElementSet,
    pub order: u64,
    pub class_id: usize,
    pub is_maximal: bool,
    pub mobius: i64,
    pub class_size: u64,
}

#[derive(Clone, Debug)]
pub struct SubgroupClass {
    /// Index into [`SubgroupLattice::records`].
    pub rep: usize,
    pub generators: Vec<ElementIndex>,
    pub order: u64,
    pub size: u64,
    pub mobius: i64,
    pub is_maximal: bool,
}

#[derive(Clone, Debug)]
pub struct SubgroupLattice {
    pub group_order: u64,
    /// Every subgroup, grouped by conjugacy class.
    pub records: Vec<SubgroupRecord>,
    pub classes: Vec<SubgroupClass>,
}

impl SubgroupLattice {
    pub fn rep(&self, class_id: usize) -> &SubgroupRecord {
        &self.records[self.classes[class_id].rep]
    }

    pub fn maximal_class_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_maximal)
            .map(|(i, _)| i)
    }
}

/// Conjugates of `h` under the group, found as an orbit under conjugation
/// by the table generators.
fn conjugacy_orbit(table: &ElementTable, h: &ElementSet) -> Vec<ElementSet> {
    let mut seen: HashMap<ElementSet, ()> = HashMap::from([(h.clone(), ())]);
    let mut orbit = vec![h.clone()];
    let mut queue = VecDeque::from([h.clone()]);
    while let Some(k) = queue.pop_front() {
        for &s in table.generators() {
            let conj = ElementSet::from_indices(table.order(), k.iter().map(|x| table.conj(x, s)));
            if !seen.contains_key(&conj) {
                seen.insert(conj.clone(), ());
                orbit.push(conj.clone());
                queue.push_back(conj);
            }
        }
    }
    orbit
}

pub fn enumerate_subgroups(group: &SimpleGroupTable) -> Result<SubgroupLattice> {
    enumerate_subgroups_with_cap(&group.table, DEFAULT_LATTICE_CAP)
}

pub fn enumerate_subgroups_with_cap(table: &ElementTable, cap: usize) -> Result<SubgroupLattice> {
    let n = table.order();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "subgroup lattice group order",
            cap,
        });
    }

    // One generator per distinct cyclic subgroup.
    let mut cyclic_seen: HashSet<ElementSet> = HashSet::new();
    let mut cyclic_gens = Vec::new();
    for x in 1..n {
        let c = table.subgroup(&[x]);
        if cyclic_seen.insert(c) {
            cyclic_gens.push(x);
        }
    }

    struct Found {
        gens: Vec<ElementIndex>,
        conjugates: Vec<ElementSet>,
    }
    let mut index: HashMap<ElementSet, usize> = HashMap::new();
    let mut found: Vec<Found> = Vec::new();
    let mut add = |set: ElementSet, gens: Vec<ElementIndex>, found: &mut Vec<Found>| {
        if index.contains_key(&set) {
            return;
        }
        let conjugates = conjugacy_orbit(table, &set);
        for c in &conjugates {
            index.insert(c.clone(), found.len());
        }
        found.push(Found { gens, conjugates });
    };

    add(ElementSet::from_indices(n, [0]), Vec::new(), &mut found);
    let mut head = 0;
    while head < found.len() {
        let rep = found[head].conjugates[0].clone();
        let base_gens = found[head].gens.clone();
        if rep.len() < n {
            for &z in &cyclic_gens {
                if rep.contains(z) {
                    continue;
                }
                let mut gens = base_gens.clone();
                gens.push(z);
                let k = table.subgroup_from(&rep, &gens);
                add(k, gens, &mut found);
            }
        }
        head += 1;
    }

    // Flatten into records, classes in order of discovery.
    let mut records = Vec::new();
    let mut classes = Vec::new();
    for (cid, f) in found.iter().enumerate() {
        let order = f.conjugates[0].len() as u64;
        let size = f.conjugates.len() as u64;
        classes.push(SubgroupClass {
            rep: records.len(),
            generators: f.gens.clone(),
            order,
            size,
            mobius: 0,
            is_maximal: false,
        });
        for c in &f.conjugates {
            records.push(SubgroupRecord {
                members: c.clone(),
                order,
                class_id: cid,
                is_maximal: false,
                mobius: 0,
                class_size: size,
            });
        }
    }

    // Möbius values by downward recursion, one per class.
    let mut by_order: Vec<usize> = (0..classes.len()).collect();
    by_order.sort_by(|&a, &b| classes[b].order.cmp(&classes[a].order));
    for &cid in &by_order {
        let h = &records[classes[cid].rep];
        if h.order == n as u64 {
            classes[cid].mobius = 1;
            continue;
        }
        let mut sum = 0i64;
        let mut proper_overgroups = 0usize;
        for k in &records {
            if k.order > h.order && k.order % h.order == 0 && h.members.is_subset(&k.members) {
                sum += classes[k.class_id].mobius;
                if k.order < n as u64 {
                    proper_overgroups += 1;
                }
            }
        }
        classes[cid].mobius = -sum;
        classes[cid].is_maximal = proper_overgroups == 0;
    }
    for r in &mut records {
        r.mobius = classes[r.class_id].mobius;
        r.is_maximal = classes[r.class_id].is_maximal;
    }

    Ok(SubgroupLattice {
        group_order: n as u64,
        records,
        classes,
    })
}

#[derive(Clone, Debug)]
pub struct MaximalClassData {
    pub rep: SubgroupRecord,
    pub generators: Vec<ElementIndex>,
    pub index_n: u64,
    /// `mtilde_class_mask[c]` is true iff class `c` lies in M̃.
    pub mtilde_class_mask: Vec<bool>,
    pub mtilde_size: u64,
    /// |M̃| / |G|
    pub fugacity_q: BigRational,
    /// Imported rather than enumerated; maximality was not re-proved.
    pub trusted: bool,
}

impl MaximalClassData {
    pub fn order(&self) -> u64 {
        self.rep.order
    }

    pub fn class_size(&self) -> u64 {
        self.rep.class_size
    }

    pub fn contains_class(&self, c: usize) -> bool {
        self.mtilde_class_mask[c]
    }
}

/// ∪_g H^g as the set of classes it covers and its size. An element lies
/// in some conjugate of `H` iff its class meets `H`.
pub fn union_of_conjugates(classes: &ClassData, subgroup: &ElementSet) -> (Vec<bool>, u64) {
    let mut mask = vec![false; classes.num_classes()];
    for x in subgroup.iter() {
        mask[classes.class_of[x]] = true;
    }
    let size = mask
        .iter()
        .zip(&classes.class_sizes)
        .filter(|(m, _)| **m)
        .map(|(_, s)| s)
        .sum();
    (mask, size)
}

fn maximal_from_record(
    group: &SimpleGroupTable,
    rep: SubgroupRecord,
    generators: Vec<ElementIndex>,
    trusted: bool,
) -> MaximalClassData {
    let order = group.order();
    let (mask, size) = union_of_conjugates(&group.classes, &rep.members);
    MaximalClassData {
        index_n: order / rep.order,
        mtilde_class_mask: mask,
        mtilde_size: size,
        fugacity_q: ratio(size, order),
        rep,
        generators,
        trusted,
    }
}

pub fn maximal_classes(
    lattice: &SubgroupLattice,
    group: &SimpleGroupTable,
) -> Vec<MaximalClassData> {
    lattice
        .maximal_class_ids()
        .map(|cid| {
            maximal_from_record(
                group,
                lattice.rep(cid).clone(),
                lattice.classes[cid].generators.clone(),
                false,
            )
        })
        .collect()
}

/// Reads maximal-class data in the schema emitted by `lattice --emit json`.
/// Only the `generators` of each class are used; every other field is
/// recomputed. Imported classes are flagged as trusted.
pub fn import_maximals(group: &SimpleGroupTable, doc: &Value) -> Result<Vec<MaximalClassData>> {
    let bad = |m: String| Error::InvalidImport(m);
    let list = doc
        .get("maximal_classes")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing `maximal_classes` array".into()))?;
    let table = &group.table;
    let mut out = Vec::new();
    for (i, item) in list.iter().enumerate() {
        let gens = item
            .get("generators")
            .and_then(Value::as_array)
            .ok_or_else(|| bad(format!("maximal_classes[{i}]: missing generators")))?
            .iter()
            .map(|g| {
                let s = g
                    .as_str()
                    .ok_or_else(|| bad(format!("maximal_classes[{i}]: generator not a string")))?;
                let p = crate::perm::Permutation::parse_cycles(s, table.degree())?;
                table
                    .index_of(&p)
                    .ok_or_else(|| bad(format!("maximal_classes[{i}]: {s} not in the group")))
            })
            .collect::<Result<Vec<_>>>()?;
        let members = table.subgroup(&gens);
        let order = members.len() as u64;
        if order == group.order() {
            return Err(bad(format!(
                "maximal_classes[{i}] generates the whole group"
            )));
        }
        if let Some(declared) = item.get("order").and_then(Value::as_u64) {
            if declared != order {
                return Err(bad(format!(
                    "maximal_classes[{i}]: declared order {declared}, closure has {order}"
                )));
            }
        }
        let class_size = conjugacy_orbit(table, &members).len() as u64;
        let rep = SubgroupRecord {
            members,
            order,
            class_id: i,
            is_maximal: true,
            mobius: -1,
            class_size,
        };
        out.push(maximal_from_record(group, rep, gens, true));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SimpleInvariants {
    /// Minimal index of a proper subgroup.
    pub l: u64,
    /// Minimal derangement proportion over primitive actions.
    pub delta: BigRational,
    /// (1 − δ)⁻¹ = min |T| / |M̃|.
    pub alpha: BigRational,
    /// Indices of the maximal classes attaining δ.
    pub delta_attaining: Vec<usize>,
    /// n ↦ number of maximal subgroups of index n.
    pub m_n_table: BTreeMap<u64, u64>,
    /// max over realized n ≥ 2 of log m_n / log n.
    pub script_m: f64,
    /// n ↦ number of maximal classes with ⌊|T| / |M̃|⌋ = n.
    pub mntilde_table: BTreeMap<u64, u64>,
}

pub fn simple_invariants(
    group: &SimpleGroupTable,
    maximals: &[MaximalClassData],
) -> SimpleInvariants {
    assert!(
        !maximals.is_empty(),
        "a nontrivial group has maximal subgroups"
    );
    let order = group.order();
    let l = maximals.iter().map(|m| m.index_n).min().unwrap_or(1);
    let max_q = maximals
        .iter()
        .map(|m| m.fugacity_q.clone())
        .max()
        .unwrap_or_default();
    let delta_attaining = maximals
        .iter()
        .enumerate()
        .filter(|(_, m)| m.fugacity_q == max_q)
        .map(|(i, _)| i)
        .collect();
    let delta = BigRational::one() - &max_q;
    let alpha = BigRational::one() / &max_q;

    let mut m_n_table = BTreeMap::new();
    let mut mntilde_table = BTreeMap::new();
    for m in maximals {
        *m_n_table.entry(m.index_n).or_insert(0) += m.class_size();
        *mntilde_table.entry(order / m.mtilde_size).or_insert(0) += 1;
    }
    let script_m = m_n_table
        .iter()
        .filter(|(&n, _)| n >= 2)
        .map(|(&n, &m)| (m as f64).ln() / (n as f64).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    SimpleInvariants {
        l,
        delta,
        alpha,
        delta_attaining,
        m_n_table,
        script_m,
        mntilde_table,
    }
}

/// A simple group together with its maximal classes and invariants.
#[derive(Debug)]
pub struct FactorData {
    pub group: SimpleGroupTable,
    pub lattice: Option<SubgroupLattice>,
    pub maximals: Vec<MaximalClassData>,
    pub invariants: SimpleInvariants,
}

impl FactorData {
    pub fn analyze(group: SimpleGroupTable) -> Result<Self> {
        let lattice = enumerate_subgroups(&group)?;
        let maximals = maximal_classes(&lattice, &group);
        let invariants = simple_invariants(&group, &maximals);
        Ok(FactorData {
            group,
            lattice: Some(lattice),
            maximals,
            invariants,
        })
    }

    pub fn from_import(group: SimpleGroupTable, doc: &Value) -> Result<Self> {
        let maximals = import_maximals(&group, doc)?;
        if maximals.is_empty() {
            return Err(Error::InvalidImport("no maximal classes".into()));
        }
        let invariants = simple_invariants(&group, &maximals);
        Ok(FactorData {
            group,
            lattice: None,
            maximals,
            invariants,
        })
    }

    pub fn name(&self) -> &str {
        self.group.name()
    }
}
