//! Shipped permutation data for small nonabelian simple groups, and the
//! validated [`SimpleGroupTable`] built from it.
//!
//! Automorphisms are stored as generator-image lists. A stored list is
//! accepted only if the generator map extends to a bijective homomorphism,
//! which is checked by breadth-first extension over the element table.

use std::collections::{hash_map::Entry, HashMap, VecDeque};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::perm::{
    closure, conjugacy_classes, ClassData, ClassIndex, ElementIndex, ElementTable, Permutation,
};

/// Atlas files compiled into the binary.
pub const BUNDLED: &[(&str, &str)] = &[
    ("a5.json", include_str!("../atlas/a5.json")),
    ("a6.json", include_str!("../atlas/a6.json")),
    ("a7.json", include_str!("../atlas/a7.json")),
    ("psl2_7.json", include_str!("../atlas/psl2_7.json")),
    ("psl2_8.json", include_str!("../atlas/psl2_8.json")),
    ("psl2_11.json", include_str!("../atlas/psl2_11.json")),
];

/// Environment variable overriding the bundled atlas directory.
pub const ATLAS_DIR_VAR: &str = "LAB_ATLAS_DIR";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AtlasEntry {
    pub name: String,
    pub degree: usize,
    pub generators: Vec<Permutation>,
    pub expected_order: Option<u64>,
    pub aut_order: Option<u64>,
    /// Each entry lists the images of `generators` under one automorphism.
    pub aut_generators: Vec<Vec<Permutation>>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn parse_perm(v: &Value, degree: usize, path: &str) -> Result<Permutation> {
    let p = match v {
        Value::String(s) => Permutation::parse_cycles(s, degree),
        Value::Array(items) => {
            let images = items
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    x.as_u64()
                        .and_then(|x| u32::try_from(x).ok())
                        .ok_or_else(|| schema(format!("{path}[{i}]"), "expected a point index"))
                })
                .collect::<Result<Vec<_>>>()?;
            Permutation::from_images(images)
        }
        _ => return Err(schema(path, "expected a cycle string or image array")),
    };
    let p = p.map_err(|e| schema(path, e.to_string()))?;
    if p.degree() != degree {
        return Err(schema(path, format!("degree {} != {degree}", p.degree())));
    }
    Ok(p)
}

fn opt_u64(doc: &Value, key: &str) -> Result<Option<u64>> {
    match doc.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| schema(key, "expected a non-negative integer")),
    }
}

/// Parses an atlas document. Only the syntax is checked here.
pub fn load_entry(doc: &Value) -> Result<AtlasEntry> {
    let name = doc
        .get("name")
        .ok_or_else(|| schema("name", "missing"))?
        .as_str()
        .ok_or_else(|| schema("name", "expected a string"))?
        .to_string();
    let degree =
        doc.get("degree")
            .ok_or_else(|| schema("degree", "missing"))?
            .as_u64()
            .ok_or_else(|| schema("degree", "expected a non-negative integer"))? as usize;
    let generators = doc
        .get("generators")
        .ok_or_else(|| schema("generators", "missing"))?
        .as_array()
        .ok_or_else(|| schema("generators", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, g)| parse_perm(g, degree, &format!("generators[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let aut_generators = match doc.get("aut_generators") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(auts)) => auts
            .iter()
            .enumerate()
            .map(|(a, imgs)| {
                let path = format!("aut_generators[{a}]");
                imgs.as_array()
                    .ok_or_else(|| schema(&path, "expected an array of images"))?
                    .iter()
                    .enumerate()
                    .map(|(i, g)| parse_perm(g, degree, &format!("{path}[{i}]")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?,
        Some(_) => return Err(schema("aut_generators", "expected an array")),
    };
    Ok(AtlasEntry {
        name,
        degree,
        generators,
        expected_order: opt_u64(doc, "expected_order")?,
        aut_order: opt_u64(doc, "aut_order")?,
        aut_generators,
    })
}

pub fn load_entry_str(text: &str) -> Result<AtlasEntry> {
    load_entry(&serde_json::from_str(text)?)
}

/// Permutation of class indices induced by one coset of Inn(T) in Aut(T).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassAction {
    pub perm_of_classes: Vec<ClassIndex>,
    pub coset_label: String,
}

impl ClassAction {
    pub fn is_identity(&self) -> bool {
        self.perm_of_classes
            .iter()
            .enumerate()
            .all(|(i, &c)| i == c)
    }

    #[inline]
    pub fn apply(&self, c: ClassIndex) -> ClassIndex {
        self.perm_of_classes[c]
    }
}

/// A validated nonabelian simple group with its classes and the action of
/// Out(T) on them.
#[derive(Debug)]
pub struct SimpleGroupTable {
    pub entry: AtlasEntry,
    pub table: ElementTable,
    pub classes: ClassData,
    /// One per coset of Inn(T) in Aut(T); index 0 is the identity coset.
    pub out_class_actions: Vec<ClassAction>,
    pub aut_order: u64,
}

impl SimpleGroupTable {
    pub fn name(&self) -> &str {
        &self.entry.name
    }

    pub fn order(&self) -> u64 {
        self.table.order() as u64
    }

    pub fn out_order(&self) -> usize {
        self.out_class_actions.len()
    }
}

/// Extends a generator map to a full element map, or returns `None` when
/// the map is not a well-defined homomorphism on ⟨generators⟩.
pub(crate) fn extend_homomorphism(
    table: &ElementTable,
    gens: &[ElementIndex],
    images: &[ElementIndex],
) -> Option<Vec<ElementIndex>> {
    let mut map = vec![usize::MAX; table.order()];
    map[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (&s, &t) in gens.iter().zip(images) {
            let y = table.mul(x, s);
            let img = table.mul(map[x], t);
            if map[y] == usize::MAX {
                map[y] = img;
                queue.push_back(y);
            } else if map[y] != img {
                return None;
            }
        }
    }
    Some(map)
}

fn automorphism_map(
    table: &ElementTable,
    images: &[Permutation],
    index: usize,
) -> Result<Vec<ElementIndex>> {
    if images.len() != table.generators().len() {
        return Err(Error::NotAnAutomorphism(index));
    }
    let imgs = images
        .iter()
        .map(|p| table.index_of(p).ok_or(Error::NotAnAutomorphism(index)))
        .collect::<Result<Vec<_>>>()?;
    let map = extend_homomorphism(table, table.generators(), &imgs)
        .ok_or(Error::NotAnAutomorphism(index))?;
    let mut hit = vec![false; table.order()];
    for &y in &map {
        if y == usize::MAX || std::mem::replace(&mut hit[y], true) {
            return Err(Error::NotAnAutomorphism(index));
        }
    }
    Ok(map)
}

fn class_action_of(classes: &ClassData, map: &[ElementIndex], label: String) -> ClassAction {
    ClassAction {
        perm_of_classes: classes
            .class_reps
            .iter()
            .map(|&r| classes.class_of[map[r]])
            .collect(),
        coset_label: label,
    }
}

/// Canonical key for the coset Inn(T)·φ: the lexicographically smallest
/// generator-image tuple over all x ↦ g⁻¹ φ(x) g.
fn coset_key(table: &ElementTable, map: &[ElementIndex]) -> Vec<ElementIndex> {
    let gens = table.generators();
    (0..table.order())
        .map(|g| {
            gens.iter()
                .map(|&s| table.conj(map[s], g))
                .collect::<Vec<_>>()
        })
        .min()
        .unwrap_or_default()
}

/// True iff no proper nontrivial normal subgroup exists: the normal closure
/// of every nonidentity class is the whole group.
pub fn simplicity_check(table: &ElementTable, classes: &ClassData) -> bool {
    (0..classes.num_classes())
        .filter(|&c| c != classes.class_of[0])
        .all(|c| {
            let members: Vec<ElementIndex> = (0..table.order())
                .filter(|&x| classes.class_of[x] == c)
                .collect();
            table.generates(&members)
        })
}

/// Builds and validates the group of an atlas entry.
pub fn build_group(entry: AtlasEntry) -> Result<SimpleGroupTable> {
    let table = closure(&entry.generators, entry.degree)?;
    let order = table.order() as u64;
    if let Some(expected) = entry.expected_order {
        if expected != order {
            return Err(Error::OrderMismatch {
                expected,
                found: order,
            });
        }
    }
    let classes = conjugacy_classes(&table);
    if order == 1 || !simplicity_check(&table, &classes) {
        return Err(Error::NotSimple(entry.name.clone()));
    }
    if classes.num_classes() as u64 == order {
        return Err(Error::Abelian(entry.name.clone()));
    }

    let aut_maps = entry
        .aut_generators
        .iter()
        .enumerate()
        .map(|(i, imgs)| automorphism_map(&table, imgs, i))
        .collect::<Result<Vec<_>>>()?;

    // Enumerate Out(T) = ⟨stored automorphisms⟩·Inn(T) / Inn(T).
    let identity: Vec<ElementIndex> = (0..table.order()).collect();
    let mut seen = HashMap::from([(coset_key(&table, &identity), 0usize)]);
    let mut cosets = vec![(identity, String::from("1"))];
    let mut head = 0;
    while head < cosets.len() {
        for (a, alpha) in aut_maps.iter().enumerate() {
            let composed: Vec<ElementIndex> = cosets[head].0.iter().map(|&x| alpha[x]).collect();
            let key = coset_key(&table, &composed);
            if let Entry::Vacant(slot) = seen.entry(key) {
                let label = if head == 0 {
                    format!("a{a}")
                } else {
                    format!("{}*a{a}", cosets[head].1)
                };
                slot.insert(cosets.len());
                cosets.push((composed, label));
            }
        }
        head += 1;
    }
    let out_class_actions: Vec<ClassAction> = cosets
        .iter()
        .map(|(map, label)| class_action_of(&classes, map, label.clone()))
        .collect();
    for (i, a) in out_class_actions.iter().enumerate() {
        if let Some(b) = out_class_actions[..i]
            .iter()
            .find(|b| b.perm_of_classes == a.perm_of_classes)
        {
            return Err(Error::DuplicateClassAction(
                b.coset_label.clone(),
                a.coset_label.clone(),
            ));
        }
    }

    let aut_order = order * out_class_actions.len() as u64;
    if let Some(declared) = entry.aut_order {
        if declared != aut_order {
            return Err(Error::AutOrderMismatch {
                declared,
                inferred: aut_order,
            });
        }
    }
    let bound = order as u128 * order as u128;
    if aut_order as u128 > bound {
        return Err(Error::AutTooLarge { aut_order, bound });
    }
    Ok(SimpleGroupTable {
        entry,
        table,
        classes,
        out_class_actions,
        aut_order,
    })
}

/// Class permutation induced by an automorphism given as generator images.
pub fn automorphism_class_action(
    group: &SimpleGroupTable,
    aut: &[Permutation],
) -> Result<ClassAction> {
    let map = automorphism_map(&group.table, aut, 0)?;
    let mut action = class_action_of(&group.classes, &map, String::new());
    action.coset_label = group
        .out_class_actions
        .iter()
        .find(|a| a.perm_of_classes == action.perm_of_classes)
        .map(|a| a.coset_label.clone())
        .unwrap_or_else(|| "?".into());
    Ok(action)
}

fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect()
}

/// A collection of atlas entries, bundled or loaded from a directory.
#[derive(Clone, Debug)]
pub struct Atlas {
    entries: Vec<AtlasEntry>,
}

impl Atlas {
    pub fn bundled() -> Self {
        let entries = BUNDLED
            .iter()
            .map(|(file, text)| {
                load_entry_str(text).unwrap_or_else(|e| panic!("bundled atlas {file}: {e}"))
            })
            .collect();
        Atlas { entries }
    }

    /// Every `*.json` file in `dir`, in file-name order.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let io = |e: std::io::Error| Error::Io {
            path: dir.display().to_string(),
            source: e,
        };
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        let entries = files
            .iter()
            .map(|f| load_file(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Atlas { entries })
    }

    /// The directory named by `LAB_ATLAS_DIR` when set, else the bundled data.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(ATLAS_DIR_VAR) {
            Some(dir) => Atlas::from_dir(Path::new(&dir)),
            None => Ok(Atlas::bundled()),
        }
    }

    pub fn entries(&self) -> &[AtlasEntry] {
        &self.entries
    }

    /// Case- and whitespace-insensitive lookup.
    pub fn entry(&self, name: &str) -> Result<&AtlasEntry> {
        let key = normalize_name(name);
        self.entries
            .iter()
            .find(|e| normalize_name(&e.name) == key)
            .ok_or_else(|| Error::UnknownGroup(name.to_string()))
    }

    pub fn build(&self, name: &str) -> Result<SimpleGroupTable> {
        build_group(self.entry(name)?.clone())
    }
}

pub fn load_file(path: &Path) -> Result<AtlasEntry> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    load_entry_str(&text)
}
