//! Permutation arithmetic, group closure and conjugacy classes.
//!
//! Permutations act on the right: `p * q` applies `p` first and then `q`,
//! and the conjugate of `x` by `g` is `g⁻¹ x g`. Groups are materialized as
//! dense element tables so every higher layer works with [`ElementIndex`]
//! values instead of raw permutations.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::ops::Mul;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::ElementSet;
use crate::error::{Error, Result};

pub type ElementIndex = usize;
pub type ClassIndex = usize;

/// Default cap on the size of a materialized closure.
pub const DEFAULT_CLOSURE_CAP: usize = 10_000_000;

/// Tables up to this order carry a full multiplication table.
const CAYLEY_LIMIT: usize = 4096;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree as u32).collect(),
        }
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection on 0..{n}"
                )));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    /// Parses cycle notation such as `"(0 1 2)(3 4)"` on `degree` points.
    /// Points may be separated by spaces or commas; `"()"` is the identity.
    pub fn parse_cycles(s: &str, degree: usize) -> Result<Self> {
        let mut images: Vec<u32> = (0..degree as u32).collect();
        let mut moved = vec![false; degree];
        let bad = |why: &str| Error::InvalidPermutation(format!("`{s}`: {why}"));
        let mut rest = s.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(|| bad("expected `(`"))?;
            let close = body.find(')').ok_or_else(|| bad("unclosed cycle"))?;
            let points = body[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| bad("non-integer point")))
                .collect::<Result<Vec<_>>>()?;
            for (i, &p) in points.iter().enumerate() {
                if p >= degree {
                    return Err(bad("point outside degree"));
                }
                if moved[p] {
                    return Err(bad("point repeated"));
                }
                moved[p] = true;
                images[p] = points[(i + 1) % points.len()] as u32;
            }
            rest = body[close + 1..].trim_start();
        }
        Ok(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.images[point] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &x)| i == x as usize)
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0u32; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x as usize] = i as u32;
        }
        Permutation { images }
    }

    /// `g⁻¹ self g`
    pub fn conjugate_by(&self, g: &Permutation) -> Self {
        &(&g.inverse() * self) * g
    }

    /// Cycle lengths (fixed points included), sorted descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut lengths = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                p = self.images[p] as usize;
                len += 1;
            }
            lengths.push(len);
        }
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths
    }

    pub fn order(&self) -> u64 {
        self.cycle_type()
            .into_iter()
            .fold(1u64, |acc, l| num_integer::lcm(acc, l as u64))
    }
}

impl Mul for &Permutation {
    type Output = Permutation;

    fn mul(self, rhs: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), rhs.degree());
        Permutation {
            images: self
                .images
                .iter()
                .map(|&x| rhs.images[x as usize])
                .collect(),
        }
    }
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;

    fn try_from(images: Vec<u32>) -> Result<Self> {
        Permutation::from_images(images)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Vec<u32> {
        p.images
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut wrote = false;
        for start in 0..n {
            if seen[start] || self.images[start] as usize == start {
                continue;
            }
            write!(f, "(")?;
            let mut p = start;
            let mut first = true;
            while !seen[p] {
                seen[p] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{p}")?;
                first = false;
                p = self.images[p] as usize;
            }
            write!(f, ")")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "()")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{self}")
    }
}

/// Cycle type of a permutation, sorted descending.
pub fn cycle_type(p: &Permutation) -> Vec<usize> {
    p.cycle_type()
}

/// A finite permutation group materialized as an indexed element list.
///
/// Element 0 is always the identity; the remaining elements appear in
/// breadth-first order from the identity, multiplying on the right by the
/// generators in the order given.
pub struct ElementTable {
    degree: usize,
    elements: Vec<Permutation>,
    index_of: HashMap<Permutation, ElementIndex>,
    generators: Vec<ElementIndex>,
    inverse: Vec<u32>,
    cayley: Option<Vec<u32>>,
}

impl ElementTable {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> ElementIndex {
        0
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn element(&self, i: ElementIndex) -> &Permutation {
        &self.elements[i]
    }

    pub fn index_of(&self, p: &Permutation) -> Option<ElementIndex> {
        self.index_of.get(p).copied()
    }

    /// Indices of the generators the table was closed from.
    pub fn generators(&self) -> &[ElementIndex] {
        &self.generators
    }

    #[inline]
    pub fn mul(&self, a: ElementIndex, b: ElementIndex) -> ElementIndex {
        match &self.cayley {
            Some(t) => t[a * self.elements.len() + b] as usize,
            None => self.index_of[&(&self.elements[a] * &self.elements[b])],
        }
    }

    #[inline]
    pub fn inv(&self, a: ElementIndex) -> ElementIndex {
        self.inverse[a] as usize
    }

    /// `g⁻¹ x g`
    #[inline]
    pub fn conj(&self, x: ElementIndex, g: ElementIndex) -> ElementIndex {
        self.mul(self.mul(self.inv(g), x), g)
    }

    pub fn element_order(&self, a: ElementIndex) -> u64 {
        let mut x = a;
        let mut n = 1;
        while x != 0 {
            x = self.mul(x, a);
            n += 1;
        }
        n
    }

    /// The subgroup generated by `gens`, as a member set.
    pub fn subgroup(&self, gens: &[ElementIndex]) -> ElementSet {
        self.subgroup_from(&ElementSet::from_indices(self.order(), [0]), gens)
    }

    /// Closure of `start` (assumed to contain the identity) under right
    /// multiplication by `gens`; equals ⟨start, gens⟩ when `start` is a
    /// subgroup generated by a subset of `gens`.
    pub fn subgroup_from(&self, start: &ElementSet, gens: &[ElementIndex]) -> ElementSet {
        let mut set = start.clone();
        let mut queue: VecDeque<ElementIndex> = set.iter().collect();
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if set.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        set
    }

    /// Checks whether `gens` generate the whole table, stopping as soon as
    /// the generated subgroup exceeds half the group.
    pub fn generates(&self, gens: &[ElementIndex]) -> bool {
        let n = self.order();
        let mut set = ElementSet::from_indices(n, [0]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if set.insert(y) {
                    if 2 * set.len() > n {
                        return true;
                    }
                    queue.push_back(y);
                }
            }
        }
        set.len() == n
    }
}

impl fmt::Debug for ElementTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ElementTable")
            .field("degree", &self.degree)
            .field("order", &self.elements.len())
            .finish()
    }
}

/// Closes `generators` into an [`ElementTable`] with the default cap.
pub fn closure(generators: &[Permutation], degree: usize) -> Result<ElementTable> {
    closure_with_cap(generators, degree, DEFAULT_CLOSURE_CAP)
}

pub fn closure_with_cap(
    generators: &[Permutation],
    degree: usize,
    cap: usize,
) -> Result<ElementTable> {
    for g in generators {
        if g.degree() != degree {
            return Err(Error::DegreeMismatch {
                expected: degree,
                found: g.degree(),
            });
        }
    }
    let id = Permutation::identity(degree);
    let mut elements = vec![id.clone()];
    let mut index_of = HashMap::from([(id, 0usize)]);
    // right_gen[x * ngens + s] = index of elements[x] * generators[s]
    let mut right_gen: Vec<u32> = Vec::new();
    // BFS parent: element = elements[parent] * generators[gen]
    let mut parent: Vec<(u32, u32)> = vec![(0, 0)];
    let mut head = 0;
    while head < elements.len() {
        for (s, g) in generators.iter().enumerate() {
            let y = &elements[head] * g;
            let idx = match index_of.get(&y) {
                Some(&i) => i,
                None => {
                    let i = elements.len();
                    if i >= cap {
                        return Err(Error::CapExceeded {
                            what: "group closure",
                            cap,
                        });
                    }
                    index_of.insert(y.clone(), i);
                    elements.push(y);
                    parent.push((head as u32, s as u32));
                    i
                }
            };
            right_gen.push(idx as u32);
        }
        head += 1;
    }

    let n = elements.len();
    let ngens = generators.len();
    let gen_index: Vec<ElementIndex> = generators.iter().map(|g| index_of[g]).collect();
    let cayley = (n <= CAYLEY_LIMIT).then(|| {
        // column b is filled from column parent(b): a*b = (a*p)*s
        let mut t = vec![0u32; n * n];
        for a in 0..n {
            t[a * n] = a as u32;
        }
        for b in 1..n {
            let (p, s) = parent[b];
            for a in 0..n {
                let ap = t[a * n + p as usize] as usize;
                t[a * n + b] = right_gen[ap * ngens + s as usize];
            }
        }
        t
    });
    let inverse = match &cayley {
        Some(t) => {
            let mut inv = vec![0u32; n];
            for a in 0..n {
                let b = (0..n).find(|&b| t[a * n + b] == 0).expect("group table");
                inv[a] = b as u32;
            }
            inv
        }
        None => elements
            .iter()
            .map(|p| index_of[&p.inverse()] as u32)
            .collect(),
    };
    Ok(ElementTable {
        degree,
        elements,
        index_of,
        generators: gen_index,
        inverse,
        cayley,
    })
}

/// Conjugacy class partition of an [`ElementTable`].
#[derive(Clone, Debug, Serialize)]
pub struct ClassData {
    pub class_of: Vec<ClassIndex>,
    pub class_sizes: Vec<u64>,
    pub centralizer_orders: Vec<u64>,
    pub class_reps: Vec<ElementIndex>,
    pub element_orders: Vec<u64>,
}

impl ClassData {
    pub fn num_classes(&self) -> usize {
        self.class_sizes.len()
    }

    /// Σ_c |C_c|², the number of commuting-up-to-conjugacy pairs; equals
    /// Σ_u [T : C_T(u)].
    pub fn sum_of_squared_class_sizes(&self) -> u64 {
        self.class_sizes.iter().map(|s| s * s).sum()
    }
}

/// Partitions the table into conjugacy classes. Classes are numbered by
/// their smallest element index, so the identity class is class 0.
pub fn conjugacy_classes(table: &ElementTable) -> ClassData {
    let n = table.order();
    let gens = table.generators();
    let mut class_of = vec![usize::MAX; n];
    let mut class_sizes = Vec::new();
    let mut class_reps = Vec::new();
    let mut element_orders = Vec::new();
    for x in 0..n {
        if class_of[x] != usize::MAX {
            continue;
        }
        let c = class_sizes.len();
        class_of[x] = c;
        let mut queue = VecDeque::from([x]);
        let mut size = 1u64;
        while let Some(y) = queue.pop_front() {
            for &s in gens {
                let z = table.conj(y, s);
                if class_of[z] == usize::MAX {
                    class_of[z] = c;
                    size += 1;
                    queue.push_back(z);
                }
            }
        }
        class_sizes.push(size);
        class_reps.push(x);
        element_orders.push(table.element_order(x));
    }
    let centralizer_orders = class_sizes.iter().map(|s| n as u64 / s).collect();
    ClassData {
        class_of,
        class_sizes,
        centralizer_orders,
        class_reps,
        element_orders,
    }
}

/// Exclusive-access random stream. Streams for parallel work are derived
/// with [`RandomStream::derive`], which selects ChaCha stream number
/// `index` under the same 64-bit seed, so results do not depend on the
/// parallel schedule.
#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn derive(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        RandomStream { rng }
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

pub fn uniform_element(table: &ElementTable, stream: &mut RandomStream) -> ElementIndex {
    stream.below(table.order())
}
