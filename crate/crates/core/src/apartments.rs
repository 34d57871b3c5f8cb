//! Apartment enumeration and the combinatorics of orthogonally inexact
//! subsets.
//!
//! Within one apartment, membership of an operator in a second apartment is
//! a purely combinatorial affair: a subset of the apartment embeds into
//! another one exactly when some index pair `(i, j)` is fused (shares a
//! slot) in every member. The maximal such subsets `A_ij` are indexed by
//! pairs, and the pair families attached to two fixed members drive all the
//! structural detection downstream.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectra::{apartment_size, ClassSpec, LabeledPartition};

/// Default ceiling on the number of partitions an operation may enumerate.
pub const DEFAULT_CAP: usize = 1_000_000;

/// An unordered pair of distinct basis indices, stored as `(small, big)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairIndex(usize, usize);

impl PairIndex {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(PairIndex(a, b)),
            std::cmp::Ordering::Greater => Ok(PairIndex(b, a)),
            std::cmp::Ordering::Equal => Err(Error::IdenticalIndices),
        }
    }

    pub fn small(&self) -> usize {
        self.0
    }

    pub fn big(&self) -> usize {
        self.1
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0 == index || self.1 == index
    }

    pub fn indices(&self) -> [usize; 2] {
        [self.0, self.1]
    }

    /// Number of shared indices with another pair.
    pub fn overlap(&self, other: &PairIndex) -> usize {
        [self.0, self.1]
            .iter()
            .filter(|&&x| other.contains(x))
            .count()
    }
}

impl fmt::Display for PairIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

impl Serialize for PairIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0, self.1].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PairIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = <[usize; 2]>::deserialize(deserializer)?;
        PairIndex::new(raw[0], raw[1]).map_err(|_| D::Error::custom("pair indices must differ"))
    }
}

/// Adjacency of two distinct pairs: they share exactly one index.
pub fn adjacent(a: &PairIndex, b: &PairIndex) -> Result<bool> {
    if a == b {
        return Err(Error::IdenticalIndices);
    }
    Ok(a.overlap(b) == 1)
}

/// Iterator over all labeled partitions of a spec in lexicographic order of
/// their slot vectors.
#[derive(Debug)]
pub struct ApartmentIter {
    current: Option<Vec<usize>>,
}

impl Iterator for ApartmentIter {
    type Item = LabeledPartition;

    fn next(&mut self) -> Option<LabeledPartition> {
        let current = self.current.take()?;
        let item = LabeledPartition::from_slots_unchecked(current.clone());
        self.current = next_multiset_permutation(current);
        Some(item)
    }
}

fn next_multiset_permutation(mut v: Vec<usize>) -> Option<Vec<usize>> {
    if v.len() < 2 {
        return None;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    let pivot = i - 1;
    let mut j = v.len() - 1;
    while v[j] <= v[pivot] {
        j -= 1;
    }
    v.swap(pivot, j);
    v[i..].reverse();
    Some(v)
}

/// Enumerate the apartment of a spec, erroring out when its size exceeds
/// `cap` before any work is done.
pub fn enumerate_apartment<T: Scalar>(spec: &ClassSpec<T>, cap: usize) -> Result<ApartmentIter> {
    let size = apartment_size(spec);
    if size > cap as u128 {
        return Err(Error::CapExceeded {
            size,
            cap: cap as u128,
        });
    }
    let mut slot_of = Vec::with_capacity(spec.ambient_dim());
    for slot in 0..spec.slot_count() {
        slot_of.extend(std::iter::repeat_n(slot, spec.multiplicity(slot)));
    }
    slot_of.sort_unstable();
    Ok(ApartmentIter {
        current: Some(slot_of),
    })
}

/// Collected apartment, in enumeration order.
pub fn collect_apartment<T: Scalar>(
    spec: &ClassSpec<T>,
    cap: usize,
) -> Result<Vec<LabeledPartition>> {
    Ok(enumerate_apartment(spec, cap)?.collect())
}

/// Whether a partition fuses the given pair (same slot for both indices).
pub fn in_a_ij(p: &LabeledPartition, pair: &PairIndex) -> bool {
    p.slot(pair.small()) == p.slot(pair.big())
}

/// All pairs fused in every member of a nonempty subset.
pub fn fused_pairs(x: &[LabeledPartition]) -> Result<BTreeSet<PairIndex>> {
    let first = x.first().ok_or(Error::EmptySubset)?;
    let n = first.len();
    let mut fused = BTreeSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let pair = PairIndex(i, j);
            if x.iter().all(|p| in_a_ij(p, &pair)) {
                fused.insert(pair);
            }
        }
    }
    Ok(fused)
}

/// The maximal orthogonally inexact subsets of an apartment, keyed by the
/// fused pair that defines them. Degenerate specs may leave some `A_ij`
/// empty or non-maximal; both situations are reported rather than dropped.
#[derive(Debug)]
pub struct MaximalInexactSubsets {
    /// Members of each nonempty `A_ij`, in enumeration order.
    pub members: BTreeMap<PairIndex, Vec<LabeledPartition>>,
    /// Pairs whose `A_ij` is empty.
    pub empty: Vec<PairIndex>,
    /// `(pair, outside partition)` entries where adding the outside
    /// partition leaves the subset inexact, contradicting maximality.
    pub maximality_failures: Vec<(PairIndex, LabeledPartition)>,
}

/// Compute every `A_ij` of the apartment together with a maximality audit:
/// for each outside partition, the fused pairs of `A_ij` and of the
/// partition must be disjoint, which makes `fused_pairs(A_ij + {P})` empty.
pub fn maximal_inexact_subsets<T: Scalar>(
    spec: &ClassSpec<T>,
    cap: usize,
) -> Result<MaximalInexactSubsets> {
    let n = spec.ambient_dim();
    let apartment = collect_apartment(spec, cap)?;
    let mut members: BTreeMap<PairIndex, Vec<LabeledPartition>> = BTreeMap::new();
    let mut empty = Vec::new();
    let mut maximality_failures = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let pair = PairIndex(i, j);
            let subset: Vec<LabeledPartition> = apartment
                .iter()
                .filter(|p| in_a_ij(p, &pair))
                .cloned()
                .collect();
            if subset.is_empty() {
                empty.push(pair);
                continue;
            }
            let fused = fused_pairs(&subset)?;
            for p in apartment.iter().filter(|p| !in_a_ij(p, &pair)) {
                if fused.iter().any(|f| in_a_ij(p, f)) {
                    maximality_failures.push((pair, p.clone()));
                }
            }
            members.insert(pair, subset);
        }
    }
    Ok(MaximalInexactSubsets {
        members,
        empty,
        maximality_failures,
    })
}

/// The family of index pairs separated by both of two distinct partitions:
/// exactly the pairs whose `A_ij` avoids both operators, i.e. the
/// orthocomplementary subsets the two operators belong to.
#[derive(Clone, Debug)]
pub struct PairFamily {
    pairs: BTreeSet<PairIndex>,
    p: LabeledPartition,
    q: LabeledPartition,
    n: usize,
}

impl PairFamily {
    pub fn pairs(&self) -> &BTreeSet<PairIndex> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: &PairIndex) -> bool {
        self.pairs.contains(pair)
    }

    pub fn defining(&self) -> (&LabeledPartition, &LabeledPartition) {
        (&self.p, &self.q)
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }
}

/// Build the pair family of two distinct partitions of the same spec.
pub fn pair_family<T: Scalar>(
    spec: &ClassSpec<T>,
    p: &LabeledPartition,
    q: &LabeledPartition,
) -> Result<PairFamily> {
    LabeledPartition::new(p.slot_of().to_vec(), spec)
        .and(LabeledPartition::new(q.slot_of().to_vec(), spec))
        .map_err(|_| Error::SpecMismatch("partitions do not fit the spec".into()))?;
    if p == q {
        return Err(Error::IdenticalOperators);
    }
    let n = spec.ambient_dim();
    let mut pairs = BTreeSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if p.slot(i) != p.slot(j) && q.slot(i) != q.slot(j) {
                pairs.insert(PairIndex(i, j));
            }
        }
    }
    Ok(PairFamily {
        pairs,
        p: p.clone(),
        q: q.clone(),
        n,
    })
}

/// Shape of a special subfamily: a star (all pairs through one index) or a
/// triangle (the three pairs within a three-element index set).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubfamilyKind {
    Star { index: usize },
    Triangle,
}

/// A maximal pairwise-adjacent subset of a pair family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialSubfamily {
    pub pairs: Vec<PairIndex>,
    pub kind: SubfamilyKind,
}

impl SpecialSubfamily {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn intersection_size(&self, other: &SpecialSubfamily) -> usize {
        self.pairs
            .iter()
            .filter(|p| other.pairs.contains(p))
            .count()
    }
}

/// All maximal pairwise-adjacent subfamilies, in deterministic order.
///
/// Candidates are the full stars (every family pair through a fixed index)
/// and the triangles contained in the family; a candidate survives unless it
/// is a strict subset of another candidate. Every pairwise-adjacent set is a
/// sub-star or a triangle, so this yields exactly the maximal cliques of the
/// adjacency relation.
pub fn special_subfamilies(family: &PairFamily) -> Vec<SpecialSubfamily> {
    let mut indices = BTreeSet::new();
    for pair in family.pairs() {
        indices.insert(pair.small());
        indices.insert(pair.big());
    }

    let mut candidates: BTreeMap<Vec<PairIndex>, SubfamilyKind> = BTreeMap::new();
    for &i in &indices {
        let star: Vec<PairIndex> = family
            .pairs()
            .iter()
            .filter(|p| p.contains(i))
            .copied()
            .collect();
        if !star.is_empty() {
            candidates
                .entry(star)
                .or_insert(SubfamilyKind::Star { index: i });
        }
    }
    let index_list: Vec<usize> = indices.iter().copied().collect();
    for (a, &i) in index_list.iter().enumerate() {
        for (b, &j) in index_list.iter().enumerate().skip(a + 1) {
            for &t in index_list.iter().skip(b + 1) {
                let ij = PairIndex(i, j);
                let it = PairIndex(i, t);
                let jt = PairIndex(j, t);
                if family.contains(&ij) && family.contains(&it) && family.contains(&jt) {
                    candidates.insert(vec![ij, it, jt], SubfamilyKind::Triangle);
                }
            }
        }
    }

    let keys: Vec<Vec<PairIndex>> = candidates.keys().cloned().collect();
    let mut result = Vec::new();
    'outer: for key in &keys {
        for other in &keys {
            if other.len() > key.len() && key.iter().all(|p| other.contains(p)) {
                continue 'outer;
            }
        }
        result.push(SpecialSubfamily {
            pairs: key.clone(),
            kind: candidates[key],
        });
    }
    result
}

/// Relative position of two distinct commuting class members.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    /// Disjoint supports: the operators annihilate each other.
    Orthogonal,
    /// Supports overlap but differ.
    PartialOverlap,
    /// Equal supports (hence equal kernels).
    SameRange,
}

/// Classify the relative position of two distinct partitions.
pub fn classify_pair<T: Scalar>(
    spec: &ClassSpec<T>,
    p: &LabeledPartition,
    q: &LabeledPartition,
) -> Result<PairClass> {
    if p == q {
        return Err(Error::IdenticalOperators);
    }
    LabeledPartition::new(p.slot_of().to_vec(), spec)
        .and(LabeledPartition::new(q.slot_of().to_vec(), spec))
        .map_err(|_| Error::SpecMismatch("partitions do not fit the spec".into()))?;
    let sp = p.support_set();
    let sq = q.support_set();
    if sp.is_disjoint(&sq) {
        Ok(PairClass::Orthogonal)
    } else if sp == sq {
        Ok(PairClass::SameRange)
    } else {
        Ok(PairClass::PartialOverlap)
    }
}
