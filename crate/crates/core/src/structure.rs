//! Structural characterizations built on pair families.
//!
//! The centerpiece is a detector that decides orthogonality of two class
//! members from the clique geometry of their pair family alone, without
//! looking at supports: orthogonal pairs are exactly those whose family
//! satisfies both of
//!
//! * (a) every two distinct non-adjacent family members have exactly two
//!   common neighbors in the family, themselves non-adjacent, and
//! * (b) distinct special subfamilies meet in at most one element.
//!
//! Non-orthogonal pairs with different supports violate (a); pairs with
//! equal supports violate (b) through a triangle overlapping a star.

use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

use crate::apartments::{
    collect_apartment, pair_family, special_subfamilies, PairFamily, PairIndex, SpecialSubfamily,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectra::{apply_symmetry, ClassSpec, LabeledPartition, SymmetryPerm};

/// Outcome of a structural check: a boolean for detectors, a label for
/// classifications.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Verdict {
    Flag(bool),
    Label(String),
}

/// Re-checkable evidence for a verdict.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A non-adjacent family pair whose common-neighbor pattern breaks
    /// clause (a).
    NonAdjacentPair {
        x: PairIndex,
        y: PairIndex,
        common_neighbors: Vec<PairIndex>,
        neighbors_mutually_adjacent: bool,
    },
    /// Two special subfamilies meeting in more than one element.
    SubfamilyOverlap {
        a: SpecialSubfamily,
        b: SpecialSubfamily,
        intersection: Vec<PairIndex>,
    },
    /// A map entry described by how its image support relates to its own.
    SupportImage {
        index: usize,
        support: Vec<usize>,
        image_support: Vec<usize>,
        relation: SupportRelation,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportRelation {
    Identity,
    Complement,
    Other,
}

/// Result of a structural check: verdict, the witnesses that decided it,
/// and counters describing the work done.
#[derive(Clone, Debug, Serialize)]
pub struct StructuralReport {
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub counts: BTreeMap<String, u64>,
    pub seed: Option<u64>,
}

impl StructuralReport {
    pub fn flag(&self) -> Option<bool> {
        match &self.verdict {
            Verdict::Flag(b) => Some(*b),
            Verdict::Label(_) => None,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match &self.verdict {
            Verdict::Flag(_) => None,
            Verdict::Label(s) => Some(s),
        }
    }
}

/// Decide orthogonality of two distinct class members from their pair
/// family alone.
///
/// Requires the standing dimension assumptions and excludes scaled rank-one
/// classes, whose families are too small to carry the geometry.
pub fn detect_orthogonality_structural<T: Scalar>(
    spec: &ClassSpec<T>,
    p: &LabeledPartition,
    q: &LabeledPartition,
) -> Result<StructuralReport> {
    if !spec.assumptions_hold() {
        return Err(Error::UnsupportedSpec(
            "structural detection needs the standing dimension assumptions".into(),
        ));
    }
    if spec.is_scaled_rank_one() {
        return Err(Error::UnsupportedSpec(
            "scaled rank-one classes carry too little pair geometry to detect orthogonality".into(),
        ));
    }
    let family = pair_family(spec, p, q)?;
    let pairs: Vec<PairIndex> = family.pairs().iter().copied().collect();

    let mut witnesses = Vec::new();
    let mut clause_a = true;
    let mut nonadjacent_checked: u64 = 0;
    'outer: for (idx, x) in pairs.iter().enumerate() {
        for y in pairs.iter().skip(idx + 1) {
            if x.overlap(y) != 0 {
                continue;
            }
            nonadjacent_checked += 1;
            let mut neighbors = Vec::new();
            for z in &pairs {
                if z.overlap(x) == 1 && z.overlap(y) == 1 {
                    neighbors.push(*z);
                }
            }
            let neighbors_mutually_adjacent =
                neighbors.len() == 2 && neighbors[0].overlap(&neighbors[1]) == 1;
            if neighbors.len() != 2 || neighbors_mutually_adjacent {
                clause_a = false;
                witnesses.push(Witness::NonAdjacentPair {
                    x: *x,
                    y: *y,
                    common_neighbors: neighbors,
                    neighbors_mutually_adjacent,
                });
                break 'outer;
            }
        }
    }

    let subfamilies = special_subfamilies(&family);
    let mut clause_b = true;
    let mut max_overlap: u64 = 0;
    'outer_b: for (idx, a) in subfamilies.iter().enumerate() {
        for b in subfamilies.iter().skip(idx + 1) {
            let overlap = a.intersection_size(b);
            max_overlap = max_overlap.max(overlap as u64);
            if overlap > 1 {
                clause_b = false;
                let intersection = a
                    .pairs
                    .iter()
                    .filter(|pr| b.pairs.contains(pr))
                    .copied()
                    .collect();
                witnesses.push(Witness::SubfamilyOverlap {
                    a: a.clone(),
                    b: b.clone(),
                    intersection,
                });
                break 'outer_b;
            }
        }
    }

    let mut counts = BTreeMap::new();
    counts.insert("family_size".into(), family.len() as u64);
    counts.insert("nonadjacent_pairs_checked".into(), nonadjacent_checked);
    counts.insert("special_subfamilies".into(), subfamilies.len() as u64);
    counts.insert("max_subfamily_overlap".into(), max_overlap);

    Ok(StructuralReport {
        verdict: Verdict::Flag(clause_a && clause_b),
        witnesses,
        counts,
        seed: None,
    })
}

/// Number of special subfamilies with at least `threshold` elements.
pub fn count_large_special_subfamilies(family: &PairFamily, threshold: usize) -> usize {
    special_subfamilies(family)
        .iter()
        .filter(|sf| sf.len() >= threshold)
        .count()
}

/// For two members of a half-dimensional class whose supports meet in
/// dimension `rank - 1`, pick same-support relabelings that share a
/// multi-dimensional eigenspace inside the common support.
///
/// Classes with all nonzero multiplicities equal to one need no adjustment
/// and are returned as given. Scaled projection classes admit no such
/// relabeling (their only nonzero eigenspace is the whole range) and are
/// rejected.
pub fn choose_representatives_for_charad<T: Scalar>(
    spec: &ClassSpec<T>,
    p: &LabeledPartition,
    q: &LabeledPartition,
) -> Result<(LabeledPartition, LabeledPartition)> {
    LabeledPartition::new(p.slot_of().to_vec(), spec)
        .and(LabeledPartition::new(q.slot_of().to_vec(), spec))
        .map_err(|_| Error::SpecMismatch("partitions do not fit the spec".into()))?;
    let k = spec.rank();
    if !spec.is_half_dimensional() {
        return Err(Error::UnsupportedSpec(
            "representative choice applies to half-dimensional classes only".into(),
        ));
    }
    let sp = p.support_set();
    let sq = q.support_set();
    let common: Vec<usize> = sp.intersection(&sq).copied().collect();
    if common.len() != k - 1 {
        return Err(Error::SupportIntersection {
            expected: k - 1,
            got: common.len(),
        });
    }
    if spec.multiplicities().iter().all(|&n| n == 1) {
        return Ok((p.clone(), q.clone()));
    }
    if spec.is_scaled_projection() {
        return Err(Error::UnsupportedSpec(
            "scaled projection classes have no eigenspace fitting inside the common support".into(),
        ));
    }
    let slot = (1..spec.slot_count())
        .find(|&s| spec.multiplicity(s) >= 2)
        .expect("a multi-dimensional nonzero slot exists");
    let shared: Vec<usize> = common[..spec.multiplicity(slot)].to_vec();
    let build = |support: &BTreeSet<usize>| -> Result<LabeledPartition> {
        let mut slot_of = vec![0usize; spec.ambient_dim()];
        for &i in &shared {
            slot_of[i] = slot;
        }
        let mut rest: Vec<usize> = support
            .iter()
            .copied()
            .filter(|i| !shared.contains(i))
            .collect();
        rest.sort_unstable();
        let mut cursor = 0;
        for s in 1..spec.slot_count() {
            if s == slot {
                continue;
            }
            for _ in 0..spec.multiplicity(s) {
                slot_of[rest[cursor]] = s;
                cursor += 1;
            }
        }
        LabeledPartition::new(slot_of, spec)
    };
    Ok((build(&sp)?, build(&sq)?))
}

fn canonical_partition<T: Scalar>(
    support: &BTreeSet<usize>,
    spec: &ClassSpec<T>,
) -> Result<LabeledPartition> {
    let mut slot_of = vec![0usize; spec.ambient_dim()];
    let ordered: Vec<usize> = support.iter().copied().collect();
    let mut cursor = 0;
    for s in 1..spec.slot_count() {
        for _ in 0..spec.multiplicity(s) {
            slot_of[ordered[cursor]] = s;
            cursor += 1;
        }
    }
    LabeledPartition::new(slot_of, spec)
}

/// A chain from `p` to `q` in which consecutive supports meet in dimension
/// `rank - 1`. Supports are morphed one index swap at a time; equal-support
/// endpoints are routed through an intermediate support.
pub fn range_chain<T: Scalar>(
    spec: &ClassSpec<T>,
    p: &LabeledPartition,
    q: &LabeledPartition,
) -> Result<Vec<LabeledPartition>> {
    LabeledPartition::new(p.slot_of().to_vec(), spec)
        .and(LabeledPartition::new(q.slot_of().to_vec(), spec))
        .map_err(|_| Error::SpecMismatch("partitions do not fit the spec".into()))?;
    if p == q {
        return Ok(vec![p.clone()]);
    }
    let k = spec.rank();
    let sp = p.support_set();
    let sq = q.support_set();
    let mut chain = vec![p.clone()];
    if sp == sq {
        let x = *sp.iter().next().expect("nonzero rank");
        let y = (0..spec.ambient_dim())
            .find(|i| !sp.contains(i))
            .ok_or_else(|| {
                Error::UnsupportedSpec("full-support classes leave no room to move".into())
            })?;
        let mut intermediate = sp.clone();
        intermediate.remove(&x);
        intermediate.insert(y);
        chain.push(canonical_partition(&intermediate, spec)?);
        chain.push(q.clone());
    } else {
        let mut current = sp.clone();
        while current != sq {
            let out = *current
                .iter()
                .find(|i| !sq.contains(i))
                .expect("supports differ");
            let inn = *sq
                .iter()
                .find(|i| !current.contains(i))
                .expect("supports differ");
            current.remove(&out);
            current.insert(inn);
            if current == sq {
                chain.push(q.clone());
            } else {
                chain.push(canonical_partition(&current, spec)?);
            }
        }
    }
    for w in chain.windows(2) {
        let a = w[0].support_set();
        let b = w[1].support_set();
        if a.intersection(&b).count() != k - 1 {
            return Err(Error::Numerical(
                "chain construction produced a bad consecutive intersection".into(),
            ));
        }
    }
    Ok(chain)
}

/// A bijection of one apartment onto itself, given entry by entry.
#[derive(Clone, Debug)]
pub struct ApartmentMap {
    entries: Vec<(LabeledPartition, LabeledPartition)>,
}

impl ApartmentMap {
    /// Validate that the entries form a bijection of the full apartment.
    pub fn new<T: Scalar>(
        spec: &ClassSpec<T>,
        entries: Vec<(LabeledPartition, LabeledPartition)>,
        cap: usize,
    ) -> Result<Self> {
        let apartment: BTreeSet<LabeledPartition> =
            collect_apartment(spec, cap)?.into_iter().collect();
        let domain: BTreeSet<LabeledPartition> = entries.iter().map(|(a, _)| a.clone()).collect();
        let image: BTreeSet<LabeledPartition> = entries.iter().map(|(_, b)| b.clone()).collect();
        if domain.len() != entries.len() {
            return Err(Error::NotApartmentPreserving(
                "duplicate domain entries".into(),
            ));
        }
        if domain != apartment {
            return Err(Error::NotApartmentPreserving(
                "domain is not the full apartment".into(),
            ));
        }
        if image != apartment {
            return Err(Error::NotApartmentPreserving(
                "image is not the full apartment".into(),
            ));
        }
        Ok(ApartmentMap { entries })
    }

    /// The map induced by a slot symmetry on the whole apartment.
    pub fn from_symmetry<T: Scalar>(
        spec: &ClassSpec<T>,
        delta: &SymmetryPerm,
        cap: usize,
    ) -> Result<Self> {
        let entries = collect_apartment(spec, cap)?
            .into_iter()
            .map(|p| {
                let image = apply_symmetry(delta, &p, spec)?;
                Ok((p, image))
            })
            .collect::<Result<Vec<_>>>()?;
        ApartmentMap::new(spec, entries, cap)
    }

    pub fn entries(&self) -> &[(LabeledPartition, LabeledPartition)] {
        &self.entries
    }

    /// Swap the images of two domain entries. Preserves bijectivity, so the
    /// result is still a valid apartment map; useful for building maps that
    /// break finer invariants.
    pub fn swap_images(&mut self, a: usize, b: usize) {
        let img_a = self.entries[a].1.clone();
        let img_b = self.entries[b].1.clone();
        self.entries[a].1 = img_b;
        self.entries[b].1 = img_a;
    }
}

/// Classify an apartment self-map by how it moves supports: every image
/// support equal to its source (`identity_type`), every image support the
/// complement of its source (`complement_type`), or `mixed` with witnesses.
///
/// Complements only make sense at half dimension, so other specs are
/// rejected.
pub fn range_alternative_check<T: Scalar>(
    spec: &ClassSpec<T>,
    map: &ApartmentMap,
) -> Result<StructuralReport> {
    if !spec.is_half_dimensional() {
        return Err(Error::UnsupportedSpec(
            "support alternative applies to half-dimensional classes only".into(),
        ));
    }
    let n = spec.ambient_dim();
    let mut counts = BTreeMap::new();
    let mut identity: u64 = 0;
    let mut complement: u64 = 0;
    let mut other: u64 = 0;
    let mut first_identity: Option<Witness> = None;
    let mut first_complement: Option<Witness> = None;
    let mut first_other: Option<Witness> = None;
    for (index, (src, dst)) in map.entries().iter().enumerate() {
        let s_in = src.support_set();
        let s_out = dst.support_set();
        let comp: BTreeSet<usize> = (0..n).filter(|i| !s_in.contains(i)).collect();
        let relation = if s_out == s_in {
            SupportRelation::Identity
        } else if s_out == comp {
            SupportRelation::Complement
        } else {
            SupportRelation::Other
        };
        let witness = || Witness::SupportImage {
            index,
            support: s_in.iter().copied().collect(),
            image_support: s_out.iter().copied().collect(),
            relation,
        };
        match relation {
            SupportRelation::Identity => {
                identity += 1;
                if first_identity.is_none() {
                    first_identity = Some(witness());
                }
            }
            SupportRelation::Complement => {
                complement += 1;
                if first_complement.is_none() {
                    first_complement = Some(witness());
                }
            }
            SupportRelation::Other => {
                other += 1;
                if first_other.is_none() {
                    first_other = Some(witness());
                }
            }
        }
    }
    counts.insert("identity".into(), identity);
    counts.insert("complement".into(), complement);
    counts.insert("other".into(), other);
    counts.insert("entries".into(), map.entries().len() as u64);

    let total = map.entries().len() as u64;
    let (label, witnesses) = if identity == total {
        ("identity_type".to_string(), Vec::new())
    } else if complement == total {
        ("complement_type".to_string(), Vec::new())
    } else {
        let mut ws = Vec::new();
        if let Some(w) = first_other {
            ws.push(w);
        } else {
            ws.extend(first_identity);
            ws.extend(first_complement);
        }
        ("mixed".to_string(), ws)
    };
    Ok(StructuralReport {
        verdict: Verdict::Label(label),
        witnesses,
        counts,
        seed: None,
    })
}
