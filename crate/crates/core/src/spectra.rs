//! Class specifications, slot symmetries, and labeled partitions.
//!
//! A conjugacy class of finite-rank self-adjoint operators is determined by
//! its distinct nonzero eigenvalues and their multiplicities inside an
//! ambient dimension. Slot 0 always denotes the kernel; slots `1..=m` carry
//! the nonzero eigenvalues in descending order. A member of an apartment
//! (the maximal commuting family attached to an orthonormal basis) is then
//! just a labeled partition: an assignment of every basis index to a slot
//! with the right block sizes.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, RejectionCode, Result};
use crate::scalar::{fabs, Scalar};
use crate::tol::{ToleranceConfig, EIGEN_SEPARATION_FACTOR};

/// Raw class data as it appears in spec files, prior to validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawClassSpec<T> {
    pub eigenvalues: Vec<T>,
    pub multiplicities: Vec<usize>,
    pub dim: usize,
    #[serde(default)]
    pub allow_assumption_violation: bool,
}

/// Non-fatal observations recorded during validation.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecWarning {
    /// Two admissible eigenvalues (zero included) are close enough to make
    /// partition recovery ill-posed at the default matching tolerance.
    EigenvalueSeparation { a: f64, b: f64, gap: f64 },
}

/// A validated conjugacy-class description.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassSpec<T> {
    eigenvalues: Vec<T>,
    multiplicities: Vec<usize>,
    ambient_dim: usize,
    kernel_dim: usize,
    assumptions_hold: bool,
    override_used: bool,
    warnings: Vec<SpecWarning>,
}

impl<T: Scalar> ClassSpec<T> {
    /// Number of distinct nonzero eigenvalues.
    pub fn eigenvalue_count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of slots, kernel included.
    pub fn slot_count(&self) -> usize {
        self.eigenvalues.len() + 1
    }

    /// Eigenvalue attached to a slot; slot 0 yields zero.
    pub fn alpha(&self, slot: usize) -> T {
        if slot == 0 {
            T::zero()
        } else {
            self.eigenvalues[slot - 1]
        }
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Block size demanded of a slot.
    pub fn multiplicity(&self, slot: usize) -> usize {
        if slot == 0 {
            self.kernel_dim
        } else {
            self.multiplicities[slot - 1]
        }
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    /// Rank: total dimension of the nonzero eigenspaces.
    pub fn rank(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Whether the standing dimension assumptions hold (kernel at least as
    /// large as the rank; at half dimension the rank is at least 4).
    pub fn assumptions_hold(&self) -> bool {
        self.assumptions_hold
    }

    pub fn override_used(&self) -> bool {
        self.override_used
    }

    pub fn warnings(&self) -> &[SpecWarning] {
        &self.warnings
    }

    /// Scaled rank-one projection class: a single nonzero eigenvalue of
    /// multiplicity one.
    pub fn is_scaled_rank_one(&self) -> bool {
        self.multiplicities == [1]
    }

    /// Scaled projection class: a single nonzero eigenvalue.
    pub fn is_scaled_projection(&self) -> bool {
        self.multiplicities.len() == 1
    }

    /// Ambient dimension is exactly twice the rank.
    pub fn is_half_dimensional(&self) -> bool {
        self.ambient_dim == 2 * self.rank()
    }

    /// Round-trip back to the raw form (canonical slot order).
    pub fn to_raw(&self) -> RawClassSpec<T> {
        RawClassSpec {
            eigenvalues: self.eigenvalues.clone(),
            multiplicities: self.multiplicities.clone(),
            dim: self.ambient_dim,
            allow_assumption_violation: self.override_used,
        }
    }
}

/// Validate raw class data and bring it to canonical form.
///
/// Eigenvalues are sorted descending together with their multiplicities.
/// Exact zeros and exact duplicates among the eigenvalues are rejected;
/// eigenvalues merely too close for reliable recovery only produce a
/// warning. The standing assumptions are enforced unless the raw data sets
/// `allow_assumption_violation`.
pub fn validate_spec<T: Scalar>(
    raw: &RawClassSpec<T>,
    tol: &ToleranceConfig<T>,
) -> Result<ClassSpec<T>> {
    if raw.eigenvalues.is_empty() || raw.eigenvalues.len() != raw.multiplicities.len() {
        return Err(Error::InvalidSpec {
            code: RejectionCode::MalformedShape,
            detail: format!(
                "{} eigenvalues with {} multiplicities",
                raw.eigenvalues.len(),
                raw.multiplicities.len()
            ),
        });
    }
    for (i, &a) in raw.eigenvalues.iter().enumerate() {
        if a == T::zero() {
            return Err(Error::InvalidSpec {
                code: RejectionCode::ZeroEigenvalue,
                detail: format!("eigenvalue {i} is zero; the kernel is slot 0 already"),
            });
        }
        if !a.is_finite() {
            return Err(Error::InvalidSpec {
                code: RejectionCode::MalformedShape,
                detail: format!("eigenvalue {i} is not finite"),
            });
        }
    }
    for (i, &n) in raw.multiplicities.iter().enumerate() {
        if n == 0 {
            return Err(Error::InvalidSpec {
                code: RejectionCode::MultiplicityOutOfRange,
                detail: format!("multiplicity {i} is zero"),
            });
        }
    }
    if raw.dim < 3 {
        return Err(Error::InvalidSpec {
            code: RejectionCode::AmbientDimensionTooSmall,
            detail: format!("ambient dimension {} < 3", raw.dim),
        });
    }
    let rank: usize = raw.multiplicities.iter().sum();
    if rank > raw.dim {
        return Err(Error::InvalidSpec {
            code: RejectionCode::RankExceedsDimension,
            detail: format!("rank {} exceeds ambient dimension {}", rank, raw.dim),
        });
    }

    let mut slots: Vec<(T, usize)> = raw
        .eigenvalues
        .iter()
        .copied()
        .zip(raw.multiplicities.iter().copied())
        .collect();
    slots.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite eigenvalues"));
    for w in slots.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::InvalidSpec {
                code: RejectionCode::DuplicateEigenvalue,
                detail: format!("eigenvalue {} listed twice", w[0].0.to_f64_lossy()),
            });
        }
    }

    let kernel_dim = raw.dim - rank;
    let assumptions_hold = kernel_dim >= rank && (raw.dim != 2 * rank || rank >= 4);
    if !assumptions_hold && !raw.allow_assumption_violation {
        let detail = if kernel_dim < rank {
            format!("kernel dimension {kernel_dim} is smaller than rank {rank}")
        } else {
            format!(
                "ambient dimension {} is twice the rank but rank {rank} < 4",
                raw.dim
            )
        };
        return Err(Error::InvalidSpec {
            code: RejectionCode::AssumptionViolation,
            detail,
        });
    }

    let mut warnings = Vec::new();
    let mut admissible: Vec<T> = slots.iter().map(|&(a, _)| a).collect();
    admissible.push(T::zero());
    let gap_floor = T::from_f64_lossy(EIGEN_SEPARATION_FACTOR) * tol.eigen;
    for i in 0..admissible.len() {
        for j in (i + 1)..admissible.len() {
            let gap = fabs(admissible[i] - admissible[j]);
            if gap <= gap_floor {
                warnings.push(SpecWarning::EigenvalueSeparation {
                    a: admissible[i].to_f64_lossy(),
                    b: admissible[j].to_f64_lossy(),
                    gap: gap.to_f64_lossy(),
                });
            }
        }
    }

    Ok(ClassSpec {
        eigenvalues: slots.iter().map(|&(a, _)| a).collect(),
        multiplicities: slots.iter().map(|&(_, n)| n).collect(),
        ambient_dim: raw.dim,
        kernel_dim,
        assumptions_hold,
        override_used: !assumptions_hold,
        warnings,
    })
}

/// A multiplicity-preserving permutation of the slots `0..=m`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymmetryPerm {
    mapping: Vec<usize>,
}

impl SymmetryPerm {
    pub fn identity(slot_count: usize) -> Self {
        SymmetryPerm {
            mapping: (0..slot_count).collect(),
        }
    }

    /// Build from an explicit slot mapping, checking it is a permutation
    /// that preserves the spec's multiplicities.
    pub fn new<T: Scalar>(mapping: Vec<usize>, spec: &ClassSpec<T>) -> Result<Self> {
        let m1 = spec.slot_count();
        if mapping.len() != m1 {
            return Err(Error::NotASymmetry);
        }
        let mut seen = vec![false; m1];
        for &s in &mapping {
            if s >= m1 || seen[s] {
                return Err(Error::NotASymmetry);
            }
            seen[s] = true;
        }
        for (i, &s) in mapping.iter().enumerate() {
            if spec.multiplicity(i) != spec.multiplicity(s) {
                return Err(Error::NotASymmetry);
            }
        }
        Ok(SymmetryPerm { mapping })
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn slot_count(&self) -> usize {
        self.mapping.len()
    }

    pub fn apply_slot(&self, slot: usize) -> usize {
        self.mapping[slot]
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &s)| i == s)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &s) in self.mapping.iter().enumerate() {
            inv[s] = i;
        }
        SymmetryPerm { mapping: inv }
    }

    /// Group product. Acting on partitions, the right factor applies first:
    /// `apply_symmetry(a.compose(&b), p) == apply_symmetry(a, apply_symmetry(b, p))`.
    pub fn compose(&self, other: &SymmetryPerm) -> Self {
        assert_eq!(self.mapping.len(), other.mapping.len());
        let mapping = (0..self.mapping.len())
            .map(|x| other.mapping[self.mapping[x]])
            .collect();
        SymmetryPerm { mapping }
    }

    /// The transposition of two slots (valid only when their multiplicities
    /// agree, which `new` checks).
    pub fn transposition<T: Scalar>(a: usize, b: usize, spec: &ClassSpec<T>) -> Result<Self> {
        let mut mapping: Vec<usize> = (0..spec.slot_count()).collect();
        mapping.swap(a, b);
        SymmetryPerm::new(mapping, spec)
    }
}

impl fmt::Display for SymmetryPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.mapping.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// All multiplicity-preserving slot permutations, in lexicographic order of
/// their mapping vectors. The identity always comes first.
pub fn symmetry_group<T: Scalar>(spec: &ClassSpec<T>) -> Result<Vec<SymmetryPerm>> {
    const GROUP_CAP: usize = 1 << 20;
    let m1 = spec.slot_count();
    let mut group = Vec::new();
    let mut used = vec![false; m1];
    let mut current = Vec::with_capacity(m1);
    fn rec<T: Scalar>(
        spec: &ClassSpec<T>,
        used: &mut Vec<bool>,
        current: &mut Vec<usize>,
        group: &mut Vec<SymmetryPerm>,
    ) -> Result<()> {
        let m1 = spec.slot_count();
        if current.len() == m1 {
            if group.len() >= GROUP_CAP {
                return Err(Error::UnsupportedSpec(
                    "symmetry group larger than the enumeration guard".into(),
                ));
            }
            group.push(SymmetryPerm {
                mapping: current.clone(),
            });
            return Ok(());
        }
        let i = current.len();
        for s in 0..m1 {
            if !used[s] && spec.multiplicity(i) == spec.multiplicity(s) {
                used[s] = true;
                current.push(s);
                rec(spec, used, current, group)?;
                current.pop();
                used[s] = false;
            }
        }
        Ok(())
    }
    rec(spec, &mut used, &mut current, &mut group)?;
    Ok(group)
}

/// Assignment of every basis index to a slot, with block sizes matching the
/// spec. Ordering is lexicographic in the underlying slot vector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledPartition {
    slot_of: Vec<usize>,
}

impl LabeledPartition {
    pub fn new<T: Scalar>(slot_of: Vec<usize>, spec: &ClassSpec<T>) -> Result<Self> {
        if slot_of.len() != spec.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "partition over {} indices, ambient dimension {}",
                slot_of.len(),
                spec.ambient_dim()
            )));
        }
        let mut counts = vec![0usize; spec.slot_count()];
        for &s in &slot_of {
            if s >= spec.slot_count() {
                return Err(Error::BlockSizeMismatch {
                    slot: s,
                    got: 0,
                    expected: 0,
                });
            }
            counts[s] += 1;
        }
        for (slot, &got) in counts.iter().enumerate() {
            let expected = spec.multiplicity(slot);
            if got != expected {
                return Err(Error::BlockSizeMismatch {
                    slot,
                    got,
                    expected,
                });
            }
        }
        Ok(LabeledPartition { slot_of })
    }

    pub(crate) fn from_slots_unchecked(slot_of: Vec<usize>) -> Self {
        LabeledPartition { slot_of }
    }

    pub fn len(&self) -> usize {
        self.slot_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slot_of.is_empty()
    }

    pub fn slot(&self, index: usize) -> usize {
        self.slot_of[index]
    }

    pub fn slot_of(&self) -> &[usize] {
        &self.slot_of
    }

    /// Indices of each slot block, kernel first.
    pub fn blocks(&self, slot_count: usize) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); slot_count];
        for (i, &s) in self.slot_of.iter().enumerate() {
            blocks[s].push(i);
        }
        blocks
    }

    /// Indices carrying a nonzero eigenvalue, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.slot_of
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s != 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn support_set(&self) -> BTreeSet<usize> {
        self.support().into_iter().collect()
    }

    /// Kernel indices, ascending.
    pub fn kernel(&self) -> Vec<usize> {
        self.slot_of
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s == 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Relabel indices: index `i` of the result carries the slot that
    /// `index_map[i]` carried here. `index_map` must be a bijection.
    pub fn permute_indices(&self, index_map: &[usize]) -> LabeledPartition {
        let slot_of = index_map.iter().map(|&j| self.slot_of[j]).collect();
        LabeledPartition { slot_of }
    }
}

/// Apply a slot symmetry to a partition.
///
/// The image assigns index `b` the slot `delta^{-1}(p.slot(b))`: the block
/// that carried eigenvalue slot `i` now carries slot `delta^{-1}(i)`, which
/// is exactly the partition of the operator with eigenvalue `alpha_i` on the
/// old block `X_{delta(i)}`.
pub fn apply_symmetry<T: Scalar>(
    delta: &SymmetryPerm,
    p: &LabeledPartition,
    spec: &ClassSpec<T>,
) -> Result<LabeledPartition> {
    if delta.slot_count() != spec.slot_count() {
        return Err(Error::NotASymmetry);
    }
    // Re-validate multiplicity preservation for externally built inputs.
    for (i, &s) in delta.mapping().iter().enumerate() {
        if spec.multiplicity(i) != spec.multiplicity(s) {
            return Err(Error::NotASymmetry);
        }
    }
    if p.len() != spec.ambient_dim() {
        return Err(Error::DimensionMismatch(
            "partition does not match the spec's ambient dimension".into(),
        ));
    }
    let inv = delta.inverse();
    let slot_of = p.slot_of().iter().map(|&s| inv.apply_slot(s)).collect();
    Ok(LabeledPartition::from_slots_unchecked(slot_of))
}

/// Number of labeled partitions: `dim! / (kernel! * prod multiplicities!)`.
pub fn apartment_size<T: Scalar>(spec: &ClassSpec<T>) -> u128 {
    let mut size: u128 = 1;
    let mut remaining = spec.ambient_dim();
    for slot in 0..spec.slot_count() {
        let n = spec.multiplicity(slot);
        size *= binomial(remaining, n);
        remaining -= n;
    }
    size
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    fn spec(eigenvalues: &[f64], multiplicities: &[usize], dim: usize) -> ClassSpec<f64> {
        validate_spec(
            &RawClassSpec {
                eigenvalues: eigenvalues.to_vec(),
                multiplicities: multiplicities.to_vec(),
                dim,
                allow_assumption_violation: false,
            },
            &tol(),
        )
        .unwrap()
    }

    /// Like `spec`, with the assumption override set; needed for rank-3
    /// classes at dimension 6.
    fn spec_over(eigenvalues: &[f64], multiplicities: &[usize], dim: usize) -> ClassSpec<f64> {
        validate_spec(
            &RawClassSpec {
                eigenvalues: eigenvalues.to_vec(),
                multiplicities: multiplicities.to_vec(),
                dim,
                allow_assumption_violation: true,
            },
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn accepts_distinct_simple_class_with_kernel_three() {
        let s = spec(&[1.0, 2.0], &[1, 1], 5);
        assert_eq!(s.kernel_dim(), 3);
        assert_eq!(s.rank(), 2);
        assert!(s.assumptions_hold());
        // Canonical order is descending.
        assert_eq!(s.eigenvalues(), &[2.0, 1.0]);
    }

    #[test]
    fn rejects_zero_eigenvalue() {
        let err = validate_spec(
            &RawClassSpec {
                eigenvalues: vec![1.0, 0.0],
                multiplicities: vec![1, 1],
                dim: 5,
                allow_assumption_violation: false,
            },
            &tol(),
        )
        .unwrap_err();
        match err {
            Error::InvalidSpec { code, .. } => assert_eq!(code, RejectionCode::ZeroEigenvalue),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn accepts_half_dimensional_rank_four() {
        let s = spec(&[1.0, 2.0, 3.0, 4.0], &[1, 1, 1, 1], 8);
        assert!(s.assumptions_hold());
        assert!(s.is_half_dimensional());
    }

    #[test]
    fn rejects_half_dimensional_rank_below_four_without_override() {
        let raw = RawClassSpec {
            eigenvalues: vec![1.0, 2.0, 3.0],
            multiplicities: vec![1, 1, 1],
            dim: 6,
            allow_assumption_violation: false,
        };
        let err = validate_spec(&raw, &tol()).unwrap_err();
        match err {
            Error::InvalidSpec { code, .. } => {
                assert_eq!(code, RejectionCode::AssumptionViolation)
            }
            other => panic!("unexpected error {other:?}"),
        }
        let raw = RawClassSpec {
            allow_assumption_violation: true,
            ..raw
        };
        let s = validate_spec(&raw, &tol()).unwrap();
        assert!(!s.assumptions_hold());
        assert!(s.override_used());
    }

    #[test]
    fn warns_on_close_eigenvalues() {
        let s = validate_spec(
            &RawClassSpec {
                eigenvalues: vec![1.0, 1.0 + 5e-8],
                multiplicities: vec![1, 1],
                dim: 5,
                allow_assumption_violation: false,
            },
            &tol(),
        )
        .unwrap();
        assert_eq!(s.warnings().len(), 1);
    }

    #[test]
    fn symmetry_group_sizes_match_multiplicity_collisions() {
        // Two simple eigenvalues: the swap of their slots is the only
        // nontrivial symmetry.
        let g = symmetry_group(&spec(&[1.0, 2.0], &[1, 1], 5)).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g[0].is_identity());

        // All multiplicities distinct: trivial group.
        let g = symmetry_group(&spec(&[1.0], &[2], 5)).unwrap();
        assert_eq!(g.len(), 1);

        // Projection of rank 4 in dimension 8: kernel and range swap.
        let g = symmetry_group(&spec(&[1.0], &[4], 8)).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[1].mapping(), &[1, 0]);

        // Four simple eigenvalues: full permutation group of slots 1..=4.
        let g = symmetry_group(&spec(&[1.0, 2.0, 3.0, 4.0], &[1, 1, 1, 1], 8)).unwrap();
        assert_eq!(g.len(), 24);

        // Two slots of multiplicity two over a four-dimensional kernel.
        let g = symmetry_group(&spec(&[1.0, 2.0], &[2, 2], 8)).unwrap();
        assert_eq!(g.len(), 2);

        // Multiplicities 3, 1, 2 pairwise distinct: trivial group.
        let g = symmetry_group(&spec_over(&[1.0, 2.0], &[1, 2], 6)).unwrap();
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn apply_symmetry_relabels_blocks() {
        let s = spec(&[1.0, 2.0], &[1, 1], 5);
        // Descending order puts 2 in slot 1 and 1 in slot 2.
        let p = LabeledPartition::new(vec![2, 1, 0, 0, 0], &s).unwrap();
        let swap = SymmetryPerm::transposition(1, 2, &s).unwrap();
        let q = apply_symmetry(&swap, &p, &s).unwrap();
        assert_eq!(q.slot_of(), &[1, 2, 0, 0, 0]);

        // Projection class: swapping slot 0 and 1 complements the support.
        let sp = spec(&[1.0], &[4], 8);
        let p = LabeledPartition::new(vec![1, 1, 1, 1, 0, 0, 0, 0], &sp).unwrap();
        let swap = SymmetryPerm::transposition(0, 1, &sp).unwrap();
        let q = apply_symmetry(&swap, &p, &sp).unwrap();
        assert_eq!(q.support(), vec![4, 5, 6, 7]);
    }

    #[test]
    fn compose_matches_sequential_application() {
        let s = spec(&[1.0, 2.0, 3.0, 4.0], &[1, 1, 1, 1], 8);
        let g = symmetry_group(&s).unwrap();
        let p = LabeledPartition::new(vec![1, 2, 3, 4, 0, 0, 0, 0], &s).unwrap();
        for a in g.iter().take(6) {
            for b in g.iter().take(6) {
                let lhs = apply_symmetry(&a.compose(b), &p, &s).unwrap();
                let rhs = apply_symmetry(a, &apply_symmetry(b, &p, &s).unwrap(), &s).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn apartment_sizes_are_multinomials() {
        assert_eq!(apartment_size(&spec(&[1.0, 2.0], &[1, 1], 5)), 20);
        assert_eq!(apartment_size(&spec(&[1.0], &[1], 3)), 3);
        assert_eq!(apartment_size(&spec(&[1.0, 2.0], &[2, 2], 8)), 420);
        assert_eq!(
            apartment_size(&spec(&[1.0, 2.0, 3.0, 4.0], &[1, 1, 1, 1], 8)),
            1680
        );
        assert_eq!(apartment_size(&spec(&[1.0, -1.0], &[2, 1], 7)), 105);
        assert_eq!(apartment_size(&spec(&[1.0], &[4], 8)), 70);
        assert_eq!(apartment_size(&spec_over(&[1.0, 2.0], &[1, 2], 6)), 60);
    }

    #[test]
    fn partition_validation_checks_block_sizes() {
        let s = spec(&[1.0, 2.0], &[1, 1], 5);
        assert!(LabeledPartition::new(vec![1, 1, 0, 0, 0], &s).is_err());
        assert!(LabeledPartition::new(vec![1, 2, 0, 0], &s).is_err());
        assert!(LabeledPartition::new(vec![1, 2, 0, 0, 0], &s).is_ok());
    }
}
