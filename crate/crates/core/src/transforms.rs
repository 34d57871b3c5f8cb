//! Model transformations and canonical-form extraction.
//!
//! A model map sends every member of one numeric apartment (plus optional
//! extra operators used as consistency checks) through
//!
//! ```text
//! f(A) = U tau(delta_A(A)) U*
//! ```
//!
//! where `U` is unitary, `tau` is entrywise conjugation when the map is
//! anti-unitary and the identity otherwise, and `delta_A` reshuffles
//! eigenspaces among equal-multiplicity slots. [`decompose_map`] inverts
//! this: given only input/output matrix pairs it recovers the base change
//! (up to global phase), the anti-unitary flag, and every `delta_A`, or
//! reports why the data cannot be of that form.

use nalgebra::DVector;
use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

use crate::apartments::collect_apartment;
use crate::error::{Error, Result};
use crate::matrixlab::{
    apply_symmetry_numeric, build_operator, commutator_norm, conj_matrix, conjugate,
    joint_eigenbasis, max_norm, random_unitary, random_unitary_seeded, Basis, CMat,
    HermitianOperator,
};
use crate::scalar::{fabs, Scalar};
use crate::spectra::{
    apartment_size, apply_symmetry, symmetry_group, ClassSpec, LabeledPartition, SymmetryPerm,
};
use crate::tol::ToleranceConfig;

/// Entries of the phase-constraint matrices below this modulus are too
/// small to divide by reliably and are skipped when linking phases.
const PHASE_EDGE_FLOOR: f64 = 1e-3;

/// Moduli of corresponding constraint entries must agree within this factor
/// times the decomposition tolerance before phases are even attempted.
const MODULUS_CHECK_FACTOR: f64 = 100.0;

/// Rule assigning a symmetry to each apartment member, in enumeration order.
#[derive(Clone, Debug, PartialEq)]
pub enum DeltaRule {
    Identity,
    Constant(SymmetryPerm),
    /// Seeded per-operator draws. Independent draws would collide two
    /// operators onto one image, so the draws are arranged per symmetry
    /// orbit: each orbit is sent onto itself by a uniformly random
    /// bijection, which keeps the induced apartment map bijective while
    /// still varying the symmetry from operator to operator.
    PerOperator {
        seed: u64,
    },
}

/// Seeds and knobs for [`ModelMap::seeded`].
#[derive(Clone, Debug)]
pub struct GeneratorParams {
    pub basis_seed: u64,
    pub unitary_seed: u64,
    pub antiunitary: bool,
    pub delta: DeltaRule,
    pub consistency_ops: usize,
    pub consistency_seed: u64,
}

/// A transformation in canonical form, known by construction.
#[derive(Clone, Debug)]
pub struct ModelMap<T: Scalar> {
    spec: ClassSpec<T>,
    apartment_basis: Basis<T>,
    unitary: Basis<T>,
    antiunitary: bool,
    rule: DeltaRule,
    consistency: Vec<(Basis<T>, LabeledPartition)>,
}

/// The raw material a decomposition works from: the class and the
/// input/output matrix pairs, apartment members first (in enumeration
/// order of their partitions is not required), then consistency operators.
#[derive(Clone, Debug)]
pub struct MapInput<T: Scalar> {
    pub spec: ClassSpec<T>,
    pub pairs: Vec<(HermitianOperator<T>, HermitianOperator<T>)>,
}

/// Recovered canonical form. `per_operator_perm` is aligned with the input
/// pair order; `residual` is the worst max-norm reconstruction error.
#[derive(Clone, Debug)]
pub struct Decomposition<T: Scalar> {
    pub unitary: Basis<T>,
    pub antiunitary: bool,
    /// Set when no consistency operator pinned the flag down: both the
    /// unitary and the anti-unitary reading reproduce the data, and the
    /// unitary one is reported.
    pub flag_ambiguous: bool,
    pub per_operator_perm: Vec<SymmetryPerm>,
    /// Set when several symmetries matched some operator; the
    /// lexicographically smallest is reported.
    pub delta_ambiguous: bool,
    pub residual: T,
}

pub fn make_model_map<T: Scalar>(
    spec: &ClassSpec<T>,
    apartment_basis: Basis<T>,
    unitary: Basis<T>,
    antiunitary: bool,
    rule: DeltaRule,
    consistency: Vec<(Basis<T>, LabeledPartition)>,
) -> Result<ModelMap<T>> {
    let n = spec.ambient_dim();
    if apartment_basis.dim() != n || unitary.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "bases of dimension {} and {} for ambient dimension {n}",
            apartment_basis.dim(),
            unitary.dim()
        )));
    }
    if let DeltaRule::Constant(sigma) = &rule {
        SymmetryPerm::new(sigma.mapping().to_vec(), spec)?;
    }
    for (basis, part) in &consistency {
        if basis.dim() != n {
            return Err(Error::DimensionMismatch(
                "consistency basis dimension differs from the spec".into(),
            ));
        }
        LabeledPartition::new(part.slot_of().to_vec(), spec)?;
    }
    Ok(ModelMap {
        spec: spec.clone(),
        apartment_basis,
        unitary,
        antiunitary,
        rule,
        consistency,
    })
}

impl<T: Scalar> ModelMap<T> {
    /// Draw a full model map from seeds: apartment basis, base change, and
    /// `consistency_ops` extra operators in independent random bases.
    pub fn seeded(
        spec: &ClassSpec<T>,
        params: &GeneratorParams,
        tol: &ToleranceConfig<T>,
    ) -> Result<Self> {
        let n = spec.ambient_dim();
        let apartment_basis = random_unitary_seeded(n, params.basis_seed, tol.unitarity)?;
        let unitary = random_unitary_seeded(n, params.unitary_seed, tol.unitarity)?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.consistency_seed);
        let mut consistency = Vec::with_capacity(params.consistency_ops);
        let mut template = Vec::with_capacity(n);
        for slot in 0..spec.slot_count() {
            template.extend(std::iter::repeat_n(slot, spec.multiplicity(slot)));
        }
        for _ in 0..params.consistency_ops {
            let basis = random_unitary(n, &mut rng, tol.unitarity)?;
            let mut slots = template.clone();
            slots.shuffle(&mut rng);
            consistency.push((basis, LabeledPartition::new(slots, spec)?));
        }
        make_model_map(
            spec,
            apartment_basis,
            unitary,
            params.antiunitary,
            params.delta.clone(),
            consistency,
        )
    }

    pub fn spec(&self) -> &ClassSpec<T> {
        &self.spec
    }

    pub fn apartment_basis(&self) -> &Basis<T> {
        &self.apartment_basis
    }

    pub fn unitary(&self) -> &Basis<T> {
        &self.unitary
    }

    pub fn antiunitary(&self) -> bool {
        self.antiunitary
    }

    pub fn rule(&self) -> &DeltaRule {
        &self.rule
    }

    pub fn consistency(&self) -> &[(Basis<T>, LabeledPartition)] {
        &self.consistency
    }

    /// Ground-truth symmetry per apartment member, in enumeration order.
    /// Consistency operators are always mapped with the identity symmetry.
    pub fn deltas(&self, cap: usize) -> Result<Vec<SymmetryPerm>> {
        delta_assignments(&self.spec, &self.rule, cap)
    }

    /// Realize the map as matrix pairs: the full apartment in enumeration
    /// order, then the consistency operators.
    pub fn realize(&self, tol: &ToleranceConfig<T>, cap: usize) -> Result<MapInput<T>> {
        let apartment = collect_apartment(&self.spec, cap)?;
        let deltas = self.deltas(cap)?;
        let mut pairs = Vec::with_capacity(apartment.len() + self.consistency.len());
        for (p, delta) in apartment.iter().zip(&deltas) {
            let input = build_operator(&self.apartment_basis, p, &self.spec, tol)?;
            let twisted = apply_symmetry(delta, p, &self.spec)?;
            let moved = build_operator(&self.apartment_basis, &twisted, &self.spec, tol)?;
            let output = conjugate(&moved, &self.unitary, self.antiunitary, tol)?;
            pairs.push((input, output));
        }
        for (basis, part) in &self.consistency {
            let input = build_operator(basis, part, &self.spec, tol)?;
            let output = conjugate(&input, &self.unitary, self.antiunitary, tol)?;
            pairs.push((input, output));
        }
        Ok(MapInput {
            spec: self.spec.clone(),
            pairs,
        })
    }
}

/// Symmetries assigned by a rule to the apartment in enumeration order.
pub fn delta_assignments<T: Scalar>(
    spec: &ClassSpec<T>,
    rule: &DeltaRule,
    cap: usize,
) -> Result<Vec<SymmetryPerm>> {
    let apartment = collect_apartment(spec, cap)?;
    match rule {
        DeltaRule::Identity => Ok(vec![
            SymmetryPerm::identity(spec.slot_count());
            apartment.len()
        ]),
        DeltaRule::Constant(sigma) => {
            let sigma = SymmetryPerm::new(sigma.mapping().to_vec(), spec)?;
            Ok(vec![sigma; apartment.len()])
        }
        DeltaRule::PerOperator { seed } => {
            let group = symmetry_group(spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut orbit_shuffles: BTreeMap<LabeledPartition, Vec<usize>> = BTreeMap::new();
            let mut out = Vec::with_capacity(apartment.len());
            for p in &apartment {
                let mut representative = p.clone();
                for g in &group {
                    let moved = apply_symmetry(g, p, spec)?;
                    if moved < representative {
                        representative = moved;
                    }
                }
                if !orbit_shuffles.contains_key(&representative) {
                    let mut images: Vec<usize> = (0..group.len()).collect();
                    images.shuffle(&mut rng);
                    orbit_shuffles.insert(representative.clone(), images);
                }
                let images = &orbit_shuffles[&representative];
                let mut gamma_idx = None;
                for (idx, g) in group.iter().enumerate() {
                    if apply_symmetry(g, &representative, spec)? == *p {
                        gamma_idx = Some(idx);
                        break;
                    }
                }
                let gamma_idx = gamma_idx.expect("every member lies in its own orbit");
                let delta = group[images[gamma_idx]].compose(&group[gamma_idx].inverse());
                out.push(delta);
            }
            Ok(out)
        }
    }
}

/// One pair whose commutation status changed under the map.
#[derive(Clone, Debug, Serialize)]
pub struct CommutViolation<T> {
    pub s: usize,
    pub t: usize,
    pub input_norm: T,
    pub output_norm: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutReport<T> {
    pub checked: u64,
    pub violations: Vec<CommutViolation<T>>,
    pub pass: bool,
}

/// Check that commutation survives the map in both directions, either over
/// all pairs (`sample = None`) or over `count` seeded draws.
pub fn check_commutativity_preserving<T: Scalar>(
    input: &MapInput<T>,
    sample: Option<(usize, u64)>,
    tol: &ToleranceConfig<T>,
) -> Result<CommutReport<T>> {
    let m = input.pairs.len();
    let mut picks: Vec<(usize, usize)> = Vec::new();
    match sample {
        None => {
            for s in 0..m {
                for t in (s + 1)..m {
                    picks.push((s, t));
                }
            }
        }
        Some((count, seed)) => {
            if m >= 2 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                while picks.len() < count {
                    let s = rng.gen_range(0..m);
                    let t = rng.gen_range(0..m);
                    if s != t {
                        picks.push((s.min(t), s.max(t)));
                    }
                }
            }
        }
    }
    let mut violations = Vec::new();
    for &(s, t) in &picks {
        let input_norm = commutator_norm(&input.pairs[s].0, &input.pairs[t].0)?;
        let output_norm = commutator_norm(&input.pairs[s].1, &input.pairs[t].1)?;
        if (input_norm <= tol.predicate) != (output_norm <= tol.predicate) {
            violations.push(CommutViolation {
                s,
                t,
                input_norm,
                output_norm,
            });
        }
    }
    Ok(CommutReport {
        checked: picks.len() as u64,
        pass: violations.is_empty(),
        violations,
    })
}

/// Members of `family` whose support equals the target's, computed both
/// from the definition (double orthocomplement inside the family, with
/// orthogonality read off supports) and directly; the two must agree.
///
/// Disagreement means the family is not closed enough for the double
/// orthocomplement to collapse onto the support class and is reported as
/// an error rather than silently picking one answer.
pub fn biorthogonal_closure(
    target: &LabeledPartition,
    family: &[LabeledPartition],
) -> Result<Vec<usize>> {
    let target_support = target.support_set();
    let disjoint = |a: &BTreeSet<usize>, b: &BTreeSet<usize>| a.intersection(b).next().is_none();
    let supports: Vec<BTreeSet<usize>> = family.iter().map(|p| p.support_set()).collect();
    let perp: Vec<usize> = (0..family.len())
        .filter(|&i| disjoint(&supports[i], &target_support))
        .collect();
    let definitional: Vec<usize> = (0..family.len())
        .filter(|&i| perp.iter().all(|&j| disjoint(&supports[i], &supports[j])))
        .collect();
    let direct: Vec<usize> = (0..family.len())
        .filter(|&i| supports[i] == target_support)
        .collect();
    if definitional != direct {
        return Err(Error::BiorthogonalMismatch(format!(
            "double orthocomplement keeps {} members, direct support match {}",
            definitional.len(),
            direct.len()
        )));
    }
    Ok(direct)
}

/// The support-level map induced by entry pairs, keyed by sorted support.
///
/// Two entries with equal input supports must have equal image supports;
/// otherwise the map cannot be orthogonality preserving and the offending
/// entry indices are reported.
pub fn induced_grassmann_map(
    entries: &[(LabeledPartition, LabeledPartition)],
) -> Result<BTreeMap<Vec<usize>, Vec<usize>>> {
    let mut map: BTreeMap<Vec<usize>, (Vec<usize>, usize)> = BTreeMap::new();
    for (idx, (src, dst)) in entries.iter().enumerate() {
        let key = src.support();
        let image = dst.support();
        match map.get(&key) {
            None => {
                map.insert(key, (image, idx));
            }
            Some((existing, first_idx)) => {
                if *existing != image {
                    return Err(Error::IllDefinedSupportMap {
                        a: *first_idx,
                        b: idx,
                    });
                }
            }
        }
    }
    Ok(map.into_iter().map(|(k, (v, _))| (k, v)).collect())
}

/// Max-norm distance between `b` and `a` after aligning the global phase
/// of `a` to `b` at the entry where `a` is largest.
pub fn phase_aligned_distance<T: Scalar>(a: &CMat<T>, b: &CMat<T>) -> Result<T> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(
            "phase comparison of differently shaped matrices".into(),
        ));
    }
    let mut best = (0usize, 0usize);
    let mut best_norm = T::zero();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let v = a[(i, j)].norm();
            if v > best_norm {
                best_norm = v;
                best = (i, j);
            }
        }
    }
    if best_norm == T::zero() {
        return Ok(max_norm(b));
    }
    let raw = b[best] / a[best];
    let modulus = raw.norm();
    let phase = if modulus == T::zero() {
        Complex::new(T::one(), T::zero())
    } else {
        raw / modulus
    };
    Ok(max_norm(&(b - a * phase)))
}

fn first_noncommuting<T: Scalar, F>(
    count: usize,
    op: F,
    tol: &ToleranceConfig<T>,
) -> Option<(usize, usize, T)>
where
    F: Fn(usize) -> HermitianOperator<T>,
{
    for s in 0..count {
        for t in (s + 1)..count {
            if let Ok(norm) = commutator_norm(&op(s), &op(t)) {
                if norm > tol.predicate {
                    return Some((s, t, norm));
                }
            }
        }
    }
    None
}

/// Extend `theta` so that `theta[a] * conj(theta[b]) * t[(a,b)] = r[(a,b)]`
/// wherever the entries are significant. Returns false when moduli differ
/// or the phase constraints close a cycle inconsistently; on success newly
/// reachable phases are filled in and existing ones are untouched.
fn merge_phase_constraints<T: Scalar>(
    r: &CMat<T>,
    t: &CMat<T>,
    theta: &mut [Option<Complex<T>>],
    tol: &ToleranceConfig<T>,
) -> bool {
    let n = theta.len();
    let mod_tol = T::from_f64_lossy(MODULUS_CHECK_FACTOR) * tol.decompose;
    let edge_floor = T::from_f64_lossy(PHASE_EDGE_FLOOR);
    for a in 0..n {
        for b in 0..n {
            if fabs(r[(a, b)].norm() - t[(a, b)].norm()) > mod_tol {
                return false;
            }
        }
    }
    for a in 0..n {
        if (r[(a, a)] - t[(a, a)]).norm() > mod_tol {
            return false;
        }
    }
    let mut work: Vec<Option<Complex<T>>> = theta.to_vec();
    loop {
        loop {
            let mut changed = false;
            for a in 0..n {
                for b in 0..n {
                    if a == b || t[(a, b)].norm() < edge_floor {
                        continue;
                    }
                    let ratio = r[(a, b)] / t[(a, b)];
                    match (work[a], work[b]) {
                        (Some(ta), None) => {
                            let v = ratio.conj() * ta;
                            work[b] = Some(v / v.norm());
                            changed = true;
                        }
                        (None, Some(tb)) => {
                            let v = ratio * tb;
                            work[a] = Some(v / v.norm());
                            changed = true;
                        }
                        (Some(ta), Some(tb)) => {
                            if (ta * tb.conj() * t[(a, b)] - r[(a, b)]).norm() > mod_tol {
                                return false;
                            }
                        }
                        (None, None) => {}
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let unseeded = (0..n).find(|&a| {
            work[a].is_none() && (0..n).any(|b| b != a && t[(a, b)].norm() >= edge_floor)
        });
        match unseeded {
            Some(a) => work[a] = Some(Complex::new(T::one(), T::zero())),
            None => break,
        }
    }
    theta.copy_from_slice(&work);
    true
}

struct FlagAttempt<T: Scalar> {
    unitary: Basis<T>,
    consist_deltas: Vec<usize>,
    residual: T,
}

struct FlagSearch<'a, T: Scalar> {
    spec: &'a ClassSpec<T>,
    tol: &'a ToleranceConfig<T>,
    b_in: &'a Basis<T>,
    v: &'a CMat<T>,
    apart: &'a [(HermitianOperator<T>, HermitianOperator<T>)],
    consist: &'a [(HermitianOperator<T>, HermitianOperator<T>)],
    p_in: &'a [LabeledPartition],
    apartment_deltas: &'a [SymmetryPerm],
    group: &'a [SymmetryPerm],
    /// `twists[a][g]` is the `a`-th consistency input twisted by group
    /// element `g`; `s_mats[a][g]` its matrix in the input eigenbasis.
    twists: &'a [Vec<HermitianOperator<T>>],
    s_mats: &'a [Vec<CMat<T>>],
    r_mats: &'a [CMat<T>],
}

impl<T: Scalar> FlagSearch<'_, T> {
    fn attempt(&self, flag: bool) -> Result<Option<FlagAttempt<T>>> {
        let n = self.spec.ambient_dim();
        let mut theta: Vec<Option<Complex<T>>> = vec![None; n];
        let mut consist_deltas = Vec::with_capacity(self.consist.len());
        for (a_idx, _) in self.consist.iter().enumerate() {
            let r = &self.r_mats[a_idx];
            let mut committed = None;
            for g_idx in 0..self.group.len() {
                let t_mat = if flag {
                    conj_matrix(&self.s_mats[a_idx][g_idx])
                } else {
                    self.s_mats[a_idx][g_idx].clone()
                };
                let mut tentative = theta.clone();
                if merge_phase_constraints(r, &t_mat, &mut tentative, self.tol) {
                    committed = Some((g_idx, tentative));
                    break;
                }
            }
            match committed {
                Some((g_idx, new_theta)) => {
                    theta = new_theta;
                    consist_deltas.push(g_idx);
                }
                None => return Ok(None),
            }
        }
        let one = Complex::new(T::one(), T::zero());
        let phases: Vec<Complex<T>> = theta.into_iter().map(|p| p.unwrap_or(one)).collect();
        let theta_diag = CMat::<T>::from_diagonal(&DVector::from_vec(phases));
        let tau_b_adjoint = if flag {
            self.b_in.columns().transpose()
        } else {
            self.b_in.columns().adjoint()
        };
        let u_mat = self.v * theta_diag * tau_b_adjoint;
        let unitary = Basis::new(u_mat, self.tol.unitarity)?;

        let mut residual = T::zero();
        for (t_idx, (_, out)) in self.apart.iter().enumerate() {
            let twisted =
                apply_symmetry(&self.apartment_deltas[t_idx], &self.p_in[t_idx], self.spec)?;
            let moved = build_operator(self.b_in, &twisted, self.spec, self.tol)?;
            let image = conjugate(&moved, &unitary, flag, self.tol)?;
            let err = max_norm(&(image.matrix() - out.matrix()));
            if err > residual {
                residual = err;
            }
        }
        for (a_idx, (_, out)) in self.consist.iter().enumerate() {
            let moved = &self.twists[a_idx][consist_deltas[a_idx]];
            let image = conjugate(moved, &unitary, flag, self.tol)?;
            let err = max_norm(&(image.matrix() - out.matrix()));
            if err > residual {
                residual = err;
            }
        }
        if residual <= self.tol.decompose {
            Ok(Some(FlagAttempt {
                unitary,
                consist_deltas,
                residual,
            }))
        } else {
            Ok(None)
        }
    }
}

/// Recover the canonical form of a map given as matrix pairs.
///
/// The first `apartment_size(spec)` pairs must realize one full apartment
/// (in any order); later pairs are consistency operators. The pipeline:
/// joint eigenbases of both sides, partition recovery, the induced support
/// map, an index correspondence from fused-pair fingerprints, per-operator
/// symmetries by lexicographic scan, and a base change whose column phases
/// are linked through the consistency operators, tried with the
/// anti-unitary flag unset and then set.
pub fn decompose_map<T: Scalar>(
    input: &MapInput<T>,
    tol: &ToleranceConfig<T>,
    seed: u64,
) -> Result<Decomposition<T>> {
    let spec = &input.spec;
    let n = spec.ambient_dim();
    let total = usize::try_from(apartment_size(spec)).map_err(|_| {
        Error::IncompleteDomain("apartment too large to present as matrix pairs".into())
    })?;
    if input.pairs.len() < total {
        return Err(Error::IncompleteDomain(format!(
            "{} pairs cannot cover an apartment of size {total}",
            input.pairs.len()
        )));
    }
    for (idx, (a, b)) in input.pairs.iter().enumerate() {
        if a.dim() != n || b.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "pair {idx} has dimensions {}x{}, spec demands {n}",
                a.dim(),
                b.dim()
            )));
        }
    }
    let (apart, consist) = input.pairs.split_at(total);

    let inputs: Vec<HermitianOperator<T>> = apart.iter().map(|(a, _)| a.clone()).collect();
    let b_in = joint_eigenbasis(&inputs, seed, tol).map_err(|e| {
        match first_noncommuting(total, |i| apart[i].0.clone(), tol) {
            Some((s, t, norm)) => Error::SpecMismatch(format!(
                "input operators {s} and {t} do not commute (commutator norm {:.3e})",
                norm.to_f64_lossy()
            )),
            None => e,
        }
    })?;
    let mut p_in = Vec::with_capacity(total);
    for (idx, (a, _)) in apart.iter().enumerate() {
        let p = recover_input_partition(a, &b_in, spec, tol, idx)?;
        p_in.push(p);
    }
    let full: BTreeSet<LabeledPartition> = collect_apartment(spec, total)?.into_iter().collect();
    let in_set: BTreeSet<LabeledPartition> = p_in.iter().cloned().collect();
    if in_set.len() != total || in_set != full {
        return Err(Error::IncompleteDomain(
            "input operators do not form one full apartment".into(),
        ));
    }

    let outputs: Vec<HermitianOperator<T>> = apart.iter().map(|(_, b)| b.clone()).collect();
    let b_out =
        joint_eigenbasis(&outputs, seed.wrapping_add(1), tol).map_err(
            |e| match first_noncommuting(total, |i| apart[i].1.clone(), tol) {
                Some((s, t, norm)) => Error::MapHypothesisViolation {
                    detail: format!(
                        "images of commuting operators do not commute (commutator norm {:.3e})",
                        norm.to_f64_lossy()
                    ),
                    witness: Some((s, t)),
                },
                None => e,
            },
        )?;
    let mut p_out = Vec::with_capacity(total);
    for (idx, (_, b)) in apart.iter().enumerate() {
        let p =
            crate::matrixlab::recover_partition(b, &b_out, spec, tol.predicate).map_err(|e| {
                Error::MapHypothesisViolation {
                    detail: format!(
                        "image {idx} is not a class member of the image apartment: {e}"
                    ),
                    witness: None,
                }
            })?;
        p_out.push(p);
    }
    let out_set: BTreeSet<LabeledPartition> = p_out.iter().cloned().collect();
    if out_set.len() != total {
        let mut seen: BTreeMap<&LabeledPartition, usize> = BTreeMap::new();
        for (idx, p) in p_out.iter().enumerate() {
            if let Some(&first) = seen.get(p) {
                return Err(Error::MapHypothesisViolation {
                    detail: "two operators share one image; the map is not injective".into(),
                    witness: Some((first, idx)),
                });
            }
            seen.insert(p, idx);
        }
    }
    if out_set != full {
        return Err(Error::MapHypothesisViolation {
            detail: "images do not fill the image apartment".into(),
            witness: None,
        });
    }

    let entries: Vec<(LabeledPartition, LabeledPartition)> =
        p_in.iter().cloned().zip(p_out.iter().cloned()).collect();
    induced_grassmann_map(&entries).map_err(|e| match e {
        Error::IllDefinedSupportMap { a, b } => Error::MapHypothesisViolation {
            detail: "equal supports map to different supports".into(),
            witness: Some((a, b)),
        },
        other => other,
    })?;

    let pi = index_correspondence(n, total, &p_in, &p_out)?;

    let group = symmetry_group(spec)?;
    let mut apartment_deltas = Vec::with_capacity(total);
    let mut delta_ambiguous = false;
    for t in 0..total {
        let slots: Vec<usize> = (0..n).map(|b| p_out[t].slot(pi[b])).collect();
        let pulled = LabeledPartition::new(slots, spec).map_err(|_| Error::OutOfForm {
            operator_index: Some(t),
            detail: "pulled-back image partition does not fit the spec".into(),
        })?;
        let mut matched: Option<SymmetryPerm> = None;
        for g in &group {
            if apply_symmetry(g, &p_in[t], spec)? == pulled {
                if matched.is_none() {
                    matched = Some(g.clone());
                } else {
                    delta_ambiguous = true;
                }
            }
        }
        let delta = matched.ok_or_else(|| Error::OutOfForm {
            operator_index: Some(t),
            detail: "no slot symmetry links the operator to its image".into(),
        })?;
        apartment_deltas.push(delta);
    }

    let mut v = CMat::<T>::zeros(n, n);
    for (b, &src) in pi.iter().enumerate() {
        v.set_column(b, &b_out.columns().column(src));
    }

    let mut twists: Vec<Vec<HermitianOperator<T>>> = Vec::with_capacity(consist.len());
    let mut s_mats: Vec<Vec<CMat<T>>> = Vec::with_capacity(consist.len());
    let mut r_mats: Vec<CMat<T>> = Vec::with_capacity(consist.len());
    let b_in_adjoint = b_in.columns().adjoint();
    let v_adjoint = v.adjoint();
    for (a_idx, (c, c_out)) in consist.iter().enumerate() {
        let mut per_group = Vec::with_capacity(group.len());
        let mut per_group_s = Vec::with_capacity(group.len());
        for g in &group {
            let twisted = apply_symmetry_numeric(c, g, spec, tol).map_err(|e| {
                Error::SpecMismatch(format!(
                    "consistency operator {a_idx} is not a class member: {e}"
                ))
            })?;
            per_group_s.push(&b_in_adjoint * twisted.matrix() * b_in.columns());
            per_group.push(twisted);
        }
        twists.push(per_group);
        s_mats.push(per_group_s);
        r_mats.push(&v_adjoint * c_out.matrix() * &v);
    }

    let search = FlagSearch {
        spec,
        tol,
        b_in: &b_in,
        v: &v,
        apart,
        consist,
        p_in: &p_in,
        apartment_deltas: &apartment_deltas,
        group: &group,
        twists: &twists,
        s_mats: &s_mats,
        r_mats: &r_mats,
    };
    let plain = search.attempt(false)?;
    let conjugated = search.attempt(true)?;
    let (attempt, antiunitary, flag_ambiguous) = match (plain, conjugated) {
        (Some(p), Some(_)) => (p, false, true),
        (Some(p), None) => (p, false, false),
        (None, Some(c)) => (c, true, false),
        (None, None) => {
            return Err(Error::OutOfForm {
                operator_index: None,
                detail: "no unitary or anti-unitary base change reproduces the images".into(),
            })
        }
    };
    let mut per_operator_perm = apartment_deltas;
    for &g_idx in &attempt.consist_deltas {
        per_operator_perm.push(group[g_idx].clone());
    }
    Ok(Decomposition {
        unitary: attempt.unitary,
        antiunitary,
        flag_ambiguous,
        per_operator_perm,
        delta_ambiguous,
        residual: attempt.residual,
    })
}

fn recover_input_partition<T: Scalar>(
    a: &HermitianOperator<T>,
    basis: &Basis<T>,
    spec: &ClassSpec<T>,
    tol: &ToleranceConfig<T>,
    idx: usize,
) -> Result<LabeledPartition> {
    crate::matrixlab::recover_partition(a, basis, spec, tol.predicate).map_err(|e| {
        Error::SpecMismatch(format!(
            "input operator {idx} is not a class member of its apartment: {e}"
        ))
    })
}

/// Match fused-pair fingerprints across the two apartments and read off the
/// index bijection they induce.
fn index_correspondence(
    n: usize,
    total: usize,
    p_in: &[LabeledPartition],
    p_out: &[LabeledPartition],
) -> Result<Vec<usize>> {
    let fingerprint = |ps: &[LabeledPartition], i: usize, j: usize| -> Vec<u64> {
        let mut bits = vec![0u64; total.div_ceil(64)];
        for (t, p) in ps.iter().enumerate() {
            if p.slot(i) == p.slot(j) {
                bits[t / 64] |= 1 << (t % 64);
            }
        }
        bits
    };
    let mut out_pairs: BTreeMap<Vec<u64>, (usize, usize)> = BTreeMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if out_pairs.insert(fingerprint(p_out, i, j), (i, j)).is_some() {
                return Err(Error::Numerical(
                    "two image index pairs share a fused-pair fingerprint".into(),
                ));
            }
        }
    }
    let mut matched: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let fp = fingerprint(p_in, i, j);
            let image = out_pairs.get(&fp).ok_or_else(|| Error::OutOfForm {
                operator_index: None,
                detail: format!("no image index pair matches the fused pattern of ({i},{j})"),
            })?;
            matched.insert((i, j), *image);
        }
    }
    let mut pi = vec![usize::MAX; n];
    for (i, target) in pi.iter_mut().enumerate() {
        let mut candidates: Option<BTreeSet<usize>> = None;
        for j in 0..n {
            if i == j {
                continue;
            }
            let key = (i.min(j), i.max(j));
            let (a, b) = matched[&key];
            let image: BTreeSet<usize> = [a, b].into_iter().collect();
            candidates = Some(match candidates {
                None => image,
                Some(prev) => prev.intersection(&image).copied().collect(),
            });
        }
        let candidates = candidates.expect("ambient dimension is at least 3");
        if candidates.len() != 1 {
            return Err(Error::OutOfForm {
                operator_index: None,
                detail: format!("index {i} has no unique image under the pair correspondence"),
            });
        }
        *target = *candidates.iter().next().expect("one candidate");
    }
    let distinct: BTreeSet<usize> = pi.iter().copied().collect();
    if distinct.len() != n {
        return Err(Error::OutOfForm {
            operator_index: None,
            detail: "pair correspondence does not induce an index bijection".into(),
        });
    }
    for (&(i, j), &(a, b)) in &matched {
        let expect = (pi[i].min(pi[j]), pi[i].max(pi[j]));
        if expect != (a, b) {
            return Err(Error::OutOfForm {
                operator_index: None,
                detail: format!("pair ({i},{j}) maps inconsistently with the index bijection"),
            });
        }
    }
    Ok(pi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionBranch {
    Direct,
    Complement,
}

/// Decomposition of a scaled-projection-class map at half dimension,
/// with each operator classified by whether its image keeps the support
/// (direct) or swaps range and kernel (complement).
#[derive(Clone, Debug)]
pub struct ProjectionAnalysis<T: Scalar> {
    pub unitary: Basis<T>,
    pub antiunitary: bool,
    pub branches: Vec<ProjectionBranch>,
    pub residual: T,
}

pub fn projection_case_analyzer<T: Scalar>(
    input: &MapInput<T>,
    tol: &ToleranceConfig<T>,
    seed: u64,
) -> Result<ProjectionAnalysis<T>> {
    let spec = &input.spec;
    if !spec.is_scaled_projection() || !spec.is_half_dimensional() || spec.rank() < 4 {
        return Err(Error::UnsupportedSpec(
            "projection-branch analysis applies to scaled projection classes at half dimension with rank at least 4".into(),
        ));
    }
    let decomposition = decompose_map(input, tol, seed)?;
    let swap = SymmetryPerm::transposition(0, 1, spec)?;
    let mut branches = Vec::with_capacity(decomposition.per_operator_perm.len());
    for (idx, delta) in decomposition.per_operator_perm.iter().enumerate() {
        if delta.is_identity() {
            branches.push(ProjectionBranch::Direct);
        } else if *delta == swap {
            branches.push(ProjectionBranch::Complement);
        } else {
            return Err(Error::OutOfForm {
                operator_index: Some(idx),
                detail: "projection-class symmetry is neither identity nor the kernel swap".into(),
            });
        }
    }
    Ok(ProjectionAnalysis {
        unitary: decomposition.unitary,
        antiunitary: decomposition.antiunitary,
        branches,
        residual: decomposition.residual,
    })
}
