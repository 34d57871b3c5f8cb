//! Verification suites behind `verify --lemma <name>`.
//!
//! Each suite turns one structural statement into exhaustive or seeded
//! checks over a concrete class, returning counters and counterexample
//! witnesses instead of asserting. Hypothesis mismatches between the suite
//! and the class surface as `UnsupportedSpec`, i.e. exit code 2.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use apartmentlab::apartments::{
    classify_pair, collect_apartment, fused_pairs, in_a_ij, maximal_inexact_subsets, pair_family,
    PairClass, PairIndex,
};
use apartmentlab::error::{Error, Result};
use apartmentlab::matrixlab::{build_operator, max_norm, Basis};
use apartmentlab::spectra::{ClassSpec, LabeledPartition, SymmetryPerm};
use apartmentlab::structure::{
    choose_representatives_for_charad, count_large_special_subfamilies,
    detect_orthogonality_structural, range_alternative_check, range_chain, ApartmentMap,
};
use apartmentlab::wire::partition_to_wire;
use apartmentlab::Tolerances64;

use crate::RunConfig;

pub const LEMMA_NAMES: [&str; 8] = [
    "in",
    "ad",
    "orth",
    "nonorth",
    "same-im",
    "ortho-pres",
    "char-ad",
    "alter",
];

/// Apartments up to this size are checked pair-exhaustively when no
/// explicit `--samples` is given.
pub const EXHAUSTIVE_LIMIT: usize = 500;

const MAX_WITNESSES: usize = 32;

pub struct SuiteOutcome {
    pub pass: bool,
    pub counters: BTreeMap<String, u64>,
    pub witnesses: Vec<Value>,
}

impl SuiteOutcome {
    fn new() -> Self {
        SuiteOutcome {
            pass: true,
            counters: BTreeMap::new(),
            witnesses: Vec::new(),
        }
    }

    fn add(&mut self, key: &str, n: u64) {
        *self.counters.entry(key.to_string()).or_insert(0) += n;
    }

    fn fail(&mut self, witness: Value) {
        self.pass = false;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(witness);
        }
    }
}

pub fn run_suite(
    lemma: &str,
    spec: &ClassSpec<f64>,
    cfg: &RunConfig,
    tol: &Tolerances64,
) -> Result<SuiteOutcome> {
    match lemma {
        "in" => suite_in(spec, cfg, tol),
        "ad" => suite_ad(spec, cfg),
        "orth" => suite_orth(spec, cfg),
        "nonorth" => suite_nonorth(spec, cfg),
        "same-im" => suite_same_im(spec, cfg),
        "ortho-pres" => suite_ortho_pres(spec, cfg),
        "char-ad" => suite_char_ad(spec, cfg),
        "alter" => suite_alter(spec, cfg),
        other => Err(Error::MalformedInput(format!(
            "unknown lemma {other:?}; expected one of {}",
            LEMMA_NAMES.join(", ")
        ))),
    }
}

fn pair(i: usize, j: usize) -> PairIndex {
    PairIndex::new(i, j).expect("distinct indices")
}

fn wire(p: &LabeledPartition, spec: &ClassSpec<f64>) -> Value {
    json!(partition_to_wire(p, spec.slot_count()))
}

/// Index pairs to check: all of them for small apartments, seeded draws
/// otherwise or when a sample count is requested explicitly.
fn distinct_pairs(len: usize, samples: Option<usize>, seed: u64) -> Vec<(usize, usize)> {
    if len < 2 {
        return Vec::new();
    }
    if samples.is_none() && len <= EXHAUSTIVE_LIMIT {
        let mut picks = Vec::with_capacity(len * (len - 1) / 2);
        for s in 0..len {
            for t in (s + 1)..len {
                picks.push((s, t));
            }
        }
        return picks;
    }
    let want = samples.unwrap_or(10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = Vec::with_capacity(want);
    while picks.len() < want {
        let s = rng.gen_range(0..len);
        let t = rng.gen_range(0..len);
        if s != t {
            picks.push((s.min(t), s.max(t)));
        }
    }
    picks
}

/// Uniform labeling of a fixed support: the nonzero slot labels are
/// shuffled over the support indices, everything else goes to the kernel.
fn random_partition_on(
    support: &[usize],
    spec: &ClassSpec<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<LabeledPartition> {
    let mut labels = Vec::with_capacity(spec.rank());
    for s in 1..spec.slot_count() {
        labels.extend(std::iter::repeat_n(s, spec.multiplicity(s)));
    }
    labels.shuffle(rng);
    let mut slot_of = vec![0usize; spec.ambient_dim()];
    for (&i, &l) in support.iter().zip(&labels) {
        slot_of[i] = l;
    }
    LabeledPartition::new(slot_of, spec)
}

/// Every maximal inexact subset is an `A_ij`, is itself inexact (all its
/// members survive a rotation of the i-j plane), and is maximal; sampled
/// inexact subsets embed into the `A_ij` named by their fused pairs.
fn suite_in(spec: &ClassSpec<f64>, cfg: &RunConfig, tol: &Tolerances64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new();
    let audit = maximal_inexact_subsets(spec, cfg.cap)?;
    let apartment = collect_apartment(spec, cfg.cap)?;
    out.add("a_ij_nonempty", audit.members.len() as u64);
    out.add("a_ij_empty", audit.empty.len() as u64);
    out.add(
        "maximality_failures",
        audit.maximality_failures.len() as u64,
    );
    for (pr, p) in &audit.maximality_failures {
        out.fail(json!({
            "kind": "maximality",
            "pair": pr,
            "partition": wire(p, spec),
        }));
    }

    let standard = Basis::standard(spec.ambient_dim());
    for (pr, members) in &audit.members {
        let rotated = standard.rotated_pair(pr.small(), pr.big(), 0.6, tol.unitarity)?;
        for p in &apartment {
            let fixed = build_operator(&standard, p, spec, tol)?;
            let moved = build_operator(&rotated, p, spec, tol)?;
            let diff = max_norm(&(fixed.matrix() - moved.matrix()));
            if in_a_ij(p, pr) {
                out.add("members_checked", 1);
                if diff > tol.predicate {
                    out.fail(json!({
                        "kind": "member_moved",
                        "pair": pr,
                        "partition": wire(p, spec),
                        "distance": diff,
                    }));
                }
            } else {
                out.add("outsiders_checked", 1);
                if diff <= tol.predicate {
                    out.fail(json!({
                        "kind": "outsider_fixed",
                        "pair": pr,
                        "partition": wire(p, spec),
                        "distance": diff,
                    }));
                }
            }
        }
        debug_assert!(!members.is_empty());
    }

    let draws = cfg.samples.unwrap_or(500);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..apartment.len()).collect();
    for _ in 0..draws {
        out.add("subsets_sampled", 1);
        let size = rng.gen_range(2..=apartment.len().min(4));
        order.shuffle(&mut rng);
        let subset: Vec<LabeledPartition> = order[..size]
            .iter()
            .map(|&i| apartment[i].clone())
            .collect();
        let fused = fused_pairs(&subset)?;
        if fused.is_empty() {
            continue;
        }
        out.add("inexact_sampled", 1);
        for pr in &fused {
            let embedded = audit
                .members
                .get(pr)
                .is_some_and(|m| subset.iter().all(|p| m.contains(p)));
            if !embedded {
                out.fail(json!({
                    "kind": "subset_not_embedded",
                    "pair": pr,
                    "subset": subset.iter().map(|p| wire(p, spec)).collect::<Vec<_>>(),
                }));
            }
        }
    }
    Ok(out)
}

/// Counting discriminators for intersections of maximal inexact subsets.
/// Thin-kernel classes (all nonzero slots simple, kernel of dimension 2 or
/// 3) leave disjoint pairs with empty intersections; with two slots of
/// dimension at least 2, adjacent intersections sit in exactly 3 maximal
/// inexact subsets and disjoint ones in exactly 2.
fn suite_ad(spec: &ClassSpec<f64>, cfg: &RunConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new();
    let kernel_simple = (1..spec.slot_count()).all(|s| spec.multiplicity(s) == 1);
    let fat_slots = (0..spec.slot_count())
        .filter(|&s| spec.multiplicity(s) >= 2)
        .count();
    let apartment = collect_apartment(spec, cfg.cap)?;
    let n = spec.ambient_dim();
    let mut index_pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            index_pairs.push(pair(i, j));
        }
    }
    let sets: BTreeMap<PairIndex, Vec<usize>> = index_pairs
        .iter()
        .map(|&pr| {
            let members = apartment
                .iter()
                .enumerate()
                .filter(|(_, p)| in_a_ij(p, &pr))
                .map(|(i, _)| i)
                .collect();
            (pr, members)
        })
        .collect();
    let shared_indices = |a: &PairIndex, b: &PairIndex| {
        a.indices()
            .iter()
            .filter(|i| b.indices().contains(i))
            .count()
    };
    let intersect = |a: &[usize], b: &[usize]| -> Vec<usize> {
        let set: BTreeSet<usize> = b.iter().copied().collect();
        a.iter().copied().filter(|i| set.contains(i)).collect()
    };

    if kernel_simple && (2..=3).contains(&spec.kernel_dim()) {
        for (x, a) in &sets {
            for (y, b) in sets.range((std::ops::Bound::Excluded(*x), std::ops::Bound::Unbounded)) {
                if shared_indices(x, y) != 0 {
                    out.add("adjacent_skipped", 1);
                    continue;
                }
                out.add("disjoint_checked", 1);
                let common = intersect(a, b);
                if !common.is_empty() {
                    out.fail(json!({
                        "kind": "nonempty_disjoint_intersection",
                        "pair_a": x,
                        "pair_b": y,
                        "size": common.len(),
                    }));
                }
            }
        }
        return Ok(out);
    }

    if spec.assumptions_hold() && fat_slots >= 2 {
        for (x, a) in &sets {
            for (y, b) in sets.range((std::ops::Bound::Excluded(*x), std::ops::Bound::Unbounded)) {
                let expected = match shared_indices(x, y) {
                    1 => 3,
                    0 => 2,
                    _ => continue,
                };
                let members: Vec<LabeledPartition> = intersect(a, b)
                    .iter()
                    .map(|&i| apartment[i].clone())
                    .collect();
                if members.is_empty() {
                    out.fail(json!({
                        "kind": "empty_intersection",
                        "pair_a": x,
                        "pair_b": y,
                    }));
                    continue;
                }
                let fused = fused_pairs(&members)?;
                out.add(
                    if expected == 3 {
                        "adjacent_checked"
                    } else {
                        "disjoint_checked"
                    },
                    1,
                );
                if fused.len() != expected {
                    out.fail(json!({
                        "kind": "wrong_subset_count",
                        "pair_a": x,
                        "pair_b": y,
                        "expected": expected,
                        "got": fused.len(),
                    }));
                }
            }
        }
        return Ok(out);
    }

    Err(Error::UnsupportedSpec(
        "adjacency counting needs either simple nonzero slots with a kernel of dimension 2 or 3, \
         or two slots of dimension at least 2"
            .into(),
    ))
}

/// For orthogonal pairs the pair family is exactly the cross product of
/// the two supports.
fn suite_orth(spec: &ClassSpec<f64>, cfg: &RunConfig) -> Result<SuiteOutcome> {
    if 2 * spec.rank() > spec.ambient_dim() {
        return Err(Error::UnsupportedSpec(
            "orthogonal pairs need room for two disjoint supports".into(),
        ));
    }
    let mut out = SuiteOutcome::new();
    let apartment = collect_apartment(spec, cfg.cap)?;
    for (s, t) in distinct_pairs(apartment.len(), cfg.samples, cfg.seed) {
        let (p, q) = (&apartment[s], &apartment[t]);
        if classify_pair(spec, p, q)? != PairClass::Orthogonal {
            out.add("skipped_non_orthogonal", 1);
            continue;
        }
        out.add("orthogonal_checked", 1);
        let family = pair_family(spec, p, q)?;
        let mut cross = BTreeSet::new();
        for &i in &p.support_set() {
            for &j in &q.support_set() {
                cross.insert(pair(i, j));
            }
        }
        if *family.pairs() != cross {
            let missing: Vec<_> = cross.difference(family.pairs()).collect();
            let extra: Vec<_> = family.pairs().difference(&cross).collect();
            out.fail(json!({
                "kind": "family_mismatch",
                "p": wire(p, spec),
                "q": wire(q, spec),
                "missing": missing,
                "extra": extra,
            }));
        }
    }
    Ok(out)
}

/// For partially overlapping pairs: shared kernel nonempty, the
/// (shared range) x (shared kernel) and (only-P range) x (only-Q range)
/// pairs all belong to the family, and pairs inside only-P, inside
/// only-Q, or inside the shared kernel never do.
fn suite_nonorth(spec: &ClassSpec<f64>, cfg: &RunConfig) -> Result<SuiteOutcome> {
    if spec.rank() < 2 {
        return Err(Error::UnsupportedSpec(
            "partially overlapping supports need rank at least 2".into(),
        ));
    }
    let mut out = SuiteOutcome::new();
    let apartment = collect_apartment(spec, cfg.cap)?;
    for (s, t) in distinct_pairs(apartment.len(), cfg.samples, cfg.seed) {
        let (p, q) = (&apartment[s], &apartment[t]);
        if classify_pair(spec, p, q)? != PairClass::PartialOverlap {
            out.add("skipped_other", 1);
            continue;
        }
        out.add("overlap_checked", 1);
        let family = pair_family(spec, p, q)?;
        let sp = p.support_set();
        let sq = q.support_set();
        let kp: BTreeSet<usize> = p.kernel().into_iter().collect();
        let kq: BTreeSet<usize> = q.kernel().into_iter().collect();
        let shared_range: Vec<usize> = sp.intersection(&sq).copied().collect();
        let shared_kernel: Vec<usize> = kp.intersection(&kq).copied().collect();
        let only_p: Vec<usize> = sp.difference(&sq).copied().collect();
        let only_q: Vec<usize> = sq.difference(&sp).copied().collect();
        if shared_kernel.is_empty() {
            out.fail(json!({
                "kind": "empty_shared_kernel",
                "p": wire(p, spec),
                "q": wire(q, spec),
            }));
        }
        let mut offenders: Vec<(&str, usize, usize)> = Vec::new();
        for &i in &shared_range {
            for &j in &shared_kernel {
                if !family.contains(&pair(i, j)) {
                    offenders.push(("missing_range_kernel_pair", i, j));
                }
            }
        }
        for &i in &only_p {
            for &j in &only_q {
                if !family.contains(&pair(i, j)) {
                    offenders.push(("missing_exclusive_pair", i, j));
                }
            }
        }
        for side in [&only_p, &only_q, &shared_kernel] {
            for (a, &i) in side.iter().enumerate() {
                for &j in &side[a + 1..] {
                    if family.contains(&pair(i, j)) {
                        offenders.push(("excluded_pair_present", i, j));
                    }
                }
            }
        }
        for (kind, i, j) in offenders {
            out.fail(json!({
                "kind": kind,
                "pair": pair(i, j),
                "p": wire(p, spec),
                "q": wire(q, spec),
            }));
        }
    }
    Ok(out)
}

/// For same-support pairs: every (range, kernel) cross pair is in the
/// family, and at least one pair inside the common support is too.
fn suite_same_im(spec: &ClassSpec<f64>, cfg: &RunConfig) -> Result<SuiteOutcome> {
    if spec.eigenvalue_count() < 2 {
        return Err(Error::UnsupportedSpec(
            "distinct operators with one support need at least two eigenvalues".into(),
        ));
    }
    let mut out = SuiteOutcome::new();
    let apartment = collect_apartment(spec, cfg.cap)?;
    for (s, t) in distinct_pairs(apartment.len(), cfg.samples, cfg.seed) {
        let (p, q) = (&apartment[s], &apartment[t]);
        if classify_pair(spec, p, q)? != PairClass::SameRange {
            out.add("skipped_other", 1);
            continue;
        }
        out.add("same_range_checked", 1);
        let family = pair_family(spec, p, q)?;
        let support = p.support_set();
        for &i in &support {
            for j in p.kernel() {
                if !family.contains(&pair(i, j)) {
                    out.fail(json!({
                        "kind": "missing_cross_pair",
                        "pair": pair(i, j),
                        "p": wire(p, spec),
                        "q": wire(q, spec),
                    }));
                }
            }
        }
        let inside = family
            .pairs()
            .iter()
            .any(|pr| pr.indices().iter().all(|i| support.contains(i)));
        if !inside {
            out.fail(json!({
                "kind": "no_inside_pair",
                "p": wire(p, spec),
                "q": wire(q, spec),
            }));
        }
    }
    Ok(out)
}

/// The purely structural orthogonality detector agrees with the
/// support-disjointness oracle on every checked pair.
fn suite_ortho_pres(spec: &ClassSpec<f64>, cfg: &RunConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new();
    let apartment = collect_apartment(spec, cfg.cap)?;
    for (s, t) in distinct_pairs(apartment.len(), cfg.samples, cfg.seed) {
        let (p, q) = (&apartment[s], &apartment[t]);
        let report = detect_orthogonality_structural(spec, p, q)?;
        let detected = report
            .flag()
            .ok_or_else(|| Error::Numerical("detector returned no verdict flag".into()))?;
        let oracle = classify_pair(spec, p, q)? == PairClass::Orthogonal;
        out.add("pairs_checked", 1);
        out.add("orthogonal_seen", oracle as u64);
        if detected != oracle {
            out.fail(json!({
                "kind": "detector_mismatch",
                "detected": detected,
                "oracle": oracle,
                "p": wire(p, spec),
                "q": wire(q, spec),
                "detector_report": report,
            }));
        }
    }
    Ok(out)
}

/// Adjacency of supports is visible in special-subfamily counts: with the
/// threshold rank+1, representative pairs over (rank-1)-dimensional
/// intersections show at least two large special subfamilies, while pairs
/// over 1-dimensional intersections show at most one.
fn suite_char_ad(spec: &ClassSpec<f64>, cfg: &RunConfig) -> Result<SuiteOutcome> {
    let k = spec.rank();
    if !spec.is_half_dimensional() || k < 4 || spec.is_scaled_projection() {
        return Err(Error::UnsupportedSpec(
            "adjacency characterization needs a half-dimensional class of rank at least 4 \
             with more than one eigenvalue"
                .into(),
        ));
    }
    let mut out = SuiteOutcome::new();
    let threshold = k + 1;
    let n = spec.ambient_dim();
    let rounds = cfg.samples.unwrap_or(50);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..rounds {
        order.shuffle(&mut rng);
        let mut s1 = order[..k].to_vec();
        s1.sort_unstable();
        let drop = s1[rng.gen_range(0..k)];
        let mut s2: Vec<usize> = s1.iter().copied().filter(|&i| i != drop).collect();
        s2.push(order[k]);
        s2.sort_unstable();
        let p = random_partition_on(&s1, spec, &mut rng)?;
        let q = random_partition_on(&s2, spec, &mut rng)?;
        let (rp, rq) = choose_representatives_for_charad(spec, &p, &q)?;
        out.add("wide_checked", 1);
        if rp.support() != p.support() || rq.support() != q.support() {
            out.fail(json!({
                "kind": "representative_moved_support",
                "p": wire(&p, spec),
                "q": wire(&q, spec),
            }));
        }
        let large = count_large_special_subfamilies(&pair_family(spec, &rp, &rq)?, threshold);
        if large < 2 {
            out.fail(json!({
                "kind": "wide_undercount",
                "large_subfamilies": large,
                "p": wire(&rp, spec),
                "q": wire(&rq, spec),
            }));
        }

        let keep = s1[rng.gen_range(0..k)];
        let mut pool: Vec<usize> = (0..n).filter(|i| !s1.contains(i)).collect();
        pool.shuffle(&mut rng);
        let mut s3 = vec![keep];
        s3.extend_from_slice(&pool[..k - 1]);
        s3.sort_unstable();
        let p3 = random_partition_on(&s1, spec, &mut rng)?;
        let q3 = random_partition_on(&s3, spec, &mut rng)?;
        out.add("narrow_checked", 1);
        let large = count_large_special_subfamilies(&pair_family(spec, &p3, &q3)?, threshold);
        if large > 1 {
            out.fail(json!({
                "kind": "narrow_overcount",
                "large_subfamilies": large,
                "p": wire(&p3, spec),
                "q": wire(&q3, spec),
            }));
        }
    }
    Ok(out)
}

/// Supports are connected by chains moving one index per step, and on
/// half-dimensional classes the identity and kernel-swap symmetries are
/// classified as identity-type and complement-type apartment maps.
fn suite_alter(spec: &ClassSpec<f64>, cfg: &RunConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new();
    let apartment = collect_apartment(spec, cfg.cap)?;
    let k = spec.rank();
    for (s, t) in distinct_pairs(apartment.len(), cfg.samples, cfg.seed) {
        let (p, q) = (&apartment[s], &apartment[t]);
        let chain = range_chain(spec, p, q)?;
        out.add("chains_checked", 1);
        let endpoints_ok = chain.first() == Some(p) && chain.last() == Some(q);
        let mut steps_ok = chain.len() <= k + 2;
        for w in chain.windows(2) {
            let a = w[0].support_set();
            let b = w[1].support_set();
            if a.intersection(&b).count() != k - 1 {
                steps_ok = false;
            }
        }
        if !endpoints_ok || !steps_ok {
            out.fail(json!({
                "kind": "bad_chain",
                "length": chain.len(),
                "p": wire(p, spec),
                "q": wire(q, spec),
            }));
        }
    }

    if spec.is_half_dimensional() {
        let identity = SymmetryPerm::identity(spec.slot_count());
        let map = ApartmentMap::from_symmetry(spec, &identity, cfg.cap)?;
        let report = range_alternative_check(spec, &map)?;
        out.add("alternative_identity", 1);
        if report.label() != Some("identity_type") {
            out.fail(json!({
                "kind": "misclassified_identity_map",
                "report": report,
            }));
        }
        if spec.is_scaled_projection() {
            let swap = SymmetryPerm::transposition(0, 1, spec)?;
            let map = ApartmentMap::from_symmetry(spec, &swap, cfg.cap)?;
            let report = range_alternative_check(spec, &map)?;
            out.add("alternative_complement", 1);
            if report.label() != Some("complement_type") {
                out.fail(json!({
                    "kind": "misclassified_complement_map",
                    "report": report,
                }));
            }
        }
    } else {
        out.add("alternative_skipped", 1);
    }
    Ok(out)
}
