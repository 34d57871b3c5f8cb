//! Acceptance gate: one test and one printed pass line per criterion.
//!
//! Reference classes: CFG-A (1,2 simple, dim 5), CFG-B (1,-1 with
//! multiplicities 2,1, dim 7), CFG-C (1..4 simple, dim 8), CFG-C2
//! (1,2 doubled, dim 8), CFG-P (projection class of rank 4, dim 8) and
//! CFG-D (1,2 with multiplicities 1,2, dim 6, all slot dimensions
//! pairwise distinct).

mod common;

use std::time::Instant;

use common::{counter, report, run, verdict, work_dir, write_spec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use apartmentlab::apartments::{collect_apartment, DEFAULT_CAP};
use apartmentlab::matrixlab::{
    build_operator, commutator_norm, random_unitary_seeded, subspace_compatible, Subspace,
};
use apartmentlab::spectra::{validate_spec, ClassSpec, SymmetryPerm};
use apartmentlab::structure::{range_alternative_check, ApartmentMap};
use apartmentlab::tol::ToleranceConfig;
use apartmentlab::transforms::{
    check_commutativity_preserving, decompose_map, phase_aligned_distance,
    projection_case_analyzer, DeltaRule, GeneratorParams, ModelMap, ProjectionBranch,
};
use apartmentlab::{RawClassSpec64, Tolerances64};

fn tol() -> Tolerances64 {
    ToleranceConfig::default()
}

fn make_spec(
    eigenvalues: &[f64],
    multiplicities: &[usize],
    dim: usize,
    allow: bool,
) -> ClassSpec<f64> {
    validate_spec(
        &RawClassSpec64 {
            eigenvalues: eigenvalues.to_vec(),
            multiplicities: multiplicities.to_vec(),
            dim,
            allow_assumption_violation: allow,
        },
        &tol(),
    )
    .unwrap()
}

/// Criterion 1: commutation at 1e-8 is equivalent to pairwise eigenspace
/// compatibility at 1e-8, over mixed same-frame, refined-frame and
/// independent-frame constructions.
#[test]
fn commutation_matches_eigenspace_compatibility() {
    let configs: [(&[f64], &[usize], usize, bool); 6] = [
        (&[1.0, 2.0], &[1, 1], 5, false),
        (&[1.0, -1.0], &[2, 1], 7, false),
        (&[1.0, 2.0, 3.0, 4.0], &[1, 1, 1, 1], 8, false),
        (&[1.0, 2.0], &[2, 2], 8, false),
        (&[1.0], &[4], 8, false),
        (&[1.0, 2.0], &[1, 2], 6, true),
    ];
    let started = Instant::now();
    let tol = tol();
    let mut total = 0u32;
    for (ci, (eigenvalues, multiplicities, dim, allow)) in configs.iter().enumerate() {
        let spec = make_spec(eigenvalues, multiplicities, *dim, *allow);
        let apartment = collect_apartment(&spec, DEFAULT_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + ci as u64);
        for round in 0..200 {
            let p = &apartment[rng.gen_range(0..apartment.len())];
            let q = &apartment[rng.gen_range(0..apartment.len())];
            let u = random_unitary_seeded::<f64>(*dim, rng.gen(), tol.unitarity).unwrap();
            let v = match round % 4 {
                0 => u.clone(),
                1 => {
                    // rotate inside one eigenspace of q: stays commuting
                    let blocks = q.blocks(spec.slot_count());
                    match blocks.iter().find(|b| b.len() >= 2) {
                        Some(b) => u.rotated_pair(b[0], b[1], 0.7, tol.unitarity).unwrap(),
                        None => u.clone(),
                    }
                }
                2 => {
                    // rotate across a support/kernel pair of q
                    let i = q.support()[0];
                    let j = q.kernel()[0];
                    u.rotated_pair(i, j, 0.7, tol.unitarity).unwrap()
                }
                _ => random_unitary_seeded::<f64>(*dim, rng.gen(), tol.unitarity).unwrap(),
            };
            let a = build_operator(&u, p, &spec, &tol).unwrap();
            let b = build_operator(&v, q, &spec, &tol).unwrap();
            let commute = commutator_norm(&a, &b).unwrap() <= 1e-8;
            let mut compatible = true;
            for block_a in p.blocks(spec.slot_count()) {
                let x = Subspace::from_basis_columns(&u, &block_a, tol.unitarity).unwrap();
                for block_b in q.blocks(spec.slot_count()) {
                    let y = Subspace::from_basis_columns(&v, &block_b, tol.unitarity).unwrap();
                    compatible &= subspace_compatible(&x, &y, 1e-8).unwrap();
                }
            }
            assert_eq!(commute, compatible, "config {ci} round {round}");
            total += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("acceptance 1: PASS - commutation equivalence on {total} pairs in {elapsed:?}");
}

/// Criterion 2: the `in` suite certifies inexactness and maximality of
/// every A_ij on CFG-A and the rank-1 dim-3 class, and sampled inexact
/// subsets embed.
#[test]
fn inexact_subsets_are_maximal_on_reference_classes() {
    let dir = work_dir("accept-in");
    let started = Instant::now();
    let cfg_a = write_spec(&dir, "cfgA.json", &[1.0, 2.0], &[1, 1], 5, false);
    let tiny = write_spec(&dir, "rank1dim3.json", &[1.0], &[1], 3, false);

    let (code, stdout, _) = run(
        &["verify", "--lemma", "in", "--spec", cfg_a.to_str().unwrap()],
        &[],
    );
    assert_eq!(code, 0, "{stdout}");
    let rep = report(&stdout);
    assert_eq!(verdict(&rep), "pass");
    assert_eq!(counter(&rep, "a_ij_nonempty"), 10);
    assert_eq!(counter(&rep, "a_ij_empty"), 0);
    assert_eq!(counter(&rep, "maximality_failures"), 0);
    assert!(counter(&rep, "inexact_sampled") > 0);

    let (code, stdout, _) = run(
        &["verify", "--lemma", "in", "--spec", tiny.to_str().unwrap()],
        &[],
    );
    assert_eq!(code, 0, "{stdout}");
    let rep = report(&stdout);
    assert_eq!(verdict(&rep), "pass");
    assert_eq!(counter(&rep, "a_ij_nonempty"), 3);
    assert_eq!(counter(&rep, "maximality_failures"), 0);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("acceptance 2: PASS - inexactness suite on CFG-A and rank-1 dim-3 in {elapsed:?}");
}

/// Criterion 3: the structural detector agrees with the support
/// disjointness oracle on all CFG-A pairs, all CFG-B pairs, and 10^4
/// sampled CFG-C2 pairs.
#[test]
fn structural_detector_matches_the_disjointness_oracle() {
    let dir = work_dir("accept-detector");
    let started = Instant::now();
    let cfg_a = write_spec(&dir, "cfgA.json", &[1.0, 2.0], &[1, 1], 5, false);
    let cfg_b = write_spec(&dir, "cfgB.json", &[1.0, -1.0], &[2, 1], 7, false);
    let cfg_c2 = write_spec(&dir, "cfgC2.json", &[1.0, 2.0], &[2, 2], 8, false);

    let runs: [(&std::path::Path, Option<&str>, u64); 3] = [
        (&cfg_a, None, 190),
        (&cfg_b, None, 5_460),
        (&cfg_c2, Some("10000"), 10_000),
    ];
    for (path, samples, expect) in runs {
        let mut args = vec![
            "verify",
            "--lemma",
            "ortho-pres",
            "--spec",
            path.to_str().unwrap(),
            "--seed",
            "3",
        ];
        if let Some(s) = samples {
            args.extend_from_slice(&["--samples", s]);
        }
        let (code, stdout, _) = run(&args, &[]);
        assert_eq!(code, 0, "{stdout}");
        let rep = report(&stdout);
        assert_eq!(verdict(&rep), "pass", "{path:?}");
        assert_eq!(counter(&rep, "pairs_checked"), expect, "{path:?}");
        assert!(counter(&rep, "orthogonal_seen") > 0, "{path:?}");
        assert!(rep["witnesses"].as_array().unwrap().is_empty());
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "acceptance 3: PASS - detector agreed with the oracle on 190 + 5460 + 10000 pairs in {elapsed:?}"
    );
}

/// Criterion 4: with threshold rank+1 = 5, 50 seeded wide-intersection
/// pairs show at least two large special subfamilies and 50 narrow ones
/// at most one, on CFG-C and CFG-C2.
#[test]
fn subfamily_counts_discriminate_adjacent_supports() {
    let dir = work_dir("accept-charad");
    let started = Instant::now();
    let cfg_c = write_spec(
        &dir,
        "cfgC.json",
        &[1.0, 2.0, 3.0, 4.0],
        &[1, 1, 1, 1],
        8,
        false,
    );
    let cfg_c2 = write_spec(&dir, "cfgC2.json", &[1.0, 2.0], &[2, 2], 8, false);

    for path in [&cfg_c, &cfg_c2] {
        let (code, stdout, _) = run(
            &[
                "verify",
                "--lemma",
                "char-ad",
                "--spec",
                path.to_str().unwrap(),
                "--samples",
                "50",
                "--seed",
                "11",
            ],
            &[],
        );
        assert_eq!(code, 0, "{stdout}");
        let rep = report(&stdout);
        assert_eq!(verdict(&rep), "pass", "{path:?}");
        assert_eq!(counter(&rep, "wide_checked"), 50);
        assert_eq!(counter(&rep, "narrow_checked"), 50);
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!("acceptance 4: PASS - subfamily counts split 50/50 pairs on CFG-C and CFG-C2 in {elapsed:?}");
}

/// Criterion 5: on the 1,2,3-simple dim-6 class (kernel of dimension 3)
/// disjoint intersections are empty; on CFG-C2 adjacent intersections sit
/// in exactly 3 maximal inexact subsets and disjoint ones in exactly 2,
/// both exhaustively.
#[test]
fn subset_intersections_follow_kernel_dimension_counts() {
    let dir = work_dir("accept-ad");
    let started = Instant::now();
    let kern3 = write_spec(&dir, "kern3.json", &[1.0, 2.0, 3.0], &[1, 1, 1], 6, true);
    let cfg_c2 = write_spec(&dir, "cfgC2.json", &[1.0, 2.0], &[2, 2], 8, false);

    let (code, stdout, _) = run(
        &["verify", "--lemma", "ad", "--spec", kern3.to_str().unwrap()],
        &[],
    );
    assert_eq!(code, 0, "{stdout}");
    let rep = report(&stdout);
    assert_eq!(verdict(&rep), "pass");
    assert_eq!(counter(&rep, "disjoint_checked"), 45);

    let (code, stdout, _) = run(
        &[
            "verify",
            "--lemma",
            "ad",
            "--spec",
            cfg_c2.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code, 0, "{stdout}");
    let rep = report(&stdout);
    assert_eq!(verdict(&rep), "pass");
    assert_eq!(counter(&rep, "adjacent_checked"), 168);
    assert_eq!(counter(&rep, "disjoint_checked"), 210);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!("acceptance 5: PASS - intersection counts exhaustive on both classes in {elapsed:?}");
}

fn constant_rule(spec: &ClassSpec<f64>) -> DeltaRule {
    let mut mapping: Vec<usize> = (0..spec.slot_count()).collect();
    'search: for a in 0..spec.slot_count() {
        for b in (a + 1)..spec.slot_count() {
            if spec.multiplicity(a) == spec.multiplicity(b) {
                mapping.swap(a, b);
                break 'search;
            }
        }
    }
    DeltaRule::Constant(SymmetryPerm::new(mapping, spec).unwrap())
}

/// Criterion 6: 20 seeded model maps per class on CFG-C2 and CFG-D,
/// spanning unitary/anti-unitary flags and identity, constant and
/// per-operator symmetry rules, decompose back to the exact flag, the
/// base change up to global phase, and every per-operator symmetry;
/// CFG-D recoveries are all the identity.
#[test]
fn seeded_model_maps_round_trip_exactly() {
    let started = Instant::now();
    let tol = tol();
    let cfg_c2 = make_spec(&[1.0, 2.0], &[2, 2], 8, false);
    let cfg_d = make_spec(&[1.0, 2.0], &[1, 2], 6, true);
    let mut rounds = 0u32;
    for spec in [&cfg_c2, &cfg_d] {
        let rigid = spec.ambient_dim() == 6;
        for round in 0..20u64 {
            let rule = match round % 3 {
                0 => DeltaRule::Identity,
                1 => constant_rule(spec),
                _ => DeltaRule::PerOperator {
                    seed: 7_000 + round,
                },
            };
            let params = GeneratorParams {
                basis_seed: 2_000 + round,
                unitary_seed: 3_000 + round,
                antiunitary: round % 2 == 1,
                delta: rule,
                consistency_ops: 2,
                consistency_seed: 4_000 + round,
            };
            let model = ModelMap::seeded(spec, &params, &tol).unwrap();
            let input = model.realize(&tol, DEFAULT_CAP).unwrap();
            let d = decompose_map(&input, &tol, 5_000 + round).unwrap();
            assert_eq!(d.antiunitary, params.antiunitary, "round {round}");
            assert!(!d.flag_ambiguous, "round {round}");
            assert!(d.residual <= 1e-6, "round {round}: {}", d.residual);
            let dist =
                phase_aligned_distance(d.unitary.columns(), model.unitary().columns()).unwrap();
            assert!(dist < 1e-6, "round {round}: base change off by {dist:.3e}");
            let mut want = model.deltas(DEFAULT_CAP).unwrap();
            want.extend(std::iter::repeat_n(
                SymmetryPerm::identity(spec.slot_count()),
                2,
            ));
            assert_eq!(d.per_operator_perm, want, "round {round}");
            if rigid {
                assert!(
                    d.per_operator_perm.iter().all(|p| p.is_identity()),
                    "round {round}"
                );
            }
            rounds += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 180.0, "took {elapsed:?}");
    println!(
        "acceptance 6: PASS - {rounds} seeded round trips recovered every component in {elapsed:?}"
    );
}

/// Criterion 7: projection-class maps mixing direct and complement
/// branches pass the commutativity audit and the per-operator branches
/// are recovered exactly; the global complement symmetry is classified
/// complement-type.
#[test]
fn projection_maps_recover_per_operator_branches() {
    let started = Instant::now();
    let tol = tol();
    let spec = make_spec(&[1.0], &[4], 8, false);
    let params = GeneratorParams {
        basis_seed: 21,
        unitary_seed: 22,
        antiunitary: false,
        delta: DeltaRule::PerOperator { seed: 23 },
        consistency_ops: 2,
        consistency_seed: 24,
    };
    let model = ModelMap::seeded(&spec, &params, &tol).unwrap();
    let input = model.realize(&tol, DEFAULT_CAP).unwrap();
    let audit = check_commutativity_preserving(&input, None, &tol).unwrap();
    assert!(audit.pass, "{} violations", audit.violations.len());

    let analysis = projection_case_analyzer(&input, &tol, 25).unwrap();
    assert!(!analysis.antiunitary);
    let truth = model.deltas(DEFAULT_CAP).unwrap();
    let swap = SymmetryPerm::transposition(0, 1, &spec).unwrap();
    let mut direct = 0u32;
    let mut complement = 0u32;
    for (branch, delta) in analysis.branches.iter().zip(&truth) {
        let expected = if delta.is_identity() {
            direct += 1;
            ProjectionBranch::Direct
        } else {
            assert_eq!(delta, &swap);
            complement += 1;
            ProjectionBranch::Complement
        };
        assert_eq!(*branch, expected);
    }
    assert!(direct > 0, "seed produced no direct branches");
    assert!(complement > 0, "seed produced no complement branches");

    let map = ApartmentMap::from_symmetry(&spec, &swap, DEFAULT_CAP).unwrap();
    let rep = range_alternative_check(&spec, &map).unwrap();
    assert_eq!(rep.label(), Some("complement_type"));

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "acceptance 7: PASS - {direct} direct and {complement} complement branches recovered in {elapsed:?}"
    );
}

/// Criterion 8: a model map with one image swapped against a
/// non-commuting partner is rejected with a concrete witness pair, the
/// decompose command exits with the hypothesis-violation status, and the
/// rejection is deterministic.
#[test]
fn corrupted_maps_are_rejected_with_witnesses() {
    let dir = work_dir("accept-negative");
    let cfg_c2 = write_spec(&dir, "cfgC2.json", &[1.0, 2.0], &[2, 2], 8, false);
    let map_path = dir.join("map.json");
    let (code, _, _) = run(
        &[
            "model",
            "--spec",
            cfg_c2.to_str().unwrap(),
            "--seed",
            "5",
            "--consistency",
            "2",
            "--out",
            map_path.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code, 0);

    let (code, stdout, _) = run(&["decompose", "--map", map_path.to_str().unwrap()], &[]);
    assert_eq!(code, 0, "healthy map must decompose: {stdout}");

    // swap an apartment image with a consistency-op image
    let mut file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&map_path).unwrap()).unwrap();
    let pairs = file["pairs"].as_array_mut().unwrap();
    let last = pairs.len() - 1;
    let tail_output = pairs[last]["output"].clone();
    let head_output = pairs[0]["output"].clone();
    pairs[0]["output"] = tail_output;
    pairs[last]["output"] = head_output;
    let corrupt_path = dir.join("corrupt.json");
    std::fs::write(&corrupt_path, serde_json::to_string(&file).unwrap()).unwrap();

    let args = [
        "decompose",
        "--map",
        corrupt_path.to_str().unwrap(),
        "--seed",
        "7",
    ];
    let (code1, first, _) = run(&args, &[]);
    let (code2, second, _) = run(&args, &[]);
    assert_eq!(code1, 4);
    assert_eq!(code2, 4);
    assert_eq!(first, second, "rejection must be deterministic");
    let rep = report(&first);
    assert_eq!(verdict(&rep), "hypothesis_violation");
    assert!(counter(&rep, "commutator_violations") > 0);
    let witness = &rep["witnesses"][0];
    assert_eq!(witness["kind"], "commutator");
    assert_eq!(witness["entries"].as_array().unwrap().len(), 2);
    assert!(witness["output_norm"].as_f64().unwrap() > 1e-8);

    // the library-level audit reports the same kind of witness
    let tol = tol();
    let map_file: apartmentlab::wire::MapFile<f64> =
        serde_json::from_str(&std::fs::read_to_string(&corrupt_path).unwrap()).unwrap();
    let (_, input, _) = apartmentlab::wire::load_map_input(&map_file, &tol, DEFAULT_CAP).unwrap();
    let audit = check_commutativity_preserving(&input, None, &tol).unwrap();
    assert!(!audit.pass);
    let hit = &audit.violations[0];
    assert!(hit.input_norm <= 1e-8 || hit.output_norm <= 1e-8);
    assert!(hit.input_norm > 1e-8 || hit.output_norm > 1e-8);

    println!(
        "acceptance 8: PASS - corruption rejected at entry pair ({}, {}) deterministically",
        hit.s, hit.t
    );
}
