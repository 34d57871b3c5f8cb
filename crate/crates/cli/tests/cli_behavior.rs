//! Exit codes, report determinism, and file handling of the binary.

mod common;

use common::{counter, report, run, verdict, work_dir, write_spec};

use apartmentlab::apartments::{collect_apartment, DEFAULT_CAP};
use apartmentlab::matrixlab::{build_operator, Basis};
use apartmentlab::spectra::validate_spec;
use apartmentlab::tol::ToleranceConfig;
use apartmentlab::wire::{matrix_to_wire, MapFile, MapPairWire};
use apartmentlab::RawClassSpec64;

#[test]
fn enumerate_lists_small_apartments_exactly() {
    let dir = work_dir("enumerate");
    let cfg_a = write_spec(&dir, "cfgA.json", &[1.0, 2.0], &[1, 1], 5, false);
    let tiny = write_spec(&dir, "rank1dim3.json", &[1.0], &[1], 3, false);

    let (code, stdout, _) = run(&["enumerate", "--spec", cfg_a.to_str().unwrap()], &[]);
    assert_eq!(code, 0);
    let rep = report(&stdout);
    assert_eq!(verdict(&rep), "pass");
    assert_eq!(counter(&rep, "apartment_size"), 20);
    assert_eq!(rep["payload"]["partitions"].as_array().unwrap().len(), 20);

    let (code, stdout, _) = run(&["enumerate", "--spec", tiny.to_str().unwrap()], &[]);
    assert_eq!(code, 0);
    let rep = report(&stdout);
    assert_eq!(counter(&rep, "apartment_size"), 3);
}

#[test]
fn input_errors_exit_with_code_two() {
    let dir = work_dir("input-errors");
    let cfg_a = write_spec(&dir, "cfgA.json", &[1.0, 2.0], &[1, 1], 5, false);
    let garbled = dir.join("garbled.json");
    std::fs::write(&garbled, "{not json").unwrap();
    let spec = cfg_a.to_str().unwrap();

    let missing = dir.join("absent.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["enumerate", "--spec", missing.to_str().unwrap()],
        vec!["enumerate", "--spec", garbled.to_str().unwrap()],
        vec!["verify", "--lemma", "bogus", "--spec", spec],
        vec!["verify", "--lemma", "in", "--spec", spec, "--tol", "1e-20"],
        vec!["verify", "--lemma", "char-ad", "--spec", spec],
        vec![
            "verify",
            "--lemma",
            "same-im",
            "--spec",
            spec,
            "--samples",
            "0",
        ],
    ];
    for (i, args) in cases.iter().enumerate() {
        let (code, stdout, _) = run(args, &[]);
        if i == 5 {
            // spec fits the suite, zero samples is a legal no-op
            assert_eq!(code, 0, "case {i}");
            continue;
        }
        assert_eq!(code, 2, "case {i}: {stdout}");
        let rep = report(&stdout);
        assert_eq!(verdict(&rep), "input_error", "case {i}");
        assert!(!rep["witnesses"].as_array().unwrap().is_empty(), "case {i}");
    }
}

#[test]
fn enumeration_cap_comes_from_the_environment() {
    let dir = work_dir("cap");
    let cfg_c2 = write_spec(&dir, "cfgC2.json", &[1.0, 2.0], &[2, 2], 8, false);
    let spec = cfg_c2.to_str().unwrap();

    let (code, stdout, _) = run(
        &["enumerate", "--spec", spec],
        &[("APARTMENTLAB_CAP", "10")],
    );
    assert_eq!(code, 3);
    assert_eq!(verdict(&report(&stdout)), "cap_exceeded");

    let (code, _, _) = run(
        &["enumerate", "--spec", spec],
        &[("APARTMENTLAB_CAP", "1000")],
    );
    assert_eq!(code, 0);

    let (code, _, stderr) = run(
        &["enumerate", "--spec", spec],
        &[("APARTMENTLAB_CAP", "ten")],
    );
    assert_eq!(code, 2);
    assert!(stderr.contains("APARTMENTLAB_CAP"));
}

#[test]
fn repeated_runs_emit_identical_reports() {
    let dir = work_dir("determinism");
    let cfg_a = write_spec(&dir, "cfgA.json", &[1.0, 2.0], &[1, 1], 5, false);
    let args = [
        "verify",
        "--lemma",
        "ortho-pres",
        "--spec",
        cfg_a.to_str().unwrap(),
        "--seed",
        "42",
    ];
    let (code1, first, _) = run(&args, &[]);
    let (code2, second, _) = run(&args, &[]);
    assert_eq!(code1, 0);
    assert_eq!(code2, 0);
    assert_eq!(first, second);
}

#[test]
fn reports_can_be_written_to_a_file() {
    let dir = work_dir("report-file");
    let cfg_a = write_spec(&dir, "cfgA.json", &[1.0, 2.0], &[1, 1], 5, false);
    let out = dir.join("report.json");
    let (code, stdout, _) = run(
        &[
            "verify",
            "--lemma",
            "orth",
            "--spec",
            cfg_a.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let rep = report(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(verdict(&rep), "pass");
}

#[test]
fn generated_maps_load_and_decompose() {
    let dir = work_dir("model-roundtrip");
    let cfg_a = write_spec(&dir, "cfgA.json", &[1.0, 2.0], &[1, 1], 5, false);
    let map = dir.join("map.json");
    let (code, stdout, _) = run(
        &[
            "model",
            "--spec",
            cfg_a.to_str().unwrap(),
            "--seed",
            "9",
            "--delta",
            "constant:0,2,1",
            "--out",
            map.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code, 0);
    let rep = report(&stdout);
    assert_eq!(counter(&rep, "entries"), 22);
    assert_eq!(counter(&rep, "consistency_ops"), 2);
    assert_eq!(rep["payload"]["generator"]["delta_rule"], "constant:0,2,1");

    let (code, stdout, _) = run(&["decompose", "--map", map.to_str().unwrap()], &[]);
    assert_eq!(code, 0);
    let rep = report(&stdout);
    assert_eq!(verdict(&rep), "pass");
    assert_eq!(counter(&rep, "antiunitary"), 0);
}

#[test]
fn label_swaps_outside_the_symmetry_group_are_out_of_form() {
    let dir = work_dir("out-of-form");
    let raw = RawClassSpec64 {
        eigenvalues: vec![1.0, 2.0],
        multiplicities: vec![1, 2],
        dim: 6,
        allow_assumption_violation: true,
    };
    let tol = ToleranceConfig::default();
    let spec = validate_spec(&raw, &tol).unwrap();
    let apartment = collect_apartment(&spec, DEFAULT_CAP).unwrap();
    let (a, b) = {
        let mut found = None;
        'search: for (i, p) in apartment.iter().enumerate() {
            for (j, q) in apartment.iter().enumerate().skip(i + 1) {
                if p.support() == q.support() {
                    found = Some((i, j));
                    break 'search;
                }
            }
        }
        found.expect("same-support partitions with distinct labels")
    };
    let basis = Basis::standard(spec.ambient_dim());
    let mut pairs: Vec<MapPairWire<f64>> = apartment
        .iter()
        .map(|p| {
            let op = build_operator(&basis, p, &spec, &tol).unwrap();
            let wire = matrix_to_wire(op.matrix());
            MapPairWire {
                input: wire.clone(),
                output: wire,
            }
        })
        .collect();
    let swapped = pairs[a].output.clone();
    pairs[a].output = pairs[b].output.clone();
    pairs[b].output = swapped;
    let file = MapFile {
        spec: raw,
        pairs: Some(pairs),
        generator: None,
    };
    let path = dir.join("swapped.json");
    std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();

    let (code, stdout, _) = run(&["decompose", "--map", path.to_str().unwrap()], &[]);
    assert_eq!(code, 1, "{stdout}");
    let rep = report(&stdout);
    assert_eq!(verdict(&rep), "out_of_form");
    assert!(!rep["witnesses"].as_array().unwrap().is_empty());
}
