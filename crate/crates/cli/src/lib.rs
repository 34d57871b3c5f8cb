//! Plumbing shared by the `apartmentlab` binary and its integration tests:
//! run configuration, JSON reports, and the exit-code contract.
//!
//! Exit codes: 0 pass, 1 property failure (including an out-of-form
//! decomposition), 2 input error, 3 resource cap, 4 hypothesis violation
//! in the input map.

pub mod suites;

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use apartmentlab::apartments::{collect_apartment, DEFAULT_CAP};
use apartmentlab::error::Error;
use apartmentlab::spectra::validate_spec;
use apartmentlab::tol::ToleranceConfig;
use apartmentlab::transforms::{check_commutativity_preserving, decompose_map, ModelMap};
use apartmentlab::wire::{
    decomposition_to_wire, load_map_input, map_file_from_input, partition_to_wire, GeneratorWire,
    MapFile,
};
use apartmentlab::{ClassSpec64, RawClassSpec64, Tolerances64};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;

pub const TOL_MIN: f64 = 1e-14;
pub const TOL_MAX: f64 = 1e-4;

/// Full decompose-stage commutativity audits are kept up to this many map
/// entries; larger maps fall back to seeded pair sampling.
pub const FULL_COMMUT_LIMIT: usize = 600;

pub const CAP_ENV: &str = "APARTMENTLAB_CAP";

/// One resolved invocation. `samples = None` leaves each suite on its own
/// default (exhaustive where the apartment is small enough).
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: String,
    pub spec_path: Option<String>,
    pub map_path: Option<String>,
    pub lemma: Option<String>,
    pub seed: u64,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<String>,
    pub antiunitary: bool,
    pub delta_rule: Option<String>,
    pub consistency_ops: Option<usize>,
    pub cap: usize,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            spec_path: None,
            map_path: None,
            lemma: None,
            seed: 0,
            samples: None,
            tol: None,
            out: None,
            antiunitary: false,
            delta_rule: None,
            consistency_ops: None,
            cap: DEFAULT_CAP,
        }
    }

    /// The command echoed into the report: flags in a fixed order so equal
    /// configs hash equally.
    pub fn canonical_line(&self) -> String {
        let mut line = self.command.clone();
        if let Some(v) = &self.spec_path {
            line += &format!(" --spec {v}");
        }
        if let Some(v) = &self.map_path {
            line += &format!(" --map {v}");
        }
        if let Some(v) = &self.lemma {
            line += &format!(" --lemma {v}");
        }
        line += &format!(" --seed {}", self.seed);
        if let Some(v) = self.samples {
            line += &format!(" --samples {v}");
        }
        if let Some(v) = self.tol {
            line += &format!(" --tol {v:e}");
        }
        if let Some(v) = &self.out {
            line += &format!(" --out {v}");
        }
        if self.antiunitary {
            line += " --antiunitary";
        }
        if let Some(v) = &self.delta_rule {
            line += &format!(" --delta {v}");
        }
        if let Some(v) = self.consistency_ops {
            line += &format!(" --consistency {v}");
        }
        line
    }

    /// Default tolerances, with `--tol` overriding the decision thresholds:
    /// the membership predicate for verification suites and the residual
    /// bound for decompositions.
    pub fn tolerances(&self) -> Result<Tolerances64, Error> {
        let mut t = ToleranceConfig::default();
        if let Some(x) = self.tol {
            if !(TOL_MIN..=TOL_MAX).contains(&x) {
                return Err(Error::MalformedInput(format!(
                    "--tol {x:e} outside [{TOL_MIN:e}, {TOL_MAX:e}]"
                )));
            }
            t.predicate = x;
            t.decompose = x;
        }
        Ok(t)
    }
}

/// Enumeration cap from the environment, defaulting to [`DEFAULT_CAP`].
pub fn cap_from_env() -> Result<usize, Error> {
    match std::env::var(CAP_ENV) {
        Ok(text) => text
            .parse()
            .map_err(|e| Error::MalformedInput(format!("{CAP_ENV}={text:?}: {e}"))),
        Err(_) => Ok(DEFAULT_CAP),
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub verdict: String,
    pub counters: BTreeMap<String, u64>,
    pub witnesses: Vec<Value>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub payload: Value,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub exit_code: i32,
}

pub fn render(report: &Report) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serialization");
    text.push('\n');
    text
}

/// SHA-256 over the canonical command line and the raw input file bytes.
pub fn config_hash(line: &str, input: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(line.as_bytes());
    hasher.update([0u8]);
    hasher.update(input);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::MapHypothesisViolation { .. }
        | Error::NotApartmentPreserving(_)
        | Error::IllDefinedSupportMap { .. } => EXIT_HYPOTHESIS,
        Error::OutOfForm { .. } => EXIT_FAIL,
        _ => EXIT_INPUT,
    }
}

/// What a command hands back before it is wrapped into a [`Report`].
pub struct CmdOutput {
    pub verdict: String,
    pub counters: BTreeMap<String, u64>,
    pub witnesses: Vec<Value>,
    pub payload: Value,
    pub exit_code: i32,
}

impl CmdOutput {
    fn pass(counters: BTreeMap<String, u64>, payload: Value) -> Self {
        CmdOutput {
            verdict: "pass".into(),
            counters,
            witnesses: Vec::new(),
            payload,
            exit_code: EXIT_PASS,
        }
    }
}

fn error_witness(err: &Error) -> Value {
    let mut w = json!({"kind": "error", "detail": err.to_string()});
    match err {
        Error::MapHypothesisViolation {
            witness: Some((a, b)),
            ..
        }
        | Error::IllDefinedSupportMap { a, b } => {
            w["entries"] = json!([a, b]);
        }
        Error::OutOfForm {
            operator_index: Some(idx),
            ..
        } => {
            w["operator_index"] = json!(idx);
        }
        _ => {}
    }
    w
}

fn error_output(err: &Error) -> CmdOutput {
    let exit_code = exit_code_for(err);
    let verdict = match exit_code {
        EXIT_CAP => "cap_exceeded",
        EXIT_HYPOTHESIS => "hypothesis_violation",
        EXIT_FAIL => "out_of_form",
        _ => "input_error",
    };
    CmdOutput {
        verdict: verdict.into(),
        counters: BTreeMap::new(),
        witnesses: vec![error_witness(err)],
        payload: Value::Null,
        exit_code,
    }
}

/// Run one command to a report. Never panics on bad input; every failure
/// is folded into the report and its exit code.
pub fn run(cfg: &RunConfig) -> RunOutcome {
    let line = cfg.canonical_line();
    let input_path = match cfg.command.as_str() {
        "decompose" => cfg.map_path.as_ref(),
        _ => cfg.spec_path.as_ref(),
    };
    let bytes = match input_path {
        Some(path) => match std::fs::read(path) {
            Ok(b) => b,
            Err(e) => {
                let err = Error::MalformedInput(format!("{path}: {e}"));
                return finish(cfg, &line, &[], error_output(&err));
            }
        },
        None => Vec::new(),
    };
    let result = match cfg.command.as_str() {
        "enumerate" => cmd_enumerate(cfg, &bytes),
        "verify" => cmd_verify(cfg, &bytes),
        "decompose" => cmd_decompose(cfg, &bytes),
        "model" => cmd_model(cfg, &bytes),
        other => Err(Error::MalformedInput(format!("unknown command {other:?}"))),
    };
    let output = result.unwrap_or_else(|e| error_output(&e));
    finish(cfg, &line, &bytes, output)
}

fn finish(cfg: &RunConfig, line: &str, input: &[u8], output: CmdOutput) -> RunOutcome {
    RunOutcome {
        report: Report {
            command: line.to_string(),
            config_hash: config_hash(line, input),
            seed: cfg.seed,
            verdict: output.verdict,
            counters: output.counters,
            witnesses: output.witnesses,
            payload: output.payload,
        },
        exit_code: output.exit_code,
    }
}

fn load_spec(bytes: &[u8], tol: &Tolerances64) -> Result<ClassSpec64, Error> {
    let raw: RawClassSpec64 = serde_json::from_slice(bytes)
        .map_err(|e| Error::MalformedInput(format!("spec file: {e}")))?;
    validate_spec(&raw, tol)
}

fn cmd_enumerate(cfg: &RunConfig, bytes: &[u8]) -> Result<CmdOutput, Error> {
    let tol = cfg.tolerances()?;
    let spec = load_spec(bytes, &tol)?;
    let partitions = collect_apartment(&spec, cfg.cap)?;
    let mut counters = BTreeMap::new();
    counters.insert("apartment_size".into(), partitions.len() as u64);
    counters.insert("ambient_dim".into(), spec.ambient_dim() as u64);
    counters.insert("rank".into(), spec.rank() as u64);
    counters.insert("slot_count".into(), spec.slot_count() as u64);
    let listing: Vec<_> = partitions
        .iter()
        .map(|p| partition_to_wire(p, spec.slot_count()))
        .collect();
    Ok(CmdOutput::pass(counters, json!({ "partitions": listing })))
}

fn cmd_verify(cfg: &RunConfig, bytes: &[u8]) -> Result<CmdOutput, Error> {
    let tol = cfg.tolerances()?;
    let spec = load_spec(bytes, &tol)?;
    let lemma = cfg
        .lemma
        .as_deref()
        .ok_or_else(|| Error::MalformedInput("verify needs --lemma".into()))?;
    let outcome = suites::run_suite(lemma, &spec, cfg, &tol)?;
    Ok(CmdOutput {
        verdict: if outcome.pass { "pass" } else { "fail" }.into(),
        counters: outcome.counters,
        witnesses: outcome.witnesses,
        payload: Value::Null,
        exit_code: if outcome.pass { EXIT_PASS } else { EXIT_FAIL },
    })
}

fn cmd_decompose(cfg: &RunConfig, bytes: &[u8]) -> Result<CmdOutput, Error> {
    let tol = cfg.tolerances()?;
    let file: MapFile<f64> = serde_json::from_slice(bytes)
        .map_err(|e| Error::MalformedInput(format!("map file: {e}")))?;
    let (spec, input, _model) = load_map_input(&file, &tol, cfg.cap)?;
    let entries = input.pairs.len();
    let sample = if entries <= FULL_COMMUT_LIMIT {
        None
    } else {
        Some((cfg.samples.unwrap_or(10_000).max(2_000), cfg.seed))
    };
    let commut = check_commutativity_preserving(&input, sample, &tol)?;
    let mut counters = BTreeMap::new();
    counters.insert("ambient_dim".into(), spec.ambient_dim() as u64);
    counters.insert("entries".into(), entries as u64);
    counters.insert("commutator_pairs_checked".into(), commut.checked);
    counters.insert(
        "commutator_violations".into(),
        commut.violations.len() as u64,
    );
    if !commut.pass {
        let witnesses = commut
            .violations
            .iter()
            .take(10)
            .map(|v| {
                json!({
                    "kind": "commutator",
                    "entries": [v.s, v.t],
                    "input_norm": v.input_norm,
                    "output_norm": v.output_norm,
                })
            })
            .collect();
        return Ok(CmdOutput {
            verdict: "hypothesis_violation".into(),
            counters,
            witnesses,
            payload: Value::Null,
            exit_code: EXIT_HYPOTHESIS,
        });
    }
    match decompose_map(&input, &tol, cfg.seed) {
        Ok(d) => {
            counters.insert("antiunitary".into(), d.antiunitary as u64);
            counters.insert("flag_ambiguous".into(), d.flag_ambiguous as u64);
            counters.insert("delta_ambiguous".into(), d.delta_ambiguous as u64);
            let wire = decomposition_to_wire(&d);
            Ok(CmdOutput::pass(counters, json!({ "decomposition": wire })))
        }
        Err(e @ Error::OutOfForm { .. }) => Ok(CmdOutput {
            verdict: "out_of_form".into(),
            counters,
            witnesses: vec![error_witness(&e)],
            payload: Value::Null,
            exit_code: EXIT_FAIL,
        }),
        Err(e) if exit_code_for(&e) == EXIT_HYPOTHESIS => Ok(CmdOutput {
            verdict: "hypothesis_violation".into(),
            counters,
            witnesses: vec![error_witness(&e)],
            payload: Value::Null,
            exit_code: EXIT_HYPOTHESIS,
        }),
        Err(e) => Err(e),
    }
}

fn cmd_model(cfg: &RunConfig, bytes: &[u8]) -> Result<CmdOutput, Error> {
    let tol = cfg.tolerances()?;
    let spec = load_spec(bytes, &tol)?;
    let out_path = cfg
        .out
        .as_deref()
        .ok_or_else(|| Error::MalformedInput("model needs --out for the map file".into()))?;
    let generator = GeneratorWire {
        unitary_seed: cfg.seed,
        antiunitary: cfg.antiunitary,
        delta_rule: cfg.delta_rule.clone().unwrap_or_else(|| "identity".into()),
        basis_seed: None,
        consistency_ops: cfg.consistency_ops,
        consistency_seed: None,
    };
    let params = generator.params(&spec)?;
    let model = ModelMap::seeded(&spec, &params, &tol)?;
    let input = model.realize(&tol, cfg.cap)?;
    let flat = map_file_from_input(&input);
    let mut text = serde_json::to_string(&flat)
        .map_err(|e| Error::MalformedInput(format!("map serialization: {e}")))?;
    text.push('\n');
    std::fs::write(out_path, text)
        .map_err(|e| Error::MalformedInput(format!("{out_path}: {e}")))?;
    let mut counters = BTreeMap::new();
    counters.insert("entries".into(), input.pairs.len() as u64);
    counters.insert(
        "consistency_ops".into(),
        (input.pairs.len() - collect_apartment(&spec, cfg.cap)?.len()) as u64,
    );
    Ok(CmdOutput::pass(
        counters,
        json!({ "generator": generator, "map_file": out_path }),
    ))
}
