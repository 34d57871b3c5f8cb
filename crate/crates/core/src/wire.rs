//! JSON exchange formats used by the command-line tools.
//!
//! Matrices travel as row-major nested arrays of `[re, im]` pairs,
//! partitions as explicit index blocks, and map definitions as either
//! literal (input, output) matrix pairs or a seeded generator stanza.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixlab::{CMat, HermitianOperator};
use crate::scalar::Scalar;
use crate::spectra::{validate_spec, ClassSpec, LabeledPartition, RawClassSpec, SymmetryPerm};
use crate::tol::ToleranceConfig;
use crate::transforms::{Decomposition, DeltaRule, GeneratorParams, MapInput, ModelMap};

/// Complex matrix as rows of `[re, im]` entries.
pub type MatrixWire<T> = Vec<Vec<[T; 2]>>;

pub fn matrix_to_wire<T: Scalar>(m: &CMat<T>) -> MatrixWire<T> {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_wire<T: Scalar>(wire: &MatrixWire<T>) -> Result<CMat<T>> {
    let rows = wire.len();
    let cols = wire.first().map_or(0, |row| row.len());
    if rows == 0 || cols == 0 {
        return Err(Error::MalformedInput("empty matrix".into()));
    }
    if wire.iter().any(|row| row.len() != cols) {
        return Err(Error::MalformedInput("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(rows, cols, |r, c| {
        Complex::new(wire[r][c][0], wire[r][c][1])
    }))
}

/// Partition as explicit index blocks: nonzero slots in order, kernel apart.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionWire {
    pub slots: Vec<Vec<usize>>,
    pub kernel: Vec<usize>,
}

pub fn partition_to_wire(p: &LabeledPartition, slot_count: usize) -> PartitionWire {
    let mut blocks = p.blocks(slot_count);
    let kernel = blocks.remove(0);
    PartitionWire {
        slots: blocks,
        kernel,
    }
}

pub fn partition_from_wire<T: Scalar>(
    wire: &PartitionWire,
    spec: &ClassSpec<T>,
) -> Result<LabeledPartition> {
    if wire.slots.len() + 1 != spec.slot_count() {
        return Err(Error::MalformedInput(format!(
            "{} nonzero blocks for {} nonzero slots",
            wire.slots.len(),
            spec.slot_count() - 1
        )));
    }
    let n = spec.ambient_dim();
    let mut slot_of = vec![usize::MAX; n];
    let blocks = std::iter::once((0usize, &wire.kernel))
        .chain(wire.slots.iter().enumerate().map(|(i, b)| (i + 1, b)));
    for (slot, block) in blocks {
        for &i in block {
            if i >= n {
                return Err(Error::MalformedInput(format!(
                    "index {i} outside ambient dimension {n}"
                )));
            }
            if slot_of[i] != usize::MAX {
                return Err(Error::MalformedInput(format!("index {i} listed twice")));
            }
            slot_of[i] = slot;
        }
    }
    if let Some(i) = slot_of.iter().position(|&s| s == usize::MAX) {
        return Err(Error::MalformedInput(format!("index {i} is unassigned")));
    }
    LabeledPartition::new(slot_of, spec)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapPairWire<T> {
    pub input: MatrixWire<T>,
    pub output: MatrixWire<T>,
}

/// Seeded generator stanza. The optional seeds default off `unitary_seed`
/// so the common case stays a three-field object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorWire {
    pub unitary_seed: u64,
    pub antiunitary: bool,
    pub delta_rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency_ops: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency_seed: Option<u64>,
}

/// Extra operators attached by default so the recovered form is never
/// stuck with an undetermined anti-unitary flag.
pub const DEFAULT_CONSISTENCY_OPS: usize = 2;

impl GeneratorWire {
    pub fn params<T: Scalar>(&self, spec: &ClassSpec<T>) -> Result<GeneratorParams> {
        Ok(GeneratorParams {
            basis_seed: self.basis_seed.unwrap_or(self.unitary_seed.wrapping_add(1)),
            unitary_seed: self.unitary_seed,
            antiunitary: self.antiunitary,
            delta: parse_delta_rule(&self.delta_rule, spec)?,
            consistency_ops: self.consistency_ops.unwrap_or(DEFAULT_CONSISTENCY_OPS),
            consistency_seed: self
                .consistency_seed
                .unwrap_or(self.unitary_seed.wrapping_add(2)),
        })
    }
}

/// Parse `identity`, `constant:<comma-separated slot images>`, or
/// `random:<seed>`.
pub fn parse_delta_rule<T: Scalar>(text: &str, spec: &ClassSpec<T>) -> Result<DeltaRule> {
    if text == "identity" {
        return Ok(DeltaRule::Identity);
    }
    if let Some(rest) = text.strip_prefix("constant:") {
        let mapping = rest
            .split(',')
            .map(|tok| tok.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::MalformedInput(format!("constant rule: {e}")))?;
        return Ok(DeltaRule::Constant(SymmetryPerm::new(mapping, spec)?));
    }
    if let Some(rest) = text.strip_prefix("random:") {
        let seed = rest
            .trim()
            .parse::<u64>()
            .map_err(|e| Error::MalformedInput(format!("random rule seed: {e}")))?;
        return Ok(DeltaRule::PerOperator { seed });
    }
    Err(Error::MalformedInput(format!(
        "unknown delta rule {text:?}; expected identity, constant:<perm> or random:<seed>"
    )))
}

pub fn delta_rule_text(rule: &DeltaRule) -> String {
    match rule {
        DeltaRule::Identity => "identity".into(),
        DeltaRule::Constant(p) => format!(
            "constant:{}",
            p.mapping()
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
        DeltaRule::PerOperator { seed } => format!("random:{seed}"),
    }
}

/// On-disk map definition: the class plus exactly one of literal pairs or
/// a generator stanza.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapFile<T> {
    pub spec: RawClassSpec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<MapPairWire<T>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorWire>,
}

/// Validated spec, operator pairs, and the generating model when the file
/// carried a generator stanza instead of literal pairs.
pub type LoadedMap<T> = (ClassSpec<T>, MapInput<T>, Option<ModelMap<T>>);

/// Materialize a map file. For a generator stanza the returned model map
/// carries the ground truth; literal pairs come back as given, with each
/// matrix checked self-adjoint and of the ambient dimension.
pub fn load_map_input<T: Scalar>(
    file: &MapFile<T>,
    tol: &ToleranceConfig<T>,
    cap: usize,
) -> Result<LoadedMap<T>> {
    let spec = validate_spec(&file.spec, tol)?;
    match (&file.pairs, &file.generator) {
        (Some(pairs), None) => {
            let n = spec.ambient_dim();
            let mut out = Vec::with_capacity(pairs.len());
            for (k, pair) in pairs.iter().enumerate() {
                let a = matrix_from_wire(&pair.input)?;
                let b = matrix_from_wire(&pair.output)?;
                if a.nrows() != n || a.ncols() != n || b.nrows() != n || b.ncols() != n {
                    return Err(Error::MalformedInput(format!(
                        "pair {k}: expected {n}x{n} matrices"
                    )));
                }
                out.push((
                    HermitianOperator::new(a, tol.construction)?,
                    HermitianOperator::new(b, tol.construction)?,
                ));
            }
            Ok((spec.clone(), MapInput { spec, pairs: out }, None))
        }
        (None, Some(gen)) => {
            let params = gen.params(&spec)?;
            let model = ModelMap::seeded(&spec, &params, tol)?;
            let input = model.realize(tol, cap)?;
            Ok((spec, input, Some(model)))
        }
        _ => Err(Error::MalformedInput(
            "map file must contain exactly one of `pairs` or `generator`".into(),
        )),
    }
}

/// Flatten realized pairs into a literal map file (apartment members first,
/// then consistency operators), dropping generator provenance.
pub fn map_file_from_input<T: Scalar>(input: &MapInput<T>) -> MapFile<T> {
    MapFile {
        spec: input.spec.to_raw(),
        pairs: Some(
            input
                .pairs
                .iter()
                .map(|(a, b)| MapPairWire {
                    input: matrix_to_wire(a.matrix()),
                    output: matrix_to_wire(b.matrix()),
                })
                .collect(),
        ),
        generator: None,
    }
}

/// Report payload for a recovered canonical form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionWire<T> {
    pub unitary: MatrixWire<T>,
    pub antiunitary: bool,
    pub flag_ambiguous: bool,
    pub per_operator_perm: Vec<Vec<usize>>,
    pub delta_ambiguous: bool,
    pub residual: T,
}

pub fn decomposition_to_wire<T: Scalar>(d: &Decomposition<T>) -> DecompositionWire<T> {
    DecompositionWire {
        unitary: matrix_to_wire(d.unitary.columns()),
        antiunitary: d.antiunitary,
        flag_ambiguous: d.flag_ambiguous,
        per_operator_perm: d
            .per_operator_perm
            .iter()
            .map(|p| p.mapping().to_vec())
            .collect(),
        delta_ambiguous: d.delta_ambiguous,
        residual: d.residual,
    }
}
