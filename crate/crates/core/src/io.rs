//! JSON file formats.
//!
//! * instance: `{"n", "x0", "controls", "m", "safe_set": {"type": "inf_ball" | "one_ball", "k"} | {"type": "explicit", "points"}}`
//! * labeling / partition: `{"labels": {"<control>": label}}`, labels one-based
//! * policy: `{"winning_set": [[..]], "policy": {"<state>|<label>": "<control index>"}}`,
//!   labels one-based, control indices zero-based into the instance's `controls`
//! * code: `{"n", "m", "k", "encoder": {"<state>|<message>": "<bits>"}, "decoder": {"<bits>": message}}`
//!
//! Vectors used as keys are comma-joined integers. Maps are written with
//! sorted keys so that output is byte-stable.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Policy, PolicyError};
use crate::model::Partition;
use crate::model::{ControlSet, Instance, IntVector, Labeling, ModelError, SafeSet, SafeSetKind};
use crate::rds::{bits_to_codeword, codeword_to_bits, CodeDesign, RdsError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Rds(#[from] RdsError),
    #[error("{0}")]
    Format(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SafeSetSpec {
    InfBall { k: i64 },
    OneBall { k: i64 },
    Explicit { points: Vec<Vec<i64>> },
}

/// Unvalidated instance as read from disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub x0: Vec<i64>,
    pub controls: Vec<Vec<i64>>,
    pub m: usize,
    pub safe_set: SafeSetSpec,
}

impl InstanceSpec {
    pub fn from_instance(inst: &Instance) -> Self {
        let safe_set = match inst.safe_set().kind() {
            SafeSetKind::InfBall(k) => SafeSetSpec::InfBall { k: *k },
            SafeSetKind::OneBall(k) => SafeSetSpec::OneBall { k: *k },
            SafeSetKind::Explicit => SafeSetSpec::Explicit {
                points: inst
                    .safe_set()
                    .points()
                    .iter()
                    .map(|p| p.coords().to_vec())
                    .collect(),
            },
        };
        InstanceSpec {
            n: inst.dim(),
            x0: inst.x0().coords().to_vec(),
            controls: inst
                .controls()
                .iter()
                .map(|u| u.coords().to_vec())
                .collect(),
            m: inst.m(),
            safe_set,
        }
    }
}

/// Checks every instance invariant and materializes the safe set.
pub fn validate_instance(raw: &InstanceSpec) -> Result<Instance, ModelError> {
    if raw.n == 0 {
        return Err(ModelError::ZeroDimension);
    }
    let check_dim = |what, len: usize| {
        if len == raw.n {
            Ok(())
        } else {
            Err(ModelError::DimensionMismatch {
                what,
                expected: raw.n,
                found: len,
            })
        }
    };
    check_dim("x0", raw.x0.len())?;
    for u in &raw.controls {
        check_dim("control", u.len())?;
    }
    let controls = ControlSet::new(raw.controls.iter().cloned().map(IntVector::new).collect())?;
    let safe_set = match &raw.safe_set {
        SafeSetSpec::InfBall { k } => SafeSet::inf_ball(raw.n, *k)?,
        SafeSetSpec::OneBall { k } => SafeSet::one_ball(raw.n, *k)?,
        SafeSetSpec::Explicit { points } => {
            for p in points {
                check_dim("safe-set point", p.len())?;
            }
            SafeSet::explicit(points.iter().cloned().map(IntVector::new).collect())?
        }
    };
    Instance::new(IntVector::new(raw.x0.clone()), controls, raw.m, safe_set)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingFile {
    pub labels: BTreeMap<String, usize>,
}

pub fn labeling_to_file(controls: &ControlSet, lab: &Labeling) -> LabelingFile {
    LabelingFile {
        labels: controls
            .iter()
            .enumerate()
            .map(|(i, u)| (u.to_string(), lab.label(i) + 1))
            .collect(),
    }
}

/// Reads a labeling of `controls` with labels in `1..=m`. Every control must
/// be listed.
pub fn labeling_from_file(
    controls: &ControlSet,
    m: usize,
    file: &LabelingFile,
) -> Result<Labeling, ModelError> {
    let mut labels = vec![usize::MAX; controls.len()];
    for (key, &label) in &file.labels {
        let u: IntVector = key.parse()?;
        let i = controls
            .index_of(&u)
            .ok_or_else(|| ModelError::UnknownControl(u.clone()))?;
        if label == 0 || label > m {
            return Err(ModelError::LabelOutOfRange { label, m });
        }
        labels[i] = label - 1;
    }
    if let Some(i) = labels.iter().position(|&l| l == usize::MAX) {
        return Err(ModelError::Unlabeled(controls.get(i).clone()));
    }
    Labeling::new(labels, m)
}

pub fn partition_from_file(
    controls: &ControlSet,
    m: usize,
    file: &LabelingFile,
) -> Result<Partition, ModelError> {
    labeling_from_file(controls, m, file).map(|l| l.to_partition())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub winning_set: Vec<Vec<i64>>,
    pub policy: BTreeMap<String, String>,
}

pub fn policy_to_file(policy: &Policy) -> PolicyFile {
    let mut map = BTreeMap::new();
    for (x, row) in policy.entries() {
        for (d, &u) in row.iter().enumerate() {
            map.insert(format!("{x}|{}", d + 1), u.to_string());
        }
    }
    PolicyFile {
        winning_set: policy
            .domain()
            .iter()
            .map(|x| x.coords().to_vec())
            .collect(),
        policy: map,
    }
}

/// Rebuilds a policy with `m` labels. Every state of `winning_set` needs an
/// entry for every label, and no other keys may appear.
pub fn policy_from_file(file: &PolicyFile, m: usize) -> Result<Policy, IoError> {
    let mut rows: BTreeMap<IntVector, Vec<usize>> = BTreeMap::new();
    let mut order = Vec::with_capacity(file.winning_set.len());
    for x in &file.winning_set {
        let x = IntVector::new(x.clone());
        if rows.insert(x.clone(), vec![usize::MAX; m]).is_some() {
            return Err(PolicyError::DuplicateState(x).into());
        }
        order.push(x);
    }
    for (key, value) in &file.policy {
        let (state, label) = key
            .rsplit_once('|')
            .ok_or_else(|| IoError::Format(format!("policy key {key:?} lacks '|'")))?;
        let x: IntVector = state.parse()?;
        let d: usize = label
            .parse()
            .map_err(|_| IoError::Format(format!("bad label in policy key {key:?}")))?;
        if d == 0 || d > m {
            return Err(ModelError::LabelOutOfRange { label: d, m }.into());
        }
        let u: usize = value
            .parse()
            .map_err(|_| IoError::Format(format!("bad control index {value:?}")))?;
        let row = rows
            .get_mut(&x)
            .ok_or_else(|| IoError::Format(format!("state {x} is not in winning_set")))?;
        row[d - 1] = u;
    }
    let mut entries = Vec::with_capacity(order.len());
    for x in order {
        let row = rows.remove(&x).expect("inserted above");
        if let Some(d) = row.iter().position(|&u| u == usize::MAX) {
            return Err(IoError::Format(format!(
                "no entry for ({x}, label {})",
                d + 1
            )));
        }
        entries.push((x, row));
    }
    Ok(Policy::new(m, entries)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeFile {
    pub n: usize,
    pub m: usize,
    pub k: i64,
    pub encoder: BTreeMap<String, String>,
    pub decoder: BTreeMap<String, usize>,
}

pub fn code_to_file(design: &CodeDesign) -> CodeFile {
    let mut encoder = BTreeMap::new();
    for (x, row) in design.encoder().entries() {
        for (msg, &u) in row.iter().enumerate() {
            encoder.insert(
                format!("{x}|{}", msg + 1),
                codeword_to_bits(design.codewords().get(u)),
            );
        }
    }
    let decoder = design
        .codewords()
        .iter()
        .enumerate()
        .map(|(u, w)| (codeword_to_bits(w), design.partition().label_of(u) + 1))
        .collect();
    CodeFile {
        n: design.n(),
        m: design.m(),
        k: design.k(),
        encoder,
        decoder,
    }
}

pub fn code_from_file(file: &CodeFile) -> Result<CodeDesign, IoError> {
    let words = ControlSet::sign_vectors(file.n);
    let mut cells = vec![Vec::new(); file.m];
    for (bits, &msg) in &file.decoder {
        let w = bits_to_codeword(bits)?;
        let u = words
            .index_of(&w)
            .ok_or_else(|| IoError::Format(format!("codeword {bits} has the wrong length")))?;
        if msg == 0 || msg > file.m {
            return Err(ModelError::LabelOutOfRange {
                label: msg,
                m: file.m,
            }
            .into());
        }
        cells[msg - 1].push(u);
    }
    let partition = Partition::from_cells(cells, words.len())?;

    let mut rows: BTreeMap<IntVector, Vec<usize>> = BTreeMap::new();
    for (key, bits) in &file.encoder {
        let (state, msg) = key
            .rsplit_once('|')
            .ok_or_else(|| IoError::Format(format!("encoder key {key:?} lacks '|'")))?;
        let x: IntVector = state.parse()?;
        let msg: usize = msg
            .parse()
            .ok()
            .filter(|&d| (1..=file.m).contains(&d))
            .ok_or_else(|| IoError::Format(format!("bad message in encoder key {key:?}")))?;
        let u = words
            .index_of(&bits_to_codeword(bits)?)
            .ok_or_else(|| IoError::Format(format!("codeword {bits} has the wrong length")))?;
        rows.entry(x).or_insert_with(|| vec![usize::MAX; file.m])[msg - 1] = u;
    }
    let mut entries = Vec::with_capacity(rows.len());
    for (x, row) in rows {
        if row.contains(&usize::MAX) {
            return Err(IoError::Format(format!("encoder incomplete at state {x}")));
        }
        entries.push((x, row));
    }
    let encoder = Policy::new(file.m, entries)?;
    Ok(CodeDesign::from_parts(file.n, file.k, partition, encoder)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty-printed with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_instance(path: &Path) -> Result<Instance, IoError> {
    let spec: InstanceSpec = read_json(path)?;
    Ok(validate_instance(&spec)?)
}
