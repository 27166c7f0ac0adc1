//! Line codes with a bounded running digital sum.
//!
//! Each of `m` messages is sent as a codeword in `{0,1}^n`. Writing a
//! codeword as a vector in `{-1,1}^n` (0 becomes -1), the running digital
//! sum evolves as `x(t+1) = x(t) + u(t)` from `x(0) = 0`. Splitting the
//! codewords into `m` disjoint cells, one per message, and choosing within
//! the cell by the current sum is exactly a partition-design problem with
//! safe set `||x||_inf <= k`.
//!
//! For `k = 2` there is an explicit subgraph to start from:
//! `V1 = {-1,1}^n` together with the points of `{-2,0,2}^n` having at least
//! `⌈n/2⌉` zero coordinates. Every vertex of `V1` has out-degree at least
//! `2^(n-1)` in it and every other vertex at least `2^⌊n/2⌋`, which clears
//! the sufficient labeling bound once `n >= 3 max(log2 m, 11)`.

use thiserror::Error;

use crate::game::{Policy, PolicyError};
use crate::graph::build_induced;
use crate::model::{ControlSet, Instance, IntVector, ModelError, Partition, SafeSet};
use crate::synthesis::{
    synthesize_fpcp, synthesize_on_subgraph, Status, SynthesisConfig, SynthesisError,
    SynthesisOutcome,
};

/// Largest codeword length supported.
pub const MAX_CODE_LENGTH: usize = 20;

#[derive(Debug, Error)]
pub enum RdsError {
    #[error("no code found (synthesis status {0:?})")]
    DesignNotFound(Status),
    #[error("codeword length must be in 1..={MAX_CODE_LENGTH}, got {0}")]
    BadLength(usize),
    #[error("{m} messages do not fit in codewords of length {n}")]
    TooManyMessages { m: usize, n: usize },
    #[error("{0} is not a codeword")]
    DecodeError(String),
    #[error("message {message} out of range 1..={m}")]
    MessageOutOfRange { message: usize, m: usize },
    #[error("encoder has no entry for running sum ({0})")]
    UnknownState(IntVector),
    #[error("inconsistent code: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// The explicit subgraph for `k = 2`: sign vectors first, then the
/// `{-2,0,2}` points with at least `⌈n/2⌉` zeros.
pub fn build_shat_prop6(n: usize) -> Vec<IntVector> {
    assert!((1..=MAX_CODE_LENGTH).contains(&n), "length out of range");
    let mut out: Vec<IntVector> = ControlSet::sign_vectors(n).iter().cloned().collect();
    let need_zeros = n.div_ceil(2);
    let mut cur = vec![-2i64; n];
    loop {
        if cur.iter().filter(|&&c| c == 0).count() >= need_zeros {
            out.push(IntVector::new(cur.clone()));
        }
        let mut axis = n;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if cur[axis] < 2 {
                cur[axis] += 2;
                break;
            }
            cur[axis] = -2;
        }
    }
}

/// `n >= 3 max(log2 m, 11)`: codeword length sufficient for `k = 2`.
pub fn check_prop6(n: usize, m: usize) -> bool {
    assert!(n >= 1 && m >= 1);
    n as f64 >= 3.0 * (m as f64).log2().max(11.0)
}

/// `0`/`1` string for a `{-1,1}` codeword.
pub fn codeword_to_bits(u: &IntVector) -> String {
    u.coords()
        .iter()
        .map(|&c| if c > 0 { '1' } else { '0' })
        .collect()
}

pub fn bits_to_codeword(bits: &str) -> Result<IntVector, RdsError> {
    bits.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(-1),
            '1' => Ok(1),
            _ => Err(RdsError::DecodeError(bits.to_string())),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(IntVector::new)
}

/// A designed code: message cells plus a state-dependent encoder.
#[derive(Clone, Debug)]
pub struct CodeDesign {
    n: usize,
    m: usize,
    k: i64,
    codewords: ControlSet,
    partition: Partition,
    encoder: Policy,
    shat: Vec<IntVector>,
}

impl CodeDesign {
    /// Assembles a design and checks it: every encoder choice lies in the
    /// message's cell and keeps the running sum inside the encoder's domain,
    /// which must contain 0 and stay within `||x||_inf <= k`.
    pub fn from_parts(
        n: usize,
        k: i64,
        partition: Partition,
        encoder: Policy,
    ) -> Result<Self, RdsError> {
        if !(1..=MAX_CODE_LENGTH).contains(&n) {
            return Err(RdsError::BadLength(n));
        }
        let codewords = ControlSet::sign_vectors(n);
        let m = partition.m();
        if encoder.m() != m || partition.to_labeling().len() != codewords.len() {
            return Err(RdsError::Inconsistent(
                "encoder, partition and codeword counts disagree".into(),
            ));
        }
        if partition.has_empty_cell() {
            return Err(RdsError::Inconsistent("a message has no codeword".into()));
        }
        encoder.check_closed(&codewords, &partition)?;
        if !encoder.contains(&IntVector::zeros(n)) {
            return Err(RdsError::Inconsistent(
                "encoder undefined at the origin".into(),
            ));
        }
        if let Some(x) = encoder.domain().iter().find(|x| x.norm_inf() > k) {
            return Err(RdsError::Inconsistent(format!(
                "state ({x}) exceeds the bound {k}"
            )));
        }
        let shat = encoder.domain().to_vec();
        Ok(CodeDesign {
            n,
            m,
            k,
            codewords,
            partition,
            encoder,
            shat,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn codewords(&self) -> &ControlSet {
        &self.codewords
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn encoder(&self) -> &Policy {
        &self.encoder
    }

    /// Running-sum states the encoder may visit.
    pub fn shat(&self) -> &[IntVector] {
        &self.shat
    }

    /// Codeword sent for zero-based `message` at running sum `state`.
    pub fn encode_at(&self, state: &IntVector, message: usize) -> Result<&IntVector, RdsError> {
        if message >= self.m {
            return Err(RdsError::MessageOutOfRange {
                message: message + 1,
                m: self.m,
            });
        }
        let u = self
            .encoder
            .control(state, message)
            .ok_or_else(|| RdsError::UnknownState(state.clone()))?;
        Ok(self.codewords.get(u))
    }

    /// Zero-based message carried by `codeword`.
    pub fn decode_word(&self, codeword: &IntVector) -> Result<usize, RdsError> {
        self.codewords
            .index_of(codeword)
            .map(|u| self.partition.label_of(u))
            .ok_or_else(|| RdsError::DecodeError(codeword.to_string()))
    }

    pub fn encoder_stream(&self) -> Encoder<'_> {
        Encoder {
            design: self,
            rds: IntVector::zeros(self.n),
        }
    }

    pub fn decoder_stream(&self) -> Decoder<'_> {
        Decoder {
            design: self,
            rds: IntVector::zeros(self.n),
        }
    }
}

/// Stateful encoder tracking the running digital sum.
pub struct Encoder<'a> {
    design: &'a CodeDesign,
    rds: IntVector,
}

impl Encoder<'_> {
    pub fn encode(&mut self, message: usize) -> Result<IntVector, RdsError> {
        let u = self.design.encode_at(&self.rds, message)?.clone();
        self.rds = self.rds.add(&u);
        Ok(u)
    }

    pub fn rds(&self) -> &IntVector {
        &self.rds
    }
}

/// Stateful decoder; tracks the same running sum as the sender.
pub struct Decoder<'a> {
    design: &'a CodeDesign,
    rds: IntVector,
}

impl Decoder<'_> {
    pub fn decode(&mut self, codeword: &IntVector) -> Result<usize, RdsError> {
        let msg = self.design.decode_word(codeword)?;
        self.rds = self.rds.add(codeword);
        Ok(msg)
    }

    pub fn rds(&self) -> &IntVector {
        &self.rds
    }
}

pub fn encode_stream(design: &CodeDesign, messages: &[usize]) -> Result<Vec<IntVector>, RdsError> {
    let mut enc = design.encoder_stream();
    messages.iter().map(|&msg| enc.encode(msg)).collect()
}

pub fn decode_stream(design: &CodeDesign, codewords: &[IntVector]) -> Result<Vec<usize>, RdsError> {
    let mut dec = design.decoder_stream();
    codewords.iter().map(|u| dec.decode(u)).collect()
}

/// The partition-design instance behind a code: all sign vectors as
/// controls, `||x||_inf <= k` as the safe set, starting from 0.
pub fn rds_instance(n: usize, m: usize, k: i64) -> Result<Instance, RdsError> {
    if !(1..=MAX_CODE_LENGTH).contains(&n) {
        return Err(RdsError::BadLength(n));
    }
    if m > 1usize << n {
        return Err(RdsError::TooManyMessages { m, n });
    }
    Ok(Instance::new(
        IntVector::zeros(n),
        ControlSet::sign_vectors(n),
        m,
        SafeSet::inf_ball(n, k)?,
    )?)
}

/// Designs a code for `m` messages of length `n` keeping the running sum
/// within `k`. For `k = 2` the explicit subgraph is tried before generic
/// synthesis.
pub fn design_code(
    n: usize,
    m: usize,
    k: i64,
    config: &SynthesisConfig,
) -> Result<CodeDesign, RdsError> {
    let inst = rds_instance(n, m, k)?;
    let mut outcome = None;
    if k == 2 {
        let g = build_induced(&build_shat_prop6(n), inst.controls());
        let out = synthesize_on_subgraph(&inst, g, config)?;
        if out.status != Status::Unknown {
            outcome = Some(out);
        }
    }
    let outcome = match outcome {
        Some(out) => out,
        None => synthesize_fpcp(&inst, config)?,
    };
    from_outcome(n, k, outcome)
}

fn from_outcome(n: usize, k: i64, out: SynthesisOutcome) -> Result<CodeDesign, RdsError> {
    match (out.status, out.partition, out.policy) {
        (Status::Solved, Some(partition), Some(policy)) => {
            CodeDesign::from_parts(n, k, partition, policy)
        }
        (status, _, _) => Err(RdsError::DesignNotFound(status)),
    }
}
