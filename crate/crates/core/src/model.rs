//! Domain types shared by every stage of the pipeline.
//!
//! A problem [`Instance`] bundles the lattice dimension, the initial state,
//! the ordered set of control offsets, the number of adversary labels and a
//! finite safe set. Instances are only constructed through validation, so
//! every other module may rely on their invariants without rechecking.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest safe set the generators will materialize.
pub const MAX_SAFE_SET_POINTS: usize = 10_000_000;

/// A point (or displacement) of the integer lattice `Z^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct IntVector(Vec<i64>);

impl IntVector {
    pub fn new(coords: Vec<i64>) -> Self {
        IntVector(coords)
    }

    pub fn zeros(n: usize) -> Self {
        IntVector(vec![0; n])
    }

    /// `sign * e_axis` in dimension `n`.
    pub fn unit(n: usize, axis: usize, sign: i64) -> Self {
        let mut coords = vec![0; n];
        coords[axis] = sign;
        IntVector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }

    pub fn add(&self, other: &IntVector) -> IntVector {
        debug_assert_eq!(self.dim(), other.dim());
        IntVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &IntVector) -> IntVector {
        debug_assert_eq!(self.dim(), other.dim());
        IntVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn norm_inf(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn norm_one(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl From<Vec<i64>> for IntVector {
    fn from(coords: Vec<i64>) -> Self {
        IntVector(coords)
    }
}

impl<const N: usize> From<[i64; N]> for IntVector {
    fn from(coords: [i64; N]) -> Self {
        IntVector(coords.to_vec())
    }
}

/// Comma-joined coordinates, e.g. `-1,0`. This is also the key format used
/// in labeling and policy files.
impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for IntVector {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ModelError::BadVector(s.to_string()));
        }
        s.split(',')
            .map(|part| part.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map(IntVector)
            .map_err(|_| ModelError::BadVector(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("control {0} listed more than once")]
    DuplicateControl(IntVector),
    #[error("safe-set point {0} listed more than once")]
    DuplicatePoint(IntVector),
    #[error("control set is empty")]
    EmptyControlSet,
    #[error("initial state {0} is not in the safe set")]
    X0NotSafe(IntVector),
    #[error("cannot split {controls} controls into {m} nonempty cells")]
    MTooLarge { m: usize, controls: usize },
    #[error("label count must be at least 1")]
    ZeroLabels,
    #[error("ball radius must be nonnegative, got {0}")]
    NegativeRadius(i64),
    #[error("safe set would hold more than {MAX_SAFE_SET_POINTS} points")]
    SafeSetTooLarge,
    #[error("explicit safe set is empty")]
    EmptySafeSet,
    #[error("cannot parse {0:?} as a comma-separated integer vector")]
    BadVector(String),
    #[error("{0} is not a control of this instance")]
    UnknownControl(IntVector),
    #[error("label {label} out of range 1..={m}")]
    LabelOutOfRange { label: usize, m: usize },
    #[error("control {0} has no label")]
    Unlabeled(IntVector),
    #[error("control index {0} appears in more than one cell")]
    OverlappingCells(usize),
    #[error("control index {0} out of range")]
    ControlIndexOutOfRange(usize),
}

/// Ordered, duplicate-free list of control offsets `u_1, ..., u_|U|`.
///
/// The order is significant: the derandomized labeling visits controls in
/// this order and policies break ties by it.
#[derive(Clone, Debug)]
pub struct ControlSet {
    controls: Vec<IntVector>,
    index: HashMap<IntVector, usize>,
}

impl ControlSet {
    pub fn new(controls: Vec<IntVector>) -> Result<Self, ModelError> {
        let first = controls.first().ok_or(ModelError::EmptyControlSet)?;
        let n = first.dim();
        if n == 0 {
            return Err(ModelError::ZeroDimension);
        }
        let mut index = HashMap::with_capacity(controls.len());
        for (i, u) in controls.iter().enumerate() {
            if u.dim() != n {
                return Err(ModelError::DimensionMismatch {
                    what: "control",
                    expected: n,
                    found: u.dim(),
                });
            }
            if index.insert(u.clone(), i).is_some() {
                return Err(ModelError::DuplicateControl(u.clone()));
            }
        }
        Ok(ControlSet { controls, index })
    }

    /// `{0, ±e_1, ..., ±e_n}` in the order `e_1, -e_1, ..., e_n, -e_n, 0`.
    pub fn axis_moves(n: usize) -> Self {
        let mut controls = Vec::with_capacity(2 * n + 1);
        for axis in 0..n {
            controls.push(IntVector::unit(n, axis, 1));
            controls.push(IntVector::unit(n, axis, -1));
        }
        controls.push(IntVector::zeros(n));
        ControlSet::new(controls).expect("axis moves are distinct")
    }

    /// All of `{-1, 1}^n`, ordered by reading the vector as a bit string
    /// (most significant coordinate first, `-1` as 0).
    pub fn sign_vectors(n: usize) -> Self {
        assert!(
            (1..=20).contains(&n),
            "sign vectors supported for 1 <= n <= 20"
        );
        let controls = (0..1usize << n)
            .map(|bits| {
                IntVector(
                    (0..n)
                        .map(|i| if bits >> (n - 1 - i) & 1 == 1 { 1 } else { -1 })
                        .collect(),
                )
            })
            .collect();
        ControlSet::new(controls).expect("sign vectors are distinct")
    }

    pub fn dim(&self) -> usize {
        self.controls[0].dim()
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn get(&self, i: usize) -> &IntVector {
        &self.controls[i]
    }

    pub fn as_slice(&self) -> &[IntVector] {
        &self.controls
    }

    pub fn iter(&self) -> std::slice::Iter<'_, IntVector> {
        self.controls.iter()
    }

    pub fn index_of(&self, u: &IntVector) -> Option<usize> {
        self.index.get(u).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SafeSetKind {
    /// `{x : ||x||_inf <= k}`
    InfBall(i64),
    /// `{x : ||x||_1 <= k}`
    OneBall(i64),
    Explicit,
}

/// A finite safe set, materialized eagerly.
#[derive(Clone, Debug)]
pub struct SafeSet {
    kind: SafeSetKind,
    points: Vec<IntVector>,
    index: HashMap<IntVector, usize>,
}

impl SafeSet {
    pub fn inf_ball(n: usize, k: i64) -> Result<Self, ModelError> {
        Self::ball(n, k, SafeSetKind::InfBall(k), |_| true)
    }

    pub fn one_ball(n: usize, k: i64) -> Result<Self, ModelError> {
        Self::ball(n, k, SafeSetKind::OneBall(k), |p| p.norm_one() <= k)
    }

    pub fn explicit(points: Vec<IntVector>) -> Result<Self, ModelError> {
        let first = points.first().ok_or(ModelError::EmptySafeSet)?;
        let n = first.dim();
        if n == 0 {
            return Err(ModelError::ZeroDimension);
        }
        let mut index = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.dim() != n {
                return Err(ModelError::DimensionMismatch {
                    what: "safe-set point",
                    expected: n,
                    found: p.dim(),
                });
            }
            if index.insert(p.clone(), i).is_some() {
                return Err(ModelError::DuplicatePoint(p.clone()));
            }
        }
        Ok(SafeSet {
            kind: SafeSetKind::Explicit,
            points,
            index,
        })
    }

    fn ball(
        n: usize,
        k: i64,
        kind: SafeSetKind,
        keep: impl Fn(&IntVector) -> bool,
    ) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::ZeroDimension);
        }
        if k < 0 {
            return Err(ModelError::NegativeRadius(k));
        }
        let side = usize::try_from(2 * k + 1).map_err(|_| ModelError::SafeSetTooLarge)?;
        let total = u32::try_from(n)
            .ok()
            .and_then(|e| side.checked_pow(e))
            .filter(|&t| t <= MAX_SAFE_SET_POINTS)
            .ok_or(ModelError::SafeSetTooLarge)?;

        let mut points = Vec::with_capacity(total);
        let mut cur = vec![-k; n];
        loop {
            let p = IntVector(cur.clone());
            if keep(&p) {
                points.push(p);
            }
            // odometer over [-k, k]^n, last coordinate fastest
            let mut axis = n;
            loop {
                if axis == 0 {
                    let index = points
                        .iter()
                        .enumerate()
                        .map(|(i, p)| (p.clone(), i))
                        .collect();
                    return Ok(SafeSet {
                        kind,
                        points,
                        index,
                    });
                }
                axis -= 1;
                if cur[axis] < k {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = -k;
            }
        }
    }

    pub fn kind(&self) -> &SafeSetKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, IntVector::dim)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[IntVector] {
        &self.points
    }

    pub fn contains(&self, x: &IntVector) -> bool {
        self.index.contains_key(x)
    }

    /// Position of `x` in [`SafeSet::points`].
    pub fn index_of(&self, x: &IntVector) -> Option<usize> {
        self.index.get(x).copied()
    }
}

/// A validated problem instance.
#[derive(Clone, Debug)]
pub struct Instance {
    x0: IntVector,
    controls: ControlSet,
    m: usize,
    safe_set: SafeSet,
}

impl Instance {
    pub fn new(
        x0: IntVector,
        controls: ControlSet,
        m: usize,
        safe_set: SafeSet,
    ) -> Result<Self, ModelError> {
        let n = controls.dim();
        if x0.dim() != n {
            return Err(ModelError::DimensionMismatch {
                what: "x0",
                expected: n,
                found: x0.dim(),
            });
        }
        if safe_set.dim() != n {
            return Err(ModelError::DimensionMismatch {
                what: "safe set",
                expected: n,
                found: safe_set.dim(),
            });
        }
        if m == 0 {
            return Err(ModelError::ZeroLabels);
        }
        if m > controls.len() {
            return Err(ModelError::MTooLarge {
                m,
                controls: controls.len(),
            });
        }
        if !safe_set.contains(&x0) {
            return Err(ModelError::X0NotSafe(x0));
        }
        Ok(Instance {
            x0,
            controls,
            m,
            safe_set,
        })
    }

    /// The damaged-vehicle family: axis moves plus standing still, safe set
    /// `||x||_inf <= k`, starting at the origin.
    pub fn vehicle(n: usize, k: i64, m: usize) -> Result<Self, ModelError> {
        Instance::new(
            IntVector::zeros(n),
            ControlSet::axis_moves(n),
            m,
            SafeSet::inf_ball(n, k)?,
        )
    }

    /// Same instance with a different label count.
    pub fn with_m(&self, m: usize) -> Result<Self, ModelError> {
        Instance::new(
            self.x0.clone(),
            self.controls.clone(),
            m,
            self.safe_set.clone(),
        )
    }

    pub fn dim(&self) -> usize {
        self.controls.dim()
    }

    pub fn x0(&self) -> &IntVector {
        &self.x0
    }

    pub fn controls(&self) -> &ControlSet {
        &self.controls
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn safe_set(&self) -> &SafeSet {
        &self.safe_set
    }
}

/// A total map from controls to labels.
///
/// Labels are zero-based (`0..m`) in the Rust API. Files and the command line
/// present them one-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Labeling {
    labels: Vec<usize>,
    m: usize,
}

impl Labeling {
    pub fn new(labels: Vec<usize>, m: usize) -> Result<Self, ModelError> {
        if m == 0 {
            return Err(ModelError::ZeroLabels);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= m) {
            return Err(ModelError::LabelOutOfRange { label: bad + 1, m });
        }
        Ok(Labeling { labels, m })
    }

    /// Every control gets `label`.
    pub fn constant(len: usize, label: usize, m: usize) -> Result<Self, ModelError> {
        Labeling::new(vec![label; len], m)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, control: usize) -> usize {
        self.labels[control]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn to_partition(&self) -> Partition {
        labeling_to_partition(self)
    }
}

/// `m` disjoint cells of control indices covering the whole control set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
    label_of: Vec<usize>,
}

impl Partition {
    /// Builds a partition from cells of control indices. Every index in
    /// `0..num_controls` must appear in exactly one cell.
    pub fn from_cells(mut cells: Vec<Vec<usize>>, num_controls: usize) -> Result<Self, ModelError> {
        if cells.is_empty() {
            return Err(ModelError::ZeroLabels);
        }
        let mut label_of = vec![usize::MAX; num_controls];
        for (d, cell) in cells.iter_mut().enumerate() {
            cell.sort_unstable();
            for &u in cell.iter() {
                let slot = label_of
                    .get_mut(u)
                    .ok_or(ModelError::ControlIndexOutOfRange(u))?;
                if *slot != usize::MAX {
                    return Err(ModelError::OverlappingCells(u));
                }
                *slot = d;
            }
        }
        if let Some(missing) = label_of.iter().position(|&l| l == usize::MAX) {
            return Err(ModelError::ControlIndexOutOfRange(missing));
        }
        Ok(Partition { cells, label_of })
    }

    /// Builds a partition from cells given as control vectors.
    pub fn from_vectors(
        controls: &ControlSet,
        cells: Vec<Vec<IntVector>>,
    ) -> Result<Self, ModelError> {
        let mut seen = vec![false; controls.len()];
        let mut idx_cells = Vec::with_capacity(cells.len());
        for cell in cells {
            let mut idx = Vec::with_capacity(cell.len());
            for u in cell {
                let i = controls
                    .index_of(&u)
                    .ok_or_else(|| ModelError::UnknownControl(u.clone()))?;
                if seen[i] {
                    return Err(ModelError::OverlappingCells(i));
                }
                seen[i] = true;
                idx.push(i);
            }
            idx_cells.push(idx);
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(ModelError::Unlabeled(controls.get(i).clone()));
        }
        Partition::from_cells(idx_cells, controls.len())
    }

    pub fn m(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// Control indices in cell `d`, ascending.
    pub fn cell(&self, d: usize) -> &[usize] {
        &self.cells[d]
    }

    pub fn label_of(&self, control: usize) -> usize {
        self.label_of[control]
    }

    pub fn has_empty_cell(&self) -> bool {
        self.cells.iter().any(Vec::is_empty)
    }

    pub fn to_labeling(&self) -> Labeling {
        Labeling {
            labels: self.label_of.clone(),
            m: self.cells.len(),
        }
    }

    /// The same partition with cells sorted by their smallest control index,
    /// so that partitions differing only by a relabeling compare equal.
    pub fn canonical(&self) -> Partition {
        let mut cells = self.cells.clone();
        cells.sort_by_key(|c| c.first().copied().unwrap_or(usize::MAX));
        Partition::from_cells(cells, self.label_of.len()).expect("relabeling keeps a partition")
    }
}

/// Cell `d` collects every control labeled `d`.
pub fn labeling_to_partition(lab: &Labeling) -> Partition {
    let mut cells = vec![Vec::new(); lab.m];
    for (u, &d) in lab.labels.iter().enumerate() {
        cells[d].push(u);
    }
    Partition {
        cells,
        label_of: lab.labels.clone(),
    }
}
