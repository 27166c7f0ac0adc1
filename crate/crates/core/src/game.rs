//! Safety game under a fixed partition of the controls.
//!
//! Each round the adversary names a cell `d` and the controller must apply
//! some control from that cell while staying inside the safe set. The
//! controller's winning region is the greatest fixed point
//!
//! ```text
//! W = { x in W : for every d there is u in U(d) with x + u in W }
//! ```
//!
//! computed two ways: by naive rounds of simultaneous removal, and by the
//! linear-time counter/worklist attractor. Both extract the same memoryless
//! policy, choosing the first qualifying control in control-set order.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::model::{ControlSet, Instance, IntVector, Partition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("policy row for {state} has {found} entries, expected {expected}")]
    RowLength {
        state: IntVector,
        expected: usize,
        found: usize,
    },
    #[error("state {0} appears twice in the policy")]
    DuplicateState(IntVector),
    #[error(
        "policy maps ({state}, label {label}) to control {control}, which is not in that cell"
    )]
    WrongCell {
        state: IntVector,
        label: usize,
        control: usize,
    },
    #[error("policy maps ({state}, label {label}) outside its own domain")]
    LeavesDomain { state: IntVector, label: usize },
    #[error("control index {0} out of range")]
    BadControl(usize),
}

/// A memoryless policy: `(state, label) -> control index`, defined on
/// `domain x 0..m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    m: usize,
    domain: Vec<IntVector>,
    index: HashMap<IntVector, usize>,
    table: Vec<Vec<usize>>,
}

impl Policy {
    /// Each entry is a state with one control index per label.
    pub fn new(m: usize, entries: Vec<(IntVector, Vec<usize>)>) -> Result<Self, PolicyError> {
        let mut domain = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        let mut table = Vec::with_capacity(entries.len());
        for (x, row) in entries {
            if row.len() != m {
                return Err(PolicyError::RowLength {
                    state: x,
                    expected: m,
                    found: row.len(),
                });
            }
            if index.insert(x.clone(), domain.len()).is_some() {
                return Err(PolicyError::DuplicateState(x));
            }
            domain.push(x);
            table.push(row);
        }
        Ok(Policy {
            m,
            domain,
            index,
            table,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn domain(&self) -> &[IntVector] {
        &self.domain
    }

    pub fn contains(&self, x: &IntVector) -> bool {
        self.index.contains_key(x)
    }

    /// Control index chosen at `x` when the adversary names `d`.
    pub fn control(&self, x: &IntVector, d: usize) -> Option<usize> {
        self.index.get(x).map(|&i| self.table[i][d])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&IntVector, &[usize])> {
        self.domain.iter().zip(self.table.iter().map(Vec::as_slice))
    }

    /// Checks that every choice respects the partition and keeps the state in
    /// the policy's own domain. A policy passing this check whose domain lies
    /// inside the safe set is winning from every state of its domain.
    pub fn check_closed(
        &self,
        controls: &ControlSet,
        partition: &Partition,
    ) -> Result<(), PolicyError> {
        for (x, row) in self.entries() {
            for (d, &u) in row.iter().enumerate() {
                if u >= controls.len() {
                    return Err(PolicyError::BadControl(u));
                }
                if partition.label_of(u) != d {
                    return Err(PolicyError::WrongCell {
                        state: x.clone(),
                        label: d,
                        control: u,
                    });
                }
                if !self.contains(&x.add(controls.get(u))) {
                    return Err(PolicyError::LeavesDomain {
                        state: x.clone(),
                        label: d,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Outcome of solving one safety game.
#[derive(Clone, Debug)]
pub struct GameResult {
    /// Maximal winning region, in safe-set order.
    pub winning_set: Vec<IntVector>,
    /// Defined exactly on `winning_set x 0..m`.
    pub policy: Policy,
    /// Whether the initial state is winning.
    pub solvable: bool,
}

// succ[x][u] = index of x + u in the safe set, if inside.
pub(crate) fn successor_table(inst: &Instance) -> Vec<Vec<Option<usize>>> {
    let s = inst.safe_set();
    s.points()
        .iter()
        .map(|x| {
            inst.controls()
                .iter()
                .map(|u| s.index_of(&x.add(u)))
                .collect()
        })
        .collect()
}

fn assemble(
    inst: &Instance,
    part: &Partition,
    succ: &[Vec<Option<usize>>],
    alive: &[bool],
) -> GameResult {
    let points = inst.safe_set().points();
    let m = part.m();
    let mut entries = Vec::new();
    let mut winning_set = Vec::new();
    for (x, &a) in alive.iter().enumerate() {
        if !a {
            continue;
        }
        let row = (0..m)
            .map(|d| {
                part.cell(d)
                    .iter()
                    .copied()
                    .find(|&u| succ[x][u].is_some_and(|y| alive[y]))
                    .expect("winning states have a safe move for every label")
            })
            .collect();
        winning_set.push(points[x].clone());
        entries.push((points[x].clone(), row));
    }
    let solvable = inst
        .safe_set()
        .index_of(inst.x0())
        .is_some_and(|x| alive[x]);
    GameResult {
        winning_set,
        policy: Policy::new(m, entries).expect("rows built with m entries"),
        solvable,
    }
}

/// Sizes `|W_0|, |W_1|, ...` of the naive iteration, ending at the fixed
/// point, plus the final membership mask.
pub fn fixpoint_rounds(inst: &Instance, part: &Partition) -> (Vec<usize>, Vec<bool>) {
    let succ = successor_table(inst);
    naive_rounds(&succ, part)
}

pub(crate) fn naive_rounds(
    succ: &[Vec<Option<usize>>],
    part: &Partition,
) -> (Vec<usize>, Vec<bool>) {
    let mut alive = vec![true; succ.len()];
    let mut sizes = vec![succ.len()];
    loop {
        let next: Vec<bool> = (0..succ.len())
            .map(|x| {
                alive[x]
                    && (0..part.m()).all(|d| {
                        part.cell(d)
                            .iter()
                            .any(|&u| succ[x][u].is_some_and(|y| alive[y]))
                    })
            })
            .collect();
        let size = next.iter().filter(|&&a| a).count();
        if size == *sizes.last().unwrap() {
            return (sizes, alive);
        }
        sizes.push(size);
        alive = next;
    }
}

/// Solves the game by iterating `W_{i+1} = {x in W_i : every label has a
/// move into W_i}` from `W_0 = S` until nothing changes.
pub fn solve_rpcp(inst: &Instance, part: &Partition) -> GameResult {
    let succ = successor_table(inst);
    let (_, alive) = naive_rounds(&succ, part);
    assemble(inst, part, &succ, &alive)
}

/// Same contract as [`solve_rpcp`] in `O(|S| * |U|)` time: a counter per
/// (state, label) tracks how many moves of that label still land on a
/// surviving state, and a worklist removes states whose counter hits zero.
pub fn counter_based_attractor(inst: &Instance, part: &Partition) -> GameResult {
    let succ = successor_table(inst);
    let n = succ.len();
    let m = part.m();

    let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut counters = vec![0usize; n * m];
    for (x, row) in succ.iter().enumerate() {
        for (u, y) in row.iter().enumerate() {
            if let Some(y) = *y {
                preds[y].push((x, u));
                counters[x * m + part.label_of(u)] += 1;
            }
        }
    }

    let mut alive = vec![true; n];
    let mut queue = VecDeque::new();
    for x in 0..n {
        if counters[x * m..(x + 1) * m].contains(&0) {
            alive[x] = false;
            queue.push_back(x);
        }
    }
    while let Some(y) = queue.pop_front() {
        for &(x, u) in &preds[y] {
            if !alive[x] {
                continue;
            }
            let c = &mut counters[x * m + part.label_of(u)];
            *c -= 1;
            if *c == 0 {
                alive[x] = false;
                queue.push_back(x);
            }
        }
    }
    assemble(inst, part, &succ, &alive)
}
