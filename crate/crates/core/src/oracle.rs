//! Brute-force ground truth for small instances.
//!
//! [`exhaustive_fpcp`] tries every labeling of the controls against the full
//! safety game, and [`game_tree_rpcp`] evaluates the game by bounded-depth
//! minimax with memoization. Neither depends on the subgraph or labeling
//! machinery, so they serve as independent checks on it.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::game::{naive_rounds, successor_table};
use crate::graph::InducedSubgraph;
use crate::labeling::verify_labeling;
use crate::model::{Instance, IntVector, Labeling, Partition};

/// Default bound on `m^|U|` for exhaustive enumeration.
pub const DEFAULT_ORACLE_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration needs {m}^{controls} labelings, above the cap of {cap}")]
    CapExceeded { m: usize, controls: usize, cap: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    /// First labeling found (in enumeration order) whose partition wins.
    Solved(Labeling),
    /// No labeling wins; `examined` labelings were tried after symmetry
    /// reduction.
    Infeasible { examined: u64 },
}

/// `m^len`, or `None` on overflow.
pub fn labeling_count(m: usize, len: usize) -> Option<u64> {
    u64::try_from(m).ok()?.checked_pow(u32::try_from(len).ok()?)
}

fn check_cap(m: usize, len: usize, cap: u64) -> Result<(), OracleError> {
    match labeling_count(m, len) {
        Some(c) if c <= cap => Ok(()),
        _ => Err(OracleError::CapExceeded {
            m,
            controls: len,
            cap,
        }),
    }
}

/// Calls `visit` on every labeling of `len` controls with `m` labels whose
/// first control carries label 0, until `visit` returns `true`. Labels are
/// interchangeable, so this skips only relabelings of labelings visited.
fn for_each_labeling(len: usize, m: usize, mut visit: impl FnMut(&[usize]) -> bool) -> (bool, u64) {
    let mut labels = vec![0usize; len];
    let mut examined = 0u64;
    loop {
        examined += 1;
        if visit(&labels) {
            return (true, examined);
        }
        // odometer over positions 1..len
        let mut pos = len;
        loop {
            if pos <= 1 {
                return (false, examined);
            }
            pos -= 1;
            labels[pos] += 1;
            if labels[pos] < m {
                break;
            }
            labels[pos] = 0;
        }
    }
}

/// Searches all labelings of the instance's controls for one whose partition
/// makes the initial state winning.
pub fn exhaustive_fpcp(inst: &Instance, cap: u64) -> Result<OracleVerdict, OracleError> {
    let m = inst.m();
    let len = inst.controls().len();
    check_cap(m, len, cap)?;
    let succ = successor_table(inst);
    let x0 = inst
        .safe_set()
        .index_of(inst.x0())
        .expect("validated instance has x0 in S");
    let mut found = None;
    let mut counts = vec![0usize; m];
    let (_, examined) = for_each_labeling(len, m, |labels| {
        counts.iter_mut().for_each(|c| *c = 0);
        labels.iter().for_each(|&l| counts[l] += 1);
        if counts.contains(&0) {
            return false;
        }
        let lab = Labeling::new(labels.to_vec(), m).expect("labels in range");
        let (_, alive) = naive_rounds(&succ, &lab.to_partition());
        if alive[x0] {
            found = Some(lab);
            true
        } else {
            false
        }
    });
    Ok(match found {
        Some(lab) => OracleVerdict::Solved(lab),
        None => OracleVerdict::Infeasible { examined },
    })
}

/// Searches all labelings for one that is good on the fixed subgraph `g`.
pub fn exhaustive_labeling(
    g: &InducedSubgraph,
    m: usize,
    x0: &IntVector,
    cap: u64,
) -> Result<Option<Labeling>, OracleError> {
    let len = g.num_controls();
    check_cap(m, len, cap)?;
    let mut found = None;
    for_each_labeling(len, m, |labels| {
        let lab = Labeling::new(labels.to_vec(), m).expect("labels in range");
        if verify_labeling(g, &lab, x0, m).ok {
            found = Some(lab);
            true
        } else {
            false
        }
    });
    Ok(found)
}

/// Memoized minimax over `(state, remaining depth)`.
pub struct GameTree<'a> {
    inst: &'a Instance,
    part: &'a Partition,
    safe: HashSet<IntVector>,
    memo: HashMap<(IntVector, usize), bool>,
}

impl<'a> GameTree<'a> {
    pub fn new(inst: &'a Instance, part: &'a Partition) -> Self {
        GameTree {
            inst,
            part,
            safe: inst.safe_set().points().iter().cloned().collect(),
            memo: HashMap::new(),
        }
    }

    /// Whether the controller can keep the state safe for `depth` more
    /// rounds from `x`, assuming `x` is safe.
    pub fn survives(&mut self, x: &IntVector, depth: usize) -> bool {
        if depth == 0 {
            return true;
        }
        let key = (x.clone(), depth);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let mut ok = true;
        for d in 0..self.part.m() {
            let mut escape = false;
            for &u in self.part.cell(d) {
                let y = x.add(self.inst.controls().get(u));
                if self.safe.contains(&y) && self.survives(&y, depth - 1) {
                    escape = true;
                    break;
                }
            }
            if !escape {
                ok = false;
                break;
            }
        }
        self.memo.insert(key, ok);
        ok
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }
}

/// Horizon after which bounded survival equals winning forever.
pub fn exact_depth(inst: &Instance) -> usize {
    inst.safe_set().len() + 1
}

/// Bounded-horizon game value from the initial state.
pub fn game_tree_rpcp(inst: &Instance, part: &Partition, depth: usize) -> bool {
    GameTree::new(inst, part).survives(inst.x0(), depth)
}

/// States of the safe set that survive `depth` rounds, in safe-set order.
pub fn game_tree_winning_set(inst: &Instance, part: &Partition, depth: usize) -> Vec<IntVector> {
    let mut tree = GameTree::new(inst, part);
    inst.safe_set()
        .points()
        .iter()
        .filter(|x| tree.survives(x, depth))
        .cloned()
        .collect()
}
