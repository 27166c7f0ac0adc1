#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resilient_partition::graph::InducedSubgraph;
use resilient_partition::model::{ControlSet, Instance, IntVector, Labeling, Partition, SafeSet};

pub fn v(c: &[i64]) -> IntVector {
    IntVector::new(c.to_vec())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn king_moves() -> ControlSet {
    let mut us = Vec::new();
    for a in -1..=1 {
        for b in -1..=1 {
            if (a, b) != (0, 0) {
                us.push(v(&[a, b]));
            }
        }
    }
    ControlSet::new(us).unwrap()
}

/// Diamond `||x||_1 <= 1` with the eight king moves and three labels.
pub fn diamond_instance() -> Instance {
    Instance::new(
        v(&[0, 0]),
        king_moves(),
        3,
        SafeSet::one_ball(2, 1).unwrap(),
    )
    .unwrap()
}

/// Random two-dimensional game: a subset of a box of radius <= 4 (at most 81
/// points), a nonempty subset of `{-1,0,1}^2` as controls, `m <= 3`, and a
/// random (possibly degenerate) partition.
pub fn random_game(rng: &mut ChaCha8Rng) -> (Instance, Partition) {
    let r = rng.random_range(1..=4i64);
    let density = rng.random_range(0.4..=1.0);
    let mut pts = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            if rng.random_bool(density) {
                pts.push(v(&[a, b]));
            }
        }
    }
    if pts.is_empty() {
        pts.push(v(&[0, 0]));
    }
    let x0 = pts[rng.random_range(0..pts.len())].clone();

    let mut all: Vec<IntVector> = (-1..=1)
        .flat_map(|a| (-1..=1).map(move |b| v(&[a, b])))
        .collect();
    all.shuffle(rng);
    let take = rng.random_range(1..=all.len());
    let controls = ControlSet::new(all[..take].to_vec()).unwrap();

    let m = rng.random_range(1..=controls.len().min(3));
    let labels = (0..controls.len())
        .map(|_| rng.random_range(0..m))
        .collect();
    let part = Labeling::new(labels, m).unwrap().to_partition();
    let inst = Instance::new(x0, controls, m, SafeSet::explicit(pts).unwrap()).unwrap();
    (inst, part)
}

/// Deletes low-degree vertices one at a time in random order until none
/// is left, recomputing degrees from scratch.
pub fn naive_peel(
    points: &[IntVector],
    controls: &ControlSet,
    threshold: usize,
    rng: &mut ChaCha8Rng,
) -> HashSet<IntVector> {
    let mut alive: HashSet<IntVector> = points.iter().cloned().collect();
    loop {
        let mut order: Vec<IntVector> = alive.iter().cloned().collect();
        order.sort();
        order.shuffle(rng);
        let victim = order.into_iter().find(|x| {
            controls
                .iter()
                .filter(|u| alive.contains(&x.add(u)))
                .count()
                < threshold
        });
        match victim {
            Some(x) => {
                alive.remove(&x);
            }
            None => return alive,
        }
    }
}

/// `sum_{x, j} P(B(x, j) | prefix)` by enumerating every completion of the
/// prefix and counting the completions in which `x` misses label `j`.
pub fn brute_force_estimator(g: &InducedSubgraph, m: usize, prefix: &[usize]) -> f64 {
    let len = g.num_controls();
    let free = len - prefix.len();
    let completions = (m as u64).pow(free as u32);
    let mut labels = prefix.to_vec();
    labels.resize(len, 0);
    let mut misses = 0u64;
    for code in 0..completions {
        let mut c = code;
        for slot in labels.iter_mut().skip(prefix.len()) {
            *slot = (c % m as u64) as usize;
            c /= m as u64;
        }
        for x in 0..g.len() {
            let mut seen = vec![false; m];
            for &(u, _) in g.out_edges(x) {
                seen[labels[u]] = true;
            }
            misses += seen.iter().filter(|s| !**s).count() as u64;
        }
    }
    misses as f64 / completions as f64
}
