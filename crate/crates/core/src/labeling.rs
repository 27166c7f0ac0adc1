//! Translation-invariant labelings of an induced subgraph.
//!
//! A labeling assigns one of `m` labels to each control, and an edge
//! `x -> x + u` inherits the label of `u`. It is *good* for a subgraph `Ŝ`
//! when `x0 ∈ Ŝ` and every vertex of `Ŝ` sees all `m` labels on its
//! outgoing edges that stay inside `Ŝ`. Translation invariance holds by
//! construction since labels live on controls rather than edges.
//!
//! Write `B(x, j)` for the event that vertex `x` sees no edge labeled `j`
//! under a uniformly random labeling. Then `P(B(x, j)) = (1 - 1/m)^deg(x)`,
//! and a union bound gives a good labeling whenever
//! `m * |Ŝ| * (1 - 1/m)^mindeg < 1`, which `mindeg >= m ln(m |Ŝ|)`
//! guarantees. [`derandomized_labeling`] removes the randomness: it fixes
//! labels one control at a time, each time picking the label that minimizes
//! the sum of conditional probabilities `P(B(x, j) | labels so far)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::InducedSubgraph;
use crate::model::{IntVector, Labeling};

/// Degree-based existence conditions for a good labeling.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub num_vertices: usize,
    pub m: usize,
    pub min_out_degree: usize,
    /// `mindeg >= m`, necessary for any good labeling.
    pub necessary_ok: bool,
    /// `m ln(m |Ŝ|)`
    pub sufficient_bound: f64,
    /// `mindeg > m ln(m |Ŝ|)`; exact ties count as not satisfied.
    pub sufficient_ok: bool,
    /// `m |Ŝ| (1 - 1/m)^mindeg`, an upper bound on the probability that a
    /// uniform random labeling is not good.
    pub failure_probability_bound: f64,
}

pub fn check_conditions(g: &InducedSubgraph, m: usize) -> ConditionReport {
    assert!(m >= 1, "label count must be positive");
    let size = g.len();
    let mindeg = g.min_out_degree();
    let mf = m as f64;
    let sufficient_bound = mf * (mf * size as f64).ln();
    ConditionReport {
        num_vertices: size,
        m,
        min_out_degree: mindeg,
        necessary_ok: mindeg >= m,
        sufficient_bound,
        sufficient_ok: size > 0 && (mindeg as f64) > sufficient_bound,
        failure_probability_bound: mf * size as f64 * miss_probability(m).powi(pow_arg(mindeg)),
    }
}

fn miss_probability(m: usize) -> f64 {
    1.0 - 1.0 / m as f64
}

fn pow_arg(k: usize) -> i32 {
    i32::try_from(k).unwrap_or(i32::MAX)
}

/// Uniform i.i.d. labels, reproducible from `seed`.
pub fn random_labeling(num_controls: usize, m: usize, seed: u64) -> Labeling {
    assert!(m >= 1, "label count must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = (0..num_controls).map(|_| rng.random_range(0..m)).collect();
    Labeling::new(labels, m).expect("labels drawn in range")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyGraph,
    /// The initial state is not a vertex.
    X0Missing,
    /// `vertex` has no in-graph edge carrying `label` (zero-based).
    MissingLabel {
        vertex: IntVector,
        label: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub ok: bool,
    /// First violation found, scanning vertices in graph order.
    pub violation: Option<Violation>,
    /// Always true: labels are attached to controls, so equal displacements
    /// always carry equal labels.
    pub translation_invariant: bool,
}

/// Checks that `x0` is a vertex and that every vertex sees all `m` labels.
pub fn verify_labeling(
    g: &InducedSubgraph,
    lab: &Labeling,
    x0: &IntVector,
    m: usize,
) -> Verification {
    let fail = |v| Verification {
        ok: false,
        violation: Some(v),
        translation_invariant: true,
    };
    if g.is_empty() {
        return fail(Violation::EmptyGraph);
    }
    if !g.contains(x0) {
        return fail(Violation::X0Missing);
    }
    let mut seen = vec![false; m];
    for v in 0..g.len() {
        seen.iter_mut().for_each(|s| *s = false);
        for &(u, _) in g.out_edges(v) {
            seen[lab.label(u)] = true;
        }
        if let Some(label) = seen.iter().position(|s| !s) {
            return fail(Violation::MissingLabel {
                vertex: g.vertex(v).clone(),
                label,
            });
        }
    }
    Verification {
        ok: true,
        violation: None,
        translation_invariant: true,
    }
}

/// Conditional failure probabilities `P(B(x, j) | first i labels fixed)`.
///
/// Controls are fixed in control-set order. For an unfixed control prefix
/// the term of `(x, j)` is zero once some fixed control labeled `j` keeps
/// `x` inside the subgraph, and `(1 - 1/m)^r` otherwise, where `r` counts
/// the unfixed controls that keep `x` inside.
#[derive(Clone, Debug)]
pub struct Estimator {
    m: usize,
    assigned: usize,
    // q^k for k in 0..=|U|
    q_pow: Vec<f64>,
    remaining: Vec<usize>,
    covered: Vec<bool>,
    uncovered: Vec<usize>,
    total: f64,
}

impl Estimator {
    /// Estimator before any label is fixed.
    pub fn initial(g: &InducedSubgraph, m: usize) -> Estimator {
        assert!(m >= 1, "label count must be positive");
        let q = miss_probability(m);
        let mut q_pow = Vec::with_capacity(g.num_controls() + 1);
        let mut p = 1.0;
        for _ in 0..=g.num_controls() {
            q_pow.push(p);
            p *= q;
        }
        let mut est = Estimator {
            m,
            assigned: 0,
            q_pow,
            remaining: (0..g.len()).map(|v| g.out_degree(v)).collect(),
            covered: vec![false; g.len() * m],
            uncovered: vec![m; g.len()],
            total: 0.0,
        };
        est.total = est.recompute_total();
        est
    }

    /// Estimator after fixing `prefix[k]` as the label of control `k`,
    /// evaluated directly from the closed form.
    pub fn from_prefix(g: &InducedSubgraph, m: usize, prefix: &[usize]) -> Estimator {
        let mut est = Estimator::initial(g, m);
        for v in 0..g.len() {
            let mut remaining = 0;
            for &(u, _) in g.out_edges(v) {
                if u < prefix.len() {
                    let slot = &mut est.covered[v * m + prefix[u]];
                    if !*slot {
                        *slot = true;
                        est.uncovered[v] -= 1;
                    }
                } else {
                    remaining += 1;
                }
            }
            est.remaining[v] = remaining;
        }
        est.assigned = prefix.len();
        est.total = est.recompute_total();
        est
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of controls whose label is fixed.
    pub fn assigned(&self) -> usize {
        self.assigned
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn term(&self, v: usize, j: usize) -> f64 {
        if self.covered[v * self.m + j] {
            0.0
        } else {
            self.q_pow[self.remaining[v]]
        }
    }

    /// All terms, vertex-major.
    pub fn terms(&self) -> Vec<f64> {
        (0..self.remaining.len())
            .flat_map(|v| (0..self.m).map(move |j| (v, j)))
            .map(|(v, j)| self.term(v, j))
            .collect()
    }

    fn recompute_total(&self) -> f64 {
        self.remaining
            .iter()
            .zip(&self.uncovered)
            .map(|(&r, &c)| c as f64 * self.q_pow[r])
            .sum()
    }

    /// Totals that would result from giving the next control each label.
    /// `entering` lists the vertices that control keeps inside the subgraph.
    fn candidate_totals(&self, entering: &[usize], out: &mut [f64]) {
        let m = self.m;
        let mut base = 0.0;
        out.iter_mut().for_each(|t| *t = 0.0);
        for &v in entering {
            let r = self.remaining[v];
            let after = self.q_pow[r - 1];
            base += self.uncovered[v] as f64 * (after - self.q_pow[r]);
            for (j, slot) in out.iter_mut().enumerate() {
                if !self.covered[v * m + j] {
                    *slot += after;
                }
            }
        }
        for t in out.iter_mut() {
            *t = self.total + base - *t;
        }
    }

    fn assign(&mut self, entering: &[usize], label: usize) {
        let m = self.m;
        for &v in entering {
            self.remaining[v] -= 1;
            let slot = &mut self.covered[v * m + label];
            if !*slot {
                *slot = true;
                self.uncovered[v] -= 1;
            }
        }
        self.assigned += 1;
        self.total = self.recompute_total();
    }
}

/// Output of [`derandomized_labeling`].
#[derive(Clone, Debug)]
pub struct GreedyLabeling {
    pub labeling: Labeling,
    /// Estimator after every control has a label; each term is 0 or 1.
    pub estimator: Estimator,
    /// Estimator total before the first assignment and after each one.
    pub totals: Vec<f64>,
}

/// Labels controls in order, each time choosing the label (smallest on
/// ties) that minimizes the estimator total. Runs in
/// `O(|E| + |U| * m * |Ŝ|)`.
///
/// If the initial total is below one the result is a good labeling of `g`;
/// more generally the result is good exactly when the final total is zero.
pub fn derandomized_labeling(g: &InducedSubgraph, m: usize) -> GreedyLabeling {
    let num_controls = g.num_controls();
    let mut entering: Vec<Vec<usize>> = vec![Vec::new(); num_controls];
    for v in 0..g.len() {
        for &(u, _) in g.out_edges(v) {
            entering[u].push(v);
        }
    }

    let mut est = Estimator::initial(g, m);
    let mut totals = Vec::with_capacity(num_controls + 1);
    totals.push(est.total());
    let mut labels = Vec::with_capacity(num_controls);
    let mut candidates = vec![0.0; m];
    for to_enter in &entering {
        est.candidate_totals(to_enter, &mut candidates);
        let mut best = 0;
        for (j, &t) in candidates.iter().enumerate().skip(1) {
            if t < candidates[best] {
                best = j;
            }
        }
        let before = est.total();
        est.assign(to_enter, best);
        debug_assert!(
            est.total() <= before + 1e-9 * before.max(1.0),
            "estimator increased from {before} to {}",
            est.total()
        );
        totals.push(est.total());
        labels.push(best);
    }
    GreedyLabeling {
        labeling: Labeling::new(labels, m).expect("labels chosen in range"),
        estimator: est,
        totals,
    }
}
