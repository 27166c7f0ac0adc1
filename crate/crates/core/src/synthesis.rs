//! End-to-end partition design.
//!
//! Finding a partition of the controls that admits a safe policy is the same
//! as finding a subgraph `Ŝ ∋ x0` of the safe set together with a good
//! labeling of the controls (see [`crate::labeling`]). The pipeline tries,
//! cheapest first:
//!
//! 1. peel the safe set down to the largest subgraph whose minimum
//!    out-degree clears the sufficient bound, or failing that, reaches `m`;
//! 2. label it with the derandomized greedy algorithm and verify;
//! 3. retry with seeded uniform random labelings;
//! 4. enumerate every labeling against the full game, when small enough.
//!
//! Every success is re-checked by the game solver before it is reported.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::game::{solve_rpcp, GameResult, Policy};
use crate::graph::{build_induced, peel_to_min_degree, InducedSubgraph};
use crate::labeling::{
    check_conditions, derandomized_labeling, random_labeling, verify_labeling, ConditionReport,
};
use crate::model::{Instance, IntVector, Labeling, Partition};
use crate::oracle::{exhaustive_fpcp, labeling_count, OracleVerdict, DEFAULT_ORACLE_CAP};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error("vertex {vertex} has no in-graph edge labeled {}", label + 1)]
    PreconditionViolated { vertex: IntVector, label: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Solved,
    InfeasibleProven,
    Unknown,
}

/// Which stage settled the outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "stage")]
pub enum Method {
    /// Greedy labeling on a subgraph satisfying the sufficient degree bound.
    SufficientBound,
    /// Greedy labeling that verified although the bound did not hold.
    VerifiedGreedy,
    /// A seeded uniform random labeling.
    Randomized { seed: u64 },
    /// Exhaustive enumeration of labelings.
    Oracle,
    /// Peeling at threshold `m` removed the initial state, so no subgraph can
    /// carry all `m` labels at every vertex.
    DegreeCertificate,
}

#[derive(Clone, Debug)]
pub struct SynthesisConfig {
    /// Number of random labelings to try after the greedy stage.
    pub seeds: u64,
    /// Largest `m^|U|` the exhaustive stage may enumerate.
    pub oracle_cap: u64,
    /// Seeds used are `base_seed, base_seed + 1, ...`.
    pub base_seed: u64,
    /// Largest `|S| * |U|` for which the whole safe set is peeled and the
    /// full game is solved. Above it, generic synthesis reports `Unknown`
    /// and a solved subgraph is certified by its closed policy alone.
    pub max_game_size: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            seeds: 64,
            oracle_cap: DEFAULT_ORACLE_CAP,
            base_seed: 0,
            max_game_size: 20_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisOutcome {
    pub status: Status,
    pub method: Option<Method>,
    /// Present when solved.
    pub labeling: Option<Labeling>,
    /// Present when solved; every cell is nonempty.
    pub partition: Option<Partition>,
    /// Memoryless policy confined to `shat`. Present when solved.
    pub policy: Option<Policy>,
    /// Maximal winning region and policy for the synthesized partition.
    /// Absent above [`SynthesisConfig::max_game_size`].
    pub certificate: Option<GameResult>,
    /// The subgraph the labeling was checked on (empty if none was found).
    pub shat: Vec<IntVector>,
    pub report: Option<ConditionReport>,
    /// Peeling threshold that produced `shat`.
    pub threshold: Option<usize>,
}

impl SynthesisOutcome {
    fn unsolved(status: Status, method: Option<Method>) -> Self {
        SynthesisOutcome {
            status,
            method,
            labeling: None,
            partition: None,
            policy: None,
            certificate: None,
            shat: Vec::new(),
            report: None,
            threshold: None,
        }
    }
}

/// Chooses, at every vertex and label, the first control (in control-set
/// order) with that label whose successor stays in `g`.
pub fn policy_from_labeling(g: &InducedSubgraph, lab: &Labeling) -> Result<Policy, SynthesisError> {
    let m = lab.m();
    let mut entries = Vec::with_capacity(g.len());
    for v in 0..g.len() {
        let mut row = vec![usize::MAX; m];
        for &(u, _) in g.out_edges(v) {
            let slot = &mut row[lab.label(u)];
            if *slot == usize::MAX {
                *slot = u;
            }
        }
        if let Some(label) = row.iter().position(|&u| u == usize::MAX) {
            return Err(SynthesisError::PreconditionViolated {
                vertex: g.vertex(v).clone(),
                label,
            });
        }
        entries.push((g.vertex(v).clone(), row));
    }
    Ok(Policy::new(m, entries).expect("one row per distinct vertex"))
}

/// Every state the policy can visit from `x0` under some adversary sequence.
/// States outside the policy's domain are included but not expanded.
pub fn reachable_states(inst: &Instance, policy: &Policy) -> Vec<IntVector> {
    let mut seen: HashSet<IntVector> = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([inst.x0().clone()]);
    seen.insert(inst.x0().clone());
    while let Some(x) = queue.pop_front() {
        order.push(x.clone());
        for d in 0..policy.m() {
            let Some(u) = policy.control(&x, d) else {
                continue;
            };
            let y = x.add(inst.controls().get(u));
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    order
}

/// Smallest integer threshold at or above `m ln(m |S|)`, and at least `m`.
pub fn sufficient_threshold(m: usize, safe_points: usize) -> usize {
    let bound = m as f64 * (m as f64 * safe_points as f64).ln();
    (bound.max(0.0).ceil() as usize).max(m)
}

pub fn synthesize_fpcp(
    inst: &Instance,
    config: &SynthesisConfig,
) -> Result<SynthesisOutcome, SynthesisError> {
    validate(config)?;
    if game_size(inst) > config.max_game_size {
        return Ok(SynthesisOutcome::unsolved(Status::Unknown, None));
    }
    let m = inst.m();
    let points = inst.safe_set().points();
    let high = sufficient_threshold(m, points.len());
    let peeled = peel_to_min_degree(points, inst.controls(), high, inst.x0())
        .map(|g| (g, high))
        .or_else(|_| peel_to_min_degree(points, inst.controls(), m, inst.x0()).map(|g| (g, m)));

    match peeled {
        Ok((g, threshold)) => Ok(run_stages(inst, g, Some(threshold), config)),
        Err(_) => Ok(match oracle_stage(inst, config) {
            Some(outcome) => outcome,
            None => SynthesisOutcome::unsolved(
                Status::InfeasibleProven,
                Some(Method::DegreeCertificate),
            ),
        }),
    }
}

/// Runs the labeling stages on a caller-supplied subgraph, then the
/// exhaustive stage if needed. The subgraph must lie inside the safe set.
pub fn synthesize_on_subgraph(
    inst: &Instance,
    g: InducedSubgraph,
    config: &SynthesisConfig,
) -> Result<SynthesisOutcome, SynthesisError> {
    validate(config)?;
    assert!(
        g.vertices().iter().all(|x| inst.safe_set().contains(x)),
        "subgraph leaves the safe set"
    );
    Ok(run_stages(inst, g, None, config))
}

fn game_size(inst: &Instance) -> usize {
    inst.safe_set().len().saturating_mul(inst.controls().len())
}

fn validate(config: &SynthesisConfig) -> Result<(), SynthesisError> {
    if config.oracle_cap == 0 {
        return Err(SynthesisError::Config("oracle cap must be positive"));
    }
    Ok(())
}

fn run_stages(
    inst: &Instance,
    g: InducedSubgraph,
    threshold: Option<usize>,
    config: &SynthesisConfig,
) -> SynthesisOutcome {
    let m = inst.m();
    let report = check_conditions(&g, m);

    let greedy = derandomized_labeling(&g, m).labeling;
    let method = if report.sufficient_ok {
        Method::SufficientBound
    } else {
        Method::VerifiedGreedy
    };
    if let Some(out) = certify(inst, &g, greedy, method, &report, threshold, config) {
        return out;
    }

    for i in 0..config.seeds {
        let seed = config.base_seed.wrapping_add(i);
        let lab = random_labeling(inst.controls().len(), m, seed);
        let method = Method::Randomized { seed };
        if let Some(out) = certify(inst, &g, lab, method, &report, threshold, config) {
            return out;
        }
    }

    match oracle_stage(inst, config) {
        Some(mut out) => {
            out.report.get_or_insert(report);
            out
        }
        None => SynthesisOutcome {
            shat: g.vertices().to_vec(),
            report: Some(report),
            threshold,
            ..SynthesisOutcome::unsolved(Status::Unknown, None)
        },
    }
}

fn certify(
    inst: &Instance,
    g: &InducedSubgraph,
    lab: Labeling,
    method: Method,
    report: &ConditionReport,
    threshold: Option<usize>,
    config: &SynthesisConfig,
) -> Option<SynthesisOutcome> {
    if !verify_labeling(g, &lab, inst.x0(), inst.m()).ok {
        return None;
    }
    let partition = lab.to_partition();
    let policy = policy_from_labeling(g, &lab).ok()?;
    policy.check_closed(inst.controls(), &partition).ok()?;
    if partition.has_empty_cell() {
        return None;
    }
    let certificate = if game_size(inst) <= config.max_game_size {
        let c = solve_rpcp(inst, &partition);
        if !c.solvable {
            return None;
        }
        Some(c)
    } else {
        None
    };
    Some(SynthesisOutcome {
        status: Status::Solved,
        method: Some(method),
        labeling: Some(lab),
        partition: Some(partition),
        policy: Some(policy),
        certificate,
        shat: g.vertices().to_vec(),
        report: Some(report.clone()),
        threshold,
    })
}

// None when the enumeration would exceed the cap.
fn oracle_stage(inst: &Instance, config: &SynthesisConfig) -> Option<SynthesisOutcome> {
    let count = labeling_count(inst.m(), inst.controls().len())?;
    if count > config.oracle_cap || game_size(inst) > config.max_game_size {
        return None;
    }
    match exhaustive_fpcp(inst, config.oracle_cap).ok()? {
        OracleVerdict::Solved(lab) => {
            let winning = solve_rpcp(inst, &lab.to_partition());
            let g = build_induced(&winning.winning_set, inst.controls());
            let report = check_conditions(&g, inst.m());
            certify(inst, &g, lab, Method::Oracle, &report, None, config)
        }
        OracleVerdict::Infeasible { .. } => Some(SynthesisOutcome::unsolved(
            Status::InfeasibleProven,
            Some(Method::Oracle),
        )),
    }
}
