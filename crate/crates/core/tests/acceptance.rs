//! Acceptance suite. Runs every criterion in sequence, prints one
//! `PASS`/`FAIL` line each, and exits nonzero if any failed.

mod common;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{diamond_instance, random_game, rng, v};
use rand::Rng;
use resilient_partition::game::{counter_based_attractor, fixpoint_rounds, solve_rpcp, Policy};
use resilient_partition::graph::{build_induced, peel_to_min_degree, InducedSubgraph};
use resilient_partition::labeling::{
    check_conditions, derandomized_labeling, random_labeling, verify_labeling,
};
use resilient_partition::model::{ControlSet, Instance, IntVector, Labeling, Partition, SafeSet};
use resilient_partition::oracle::{
    exact_depth, exhaustive_fpcp, game_tree_winning_set, OracleVerdict,
};
use resilient_partition::rds::{
    build_shat_prop6, check_prop6, decode_stream, design_code, encode_stream,
};
use resilient_partition::simulator::{run, run_strategy, AdversaryStrategy, Constant};
use resilient_partition::synthesis::{synthesize_fpcp, Status, SynthesisConfig, SynthesisOutcome};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

fn as_set(xs: &[IntVector]) -> HashSet<IntVector> {
    xs.iter().cloned().collect()
}

/// Vehicle square: the partition decides whether the game can be won.
fn vehicle_partitions() -> Outcome {
    let start = Instant::now();
    let inst = Instance::vehicle(2, 1, 2).map_err(|e| e.to_string())?;
    // axis moves are ordered e1, -e1, e2, -e2, 0
    let bad = Partition::from_cells(vec![vec![0, 2], vec![1, 3, 4]], 5).unwrap();
    let good = Partition::from_cells(vec![vec![0, 1], vec![2, 3, 4]], 5).unwrap();

    let lost = solve_rpcp(&inst, &bad);
    ensure(!lost.solvable && lost.winning_set.is_empty(), || {
        format!("bad partition: W has {} states", lost.winning_set.len())
    })?;
    let won = solve_rpcp(&inst, &good);
    let w = as_set(&won.winning_set);
    ensure(won.solvable, || "good partition unsolvable".into())?;
    ensure(w.contains(&v(&[0, 0])) && w.contains(&v(&[1, 0])), || {
        "W misses (0,0) or (1,0)".into()
    })?;

    // every forced walk under the first cell leaves the square
    let points = inst.safe_set().points().to_vec();
    let mut violated = 0;
    for mask in 0..(1u32 << points.len()) {
        let entries = points
            .iter()
            .enumerate()
            .map(|(i, x)| (x.clone(), vec![if mask >> i & 1 == 0 { 0 } else { 2 }, 4]))
            .collect();
        let policy = Policy::new(2, entries).unwrap();
        let traj = run(&inst, &bad, &policy, &mut Constant(0), 4);
        if traj.first_violation.is_some_and(|t| t <= 3) {
            violated += 1;
        }
    }
    ensure(violated == 1 << points.len(), || {
        format!("{violated} of 512 forced policies violated")
    })?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "bad partition W=0, good partition |W|={}, 512/512 forced walks escape",
        w.len()
    ))
}

/// The degree condition is met on the diamond, yet no labeling works.
fn diamond_gap() -> Outcome {
    let start = Instant::now();
    let inst = diamond_instance();
    let g = build_induced(inst.safe_set().points(), inst.controls());
    ensure(g.len() == 5 && g.min_out_degree() == 3, || {
        format!(
            "graph has {} vertices, mindeg {}",
            g.len(),
            g.min_out_degree()
        )
    })?;
    ensure(check_conditions(&g, 3).necessary_ok, || "mindeg < m".into())?;
    let mut good = 0;
    for code in 0..3usize.pow(8) {
        let labels: Vec<usize> = (0..8).map(|i| code / 3usize.pow(i) % 3).collect();
        if verify_labeling(&g, &Labeling::new(labels, 3).unwrap(), inst.x0(), 3).ok {
            good += 1;
        }
    }
    ensure(good == 0, || format!("{good} labelings satisfy coverage"))?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok("mindeg 3 >= m = 3, 0 of 6561 labelings good".into())
}

/// The damaged vehicle supports at most n + 1 labels.
fn vehicle_limit() -> Outcome {
    let start = Instant::now();
    let config = SynthesisConfig::default();
    for n in 1..=3 {
        for m in 1..=n + 1 {
            let inst = Instance::vehicle(n, 1, m).unwrap();
            let out = synthesize_fpcp(&inst, &config).map_err(|e| e.to_string())?;
            ensure(out.status == Status::Solved, || {
                format!("n={n} m={m}: {:?}", out.status)
            })?;
        }
        let inst = Instance::vehicle(n, 1, n + 2).unwrap();
        let verdict = exhaustive_fpcp(&inst, 78_125).map_err(|e| e.to_string())?;
        ensure(matches!(verdict, OracleVerdict::Infeasible { .. }), || {
            format!("n={n} m={} not infeasible", n + 2)
        })?;
        let out = synthesize_fpcp(&inst, &config).map_err(|e| e.to_string())?;
        ensure(out.status == Status::InfeasibleProven, || {
            format!("n={n} m={}: synthesis says {:?}", n + 2, out.status)
        })?;
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok("n=1,2,3: solved up to m=n+1, infeasible at m=n+2".into())
}

/// Two-message code of length two with running sum bounded by two.
fn rds_code() -> Outcome {
    let start = Instant::now();
    let design = design_code(2, 2, 2, &SynthesisConfig::default()).map_err(|e| e.to_string())?;
    let mut r = rng(4);
    let msgs: Vec<usize> = (0..100_000).map(|_| r.random_range(0..2)).collect();
    let words = encode_stream(&design, &msgs).map_err(|e| e.to_string())?;
    let mut rds = IntVector::zeros(2);
    let mut peak = 0;
    for w in &words {
        rds = rds.add(w);
        peak = peak.max(rds.norm_inf());
    }
    ensure(peak <= 2, || format!("running sum reached {peak}"))?;
    let back = decode_stream(&design, &words).map_err(|e| e.to_string())?;
    ensure(back == msgs, || "decoding differs from the messages".into())?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "1e5 messages, max |RDS| = {peak}, decode(encode) = id"
    ))
}

/// Structure of the explicit subgraph for radius two.
fn explicit_subgraph() -> Outcome {
    for n in 2..=10usize {
        let shat = build_shat_prop6(n);
        ensure(shat.len() <= 3usize.pow(n as u32 + 1), || {
            format!("n={n}: too many points")
        })?;
        let g = build_induced(&shat, &ControlSet::sign_vectors(n));
        for x in 0..g.len() {
            let sign = g.vertex(x).coords().iter().all(|c| c.abs() == 1);
            let bound = if sign {
                1usize << (n - 1)
            } else {
                1 << (n / 2)
            };
            ensure(g.out_degree(x) >= bound, || {
                format!(
                    "n={n}: {} has degree {} < {bound}",
                    g.vertex(x),
                    g.out_degree(x)
                )
            })?;
        }
    }
    ensure(check_prop6(33, 2) && !check_prop6(32, 2), || {
        "length boundary not at 33".into()
    })?;
    Ok("degree bounds hold for n=2..10, length threshold 33 for m=2".into())
}

/// Instance family where the sufficient bound holds: a cube with every
/// displacement inside the doubled cube as a control.
fn dense_instance(r: &mut impl Rng) -> Option<(InducedSubgraph, usize, IntVector)> {
    let n = r.random_range(1..=3usize);
    let k = match n {
        1 => r.random_range(2..=4i64),
        2 => r.random_range(1..=2),
        _ => 1,
    };
    let m = r.random_range(2..=4usize);
    let density = r.random_range(0.8..=1.0);
    let mut controls = Vec::new();
    let mut cur = vec![-2 * k; n];
    'outer: loop {
        if r.random_bool(density) {
            controls.push(IntVector::new(cur.clone()));
        }
        for axis in (0..n).rev() {
            if cur[axis] < 2 * k {
                cur[axis] += 1;
                continue 'outer;
            }
            cur[axis] = -2 * k;
        }
        break;
    }
    let controls = ControlSet::new(controls).ok()?;
    let s = SafeSet::inf_ball(n, k).unwrap();
    let bound = m as f64 * (m as f64 * s.len() as f64).ln();
    let t = bound.floor() as usize + 1;
    let x0 = IntVector::zeros(n);
    let g = peel_to_min_degree(s.points(), &controls, t, &x0).ok()?;
    check_conditions(&g, m).sufficient_ok.then_some((g, m, x0))
}

fn greedy_guarantee() -> Outcome {
    let start = Instant::now();
    let mut r = rng(6);
    let mut instances = 0;
    let mut passed = 0;
    let mut monotone = 0;
    let mut attempts = 0;
    while instances < 100 {
        attempts += 1;
        ensure(attempts < 10_000, || "could not generate instances".into())?;
        let Some((g, m, x0)) = dense_instance(&mut r) else {
            continue;
        };
        instances += 1;
        let out = derandomized_labeling(&g, m);
        if verify_labeling(&g, &out.labeling, &x0, m).ok {
            passed += 1;
        }
        if out.totals.windows(2).all(|w| w[1] <= w[0] + 1e-12) {
            monotone += 1;
        }
    }
    ensure(passed == 100 && monotone == 100, || {
        format!("{passed}/100 verified, {monotone}/100 monotone")
    })?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok("100/100 verified, estimator non-increasing in 100/100".into())
}

fn random_bound() -> Outcome {
    let mut us = Vec::new();
    for a in -2..=2 {
        for b in -2..=2 {
            us.push(v(&[a, b]));
        }
    }
    let controls = ControlSet::new(us).unwrap();
    let g = build_induced(SafeSet::inf_ball(2, 1).unwrap().points(), &controls);
    let m = 2;
    let p = check_conditions(&g, m).failure_probability_bound;
    ensure(p < 0.5, || format!("p = {p}"))?;
    let trials = 10_000u64;
    let x0 = v(&[0, 0]);
    let failures = (0..trials)
        .filter(|&s| !verify_labeling(&g, &random_labeling(controls.len(), m, s), &x0, m).ok)
        .count();
    let rate = failures as f64 / trials as f64;
    let limit = p + 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
    ensure(rate <= limit, || format!("rate {rate:.4} > {limit:.4}"))?;
    Ok(format!("failure rate {rate:.4} <= {limit:.4} (p = {p:.4})"))
}

fn solver_agreement() -> Outcome {
    let mut r = rng(8);
    for i in 0..200 {
        let (inst, part) = random_game(&mut r);
        let counter = as_set(&counter_based_attractor(&inst, &part).winning_set);
        let (_, mask) = fixpoint_rounds(&inst, &part);
        let naive: HashSet<IntVector> = inst
            .safe_set()
            .points()
            .iter()
            .zip(&mask)
            .filter(|(_, &a)| a)
            .map(|(x, _)| x.clone())
            .collect();
        let tree = as_set(&game_tree_winning_set(&inst, &part, exact_depth(&inst)));
        ensure(counter == naive && naive == tree, || {
            format!("instance {i} disagrees")
        })?;
    }
    Ok("200/200 random games agree across three solvers".into())
}

fn solved_outcomes() -> Vec<(Instance, SynthesisOutcome)> {
    let config = SynthesisConfig::default();
    let mut insts = Vec::new();
    for n in 1..=3 {
        for m in 1..=n + 1 {
            insts.push(Instance::vehicle(n, 1, m).unwrap());
        }
    }
    for (n, m, k) in [(2, 2, 2), (3, 2, 2)] {
        insts.push(resilient_partition::rds::rds_instance(n, m, k).unwrap());
    }
    let mut r = rng(9);
    while insts.len() < 30 {
        insts.push(random_game(&mut r).0);
    }
    insts
        .into_iter()
        .filter_map(|inst| {
            let out = synthesize_fpcp(&inst, &config).ok()?;
            (out.status == Status::Solved).then_some((inst, out))
        })
        .collect()
}

fn certified_safety() -> Outcome {
    let solved = solved_outcomes();
    let steps = 100_000;
    for (i, (inst, out)) in solved.iter().enumerate() {
        let part = out.partition.as_ref().unwrap();
        let policy = out.policy.as_ref().unwrap();
        let m = part.m();
        let script: Vec<usize> = (0..2 * m + 1).map(|j| (j * j + 1) % m).collect();
        let mut strategies: Vec<AdversaryStrategy> =
            (0..m).map(AdversaryStrategy::Constant).collect();
        strategies.push(AdversaryStrategy::UniformRandom { seed: i as u64 });
        strategies.push(AdversaryStrategy::Scripted(script));
        strategies.push(AdversaryStrategy::GreedyEscape);
        for s in &strategies {
            let traj = run_strategy(inst, part, policy, s, steps);
            ensure(traj.safe && traj.inputs.len() == steps, || {
                format!("instance {i} against {s:?}: {:?}", traj.violation)
            })?;
        }
    }
    Ok(format!(
        "{} solved instances x all adversaries x 1e5 steps, 0 violations",
        solved.len()
    ))
}

fn median_time(g: &InducedSubgraph, m: usize, runs: usize) -> Duration {
    let mut times: Vec<Duration> = (0..runs)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(derandomized_labeling(std::hint::black_box(g), m));
            start.elapsed()
        })
        .collect();
    times.sort();
    times[runs / 2]
}

fn greedy_scaling() -> Outcome {
    let controls = ControlSet::new(
        (-1..=1)
            .flat_map(|a| (-1..=1).map(move |b| v(&[a, b])))
            .collect(),
    )
    .unwrap();
    let m = 3;
    let work = |g: &InducedSubgraph| g.num_edges() + controls.len() * m * g.len();
    let small = build_induced(SafeSet::inf_ball(2, 100).unwrap().points(), &controls);
    let large = build_induced(SafeSet::inf_ball(2, 316).unwrap().points(), &controls);
    let work_ratio = work(&large) as f64 / work(&small) as f64;
    median_time(&small, m, 3);
    let t_small = median_time(&small, m, 9);
    let t_large = median_time(&large, m, 9);
    let time_ratio = t_large.as_secs_f64() / t_small.as_secs_f64();
    ensure(time_ratio <= 20.0, || {
        format!("work x{work_ratio:.2} took x{time_ratio:.2} ({t_small:?} -> {t_large:?})")
    })?;
    Ok(format!(
        "work x{work_ratio:.2}, time x{time_ratio:.2} ({t_small:?} -> {t_large:?})"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("partition decides the vehicle game", vehicle_partitions),
        ("degree condition is not sufficient", diamond_gap),
        ("vehicle supports at most n+1 labels", vehicle_limit),
        ("bounded running digital sum code", rds_code),
        ("explicit radius-two subgraph", explicit_subgraph),
        (
            "greedy labeling under the sufficient bound",
            greedy_guarantee,
        ),
        ("random labeling failure rate", random_bound),
        ("solver cross-validation", solver_agreement),
        ("certified policies stay safe", certified_safety),
        ("greedy labeling scales linearly", greedy_scaling),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
