mod common;

use std::collections::HashSet;

use common::{random_game, rng, v};
use rand::Rng;
use resilient_partition::game::solve_rpcp;
use resilient_partition::graph::build_induced;
use resilient_partition::labeling::verify_labeling;
use resilient_partition::model::{ControlSet, Instance, IntVector, Labeling, SafeSet};
use resilient_partition::oracle::{exhaustive_fpcp, OracleVerdict};
use resilient_partition::rds::{
    bits_to_codeword, build_shat_prop6, check_prop6, codeword_to_bits, decode_stream, design_code,
    encode_stream, RdsError,
};
use resilient_partition::simulator::{run_strategy, AdversaryStrategy};
use resilient_partition::synthesis::{
    reachable_states, synthesize_fpcp, Method, Status, SynthesisConfig,
};

#[test]
fn solved_outcomes_round_trip_through_their_reachable_set() {
    let mut r = rng(31);
    let mut solved = 0;
    for _ in 0..120 {
        let (inst, _) = random_game(&mut r);
        let out = synthesize_fpcp(&inst, &SynthesisConfig::default()).unwrap();
        if out.status != Status::Solved {
            continue;
        }
        solved += 1;
        let lab = out.labeling.as_ref().unwrap();
        let policy = out.policy.as_ref().unwrap();
        let reach = reachable_states(&inst, policy);
        assert!(reach.iter().all(|x| policy.contains(x)));
        let g = build_induced(&reach, inst.controls());
        assert!(verify_labeling(&g, lab, inst.x0(), inst.m()).ok);
        let cert = out.certificate.as_ref().unwrap();
        assert!(cert.solvable);
        let w: HashSet<&IntVector> = cert.winning_set.iter().collect();
        assert!(out.shat.iter().all(|x| w.contains(x)));
    }
    assert!(solved > 20, "only {solved} solved");
}

#[test]
fn infeasible_verdicts_agree_with_direct_enumeration() {
    let mut r = rng(32);
    for _ in 0..120 {
        let (inst, _) = random_game(&mut r);
        let out = synthesize_fpcp(&inst, &SynthesisConfig::default()).unwrap();
        let m = inst.m();
        let len = inst.controls().len();
        let any_wins = (0..m.pow(len as u32)).any(|code| {
            let labels: Vec<usize> = (0..len).map(|i| code / m.pow(i as u32) % m).collect();
            let part = Labeling::new(labels, m).unwrap().to_partition();
            !part.has_empty_cell() && solve_rpcp(&inst, &part).solvable
        });
        match out.status {
            Status::Solved => assert!(any_wins),
            Status::InfeasibleProven => assert!(!any_wins),
            Status::Unknown => panic!("small instances are always decided"),
        }
    }
}

#[test]
fn solved_policies_survive_long_random_play() {
    let mut r = rng(33);
    let mut checked = 0;
    while checked < 15 {
        let (inst, _) = random_game(&mut r);
        let out = synthesize_fpcp(&inst, &SynthesisConfig::default()).unwrap();
        if out.status != Status::Solved {
            continue;
        }
        checked += 1;
        let part = out.partition.as_ref().unwrap();
        let policy = out.policy.as_ref().unwrap();
        let seed = r.random();
        let traj = run_strategy(
            &inst,
            part,
            policy,
            &AdversaryStrategy::UniformRandom { seed },
            100_000,
        );
        assert!(traj.safe);
        assert_eq!(traj.states.len(), 100_001);
        let greedy = run_strategy(
            &inst,
            part,
            policy,
            &AdversaryStrategy::GreedyEscape,
            10_000,
        );
        assert!(greedy.safe);
    }
}

#[test]
fn vehicle_limit_is_n_plus_one() {
    for n in 1..=3 {
        for m in 1..=n + 1 {
            let inst = Instance::vehicle(n, 1, m).unwrap();
            let out = synthesize_fpcp(&inst, &SynthesisConfig::default()).unwrap();
            assert_eq!(out.status, Status::Solved, "n={n} m={m}");
        }
        let inst = Instance::vehicle(n, 1, n + 2).unwrap();
        assert!(matches!(
            exhaustive_fpcp(&inst, 1_000_000).unwrap(),
            OracleVerdict::Infeasible { .. }
        ));
        let out = synthesize_fpcp(&inst, &SynthesisConfig::default()).unwrap();
        assert_eq!(out.status, Status::InfeasibleProven);
        assert_eq!(out.method, Some(Method::Oracle));
    }
}

#[test]
fn explicit_subgraph_degree_bounds() {
    for n in 1..=10usize {
        let shat = build_shat_prop6(n);
        let u = ControlSet::sign_vectors(n);
        let g = build_induced(&shat, &u);
        assert_eq!(g.len(), shat.len());
        assert!(shat.len() <= 3usize.pow(n as u32 + 1));
        for x in 0..g.len() {
            let is_v1 = g.vertex(x).coords().iter().all(|c| c.abs() == 1);
            let bound = if is_v1 { 1 << (n - 1) } else { 1 << (n / 2) };
            assert!(g.out_degree(x) >= bound, "n={n} {}", g.vertex(x));
        }
    }
    assert_eq!(build_shat_prop6(4).len(), 16 + 33);
    assert!(!check_prop6(32, 2));
    assert!(check_prop6(33, 2));
}

#[test]
fn rds_code_round_trips() {
    let design = design_code(2, 2, 2, &SynthesisConfig::default()).unwrap();
    let mut r = rng(34);
    let msgs: Vec<usize> = (0..100_000).map(|_| r.random_range(0..2)).collect();
    let words = encode_stream(&design, &msgs).unwrap();
    let mut rds = IntVector::zeros(2);
    for w in &words {
        rds = rds.add(w);
        assert!(rds.norm_inf() <= 2);
        assert_eq!(bits_to_codeword(&codeword_to_bits(w)).unwrap(), *w);
    }
    assert_eq!(decode_stream(&design, &words).unwrap(), msgs);

    let mut seen = HashSet::new();
    for cell in design.partition().cells() {
        assert!(!cell.is_empty());
        for &u in cell {
            assert!(seen.insert(u));
        }
    }
    assert_eq!(seen.len(), 4);
}

#[test]
fn larger_rds_designs() {
    for (n, m, k) in [(3, 2, 2), (4, 3, 2), (2, 1, 1), (3, 2, 3)] {
        let design = design_code(n, m, k, &SynthesisConfig::default()).unwrap();
        let mut r = rng(35 + n as u64);
        let msgs: Vec<usize> = (0..5_000).map(|_| r.random_range(0..m)).collect();
        let words = encode_stream(&design, &msgs).unwrap();
        let mut rds = IntVector::zeros(n);
        for w in &words {
            rds = rds.add(w);
            assert!(rds.norm_inf() <= k);
        }
        assert_eq!(decode_stream(&design, &words).unwrap(), msgs);
    }
}

#[test]
fn radius_one_allows_a_single_message() {
    // from a corner only the opposite codeword keeps the sum in the cube
    let err = design_code(3, 2, 1, &SynthesisConfig::default()).unwrap_err();
    assert!(matches!(
        err,
        RdsError::DesignNotFound(Status::InfeasibleProven)
    ));
}

#[test]
fn forced_moves_in_the_square_all_fail() {
    // with a single label every control set of size one is a forced walk
    let inst = Instance::vehicle(2, 1, 1).unwrap();
    let s = SafeSet::inf_ball(2, 1).unwrap();
    for u in [v(&[1, 0]), v(&[-1, 0]), v(&[0, 1]), v(&[0, -1])] {
        let single =
            Instance::new(v(&[0, 0]), ControlSet::new(vec![u]).unwrap(), 1, s.clone()).unwrap();
        assert!(
            !solve_rpcp(
                &single,
                &Labeling::constant(1, 0, 1).unwrap().to_partition()
            )
            .solvable
        );
    }
    assert!(solve_rpcp(&inst, &Labeling::constant(5, 0, 1).unwrap().to_partition()).solvable);
}
