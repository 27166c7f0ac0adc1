use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use resilient_partition::game::Policy;
use resilient_partition::graph::build_induced;
use resilient_partition::io::{
    code_from_file, code_to_file, labeling_from_file, labeling_to_file, policy_from_file,
    policy_to_file, read_instance, read_json, write_json, CodeFile, LabelingFile, PolicyFile,
};
use resilient_partition::labeling::{check_conditions, verify_labeling};
use resilient_partition::model::{Instance, IntVector, Partition};
use resilient_partition::oracle::{
    exhaustive_fpcp, OracleError, OracleVerdict, DEFAULT_ORACLE_CAP,
};
use resilient_partition::rds::{bits_to_codeword, codeword_to_bits, design_code};
use resilient_partition::simulator::{run_strategy, AdversaryStrategy};
use resilient_partition::{solve_rpcp, synthesize_fpcp, Status, SynthesisConfig};
use serde_json::{json, Value};

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_ERROR: u8 = 3;

const SCHEMA_HELP: &str = "\
File formats (JSON):
  instance   {\"n\": 2, \"x0\": [0,0], \"controls\": [[1,0],[-1,0],...], \"m\": 2,
              \"safe_set\": {\"type\": \"inf_ball\", \"k\": 1}}
             safe_set may also be {\"type\": \"one_ball\", \"k\": K}
             or {\"type\": \"explicit\", \"points\": [[..], ...]}
  partition  {\"labels\": {\"1,0\": 1, \"-1,0\": 1, \"0,1\": 2, ...}}   labels 1..=m
  policy     {\"winning_set\": [[..]], \"policy\": {\"<state>|<label>\": \"<control index>\"}}
             control indices are zero-based into the instance's controls

Exit codes: 0 success/SOLVED, 1 unsolvable/INFEASIBLE, 2 UNKNOWN, 3 usage or I/O error";

#[derive(Parser)]
#[command(
    name = "rpsyn",
    version,
    about = "Partition controls so that a safety game stays winnable"
)]
#[command(after_help = SCHEMA_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file and print a summary.
    Validate {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Solve the safety game for a fixed partition.
    Solve {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        partition: PathBuf,
        /// Write the winning set and policy here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a partition and a certified policy.
    Synthesize {
        #[arg(short, long)]
        input: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Directory for partition.json, policy.json and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a partition (and optionally a policy) against an instance.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        partition: PathBuf,
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Play a policy against an adversary, printing one JSON line per state.
    Simulate {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        partition: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        /// constant:D | random | greedy | script:D1,D2,... | interactive (labels 1-based)
        #[arg(long, default_value = "random")]
        adversary: String,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Enumerate every partition of the controls.
    Oracle {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, env = "RP_ORACLE_CAP", default_value_t = DEFAULT_ORACLE_CAP)]
        oracle_cap: u64,
    },
    /// Codes with a bounded running digital sum.
    #[command(subcommand)]
    Rds(RdsCommand),
}

#[derive(Args)]
struct SearchArgs {
    /// Random labelings tried after the greedy stage.
    #[arg(long, default_value_t = 64)]
    seeds: u64,
    #[arg(long, env = "RP_ORACLE_CAP", default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SearchArgs {
    fn config(&self) -> SynthesisConfig {
        SynthesisConfig {
            seeds: self.seeds,
            oracle_cap: self.oracle_cap,
            base_seed: self.seed,
            ..SynthesisConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum RdsCommand {
    /// Design a code and write it as JSON.
    Design {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        k: i64,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Read 1-based messages from stdin and print one codeword per line.
    Encode {
        #[arg(long)]
        code: PathBuf,
    },
    /// Read codewords from stdin and print one 1-based message per line.
    Decode {
        #[arg(long)]
        code: PathBuf,
    },
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Solved => EXIT_OK,
        Status::InfeasibleProven => EXIT_NEGATIVE,
        Status::Unknown => EXIT_UNKNOWN,
    }
}

fn print_json(value: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn read_partition(inst: &Instance, path: &Path) -> Result<Partition> {
    let file: LabelingFile = read_json(path)?;
    let lab = labeling_from_file(inst.controls(), inst.m(), &file)
        .with_context(|| format!("{}: bad partition", path.display()))?;
    Ok(lab.to_partition())
}

fn read_policy(inst: &Instance, path: &Path) -> Result<Policy> {
    let file: PolicyFile = read_json(path)?;
    let policy = policy_from_file(&file, inst.m())?;
    if let Some(u) = policy
        .entries()
        .flat_map(|(_, row)| row.iter().copied())
        .find(|&u| u >= inst.controls().len())
    {
        bail!("{}: control index {u} out of range", path.display());
    }
    Ok(policy)
}

fn cells_json(inst: &Instance, part: &Partition) -> Value {
    part.cells()
        .iter()
        .map(|cell| {
            cell.iter()
                .map(|&u| inst.controls().get(u).coords().to_vec())
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into()
}

fn validate(input: &Path) -> Result<u8> {
    let inst = read_instance(input)?;
    print_json(&json!({
        "valid": true,
        "n": inst.dim(),
        "m": inst.m(),
        "controls": inst.controls().len(),
        "safe_points": inst.safe_set().len(),
    }))?;
    Ok(EXIT_OK)
}

fn solve(input: &Path, partition: &Path, out: Option<&Path>) -> Result<u8> {
    let inst = read_instance(input)?;
    let part = read_partition(&inst, partition)?;
    let res = solve_rpcp(&inst, &part);
    if let Some(out) = out {
        write_json(out, &policy_to_file(&res.policy))?;
    }
    print_json(&json!({
        "solvable": res.solvable,
        "winning_set_size": res.winning_set.len(),
        "cells": cells_json(&inst, &part),
    }))?;
    Ok(if res.solvable { EXIT_OK } else { EXIT_NEGATIVE })
}

fn synthesize(input: &Path, search: &SearchArgs, out: Option<&Path>) -> Result<u8> {
    let inst = read_instance(input)?;
    let outcome = synthesize_fpcp(&inst, &search.config())?;
    let report = json!({
        "status": outcome.status,
        "method": outcome.method,
        "threshold": outcome.threshold,
        "shat_size": outcome.shat.len(),
        "conditions": outcome.report,
        "winning_set_size": outcome.certificate.as_ref().map(|c| c.winning_set.len()),
        "cells": outcome.partition.as_ref().map(|p| cells_json(&inst, p)),
    });
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_json(&dir.join("report.json"), &report)?;
        if let (Some(lab), Some(policy)) = (&outcome.labeling, &outcome.policy) {
            write_json(
                &dir.join("partition.json"),
                &labeling_to_file(inst.controls(), lab),
            )?;
            write_json(&dir.join("policy.json"), &policy_to_file(policy))?;
        }
    }
    print_json(&report)?;
    Ok(status_code(outcome.status))
}

fn verify(input: &Path, partition: &Path, policy: Option<&Path>) -> Result<u8> {
    let inst = read_instance(input)?;
    let part = read_partition(&inst, partition)?;
    let lab = part.to_labeling();

    let (shat, closed) = match policy {
        Some(path) => {
            let policy = read_policy(&inst, path)?;
            let closed = policy.check_closed(inst.controls(), &part);
            let inside = policy.domain().iter().all(|x| inst.safe_set().contains(x));
            let closed = match (closed, inside) {
                (Err(e), _) => Err(e.to_string()),
                (Ok(()), false) => Err("policy domain leaves the safe set".to_string()),
                (Ok(()), true) => Ok(()),
            };
            (policy.domain().to_vec(), Some(closed))
        }
        None => (solve_rpcp(&inst, &part).winning_set, None),
    };
    let g = build_induced(&shat, inst.controls());
    let check = verify_labeling(&g, &lab, inst.x0(), inst.m());
    let ok = check.ok && !part.has_empty_cell() && closed.as_ref().is_none_or(|c| c.is_ok());
    print_json(&json!({
        "ok": ok,
        "coverage_ok": check.ok,
        "violation": check.violation.map(|v| format!("{v:?}")),
        "translation_invariant": check.translation_invariant,
        "empty_cell": part.has_empty_cell(),
        "policy_closed": closed.map(|c| c.err().map_or(json!(true), |e| json!(e))),
        "conditions": check_conditions(&g, inst.m()),
    }))?;
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}

fn parse_adversary(spec: &str, m: usize, seed: u64) -> Result<AdversaryStrategy> {
    let label = |s: &str| -> Result<usize> {
        let d: usize = s
            .trim()
            .parse()
            .with_context(|| format!("bad label {s:?}"))?;
        if d == 0 || d > m {
            bail!("label {d} outside 1..={m}");
        }
        Ok(d - 1)
    };
    Ok(match spec.split_once(':') {
        Some(("constant", d)) => AdversaryStrategy::Constant(label(d)?),
        Some(("script", seq)) => {
            AdversaryStrategy::Scripted(seq.split(',').map(label).collect::<Result<_>>()?)
        }
        None if spec == "random" => AdversaryStrategy::UniformRandom { seed },
        None if spec == "greedy" => AdversaryStrategy::GreedyEscape,
        None if spec == "interactive" => AdversaryStrategy::Interactive,
        _ => bail!("unknown adversary {spec:?}"),
    })
}

fn simulate(
    input: &Path,
    partition: &Path,
    policy: &Path,
    adversary: &str,
    steps: usize,
    seed: u64,
) -> Result<u8> {
    let inst = read_instance(input)?;
    let part = read_partition(&inst, partition)?;
    let policy = read_policy(&inst, policy)?;
    let strategy = parse_adversary(adversary, inst.m(), seed)?;
    let traj = run_strategy(&inst, &part, &policy, &strategy, steps);

    let mut out = BufWriter::new(io::stdout().lock());
    for (t, x) in traj.states.iter().enumerate() {
        let input = traj.inputs.get(t);
        let line = json!({
            "t": t,
            "state": x.coords(),
            "label": input.map(|&(d, _)| d + 1),
            "control": input.map(|&(_, u)| inst.controls().get(u).coords().to_vec()),
        });
        writeln!(out, "{line}")?;
    }
    let summary = json!({
        "safe": traj.safe,
        "steps": traj.inputs.len(),
        "first_violation": traj.first_violation,
        "violation": traj.violation.map(|v| format!("{v:?}")),
    });
    writeln!(out, "{summary}")?;
    out.flush()?;
    Ok(if traj.safe { EXIT_OK } else { EXIT_NEGATIVE })
}

fn oracle(input: &Path, cap: u64) -> Result<u8> {
    let inst = read_instance(input)?;
    match exhaustive_fpcp(&inst, cap) {
        Ok(OracleVerdict::Solved(lab)) => {
            print_json(&json!({
                "status": Status::Solved,
                "cells": cells_json(&inst, &lab.to_partition()),
                "labels": labeling_to_file(inst.controls(), &lab),
            }))?;
            Ok(EXIT_OK)
        }
        Ok(OracleVerdict::Infeasible { examined }) => {
            print_json(&json!({"status": Status::InfeasibleProven, "examined": examined}))?;
            Ok(EXIT_NEGATIVE)
        }
        Err(e @ OracleError::CapExceeded { .. }) => {
            print_json(&json!({"status": Status::Unknown, "reason": e.to_string()}))?;
            Ok(EXIT_UNKNOWN)
        }
    }
}

fn rds(cmd: &RdsCommand) -> Result<u8> {
    match cmd {
        RdsCommand::Design {
            n,
            m,
            k,
            search,
            out,
        } => {
            let design = match design_code(*n, *m, *k, &search.config()) {
                Ok(d) => d,
                Err(resilient_partition::rds::RdsError::DesignNotFound(status)) => {
                    print_json(&json!({"status": status}))?;
                    return Ok(status_code(status));
                }
                Err(e) => return Err(e.into()),
            };
            write_json(out, &code_to_file(&design))?;
            print_json(&json!({
                "status": Status::Solved,
                "n": n,
                "m": m,
                "k": k,
                "states": design.encoder().domain().len(),
            }))?;
            Ok(EXIT_OK)
        }
        RdsCommand::Encode { code } => {
            let file: CodeFile = read_json(code)?;
            let design = code_from_file(&file)?;
            let mut enc = design.encoder_stream();
            let mut out = BufWriter::new(io::stdout().lock());
            for line in io::stdin().lock().lines() {
                for tok in line?.split_whitespace() {
                    let msg: usize = tok
                        .parse()
                        .with_context(|| format!("bad message {tok:?}"))?;
                    if msg == 0 {
                        bail!("messages are numbered from 1");
                    }
                    writeln!(out, "{}", codeword_to_bits(&enc.encode(msg - 1)?))?;
                }
            }
            out.flush()?;
            Ok(EXIT_OK)
        }
        RdsCommand::Decode { code } => {
            let file: CodeFile = read_json(code)?;
            let design = code_from_file(&file)?;
            let mut dec = design.decoder_stream();
            let mut out = BufWriter::new(io::stdout().lock());
            for line in io::stdin().lock().lines() {
                for tok in line?.split_whitespace() {
                    let word: IntVector = bits_to_codeword(tok)?;
                    writeln!(out, "{}", dec.decode(&word)? + 1)?;
                }
            }
            out.flush()?;
            Ok(EXIT_OK)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate { input } => validate(&input),
        Command::Solve {
            input,
            partition,
            out,
        } => solve(&input, &partition, out.as_deref()),
        Command::Synthesize { input, search, out } => synthesize(&input, &search, out.as_deref()),
        Command::Verify {
            input,
            partition,
            policy,
        } => verify(&input, &partition, policy.as_deref()),
        Command::Simulate {
            input,
            partition,
            policy,
            adversary,
            steps,
            seed,
        } => simulate(&input, &partition, &policy, &adversary, steps, seed),
        Command::Oracle { input, oracle_cap } => oracle(&input, oracle_cap),
        Command::Rds(cmd) => rds(&cmd),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!("\n{SCHEMA_HELP}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
