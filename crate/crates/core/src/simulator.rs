//! Closed-loop replay of a policy against an adversary.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::Policy;
use crate::model::{Instance, IntVector, Partition};

/// What the adversary sees before choosing a label.
pub struct StepContext<'a> {
    pub inst: &'a Instance,
    pub partition: &'a Partition,
    pub policy: &'a Policy,
    pub state: &'a IntVector,
    pub t: usize,
}

pub trait Adversary {
    /// Zero-based label for this step, or `None` to end the run early.
    fn choose(&mut self, ctx: &StepContext<'_>) -> Option<usize>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdversaryStrategy {
    Constant(usize),
    UniformRandom {
        seed: u64,
    },
    /// Picks the label leaving the fewest safe successors that the policy
    /// knows how to continue from; smallest label on ties.
    GreedyEscape,
    /// Replays the sequence, cycling when it runs out.
    Scripted(Vec<usize>),
    /// Reads one-based labels from standard input.
    Interactive,
}

impl AdversaryStrategy {
    pub fn build(&self) -> Box<dyn Adversary> {
        match self {
            AdversaryStrategy::Constant(d) => Box::new(Constant(*d)),
            AdversaryStrategy::UniformRandom { seed } => Box::new(UniformRandom {
                rng: ChaCha8Rng::seed_from_u64(*seed),
            }),
            AdversaryStrategy::GreedyEscape => Box::new(GreedyEscape),
            AdversaryStrategy::Scripted(seq) => Box::new(Scripted {
                seq: seq.clone(),
                pos: 0,
            }),
            AdversaryStrategy::Interactive => Box::new(Interactive::new(
                std::io::BufReader::new(std::io::stdin()),
                std::io::stderr(),
            )),
        }
    }
}

pub struct Constant(pub usize);

impl Adversary for Constant {
    fn choose(&mut self, _: &StepContext<'_>) -> Option<usize> {
        Some(self.0)
    }
}

pub struct UniformRandom {
    rng: ChaCha8Rng,
}

impl Adversary for UniformRandom {
    fn choose(&mut self, ctx: &StepContext<'_>) -> Option<usize> {
        Some(self.rng.random_range(0..ctx.partition.m()))
    }
}

pub struct GreedyEscape;

impl Adversary for GreedyEscape {
    fn choose(&mut self, ctx: &StepContext<'_>) -> Option<usize> {
        let controls = ctx.inst.controls();
        let safe = ctx.inst.safe_set();
        (0..ctx.partition.m()).min_by_key(|&d| {
            ctx.partition
                .cell(d)
                .iter()
                .filter(|&&u| {
                    let y = ctx.state.add(controls.get(u));
                    safe.contains(&y) && ctx.policy.contains(&y)
                })
                .count()
        })
    }
}

pub struct Scripted {
    seq: Vec<usize>,
    pos: usize,
}

impl Adversary for Scripted {
    fn choose(&mut self, _: &StepContext<'_>) -> Option<usize> {
        if self.seq.is_empty() {
            return None;
        }
        let d = self.seq[self.pos % self.seq.len()];
        self.pos += 1;
        Some(d)
    }
}

/// Prompts on `out` and reads one-based labels from `input`. Boards are
/// drawn for one- and two-dimensional instances.
pub struct Interactive<R, W> {
    input: R,
    out: W,
}

impl<R: BufRead, W: Write> Interactive<R, W> {
    pub fn new(input: R, out: W) -> Self {
        Interactive { input, out }
    }
}

impl<R: BufRead, W: Write> Adversary for Interactive<R, W> {
    fn choose(&mut self, ctx: &StepContext<'_>) -> Option<usize> {
        let m = ctx.partition.m();
        let _ = write!(self.out, "{}", render_board(ctx.inst, ctx.state));
        loop {
            let _ = write!(self.out, "t={} x=({}) label 1..={m}> ", ctx.t, ctx.state);
            let _ = self.out.flush();
            let mut line = String::new();
            match self.input.read_line(&mut line) {
                Ok(0) | Err(_) => return None,
                Ok(_) => {}
            }
            match line.trim().parse::<usize>() {
                Ok(d) if (1..=m).contains(&d) => return Some(d - 1),
                _ => {
                    let _ = writeln!(self.out, "expected a label between 1 and {m}");
                }
            }
        }
    }
}

/// `@` marks the state, `#` safe points, `.` everything else in the
/// bounding box. Empty for dimensions above two.
pub fn render_board(inst: &Instance, state: &IntVector) -> String {
    let n = inst.dim();
    if n > 2 {
        return String::new();
    }
    let pts = inst.safe_set().points();
    let lo = |i: usize| pts.iter().map(|p| p.coords()[i]).min().unwrap_or(0);
    let hi = |i: usize| pts.iter().map(|p| p.coords()[i]).max().unwrap_or(0);
    let cell = |p: IntVector| {
        if &p == state {
            '@'
        } else if inst.safe_set().contains(&p) {
            '#'
        } else {
            '.'
        }
    };
    let mut out = String::new();
    if n == 1 {
        for a in lo(0) - 1..=hi(0) + 1 {
            out.push(cell(IntVector::new(vec![a])));
        }
        out.push('\n');
    } else {
        for b in (lo(1) - 1..=hi(1) + 1).rev() {
            for a in lo(0) - 1..=hi(0) + 1 {
                out.push(cell(IntVector::new(vec![a, b])));
            }
            out.push('\n');
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    LeftSafeSet,
    /// The policy has no entry for the current state.
    PolicyUndefined,
    /// The policy answered with a control outside the named cell.
    WrongCell,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<IntVector>,
    /// Zero-based label and control index applied at each step.
    pub inputs: Vec<(usize, usize)>,
    pub safe: bool,
    /// Time step of the first violation.
    pub first_violation: Option<usize>,
    pub violation: Option<ViolationKind>,
}

impl Trajectory {
    fn fail(mut self, t: usize, kind: ViolationKind) -> Self {
        self.safe = false;
        self.first_violation = Some(t);
        self.violation = Some(kind);
        self
    }
}

/// Replays `x(t+1) = x(t) + u(t)` for up to `steps` steps, stopping at the
/// first violation or when the adversary stops.
pub fn run(
    inst: &Instance,
    partition: &Partition,
    policy: &Policy,
    adversary: &mut dyn Adversary,
    steps: usize,
) -> Trajectory {
    let mut traj = Trajectory {
        states: vec![inst.x0().clone()],
        inputs: Vec::new(),
        safe: true,
        first_violation: None,
        violation: None,
    };
    if !inst.safe_set().contains(inst.x0()) {
        return traj.fail(0, ViolationKind::LeftSafeSet);
    }
    for t in 0..steps {
        let x = traj.states.last().expect("nonempty").clone();
        let ctx = StepContext {
            inst,
            partition,
            policy,
            state: &x,
            t,
        };
        let Some(d) = adversary.choose(&ctx) else {
            break;
        };
        let Some(u) = policy.control(&x, d) else {
            return traj.fail(t, ViolationKind::PolicyUndefined);
        };
        if partition.label_of(u) != d {
            return traj.fail(t, ViolationKind::WrongCell);
        }
        let y = x.add(inst.controls().get(u));
        let escaped = !inst.safe_set().contains(&y);
        traj.inputs.push((d, u));
        traj.states.push(y);
        if escaped {
            return traj.fail(t + 1, ViolationKind::LeftSafeSet);
        }
    }
    traj
}

/// [`run`] with an adversary built from `strategy`.
pub fn run_strategy(
    inst: &Instance,
    partition: &Partition,
    policy: &Policy,
    strategy: &AdversaryStrategy,
    steps: usize,
) -> Trajectory {
    run(inst, partition, policy, strategy.build().as_mut(), steps)
}
