//! Safe control under adversarial loss of control authority.
//!
//! A system moves on the integer lattice by `x(t+1) = x(t) + u(t)`, where
//! `u(t)` comes from a finite control set. The control set is split into `m`
//! cells and, at every step, an adversary decides which cell the controller
//! may use. This crate answers two questions:
//!
//! * given the split, is there a policy keeping the state inside a finite
//!   safe set forever? ([`game`])
//! * which split should be built so that such a policy exists?
//!   ([`synthesis`], backed by [`graph`], [`labeling`] and [`oracle`])
//!
//! [`simulator`] replays policies against adversaries, and [`rds`] applies
//! the machinery to line codes with a bounded running digital sum.
//!
//! ```
//! use resilient_partition::{game::solve_rpcp, model::{Instance, Partition}};
//!
//! // controls are e1, -e1, e2, -e2, 0
//! let inst = Instance::vehicle(2, 1, 2).unwrap();
//! let part = Partition::from_cells(vec![vec![0, 1], vec![2, 3, 4]], 5).unwrap();
//! assert!(solve_rpcp(&inst, &part).solvable);
//! ```

pub mod game;
pub mod graph;
pub mod io;
pub mod labeling;
pub mod model;
pub mod oracle;
pub mod rds;
pub mod simulator;
pub mod synthesis;

pub use game::{counter_based_attractor, solve_rpcp, GameResult, Policy};
pub use graph::{build_induced, peel_to_min_degree, InducedSubgraph};
pub use labeling::{
    check_conditions, derandomized_labeling, random_labeling, verify_labeling, ConditionReport,
};
pub use model::{
    labeling_to_partition, ControlSet, Instance, IntVector, Labeling, ModelError, Partition,
    SafeSet,
};
pub use synthesis::{synthesize_fpcp, Status, SynthesisConfig, SynthesisOutcome};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/games.md")]
    mod games {}
    #[doc = include_str!("../../../book/src/labeling.md")]
    mod labeling {}
    #[doc = include_str!("../../../book/src/synthesis.md")]
    mod synthesis {}
    #[doc = include_str!("../../../book/src/rds.md")]
    mod rds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
