//! Hierarchical triple-modular-redundancy (TMR) networks.
//!
//! * [`logic`]: majority voter, disagreement alarm and TMR flip-flop register.
//! * [`reliability`]: closed-form and recursive error-probability models.
//! * [`fault`]: seeded bit-error injection for faulty modules.
//! * [`network`]: structural voter trees with Monte-Carlo simulation and alarm counting.
//! * [`harness`]: parameter sweeps and report tables.
//! * [`report`] / [`cli`]: CSV/JSON documents and the `htmr-lab` command line.
//!
//! Monte-Carlo work runs on rayon when the `parallel` feature is enabled
//! (the default) and sequentially otherwise; results do not depend on it.

pub mod cli;
pub mod error;
pub mod exec;
pub mod fault;
pub mod harness;
pub mod logic;
pub mod network;
pub mod reliability;
pub mod report;

pub use error::HtmrError;
pub use exec::Executor;
pub use fault::{ModuleKind, RandomSource, Scenario, ScenarioPattern};
pub use logic::{TripleInput, VoteOutcome};
pub use network::{EmpiricalEstimate, FaultStatusCounter, HtmrNetwork, LeafConfig};
pub use reliability::{Probability, ReductionRate, TmrOrder};
