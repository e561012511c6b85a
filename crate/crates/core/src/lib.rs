//! Composition of heterogeneous behavioural models through labelled
//! transition systems: an algebra over process nets, synchronous-product
//! semantics, deadlock and reachability checking, and DOT/Uppaal/LOTOS
//! bridges.

pub mod algebra;
pub mod checker;
pub mod dot;
pub mod emit;
pub mod interp;
pub mod label;
pub mod lts;
pub mod script;
pub mod semantics;

pub use algebra::{compose, extract_chan, remove, replace, select, AlgebraError, ChannelMode, Part, Process, SystemNet};
pub use checker::{check, CheckError, Outcome, Query, QueryError, Verdict};
pub use dot::{parse_dot, DotDocument, DotError};
pub use interp::{run_script, run_script_file, RunError, RunOptions, RunReport, VerdictFormat};
pub use label::{ChannelAction, Direction, FacetName, Label};
pub use lts::{Lts, LtsError, StateId, Transition};
pub use script::{parse_script, ScriptError, ScriptProgram};
pub use semantics::{enabled, initial_state, product, traces, GlobalState, GlobalTransition, SemanticsError, StepKind};
