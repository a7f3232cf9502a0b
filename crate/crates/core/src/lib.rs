//! Compiling unitaries into deterministic one-way measurement patterns.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`decompose`]: split `U` as `R . Phi . P`, a summing restriction after a
//!    diagonal phase map after a `|+>` preparation.
//! 2. [`graphmatch`]: read an entanglement graph and measurement angles off the
//!    phase map, if it has that shape.
//! 3. [`flow`]: find a causal flow for the resulting geometry through a
//!    vertex-disjoint path reduction to max-flow.
//! 4. [`pattern`]: emit the corrected measurement pattern for that flow.
//! 5. [`sim`]: run every measurement branch on a dense statevector and check
//!    that they agree and reproduce `U`.
//!
//! [`compile`] drives the stages with backtracking.

pub mod compile;
pub mod decompose;
pub mod flow;
pub mod graphmatch;
pub mod io;
pub mod linalg;
pub mod maps;
pub mod pattern;
pub mod sim;
pub mod types;

pub use compile::{compile, CompileConfig, CompileOutcome};
pub use decompose::{DecomposeError, DecompositionPlan, SlotSolution};
pub use flow::{find_flow, Flow, FlowError, Geometry};
pub use graphmatch::{MatchError, MatchResult};
pub use linalg::{Matrix, C64};
pub use pattern::{Command, Pattern};
pub use sim::VerificationReport;
pub use types::{CoreError, DiagonalSource, PhaseMapDiagonal, QubitIndexing, StateVector, UnitaryMatrix};
