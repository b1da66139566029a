//! Deterministic, seeded simulation of a host network defending itself
//! against self-propagating worms with a T-cell inspired response loop.
//!
//! Each simulated host runs two cooperating processes:
//!
//! - the *periphery* ([`periphery`]), where dendritic cells turn symptom
//!   events into costimulation / IL-12 / IL-4 signals, and
//! - the *lymph node* ([`lymph_node`]), where naive T cells accumulate those
//!   signals and differentiate into CTL (strong responder), Th1 (CTL
//!   controller) and Th2 (weak responder) effectors.
//!
//! Effectors are exchanged between neighbouring hosts ([`peer_interaction`]);
//! their clone counts decide how many peers are polled. Local CTL and Th2
//! effectors act on the host posture ([`responder`]), which feeds back into
//! worm propagation ([`epidemic`]). [`netsim`] owns the world and the step
//! loop; [`config`], [`metrics`], [`compare`] and [`trace`] are the batch
//! front door used by the `cardinal` binary.

pub mod compare;
pub mod config;
pub mod epidemic;
pub mod error;
pub mod lymph_node;
pub mod metrics;
pub mod netsim;
pub mod peer_interaction;
pub mod periphery;
pub mod responder;
pub mod trace;
pub mod types;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use metrics::{MetricsSeries, RunSummary, StepMetrics};
pub use netsim::{run, run_with, EvalMode, World};
pub use types::{Antigen, CellType, HostId, Origin, Step};
