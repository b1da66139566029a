//! The simulated world: topology, hosts, in-flight messages, the RNG
//! discipline and the master step loop.

pub mod rng;
pub mod topology;
mod world;

pub use rng::{rng_substream, Purpose};
pub use topology::{Topology, TopologySpec};
pub use world::{build_world, run, run_with, EvalMode, Host, HostTraffic, StepReport, World};
