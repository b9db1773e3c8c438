//! Cycle-accurate simulation and static verification for 2.5D chiplet
//! networks.
//!
//! A system is a set of chiplet meshes sitting on an interposer mesh,
//! joined by vertical links (VLs) at boundary routers. Inter-chiplet
//! packets are routed through two intermediate destinations: a VL on the
//! source chiplet and a VL under the destination chiplet. Deadlock
//! freedom comes from two virtual networks with restricted transitions;
//! fault tolerance comes from re-selecting VLs per fault scenario using
//! precomputed, cost-optimized lookup tables.
//!
//! The crate is organized as:
//! - [`topology`]: system model, configuration loading, presets.
//! - [`fault`]: vertical-link fault scenarios (global and per-chiplet views).
//! - [`routing`]: virtual-network assignment, turn rules, route computation.
//! - [`vlselect`]: offline vertical-link selection optimizer and baselines.
//! - [`table`]: per-scenario selection tables consumed by the router model.
//! - [`verify`]: channel-dependency-graph deadlock certification and
//!   reachability analysis.
//! - [`engine`]: wormhole-switched, credit-flow-controlled cycle-accurate
//!   simulation with synthetic and trace-driven traffic.

pub mod engine;
pub mod fault;
pub mod routing;
pub mod table;
pub mod topology;
pub mod verify;
pub mod vlselect;

pub use fault::{ChipletScenario, FaultScenario};
pub use routing::{Port, RouterId, VirtualNetwork};
pub use table::SelectionTable;
pub use topology::Topology;
