//! Vertical-link fault scenarios.
//!
//! A scenario is the set of vertical links currently unusable. The global
//! view is keyed by global VL ids; routing and the selection tables work
//! with the per-chiplet view, a bitmask over that chiplet's local VL ids.

use std::collections::BTreeSet;
use std::fmt;

use crate::topology::{ChipletId, Topology, VlId};

/// Faults on one chiplet's vertical links, as a bitmask over local VL ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ChipletScenario(pub u32);

impl ChipletScenario {
    pub fn fault_free() -> Self {
        Self(0)
    }

    pub fn from_faulty_locals(ids: &[usize]) -> Self {
        Self(ids.iter().fold(0, |m, &id| m | (1 << id)))
    }

    pub fn is_faulty(&self, local_id: usize) -> bool {
        self.0 & (1 << local_id) != 0
    }

    pub fn fault_count(&self) -> u32 {
        self.0.count_ones()
    }

    /// Local ids of the fault-free VLs, ascending, out of `vl_count` total.
    pub fn free_locals(&self, vl_count: usize) -> Vec<usize> {
        (0..vl_count).filter(|&id| !self.is_faulty(id)).collect()
    }

    /// Local ids of the faulty VLs, ascending.
    pub fn faulty_locals(&self, vl_count: usize) -> Vec<usize> {
        (0..vl_count).filter(|&id| self.is_faulty(id)).collect()
    }

    /// A chiplet stays connected while at least one VL is fault-free.
    pub fn connected(&self, vl_count: usize) -> bool {
        (self.0.count_ones() as usize) < vl_count
    }
}

/// The global fault state: which vertical links are currently faulty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FaultScenario {
    faulty: BTreeSet<VlId>,
}

impl FaultScenario {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_vls(ids: impl IntoIterator<Item = VlId>) -> Self {
        Self {
            faulty: ids.into_iter().collect(),
        }
    }

    pub fn is_faulty(&self, vl: VlId) -> bool {
        self.faulty.contains(&vl)
    }

    pub fn faulty_vls(&self) -> impl Iterator<Item = VlId> + '_ {
        self.faulty.iter().copied()
    }

    pub fn fault_count(&self) -> usize {
        self.faulty.len()
    }

    /// This scenario restricted to one chiplet's VLs.
    pub fn chiplet_view(&self, topo: &Topology, c: ChipletId) -> ChipletScenario {
        let mut mask = 0u32;
        for (local, &vl) in topo.chiplet_vls(c).iter().enumerate() {
            if self.is_faulty(vl) {
                mask |= 1 << local;
            }
        }
        ChipletScenario(mask)
    }

    /// Fault-free VLs of one chiplet, ascending global id.
    pub fn free_vls_of(&self, topo: &Topology, c: ChipletId) -> Vec<VlId> {
        topo.chiplet_vls(c)
            .iter()
            .copied()
            .filter(|&vl| !self.is_faulty(vl))
            .collect()
    }

    pub fn chiplet_connected(&self, topo: &Topology, c: ChipletId) -> bool {
        topo.chiplet_vls(c).iter().any(|&vl| !self.is_faulty(vl))
    }

    /// Whether every chiplet retains at least one fault-free VL.
    pub fn connected(&self, topo: &Topology) -> bool {
        (0..topo.chiplet_count()).all(|c| self.chiplet_connected(topo, c))
    }

    pub fn disconnected_chiplets(&self, topo: &Topology) -> Vec<ChipletId> {
        (0..topo.chiplet_count())
            .filter(|&c| !self.chiplet_connected(topo, c))
            .collect()
    }
}

impl fmt::Display for FaultScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.faulty.is_empty() {
            return write!(f, "none");
        }
        let ids: Vec<String> = self.faulty.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", ids.join(","))
    }
}
