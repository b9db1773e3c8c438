//! Per-scenario vertical-link selection tables.
//!
//! A table stores, for every chiplet and every connected fault scenario of
//! that chiplet's links, one selection set for the source-side role (the
//! chiplet's routers as senders) and one for the destination-side role
//! (its routers as receivers, consulted on the interposer). Tables are
//! built offline and serialized deterministically.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fault::ChipletScenario;
use crate::topology::{ChipletId, RouterId, Topology, VlId};
use crate::vlselect::{
    baseline_select, optimize_selection, BaselineKind, OptimizeOptions, SearchStrategy,
    SelectError, SelectionSet, TrafficProfile, DEFAULT_RHO,
};

/// Which side of an inter-chiplet route a selection serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Source,
    Dest,
}

/// How selection sets are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionKind {
    /// Cost-optimized selection.
    Optimal,
    /// Nearest fault-free link per router.
    DistanceBased,
    /// Seeded uniform choice among fault-free links per router.
    Random(u64),
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub selection: SelectionKind,
    pub rho: f64,
    pub strategy: SearchStrategy,
    pub candidate_limit: Option<usize>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            selection: SelectionKind::Optimal,
            rho: DEFAULT_RHO,
            strategy: SearchStrategy::Auto,
            candidate_limit: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("table parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("table entry for chiplet {chiplet}: {reason}")]
    BadEntry { chiplet: ChipletId, reason: String },
}

/// Lookup tables mapping (chiplet, fault scenario, role, router) to the
/// selected vertical link.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelectionTable {
    entries: BTreeMap<(ChipletId, u32, Role), SelectionSet>,
}

impl SelectionTable {
    pub fn insert(&mut self, view: ChipletScenario, role: Role, set: SelectionSet) {
        self.entries.insert((set.chiplet, view.0, role), set);
    }

    pub fn get(&self, chiplet: ChipletId, view: ChipletScenario, role: Role) -> Option<&SelectionSet> {
        self.entries.get(&(chiplet, view.0, role))
    }

    /// The link selected for `router` under `view`, or None when the table
    /// has no entry (disconnected scenario or incomplete table).
    pub fn choice(
        &self,
        topo: &Topology,
        chiplet: ChipletId,
        view: ChipletScenario,
        role: Role,
        router: RouterId,
    ) -> Option<VlId> {
        self.get(chiplet, view, role)
            .map(|s| s.choice[topo.local_index(router)])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(
        &self,
    ) -> impl Iterator<Item = (ChipletId, ChipletScenario, Role, &SelectionSet)> {
        self.entries
            .iter()
            .map(|(&(c, mask, role), set)| (c, ChipletScenario(mask), role, set))
    }

    /// Serialize to the table file format: one entry per (chiplet,
    /// scenario, role) with the faulty local ids sorted ascending and the
    /// choices as local link ids in router-id order.
    pub fn to_string_toml(&self, topo: &Topology) -> String {
        let doc = TableDoc {
            entries: self
                .entries
                .iter()
                .map(|(&(chiplet, mask, role), set)| TableEntry {
                    chiplet,
                    scenario: ChipletScenario(mask)
                        .faulty_locals(topo.chiplet_vls(chiplet).len()),
                    role,
                    choices: set.choice.iter().map(|&v| topo.vl(v).local_id).collect(),
                })
                .collect(),
        };
        toml::to_string(&doc).expect("table serializes")
    }

    pub fn from_str_toml(topo: &Topology, text: &str) -> Result<Self, TableError> {
        let doc: TableDoc = toml::from_str(text)?;
        let mut table = SelectionTable::default();
        for e in doc.entries {
            let bad = |reason: &str| TableError::BadEntry {
                chiplet: e.chiplet,
                reason: reason.to_string(),
            };
            if e.chiplet >= topo.chiplet_count() {
                return Err(bad("no such chiplet"));
            }
            let vl_count = topo.chiplet_vls(e.chiplet).len();
            if e.scenario.iter().any(|&id| id >= vl_count) {
                return Err(bad("scenario names a non-existent link"));
            }
            let view = ChipletScenario::from_faulty_locals(&e.scenario);
            if e.choices.len() != topo.chiplet_router_count(e.chiplet) {
                return Err(bad("wrong number of choices"));
            }
            let mut choice = Vec::with_capacity(e.choices.len());
            for local in e.choices {
                if local >= vl_count {
                    return Err(bad("choice names a non-existent link"));
                }
                if view.is_faulty(local) {
                    return Err(bad("choice names a faulty link"));
                }
                choice.push(topo.vl_global(e.chiplet, local));
            }
            table.insert(
                view,
                e.role,
                SelectionSet {
                    chiplet: e.chiplet,
                    choice,
                },
            );
        }
        Ok(table)
    }

    pub fn write_path(&self, topo: &Topology, path: &Path) -> Result<(), TableError> {
        std::fs::write(path, self.to_string_toml(topo)).map_err(|source| TableError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load_path(topo: &Topology, path: &Path) -> Result<Self, TableError> {
        let text = std::fs::read_to_string(path).map_err(|source| TableError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_str_toml(topo, &text)
    }
}

#[derive(Serialize, Deserialize)]
struct TableDoc {
    entries: Vec<TableEntry>,
}

#[derive(Serialize, Deserialize)]
struct TableEntry {
    chiplet: ChipletId,
    scenario: Vec<usize>,
    role: Role,
    choices: Vec<usize>,
}

/// Build the full table for a topology: every chiplet, every connected
/// scenario, both roles. The same profile serves both roles (senders and
/// receivers), which is exact for the uniform default.
pub fn build_tables(
    topo: &Topology,
    profile: &TrafficProfile,
    opts: &BuildOptions,
) -> Result<SelectionTable, SelectError> {
    build_tables_with_roles(topo, profile, profile, opts)
}

/// Build tables with distinct sender and receiver rate profiles.
pub fn build_tables_with_roles(
    topo: &Topology,
    source_profile: &TrafficProfile,
    dest_profile: &TrafficProfile,
    opts: &BuildOptions,
) -> Result<SelectionTable, SelectError> {
    // congruent chiplets under identical local rates share one search
    let mut cache: HashMap<CacheKey, Vec<usize>> = HashMap::new();
    let mut table = SelectionTable::default();
    for chiplet in 0..topo.chiplet_count() {
        for view in crate::vlselect::enumerate_scenarios(topo.chiplet_vls(chiplet).len()) {
            for (role, profile) in [(Role::Source, source_profile), (Role::Dest, dest_profile)] {
                let set = match opts.selection {
                    SelectionKind::DistanceBased => {
                        baseline_select(BaselineKind::DistanceBased, topo, chiplet, view)?
                    }
                    SelectionKind::Random(seed) => {
                        baseline_select(BaselineKind::Random(seed), topo, chiplet, view)?
                    }
                    SelectionKind::Optimal => {
                        let key = cache_key(topo, chiplet, view, profile);
                        match cache.get(&key) {
                            Some(locals) => SelectionSet {
                                chiplet,
                                choice: locals
                                    .iter()
                                    .map(|&l| topo.vl_global(chiplet, l))
                                    .collect(),
                            },
                            None => {
                                let (set, _) = optimize_selection(
                                    topo,
                                    chiplet,
                                    view,
                                    profile,
                                    &OptimizeOptions {
                                        rho: opts.rho,
                                        strategy: opts.strategy,
                                        candidate_limit: opts.candidate_limit,
                                    },
                                )?;
                                cache.insert(
                                    key,
                                    set.choice.iter().map(|&v| topo.vl(v).local_id).collect(),
                                );
                                set
                            }
                        }
                    }
                };
                table.insert(view, role, set);
            }
        }
    }
    Ok(table)
}

type CacheKey = (u16, u16, Vec<(u16, u16)>, u32, Vec<u64>);

fn cache_key(
    topo: &Topology,
    chiplet: ChipletId,
    view: ChipletScenario,
    profile: &TrafficProfile,
) -> CacheKey {
    let dims = topo.chiplet(chiplet);
    let vl_positions = topo
        .chiplet_vls(chiplet)
        .iter()
        .map(|&v| {
            let r = topo.vl(v).chiplet_router;
            (r.x, r.y)
        })
        .collect();
    let rates = topo
        .chiplet_routers(chiplet)
        .map(|r| profile.rate(r).to_bits())
        .collect();
    (dims.width, dims.height, vl_positions, view.0, rates)
}
