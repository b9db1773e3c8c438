//! Offline vertical-link selection.
//!
//! For every chiplet and every connected fault scenario, a selection set
//! assigns one fault-free vertical link to each of the chiplet's routers.
//! A set is scored by two objectives: keep each link's load (the summed
//! inter-chiplet traffic rate of the routers selecting it) close to the
//! average over the fault-free links, and keep router-to-link hop
//! distances short. The weighted sum is minimized per scenario at design
//! time; the winning sets are stored in lookup tables the routers consult
//! at run time.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fault::ChipletScenario;
use crate::topology::{ChipletId, RouterId, Topology, VlId};

/// Default weight of the distance objective relative to load balance.
pub const DEFAULT_RHO: f64 = 0.01;

/// Exhaustive search is used while the selection space is no larger than
/// this; branch-and-bound takes over beyond it.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Per-router inter-chiplet traffic rates (packets per cycle).
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficProfile {
    rates: BTreeMap<RouterId, f64>,
}

impl TrafficProfile {
    /// Uniform unit rate on every chiplet router, the most pessimistic
    /// assumption and the default for table building.
    pub fn uniform(topo: &Topology) -> Self {
        let mut rates = BTreeMap::new();
        for c in 0..topo.chiplet_count() {
            for r in topo.chiplet_routers(c) {
                rates.insert(r, 1.0);
            }
        }
        Self { rates }
    }

    pub fn from_rates(rates: BTreeMap<RouterId, f64>) -> Self {
        Self { rates }
    }

    pub fn set(&mut self, r: RouterId, rate: f64) {
        self.rates.insert(r, rate);
    }

    pub fn rate(&self, r: RouterId) -> f64 {
        self.rates.get(&r).copied().unwrap_or(0.0)
    }
}

/// An assignment of one vertical link (global id) to every router of one
/// chiplet, indexed by the router's row-major local index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionSet {
    pub chiplet: ChipletId,
    pub choice: Vec<VlId>,
}

impl SelectionSet {
    /// The indicator U_r^v: whether `router` selects `vl`.
    pub fn selects(&self, topo: &Topology, router: RouterId, vl: VlId) -> bool {
        self.choice[topo.local_index(router)] == vl
    }

    pub fn choice_for(&self, topo: &Topology, router: RouterId) -> VlId {
        self.choice[topo.local_index(router)]
    }

    /// Every choice must be a fault-free link of the owning chiplet and
    /// the vector must cover every router exactly once.
    pub fn validate(
        &self,
        topo: &Topology,
        view: ChipletScenario,
    ) -> Result<(), SelectError> {
        if self.choice.len() != topo.chiplet_router_count(self.chiplet) {
            return Err(SelectError::BadSelection(self.chiplet));
        }
        for &vl in &self.choice {
            let link = topo.vl(vl);
            if link.chiplet != self.chiplet || view.is_faulty(link.local_id) {
                return Err(SelectError::BadSelection(self.chiplet));
            }
        }
        Ok(())
    }
}

/// Per-link cost terms of one selection set.
#[derive(Debug, Clone, PartialEq)]
pub struct VlCost {
    pub vl: VlId,
    pub load: f64,
    pub load_cost: f64,
    pub distance_cost: u32,
}

/// Full cost evaluation of a selection set over the fault-free links.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    pub rho: f64,
    pub l_avg: f64,
    /// One entry per fault-free link, ascending local id.
    pub per_vl: Vec<VlCost>,
    pub total: f64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelectError {
    #[error("chiplet {0} has no fault-free vertical link in this scenario")]
    Disconnected(ChipletId),
    #[error("invalid selection set for chiplet {0}")]
    BadSelection(ChipletId),
}

/// Load on vertical link `v`: the summed rate of the routers selecting it.
pub fn vl_load(topo: &Topology, s: &SelectionSet, v: VlId, t: &TrafficProfile) -> f64 {
    let mut load = 0.0;
    for (i, r) in topo.chiplet_routers(s.chiplet).enumerate() {
        if s.choice[i] == v {
            load += t.rate(r);
        }
    }
    load
}

fn average_load(topo: &Topology, s: &SelectionSet, view: ChipletScenario, t: &TrafficProfile) -> f64 {
    let free = free_vls(topo, s.chiplet, view);
    let sum: f64 = free.iter().fold(0.0, |acc, &v| acc + vl_load(topo, s, v, t));
    sum / free.len() as f64
}

/// Load cost of link `v`: relative deviation of its load from the average
/// over the fault-free links. Defined as 0 when the profile carries no
/// traffic at all, leaving cost purely distance-driven.
pub fn load_cost(
    topo: &Topology,
    s: &SelectionSet,
    view: ChipletScenario,
    v: VlId,
    t: &TrafficProfile,
) -> f64 {
    let l_avg = average_load(topo, s, view, t);
    if l_avg == 0.0 {
        return 0.0;
    }
    ((vl_load(topo, s, v, t) - l_avg) / l_avg).abs()
}

/// Distance cost of link `v`: summed hop distance from the routers that
/// select it to its boundary router.
pub fn distance_cost(topo: &Topology, s: &SelectionSet, v: VlId) -> u32 {
    let target = topo.vl(v).chiplet_router;
    let mut d = 0;
    for (i, r) in topo.chiplet_routers(s.chiplet).enumerate() {
        if s.choice[i] == v {
            d += topo.hop_distance(r, target).expect("same chiplet");
        }
    }
    d
}

fn free_vls(topo: &Topology, chiplet: ChipletId, view: ChipletScenario) -> Vec<VlId> {
    topo.chiplet_vls(chiplet)
        .iter()
        .copied()
        .filter(|&v| !view.is_faulty(topo.vl(v).local_id))
        .collect()
}

/// Overall cost of a selection set: sum over fault-free links of the
/// weighted distance cost plus the load cost.
pub fn overall_cost(
    topo: &Topology,
    s: &SelectionSet,
    view: ChipletScenario,
    t: &TrafficProfile,
    rho: f64,
) -> CostBreakdown {
    let free = free_vls(topo, s.chiplet, view);
    let loads: Vec<f64> = free.iter().map(|&v| vl_load(topo, s, v, t)).collect();
    let l_avg = loads.iter().sum::<f64>() / free.len() as f64;
    let mut per_vl = Vec::with_capacity(free.len());
    let mut total = 0.0;
    for (&v, &load) in free.iter().zip(&loads) {
        let load_cost = if l_avg == 0.0 {
            0.0
        } else {
            ((load - l_avg) / l_avg).abs()
        };
        let distance_cost = distance_cost(topo, s, v);
        total += rho * f64::from(distance_cost) + load_cost;
        per_vl.push(VlCost {
            vl: v,
            load,
            load_cost,
            distance_cost,
        });
    }
    CostBreakdown {
        rho,
        l_avg,
        per_vl,
        total,
    }
}

/// All connected fault scenarios of a chiplet with `vl_count` links:
/// every subset leaving at least one link fault-free, fault-free first,
/// ascending bitmask order.
pub fn enumerate_scenarios(vl_count: usize) -> Vec<ChipletScenario> {
    let full = (1u32 << vl_count) - 1;
    (0..full).map(ChipletScenario).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchStrategy {
    /// Exhaustive below [`EXHAUSTIVE_LIMIT`] candidates, branch-and-bound
    /// above it.
    #[default]
    Auto,
    Exhaustive,
    BranchAndBound,
}

#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    pub rho: f64,
    pub strategy: SearchStrategy,
    /// Restrict each router to its k nearest fault-free links. Off by
    /// default; turning it on makes the search approximate.
    pub candidate_limit: Option<usize>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            rho: DEFAULT_RHO,
            strategy: SearchStrategy::Auto,
            candidate_limit: None,
        }
    }
}

/// Find the minimum-cost selection set for one chiplet under one fault
/// scenario. Both strategies return the same cost; ties are broken toward
/// the lexicographically smallest choice vector in router-id order, so
/// tables are serialization-stable.
pub fn optimize_selection(
    topo: &Topology,
    chiplet: ChipletId,
    view: ChipletScenario,
    t: &TrafficProfile,
    opts: &OptimizeOptions,
) -> Result<(SelectionSet, CostBreakdown), SelectError> {
    let routers: Vec<RouterId> = topo.chiplet_routers(chiplet).collect();
    let free = free_vls(topo, chiplet, view);
    if free.is_empty() {
        return Err(SelectError::Disconnected(chiplet));
    }

    // per-router candidate links, ascending local id for lexicographic order
    let candidates: Vec<Vec<VlId>> = routers
        .iter()
        .map(|&r| {
            let mut cands = free.clone();
            if let Some(k) = opts.candidate_limit {
                cands.sort_by_key(|&v| {
                    (
                        topo.hop_distance(r, topo.vl(v).chiplet_router).unwrap(),
                        topo.vl(v).local_id,
                    )
                });
                cands.truncate(k.max(1));
                cands.sort_by_key(|&v| topo.vl(v).local_id);
            }
            cands
        })
        .collect();

    let space: u128 = candidates
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128));
    let exhaustive = match opts.strategy {
        SearchStrategy::Exhaustive => true,
        SearchStrategy::BranchAndBound => false,
        SearchStrategy::Auto => space <= EXHAUSTIVE_LIMIT,
    };

    let eval = |choice: &[VlId]| -> CostBreakdown {
        let s = SelectionSet {
            chiplet,
            choice: choice.to_vec(),
        };
        overall_cost(topo, &s, view, t, opts.rho)
    };

    let best_choice = if exhaustive {
        exhaustive_search(&candidates, &eval)
    } else {
        branch_and_bound(topo, &routers, &free, &candidates, t, opts.rho, &eval)
    };
    let cost = eval(&best_choice);
    Ok((
        SelectionSet {
            chiplet,
            choice: best_choice,
        },
        cost,
    ))
}

fn exhaustive_search(
    candidates: &[Vec<VlId>],
    eval: &dyn Fn(&[VlId]) -> CostBreakdown,
) -> Vec<VlId> {
    let n = candidates.len();
    let mut idx = vec![0usize; n];
    let mut choice: Vec<VlId> = candidates.iter().map(|c| c[0]).collect();
    let mut best_choice = choice.clone();
    let mut best = eval(&choice).total;
    loop {
        // advance the odometer
        let mut pos = n;
        loop {
            if pos == 0 {
                return best_choice;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < candidates[pos].len() {
                choice[pos] = candidates[pos][idx[pos]];
                break;
            }
            idx[pos] = 0;
            choice[pos] = candidates[pos][0];
        }
        let total = eval(&choice).total;
        if total < best {
            best = total;
            best_choice.copy_from_slice(&choice);
        }
    }
}

/// Exact depth-first branch-and-bound over routers in local-index order.
/// The pruning bound combines the committed weighted distance (plus the
/// minimum achievable distance of the unassigned routers) with a lower
/// bound on the final load cost: per-link excess over the average never
/// shrinks, and deficit the remaining traffic mass cannot cover must
/// remain as deviation.
fn branch_and_bound(
    topo: &Topology,
    routers: &[RouterId],
    free: &[VlId],
    candidates: &[Vec<VlId>],
    t: &TrafficProfile,
    rho: f64,
    eval: &dyn Fn(&[VlId]) -> CostBreakdown,
) -> Vec<VlId> {
    const MARGIN: f64 = 1e-9;
    let n = routers.len();
    let nv = free.len();
    let vl_slot: BTreeMap<VlId, usize> = free.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let rates: Vec<f64> = routers.iter().map(|&r| t.rate(r)).collect();
    let total_rate: f64 = rates.iter().sum();
    let l_avg = total_rate / nv as f64;
    // distance from router i to candidate j of router i
    let dists: Vec<Vec<u32>> = routers
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            candidates[i]
                .iter()
                .map(|&v| topo.hop_distance(r, topo.vl(v).chiplet_router).unwrap())
                .collect()
        })
        .collect();
    let mut suffix_min: Vec<u32> = vec![0; n + 1];
    for i in (0..n).rev() {
        suffix_min[i] = suffix_min[i + 1] + dists[i].iter().copied().min().unwrap();
    }

    struct Search<'a> {
        candidates: &'a [Vec<VlId>],
        dists: &'a [Vec<u32>],
        suffix_min: &'a [u32],
        rates: &'a [f64],
        vl_slot: &'a BTreeMap<VlId, usize>,
        rho: f64,
        l_avg: f64,
        eval: &'a dyn Fn(&[VlId]) -> CostBreakdown,
        choice: Vec<VlId>,
        loads: Vec<f64>,
        best: f64,
        best_choice: Vec<VlId>,
    }

    impl Search<'_> {
        fn load_lower_bound(&self, remaining: f64) -> f64 {
            if self.l_avg == 0.0 {
                return 0.0;
            }
            let mut excess = 0.0;
            let mut deficit = 0.0;
            for &l in &self.loads {
                if l > self.l_avg {
                    excess += l - self.l_avg;
                } else {
                    deficit += self.l_avg - l;
                }
            }
            let unfilled = (deficit - remaining).max(0.0);
            (excess + unfilled) / self.l_avg
        }

        fn dfs(&mut self, i: usize, dist_so_far: u32, remaining: f64) {
            if i == self.choice.len() {
                let total = (self.eval)(&self.choice).total;
                if total < self.best {
                    self.best = total;
                    self.best_choice.copy_from_slice(&self.choice);
                }
                return;
            }
            for (j, &v) in self.candidates[i].iter().enumerate() {
                let d = dist_so_far + self.dists[i][j];
                let slot = self.vl_slot[&v];
                self.loads[slot] += self.rates[i];
                self.choice[i] = v;
                let rest = remaining - self.rates[i];
                let bound = self.rho * f64::from(d + self.suffix_min[i + 1])
                    + self.load_lower_bound(rest);
                if bound < self.best + MARGIN {
                    self.dfs(i + 1, d, rest);
                }
                self.loads[slot] -= self.rates[i];
            }
        }
    }

    let mut search = Search {
        candidates,
        dists: &dists,
        suffix_min: &suffix_min,
        rates: &rates,
        vl_slot: &vl_slot,
        rho,
        l_avg,
        eval,
        choice: candidates.iter().map(|c| c[0]).collect(),
        loads: vec![0.0; nv],
        best: f64::INFINITY,
        best_choice: candidates.iter().map(|c| c[0]).collect(),
    };
    search.dfs(0, 0, total_rate);
    search.best_choice
}

/// Reference selection strategies compared against the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Each router picks its nearest fault-free link, ties to the lowest
    /// local id.
    DistanceBased,
    /// Each router picks uniformly among the fault-free links, from a
    /// seeded deterministic generator.
    Random(u64),
}

pub fn baseline_select(
    kind: BaselineKind,
    topo: &Topology,
    chiplet: ChipletId,
    view: ChipletScenario,
) -> Result<SelectionSet, SelectError> {
    let free = free_vls(topo, chiplet, view);
    if free.is_empty() {
        return Err(SelectError::Disconnected(chiplet));
    }
    let choice = match kind {
        BaselineKind::DistanceBased => topo
            .chiplet_routers(chiplet)
            .map(|r| {
                free.iter()
                    .copied()
                    .min_by_key(|&v| {
                        (
                            topo.hop_distance(r, topo.vl(v).chiplet_router).unwrap(),
                            topo.vl(v).local_id,
                        )
                    })
                    .unwrap()
            })
            .collect(),
        BaselineKind::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed.wrapping_add((chiplet as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
                    .wrapping_add(u64::from(view.0) << 32),
            );
            (0..topo.chiplet_router_count(chiplet))
                .map(|_| free[rng.gen_range(0..free.len())])
                .collect()
        }
    };
    Ok(SelectionSet { chiplet, choice })
}
