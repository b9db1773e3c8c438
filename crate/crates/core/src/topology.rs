//! The 2.5D system model: chiplet meshes on an interposer mesh, joined by
//! vertical links at boundary routers.
//!
//! Coordinates grow East in x and South in y. Chiplet router coordinates
//! are chiplet-local; interposer coordinates are global. The two spaces
//! are bridged explicitly through each chiplet's footprint origin.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a chiplet in the system.
pub type ChipletId = usize;

/// Global index of a vertical link (its position in [`Topology::vls`]).
pub type VlId = usize;

/// The mesh layer a router belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layer {
    Chiplet(ChipletId),
    Interposer,
}

/// A router address: layer plus (x, y) within that layer's mesh.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RouterId {
    pub layer: Layer,
    pub x: u16,
    pub y: u16,
}

impl RouterId {
    pub fn chiplet(c: ChipletId, x: u16, y: u16) -> Self {
        Self { layer: Layer::Chiplet(c), x, y }
    }

    pub fn interposer(x: u16, y: u16) -> Self {
        Self { layer: Layer::Interposer, x, y }
    }

    pub fn is_interposer(&self) -> bool {
        self.layer == Layer::Interposer
    }

    /// The chiplet this router sits on, if any.
    pub fn chiplet_id(&self) -> Option<ChipletId> {
        match self.layer {
            Layer::Chiplet(c) => Some(c),
            Layer::Interposer => None,
        }
    }
}

impl fmt::Debug for RouterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.layer {
            Layer::Chiplet(c) => write!(f, "C{}({},{})", c, self.x, self.y),
            Layer::Interposer => write!(f, "I({},{})", self.x, self.y),
        }
    }
}

impl fmt::Display for RouterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Router ports. Horizontal ports stay within one mesh layer; `Down` leads
/// from a chiplet boundary router to the interposer, `Up` from an
/// interposer router to the chiplet boundary router above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Port {
    East,
    West,
    South,
    North,
    Local,
    Up,
    Down,
}

impl Port {
    pub const ALL: [Port; 7] = [
        Port::East,
        Port::West,
        Port::South,
        Port::North,
        Port::Local,
        Port::Up,
        Port::Down,
    ];

    pub const HORIZONTAL: [Port; 4] = [Port::East, Port::West, Port::South, Port::North];

    pub fn is_horizontal(&self) -> bool {
        matches!(self, Port::East | Port::West | Port::South | Port::North)
    }

    /// The input port on the receiving router when a flit leaves through
    /// `self` on the sending router.
    pub fn opposite(&self) -> Port {
        match self {
            Port::East => Port::West,
            Port::West => Port::East,
            Port::South => Port::North,
            Port::North => Port::South,
            Port::Up => Port::Down,
            Port::Down => Port::Up,
            Port::Local => Port::Local,
        }
    }
}

/// A bidirectional vertical link joining a chiplet boundary router to the
/// interposer router directly beneath it. It carries one Down channel
/// (chiplet to interposer) and one Up channel (interposer to chiplet).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerticalLink {
    /// Owning chiplet.
    pub chiplet: ChipletId,
    /// Id unique within the owning chiplet (dense, starting at 0).
    pub local_id: usize,
    /// The boundary router on the chiplet side.
    pub chiplet_router: RouterId,
    /// The interposer router at the same global footprint position.
    pub interposer_router: RouterId,
}

/// Placement and size of one chiplet on the interposer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChipletDims {
    pub width: u16,
    pub height: u16,
    /// Global interposer coordinate of the chiplet's (0, 0) router.
    pub origin: (u16, u16),
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("system has no chiplets")]
    NoChiplets,
    #[error("chiplet {0} has zero area")]
    EmptyChiplet(ChipletId),
    #[error("chiplet {0} footprint extends past the interposer bounds")]
    FootprintOutOfBounds(ChipletId),
    #[error("chiplets {0} and {1} have overlapping footprints")]
    FootprintOverlap(ChipletId, ChipletId),
    #[error("chiplet {0} has no vertical links")]
    NoVerticalLinks(ChipletId),
    #[error("vertical link references non-existent chiplet {0}")]
    VlBadChiplet(ChipletId),
    #[error("vertical link at ({x},{y}) lies outside chiplet {chiplet}")]
    VlOutOfBounds { chiplet: ChipletId, x: u16, y: u16 },
    #[error("duplicate vertical link on chiplet {chiplet} router ({x},{y})")]
    DuplicateVl { chiplet: ChipletId, x: u16, y: u16 },
    #[error("interposer source ({x},{y}) lies outside the interposer mesh")]
    SourceOutOfBounds { x: u16, y: u16 },
    #[error("routers {0} and {1} are not on the same mesh layer")]
    CrossLayer(RouterId, RouterId),
}

// --- configuration schema ---------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TopologyConfig {
    pub chiplets: Vec<ChipletConfig>,
    pub interposer: InterposerConfig,
    pub vls: Vec<VlConfig>,
    #[serde(default)]
    pub sources: SourcesConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChipletConfig {
    pub width: u16,
    pub height: u16,
    pub origin_x: u16,
    pub origin_y: u16,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InterposerConfig {
    pub width: u16,
    pub height: u16,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VlConfig {
    pub chiplet: ChipletId,
    pub local_x: u16,
    pub local_y: u16,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct SourcesConfig {
    /// Interposer routers that host local traffic endpoints (e.g. DRAM).
    #[serde(default)]
    pub interposer: Vec<SourceConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SourceConfig {
    pub x: u16,
    pub y: u16,
}

// --- topology ----------------------------------------------------------------

/// A validated 2.5D system. Immutable after construction; safe to share
/// read-only across concurrent simulation runs.
#[derive(Debug, Clone)]
pub struct Topology {
    chiplets: Vec<ChipletDims>,
    interposer: (u16, u16),
    vls: Vec<VerticalLink>,
    interposer_sources: Vec<RouterId>,
    vls_by_chiplet: Vec<Vec<VlId>>,
    vl_at_chiplet_router: HashMap<RouterId, VlId>,
    vl_at_interposer_router: HashMap<RouterId, VlId>,
    /// Prefix sums of chiplet router counts, for global router numbering.
    chiplet_router_base: Vec<usize>,
}

impl Topology {
    /// Build and validate a topology from its configuration document.
    pub fn from_config(cfg: &TopologyConfig) -> Result<Self, TopologyError> {
        if cfg.chiplets.is_empty() {
            return Err(TopologyError::NoChiplets);
        }
        let interposer = (cfg.interposer.width, cfg.interposer.height);
        let mut chiplets = Vec::with_capacity(cfg.chiplets.len());
        for (c, ch) in cfg.chiplets.iter().enumerate() {
            if ch.width == 0 || ch.height == 0 {
                return Err(TopologyError::EmptyChiplet(c));
            }
            if ch.origin_x + ch.width > interposer.0 || ch.origin_y + ch.height > interposer.1 {
                return Err(TopologyError::FootprintOutOfBounds(c));
            }
            chiplets.push(ChipletDims {
                width: ch.width,
                height: ch.height,
                origin: (ch.origin_x, ch.origin_y),
            });
        }
        for a in 0..chiplets.len() {
            for b in a + 1..chiplets.len() {
                let (ca, cb) = (&chiplets[a], &chiplets[b]);
                let disjoint_x =
                    ca.origin.0 + ca.width <= cb.origin.0 || cb.origin.0 + cb.width <= ca.origin.0;
                let disjoint_y = ca.origin.1 + ca.height <= cb.origin.1
                    || cb.origin.1 + cb.height <= ca.origin.1;
                if !disjoint_x && !disjoint_y {
                    return Err(TopologyError::FootprintOverlap(a, b));
                }
            }
        }

        let mut vls = Vec::with_capacity(cfg.vls.len());
        let mut vls_by_chiplet = vec![Vec::new(); chiplets.len()];
        let mut vl_at_chiplet_router = HashMap::new();
        let mut vl_at_interposer_router = HashMap::new();
        for vl_cfg in &cfg.vls {
            let c = vl_cfg.chiplet;
            let dims = chiplets.get(c).ok_or(TopologyError::VlBadChiplet(c))?;
            if vl_cfg.local_x >= dims.width || vl_cfg.local_y >= dims.height {
                return Err(TopologyError::VlOutOfBounds {
                    chiplet: c,
                    x: vl_cfg.local_x,
                    y: vl_cfg.local_y,
                });
            }
            let chiplet_router = RouterId::chiplet(c, vl_cfg.local_x, vl_cfg.local_y);
            let interposer_router = RouterId::interposer(
                dims.origin.0 + vl_cfg.local_x,
                dims.origin.1 + vl_cfg.local_y,
            );
            let vl_id = vls.len();
            if vl_at_chiplet_router.insert(chiplet_router, vl_id).is_some() {
                return Err(TopologyError::DuplicateVl {
                    chiplet: c,
                    x: vl_cfg.local_x,
                    y: vl_cfg.local_y,
                });
            }
            vl_at_interposer_router.insert(interposer_router, vl_id);
            vls.push(VerticalLink {
                chiplet: c,
                local_id: vls_by_chiplet[c].len(),
                chiplet_router,
                interposer_router,
            });
            vls_by_chiplet[c].push(vl_id);
        }
        for (c, list) in vls_by_chiplet.iter().enumerate() {
            if list.is_empty() {
                return Err(TopologyError::NoVerticalLinks(c));
            }
        }

        let mut interposer_sources = Vec::new();
        for s in &cfg.sources.interposer {
            if s.x >= interposer.0 || s.y >= interposer.1 {
                return Err(TopologyError::SourceOutOfBounds { x: s.x, y: s.y });
            }
            interposer_sources.push(RouterId::interposer(s.x, s.y));
        }
        interposer_sources.sort();
        interposer_sources.dedup();

        let mut chiplet_router_base = Vec::with_capacity(chiplets.len() + 1);
        let mut base = 0usize;
        for dims in &chiplets {
            chiplet_router_base.push(base);
            base += dims.width as usize * dims.height as usize;
        }
        chiplet_router_base.push(base);

        Ok(Self {
            chiplets,
            interposer,
            vls,
            interposer_sources,
            vls_by_chiplet,
            vl_at_chiplet_router,
            vl_at_interposer_router,
            chiplet_router_base,
        })
    }

    /// Parse a TOML configuration document and build the topology.
    pub fn load_str(text: &str) -> Result<Self, TopologyError> {
        let cfg: TopologyConfig = toml::from_str(text)?;
        Self::from_config(&cfg)
    }

    pub fn load_path(path: &Path) -> Result<Self, TopologyError> {
        let text = std::fs::read_to_string(path).map_err(|source| TopologyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::load_str(&text)
    }

    /// The configuration document this topology round-trips through.
    pub fn to_config(&self) -> TopologyConfig {
        TopologyConfig {
            chiplets: self
                .chiplets
                .iter()
                .map(|c| ChipletConfig {
                    width: c.width,
                    height: c.height,
                    origin_x: c.origin.0,
                    origin_y: c.origin.1,
                })
                .collect(),
            interposer: InterposerConfig {
                width: self.interposer.0,
                height: self.interposer.1,
            },
            vls: self
                .vls
                .iter()
                .map(|vl| VlConfig {
                    chiplet: vl.chiplet,
                    local_x: vl.chiplet_router.x,
                    local_y: vl.chiplet_router.y,
                })
                .collect(),
            sources: SourcesConfig {
                interposer: self
                    .interposer_sources
                    .iter()
                    .map(|r| SourceConfig { x: r.x, y: r.y })
                    .collect(),
            },
        }
    }

    /// Deterministic serialization of the configuration (field order fixed,
    /// arrays in id order).
    pub fn to_config_string(&self) -> String {
        toml::to_string(&self.to_config()).expect("topology config serializes")
    }

    // --- accessors ---

    pub fn chiplet_count(&self) -> usize {
        self.chiplets.len()
    }

    pub fn chiplet(&self, c: ChipletId) -> &ChipletDims {
        &self.chiplets[c]
    }

    pub fn interposer_dims(&self) -> (u16, u16) {
        self.interposer
    }

    pub fn vls(&self) -> &[VerticalLink] {
        &self.vls
    }

    pub fn vl(&self, id: VlId) -> &VerticalLink {
        &self.vls[id]
    }

    /// Vertical links of one chiplet, in ascending local id order.
    pub fn chiplet_vls(&self, c: ChipletId) -> &[VlId] {
        &self.vls_by_chiplet[c]
    }

    /// Global id of a chiplet's vertical link by local id.
    pub fn vl_global(&self, c: ChipletId, local_id: usize) -> VlId {
        self.vls_by_chiplet[c][local_id]
    }

    pub fn interposer_sources(&self) -> &[RouterId] {
        &self.interposer_sources
    }

    /// The vertical link attached to a router: its own link for a chiplet
    /// boundary router, the link above it for an interposer router under
    /// one, and nothing otherwise.
    pub fn vl_under(&self, r: RouterId) -> Option<&VerticalLink> {
        self.vl_id_under(r).map(|id| &self.vls[id])
    }

    pub fn vl_id_under(&self, r: RouterId) -> Option<VlId> {
        match r.layer {
            Layer::Chiplet(_) => self.vl_at_chiplet_router.get(&r).copied(),
            Layer::Interposer => self.vl_at_interposer_router.get(&r).copied(),
        }
    }

    /// Whether `r` is a chiplet boundary router (a chiplet router with a VL).
    pub fn is_boundary(&self, r: RouterId) -> bool {
        !r.is_interposer() && self.vl_at_chiplet_router.contains_key(&r)
    }

    pub fn contains(&self, r: RouterId) -> bool {
        match r.layer {
            Layer::Chiplet(c) => match self.chiplets.get(c) {
                Some(dims) => r.x < dims.width && r.y < dims.height,
                None => false,
            },
            Layer::Interposer => r.x < self.interposer.0 && r.y < self.interposer.1,
        }
    }

    /// Global footprint position of a router on the interposer grid.
    pub fn global_pos(&self, r: RouterId) -> (u16, u16) {
        match r.layer {
            Layer::Chiplet(c) => {
                let o = self.chiplets[c].origin;
                (o.0 + r.x, o.1 + r.y)
            }
            Layer::Interposer => (r.x, r.y),
        }
    }

    /// Manhattan hop count between two routers on the same mesh layer.
    pub fn hop_distance(&self, a: RouterId, b: RouterId) -> Result<u32, TopologyError> {
        if a.layer != b.layer {
            return Err(TopologyError::CrossLayer(a, b));
        }
        Ok(u32::from(a.x.abs_diff(b.x)) + u32::from(a.y.abs_diff(b.y)))
    }

    /// The neighbor reached through `port`, if that port is wired.
    pub fn neighbor(&self, r: RouterId, port: Port) -> Option<RouterId> {
        let (w, h) = match r.layer {
            Layer::Chiplet(c) => {
                let dims = &self.chiplets[c];
                (dims.width, dims.height)
            }
            Layer::Interposer => self.interposer,
        };
        match port {
            Port::East => (r.x + 1 < w).then(|| RouterId { x: r.x + 1, ..r }),
            Port::West => (r.x > 0).then(|| RouterId { x: r.x - 1, ..r }),
            Port::South => (r.y + 1 < h).then(|| RouterId { y: r.y + 1, ..r }),
            Port::North => (r.y > 0).then(|| RouterId { y: r.y - 1, ..r }),
            Port::Down => match r.layer {
                Layer::Chiplet(_) => self.vl_under(r).map(|vl| vl.interposer_router),
                Layer::Interposer => None,
            },
            Port::Up => match r.layer {
                Layer::Interposer => self.vl_under(r).map(|vl| vl.chiplet_router),
                Layer::Chiplet(_) => None,
            },
            Port::Local => None,
        }
    }

    // --- global router numbering: chiplets first (row-major), then the
    // interposer (row-major). Used by trace files and reports. ---

    pub fn router_count(&self) -> usize {
        self.chiplet_router_base[self.chiplets.len()]
            + self.interposer.0 as usize * self.interposer.1 as usize
    }

    pub fn router_index(&self, r: RouterId) -> usize {
        match r.layer {
            Layer::Chiplet(c) => {
                let dims = &self.chiplets[c];
                self.chiplet_router_base[c] + r.y as usize * dims.width as usize + r.x as usize
            }
            Layer::Interposer => {
                self.chiplet_router_base[self.chiplets.len()]
                    + r.y as usize * self.interposer.0 as usize
                    + r.x as usize
            }
        }
    }

    pub fn router_at(&self, idx: usize) -> Option<RouterId> {
        let chiplet_total = self.chiplet_router_base[self.chiplets.len()];
        if idx < chiplet_total {
            let c = self
                .chiplet_router_base
                .partition_point(|&base| base <= idx)
                - 1;
            let off = idx - self.chiplet_router_base[c];
            let w = self.chiplets[c].width as usize;
            Some(RouterId::chiplet(c, (off % w) as u16, (off / w) as u16))
        } else {
            let off = idx - chiplet_total;
            let w = self.interposer.0 as usize;
            if off < w * self.interposer.1 as usize {
                Some(RouterId::interposer((off % w) as u16, (off / w) as u16))
            } else {
                None
            }
        }
    }

    /// All routers, in global numbering order.
    pub fn routers(&self) -> impl Iterator<Item = RouterId> + '_ {
        (0..self.router_count()).map(|i| self.router_at(i).unwrap())
    }

    pub fn chiplet_routers(&self, c: ChipletId) -> impl Iterator<Item = RouterId> + '_ {
        let dims = self.chiplets[c];
        (0..dims.height).flat_map(move |y| (0..dims.width).map(move |x| RouterId::chiplet(c, x, y)))
    }

    /// Row-major index of a chiplet router within its own chiplet; used to
    /// index selection-set choice vectors.
    pub fn local_index(&self, r: RouterId) -> usize {
        let c = r.chiplet_id().expect("chiplet router");
        r.y as usize * self.chiplets[c].width as usize + r.x as usize
    }

    pub fn chiplet_router_count(&self, c: ChipletId) -> usize {
        self.chiplets[c].width as usize * self.chiplets[c].height as usize
    }

    /// Traffic endpoints: every chiplet router plus the configured
    /// interposer sources, in global numbering order.
    pub fn endpoints(&self) -> Vec<RouterId> {
        let mut out: Vec<RouterId> = (0..self.chiplet_count())
            .flat_map(|c| self.chiplet_routers(c).collect::<Vec<_>>())
            .collect();
        out.extend(self.interposer_sources.iter().copied());
        out
    }

    // --- presets ---

    /// Four 4x4 chiplets tiling an 8x8 interposer, four border VLs per
    /// chiplet.
    pub fn baseline4() -> Self {
        Self::from_config(&preset_config(2, 2)).expect("baseline4 preset is valid")
    }

    /// Six 4x4 chiplets tiling an 8x12 interposer (two columns, three
    /// rows), four border VLs per chiplet.
    pub fn six6() -> Self {
        Self::from_config(&preset_config(2, 3)).expect("six6 preset is valid")
    }
}

/// Default VL placement for a WxH chiplet: the midpoint of each border
/// edge, ordered North, East, South, West. A 1x1 chiplet gets a single VL.
pub fn default_vl_positions(width: u16, height: u16) -> Vec<(u16, u16)> {
    if width == 1 && height == 1 {
        return vec![(0, 0)];
    }
    let mut out = vec![
        ((width / 2).saturating_sub(1), 0),
        (width - 1, (height / 2).saturating_sub(1)),
        (width / 2, height - 1),
        (0, height / 2),
    ];
    out.dedup();
    out
}

fn preset_config(cols: u16, rows: u16) -> TopologyConfig {
    const W: u16 = 4;
    const H: u16 = 4;
    let mut chiplets = Vec::new();
    let mut vls = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let id = chiplets.len();
            chiplets.push(ChipletConfig {
                width: W,
                height: H,
                origin_x: c * W,
                origin_y: r * H,
            });
            for (x, y) in default_vl_positions(W, H) {
                vls.push(VlConfig {
                    chiplet: id,
                    local_x: x,
                    local_y: y,
                });
            }
        }
    }
    TopologyConfig {
        chiplets,
        interposer: InterposerConfig {
            width: cols * W,
            height: rows * H,
        },
        vls,
        sources: SourcesConfig::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_counts() {
        let t = Topology::baseline4();
        assert_eq!(t.chiplet_count(), 4);
        assert_eq!(t.vls().len(), 16);
        assert_eq!(t.router_count(), 64 + 64);
        assert_eq!(t.endpoints().len(), 64);
        for c in 0..4 {
            assert_eq!(t.chiplet_vls(c).len(), 4);
        }
    }

    #[test]
    fn baseline_vl_placement() {
        let t = Topology::baseline4();
        let positions: Vec<(u16, u16)> = t
            .chiplet_vls(0)
            .iter()
            .map(|&v| (t.vl(v).chiplet_router.x, t.vl(v).chiplet_router.y))
            .collect();
        assert_eq!(positions, vec![(1, 0), (3, 1), (2, 3), (0, 2)]);
    }

    #[test]
    fn minimal_single_router_system() {
        let cfg = TopologyConfig {
            chiplets: vec![ChipletConfig {
                width: 1,
                height: 1,
                origin_x: 0,
                origin_y: 0,
            }],
            interposer: InterposerConfig {
                width: 1,
                height: 1,
            },
            vls: vec![VlConfig {
                chiplet: 0,
                local_x: 0,
                local_y: 0,
            }],
            sources: SourcesConfig::default(),
        };
        let t = Topology::from_config(&cfg).unwrap();
        assert_eq!(t.router_count(), 2);
        assert!(t.is_boundary(RouterId::chiplet(0, 0, 0)));
    }

    #[test]
    fn overlapping_footprints_rejected() {
        let cfg = TopologyConfig {
            chiplets: vec![
                ChipletConfig {
                    width: 2,
                    height: 2,
                    origin_x: 0,
                    origin_y: 0,
                },
                ChipletConfig {
                    width: 2,
                    height: 2,
                    origin_x: 1,
                    origin_y: 1,
                },
            ],
            interposer: InterposerConfig {
                width: 4,
                height: 4,
            },
            vls: vec![
                VlConfig {
                    chiplet: 0,
                    local_x: 0,
                    local_y: 0,
                },
                VlConfig {
                    chiplet: 1,
                    local_x: 0,
                    local_y: 0,
                },
            ],
            sources: SourcesConfig::default(),
        };
        assert!(matches!(
            Topology::from_config(&cfg),
            Err(TopologyError::FootprintOverlap(0, 1))
        ));
    }

    #[test]
    fn zero_vl_chiplet_rejected() {
        let mut cfg = Topology::baseline4().to_config();
        cfg.vls.retain(|vl| vl.chiplet != 2);
        assert!(matches!(
            Topology::from_config(&cfg),
            Err(TopologyError::NoVerticalLinks(2))
        ));
    }

    #[test]
    fn duplicate_vl_rejected() {
        let mut cfg = Topology::baseline4().to_config();
        let first = cfg.vls[0].clone();
        cfg.vls.push(first);
        assert!(matches!(
            Topology::from_config(&cfg),
            Err(TopologyError::DuplicateVl { .. })
        ));
    }

    #[test]
    fn vl_outside_chiplet_rejected() {
        let mut cfg = Topology::baseline4().to_config();
        cfg.vls[0].local_x = 9;
        assert!(matches!(
            Topology::from_config(&cfg),
            Err(TopologyError::VlOutOfBounds { .. })
        ));
    }

    #[test]
    fn hop_distance_manhattan() {
        let t = Topology::baseline4();
        let a = RouterId::chiplet(0, 0, 0);
        let b = RouterId::chiplet(0, 3, 2);
        assert_eq!(t.hop_distance(a, b).unwrap(), 5);
        assert_eq!(t.hop_distance(a, a).unwrap(), 0);
        assert_eq!(
            t.hop_distance(RouterId::chiplet(0, 1, 3), RouterId::chiplet(0, 2, 3))
                .unwrap(),
            1
        );
        assert!(t
            .hop_distance(a, RouterId::interposer(0, 0))
            .is_err());
        assert!(t.hop_distance(a, RouterId::chiplet(1, 0, 0)).is_err());
    }

    #[test]
    fn vl_accessors() {
        let t = Topology::baseline4();
        let vl0 = t.vl(t.vl_global(0, 0));
        assert_eq!(vl0.chiplet_router, RouterId::chiplet(0, 1, 0));
        assert_eq!(t.vl_under(vl0.chiplet_router).unwrap().local_id, 0);
        assert!(t.vl_under(RouterId::chiplet(0, 1, 1)).is_none());
        // interposer router under chiplet 2's VL 3 resolves back to that VL
        let vl = t.vl(t.vl_global(2, 3));
        assert_eq!(
            t.vl_under(vl.interposer_router).unwrap(),
            t.vl(t.vl_global(2, 3))
        );
    }

    #[test]
    fn vl_footprints_align() {
        let t = Topology::six6();
        for vl in t.vls() {
            assert_eq!(
                t.global_pos(vl.chiplet_router),
                t.global_pos(vl.interposer_router)
            );
        }
    }

    #[test]
    fn port_availability_matches_vl_attachment() {
        let t = Topology::baseline4();
        for r in t.routers() {
            let down = t.neighbor(r, Port::Down).is_some();
            let up = t.neighbor(r, Port::Up).is_some();
            assert_eq!(down, t.is_boundary(r), "down port at {r}");
            assert_eq!(
                up,
                r.is_interposer() && t.vl_under(r).is_some(),
                "up port at {r}"
            );
            assert!(!(down && up));
        }
    }

    #[test]
    fn config_round_trip() {
        for t in [Topology::baseline4(), Topology::six6()] {
            let text = t.to_config_string();
            let back = Topology::load_str(&text).unwrap();
            assert_eq!(back.to_config(), t.to_config());
            assert_eq!(back.to_config_string(), text);
        }
    }

    #[test]
    fn router_numbering_round_trips() {
        let t = Topology::baseline4();
        for (i, r) in t.routers().enumerate() {
            assert_eq!(t.router_index(r), i);
            assert_eq!(t.router_at(i), Some(r));
        }
        assert_eq!(t.router_at(t.router_count()), None);
        // chiplets first, row-major
        assert_eq!(t.router_at(0), Some(RouterId::chiplet(0, 0, 0)));
        assert_eq!(t.router_at(1), Some(RouterId::chiplet(0, 1, 0)));
        assert_eq!(t.router_at(16), Some(RouterId::chiplet(1, 0, 0)));
        assert_eq!(t.router_at(64), Some(RouterId::interposer(0, 0)));
    }

    #[test]
    fn interposer_sources_are_endpoints() {
        let mut cfg = Topology::baseline4().to_config();
        cfg.sources.interposer.push(SourceConfig { x: 3, y: 3 });
        let t = Topology::from_config(&cfg).unwrap();
        assert_eq!(t.endpoints().len(), 65);
        assert!(t.endpoints().contains(&RouterId::interposer(3, 3)));
    }
}
