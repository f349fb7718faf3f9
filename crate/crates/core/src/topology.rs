//! k-ary fat-tree datacenter graphs.
//!
//! Nodes are stored in a fixed dense order: PMs first, then ToR, aggregation
//! and core switches, each grouped by pod. Model builders rely on this order
//! for reproducible variable indexing.

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("fat-tree arity must be a positive even integer, got {0}")]
    InvalidArity(usize),
    #[error("pms_per_rack must be at least 1")]
    EmptyRack,
    #[error("negative forwarding cost or bandwidth")]
    NegativeParameter,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("{0} and {1} are not adjacent")]
    NotAdjacent(NodeId, NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Pm,
    Tor,
    Aggregation,
    Core,
}

impl NodeKind {
    fn tag(self) -> &'static str {
        match self {
            NodeKind::Pm => "pm",
            NodeKind::Tor => "tor",
            NodeKind::Aggregation => "agg",
            NodeKind::Core => "core",
        }
    }
}

/// A node identified by its kind and a zero-based index within that kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub kind: NodeKind,
    pub index: usize,
}

impl NodeId {
    pub fn pm(index: usize) -> Self {
        NodeId { kind: NodeKind::Pm, index }
    }
    pub fn tor(index: usize) -> Self {
        NodeId { kind: NodeKind::Tor, index }
    }
    pub fn aggregation(index: usize) -> Self {
        NodeId { kind: NodeKind::Aggregation, index }
    }
    pub fn core(index: usize) -> Self {
        NodeId { kind: NodeKind::Core, index }
    }
}

impl fmt::Display for NodeId {
    /// PMs print one-based (`P1`, `P2`, ...) to match the usual datacenter
    /// drawings; switches print as `tor0`, `agg3`, `core1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NodeKind::Pm => write!(f, "P{}", self.index + 1),
            kind => write!(f, "{}{}", kind.tag(), self.index),
        }
    }
}

/// Per-bit-per-unit-time forwarding cost of each layer of links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerCosts {
    pub pm_tor: f64,
    pub tor_agg: f64,
    pub agg_core: f64,
}

impl Default for LayerCosts {
    fn default() -> Self {
        LayerCosts { pm_tor: 10.0, tor_agg: 20.0, agg_core: 40.0 }
    }
}

/// Construction parameters for [`build_fat_tree`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FatTreeSpec {
    pub k: usize,
    pub pms_per_rack: usize,
    pub costs: LayerCosts,
    /// Uniform link bandwidth; infinite means unconstrained.
    pub bandwidth: f64,
}

impl FatTreeSpec {
    pub fn new(k: usize) -> Self {
        FatTreeSpec { k, ..Default::default() }
    }

    pub fn build(&self) -> Result<Topology, TopologyError> {
        build_fat_tree(self.k, self.pms_per_rack, self.costs, self.bandwidth)
    }
}

impl Default for FatTreeSpec {
    fn default() -> Self {
        FatTreeSpec { k: 4, pms_per_rack: 2, costs: LayerCosts::default(), bandwidth: f64::INFINITY }
    }
}

/// A directed flow arc. `from == to` marks the zero-cost intra-PM arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
}

impl Arc {
    pub fn is_local(&self) -> bool {
        self.from == self.to
    }
}

#[derive(Debug, Clone)]
struct Node {
    id: NodeId,
    pod: Option<usize>,
}

/// Immutable fat-tree graph.
#[derive(Debug, Clone)]
pub struct Topology {
    k: usize,
    pms_per_rack: usize,
    costs: LayerCosts,
    bandwidth: f64,
    nodes: Vec<Node>,
    adjacency: Vec<Vec<usize>>,
    offsets: [usize; 4],
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<usize>>,
    in_arcs: Vec<Vec<usize>>,
}

/// Builds a three-layer k-ary fat-tree.
///
/// Pod `p` holds ToRs `p*k/2 .. (p+1)*k/2` and the same range of aggregation
/// switches. Every ToR links to all aggregation switches of its pod, and
/// aggregation switch `a` (position `a mod k/2` in its pod) links to cores
/// `(a mod k/2)*k/2 .. (a mod k/2 + 1)*k/2`, so each core reaches exactly one
/// aggregation switch per pod.
pub fn build_fat_tree(
    k: usize,
    pms_per_rack: usize,
    costs: LayerCosts,
    bandwidth: f64,
) -> Result<Topology, TopologyError> {
    if k == 0 || !k.is_multiple_of(2) {
        return Err(TopologyError::InvalidArity(k));
    }
    if pms_per_rack == 0 {
        return Err(TopologyError::EmptyRack);
    }
    if costs.pm_tor < 0.0 || costs.tor_agg < 0.0 || costs.agg_core < 0.0 || bandwidth < 0.0 {
        return Err(TopologyError::NegativeParameter);
    }
    let half = k / 2;
    let n_tor = k * half;
    let n_agg = k * half;
    let n_core = half * half;
    let n_pm = n_tor * pms_per_rack;
    let offsets = [0, n_pm, n_pm + n_tor, n_pm + n_tor + n_agg];
    let total = offsets[3] + n_core;

    let mut nodes = Vec::with_capacity(total);
    for i in 0..n_pm {
        nodes.push(Node { id: NodeId::pm(i), pod: Some(i / pms_per_rack / half) });
    }
    for i in 0..n_tor {
        nodes.push(Node { id: NodeId::tor(i), pod: Some(i / half) });
    }
    for i in 0..n_agg {
        nodes.push(Node { id: NodeId::aggregation(i), pod: Some(i / half) });
    }
    for i in 0..n_core {
        nodes.push(Node { id: NodeId::core(i), pod: None });
    }

    let mut adjacency = vec![Vec::new(); total];
    let mut link = |a: usize, b: usize| {
        adjacency[a].push(b);
        adjacency[b].push(a);
    };
    for pm in 0..n_pm {
        link(offsets[0] + pm, offsets[1] + pm / pms_per_rack);
    }
    for tor in 0..n_tor {
        let pod = tor / half;
        for a in 0..half {
            link(offsets[1] + tor, offsets[2] + pod * half + a);
        }
    }
    for agg in 0..n_agg {
        let pos = agg % half;
        for c in 0..half {
            link(offsets[2] + agg, offsets[3] + pos * half + c);
        }
    }
    for adj in adjacency.iter_mut() {
        adj.sort_unstable();
    }

    let mut arcs = Vec::new();
    for (from, adj) in adjacency.iter().enumerate() {
        for &to in adj {
            arcs.push(Arc { from, to });
        }
    }
    for pm in 0..n_pm {
        arcs.push(Arc { from: pm, to: pm });
    }
    let mut out_arcs = vec![Vec::new(); total];
    let mut in_arcs = vec![Vec::new(); total];
    for (a, arc) in arcs.iter().enumerate() {
        out_arcs[arc.from].push(a);
        in_arcs[arc.to].push(a);
    }

    Ok(Topology { k, pms_per_rack, costs, bandwidth, nodes, adjacency, offsets, arcs, out_arcs, in_arcs })
}

impl Topology {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pms_per_rack(&self) -> usize {
        self.pms_per_rack
    }

    pub fn costs(&self) -> LayerCosts {
        self.costs
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn pm_count(&self) -> usize {
        self.offsets[1]
    }

    pub fn switch_count(&self) -> usize {
        self.nodes.len() - self.pm_count()
    }

    /// Number of undirected links.
    pub fn link_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Dense index of a node, or an error if it does not exist.
    pub fn index_of(&self, id: NodeId) -> Result<usize, TopologyError> {
        let (base, count) = match id.kind {
            NodeKind::Pm => (self.offsets[0], self.offsets[1]),
            NodeKind::Tor => (self.offsets[1], self.offsets[2] - self.offsets[1]),
            NodeKind::Aggregation => (self.offsets[2], self.offsets[3] - self.offsets[2]),
            NodeKind::Core => (self.offsets[3], self.nodes.len() - self.offsets[3]),
        };
        if id.index < count {
            Ok(base + id.index)
        } else {
            Err(TopologyError::UnknownNode(id))
        }
    }

    pub fn node(&self, index: usize) -> NodeId {
        self.nodes[index].id
    }

    pub fn pod(&self, index: usize) -> Option<usize> {
        self.nodes[index].pod
    }

    pub fn is_pm(&self, index: usize) -> bool {
        index < self.offsets[1]
    }

    pub fn is_switch(&self, index: usize) -> bool {
        !self.is_pm(index)
    }

    /// Dense indices of all PMs; PM `i` has dense index `i`.
    pub fn pms(&self) -> std::ops::Range<usize> {
        0..self.offsets[1]
    }

    pub fn switches(&self) -> std::ops::Range<usize> {
        self.offsets[1]..self.nodes.len()
    }

    /// The ToR switch a PM hangs off.
    pub fn rack_of(&self, pm: usize) -> usize {
        pm / self.pms_per_rack
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Neighbors of `id` in dense order.
    pub fn neighbors(&self, id: NodeId) -> Result<Vec<NodeId>, TopologyError> {
        let i = self.index_of(id)?;
        Ok(self.adjacency[i].iter().map(|&j| self.nodes[j].id).collect())
    }

    pub fn neighbor_indices(&self, index: usize) -> &[usize] {
        &self.adjacency[index]
    }

    /// Forwarding cost of one bit per unit time between adjacent nodes.
    /// A PM talking to itself costs nothing.
    pub fn forwarding_cost(&self, i: NodeId, j: NodeId) -> Result<f64, TopologyError> {
        let a = self.index_of(i)?;
        let b = self.index_of(j)?;
        self.cost_between(a, b).ok_or(TopologyError::NotAdjacent(i, j))
    }

    pub(crate) fn cost_between(&self, a: usize, b: usize) -> Option<f64> {
        if a == b {
            return self.is_pm(a).then_some(0.0);
        }
        if !self.adjacent(a, b) {
            return None;
        }
        let (lo, hi) = if self.nodes[a].id.kind <= self.nodes[b].id.kind {
            (self.nodes[a].id.kind, self.nodes[b].id.kind)
        } else {
            (self.nodes[b].id.kind, self.nodes[a].id.kind)
        };
        match (lo, hi) {
            (NodeKind::Pm, NodeKind::Tor) => Some(self.costs.pm_tor),
            (NodeKind::Tor, NodeKind::Aggregation) => Some(self.costs.tor_agg),
            (NodeKind::Aggregation, NodeKind::Core) => Some(self.costs.agg_core),
            _ => None,
        }
    }

    /// All flow arcs: both directions of every link in dense order of the
    /// tail node, followed by one local arc per PM.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc_cost(&self, arc: usize) -> f64 {
        let a = self.arcs[arc];
        self.cost_between(a.from, a.to).expect("arc endpoints are adjacent")
    }

    pub fn out_arcs(&self, node: usize) -> &[usize] {
        &self.out_arcs[node]
    }

    pub fn in_arcs(&self, node: usize) -> &[usize] {
        &self.in_arcs[node]
    }

    pub fn arc_index(&self, from: usize, to: usize) -> Option<usize> {
        self.out_arcs[from].iter().copied().find(|&a| self.arcs[a].to == to)
    }

    /// Plain-text listing, one node per line: `kind index pod neighbors`.
    /// Core switches have pod `-`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# fat-tree k={} pms_per_rack={} costs={}/{}/{} bandwidth={}",
            self.k, self.pms_per_rack, self.costs.pm_tor, self.costs.tor_agg, self.costs.agg_core, self.bandwidth
        );
        for (i, node) in self.nodes.iter().enumerate() {
            let pod = node.pod.map_or_else(|| "-".to_string(), |p| p.to_string());
            let neighbors: Vec<String> = self.adjacency[i].iter().map(|&j| self.nodes[j].id.to_string()).collect();
            let _ = writeln!(out, "{} {} {} {}", node.id.kind.tag(), node.id.index, pod, neighbors.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(k: usize) -> Topology {
        build_fat_tree(k, 2, LayerCosts::default(), f64::INFINITY).unwrap()
    }

    #[test]
    fn counts_for_small_trees() {
        let t = tree(2);
        assert_eq!((t.switch_count(), t.pm_count()), (5, 4));
        let t = tree(4);
        assert_eq!((t.switch_count(), t.pm_count()), (20, 16));
        let t = tree(8);
        assert_eq!((t.switch_count(), t.pm_count()), (80, 64));
    }

    #[test]
    fn rejects_bad_arity() {
        assert_eq!(build_fat_tree(3, 2, LayerCosts::default(), 1.0).unwrap_err(), TopologyError::InvalidArity(3));
        assert_eq!(build_fat_tree(0, 2, LayerCosts::default(), 1.0).unwrap_err(), TopologyError::InvalidArity(0));
        assert_eq!(build_fat_tree(4, 0, LayerCosts::default(), 1.0).unwrap_err(), TopologyError::EmptyRack);
    }

    #[test]
    fn layer_costs() {
        let t = tree(4);
        assert_eq!(t.forwarding_cost(NodeId::pm(0), NodeId::tor(0)).unwrap(), 10.0);
        assert_eq!(t.forwarding_cost(NodeId::pm(0), NodeId::pm(0)).unwrap(), 0.0);
        assert_eq!(t.forwarding_cost(NodeId::tor(0), NodeId::aggregation(1)).unwrap(), 20.0);
        assert_eq!(t.forwarding_cost(NodeId::aggregation(1), NodeId::core(2)).unwrap(), 40.0);
        assert!(matches!(
            t.forwarding_cost(NodeId::pm(0), NodeId::pm(1)),
            Err(TopologyError::NotAdjacent(_, _))
        ));
        assert!(t.forwarding_cost(NodeId::tor(0), NodeId::tor(0)).is_err());
    }

    #[test]
    fn neighbor_sets() {
        let t = tree(2);
        assert_eq!(t.neighbors(NodeId::pm(1)).unwrap(), vec![NodeId::tor(0)]);

        let t = tree(4);
        let tor = t.neighbors(NodeId::tor(1)).unwrap();
        assert_eq!(
            tor,
            vec![NodeId::pm(2), NodeId::pm(3), NodeId::aggregation(0), NodeId::aggregation(1)]
        );
        for c in 0..4 {
            let core = t.neighbors(NodeId::core(c)).unwrap();
            assert_eq!(core.len(), 4);
            let pods: Vec<_> = core
                .iter()
                .map(|n| {
                    assert_eq!(n.kind, NodeKind::Aggregation);
                    t.pod(t.index_of(*n).unwrap()).unwrap()
                })
                .collect();
            assert_eq!(pods, vec![0, 1, 2, 3]);
        }
        assert!(t.neighbors(NodeId::core(4)).is_err());
    }

    #[test]
    fn pm_layout_matches_racks_and_pods() {
        let t = tree(4);
        // P1,P2 share rack 0; P5 is the first PM of pod 1.
        assert_eq!(t.rack_of(0), t.rack_of(1));
        assert_ne!(t.rack_of(1), t.rack_of(2));
        assert_eq!(t.pod(4), Some(1));
        assert_eq!(t.pod(3), Some(0));
    }

    #[test]
    fn arcs_cover_links_twice_plus_local() {
        let t = tree(2);
        assert_eq!(t.link_count(), 8);
        assert_eq!(t.arcs().len(), 2 * 8 + 4);
        let t = tree(4);
        assert_eq!(t.arcs().len(), 2 * 48 + 16);
        for (i, arc) in t.arcs().iter().enumerate() {
            assert!(t.out_arcs(arc.from).contains(&i));
            assert!(t.in_arcs(arc.to).contains(&i));
        }
    }

    #[test]
    fn cost_is_symmetric() {
        let t = tree(8);
        for arc in t.arcs() {
            assert_eq!(t.cost_between(arc.from, arc.to), t.cost_between(arc.to, arc.from));
        }
    }

    #[test]
    fn text_listing() {
        let t = tree(2);
        let text = t.to_text();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 9);
        assert_eq!(lines[1], "pm 0 0 tor0");
        assert_eq!(lines[9], "core 0 - agg0,agg1");
    }
}
