//! Relaxed overload/underload scaling models and their decoding into
//! launch/keep/terminate actions.
//!
//! Shares are indexed by `(PM p, instance d)` throughout. An instance is one
//! slot of the scaled group: either an online VM pinned to its host or a
//! relocatable instance whose host is chosen through its interest column
//! `e[., d]`. All interest columns of a relocatable instance share one value
//! `alpha[p, d]` for every candidate `p`, which is the instance's share of the
//! ingress traffic.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::chain_state::{ResourceVec, StateError, VnfGroup};
use crate::lp::{self, LpError, LpModel, LpSolution, LpStatus, Relation};
use crate::topology::{Topology, TopologyError};

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("{0}")]
    Invalid(String),
    #[error("PM index {0} is outside the topology")]
    UnknownPm(usize),
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("{needed} new instances requested but candidate PMs can host only {slots}")]
    CapacityShortfall { needed: usize, slots: usize },
    #[error("offline pool holds {available} VMs, {needed} needed")]
    PoolExhausted { needed: usize, available: usize },
    #[error("phi * omega * T = {load} is not below VM capacity {capacity} for resource {resource}")]
    PhiTooLarge { resource: String, load: f64, capacity: f64 },
    #[error("LP finished with status {0:?}")]
    NotOptimal(LpStatus),
    #[error("instance {0} has an all-zero interest column")]
    Degenerate(usize),
    #[error("flow on {0}->{1}, which is not a link")]
    NotALink(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalingMode {
    Overload,
    Underload,
}

impl fmt::Display for ScalingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalingMode::Overload => "overload",
            ScalingMode::Underload => "underload",
        })
    }
}

/// Deployment penalties: `activation` is charged per offline VM brought
/// online, `retention` is credited per online VM kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalties {
    pub activation: f64,
    pub retention: f64,
}

impl Penalties {
    /// Keeping online VMs is worth far more than launching new ones.
    pub fn overload() -> Self {
        Penalties { activation: 10.0, retention: 1e4 }
    }

    /// Launching is prohibitive and every kept VM costs.
    pub fn underload() -> Self {
        Penalties { activation: 1e6, retention: -1e4 }
    }

    pub fn for_mode(mode: ScalingMode) -> Self {
        match mode {
            ScalingMode::Overload => Self::overload(),
            ScalingMode::Underload => Self::underload(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub deployment: f64,
    pub forwarding: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { deployment: 1.0, forwarding: 1.0 }
    }
}

pub const DEFAULT_EPSILON: f64 = 0.01;

/// Everything one scaling solve needs.
#[derive(Debug, Clone)]
pub struct ScalingProblem {
    pub topology: Topology,
    pub group: VnfGroup,
    /// Total ingress traffic T.
    pub traffic: f64,
    pub v_star: usize,
    pub mode: ScalingMode,
    /// Maximum share per instance, already resolved to a number.
    pub phi: f64,
    pub epsilon: f64,
    pub penalties: Penalties,
    pub weights: Weights,
    /// Currently unused resources per PM, indexed by PM.
    pub pm_free: Vec<ResourceVec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Online VM that stays on its host.
    Pinned(usize),
    /// Online VM whose host is re-chosen among the candidates.
    Relocatable,
    /// Offline VM to be launched on one of the candidates.
    New,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub vm: u32,
    pub role: Role,
    /// PMs allowed to receive this instance's traffic, ascending.
    pub candidates: Vec<usize>,
}

impl ScalingProblem {
    pub fn new(topology: Topology, group: VnfGroup, traffic: f64, v_star: usize, mode: ScalingMode) -> Self {
        let phi = group.phi;
        let pm_free = vec![ResourceVec::new(); topology.pm_count()];
        ScalingProblem {
            topology,
            group,
            traffic,
            v_star,
            mode,
            phi,
            epsilon: DEFAULT_EPSILON,
            penalties: Penalties::for_mode(mode),
            weights: Weights::default(),
            pm_free,
        }
    }

    /// Psi: PMs hosting online VMs.
    pub fn host_set(&self) -> Vec<usize> {
        self.group.host_set()
    }

    /// Psi*: the configured candidates, or every PM with room for one VM.
    pub fn candidate_set(&self) -> Vec<usize> {
        if !self.group.candidate_pms.is_empty() {
            let mut c = self.group.candidate_pms.clone();
            c.sort_unstable();
            c.dedup();
            return c;
        }
        self.topology.pms().filter(|&p| self.free_slots(p) >= 1).collect()
    }

    fn vm_demand(&self) -> ResourceVec {
        let mut out = ResourceVec::new();
        for r in self.group.omega.keys() {
            if let Some(u) = self.group.vm_capacity(r) {
                out.insert(r.clone(), u);
            }
        }
        out
    }

    /// Resources this group may use on `pm`: free space, plus the space of
    /// its own online VMs when those are being re-placed.
    pub fn available(&self, pm: usize, reclaim_online: bool) -> ResourceVec {
        let mut avail = self.pm_free.get(pm).cloned().unwrap_or_default();
        if reclaim_online {
            for vm in self.group.online.iter().filter(|vm| vm.host_pm() == Some(pm)) {
                for (r, u) in &vm.capacity {
                    *avail.entry(r.clone()).or_insert(0.0) += u;
                }
            }
        }
        avail
    }

    /// Whole VMs of this group that fit in the free space of `pm`.
    pub fn free_slots(&self, pm: usize) -> usize {
        slots_in(&self.available(pm, false), &self.vm_demand())
    }

    /// The instance slots of the relaxed model for this problem's mode.
    pub fn instances(&self) -> Result<Vec<Instance>, ScalingError> {
        let online = &self.group.online;
        match self.mode {
            ScalingMode::Overload => {
                let mut out: Vec<Instance> = online
                    .iter()
                    .map(|vm| {
                        let host = vm.host_pm().ok_or_else(|| ScalingError::Invalid(format!("online VM {} has no host", vm.id)))?;
                        Ok(Instance { vm: vm.id, role: Role::Pinned(host), candidates: vec![host] })
                    })
                    .collect::<Result<_, ScalingError>>()?;
                let extra = self.v_star - online.len();
                if extra > self.group.offline_pool.len() {
                    return Err(ScalingError::PoolExhausted { needed: extra, available: self.group.offline_pool.len() });
                }
                if extra > 0 {
                    let mut cands = self.host_set();
                    cands.extend(self.candidate_set());
                    cands.sort_unstable();
                    cands.dedup();
                    for vm in &self.group.offline_pool[..extra] {
                        out.push(Instance { vm: vm.id, role: Role::New, candidates: cands.clone() });
                    }
                }
                Ok(out)
            }
            ScalingMode::Underload => {
                let hosts = self.host_set();
                Ok(online[..self.v_star]
                    .iter()
                    .map(|vm| Instance { vm: vm.id, role: Role::Relocatable, candidates: hosts.clone() })
                    .collect())
            }
        }
    }

    pub fn validate(&self) -> Result<(), ScalingError> {
        let g = &self.group;
        if g.online.is_empty() {
            return Err(StateError::EmptyGroup.into());
        }
        if !(self.traffic >= 0.0) || !self.traffic.is_finite() {
            return Err(ScalingError::Invalid(format!("traffic must be a nonnegative number, got {}", self.traffic)));
        }
        if !(g.gamma > 0.0) {
            return Err(ScalingError::Invalid(format!("gamma must be positive, got {}", g.gamma)));
        }
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return Err(ScalingError::Invalid(format!("phi must lie in (0, 1], got {}", self.phi)));
        }
        if g.ingress_pms.is_empty() || g.egress_pms.is_empty() {
            return Err(ScalingError::Invalid("ingress and egress PM sets must be nonempty".into()));
        }
        let pm_count = self.topology.pm_count();
        let mentioned = g
            .ingress_pms
            .iter()
            .chain(&g.egress_pms)
            .chain(&g.candidate_pms)
            .copied()
            .chain(g.online.iter().filter_map(|vm| vm.host_pm()));
        for pm in mentioned {
            if pm >= pm_count {
                return Err(ScalingError::UnknownPm(pm));
            }
        }
        match self.mode {
            ScalingMode::Overload if self.v_star < g.online.len() => {
                return Err(ScalingError::Invalid(format!(
                    "overload needs v* >= |V| ({} < {})",
                    self.v_star,
                    g.online.len()
                )))
            }
            ScalingMode::Underload if self.v_star == 0 || self.v_star > g.online.len() => {
                return Err(ScalingError::Invalid(format!(
                    "underload needs 1 <= v* <= |V| (v* = {}, |V| = {})",
                    self.v_star,
                    g.online.len()
                )))
            }
            _ => {}
        }
        for (r, &omega) in &g.omega {
            let load = self.phi * omega * self.traffic;
            for vm in g.online.iter().chain(&g.offline_pool) {
                if let Some(&u) = vm.capacity.get(r) {
                    if load >= u {
                        return Err(ScalingError::PhiTooLarge { resource: r.clone(), load, capacity: u });
                    }
                }
            }
        }
        if self.mode == ScalingMode::Overload && self.v_star > g.online.len() {
            let needed = self.v_star - g.online.len();
            if needed > g.offline_pool.len() {
                return Err(ScalingError::PoolExhausted { needed, available: g.offline_pool.len() });
            }
            let cands = self.candidate_set();
            if cands.is_empty() {
                return Err(ScalingError::EmptyCandidates);
            }
            let demand = self.vm_demand();
            for &p in &g.candidate_pms {
                if slots_in(&self.available(p, false), &demand) == 0 {
                    return Err(ScalingError::Invalid(format!("candidate P{} lacks room for one VM", p + 1)));
                }
            }
            let mut all = self.host_set();
            all.extend(cands);
            all.sort_unstable();
            all.dedup();
            let slots: usize = all.iter().map(|&p| self.free_slots(p)).sum();
            if needed > slots {
                return Err(ScalingError::CapacityShortfall { needed, slots });
            }
        }
        Ok(())
    }

    /// Pre-event configuration: the same group at `traffic`, every online VM
    /// pinned, no new instances.
    pub fn baseline(&self, traffic: f64, phi: f64) -> ScalingProblem {
        let mut p = self.clone();
        p.traffic = traffic;
        p.phi = phi;
        p.mode = ScalingMode::Overload;
        p.v_star = self.group.online.len();
        p
    }
}

fn slots_in(avail: &ResourceVec, demand: &ResourceVec) -> usize {
    let mut slots = usize::MAX;
    for (r, &u) in demand {
        if u <= 0.0 {
            continue;
        }
        let a = avail.get(r).copied().unwrap_or(0.0);
        slots = slots.min(((a + 1e-9) / u).floor().max(0.0) as usize);
    }
    if slots == usize::MAX {
        0
    } else {
        slots
    }
}

// ---------------------------------------------------------------------------
// Flow block shared by the relaxed models, the MILP and the ADMM lift
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Commodity {
    /// Unprocessed traffic on its way to an instance.
    N,
    /// Traffic processed by an instance on its way to egress.
    M,
}

/// Variable indices of the per-arc, per-instance flows.
#[derive(Debug, Clone)]
pub struct FlowLayout {
    pub arc_count: usize,
    pub instance_count: usize,
    pub n_base: usize,
    pub m_base: usize,
}

impl FlowLayout {
    pub fn n(&self, d: usize, arc: usize) -> usize {
        self.n_base + d * self.arc_count + arc
    }

    pub fn m(&self, d: usize, arc: usize) -> usize {
        self.m_base + d * self.arc_count + arc
    }

    pub fn var_count(&self) -> usize {
        2 * self.arc_count * self.instance_count
    }
}

/// Row family labels, in the order rows are emitted.
pub mod family {
    pub const SWITCH_N: &str = "switch-n";
    pub const SWITCH_M: &str = "switch-m";
    pub const PM_PROCESSING: &str = "pm-processing";
    pub const INGRESS: &str = "ingress";
    pub const EGRESS: &str = "egress";
    pub const EQUAL_SHARE: &str = "equal-share";
    pub const INTEREST: &str = "interest";
    pub const ARRIVAL_NEW: &str = "arrival-new";
    pub const ARRIVAL_ONLINE: &str = "arrival-online";
    pub const CAPACITY: &str = "capacity";
}

/// Adds n/m variables for every arc and instance plus switch conservation,
/// PM processing and ingress/egress totals.
///
/// Unprocessed traffic may only leave PMs through ingress PMs and only enter
/// an instance's candidate PMs; processed traffic may only leave candidate
/// PMs and only enter egress PMs. The remaining PM arcs are fixed at zero.
pub(crate) fn add_flow_block(
    lp: &mut LpModel,
    topo: &Topology,
    instances: &[Instance],
    ingress: &[usize],
    egress: &[usize],
    gamma: f64,
    traffic: f64,
    forwarding_weight: f64,
) -> FlowLayout {
    let arcs = topo.arcs();
    let layout = FlowLayout { arc_count: arcs.len(), instance_count: instances.len(), n_base: lp.num_vars(), m_base: 0 };
    let is_ingress = |p: usize| ingress.contains(&p);
    let is_egress = |p: usize| egress.contains(&p);
    for (d, inst) in instances.iter().enumerate() {
        let cand = |p: usize| inst.candidates.binary_search(&p).is_ok();
        for (a, arc) in arcs.iter().enumerate() {
            let (from_pm, to_pm) = (topo.is_pm(arc.from), topo.is_pm(arc.to));
            let open = if arc.is_local() {
                is_ingress(arc.from) && cand(arc.from)
            } else if from_pm {
                is_ingress(arc.from)
            } else if to_pm {
                cand(arc.to)
            } else {
                true
            };
            let v = lp.add_var(format!("n[{}>{},{}]", topo.node(arc.from), topo.node(arc.to), d), 0.0, if open { f64::INFINITY } else { 0.0 });
            lp.add_cost(v, forwarding_weight * topo.arc_cost(a));
        }
    }
    let m_base = lp.num_vars();
    for (d, inst) in instances.iter().enumerate() {
        let cand = |p: usize| inst.candidates.binary_search(&p).is_ok();
        for (a, arc) in arcs.iter().enumerate() {
            let (from_pm, to_pm) = (topo.is_pm(arc.from), topo.is_pm(arc.to));
            let open = if arc.is_local() {
                is_egress(arc.from) && cand(arc.from)
            } else if from_pm {
                cand(arc.from)
            } else if to_pm {
                is_egress(arc.to)
            } else {
                true
            };
            let v = lp.add_var(format!("m[{}>{},{}]", topo.node(arc.from), topo.node(arc.to), d), 0.0, if open { f64::INFINITY } else { 0.0 });
            lp.add_cost(v, forwarding_weight * topo.arc_cost(a));
        }
    }
    let layout = FlowLayout { m_base, ..layout };

    for (fam, base) in [(family::SWITCH_N, layout.n_base), (family::SWITCH_M, layout.m_base)] {
        for d in 0..instances.len() {
            for s in topo.switches() {
                let mut coeffs: Vec<(usize, f64)> = Vec::new();
                for &a in topo.out_arcs(s) {
                    coeffs.push((base + d * layout.arc_count + a, 1.0));
                }
                for &a in topo.in_arcs(s) {
                    coeffs.push((base + d * layout.arc_count + a, -1.0));
                }
                lp.add_row(fam, format!("{}[{},{}]", fam, topo.node(s), d), coeffs, Relation::Eq, 0.0);
            }
        }
    }
    for (d, inst) in instances.iter().enumerate() {
        for &p in &inst.candidates {
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            for &a in topo.out_arcs(p) {
                coeffs.push((layout.m(d, a), 1.0));
            }
            for &a in topo.in_arcs(p) {
                coeffs.push((layout.n(d, a), -gamma));
            }
            lp.add_row(family::PM_PROCESSING, format!("process[{},{}]", topo.node(p), d), coeffs, Relation::Eq, 0.0);
        }
    }
    let mut coeffs = Vec::new();
    for d in 0..instances.len() {
        for &p in ingress {
            for &a in topo.out_arcs(p) {
                coeffs.push((layout.n(d, a), 1.0));
            }
        }
    }
    lp.add_row(family::INGRESS, "ingress", coeffs, Relation::Eq, traffic);
    let mut coeffs = Vec::new();
    for d in 0..instances.len() {
        for &p in egress {
            for &a in topo.in_arcs(p) {
                coeffs.push((layout.m(d, a), 1.0));
            }
        }
    }
    lp.add_row(family::EGRESS, "egress", coeffs, Relation::Eq, traffic * gamma);
    layout
}

/// Unprocessed inflow of instance `d` at PM `p`, local arc included.
pub(crate) fn arrival_terms(topo: &Topology, layout: &FlowLayout, d: usize, p: usize) -> Vec<(usize, f64)> {
    topo.in_arcs(p).iter().map(|&a| (layout.n(d, a), 1.0)).collect()
}

// ---------------------------------------------------------------------------
// Relaxed models
// ---------------------------------------------------------------------------

/// A relaxed model with the indices needed to read its solution.
#[derive(Debug, Clone)]
pub struct RelaxedModel {
    pub lp: LpModel,
    pub flows: FlowLayout,
    pub instances: Vec<Instance>,
    /// `(pm, var)` share variables per instance.
    pub alpha: Vec<Vec<(usize, usize)>>,
    /// `(pm, var)` interest variables per instance; empty for pinned ones.
    pub interest: Vec<Vec<(usize, usize)>>,
    pub mode: ScalingMode,
}

pub fn build_overload_lp(p: &ScalingProblem) -> Result<RelaxedModel, ScalingError> {
    if p.mode != ScalingMode::Overload {
        return Err(ScalingError::Invalid("overload model needs an overload-mode problem".into()));
    }
    build_relaxed(p)
}

pub fn build_underload_lp(p: &ScalingProblem) -> Result<RelaxedModel, ScalingError> {
    if p.mode != ScalingMode::Underload {
        return Err(ScalingError::Invalid("underload model needs an underload-mode problem".into()));
    }
    build_relaxed(p)
}

pub fn build_relaxed(p: &ScalingProblem) -> Result<RelaxedModel, ScalingError> {
    p.validate()?;
    let topo = &p.topology;
    let g = &p.group;
    let instances = p.instances()?;
    let mut lp = LpModel::new();
    let flows = add_flow_block(&mut lp, topo, &instances, &g.ingress_pms, &g.egress_pms, g.gamma, p.traffic, 1.0);

    let mut alpha = Vec::with_capacity(instances.len());
    let mut interest = Vec::with_capacity(instances.len());
    for (d, inst) in instances.iter().enumerate() {
        let a: Vec<(usize, usize)> = inst
            .candidates
            .iter()
            .map(|&q| (q, lp.add_var(format!("alpha[{},{}]", topo.node(q), d), 0.0, p.phi)))
            .collect();
        let e: Vec<(usize, usize)> = match inst.role {
            Role::Pinned(_) => Vec::new(),
            _ => inst
                .candidates
                .iter()
                .map(|&q| (q, lp.add_var(format!("e[{},{}]", topo.node(q), d), 0.0, 1.0)))
                .collect(),
        };
        alpha.push(a);
        interest.push(e);
    }

    for (d, inst) in instances.iter().enumerate() {
        if matches!(inst.role, Role::Pinned(_)) {
            continue;
        }
        let a = &alpha[d];
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                lp.add_row(
                    family::EQUAL_SHARE,
                    format!("share[{},{},{}]", topo.node(a[i].0), topo.node(a[j].0), d),
                    vec![(a[i].1, 1.0), (a[j].1, -1.0)],
                    Relation::Eq,
                    0.0,
                );
            }
        }
    }
    for (d, inst) in instances.iter().enumerate() {
        if matches!(inst.role, Role::Pinned(_)) {
            continue;
        }
        for &(q, av) in &alpha[d] {
            let mut coeffs: Vec<(usize, f64)> = interest[d].iter().map(|&(_, ev)| (ev, 1.0)).collect();
            coeffs.push((av, -1.0));
            lp.add_row(family::INTEREST, format!("interest[{},{}]", topo.node(q), d), coeffs, Relation::Eq, 0.0);
        }
    }
    for (d, inst) in instances.iter().enumerate() {
        if matches!(inst.role, Role::Pinned(_)) {
            continue;
        }
        for &(q, ev) in &interest[d] {
            let mut coeffs = arrival_terms(topo, &flows, d, q);
            coeffs.push((ev, -p.traffic));
            lp.add_row(family::ARRIVAL_NEW, format!("arrive[{},{}]", topo.node(q), d), coeffs, Relation::Eq, 0.0);
        }
    }
    for (d, inst) in instances.iter().enumerate() {
        if let Role::Pinned(host) = inst.role {
            let mut coeffs = arrival_terms(topo, &flows, d, host);
            coeffs.push((alpha[d][0].1, -p.traffic));
            lp.add_row(family::ARRIVAL_ONLINE, format!("arrive[{},{}]", topo.node(host), d), coeffs, Relation::Eq, 0.0);
        }
    }

    // Interest scaled by 1/phi acts as a fractional placement; keep it within
    // the room each PM has for this group.
    let reclaim = p.mode == ScalingMode::Underload;
    for pm in topo.pms() {
        let movable: Vec<(usize, u32)> = instances
            .iter()
            .enumerate()
            .filter(|(_, inst)| !matches!(inst.role, Role::Pinned(_)))
            .filter_map(|(d, inst)| interest[d].iter().find(|(q, _)| *q == pm).map(|&(_, ev)| (ev, inst.vm)))
            .collect();
        if movable.is_empty() {
            continue;
        }
        let avail = p.available(pm, reclaim);
        for r in g.omega.keys() {
            let mut coeffs = Vec::new();
            for &(ev, vm) in &movable {
                let u = vm_by_id(g, vm).and_then(|v| v.capacity.get(r).copied()).unwrap_or(0.0);
                if u > 0.0 {
                    coeffs.push((ev, u / p.phi));
                }
            }
            if !coeffs.is_empty() {
                let cap = avail.get(r).copied().unwrap_or(0.0) + 1e-9;
                lp.add_row(family::CAPACITY, format!("capacity[{},{}]", topo.node(pm), r), coeffs, Relation::Le, cap);
            }
        }
    }

    Ok(RelaxedModel { lp, flows, instances, alpha, interest, mode: p.mode })
}

pub(crate) fn vm_by_id(g: &VnfGroup, id: u32) -> Option<&crate::chain_state::VmInstance> {
    g.online.iter().chain(&g.offline_pool).find(|vm| vm.id == id)
}

// ---------------------------------------------------------------------------
// Flows and costs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowEntry {
    pub from: usize,
    pub to: usize,
    pub instance: usize,
    pub commodity: Commodity,
    pub value: f64,
}

/// Nonzero flows of a solution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowTable {
    pub entries: Vec<FlowEntry>,
}

impl FlowTable {
    pub fn from_point(topo: &Topology, layout: &FlowLayout, point: &[f64]) -> Self {
        let mut entries = Vec::new();
        for (commodity, base) in [(Commodity::N, layout.n_base), (Commodity::M, layout.m_base)] {
            for d in 0..layout.instance_count {
                for (a, arc) in topo.arcs().iter().enumerate() {
                    let value = point[base + d * layout.arc_count + a];
                    if value.abs() > 1e-12 {
                        entries.push(FlowEntry { from: arc.from, to: arc.to, instance: d, commodity, value });
                    }
                }
            }
        }
        FlowTable { entries }
    }

    pub fn to_csv(&self, topo: &Topology) -> Result<String, csv::Error> {
        #[derive(Serialize)]
        struct Row<'a> {
            from: String,
            to: String,
            instance: usize,
            commodity: &'a str,
            value: f64,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            w.serialize(Row {
                from: topo.node(e.from).to_string(),
                to: topo.node(e.to).to_string(),
                instance: e.instance,
                commodity: match e.commodity {
                    Commodity::N => "n",
                    Commodity::M => "m",
                },
                value: e.value,
            })?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }
}

/// Total per-bit forwarding cost of a set of flows.
pub fn forwarding_cost_of(flows: &FlowTable, topo: &Topology) -> Result<f64, ScalingError> {
    let mut total = 0.0;
    for e in &flows.entries {
        let c = topo.cost_between(e.from, e.to).ok_or(ScalingError::NotALink(e.from, e.to))?;
        total += c * e.value;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Action {
    Keep { vm: u32, pm: usize },
    Launch { vm: u32, pm: usize },
    Terminate { vm: u32, pm: usize },
    Migrate { vm: u32, from: usize, to: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceDecision {
    pub instance: usize,
    pub vm: u32,
    pub host: usize,
    pub share: f64,
    pub interest: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingDecision {
    pub mode: ScalingMode,
    pub v_star: usize,
    pub instances: Vec<InstanceDecision>,
    pub actions: Vec<Action>,
    pub flows: FlowTable,
    pub forwarding_cost: f64,
    pub baseline_cost: Option<f64>,
    pub cost_delta: Option<f64>,
    pub warnings: Vec<String>,
}

impl ScalingDecision {
    pub fn launched(&self) -> Vec<(u32, usize)> {
        self.actions.iter().filter_map(|a| if let Action::Launch { vm, pm } = *a { Some((vm, pm)) } else { None }).collect()
    }

    pub fn kept(&self) -> Vec<(u32, usize)> {
        self.actions.iter().filter_map(|a| if let Action::Keep { vm, pm } = *a { Some((vm, pm)) } else { None }).collect()
    }

    pub fn terminated(&self) -> Vec<(u32, usize)> {
        self.actions.iter().filter_map(|a| if let Action::Terminate { vm, pm } = *a { Some((vm, pm)) } else { None }).collect()
    }

    /// Hosts of launched VMs, ascending.
    pub fn launch_hosts(&self) -> Vec<usize> {
        let mut h: Vec<usize> = self.launched().into_iter().map(|(_, p)| p).collect();
        h.sort_unstable();
        h
    }

    /// Sum of instance shares; one on a feasible solution.
    pub fn total_share(&self) -> f64 {
        self.instances.iter().map(|i| i.share).sum()
    }

    pub fn set_baseline(&mut self, baseline_cost: f64) {
        self.baseline_cost = Some(baseline_cost);
        self.cost_delta = (baseline_cost > 0.0).then(|| (self.forwarding_cost - baseline_cost) / baseline_cost);
    }

    /// One row per instance: id, host, share, interest.
    pub fn to_csv(&self, topo: &Topology) -> Result<String, csv::Error> {
        #[derive(Serialize)]
        struct Row {
            instance: Option<usize>,
            vm: u32,
            host: String,
            share: f64,
            interest: f64,
            action: String,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for i in &self.instances {
            let action = self
                .actions
                .iter()
                .find_map(|a| match *a {
                    Action::Keep { vm, .. } if vm == i.vm => Some("keep".to_string()),
                    Action::Launch { vm, .. } if vm == i.vm => Some("launch".to_string()),
                    Action::Migrate { vm, from, .. } if vm == i.vm => Some(format!("migrate from {}", topo.node(from))),
                    _ => None,
                })
                .unwrap_or_else(|| "keep".into());
            w.serialize(Row { instance: Some(i.instance), vm: i.vm, host: topo.node(i.host).to_string(), share: i.share, interest: i.interest, action })?;
        }
        for a in &self.actions {
            if let Action::Terminate { vm, pm } = *a {
                w.serialize(Row { instance: None, vm, host: topo.node(pm).to_string(), share: 0.0, interest: 0.0, action: "terminate".into() })?;
            }
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }
}

/// Turns an optimal relaxed solution into concrete actions.
///
/// Each relocatable instance goes to its highest-interest PM (ties to the
/// lower index). When that PM has no room left, the next best PM with room
/// is used and a warning is recorded.
pub fn decode(solution: &LpSolution, model: &RelaxedModel, p: &ScalingProblem) -> Result<ScalingDecision, ScalingError> {
    if solution.status != LpStatus::Optimal {
        return Err(ScalingError::NotOptimal(solution.status));
    }
    let x = &solution.point;
    let topo = &p.topology;
    let mut warnings = Vec::new();
    let reclaim = p.mode == ScalingMode::Underload;
    let demand = p.vm_demand();
    let mut room: BTreeMap<usize, usize> = BTreeMap::new();
    let mut instances = Vec::with_capacity(model.instances.len());
    for (d, inst) in model.instances.iter().enumerate() {
        let share = model.alpha[d].iter().map(|&(_, v)| x[v]).fold(0.0, f64::max);
        let (host, interest) = match inst.role {
            Role::Pinned(h) => (h, share),
            _ => {
                let mut col: Vec<(usize, f64)> = model.interest[d].iter().map(|&(q, v)| (q, x[v])).collect();
                if col.iter().all(|&(_, v)| v <= 1e-9) {
                    return Err(ScalingError::Degenerate(d));
                }
                col.sort_by(|a, b| {
                    if (a.1 - b.1).abs() <= 1e-9 {
                        a.0.cmp(&b.0)
                    } else {
                        b.1.partial_cmp(&a.1).expect("finite interest")
                    }
                });
                let fits = |q: usize, room: &mut BTreeMap<usize, usize>| {
                    *room.entry(q).or_insert_with(|| slots_in(&p.available(q, reclaim), &demand)) > 0
                };
                let chosen = col.iter().find(|&&(q, _)| fits(q, &mut room)).copied().unwrap_or(col[0]);
                if chosen.0 != col[0].0 {
                    warnings.push(format!(
                        "instance {} moved from full {} to {}",
                        d,
                        topo.node(col[0].0),
                        topo.node(chosen.0)
                    ));
                }
                if let Some(r) = room.get_mut(&chosen.0) {
                    *r = r.saturating_sub(1);
                }
                chosen
            }
        };
        if share < p.epsilon {
            warnings.push(format!("instance {} share {:.4} is below epsilon {}", d, share, p.epsilon));
        }
        instances.push(InstanceDecision { instance: d, vm: inst.vm, host, share, interest });
    }

    let mut actions = Vec::new();
    match p.mode {
        ScalingMode::Overload => {
            for (inst, dec) in model.instances.iter().zip(&instances) {
                actions.push(match inst.role {
                    Role::New => Action::Launch { vm: dec.vm, pm: dec.host },
                    _ => Action::Keep { vm: dec.vm, pm: dec.host },
                });
            }
        }
        ScalingMode::Underload => {
            let mut free: Vec<(u32, usize)> =
                p.group.online.iter().filter_map(|vm| vm.host_pm().map(|h| (vm.id, h))).collect();
            free.sort_unstable();
            for dec in instances.iter_mut() {
                let pos = free.iter().position(|&(_, h)| h == dec.host);
                let (vm, from) = match pos {
                    Some(i) => free.remove(i),
                    None => free.remove(0),
                };
                dec.vm = vm;
                actions.push(if from == dec.host {
                    Action::Keep { vm, pm: from }
                } else {
                    Action::Migrate { vm, from, to: dec.host }
                });
            }
            for (vm, pm) in free {
                actions.push(Action::Terminate { vm, pm });
            }
        }
    }

    let flows = FlowTable::from_point(topo, &model.flows, x);
    let forwarding_cost = forwarding_cost_of(&flows, topo)?;
    Ok(ScalingDecision {
        mode: p.mode,
        v_star: p.v_star,
        instances,
        actions,
        flows,
        forwarding_cost,
        baseline_cost: None,
        cost_delta: None,
        warnings,
    })
}

/// Builds, solves and decodes the relaxed model for `p`.
pub fn solve_relaxed(p: &ScalingProblem, tol: f64) -> Result<(RelaxedModel, LpSolution, ScalingDecision), ScalingError> {
    let model = build_relaxed(p)?;
    let sol = lp::solve(&model.lp, tol)?;
    let decision = decode(&sol, &model, p)?;
    Ok((model, sol, decision))
}

/// Forwarding cost of the pinned pre-event configuration.
pub fn baseline_cost(p: &ScalingProblem, traffic: f64, phi: f64) -> Result<f64, ScalingError> {
    let base = p.baseline(traffic, phi);
    let model = build_relaxed(&base)?;
    let sol = lp::solve(&model.lp, lp::DEFAULT_TOL)?;
    if sol.status != LpStatus::Optimal {
        return Err(ScalingError::NotOptimal(sol.status));
    }
    Ok(sol.objective_value)
}
