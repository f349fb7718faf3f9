//! Exact joint placement and routing model with binary placements, solved by
//! depth-first branch-and-bound over LP relaxations.

use std::time::Instant;

use serde::Serialize;

use crate::lp::{self, LpError, LpModel, LpStatus, Relation, SolveOptions};
use crate::scaling::{
    add_flow_block, arrival_terms, vm_by_id, FlowLayout, FlowTable, Instance, Penalties, Role, ScalingError,
    ScalingProblem, Weights,
};

/// Row families that exist only in the exact model.
pub mod family {
    pub const SHARE_BOX: &str = "share-box";
    pub const COVERAGE: &str = "coverage";
    pub const ARRIVAL: &str = "arrival";
    pub const CAPACITY: &str = "capacity";
    pub const SINGLE_HOST: &str = "single-host";
    pub const BANDWIDTH: &str = "bandwidth";
}

#[derive(Debug, Clone)]
pub struct MilpProblem {
    /// Template with every binary relaxed to `[0, 1]`.
    pub lp: LpModel,
    pub flows: FlowLayout,
    /// Online VMs first, then the offline pool.
    pub instances: Vec<Instance>,
    /// `b[d][p]` variable index.
    pub b: Vec<Vec<usize>>,
    /// `alpha[d][p]` variable index.
    pub alpha: Vec<Vec<usize>>,
    pub penalties: Penalties,
    pub weights: Weights,
    /// Per-arc forwarding cost, in topology arc order.
    pub arc_costs: Vec<f64>,
}

impl MilpProblem {
    pub fn binaries(&self) -> Vec<usize> {
        self.b.iter().flatten().copied().collect()
    }

    pub fn is_online(&self, d: usize) -> bool {
        self.instances[d].role == Role::Relocatable
    }
}

/// Builds the exact model for every online VM and every pool VM of the group.
pub fn build_milp(p: &ScalingProblem) -> Result<MilpProblem, ScalingError> {
    let g = &p.group;
    if g.online.is_empty() {
        return Err(crate::chain_state::StateError::EmptyGroup.into());
    }
    if g.ingress_pms.is_empty() || g.egress_pms.is_empty() {
        return Err(ScalingError::Invalid("ingress and egress PM sets must be nonempty".into()));
    }
    let topo = &p.topology;
    let all_pms: Vec<usize> = topo.pms().collect();
    let instances: Vec<Instance> = g
        .online
        .iter()
        .map(|vm| Instance { vm: vm.id, role: Role::Relocatable, candidates: all_pms.clone() })
        .chain(g.offline_pool.iter().map(|vm| Instance { vm: vm.id, role: Role::New, candidates: all_pms.clone() }))
        .collect();

    let mut lp = LpModel::new();
    let flows = add_flow_block(&mut lp, topo, &instances, &g.ingress_pms, &g.egress_pms, g.gamma, p.traffic, p.weights.forwarding);
    let mut b = Vec::with_capacity(instances.len());
    let mut alpha = Vec::with_capacity(instances.len());
    for (d, inst) in instances.iter().enumerate() {
        let penalty = match inst.role {
            Role::New => p.penalties.activation,
            _ => -p.penalties.retention,
        };
        let row: Vec<usize> = all_pms
            .iter()
            .map(|&q| {
                let v = lp.add_var(format!("b[{},{}]", topo.node(q), d), 0.0, 1.0);
                lp.add_cost(v, p.weights.deployment * penalty);
                v
            })
            .collect();
        b.push(row);
        alpha.push(all_pms.iter().map(|&q| lp.add_var(format!("alpha[{},{}]", topo.node(q), d), 0.0, p.phi)).collect::<Vec<_>>());
    }

    for d in 0..instances.len() {
        for (i, &q) in all_pms.iter().enumerate() {
            let (a, bv) = (alpha[d][i], b[d][i]);
            let name = format!("[{},{}]", topo.node(q), d);
            lp.add_row(family::SHARE_BOX, format!("share-lo{}", name), vec![(a, 1.0), (bv, -p.epsilon)], Relation::Ge, 0.0);
            lp.add_row(family::SHARE_BOX, format!("share-hi{}", name), vec![(a, 1.0), (bv, -p.phi)], Relation::Le, 0.0);
        }
    }
    let all_alpha: Vec<(usize, f64)> = alpha.iter().flatten().map(|&v| (v, 1.0)).collect();
    lp.add_row(family::COVERAGE, "coverage", all_alpha, Relation::Eq, 1.0);
    for d in 0..instances.len() {
        for (i, &q) in all_pms.iter().enumerate() {
            let mut coeffs = arrival_terms(topo, &flows, d, q);
            coeffs.push((alpha[d][i], -p.traffic));
            lp.add_row(family::ARRIVAL, format!("arrive[{},{}]", topo.node(q), d), coeffs, Relation::Eq, 0.0);
        }
    }
    for (i, &q) in all_pms.iter().enumerate() {
        let avail = p.available(q, true);
        for r in g.omega.keys() {
            let coeffs: Vec<(usize, f64)> = instances
                .iter()
                .enumerate()
                .filter_map(|(d, inst)| {
                    let u = vm_by_id(g, inst.vm).and_then(|vm| vm.capacity.get(r).copied()).unwrap_or(0.0);
                    (u > 0.0).then_some((b[d][i], u))
                })
                .collect();
            if !coeffs.is_empty() {
                let cap = avail.get(r).copied().unwrap_or(0.0) + 1e-9;
                lp.add_row(family::CAPACITY, format!("capacity[{},{}]", topo.node(q), r), coeffs, Relation::Le, cap);
            }
        }
    }
    for (d, row) in b.iter().enumerate() {
        lp.add_row(family::SINGLE_HOST, format!("single-host[{}]", d), row.iter().map(|&v| (v, 1.0)).collect(), Relation::Le, 1.0);
    }
    let w = topo.bandwidth();
    if w.is_finite() {
        for (a, arc) in topo.arcs().iter().enumerate() {
            if arc.is_local() {
                continue;
            }
            let mut coeffs = Vec::new();
            for d in 0..instances.len() {
                coeffs.push((flows.n(d, a), 1.0));
                coeffs.push((flows.m(d, a), 1.0));
            }
            lp.add_row(
                family::BANDWIDTH,
                format!("bandwidth[{}>{}]", topo.node(arc.from), topo.node(arc.to)),
                coeffs,
                Relation::Le,
                w,
            );
        }
    }
    let arc_costs = (0..topo.arcs().len()).map(|a| topo.arc_cost(a)).collect();
    Ok(MilpProblem { lp, flows, instances, b, alpha, penalties: p.penalties, weights: p.weights, arc_costs })
}

/// Host of every group VM, `None` when it is not running.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Placement {
    pub hosts: Vec<Option<usize>>,
    pub online: Vec<bool>,
}

/// Activation penalties minus retention credits.
pub fn deployment_cost(placement: &Placement, penalties: &Penalties) -> f64 {
    placement
        .hosts
        .iter()
        .zip(&placement.online)
        .filter(|(h, _)| h.is_some())
        .map(|(_, &online)| if online { -penalties.retention } else { penalties.activation })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MilpStatus {
    Optimal,
    /// Node budget spent; the incumbent is not proven optimal.
    NodeLimit,
    TimeLimit,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct MilpOptions {
    pub node_limit: usize,
    pub tol: f64,
    pub integrality_tol: f64,
    pub deadline: Option<Instant>,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions { node_limit: 100_000, tol: lp::DEFAULT_TOL, integrality_tol: 1e-6, deadline: None }
    }
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub point: Vec<f64>,
    pub placement: Placement,
    pub deployment_cost: f64,
    pub forwarding_cost: f64,
    pub total: f64,
    pub root_bound: f64,
    pub nodes: usize,
}

impl MilpSolution {
    pub fn has_incumbent(&self) -> bool {
        !self.point.is_empty()
    }

    pub fn flows(&self, problem: &MilpProblem, topo: &crate::topology::Topology) -> FlowTable {
        FlowTable::from_point(topo, &problem.flows, &self.point)
    }

    /// Placement table: vm, online flag, host, share.
    pub fn placement_csv(&self, problem: &MilpProblem, topo: &crate::topology::Topology) -> Result<String, csv::Error> {
        #[derive(Serialize)]
        struct Row {
            vm: u32,
            online: bool,
            host: String,
            share: f64,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for (d, inst) in problem.instances.iter().enumerate() {
            let host = self.placement.hosts[d];
            let share = host.map_or(0.0, |h| self.point[problem.alpha[d][h]]);
            w.serialize(Row {
                vm: inst.vm,
                online: self.placement.online[d],
                host: host.map_or_else(|| "-".to_string(), |h| topo.node(h).to_string()),
                share,
            })?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }
}

struct Node {
    fixings: Vec<(usize, f64)>,
    bound: f64,
}

/// Branch-and-bound: most fractional binary first (ties to the lowest
/// index), depth first, with the open list re-sorted by bound every 16 nodes.
pub fn solve_milp(problem: &MilpProblem, opts: &MilpOptions) -> Result<MilpSolution, ScalingError> {
    let binaries = problem.binaries();
    let lp_opts = SolveOptions { tol: opts.tol, deadline: opts.deadline, ..SolveOptions::default() };
    let mut stack = vec![Node { fixings: Vec::new(), bound: f64::NEG_INFINITY }];
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0usize;
    let mut root_bound = f64::NAN;
    let mut status = MilpStatus::Optimal;
    let mut model = problem.lp.clone();
    let original: Vec<(f64, f64)> = model.vars.iter().map(|v| (v.lower, v.upper)).collect();
    let prune = |bound: f64, inc: &Option<(f64, Vec<f64>)>| match inc {
        Some((best, _)) => bound >= best - 1e-9 * best.abs().max(1.0),
        None => false,
    };

    let mut since_sort = 0usize;
    loop {
        if since_sort >= 16 {
            stack.sort_by(|a, b| b.bound.partial_cmp(&a.bound).unwrap_or(std::cmp::Ordering::Equal));
            since_sort = 0;
        }
        let Some(node) = stack.pop() else { break };
        if prune(node.bound, &incumbent) {
            continue;
        }
        if nodes >= opts.node_limit {
            status = MilpStatus::NodeLimit;
            break;
        }
        if opts.deadline.is_some_and(|d| Instant::now() > d) {
            status = MilpStatus::TimeLimit;
            break;
        }
        nodes += 1;
        since_sort += 1;

        for (v, &(lo, hi)) in original.iter().enumerate() {
            model.vars[v].lower = lo;
            model.vars[v].upper = hi;
        }
        for &(v, val) in &node.fixings {
            model.vars[v].lower = val;
            model.vars[v].upper = val;
        }
        let sol = match lp::solve_with(&model, &lp_opts) {
            Ok(s) => s,
            Err(LpError::TimeLimit) => {
                status = MilpStatus::TimeLimit;
                break;
            }
            Err(e) => return Err(e.into()),
        };
        if node.fixings.is_empty() {
            root_bound = if sol.status == LpStatus::Optimal { sol.objective_value } else { f64::INFINITY };
        }
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(ScalingError::NotOptimal(LpStatus::Unbounded)),
            LpStatus::Optimal => {}
        }
        if prune(sol.objective_value, &incumbent) {
            continue;
        }
        let mut branch: Option<(usize, f64)> = None;
        for &v in &binaries {
            let x = sol.point[v];
            let frac = x.min(1.0 - x);
            if frac > opts.integrality_tol && branch.is_none_or(|(_, f)| frac > f + 1e-12) {
                branch = Some((v, frac));
            }
        }
        match branch {
            None => {
                let mut point = sol.point;
                for &v in &binaries {
                    point[v] = point[v].round();
                }
                incumbent = Some((sol.objective_value, point));
            }
            Some((v, _)) => {
                for val in [0.0, 1.0] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((v, val));
                    stack.push(Node { fixings, bound: sol.objective_value });
                }
            }
        }
    }

    let Some((total, point)) = incumbent else {
        let status = if status == MilpStatus::Optimal { MilpStatus::Infeasible } else { status };
        return Ok(MilpSolution {
            status,
            point: Vec::new(),
            placement: Placement { hosts: vec![None; problem.instances.len()], online: online_flags(problem) },
            deployment_cost: f64::NAN,
            forwarding_cost: f64::NAN,
            total: f64::NAN,
            root_bound,
            nodes,
        });
    };
    let hosts: Vec<Option<usize>> =
        problem.b.iter().map(|row| row.iter().position(|&v| point[v] > 0.5)).collect();
    let placement = Placement { hosts, online: online_flags(problem) };
    let deployment = deployment_cost(&placement, &problem.penalties);
    let arcs = problem.arc_costs.len();
    let forwarding: f64 = (0..problem.instances.len())
        .flat_map(|d| (0..arcs).map(move |a| (d, a)))
        .map(|(d, a)| problem.arc_costs[a] * (point[problem.flows.n(d, a)] + point[problem.flows.m(d, a)]))
        .sum();
    Ok(MilpSolution { status, point, placement, deployment_cost: deployment, forwarding_cost: forwarding, total, root_bound, nodes })
}

fn online_flags(problem: &MilpProblem) -> Vec<bool> {
    (0..problem.instances.len()).map(|d| problem.is_online(d)).collect()
}
