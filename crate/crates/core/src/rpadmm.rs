//! Randomly permuted multi-block ADMM over the lifted overload model.
//!
//! Every scalar variable is its own block. Each round draws a uniform random
//! permutation of the blocks, minimizes the augmented Lagrangian over each
//! block in that order (always reading the latest values), then moves every
//! scaled dual by its row residual.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::lp::{LpModel, Relation};
use crate::scaling::{build_overload_lp, family, RelaxedModel, ScalingError, ScalingMode, ScalingProblem};
use crate::topology::Topology;

#[derive(Debug, Error)]
pub enum AdmmError {
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error("block {0} has no quadratic term and an unbounded improving direction")]
    UnboundedUpdate(usize),
    #[error("row {0} is an inequality; the engine needs equality rows")]
    InequalityRow(usize),
    #[error("beta must be positive, got {0}")]
    BadBeta(f64),
    #[error("diverged at iteration {iteration}: {detail}")]
    Diverged { iteration: usize, detail: String },
    #[error("block {0} has no owning agent")]
    Orphan(usize),
}

/// Lifted-model row families.
pub mod lifted {
    pub const SPLIT_N: &str = "split-n";
    pub const SUM_A: &str = "sum-a";
    pub const SPLIT_M: &str = "split-m";
    pub const SUM_B: &str = "sum-b";
    pub const SPLIT_PM: &str = "split-pm";
    pub const SUM_C: &str = "sum-c";
    pub const INGRESS_SPLIT: &str = "ingress-split";
    pub const INGRESS_TOTAL: &str = "ingress-total";
    pub const EGRESS_SPLIT: &str = "egress-split";
    pub const EGRESS_TOTAL: &str = "egress-total";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    N,
    M,
    Alpha,
    Interest,
    A,
    B,
    C,
    D,
    E,
    Slack,
}

/// Simulated agent owning a block: a switch or PM, by dense node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Agent(pub usize);

/// The lifted system: the relaxed overload model plus auxiliary flows, with
/// every row an equality.
#[derive(Debug, Clone)]
pub struct AdmmSystem {
    pub lp: LpModel,
    /// The relaxed model whose variables occupy the first indices of `lp`.
    pub relaxed: RelaxedModel,
    pub kinds: Vec<BlockKind>,
    owners: Vec<Option<Agent>>,
}

impl AdmmSystem {
    pub fn num_blocks(&self) -> usize {
        self.lp.num_vars()
    }

    /// Projection of a lifted point onto the relaxed model's variables.
    pub fn relaxed_point<'a>(&self, point: &'a [f64]) -> &'a [f64] {
        &point[..self.relaxed.lp.num_vars()]
    }
}

/// Lifts the overload model: switch conservation through A/B, PM processing
/// through C, ingress/egress totals through D/E; the share, interest, arrival
/// and capacity rows are carried over, capacity with a slack.
///
/// A, B and C are free: they carry signed net flows.
pub fn reformulate(p: &ScalingProblem) -> Result<AdmmSystem, AdmmError> {
    if p.mode != ScalingMode::Overload {
        return Err(ScalingError::Invalid("the distributed solver handles overload problems".into()).into());
    }
    let relaxed = build_overload_lp(p)?;
    let topo = &p.topology;
    let g = &p.group;
    let flows = relaxed.flows.clone();
    let mut lp = LpModel::new();
    let mut kinds = Vec::new();
    let mut owners = Vec::new();

    // Relaxed variables keep their indices and costs.
    for (i, v) in relaxed.lp.vars.iter().enumerate() {
        lp.add_var(v.name.clone(), v.lower, v.upper);
        lp.add_cost(i, relaxed.lp.objective[i]);
    }
    let arc_count = flows.arc_count;
    for kind in [BlockKind::N, BlockKind::M] {
        for _ in 0..flows.instance_count {
            for arc in topo.arcs() {
                kinds.push(kind);
                owners.push(Some(Agent(arc.from)));
            }
        }
    }
    debug_assert_eq!(kinds.len(), flows.var_count());
    kinds.resize(relaxed.lp.num_vars(), BlockKind::Alpha);
    owners.resize(relaxed.lp.num_vars(), None);
    for d in 0..relaxed.instances.len() {
        for &(q, v) in &relaxed.alpha[d] {
            kinds[v] = BlockKind::Alpha;
            owners[v] = Some(Agent(q));
        }
        for &(q, v) in &relaxed.interest[d] {
            kinds[v] = BlockKind::Interest;
            owners[v] = Some(Agent(q));
        }
    }
    #[allow(clippy::too_many_arguments)]
    fn add(
        lp: &mut LpModel,
        kinds: &mut Vec<BlockKind>,
        owners: &mut Vec<Option<Agent>>,
        name: String,
        lo: f64,
        hi: f64,
        kind: BlockKind,
        owner: usize,
    ) -> usize {
        kinds.push(kind);
        owners.push(Some(Agent(owner)));
        lp.add_var(name, lo, hi)
    }

    let instances = &relaxed.instances;
    for (split, sum, base, kind, label) in [
        (lifted::SPLIT_N, lifted::SUM_A, flows.n_base, BlockKind::A, "A"),
        (lifted::SPLIT_M, lifted::SUM_B, flows.m_base, BlockKind::B, "B"),
    ] {
        for d in 0..instances.len() {
            for s in topo.switches() {
                let mut aux = Vec::new();
                for &a in topo.out_arcs(s) {
                    let j = topo.arcs()[a].to;
                    let back = topo.arc_index(j, s).expect("links are bidirectional");
                    let x = add(&mut lp, &mut kinds, &mut owners, format!("{}[{}>{},{}]", label, topo.node(s), topo.node(j), d), f64::NEG_INFINITY, f64::INFINITY, kind, s);
                    aux.push((x, 1.0));
                    lp.add_row(
                        split,
                        format!("{}[{}>{},{}]", split, topo.node(s), topo.node(j), d),
                        vec![(base + d * arc_count + a, 1.0), (base + d * arc_count + back, -1.0), (x, -1.0)],
                        Relation::Eq,
                        0.0,
                    );
                }
                lp.add_row(sum, format!("{}[{},{}]", sum, topo.node(s), d), aux, Relation::Eq, 0.0);
            }
        }
    }
    for (d, inst) in instances.iter().enumerate() {
        for &pm in &inst.candidates {
            let mut aux = Vec::new();
            for &a in topo.out_arcs(pm) {
                let j = topo.arcs()[a].to;
                let back = topo.arc_index(j, pm).expect("links are bidirectional");
                let x = add(&mut lp, &mut kinds, &mut owners, format!("C[{}>{},{}]", topo.node(pm), topo.node(j), d), f64::NEG_INFINITY, f64::INFINITY, BlockKind::C, pm);
                aux.push((x, 1.0));
                lp.add_row(
                    lifted::SPLIT_PM,
                    format!("{}[{}>{},{}]", lifted::SPLIT_PM, topo.node(pm), topo.node(j), d),
                    vec![(flows.m(d, a), 1.0), (flows.n(d, back), -g.gamma), (x, -1.0)],
                    Relation::Eq,
                    0.0,
                );
            }
            lp.add_row(lifted::SUM_C, format!("{}[{},{}]", lifted::SUM_C, topo.node(pm), d), aux, Relation::Eq, 0.0);
        }
    }
    let ingress_agent = g.ingress_pms[0];
    let egress_agent = g.egress_pms[0];
    let mut dvars = Vec::new();
    for d in 0..instances.len() {
        let x = add(&mut lp, &mut kinds, &mut owners, format!("D[{}]", d), 0.0, f64::INFINITY, BlockKind::D, ingress_agent);
        let mut coeffs: Vec<(usize, f64)> =
            g.ingress_pms.iter().flat_map(|&pm| topo.out_arcs(pm).iter().map(|&a| (flows.n(d, a), 1.0))).collect();
        coeffs.push((x, -1.0));
        lp.add_row(lifted::INGRESS_SPLIT, format!("{}[{}]", lifted::INGRESS_SPLIT, d), coeffs, Relation::Eq, 0.0);
        dvars.push((x, 1.0));
    }
    lp.add_row(lifted::INGRESS_TOTAL, lifted::INGRESS_TOTAL, dvars, Relation::Eq, p.traffic);
    let mut evars = Vec::new();
    for d in 0..instances.len() {
        let x = add(&mut lp, &mut kinds, &mut owners, format!("E[{}]", d), 0.0, f64::INFINITY, BlockKind::E, egress_agent);
        let mut coeffs: Vec<(usize, f64)> =
            g.egress_pms.iter().flat_map(|&pm| topo.in_arcs(pm).iter().map(|&a| (flows.m(d, a), 1.0))).collect();
        coeffs.push((x, -1.0));
        lp.add_row(lifted::EGRESS_SPLIT, format!("{}[{}]", lifted::EGRESS_SPLIT, d), coeffs, Relation::Eq, 0.0);
        evars.push((x, 1.0));
    }
    lp.add_row(lifted::EGRESS_TOTAL, lifted::EGRESS_TOTAL, evars, Relation::Eq, p.traffic * g.gamma);

    let carried = [family::EQUAL_SHARE, family::INTEREST, family::ARRIVAL_NEW, family::ARRIVAL_ONLINE, family::CAPACITY];
    for row in &relaxed.lp.rows {
        if !carried.contains(&row.family.as_str()) {
            continue;
        }
        let mut coeffs = row.coeffs.clone();
        match row.relation {
            Relation::Eq => {}
            Relation::Le | Relation::Ge => {
                let owner = owners[row.coeffs[0].0].expect("carried rows touch owned blocks").0;
                let sign = if row.relation == Relation::Le { 1.0 } else { -1.0 };
                let s = add(&mut lp, &mut kinds, &mut owners, format!("slack[{}]", row.name), 0.0, f64::INFINITY, BlockKind::Slack, owner);
                coeffs.push((s, sign));
            }
        }
        lp.add_row(row.family.clone(), row.name.clone(), coeffs, Relation::Eq, row.rhs);
    }

    let system = AdmmSystem { lp, relaxed, kinds, owners };
    agent_partition(&system)?;
    Ok(system)
}

/// Owning agent of every block.
pub fn agent_partition(system: &AdmmSystem) -> Result<Vec<Agent>, AdmmError> {
    system.owners.iter().enumerate().map(|(i, o)| o.ok_or(AdmmError::Orphan(i))).collect()
}

/// Exact minimizer of `c x + (beta/2) sum_t (a_t x + r_t)^2` over `[lo, hi]`.
pub fn scalar_block_update(c: f64, terms: &[(f64, f64)], lo: f64, hi: f64, beta: f64) -> Result<f64, AdmmError> {
    let (mut saa, mut sar) = (0.0, 0.0);
    for &(a, r) in terms {
        saa += a * a;
        sar += a * r;
    }
    if saa == 0.0 {
        return if c > 0.0 && lo.is_finite() {
            Ok(lo)
        } else if c < 0.0 && hi.is_finite() {
            Ok(hi)
        } else if c == 0.0 {
            Ok(0.0f64.clamp(lo, hi))
        } else {
            Err(AdmmError::UnboundedUpdate(usize::MAX))
        };
    }
    Ok(((-c / beta - sar) / saa).clamp(lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOrder {
    /// Fresh uniform permutation every round.
    RandomPermutation,
    /// Blocks in index order every round.
    Fixed,
}

#[derive(Debug, Clone)]
pub struct AdmmConfig {
    pub beta: f64,
    pub max_iters: usize,
    /// Stop once every normalized family violation is at most this.
    pub primal_tol: f64,
    pub seed: u64,
    pub order: UpdateOrder,
    pub divergence_limit: f64,
    /// Starting primal point; zeros clamped into the bounds when absent.
    pub initial: Option<Vec<f64>>,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            beta: 5.0,
            max_iters: 25,
            primal_tol: 1e-3,
            seed: 0,
            order: UpdateOrder::RandomPermutation,
            divergence_limit: 1e12,
            initial: None,
        }
    }
}

/// Scaled-form ADMM state over an equality-constrained LP.
#[derive(Debug, Clone)]
pub struct AdmmEngine {
    columns: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    beta: f64,
    /// Current primal values; the last written value of every block.
    pub x: Vec<f64>,
    /// `A x - b` at the current `x`.
    pub residual: Vec<f64>,
    /// Scaled duals, one per row.
    pub dual: Vec<f64>,
}

impl AdmmEngine {
    pub fn new(lp: &LpModel, beta: f64, initial: Option<&[f64]>) -> Result<Self, AdmmError> {
        if !(beta > 0.0) {
            return Err(AdmmError::BadBeta(beta));
        }
        let n = lp.num_vars();
        let mut columns = vec![Vec::new(); n];
        for (i, row) in lp.rows.iter().enumerate() {
            if row.relation != Relation::Eq {
                return Err(AdmmError::InequalityRow(i));
            }
            for &(v, a) in &row.coeffs {
                columns[v].push((i, a));
            }
        }
        let lower: Vec<f64> = lp.vars.iter().map(|v| v.lower).collect();
        let upper: Vec<f64> = lp.vars.iter().map(|v| v.upper).collect();
        let x: Vec<f64> = match initial {
            Some(x0) => x0.iter().zip(lower.iter().zip(&upper)).map(|(&x, (&lo, &hi))| x.clamp(lo, hi)).collect(),
            None => lower.iter().zip(&upper).map(|(&lo, &hi)| 0.0f64.clamp(lo, hi)).collect(),
        };
        let rhs: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
        let residual = lp.rows.iter().map(|r| r.activity(&x) - r.rhs).collect();
        Ok(AdmmEngine {
            columns,
            cost: lp.objective.clone(),
            lower,
            upper,
            rhs,
            beta,
            x,
            residual,
            dual: vec![0.0; lp.num_rows()],
        })
    }

    /// Minimizes the augmented Lagrangian over block `j`, others fixed.
    pub fn update_block(&mut self, j: usize, terms: &mut Vec<(f64, f64)>) -> Result<(), AdmmError> {
        terms.clear();
        let old = self.x[j];
        for &(i, a) in &self.columns[j] {
            terms.push((a, self.residual[i] - a * old + self.dual[i]));
        }
        let new = scalar_block_update(self.cost[j], terms, self.lower[j], self.upper[j], self.beta).map_err(|e| match e {
            AdmmError::UnboundedUpdate(_) => AdmmError::UnboundedUpdate(j),
            e => e,
        })?;
        if new != old {
            for &(i, a) in &self.columns[j] {
                self.residual[i] += a * (new - old);
            }
            self.x[j] = new;
        }
        Ok(())
    }

    /// One primal sweep in `order` followed by the dual step.
    pub fn round(&mut self, order: &[usize]) -> Result<(), AdmmError> {
        let mut terms = Vec::new();
        for &j in order {
            self.update_block(j, &mut terms)?;
        }
        self.refresh_residual();
        for (u, r) in self.dual.iter_mut().zip(&self.residual) {
            *u += r;
        }
        Ok(())
    }

    /// Recomputes residuals from scratch to shed accumulated rounding.
    fn refresh_residual(&mut self) {
        for (r, b) in self.residual.iter_mut().zip(&self.rhs) {
            *r = -b;
        }
        for (j, col) in self.columns.iter().enumerate() {
            let x = self.x[j];
            if x != 0.0 {
                for &(i, a) in col {
                    self.residual[i] += a * x;
                }
            }
        }
    }

    pub fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmmRecord {
    pub iteration: usize,
    pub objective: f64,
    /// Normalized violation per relaxed-model family, in family order.
    pub violations: Vec<f64>,
    pub max_violation: f64,
    pub messages: usize,
    pub permutation: Vec<u32>,
    pub duals: Vec<f64>,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmTrace {
    pub families: Vec<String>,
    /// Raw family violations at the starting point.
    pub initial: Vec<f64>,
    pub records: Vec<AdmmRecord>,
}

impl AdmmTrace {
    /// `iteration, objective, <family>..., max_violation, messages`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,objective");
        for f in &self.families {
            let _ = write!(out, ",{}", f);
        }
        out.push_str(",max_violation,messages\n");
        for r in &self.records {
            let _ = write!(out, "{},{}", r.iteration, r.objective);
            for v in &r.violations {
                let _ = write!(out, ",{}", v);
            }
            let _ = writeln!(out, ",{},{}", r.max_violation, r.messages);
        }
        out
    }

    /// One line per iteration: the iteration number and the block order.
    pub fn permutation_log(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = write!(out, "{}:", r.iteration);
            for b in &r.permutation {
                let _ = write!(out, " {}", b);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct AdmmResult {
    /// Final lifted point.
    pub point: Vec<f64>,
    pub objective: f64,
    pub trace: AdmmTrace,
}

impl AdmmResult {
    pub fn last(&self) -> Option<&AdmmRecord> {
        self.trace.records.last()
    }
}

/// Largest absolute violation per family of `model` at `point`.
pub fn family_violations(model: &LpModel, families: &[String], point: &[f64]) -> Vec<f64> {
    let index: BTreeMap<&str, usize> = families.iter().enumerate().map(|(i, f)| (f.as_str(), i)).collect();
    let mut out = vec![0.0f64; families.len()];
    for row in &model.rows {
        if let Some(&i) = index.get(row.family.as_str()) {
            out[i] = out[i].max(row.violation(point).abs());
        }
    }
    out
}

/// Violations scaled by a reference magnitude per family, capped at one.
/// Families with a zero reference report zero.
pub fn normalized_violations(raw: &[f64], reference: &[f64]) -> Vec<f64> {
    raw.iter().zip(reference).map(|(&v, &r)| if r > 0.0 { (v / r).min(1.0) } else { 0.0 }).collect()
}

/// Runs the permuted ADMM on the lifted system.
///
/// Violations are tracked on the relaxed model's families and normalized by
/// the largest value each family has shown so far, starting point included.
pub fn run_system(system: &AdmmSystem, cfg: &AdmmConfig) -> Result<AdmmResult, AdmmError> {
    let mut engine = AdmmEngine::new(&system.lp, cfg.beta, cfg.initial.as_deref())?;
    let owners = agent_partition(system)?;
    let n = system.num_blocks();
    let messages = message_footprint(&system.lp, &owners);
    let families = system.relaxed.lp.families();
    let initial = family_violations(&system.relaxed.lp, &families, system.relaxed_point(&engine.x));
    let mut peak = initial.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut records = Vec::with_capacity(cfg.max_iters);
    for iteration in 1..=cfg.max_iters {
        match cfg.order {
            UpdateOrder::RandomPermutation => {
                order.sort_unstable();
                order.shuffle(&mut rng);
            }
            UpdateOrder::Fixed => {}
        }
        engine.round(&order)?;
        let objective = engine.objective();
        let worst = engine.residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if !objective.is_finite() || objective.abs() > cfg.divergence_limit || !(worst <= cfg.divergence_limit) {
            return Err(AdmmError::Diverged {
                iteration,
                detail: format!("objective {:e}, largest residual {:e}", objective, worst),
            });
        }
        let raw = family_violations(&system.relaxed.lp, &families, system.relaxed_point(&engine.x));
        for (p, v) in peak.iter_mut().zip(&raw) {
            *p = p.max(*v);
        }
        let violations = normalized_violations(&raw, &peak);
        let max_violation = violations.iter().copied().fold(0.0, f64::max);
        records.push(AdmmRecord {
            iteration,
            objective,
            violations,
            max_violation,
            messages,
            permutation: order.iter().map(|&b| b as u32).collect(),
            duals: engine.dual.clone(),
            residuals: engine.residual.clone(),
        });
        if max_violation <= cfg.primal_tol {
            break;
        }
    }
    let objective = engine.objective();
    Ok(AdmmResult { point: engine.x, objective, trace: AdmmTrace { families, initial, records } })
}

/// Reformulates `p` and runs the permuted ADMM on it.
pub fn run(p: &ScalingProblem, cfg: &AdmmConfig) -> Result<(AdmmSystem, AdmmResult), AdmmError> {
    let system = reformulate(p)?;
    let result = run_system(&system, cfg)?;
    Ok((system, result))
}

/// Values one sweep reads from blocks owned by other agents.
pub fn message_footprint(lp: &LpModel, owners: &[Agent]) -> usize {
    let mut rows_of = vec![Vec::new(); lp.num_vars()];
    for (i, row) in lp.rows.iter().enumerate() {
        for &(v, _) in &row.coeffs {
            rows_of[v].push(i);
        }
    }
    let mut total = 0;
    let mut seen = Vec::new();
    for j in 0..lp.num_vars() {
        seen.clear();
        for &i in &rows_of[j] {
            for &(v, _) in &lp.rows[i].coeffs {
                if v != j && owners[v] != owners[j] {
                    seen.push(v);
                }
            }
        }
        seen.sort_unstable();
        seen.dedup();
        total += seen.len();
    }
    total
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node{}", self.0)
    }
}

/// Human-readable owner label, e.g. `P3` or `agg1`.
pub fn agent_label(topo: &Topology, agent: Agent) -> String {
    topo.node(agent.0).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_update_examples() {
        assert_eq!(scalar_block_update(0.0, &[(1.0, -4.0)], 0.0, f64::INFINITY, 5.0).unwrap(), 4.0);
        assert_eq!(scalar_block_update(5.0, &[(1.0, 0.0)], 0.0, f64::INFINITY, 5.0).unwrap(), 0.0);
        // (-2/5 - (1*-3 + 2*1)) / (1 + 4) = 0.12
        let x = scalar_block_update(2.0, &[(1.0, -3.0), (2.0, 1.0)], 0.0, 10.0, 5.0).unwrap();
        assert!((x - 0.12).abs() < 1e-12);
        assert!(matches!(
            scalar_block_update(-1.0, &[], f64::NEG_INFINITY, f64::INFINITY, 5.0),
            Err(AdmmError::UnboundedUpdate(_))
        ));
        assert_eq!(scalar_block_update(1.0, &[], 2.0, 3.0, 5.0).unwrap(), 2.0);
    }

    #[test]
    fn normalization_caps_and_zeroes() {
        assert_eq!(normalized_violations(&[0.5, 0.0, 3.0], &[1.0, 0.0, 2.0]), vec![0.5, 0.0, 1.0]);
    }

    #[test]
    fn engine_rejects_inequalities() {
        let mut lp = LpModel::new();
        let x = lp.add_var("x", 0.0, 1.0);
        lp.add_row("r", "r", vec![(x, 1.0)], Relation::Le, 1.0);
        assert!(matches!(AdmmEngine::new(&lp, 5.0, None), Err(AdmmError::InequalityRow(0))));
        assert!(matches!(AdmmEngine::new(&LpModel::new(), 0.0, None), Err(AdmmError::BadBeta(_))));
    }
}
