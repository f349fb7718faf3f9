//! Scenario files and the end-to-end harness: detection, model choice,
//! central and distributed solves, topology sweeps and solver comparison.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "row1_overload_v4"
//!
//! [topology]
//! k = 4
//!
//! [[group]]
//! ingress = ["P1"]
//! egress = ["P4"]
//! gamma = 1.2
//! omega = { cpu = 0.1 }
//! capacity = { cpu = 0.55 }
//! pool = 3
//! vms = [{ pm = "P2", util = { cpu = 0.95 } }, { pm = "P5", util = { cpu = 0.7 } }]
//!
//! [event]
//! traffic = 10.0
//! extra = 2
//!
//! [expect]
//! state = "overload"
//! launch = ["P1", "P4"]
//! ```
//!
//! PMs are named `P1..Pn`. Every PM has room for one VM of the scaled group
//! unless `[resources]` says otherwise. When a group lists `candidates`,
//! PMs outside that list have no free room.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Deserialize;
use thiserror::Error;

use crate::chain_state::{
    classify_chain, classify_group, required_instances, ChainState, ResourceVec, StateError, Thresholds, VmInstance,
    VnfGroup,
};
use crate::lp::{self, LpError, LpSolution, LpStatus, SolveOptions};
use crate::milp::{build_milp, solve_milp, MilpOptions, MilpProblem, MilpSolution, MilpStatus};
use crate::rpadmm::{self, AdmmConfig, AdmmError, AdmmTrace};
use crate::scaling::{
    self, build_relaxed, decode, forwarding_cost_of, Action, InstanceDecision, ScalingDecision, ScalingError,
    ScalingMode, ScalingProblem,
};
use crate::topology::{build_fat_tree, LayerCosts, Topology, TopologyError};

/// Environment variable holding the per-model time budget in seconds.
pub const TIME_BUDGET_ENV: &str = "VNFSCALE_TIME_BUDGET";
pub const DEFAULT_TIME_BUDGET: Duration = Duration::from_secs(1200);

/// The time budget from the environment, or the default.
pub fn time_budget() -> Duration {
    std::env::var(TIME_BUDGET_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|s| s.is_finite() && *s >= 0.0)
        .map(Duration::from_secs_f64)
        .unwrap_or(DEFAULT_TIME_BUDGET)
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Scaling(ScalingError),
    #[error(transparent)]
    Admm(AdmmError),
}

impl ScenarioError {
    /// Process exit code: 2 parse/validation, 3 infeasible, 4 divergence,
    /// 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Parse(_) | ScenarioError::Invalid(_) | ScenarioError::Topology(_) => 2,
            ScenarioError::State(_) => 2,
            ScenarioError::Infeasible(_) => 3,
            ScenarioError::Admm(AdmmError::Diverged { .. }) => 4,
            _ => 1,
        }
    }
}

impl From<ScalingError> for ScenarioError {
    fn from(e: ScalingError) -> Self {
        match e {
            ScalingError::CapacityShortfall { .. }
            | ScalingError::PoolExhausted { .. }
            | ScalingError::EmptyCandidates
            | ScalingError::NotOptimal(LpStatus::Infeasible) => ScenarioError::Infeasible(e.to_string()),
            ScalingError::PhiTooLarge { .. } | ScalingError::UnknownPm(_) | ScalingError::Invalid(_) => {
                ScenarioError::Invalid(e.to_string())
            }
            ScalingError::State(s) => ScenarioError::State(s),
            e => ScenarioError::Scaling(e),
        }
    }
}

impl From<AdmmError> for ScenarioError {
    fn from(e: AdmmError) -> Self {
        match e {
            AdmmError::Scaling(s) => s.into(),
            e => ScenarioError::Admm(e),
        }
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRoot {
    name: Option<String>,
    #[serde(default)]
    description: String,
    topology: FileTopology,
    #[serde(default)]
    resources: FileResources,
    #[serde(rename = "group")]
    groups: Vec<FileGroup>,
    event: FileEvent,
    #[serde(default)]
    solver: FileSolver,
    expect: Option<FileExpect>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTopology {
    k: usize,
    #[serde(default = "default_rack")]
    pms_per_rack: usize,
    /// PM-ToR, ToR-aggregation, aggregation-core.
    costs: Option<[f64; 3]>,
    bandwidth: Option<f64>,
}

fn default_rack() -> usize {
    2
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileResources {
    /// Free resources on every PM.
    free: Option<ResourceVec>,
    /// Per-PM overrides, keyed by PM name.
    #[serde(default)]
    pm: BTreeMap<String, ResourceVec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileGroup {
    #[serde(default)]
    target: bool,
    #[serde(default = "one")]
    chain: u32,
    vnf: Option<u32>,
    ingress: Option<Vec<String>>,
    egress: Option<Vec<String>>,
    #[serde(default = "unit")]
    gamma: f64,
    #[serde(default)]
    phi: FilePhi,
    omega: ResourceVec,
    capacity: ResourceVec,
    /// `[hot, warm, cold]` per resource.
    #[serde(default)]
    thresholds: BTreeMap<String, [f64; 3]>,
    vms: Vec<FileVm>,
    #[serde(default)]
    pool: usize,
    candidates: Option<Vec<String>>,
}

fn one() -> u32 {
    1
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FilePhi {
    Value(f64),
    Keyword(String),
}

impl Default for FilePhi {
    fn default() -> Self {
        FilePhi::Keyword("auto".into())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileVm {
    pm: String,
    util: ResourceVec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileEvent {
    traffic: f64,
    extra: Option<usize>,
    scale: Option<f64>,
    v_star: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSolver {
    #[serde(default = "default_kind")]
    kind: String,
    #[serde(default = "default_beta")]
    beta: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_iters")]
    iters: usize,
    #[serde(default = "default_primal_tol")]
    primal_tol: f64,
}

fn default_kind() -> String {
    "lp".into()
}
fn default_beta() -> f64 {
    5.0
}
fn default_iters() -> usize {
    25
}
fn default_primal_tol() -> f64 {
    1e-3
}

impl Default for FileSolver {
    fn default() -> Self {
        FileSolver {
            kind: default_kind(),
            beta: default_beta(),
            seed: 0,
            iters: default_iters(),
            primal_tol: default_primal_tol(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileExpect {
    state: Option<String>,
    v_star: Option<usize>,
    launch: Option<Vec<String>>,
    keep: Option<Vec<String>>,
    terminate: Option<Vec<String>>,
    cost_delta: Option<String>,
}

// ---------------------------------------------------------------------------
// Parsed scenario
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiSpec {
    /// One over v*: every instance takes an equal share.
    Auto,
    Fixed(f64),
}

impl PhiSpec {
    pub fn resolve(self, instances: usize) -> f64 {
        match self {
            PhiSpec::Auto => 1.0 / instances.max(1) as f64,
            PhiSpec::Fixed(v) => v,
        }
    }
}

/// The traffic change that follows detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficEvent {
    /// Pre-event rate T0.
    pub base: f64,
    /// Extra VMs the overload preset accounts for.
    pub extra: usize,
    /// Explicit multiplier replacing the presets.
    pub scale: Option<f64>,
    pub v_star: Option<usize>,
}

impl TrafficEvent {
    /// Overload adds half of T0 per extra VM; underload halves T0.
    pub fn traffic(&self, state: ChainState) -> f64 {
        let factor = match (self.scale, state) {
            (Some(s), _) => s,
            (None, ChainState::Overload) => 1.0 + 0.5 * self.extra as f64,
            (None, ChainState::Underload) => 0.5,
            (None, ChainState::Normal) => 1.0,
        };
        self.base * factor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Lp,
    Milp,
    Rpadmm,
    All,
}

impl std::str::FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lp" => Ok(SolverKind::Lp),
            "milp" => Ok(SolverKind::Milp),
            "rpadmm" | "admm" => Ok(SolverKind::Rpadmm),
            "all" => Ok(SolverKind::All),
            other => Err(format!("unknown solver '{}' (expected lp, milp, rpadmm or all)", other)),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Lp => "lp",
            SolverKind::Milp => "milp",
            SolverKind::Rpadmm => "rpadmm",
            SolverKind::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub kind: SolverKind,
    pub beta: f64,
    pub seed: u64,
    pub iters: usize,
    pub primal_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

/// Self-checks embedded in a scenario file. Host lists are sorted PM indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Expectations {
    pub state: Option<ChainState>,
    pub v_star: Option<usize>,
    pub launch: Option<Vec<usize>>,
    pub keep: Option<Vec<usize>>,
    pub terminate: Option<Vec<usize>>,
    pub cost_delta: Option<Sign>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub topology: Topology,
    /// Chain order.
    pub groups: Vec<VnfGroup>,
    pub phi: Vec<PhiSpec>,
    /// Group flagged as the event target, if any.
    pub target: Option<usize>,
    /// Free resources per PM.
    pub pm_free: Vec<ResourceVec>,
    pub event: TrafficEvent,
    pub solver: SolverSpec,
    pub expect: Option<Expectations>,
}

/// Parses `P<n>` (one-based) into a PM index.
pub fn parse_pm(name: &str, topology: &Topology) -> Result<usize, ScenarioError> {
    let index = name
        .trim()
        .strip_prefix(['P', 'p'])
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| ScenarioError::Invalid(format!("'{}' is not a PM name like P3", name)))?;
    if index > topology.pm_count() {
        return Err(ScenarioError::Invalid(format!(
            "{} does not exist; the topology has {} PMs",
            name,
            topology.pm_count()
        )));
    }
    Ok(index - 1)
}

fn parse_pms(names: &[String], topology: &Topology) -> Result<Vec<usize>, ScenarioError> {
    names.iter().map(|n| parse_pm(n, topology)).collect()
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_owned(), source })?;
        let mut s = Self::from_toml(&text)?;
        if s.name.is_empty() {
            s.name = path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        }
        Ok(s)
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let root: FileRoot = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        Self::from_file(root)
    }

    fn from_file(root: FileRoot) -> Result<Self, ScenarioError> {
        let t = &root.topology;
        let costs = t.costs.map_or_else(LayerCosts::default, |[a, b, c]| LayerCosts { pm_tor: a, tor_agg: b, agg_core: c });
        let topology = build_fat_tree(t.k, t.pms_per_rack, costs, t.bandwidth.unwrap_or(f64::INFINITY))?;
        if root.groups.is_empty() {
            return Err(ScenarioError::Invalid("at least one [[group]] is required".into()));
        }
        let flagged: Vec<usize> = root.groups.iter().enumerate().filter(|(_, g)| g.target).map(|(i, _)| i).collect();
        if flagged.len() > 1 {
            return Err(ScenarioError::Invalid("more than one group is marked as target".into()));
        }
        let target = flagged.first().copied();

        let hosts: Vec<Vec<usize>> = root
            .groups
            .iter()
            .map(|g| g.vms.iter().map(|vm| parse_pm(&vm.pm, &topology)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        let mut next_id = 0u32;
        let mut groups = Vec::with_capacity(root.groups.len());
        let mut phi = Vec::with_capacity(root.groups.len());
        for (i, g) in root.groups.iter().enumerate() {
            let around = |pms: &Option<Vec<String>>, neighbour: Option<usize>, side: &str| match (pms, neighbour) {
                (Some(names), _) => parse_pms(names, &topology),
                (None, Some(j)) => Ok(sorted(hosts[j].clone())),
                (None, None) => Err(ScenarioError::Invalid(format!("group {} needs an explicit {} list", i + 1, side))),
            };
            let ingress = around(&g.ingress, i.checked_sub(1), "ingress")?;
            let egress = around(&g.egress, (i + 1 < hosts.len()).then_some(i + 1), "egress")?;
            let vnf_type = g.vnf.unwrap_or(i as u32 + 1);
            let mut online = Vec::with_capacity(g.vms.len());
            for (vm, &pm) in g.vms.iter().zip(&hosts[i]) {
                let mut v = VmInstance::online(next_id, pm, g.capacity.clone(), vm.util.clone());
                v.chain = g.chain;
                v.vnf_type = vnf_type;
                online.push(v);
                next_id += 1;
            }
            let mut offline_pool = Vec::with_capacity(g.pool);
            for _ in 0..g.pool {
                let mut v = VmInstance::offline(next_id, g.capacity.clone());
                v.chain = g.chain;
                v.vnf_type = vnf_type;
                offline_pool.push(v);
                next_id += 1;
            }
            let mut thresholds = BTreeMap::new();
            for r in g.capacity.keys() {
                thresholds.insert(r.clone(), Thresholds::default());
            }
            for (r, &[hot, warm, cold]) in &g.thresholds {
                thresholds.insert(r.clone(), Thresholds::new(hot, warm, cold).map_err(|_| StateError::BadThresholds { resource: r.clone() })?);
            }
            let p = match &g.phi {
                FilePhi::Value(v) => PhiSpec::Fixed(*v),
                FilePhi::Keyword(k) if k == "auto" => PhiSpec::Auto,
                FilePhi::Keyword(k) => return Err(ScenarioError::Invalid(format!("phi must be a number or \"auto\", got \"{}\"", k))),
            };
            let candidate_pms = match &g.candidates {
                Some(names) => sorted(parse_pms(names, &topology)?),
                None => Vec::new(),
            };
            groups.push(VnfGroup {
                chain: g.chain,
                vnf_type,
                online,
                offline_pool,
                ingress_pms: ingress,
                egress_pms: egress,
                thresholds,
                gamma: g.gamma,
                phi: p.resolve(g.vms.len()),
                omega: g.omega.clone(),
                candidate_pms,
            });
            phi.push(p);
        }

        let mut pm_free = Vec::with_capacity(topology.pm_count());
        let default_free = |g: &VnfGroup| -> ResourceVec {
            g.online.first().map(|vm| vm.capacity.clone()).unwrap_or_default()
        };
        for pm in topology.pms() {
            let mut free = match &root.resources.free {
                Some(f) => f.clone(),
                None => default_free(&groups[target.unwrap_or(0)]),
            };
            let restricted = groups.iter().any(|g| !g.candidate_pms.is_empty() && !g.candidate_pms.contains(&pm));
            if restricted {
                free.values_mut().for_each(|v| *v = 0.0);
            }
            pm_free.push(free);
        }
        for (name, free) in &root.resources.pm {
            let pm = parse_pm(name, &topology)?;
            pm_free[pm] = free.clone();
        }

        let e = &root.event;
        if !(e.traffic >= 0.0) || !e.traffic.is_finite() {
            return Err(ScenarioError::Invalid(format!("event traffic must be nonnegative, got {}", e.traffic)));
        }
        if let Some(s) = e.scale {
            if !(s >= 0.0) {
                return Err(ScenarioError::Invalid(format!("event scale must be nonnegative, got {}", s)));
            }
        }
        let event = TrafficEvent { base: e.traffic, extra: e.extra.unwrap_or(1), scale: e.scale, v_star: e.v_star };

        let s = &root.solver;
        let solver = SolverSpec {
            kind: s.kind.parse().map_err(ScenarioError::Invalid)?,
            beta: s.beta,
            seed: s.seed,
            iters: s.iters,
            primal_tol: s.primal_tol,
        };
        let expect = root.expect.as_ref().map(|x| parse_expect(x, &topology)).transpose()?;

        Ok(Scenario {
            name: root.name.clone().unwrap_or_default(),
            description: root.description.clone(),
            topology,
            groups,
            phi,
            target,
            pm_free,
            event,
            solver,
            expect,
        })
    }

    /// Detected state and the group it applies to.
    pub fn detect(&self) -> Result<(ChainState, Option<usize>), ScenarioError> {
        match self.target {
            Some(t) => {
                let state = classify_group(&self.groups[t])?;
                Ok((state, (state != ChainState::Normal).then_some(t)))
            }
            None => Ok(classify_chain(&self.groups)?),
        }
    }

    /// The scaling problem for group `g` in `state`.
    pub fn problem(&self, g: usize, state: ChainState) -> Result<ScalingProblem, ScenarioError> {
        let group = &self.groups[g];
        let mode = match state {
            ChainState::Overload => ScalingMode::Overload,
            ChainState::Underload => ScalingMode::Underload,
            ChainState::Normal => return Err(ScenarioError::Invalid("a normal group is not scaled".into())),
        };
        let traffic = self.event.traffic(state);
        let v_star = match self.event.v_star {
            Some(v) => v,
            None if traffic > 0.0 => {
                let needed = required_instances(group, traffic)?;
                match mode {
                    ScalingMode::Overload => needed.max(group.online.len()),
                    ScalingMode::Underload => needed.min(group.online.len()),
                }
            }
            None => group.online.len(),
        };
        let mut group = group.clone();
        group.phi = self.phi[g].resolve(v_star);
        let mut p = ScalingProblem::new(self.topology.clone(), group, traffic, v_star, mode);
        p.pm_free = self.pm_free.clone();
        Ok(p)
    }

    /// Share cap of the pre-event configuration of group `g`.
    pub fn baseline_phi(&self, g: usize) -> f64 {
        self.phi[g].resolve(self.groups[g].online.len())
    }
}

fn parse_expect(x: &FileExpect, topology: &Topology) -> Result<Expectations, ScenarioError> {
    let state = x
        .state
        .as_deref()
        .map(|s| match s.to_ascii_lowercase().as_str() {
            "overload" => Ok(ChainState::Overload),
            "underload" => Ok(ChainState::Underload),
            "normal" => Ok(ChainState::Normal),
            other => Err(ScenarioError::Invalid(format!("unknown expected state '{}'", other))),
        })
        .transpose()?;
    let hosts = |v: &Option<Vec<String>>| v.as_ref().map(|n| parse_pms(n, topology).map(sorted)).transpose();
    let cost_delta = x
        .cost_delta
        .as_deref()
        .map(|s| match s {
            "+" | "positive" => Ok(Sign::Positive),
            "-" | "negative" => Ok(Sign::Negative),
            other => Err(ScenarioError::Invalid(format!("cost_delta must be \"+\" or \"-\", got '{}'", other))),
        })
        .transpose()?;
    Ok(Expectations {
        state,
        v_star: x.v_star,
        launch: hosts(&x.launch)?,
        keep: hosts(&x.keep)?,
        terminate: hosts(&x.terminate)?,
        cost_delta,
    })
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

/// Command-line overrides applied on top of a scenario's solver section.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub beta: Option<f64>,
    pub seed: Option<u64>,
    pub iters: Option<usize>,
    pub solver: Option<SolverKind>,
    pub out_dir: Option<PathBuf>,
    pub time_budget: Option<Duration>,
}

impl Overrides {
    fn apply(&self, spec: &SolverSpec) -> SolverSpec {
        SolverSpec {
            kind: self.solver.unwrap_or(spec.kind),
            beta: self.beta.unwrap_or(spec.beta),
            seed: self.seed.unwrap_or(spec.seed),
            iters: self.iters.unwrap_or(spec.iters),
            primal_tol: spec.primal_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverStats {
    pub solver: String,
    pub variables: usize,
    pub constraints: usize,
    /// Simplex pivots, branch-and-bound nodes or ADMM rounds.
    pub iterations: usize,
    pub runtime: Duration,
    pub objective: f64,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct AdmmSummary {
    pub lp_objective: f64,
    /// Relative gap to the central optimum after each iteration.
    pub gaps: Vec<f64>,
    pub trace: AdmmTrace,
    pub permutations: String,
}

impl AdmmSummary {
    pub fn final_gap(&self) -> f64 {
        self.gaps.last().copied().unwrap_or(f64::NAN)
    }
}

/// Everything one scenario run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub state: ChainState,
    pub target: Option<usize>,
    pub traffic: Option<f64>,
    pub v_star: Option<usize>,
    pub model: Option<String>,
    pub old_config: Option<String>,
    pub new_config: Option<String>,
    /// Present iff the state is not normal.
    pub decision: Option<ScalingDecision>,
    pub stats: Vec<SolverStats>,
    pub admm: Option<AdmmSummary>,
    pub warnings: Vec<String>,
    pub expectation_failures: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    /// 0 when every embedded expectation holds, 5 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.expectation_failures.is_empty() {
            0
        } else {
            5
        }
    }
}

fn relative_gap(value: f64, reference: f64) -> f64 {
    let diff = (value - reference).abs();
    if reference.abs() > 1e-12 {
        diff / reference.abs()
    } else {
        diff
    }
}

fn lp_stats(name: &str, model: &lp::LpModel, sol: &LpSolution, runtime: Duration) -> SolverStats {
    SolverStats {
        solver: name.into(),
        variables: model.num_vars(),
        constraints: model.num_rows(),
        iterations: sol.pivots,
        runtime,
        objective: sol.objective_value,
        status: format!("{:?}", sol.status).to_lowercase(),
    }
}

/// Turns an exact placement into actions against the current configuration.
pub fn milp_decision(p: &ScalingProblem, mp: &MilpProblem, sol: &MilpSolution) -> Result<ScalingDecision, ScenarioError> {
    if !sol.has_incumbent() {
        return Err(ScenarioError::Infeasible(format!("exact model finished {:?} without a placement", sol.status)));
    }
    let topo = &p.topology;
    let mut instances = Vec::new();
    let mut actions = Vec::new();
    for (d, inst) in mp.instances.iter().enumerate() {
        let host = sol.placement.hosts[d];
        let current = p.group.online.iter().find(|vm| vm.id == inst.vm).and_then(|vm| vm.host_pm());
        if let Some(h) = host {
            instances.push(InstanceDecision { instance: d, vm: inst.vm, host: h, share: sol.point[mp.alpha[d][h]], interest: 1.0 });
        }
        match (current, host) {
            (Some(c), Some(h)) if c == h => actions.push(Action::Keep { vm: inst.vm, pm: h }),
            (Some(c), Some(h)) => actions.push(Action::Migrate { vm: inst.vm, from: c, to: h }),
            (Some(c), None) => actions.push(Action::Terminate { vm: inst.vm, pm: c }),
            (None, Some(h)) => actions.push(Action::Launch { vm: inst.vm, pm: h }),
            (None, None) => {}
        }
    }
    let flows = sol.flows(mp, topo);
    let forwarding_cost = forwarding_cost_of(&flows, topo)?;
    Ok(ScalingDecision {
        mode: p.mode,
        v_star: instances.len(),
        instances,
        actions,
        flows,
        forwarding_cost,
        baseline_cost: None,
        cost_delta: None,
        warnings: Vec::new(),
    })
}

/// `ingress -> (hosts) -> egress`, one entry per VM; `*` marks new hosts.
pub fn config_string(topo: &Topology, ingress: &[usize], hosts: &[(usize, bool)], egress: &[usize]) -> String {
    let names = |pms: &[usize]| pms.iter().map(|&p| topo.node(p).to_string()).collect::<Vec<_>>().join(", ");
    let mut hosts = hosts.to_vec();
    hosts.sort_unstable();
    let middle: Vec<String> =
        hosts.iter().map(|&(p, new)| format!("{}{}", if new { "*" } else { "" }, topo.node(p))).collect();
    format!("{} -> ({}) -> {}", names(ingress), middle.join(", "), names(egress))
}

fn new_hosts(decision: &ScalingDecision) -> Vec<(usize, bool)> {
    decision
        .actions
        .iter()
        .filter_map(|a| match *a {
            Action::Keep { pm, .. } => Some((pm, false)),
            Action::Launch { pm, .. } => Some((pm, true)),
            Action::Migrate { to, .. } => Some((to, true)),
            Action::Terminate { .. } => None,
        })
        .collect()
}

/// Runs a parsed scenario: detect, pick the model for the state, solve with
/// the requested solvers, decode, and check embedded expectations.
pub fn run_loaded(scenario: &Scenario, overrides: &Overrides) -> Result<RunReport, ScenarioError> {
    let spec = overrides.apply(&scenario.solver);
    let budget = overrides.time_budget.unwrap_or_else(time_budget);
    let (state, target) = scenario.detect()?;
    let mut report = RunReport {
        scenario: scenario.name.clone(),
        state,
        target,
        traffic: None,
        v_star: None,
        model: None,
        old_config: None,
        new_config: None,
        decision: None,
        stats: Vec::new(),
        admm: None,
        warnings: Vec::new(),
        expectation_failures: Vec::new(),
        files: Vec::new(),
    };
    if let Some(g) = target {
        solve_target(scenario, g, state, &spec, budget, &mut report)?;
    }
    if let Some(expect) = &scenario.expect {
        report.expectation_failures = check_expectations(expect, &report, &scenario.topology);
    }
    if let Some(dir) = &overrides.out_dir {
        write_outputs(dir, scenario, &mut report)?;
    }
    Ok(report)
}

fn solve_target(
    scenario: &Scenario,
    g: usize,
    state: ChainState,
    spec: &SolverSpec,
    budget: Duration,
    report: &mut RunReport,
) -> Result<(), ScenarioError> {
    let p = scenario.problem(g, state)?;
    p.validate()?;
    let topo = &p.topology;
    report.traffic = Some(p.traffic);
    report.v_star = Some(p.v_star);
    let online: Vec<(usize, bool)> = p.group.online.iter().filter_map(|vm| vm.host_pm()).map(|h| (h, false)).collect();
    report.old_config = Some(config_string(topo, &p.group.ingress_pms, &online, &p.group.egress_pms));
    let baseline = scaling::baseline_cost(&p, scenario.event.base, scenario.baseline_phi(g))?;
    let deadline = Instant::now() + budget;

    let want_lp = matches!(spec.kind, SolverKind::Lp | SolverKind::Rpadmm | SolverKind::All);
    let want_milp = matches!(spec.kind, SolverKind::Milp | SolverKind::All);
    let want_admm = matches!(spec.kind, SolverKind::Rpadmm | SolverKind::All);

    let mut lp_decision = None;
    let mut lp_objective = None;
    if want_lp {
        let start = Instant::now();
        let model = build_relaxed(&p)?;
        let opts = SolveOptions { deadline: Some(deadline), ..SolveOptions::default() };
        let sol = lp::solve_with(&model.lp, &opts).map_err(|e| match e {
            LpError::TimeLimit => ScenarioError::Infeasible("relaxed model exceeded the time budget".into()),
            e => ScalingError::from(e).into(),
        })?;
        let runtime = start.elapsed();
        let name = format!("lp-{}", p.mode);
        report.stats.push(lp_stats(&name, &model.lp, &sol, runtime));
        let decision = decode(&sol, &model, &p)?;
        lp_objective = Some(sol.objective_value);
        lp_decision = Some(decision);
        report.model = Some(format!("relaxed {} LP", p.mode));
    }

    let mut milp_dec = None;
    if want_milp {
        let start = Instant::now();
        let mp = build_milp(&p)?;
        let opts = MilpOptions { deadline: Some(deadline), ..MilpOptions::default() };
        let sol = solve_milp(&mp, &opts)?;
        report.stats.push(SolverStats {
            solver: "milp".into(),
            variables: mp.lp.num_vars(),
            constraints: mp.lp.num_rows(),
            iterations: sol.nodes,
            runtime: start.elapsed(),
            objective: sol.total,
            status: format!("{:?}", sol.status).to_lowercase(),
        });
        if sol.status != MilpStatus::Optimal {
            report.warnings.push(format!("exact model stopped early: {:?}", sol.status));
        }
        milp_dec = Some(milp_decision(&p, &mp, &sol)?);
        if spec.kind == SolverKind::Milp {
            report.model = Some(format!("exact MILP ({} penalties)", p.mode));
        }
    }

    let mut admm_dec = None;
    if want_admm {
        if p.mode != ScalingMode::Overload {
            report.warnings.push("the distributed solver covers overload only; skipped".into());
        } else {
            let cfg = AdmmConfig {
                beta: spec.beta,
                max_iters: spec.iters,
                primal_tol: spec.primal_tol,
                seed: spec.seed,
                ..AdmmConfig::default()
            };
            let start = Instant::now();
            let (system, result) = rpadmm::run(&p, &cfg)?;
            let runtime = start.elapsed();
            let reference = lp_objective.expect("central LP runs with the distributed solver");
            let gaps = result.trace.records.iter().map(|r| relative_gap(r.objective, reference)).collect();
            report.stats.push(SolverStats {
                solver: "rpadmm".into(),
                variables: system.lp.num_vars(),
                constraints: system.lp.num_rows(),
                iterations: result.trace.records.len(),
                runtime,
                objective: result.objective,
                status: format!("max violation {:.3e}", result.last().map_or(0.0, |r| r.max_violation)),
            });
            let point = system.relaxed_point(&result.point).to_vec();
            let sol = LpSolution { status: LpStatus::Optimal, point, objective_value: result.objective, pivots: 0 };
            match decode(&sol, &system.relaxed, &p) {
                Ok(d) => admm_dec = Some(d),
                Err(e) => report.warnings.push(format!("distributed point could not be decoded: {}", e)),
            }
            report.admm =
                Some(AdmmSummary { lp_objective: reference, gaps, permutations: result.trace.permutation_log(), trace: result.trace });
        }
    }

    let mut decision = match spec.kind {
        SolverKind::Milp => milp_dec,
        SolverKind::Rpadmm if admm_dec.is_some() => {
            report.model = Some("distributed RP-ADMM".into());
            admm_dec
        }
        SolverKind::Rpadmm => {
            report.warnings.push("reporting the central LP decision instead".into());
            lp_decision
        }
        _ => lp_decision,
    }
    .ok_or_else(|| ScenarioError::Invalid("no solver produced a decision".into()))?;
    decision.set_baseline(baseline);
    report.warnings.extend(decision.warnings.iter().cloned());
    report.new_config = Some(config_string(topo, &p.group.ingress_pms, &new_hosts(&decision), &p.group.egress_pms));
    report.decision = Some(decision);
    Ok(())
}

/// Mismatches between a report and the scenario's expectations.
pub fn check_expectations(expect: &Expectations, report: &RunReport, topo: &Topology) -> Vec<String> {
    let mut out = Vec::new();
    let names = |v: &[usize]| v.iter().map(|&p| topo.node(p).to_string()).collect::<Vec<_>>().join(", ");
    if let Some(s) = expect.state {
        if s != report.state {
            out.push(format!("state: expected {}, got {}", s, report.state));
        }
    }
    if let Some(v) = expect.v_star {
        if report.v_star != Some(v) {
            out.push(format!("v*: expected {}, got {:?}", v, report.v_star));
        }
    }
    let d = report.decision.as_ref();
    let check = |label: &str, want: &Option<Vec<usize>>, got: Option<Vec<usize>>, out: &mut Vec<String>| {
        if let Some(w) = want {
            let g = got.unwrap_or_default();
            if *w != g {
                out.push(format!("{}: expected [{}], got [{}]", label, names(w), names(&g)));
            }
        }
    };
    check("launch", &expect.launch, d.map(|d| d.launch_hosts()), &mut out);
    check("keep", &expect.keep, d.map(|d| sorted(d.kept().into_iter().map(|(_, p)| p).collect())), &mut out);
    check("terminate", &expect.terminate, d.map(|d| sorted(d.terminated().into_iter().map(|(_, p)| p).collect())), &mut out);
    if let Some(sign) = expect.cost_delta {
        let delta = d.and_then(|d| d.cost_delta);
        let ok = match (sign, delta) {
            (Sign::Positive, Some(x)) => x > 0.0,
            (Sign::Negative, Some(x)) => x < 0.0,
            _ => false,
        };
        if !ok {
            out.push(format!("cost delta: expected {:?}, got {:?}", sign, delta));
        }
    }
    out
}

fn write_file(dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<(), ScenarioError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| ScenarioError::Io { path: path.clone(), source })?;
    files.push(path);
    Ok(())
}

fn write_outputs(dir: &Path, scenario: &Scenario, report: &mut RunReport) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir).map_err(|source| ScenarioError::Io { path: dir.to_owned(), source })?;
    let topo = &scenario.topology;
    let mut files = Vec::new();
    let csv_err = |e: csv::Error| ScenarioError::Invalid(format!("csv: {}", e));
    if let Some(d) = &report.decision {
        write_file(dir, "decisions.csv", &d.to_csv(topo).map_err(csv_err)?, &mut files)?;
        write_file(dir, "flows.csv", &d.flows.to_csv(topo).map_err(csv_err)?, &mut files)?;
    }
    if let Some(a) = &report.admm {
        write_file(dir, "trace.csv", &trace_with_gaps(a), &mut files)?;
        write_file(dir, "permutations.txt", &a.permutations, &mut files)?;
    }
    files.push(dir.join("report.txt"));
    report.files = files;
    let text = report.to_string();
    fs::write(dir.join("report.txt"), text).map_err(|source| ScenarioError::Io { path: dir.join("report.txt"), source })?;
    Ok(())
}

/// The ADMM trace CSV with a relative-gap column appended.
pub fn trace_with_gaps(a: &AdmmSummary) -> String {
    let mut out = String::new();
    for (i, line) in a.trace.to_csv().lines().enumerate() {
        out.push_str(line);
        if i == 0 {
            out.push_str(",gap");
        } else {
            let _ = write!(out, ",{}", a.gaps.get(i - 1).copied().unwrap_or(f64::NAN));
        }
        out.push('\n');
    }
    out
}

/// Loads and runs a scenario file.
pub fn run_scenario(path: &Path, overrides: &Overrides) -> Result<RunReport, ScenarioError> {
    let scenario = Scenario::load(path)?;
    run_loaded(&scenario, overrides)
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario      {}", self.scenario)?;
        match self.target {
            Some(g) => writeln!(f, "state         {} (group {})", self.state, g + 1)?,
            None => writeln!(f, "state         {}", self.state)?,
        }
        if self.decision.is_none() {
            writeln!(f, "no scaling needed; no model solved")?;
        }
        if let Some(t) = self.traffic {
            writeln!(f, "traffic       {}", t)?;
        }
        if let Some(v) = self.v_star {
            writeln!(f, "v*            {}", v)?;
        }
        if let Some(m) = &self.model {
            writeln!(f, "model         {}", m)?;
        }
        if let (Some(old), Some(new)) = (&self.old_config, &self.new_config) {
            writeln!(f, "old config    {}", old)?;
            writeln!(f, "new config    {}", new)?;
        }
        if let Some(d) = &self.decision {
            write!(f, "fwd cost      {:.4}", d.forwarding_cost)?;
            if let (Some(b), Some(delta)) = (d.baseline_cost, d.cost_delta) {
                write!(f, " (baseline {:.4}, {:+.1}%)", b, 100.0 * delta)?;
            }
            writeln!(f)?;
            for a in &d.actions {
                match *a {
                    Action::Keep { vm, pm } => writeln!(f, "  keep       vm{} on P{}", vm, pm + 1)?,
                    Action::Launch { vm, pm } => writeln!(f, "  launch     vm{} on P{}", vm, pm + 1)?,
                    Action::Terminate { vm, pm } => writeln!(f, "  terminate  vm{} on P{}", vm, pm + 1)?,
                    Action::Migrate { vm, from, to } => writeln!(f, "  migrate    vm{} P{} -> P{}", vm, from + 1, to + 1)?,
                }
            }
        }
        if !self.stats.is_empty() {
            writeln!(f, "{:<16}{:>10}{:>12}{:>8}{:>12}{:>16}  status", "solver", "variables", "constraints", "iters", "runtime", "objective")?;
            for s in &self.stats {
                writeln!(
                    f,
                    "{:<16}{:>10}{:>12}{:>8}{:>11.3}s{:>16.6}  {}",
                    s.solver,
                    s.variables,
                    s.constraints,
                    s.iterations,
                    s.runtime.as_secs_f64(),
                    s.objective,
                    s.status
                )?;
            }
        }
        if let Some(a) = &self.admm {
            writeln!(f, "admm gap      {:.4}% after {} iterations (central optimum {:.6})", 100.0 * a.final_gap(), a.gaps.len(), a.lp_objective)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning       {}", w)?;
        }
        if self.expectation_failures.is_empty() {
            writeln!(f, "expectations  ok")?;
        } else {
            for e in &self.expectation_failures {
                writeln!(f, "FAILED        {}", e)?;
            }
        }
        for p in &self.files {
            writeln!(f, "wrote         {}", p.display())?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Topology sweep
// ---------------------------------------------------------------------------

/// Size and solve time of one model in a sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTiming {
    pub variables: usize,
    pub constraints: usize,
    /// `None` when the budget ran out or the model was too large.
    pub seconds: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub switches: usize,
    pub pms: usize,
    /// Flow variables `n` and `m` over every arc and instance.
    pub flow_variables: usize,
    pub milp: ModelTiming,
    pub overload: ModelTiming,
    pub underload: ModelTiming,
}

/// Published reference rows: k, switches, PMs, variables, MILP/overload/
/// underload constraints and run times in seconds (`None` = N/A).
#[allow(clippy::approx_constant)]
pub const REFERENCE_ROWS: [(usize, usize, usize, usize, [usize; 3], [Option<f64>; 3]); 6] = [
    (2, 5, 4, 120, [25, 68, 62], [Some(0.555), Some(0.075), Some(0.055)]),
    (4, 20, 16, 672, [315, 254, 188], [Some(5.064), Some(0.614), Some(0.318)]),
    (8, 80, 64, 4224, [1251, 998, 692], [Some(323.523), Some(14.977), Some(6.635)]),
    (16, 320, 256, 29184, [4995, 3974, 2708], [None, Some(974.235), Some(456.674)]),
    (32, 1280, 1024, 129024, [19971, 15878, 10772], [None, None, None]),
    (64, 5120, 4096, 466944, [79875, 63494, 43028], [None, None, None]),
];

/// The sweep workload on a `k`-ary fat-tree: two online VMs in different
/// pods, one offline VM, ingress on the first PM and egress on the last.
pub fn sweep_problem(k: usize, mode: ScalingMode) -> Result<ScalingProblem, ScenarioError> {
    let topo = build_fat_tree(k, 2, LayerCosts::default(), f64::INFINITY)?;
    let n = topo.pm_count();
    let res = |v: f64| -> ResourceVec { [("cpu".to_string(), v)].into_iter().collect() };
    let hosts = [1usize.min(n - 1), (n / 2).min(n - 1)];
    let online: Vec<VmInstance> =
        hosts.iter().enumerate().map(|(i, &h)| VmInstance::online(i as u32, h, res(0.55), res(0.95))).collect();
    let group = VnfGroup {
        chain: 1,
        vnf_type: 2,
        online,
        offline_pool: vec![VmInstance::offline(2, res(0.55))],
        ingress_pms: vec![0],
        egress_pms: vec![n - 1],
        thresholds: [("cpu".to_string(), Thresholds::default())].into_iter().collect(),
        gamma: 1.0,
        phi: 1.0,
        omega: res(0.1),
        candidate_pms: Vec::new(),
    };
    let (traffic, v_star) = match mode {
        ScalingMode::Overload => (15.0, 3),
        ScalingMode::Underload => (5.0, 1),
    };
    let mut p = ScalingProblem::new(topo, group, traffic, v_star, mode);
    p.phi = 1.0 / v_star as f64;
    p.group.phi = p.phi;
    p.pm_free = vec![res(0.55); n];
    Ok(p)
}

fn timed_lp(model: &lp::LpModel, deadline: Instant) -> ModelTiming {
    let start = Instant::now();
    let opts = SolveOptions { deadline: Some(deadline), ..SolveOptions::default() };
    let (seconds, note) = match lp::solve_with(model, &opts) {
        Ok(sol) => (Some(start.elapsed().as_secs_f64()), format!("{:?}", sol.status).to_lowercase()),
        Err(LpError::TimeLimit) => (None, "over budget".into()),
        Err(LpError::TooLarge { .. }) => (None, "too large for the dense tableau".into()),
        Err(e) => (None, e.to_string()),
    };
    ModelTiming { variables: model.num_vars(), constraints: model.num_rows(), seconds, note }
}

/// Builds and solves the three models on each fat-tree size, recording
/// their sizes and wall times. Each solve gets `budget`; an exhausted
/// budget is reported as N/A.
pub fn sweep_topologies(ks: &[usize], budget: Duration) -> Result<Vec<SweepRow>, ScenarioError> {
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let over = sweep_problem(k, ScalingMode::Overload)?;
        let under = sweep_problem(k, ScalingMode::Underload)?;
        let topo = &over.topology;
        let over_model = build_relaxed(&over)?;
        let under_model = build_relaxed(&under)?;
        let overload = timed_lp(&over_model.lp, Instant::now() + budget);
        let underload = timed_lp(&under_model.lp, Instant::now() + budget);

        let mp = build_milp(&over)?;
        let start = Instant::now();
        let opts = MilpOptions { deadline: Some(start + budget), ..MilpOptions::default() };
        let (seconds, note) = match solve_milp(&mp, &opts) {
            Ok(sol) if sol.status == MilpStatus::Optimal => (Some(start.elapsed().as_secs_f64()), "optimal".to_string()),
            Ok(sol) => (None, format!("{:?}", sol.status).to_lowercase()),
            Err(ScalingError::Lp(LpError::TooLarge { .. })) => (None, "too large for the dense tableau".into()),
            Err(e) => (None, e.to_string()),
        };
        rows.push(SweepRow {
            k,
            switches: topo.switch_count(),
            pms: topo.pm_count(),
            flow_variables: over_model.flows.var_count(),
            milp: ModelTiming { variables: mp.lp.num_vars(), constraints: mp.lp.num_rows(), seconds, note },
            overload,
            underload,
        });
    }
    Ok(rows)
}

/// Sweep rows as an aligned table with the published reference values.
pub fn format_sweep(rows: &[SweepRow]) -> String {
    let secs = |t: &ModelTiming| t.seconds.map_or_else(|| "N/A".to_string(), |s| format!("{:.3}", s));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3} {:>8} {:>6} {:>9} | {:>12} {:>9} | {:>12} {:>9} | {:>12} {:>9}",
        "k", "switches", "PMs", "flow vars", "MILP rows", "MILP s", "over rows", "over s", "under rows", "under s"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>3} {:>8} {:>6} {:>9} | {:>12} {:>9} | {:>12} {:>9} | {:>12} {:>9}",
            r.k,
            r.switches,
            r.pms,
            r.flow_variables,
            r.milp.constraints,
            secs(&r.milp),
            r.overload.constraints,
            secs(&r.overload),
            r.underload.constraints,
            secs(&r.underload)
        );
        if let Some(reference) = REFERENCE_ROWS.iter().find(|x| x.0 == r.k) {
            let s = |v: Option<f64>| v.map_or_else(|| "N/A".to_string(), |v| format!("{:.3}", v));
            let _ = writeln!(
                out,
                "{:>3} {:>8} {:>6} {:>9} | {:>12} {:>9} | {:>12} {:>9} | {:>12} {:>9}   (reference)",
                "", reference.1, reference.2, reference.3, reference.4[0], s(reference.5[0]), reference.4[1], s(reference.5[1]), reference.4[2], s(reference.5[2])
            );
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Solver comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub scenario: String,
    pub lp_objective: f64,
    pub admm: AdmmSummary,
    pub lp_runtime: Duration,
    pub admm_runtime: Duration,
}

impl CompareReport {
    pub fn final_gap(&self) -> f64 {
        self.admm.final_gap()
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario          {}", self.scenario)?;
        writeln!(f, "central optimum   {:.6} ({:.3}s)", self.lp_objective, self.lp_runtime.as_secs_f64())?;
        writeln!(f, "{:>5} {:>16} {:>10} {:>10}", "iter", "objective", "gap %", "max viol")?;
        for (r, g) in self.admm.trace.records.iter().zip(&self.admm.gaps) {
            writeln!(f, "{:>5} {:>16.6} {:>10.4} {:>10.4}", r.iteration, r.objective, 100.0 * g, r.max_violation)?;
        }
        writeln!(f, "final gap         {:.4}% ({:.3}s)", 100.0 * self.final_gap(), self.admm_runtime.as_secs_f64())
    }
}

/// Runs the central relaxed overload model and the distributed solver on the
/// same problem and reports the per-iteration relative gap.
pub fn compare_problem(p: &ScalingProblem, cfg: &AdmmConfig) -> Result<CompareReport, ScenarioError> {
    let start = Instant::now();
    let model = build_relaxed(p)?;
    let sol = lp::solve(&model.lp, lp::DEFAULT_TOL).map_err(ScalingError::from)?;
    if sol.status != LpStatus::Optimal {
        return Err(ScalingError::NotOptimal(sol.status).into());
    }
    let lp_runtime = start.elapsed();
    let start = Instant::now();
    let (_, result) = rpadmm::run(p, cfg)?;
    let admm_runtime = start.elapsed();
    let gaps = result.trace.records.iter().map(|r| relative_gap(r.objective, sol.objective_value)).collect();
    Ok(CompareReport {
        scenario: String::new(),
        lp_objective: sol.objective_value,
        admm: AdmmSummary { lp_objective: sol.objective_value, gaps, permutations: result.trace.permutation_log(), trace: result.trace },
        lp_runtime,
        admm_runtime,
    })
}

/// [`compare_problem`] on a scenario's overloaded group.
pub fn compare_solvers(scenario: &Scenario, overrides: &Overrides) -> Result<CompareReport, ScenarioError> {
    let spec = overrides.apply(&scenario.solver);
    let (state, target) = scenario.detect()?;
    let g = match (state, target) {
        (ChainState::Overload, Some(g)) => g,
        _ => return Err(ScenarioError::Invalid(format!("comparison needs an overloaded chain, detected {}", state))),
    };
    let p = scenario.problem(g, state)?;
    p.validate()?;
    let cfg = AdmmConfig { beta: spec.beta, seed: spec.seed, max_iters: spec.iters, primal_tol: spec.primal_tol, ..AdmmConfig::default() };
    let mut report = compare_problem(&p, &cfg)?;
    report.scenario = scenario.name.clone();
    if let Some(dir) = &overrides.out_dir {
        fs::create_dir_all(dir).map_err(|source| ScenarioError::Io { path: dir.to_owned(), source })?;
        let mut files = Vec::new();
        write_file(dir, "trace.csv", &trace_with_gaps(&report.admm), &mut files)?;
        write_file(dir, "permutations.txt", &report.admm.permutations, &mut files)?;
        write_file(dir, "report.txt", &report.to_string(), &mut files)?;
    }
    Ok(report)
}
