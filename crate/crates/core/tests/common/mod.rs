#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vnfscale::chain_state::{ResourceVec, Thresholds, VmInstance, VnfGroup};
use vnfscale::lp::{self, LpStatus};
use vnfscale::milp::{MilpProblem, Placement};
use vnfscale::scaling::{Penalties, ScalingMode, ScalingProblem};
use vnfscale::scenario::Scenario;
use vnfscale::topology::{build_fat_tree, LayerCosts};

pub fn res(v: f64) -> ResourceVec {
    [("cpu".to_string(), v)].into_iter().collect()
}

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn corpus() -> Vec<(String, Scenario)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .expect("scenario directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), Scenario::load(&p).unwrap()))
        .collect()
}

pub fn load(name: &str) -> Scenario {
    Scenario::load(&scenario_dir().join(format!("{}.toml", name))).unwrap()
}

/// The scaling problem a scenario file leads to.
pub fn scenario_problem(name: &str) -> ScalingProblem {
    let s = load(name);
    let (state, target) = s.detect().unwrap();
    s.problem(target.expect("scenario is not normal"), state).unwrap()
}

/// Random exact-model instance on the 2-ary fat-tree with at most three
/// VMs, so at most twelve placement binaries.
pub fn random_k2(seed: u64, mode: ScalingMode) -> ScalingProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topo = build_fat_tree(2, 2, LayerCosts::default(), f64::INFINITY).unwrap();
    let n = topo.pm_count();
    let online_count = rng.gen_range(1..=2usize);
    let pool = rng.gen_range(1..=3 - online_count);
    let u = 0.5;
    let online: Vec<VmInstance> = (0..online_count)
        .map(|i| VmInstance::online(i as u32, rng.gen_range(0..n), res(u), res(0.5)))
        .collect();
    let offline: Vec<VmInstance> = (0..pool).map(|i| VmInstance::offline((online_count + i) as u32, res(u))).collect();
    let phi = [0.4, 0.5, 0.7, 1.0][rng.gen_range(0..4)];
    let group = VnfGroup {
        chain: 1,
        vnf_type: 1,
        online,
        offline_pool: offline,
        ingress_pms: vec![rng.gen_range(0..n)],
        egress_pms: vec![rng.gen_range(0..n)],
        thresholds: [("cpu".to_string(), Thresholds::default())].into_iter().collect(),
        gamma: rng.gen_range(0.5..1.5),
        phi,
        omega: res(0.05),
        candidate_pms: Vec::new(),
    };
    let traffic = rng.gen_range(1.0..20.0);
    let mut p = ScalingProblem::new(topo, group, traffic, online_count, mode);
    p.phi = phi;
    p.penalties = Penalties::for_mode(mode);
    p.pm_free = (0..n).map(|_| res([0.0, 0.5, 1.0][rng.gen_range(0..3)])).collect();
    p
}

/// Result of enumerating every binary assignment.
pub struct Enumeration {
    /// Best objective and its placement, if any assignment is feasible.
    pub best: Option<(f64, Placement)>,
    /// Placements of every feasible assignment.
    pub feasible: Vec<Placement>,
}

/// Exhaustive oracle: fixes every binary to each 0/1 pattern and solves the
/// remaining LP. Patterns placing one VM on two PMs break a single-host row
/// and are skipped without a solve.
pub fn enumerate(mp: &MilpProblem) -> Enumeration {
    let vms = mp.b.len();
    let pms = mp.b[0].len();
    let bits = vms * pms;
    assert!(bits <= 12, "oracle limited to twelve binaries, got {}", bits);
    let online: Vec<bool> = (0..vms).map(|d| mp.is_online(d)).collect();
    let mut best: Option<(f64, Placement)> = None;
    let mut feasible = Vec::new();
    for mask in 0u32..(1 << bits) {
        let mut hosts = vec![None; vms];
        let mut valid = true;
        for d in 0..vms {
            for q in 0..pms {
                if mask >> (d * pms + q) & 1 == 1 {
                    if hosts[d].is_some() {
                        valid = false;
                    }
                    hosts[d] = Some(q);
                }
            }
        }
        if !valid {
            continue;
        }
        let mut model = mp.lp.clone();
        for d in 0..vms {
            for q in 0..pms {
                let v = mp.b[d][q];
                let val = if hosts[d] == Some(q) { 1.0 } else { 0.0 };
                model.vars[v].lower = val;
                model.vars[v].upper = val;
            }
        }
        let sol = lp::solve(&model, lp::DEFAULT_TOL).unwrap();
        if sol.status != LpStatus::Optimal {
            continue;
        }
        let placement = Placement { hosts, online: online.clone() };
        if best.as_ref().is_none_or(|(b, _)| sol.objective_value < *b) {
            best = Some((sol.objective_value, placement.clone()));
        }
        feasible.push(placement);
    }
    Enumeration { best, feasible }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
