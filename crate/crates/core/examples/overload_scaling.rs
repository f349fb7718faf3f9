//! Scale-out with the relaxed overload model: where do the extra instances
//! land and what does it cost compared with the old deployment?
//!
//! cargo run --example overload_scaling -- 10 1.2

use vnfscale::chain_state::{ResourceVec, Thresholds, VmInstance, VnfGroup};
use vnfscale::scaling::{solve_relaxed, Penalties, ScalingMode, ScalingProblem};
use vnfscale::topology::FatTreeSpec;

fn cpu(v: f64) -> ResourceVec {
    [("cpu".to_string(), v)].into_iter().collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>());
    let t0 = args.next().transpose()?.unwrap_or(10.0);
    let gamma = args.next().transpose()?.unwrap_or(1.2);
    let topo = FatTreeSpec::new(4).build()?;
    let group = VnfGroup {
        chain: 1,
        vnf_type: 2,
        online: vec![VmInstance::online(0, 1, cpu(0.55), cpu(0.95)), VmInstance::online(1, 4, cpu(0.55), cpu(0.7))],
        offline_pool: (2..5).map(|id| VmInstance::offline(id, cpu(0.55))).collect(),
        ingress_pms: vec![0],
        egress_pms: vec![3],
        thresholds: [("cpu".to_string(), Thresholds::default())].into_iter().collect(),
        gamma,
        phi: 0.5,
        omega: cpu(0.1),
        candidate_pms: Vec::new(),
    };

    let base = ScalingProblem::new(topo.clone(), group.clone(), t0, 2, ScalingMode::Overload).baseline(t0, 0.5);
    let (_, base_sol, _) = solve_relaxed(&base, 1e-9)?;
    println!("before: two instances on P2, P5, T={} costs {:.1}", t0, base_sol.objective_value);

    for extra in 1..=2 {
        let v = 2 + extra;
        let mut p = ScalingProblem::new(topo.clone(), group.clone(), t0 * (1.0 + 0.5 * extra as f64), v, ScalingMode::Overload);
        p.phi = 1.0 / v as f64;
        p.penalties = Penalties::overload();
        p.pm_free = vec![cpu(0.55); topo.pm_count()];
        let (model, _, mut d) = solve_relaxed(&p, 1e-9)?;
        d.set_baseline(base_sol.objective_value);
        let launched: Vec<String> = d.launch_hosts().iter().map(|&h| topo.node(h).to_string()).collect();
        println!(
            "v*={} T={:<4} rows={:<4} launch [{}] cost {:.1} ({:+.1}%)",
            v,
            p.traffic,
            model.lp.num_rows(),
            launched.join(", "),
            d.forwarding_cost,
            100.0 * d.cost_delta.unwrap()
        );
    }
    Ok(())
}
