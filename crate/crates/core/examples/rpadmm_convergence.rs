//! Distributed solve of the overload model with randomly permuted ADMM,
//! compared iteration by iteration with the central LP optimum.
//!
//! cargo run --release --example rpadmm_convergence -- 25 5 0
//! (iterations, beta, seed)

use std::path::PathBuf;

use vnfscale::rpadmm::{agent_partition, reformulate, AdmmConfig};
use vnfscale::scenario::{compare_problem, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let iters: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(25);
    let beta: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(5.0);
    let seed: u64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0);

    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/row4_overload_v5.toml");
    let s = Scenario::load(&path)?;
    let (state, target) = s.detect()?;
    let p = s.problem(target.unwrap(), state)?;

    let system = reformulate(&p)?;
    let agents = agent_partition(&system)?;
    let mut distinct: Vec<usize> = agents.iter().map(|a| a.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    println!(
        "{} blocks over {} agents, {} coupling rows",
        system.num_blocks(),
        distinct.len(),
        system.lp.num_rows()
    );

    let cfg = AdmmConfig { beta, seed, max_iters: iters, primal_tol: 0.0, ..AdmmConfig::default() };
    let report = compare_problem(&p, &cfg)?;
    let trace = &report.admm.trace;
    println!("central optimum {:.3}", report.lp_objective);
    println!("{:>5} {:>12} {:>8} {:>9}  worst family", "iter", "objective", "gap %", "max viol");
    for (r, gap) in trace.records.iter().zip(&report.admm.gaps) {
        let (worst, _) = r
            .violations
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        println!(
            "{:>5} {:>12.3} {:>8.2} {:>9.4}  {}",
            r.iteration,
            r.objective,
            100.0 * gap,
            r.max_violation,
            trace.families[worst]
        );
    }
    println!("messages per sweep: {}", trace.records[0].messages);
    Ok(())
}
