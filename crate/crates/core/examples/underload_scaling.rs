//! Scale-in with the relaxed underload model. Prints the decision table the
//! CLI writes to decisions.csv.
//!
//! cargo run --example underload_scaling -- row2_underload

use std::path::PathBuf;

use vnfscale::scaling::{solve_relaxed, Action};
use vnfscale::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "row2_underload".into());
    let s = Scenario::load(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{}.toml", name)))?;
    let (state, target) = s.detect()?;
    let g = target.ok_or("chain is normal")?;
    let p = s.problem(g, state)?;
    let (_, sol, d) = solve_relaxed(&p, 1e-9)?;
    println!("{}: {} at T={}, keep {} of {} VMs", name, state, p.traffic, p.v_star, s.groups[g].online.len());
    println!("forwarding cost {:.2}", sol.objective_value);
    for a in &d.actions {
        match *a {
            Action::Keep { vm, pm } => println!("  keep       vm {} on {}", vm, p.topology.node(pm)),
            Action::Terminate { vm, pm } => println!("  terminate  vm {} on {}", vm, p.topology.node(pm)),
            Action::Launch { vm, pm } => println!("  launch     vm {} on {}", vm, p.topology.node(pm)),
            Action::Migrate { vm, from, to } => {
                println!("  migrate    vm {} {} -> {}", vm, p.topology.node(from), p.topology.node(to))
            }
        }
    }
    print!("\n{}", d.to_csv(&p.topology)?);
    Ok(())
}
