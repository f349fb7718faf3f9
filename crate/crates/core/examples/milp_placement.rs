//! Exact scaling with the mixed-integer model: penalties keep the hot VMs
//! running and pick where the new ones go.
//!
//! cargo run --example milp_placement -- row3_overload_v4

use std::path::PathBuf;

use vnfscale::milp::{build_milp, solve_milp, MilpOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "row3_overload_v4".into());
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{}.toml", name));
    let s = vnfscale::scenario::Scenario::load(&path)?;
    let (state, target) = s.detect()?;
    let p = s.problem(target.ok_or("chain is normal")?, state)?;

    let mp = build_milp(&p)?;
    println!(
        "{}: {} mode, v*={}, {} variables ({} binary), {} rows",
        name,
        p.mode,
        p.v_star,
        mp.lp.num_vars(),
        mp.binaries().len(),
        mp.lp.num_rows()
    );
    let sol = solve_milp(&mp, &MilpOptions::default())?;
    println!(
        "{:?} after {} nodes: deployment {:.1}, forwarding {:.3}, root bound {:.3}",
        sol.status, sol.nodes, sol.deployment_cost, sol.forwarding_cost, sol.root_bound
    );
    for (d, host) in sol.placement.hosts.iter().enumerate() {
        let kind = if sol.placement.online[d] { "online" } else { "pool" };
        let at = host.map_or("off".to_string(), |h| p.topology.node(h).to_string());
        println!("  vm {} ({:<6}) -> {}", d, kind, at);
    }
    print!("\n{}", sol.placement_csv(&mp, &p.topology)?);
    Ok(())
}
