//! Builds fat-trees of a few sizes and prints their shape and link costs.
//!
//! cargo run --example fat_tree -- 4

use vnfscale::topology::{FatTreeSpec, NodeId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(4);
    for k in [2, 4, 8].into_iter().chain((k > 8).then_some(k)) {
        let t = FatTreeSpec::new(k).build()?;
        println!(
            "k={:<2} switches={:<4} PMs={:<4} links={:<5} arcs={}",
            k,
            t.switch_count(),
            t.pm_count(),
            t.link_count(),
            t.arcs().len()
        );
    }

    let t = FatTreeSpec::new(k).build()?;
    let p1 = NodeId::pm(0);
    let tor = t.neighbors(p1)?[0];
    let agg = t.neighbors(tor)?.into_iter().find(|n| n.kind != p1.kind).unwrap();
    let core = t.neighbors(agg)?.into_iter().last().unwrap();
    println!("\npath from {} upwards:", p1);
    for (a, b) in [(p1, tor), (tor, agg), (agg, core)] {
        println!("  {} -> {}  cost {}", a, b, t.forwarding_cost(a, b)?);
    }
    match t.forwarding_cost(p1, NodeId::pm(1)) {
        Ok(c) => println!("  P1 -> P2 {}", c),
        Err(e) => println!("  P1 -> P2: {}", e),
    }

    if k <= 4 {
        println!("\n{}", t.to_text());
    }
    Ok(())
}
