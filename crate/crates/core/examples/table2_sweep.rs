//! Model sizes and solve times of the three models on growing fat-trees,
//! next to the published reference row. Timings are hardware dependent.
//!
//! VNFSCALE_TIME_BUDGET=60 cargo run --release --example table2_sweep -- 2 4 8

use vnfscale::scenario::{format_sweep, sweep_topologies, time_budget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut ks: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    if ks.is_empty() {
        ks = vec![2, 4, 8];
    }
    let budget = time_budget();
    println!("budget {}s per model\n", budget.as_secs());
    print!("{}", format_sweep(&sweep_topologies(&ks, budget)?));
    Ok(())
}
