//! Classifies the bundled chains as overloaded, underloaded or normal and
//! shows how many instances the detected group needs.
//!
//! cargo run --example detect_state

use std::path::PathBuf;

use vnfscale::chain_state::{classify_group, required_instances};
use vnfscale::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for name in ["detect_overload", "detect_underload", "all_normal"] {
        let s = Scenario::load(&dir.join(format!("{}.toml", name)))?;
        println!("{}", name);
        for (i, g) in s.groups.iter().enumerate() {
            let utils: Vec<String> = g
                .online
                .iter()
                .map(|vm| format!("P{}@{:.2}", vm.host_pm().unwrap() + 1, vm.utilization.as_ref().unwrap()["cpu"]))
                .collect();
            println!("  group {}  {:<9} [{}]", i, classify_group(g)?.to_string(), utils.join(", "));
        }
        let (state, target) = s.detect()?;
        match target {
            Some(g) => {
                let traffic = s.event.traffic(state);
                println!(
                    "  chain {} at group {}, T={} needs {} instance(s)\n",
                    state,
                    g,
                    traffic,
                    required_instances(&s.groups[g], traffic)?
                );
            }
            None => println!("  chain {}\n", state),
        }
    }
    Ok(())
}
