//! Replays the four placement rows on the 4-ary fat-tree: old and new
//! configuration, baseline forwarding cost normalized by the largest one,
//! and the cost change of each scaling decision.
//!
//! cargo run --release --example table3

use std::path::PathBuf;

use vnfscale::scenario::{run_loaded, Overrides, Scenario};

const ROWS: [(&str, &[&str]); 4] = [
    ("row1", &["row1_overload_v3", "row1_overload_v4", "row1_underload"]),
    ("row2", &["row2_overload_v4", "row2_overload_v5", "row2_underload"]),
    ("row3", &["row3_overload_v3", "row3_overload_v4", "row3_underload"]),
    ("row4", &["row4_overload_v4", "row4_overload_v5", "row4_underload"]),
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut rows = Vec::new();
    for (label, files) in ROWS {
        let mut cells = Vec::new();
        let mut base = None;
        let mut old = String::new();
        for f in files {
            let r = run_loaded(&Scenario::load(&dir.join(format!("{}.toml", f)))?, &Overrides::default())?;
            let d = r.decision.as_ref().ok_or("no decision")?;
            base.get_or_insert(d.baseline_cost.unwrap());
            if old.is_empty() {
                old = r.old_config.clone().unwrap_or_default();
            }
            let tag = match r.state {
                vnfscale::chain_state::ChainState::Overload => format!("v*={}", r.v_star.unwrap()),
                _ => "under".to_string(),
            };
            cells.push(format!("{:<6} {:<40} {:>+7.1}%", tag, r.new_config.unwrap_or_default(), 100.0 * d.cost_delta.unwrap()));
        }
        rows.push((label, old, base.unwrap(), cells));
    }
    let max = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    for (label, old, base, cells) in rows {
        println!("{}  {}", label, old);
        println!("      baseline cost {:.1}, normalized {:.2}", base, base / max);
        for c in cells {
            println!("      {}", c);
        }
    }
    Ok(())
}
