//! Library equivalent of `vnfscale run`: load a scenario, solve it with every
//! solver and write the report files.
//!
//! cargo run --release --example run_scenario -- crates/core/scenarios/row4_overload_v5.toml /tmp/out

use std::path::PathBuf;

use vnfscale::scenario::{run_scenario, Overrides, SolverKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let file = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/row4_overload_v5.toml"));
    let out_dir = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("vnfscale-example"));
    let overrides = Overrides { solver: Some(SolverKind::All), out_dir: Some(out_dir), ..Overrides::default() };
    let report = run_scenario(&file, &overrides)?;
    print!("{}", report);
    std::process::exit(report.exit_code());
}
