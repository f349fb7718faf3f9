//! The bundled simplex solver on a small production-planning LP.
//!
//! cargo run --example lp_basics

use vnfscale::lp::{self, LpModel, Relation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // maximize 3x + 5y  s.t.  x <= 4,  2y <= 12,  3x + 2y <= 18
    let mut m = LpModel::new();
    let x = m.add_var("x", 0.0, f64::INFINITY);
    let y = m.add_var("y", 0.0, f64::INFINITY);
    m.add_cost(x, -3.0);
    m.add_cost(y, -5.0);
    m.add_row("plant", "p1", vec![(x, 1.0)], Relation::Le, 4.0);
    m.add_row("plant", "p2", vec![(y, 2.0)], Relation::Le, 12.0);
    m.add_row("plant", "p3", vec![(x, 3.0), (y, 2.0)], Relation::Le, 18.0);

    print!("{}", m.to_lp_format());
    let sol = lp::solve(&m, lp::DEFAULT_TOL)?;
    println!("\nstatus {:?}, x = {}, y = {}, profit = {}", sol.status, sol.point[x], sol.point[y], -sol.objective_value);

    m.add_row("demand", "d1", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 20.0);
    let sol = lp::solve(&m, lp::DEFAULT_TOL)?;
    println!("with x + y >= 20: {:?}", sol.status);
    Ok(())
}
