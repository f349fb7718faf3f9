mod common;

use common::{corpus, rel_close, scenario_problem};
use vnfscale::chain_state::ChainState;
use vnfscale::lp::{self, LpStatus};
use vnfscale::rpadmm::{reformulate, BlockKind};

#[test]
fn lift_preserves_the_optimum_on_the_corpus() {
    let mut checked = 0;
    for (name, s) in corpus() {
        let (state, target) = s.detect().unwrap();
        if state != ChainState::Overload {
            continue;
        }
        let p = s.problem(target.unwrap(), state).unwrap();
        let system = reformulate(&p).unwrap();
        let central = lp::solve(&system.relaxed.lp, lp::DEFAULT_TOL).unwrap();
        let lifted = lp::solve(&system.lp, lp::DEFAULT_TOL).unwrap();
        assert_eq!(central.status, LpStatus::Optimal, "{name}");
        assert_eq!(lifted.status, LpStatus::Optimal, "{name}");
        assert!(
            rel_close(central.objective_value, lifted.objective_value, 1e-6),
            "{name}: {} vs {}",
            central.objective_value,
            lifted.objective_value
        );
        checked += 1;
    }
    assert!(checked >= 8);
}

#[test]
fn auxiliary_totals_match_traffic() {
    let mut p = scenario_problem("row1_overload_v3");
    p.group.gamma = 1.0;
    p.traffic = 10.0;
    p.v_star = 3;
    let system = reformulate(&p).unwrap();
    let sol = lp::solve(&system.lp, lp::DEFAULT_TOL).unwrap();
    let total = |kind: BlockKind| -> f64 {
        system.kinds.iter().enumerate().filter(|(_, &k)| k == kind).map(|(v, _)| sol.point[v]).sum()
    };
    assert!((total(BlockKind::D) - 10.0).abs() < 1e-7);
    assert!((total(BlockKind::E) - 10.0).abs() < 1e-7);
}

#[test]
fn every_lifted_row_is_an_equality() {
    let p = scenario_problem("row4_overload_v5");
    let system = reformulate(&p).unwrap();
    assert!(system.lp.rows.iter().all(|r| r.relation == lp::Relation::Eq));
    assert_eq!(system.kinds.len(), system.lp.num_vars());
}
