//! Acceptance suite. Runs every criterion in order, prints one line each and
//! exits nonzero if any of them fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{corpus, enumerate, load, random_k2, rel_close, res, scenario_problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vnfscale::chain_state::{classify_group, ChainState, Thresholds, VmInstance, VnfGroup};
use vnfscale::lp::{self, LpStatus};
use vnfscale::milp::{build_milp, solve_milp, MilpOptions, MilpStatus, Placement};
use vnfscale::rpadmm::{reformulate, run, scalar_block_update, AdmmConfig};
use vnfscale::scaling::{build_relaxed, ScalingMode};
use vnfscale::scenario::{compare_problem, run_loaded, Overrides, Sign};
use vnfscale::topology::{build_fat_tree, LayerCosts};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn topology_counts() -> Outcome {
    for (k, switches, pms) in [(2, 5, 4), (4, 20, 16), (8, 80, 64), (16, 320, 256)] {
        let t = build_fat_tree(k, 2, LayerCosts::default(), f64::INFINITY).map_err(|e| e.to_string())?;
        check(
            t.switch_count() == switches && t.pm_count() == pms,
            format!("k={k}: {}/{} instead of {switches}/{pms}", t.switch_count(), t.pm_count()),
        )?;
    }
    Ok("5/4, 20/16, 80/64, 320/256".into())
}

fn state_machine() -> Outcome {
    let over = load("detect_overload");
    let under = load("detect_underload");
    for s in [&over, &under] {
        for g in &s.groups {
            for t in g.thresholds.values() {
                check(*t == Thresholds::new(0.9, 0.8, 0.3).unwrap(), format!("{}: thresholds {:?}", s.name, t))?;
            }
        }
    }
    check(over.detect().map_err(|e| e.to_string())?.0 == ChainState::Overload, "overload example")?;
    check(under.detect().map_err(|e| e.to_string())?.0 == ChainState::Underload, "underload example")?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let u = rng.gen_range(0.0..=1.0);
        let group = VnfGroup {
            chain: 1,
            vnf_type: 1,
            online: vec![VmInstance::online(0, 0, res(1.0), res(u))],
            offline_pool: Vec::new(),
            ingress_pms: vec![0],
            egress_pms: vec![0],
            thresholds: [("cpu".to_string(), Thresholds::default())].into_iter().collect(),
            gamma: 1.0,
            phi: 1.0,
            omega: res(0.1),
            candidate_pms: Vec::new(),
        };
        let state = classify_group(&group).map_err(|e| e.to_string())?;
        check(state != ChainState::Underload, format!("single VM at {u} classified underload"))?;
    }
    Ok("overload / underload examples, 1000 single-VM groups never underload".into())
}

fn milp_oracle() -> Outcome {
    let mut feasible = 0;
    let mut instances = 0;
    for seed in 100..130 {
        for mode in [ScalingMode::Overload, ScalingMode::Underload] {
            let p = random_k2(seed, mode);
            let mp = build_milp(&p).map_err(|e| e.to_string())?;
            check(mp.binaries().len() <= 12, "more than 12 binaries")?;
            instances += 1;
            let sol = solve_milp(&mp, &MilpOptions::default()).map_err(|e| e.to_string())?;
            match enumerate(&mp).best {
                Some((best, _)) => {
                    feasible += 1;
                    check(
                        sol.status == MilpStatus::Optimal && rel_close(sol.total, best, 1e-6),
                        format!("seed {seed} {mode}: {:?} {} vs {}", sol.status, sol.total, best),
                    )?;
                }
                None => check(sol.status == MilpStatus::Infeasible, format!("seed {seed} {mode}: oracle infeasible"))?,
            }
        }
    }
    check(feasible >= 20, format!("only {feasible} feasible instances"))?;
    Ok(format!("{feasible} feasible of {instances} instances match enumeration"))
}

fn penalty_behavior() -> Outcome {
    let keeps_all = |pl: &Placement| pl.hosts.iter().zip(&pl.online).all(|(h, &on)| !on || h.is_some());
    let no_new = |pl: &Placement| pl.hosts.iter().zip(&pl.online).all(|(h, &on)| on || h.is_none());
    let mut exercised = 0;
    for (mode, seeds, rule) in [
        (ScalingMode::Overload, 200..230, &keeps_all as &dyn Fn(&Placement) -> bool),
        (ScalingMode::Underload, 300..330, &no_new),
    ] {
        for seed in seeds {
            let mp = build_milp(&random_k2(seed, mode)).map_err(|e| e.to_string())?;
            let oracle = enumerate(&mp);
            if !oracle.feasible.iter().any(|pl| rule(pl)) {
                continue;
            }
            exercised += 1;
            let (_, best) = oracle.best.expect("feasible");
            check(rule(&best), format!("seed {seed} {mode}: oracle optimum breaks the rule"))?;
            let sol = solve_milp(&mp, &MilpOptions::default()).map_err(|e| e.to_string())?;
            check(rule(&sol.placement), format!("seed {seed} {mode}: branch and bound breaks the rule"))?;
        }
    }
    Ok(format!("{exercised} instances respect the penalty ordering"))
}

fn structural_decisions() -> Outcome {
    let pms = |v: &[usize]| -> BTreeSet<String> { v.iter().map(|p| format!("P{}", p + 1)).collect() };
    let set = |v: &[&str]| -> BTreeSet<String> { v.iter().map(|s| s.to_string()).collect() };
    let cases: [(&str, Option<&[&str]>, Option<&[&str]>, Option<&[&str]>); 5] = [
        ("row1_overload_v3", Some(&["P4"]), None, None),
        ("row1_overload_v4", Some(&["P1", "P4"]), None, None),
        ("row3_overload_v4", Some(&["P3", "P4"]), None, None),
        ("row1_underload", None, None, Some(&["P5"])),
        ("row3_underload", None, Some(&["P1"]), None),
    ];
    for (name, launch, keep, terminate) in cases {
        let report = run_loaded(&load(name), &Overrides::default()).map_err(|e| format!("{name}: {e}"))?;
        let d = report.decision.ok_or(format!("{name}: no decision"))?;
        let hosts = |v: Vec<(u32, usize)>| pms(&v.into_iter().map(|(_, p)| p).collect::<Vec<_>>());
        if let Some(l) = launch {
            check(hosts(d.launched()) == set(l), format!("{name}: launched {:?}", hosts(d.launched())))?;
        }
        if let Some(k) = keep {
            check(hosts(d.kept()) == set(k), format!("{name}: kept {:?}", hosts(d.kept())))?;
        }
        if let Some(t) = terminate {
            check(hosts(d.terminated()) == set(t), format!("{name}: terminated {:?}", hosts(d.terminated())))?;
        }
    }
    let mut signs = 0;
    for (name, s) in corpus() {
        if !name.starts_with("row") {
            continue;
        }
        let report = run_loaded(&s, &Overrides::default()).map_err(|e| format!("{name}: {e}"))?;
        let delta = report.decision.and_then(|d| d.cost_delta).ok_or(format!("{name}: no cost delta"))?;
        let want = if report.state == ChainState::Overload { Sign::Positive } else { Sign::Negative };
        let got = if delta > 0.0 { Sign::Positive } else { Sign::Negative };
        check(delta != 0.0 && got == want, format!("{name}: cost delta {delta:+.4}"))?;
        signs += 1;
    }
    Ok(format!("5 host sets exact, {signs} cost-delta signs match"))
}

fn exact_lift() -> Outcome {
    let mut n = 0;
    let mut worst = 0.0f64;
    for (name, s) in corpus() {
        let (state, target) = s.detect().map_err(|e| e.to_string())?;
        if state != ChainState::Overload {
            continue;
        }
        let p = s.problem(target.unwrap(), state).map_err(|e| e.to_string())?;
        let system = reformulate(&p).map_err(|e| e.to_string())?;
        let a = lp::solve(&system.relaxed.lp, lp::DEFAULT_TOL).map_err(|e| e.to_string())?;
        let b = lp::solve(&system.lp, lp::DEFAULT_TOL).map_err(|e| e.to_string())?;
        check(a.status == LpStatus::Optimal && b.status == LpStatus::Optimal, format!("{name}: not optimal"))?;
        let rel = (a.objective_value - b.objective_value).abs() / a.objective_value.abs().max(1.0);
        check(rel <= 1e-6, format!("{name}: {} vs {}", a.objective_value, b.objective_value))?;
        worst = worst.max(rel);
        n += 1;
    }
    Ok(format!("{n} overload instances, worst relative difference {worst:.1e}"))
}

/// The ten 25-iteration runs of the scenario-4 geometry.
fn scenario4_runs() -> Result<Vec<vnfscale::scenario::CompareReport>, String> {
    let p = scenario_problem("row4_overload_v5");
    (0..10)
        .map(|seed| {
            let cfg = AdmmConfig { seed, beta: 5.0, max_iters: 25, ..AdmmConfig::default() };
            compare_problem(&p, &cfg).map_err(|e| e.to_string())
        })
        .collect()
}

fn admm_convergence(runs: &[vnfscale::scenario::CompareReport]) -> Outcome {
    let gaps: Vec<f64> = runs.iter().map(|r| r.final_gap()).collect();
    let good = gaps.iter().filter(|&&g| g <= 0.01).count();
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    let summary = format!("{good}/10 seeds within 1% by iteration 25 (worst gap {:.1}%)", 100.0 * worst);
    check(good >= 9, summary.clone())?;
    Ok(summary)
}

fn violation_decay(runs: &[vnfscale::scenario::CompareReport]) -> Outcome {
    let mut good = 0;
    let mut worst = 0.0f64;
    for r in runs {
        let records = &r.admm.trace.records;
        let (first, last) = (&records[0], records.last().unwrap());
        worst = worst.max(last.max_violation);
        if last.violations.iter().all(|&v| v <= 0.05) && last.max_violation < first.max_violation {
            good += 1;
        }
    }
    let summary = format!("{good}/10 runs have every family at or below 0.05 (worst {worst:.3})");
    check(good == 10, summary.clone())?;
    Ok(summary)
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for draw in 0..1000 {
        let c = rng.gen_range(-20.0..20.0);
        let beta = rng.gen_range(0.5..10.0);
        let terms: Vec<(f64, f64)> =
            (0..rng.gen_range(1..4)).map(|_| (rng.gen_range(0.1..3.0) * [-1.0, 1.0][rng.gen_range(0..2)], rng.gen_range(-10.0..10.0))).collect();
        let lo = rng.gen_range(-5.0..5.0);
        let hi = lo + rng.gen_range(0.5..10.0);
        let f = |x: f64| c * x + 0.5 * beta * terms.iter().map(|&(a, r)| (a * x + r).powi(2)).sum::<f64>();
        let x = scalar_block_update(c, &terms, lo, hi, beta).map_err(|e| e.to_string())?;
        let (mut gx, mut gf) = (lo, f64::INFINITY);
        let steps = ((hi - lo) / 1e-4).ceil() as usize;
        for i in 0..=steps {
            let g = (lo + i as f64 * 1e-4).min(hi);
            if f(g) < gf {
                gf = f(g);
                gx = g;
            }
        }
        check((x - gx).abs() <= 1e-3 && f(x) <= gf + 1e-9 * gf.abs().max(1.0), format!("draw {draw}: {x} vs grid {gx}"))?;
    }

    let mut solved = 0;
    for (name, s) in corpus() {
        let (state, target) = s.detect().map_err(|e| e.to_string())?;
        let Some(g) = target else { continue };
        let p = s.problem(g, state).map_err(|e| e.to_string())?;
        let model = build_relaxed(&p).map_err(|e| e.to_string())?;
        let sol = lp::solve(&model.lp, lp::DEFAULT_TOL).map_err(|e| e.to_string())?;
        if sol.status != LpStatus::Optimal {
            continue;
        }
        solved += 1;
        let topo = &p.topology;
        for d in 0..model.flows.instance_count {
            for sw in topo.switches() {
                for var in [0, 1] {
                    let idx = |a: usize| if var == 0 { model.flows.n(d, a) } else { model.flows.m(d, a) };
                    let inflow: f64 = topo.in_arcs(sw).iter().map(|&a| sol.point[idx(a)]).sum();
                    let outflow: f64 = topo.out_arcs(sw).iter().map(|&a| sol.point[idx(a)]).sum();
                    check((inflow - outflow).abs() <= 1e-6, format!("{name}: conservation at node {sw}"))?;
                }
            }
        }
        let share: f64 = model.alpha.iter().map(|col| sol.point[col[0].1]).sum();
        check((share - 1.0).abs() <= 1e-8, format!("{name}: share total {share}"))?;
    }

    let topo = build_fat_tree(4, 2, LayerCosts::default(), f64::INFINITY).map_err(|e| e.to_string())?;
    for a in 0..topo.node_count() {
        for b in 0..topo.node_count() {
            let (i, j) = (topo.node(a), topo.node(b));
            check(topo.forwarding_cost(i, j).ok() == topo.forwarding_cost(j, i).ok(), format!("cost {i} {j} asymmetric"))?;
        }
    }

    let p = scenario_problem("row4_overload_v5");
    let cfg = AdmmConfig { seed: 4, ..AdmmConfig::default() };
    let (_, x) = run(&p, &cfg).map_err(|e| e.to_string())?;
    let (_, y) = run(&p, &cfg).map_err(|e| e.to_string())?;
    check(x.trace.to_csv() == y.trace.to_csv() && x.point == y.point, "trace differs for a fixed seed")?;

    Ok(format!("1000 grid draws, {solved} optimal central solutions, symmetry, determinism"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let runs = scenario4_runs();
    let admm_time = start.elapsed();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>, Duration)> = vec![
        ("topology counts", Box::new(topology_counts), Duration::from_secs(1)),
        ("state machine", Box::new(state_machine), Duration::from_secs(1)),
        ("MILP oracle equivalence", Box::new(milp_oracle), Duration::from_secs(120)),
        ("penalty behavior", Box::new(penalty_behavior), Duration::from_secs(120)),
        ("structural decisions", Box::new(structural_decisions), Duration::from_secs(30)),
        ("exact lift", Box::new(exact_lift), Duration::from_secs(60)),
        ("RP-ADMM convergence", Box::new(|| runs.clone().and_then(|r| admm_convergence(&r))), Duration::from_secs(120)),
        ("violation decay", Box::new(|| runs.clone().and_then(|r| violation_decay(&r))), Duration::from_secs(120)),
        ("property suites", Box::new(property_suites), Duration::from_secs(180)),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut outcome = f();
        let mut elapsed = t.elapsed();
        if i == 6 || i == 7 {
            elapsed += admm_time;
        }
        if outcome.is_ok() && elapsed > *limit {
            outcome = Err(format!("took {:.1}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()));
        }
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {} ({:.2}s): {}", i + 1, name, elapsed.as_secs_f64(), detail),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {} ({:.2}s): {}", i + 1, name, elapsed.as_secs_f64(), detail);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
