mod common;

use common::{pt, random_scenario};
use pursuit_core::geometry::Point;
use pursuit_core::model::{active_set_k, ConstraintClass, Pursuer, Scenario};
use pursuit_core::presets::ExamplePreset;
use pursuit_core::sim::{
    plan_pursuers, random_admissible_evader, run_game, run_plan, ControlSchedule, GamePlan, PursuerLaw,
    PursuerStrategyChoice, SimConfig,
};
use pursuit_core::strategies::evader_guaranteed_plan;
use pursuit_core::value::{gamma_optimize, OptimizeConfig};
use pursuit_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg(dt: f64, gamma: f64) -> SimConfig {
    SimConfig { dt: Some(dt), gamma: Some(gamma), ..SimConfig::default() }
}

#[test]
fn zero_controls_give_initial_distance() {
    let s = ExamplePreset::DisjointAxes.scenario(4);
    let zeros = ControlSchedule::constant(s.theta, Point::zeros(4));
    let plan = plan_pursuers(
        &s,
        &PursuerStrategyChoice::OpenLoop(vec![zeros.clone(); s.pursuers.len()]),
        0.0,
        0.0,
    )
    .unwrap();
    let r = run_plan(&s, &plan, &zeros, &cfg(0.09, 0.0)).unwrap();
    let expected = s.pursuers.iter().map(|p| p.x0.dist(&s.y0)).fold(f64::INFINITY, f64::min);
    assert_eq!(r.payoff, expected);
    for p in &r.pursuers {
        assert!(p.trajectory.iter().all(|x| *x == p.trajectory[0]));
    }
}

#[test]
fn trajectories_have_steps_plus_one_points() {
    let s = ExamplePreset::SharedAxes.scenario(3);
    let ev = random_admissible_evader(&s, 5, 3, false).unwrap();
    // 9 / 0.007 is not an integer: the step is reduced to 9/1286
    let r = run_game(&s, &PursuerStrategyChoice::Theorem, &ev, &cfg(0.007, 1.9)).unwrap();
    assert_eq!(r.steps, 1286);
    assert!(r.dt <= 0.007);
    assert_eq!(r.evader_trajectory.len(), r.steps + 1);
    assert_eq!(r.evader_trajectory[0], s.y0);
    for (p, q) in r.pursuers.iter().zip(&s.pursuers) {
        assert_eq!(p.trajectory.len(), r.steps + 1);
        assert_eq!(p.trajectory[0], q.x0);
    }
    assert!(r.payoff >= 0.0);
}

#[test]
fn payoff_matches_final_points() {
    let s = ExamplePreset::SharedAxes.scenario(4);
    let ev = random_admissible_evader(&s, 7, 11, false).unwrap();
    let r = run_game(&s, &PursuerStrategyChoice::Theorem, &ev, &SimConfig::default()).unwrap();
    let y = r.evader_trajectory.last().unwrap();
    let recomputed = r
        .pursuers
        .iter()
        .map(|p| p.trajectory.last().unwrap().dist(y))
        .fold(f64::INFINITY, f64::min);
    assert_eq!(recomputed, r.payoff);
}

#[test]
fn endpoints_do_not_depend_on_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..10 {
        let s = random_scenario(3, 3, &mut rng);
        let ev = random_admissible_evader(&s, 6, seed, true).unwrap();
        let controls: Vec<_> = (0..3).map(|k| random_admissible_evader(&s, 4, 100 + seed * 7 + k, false).unwrap()).collect();
        let choice = PursuerStrategyChoice::OpenLoop(controls);
        let coarse = run_game(&s, &choice, &ev, &cfg(s.theta / 500.0, 0.0)).unwrap();
        let fine = run_game(&s, &choice, &ev, &cfg(s.theta / 1000.0, 0.0)).unwrap();
        let dy = coarse.evader_trajectory.last().unwrap().dist(fine.evader_trajectory.last().unwrap());
        assert!(dy <= 1e-12, "{dy}");
        for (a, b) in coarse.pursuers.iter().zip(&fine.pursuers) {
            assert!(a.trajectory.last().unwrap().dist(b.trajectory.last().unwrap()) <= 1e-12);
        }
    }
}

#[test]
fn lemma_endpoints_do_not_depend_on_step() {
    // geometric capture splits the step at the exact capture time
    let s = Scenario::new(
        2,
        2.0,
        1.0,
        pt(&[1.0, 0.5]),
        vec![Pursuer { id: 4, x0: pt(&[-1.0, 0.0]), constraint: ConstraintClass::geometric(1.5) }],
    )
    .unwrap();
    let ev = random_admissible_evader(&s, 3, 8, true).unwrap();
    let a = run_game(&s, &PursuerStrategyChoice::Lemma, &ev, &cfg(0.01, 0.0)).unwrap();
    let b = run_game(&s, &PursuerStrategyChoice::Lemma, &ev, &cfg(0.005, 0.0)).unwrap();
    let (xa, xb) = (a.pursuers[0].trajectory.last().unwrap(), b.pursuers[0].trajectory.last().unwrap());
    assert!(xa.dist(xb) <= 1e-12);
    let (ta, tb) = (a.pursuers[0].switch_time.unwrap(), b.pursuers[0].switch_time.unwrap());
    assert!((ta - tb).abs() <= 1e-12);
}

#[test]
fn frozen_pursuers_never_move() {
    // a far pursuer is outside the active set at the example value
    let mut s = ExamplePreset::SharedAxes.scenario(2);
    s.pursuers.push(Pursuer { id: 99, x0: pt(&[100.0, 0.0]), constraint: ConstraintClass::integral(2.0) });
    let gamma = gamma_optimize(&s, &OptimizeConfig::default()).unwrap().gamma;
    assert!(!active_set_k(&s, gamma).contains(&99));
    let ev = random_admissible_evader(&s, 4, 2, false).unwrap();
    let r = run_game(&s, &PursuerStrategyChoice::Theorem, &ev, &SimConfig::default()).unwrap();
    let far = r.pursuers.iter().find(|p| p.id == 99).unwrap();
    assert_eq!(far.law, "frozen");
    assert!(far.trajectory.iter().all(|x| *x == pt(&[100.0, 0.0])));
}

#[test]
fn integral_lemma_captures_random_evader() {
    // x0 close to y0 and rho > sigma: every terminal point is in the capture half-space
    let s = Scenario::new(
        3,
        2.0,
        1.0,
        pt(&[0.5, 0.0, 0.0]),
        vec![Pursuer { id: 1, x0: pt(&[0.0, 0.0, 0.0]), constraint: ConstraintClass::integral(3.0) }],
    )
    .unwrap();
    for seed in 0..20 {
        let ev = random_admissible_evader(&s, 1 + seed as usize % 6, seed, false).unwrap();
        let r = run_game(&s, &PursuerStrategyChoice::Lemma, &ev, &SimConfig::default()).unwrap();
        assert!(r.payoff <= 1e-6);
        assert!(r.pursuers[0].budget.ok);
    }
}

#[test]
fn theorem_straight_evader_example_d16() {
    let s = ExamplePreset::SharedAxes.scenario(16);
    let gv = gamma_optimize(&s, &OptimizeConfig::default()).unwrap();
    let eps = 1e-3;
    let plan = evader_guaranteed_plan(&s, &gv).unwrap();
    let ev = ControlSchedule::constant(s.theta, plan.control);
    let r = run_game(
        &s,
        &PursuerStrategyChoice::Theorem,
        &ev,
        &SimConfig { epsilon: eps, gamma: Some(gv.gamma), ..SimConfig::default() },
    )
    .unwrap();
    // envelope constant fixed once: C = 1
    let c = 1.0;
    assert!(r.payoff >= gv.gamma - 1e-3, "{} vs {}", r.payoff, gv.gamma);
    assert!(r.payoff <= gv.gamma + c * eps.sqrt(), "{} vs {}", r.payoff, gv.gamma);
    assert!(r.pursuers_admissible());
}

#[test]
fn geometric_lemma_needs_sigma_below_rho() {
    let s = ExamplePreset::GeometricOnly.scenario(2);
    let err = plan_pursuers(&s, &PursuerStrategyChoice::Lemma, 3.0, 1e-3).unwrap_err();
    assert!(matches!(err, Error::HypothesisViolated(_)));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn theorem_rejects_weak_geometric_pursuers_that_matter() {
    // only geometric pursuers, all with rho_bar below sigma: nothing to fall back on
    let s = ExamplePreset::GeometricOnly.scenario(2);
    let gamma = gamma_optimize(&s, &OptimizeConfig::default()).unwrap().gamma;
    let err = plan_pursuers(&s, &PursuerStrategyChoice::Theorem, gamma, 1e-3).unwrap_err();
    assert!(matches!(err, Error::HypothesisViolated(_)));

    // mixed, where dropping the geometric pursuers raises the value
    let mut s = ExamplePreset::SharedAxes.scenario(2);
    for p in &mut s.pursuers {
        if p.constraint.rho == 1.0 {
            p.x0 = p.x0.scaled(0.75);
        } else {
            p.x0 = p.x0.scaled(4.0);
        }
    }
    let gamma = gamma_optimize(&s, &OptimizeConfig::default()).unwrap().gamma;
    assert!(plan_pursuers(&s, &PursuerStrategyChoice::Theorem, gamma, 1e-3).is_err());
}

#[test]
fn theorem_demotes_irrelevant_geometric_pursuers() {
    let s = ExamplePreset::SharedAxes.scenario(4);
    let gamma = gamma_optimize(&s, &OptimizeConfig::default()).unwrap().gamma;
    let plan: GamePlan = plan_pursuers(&s, &PursuerStrategyChoice::Theorem, gamma, 1e-3).unwrap();
    assert_eq!(plan.demoted, vec![4, 5, 6, 7]);
    for (p, law) in s.pursuers.iter().zip(&plan.laws) {
        if p.constraint.rho == 1.0 {
            assert_eq!(*law, PursuerLaw::Frozen);
        } else {
            assert!(matches!(law, PursuerLaw::IntegralTheorem { .. }));
        }
    }
}

#[test]
fn over_budget_evader_is_flagged_not_rejected() {
    let s = ExamplePreset::SharedAxes.scenario(2);
    let ev = ControlSchedule::constant(s.theta, pt(&[1.0, 0.0]));
    let r = run_game(&s, &PursuerStrategyChoice::Theorem, &ev, &cfg(0.01, 2.4)).unwrap();
    assert!(!r.evader_budget.ok);
    assert!((r.evader_budget.margin - 5.0).abs() < 1e-9);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let s = ExamplePreset::SharedAxes.scenario(2);
    let ev = ControlSchedule::constant(s.theta, pt(&[1.0, 0.0, 0.0]));
    assert!(run_game(&s, &PursuerStrategyChoice::Theorem, &ev, &cfg(0.01, 1.0)).is_err());
    let ev = ControlSchedule::constant(1.0, pt(&[1.0, 0.0]));
    assert!(run_game(&s, &PursuerStrategyChoice::Theorem, &ev, &cfg(0.01, 1.0)).is_err());
    assert!(plan_pursuers(&s, &PursuerStrategyChoice::OpenLoop(vec![]), 0.0, 0.0).is_err());
}

#[test]
fn summary_has_documented_fields() {
    let s = ExamplePreset::SharedAxes.scenario(2);
    let ev = random_admissible_evader(&s, 2, 0, false).unwrap();
    let r = run_game(&s, &PursuerStrategyChoice::Theorem, &ev, &cfg(0.05, 2.4)).unwrap();
    let v = r.summary();
    for key in ["gamma", "payoff", "budgets", "switch_times", "admissibility"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}
