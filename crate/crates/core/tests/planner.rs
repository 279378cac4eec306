mod common;

use common::rng;
use cpomdp_core::belief::initial_belief;
use cpomdp_core::problems::{GoalSeekingRollout, LightDark, Scalarized, ScalarizedRollout};
use cpomdp_core::tree::{ActionStats, Tree, ROOT};
use cpomdp_core::{plan, CoreError, PlannerConfig, SearchConfig, Variant};
use proptest::prelude::*;

fn quick(iterations: usize) -> SearchConfig {
    SearchConfig {
        iterations,
        max_depth: 10,
        ..Default::default()
    }
}

const VARIANTS: [Variant; 3] = [Variant::Pomcpow, Variant::PftDpw, Variant::PomcpDpw];

#[test]
fn huge_budget_keeps_lambda_at_zero() {
    let m = LightDark::default();
    let b = initial_belief(&m, 500, &mut rng(0)).unwrap();
    for v in VARIANTS {
        let cfg = PlannerConfig::new(v, quick(300));
        let out = plan(&m, &b, &[1e9], &cfg, &GoalSeekingRollout, &mut rng(1)).unwrap();
        assert_eq!(out.diagnostics.lambda, vec![0.0]);
        assert_eq!(out.diagnostics.iterations, 300);
        let total: u32 = out.diagnostics.root.iter().map(|a| a.visits).sum();
        assert_eq!(total, out.diagnostics.root_visits);
    }
}

#[test]
fn huge_budget_reduces_to_the_unconstrained_planner() {
    let m = LightDark::default();
    let b = initial_belief(&m, 500, &mut rng(0)).unwrap();
    for v in VARIANTS {
        for seed in 0..3 {
            let constrained = PlannerConfig::new(v, quick(400));
            let free = PlannerConfig::new(v, quick(400)).unconstrained();
            let x = plan(&m, &b, &[1e9], &constrained, &GoalSeekingRollout, &mut rng(seed)).unwrap();
            let y = plan(&m, &b, &[1e9], &free, &GoalSeekingRollout, &mut rng(seed)).unwrap();
            assert_eq!(x.action, y.action);
            assert_eq!(x.diagnostics.root.len(), y.diagnostics.root.len());
            for (p, q) in x.diagnostics.root.iter().zip(&y.diagnostics.root) {
                assert_eq!(p.action, q.action);
                assert_eq!(p.visits, q.visits);
                assert_eq!(p.reward_value.to_bits(), q.reward_value.to_bits());
            }
        }
    }
}

#[test]
fn scalarized_model_has_nothing_to_enforce() {
    let m = Scalarized::new(LightDark::default(), vec![25.0]).unwrap();
    let b = initial_belief(&m, 300, &mut rng(0)).unwrap();
    let rollout = ScalarizedRollout(GoalSeekingRollout);
    for v in VARIANTS {
        let x = plan(&m, &b, &[], &PlannerConfig::new(v, quick(300)), &rollout, &mut rng(4)).unwrap();
        let y = plan(
            &m,
            &b,
            &[],
            &PlannerConfig::new(v, quick(300)).unconstrained(),
            &rollout,
            &mut rng(4),
        )
        .unwrap();
        assert_eq!(x, y);
        assert!(x.diagnostics.lambda.is_empty());
    }
}

#[test]
fn tight_budget_raises_lambda() {
    let m = LightDark::default();
    let b = initial_belief(&m, 500, &mut rng(0)).unwrap();
    let cfg = PlannerConfig::new(Variant::Pomcpow, quick(2000));
    let out = plan(&m, &b, &[0.0], &cfg, &cpomdp_core::search::RandomRollout, &mut rng(2)).unwrap();
    assert!(out.diagnostics.lambda[0] > 0.0);
    assert!((out.policy.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn plan_rejects_bad_inputs() {
    let m = LightDark::default();
    let b = initial_belief(&m, 10, &mut rng(0)).unwrap();
    let zero = PlannerConfig::new(Variant::Pomcpow, quick(0));
    assert!(matches!(
        plan(&m, &b, &[0.1], &zero, &GoalSeekingRollout, &mut rng(0)),
        Err(CoreError::InvalidConfig(_))
    ));
    let ok = PlannerConfig::new(Variant::Pomcpow, quick(5));
    assert!(matches!(
        plan(&m, &b, &[], &ok, &GoalSeekingRollout, &mut rng(0)),
        Err(CoreError::CostDimension { .. })
    ));
    let mut wrong_lambda = ok.clone();
    wrong_lambda.lambda_init = vec![1.0, 2.0];
    assert!(plan(&m, &b, &[0.1], &wrong_lambda, &GoalSeekingRollout, &mut rng(0)).is_err());
}

#[test]
fn plans_are_seed_reproducible() {
    let m = LightDark::default();
    let b = initial_belief(&m, 200, &mut rng(0)).unwrap();
    for v in VARIANTS {
        let cfg = PlannerConfig::new(v, quick(200));
        let x = plan(&m, &b, &[0.1], &cfg, &GoalSeekingRollout, &mut rng(9)).unwrap();
        let y = plan(&m, &b, &[0.1], &cfg, &GoalSeekingRollout, &mut rng(9)).unwrap();
        assert_eq!(x, y);
    }
}

proptest! {
    #[test]
    fn backups_are_running_means(
        samples in prop::collection::vec((0usize..6, -100.0f64..100.0, 0.0f64..5.0, 0.0f64..5.0, 0.0f64..1.0), 1..300),
    ) {
        let mut tree: Tree<usize, ()> = Tree::new((), 2);
        let ids: Vec<_> = (0..6).map(|i| tree.add_action(ROOT, i)).collect();
        let mut shadow: Vec<Vec<(f64, f64, f64, f64)>> = vec![Vec::new(); 6];
        for (i, v, c0, c1, imm) in &samples {
            tree.action_mut(ids[*i]).stats.record(*v, &[*c0, *c1], &[*imm, 0.0]);
            shadow[*i].push((*v, *c0, *c1, *imm));
        }
        for (id, hist) in ids.iter().zip(&shadow) {
            let s: &ActionStats = &tree.action(*id).stats;
            prop_assert_eq!(s.visits as usize, hist.len());
            if hist.is_empty() {
                continue;
            }
            let n = hist.len() as f64;
            let mean = |f: fn(&(f64, f64, f64, f64)) -> f64| hist.iter().map(f).sum::<f64>() / n;
            prop_assert!((s.reward_value - mean(|h| h.0)).abs() < 1e-9);
            prop_assert!((s.cost_value[0] - mean(|h| h.1)).abs() < 1e-9);
            prop_assert!((s.cost_value[1] - mean(|h| h.2)).abs() < 1e-9);
            prop_assert!((s.immediate_cost[0] - mean(|h| h.3)).abs() < 1e-9);
            prop_assert!(s.cost_value.iter().all(|c| *c >= 0.0));
        }
    }
}
