//! Exact solution of the costly-listen problem by policy enumeration, and
//! the planner agreement check built on it.
//!
//! Every deterministic policy tree of the given depth is evaluated exactly
//! on the hazard posterior. The constrained optimum over randomized policies
//! mixes at most two of these trees, because there is a single constraint.

use cpomdp_core::belief::initial_belief;
use cpomdp_core::problems::{CostlyListen, ListenAction, ListenParams};
use cpomdp_core::search::RandomRollout;
use cpomdp_core::{plan, StepSchedule};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::HarnessError;
use crate::harness::{episode_seed, EpisodeRngs};
use crate::planners::PlannerId;

/// Decision depth of the oracle problem.
pub const ORACLE_DEPTH: usize = 3;
/// Particles in the root belief handed to the planners.
pub const ORACLE_PARTICLES: usize = 1000;

/// A deterministic policy tree. `Listen` branches on (clear, alarm).
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyTree {
    End,
    Proceed,
    Listen(Box<PolicyTree>, Box<PolicyTree>),
}

impl PolicyTree {
    pub fn root_action(&self) -> Option<ListenAction> {
        match self {
            PolicyTree::End => None,
            PolicyTree::Proceed => Some(ListenAction::Proceed),
            PolicyTree::Listen(..) => Some(ListenAction::Listen),
        }
    }
}

/// All policy trees with `depth` decisions left.
pub fn enumerate(depth: usize) -> Vec<PolicyTree> {
    if depth == 0 {
        return vec![PolicyTree::End];
    }
    let sub = enumerate(depth - 1);
    let mut out = vec![PolicyTree::Proceed];
    for clear in &sub {
        for alarm in &sub {
            out.push(PolicyTree::Listen(Box::new(clear.clone()), Box::new(alarm.clone())));
        }
    }
    out
}

/// Expected discounted `(reward, cost)` of `tree` when the hazard has
/// probability `p_hazard`.
pub fn evaluate(params: &ListenParams, tree: &PolicyTree, p_hazard: f64) -> (f64, f64) {
    match tree {
        PolicyTree::End => (0.0, 0.0),
        PolicyTree::Proceed => (
            p_hazard * params.hazard_reward + (1.0 - p_hazard) * params.safe_reward,
            0.0,
        ),
        PolicyTree::Listen(clear, alarm) => {
            let q = params.accuracy;
            let p_alarm = p_hazard * q + (1.0 - p_hazard) * (1.0 - q);
            let mut reward = params.listen_reward;
            let mut cost = params.listen_cost;
            for (branch, mass, post) in [
                (alarm, p_alarm, p_hazard * q / p_alarm),
                (clear, 1.0 - p_alarm, p_hazard * (1.0 - q) / (1.0 - p_alarm)),
            ] {
                if mass > 0.0 {
                    let (r, c) = evaluate(params, branch, post);
                    reward += params.discount * mass * r;
                    cost += params.discount * mass * c;
                }
            }
            (reward, cost)
        }
    }
}

/// Optimal randomized policy: `(value, probability of listening first)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSolution {
    pub reward: f64,
    pub cost: f64,
    pub listen_probability: f64,
    pub feasible: bool,
}

impl OracleSolution {
    /// Root action carrying the larger share of the optimal mixture.
    pub fn action(&self) -> ListenAction {
        if self.listen_probability > 0.5 {
            ListenAction::Listen
        } else {
            ListenAction::Proceed
        }
    }
}

/// Best mixture of at most two deterministic trees whose expected cost is
/// within `budget`. Without a feasible mixture the cheapest tree is used.
pub fn solve(params: &ListenParams, depth: usize, budget: f64) -> OracleSolution {
    let trees = enumerate(depth);
    let points: Vec<(f64, f64, f64)> = trees
        .iter()
        .map(|t| {
            let (r, c) = evaluate(params, t, params.hazard_prior);
            let listen = f64::from(u8::from(t.root_action() == Some(ListenAction::Listen)));
            (r, c, listen)
        })
        .collect();
    let mut best: Option<OracleSolution> = None;
    let mut consider = |s: OracleSolution| {
        // prefer higher reward, then lower cost
        let better = best.is_none_or(|b| {
            s.reward > b.reward + 1e-12 || ((s.reward - b.reward).abs() <= 1e-12 && s.cost < b.cost - 1e-12)
        });
        if better {
            best = Some(s);
        }
    };
    for &(r, c, l) in &points {
        if c <= budget {
            consider(OracleSolution {
                reward: r,
                cost: c,
                listen_probability: l,
                feasible: true,
            });
        }
    }
    for &(ri, ci, li) in points.iter().filter(|p| p.1 <= budget) {
        for &(rj, cj, lj) in points.iter().filter(|p| p.1 > budget) {
            let w = (budget - ci) / (cj - ci);
            consider(OracleSolution {
                reward: (1.0 - w) * ri + w * rj,
                cost: budget,
                listen_probability: (1.0 - w) * li + w * lj,
                feasible: true,
            });
        }
    }
    best.unwrap_or_else(|| {
        let &(r, c, l) = points
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(b.0.total_cmp(&a.0)))
            .expect("at least one policy");
        OracleSolution {
            reward: r,
            cost: c,
            listen_probability: l,
            feasible: false,
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub planner: String,
    pub budget: f64,
    pub oracle_action: String,
    pub oracle_reward: f64,
    pub matches: usize,
    pub searches: usize,
    pub mean_lambda: f64,
}

impl OracleReport {
    pub fn agreement(&self) -> f64 {
        self.matches as f64 / self.searches as f64
    }
}

/// Runs the configured number of depth-limited searches per constrained
/// planner and budget, counting how often the chosen root action matches
/// the enumerated optimum.
pub fn run_oracle_test(cfg: &RunConfig) -> Result<Vec<OracleReport>, HarnessError> {
    let mut search = cfg.search.clone();
    search.iterations = cfg.oracle.iterations;
    search.max_depth = ORACLE_DEPTH;
    search.exploration = cfg.oracle.exploration;
    search.k_observation = cfg.oracle.k_observation;
    search.alpha_observation = cfg.oracle.alpha_observation;
    search.pf_particles = cfg.oracle.pf_particles;
    search.validate()?;
    let schedule = StepSchedule::new(cfg.oracle.a_step, cfg.schedule.b())?;
    let mut reports = Vec::new();
    for &budget in &cfg.oracle.budgets {
        let params = ListenParams {
            budget,
            ..ListenParams::default()
        };
        let model = CostlyListen::new(params.clone())?;
        let oracle = solve(&params, ORACLE_DEPTH, budget);
        for planner in [PlannerId::CpomcpDpw, PlannerId::Cpomcpow, PlannerId::CpftDpw] {
            let pc = planner.planner_config(&search, &[0.0], schedule);
            let outs: Vec<(bool, f64)> = (0..cfg.oracle.searches)
                .into_par_iter()
                .map(|i| {
                    let mut rngs = EpisodeRngs::new(episode_seed(cfg.seed, i));
                    let b0 = initial_belief(&model, ORACLE_PARTICLES, &mut rngs.filter)?;
                    let out = plan(&model, &b0, &[budget], &pc, &RandomRollout, &mut rngs.planner)?;
                    Ok((out.action == oracle.action(), out.diagnostics.lambda[0]))
                })
                .collect::<Result<_, HarnessError>>()?;
            let n = outs.len();
            reports.push(OracleReport {
                planner: planner.name().to_string(),
                budget,
                oracle_action: format!("{:?}", oracle.action()),
                oracle_reward: oracle.reward,
                matches: outs.iter().filter(|o| o.0).count(),
                searches: n,
                mean_lambda: outs.iter().map(|o| o.1).sum::<f64>() / n.max(1) as f64,
            });
        }
    }
    Ok(reports)
}
