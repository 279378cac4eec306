//! The `Plan` loop: tree search interleaved with projected dual ascent on λ.

use alloc::vec::Vec;

use rand::Rng;

use crate::belief::ParticleBelief;
use crate::dual::{lagrangian_score, ActionScoreInput, LambdaState, StepSchedule};
use crate::model::{Costs, Cpomdp};
use crate::search::pft::PftSearch;
use crate::search::pomcp_dpw::PomcpDpwSearch;
use crate::search::pomcpow::PomcpowSearch;
use crate::search::{select_action, RolloutPolicy, SearchConfig, SearchContext, SearchCounters, Variant};
use crate::tree::{Tree, ROOT};
use crate::{CoreError, Result};

/// Everything `plan` needs besides the model, belief and budget.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub variant: Variant,
    pub search: SearchConfig,
    /// Initial multipliers `λ₀`; empty means all zeros.
    pub lambda_init: Vec<f64>,
    pub schedule: StepSchedule,
    /// When false the budget is ignored: λ stays empty and the action
    /// policies maximize reward alone (the unconstrained planners).
    pub constrained: bool,
}

impl PlannerConfig {
    pub fn new(variant: Variant, search: SearchConfig) -> Self {
        Self {
            variant,
            search,
            lambda_init: Vec::new(),
            schedule: StepSchedule::default(),
            constrained: true,
        }
    }

    pub fn unconstrained(mut self) -> Self {
        self.constrained = false;
        self
    }

    pub fn validate(&self, n_costs: usize) -> Result<()> {
        self.search.validate()?;
        if !self.lambda_init.is_empty() && self.lambda_init.len() != n_costs {
            return Err(CoreError::InvalidConfig("lambda_init length must match the cost count"));
        }
        Ok(())
    }
}

/// Root-level statistics of one child action after the search.
#[derive(Debug, Clone, PartialEq)]
pub struct RootActionStats<A> {
    pub action: A,
    pub visits: u32,
    pub reward_value: f64,
    pub cost_value: Costs,
    pub immediate_cost: Costs,
    /// `Q − λᵀQ_C` with the final λ and no exploration bonus.
    pub lagrangian_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanDiagnostics<A> {
    pub lambda: Vec<f64>,
    pub iterations: usize,
    pub root_visits: u32,
    pub root: Vec<RootActionStats<A>>,
    pub counters: SearchCounters,
    pub tree_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome<A> {
    pub action: A,
    /// The final ν-close policy as `(action, probability)` pairs.
    pub policy: Vec<(A, f64)>,
    pub diagnostics: PlanDiagnostics<A>,
}

enum Searcher<M: Cpomdp> {
    Pomcpow(PomcpowSearch<M>),
    Pft(PftSearch<M>),
    Dpw(PomcpDpwSearch<M>),
}

/// Runs `config.search.iterations` simulations from `belief`, updating λ
/// after each one, and returns the ν-close policy at the root together with
/// an action drawn from it.
pub fn plan<M, P, R>(
    model: &M,
    belief: &ParticleBelief<M::State>,
    budget: &[f64],
    config: &PlannerConfig,
    rollout: &P,
    rng: &mut R,
) -> Result<PlanOutcome<M::Action>>
where
    M: Cpomdp,
    P: RolloutPolicy<M>,
    R: Rng + ?Sized,
{
    let k = model.n_costs();
    config.validate(k)?;
    if belief.is_empty() {
        return Err(CoreError::EmptyBelief);
    }
    if budget.len() != k {
        return Err(CoreError::CostDimension {
            expected: k,
            got: budget.len(),
        });
    }
    let init = if config.constrained {
        if config.lambda_init.is_empty() {
            alloc::vec![0.0; k]
        } else {
            config.lambda_init.clone()
        }
    } else {
        Vec::new()
    };
    let mut lambda = LambdaState::new(init, config.schedule)?;
    let policy_budget: &[f64] = if config.constrained { budget } else { &[] };
    let depth = config.search.max_depth;

    let mut searcher = match config.variant {
        Variant::Pomcpow => Searcher::Pomcpow(PomcpowSearch::new(model)),
        Variant::PftDpw => Searcher::Pft(PftSearch::new(model, belief.clone())),
        Variant::PomcpDpw => Searcher::Dpw(PomcpDpwSearch::new(model)),
    };
    let root = ROOT;

    for _ in 0..config.search.iterations {
        let ctx = SearchContext {
            model,
            config: &config.search,
            rollout,
            lambda: lambda.lambda(),
            budget: policy_budget,
        };
        match &mut searcher {
            Searcher::Pomcpow(s) => {
                let state = belief.sample(rng).clone();
                s.simulate(ctx, &state, root, depth, rng)?;
            }
            Searcher::Dpw(s) => {
                let state = belief.sample(rng).clone();
                s.simulate(ctx, &state, root, depth, rng)?;
            }
            Searcher::Pft(s) => {
                s.simulate(ctx, root, depth, rng)?;
            }
        }
        if config.constrained && k > 0 {
            let a = match &searcher {
                Searcher::Pomcpow(s) => greedy_root(ctx, &s.tree, rng)?,
                Searcher::Dpw(s) => greedy_root(ctx, &s.tree, rng)?,
                Searcher::Pft(s) => greedy_root(ctx, &s.tree, rng)?,
            };
            lambda.update(&a, budget);
        }
    }

    let ctx = SearchContext {
        model,
        config: &config.search,
        rollout,
        lambda: lambda.lambda(),
        budget: policy_budget,
    };
    match &searcher {
        Searcher::Pomcpow(s) => finish(ctx, &s.tree, s.counters, rng),
        Searcher::Dpw(s) => finish(ctx, &s.tree, s.counters, rng),
        Searcher::Pft(s) => finish(ctx, &s.tree, s.counters, rng),
    }
}

/// `Q_C(b, a)` for `a ~ GreedyPolicy(b, 0, 0)`.
fn greedy_root<M: Cpomdp, P, Pl, R: Rng + ?Sized>(
    ctx: SearchContext<'_, M, P>,
    tree: &Tree<M::Action, Pl>,
    rng: &mut R,
) -> Result<Costs> {
    let a = select_action(ctx, tree, ROOT, 0.0, 0.0, rng)?;
    Ok(tree.action(a).stats.cost_value.clone())
}

fn finish<M: Cpomdp, P, Pl, R: Rng + ?Sized>(
    ctx: SearchContext<'_, M, P>,
    tree: &Tree<M::Action, Pl>,
    counters: SearchCounters,
    rng: &mut R,
) -> Result<PlanOutcome<M::Action>> {
    let root = ROOT;
    let root_node = tree.history(root);
    if root_node.children.is_empty() {
        return Err(CoreError::NoChildren);
    }
    let inputs: Vec<ActionScoreInput<'_>> = root_node
        .children
        .iter()
        .map(|a| {
            let s = &tree.action(*a).stats;
            ActionScoreInput {
                visits: s.visits,
                reward_value: s.reward_value,
                cost_value: &s.cost_value,
            }
        })
        .collect();
    let policy = crate::dual::greedy_policy(&inputs, root_node.visits, ctx.lambda, 0.0, ctx.config.nu, ctx.budget)?;
    let chosen = policy.sample(rng);
    let action = tree.action(root_node.children[chosen]).action.clone();

    let root_stats = root_node
        .children
        .iter()
        .zip(&inputs)
        .map(|(a, input)| {
            let n = tree.action(*a);
            RootActionStats {
                action: n.action.clone(),
                visits: n.stats.visits,
                reward_value: n.stats.reward_value,
                cost_value: n.stats.cost_value.clone(),
                immediate_cost: n.stats.immediate_cost.clone(),
                lagrangian_value: lagrangian_score(input, root_node.visits, ctx.lambda, 0.0),
            }
        })
        .collect();
    Ok(PlanOutcome {
        action,
        policy: policy
            .support
            .iter()
            .zip(&policy.probabilities)
            .map(|(i, p)| (tree.action(root_node.children[*i]).action.clone(), *p))
            .collect(),
        diagnostics: PlanDiagnostics {
            lambda: ctx.lambda.to_vec(),
            iterations: ctx.config.iterations,
            root_visits: root_node.visits,
            root: root_stats,
            counters,
            tree_size: tree.n_histories() + tree.n_actions(),
        },
    })
}
