//! Constrained Monte Carlo tree search with double progressive widening.
//!
//! Three `Simulate` variants share the action-side machinery in this module
//! (progressive widening, the Lagrangian greedy policy, backups and minimal
//! cost propagation) and differ on the observation side:
//!
//! * [`pomcpow`]: observation widening with weighted particle insertion,
//! * [`pft`]: belief tree over particle-filter beliefs,
//! * [`pomcp_dpw`]: plain double progressive widening, one unweighted
//!   particle list per observation.

#[allow(unused_imports)] // std's inherent float methods win when std is linked
use num_traits::Float;
use rand::Rng;
use smallvec::SmallVec;

use crate::dual::{greedy_policy, ActionScoreInput};
use crate::model::{zero_costs, ActionSpace, Costs, Cpomdp, Returns};
use crate::tree::{ActionId, HistoryId, Tree};
use crate::{CoreError, Result};

pub mod pft;
pub mod pomcp_dpw;
pub mod pomcpow;
mod rollout;

pub use rollout::{rollout, RandomRollout, RolloutPolicy};

/// Which `Simulate` procedure drives the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Observation widening with weighted particle beliefs per node.
    Pomcpow,
    /// Particle-filter belief tree.
    PftDpw,
    /// Double progressive widening with unweighted particle lists.
    PomcpDpw,
}

/// Tree-shaping and exploration parameters of a search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub iterations: usize,
    pub max_depth: usize,
    pub k_action: f64,
    pub alpha_action: f64,
    pub k_observation: f64,
    pub alpha_observation: f64,
    /// UCB exploration constant κ.
    pub exploration: f64,
    /// Width ν of the near-optimal action set.
    pub nu: f64,
    /// Particles per belief-tree node (`m`).
    pub pf_particles: usize,
    pub min_cost_propagation: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            max_depth: 20,
            k_action: 10.0,
            alpha_action: 1.0,
            k_observation: 5.0,
            alpha_observation: 0.1,
            exploration: 90.0,
            nu: 0.01,
            pf_particles: 30,
            min_cost_propagation: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.iterations == 0 {
            return Err(CoreError::InvalidConfig("iterations must be >= 1"));
        }
        if self.max_depth == 0 {
            return Err(CoreError::InvalidConfig("max_depth must be >= 1"));
        }
        if !(self.k_action > 0.0) || !(self.k_observation > 0.0) {
            return Err(CoreError::InvalidConfig("widening constants k must be > 0"));
        }
        if !unit(self.alpha_action) || !unit(self.alpha_observation) {
            return Err(CoreError::InvalidConfig("widening exponents must lie in [0, 1]"));
        }
        if !(self.exploration >= 0.0) {
            return Err(CoreError::InvalidConfig("exploration constant must be >= 0"));
        }
        if !(self.nu >= 0.0) {
            return Err(CoreError::InvalidConfig("nu must be >= 0"));
        }
        if self.pf_particles == 0 {
            return Err(CoreError::InvalidConfig("pf_particles must be >= 1"));
        }
        Ok(())
    }
}

/// `|C| ≤ k N^α`.
pub fn widening_allowed(children: usize, visits: u32, k: f64, alpha: f64) -> bool {
    children as f64 <= k * (visits as f64).powf(alpha)
}

/// Read-only inputs of one `Simulate` call.
pub struct SearchContext<'a, M, P> {
    pub model: &'a M,
    pub config: &'a SearchConfig,
    pub rollout: &'a P,
    /// Current multipliers; empty when constraints are ignored.
    pub lambda: &'a [f64],
    /// Budget handed to the stochastic policy; empty when constraints are
    /// ignored.
    pub budget: &'a [f64],
}

impl<M, P> Clone for SearchContext<'_, M, P> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<M, P> Copy for SearchContext<'_, M, P> {}

/// Bookkeeping for conditions that are handled but worth reporting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchCounters {
    /// Revisits where every stored particle weight was zero.
    pub weight_fallbacks: u64,
    /// Particle-filter steps whose likelihood weights were all zero.
    pub depletions: u64,
}

/// `NextAction(h)`.
///
/// Finite action sets hand out untried actions first, in a random order
/// (uniform among the untried ones), and afterwards uniform draws from the
/// whole set. Continuous sets draw from the model's action sampler.
pub fn next_action<M: Cpomdp, Pl, R: Rng + ?Sized>(
    model: &M,
    tree: &Tree<M::Action, Pl>,
    node: HistoryId,
    rng: &mut R,
) -> M::Action {
    match model.action_space() {
        ActionSpace::Finite(actions) => {
            let tried = |a: &M::Action| tree.child_stats(node).any(|(_, n)| n.action == *a);
            let untried: SmallVec<[usize; 16]> = (0..actions.len()).filter(|&i| !tried(&actions[i])).collect();
            if untried.is_empty() {
                actions[rng.random_range(0..actions.len())].clone()
            } else {
                actions[untried[rng.random_range(0..untried.len())]].clone()
            }
        }
        ActionSpace::Continuous => model.sample_action(rng),
    }
}

/// `ActionProgWiden(h)`: possibly add a child action, then sample from the
/// exploring greedy policy.
pub fn action_prog_widen<M: Cpomdp, P, Pl, R: Rng + ?Sized>(
    ctx: SearchContext<'_, M, P>,
    tree: &mut Tree<M::Action, Pl>,
    node: HistoryId,
    rng: &mut R,
) -> Result<ActionId> {
    let cfg = ctx.config;
    let (n_children, visits) = {
        let h = tree.history(node);
        (h.children.len(), h.visits)
    };
    if n_children == 0 || widening_allowed(n_children, visits, cfg.k_action, cfg.alpha_action) {
        let a = next_action(ctx.model, tree, node, rng);
        let duplicate = tree.child_stats(node).any(|(_, n)| n.action == a);
        if !duplicate {
            tree.add_action(node, a);
        }
    }
    select_action(ctx, tree, node, cfg.exploration, cfg.nu, rng)
}

/// Samples a child from `GreedyPolicy(h, κ, ν)`.
pub fn select_action<M: Cpomdp, P, Pl, R: Rng + ?Sized>(
    ctx: SearchContext<'_, M, P>,
    tree: &Tree<M::Action, Pl>,
    node: HistoryId,
    exploration: f64,
    nu: f64,
    rng: &mut R,
) -> Result<ActionId> {
    let h = tree.history(node);
    let inputs: SmallVec<[ActionScoreInput<'_>; 16]> = h
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
    let policy = greedy_policy(&inputs, h.visits, ctx.lambda, exploration, nu, ctx.budget)?;
    Ok(h.children[policy.sample(rng)])
}

/// Cost vector propagated upward under minimal cost propagation.
///
/// With one constraint this is the smallest `Q_C(ha)` over visited children.
/// With several, it is the `Q_C` vector of the child minimizing `λᵀQ_C`,
/// ties broken by the first component and then by insertion order.
pub fn minimal_cost_return<A, Pl>(tree: &Tree<A, Pl>, node: HistoryId, lambda: &[f64]) -> Result<Costs> {
    let mut best: Option<(&Costs, f64)> = None;
    for (_, child) in tree.child_stats(node) {
        if child.stats.visits == 0 {
            continue;
        }
        let q = &child.stats.cost_value;
        let key = if q.len() == 1 {
            q[0]
        } else {
            lambda.iter().zip(q.iter()).map(|(l, c)| l * c).sum()
        };
        let better = match best {
            None => true,
            Some((bq, bk)) => key < bk || (key == bk && q.len() > 1 && q[0] < bq[0]),
        };
        if better {
            best = Some((q, key));
        }
    }
    best.map(|(q, _)| q.clone()).ok_or(CoreError::NoChildren)
}

/// Shared backup: update `N(h)`, the action statistics, and apply minimal
/// cost propagation when enabled.
pub fn backup<M: Cpomdp, P, Pl>(
    ctx: SearchContext<'_, M, P>,
    tree: &mut Tree<M::Action, Pl>,
    node: HistoryId,
    action: ActionId,
    ret: Returns,
    immediate_costs: &[f64],
) -> Result<Returns> {
    tree.history_mut(node).visits += 1;
    tree.action_mut(action)
        .stats
        .record(ret.reward, &ret.costs, immediate_costs);
    if ctx.config.min_cost_propagation && tree.n_costs() > 0 {
        let costs = minimal_cost_return(tree, node, ctx.lambda)?;
        return Ok(Returns {
            reward: ret.reward,
            costs,
        });
    }
    Ok(ret)
}

/// Index drawn proportionally to `counts`; one `f64` draw.
pub(crate) fn sample_by_count<R: Rng + ?Sized>(counts: impl Iterator<Item = u32> + Clone, rng: &mut R) -> usize {
    let total: u64 = counts.clone().map(u64::from).sum();
    let target = rng.random::<f64>() * total as f64;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, c) in counts.enumerate() {
        acc += c as f64;
        last = i;
        if target < acc {
            return i;
        }
    }
    last
}

pub(crate) fn zero_returns(k: usize) -> Returns {
    Returns {
        reward: 0.0,
        costs: zero_costs(k),
    }
}
