//! Belief-tree search over particle-filter beliefs.
//!
//! Observation-side children are `(b', r, c)` triples produced by the
//! generative particle filter. Once the branch stops widening, revisits pick
//! one of the stored children uniformly.

use rand::Rng;

use super::{
    action_prog_widen, backup, rollout, widening_allowed, zero_returns, RolloutPolicy, SearchContext, SearchCounters,
};
use crate::belief::{pf_step, ParticleBelief};
use crate::model::{zero_costs, Costs, Cpomdp, Returns};
use crate::tree::{HistoryId, Tree};
use crate::Result;

/// Belief node with the belief-level reward and costs of the step that
/// produced it.
#[derive(Debug, Clone)]
pub struct BeliefNode<S> {
    pub belief: ParticleBelief<S>,
    pub reward: f64,
    pub costs: Costs,
}

pub type PftTree<M> = Tree<<M as Cpomdp>::Action, BeliefNode<<M as Cpomdp>::State>>;

pub struct PftSearch<M: Cpomdp> {
    pub tree: PftTree<M>,
    pub counters: SearchCounters,
}

impl<M: Cpomdp> PftSearch<M> {
    pub fn new(model: &M, root: ParticleBelief<M::State>) -> Self {
        let node = BeliefNode {
            belief: root,
            reward: 0.0,
            costs: zero_costs(model.n_costs()),
        };
        Self {
            tree: Tree::new(node, model.n_costs()),
            counters: SearchCounters::default(),
        }
    }

    pub fn simulate<P: RolloutPolicy<M>, R: Rng + ?Sized>(
        &mut self,
        ctx: SearchContext<'_, M, P>,
        node: HistoryId,
        depth: usize,
        rng: &mut R,
    ) -> Result<Returns> {
        let model = ctx.model;
        let cfg = ctx.config;
        let all_terminal = self
            .tree
            .history(node)
            .payload
            .belief
            .particles()
            .iter()
            .all(|s| model.is_terminal(s));
        if depth == 0 || all_terminal {
            return Ok(zero_returns(model.n_costs()));
        }
        let ba = action_prog_widen(ctx, &mut self.tree, node, rng)?;
        let (n_children, visits) = {
            let a = self.tree.action(ba);
            (a.children.len(), a.stats.visits)
        };

        let (reward, costs, tail) = if widening_allowed(n_children, visits, cfg.k_observation, cfg.alpha_observation) {
            let action = self.tree.action(ba).action.clone();
            let out = pf_step(
                model,
                &self.tree.history(node).payload.belief,
                &action,
                cfg.pf_particles,
                rng,
            )?;
            if out.depleted {
                self.counters.depletions += 1;
            }
            let start = out.belief.sample(rng).clone();
            let tail = rollout(model, ctx.rollout, &start, depth - 1, rng);
            self.tree.add_history(
                ba,
                BeliefNode {
                    belief: out.belief,
                    reward: out.reward,
                    costs: out.costs.clone(),
                },
            );
            (out.reward, out.costs, tail)
        } else {
            let children = &self.tree.action(ba).children;
            let child = children[rng.random_range(0..children.len())];
            let payload = &self.tree.history(child).payload;
            let (reward, costs) = (payload.reward, payload.costs.clone());
            let tail = self.simulate(ctx, child, depth - 1, rng)?;
            (reward, costs, tail)
        };
        let ret = tail.discounted_after(reward, &costs, model.discount());
        backup(ctx, &mut self.tree, node, ba, ret, &costs)
    }
}
