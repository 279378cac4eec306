//! Plain double progressive widening.
//!
//! Next states are stored only when the observation branch widens, and
//! revisits pick one of them uniformly. With continuous observations every
//! observation node ends up holding a single particle.

use alloc::vec::Vec;

use rand::Rng;

use super::{
    action_prog_widen, backup, rollout, sample_by_count, widening_allowed, zero_returns, RolloutPolicy, SearchContext,
    SearchCounters,
};
use crate::model::{Cpomdp, Returns};
use crate::tree::{HistoryId, Tree};
use crate::Result;

/// Payload of `hao`: observation, `M(hao)` and the unweighted `B(hao)`.
#[derive(Debug, Clone)]
pub struct ObservationParticles<S, O> {
    pub observation: Option<O>,
    pub insertions: u32,
    pub particles: Vec<S>,
}

impl<S, O> ObservationParticles<S, O> {
    pub fn root() -> Self {
        Self {
            observation: None,
            insertions: 0,
            particles: Vec::new(),
        }
    }
}

pub type DpwTree<M> =
    Tree<<M as Cpomdp>::Action, ObservationParticles<<M as Cpomdp>::State, <M as Cpomdp>::Observation>>;

pub struct PomcpDpwSearch<M: Cpomdp> {
    pub tree: DpwTree<M>,
    pub counters: SearchCounters,
}

impl<M: Cpomdp> PomcpDpwSearch<M> {
    pub fn new(model: &M) -> Self {
        Self {
            tree: Tree::new(ObservationParticles::root(), model.n_costs()),
            counters: SearchCounters::default(),
        }
    }

    pub fn simulate<P: RolloutPolicy<M>, R: Rng + ?Sized>(
        &mut self,
        ctx: SearchContext<'_, M, P>,
        state: &M::State,
        node: HistoryId,
        depth: usize,
        rng: &mut R,
    ) -> Result<Returns> {
        let model = ctx.model;
        let cfg = ctx.config;
        if depth == 0 || model.is_terminal(state) {
            return Ok(zero_returns(model.n_costs()));
        }
        let ha = action_prog_widen(ctx, &mut self.tree, node, rng)?;
        let action = self.tree.action(ha).action.clone();

        let (n_obs, visits) = {
            let a = self.tree.action(ha);
            (a.children.len(), a.stats.visits)
        };
        let (next, hao, reward, costs, is_new) =
            if widening_allowed(n_obs, visits, cfg.k_observation, cfg.alpha_observation) {
                let out = model.generate(state, &action, rng);
                let existing = if model.discrete_observations() {
                    self.tree
                        .action(ha)
                        .children
                        .iter()
                        .copied()
                        .find(|h| self.tree.history(*h).payload.observation.as_ref() == Some(&out.observation))
                } else {
                    None
                };
                let hao = match existing {
                    Some(h) => h,
                    None => self.tree.add_history(
                        ha,
                        ObservationParticles {
                            observation: Some(out.observation.clone()),
                            insertions: 0,
                            particles: Vec::new(),
                        },
                    ),
                };
                let payload = &mut self.tree.history_mut(hao).payload;
                payload.insertions += 1;
                payload.particles.push(out.next_state.clone());
                let is_new = payload.insertions == 1;
                (out.next_state, hao, out.reward, out.costs, is_new)
            } else {
                let children = &self.tree.action(ha).children;
                let counts = children.iter().map(|h| self.tree.history(*h).payload.insertions);
                let hao = children[sample_by_count(counts, rng)];
                let particles = &self.tree.history(hao).payload.particles;
                let u: f64 = rng.random();
                let i = ((u * particles.len() as f64) as usize).min(particles.len() - 1);
                let next = particles[i].clone();
                let reward = model.reward(state, &action, &next);
                let costs = model.costs(state, &action, &next);
                (next, hao, reward, costs, false)
            };

        let tail = if is_new {
            rollout(model, ctx.rollout, &next, depth - 1, rng)
        } else {
            self.simulate(ctx, &next, hao, depth - 1, rng)?
        };
        let ret = tail.discounted_after(reward, &costs, model.discount());
        backup(ctx, &mut self.tree, node, ha, ret, &costs)
    }
}
