//! Observation widening with weighted particle insertion.
//!
//! Every visit through an observation node appends the freshly generated
//! next state to that node's particle list, weighted by the likelihood of the
//! node's observation. Revisits resample the next state from this weighted
//! list, so observation nodes accumulate beliefs instead of collapsing to a
//! single particle.

use alloc::vec::Vec;

use rand::Rng;

use super::{
    action_prog_widen, backup, rollout, sample_by_count, widening_allowed, zero_returns, RolloutPolicy, SearchContext,
    SearchCounters,
};
use crate::model::{Cpomdp, Returns};
use crate::tree::{HistoryId, Tree};
use crate::Result;

/// Payload of a history node `hao`: its observation, insertion count
/// `M(hao)`, particles `B(hao)` and weights `W(hao)`.
#[derive(Debug, Clone)]
pub struct WeightedObservation<S, O> {
    /// `None` only at the root.
    pub observation: Option<O>,
    pub insertions: u32,
    pub particles: Vec<S>,
    pub weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl<S, O> WeightedObservation<S, O> {
    pub fn root() -> Self {
        Self {
            observation: None,
            insertions: 0,
            particles: Vec::new(),
            weights: Vec::new(),
            cumulative: Vec::new(),
        }
    }

    fn new(observation: O) -> Self {
        Self {
            observation: Some(observation),
            insertions: 1,
            ..Self::root()
        }
    }

    fn push(&mut self, state: S, weight: f64) {
        let total = self.total_weight();
        self.particles.push(state);
        self.weights.push(weight);
        self.cumulative.push(total + weight);
    }

    pub fn total_weight(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Index drawn proportionally to weight, or uniformly when every weight
    /// is zero (second tuple entry `true`). One `f64` draw either way.
    fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, bool) {
        let u: f64 = rng.random();
        let n = self.particles.len();
        let total = self.total_weight();
        if !(total > 0.0) {
            return (((u * n as f64) as usize).min(n - 1), true);
        }
        let target = u * total;
        (self.cumulative.partition_point(|c| *c <= target).min(n - 1), false)
    }
}

pub type PomcpowTree<M> =
    Tree<<M as Cpomdp>::Action, WeightedObservation<<M as Cpomdp>::State, <M as Cpomdp>::Observation>>;

/// Search state of the observation-widening planner.
pub struct PomcpowSearch<M: Cpomdp> {
    pub tree: PomcpowTree<M>,
    pub counters: SearchCounters,
}

impl<M: Cpomdp> PomcpowSearch<M> {
    pub fn new(model: &M) -> Self {
        Self {
            tree: Tree::new(WeightedObservation::root(), model.n_costs()),
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
        let out = model.generate(state, &action, rng);
        let (mut reward, mut costs) = (out.reward, out.costs);

        let (hao, created) = {
            let a_node = self.tree.action(ha);
            let widen = widening_allowed(
                a_node.children.len(),
                a_node.stats.visits,
                cfg.k_observation,
                cfg.alpha_observation,
            );
            if widen {
                let existing = if model.discrete_observations() {
                    a_node
                        .children
                        .iter()
                        .copied()
                        .find(|h| self.tree.history(*h).payload.observation.as_ref() == Some(&out.observation))
                } else {
                    None
                };
                match existing {
                    Some(h) => {
                        self.tree.history_mut(h).payload.insertions += 1;
                        (h, false)
                    }
                    None => {
                        let h = self
                            .tree
                            .add_history(ha, WeightedObservation::new(out.observation.clone()));
                        (h, true)
                    }
                }
            } else {
                let counts = a_node.children.iter().map(|h| self.tree.history(*h).payload.insertions);
                let pick = sample_by_count(counts, rng);
                (a_node.children[pick], false)
            }
        };

        let weight = {
            let obs = self.tree.history(hao).payload.observation.as_ref().unwrap();
            model.obs_density(obs, state, &action, &out.next_state)
        };
        self.tree.history_mut(hao).payload.push(out.next_state.clone(), weight);

        let tail = if created {
            rollout(model, ctx.rollout, &out.next_state, depth - 1, rng)
        } else {
            let payload = &self.tree.history(hao).payload;
            let (i, fallback) = payload.sample_index(rng);
            if fallback {
                self.counters.weight_fallbacks += 1;
            }
            let next = payload.particles[i].clone();
            reward = model.reward(state, &action, &next);
            costs = model.costs(state, &action, &next);
            self.simulate(ctx, &next, hao, depth - 1, rng)?
        };
        let ret = tail.discounted_after(reward, &costs, model.discount());
        backup(ctx, &mut self.tree, node, ha, ret, &costs)
    }
}
