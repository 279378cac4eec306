//! Folds the costs of a model into its reward with fixed weights, leaving an
//! unconstrained problem: `R̄ = R − λᵀC`.

use alloc::vec::Vec;
use rand::Rng;

use crate::model::{ActionSpace, Costs, Cpomdp, CpomdpSpec, GenerativeOutcome};
use crate::search::RolloutPolicy;
use crate::{CoreError, Result};

#[derive(Debug, Clone)]
pub struct Scalarized<M> {
    inner: M,
    weights: Vec<f64>,
    spec: CpomdpSpec,
}

impl<M: Cpomdp> Scalarized<M> {
    pub fn new(inner: M, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != inner.n_costs() {
            return Err(CoreError::CostDimension {
                expected: inner.n_costs(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(CoreError::InvalidConfig("scalarization weights must be >= 0"));
        }
        let spec = CpomdpSpec::new(inner.discount(), Vec::new())?;
        Ok(Self { inner, weights, spec })
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn penalty(&self, costs: &[f64]) -> f64 {
        self.weights.iter().zip(costs).map(|(w, c)| w * c).sum()
    }
}

impl<M: Cpomdp> Cpomdp for Scalarized<M> {
    type State = M::State;
    type Action = M::Action;
    type Observation = M::Observation;

    fn spec(&self) -> &CpomdpSpec {
        &self.spec
    }

    fn is_terminal(&self, s: &M::State) -> bool {
        self.inner.is_terminal(s)
    }

    fn sample_initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> M::State {
        self.inner.sample_initial_state(rng)
    }

    fn action_space(&self) -> ActionSpace<'_, M::Action> {
        self.inner.action_space()
    }

    fn sample_action<R: Rng + ?Sized>(&self, rng: &mut R) -> M::Action {
        self.inner.sample_action(rng)
    }

    fn transition<R: Rng + ?Sized>(&self, s: &M::State, a: &M::Action, rng: &mut R) -> M::State {
        self.inner.transition(s, a, rng)
    }

    fn sample_observation<R: Rng + ?Sized>(
        &self,
        s: &M::State,
        a: &M::Action,
        next: &M::State,
        rng: &mut R,
    ) -> M::Observation {
        self.inner.sample_observation(s, a, next, rng)
    }

    fn obs_density(&self, o: &M::Observation, s: &M::State, a: &M::Action, next: &M::State) -> f64 {
        self.inner.obs_density(o, s, a, next)
    }

    fn reward(&self, s: &M::State, a: &M::Action, next: &M::State) -> f64 {
        let costs = self.inner.costs(s, a, next);
        self.inner.reward(s, a, next) - self.penalty(&costs)
    }

    fn costs(&self, _s: &M::State, _a: &M::Action, _next: &M::State) -> Costs {
        Costs::new()
    }

    fn discrete_observations(&self) -> bool {
        self.inner.discrete_observations()
    }

    fn generate<R: Rng + ?Sized>(
        &self,
        s: &M::State,
        a: &M::Action,
        rng: &mut R,
    ) -> GenerativeOutcome<M::State, M::Observation> {
        let out = self.inner.generate(s, a, rng);
        GenerativeOutcome {
            reward: out.reward - self.penalty(&out.costs),
            next_state: out.next_state,
            observation: out.observation,
            costs: Costs::new(),
        }
    }
}

/// Runs the inner model's rollout policy on the wrapped model.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalarizedRollout<P>(pub P);

impl<M: Cpomdp, P: RolloutPolicy<M>> RolloutPolicy<Scalarized<M>> for ScalarizedRollout<P> {
    fn action<R: Rng + ?Sized>(&self, model: &Scalarized<M>, s: &M::State, rng: &mut R) -> M::Action {
        self.0.action(model.inner(), s, rng)
    }
}
