//! The constrained POMDP abstraction shared by planners and problems.

use alloc::vec::Vec;
use core::fmt::Debug;

use rand::Rng;
use smallvec::SmallVec;

use crate::{CoreError, Result};

/// Per-step cost vector. Inline for up to two constraints.
pub type Costs = SmallVec<[f64; 2]>;

/// Zero cost vector of length `k`.
pub fn zero_costs(k: usize) -> Costs {
    SmallVec::from_elem(0.0, k)
}

/// Discount factor, budget vector and constraint count of a CPOMDP.
#[derive(Debug, Clone, PartialEq)]
pub struct CpomdpSpec {
    discount: f64,
    budget: Vec<f64>,
}

impl CpomdpSpec {
    pub fn new(discount: f64, budget: Vec<f64>) -> Result<Self> {
        if !(discount > 0.0 && discount < 1.0) {
            return Err(CoreError::InvalidConfig("discount must lie in (0, 1)"));
        }
        if budget.iter().any(|c| !(*c >= 0.0)) {
            return Err(CoreError::InvalidConfig("cost budget entries must be >= 0"));
        }
        Ok(Self { discount, budget })
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn budget(&self) -> &[f64] {
        &self.budget
    }

    pub fn n_costs(&self) -> usize {
        self.budget.len()
    }
}

/// One draw of the joint transition / observation / reward / cost model.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeOutcome<S, O> {
    pub next_state: S,
    pub observation: O,
    pub reward: f64,
    pub costs: Costs,
}

/// Discounted reward and cost returns.
#[derive(Debug, Clone, PartialEq)]
pub struct Returns {
    pub reward: f64,
    pub costs: Costs,
}

impl Returns {
    pub fn zero(k: usize) -> Self {
        Self {
            reward: 0.0,
            costs: zero_costs(k),
        }
    }

    /// `r + γ·self`, `c + γ·self.costs`: one step of the backup recursion.
    pub fn discounted_after(&self, reward: f64, costs: &[f64], discount: f64) -> Self {
        Self {
            reward: reward + discount * self.reward,
            costs: costs
                .iter()
                .zip(&self.costs)
                .map(|(c, tail)| c + discount * tail)
                .collect(),
        }
    }
}

/// The shape of a model's action set.
#[derive(Debug, Clone, Copy)]
pub enum ActionSpace<'a, A> {
    /// Finite set, listed in a fixed order.
    Finite(&'a [A]),
    /// Uncountable set; new actions come from [`Cpomdp::sample_action`].
    Continuous,
}

/// A constrained POMDP given as a generative model plus an observation
/// density.
///
/// Rewards and costs are functions of the `(s, a, s')` transition. The
/// default [`generate`](Cpomdp::generate) draws the next state, then the
/// observation, and evaluates reward and costs; models rarely need to
/// override it.
pub trait Cpomdp {
    type State: Clone + Debug;
    type Action: Clone + PartialEq + Debug;
    type Observation: Clone + PartialEq + Debug;

    fn spec(&self) -> &CpomdpSpec;

    fn discount(&self) -> f64 {
        self.spec().discount()
    }

    fn n_costs(&self) -> usize {
        self.spec().n_costs()
    }

    fn budget(&self) -> &[f64] {
        self.spec().budget()
    }

    fn is_terminal(&self, state: &Self::State) -> bool;

    fn sample_initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;

    fn action_space(&self) -> ActionSpace<'_, Self::Action>;

    /// Uniform draw from the action set.
    fn sample_action<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Action;

    fn transition<R: Rng + ?Sized>(&self, state: &Self::State, action: &Self::Action, rng: &mut R) -> Self::State;

    fn sample_observation<R: Rng + ?Sized>(
        &self,
        state: &Self::State,
        action: &Self::Action,
        next_state: &Self::State,
        rng: &mut R,
    ) -> Self::Observation;

    /// Density (continuous) or mass (discrete) of `obs` given the transition.
    fn obs_density(
        &self,
        obs: &Self::Observation,
        state: &Self::State,
        action: &Self::Action,
        next_state: &Self::State,
    ) -> f64;

    fn reward(&self, state: &Self::State, action: &Self::Action, next_state: &Self::State) -> f64;

    fn costs(&self, state: &Self::State, action: &Self::Action, next_state: &Self::State) -> Costs;

    /// True when observations come from a countable set, so that equal
    /// observations may be merged into one tree branch.
    fn discrete_observations(&self) -> bool {
        false
    }

    fn generate<R: Rng + ?Sized>(
        &self,
        state: &Self::State,
        action: &Self::Action,
        rng: &mut R,
    ) -> GenerativeOutcome<Self::State, Self::Observation> {
        let next_state = self.transition(state, action, rng);
        let observation = self.sample_observation(state, action, &next_state, rng);
        let reward = self.reward(state, action, &next_state);
        let costs = self.costs(state, action, &next_state);
        GenerativeOutcome {
            next_state,
            observation,
            reward,
            costs,
        }
    }
}

/// Checked entry point to the generative model: rejects terminal states.
pub fn generative_step<M: Cpomdp, R: Rng + ?Sized>(
    model: &M,
    state: &M::State,
    action: &M::Action,
    rng: &mut R,
) -> Result<GenerativeOutcome<M::State, M::Observation>> {
    if model.is_terminal(state) {
        return Err(CoreError::TerminalState);
    }
    let out = model.generate(state, action, rng);
    if out.costs.len() != model.n_costs() {
        return Err(CoreError::CostDimension {
            expected: model.n_costs(),
            got: out.costs.len(),
        });
    }
    Ok(out)
}

/// `Σ γ^t x_t` for a scalar stream.
pub fn discounted_sum(values: impl IntoIterator<Item = f64>, discount: f64) -> f64 {
    let mut scale = 1.0;
    let mut total = 0.0;
    for v in values {
        total += scale * v;
        scale *= discount;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn spec_rejects_bad_discount_and_budget() {
        assert!(CpomdpSpec::new(1.0, vec![0.1]).is_err());
        assert!(CpomdpSpec::new(0.0, vec![0.1]).is_err());
        assert!(CpomdpSpec::new(0.95, vec![-0.1]).is_err());
        assert!(CpomdpSpec::new(0.95, vec![f64::NAN]).is_err());
        let spec = CpomdpSpec::new(0.95, vec![0.1, 2.0]).unwrap();
        assert_eq!(spec.n_costs(), 2);
    }

    #[test]
    fn backup_recursion_matches_direct_sum() {
        let rewards = [-1.0, -1.0, 100.0];
        let gamma = 0.95;
        let mut ret = Returns::zero(1);
        for r in rewards.iter().rev() {
            ret = ret.discounted_after(*r, &[0.0], gamma);
        }
        let direct = discounted_sum(rewards, gamma);
        assert!((ret.reward - direct).abs() < 1e-12);
        assert!((direct - 88.3).abs() < 1e-9);
    }
}
