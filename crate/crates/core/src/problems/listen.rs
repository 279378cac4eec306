//! A two-state tiger-style problem with a costly listen action.
//!
//! A hazard is present or absent with equal prior probability. Listening
//! costs one unit of budget and returns a noisy hint; proceeding ends the
//! episode with a payoff that depends on the hidden state. The model is
//! small enough to solve exactly, which makes it a sanity check for the
//! planners.

use alloc::vec;

use rand::Rng;
use smallvec::smallvec;

use crate::model::{ActionSpace, Costs, Cpomdp, CpomdpSpec};
use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ListenAction {
    Listen,
    Proceed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sound {
    Clear,
    Alarm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ListenState {
    pub hazard: bool,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ListenParams {
    pub hazard_prior: f64,
    /// Probability that a listen reports the true state.
    pub accuracy: f64,
    pub listen_reward: f64,
    pub listen_cost: f64,
    pub safe_reward: f64,
    pub hazard_reward: f64,
    pub budget: f64,
    pub discount: f64,
}

impl Default for ListenParams {
    fn default() -> Self {
        Self {
            hazard_prior: 0.5,
            accuracy: 0.85,
            listen_reward: -1.0,
            listen_cost: 1.0,
            safe_reward: 10.0,
            hazard_reward: -20.0,
            budget: 1.0,
            discount: 0.95,
        }
    }
}

const ACTIONS: [ListenAction; 2] = [ListenAction::Listen, ListenAction::Proceed];

#[derive(Debug, Clone)]
pub struct CostlyListen {
    params: ListenParams,
    spec: CpomdpSpec,
}

impl Default for CostlyListen {
    fn default() -> Self {
        Self::new(ListenParams::default()).unwrap()
    }
}

impl CostlyListen {
    pub fn new(params: ListenParams) -> Result<Self> {
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(params.hazard_prior) || !unit(params.accuracy) {
            return Err(CoreError::InvalidConfig("listen probabilities must lie in [0, 1]"));
        }
        let spec = CpomdpSpec::new(params.discount, vec![params.budget])?;
        Ok(Self { params, spec })
    }

    pub fn params(&self) -> &ListenParams {
        &self.params
    }

    pub fn actions() -> &'static [ListenAction] {
        &ACTIONS
    }
}

impl Cpomdp for CostlyListen {
    type State = ListenState;
    type Action = ListenAction;
    type Observation = Sound;

    fn spec(&self) -> &CpomdpSpec {
        &self.spec
    }

    fn is_terminal(&self, s: &ListenState) -> bool {
        s.done
    }

    fn sample_initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> ListenState {
        ListenState {
            hazard: rng.random::<f64>() < self.params.hazard_prior,
            done: false,
        }
    }

    fn action_space(&self) -> ActionSpace<'_, ListenAction> {
        ActionSpace::Finite(&ACTIONS)
    }

    fn sample_action<R: Rng + ?Sized>(&self, rng: &mut R) -> ListenAction {
        ACTIONS[rng.random_range(0..ACTIONS.len())]
    }

    fn transition<R: Rng + ?Sized>(&self, s: &ListenState, a: &ListenAction, _rng: &mut R) -> ListenState {
        ListenState {
            hazard: s.hazard,
            done: *a == ListenAction::Proceed,
        }
    }

    fn sample_observation<R: Rng + ?Sized>(
        &self,
        _s: &ListenState,
        a: &ListenAction,
        next: &ListenState,
        rng: &mut R,
    ) -> Sound {
        match a {
            ListenAction::Proceed => Sound::Clear,
            ListenAction::Listen => {
                let truthful = rng.random::<f64>() < self.params.accuracy;
                if next.hazard == truthful {
                    Sound::Alarm
                } else {
                    Sound::Clear
                }
            }
        }
    }

    fn obs_density(&self, o: &Sound, _s: &ListenState, a: &ListenAction, next: &ListenState) -> f64 {
        match a {
            ListenAction::Proceed => f64::from(u8::from(*o == Sound::Clear)),
            ListenAction::Listen => {
                let truthful = (*o == Sound::Alarm) == next.hazard;
                if truthful {
                    self.params.accuracy
                } else {
                    1.0 - self.params.accuracy
                }
            }
        }
    }

    fn reward(&self, s: &ListenState, a: &ListenAction, _next: &ListenState) -> f64 {
        match a {
            ListenAction::Listen => self.params.listen_reward,
            ListenAction::Proceed if s.hazard => self.params.hazard_reward,
            ListenAction::Proceed => self.params.safe_reward,
        }
    }

    fn costs(&self, _s: &ListenState, a: &ListenAction, _next: &ListenState) -> Costs {
        match a {
            ListenAction::Listen => smallvec![self.params.listen_cost],
            ListenAction::Proceed => smallvec![0.0],
        }
    }

    fn discrete_observations(&self) -> bool {
        true
    }
}
