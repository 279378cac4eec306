//! One-dimensional LightDark with a cliff constraint.
//!
//! The agent moves in integer steps and must stop (action 0) inside the goal
//! interval. Observations are Gaussian around the position with noise that
//! grows with distance to the light. Ending a step beyond the cliff incurs a
//! unit cost.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // std's inherent float methods win when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use smallvec::smallvec;

use crate::model::{ActionSpace, Costs, Cpomdp, CpomdpSpec};
use crate::search::RolloutPolicy;
use crate::{CoreError, Result};

/// Named constants of the problem. Defaults reproduce the benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct LightDarkParams {
    pub actions: Vec<i32>,
    pub goal_low: f64,
    pub goal_high: f64,
    pub light: f64,
    pub cliff: f64,
    pub step_reward: f64,
    pub goal_reward: f64,
    pub wrong_stop_reward: f64,
    pub cliff_cost: f64,
    pub budget: f64,
    pub discount: f64,
    pub initial_mean: f64,
    pub initial_std: f64,
    pub sigma_min: f64,
    /// Std of additive Gaussian transition noise; zero keeps moves exact.
    pub transition_std: f64,
}

impl Default for LightDarkParams {
    fn default() -> Self {
        Self {
            actions: vec![-10, -5, -1, 0, 1, 5, 10],
            goal_low: -1.0,
            goal_high: 1.0,
            light: 10.0,
            cliff: 12.0,
            step_reward: -1.0,
            goal_reward: 100.0,
            wrong_stop_reward: -100.0,
            cliff_cost: 1.0,
            budget: 0.1,
            discount: 0.95,
            initial_mean: 2.0,
            initial_std: 2.0,
            sigma_min: 0.5,
            transition_std: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightDarkState {
    pub position: f64,
    pub terminal: bool,
}

impl LightDarkState {
    pub fn at(position: f64) -> Self {
        Self {
            position,
            terminal: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LightDark {
    params: LightDarkParams,
    spec: CpomdpSpec,
    initial: Normal<f64>,
}

impl Default for LightDark {
    fn default() -> Self {
        Self::new(LightDarkParams::default()).unwrap()
    }
}

impl LightDark {
    pub fn new(params: LightDarkParams) -> Result<Self> {
        if params.actions.is_empty() || !params.actions.contains(&0) {
            return Err(CoreError::InvalidConfig("lightdark actions must include 0"));
        }
        if !(params.sigma_min > 0.0) || !(params.transition_std >= 0.0) {
            return Err(CoreError::InvalidConfig("lightdark noise parameters must be positive"));
        }
        let initial = Normal::new(params.initial_mean, params.initial_std)
            .map_err(|_| CoreError::InvalidConfig("lightdark initial std must be >= 0"))?;
        let spec = CpomdpSpec::new(params.discount, vec![params.budget])?;
        Ok(Self { params, spec, initial })
    }

    pub fn params(&self) -> &LightDarkParams {
        &self.params
    }

    /// Observation noise std at position `x`.
    pub fn sigma(&self, x: f64) -> f64 {
        (x - self.params.light).abs() + self.params.sigma_min
    }

    pub fn in_goal(&self, x: f64) -> bool {
        (self.params.goal_low..=self.params.goal_high).contains(&x)
    }
}

fn gaussian_pdf(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    (-0.5 * z * z).exp() / (std * (2.0 * core::f64::consts::PI).sqrt())
}

impl Cpomdp for LightDark {
    type State = LightDarkState;
    type Action = i32;
    type Observation = f64;

    fn spec(&self) -> &CpomdpSpec {
        &self.spec
    }

    fn is_terminal(&self, state: &LightDarkState) -> bool {
        state.terminal
    }

    fn sample_initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> LightDarkState {
        LightDarkState::at(self.initial.sample(rng))
    }

    fn action_space(&self) -> ActionSpace<'_, i32> {
        ActionSpace::Finite(&self.params.actions)
    }

    fn sample_action<R: Rng + ?Sized>(&self, rng: &mut R) -> i32 {
        self.params.actions[rng.random_range(0..self.params.actions.len())]
    }

    fn transition<R: Rng + ?Sized>(&self, s: &LightDarkState, a: &i32, rng: &mut R) -> LightDarkState {
        if *a == 0 {
            return LightDarkState {
                position: s.position,
                terminal: true,
            };
        }
        let mut position = s.position + f64::from(*a);
        if self.params.transition_std > 0.0 {
            let noise: f64 = rng.sample(rand_distr::StandardNormal);
            position += self.params.transition_std * noise;
        }
        LightDarkState::at(position)
    }

    fn sample_observation<R: Rng + ?Sized>(
        &self,
        _s: &LightDarkState,
        _a: &i32,
        next: &LightDarkState,
        rng: &mut R,
    ) -> f64 {
        let noise: f64 = rng.sample(rand_distr::StandardNormal);
        next.position + self.sigma(next.position) * noise
    }

    fn obs_density(&self, o: &f64, _s: &LightDarkState, _a: &i32, next: &LightDarkState) -> f64 {
        gaussian_pdf(*o, next.position, self.sigma(next.position))
    }

    fn reward(&self, s: &LightDarkState, a: &i32, _next: &LightDarkState) -> f64 {
        if *a == 0 {
            if self.in_goal(s.position) {
                self.params.goal_reward
            } else {
                self.params.wrong_stop_reward
            }
        } else {
            self.params.step_reward
        }
    }

    fn costs(&self, _s: &LightDarkState, _a: &i32, next: &LightDarkState) -> Costs {
        let over = next.position > self.params.cliff;
        smallvec![if over { self.params.cliff_cost } else { 0.0 }]
    }
}

/// Rollout that walks toward the goal with the largest step that does not
/// overshoot it and stops once inside.
///
/// It acts on the true rollout state, so it estimates the value of a fully
/// observed continuation.
#[derive(Debug, Clone, Copy, Default)]
pub struct GoalSeekingRollout;

impl RolloutPolicy<LightDark> for GoalSeekingRollout {
    fn action<R: Rng + ?Sized>(&self, model: &LightDark, s: &LightDarkState, _rng: &mut R) -> i32 {
        let x = s.position;
        if model.in_goal(x) {
            return 0;
        }
        let centre = 0.5 * (model.params.goal_low + model.params.goal_high);
        let gap = centre - x;
        model
            .params
            .actions
            .iter()
            .copied()
            .filter(|a| *a != 0 && (f64::from(*a) * gap) > 0.0)
            .filter(|a| f64::from(a.abs()) <= gap.abs() + 1.0)
            .max_by_key(|a| a.abs())
            .unwrap_or(if gap > 0.0 { 1 } else { -1 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generative_step;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn stopping_in_goal_pays_and_terminates() {
        let m = LightDark::default();
        for x in [0.5, -0.5, -1.0, 1.0] {
            let out = generative_step(&m, &LightDarkState::at(x), &0, &mut rng()).unwrap();
            assert!(out.next_state.terminal);
            assert_eq!(out.reward, 100.0);
            assert_eq!(out.costs.as_slice(), &[0.0]);
        }
    }

    #[test]
    fn stopping_elsewhere_is_penalized() {
        let m = LightDark::default();
        let out = generative_step(&m, &LightDarkState::at(3.0), &0, &mut rng()).unwrap();
        assert!(out.next_state.terminal);
        assert_eq!(out.reward, -100.0);
        let out = generative_step(&m, &LightDarkState::at(2.0), &0, &mut rng()).unwrap();
        assert_eq!(out.reward, -100.0);
        assert_eq!(out.costs.as_slice(), &[0.0]);
    }

    #[test]
    fn cliff_cost_uses_destination_and_strict_inequality() {
        let m = LightDark::default();
        let out = generative_step(&m, &LightDarkState::at(13.0), &1, &mut rng()).unwrap();
        assert_eq!(out.next_state.position, 14.0);
        assert_eq!(out.costs.as_slice(), &[1.0]);
        assert_eq!(out.reward, -1.0);
        let out = generative_step(&m, &LightDarkState::at(2.0), &10, &mut rng()).unwrap();
        assert_eq!(out.next_state.position, 12.0);
        assert_eq!(out.costs.as_slice(), &[0.0]);
        let out = generative_step(&m, &LightDarkState::at(3.0), &10, &mut rng()).unwrap();
        assert_eq!(out.costs.as_slice(), &[1.0]);
    }

    #[test]
    fn terminal_input_is_rejected() {
        let m = LightDark::default();
        let done = LightDarkState {
            position: 0.0,
            terminal: true,
        };
        assert_eq!(
            generative_step(&m, &done, &1, &mut rng()),
            Err(CoreError::TerminalState)
        );
    }

    #[test]
    fn observation_noise_is_smallest_at_the_light() {
        let m = LightDark::default();
        assert_eq!(m.sigma(10.0), 0.5);
        let s = LightDarkState::at(5.0);
        let next = m.transition(&s, &5, &mut rng());
        assert_eq!(next.position, 10.0);
        assert_eq!(m.sigma(next.position), 0.5);
    }

    #[test]
    fn density_peak_and_symmetry() {
        let m = LightDark::default();
        let s = LightDarkState::at(3.0);
        let next = LightDarkState::at(4.0);
        let sigma = m.sigma(4.0);
        let peak = m.obs_density(&4.0, &s, &1, &next);
        let expected = 1.0 / (sigma * (2.0 * core::f64::consts::PI).sqrt());
        assert!((peak - expected).abs() < 1e-15);
        for d in [0.1, 1.0, 3.7] {
            let up = m.obs_density(&(4.0 + d), &s, &1, &next);
            let down = m.obs_density(&(4.0 - d), &s, &1, &next);
            assert!((up - down).abs() < 1e-15);
        }
    }

    #[test]
    fn goal_seeking_rollout_reaches_goal() {
        let m = LightDark::default();
        let policy = GoalSeekingRollout;
        let mut s = LightDarkState::at(7.3);
        let mut r = rng();
        let mut steps = 0;
        while !s.terminal {
            let a = policy.action(&m, &s, &mut r);
            s = m.transition(&s, &a, &mut r);
            steps += 1;
            assert!(steps < 20);
        }
        assert!(m.in_goal(s.position));
    }
}
