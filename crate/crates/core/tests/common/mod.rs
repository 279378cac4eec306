//! Small hand-checkable models shared by the integration tests.
#![allow(dead_code)]

use cpomdp_core::model::{ActionSpace, Costs, Cpomdp, CpomdpSpec};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smallvec::smallvec;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic counter with one action. Reward and cost depend only on the
/// step index, and the observation reveals the index.
#[derive(Debug, Clone)]
pub struct Chain {
    pub spec: CpomdpSpec,
}

impl Chain {
    pub fn new(discount: f64) -> Self {
        Self {
            spec: CpomdpSpec::new(discount, vec![1.0]).unwrap(),
        }
    }

    pub fn reward_at(t: u32) -> f64 {
        1.0 + 0.5 * t as f64
    }

    pub fn cost_at(t: u32) -> f64 {
        if t % 3 == 1 {
            1.0
        } else {
            0.25
        }
    }
}

const ONE: [u8; 1] = [0];

impl Cpomdp for Chain {
    type State = u32;
    type Action = u8;
    type Observation = u32;

    fn spec(&self) -> &CpomdpSpec {
        &self.spec
    }
    fn is_terminal(&self, _s: &u32) -> bool {
        false
    }
    fn sample_initial_state<R: Rng + ?Sized>(&self, _rng: &mut R) -> u32 {
        0
    }
    fn action_space(&self) -> ActionSpace<'_, u8> {
        ActionSpace::Finite(&ONE)
    }
    fn sample_action<R: Rng + ?Sized>(&self, _rng: &mut R) -> u8 {
        0
    }
    fn transition<R: Rng + ?Sized>(&self, s: &u32, _a: &u8, _rng: &mut R) -> u32 {
        s + 1
    }
    fn sample_observation<R: Rng + ?Sized>(&self, _s: &u32, _a: &u8, next: &u32, _rng: &mut R) -> u32 {
        *next
    }
    fn obs_density(&self, o: &u32, _s: &u32, _a: &u8, next: &u32) -> f64 {
        f64::from(u8::from(o == next))
    }
    fn reward(&self, s: &u32, _a: &u8, _next: &u32) -> f64 {
        Self::reward_at(*s)
    }
    fn costs(&self, s: &u32, _a: &u8, _next: &u32) -> Costs {
        smallvec![Self::cost_at(*s)]
    }
    fn discrete_observations(&self) -> bool {
        true
    }
}

/// Two states, two actions, `s' = s xor a`, observation `o = s'`. Nothing in
/// the model consumes randomness except the initial state.
#[derive(Debug, Clone)]
pub struct Flip {
    pub spec: CpomdpSpec,
}

impl Default for Flip {
    fn default() -> Self {
        Self {
            spec: CpomdpSpec::new(0.9, vec![0.5]).unwrap(),
        }
    }
}

const FLIP_ACTIONS: [u8; 2] = [0, 1];

impl Cpomdp for Flip {
    type State = u8;
    type Action = u8;
    type Observation = u8;

    fn spec(&self) -> &CpomdpSpec {
        &self.spec
    }
    fn is_terminal(&self, _s: &u8) -> bool {
        false
    }
    fn sample_initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        rng.random_range(0..2)
    }
    fn action_space(&self) -> ActionSpace<'_, u8> {
        ActionSpace::Finite(&FLIP_ACTIONS)
    }
    fn sample_action<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        rng.random_range(0..2)
    }
    fn transition<R: Rng + ?Sized>(&self, s: &u8, a: &u8, _rng: &mut R) -> u8 {
        s ^ a
    }
    fn sample_observation<R: Rng + ?Sized>(&self, _s: &u8, _a: &u8, next: &u8, _rng: &mut R) -> u8 {
        *next
    }
    fn obs_density(&self, o: &u8, _s: &u8, _a: &u8, next: &u8) -> f64 {
        f64::from(u8::from(o == next))
    }
    fn reward(&self, _s: &u8, _a: &u8, next: &u8) -> f64 {
        f64::from(*next)
    }
    fn costs(&self, _s: &u8, a: &u8, _next: &u8) -> Costs {
        smallvec![f64::from(*a)]
    }
    fn discrete_observations(&self) -> bool {
        true
    }
}

/// Gaussian random walk on the line with a noisy position sensor. Reward is
/// the next position and the cost is its magnitude.
#[derive(Debug, Clone)]
pub struct Walk {
    pub spec: CpomdpSpec,
    pub step_std: f64,
    pub obs_std: f64,
}

impl Walk {
    pub fn new(step_std: f64, obs_std: f64) -> Self {
        Self {
            spec: CpomdpSpec::new(0.9, vec![1.0]).unwrap(),
            step_std,
            obs_std,
        }
    }
}

const WALK_ACTIONS: [i32; 3] = [-1, 0, 1];

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

impl Cpomdp for Walk {
    type State = f64;
    type Action = i32;
    type Observation = f64;

    fn spec(&self) -> &CpomdpSpec {
        &self.spec
    }
    fn is_terminal(&self, _s: &f64) -> bool {
        false
    }
    fn sample_initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        normal(rng)
    }
    fn action_space(&self) -> ActionSpace<'_, i32> {
        ActionSpace::Finite(&WALK_ACTIONS)
    }
    fn sample_action<R: Rng + ?Sized>(&self, rng: &mut R) -> i32 {
        WALK_ACTIONS[rng.random_range(0..3)]
    }
    fn transition<R: Rng + ?Sized>(&self, s: &f64, a: &i32, rng: &mut R) -> f64 {
        s + f64::from(*a) + self.step_std * normal(rng)
    }
    fn sample_observation<R: Rng + ?Sized>(&self, _s: &f64, _a: &i32, next: &f64, rng: &mut R) -> f64 {
        next + self.obs_std * normal(rng)
    }
    fn obs_density(&self, o: &f64, _s: &f64, _a: &i32, next: &f64) -> f64 {
        let z = (o - next) / self.obs_std;
        (-0.5 * z * z).exp() / (self.obs_std * (2.0 * std::f64::consts::PI).sqrt())
    }
    fn reward(&self, _s: &f64, _a: &i32, next: &f64) -> f64 {
        *next
    }
    fn costs(&self, _s: &f64, _a: &i32, next: &f64) -> Costs {
        smallvec![next.abs()]
    }
}
