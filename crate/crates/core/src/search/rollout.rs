use rand::Rng;

use crate::model::{zero_costs, Cpomdp, Returns};

/// Default policy used to estimate values below newly created nodes.
pub trait RolloutPolicy<M: Cpomdp> {
    fn action<R: Rng + ?Sized>(&self, model: &M, state: &M::State, rng: &mut R) -> M::Action;
}

/// Uniformly random actions.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomRollout;

impl<M: Cpomdp> RolloutPolicy<M> for RandomRollout {
    fn action<R: Rng + ?Sized>(&self, model: &M, _state: &M::State, rng: &mut R) -> M::Action {
        model.sample_action(rng)
    }
}

/// Discounted reward and cost returns of `policy` run for `depth` steps or
/// until a terminal state.
pub fn rollout<M: Cpomdp, P: RolloutPolicy<M>, R: Rng + ?Sized>(
    model: &M,
    policy: &P,
    state: &M::State,
    depth: usize,
    rng: &mut R,
) -> Returns {
    let k = model.n_costs();
    let gamma = model.discount();
    let mut ret = Returns {
        reward: 0.0,
        costs: zero_costs(k),
    };
    if depth == 0 || model.is_terminal(state) {
        return ret;
    }
    let mut scale = 1.0;
    let mut s = state.clone();
    for _ in 0..depth {
        let a = policy.action(model, &s, rng);
        let out = model.generate(&s, &a, rng);
        ret.reward += scale * out.reward;
        for (acc, c) in ret.costs.iter_mut().zip(&out.costs) {
            *acc += scale * c;
        }
        scale *= gamma;
        s = out.next_state;
        if model.is_terminal(&s) {
            break;
        }
    }
    ret
}
