//! Van der Pol tag: pursue a target whose motion follows a noisy Van der Pol
//! oscillator, using a bearing sensor that is accurate only while looking.
//! Each look costs one unit of the constrained budget.

use core::f64::consts::{PI, TAU};

use alloc::vec;

#[allow(unused_imports)] // std's inherent float methods win when std is linked
use num_traits::{Euclid, Float};
use rand::Rng;
use rand_distr::StandardNormal;
use smallvec::smallvec;

use crate::model::{ActionSpace, Costs, Cpomdp, CpomdpSpec};
use crate::search::RolloutPolicy;
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct VdpTagParams {
    pub mu: f64,
    pub agent_speed: f64,
    /// Integration interval of one decision step.
    pub dt: f64,
    /// Std of the Gaussian noise added to each target coordinate per step.
    pub process_std: f64,
    pub tag_radius: f64,
    pub tag_reward: f64,
    pub step_reward: f64,
    pub look_cost: f64,
    pub budget: f64,
    pub discount: f64,
    pub bearing_std_look: f64,
    pub bearing_std_blind: f64,
    /// Initial target position is uniform on `[-w, w]²`.
    pub initial_half_width: f64,
    /// Tag when the target comes within the radius of the agent's whole
    /// step segment instead of its end point.
    pub swept_tag: bool,
}

impl Default for VdpTagParams {
    fn default() -> Self {
        Self {
            mu: 2.0,
            agent_speed: 1.0,
            dt: 0.1,
            process_std: 0.05,
            tag_radius: 0.1,
            tag_reward: 100.0,
            step_reward: -1.0,
            look_cost: 1.0,
            budget: 2.5,
            discount: 0.95,
            bearing_std_look: 0.05,
            bearing_std_blind: 1.0,
            initial_half_width: 4.0,
            swept_tag: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdpTagState {
    pub agent: [f64; 2],
    pub target: [f64; 2],
    pub tagged: bool,
}

/// Heading in `[0, 2π)` plus whether to take an accurate (costly) look.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdpAction {
    pub heading: f64,
    pub look: bool,
}

/// Van der Pol vector field `(μ(x − x³/3 − y), x/μ)`.
pub fn vdp_field(p: [f64; 2], mu: f64) -> [f64; 2] {
    let [x, y] = p;
    [mu * (x - x * x * x / 3.0 - y), x / mu]
}

/// One classical Runge–Kutta step of the Van der Pol field.
pub fn rk4_step(p: [f64; 2], mu: f64, h: f64) -> [f64; 2] {
    let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    let k1 = vdp_field(p, mu);
    let k2 = vdp_field(add(p, k1, h / 2.0), mu);
    let k3 = vdp_field(add(p, k2, h / 2.0), mu);
    let k4 = vdp_field(add(p, k3, h), mu);
    [
        p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Noiseless target motion over `dt`, split into `substeps` RK4 steps.
pub fn integrate(p: [f64; 2], mu: f64, dt: f64, substeps: usize) -> [f64; 2] {
    let h = dt / substeps as f64;
    (0..substeps).fold(p, |q, _| rk4_step(q, mu, h))
}

/// Target motion over one decision step: a single RK4 step of length `dt`
/// followed by Gaussian process noise.
pub fn vdp_target_step<R: Rng + ?Sized>(target: [f64; 2], params: &VdpTagParams, rng: &mut R) -> [f64; 2] {
    let p = rk4_step(target, params.mu, params.dt);
    let nx: f64 = rng.sample(StandardNormal);
    let ny: f64 = rng.sample(StandardNormal);
    [p[0] + params.process_std * nx, p[1] + params.process_std * ny]
}

/// Wraps an angle to `[0, 2π)`.
pub fn unit_turn(a: f64) -> f64 {
    Euclid::rem_euclid(&a, &TAU)
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = unit_turn(a);
    if w > PI {
        w -= TAU;
    }
    w
}

fn distance_to_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * d[0] - p[0], a[1] + t * d[1] - p[1]];
    (q[0] * q[0] + q[1] * q[1]).sqrt()
}

#[derive(Debug, Clone)]
pub struct VdpTag {
    params: VdpTagParams,
    spec: CpomdpSpec,
}

impl Default for VdpTag {
    fn default() -> Self {
        Self::new(VdpTagParams::default()).unwrap()
    }
}

impl VdpTag {
    pub fn new(params: VdpTagParams) -> Result<Self> {
        if !(params.dt > 0.0) {
            return Err(CoreError::InvalidConfig("vdptag dt must be > 0"));
        }
        if !(params.bearing_std_look > 0.0 && params.bearing_std_blind > 0.0) {
            return Err(CoreError::InvalidConfig("vdptag bearing noise must be > 0"));
        }
        if !(params.agent_speed >= 0.0 && params.process_std >= 0.0 && params.tag_radius >= 0.0) {
            return Err(CoreError::InvalidConfig("vdptag speeds and radii must be >= 0"));
        }
        let spec = CpomdpSpec::new(params.discount, vec![params.budget])?;
        Ok(Self { params, spec })
    }

    pub fn params(&self) -> &VdpTagParams {
        &self.params
    }

    fn bearing_std(&self, look: bool) -> f64 {
        if look {
            self.params.bearing_std_look
        } else {
            self.params.bearing_std_blind
        }
    }

    fn bearing(from: [f64; 2], to: [f64; 2]) -> f64 {
        (to[1] - from[1]).atan2(to[0] - from[0])
    }
}

impl Cpomdp for VdpTag {
    type State = VdpTagState;
    type Action = VdpAction;
    type Observation = f64;

    fn spec(&self) -> &CpomdpSpec {
        &self.spec
    }

    fn is_terminal(&self, s: &VdpTagState) -> bool {
        s.tagged
    }

    fn sample_initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> VdpTagState {
        let w = self.params.initial_half_width;
        VdpTagState {
            agent: [0.0, 0.0],
            target: [rng.random_range(-w..=w), rng.random_range(-w..=w)],
            tagged: false,
        }
    }

    fn action_space(&self) -> ActionSpace<'_, VdpAction> {
        ActionSpace::Continuous
    }

    fn sample_action<R: Rng + ?Sized>(&self, rng: &mut R) -> VdpAction {
        VdpAction {
            heading: rng.random::<f64>() * TAU,
            look: rng.random::<bool>(),
        }
    }

    fn transition<R: Rng + ?Sized>(&self, s: &VdpTagState, a: &VdpAction, rng: &mut R) -> VdpTagState {
        let speed = self.params.agent_speed;
        let agent = [
            s.agent[0] + speed * a.heading.cos(),
            s.agent[1] + speed * a.heading.sin(),
        ];
        let target = vdp_target_step(s.target, &self.params, rng);
        let miss = if self.params.swept_tag {
            distance_to_segment(target, s.agent, agent)
        } else {
            distance_to_segment(target, agent, agent)
        };
        let tagged = miss <= self.params.tag_radius;
        VdpTagState { agent, target, tagged }
    }

    fn sample_observation<R: Rng + ?Sized>(
        &self,
        _s: &VdpTagState,
        a: &VdpAction,
        next: &VdpTagState,
        rng: &mut R,
    ) -> f64 {
        let noise: f64 = rng.sample(StandardNormal);
        wrap_angle(Self::bearing(next.agent, next.target) + self.bearing_std(a.look) * noise)
    }

    /// Wrapped-normal density of the bearing error (three wraps).
    fn obs_density(&self, o: &f64, _s: &VdpTagState, a: &VdpAction, next: &VdpTagState) -> f64 {
        let std = self.bearing_std(a.look);
        let err = wrap_angle(*o - Self::bearing(next.agent, next.target));
        let norm = 1.0 / (std * (2.0 * PI).sqrt());
        [-TAU, 0.0, TAU]
            .iter()
            .map(|k| {
                let z = (err + k) / std;
                norm * (-0.5 * z * z).exp()
            })
            .sum()
    }

    fn reward(&self, _s: &VdpTagState, _a: &VdpAction, next: &VdpTagState) -> f64 {
        if next.tagged {
            self.params.tag_reward
        } else {
            self.params.step_reward
        }
    }

    fn costs(&self, _s: &VdpTagState, a: &VdpAction, _next: &VdpTagState) -> Costs {
        smallvec![if a.look { self.params.look_cost } else { 0.0 }]
    }
}

/// Heads straight at the target's current position. The look flag is a fair
/// coin, as in the uniform action sampler, so rollouts neither favour nor
/// ignore the cost of looking.
#[derive(Debug, Clone, Copy, Default)]
pub struct PursuitRollout;

impl RolloutPolicy<VdpTag> for PursuitRollout {
    fn action<R: Rng + ?Sized>(&self, _model: &VdpTag, s: &VdpTagState, rng: &mut R) -> VdpAction {
        VdpAction {
            heading: unit_turn(VdpTag::bearing(s.agent, s.target)),
            look: rng.random::<bool>(),
        }
    }
}
