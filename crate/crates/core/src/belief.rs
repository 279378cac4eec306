//! Weighted particle beliefs and the generative particle-filter update.

use alloc::vec::Vec;

use rand::Rng;

use crate::model::{zero_costs, Costs, Cpomdp};
use crate::{CoreError, Result};

/// Weighted particle set.
///
/// Weights are kept normalized (summing to one within 1e-9) by every
/// constructor, and prefix sums are cached so that weighted draws cost
/// `O(log n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleBelief<S> {
    particles: Vec<S>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    uniform: bool,
}

impl<S: Clone> ParticleBelief<S> {
    /// Equally weighted belief.
    pub fn uniform(particles: Vec<S>) -> Result<Self> {
        if particles.is_empty() {
            return Err(CoreError::EmptyBelief);
        }
        let n = particles.len();
        let w = 1.0 / n as f64;
        let weights = alloc::vec![w; n];
        let cumulative = (1..=n).map(|i| i as f64 / n as f64).collect();
        Ok(Self {
            particles,
            weights,
            cumulative,
            uniform: true,
        })
    }

    /// Belief with explicit nonnegative weights; they are normalized here.
    pub fn weighted(particles: Vec<S>, weights: Vec<f64>) -> Result<Self> {
        if particles.is_empty() {
            return Err(CoreError::EmptyBelief);
        }
        if particles.len() != weights.len() {
            return Err(CoreError::LengthMismatch {
                particles: particles.len(),
                weights: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(CoreError::InvalidWeight(*w));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(CoreError::ParticleDepletion);
        }
        let weights: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        // pin the last prefix sum so draws never fall off the end
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self {
            particles,
            weights,
            cumulative,
            uniform: false,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[S] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Effective sample size `1 / Σ w²`.
    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Index drawn proportionally to weight. Consumes exactly one `f64`.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        if self.uniform {
            return ((u * self.len() as f64) as usize).min(self.len() - 1);
        }
        self.cumulative.partition_point(|c| *c <= u).min(self.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &S {
        &self.particles[self.sample_index(rng)]
    }

    /// Weighted mean of a scalar feature.
    pub fn mean_by(&self, f: impl Fn(&S) -> f64) -> f64 {
        self.particles.iter().zip(&self.weights).map(|(s, w)| w * f(s)).sum()
    }

    /// Systematic resampling to `m` equally weighted particles.
    pub fn systematic_resample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Self> {
        if m == 0 {
            return Err(CoreError::EmptyBelief);
        }
        let step = 1.0 / m as f64;
        let mut u = rng.random::<f64>() * step;
        let mut out = Vec::with_capacity(m);
        let mut i = 0;
        for _ in 0..m {
            while i + 1 < self.len() && self.cumulative[i] <= u {
                i += 1;
            }
            out.push(self.particles[i].clone());
            u += step;
        }
        Self::uniform(out)
    }
}

/// `n` i.i.d. draws from the model's initial state distribution.
pub fn initial_belief<M: Cpomdp, R: Rng + ?Sized>(
    model: &M,
    n: usize,
    rng: &mut R,
) -> Result<ParticleBelief<M::State>> {
    if n == 0 {
        return Err(CoreError::EmptyBelief);
    }
    let particles = (0..n).map(|_| model.sample_initial_state(rng)).collect();
    ParticleBelief::uniform(particles)
}

/// Result of one generative particle-filter step.
#[derive(Debug, Clone)]
pub struct PfOutcome<S, O> {
    pub belief: ParticleBelief<S>,
    /// Observation the update conditioned on.
    pub observation: Option<O>,
    /// Posterior-weighted mean of per-particle rewards.
    pub reward: f64,
    /// Posterior-weighted mean of per-particle cost vectors.
    pub costs: Costs,
    /// All likelihood weights were zero; the propagated particles were kept
    /// with uniform weights instead.
    pub depleted: bool,
}

enum ObsSource<'a, O> {
    /// Draw the observation from the first propagated non-terminal particle.
    Generate,
    Given(&'a O),
}

/// `G_PF(m)`: propagate `m` ancestors drawn with replacement, condition on an
/// observation produced by one of them, and return the posterior belief with
/// its belief-level reward and cost.
///
/// Terminal particles stay put with zero reward and cost. The returned belief
/// is resampled to equal weights when its effective sample size drops below
/// `m / 10`.
pub fn pf_step<M: Cpomdp, R: Rng + ?Sized>(
    model: &M,
    belief: &ParticleBelief<M::State>,
    action: &M::Action,
    m: usize,
    rng: &mut R,
) -> Result<PfOutcome<M::State, M::Observation>> {
    propagate(model, belief, action, m, ObsSource::Generate, rng)
}

/// Bootstrap filter update on an observation received from the environment.
///
/// The environment only reports an observation while the episode goes on,
/// so particles that became terminal get zero weight. After depletion the
/// non-terminal propagated particles are kept with uniform weights.
pub fn bootstrap_update<M: Cpomdp, R: Rng + ?Sized>(
    model: &M,
    belief: &ParticleBelief<M::State>,
    action: &M::Action,
    observation: &M::Observation,
    n: usize,
    rng: &mut R,
) -> Result<PfOutcome<M::State, M::Observation>> {
    propagate(model, belief, action, n, ObsSource::Given(observation), rng)
}

fn propagate<M: Cpomdp, R: Rng + ?Sized>(
    model: &M,
    belief: &ParticleBelief<M::State>,
    action: &M::Action,
    m: usize,
    source: ObsSource<'_, M::Observation>,
    rng: &mut R,
) -> Result<PfOutcome<M::State, M::Observation>> {
    if m == 0 || belief.is_empty() {
        return Err(CoreError::EmptyBelief);
    }
    let k = model.n_costs();
    let ancestors: Vec<usize> = (0..m).map(|_| belief.sample_index(rng)).collect();
    let next: Vec<M::State> = ancestors
        .iter()
        .map(|&i| {
            let s = &belief.particles[i];
            if model.is_terminal(s) {
                s.clone()
            } else {
                model.transition(s, action, rng)
            }
        })
        .collect();

    let given = matches!(source, ObsSource::Given(_));
    let observation = match source {
        ObsSource::Given(o) => o.clone(),
        ObsSource::Generate => {
            let live = ancestors
                .iter()
                .zip(&next)
                .find(|(i, _)| !model.is_terminal(&belief.particles[**i]));
            match live {
                Some((&i, sp)) => model.sample_observation(&belief.particles[i], action, sp, rng),
                None => {
                    return Ok(PfOutcome {
                        belief: ParticleBelief::uniform(next)?,
                        observation: None,
                        reward: 0.0,
                        costs: zero_costs(k),
                        depleted: false,
                    })
                }
            }
        }
    };

    let mut weights = Vec::with_capacity(m);
    let mut rewards = Vec::with_capacity(m);
    let mut costs = Vec::with_capacity(m);
    for (&i, sp) in ancestors.iter().zip(&next) {
        let s = &belief.particles[i];
        let alive = !given || !model.is_terminal(sp);
        weights.push(if alive {
            model.obs_density(&observation, s, action, sp)
        } else {
            0.0
        });
        if model.is_terminal(s) {
            rewards.push(0.0);
            costs.push(zero_costs(k));
        } else {
            rewards.push(model.reward(s, action, sp));
            costs.push(model.costs(s, action, sp));
        }
    }

    let total: f64 = weights.iter().sum();
    let depleted = !(total > 0.0 && total.is_finite());
    if depleted {
        let any_live = next.iter().any(|sp| !model.is_terminal(sp));
        for (w, sp) in weights.iter_mut().zip(&next) {
            *w = if given && any_live && model.is_terminal(sp) {
                0.0
            } else {
                1.0
            };
        }
    }
    let total: f64 = weights.iter().sum();
    let reward = weights.iter().zip(&rewards).map(|(w, r)| w * r).sum::<f64>() / total;
    let mut mean_costs = zero_costs(k);
    for (w, c) in weights.iter().zip(&costs) {
        for (acc, ci) in mean_costs.iter_mut().zip(c) {
            *acc += w * ci;
        }
    }
    mean_costs.iter_mut().for_each(|c| *c /= total);

    let mut posterior = if weights.iter().all(|w| *w == 1.0) {
        ParticleBelief::uniform(next)?
    } else {
        ParticleBelief::weighted(next, weights)?
    };
    if posterior.effective_sample_size() < m as f64 / 10.0 {
        posterior = posterior.systematic_resample(m, rng)?;
    }
    Ok(PfOutcome {
        belief: posterior,
        observation: Some(observation),
        reward,
        costs: mean_costs,
        depleted,
    })
}
