//! Lagrange multiplier state, the Lagrangian UCB score, and the ν-close
//! stochastic action policy.

use alloc::vec::Vec;

#[allow(unused_imports)] // std's inherent float methods win when std is linked
use num_traits::Float;
use rand::Rng;

use crate::lp::LinearProgram;
use crate::{CoreError, Result};

/// Dual step sizes `α_i = a / (b + i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    a: f64,
    b: f64,
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self { a: 1.0, b: 100.0 }
    }
}

impl StepSchedule {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
            return Err(CoreError::InvalidConfig("step schedule parameters must be positive"));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Step size for iteration `i ≥ 1`.
    pub fn step(&self, i: u64) -> f64 {
        self.a / (self.b + i as f64)
    }
}

/// Nonnegative multiplier vector driven by projected dual ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaState {
    lambda: Vec<f64>,
    iteration: u64,
    schedule: StepSchedule,
}

impl LambdaState {
    pub fn new(initial: Vec<f64>, schedule: StepSchedule) -> Result<Self> {
        if initial.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(CoreError::InvalidConfig("initial multipliers must be finite and >= 0"));
        }
        Ok(Self {
            lambda: initial,
            iteration: 0,
            schedule,
        })
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// `λ ← [λ + α_i (Q_C − ĉ)]⁺`.
    pub fn update(&mut self, cost_value: &[f64], budget: &[f64]) {
        self.iteration += 1;
        let alpha = self.schedule.step(self.iteration);
        for ((l, q), c) in self.lambda.iter_mut().zip(cost_value).zip(budget) {
            let next = *l + alpha * (q - c);
            // NaN from an infinite budget minus an infinite value projects to 0
            *l = if next > 0.0 { next } else { 0.0 };
        }
    }
}

/// Remaining budget after an executed step: `max(0, (ĉ − c) / γ)`.
pub fn update_budget(budget: &[f64], incurred: &[f64], discount: f64) -> Vec<f64> {
    budget
        .iter()
        .zip(incurred)
        .map(|(b, c)| ((b - c) / discount).max(0.0))
        .collect()
}

/// Distribution over a node's child actions, indexed by child position.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticActionPolicy {
    pub support: Vec<usize>,
    pub probabilities: Vec<f64>,
}

impl StochasticActionPolicy {
    pub fn point(index: usize) -> Self {
        Self {
            support: alloc::vec![index],
            probabilities: alloc::vec![1.0],
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.support.len() == 1
    }

    /// Draws a child index. A point mass consumes no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.support.len() == 1 {
            return self.support[0];
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in self.support.iter().zip(&self.probabilities) {
            acc += p;
            if u < acc {
                return *i;
            }
        }
        *self.support.last().unwrap()
    }

    pub fn probability_of(&self, index: usize) -> f64 {
        self.support
            .iter()
            .position(|i| *i == index)
            .map_or(0.0, |k| self.probabilities[k])
    }
}

/// Child statistics needed to score an action.
#[derive(Debug, Clone, Copy)]
pub struct ActionScoreInput<'a> {
    pub visits: u32,
    pub reward_value: f64,
    pub cost_value: &'a [f64],
}

/// `Q − λᵀQ_C + κ √(log N(h) / N(ha))`; unvisited children score `+∞`.
pub fn lagrangian_score(child: &ActionScoreInput<'_>, parent_visits: u32, lambda: &[f64], exploration: f64) -> f64 {
    if child.visits == 0 {
        return f64::INFINITY;
    }
    let penalty: f64 = lambda.iter().zip(child.cost_value).map(|(l, q)| l * q).sum();
    let mut score = child.reward_value - penalty;
    if exploration != 0.0 {
        let ln_n = (parent_visits.max(1) as f64).ln();
        score += exploration * (ln_n / child.visits as f64).sqrt();
    }
    score
}

/// Scores every child with [`lagrangian_score`] and hands the result to
/// [`stochastic_policy`].
pub fn greedy_policy(
    children: &[ActionScoreInput<'_>],
    parent_visits: u32,
    lambda: &[f64],
    exploration: f64,
    nu: f64,
    budget: &[f64],
) -> Result<StochasticActionPolicy> {
    if children.is_empty() {
        return Err(CoreError::NoChildren);
    }
    let scores: Vec<f64> = children
        .iter()
        .map(|c| lagrangian_score(c, parent_visits, lambda, exploration))
        .collect();
    let costs: Vec<&[f64]> = children.iter().map(|c| c.cost_value).collect();
    stochastic_policy(&scores, &costs, nu, budget, lambda)
}

/// Policy over the ν-close actions `A* = {a : Q_λ(a) ≥ max Q_λ − ν}`.
///
/// A single ν-close action gets all the mass. Otherwise the policy maximizes
/// the expected `Q_λ` over `A*` subject to the expected cost values staying
/// within `budget` componentwise. When no mixture is feasible, the mass goes
/// to the action with the smallest `λᵀQ_C` (ties to higher `Q_λ`). An empty
/// `budget` means there is nothing to enforce.
pub fn stochastic_policy(
    q_lambda: &[f64],
    q_costs: &[&[f64]],
    nu: f64,
    budget: &[f64],
    lambda: &[f64],
) -> Result<StochasticActionPolicy> {
    if q_lambda.is_empty() {
        return Err(CoreError::NoChildren);
    }
    if !(nu >= 0.0) {
        return Err(CoreError::InvalidConfig("nu must be >= 0"));
    }
    if let Some(i) = q_lambda.iter().position(|q| *q == f64::INFINITY) {
        return Ok(StochasticActionPolicy::point(i));
    }
    let best = q_lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let close: Vec<usize> = (0..q_lambda.len()).filter(|&i| q_lambda[i] >= best - nu).collect();
    let argmax = close.iter().copied().find(|&i| q_lambda[i] == best).unwrap_or(close[0]);
    if close.len() == 1 || budget.is_empty() {
        return Ok(StochasticActionPolicy::point(argmax));
    }
    let within = |i: usize| q_costs[i].iter().zip(budget).all(|(q, c)| *q <= *c);
    if within(argmax) {
        return Ok(StochasticActionPolicy::point(argmax));
    }

    let solved = if budget.len() == 1 {
        mix_single_constraint(q_lambda, q_costs, budget[0], &close)
    } else {
        mix_by_simplex(q_lambda, q_costs, budget, &close)
    };
    match solved {
        Some(policy) => Ok(policy),
        None => Ok(StochasticActionPolicy::point(least_penalized(
            q_lambda, q_costs, lambda, &close,
        ))),
    }
}

/// Closed form for one constraint: the optimum is a single feasible action
/// or a two-action mixture that meets the budget exactly.
fn mix_single_constraint(
    q_lambda: &[f64],
    q_costs: &[&[f64]],
    budget: f64,
    close: &[usize],
) -> Option<StochasticActionPolicy> {
    let cost = |i: usize| q_costs[i][0];
    let mut best: Option<(f64, StochasticActionPolicy)> = None;
    let mut offer = |value: f64, policy: StochasticActionPolicy| {
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, policy));
        }
    };
    for &lo in close.iter().filter(|&&i| cost(i) <= budget) {
        offer(q_lambda[lo], StochasticActionPolicy::point(lo));
        for &hi in close.iter().filter(|&&i| cost(i) > budget) {
            let p_hi = (budget - cost(lo)) / (cost(hi) - cost(lo));
            if p_hi <= 0.0 {
                continue;
            }
            let value = (1.0 - p_hi) * q_lambda[lo] + p_hi * q_lambda[hi];
            offer(
                value,
                StochasticActionPolicy {
                    support: alloc::vec![lo, hi],
                    probabilities: alloc::vec![1.0 - p_hi, p_hi],
                },
            );
        }
    }
    best.map(|(_, p)| p)
}

fn mix_by_simplex(
    q_lambda: &[f64],
    q_costs: &[&[f64]],
    budget: &[f64],
    close: &[usize],
) -> Option<StochasticActionPolicy> {
    let objective = close.iter().map(|&i| q_lambda[i]).collect();
    let mut lp = LinearProgram::maximize(objective).equal(alloc::vec![1.0; close.len()], 1.0);
    for (k, c) in budget.iter().enumerate() {
        lp = lp.less_eq(close.iter().map(|&i| q_costs[i][k]).collect(), *c);
    }
    let sol = lp.solve().ok()?;
    let mut support = Vec::new();
    let mut probabilities = Vec::new();
    for (&i, &p) in close.iter().zip(&sol.x) {
        if p > 1e-12 {
            support.push(i);
            probabilities.push(p);
        }
    }
    let total: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= total);
    Some(StochasticActionPolicy { support, probabilities })
}

fn least_penalized(q_lambda: &[f64], q_costs: &[&[f64]], lambda: &[f64], close: &[usize]) -> usize {
    let penalty = |i: usize| -> f64 { lambda.iter().zip(q_costs[i]).map(|(l, q)| l * q).sum() };
    let mut pick = close[0];
    for &i in &close[1..] {
        let (pi, pp) = (penalty(i), penalty(pick));
        if pi < pp || (pi == pp && q_lambda[i] > q_lambda[pick]) {
            pick = i;
        }
    }
    pick
}
