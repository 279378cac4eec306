//! Episode execution and the three experiment protocols.
//!
//! An episode alternates planning from the current particle belief,
//! executing the chosen action in the environment, and a bootstrap filter
//! update on the received observation. The planner may see a different model
//! than the environment (the Pareto sweep plans on a scalarized model while
//! the environment still reports raw rewards and costs).

use std::time::Instant;

use cpomdp_core::belief::{bootstrap_update, initial_belief};
use cpomdp_core::dual::update_budget;
use cpomdp_core::model::{generative_step, Cpomdp};
use cpomdp_core::problems::{GoalSeekingRollout, LightDark, PursuitRollout, Scalarized, ScalarizedRollout, VdpTag};
use cpomdp_core::search::{RandomRollout, RolloutPolicy};
use cpomdp_core::{plan, ParticleBelief, PlanOutcome, PlannerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ProblemId, RolloutId, RunConfig};
use crate::error::HarnessError;
use crate::planners::PlannerId;

/// Loop limits and bookkeeping switches of an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSettings {
    pub max_steps: usize,
    pub belief_particles: usize,
    pub rolling_budget: bool,
    pub record_wall_time: bool,
}

impl EpisodeSettings {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            max_steps: cfg.max_steps,
            belief_particles: cfg.belief_particles,
            rolling_budget: cfg.rolling_budget,
            record_wall_time: cfg.record_wall_time,
        }
    }
}

/// Raw reward and costs of one executed step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepLog {
    pub action: String,
    pub reward: f64,
    pub costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeResult {
    pub planner: String,
    pub problem: String,
    pub episode: usize,
    pub seed: u64,
    pub reward_return: f64,
    pub cost_returns: Vec<f64>,
    pub steps: usize,
    pub depletions: u64,
    /// Mean planning time per step; zero unless timing was requested.
    pub wall_ms: f64,
    pub log: Vec<StepLog>,
}

impl EpisodeResult {
    /// Discounted returns recomputed from the step log.
    pub fn recount(&self, discount: f64) -> (f64, Vec<f64>) {
        let k = self.cost_returns.len();
        let mut reward = 0.0;
        let mut costs = vec![0.0; k];
        for (t, step) in self.log.iter().enumerate() {
            let g = discount.powi(t as i32);
            reward += g * step.reward;
            for (acc, c) in costs.iter_mut().zip(&step.costs) {
                *acc += g * c;
            }
        }
        (reward, costs)
    }
}

/// Per-episode seed derived from the base seed and the episode index with
/// SplitMix64 finalization. Planners share seeds so comparisons are paired.
pub fn episode_seed(base: u64, episode: usize) -> u64 {
    let mut z = base
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(episode as u64)
        .wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator streams of one episode.
pub struct EpisodeRngs {
    pub env: ChaCha8Rng,
    pub planner: ChaCha8Rng,
    pub filter: ChaCha8Rng,
}

impl EpisodeRngs {
    pub fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(k);
            r
        };
        Self {
            env: stream(0),
            planner: stream(1),
            filter: stream(2),
        }
    }
}

/// Runs one episode with an arbitrary decision rule.
///
/// `decide` receives the current belief, the remaining budget and the
/// planner's generator; it returns the action to execute and the planning
/// time it wants recorded.
pub fn run_episode_with<E, M, D>(
    env: &E,
    planning: &M,
    settings: &EpisodeSettings,
    seed: u64,
    mut decide: D,
) -> Result<EpisodeResult, HarnessError>
where
    E: Cpomdp,
    M: Cpomdp<State = E::State, Action = E::Action, Observation = E::Observation>,
    D: FnMut(&ParticleBelief<M::State>, &[f64], &mut ChaCha8Rng) -> Result<E::Action, HarnessError>,
{
    if settings.max_steps == 0 {
        return Err(HarnessError::Config("max_steps must be >= 1".into()));
    }
    let mut rngs = EpisodeRngs::new(seed);
    let gamma = env.discount();
    let mut state = env.sample_initial_state(&mut rngs.env);
    let mut belief = initial_belief(planning, settings.belief_particles, &mut rngs.filter)?;
    let mut budget = planning.budget().to_vec();
    let mut reward_return = 0.0;
    let mut cost_returns = vec![0.0; env.n_costs()];
    let mut scale = 1.0;
    let mut depletions = 0;
    let mut log = Vec::new();
    let mut planning_ms = 0.0;

    while log.len() < settings.max_steps && !env.is_terminal(&state) {
        let started = settings.record_wall_time.then(Instant::now);
        log::trace!("seed {seed} step {}: budget {budget:?}", log.len());
        let action = decide(&belief, &budget, &mut rngs.planner)?;
        if let Some(t) = started {
            planning_ms += t.elapsed().as_secs_f64() * 1e3;
        }
        let out = generative_step(env, &state, &action, &mut rngs.env)?;
        reward_return += scale * out.reward;
        for (acc, c) in cost_returns.iter_mut().zip(&out.costs) {
            *acc += scale * c;
        }
        scale *= gamma;
        log.push(StepLog {
            action: format!("{action:?}"),
            reward: out.reward,
            costs: out.costs.to_vec(),
        });
        if settings.rolling_budget {
            budget = update_budget(&budget, &out.costs, gamma);
        }
        state = out.next_state;
        if env.is_terminal(&state) {
            break;
        }
        let update = bootstrap_update(
            planning,
            &belief,
            &action,
            &out.observation,
            settings.belief_particles,
            &mut rngs.filter,
        )?;
        if update.depleted {
            depletions += 1;
            log::debug!("episode seed {seed}: belief depleted at step {}", log.len());
        }
        belief = update.belief;
    }

    let steps = log.len();
    Ok(EpisodeResult {
        planner: String::new(),
        problem: String::new(),
        episode: 0,
        seed,
        reward_return,
        cost_returns,
        steps,
        depletions,
        wall_ms: if settings.record_wall_time && steps > 0 {
            planning_ms / steps as f64
        } else {
            0.0
        },
        log,
    })
}

/// Receding-horizon episode driven by `plan`.
pub fn run_episode<E, M, P>(
    env: &E,
    planning: &M,
    planner: &PlannerConfig,
    rollout: &P,
    settings: &EpisodeSettings,
    seed: u64,
) -> Result<EpisodeResult, HarnessError>
where
    E: Cpomdp,
    M: Cpomdp<State = E::State, Action = E::Action, Observation = E::Observation>,
    P: RolloutPolicy<M>,
{
    run_episode_with(env, planning, settings, seed, |belief, budget, rng| {
        let out: PlanOutcome<M::Action> = plan(planning, belief, budget, planner, rollout, rng)?;
        Ok(out.action)
    })
}

/// Either uniformly random rollouts or a problem heuristic.
#[derive(Debug, Clone, Copy)]
pub enum Rollout<H> {
    Random,
    Heuristic(H),
}

impl<H> Rollout<H> {
    pub fn new(id: RolloutId, heuristic: H) -> Self {
        match id {
            RolloutId::Random => Rollout::Random,
            RolloutId::Heuristic => Rollout::Heuristic(heuristic),
        }
    }
}

impl<M: Cpomdp, H: RolloutPolicy<M>> RolloutPolicy<M> for Rollout<H> {
    fn action<R: Rng + ?Sized>(&self, model: &M, state: &M::State, rng: &mut R) -> M::Action {
        match self {
            Rollout::Random => RandomRollout.action(model, state, rng),
            Rollout::Heuristic(h) => h.action(model, state, rng),
        }
    }
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSem {
    pub mean: f64,
    pub sem: f64,
}

impl MeanSem {
    /// Summation runs over sorted values, so the result does not depend on
    /// the order of `xs`.
    pub fn of(xs: &[f64]) -> Self {
        let mut v = xs.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        if v.is_empty() {
            return Self {
                mean: f64::NAN,
                sem: f64::NAN,
            };
        }
        let mean = v.iter().sum::<f64>() / n;
        let sem = if v.len() > 1 {
            let mut sq: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
            sq.sort_by(f64::total_cmp);
            (sq.iter().sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        Self { mean, sem }
    }

    /// `mean ± 2·sem` as a closed interval.
    pub fn interval(&self, width: f64) -> (f64, f64) {
        (self.mean - width * self.sem, self.mean + width * self.sem)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateStats {
    pub count: usize,
    pub reward: MeanSem,
    pub costs: Vec<MeanSem>,
    pub steps: MeanSem,
}

pub fn aggregate(results: &[EpisodeResult]) -> AggregateStats {
    let k = results.first().map_or(0, |r| r.cost_returns.len());
    let rewards: Vec<f64> = results.iter().map(|r| r.reward_return).collect();
    let steps: Vec<f64> = results.iter().map(|r| r.steps as f64).collect();
    AggregateStats {
        count: results.len(),
        reward: MeanSem::of(&rewards),
        costs: (0..k)
            .map(|j| MeanSem::of(&results.iter().map(|r| r.cost_returns[j]).collect::<Vec<_>>()))
            .collect(),
        steps: MeanSem::of(&steps),
    }
}

fn labelled(mut r: EpisodeResult, planner: &str, problem: &str, episode: usize) -> EpisodeResult {
    r.planner = planner.to_string();
    r.problem = problem.to_string();
    r.episode = episode;
    r
}

/// Runs `episodes` episodes in parallel and returns them in episode order.
pub fn run_episodes<E, M, P>(
    env: &E,
    planning: &M,
    planner: &PlannerConfig,
    rollout: &P,
    settings: &EpisodeSettings,
    base_seed: u64,
    episodes: usize,
    label: (&str, &str),
) -> Result<Vec<EpisodeResult>, HarnessError>
where
    E: Cpomdp + Sync,
    M: Cpomdp<State = E::State, Action = E::Action, Observation = E::Observation> + Sync,
    P: RolloutPolicy<M> + Sync,
{
    (0..episodes)
        .into_par_iter()
        .map(|i| {
            let seed = episode_seed(base_seed, i);
            run_episode(env, planning, planner, rollout, settings, seed).map(|r| labelled(r, label.0, label.1, i))
        })
        .collect()
}

pub fn lightdark(cfg: &RunConfig) -> Result<LightDark, HarnessError> {
    Ok(LightDark::new(cfg.lightdark.clone())?)
}

pub fn vdptag(cfg: &RunConfig) -> Result<VdpTag, HarnessError> {
    Ok(VdpTag::new(cfg.vdptag.clone())?)
}

/// Runs the configured episodes of one planner on the configured problem.
pub fn run_planner(cfg: &RunConfig, planner: PlannerId) -> Result<Vec<EpisodeResult>, HarnessError> {
    let settings = EpisodeSettings::from_config(cfg);
    let pc = planner.planner_config(&cfg.search, &cfg.lambda_init, cfg.schedule);
    let label = (planner.name(), cfg.problem.name());
    match cfg.problem {
        ProblemId::Lightdark => {
            let m = lightdark(cfg)?;
            let rollout = Rollout::new(cfg.rollout, GoalSeekingRollout);
            run_episodes(&m, &m, &pc, &rollout, &settings, cfg.seed, cfg.episodes, label)
        }
        ProblemId::Vdptag => {
            let m = vdptag(cfg)?;
            let rollout = Rollout::new(cfg.rollout, PursuitRollout);
            run_episodes(&m, &m, &pc, &rollout, &settings, cfg.seed, cfg.episodes, label)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlannerSummary {
    pub planner: String,
    pub problem: String,
    pub stats: AggregateStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub results: Vec<EpisodeResult>,
    pub table: Vec<PlannerSummary>,
}

/// Every configured planner on a common seed sequence.
pub fn run_comparison(cfg: &RunConfig) -> Result<Comparison, HarnessError> {
    let mut results = Vec::new();
    let mut table = Vec::new();
    for &p in &cfg.planners {
        let rs = run_planner(cfg, p)?;
        table.push(PlannerSummary {
            planner: p.name().to_string(),
            problem: cfg.problem.name().to_string(),
            stats: aggregate(&rs),
        });
        results.extend(rs);
    }
    Ok(Comparison { results, table })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoPoint {
    /// Scalarization weight; `None` for the constrained planner.
    pub lambda: Option<f64>,
    pub planner: String,
    pub stats: AggregateStats,
    /// `(cost return, reward return)` of each episode.
    pub episodes: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoSweep {
    pub sweep: Vec<ParetoPoint>,
    pub constrained: ParetoPoint,
}

impl ParetoSweep {
    /// Sweep point with the highest mean reward among those whose mean cost
    /// is within `budget`.
    pub fn best_feasible(&self, budget: f64) -> Option<&ParetoPoint> {
        self.sweep
            .iter()
            .filter(|p| p.stats.costs[0].mean <= budget)
            .max_by(|a, b| a.stats.reward.mean.total_cmp(&b.stats.reward.mean))
    }
}

fn pareto_point(lambda: Option<f64>, planner: PlannerId, rs: &[EpisodeResult]) -> ParetoPoint {
    ParetoPoint {
        lambda,
        planner: planner.name().to_string(),
        stats: aggregate(rs),
        episodes: rs.iter().map(|r| (r.cost_returns[0], r.reward_return)).collect(),
    }
}

fn sweep_on<M, H>(cfg: &RunConfig, env: &M, heuristic: H) -> Result<ParetoSweep, HarnessError>
where
    M: Cpomdp + Clone + Sync,
    H: RolloutPolicy<M> + Copy + Sync,
{
    let settings = EpisodeSettings::from_config(cfg);
    let mut sweep = Vec::new();
    let free = cfg.pareto.planner;
    for &lambda in &cfg.pareto.lambdas {
        let scalar = Scalarized::new(env.clone(), vec![lambda; env.n_costs()])?;
        let rollout = ScalarizedRollout(Rollout::new(cfg.rollout, heuristic));
        let pc = free.planner_config(&cfg.search, &[], cfg.schedule);
        let name = format!("{}[lambda={lambda}]", free.name());
        let rs = run_episodes(
            env,
            &scalar,
            &pc,
            &rollout,
            &settings,
            cfg.seed,
            cfg.episodes,
            (&name, cfg.problem.name()),
        )?;
        sweep.push(pareto_point(Some(lambda), free, &rs));
    }
    let cp = cfg.pareto.constrained_planner;
    let pc = cp.planner_config(&cfg.search, &cfg.lambda_init, cfg.schedule);
    let rollout = Rollout::new(cfg.rollout, heuristic);
    let rs = run_episodes(
        env,
        env,
        &pc,
        &rollout,
        &settings,
        cfg.seed,
        cfg.episodes,
        (cp.name(), cfg.problem.name()),
    )?;
    Ok(ParetoSweep {
        sweep,
        constrained: pareto_point(None, cp, &rs),
    })
}

/// Scalarized unconstrained planner for each λ in the grid, plus the
/// constrained planner on the raw problem. Returns are always measured on
/// the raw problem.
pub fn run_pareto_sweep(cfg: &RunConfig) -> Result<ParetoSweep, HarnessError> {
    match cfg.problem {
        ProblemId::Lightdark => sweep_on(cfg, &lightdark(cfg)?, GoalSeekingRollout),
        ProblemId::Vdptag => sweep_on(cfg, &vdptag(cfg)?, PursuitRollout),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AblationMode {
    Normal,
    Min,
    Unconstrained,
}

impl AblationMode {
    pub const ALL: [AblationMode; 3] = [AblationMode::Normal, AblationMode::Min, AblationMode::Unconstrained];

    pub fn name(self) -> &'static str {
        match self {
            AblationMode::Normal => "normal",
            AblationMode::Min => "min",
            AblationMode::Unconstrained => "unconstrained",
        }
    }
}

/// Root statistics of one action in one search, as written to the dump.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootRecord {
    pub search: usize,
    pub action: i32,
    pub visits: u32,
    pub reward_value: f64,
    pub cost_value: f64,
    pub immediate_cost: f64,
    pub lagrangian_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub mode: AblationMode,
    pub actions: Vec<i32>,
    /// Mean `N(b₀a) / N(b₀)` per reported action.
    pub visit_fraction: Vec<f64>,
    /// Mean `Q_C(b₀a)` per reported action.
    pub cost_value: Vec<f64>,
    /// Mean gap `Q_λ(b₀a) − max_a' Q_λ(b₀a')` per reported action.
    pub lagrangian_gap: Vec<f64>,
    /// How often each root action was chosen, sorted by action.
    pub chosen: Vec<(i32, usize)>,
    pub modal_action: i32,
    pub mean_lambda: f64,
    pub dump: Vec<RootRecord>,
}

/// Independent searches from the initial LightDark belief under normal,
/// minimal and no cost propagation.
pub fn run_costprop_ablation(cfg: &RunConfig) -> Result<Vec<AblationRow>, HarnessError> {
    let m = lightdark(cfg)?;
    let rollout = Rollout::new(cfg.rollout, GoalSeekingRollout);
    let budget = m.budget().to_vec();
    AblationMode::ALL
        .iter()
        .map(|&mode| {
            let (planner, min_prop) = match mode {
                AblationMode::Normal => (PlannerId::Cpomcpow, false),
                AblationMode::Min => (PlannerId::Cpomcpow, true),
                AblationMode::Unconstrained => (PlannerId::Pomcpow, cfg.search.min_cost_propagation),
            };
            let mut search = cfg.search.clone();
            search.min_cost_propagation = min_prop;
            let pc = planner.planner_config(&search, &cfg.lambda_init, cfg.schedule);
            let outs: Vec<PlanOutcome<i32>> = (0..cfg.ablation.searches)
                .into_par_iter()
                .map(|i| {
                    let mut rngs = EpisodeRngs::new(episode_seed(cfg.seed, i));
                    let b0 = initial_belief(&m, cfg.belief_particles, &mut rngs.filter)?;
                    Ok(plan(&m, &b0, &budget, &pc, &rollout, &mut rngs.planner)?)
                })
                .collect::<Result<_, HarnessError>>()?;
            Ok(ablation_row(mode, &cfg.ablation.actions, &outs))
        })
        .collect()
}

fn ablation_row(mode: AblationMode, actions: &[i32], outs: &[PlanOutcome<i32>]) -> AblationRow {
    let n = outs.len() as f64;
    let k = actions.len();
    let (mut frac, mut qc, mut gap) = (vec![0.0; k], vec![0.0; k], vec![0.0; k]);
    let mut dump = Vec::new();
    let mut counts: std::collections::BTreeMap<i32, usize> = Default::default();
    let mut lambda = 0.0;
    for (i, out) in outs.iter().enumerate() {
        let d = &out.diagnostics;
        let best = d
            .root
            .iter()
            .map(|s| s.lagrangian_value)
            .fold(f64::NEG_INFINITY, f64::max);
        for (j, a) in actions.iter().enumerate() {
            if let Some(s) = d.root.iter().find(|s| s.action == *a) {
                frac[j] += f64::from(s.visits) / f64::from(d.root_visits.max(1)) / n;
                qc[j] += s.cost_value.first().copied().unwrap_or(0.0) / n;
                if s.lagrangian_value.is_finite() {
                    gap[j] += (s.lagrangian_value - best) / n;
                }
            }
        }
        for s in &d.root {
            dump.push(RootRecord {
                search: i,
                action: s.action,
                visits: s.visits,
                reward_value: s.reward_value,
                cost_value: s.cost_value.first().copied().unwrap_or(0.0),
                immediate_cost: s.immediate_cost.first().copied().unwrap_or(0.0),
                lagrangian_value: s.lagrangian_value,
            });
        }
        *counts.entry(out.action).or_default() += 1;
        lambda += d.lambda.first().copied().unwrap_or(0.0) / n;
    }
    let chosen: Vec<(i32, usize)> = counts.into_iter().collect();
    // most frequent; ties go to the smaller action
    let modal_action = chosen
        .iter()
        .fold(None::<(i32, usize)>, |best, &(a, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((a, c)),
        })
        .map_or(0, |(a, _)| a);
    AblationRow {
        mode,
        actions: actions.to_vec(),
        visit_fraction: frac,
        cost_value: qc,
        lagrangian_gap: gap,
        chosen,
        modal_action,
        mean_lambda: lambda,
        dump,
    }
}
