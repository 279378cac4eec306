//! Experiment configuration files.
//!
//! A config is a TOML document with the sections `experiment`, `search`,
//! `dual`, `lightdark`, `vdptag`, `pareto`, `ablation` and `oracle`. Every
//! key is optional; missing keys take the defaults printed by
//! [`describe_keys`], and search defaults depend on the problem. Unknown keys
//! are rejected.

use std::path::{Path, PathBuf};

use cpomdp_core::problems::{LightDarkParams, VdpTagParams};
use cpomdp_core::{SearchConfig, StepSchedule};
use serde::Deserialize;

use crate::error::HarnessError;
use crate::planners::PlannerId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemId {
    Lightdark,
    Vdptag,
}

impl ProblemId {
    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Lightdark => "lightdark",
            ProblemId::Vdptag => "vdptag",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RolloutId {
    /// Uniformly random actions.
    Random,
    /// The problem's hand-written policy.
    Heuristic,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub problem: Option<ProblemId>,
    pub planners: Option<Vec<PlannerId>>,
    pub episodes: Option<usize>,
    pub max_steps: Option<usize>,
    pub belief_particles: Option<usize>,
    pub seed: Option<u64>,
    pub rolling_budget: Option<bool>,
    pub rollout: Option<RolloutId>,
    pub record_wall_time: Option<bool>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub iterations: Option<usize>,
    pub max_depth: Option<usize>,
    pub k_action: Option<f64>,
    pub alpha_action: Option<f64>,
    pub k_observation: Option<f64>,
    pub alpha_observation: Option<f64>,
    pub exploration: Option<f64>,
    pub nu: Option<f64>,
    pub pf_particles: Option<usize>,
    pub min_cost_propagation: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualSection {
    pub lambda_init: Option<Vec<f64>>,
    pub a_step: Option<f64>,
    pub b_step: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightDarkSection {
    pub goal_low: Option<f64>,
    pub goal_high: Option<f64>,
    pub light: Option<f64>,
    pub cliff: Option<f64>,
    pub step_reward: Option<f64>,
    pub goal_reward: Option<f64>,
    pub wrong_stop_reward: Option<f64>,
    pub cliff_cost: Option<f64>,
    pub budget: Option<f64>,
    pub discount: Option<f64>,
    pub initial_mean: Option<f64>,
    pub initial_std: Option<f64>,
    pub sigma_min: Option<f64>,
    pub transition_std: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VdpTagSection {
    pub mu: Option<f64>,
    pub agent_speed: Option<f64>,
    pub dt: Option<f64>,
    pub process_std: Option<f64>,
    pub tag_radius: Option<f64>,
    pub tag_reward: Option<f64>,
    pub step_reward: Option<f64>,
    pub look_cost: Option<f64>,
    pub budget: Option<f64>,
    pub discount: Option<f64>,
    pub bearing_std_look: Option<f64>,
    pub bearing_std_blind: Option<f64>,
    pub initial_half_width: Option<f64>,
    pub swept_tag: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParetoSection {
    pub lambdas: Option<Vec<f64>>,
    pub planner: Option<PlannerId>,
    pub constrained_planner: Option<PlannerId>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationSection {
    pub searches: Option<usize>,
    pub actions: Option<Vec<i32>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub searches: Option<usize>,
    pub iterations: Option<usize>,
    pub budgets: Option<Vec<f64>>,
    pub a_step: Option<f64>,
    pub exploration: Option<f64>,
    pub k_observation: Option<f64>,
    pub alpha_observation: Option<f64>,
    pub pf_particles: Option<usize>,
}

/// The file as written, before defaults are applied.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub dual: DualSection,
    #[serde(default)]
    pub lightdark: LightDarkSection,
    #[serde(default)]
    pub vdptag: VdpTagSection,
    #[serde(default)]
    pub pareto: ParetoSection,
    #[serde(default)]
    pub ablation: AblationSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

/// Overrides given on the command line. They win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub episodes: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub planner: Option<PlannerId>,
    pub min_cost_propagation: Option<bool>,
    pub rolling_budget: Option<bool>,
    pub record_wall_time: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoSettings {
    pub lambdas: Vec<f64>,
    pub planner: PlannerId,
    pub constrained_planner: PlannerId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationSettings {
    pub searches: usize,
    pub actions: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    pub searches: usize,
    pub iterations: usize,
    pub budgets: Vec<f64>,
    pub a_step: f64,
    pub exploration: f64,
    pub k_observation: f64,
    pub alpha_observation: f64,
    pub pf_particles: usize,
}

/// A fully resolved, validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub planners: Vec<PlannerId>,
    pub episodes: usize,
    pub max_steps: usize,
    pub belief_particles: usize,
    pub seed: u64,
    pub rolling_budget: bool,
    pub rollout: RolloutId,
    pub record_wall_time: bool,
    pub out_dir: PathBuf,
    pub search: SearchConfig,
    pub lambda_init: Vec<f64>,
    pub schedule: StepSchedule,
    pub lightdark: LightDarkParams,
    pub vdptag: VdpTagParams,
    pub pareto: ParetoSettings,
    pub ablation: AblationSettings,
    pub oracle: OracleSettings,
}

/// Desk-scale search defaults per problem.
pub fn default_search(problem: ProblemId) -> SearchConfig {
    match problem {
        ProblemId::Lightdark => SearchConfig {
            iterations: 10_000,
            max_depth: 20,
            k_action: 10.0,
            alpha_action: 1.0,
            k_observation: 5.0,
            alpha_observation: 0.1,
            exploration: 90.0,
            nu: 0.01,
            pf_particles: 30,
            min_cost_propagation: true,
        },
        ProblemId::Vdptag => SearchConfig {
            iterations: 5_000,
            max_depth: 10,
            k_action: 8.0,
            alpha_action: 0.25,
            k_observation: 5.0,
            alpha_observation: 0.1,
            exploration: 110.0,
            nu: 0.01,
            pf_particles: 30,
            min_cost_propagation: true,
        },
    }
}

fn default_max_steps(problem: ProblemId) -> usize {
    match problem {
        ProblemId::Lightdark => 100,
        ProblemId::Vdptag => 50,
    }
}

fn default_belief_particles(problem: ProblemId) -> usize {
    match problem {
        ProblemId::Lightdark => 10_000,
        ProblemId::Vdptag => 5_000,
    }
}

pub const DEFAULT_LAMBDAS: [f64; 8] = [0.0, 1.0, 5.0, 10.0, 50.0, 100.0, 500.0, 10_000.0];

fn invalid(key: &str, why: &str) -> HarnessError {
    HarnessError::Config(format!("{key}: {why}"))
}

macro_rules! fill {
    ($target:expr, $section:expr, [$($field:ident),* $(,)?]) => {
        $( if let Some(v) = $section.$field { $target.$field = v; } )*
    };
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Applies defaults and overrides, then validates.
    pub fn resolve(self, overrides: &Overrides) -> Result<RunConfig, HarnessError> {
        let e = self.experiment;
        let problem = e.problem.unwrap_or(ProblemId::Lightdark);

        let mut search = default_search(problem);
        let s = self.search;
        fill!(
            search,
            s,
            [
                iterations,
                max_depth,
                k_action,
                alpha_action,
                k_observation,
                alpha_observation,
                exploration,
                nu,
                pf_particles,
                min_cost_propagation,
            ]
        );
        if let Some(v) = overrides.min_cost_propagation {
            search.min_cost_propagation = v;
        }
        search
            .validate()
            .map_err(|err| HarnessError::Config(format!("[search] {err}")))?;

        let mut lightdark = LightDarkParams::default();
        let l = self.lightdark;
        fill!(
            lightdark,
            l,
            [
                goal_low,
                goal_high,
                light,
                cliff,
                step_reward,
                goal_reward,
                wrong_stop_reward,
                cliff_cost,
                budget,
                discount,
                initial_mean,
                initial_std,
                sigma_min,
                transition_std,
            ]
        );
        let mut vdptag = VdpTagParams::default();
        let v = self.vdptag;
        fill!(
            vdptag,
            v,
            [
                mu,
                agent_speed,
                dt,
                process_std,
                tag_radius,
                tag_reward,
                step_reward,
                look_cost,
                budget,
                discount,
                bearing_std_look,
                bearing_std_blind,
                initial_half_width,
                swept_tag,
            ]
        );
        cpomdp_core::problems::LightDark::new(lightdark.clone())
            .map_err(|err| HarnessError::Config(format!("[lightdark] {err}")))?;
        cpomdp_core::problems::VdpTag::new(vdptag.clone())
            .map_err(|err| HarnessError::Config(format!("[vdptag] {err}")))?;

        let a_step = self.dual.a_step.unwrap_or(1.0);
        let b_step = self.dual.b_step.unwrap_or(100.0);
        let schedule = StepSchedule::new(a_step, b_step)
            .map_err(|_| invalid("dual.a_step / dual.b_step", "must be positive and finite"))?;
        let lambda_init = self.dual.lambda_init.unwrap_or_default();
        if lambda_init.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(invalid("dual.lambda_init", "entries must be finite and >= 0"));
        }
        if lambda_init.len() > 1 {
            return Err(invalid("dual.lambda_init", "both problems have one constraint"));
        }

        let planners = match overrides.planner {
            Some(p) => vec![p],
            None => e.planners.unwrap_or_else(|| vec![PlannerId::Cpomcpow]),
        };
        if planners.is_empty() {
            return Err(invalid("experiment.planners", "must name at least one planner"));
        }
        let episodes = overrides.episodes.or(e.episodes).unwrap_or(100);
        if episodes == 0 {
            return Err(invalid("experiment.episodes", "must be >= 1"));
        }
        let max_steps = e.max_steps.unwrap_or(default_max_steps(problem));
        if max_steps == 0 {
            return Err(invalid("experiment.max_steps", "must be >= 1"));
        }
        let belief_particles = e.belief_particles.unwrap_or(default_belief_particles(problem));
        if belief_particles == 0 {
            return Err(invalid("experiment.belief_particles", "must be >= 1"));
        }

        let p = self.pareto;
        let pareto = ParetoSettings {
            lambdas: p.lambdas.unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec()),
            planner: p.planner.unwrap_or(PlannerId::Pomcpow),
            constrained_planner: p.constrained_planner.unwrap_or(PlannerId::Cpomcpow),
        };
        if pareto.lambdas.is_empty() {
            return Err(invalid("pareto.lambdas", "grid must not be empty"));
        }
        if pareto.lambdas.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(invalid("pareto.lambdas", "entries must be finite and >= 0"));
        }
        if pareto.planner.constrained() {
            return Err(invalid("pareto.planner", "must be an unconstrained planner"));
        }
        if !pareto.constrained_planner.constrained() {
            return Err(invalid("pareto.constrained_planner", "must be a constrained planner"));
        }

        let ablation = AblationSettings {
            searches: self.ablation.searches.unwrap_or(50),
            actions: self.ablation.actions.unwrap_or_else(|| vec![1, 5, 10]),
        };
        if ablation.searches == 0 {
            return Err(invalid("ablation.searches", "must be >= 1"));
        }

        let o = self.oracle;
        let oracle = OracleSettings {
            searches: o.searches.unwrap_or(200),
            iterations: o.iterations.unwrap_or(10_000),
            budgets: o.budgets.unwrap_or_else(|| vec![0.0, 1e9]),
            a_step: o.a_step.unwrap_or(20.0),
            exploration: o.exploration.unwrap_or(20.0),
            k_observation: o.k_observation.unwrap_or(1.0),
            alpha_observation: o.alpha_observation.unwrap_or(0.0),
            pf_particles: o.pf_particles.unwrap_or(100),
        };
        if oracle.searches == 0 || oracle.iterations == 0 {
            return Err(invalid("oracle", "searches and iterations must be >= 1"));
        }
        if !(oracle.a_step > 0.0) {
            return Err(invalid("oracle.a_step", "must be > 0"));
        }

        Ok(RunConfig {
            problem,
            planners,
            episodes,
            max_steps,
            belief_particles,
            seed: overrides.seed.or(e.seed).unwrap_or(1),
            rolling_budget: overrides.rolling_budget.or(e.rolling_budget).unwrap_or(true),
            rollout: e.rollout.unwrap_or(RolloutId::Heuristic),
            record_wall_time: overrides.record_wall_time.or(e.record_wall_time).unwrap_or(false),
            out_dir: overrides
                .out_dir
                .clone()
                .or(e.out_dir)
                .unwrap_or_else(|| PathBuf::from("out")),
            search,
            lambda_init,
            schedule,
            lightdark,
            vdptag,
            pareto,
            ablation,
            oracle,
        })
    }
}

impl RunConfig {
    pub fn from_file(path: &Path, overrides: &Overrides) -> Result<Self, HarnessError> {
        RawConfig::load(path)?.resolve(overrides)
    }

    pub fn from_str(text: &str, overrides: &Overrides) -> Result<Self, HarnessError> {
        RawConfig::parse(text)?.resolve(overrides)
    }

    /// Defaults for `problem` with nothing overridden.
    pub fn defaults(problem: ProblemId) -> Self {
        let raw = RawConfig {
            experiment: ExperimentSection {
                problem: Some(problem),
                ..Default::default()
            },
            ..Default::default()
        };
        raw.resolve(&Overrides::default()).expect("built-in defaults are valid")
    }

    pub fn budget(&self) -> f64 {
        match self.problem {
            ProblemId::Lightdark => self.lightdark.budget,
            ProblemId::Vdptag => self.vdptag.budget,
        }
    }
}

/// Every config key with its default, for `--help`.
pub fn describe_keys() -> String {
    let ld = default_search(ProblemId::Lightdark);
    let vdp = default_search(ProblemId::Vdptag);
    let lp = LightDarkParams::default();
    let vp = VdpTagParams::default();
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line("CONFIG KEYS (TOML; every key optional; `lightdark | vdptag` marks per-problem defaults)".into());
    line(String::new());
    line("[experiment]".into());
    line("  problem          = \"lightdark\"            # lightdark | vdptag".into());
    line("  planners         = [\"cpomcpow\"]           # cpomcp-dpw | cpomcpow | cpft-dpw | pomcpow | pft-dpw".into());
    line("  episodes         = 100".into());
    line("  max_steps        = 100 | 50".into());
    line("  belief_particles = 10000 | 5000".into());
    line("  seed             = 1".into());
    line("  rolling_budget   = true".into());
    line("  rollout          = \"heuristic\"            # heuristic | random".into());
    line("  record_wall_time = false                  # false writes wall_ms = 0 for byte-stable CSV".into());
    line("  out_dir          = \"out\"                  # CPOMDP_OUT_DIR and --out-dir override".into());
    line("[search]".into());
    line(format!("  iterations        = {} | {}", ld.iterations, vdp.iterations));
    line(format!("  max_depth         = {} | {}", ld.max_depth, vdp.max_depth));
    line(format!("  k_action          = {} | {}", ld.k_action, vdp.k_action));
    line(format!(
        "  alpha_action      = {} | {}",
        ld.alpha_action, vdp.alpha_action
    ));
    line(format!(
        "  k_observation     = {} | {}",
        ld.k_observation, vdp.k_observation
    ));
    line(format!(
        "  alpha_observation = {} | {}",
        ld.alpha_observation, vdp.alpha_observation
    ));
    line(format!(
        "  exploration       = {} | {}",
        ld.exploration, vdp.exploration
    ));
    line(format!("  nu                = {} | {}", ld.nu, vdp.nu));
    line(format!(
        "  pf_particles      = {} | {}",
        ld.pf_particles, vdp.pf_particles
    ));
    line(format!("  min_cost_propagation = {}", ld.min_cost_propagation));
    line("[dual]".into());
    line("  lambda_init = [0.0]".into());
    line("  a_step      = 1.0                         # step size a / (b + i)".into());
    line("  b_step      = 100.0".into());
    line("[lightdark]".into());
    line(format!(
        "  goal_low = {}  goal_high = {}  light = {}  cliff = {}",
        lp.goal_low, lp.goal_high, lp.light, lp.cliff
    ));
    line(format!(
        "  step_reward = {}  goal_reward = {}  wrong_stop_reward = {}  cliff_cost = {}",
        lp.step_reward, lp.goal_reward, lp.wrong_stop_reward, lp.cliff_cost
    ));
    line(format!(
        "  budget = {}  discount = {}  initial_mean = {}  initial_std = {}",
        lp.budget, lp.discount, lp.initial_mean, lp.initial_std
    ));
    line(format!(
        "  sigma_min = {}  transition_std = {}",
        lp.sigma_min, lp.transition_std
    ));
    line("[vdptag]".into());
    line(format!(
        "  mu = {}  agent_speed = {}  dt = {}  process_std = {}",
        vp.mu, vp.agent_speed, vp.dt, vp.process_std
    ));
    line(format!(
        "  tag_radius = {}  tag_reward = {}  step_reward = {}  look_cost = {}",
        vp.tag_radius, vp.tag_reward, vp.step_reward, vp.look_cost
    ));
    line(format!(
        "  budget = {}  discount = {}  bearing_std_look = {}  bearing_std_blind = {}",
        vp.budget, vp.discount, vp.bearing_std_look, vp.bearing_std_blind
    ));
    line(format!(
        "  initial_half_width = {}  swept_tag = {}",
        vp.initial_half_width, vp.swept_tag
    ));
    line("[pareto]".into());
    line("  lambdas             = [0, 1, 5, 10, 50, 100, 500, 10000]".into());
    line("  planner             = \"pomcpow\"".into());
    line("  constrained_planner = \"cpomcpow\"".into());
    line("[ablation]".into());
    line("  searches = 50".into());
    line("  actions  = [1, 5, 10]".into());
    line("[oracle]".into());
    line("  searches   = 200".into());
    line("  iterations = 10000".into());
    line("  budgets    = [0.0, 1e9]".into());
    line("  a_step     = 20.0".into());
    line("  exploration       = 20.0                # search overrides for the small discrete problem".into());
    line("  k_observation     = 1.0".into());
    line("  alpha_observation = 0.0".into());
    line("  pf_particles      = 100".into());
    out
}
