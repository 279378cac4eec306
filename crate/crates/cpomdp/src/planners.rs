//! Planner identifiers as they appear in configs, CSV files and the CLI.

use std::fmt;
use std::str::FromStr;

use cpomdp_core::{PlannerConfig, SearchConfig, StepSchedule, Variant};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlannerId {
    #[serde(rename = "cpomcp-dpw")]
    CpomcpDpw,
    #[serde(rename = "cpomcpow")]
    Cpomcpow,
    #[serde(rename = "cpft-dpw")]
    CpftDpw,
    #[serde(rename = "pomcpow")]
    Pomcpow,
    #[serde(rename = "pft-dpw")]
    PftDpw,
}

impl PlannerId {
    pub const ALL: [PlannerId; 5] = [
        PlannerId::CpomcpDpw,
        PlannerId::Cpomcpow,
        PlannerId::CpftDpw,
        PlannerId::Pomcpow,
        PlannerId::PftDpw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerId::CpomcpDpw => "cpomcp-dpw",
            PlannerId::Cpomcpow => "cpomcpow",
            PlannerId::CpftDpw => "cpft-dpw",
            PlannerId::Pomcpow => "pomcpow",
            PlannerId::PftDpw => "pft-dpw",
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            PlannerId::CpomcpDpw => Variant::PomcpDpw,
            PlannerId::Cpomcpow | PlannerId::Pomcpow => Variant::Pomcpow,
            PlannerId::CpftDpw | PlannerId::PftDpw => Variant::PftDpw,
        }
    }

    pub fn constrained(self) -> bool {
        matches!(self, PlannerId::CpomcpDpw | PlannerId::Cpomcpow | PlannerId::CpftDpw)
    }

    pub fn planner_config(self, search: &SearchConfig, lambda_init: &[f64], schedule: StepSchedule) -> PlannerConfig {
        let mut cfg = PlannerConfig::new(self.variant(), search.clone());
        cfg.schedule = schedule;
        cfg.lambda_init = lambda_init.to_vec();
        cfg.constrained = self.constrained();
        cfg
    }
}

impl fmt::Display for PlannerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            format!("unknown planner `{s}` (expected one of cpomcp-dpw, cpomcpow, cpft-dpw, pomcpow, pft-dpw)")
        })
    }
}
