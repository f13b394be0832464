//! Shipped defaults for payoff, Elo, cross-play and population runs, plus the
//! population manifest format and a live tournament player.

use serde::{Deserialize, Serialize};

use super::elo::Fixture;
use super::population::{LoopConfig, PopulationRun};
use super::Mixture;
use crate::ball::Team;
use crate::dynamics::DroneParams;
use crate::error::{Error, Result};
use crate::harness::{play_episode, TraceLevel};
use crate::oracle::SearchBudget;
use crate::par::Parallelism;
use crate::policies::PolicySpec;
use crate::seed;
use crate::tasks::{TaskId, TaskSpec};

pub const DEFAULT_METAGAME_CONFIG: &str = include_str!("../../configs/metagame.toml");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffDefaults {
    pub games_per_cell: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossplayDefaults {
    pub games_per_pair: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EloDefaults {
    pub k: f64,
    pub init: f64,
    pub rounds: u64,
    pub max_replays: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetagameConfig {
    pub task: TaskId,
    pub seed: u64,
    #[serde(default)]
    pub workers: usize,
    pub payoff: PayoffDefaults,
    pub crossplay: CrossplayDefaults,
    pub elo: EloDefaults,
    #[serde(rename = "loop")]
    pub population: LoopConfig,
    pub budget: SearchBudget,
}

impl Default for MetagameConfig {
    fn default() -> Self {
        toml::from_str(DEFAULT_METAGAME_CONFIG).expect("shipped metagame config parses")
    }
}

impl MetagameConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::config(format!("metagame config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.task.is_competitive() {
            return Err(Error::config(format!("{} is not a competitive task", self.task)));
        }
        if self.payoff.games_per_cell == 0 || self.crossplay.games_per_pair == 0 || self.elo.rounds == 0 {
            return Err(Error::config("game and round counts must be at least 1"));
        }
        self.budget.validate()
    }

    pub fn parallelism(&self) -> Parallelism {
        Parallelism::from_workers(self.workers)
    }
}

/// One member of a saved population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestMember {
    pub id: String,
    pub iteration: usize,
    pub oracle_calls: usize,
    pub converged: bool,
    /// Best-response score when the member was added.
    pub score: f64,
}

/// Saved population: members, meta-strategy and how it was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationManifest {
    pub label: String,
    pub task: TaskId,
    pub mode: super::LoopMode,
    pub seed: u64,
    pub members: Vec<ManifestMember>,
    pub meta: Vec<f64>,
    pub payoff: Vec<Vec<f64>>,
    #[serde(default)]
    pub error: Option<String>,
}

impl PopulationManifest {
    pub fn from_run(label: &str, task: TaskId, seed_value: u64, run: &PopulationRun<PolicySpec>) -> Self {
        PopulationManifest {
            label: label.to_string(),
            task,
            mode: run.mode,
            seed: seed_value,
            members: run
                .members
                .iter()
                .map(|m| ManifestMember {
                    id: m.policy.to_string(),
                    iteration: m.iteration,
                    oracle_calls: m.oracle_calls,
                    converged: m.converged,
                    score: m.score,
                })
                .collect(),
            meta: run.meta.clone(),
            payoff: run.payoff.clone(),
            error: run.error.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::config(format!("population manifest: {e}")))?;
        if m.members.is_empty() || m.meta.len() != m.members.len() {
            return Err(Error::config(format!("population manifest `{}` needs one weight per member", m.label)));
        }
        Ok(m)
    }

    pub fn mixture(&self) -> Result<Mixture<PolicySpec>> {
        let members = self.members.iter().map(|m| m.id.parse()).collect::<Result<Vec<PolicySpec>>>()?;
        Ok(Mixture { label: self.label.clone(), members, weights: self.meta.clone() })
    }
}

/// Plays tournament fixtures as live matches with the first seat on red.
///
/// A game that times out is replayed on a fresh seed up to `max_replays`
/// times; if none is decided, a seeded coin flip settles it.
pub fn live_player<'a>(
    spec: &'a TaskSpec,
    drone: &'a DroneParams,
    policies: &'a [PolicySpec],
    seed_value: u64,
    max_replays: u32,
) -> impl Fn(&Fixture) -> Result<bool> + Send + Sync + 'a {
    move |f: &Fixture| {
        let game_seed = seed::derive(seed_value, f.game, seed::tag::MATCH);
        for attempt in 0..max_replays.max(1) {
            let out = play_episode(spec, drone, &policies[f.a], &policies[f.b], game_seed, attempt as u64, TraceLevel::Off)?;
            if let Some(w) = out.winner() {
                return Ok(w == Team::Red);
            }
        }
        use rand::Rng;
        Ok(seed::stream(game_seed, u64::from(max_replays), seed::tag::MATCH).random_bool(0.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_defaults_are_valid() {
        let c = MetagameConfig::default();
        c.validate().unwrap();
        assert_eq!(c.elo.k, 168.0);
        assert_eq!(c.elo.init, 1000.0);
        assert_eq!(c.payoff.games_per_cell, 1000);
    }

    #[test]
    fn drills_are_rejected() {
        let text = DEFAULT_METAGAME_CONFIG.replace("one_vs_one", "solo_bump");
        assert!(MetagameConfig::from_toml_str(&text).unwrap_err().is_config());
    }
}
