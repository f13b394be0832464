//! Run configuration, batch execution with per-episode seeds, aggregates and
//! trace files.

pub mod episode;
pub mod trace;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use episode::{play_episode, play_with, side_groups, EpisodeOutput, TraceLevel, TraceRecord};
pub use trace::{replay, Divergence, ReplayReport, Trace, TraceHeader, FORMAT_VERSION};

use crate::ball::Team;
use crate::dynamics::DroneParams;
use crate::error::{Error, Result};
use crate::par::{par_map, Parallelism};
use crate::policies::PolicySpec;
use crate::rules::OutcomeReason;
use crate::tasks::{ActionMode, EpisodeEnd, TaskId, TaskSpec};

pub const DEFAULT_RUN_CONFIG: &str = include_str!("../../configs/run.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: TaskId,
    pub red: String,
    /// Ignored by single-team drills.
    pub blue: String,
    #[serde(default)]
    pub action_mode: Option<ActionMode>,
    #[serde(default)]
    pub shaping: Option<bool>,
    pub n_episodes: u64,
    pub seed: u64,
    /// 0 uses every core, 1 runs on the calling thread.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub trace: TraceLevel,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str(DEFAULT_RUN_CONFIG).expect("shipped run config parses")
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("run config: {e}")))
    }

    pub fn task_spec(&self) -> TaskSpec {
        let mut spec = TaskSpec::preset(self.task);
        if let Some(mode) = self.action_mode {
            spec = spec.with_action_mode(mode);
        }
        if let Some(shaping) = self.shaping {
            spec = spec.with_shaping(shaping);
        }
        spec
    }

    /// Parse and build both policies once so bad ids fail before any episode.
    pub fn validate(&self) -> Result<(PolicySpec, PolicySpec)> {
        if self.n_episodes == 0 {
            return Err(Error::config("n_episodes must be at least 1"));
        }
        let spec = self.task_spec();
        spec.validate()?;
        let red: PolicySpec = self.red.parse()?;
        let blue: PolicySpec = self.blue.parse()?;
        red.build(&spec)?;
        blue.build(&spec)?;
        Ok((red, blue))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Stat::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        Stat { mean, std: var.sqrt(), n }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeBrief {
    pub index: u64,
    pub steps: u32,
    pub end: EpisodeEnd,
}

/// Order-independent aggregate of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub task: TaskId,
    pub red: String,
    pub blue: String,
    pub seed: u64,
    pub n_episodes: u64,
    pub metrics: BTreeMap<String, Stat>,
    /// Episode ends keyed by reason, e.g. `red:ball_landed_in` or `drill:timeout`.
    pub ends: BTreeMap<String, u64>,
    pub red_wins: u64,
    pub blue_wins: u64,
    pub draws: u64,
    pub episodes: Vec<EpisodeBrief>,
}

pub fn end_label(end: &EpisodeEnd) -> String {
    match end {
        EpisodeEnd::Match { outcome } => {
            let who = match outcome.winner {
                Some(Team::Red) => "red",
                Some(Team::Blue) => "blue",
                None => "draw",
            };
            let why = match outcome.reason {
                OutcomeReason::BallLandedIn => "ball_landed_in".to_string(),
                OutcomeReason::Violation(k) => k.name().to_string(),
                OutcomeReason::Timeout => "timeout".to_string(),
            };
            format!("{who}:{why}")
        }
        EpisodeEnd::Drill { reason } => {
            let v = serde_json::to_value(reason).expect("plain enum");
            format!("drill:{}", v.as_str().unwrap_or("unknown"))
        }
    }
}

pub fn summarize(config: &RunConfig, outputs: &[EpisodeOutput]) -> RunSummary {
    let mut by_name: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut ends = BTreeMap::new();
    let (mut red_wins, mut blue_wins, mut draws) = (0, 0, 0);
    for o in outputs {
        for (name, v) in o.metrics.scalars() {
            by_name.entry(name.to_string()).or_default().push(v);
        }
        *ends.entry(end_label(&o.end)).or_insert(0) += 1;
        if let Some(outcome) = o.end.outcome() {
            match outcome.winner {
                Some(Team::Red) => red_wins += 1,
                Some(Team::Blue) => blue_wins += 1,
                None => draws += 1,
            }
        }
    }
    RunSummary {
        task: config.task,
        red: config.red.clone(),
        blue: config.blue.clone(),
        seed: config.seed,
        n_episodes: config.n_episodes,
        metrics: by_name.into_iter().map(|(k, v)| (k, Stat::of(&v))).collect(),
        ends,
        red_wins,
        blue_wins,
        draws,
        episodes: outputs.iter().map(|o| EpisodeBrief { index: o.index, steps: o.metrics.steps, end: o.end }).collect(),
    }
}

/// Where a run writes its files.
pub fn trace_path(dir: &Path, index: u64) -> PathBuf {
    dir.join(format!("episode_{index:05}.jsonl"))
}

/// Run every episode of `config`; with `out_dir` set, write `summary.json`
/// and one trace file per episode (unless tracing is off).
pub fn run_episodes(config: &RunConfig, out_dir: Option<&Path>) -> Result<RunSummary> {
    let (red, blue) = config.validate()?;
    let spec = config.task_spec();
    let drone = DroneParams::default();
    let indices: Vec<u64> = (0..config.n_episodes).collect();
    let outputs = par_map(Parallelism::from_workers(config.workers), indices, |i| {
        play_episode(&spec, &drone, &red, &blue, config.seed, i, config.trace)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let summary = summarize(config, &outputs);
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        if config.trace != TraceLevel::Off {
            for o in &outputs {
                let trace = Trace {
                    header: TraceHeader {
                        format_version: FORMAT_VERSION,
                        spec: spec.clone(),
                        drone: drone.clone(),
                        red: config.red.clone(),
                        blue: config.blue.clone(),
                        master_seed: config.seed,
                        episode: o.index,
                        verbosity: config.trace,
                    },
                    records: o.records.clone(),
                };
                trace.save(&trace_path(dir, o.index))?;
            }
        }
        let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Contract(e.to_string()))?;
        std::fs::write(dir.join("summary.json"), text + "\n")?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_is_valid() {
        let c = RunConfig::default();
        assert!(c.n_episodes >= 1);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_policy_fails_before_running() {
        let c = RunConfig { red: "nope".into(), ..RunConfig::default() };
        assert!(matches!(run_episodes(&c, None), Err(Error::UnknownPolicy(_))));
        let c = RunConfig { n_episodes: 0, ..RunConfig::default() };
        assert!(run_episodes(&c, None).unwrap_err().is_config());
    }

    #[test]
    fn stat_is_population_moments() {
        let s = Stat::of(&[1.0, 3.0]);
        assert_eq!((s.mean, s.std, s.n), (2.0, 1.0, 2));
    }
}
