//! The nine volleyball tasks: presets, initialization, observations, rewards,
//! termination and evaluation metrics.

mod env;
mod metrics;
mod obs;
mod reward;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ball::{BallParams, CourtGeometry, Team};
use crate::dynamics::Vec3;
use crate::error::{Error, Result};
use crate::racket::RacketConfig;
use crate::rules::DroneLimits;

pub use env::{Action, DefenseState, DrillEnd, DrillProgress, EpisodeEnd, Env, StepResult, World};
pub use metrics::{metrics, EpisodeMetrics, SetSpikeScore, StepSummary};
pub use obs::{observation_dim, observe};
pub use reward::{reward_table, RewardBreakdown, RewardRange, RewardTerm, TermSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskId {
    BackAndForth,
    HitTheBall,
    SoloBump,
    BumpAndPass,
    SetAndSpikeEasy,
    SetAndSpikeHard,
    OneVsOne,
    ThreeVsThree,
    SixVsSix,
}

impl TaskId {
    pub const ALL: [TaskId; 9] = [
        TaskId::BackAndForth,
        TaskId::HitTheBall,
        TaskId::SoloBump,
        TaskId::BumpAndPass,
        TaskId::SetAndSpikeEasy,
        TaskId::SetAndSpikeHard,
        TaskId::OneVsOne,
        TaskId::ThreeVsThree,
        TaskId::SixVsSix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskId::BackAndForth => "back_and_forth",
            TaskId::HitTheBall => "hit_the_ball",
            TaskId::SoloBump => "solo_bump",
            TaskId::BumpAndPass => "bump_and_pass",
            TaskId::SetAndSpikeEasy => "set_and_spike_easy",
            TaskId::SetAndSpikeHard => "set_and_spike_hard",
            TaskId::OneVsOne => "one_vs_one",
            TaskId::ThreeVsThree => "three_vs_three",
            TaskId::SixVsSix => "six_vs_six",
        }
    }

    pub fn is_competitive(self) -> bool {
        matches!(self, TaskId::OneVsOne | TaskId::ThreeVsThree | TaskId::SixVsSix)
    }

    pub fn is_set_and_spike(self) -> bool {
        matches!(self, TaskId::SetAndSpikeEasy | TaskId::SetAndSpikeHard)
    }

    fn preset_source(self) -> &'static str {
        match self {
            TaskId::BackAndForth => include_str!("../../configs/tasks/back_and_forth.toml"),
            TaskId::HitTheBall => include_str!("../../configs/tasks/hit_the_ball.toml"),
            TaskId::SoloBump => include_str!("../../configs/tasks/solo_bump.toml"),
            TaskId::BumpAndPass => include_str!("../../configs/tasks/bump_and_pass.toml"),
            TaskId::SetAndSpikeEasy => include_str!("../../configs/tasks/set_and_spike_easy.toml"),
            TaskId::SetAndSpikeHard => include_str!("../../configs/tasks/set_and_spike_hard.toml"),
            TaskId::OneVsOne => include_str!("../../configs/tasks/one_vs_one.toml"),
            TaskId::ThreeVsThree => include_str!("../../configs/tasks/three_vs_three.toml"),
            TaskId::SixVsSix => include_str!("../../configs/tasks/six_vs_six.toml"),
        }
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        TaskId::ALL
            .into_iter()
            .find(|t| t.name() == norm)
            .ok_or_else(|| Error::config(format!("unknown task `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    /// Per-rotor thrust.
    #[default]
    Prt,
    /// Collective thrust and body rates.
    Ctbr,
}

impl FromStr for ActionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "prt" => Ok(ActionMode::Prt),
            "ctbr" => Ok(ActionMode::Ctbr),
            _ => Err(Error::config(format!("unknown action mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CourtPreset {
    Full,
    OneVsOne,
    ThreeVsThree,
    SixVsSix,
}

impl CourtPreset {
    pub fn geometry(self) -> CourtGeometry {
        match self {
            CourtPreset::Full => CourtGeometry::full(),
            CourtPreset::OneVsOne => CourtGeometry::one_vs_one(),
            CourtPreset::ThreeVsThree => CourtGeometry::three_vs_three(),
            CourtPreset::SixVsSix => CourtGeometry::six_vs_six(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BallInit {
    /// No ball in play.
    None,
    Fixed { position: [f64; 3] },
    /// Above the serving drone's sampled position.
    AboveServer { height: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DroneSlot {
    pub anchor: [f64; 3],
    pub init_low: [f64; 3],
    pub init_high: [f64; 3],
    #[serde(default = "red")]
    pub team: Team,
}

fn red() -> Team {
    Team::Red
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StayRule {
    pub radius: f64,
    pub steps: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetRegion {
    pub center: [f64; 2],
    pub radius: f64,
}

impl TargetRegion {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.center[0]).hypot(y - self.center[1]) <= self.radius
    }
}

fn default_dt() -> f64 {
    0.01
}

fn default_z_min() -> f64 {
    0.3
}

fn default_remote_margin() -> f64 {
    1.5
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: TaskId,
    pub court: CourtPreset,
    pub max_steps: u32,
    #[serde(default)]
    pub action_mode: ActionMode,
    #[serde(default = "yes")]
    pub shaping: bool,
    pub hit_limit: u32,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub drones: Vec<DroneSlot>,
    pub ball_init: BallInit,
    #[serde(default = "default_z_min")]
    pub z_min: f64,
    #[serde(default = "default_remote_margin")]
    pub remote_margin: f64,
    /// Radius of the sphere each drone must stay within around its anchor.
    #[serde(default)]
    pub stay_radius: Option<f64>,
    #[serde(default)]
    pub ball_z_min: Option<f64>,
    #[serde(default)]
    pub waypoints: Vec<[f64; 3]>,
    #[serde(default)]
    pub stay: Option<StayRule>,
    #[serde(default)]
    pub landing_plane: Option<f64>,
    #[serde(default)]
    pub min_height: Option<f64>,
    #[serde(default)]
    pub max_height: Option<f64>,
    #[serde(default)]
    pub pass_radius: Option<f64>,
    #[serde(default)]
    pub target: Option<TargetRegion>,
    #[serde(default)]
    pub racket: Option<RacketConfig>,
    #[serde(default)]
    pub ball: BallParams,
}

impl TaskSpec {
    /// Shipped preset for `id`.
    pub fn preset(id: TaskId) -> Self {
        Self::from_toml_str(id.preset_source()).expect("shipped task presets are valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut spec: TaskSpec =
            toml::from_str(text).map_err(|e| Error::config(format!("task config: {e}")))?;
        for slot in &mut spec.drones {
            for k in 0..3 {
                if slot.init_low[k] > slot.init_high[k] {
                    std::mem::swap(&mut slot.init_low[k], &mut slot.init_high[k]);
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_action_mode(mut self, mode: ActionMode) -> Self {
        self.action_mode = mode;
        self
    }

    pub fn with_shaping(mut self, shaping: bool) -> Self {
        self.shaping = shaping;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.drones.is_empty() {
            return Err(Error::config("task needs at least one drone"));
        }
        if !(self.dt > 0.0) || self.max_steps == 0 || self.hit_limit == 0 {
            return Err(Error::config("dt, max_steps and hit_limit must be positive"));
        }
        let finite = |v: &[f64; 3]| v.iter().all(|x| x.is_finite());
        if self.drones.iter().any(|d| !finite(&d.anchor) || !finite(&d.init_low) || !finite(&d.init_high)) {
            return Err(Error::config("drone anchors and init ranges must be finite"));
        }
        if self.id == TaskId::BackAndForth && self.waypoints.len() != 2 {
            return Err(Error::config("back_and_forth needs exactly two waypoints"));
        }
        if self.id.is_competitive() {
            let red = self.drones.iter().filter(|d| d.team == Team::Red).count();
            if red == 0 || red == self.drones.len() {
                return Err(Error::config("competitive tasks need drones on both teams"));
            }
            if !matches!(self.ball_init, BallInit::AboveServer { .. }) {
                return Err(Error::config("competitive tasks serve from above a drone"));
            }
        }
        if self.id == TaskId::SetAndSpikeEasy && self.target.is_none() {
            return Err(Error::config("set_and_spike_easy needs a target region"));
        }
        if self.id == TaskId::SetAndSpikeHard && self.racket.is_none() {
            return Err(Error::config("set_and_spike_hard needs a racket block"));
        }
        if self.id.is_set_and_spike() && self.drones.len() != 2 {
            return Err(Error::config("set and spike uses exactly two drones"));
        }
        if let Some(r) = &self.racket {
            r.validate()?;
        }
        self.court.geometry().validate()?;
        self.ball.validate()
    }

    pub fn n_drones(&self) -> usize {
        self.drones.len()
    }

    pub fn court_geometry(&self) -> CourtGeometry {
        self.court.geometry()
    }

    pub fn anchor(&self, drone: usize) -> Vec3 {
        Vec3::from(self.drones[drone].anchor)
    }

    /// Stay radius of `drone`, grown to cover its whole initialization box.
    pub fn stay_radius_of(&self, drone: usize) -> Option<f64> {
        let slot = &self.drones[drone];
        self.stay_radius.map(|r| {
            let far = (0..3)
                .map(|k| {
                    let d = (slot.init_low[k] - slot.anchor[k]).abs().max((slot.init_high[k] - slot.anchor[k]).abs());
                    d * d
                })
                .sum::<f64>()
                .sqrt();
            r.max(far)
        })
    }

    pub fn teams(&self) -> Vec<Team> {
        self.drones.iter().map(|d| d.team).collect()
    }

    pub fn limits(&self) -> DroneLimits {
        DroneLimits { z_min: self.z_min, remote_margin: self.remote_margin }
    }

    /// Drone ids of `team` in slot order.
    pub fn team_members(&self, team: Team) -> Vec<usize> {
        (0..self.n_drones()).filter(|&i| self.drones[i].team == team).collect()
    }

    /// Size of the largest team.
    pub fn team_size(&self) -> usize {
        self.team_members(Team::Red).len().max(self.team_members(Team::Blue).len())
    }

    /// Where the ball should land for a set-and-spike attack.
    pub fn attack_target(&self) -> [f64; 2] {
        match &self.target {
            Some(t) => t.center,
            None => [-self.court_geometry().half_length / 2.0, 0.0],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_load() {
        for id in TaskId::ALL {
            let spec = TaskSpec::preset(id);
            assert_eq!(spec.id, id);
            assert!(spec.max_steps == 500 || spec.max_steps == 800);
        }
    }

    #[test]
    fn reversed_bounds_are_sorted() {
        let spec = TaskSpec::preset(TaskId::OneVsOne);
        assert_eq!(spec.drones[1].init_low, [-1.6, -0.1, 1.9]);
        assert_eq!(spec.drones[1].init_high, [-1.4, 0.1, 2.1]);
    }

    #[test]
    fn task_names_round_trip() {
        for id in TaskId::ALL {
            assert_eq!(id.name().parse::<TaskId>().unwrap(), id);
        }
        assert!("volley".parse::<TaskId>().is_err());
    }

    #[test]
    fn malformed_spec_is_a_config_error() {
        let err = TaskSpec::from_toml_str("id = \"solo_bump\"").unwrap_err();
        assert!(err.is_config());
        let mut spec = TaskSpec::preset(TaskId::ThreeVsThree);
        for d in &mut spec.drones {
            d.team = Team::Red;
        }
        assert!(spec.validate().unwrap_err().is_config());
    }
}
