use serde::{Deserialize, Serialize};

use super::TaskId;

/// Values a single reward term may take on one transition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardRange {
    Set(Vec<f64>),
    Interval(f64, f64),
}

impl RewardRange {
    pub fn contains(&self, v: f64) -> bool {
        match self {
            RewardRange::Set(vals) => vals.contains(&v),
            RewardRange::Interval(lo, hi) => v >= *lo && v <= *hi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub name: &'static str,
    pub range: RewardRange,
    pub sparse: bool,
    pub shared: bool,
    pub shaping: bool,
}

fn term(name: &'static str, range: RewardRange, sparse: bool, shared: bool, shaping: bool) -> TermSpec {
    TermSpec { name, range, sparse, shared, shaping }
}

fn set(v: &[f64]) -> RewardRange {
    RewardRange::Set(v.to_vec())
}

fn iv(lo: f64, hi: f64) -> RewardRange {
    RewardRange::Interval(lo, hi)
}

const INF: f64 = f64::INFINITY;

/// Reward rows of each task with their per-transition value ranges.
pub fn reward_table(task: TaskId) -> Vec<TermSpec> {
    use TaskId::*;
    match task {
        BackAndForth => vec![
            term("drone_misbehave", set(&[0.0, -10.0]), true, false, false),
            term("dist_to_target", iv(0.0, 0.5), false, false, false),
            term("target_stay", set(&[0.0, 2.5]), true, false, false),
        ],
        HitTheBall => vec![
            term("ball_misbehave", set(&[0.0, -10.0]), true, false, false),
            term("drone_misbehave", set(&[0.0, -10.0]), true, false, false),
            term("wrong_hit", set(&[0.0, -10.0]), true, false, false),
            term("success_hit", set(&[0.0, 1.0]), true, false, false),
            term("distance", iv(0.0, INF), true, false, false),
            term("dist_to_anchor", iv(-INF, 0.0), false, false, false),
        ],
        SoloBump => vec![
            term("ball_misbehave", set(&[0.0, -10.0]), true, false, false),
            term("drone_misbehave", set(&[0.0, -10.0]), true, false, false),
            term("wrong_hit", set(&[0.0, -10.0]), true, false, false),
            term("success_hit", set(&[0.0, 1.0]), true, false, false),
            term("success_height", set(&[0.0, 8.0]), true, false, false),
            term("dist_to_ball_xy", iv(0.0, 1.0), true, false, true),
            term("dist_to_ball_z", iv(0.0, 1.0), true, false, true),
        ],
        BumpAndPass => vec![
            term("ball_misbehave", set(&[0.0, -10.0]), true, true, false),
            term("drone_misbehave", set(&[0.0, -10.0]), true, false, false),
            term("wrong_hit", set(&[0.0, -10.0]), true, false, false),
            term("success_hit", set(&[0.0, 1.0]), true, true, false),
            term("success_cross", set(&[0.0, 1.0]), true, true, false),
            term("dist_to_anchor", iv(-INF, 0.0), false, true, false),
            term("hit_direction", set(&[0.0, 1.0]), true, false, true),
            term("dist_to_ball", iv(0.0, 0.05), false, false, true),
        ],
        SetAndSpikeEasy => vec![
            term("ball_misbehave", set(&[0.0, -10.0]), true, true, false),
            term("drone_misbehave", set(&[0.0, -10.0]), true, false, false),
            term("wrong_hit", set(&[0.0, -10.0]), true, false, false),
            term("success_hit", set(&[0.0, 5.0]), true, true, false),
            term("downward_spike", set(&[0.0, 5.0]), true, true, false),
            term("success_cross", set(&[0.0, 5.0]), true, true, false),
            term("in_target", set(&[0.0, 5.0]), true, true, false),
            term("dist_to_anchor", iv(-INF, 0.0), false, true, false),
            term("hit_direction", set(&[0.0, 1.0]), true, false, true),
            term("spike_velocity", iv(0.0, INF), true, true, true),
            term("dist_to_ball", iv(0.0, 0.05), false, false, true),
            term("dist_to_target", iv(0.0, 2.0), false, true, true),
        ],
        SetAndSpikeHard => vec![
            term("ball_misbehave", set(&[0.0, -10.0]), true, true, false),
            term("drone_misbehave", set(&[0.0, -10.0]), true, false, false),
            term("wrong_hit", set(&[0.0, -10.0]), true, false, false),
            term("success_hit", set(&[0.0, 5.0]), true, true, false),
            term("downward_spike", set(&[0.0, 5.0]), true, true, false),
            term("success_cross", set(&[0.0, 5.0]), true, true, false),
            term("success_spike", set(&[0.0, 5.0]), true, true, false),
            term("dist_to_anchor", iv(-INF, 0.0), false, true, false),
            term("hit_direction", set(&[0.0, 1.0]), true, false, true),
            term("spike_velocity", iv(0.0, INF), true, true, true),
            term("dist_to_ball", iv(0.0, 0.05), false, false, true),
        ],
        OneVsOne => vec![
            term("drone_misbehave", set(&[0.0, -100.0]), true, false, false),
            term("drone_out_of_court", iv(0.0, 0.2), false, false, false),
            term("win_or_lose", set(&[-100.0, 0.0, 100.0]), true, false, false),
            term("success_hit", set(&[0.0, 5.0]), true, false, true),
            term("dist_to_ball", iv(0.0, 0.5), false, false, true),
        ],
        ThreeVsThree | SixVsSix => vec![
            term("drone_misbehave", set(&[0.0, -100.0]), true, false, false),
            term("drone_collision", set(&[0.0, -100.0]), true, false, false),
            term("win_or_lose", set(&[-100.0, 0.0, 100.0]), true, true, false),
            term("success_hit", set(&[0.0, 10.0]), true, true, true),
            term("dist_to_anchor", iv(0.0, 0.05), false, false, true),
            term("dist_to_ball", iv(0.0, 0.5), false, false, true),
        ],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardTerm {
    pub name: String,
    /// One value per drone.
    pub values: Vec<f64>,
    pub shared: bool,
    pub shaping: bool,
}

/// Per-drone reward split into the task's named rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub terms: Vec<RewardTerm>,
}

impl RewardBreakdown {
    pub fn zeros(task: TaskId, n_drones: usize) -> Self {
        let terms = reward_table(task)
            .into_iter()
            .map(|t| RewardTerm {
                name: t.name.to_string(),
                values: vec![0.0; n_drones],
                shared: t.shared,
                shaping: t.shaping,
            })
            .collect();
        RewardBreakdown { terms }
    }

    fn row(&mut self, name: &str) -> &mut RewardTerm {
        self.terms
            .iter_mut()
            .find(|t| t.name == name)
            .unwrap_or_else(|| panic!("reward row `{name}` is not part of this task"))
    }

    pub fn set(&mut self, name: &str, drone: usize, value: f64) {
        self.row(name).values[drone] = value;
    }

    pub fn set_all(&mut self, name: &str, value: f64) {
        self.row(name).values.iter_mut().for_each(|v| *v = value);
    }

    pub fn value(&self, name: &str, drone: usize) -> f64 {
        self.terms.iter().find(|t| t.name == name).map_or(0.0, |t| t.values[drone])
    }

    pub fn total(&self, drone: usize) -> f64 {
        self.terms.iter().map(|t| t.values[drone]).sum()
    }

    pub fn zero_shaping(&mut self) {
        for t in self.terms.iter_mut().filter(|t| t.shaping) {
            t.values.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}
