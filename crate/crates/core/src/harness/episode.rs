//! One seeded episode with a policy per side.

use serde::{Deserialize, Serialize};

use crate::ball::{ContactEvent, Team};
use crate::dynamics::{DroneParams, DroneState};
use crate::error::{Error, Result};
use crate::policies::{Policy, PolicyContext, PolicySpec};
use crate::rules::Phase;
use crate::seed;
use crate::tasks::{metrics, Action, EpisodeEnd, EpisodeMetrics, Env, RewardTerm, StepSummary, TaskSpec, World};

/// How much of each episode is recorded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceLevel {
    #[default]
    Off,
    /// Only steps with contacts, plus the final step.
    Events,
    Full,
}

impl std::str::FromStr for TraceLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(TraceLevel::Off),
            "events" => Ok(TraceLevel::Events),
            "full" => Ok(TraceLevel::Full),
            _ => Err(Error::config(format!("trace level `{s}` is not one of off, events, full"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DroneSummary {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    /// Unit quaternion (w, i, j, k).
    pub orientation: [f64; 4],
    pub angular_velocity: [f64; 3],
}

impl From<&DroneState> for DroneSummary {
    fn from(d: &DroneState) -> Self {
        let q = &d.orientation;
        DroneSummary {
            position: d.position.into(),
            velocity: d.velocity.into(),
            orientation: [q.w, q.i, q.j, q.k],
            angular_velocity: d.angular_velocity.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSummary {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
}

/// State after one environment step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u32,
    pub phase: Phase,
    pub drones: Vec<DroneSummary>,
    pub ball: Option<BallSummary>,
    pub events: Vec<ContactEvent>,
    pub reward: Vec<RewardTerm>,
    pub end: Option<EpisodeEnd>,
}

impl TraceRecord {
    fn capture(world: &World, events: &[ContactEvent], reward: Vec<RewardTerm>, end: Option<EpisodeEnd>) -> Self {
        TraceRecord {
            step: world.step,
            phase: world.rally.phase,
            drones: world.drones.iter().map(DroneSummary::from).collect(),
            ball: world.ball.as_ref().map(|b| BallSummary { position: b.position.into(), velocity: b.velocity.into() }),
            events: events.to_vec(),
            reward,
            end,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeOutput {
    pub master_seed: u64,
    pub index: u64,
    pub end: EpisodeEnd,
    pub metrics: EpisodeMetrics,
    pub records: Vec<TraceRecord>,
}

impl EpisodeOutput {
    pub fn winner(&self) -> Option<Team> {
        self.end.outcome().and_then(|o| o.winner)
    }
}

/// Drones commanded by each side. Single-team drills put every drone on red.
pub fn side_groups(spec: &TaskSpec) -> [Vec<usize>; 2] {
    if spec.id.is_competitive() {
        [spec.team_members(Team::Red), spec.team_members(Team::Blue)]
    } else {
        [(0..spec.n_drones()).collect(), Vec::new()]
    }
}

/// Play episode `index` of the run seeded by `master_seed`.
pub fn play_episode(
    spec: &TaskSpec,
    drone: &DroneParams,
    red: &PolicySpec,
    blue: &PolicySpec,
    master_seed: u64,
    index: u64,
    trace: TraceLevel,
) -> Result<EpisodeOutput> {
    let mut policies: [Box<dyn Policy>; 2] = [red.build(spec)?, blue.build(spec)?];
    play_with(spec, drone, &mut policies, master_seed, index, trace)
}

/// Like [`play_episode`] with already built policies.
pub fn play_with(
    spec: &TaskSpec,
    drone: &DroneParams,
    policies: &mut [Box<dyn Policy>; 2],
    master_seed: u64,
    index: u64,
    trace: TraceLevel,
) -> Result<EpisodeOutput> {
    let mut env = Env::new(spec.clone(), drone.clone())?;
    env.reset_with(&mut seed::stream(master_seed, index, seed::tag::RESET));
    let groups = side_groups(spec);
    let mut rngs = [
        seed::stream(master_seed, index, seed::tag::POLICY_RED),
        seed::stream(master_seed, index, seed::tag::POLICY_BLUE),
    ];
    let n = spec.n_drones();
    let mut events: Vec<ContactEvent> = Vec::new();
    let mut summaries = Vec::new();
    let mut records = Vec::new();

    let obs = env.observe();
    for (side, group) in groups.iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        let ctx = PolicyContext { spec, drone, world: env.world(), obs: &obs, events: &events, controlled: group };
        policies[side].reset(&ctx, &mut rngs[side]);
    }
    loop {
        let obs = env.observe();
        let mut actions: Vec<Option<Action>> = vec![None; n];
        for (side, group) in groups.iter().enumerate() {
            if group.is_empty() {
                continue;
            }
            let ctx = PolicyContext { spec, drone, world: env.world(), obs: &obs, events: &events, controlled: group };
            let out = policies[side].act(&ctx, &mut rngs[side]);
            if out.len() != group.len() {
                return Err(Error::Contract(format!(
                    "policy {} returned {} actions for {} drones",
                    policies[side].name(),
                    out.len(),
                    group.len()
                )));
            }
            for (a, &d) in out.into_iter().zip(group) {
                actions[d] = Some(a);
            }
        }
        let actions: Vec<Action> = actions.into_iter().map(|a| a.expect("every drone is on a side")).collect();
        let result = env.step(&actions)?;
        let world = env.world();
        summaries.push(StepSummary {
            step: world.step,
            events: result.events.clone(),
            ball: world.ball.clone(),
            drone_positions: world.drones.iter().map(|d| d.position.into()).collect(),
        });
        let keep = match trace {
            TraceLevel::Off => false,
            TraceLevel::Events => !result.events.is_empty() || result.end.is_some(),
            TraceLevel::Full => true,
        };
        if keep {
            records.push(TraceRecord::capture(world, &result.events, result.reward.terms.clone(), result.end));
        }
        events = result.events;
        if let Some(end) = result.end {
            let metrics = metrics(spec, &summaries, Some(&end))?;
            return Ok(EpisodeOutput { master_seed, index, end, metrics, records });
        }
    }
}
