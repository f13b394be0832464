//! Event-driven high-level policy assigning drills to a team.

use std::collections::HashMap;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::control::Tracker;
use super::drills::{skill_controller, DrillFamily, DrillInput, PolicyParams, Side, Skill};
use super::{Policy, PolicyContext};
use crate::ball::{BallState, ContactKind, Team};
use crate::dynamics::Vec3;
use crate::error::{Error, Result};
use crate::rules::{Phase, RallyState};
use crate::tasks::{Action, TaskSpec};

/// Role of each team member, as seen facing the net.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamLayout {
    pub team: Team,
    pub members: Vec<usize>,
    pub front_left: usize,
    pub front_right: usize,
    pub backward: usize,
}

impl TeamLayout {
    pub fn from_spec(spec: &TaskSpec, team: Team) -> Result<Self> {
        let members = spec.team_members(team);
        if members.len() < 3 {
            return Err(Error::config(format!(
                "the hierarchical policy needs at least 3 drones per team, {} has {}",
                spec.id,
                members.len()
            )));
        }
        let s = team.side_sign();
        let depth = |i: &usize| s * spec.anchor(*i).x;
        let left = |i: &usize| -s * spec.anchor(*i).y;
        let mut by_depth = members.clone();
        by_depth.sort_by(|a, b| depth(a).total_cmp(&depth(b)).then(a.cmp(b)));
        let backward = *by_depth.last().expect("non-empty");
        let mut front = [by_depth[0], by_depth[1]];
        front.sort_by(|a, b| left(b).total_cmp(&left(a)).then(a.cmp(b)));
        Ok(TeamLayout { team, members, front_left: front[0], front_right: front[1], backward })
    }
}

/// Skills held by every team member until the next hit event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub skills: Vec<(usize, Skill)>,
    /// Ordinal of the event that produced this assignment; reset is 0.
    pub issued_at_event: u64,
}

impl Assignment {
    pub fn skill_of(&self, drone: usize) -> Option<&Skill> {
        self.skills.iter().find(|(d, _)| *d == drone).map(|(_, s)| s)
    }

    pub fn strikers(&self) -> Vec<usize> {
        self.skills.iter().filter(|(_, s)| s.is_strike()).map(|(d, _)| *d).collect()
    }
}

/// Decide every member's skill after a hit event (or at serve start).
pub fn high_level_assign(
    rally: &RallyState,
    _ball: Option<&BallState>,
    layout: &TeamLayout,
    stations: &[Vec3],
    event: u64,
    rng: &mut dyn RngCore,
) -> Assignment {
    let hover = |d: usize| Skill::Hover { target: stations[d].into() };
    let mut skills: Vec<(usize, Skill)> = layout.members.iter().map(|&d| (d, hover(d))).collect();
    let mut give = |drone: usize, skill: Skill| {
        if let Some(slot) = skills.iter_mut().find(|(d, _)| *d == drone) {
            slot.1 = skill;
        }
    };
    let mine = layout.team;
    match rally.last_hitter {
        None => {
            if rally.phase == Phase::Serve && rally.serving_team == mine {
                give(rally.server, Skill::Serve);
            }
        }
        Some(h) if rally.team_of(h) != mine => give(layout.backward, Skill::Pass { receiver: layout.front_left }),
        Some(h) => {
            let serve_possession = rally.serving_team == mine && !rally.crossed;
            if !serve_possession {
                let (fl, fr) = (layout.front_left, layout.front_right);
                match rally.hits_this_side {
                    1 => {
                        let (setter, receiver) = if h == fl { (fr, fl) } else { (fl, fr) };
                        give(setter, Skill::Set { receiver });
                    }
                    2 => {
                        let attacker = if h == fr { fl } else { fr };
                        let side = if rng.random_bool(0.5) { Side::Left } else { Side::Right };
                        give(attacker, Skill::Attack { side });
                    }
                    _ => {}
                }
            }
        }
    }
    Assignment { skills, issued_at_event: event }
}

/// Drill parameters of the hierarchical policy, one vector per family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalParams {
    pub drills: HashMap<DrillFamily, PolicyParams>,
}

impl Default for HierarchicalParams {
    fn default() -> Self {
        let families = [DrillFamily::Hover, DrillFamily::Serve, DrillFamily::Pass, DrillFamily::Set, DrillFamily::Attack];
        HierarchicalParams { drills: families.into_iter().map(|f| (f, PolicyParams::defaults(f))).collect() }
    }
}

impl HierarchicalParams {
    pub fn for_skill(&self, skill: &Skill) -> PolicyParams {
        let f = skill.family();
        self.drills.get(&f).cloned().unwrap_or_else(|| PolicyParams::defaults(f))
    }
}

pub struct HierarchicalPolicy {
    params: HierarchicalParams,
    layout: Option<TeamLayout>,
    tracker: Option<Tracker>,
    assignment: Option<Assignment>,
    events: u64,
    history: Vec<Assignment>,
}

impl HierarchicalPolicy {
    pub fn new(params: HierarchicalParams) -> Self {
        HierarchicalPolicy { params, layout: None, tracker: None, assignment: None, events: 0, history: Vec::new() }
    }

    pub fn assignment(&self) -> Option<&Assignment> {
        self.assignment.as_ref()
    }

    /// Every assignment issued since the last reset.
    pub fn history(&self) -> &[Assignment] {
        &self.history
    }

    pub fn layout(&self) -> Option<&TeamLayout> {
        self.layout.as_ref()
    }

    fn assign(&mut self, ctx: &PolicyContext<'_>, rng: &mut dyn RngCore) {
        let layout = self.layout.as_ref().expect("reset before act");
        let stations: Vec<Vec3> = (0..ctx.spec.n_drones()).map(|i| ctx.spec.anchor(i)).collect();
        let a = high_level_assign(&ctx.world.rally, ctx.world.ball.as_ref(), layout, &stations, self.events, rng);
        self.history.push(a.clone());
        self.assignment = Some(a);
    }
}

impl Policy for HierarchicalPolicy {
    fn reset(&mut self, ctx: &PolicyContext<'_>, rng: &mut dyn RngCore) {
        let team = ctx.team().ok_or_else(|| Error::config("hierarchical policy controls no drones"));
        self.layout = team.and_then(|t| TeamLayout::from_spec(ctx.spec, t)).ok();
        self.tracker = Some(Tracker::new(ctx.drone, ctx.spec.ball.gravity));
        self.events = 0;
        self.history.clear();
        if self.layout.is_some() {
            self.assign(ctx, rng);
        }
    }

    fn act(&mut self, ctx: &PolicyContext<'_>, rng: &mut dyn RngCore) -> Vec<Action> {
        if ctx.events.iter().any(|e| e.kind == ContactKind::RacketHit) {
            self.events += 1;
            self.assign(ctx, rng);
        }
        let tracker = self.tracker.as_ref().expect("reset before act");
        let layout = self.layout.as_ref().expect("reset before act");
        let assignment = self.assignment.as_ref().expect("reset before act");
        let stations: Vec<Vec3> = (0..ctx.spec.n_drones()).map(|i| ctx.spec.anchor(i)).collect();
        let court = ctx.spec.court_geometry();
        ctx.controlled
            .iter()
            .map(|&d| {
                let skill = assignment.skill_of(d).copied().unwrap_or(Skill::Hover { target: stations[d].into() });
                let input = DrillInput {
                    tracker,
                    mode: ctx.spec.action_mode,
                    state: &ctx.world.drones[d],
                    home: stations[d],
                    team: layout.team,
                    court: &court,
                    ball: ctx.world.ball.as_ref(),
                    ball_radius: ctx.spec.ball.radius,
                    ball_restitution: ctx.spec.ball.restitution,
                    stations: &stations,
                    leash: None,
                };
                skill_controller(&skill, &self.params.for_skill(&skill), &input)
            })
            .collect()
    }

    fn name(&self) -> String {
        "hierarchical".into()
    }
}
