//! Turn-based volleyball rules: hit legality, per-side hit counts, the
//! violation catalog and rally outcome.

use serde::{Deserialize, Serialize};

use crate::ball::{classify_point, BallState, ContactEvent, ContactKind, CourtGeometry, CourtRegion, Team};
use crate::dynamics::{DroneParams, DroneState};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Serve,
    Rally,
    Terminal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    CrossNet,
    WrongTurnHit,
    BodyHit,
    BallOut,
    BallIntoNet,
    TooLow,
    Remote,
    CollisionTeammate,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::CrossNet => "cross_net",
            ViolationKind::WrongTurnHit => "wrong_turn_hit",
            ViolationKind::BodyHit => "body_hit",
            ViolationKind::BallOut => "ball_out",
            ViolationKind::BallIntoNet => "ball_into_net",
            ViolationKind::TooLow => "too_low",
            ViolationKind::Remote => "remote",
            ViolationKind::CollisionTeammate => "collision_teammate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub offender: usize,
    pub team: Team,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "kind")]
pub enum OutcomeReason {
    BallLandedIn,
    Violation(ViolationKind),
    Timeout,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub winner: Option<Team>,
    pub reason: OutcomeReason,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RallyState {
    /// Team allowed to hit next.
    pub turn: Team,
    pub hits_this_side: u32,
    pub hit_limit: u32,
    /// Same drone may not contact the ball twice in a row within a possession.
    pub no_repeat_hits: bool,
    pub last_hitter: Option<usize>,
    pub serving_team: Team,
    pub server: usize,
    pub phase: Phase,
    /// Team of every drone, indexed by drone id.
    pub teams: Vec<Team>,
    /// Whether the ball has crossed the net since the serve.
    pub crossed: bool,
    /// Set when the ball lands inside a court half.
    pub landed_in: Option<Team>,
}

impl RallyState {
    pub fn new(teams: Vec<Team>, server: usize, hit_limit: u32) -> Result<Self> {
        let serving_team = *teams
            .get(server)
            .ok_or_else(|| Error::config(format!("server {server} is not a drone")))?;
        if hit_limit == 0 {
            return Err(Error::config("hit limit must be at least 1"));
        }
        let team_size = teams.iter().filter(|t| **t == serving_team).count();
        Ok(RallyState {
            turn: serving_team,
            hits_this_side: 0,
            hit_limit,
            no_repeat_hits: team_size > 1,
            last_hitter: None,
            serving_team,
            server,
            phase: Phase::Serve,
            teams,
            crossed: false,
            landed_in: None,
        })
    }

    pub fn team_of(&self, drone: usize) -> Team {
        self.teams[drone]
    }

    /// Whether `drone` may legally make the next contact.
    pub fn may_hit(&self, drone: usize) -> bool {
        self.hit_violation(drone).is_none()
    }

    fn hit_violation(&self, drone: usize) -> Option<ViolationKind> {
        let team = self.teams[drone];
        let in_serve_possession = !self.crossed && team == self.serving_team;
        let limit = if in_serve_possession { 1 } else { self.hit_limit };
        let repeat = self.no_repeat_hits && self.hits_this_side > 0 && self.last_hitter == Some(drone);
        let illegal = team != self.turn
            || repeat
            || self.hits_this_side >= limit
            || (self.phase == Phase::Serve && drone != self.server);
        illegal.then_some(ViolationKind::WrongTurnHit)
    }

    /// Team charged for faults on a ball nobody has touched yet.
    fn responsible(&self) -> (usize, Team) {
        let d = self.last_hitter.unwrap_or(self.server);
        (d, self.teams[d])
    }

    pub fn is_terminal(&self) -> bool {
        self.phase == Phase::Terminal
    }

    pub fn terminate(&mut self) {
        self.phase = Phase::Terminal;
    }
}

/// Apply one contact event. Returns the next state and any violation it caused.
pub fn on_event(
    rally: &RallyState,
    event: &ContactEvent,
    court: &CourtGeometry,
) -> Result<(RallyState, Option<Violation>)> {
    if rally.is_terminal() {
        return Err(Error::Contract("rally event after terminal phase".into()));
    }
    let mut next = rally.clone();
    let violation = match event.kind {
        ContactKind::RacketHit => {
            let d = event
                .drone_id
                .ok_or_else(|| Error::Contract("racket hit without drone id".into()))?;
            let team = rally.team_of(d);
            let v = rally.hit_violation(d);
            next.hits_this_side += 1;
            next.last_hitter = Some(d);
            next.phase = Phase::Rally;
            v.map(|kind| Violation { kind, offender: d, team })
        }
        ContactKind::BodyHit => {
            let d = event
                .drone_id
                .ok_or_else(|| Error::Contract("body hit without drone id".into()))?;
            Some(Violation { kind: ViolationKind::BodyHit, offender: d, team: rally.team_of(d) })
        }
        ContactKind::Net => {
            let (offender, team) = rally.responsible();
            Some(Violation { kind: ViolationKind::BallIntoNet, offender, team })
        }
        ContactKind::Floor => {
            match classify_point(event.point.x, event.point.y, event.pre_velocity.x, court) {
                CourtRegion::OutOfCourt => {
                    let (offender, team) = rally.responsible();
                    Some(Violation { kind: ViolationKind::BallOut, offender, team })
                }
                region => {
                    next.landed_in = region.team();
                    None
                }
            }
        }
        ContactKind::OutSimulationBounds => {
            let (offender, team) = rally.responsible();
            Some(Violation { kind: ViolationKind::BallOut, offender, team })
        }
        ContactKind::DefenseRacket => None,
    };
    Ok((next, violation))
}

/// Flip the turn when the ball has just passed over the net.
pub fn on_ball_motion(rally: &RallyState, ball: &BallState) -> RallyState {
    let mut next = rally.clone();
    if !rally.is_terminal() && ball.crossed_net_plane() {
        next.turn = if ball.position.x > 0.0 { Team::Red } else { Team::Blue };
        next.hits_this_side = 0;
        next.crossed = true;
    }
    next
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DroneLimits {
    /// Minimum flying height, m.
    pub z_min: f64,
    /// Allowed distance outside the own court half, m.
    pub remote_margin: f64,
}

impl Default for DroneLimits {
    fn default() -> Self {
        DroneLimits { z_min: 0.3, remote_margin: 1.5 }
    }
}

/// A drone taking part in a match: its team and physical state.
#[derive(Clone, Copy, Debug)]
pub struct TeamDrone<'a> {
    pub team: Team,
    pub params: &'a DroneParams,
    pub state: &'a DroneState,
}

/// Distance of a point outside the team's own court half.
pub fn distance_outside_half(team: Team, x: f64, y: f64, court: &CourtGeometry) -> f64 {
    let depth = team.side_sign() * x;
    let dx = (depth - court.half_length).max(-depth).max(0.0);
    let dy = (y.abs() - court.half_width).max(0.0);
    dx.hypot(dy)
}

pub fn check_drone_violations(
    drones: &[TeamDrone<'_>],
    court: &CourtGeometry,
    limits: &DroneLimits,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for (id, d) in drones.iter().enumerate() {
        let p = &d.state.position;
        let mk = |kind| Violation { kind, offender: id, team: d.team };
        if p.z < limits.z_min {
            out.push(mk(ViolationKind::TooLow));
        }
        if d.team.side_sign() * p.x - d.params.hull_radius < 0.0 {
            out.push(mk(ViolationKind::CrossNet));
        } else if distance_outside_half(d.team, p.x, p.y, court) > limits.remote_margin {
            out.push(mk(ViolationKind::Remote));
        }
        for other in &drones[id + 1..] {
            if other.team == d.team {
                let reach = d.params.hull_radius + other.params.hull_radius;
                if (other.state.position - p).norm() < reach {
                    out.push(mk(ViolationKind::CollisionTeammate));
                }
            }
        }
    }
    out
}

/// Decide whether the rally ended this step.
///
/// Violations take precedence in list order, then a landed ball, then the
/// step limit.
pub fn decide_outcome(
    rally: &RallyState,
    violations: &[Violation],
    step_count: u32,
    max_steps: u32,
) -> Option<Outcome> {
    if let Some(v) = violations.first() {
        return Some(Outcome { winner: Some(v.team.opponent()), reason: OutcomeReason::Violation(v.kind) });
    }
    if let Some(team) = rally.landed_in {
        return Some(Outcome { winner: Some(team.opponent()), reason: OutcomeReason::BallLandedIn });
    }
    (step_count >= max_steps).then_some(Outcome { winner: None, reason: OutcomeReason::Timeout })
}
