use serde::{Deserialize, Serialize};

use super::env::plane_crossing;
use super::{EpisodeEnd, TaskId, TaskSpec};
use crate::ball::{classify_point, predict_landing, BallState, ContactEvent, ContactKind, CourtRegion};
use crate::dynamics::Vec3;
use crate::error::{Error, Result};
use crate::rules::Outcome;

/// What metrics need from one simulated step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub step: u32,
    pub events: Vec<ContactEvent>,
    /// Ball after contacts were resolved.
    pub ball: Option<BallState>,
    pub drone_positions: Vec<[f64; 3]>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSpikeScore {
    pub setter_hit: bool,
    pub attacker_hit: bool,
    pub downward_spike: bool,
    /// In the target circle (easy) or past the defense racket into the opposing half (hard).
    pub final_component: bool,
}

impl SetSpikeScore {
    pub fn success_rate(&self) -> f64 {
        let parts = [self.setter_hit, self.attacker_hit, self.downward_spike, self.final_component];
        parts.iter().filter(|b| **b).count() as f64 / 4.0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub steps: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets_reached: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round_trips: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landing_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bump_count: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass_count: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_spike: Option<SetSpikeScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
}

impl EpisodeMetrics {
    /// Named scalar metrics for aggregation.
    pub fn scalars(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![("steps", self.steps as f64)];
        let mut push = |name, v: Option<f64>| {
            if let Some(v) = v {
                out.push((name, v));
            }
        };
        push("targets_reached", self.targets_reached.map(f64::from));
        push("round_trips", self.round_trips.map(f64::from));
        push("landing_distance", self.landing_distance);
        push("bump_count", self.bump_count.map(f64::from));
        push("pass_count", self.pass_count.map(f64::from));
        push("success_rate", self.success_rate);
        out
    }
}

fn racket_hits(trace: &[StepSummary]) -> impl Iterator<Item = (usize, &StepSummary, &ContactEvent)> {
    trace.iter().enumerate().flat_map(|(k, s)| {
        s.events.iter().filter(|e| e.kind == ContactKind::RacketHit).map(move |e| (k, s, e))
    })
}

fn apex_after(s: &StepSummary, g: f64) -> f64 {
    let b = s.ball.as_ref().expect("hit steps carry the ball");
    b.position.z + b.velocity.z.max(0.0).powi(2) / (2.0 * g)
}

/// Task metrics computed from a complete episode trace.
pub fn metrics(spec: &TaskSpec, trace: &[StepSummary], end: Option<&EpisodeEnd>) -> Result<EpisodeMetrics> {
    let end = end.ok_or_else(|| Error::Contract("metrics need a finished episode".into()))?;
    let g = spec.ball.gravity;
    let mut m = EpisodeMetrics { steps: trace.len() as u32, ..Default::default() };
    match spec.id {
        TaskId::BackAndForth => {
            let stay = spec.stay.ok_or_else(|| Error::config("back_and_forth needs a stay rule"))?;
            let (mut idx, mut count, mut reached) = (0usize, 0u32, 0u32);
            for s in trace {
                let p = Vec3::from(s.drone_positions[0]);
                if (p - Vec3::from(spec.waypoints[idx])).norm() <= stay.radius {
                    count += 1;
                    if count >= stay.steps {
                        reached += 1;
                        idx ^= 1;
                        count = 0;
                    }
                } else {
                    count = 0;
                }
            }
            m.targets_reached = Some(reached);
            m.round_trips = Some(reached / 2);
        }
        TaskId::HitTheBall => {
            let plane = spec.landing_plane.unwrap_or(2.0);
            if let Some((k, _, _)) = racket_hits(trace).next() {
                let a = spec.anchor(0);
                m.landing_distance = trace[k..].windows(2).find_map(|w| {
                    let (p, c) = (w[0].ball.as_ref()?, w[1].ball.as_ref()?);
                    (p.position.z >= plane && c.position.z < plane && c.velocity.z < 0.0).then(|| {
                        let xy = plane_crossing(p, c, plane);
                        (xy[0] - a.x).hypot(xy[1] - a.y)
                    })
                });
            }
        }
        TaskId::SoloBump => {
            let lo = spec.min_height.unwrap_or(3.5);
            let hi = spec.max_height.unwrap_or(f64::INFINITY);
            let n = racket_hits(trace).filter(|(_, s, _)| {
                let apex = apex_after(s, g);
                apex > lo && apex <= hi
            });
            m.bump_count = Some(n.count() as u32);
        }
        TaskId::BumpAndPass => {
            let lo = spec.min_height.unwrap_or(4.0);
            let radius = spec.pass_radius.unwrap_or(1.0);
            let mut expected = 0usize;
            let mut passes = 0;
            for (_, s, e) in racket_hits(trace) {
                let d = e.drone_id.unwrap_or(usize::MAX);
                if d != expected {
                    break;
                }
                expected = 1 - d;
                let partner = spec.anchor(1 - d);
                let b = s.ball.as_ref().expect("hit steps carry the ball");
                let near = predict_landing(b, partner.z, g)
                    .is_some_and(|l| (l.xy[0] - partner.x).hypot(l.xy[1] - partner.y) <= radius);
                if apex_after(s, g) > lo && near {
                    passes += 1;
                }
            }
            m.pass_count = Some(passes);
        }
        TaskId::SetAndSpikeEasy | TaskId::SetAndSpikeHard => {
            let mut score = SetSpikeScore::default();
            let mut hits = racket_hits(trace);
            let mut spike_step = None;
            if let Some((_, _, e)) = hits.next() {
                score.setter_hit = e.drone_id == Some(0);
            }
            if score.setter_hit {
                if let Some((k, _, e)) = hits.next() {
                    score.attacker_hit = e.drone_id == Some(1);
                    if score.attacker_hit {
                        score.downward_spike = e.post_velocity.z < 0.0;
                        spike_step = Some(k);
                    }
                }
            }
            if let Some(k) = spike_step {
                let court = spec.court_geometry();
                for s in &trace[k..] {
                    if s.events.iter().any(|e| e.kind == ContactKind::DefenseRacket) {
                        break;
                    }
                    if let Some(f) = s.events.iter().find(|e| e.kind == ContactKind::Floor) {
                        score.final_component = match &spec.target {
                            Some(t) if spec.id == TaskId::SetAndSpikeEasy => t.contains(f.point.x, f.point.y),
                            _ => {
                                classify_point(f.point.x, f.point.y, f.pre_velocity.x, &court)
                                    == CourtRegion::BlueCourt
                            }
                        };
                        break;
                    }
                }
            }
            m.success_rate = Some(score.success_rate());
            m.set_spike = Some(score);
        }
        TaskId::OneVsOne | TaskId::ThreeVsThree | TaskId::SixVsSix => {
            m.outcome = end.outcome();
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::DrillEnd;

    const END: EpisodeEnd = EpisodeEnd::Drill { reason: DrillEnd::Timeout };

    fn hit_with_apex(step: u32, drone: usize, apex: f64) -> StepSummary {
        let z = 2.2;
        let vz = (2.0 * 9.81 * (apex - z)).sqrt();
        let ball = BallState::with_velocity(Vec3::new(4.5, 0.0, z), Vec3::new(0.0, 0.0, vz));
        StepSummary {
            step,
            events: vec![ContactEvent {
                kind: ContactKind::RacketHit,
                drone_id: Some(drone),
                point: ball.position,
                pre_velocity: -ball.velocity,
                post_velocity: ball.velocity,
            }],
            ball: Some(ball),
            drone_positions: vec![[4.5, 0.0, 2.0]],
        }
    }

    #[test]
    fn bump_window() {
        let spec = TaskSpec::preset(TaskId::SoloBump);
        let trace = vec![hit_with_apex(10, 0, 3.8), hit_with_apex(90, 0, 4.2), hit_with_apex(170, 0, 4.9)];
        assert_eq!(metrics(&spec, &trace, Some(&END)).unwrap().bump_count, Some(2));
    }

    #[test]
    fn empty_trace_counts_nothing() {
        let spec = TaskSpec::preset(TaskId::SoloBump);
        assert_eq!(metrics(&spec, &[], Some(&END)).unwrap().bump_count, Some(0));
        let spec = TaskSpec::preset(TaskId::SetAndSpikeEasy);
        assert_eq!(metrics(&spec, &[], Some(&END)).unwrap().success_rate, Some(0.0));
    }

    #[test]
    fn unfinished_trace_is_rejected() {
        let spec = TaskSpec::preset(TaskId::SoloBump);
        assert!(matches!(metrics(&spec, &[], None), Err(Error::Contract(_))));
    }

    #[test]
    fn success_rate_quarters() {
        let mut s = SetSpikeScore::default();
        assert_eq!(s.success_rate(), 0.0);
        s.setter_hit = true;
        s.attacker_hit = true;
        s.downward_spike = true;
        assert_eq!(s.success_rate(), 0.75);
    }
}
