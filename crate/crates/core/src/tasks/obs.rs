use super::{ActionMode, TaskId, TaskSpec, World};
use crate::dynamics::{Vec3, ROOT_STATE_LEN, ROTORS};

fn push3(out: &mut Vec<f64>, v: Vec3) {
    out.extend_from_slice(v.as_slice());
}

fn one_hot(out: &mut Vec<f64>, n: usize, hot: usize) {
    out.extend((0..n).map(|i| if i == hot { 1.0 } else { 0.0 }));
}

/// Length of each drone's observation vector.
pub fn observation_dim(spec: &TaskSpec) -> usize {
    let root = match spec.action_mode {
        ActionMode::Prt => ROOT_STATE_LEN,
        ActionMode::Ctbr => ROOT_STATE_LEN - ROTORS,
    };
    let n = spec.n_drones();
    let extras = match spec.id {
        TaskId::BackAndForth => 0,
        TaskId::HitTheBall | TaskId::SoloBump => 6,
        TaskId::BumpAndPass | TaskId::OneVsOne => 2 + 2 + 6 + 3 * (n - 1),
        TaskId::SetAndSpikeEasy | TaskId::SetAndSpikeHard => 2 + 3 + 6 + 3 * (n - 1),
        TaskId::ThreeVsThree | TaskId::SixVsSix => 6 + 6 + spec.team_size() + 1 + 3 * (n - 1),
    };
    root + 3 + extras
}

/// Per-drone observation vectors.
///
/// Layout: root state | position relative to anchor | task extras. See
/// `docs/observations.md` for the extras of each task.
pub fn observe(spec: &TaskSpec, world: &World) -> Vec<Vec<f64>> {
    let n = spec.n_drones();
    (0..n)
        .map(|i| {
            let d = &world.drones[i];
            let root = d.root_state();
            let mut out = Vec::with_capacity(observation_dim(spec));
            match spec.action_mode {
                ActionMode::Prt => out.extend_from_slice(&root),
                ActionMode::Ctbr => out.extend_from_slice(&root[..ROOT_STATE_LEN - ROTORS]),
            }
            let anchor = if spec.id == TaskId::BackAndForth {
                Vec3::from(spec.waypoints[world.progress.target_index])
            } else {
                spec.anchor(i)
            };
            push3(&mut out, d.position - anchor);

            let ball = |out: &mut Vec<f64>| {
                if let Some(b) = &world.ball {
                    push3(out, b.position - d.position);
                    push3(out, b.velocity);
                }
            };
            let others = |out: &mut Vec<f64>, order: &[usize]| {
                for &j in order.iter().filter(|&&j| j != i) {
                    push3(out, world.drones[j].position - d.position);
                }
            };
            let all: Vec<usize> = (0..n).collect();
            match spec.id {
                TaskId::BackAndForth => {}
                TaskId::HitTheBall | TaskId::SoloBump => ball(&mut out),
                TaskId::BumpAndPass => {
                    one_hot(&mut out, 2, i);
                    one_hot(&mut out, 2, world.progress.expected_hitter);
                    ball(&mut out);
                    others(&mut out, &all);
                }
                TaskId::SetAndSpikeEasy | TaskId::SetAndSpikeHard => {
                    one_hot(&mut out, 2, i);
                    one_hot(&mut out, 3, (world.progress.hits as usize).min(2));
                    ball(&mut out);
                    others(&mut out, &all);
                }
                TaskId::OneVsOne => {
                    one_hot(&mut out, 2, i);
                    let on_turn = spec.team_members(world.rally.turn)[0];
                    one_hot(&mut out, 2, on_turn);
                    ball(&mut out);
                    others(&mut out, &all);
                }
                TaskId::ThreeVsThree | TaskId::SixVsSix => {
                    let team = spec.drones[i].team;
                    ball(&mut out);
                    one_hot(&mut out, 2, usize::from(world.rally.turn != team));
                    one_hot(&mut out, 4, (world.rally.hits_this_side as usize).min(3));
                    let mates = spec.team_members(team);
                    let rank = mates.iter().position(|&j| j == i).unwrap_or(0);
                    one_hot(&mut out, spec.team_size(), rank);
                    out.push(if world.rally.may_hit(i) { 1.0 } else { 0.0 });
                    let mut order = mates.clone();
                    order.extend(spec.team_members(team.opponent()));
                    others(&mut out, &order);
                }
            }
            out
        })
        .collect()
}
