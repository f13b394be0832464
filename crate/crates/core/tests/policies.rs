use proptest::prelude::*;
use rand::Rng;

use volleybots::ball::{predict_landing, ContactKind, Team};
use volleybots::dynamics::{DroneParams, Vec3};
use volleybots::harness::{play_episode, TraceLevel};
use volleybots::policies::control::{TrackGains, Tracker};
use volleybots::policies::drills::team_frame;
use volleybots::policies::{
    skill_controller, DrillFamily, DrillInput, HierarchicalParams, PolicyContext, PolicyParams, PolicySpec, Side, Skill,
    TeamLayout,
};
use volleybots::rules::{OutcomeReason, Phase, ViolationKind};
use volleybots::seed;
use volleybots::tasks::{Action, ActionMode, Env, TaskId, TaskSpec};

fn in_bounds(a: &Action, rate_limit: f64) -> bool {
    match a {
        Action::Rotor(t) => t.0.iter().all(|f| (0.0..=1.0).contains(f)),
        Action::Ctbr(c) => (0.0..=1.0).contains(&c.thrust) && c.rates.iter().all(|r| r.abs() <= rate_limit),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn controller_outputs_stay_in_the_action_box(
        task in 0usize..9,
        policy in 0usize..4,
        ctbr in any::<bool>(),
        seed_value in any::<u64>(),
        scale in 0.0f64..30.0,
    ) {
        let id = TaskId::ALL[task];
        let mode = if ctbr { ActionMode::Ctbr } else { ActionMode::Prt };
        let spec = TaskSpec::preset(id).with_action_mode(mode);
        let policy = [PolicySpec::Scripted, PolicySpec::Hover, PolicySpec::Hierarchical, PolicySpec::duel(&PolicyParams::defaults(DrillFamily::Duel))][policy].clone();
        let drone = DroneParams::default();
        let Ok(mut p) = policy.build(&spec) else { return Ok(()) };
        let mut env = Env::new(spec.clone(), drone.clone()).unwrap();
        env.reset(seed_value);
        // Throw every drone and the ball into an arbitrary state.
        let mut r = seed::stream(seed_value, 1, 7);
        let mut world = env.world().clone();
        for d in &mut world.drones {
            d.position += Vec3::from_fn(|_, _| r.random_range(-1.0..1.0) * scale * 0.2);
            d.velocity = Vec3::from_fn(|_, _| r.random_range(-1.0..1.0) * scale);
            d.angular_velocity = Vec3::from_fn(|_, _| r.random_range(-1.0..1.0) * scale);
            let axis = Vec3::from_fn(|_, _| r.random_range(-1.0..1.0));
            let q = nalgebra::UnitQuaternion::from_scaled_axis(axis * r.random_range(0.0..3.0));
            d.orientation = q.into_inner();
        }
        if let Some(b) = &mut world.ball {
            b.position += Vec3::from_fn(|_, _| r.random_range(-3.0..3.0));
            b.velocity = Vec3::from_fn(|_, _| r.random_range(-1.0..1.0) * scale);
        }
        env.set_world(world);
        let obs = env.observe();
        let controlled: Vec<usize> = if id.is_competitive() { spec.team_members(Team::Red) } else { (0..spec.n_drones()).collect() };
        let ctx = PolicyContext { spec: &spec, drone: &drone, world: env.world(), obs: &obs, events: &[], controlled: &controlled };
        let mut prng = seed::stream(seed_value, 2, seed::tag::POLICY_RED);
        p.reset(&ctx, &mut prng);
        let actions = p.act(&ctx, &mut prng);
        prop_assert_eq!(actions.len(), controlled.len());
        for a in &actions {
            prop_assert!(in_bounds(a, drone.rate_limit), "{:?}", a);
        }
    }
}

#[test]
fn first_serve_heads_for_the_far_half() {
    let drone = DroneParams::default();
    let cases = [
        (TaskId::OneVsOne, PolicySpec::Scripted),
        (TaskId::ThreeVsThree, PolicySpec::Hierarchical),
        (TaskId::SixVsSix, PolicySpec::Hierarchical),
    ];
    for (id, policy) in cases {
        let spec = TaskSpec::preset(id);
        for i in 0..6 {
            let out = play_episode(&spec, &drone, &policy, &policy, 3, i, TraceLevel::Events).unwrap();
            let hit = out
                .records
                .iter()
                .flat_map(|r| &r.events)
                .find(|e| e.kind == ContactKind::RacketHit)
                .unwrap_or_else(|| panic!("{id} episode {i}: nobody served"));
            let server = spec.drones[hit.drone_id.unwrap()].team;
            assert!(server.side_sign() * hit.post_velocity.x < 0.0, "{id} episode {i}: {:?}", hit.post_velocity);
        }
    }
}

/// Strike a ball dropped above red's front-right drone as an attack to `side`
/// and return where it comes down.
fn attack_landing(side: Side) -> [f64; 2] {
    let spec = TaskSpec::preset(TaskId::ThreeVsThree);
    let drone = DroneParams::default();
    let layout = TeamLayout::from_spec(&spec, Team::Red).unwrap();
    let attacker = layout.front_right;
    let mut env = Env::new(spec.clone(), drone.clone()).unwrap();
    env.reset(5);
    let mut world = env.world().clone();
    for (d, s) in world.drones.iter_mut().enumerate() {
        *s = volleybots::dynamics::DroneState::at_rest(spec.anchor(d), drone.hover_fraction(spec.ball.gravity));
    }
    let ball = world.ball.as_mut().unwrap();
    *ball = volleybots::ball::BallState::at_rest(spec.anchor(attacker) + Vec3::new(0.0, 0.0, 2.0));
    ball.last_hitter = Some(layout.front_left);
    world.rally.phase = Phase::Rally;
    world.rally.crossed = true;
    world.rally.serving_team = Team::Blue;
    world.rally.turn = Team::Red;
    world.rally.hits_this_side = 2;
    world.rally.last_hitter = Some(layout.front_left);
    env.set_world(world);

    let tracker = Tracker::new(&drone, spec.ball.gravity);
    let court = spec.court_geometry();
    let stations: Vec<Vec3> = (0..spec.n_drones()).map(|d| spec.anchor(d)).collect();
    let skill = Skill::Attack { side };
    let params = HierarchicalParams::default().for_skill(&skill);
    for _ in 0..300 {
        let w = env.world().clone();
        let actions: Vec<Action> = (0..spec.n_drones())
            .map(|d| {
                if d != attacker {
                    return tracker.hover(&w.drones[d], stations[d], &TrackGains::default(), spec.action_mode);
                }
                let input = DrillInput {
                    tracker: &tracker,
                    mode: spec.action_mode,
                    state: &w.drones[d],
                    home: stations[d],
                    team: Team::Red,
                    court: &court,
                    ball: w.ball.as_ref(),
                    ball_radius: spec.ball.radius,
                    ball_restitution: spec.ball.restitution,
                    stations: &stations,
                    leash: None,
                };
                skill_controller(&skill, &params, &input)
            })
            .collect();
        let step = env.step(&actions).unwrap();
        if let Some(hit) = step.events.iter().find(|e| e.kind == ContactKind::RacketHit) {
            assert_eq!(hit.drone_id, Some(attacker));
            let ball = env.world().ball.clone().unwrap();
            return predict_landing(&ball, spec.ball.radius, spec.ball.gravity).unwrap().xy;
        }
        assert!(step.end.is_none(), "episode ended before the attack: {:?}", step.end);
    }
    panic!("attacker never reached the ball");
}

#[test]
fn attack_sides_are_mirrored() {
    let left = attack_landing(Side::Left);
    let right = attack_landing(Side::Right);
    let left_sign = team_frame(Team::Red, 0.0, 1.0).y.signum();
    assert!(left[0] < 0.0 && right[0] < 0.0, "attacks land in blue's half: {left:?} {right:?}");
    assert_eq!(left[1].signum(), left_sign, "{left:?}");
    assert_eq!(right[1].signum(), -left_sign, "{right:?}");
}

#[test]
fn same_seed_same_episode() {
    let drone = DroneParams::default();
    for (id, red, blue) in [
        (TaskId::ThreeVsThree, PolicySpec::Hierarchical, PolicySpec::Random),
        (TaskId::OneVsOne, PolicySpec::Scripted, PolicySpec::Scripted),
        (TaskId::SetAndSpikeHard, PolicySpec::Scripted, PolicySpec::Hover),
    ] {
        let spec = TaskSpec::preset(id);
        let a = play_episode(&spec, &drone, &red, &blue, 9, 4, TraceLevel::Full).unwrap();
        let b = play_episode(&spec, &drone, &red, &blue, 9, 4, TraceLevel::Full).unwrap();
        assert_eq!(a, b, "{id}");
        let c = play_episode(&spec, &drone, &red, &blue, 9, 5, TraceLevel::Full).unwrap();
        assert_ne!(a.records, c.records, "{id}");
    }
}

#[test]
fn hierarchical_self_play_never_hits_out_of_turn() {
    let spec = TaskSpec::preset(TaskId::ThreeVsThree);
    let drone = DroneParams::default();
    let mut hits = 0;
    for i in 0..10 {
        let out = play_episode(&spec, &drone, &PolicySpec::Hierarchical, &PolicySpec::Hierarchical, 1, i, TraceLevel::Events)
            .unwrap();
        hits += out.records.iter().flat_map(|r| &r.events).filter(|e| e.kind == ContactKind::RacketHit).count();
        let reason = out.end.outcome().unwrap().reason;
        assert_ne!(reason, OutcomeReason::Violation(ViolationKind::WrongTurnHit), "episode {i}");
    }
    assert!(hits > 20, "only {hits} hits in 10 rallies");
}

#[test]
fn hover_team_loses_to_hierarchical() {
    let spec = TaskSpec::preset(TaskId::ThreeVsThree);
    let drone = DroneParams::default();
    let mut wins = 0;
    for i in 0..20 {
        let out = play_episode(&spec, &drone, &PolicySpec::Hover, &PolicySpec::Hierarchical, 2, i, TraceLevel::Off).unwrap();
        if out.winner() == Some(Team::Blue) {
            wins += 1;
        }
    }
    assert!(wins >= 19, "hierarchical won {wins}/20 as blue");
}
