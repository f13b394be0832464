use rand::Rng;

use volleybots::dynamics::DroneParams;
use volleybots::metagame::elo::{expected_score, run_tournament, schedule, EloTable};
use volleybots::metagame::nash::{deviation_values, expected_payoff, solve_matrix_game};
use volleybots::metagame::population::meta_strategy;
use volleybots::metagame::{
    approx_exploitability, crossplay, estimate_payoff, population_loop, read_grid_csv, write_grid_csv,
    BruteForceOracle, Convergence, Game, LoopConfig, LoopMode, MatrixGame, Mixture, PayoffMatrix, SimGame,
};
use volleybots::par::Parallelism;
use volleybots::policies::{DrillFamily, PolicyParams, PolicySpec};
use volleybots::seed;
use volleybots::tasks::{TaskId, TaskSpec};

/// Maximin value of a 2-row game by scanning the row mix on a fine grid.
fn grid_value(a: &[Vec<f64>]) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..=100_000 {
        let p = k as f64 / 100_000.0;
        let worst = (0..a[0].len()).map(|j| p * a[0][j] + (1.0 - p) * a[1][j]).fold(f64::INFINITY, f64::min);
        if worst > best.0 {
            best = (worst, p);
        }
    }
    best
}

#[test]
fn rock_paper_scissors_is_uniform() {
    let a = vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]];
    let s = solve_matrix_game(&a).unwrap();
    for p in s.row.iter().chain(&s.col) {
        assert!((p - 1.0 / 3.0).abs() < 1e-12);
    }
    assert!(s.value.abs() < 1e-12);
}

#[test]
fn two_by_two_mixed_equilibrium() {
    let a = vec![vec![3.0, -1.0], vec![-2.0, 2.0]];
    let s = solve_matrix_game(&a).unwrap();
    let (v, p) = grid_value(&a);
    assert!((s.row[0] - 0.5).abs() < 1e-12 && (s.value - 0.5).abs() < 1e-12);
    assert!((s.row[0] - p).abs() < 1e-4 && (s.value - v).abs() < 1e-4);
    assert!((s.col[0] - 0.375).abs() < 1e-12);
}

#[test]
fn random_two_row_games_match_the_grid() {
    let mut r = seed::stream(8, 0, 0);
    for _ in 0..50 {
        let a: Vec<Vec<f64>> = (0..2).map(|_| (0..4).map(|_| r.random_range(-3.0..3.0)).collect()).collect();
        let s = solve_matrix_game(&a).unwrap();
        let (v, _) = grid_value(&a);
        assert!((s.value - v).abs() < 1e-3, "{a:?}: {} vs {v}", s.value);
        assert!((expected_payoff(&a, &s.row, &s.col) - s.value).abs() < 1e-9);
    }
}

#[test]
fn random_square_games_have_no_profitable_deviation() {
    let mut r = seed::stream(9, 0, 0);
    for n in [2, 3, 5, 8] {
        for _ in 0..25 {
            let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
            let s = solve_matrix_game(&a).unwrap();
            let (hi, lo) = deviation_values(&a, &s.row, &s.col);
            assert!(hi - s.value < 1e-9 && s.value - lo < 1e-9, "{a:?}");
        }
    }
}

#[test]
fn solver_is_deterministic_on_degenerate_games() {
    let a = vec![vec![0.0; 4]; 3];
    let s1 = solve_matrix_game(&a).unwrap();
    let s2 = solve_matrix_game(&a).unwrap();
    assert_eq!(s1, s2);
    assert_eq!(s1.value, 0.0);
}

#[test]
fn elo_formula_examples() {
    let mut t = EloTable::with_defaults(vec!["a".into(), "b".into()]).unwrap();
    t.ratings = vec![1400.0, 1000.0];
    let d = t.update(0, 1, true);
    assert!((d - 168.0 / 11.0).abs() < 1e-9);
    assert!((d - 15.27).abs() < 0.01);

    // A win and then a loss from equal ratings does not cancel: the loser
    // of the second game was the favourite.
    let mut t = EloTable::with_defaults(vec!["a".into(), "b".into()]).unwrap();
    t.update(0, 1, true);
    t.update(1, 0, true);
    let e_b = 1.0 / (1.0 + 10f64.powf(168.0 / 400.0));
    let want = 1084.0 - 168.0 * (1.0 - e_b);
    assert!((t.ratings[0] - want).abs() < 1e-9);
    assert!((t.ratings[0] - 962.28).abs() < 0.01);
    assert!((t.total() - 2000.0).abs() < 1e-12);
    assert!((expected_score(1000.0, 1000.0) - 0.5).abs() < 1e-15);
}

#[test]
fn tournament_is_balanced_and_logged() {
    let ids: Vec<String> = (0..5).map(|i| format!("p{i}")).collect();
    let result = run_tournament(ids, 30, 168.0, 1000.0, 3, Parallelism::Threads(2), |f| Ok(f.a < f.b)).unwrap();
    assert_eq!(result.log.len(), 10 * 30);
    for i in 0..5 {
        for j in i + 1..5 {
            assert_eq!(result.pair_counts[i][j], 30);
        }
    }
    // The lower index always wins, so ratings are strictly ordered.
    assert!(result.table.ratings.windows(2).all(|w| w[0] > w[1]));
    assert!((result.table.total() - 5000.0).abs() < 1e-9);
    assert_eq!(result.log.last().unwrap().rating_a, result.table.ratings[schedule(5, 30, 3).unwrap().last().unwrap().a]);
}

#[test]
fn exploitability_of_known_mixtures() {
    let g = MatrixGame::rock_paper_scissors();
    let e = approx_exploitability(&g, &[(0, 0.5), (1, 0.5)], &mut BruteForceOracle, 0).unwrap();
    // Against half rock, half paper: paper scores 0.75.
    assert_eq!(e.best_response, "s1");
    assert!((e.value - 0.25).abs() < 1e-12);
}

#[test]
fn nash_meta_of_rock_paper_scissors_population() {
    let g = MatrixGame::rock_paper_scissors();
    let m = meta_strategy(LoopMode::PsroNash, &g.entries).unwrap();
    assert!(m.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-12));
    assert_eq!(meta_strategy(LoopMode::Sp, &g.entries).unwrap(), vec![0.0, 0.0, 1.0]);
}

#[test]
fn fsp_on_rock_paper_scissors() {
    let g = MatrixGame::rock_paper_scissors();
    let cfg = LoopConfig {
        mode: LoopMode::Fsp,
        iterations: 4,
        games_per_cell: 1,
        convergence: Convergence { win_threshold: 0.9, std_threshold: 1.0, max_iters: 3 },
        seed: 0,
    };
    let run = population_loop(&g, &mut BruteForceOracle, 0, &cfg).unwrap();
    // vs {R}: P; vs {R,P}: P (0.75); vs {R,P,P}: P and S tie at 2/3, P wins;
    // vs {R,P,P,P}: S scores 0.75 against P's 0.625.
    assert_eq!(run.policies(), vec![0, 1, 1, 1, 2]);
    // Only the first reply clears 0.9, the others use every oracle call.
    let calls: Vec<usize> = run.members.iter().map(|m| m.oracle_calls).collect();
    assert_eq!(calls, vec![0, 1, 3, 3, 3]);
}

#[test]
fn crossplay_is_complementary() {
    let g = MatrixGame::rock_paper_scissors();
    let pops = vec![
        Mixture { label: "rock".into(), members: vec![0], weights: vec![1.0] },
        Mixture { label: "mixed".into(), members: vec![0, 1, 2], weights: vec![0.2, 0.5, 0.3] },
        Mixture { label: "paper".into(), members: vec![1], weights: vec![1.0] },
    ];
    let grid = crossplay(&g, &pops, 400, 5).unwrap();
    assert_eq!(grid[0][2], 0.0);
    assert_eq!(grid[2][0], 1.0);
    for (i, row) in grid.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!((0.0..=1.0).contains(v));
            if i == j && i != 1 {
                assert_eq!(*v, 0.5);
            }
        }
    }
    // Mixed vs rock: 0.2 * 0.5 + 0.5 * 1 + 0.3 * 0 = 0.6, give or take sampling.
    assert!((grid[1][0] - 0.6).abs() < 0.08, "{}", grid[1][0]);
    assert!((grid[0][1] + grid[1][0] - 1.0).abs() < 0.08);
}

#[test]
fn grid_csv_round_trip() {
    let rows = vec!["a".to_string(), "b".to_string()];
    let entries = vec![vec![0.5, 0.25], vec![0.75, 0.5]];
    let mut buf = Vec::new();
    write_grid_csv(&mut buf, &rows, &rows, &entries).unwrap();
    let (r, c, e) = read_grid_csv(buf.as_slice()).unwrap();
    assert_eq!((r, c, e), (rows.clone(), rows.clone(), entries.clone()));
    let m = PayoffMatrix::new(rows, entries, 10).unwrap();
    let s = volleybots::metagame::solve_zero_sum_nash(&m).unwrap();
    assert!((s.row[1] - 1.0).abs() < 1e-12);
}

fn duel(overrides: &[(&str, f64)]) -> PolicySpec {
    let mut p = PolicyParams::defaults(DrillFamily::Duel);
    for (name, v) in overrides {
        p = p.with(name, *v);
    }
    PolicySpec::duel(&p)
}

#[test]
fn self_play_payoff_is_even() {
    // Neither side can return a serve with contact this high, so every rally
    // goes to the server and serving alternates fairly.
    let spec = TaskSpec::preset(TaskId::OneVsOne);
    let p = duel(&[("return_offset", 1.2)]);
    let n = 1000;
    let est = estimate_payoff(&spec, &DroneParams::default(), &p, &p, n, 4, Parallelism::Threads(2)).unwrap();
    assert_eq!(est.wins_a + est.wins_b + est.timeouts, n as u64);
    assert!(est.timeouts < n as u64 / 10, "{} timeouts", est.timeouts);
    let x = est.score().lp();
    let sigma = (0.25 / n as f64).sqrt();
    assert!((x - 0.5).abs() <= 3.0 * sigma, "self-play score {x}");
}

#[test]
fn sim_game_scores_are_reproducible() {
    let g = SimGame::new(TaskSpec::preset(TaskId::OneVsOne), DroneParams::default(), Parallelism::Threads(2)).unwrap();
    let a = duel(&[]);
    let b = duel(&[("serve_depth", 0.3)]);
    let s1 = g.score(&a, &b, 16, 7).unwrap();
    let s2 = g.score(&a, &b, 16, 7).unwrap();
    assert_eq!(s1, s2);
    assert_eq!(s1.games, 16.0);
    let m = g.score_vs_mixture(&a, &[(a.clone(), 0.5), (b.clone(), 0.5)], 16, 7).unwrap();
    assert_eq!(m.games, 16.0);
    assert!(SimGame::new(TaskSpec::preset(TaskId::SoloBump), DroneParams::default(), Parallelism::Sequential).is_err());
}

#[test]
fn single_member_crossplay_is_a_payoff_estimate() {
    let g = SimGame::new(TaskSpec::preset(TaskId::OneVsOne), DroneParams::default(), Parallelism::Sequential).unwrap();
    let a = duel(&[]);
    let b = duel(&[("return_offset", 1.2)]);
    let pops = vec![
        Mixture { label: "a".into(), members: vec![a.clone()], weights: vec![1.0] },
        Mixture { label: "b".into(), members: vec![b.clone()], weights: vec![1.0] },
    ];
    let grid = crossplay(&g, &pops, 12, 3).unwrap();
    // Both sides always draw member 0, so the pair seed reaches the game unchanged.
    let pair_seed = seed::derive(3, 1, seed::tag::MATCH);
    let direct = g.score(&a, &b, 12, seed::derive(pair_seed, 0, seed::tag::MATCH)).unwrap();
    assert_eq!(grid[0][1], direct.lp());

    let one = estimate_payoff(&g.spec, &g.drone, &a, &b, 1, 0, Parallelism::Sequential).unwrap();
    assert_eq!(one.records.len(), 1);
    if let Some(r) = one.win_rate() {
        assert!(r == 0.0 || r == 1.0);
    }
}
