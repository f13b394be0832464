//! Payoff estimation, Nash meta-solving, population loops, exploitability,
//! Elo tournaments and cross-play.
//!
//! Everything above the simulator is written against [`Game`], so the same
//! loops run on live matches ([`SimGame`]) and on synthetic matrix games
//! ([`MatrixGame`]) with exact payoffs.

pub mod config;
pub mod elo;
pub mod nash;
pub mod population;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use config::{live_player, ManifestMember, MetagameConfig, PopulationManifest};
pub use elo::{expected_score, run_tournament, schedule, EloTable, Fixture, MatchRecord, TournamentResult};
pub use nash::{duality_gap, solve_matrix_game, NashSolution};
pub use population::{
    population_loop, BestResponse, BruteForceOracle, Convergence, LoopConfig, LoopMode, Member, Oracle, PopulationRun,
};

use crate::ball::Team;
use crate::dynamics::DroneParams;
use crate::error::{Error, Result};
use crate::harness::{end_label, play_episode, TraceLevel};
use crate::par::{par_map, Parallelism};
use crate::policies::PolicySpec;
use crate::seed;
use crate::tasks::TaskSpec;

/// Win counts of one side; fractional for exact expected payoffs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub wins: f64,
    pub losses: f64,
    pub draws: f64,
    pub games: f64,
}

impl Score {
    /// Win rate over decided games; `None` when every game was a draw.
    pub fn win_rate(&self) -> Option<f64> {
        let decided = self.wins + self.losses;
        (decided > 0.0).then(|| self.wins / decided)
    }

    /// Score with draws counted as half a win, the convention of the
    /// zero-sum meta-game.
    pub fn lp(&self) -> f64 {
        if self.games > 0.0 {
            (self.wins + 0.5 * self.draws) / self.games
        } else {
            0.5
        }
    }

    /// Standard error of the win rate over decided games.
    pub fn std_err(&self) -> f64 {
        let decided = self.wins + self.losses;
        match self.win_rate() {
            Some(p) => (p * (1.0 - p) / decided).sqrt(),
            None => f64::INFINITY,
        }
    }

    fn add_weighted(&mut self, other: &Score, w: f64) {
        self.wins += w * other.wins;
        self.losses += w * other.losses;
        self.draws += w * other.draws;
        self.games += w * other.games;
    }
}

/// A symmetric two-player zero-sum game over some policy representation.
pub trait Game: Sync {
    type Policy: Clone + Send + Sync + std::fmt::Debug;

    fn label(&self, p: &Self::Policy) -> String;

    /// Result of `a` against `b` over `games` games.
    fn score(&self, a: &Self::Policy, b: &Self::Policy, games: usize, seed: u64) -> Result<Score>;

    /// Result of `a` against a mixture; the default weights exact per-opponent
    /// scores, which is what synthetic games want.
    fn score_vs_mixture(&self, a: &Self::Policy, opponents: &[(Self::Policy, f64)], games: usize, seed: u64) -> Result<Score> {
        let mut total = Score::default();
        for (k, (b, w)) in opponents.iter().enumerate() {
            if *w > 0.0 {
                let s = self.score(a, b, games, seed::derive(seed, k as u64, seed::tag::MATCH))?;
                total.add_weighted(&s, *w);
            }
        }
        Ok(total)
    }
}

/// Exact matrix game; the policy is a row index and entries are the row
/// player's expected score.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGame {
    pub entries: Vec<Vec<f64>>,
}

impl MatrixGame {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::config("matrix game must be square and non-empty"));
        }
        if entries.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::config("matrix game entries must lie in [0, 1]"));
        }
        Ok(MatrixGame { entries })
    }

    pub fn rock_paper_scissors() -> Self {
        MatrixGame { entries: vec![vec![0.5, 0.0, 1.0], vec![1.0, 0.5, 0.0], vec![0.0, 1.0, 0.5]] }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }
}

impl Game for MatrixGame {
    type Policy = usize;

    fn label(&self, p: &usize) -> String {
        format!("s{p}")
    }

    fn score(&self, a: &usize, b: &usize, _games: usize, _seed: u64) -> Result<Score> {
        let p = *self
            .entries
            .get(*a)
            .and_then(|r| r.get(*b))
            .ok_or_else(|| Error::config(format!("strategy ({a}, {b}) is outside the matrix")))?;
        Ok(Score { wins: p, losses: 1.0 - p, draws: 0.0, games: 1.0 })
    }
}

/// One simulated game of a payoff estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub game: u64,
    pub master_seed: u64,
    pub a_side: Team,
    pub winner: Option<Team>,
    pub a_won: Option<bool>,
    pub reason: String,
    pub steps: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffEstimate {
    pub a: String,
    pub b: String,
    pub wins_a: u64,
    pub wins_b: u64,
    pub timeouts: u64,
    pub records: Vec<GameRecord>,
}

impl PayoffEstimate {
    pub fn score(&self) -> Score {
        Score {
            wins: self.wins_a as f64,
            losses: self.wins_b as f64,
            draws: self.timeouts as f64,
            games: (self.wins_a + self.wins_b + self.timeouts) as f64,
        }
    }

    /// `wins_a / decided`, with timeouts excluded.
    pub fn win_rate(&self) -> Option<f64> {
        self.score().win_rate()
    }
}

/// Play `n_games` between `a` and `b`; `a` is red in even games and blue in
/// odd ones, and the serving team is drawn at every reset.
pub fn estimate_payoff(
    spec: &TaskSpec,
    drone: &DroneParams,
    a: &PolicySpec,
    b: &PolicySpec,
    n_games: usize,
    seed_value: u64,
    par: Parallelism,
) -> Result<PayoffEstimate> {
    if !spec.id.is_competitive() {
        return Err(Error::config(format!("payoffs need a competitive task, not {}", spec.id)));
    }
    if n_games == 0 {
        return Err(Error::config("n_games must be at least 1"));
    }
    a.build(spec)?;
    b.build(spec)?;
    let games: Vec<u64> = (0..n_games as u64).collect();
    let records = par_map(par, games, |g| -> Result<GameRecord> {
        let a_side = if g % 2 == 0 { Team::Red } else { Team::Blue };
        let (red, blue) = if a_side == Team::Red { (a, b) } else { (b, a) };
        let out = play_episode(spec, drone, red, blue, seed_value, g, TraceLevel::Off)?;
        let winner = out.winner();
        Ok(GameRecord {
            game: g,
            master_seed: seed_value,
            a_side,
            winner,
            a_won: winner.map(|w| w == a_side),
            reason: end_label(&out.end),
            steps: out.metrics.steps,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let count = |f: &dyn Fn(&GameRecord) -> bool| records.iter().filter(|r| f(r)).count() as u64;
    Ok(PayoffEstimate {
        a: a.to_string(),
        b: b.to_string(),
        wins_a: count(&|r| r.a_won == Some(true)),
        wins_b: count(&|r| r.a_won == Some(false)),
        timeouts: count(&|r| r.a_won.is_none()),
        records,
    })
}

/// Live matches in a competitive task.
#[derive(Clone, Debug)]
pub struct SimGame {
    pub spec: TaskSpec,
    pub drone: DroneParams,
    pub par: Parallelism,
}

impl SimGame {
    pub fn new(spec: TaskSpec, drone: DroneParams, par: Parallelism) -> Result<Self> {
        if !spec.id.is_competitive() {
            return Err(Error::config(format!("{} is not a competitive task", spec.id)));
        }
        Ok(SimGame { spec, drone, par })
    }
}

impl Game for SimGame {
    type Policy = PolicySpec;

    fn label(&self, p: &PolicySpec) -> String {
        p.to_string()
    }

    fn score(&self, a: &PolicySpec, b: &PolicySpec, games: usize, seed_value: u64) -> Result<Score> {
        Ok(estimate_payoff(&self.spec, &self.drone, a, b, games, seed_value, self.par)?.score())
    }

    /// Each game draws its opponent from the mixture.
    fn score_vs_mixture(&self, a: &PolicySpec, opponents: &[(PolicySpec, f64)], games: usize, seed_value: u64) -> Result<Score> {
        let weights: Vec<f64> = opponents.iter().map(|(_, w)| *w).collect();
        let mut counts = vec![0usize; opponents.len()];
        for g in 0..games as u64 {
            counts[sample_index(&weights, &mut seed::stream(seed_value, g, seed::tag::MATCH))?] += 1;
        }
        let mut total = Score::default();
        for (k, ((b, _), n)) in opponents.iter().zip(counts).enumerate() {
            if n > 0 {
                let s = self.score(a, b, n, seed::derive(seed_value, k as u64, seed::tag::MATCH))?;
                total.add_weighted(&s, 1.0);
            }
        }
        Ok(total)
    }
}

/// Index drawn from a probability vector.
pub fn sample_index(weights: &[f64], rng: &mut impl Rng) -> Result<usize> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || !(total > 0.0) || weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::config("mixture weights must be non-negative with a positive sum"));
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(weights.iter().rposition(|w| *w > 0.0).expect("positive total"))
}

/// Square matrix of row-player scores between named policies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub ids: Vec<String>,
    pub entries: Vec<Vec<f64>>,
    pub games_per_cell: usize,
}

impl PayoffMatrix {
    pub fn new(ids: Vec<String>, entries: Vec<Vec<f64>>, games_per_cell: usize) -> Result<Self> {
        let n = ids.len();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(Error::config("payoff matrix must be square with one id per row"));
        }
        if entries.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::config("payoff entries must lie in [0, 1]"));
        }
        Ok(PayoffMatrix { ids, entries, games_per_cell })
    }

    /// Entries shifted by -0.5 so a fair game has value 0.
    pub fn centered(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|r| r.iter().map(|v| v - 0.5).collect()).collect()
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        write_grid_csv(out, &self.ids, &self.ids, &self.entries)
    }

    pub fn read_csv(input: impl Read, games_per_cell: usize) -> Result<Self> {
        let (rows, cols, entries) = read_grid_csv(input)?;
        if rows != cols {
            return Err(Error::config("payoff matrix row and column ids differ"));
        }
        Self::new(rows, entries, games_per_cell)
    }
}

pub fn write_grid_csv(out: impl Write, rows: &[String], cols: &[String], entries: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Contract(format!("csv: {e}"));
    let mut header = vec![String::new()];
    header.extend(cols.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (id, row) in rows.iter().zip(entries) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub type Grid = (Vec<String>, Vec<String>, Vec<Vec<f64>>);

pub fn read_grid_csv(input: impl Read) -> Result<Grid> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let bad = |m: String| Error::config(format!("payoff csv: {m}"));
    let cols: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().skip(1).map(String::from).collect();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut it = rec.iter();
        rows.push(it.next().unwrap_or_default().to_string());
        let vals = it
            .map(|v| v.trim().parse::<f64>().map_err(|e| bad(format!("`{v}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != cols.len() {
            return Err(bad(format!("row {} has {} values for {} columns", rows.len(), vals.len(), cols.len())));
        }
        entries.push(vals);
    }
    Ok((rows, cols, entries))
}

/// Zero-sum Nash equilibrium of a payoff matrix, centered at 0.5.
pub fn solve_zero_sum_nash(payoff: &PayoffMatrix) -> Result<NashSolution> {
    solve_matrix_game(&payoff.centered())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exploitability {
    /// Score of the best response found against the target.
    pub best_response_score: f64,
    /// Best-response score minus 0.5.
    pub value: f64,
    pub percentage_points: f64,
    pub best_response: String,
}

/// Best-response score against a frozen mixture, minus the fair-game 0.5.
pub fn approx_exploitability<G: Game, O: Oracle<G>>(
    game: &G,
    target: &[(G::Policy, f64)],
    oracle: &mut O,
    seed_value: u64,
) -> Result<Exploitability> {
    let br = oracle.best_response(game, target, None, seed_value)?;
    let value = br.score - 0.5;
    Ok(Exploitability { best_response_score: br.score, value, percentage_points: 100.0 * value, best_response: game.label(&br.policy) })
}

/// Members and meta-strategy of one population.
#[derive(Clone, Debug, PartialEq)]
pub struct Mixture<P> {
    pub label: String,
    pub members: Vec<P>,
    pub weights: Vec<f64>,
}

/// Win-rate grid between populations: each game samples a member from each
/// side's meta-strategy; draws count half.
pub fn crossplay<G: Game>(game: &G, pops: &[Mixture<G::Policy>], games_per_pair: usize, seed_value: u64) -> Result<Vec<Vec<f64>>> {
    if games_per_pair == 0 {
        return Err(Error::config("games_per_pair must be at least 1"));
    }
    let n = pops.len();
    let mut grid = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let pair_seed = seed::derive(seed_value, (i * n + j) as u64, seed::tag::MATCH);
            let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            for g in 0..games_per_pair as u64 {
                let mut rng = seed::stream(pair_seed, g, seed::tag::MATCH);
                let a = sample_index(&pops[i].weights, &mut rng)?;
                let b = sample_index(&pops[j].weights, &mut rng)?;
                *counts.entry((a, b)).or_insert(0) += 1;
            }
            let mut total = Score::default();
            for (k, ((a, b), c)) in counts.into_iter().enumerate() {
                let s = game.score(&pops[i].members[a], &pops[j].members[b], c, seed::derive(pair_seed, k as u64, seed::tag::MATCH))?;
                // Matrix games report one expected game; scale to the sampled count.
                let scale = c as f64 / s.games;
                total.add_weighted(&s, scale);
            }
            grid[i][j] = total.lp();
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let m = PayoffMatrix::new(vec!["a".into(), "b".into()], vec![vec![0.5, 0.25], vec![0.75, 0.5]], 10).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(PayoffMatrix::read_csv(&buf[..], 10).unwrap(), m);
    }

    #[test]
    fn score_conventions() {
        let s = Score { wins: 3.0, losses: 1.0, draws: 2.0, games: 6.0 };
        assert_eq!(s.win_rate(), Some(0.75));
        assert_eq!(s.lp(), 4.0 / 6.0);
        assert_eq!(Score { draws: 2.0, games: 2.0, ..Score::default() }.win_rate(), None);
    }

    #[test]
    fn sample_index_rejects_bad_weights() {
        let mut rng = seed::stream(0, 0, 0);
        assert!(sample_index(&[], &mut rng).is_err());
        assert!(sample_index(&[0.0, 0.0], &mut rng).is_err());
        assert_eq!(sample_index(&[0.0, 1.0], &mut rng).unwrap(), 1);
    }

    #[test]
    fn drills_are_not_payoff_tasks() {
        let spec = TaskSpec::preset(crate::tasks::TaskId::SoloBump);
        let e = estimate_payoff(&spec, &DroneParams::default(), &PolicySpec::Hover, &PolicySpec::Hover, 1, 0, Parallelism::Sequential);
        assert!(e.unwrap_err().is_config());
    }
}
