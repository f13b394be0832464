//! Elo ratings and round-robin tournaments.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{par_map, Parallelism};
use crate::seed;

pub const DEFAULT_K: f64 = 168.0;
pub const DEFAULT_INIT: f64 = 1000.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EloTable {
    pub ids: Vec<String>,
    pub ratings: Vec<f64>,
    pub k: f64,
    pub init: f64,
}

impl EloTable {
    pub fn new(ids: Vec<String>, k: f64, init: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0 && init.is_finite()) {
            return Err(Error::config("Elo K must be positive and the initial rating finite"));
        }
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != ids.len() {
            return Err(Error::config("Elo ids must be unique"));
        }
        let ratings = vec![init; ids.len()];
        Ok(EloTable { ids, ratings, k, init })
    }

    pub fn with_defaults(ids: Vec<String>) -> Result<Self> {
        Self::new(ids, DEFAULT_K, DEFAULT_INIT)
    }

    pub fn index(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn rating(&self, id: &str) -> Option<f64> {
        self.index(id).map(|i| self.ratings[i])
    }

    /// Expected score of `a` against `b`.
    pub fn expected(&self, a: usize, b: usize) -> f64 {
        expected_score(self.ratings[a], self.ratings[b])
    }

    /// Apply one decided game and return the change of `a`'s rating.
    pub fn update(&mut self, a: usize, b: usize, a_wins: bool) -> f64 {
        let e = self.expected(a, b);
        let s = if a_wins { 1.0 } else { 0.0 };
        let delta = self.k * (s - e);
        self.ratings[a] += delta;
        self.ratings[b] -= delta;
        delta
    }

    pub fn total(&self) -> f64 {
        self.ratings.iter().sum()
    }
}

pub fn expected_score(r_a: f64, r_b: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((r_b - r_a) / 400.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub game: u64,
    pub round: u64,
    pub a: String,
    pub b: String,
    pub winner: String,
    pub rating_a: f64,
    pub rating_b: f64,
}

/// One game of a tournament schedule; `a` takes the first seat.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub game: u64,
    pub round: u64,
    pub a: usize,
    pub b: usize,
}

/// Every unordered pair once per round, in a per-round shuffled order with
/// seats alternating by round, so pair counts are exactly equal.
pub fn schedule(n: usize, rounds: u64, seed_value: u64) -> Result<Vec<Fixture>> {
    if n < 2 {
        return Err(Error::config("a tournament needs at least 2 policies"));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::with_capacity(pairs.len() * rounds as usize);
    for round in 0..rounds {
        let mut order = pairs.clone();
        order.shuffle(&mut seed::stream(seed_value, round, seed::tag::TOURNAMENT));
        for (i, j) in order {
            let (a, b) = if round % 2 == 0 { (i, j) } else { (j, i) };
            out.push(Fixture { game: out.len() as u64, round, a, b });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TournamentResult {
    pub table: EloTable,
    pub log: Vec<MatchRecord>,
    /// Games per unordered pair, indexed `[i][j]` with `i < j`.
    pub pair_counts: Vec<Vec<u64>>,
}

/// Play every fixture with `play` (true when the first seat wins), in
/// parallel, then apply the Elo updates in schedule order.
pub fn run_tournament<F>(
    ids: Vec<String>,
    rounds: u64,
    k: f64,
    init: f64,
    seed_value: u64,
    par: Parallelism,
    play: F,
) -> Result<TournamentResult>
where
    F: Fn(&Fixture) -> Result<bool> + Send + Sync,
{
    let mut table = EloTable::new(ids, k, init)?;
    let n = table.ids.len();
    let fixtures = schedule(n, rounds, seed_value)?;
    let results = par_map(par, fixtures.clone(), |f| play(&f)).into_iter().collect::<Result<Vec<bool>>>()?;
    let mut log = Vec::with_capacity(fixtures.len());
    let mut pair_counts = vec![vec![0u64; n]; n];
    for (f, a_wins) in fixtures.iter().zip(results) {
        table.update(f.a, f.b, a_wins);
        let (lo, hi) = (f.a.min(f.b), f.a.max(f.b));
        pair_counts[lo][hi] += 1;
        log.push(MatchRecord {
            game: f.game,
            round: f.round,
            a: table.ids[f.a].clone(),
            b: table.ids[f.b].clone(),
            winner: table.ids[if a_wins { f.a } else { f.b }].clone(),
            rating_a: table.ratings[f.a],
            rating_b: table.ratings[f.b],
        });
    }
    Ok(TournamentResult { table, log, pair_counts })
}

/// Game results sampled from a cross-play win-rate matrix.
pub fn matrix_player(win_rates: &[Vec<f64>], seed_value: u64) -> impl Fn(&Fixture) -> Result<bool> + Send + Sync + '_ {
    move |f: &Fixture| {
        let p = win_rates[f.a][f.b];
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::config(format!("win rate {p} outside [0, 1]")));
        }
        Ok(seed::stream(seed_value, f.game, seed::tag::MATCH).random_bool(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_ratings_move_by_half_k() {
        let mut t = EloTable::with_defaults(vec!["a".into(), "b".into()]).unwrap();
        let d = t.update(0, 1, true);
        assert_eq!(d, 84.0);
        assert_eq!(t.ratings, vec![1084.0, 916.0]);
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert!(EloTable::with_defaults(vec!["a".into(), "a".into()]).unwrap_err().is_config());
    }

    #[test]
    fn schedule_is_balanced() {
        let s = schedule(5, 7, 1).unwrap();
        assert_eq!(s.len(), 10 * 7);
        let mut counts = std::collections::HashMap::new();
        for f in &s {
            *counts.entry((f.a.min(f.b), f.a.max(f.b))).or_insert(0) += 1;
        }
        assert!(counts.values().all(|&c| c == 7));
        assert!(schedule(1, 3, 0).is_err());
    }
}
