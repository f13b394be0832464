//! Self-play, fictitious self-play and PSRO over a growing population.

use serde::{Deserialize, Serialize};

use super::nash::solve_matrix_game;
use super::{Game, MatrixGame};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse<P> {
    pub policy: P,
    /// Score against the opponent mixture, draws counted half.
    pub score: f64,
    /// Standard error of that score.
    pub std_err: f64,
}

pub trait Oracle<G: Game> {
    /// Best response to `opponents`; `warm_start` seeds the search when set.
    fn best_response(
        &mut self,
        game: &G,
        opponents: &[(G::Policy, f64)],
        warm_start: Option<&G::Policy>,
        seed: u64,
    ) -> Result<BestResponse<G::Policy>>;
}

/// Exact best response of a matrix game by enumeration; ties go to the
/// smallest index.
#[derive(Clone, Copy, Debug, Default)]
pub struct BruteForceOracle;

impl Oracle<MatrixGame> for BruteForceOracle {
    fn best_response(
        &mut self,
        game: &MatrixGame,
        opponents: &[(usize, f64)],
        _warm_start: Option<&usize>,
        seed_value: u64,
    ) -> Result<BestResponse<usize>> {
        let mut best: Option<(usize, f64)> = None;
        for a in 0..game.size() {
            let s = game.score_vs_mixture(&a, opponents, 1, seed_value)?.lp();
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((a, s));
            }
        }
        let (policy, score) = best.ok_or_else(|| Error::Oracle("empty strategy set".into()))?;
        Ok(BestResponse { policy, score, std_err: 0.0 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopMode {
    Sp,
    Fsp,
    PsroUniform,
    PsroNash,
}

impl std::str::FromStr for LoopMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sp" => Ok(LoopMode::Sp),
            "fsp" => Ok(LoopMode::Fsp),
            "psro-uniform" => Ok(LoopMode::PsroUniform),
            "psro-nash" => Ok(LoopMode::PsroNash),
            _ => Err(Error::config(format!("loop mode `{s}` is not one of sp, fsp, psro-uniform, psro-nash"))),
        }
    }
}

/// When an iteration's oracle training stops.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub win_threshold: f64,
    pub std_threshold: f64,
    /// Oracle calls per iteration at most.
    pub max_iters: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub mode: LoopMode,
    /// Members appended after the initial one.
    pub iterations: usize,
    pub games_per_cell: usize,
    pub convergence: Convergence,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Member<P> {
    pub policy: P,
    pub label: String,
    /// 0 for the initial member.
    pub iteration: usize,
    pub oracle_calls: usize,
    pub converged: bool,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PopulationRun<P> {
    pub mode: LoopMode,
    pub members: Vec<Member<P>>,
    /// Row-player scores between members, 0.5 on the diagonal.
    pub payoff: Vec<Vec<f64>>,
    /// Meta-strategy the oracle trained against in each iteration.
    pub metas: Vec<Vec<f64>>,
    /// Meta-strategy over the final population.
    pub meta: Vec<f64>,
    /// Set when an oracle call failed; earlier iterations are kept.
    pub error: Option<String>,
}

impl<P: Clone> PopulationRun<P> {
    pub fn policies(&self) -> Vec<P> {
        self.members.iter().map(|m| m.policy.clone()).collect()
    }
}

/// Meta-strategy of `mode` over the current population.
pub fn meta_strategy(mode: LoopMode, payoff: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = payoff.len();
    Ok(match mode {
        LoopMode::Sp => {
            let mut m = vec![0.0; n];
            m[n - 1] = 1.0;
            m
        }
        LoopMode::Fsp | LoopMode::PsroUniform => vec![1.0 / n as f64; n],
        LoopMode::PsroNash => {
            let centered: Vec<Vec<f64>> = payoff.iter().map(|r| r.iter().map(|v| v - 0.5).collect()).collect();
            solve_matrix_game(&centered)?.row
        }
    })
}

/// Grow a population from `initial` for `config.iterations` iterations.
pub fn population_loop<G: Game, O: Oracle<G>>(
    game: &G,
    oracle: &mut O,
    initial: G::Policy,
    config: &LoopConfig,
) -> Result<PopulationRun<G::Policy>> {
    let conv = config.convergence;
    if conv.max_iters == 0 || config.games_per_cell == 0 {
        return Err(Error::config("max_iters and games_per_cell must be at least 1"));
    }
    let mut run = PopulationRun {
        mode: config.mode,
        members: vec![Member {
            label: game.label(&initial),
            policy: initial,
            iteration: 0,
            oracle_calls: 0,
            converged: false,
            score: 0.5,
        }],
        payoff: vec![vec![0.5]],
        metas: Vec::new(),
        meta: vec![1.0],
        error: None,
    };
    for it in 1..=config.iterations {
        let meta = meta_strategy(config.mode, &run.payoff)?;
        let opponents: Vec<(G::Policy, f64)> = run
            .members
            .iter()
            .zip(&meta)
            .filter(|(_, w)| **w > 0.0)
            .map(|(m, w)| (m.policy.clone(), *w))
            .collect();
        let warm = matches!(config.mode, LoopMode::Sp | LoopMode::Fsp);
        let mut start = warm.then(|| run.members.last().expect("non-empty").policy.clone());
        let mut found: Option<BestResponse<G::Policy>> = None;
        let mut calls = 0;
        let mut converged = false;
        while calls < conv.max_iters {
            let call_seed = seed::derive(config.seed, (it * 1_000 + calls) as u64, seed::tag::ORACLE);
            let br = match oracle.best_response(game, &opponents, start.as_ref(), call_seed) {
                Ok(br) => br,
                Err(e) => {
                    run.error = Some(format!("iteration {it}: {e}"));
                    run.meta = meta_strategy(config.mode, &run.payoff)?;
                    return Ok(run);
                }
            };
            calls += 1;
            converged = br.score > conv.win_threshold && br.std_err < conv.std_threshold;
            start = Some(br.policy.clone());
            found = Some(br);
            if converged {
                break;
            }
        }
        let br = found.expect("at least one oracle call");
        run.metas.push(meta);

        let n = run.members.len();
        let mut row = Vec::with_capacity(n + 1);
        for (k, m) in run.members.iter().enumerate() {
            let cell_seed = seed::derive(config.seed, (it * 1_000 + k) as u64, seed::tag::MATCH);
            row.push(game.score(&br.policy, &m.policy, config.games_per_cell, cell_seed)?.lp());
        }
        for (k, r) in run.payoff.iter_mut().enumerate() {
            r.push(1.0 - row[k]);
        }
        row.push(0.5);
        run.payoff.push(row);
        run.members.push(Member {
            label: game.label(&br.policy),
            policy: br.policy,
            iteration: it,
            oracle_calls: calls,
            converged,
            score: br.score,
        });
    }
    run.meta = meta_strategy(config.mode, &run.payoff)?;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(mode: LoopMode, iterations: usize) -> LoopConfig {
        LoopConfig {
            mode,
            iterations,
            games_per_cell: 1,
            convergence: Convergence { win_threshold: 0.0, std_threshold: 1.0, max_iters: 1 },
            seed: 0,
        }
    }

    #[test]
    fn sp_on_rps_cycles() {
        let g = MatrixGame::rock_paper_scissors();
        let run = population_loop(&g, &mut BruteForceOracle, 0, &cfg(LoopMode::Sp, 4)).unwrap();
        assert_eq!(run.policies(), vec![0, 1, 2, 0, 1]);
        assert_eq!(run.meta, vec![0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn payoff_stays_antisymmetric() {
        let g = MatrixGame::rock_paper_scissors();
        let run = population_loop(&g, &mut BruteForceOracle, 0, &cfg(LoopMode::PsroNash, 3)).unwrap();
        let p = &run.payoff;
        for i in 0..p.len() {
            for j in 0..p.len() {
                assert_eq!(p[i][j] + p[j][i], 1.0);
            }
        }
    }

    struct Failing;
    impl Oracle<MatrixGame> for Failing {
        fn best_response(&mut self, _: &MatrixGame, _: &[(usize, f64)], _: Option<&usize>, _: u64) -> Result<BestResponse<usize>> {
            Err(Error::Oracle("boom".into()))
        }
    }

    #[test]
    fn oracle_failure_keeps_history() {
        let g = MatrixGame::rock_paper_scissors();
        let run = population_loop(&g, &mut Failing, 2, &cfg(LoopMode::PsroUniform, 3)).unwrap();
        assert_eq!(run.members.len(), 1);
        assert!(run.error.unwrap().contains("boom"));
    }
}
