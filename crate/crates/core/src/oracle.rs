//! Cross-entropy best-response search over bounded parameter vectors.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metagame::{BestResponse, Game, Oracle, SimGame};
use crate::par::{par_map, Parallelism};
use crate::policies::{DrillFamily, ParamSpec, PolicyParams, PolicySpec};
use crate::seed;
use crate::tasks::TaskId;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub generations: usize,
    pub population_size: usize,
    pub elite_fraction: f64,
    pub games_per_candidate: usize,
    pub seed: u64,
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::config("population_size must be at least 2"));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return Err(Error::config("elite_fraction must lie in (0, 1]"));
        }
        if self.generations == 0 || self.games_per_candidate == 0 {
            return Err(Error::config("generations and games_per_candidate must be at least 1"));
        }
        Ok(())
    }

    pub fn elites(&self) -> usize {
        ((self.elite_fraction * self.population_size as f64).ceil() as usize).clamp(1, self.population_size)
    }
}

/// Objective value of one candidate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub std_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub best_so_far: f64,
    pub std: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub params: Vec<f64>,
    pub value: f64,
    pub std_err: f64,
    pub history: Vec<GenerationStats>,
}

/// Smallest standard deviation, as a fraction of each bound range.
const STD_FLOOR: f64 = 1e-9;

/// Maximize `objective` over the box of `schema`.
///
/// Candidates are drawn from a diagonal Gaussian (initially centered on
/// `start` or the box midpoint, with a quarter of each range as standard
/// deviation) and clipped to the bounds. The top `elite_fraction` of each
/// generation, ranked by value with ties to the lower candidate index,
/// refits the mean; each standard deviation becomes the smaller of its
/// current value and the elite spread, so it never grows. Every candidate
/// of a generation is evaluated with the same seed.
pub fn best_response_search<F>(
    schema: &[ParamSpec],
    start: Option<&[f64]>,
    budget: &SearchBudget,
    par: Parallelism,
    objective: F,
) -> Result<SearchResult>
where
    F: Fn(&[f64], u64) -> Result<Evaluation> + Send + Sync,
{
    budget.validate()?;
    if schema.is_empty() || schema.iter().any(|s| !(s.lo.is_finite() && s.hi.is_finite() && s.lo <= s.hi)) {
        return Err(Error::config("search schema needs finite bounds"));
    }
    let dims = schema.len();
    let clip = |v: f64, s: &ParamSpec| v.clamp(s.lo, s.hi);
    let mut mean: Vec<f64> = match start {
        Some(x) if x.len() == dims => x.iter().zip(schema).map(|(v, s)| clip(*v, s)).collect(),
        Some(x) => return Err(Error::config(format!("start point has {} values for {dims} parameters", x.len()))),
        None => schema.iter().map(|s| 0.5 * (s.lo + s.hi)).collect(),
    };
    let mut std: Vec<f64> = schema.iter().map(|s| 0.25 * (s.hi - s.lo)).collect();
    let floor: Vec<f64> = schema.iter().map(|s| STD_FLOOR * (s.hi - s.lo)).collect();
    let n = budget.population_size;
    let mut best: Option<(Vec<f64>, Evaluation)> = None;
    let mut history = Vec::with_capacity(budget.generations);

    for g in 0..budget.generations {
        let candidates: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let mut rng = seed::stream(budget.seed, (g * n + k) as u64, seed::tag::ORACLE);
                (0..dims)
                    .map(|d| {
                        let v = if std[d] > 0.0 {
                            Normal::new(mean[d], std[d]).expect("positive std").sample(&mut rng)
                        } else {
                            mean[d]
                        };
                        clip(v, &schema[d])
                    })
                    .collect()
            })
            .collect();
        let eval_seed = seed::derive(budget.seed, g as u64, seed::tag::MATCH);
        let scores = par_map(par, candidates.clone(), |c| objective(&c, eval_seed))
            .into_iter()
            .collect::<Result<Vec<Evaluation>>>()?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| scores[b].value.total_cmp(&scores[a].value).then(a.cmp(&b)));
        let top = order[0];
        if best.as_ref().is_none_or(|(_, e)| scores[top].value > e.value) {
            best = Some((candidates[top].clone(), scores[top]));
        }
        let elites = &order[..budget.elites()];
        for d in 0..dims {
            let m = elites.iter().map(|&i| candidates[i][d]).sum::<f64>() / elites.len() as f64;
            let var = elites.iter().map(|&i| (candidates[i][d] - m).powi(2)).sum::<f64>() / elites.len() as f64;
            mean[d] = m;
            std[d] = std[d].min(var.sqrt()).max(floor[d]);
        }
        history.push(GenerationStats {
            generation: g,
            best: scores[top].value,
            mean: scores.iter().map(|s| s.value).sum::<f64>() / n as f64,
            best_so_far: best.as_ref().expect("set above").1.value,
            std: std.clone(),
        });
    }
    let (params, eval) = best.expect("at least one generation");
    Ok(SearchResult { params, value: eval.value, std_err: eval.std_err, history })
}

/// Best responses in the 1 vs 1 task by searching duel parameters.
#[derive(Clone, Debug)]
pub struct CemOracle {
    pub budget: SearchBudget,
    pub par: Parallelism,
    /// Every search run so far, oldest first.
    pub log: Vec<SearchResult>,
}

impl CemOracle {
    pub fn new(budget: SearchBudget, par: Parallelism) -> Result<Self> {
        budget.validate()?;
        Ok(CemOracle { budget, par, log: Vec::new() })
    }
}

impl Oracle<SimGame> for CemOracle {
    fn best_response(
        &mut self,
        game: &SimGame,
        opponents: &[(PolicySpec, f64)],
        warm_start: Option<&PolicySpec>,
        seed_value: u64,
    ) -> Result<BestResponse<PolicySpec>> {
        if game.spec.id != TaskId::OneVsOne {
            return Err(Error::config(format!("the search oracle tunes duel parameters and needs one_vs_one, not {}", game.spec.id)));
        }
        let schema = DrillFamily::Duel.schema();
        let start = match warm_start {
            Some(PolicySpec::Duel { params }) => Some(params.clone()),
            _ => None,
        };
        // Candidates run in parallel; games inside one candidate do not.
        let inner = SimGame { par: Parallelism::Sequential, ..game.clone() };
        let budget = SearchBudget { seed: seed::derive(self.budget.seed, seed_value, seed::tag::ORACLE), ..self.budget };
        let result = best_response_search(&schema, start.as_deref(), &budget, self.par, |x, s| {
            let me = PolicySpec::duel(&PolicyParams::clamped(DrillFamily::Duel, x));
            let score = inner.score_vs_mixture(&me, opponents, budget.games_per_candidate, s)?;
            Ok(Evaluation { value: score.win_rate().unwrap_or(0.0), std_err: score.std_err() })
        })
        .map_err(|e| match e {
            Error::Config(m) => Error::Config(m),
            other => Error::Oracle(other.to_string()),
        })?;
        let policy = PolicySpec::duel(&PolicyParams::clamped(DrillFamily::Duel, &result.params));
        let br = BestResponse { policy, score: result.value, std_err: result.std_err };
        self.log.push(result);
        Ok(br)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(lo: f64, hi: f64) -> ParamSpec {
        ParamSpec { name: "x", lo, hi, default: lo }
    }

    fn budget(generations: usize, elite_fraction: f64) -> SearchBudget {
        SearchBudget { generations, population_size: 16, elite_fraction, games_per_candidate: 1, seed: 3 }
    }

    #[test]
    fn full_elite_never_widens() {
        let r = best_response_search(&[spec(-5.0, 5.0)], None, &budget(10, 1.0), Parallelism::Sequential, |x, _| {
            Ok(Evaluation { value: -x[0].abs(), std_err: 0.0 })
        })
        .unwrap();
        for w in r.history.windows(2) {
            assert!(w[1].std[0] <= w[0].std[0]);
            assert!(w[1].best_so_far >= w[0].best_so_far);
        }
    }

    #[test]
    fn budget_validation() {
        assert!(SearchBudget { population_size: 1, ..budget(1, 0.5) }.validate().is_err());
        assert!(SearchBudget { elite_fraction: 0.0, ..budget(1, 0.5) }.validate().is_err());
        assert_eq!(budget(1, 0.2).elites(), 4);
    }
}
