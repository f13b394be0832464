//! Exact Nash equilibria of two-player zero-sum matrix games.
//!
//! The column player's problem `max 1ᵀy s.t. B y <= 1, y >= 0` on the shifted
//! matrix `B = A + c` (all entries >= 1) is solved with a dense tableau
//! simplex using Bland's rule; the row strategy is read off the reduced costs
//! of the slack columns. Bland's rule makes the pivot sequence, and therefore
//! the equilibrium returned for degenerate games, a deterministic function of
//! the matrix: entering and leaving variables are always the smallest
//! eligible indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NashSolution {
    /// Row player's mixed strategy (the maximizer).
    pub row: Vec<f64>,
    /// Column player's mixed strategy (the minimizer).
    pub col: Vec<f64>,
    /// Game value to the row player.
    pub value: f64,
}

/// Solve `max_x min_y xᵀ A y` for a dense `rows x cols` matrix.
pub fn solve_matrix_game(a: &[Vec<f64>]) -> Result<NashSolution> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    if m == 0 || n == 0 || a.iter().any(|r| r.len() != n) {
        return Err(Error::config("payoff matrix must be non-empty and rectangular"));
    }
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::config("payoff matrix has non-finite entries"));
    }
    let lo = a.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - lo;

    // Tableau rows 0..m are constraints, row m is the objective.
    // Columns 0..n are y, n..n+m slacks, last is the right-hand side.
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        for j in 0..n {
            t[i][j] = a[i][j] + shift;
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = 1.0;
    }
    for j in 0..n {
        t[m][j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_pivots = 50 * (n + m) * (n + m) + 100;
    for _ in 0..max_pivots {
        let Some(enter) = (0..n + m).find(|&j| t[m][j] < -PIVOT_EPS) else {
            return Ok(extract(&t, &basis, m, n, shift));
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][enter] > PIVOT_EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - PIVOT_EPS || ((ratio - best).abs() <= PIVOT_EPS && basis[i] < basis[r]) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Contract("simplex found an unbounded ray on a bounded game".into()));
        };
        pivot(&mut t, row, enter);
        basis[row] = enter;
    }
    Err(Error::Contract("simplex did not terminate".into()))
}

fn pivot(t: &mut [Vec<f64>], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = r[col];
        if f != 0.0 {
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
}

fn extract(t: &[Vec<f64>], basis: &[usize], m: usize, n: usize, shift: f64) -> NashSolution {
    let width = n + m + 1;
    let mut y = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = t[i][width - 1].max(0.0);
        }
    }
    let x: Vec<f64> = (0..m).map(|i| t[m][n + i].max(0.0)).collect();
    let normalize = |v: Vec<f64>| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|p| p / s).collect::<Vec<_>>()
    };
    let total = t[m][width - 1];
    NashSolution { row: normalize(x), col: normalize(y), value: 1.0 / total - shift }
}

/// Expected payoff of `row` against `col` under `a`.
pub fn expected_payoff(a: &[Vec<f64>], row: &[f64], col: &[f64]) -> f64 {
    a.iter().zip(row).map(|(r, x)| x * r.iter().zip(col).map(|(v, y)| v * y).sum::<f64>()).sum()
}

/// Best pure-deviation value of each player: `(max_i (A y)_i, min_j (xᵀ A)_j)`.
pub fn deviation_values(a: &[Vec<f64>], row: &[f64], col: &[f64]) -> (f64, f64) {
    let best_row = a.iter().map(|r| r.iter().zip(col).map(|(v, y)| v * y).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max);
    let n = col.len();
    let best_col = (0..n)
        .map(|j| a.iter().zip(row).map(|(r, x)| x * r[j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (best_row, best_col)
}

/// Duality gap of a strategy pair; zero exactly at an equilibrium.
pub fn duality_gap(a: &[Vec<f64>], row: &[f64], col: &[f64]) -> f64 {
    let (hi, lo) = deviation_values(a, row, col);
    hi - lo
}
