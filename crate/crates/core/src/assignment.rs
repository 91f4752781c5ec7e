//! Exact square linear assignment.
//!
//! Shortest augmenting path in the Jonker–Volgenant style: rows are inserted
//! one at a time in ascending order, each by a Dijkstra-like search over
//! reduced costs. Maximization is handled by negating the matrix.

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignmentResult {
    /// `permutation[i]` is the column assigned to row `i`.
    pub permutation: Vec<usize>,
    /// `Σ_i m[i, permutation[i]]`, summed in row order.
    pub objective: f64,
}

impl AssignmentResult {
    pub fn as_matrix(&self) -> Array2<f64> {
        permutation_matrix(&self.permutation)
    }
}

/// Dense 0/1 matrix with a one at `(i, perm[i])`.
pub fn permutation_matrix(perm: &[usize]) -> Array2<f64> {
    let k = perm.len();
    let mut m = Array2::zeros((k, k));
    for (i, &j) in perm.iter().enumerate() {
        m[[i, j]] = 1.0;
    }
    m
}

/// Permutation maximizing `Σ_i m[i, σ(i)]`.
///
/// Columns are scanned in ascending order and the first strictly better
/// candidate wins (an unassigned column wins a tie), so equal inputs always
/// give equal outputs.
pub fn max_assignment(m: ArrayView2<'_, f64>) -> Result<AssignmentResult> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::Dimension(format!("assignment needs a square matrix, got {rows}x{cols}")));
    }
    if rows == 0 {
        return Err(Error::Dimension("assignment needs k >= 1".into()));
    }
    for ((r, c), x) in m.indexed_iter() {
        if !x.is_finite() {
            return Err(Error::NonFinite { row: r, col: c });
        }
    }
    let cost: Vec<f64> = m.iter().map(|x| -x).collect();
    let permutation = min_cost_square(&cost, rows);
    let objective = permutation.iter().enumerate().map(|(i, &j)| m[[i, j]]).sum();
    Ok(AssignmentResult { permutation, objective })
}

/// Minimum-cost assignment on a row-major `n × n` finite cost matrix.
fn min_cost_square(cost: &[f64], n: usize) -> Vec<usize> {
    const NONE: usize = usize::MAX;
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut col4row = vec![NONE; n];
    let mut row4col = vec![NONE; n];
    let mut shortest = vec![f64::INFINITY; n];
    let mut path = vec![NONE; n];
    let mut row_seen = vec![false; n];
    let mut col_seen = vec![false; n];
    let mut remaining: Vec<usize> = Vec::with_capacity(n);

    for cur_row in 0..n {
        shortest.fill(f64::INFINITY);
        path.fill(NONE);
        row_seen.fill(false);
        col_seen.fill(false);
        remaining.clear();
        remaining.extend(0..n);

        let mut min_val = 0.0;
        let mut i = cur_row;
        let sink = loop {
            row_seen[i] = true;
            let row = &cost[i * n..(i + 1) * n];
            let mut lowest = f64::INFINITY;
            let mut best = NONE;
            for (pos, &j) in remaining.iter().enumerate() {
                let reduced = min_val + row[j] - u[i] - v[j];
                if reduced < shortest[j] {
                    path[j] = i;
                    shortest[j] = reduced;
                }
                if shortest[j] < lowest
                    || (shortest[j] == lowest && row4col[j] == NONE && best != NONE && row4col[remaining[best]] != NONE)
                {
                    lowest = shortest[j];
                    best = pos;
                }
            }
            // finite costs on a square matrix always leave a reachable column
            min_val = lowest;
            let j = remaining.remove(best);
            col_seen[j] = true;
            if row4col[j] == NONE {
                break j;
            }
            i = row4col[j];
        };

        u[cur_row] += min_val;
        for r in 0..n {
            if row_seen[r] && r != cur_row {
                u[r] += min_val - shortest[col4row[r]];
            }
        }
        for c in 0..n {
            if col_seen[c] {
                v[c] -= min_val - shortest[c];
            }
        }

        let mut j = sink;
        loop {
            let r = path[j];
            row4col[j] = r;
            std::mem::swap(&mut col4row[r], &mut j);
            if r == cur_row {
                break;
            }
        }
    }
    col4row
}
