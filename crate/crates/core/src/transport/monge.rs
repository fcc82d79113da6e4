//! Exact Monge assignment by exhaustive permutation enumeration.

use super::{CostMatrix, TransportError};

/// Permutations beyond this size are refused (9! = 362,880 candidates).
pub const MONGE_ENUMERATION_BOUND: usize = 9;

/// Finds a bijection `phi` minimizing `sum_i c[i][phi(i)]` by enumerating
/// all permutations in lexicographic order.
///
/// Ties resolve to the lexicographically smallest permutation because the
/// comparison is strict. Only square matrices up to
/// [`MONGE_ENUMERATION_BOUND`] points are accepted.
pub fn monge_bruteforce(c: &CostMatrix) -> Result<(Vec<usize>, f64), TransportError> {
    let n = c.n_rows();
    if n != c.n_cols() {
        return Err(TransportError::NonSquareCost {
            rows: n,
            cols: c.n_cols(),
        });
    }
    if n > MONGE_ENUMERATION_BOUND {
        return Err(TransportError::EnumerationBound {
            n,
            bound: MONGE_ENUMERATION_BOUND,
        });
    }

    let mut best_perm = vec![0usize; n];
    let mut best_cost = f64::INFINITY;
    let mut current = vec![0usize; n];
    let mut used = vec![false; n];
    search(c, 0, 0.0, &mut current, &mut used, &mut best_perm, &mut best_cost);
    Ok((best_perm, best_cost))
}

fn search(
    c: &CostMatrix,
    row: usize,
    cost_so_far: f64,
    current: &mut [usize],
    used: &mut [bool],
    best_perm: &mut [usize],
    best_cost: &mut f64,
) {
    let n = current.len();
    if row == n {
        if cost_so_far < *best_cost {
            *best_cost = cost_so_far;
            best_perm.copy_from_slice(current);
        }
        return;
    }
    // Candidate columns in ascending order keep the enumeration
    // lexicographic, which makes the first minimum the tie-break winner.
    for j in 0..n {
        if used[j] {
            continue;
        }
        used[j] = true;
        current[row] = j;
        search(c, row + 1, cost_so_far + c.get(row, j), current, used, best_perm, best_cost);
        used[j] = false;
    }
}
