use std::collections::BTreeSet;

use super::bitvec::BitVector;
use super::matrix::BitMatrix;
use crate::error::{Error, Result};

/// Largest column count accepted by [`brute_force_solutions`].
pub const BRUTE_FORCE_MAX_COLS: usize = 20;

/// Result of Gaussian elimination on `m * s = rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub consistent: bool,
    /// The solution with every free variable set to zero; present iff consistent.
    pub particular: Option<BitVector>,
    pub rank: usize,
    /// Columns without a pivot, ascending.
    pub free_columns: Vec<usize>,
}

impl SolveOutcome {
    /// `2^(cols - rank)` when consistent, zero otherwise. Saturates at `u128::MAX`.
    pub fn solution_count(&self, cols: usize) -> u128 {
        if !self.consistent {
            return 0;
        }
        let free = cols - self.rank;
        1u128.checked_shl(free as u32).unwrap_or(u128::MAX)
    }
}

/// Solves `m * s = rhs` over GF(2) by Gauss-Jordan elimination.
///
/// Free variables are fixed to zero, so the particular solution is canonical.
pub fn solve_f2(m: &BitMatrix, rhs: &BitVector) -> Result<SolveOutcome> {
    if rhs.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for {} rows",
            rhs.len(),
            m.rows()
        )));
    }
    let cols = m.cols();
    let mut rows: Vec<BitVector> = m.row_vectors().to_vec();
    let mut b: Vec<bool> = rhs.iter().collect();
    let mut pivots: Vec<usize> = Vec::new();

    let mut rank = 0;
    for col in 0..cols {
        if rank == rows.len() {
            break;
        }
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        b.swap(rank, p);
        let pivot_row = rows[rank].clone();
        let pivot_b = b[rank];
        for r in 0..rows.len() {
            if r != rank && rows[r].get(col) {
                rows[r].xor_words(&pivot_row);
                b[r] ^= pivot_b;
            }
        }
        pivots.push(col);
        rank += 1;
    }

    let consistent = b[rank..].iter().all(|&bit| !bit);
    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let free_columns = (0..cols).filter(|&c| !is_pivot[c]).collect();
    let particular = consistent.then(|| {
        let mut s = BitVector::zeros(cols);
        for (i, &c) in pivots.iter().enumerate() {
            if b[i] {
                s.set(c, true);
            }
        }
        s
    });

    Ok(SolveOutcome {
        consistent,
        particular,
        rank,
        free_columns,
    })
}

/// Every `s` with `m * s = rhs`, by exhaustive enumeration of `2^cols` candidates.
pub fn brute_force_solutions(m: &BitMatrix, rhs: &BitVector) -> Result<BTreeSet<BitVector>> {
    let cols = m.cols();
    if cols > BRUTE_FORCE_MAX_COLS {
        return Err(Error::TooLarge(format!(
            "{cols} columns exceeds the enumeration limit of {BRUTE_FORCE_MAX_COLS}"
        )));
    }
    if rhs.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for {} rows",
            rhs.len(),
            m.rows()
        )));
    }
    let mut out = BTreeSet::new();
    for candidate in 0u64..(1 << cols) {
        let s = BitVector::from_u64(cols, candidate);
        let satisfied = m
            .row_vectors()
            .iter()
            .enumerate()
            .all(|(i, row)| row.dot_unchecked(&s) == rhs.get(i));
        if satisfied {
            out.insert(s);
        }
    }
    Ok(out)
}
