//! Bit-packed linear algebra over the two-element field.

mod bitvec;
mod matrix;
mod solve;

pub use bitvec::{inner_product, BitVector, MAX_LEN};
pub use matrix::{in_span, BitMatrix, SpanBasis};
pub use solve::{brute_force_solutions, solve_f2, SolveOutcome, BRUTE_FORCE_MAX_COLS};
