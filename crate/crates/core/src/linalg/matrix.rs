use rand::Rng;

use super::bitvec::BitVector;
use crate::error::{Error, Result};

/// Dense row-major matrix over GF(2).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    /// Builds a matrix from rows that must all have length `cols`.
    pub fn new(cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} in a matrix with {cols} columns",
                bad.len()
            )));
        }
        Ok(Self { cols, rows })
    }

    pub fn from_rows(rows: Vec<BitVector>) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVector::len);
        Self::new(cols, rows)
    }

    /// Test convenience: rows as `0`/`1` strings.
    pub fn from_bit_strs(rows: &[&str]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| BitVector::from_bit_str(r))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cols: n,
            rows: (0..n).map(|i| BitVector::basis(n, i)).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            cols,
            rows: (0..rows).map(|_| BitVector::random(cols, rng)).collect(),
        }
    }

    /// Uniformly random invertible `n x n` matrix, by rejection.
    pub fn random_invertible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let m = Self::random(n, n, rng);
            if m.rank() == n {
                return m;
            }
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn row_vectors(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn push_row(&mut self, row: BitVector) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::LengthMismatch {
                left: self.cols,
                right: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Matrix-vector product `self * s`, one inner product per row.
    pub fn mul_vec(&self, s: &BitVector) -> Result<BitVector> {
        if s.len() != self.cols {
            return Err(Error::LengthMismatch {
                left: self.cols,
                right: s.len(),
            });
        }
        Ok(BitVector::from_bits(
            self.rows.iter().map(|r| r.dot_unchecked(s)),
        ))
    }

    /// Row-vector product `y^T * self`: the sum of the rows selected by `y`.
    pub fn left_mul(&self, y: &BitVector) -> Result<BitVector> {
        if y.len() != self.rows() {
            return Err(Error::LengthMismatch {
                left: self.rows(),
                right: y.len(),
            });
        }
        let mut out = BitVector::zeros(self.cols);
        for i in y.iter_ones() {
            out.xor_words(&self.rows[i]);
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        let mut span = SpanBasis::new(self.cols);
        for r in &self.rows {
            span.insert(r);
        }
        span.rank()
    }

    /// Inverse of a square matrix by Gauss-Jordan elimination on `[A | I]`.
    pub fn inverse(&self) -> Option<BitMatrix> {
        let n = self.rows();
        if n != self.cols {
            return None;
        }
        let mut a = self.rows.clone();
        let mut inv: Vec<BitVector> = (0..n).map(|i| BitVector::basis(n, i)).collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r].get(col))?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && a[r].get(col) {
                    let (pa, pi) = (a[col].clone(), inv[col].clone());
                    a[r].xor_words(&pa);
                    inv[r].xor_words(&pi);
                }
            }
        }
        Some(BitMatrix { cols: n, rows: inv })
    }
}

/// An echelon basis of a subspace of `F_2^dim`, with one reduced vector per
/// distinct leading bit. Supports incremental insertion and membership.
#[derive(Clone, Debug)]
pub struct SpanBasis {
    dim: usize,
    // pivots[b] holds the basis vector whose lowest set bit is b
    pivots: Vec<Option<BitVector>>,
    rank: usize,
}

impl SpanBasis {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            pivots: vec![None; dim],
            rank: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn reduce(&self, v: &BitVector) -> BitVector {
        let mut v = v.clone();
        while let Some(lead) = v.first_one() {
            match &self.pivots[lead] {
                Some(p) => v.xor_words(p),
                None => break,
            }
        }
        v
    }

    /// Adds `v` to the spanning set; returns whether the rank grew.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.dim, "vector length does not match span dimension");
        if self.rank == self.dim {
            return false;
        }
        let r = self.reduce(v);
        match r.first_one() {
            Some(lead) => {
                self.pivots[lead] = Some(r);
                self.rank += 1;
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.dim, "vector length does not match span dimension");
        self.rank == self.dim || self.reduce(v).is_zero()
    }
}

/// Whether `y` lies in the row span of `basis_rows`.
pub fn in_span(basis_rows: &BitMatrix, y: &BitVector) -> Result<bool> {
    if y.len() != basis_rows.cols() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} against {} columns",
            y.len(),
            basis_rows.cols()
        )));
    }
    let mut span = SpanBasis::new(basis_rows.cols());
    for r in basis_rows.row_vectors() {
        span.insert(r);
    }
    Ok(span.contains(y))
}
