//! Packed vectors over GF(2).

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// Largest supported vector length.
pub const MAX_LEN: usize = 1 << 20;

/// A vector in `F_2^len`, packed 64 bits per word with bit `i` stored at
/// `words[i / 64] >> (i % 64)`. Padding bits past `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

impl BitVector {
    /// The zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_LEN, "bit vector length {len} exceeds {MAX_LEN}");
        Self {
            len,
            words: vec![0; word_count(len)],
        }
    }

    /// The standard basis vector with a single one at `index`.
    pub fn basis(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            len,
            words: vec![u64::MAX; word_count(len)],
        };
        v.clear_padding();
        v
    }

    /// Builds a vector from the low `len` bits of `value` (bit 0 = index 0).
    pub fn from_u64(len: usize, value: u64) -> Self {
        let mut v = Self::zeros(len);
        if let Some(w) = v.words.first_mut() {
            *w = value;
        }
        v.clear_padding();
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters, index 0 first.
    ///
    /// This is a test convenience; the canonical textual form is the hex
    /// encoding produced by `Display`.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::parse(1, format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bits)
    }

    /// Uniformly random vector.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in &mut v.words {
            *w = rng.random();
        }
        v.clear_padding();
        v
    }

    /// Uniformly random nonzero vector; `len` must be at least one.
    pub fn random_nonzero<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        assert!(len > 0, "no nonzero vector of length 0");
        loop {
            let v = Self::random(len, rng);
            if !v.is_zero() {
                return v;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        (self.words[index / WORD_BITS] >> (index % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, index: usize, value: bool) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        let mask = 1u64 << (index % WORD_BITS);
        if value {
            self.words[index / WORD_BITS] |= mask;
        } else {
            self.words[index / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, index: usize) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        self.words[index / WORD_BITS] ^= 1u64 << (index % WORD_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD_BITS + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * WORD_BITS + tz)
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// The vector read as an unsigned integer; only valid for `len <= 64`.
    pub fn to_u64(&self) -> Option<u64> {
        match self.words.as_slice() {
            [] => Some(0),
            [w] => Some(*w),
            _ => None,
        }
    }

    /// In-place addition over GF(2).
    pub fn xor_assign(&mut self, other: &BitVector) -> Result<()> {
        self.check_len(other)?;
        self.xor_words(other);
        Ok(())
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    /// Inner product over GF(2): the parity of `self AND other`.
    pub fn dot(&self, other: &BitVector) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.dot_unchecked(other))
    }

    #[inline]
    pub(crate) fn dot_unchecked(&self, other: &BitVector) -> bool {
        let parity = self
            .words
            .iter()
            .zip(&other.words)
            .fold(0u64, |acc, (a, b)| acc ^ (a & b));
        parity.count_ones() & 1 == 1
    }

    #[inline]
    pub(crate) fn xor_words(&mut self, other: &BitVector) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    fn check_len(&self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    fn clear_padding(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Lowercase hex of the bit pattern, most-significant nibble first.
    pub fn to_hex(&self) -> String {
        let nibbles = self.len.div_ceil(4);
        let mut out = String::with_capacity(nibbles);
        for k in (0..nibbles).rev() {
            let bit = k * 4;
            let word = self.words[bit / WORD_BITS];
            let nibble = (word >> (bit % WORD_BITS)) & 0xf;
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    /// Parses the hex body for a vector of known length; the digit count must
    /// be exactly `ceil(len / 4)` and padding bits must be zero.
    pub fn from_hex(len: usize, hex: &str) -> Result<Self> {
        if len == 0 || len > MAX_LEN {
            return Err(Error::parse(1, format!("bit length {len} out of range")));
        }
        let nibbles = len.div_ceil(4);
        if hex.len() != nibbles {
            return Err(Error::parse(
                1,
                format!("expected {nibbles} hex digits for {len} bits, got {}", hex.len()),
            ));
        }
        let mut v = Self::zeros(len);
        for (k, c) in hex.chars().rev().enumerate() {
            let nibble = c
                .to_digit(16)
                .filter(|_| !c.is_ascii_uppercase())
                .ok_or_else(|| Error::parse(1, format!("invalid hex digit {c:?}")))?
                as u64;
            let bit = k * 4;
            v.words[bit / WORD_BITS] |= nibble << (bit % WORD_BITS);
        }
        let before = v.words.clone();
        v.clear_padding();
        if before != v.words {
            return Err(Error::parse(1, "nonzero padding bits in hex body"));
        }
        Ok(v)
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.len, self.to_hex())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (len, hex) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(1, format!("missing ':' in bit vector {s:?}")))?;
        let len: usize = len
            .parse()
            .map_err(|_| Error::parse(1, format!("invalid bit length {len:?}")))?;
        Self::from_hex(len, hex)
    }
}

/// Inner product over GF(2).
pub fn inner_product(a: &BitVector, b: &BitVector) -> Result<bool> {
    a.dot(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(s: &str) -> BitVector {
        BitVector::from_bit_str(s).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        assert!(!inner_product(&bv("101"), &bv("111")).unwrap());
        assert!(!inner_product(&bv("0000"), &bv("1011")).unwrap());
        assert!(inner_product(&bv("110"), &bv("011")).unwrap());
    }

    #[test]
    fn inner_product_length_mismatch() {
        let err = inner_product(&bv("10"), &bv("101")).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn self_addition_is_zero() {
        let v = bv("1101001");
        assert!(v.xor(&v).unwrap().is_zero());
    }

    #[test]
    fn hex_textual_form() {
        // bits listed most significant first: 11010
        let v = BitVector::from_u64(5, 0b11010);
        assert_eq!(v.to_string(), "5:1a");
        assert_eq!("5:1a".parse::<BitVector>().unwrap(), v);
        assert_eq!(BitVector::from_u64(8, 3).to_string(), "8:03");
        assert_eq!(BitVector::zeros(1).to_string(), "1:0");
    }

    #[test]
    fn hex_rejects_noncanonical() {
        assert!("5:3a".parse::<BitVector>().is_err()); // bit 5 set
        assert!("5:a".parse::<BitVector>().is_err()); // too few digits
        assert!("5:1A".parse::<BitVector>().is_err());
        assert!("0:".parse::<BitVector>().is_err());
        assert!("x:1".parse::<BitVector>().is_err());
    }

    #[test]
    fn padding_stays_clear() {
        let v = BitVector::ones(70);
        assert_eq!(v.count_ones(), 70);
        assert_eq!(v.words()[1], (1 << 6) - 1);
        assert_eq!(BitVector::from_u64(3, u64::MAX).to_u64(), Some(7));
    }

    #[test]
    fn iter_ones_matches_get() {
        let v = BitVector::from_bits((0..150).map(|i| i % 7 == 3));
        let ones: Vec<usize> = v.iter_ones().collect();
        let expected: Vec<usize> = (0..150).filter(|i| i % 7 == 3).collect();
        assert_eq!(ones, expected);
        assert_eq!(v.first_one(), Some(3));
    }

    fn arb_vec(len: usize) -> impl Strategy<Value = BitVector> {
        proptest::collection::vec(any::<bool>(), len).prop_map(BitVector::from_bits)
    }

    proptest! {
        #[test]
        fn inner_product_is_bilinear(
            (a, b, c) in (1usize..200).prop_flat_map(|n| (arb_vec(n), arb_vec(n), arb_vec(n)))
        ) {
            let lhs = inner_product(&a.xor(&b).unwrap(), &c).unwrap();
            let rhs = inner_product(&a, &c).unwrap() ^ inner_product(&b, &c).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn hex_round_trip(v in (1usize..300).prop_flat_map(arb_vec)) {
            let text = v.to_string();
            prop_assert_eq!(text.parse::<BitVector>().unwrap(), v);
        }
    }
}
