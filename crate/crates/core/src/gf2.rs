//! Packed binary words and the GF(2) linear algebra used by every code.
//!
//! A [`BitVector`] holds up to 64 bits in one machine word. Bit `i` of the
//! vector lives at machine bit `i`. Whenever an ordering on vectors matters
//! (tie-breaking, lexicographically smallest solutions) bit 0 is the most
//! significant position; [`BitVector::lex_key`] maps a vector to an integer
//! whose natural order is that lexicographic order.

use std::fmt;
use std::ops::{BitAnd, BitXor, BitXorAssign};

use crate::error::{Error, Result};

pub const MAX_LEN: usize = 64;

#[inline]
pub(crate) fn low_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// Lexicographic sort key of a raw word (bit 0 most significant).
#[inline]
pub fn lex_key(bits: u64) -> u64 {
    bits.reverse_bits()
}

/// Fixed-length binary word, `len <= 64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: u8,
    bits: u64,
}

impl BitVector {
    pub fn new(len: usize, bits: u64) -> Result<Self> {
        if len > MAX_LEN {
            return Err(Error::InvalidLength(len));
        }
        if bits & !low_mask(len) != 0 {
            return Err(Error::StrayBits(len));
        }
        Ok(Self {
            len: len as u8,
            bits,
        })
    }

    /// Builds a vector, silently dropping bits at or above `len`.
    ///
    /// Panics if `len > 64`.
    #[inline]
    pub fn from_word(len: usize, bits: u64) -> Self {
        assert!(len <= MAX_LEN, "bit vector length {len} exceeds 64");
        Self {
            len: len as u8,
            bits: bits & low_mask(len),
        }
    }

    #[inline]
    pub fn zeros(len: usize) -> Self {
        Self::from_word(len, 0)
    }

    #[inline]
    pub fn ones(len: usize) -> Self {
        Self::from_word(len, u64::MAX)
    }

    pub fn unit(len: usize, i: usize) -> Self {
        assert!(i < len, "unit index {i} out of range for length {len}");
        Self::from_word(len, 1 << i)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.bits >> i) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len(), "bit index {i} out of range");
        if value {
            self.bits |= 1 << i;
        } else {
            self.bits &= !(1 << i);
        }
    }

    #[inline]
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn lex_key(&self) -> u64 {
        lex_key(self.bits)
    }

    #[inline]
    pub fn distance(&self, other: &BitVector) -> u32 {
        debug_assert_eq!(self.len, other.len);
        (self.bits ^ other.bits).count_ones()
    }

    /// Parity of the AND of two words.
    #[inline]
    pub fn dot(&self, other: &BitVector) -> bool {
        (self.bits & other.bits).count_ones() & 1 == 1
    }

    /// The first `l` bits.
    pub fn prefix(&self, l: usize) -> BitVector {
        assert!(l <= self.len(), "prefix length {l} exceeds {}", self.len);
        Self::from_word(l, self.bits)
    }

    pub fn ones_positions(&self) -> impl Iterator<Item = usize> {
        let mut w = self.bits;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let i = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i)
            }
        })
    }

    /// Parses a string of `'0'`/`'1'` characters, bit 0 first.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() > MAX_LEN {
            return Err(Error::InvalidLength(s.len()));
        }
        let mut bits = 0u64;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << i,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unexpected character {other:?} in bit string"
                    )))
                }
            }
        }
        Self::new(s.len(), bits)
    }
}

impl BitXor for BitVector {
    type Output = BitVector;

    #[inline]
    fn bitxor(self, rhs: BitVector) -> BitVector {
        debug_assert_eq!(self.len, rhs.len, "xor of vectors with different lengths");
        BitVector {
            len: self.len,
            bits: self.bits ^ rhs.bits,
        }
    }
}

impl BitXorAssign for BitVector {
    #[inline]
    fn bitxor_assign(&mut self, rhs: BitVector) {
        debug_assert_eq!(self.len, rhs.len, "xor of vectors with different lengths");
        self.bits ^= rhs.bits;
    }
}

impl BitAnd for BitVector {
    type Output = BitVector;

    #[inline]
    fn bitand(self, rhs: BitVector) -> BitVector {
        debug_assert_eq!(self.len, rhs.len, "and of vectors with different lengths");
        BitVector {
            len: self.len,
            bits: self.bits & rhs.bits,
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// Dense binary matrix, one packed word per row (`cols <= 64`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GF2Matrix {
    rows: usize,
    cols: usize,
    words: Vec<u64>,
}

impl GF2Matrix {
    pub fn new(rows: usize, cols: usize, words: Vec<u64>) -> Result<Self> {
        if cols > MAX_LEN {
            return Err(Error::InvalidLength(cols));
        }
        if words.len() != rows {
            return Err(Error::DimensionMismatch {
                context: "matrix rows",
                expected: rows,
                found: words.len(),
            });
        }
        if words.iter().any(|w| w & !low_mask(cols) != 0) {
            return Err(Error::StrayBits(cols));
        }
        Ok(Self { rows, cols, words })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(cols <= MAX_LEN);
        Self {
            rows,
            cols,
            words: vec![0; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_LEN);
        Self {
            rows: n,
            cols: n,
            words: (0..n).map(|i| 1u64 << i).collect(),
        }
    }

    /// Matrix with no rows and `cols` columns.
    pub fn empty(cols: usize) -> Self {
        Self::zeros(0, cols)
    }

    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Result<Self> {
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row length",
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        Self::new(rows.len(), cols, rows.iter().map(|r| r.bits()).collect())
    }

    /// Rows given as `'0'`/`'1'` strings, all of the same length.
    pub fn parse_rows(rows: &[&str]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| BitVector::parse(r))
            .collect::<Result<Vec<_>>>()?;
        let cols = parsed.first().map_or(0, |r| r.len());
        Self::from_rows(cols, &parsed)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> BitVector {
        BitVector::from_word(self.cols, self.words[i])
    }

    #[inline]
    pub fn row_words(&self) -> &[u64] {
        &self.words
    }

    /// Column `j` packed as a word over the rows (`rows <= 64`).
    pub fn column_word(&self, j: usize) -> u64 {
        assert!(self.rows <= MAX_LEN, "column words need rows <= 64");
        self.words
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, w)| acc | (((w >> j) & 1) << i))
    }

    /// `M · v`: bit `i` of the result is the parity of `row_i & v`.
    pub fn mat_vec_mul(&self, v: BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "mat_vec_mul",
                expected: self.cols,
                found: v.len(),
            });
        }
        if self.rows > MAX_LEN {
            return Err(Error::InvalidLength(self.rows));
        }
        Ok(BitVector::from_word(self.rows, self.mul_word(v.bits())))
    }

    #[inline]
    pub(crate) fn mul_word(&self, v: u64) -> u64 {
        self.words
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, w)| {
                acc | ((((w & v).count_ones() & 1) as u64) << i)
            })
    }

    /// `u · M`: XOR of the rows selected by `u` (row-vector convention).
    pub fn vec_mat_mul(&self, u: BitVector) -> Result<BitVector> {
        if u.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "vec_mat_mul",
                expected: self.rows,
                found: u.len(),
            });
        }
        Ok(BitVector::from_word(self.cols, self.combine_word(u.bits())))
    }

    #[inline]
    pub(crate) fn combine_word(&self, mut u: u64) -> u64 {
        let mut acc = 0u64;
        while u != 0 {
            let i = u.trailing_zeros() as usize;
            acc ^= self.words[i];
            u &= u - 1;
        }
        acc
    }

    pub fn transpose(&self) -> Result<GF2Matrix> {
        if self.rows > MAX_LEN {
            return Err(Error::InvalidLength(self.rows));
        }
        let words = (0..self.cols).map(|j| self.column_word(j)).collect();
        GF2Matrix::new(self.cols, self.rows, words)
    }

    pub fn rank(&self) -> usize {
        let mut words = self.words.clone();
        rref(&mut words, self.cols).len()
    }

    /// Basis of `{v : M·v = 0}` as the rows of a `(cols - rank) × cols`
    /// matrix, in reduced echelon form keyed on the lowest set bit.
    pub fn null_space_basis(&self) -> GF2Matrix {
        let mut reduced = self.words.clone();
        let pivots = rref(&mut reduced, self.cols);
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis: Vec<u64> = (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = 1u64 << f;
                for (row, &p) in pivots.iter().enumerate() {
                    if (reduced[row] >> f) & 1 == 1 {
                        v |= 1 << p;
                    }
                }
                v
            })
            .collect();
        rref(&mut basis, self.cols);
        GF2Matrix {
            rows: basis.len(),
            cols: self.cols,
            words: basis,
        }
    }

    /// Solves `M · v = b`, returning the lexicographically smallest
    /// solution (bit 0 most significant).
    pub fn solve_linear(&self, b: BitVector) -> Result<BitVector> {
        LinearSolver::new(self)?.solve(b)
    }
}

impl fmt::Debug for GF2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GF2Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Reduced row echelon form in place. Pivots are chosen from the lowest
/// column index upward; returns the pivot column of each leading row and
/// leaves any zero rows at the end of `words`.
pub(crate) fn rref(words: &mut [u64], cols: usize) -> Vec<usize> {
    rref_with(words, cols, |_| {})
}

/// [`rref`] that applies the same row operations to `transform`, so that
/// `transform · M` ends up in reduced echelon form when it starts as `I`.
pub(crate) fn rref_tracked(words: &mut [u64], cols: usize, transform: &mut [u64]) -> Vec<usize> {
    rref_with(words, cols, |op| match op {
        RowOp::Swap(a, b) => transform.swap(a, b),
        RowOp::Add(a, b) => transform[a] ^= transform[b],
    })
}

#[derive(Clone, Copy)]
enum RowOp {
    Swap(usize, usize),
    /// `row[0] ^= row[1]`
    Add(usize, usize),
}

fn rref_with(words: &mut [u64], cols: usize, mut record: impl FnMut(RowOp)) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        if rank == words.len() {
            break;
        }
        let bit = 1u64 << col;
        let Some(found) = (rank..words.len()).find(|&r| words[r] & bit != 0) else {
            continue;
        };
        if found != rank {
            words.swap(found, rank);
            record(RowOp::Swap(found, rank));
        }
        for r in 0..words.len() {
            if r != rank && words[r] & bit != 0 {
                words[r] ^= words[rank];
                record(RowOp::Add(r, rank));
            }
        }
        pivots.push(col);
        rank += 1;
    }
    pivots
}

/// Precomputed elimination for repeated solves of `M · v = b`.
#[derive(Clone, Debug)]
pub struct LinearSolver {
    rows: usize,
    cols: usize,
    /// Row operations `T` with `T · M` in reduced echelon form.
    transform: Vec<u64>,
    pivots: Vec<usize>,
    null_basis: GF2Matrix,
    null_pivots: Vec<usize>,
}

impl LinearSolver {
    pub fn new(m: &GF2Matrix) -> Result<Self> {
        if m.rows > MAX_LEN {
            return Err(Error::InvalidLength(m.rows));
        }
        let mut reduced = m.words.clone();
        let mut transform: Vec<u64> = (0..m.rows).map(|i| 1u64 << i).collect();
        let pivots = rref_tracked(&mut reduced, m.cols, &mut transform);
        let null_basis = m.null_space_basis();
        let null_pivots = null_basis
            .words
            .iter()
            .map(|w| w.trailing_zeros() as usize)
            .collect();
        Ok(Self {
            rows: m.rows,
            cols: m.cols,
            transform,
            pivots,
            null_basis,
            null_pivots,
        })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn null_basis(&self) -> &GF2Matrix {
        &self.null_basis
    }

    /// Some solution of `M · v = b`, zero on every free column.
    pub fn particular(&self, b: BitVector) -> Result<BitVector> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "solve_linear",
                expected: self.rows,
                found: b.len(),
            });
        }
        Ok(BitVector::from_word(
            self.cols,
            self.particular_word(b.bits()).ok_or(Error::NoSolution)?,
        ))
    }

    #[inline]
    pub(crate) fn particular_word(&self, b: u64) -> Option<u64> {
        let mut v = 0u64;
        for (i, t) in self.transform.iter().enumerate() {
            let bit = (t & b).count_ones() & 1 == 1;
            if i < self.pivots.len() {
                if bit {
                    v |= 1 << self.pivots[i];
                }
            } else if bit {
                return None;
            }
        }
        Some(v)
    }

    /// Lexicographically smallest solution of `M · v = b`.
    pub fn solve(&self, b: BitVector) -> Result<BitVector> {
        let mut v = self.particular(b)?.bits();
        for (row, &p) in self.null_basis.words.iter().zip(&self.null_pivots) {
            if (v >> p) & 1 == 1 {
                v ^= row;
            }
        }
        Ok(BitVector::from_word(self.cols, v))
    }
}
