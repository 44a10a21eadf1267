//! Bit-packed GF(2) vectors and matrices with labeled columns.
//!
//! A [`BitMatrix`] represents a linear map `Z = Mξ` where `ξ` is a vector of
//! independent fair bits indexed by the labels of a [`ColumnSpace`]. Under that
//! reading the rank of a matrix is the entropy (in bits) of `Z`, and deleting
//! the columns of a set `S` yields the conditional entropy of `Z` given `ξ_S`.
//! Both facts are exercised against brute-force enumeration in the tests.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A dense vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    /// All-ones vector of the given length.
    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for w in &mut v.words {
            *w = u64::MAX;
        }
        v.clear_tail();
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters, column 0 first.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bools(&bits))
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in &mut v.words {
            *w = rng.gen();
        }
        v.clear_tail();
        v
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn toggle(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the lowest set bit, if any.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * WORD_BITS + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * WORD_BITS + t)
                }
            })
        })
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        assert_eq!(self.len, other.len, "length mismatch in and");
        BitVec {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn not(&self) -> BitVec {
        let mut v = BitVec {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        v.clear_tail();
        v
    }

    /// Parity of the inner product with `other`.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// Keeps the bits at `indices` (in that order), producing a shorter vector.
    pub fn select(&self, indices: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(indices.len());
        for (k, &i) in indices.iter().enumerate() {
            if self.get(i) {
                out.set(k, true);
            }
        }
        out
    }

    /// Hex rendering: the bit string read column 0 first, right-padded with
    /// zeros to a multiple of four, one nibble per hex digit.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.len.div_ceil(4));
        for chunk in 0..self.len.div_ceil(4) {
            let mut nibble = 0u8;
            for k in 0..4 {
                let i = chunk * 4 + k;
                if i < self.len && self.get(i) {
                    nibble |= 8 >> k;
                }
            }
            s.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        s
    }

    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        let s = s.trim();
        if s.len() != len.div_ceil(4) {
            return Err(Error::Parse(format!(
                "hex row {s:?} has {} digits, expected {} for {len} columns",
                s.len(),
                len.div_ceil(4)
            )));
        }
        let mut v = BitVec::zeros(len);
        for (chunk, c) in s.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {c:?}")))?;
            for k in 0..4 {
                if nibble & (8 >> k) != 0 {
                    let i = chunk * 4 + k;
                    if i >= len {
                        return Err(Error::Parse(format!("hex row {s:?} sets padding bits")));
                    }
                    v.set(i, true);
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec(")?;
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        write!(f, ")")
    }
}

/// Opaque column identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColumnLabel(String);

impl ColumnLabel {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ColumnLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Ordered set of distinct column labels.
#[derive(Debug, Clone)]
pub struct ColumnSpace {
    labels: Vec<ColumnLabel>,
    index: HashMap<ColumnLabel, usize>,
}

impl PartialEq for ColumnSpace {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for ColumnSpace {}

impl ColumnSpace {
    pub fn new(labels: Vec<ColumnLabel>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::Labeling(format!("duplicate column label {l}")));
            }
        }
        Ok(Self { labels, index })
    }

    /// Columns labeled `c0, c1, ...`.
    pub fn indexed(dimension: usize) -> Self {
        Self::new((0..dimension).map(|i| ColumnLabel::new(format!("c{i}"))).collect())
            .expect("generated labels are distinct")
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[ColumnLabel] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &ColumnLabel {
        &self.labels[index]
    }

    pub fn position(&self, label: &ColumnLabel) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::Labeling(format!("unknown column label {label}")))
    }

    /// Resolves a label set to a column mask.
    pub fn mask_of<'a, I>(&self, labels: I) -> Result<BitVec>
    where
        I: IntoIterator<Item = &'a ColumnLabel>,
    {
        let mut mask = BitVec::zeros(self.dimension());
        for l in labels {
            mask.set(self.position(l)?, true);
        }
        Ok(mask)
    }
}

/// Incremental row-echelon basis with lowest-column-first pivots.
///
/// Each stored vector has a distinct lowest set bit (its pivot), so reducing
/// a vector only ever clears its lowest remaining bit and introduces higher ones.
#[derive(Debug, Clone)]
pub struct Echelon {
    len: usize,
    pivot_of: Vec<Option<usize>>,
    basis: Vec<BitVec>,
}

impl Echelon {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            pivot_of: vec![None; len],
            basis: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BitVec] {
        &self.basis
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the span.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.len);
        let mut r = v.clone();
        let mut from = 0;
        while let Some(p) = first_one_from(&r, from) {
            match self.pivot_of[p] {
                Some(k) => r.xor_assign(&self.basis[k]),
                None => from = p + 1,
            }
        }
        r
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Inserts `v`; returns true when it was independent of the current basis.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        let r = self.reduce(v);
        match r.first_one() {
            Some(p) => {
                self.pivot_of[p] = Some(self.basis.len());
                self.basis.push(r);
                true
            }
            None => false,
        }
    }
}

fn first_one_from(v: &BitVec, from: usize) -> Option<usize> {
    if from >= v.len {
        return None;
    }
    let mut k = from / WORD_BITS;
    let mut w = v.words[k] & (u64::MAX << (from % WORD_BITS));
    loop {
        if w != 0 {
            return Some(k * WORD_BITS + w.trailing_zeros() as usize);
        }
        k += 1;
        if k >= v.words.len() {
            return None;
        }
        w = v.words[k];
    }
}

/// A GF(2) matrix whose columns are indexed by a shared [`ColumnSpace`].
#[derive(Debug, Clone)]
pub struct BitMatrix {
    space: Arc<ColumnSpace>,
    rows: Vec<BitVec>,
}

impl PartialEq for BitMatrix {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.rows == other.rows
    }
}

impl Eq for BitMatrix {}

fn same_space(a: &Arc<ColumnSpace>, b: &Arc<ColumnSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl BitMatrix {
    pub fn new(space: Arc<ColumnSpace>, rows: Vec<BitVec>) -> Result<Self> {
        let p = space.dimension();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::Dimension(format!(
                "row {i} has {} bits but the column space has {p}",
                r.len()
            )));
        }
        Ok(Self { space, rows })
    }

    pub fn empty(space: Arc<ColumnSpace>) -> Self {
        Self {
            space,
            rows: Vec::new(),
        }
    }

    pub fn identity(space: Arc<ColumnSpace>) -> Self {
        let p = space.dimension();
        let rows = (0..p).map(|i| BitVec::unit(p, i)).collect();
        Self { space, rows }
    }

    /// Unit rows for the given columns, in mask order.
    pub fn unit_rows(space: Arc<ColumnSpace>, columns: &BitVec) -> Self {
        let p = space.dimension();
        let rows = columns.iter_ones().map(|i| BitVec::unit(p, i)).collect();
        Self { space, rows }
    }

    /// Convenience constructor from `0`/`1` strings over `c0..` labels.
    pub fn from_bit_strs(rows: &[&str], dimension: usize) -> Result<Self> {
        let space = Arc::new(ColumnSpace::indexed(dimension));
        let rows = rows
            .iter()
            .map(|s| BitVec::from_bit_str(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, rows)
    }

    pub fn random<R: Rng + ?Sized>(space: Arc<ColumnSpace>, row_count: usize, rng: &mut R) -> Self {
        let p = space.dimension();
        let rows = (0..row_count).map(|_| BitVec::random(p, rng)).collect();
        Self { space, rows }
    }

    pub fn space(&self) -> &Arc<ColumnSpace> {
        &self.space
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.space.dimension()
    }

    pub fn push_row(&mut self, row: BitVec) -> Result<()> {
        self.check_row(&row)?;
        self.rows.push(row);
        Ok(())
    }

    fn check_row(&self, row: &BitVec) -> Result<()> {
        if row.len() != self.column_count() {
            return Err(Error::Dimension(format!(
                "row has {} bits, matrix has {} columns",
                row.len(),
                self.column_count()
            )));
        }
        Ok(())
    }

    fn check_space(&self, other: &BitMatrix) -> Result<()> {
        if !same_space(&self.space, &other.space) {
            return Err(Error::Dimension(
                "matrices are defined over different column spaces".into(),
            ));
        }
        Ok(())
    }

    /// Row-echelon basis of the row space.
    pub fn echelon(&self) -> Echelon {
        let mut e = Echelon::new(self.column_count());
        for r in &self.rows {
            e.insert(r);
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    /// Rank of the submatrix keeping only the columns set in `mask`.
    pub fn rank_on(&self, mask: &BitVec) -> usize {
        assert_eq!(mask.len(), self.column_count());
        let mut e = Echelon::new(self.column_count());
        for r in &self.rows {
            e.insert(&r.and(mask));
        }
        e.rank()
    }

    /// Submatrix keeping exactly the columns in `labels`, in their original
    /// relative order. Row count is preserved.
    pub fn restrict_columns<'a, I>(&self, labels: I) -> Result<BitMatrix>
    where
        I: IntoIterator<Item = &'a ColumnLabel>,
    {
        let mask = self.space.mask_of(labels)?;
        let keep: Vec<usize> = mask.iter_ones().collect();
        let space = if keep.len() == self.column_count() {
            self.space.clone()
        } else {
            Arc::new(ColumnSpace::new(
                keep.iter().map(|&i| self.space.label(i).clone()).collect(),
            )?)
        };
        let rows = self.rows.iter().map(|r| r.select(&keep)).collect();
        Ok(BitMatrix { space, rows })
    }

    /// Entropy in bits of `Mξ` for uniform i.i.d. `ξ`; equal to the rank.
    pub fn entropy_of_linear(&self) -> usize {
        self.rank()
    }

    /// Entropy of `Mξ` given the coordinates `ξ_S`: the rank of the
    /// submatrix on the complement of `S`.
    pub fn conditional_entropy_of_linear<'a, I>(&self, given: I) -> Result<usize>
    where
        I: IntoIterator<Item = &'a ColumnLabel>,
    {
        let mask = self.space.mask_of(given)?;
        Ok(self.rank_on(&mask.not()))
    }

    pub fn stack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        self.check_space(other)?;
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(BitMatrix {
            space: self.space.clone(),
            rows,
        })
    }

    /// Mutual information `I(M1ξ; M2ξ)` in bits.
    pub fn mutual_information_linear(&self, other: &BitMatrix) -> Result<usize> {
        let joint = self.stack(other)?.rank();
        Ok(self.rank() + other.rank() - joint)
    }

    pub fn in_row_span(&self, row: &BitVec) -> Result<bool> {
        self.check_row(row)?;
        Ok(self.echelon().contains(row))
    }

    /// Evaluates `Mξ` for a concrete assignment `ξ`.
    pub fn apply(&self, xi: &BitVec) -> BitVec {
        assert_eq!(xi.len(), self.column_count());
        let mut out = BitVec::zeros(self.rows.len());
        for (k, r) in self.rows.iter().enumerate() {
            if r.dot(xi) {
                out.set(k, true);
            }
        }
        out
    }

    pub fn to_hex_rows(&self) -> Vec<String> {
        self.rows.iter().map(BitVec::to_hex).collect()
    }
}

/// Serialized form: label list plus one hex string per row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub labels: Vec<ColumnLabel>,
    pub rows: Vec<String>,
}

impl From<&BitMatrix> for MatrixFile {
    fn from(m: &BitMatrix) -> Self {
        MatrixFile {
            labels: m.space.labels().to_vec(),
            rows: m.to_hex_rows(),
        }
    }
}

impl MatrixFile {
    /// Rebuilds the matrix on `space`, which must carry exactly these labels.
    /// Columns are permuted into `space` order when the file lists them differently.
    pub fn into_matrix(&self, space: Arc<ColumnSpace>) -> Result<BitMatrix> {
        let p = self.labels.len();
        if p != space.dimension() {
            return Err(Error::Dimension(format!(
                "matrix file has {p} columns, expected {}",
                space.dimension()
            )));
        }
        let positions = self
            .labels
            .iter()
            .map(|l| space.position(l))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::with_capacity(self.rows.len());
        for h in &self.rows {
            let local = BitVec::from_hex(h, p)?;
            let mut row = BitVec::zeros(p);
            for i in local.iter_ones() {
                row.set(positions[i], true);
            }
            rows.push(row);
        }
        BitMatrix::new(space, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[&str], p: usize) -> BitMatrix {
        BitMatrix::from_bit_strs(rows, p).unwrap()
    }

    fn labels(mat: &BitMatrix, idx: &[usize]) -> Vec<ColumnLabel> {
        idx.iter().map(|&i| mat.space().label(i).clone()).collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(m(&["100", "010", "001"], 3).rank(), 3);
        assert_eq!(m(&["110", "011", "101"], 3).rank(), 2);
        assert_eq!(m(&[], 5).rank(), 0);
    }

    #[test]
    fn restrict_columns_examples() {
        let i2 = m(&["10", "01"], 2);
        let r = i2.restrict_columns(&labels(&i2, &[1])).unwrap();
        assert_eq!(r.row_count(), 2);
        assert_eq!(r.column_count(), 1);
        assert_eq!(r.rank(), 1);

        let one = m(&["11"], 2);
        let r = one.restrict_columns(&labels(&one, &[0])).unwrap();
        assert_eq!(r.rows()[0], BitVec::from_bit_str("1").unwrap());
        assert_eq!(r.rank(), 1);

        let x = m(&["101", "011"], 3);
        let all = x.space().labels().to_vec();
        assert_eq!(x.restrict_columns(&all).unwrap(), x);
    }

    #[test]
    fn restrict_unknown_label() {
        let x = m(&["10"], 2);
        let err = x.restrict_columns(&[ColumnLabel::new("nope")]).unwrap_err();
        assert!(matches!(err, Error::Labeling(_)));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(m(&["11"], 2).entropy_of_linear(), 1);
        assert_eq!(m(&["100", "010", "001"], 3).entropy_of_linear(), 3);
        assert_eq!(m(&["10", "10"], 2).entropy_of_linear(), 1);
    }

    #[test]
    fn conditional_entropy_examples() {
        let i2 = m(&["10", "01"], 2);
        assert_eq!(i2.conditional_entropy_of_linear(&labels(&i2, &[0])).unwrap(), 1);
        let x = m(&["11"], 2);
        assert_eq!(x.conditional_entropy_of_linear(&labels(&x, &[0])).unwrap(), 1);
        let all = i2.space().labels().to_vec();
        assert_eq!(i2.conditional_entropy_of_linear(&all).unwrap(), 0);
    }

    #[test]
    fn mutual_information_examples() {
        let space = Arc::new(ColumnSpace::indexed(2));
        let row = |s: &str| BitMatrix::new(space.clone(), vec![BitVec::from_bit_str(s).unwrap()]).unwrap();
        assert_eq!(row("10").mutual_information_linear(&row("10")).unwrap(), 1);
        assert_eq!(row("10").mutual_information_linear(&row("01")).unwrap(), 0);
        assert_eq!(row("10").mutual_information_linear(&row("11")).unwrap(), 0);
    }

    #[test]
    fn mutual_information_space_mismatch() {
        let a = m(&["10"], 2);
        let b = m(&["100"], 3);
        assert!(matches!(a.mutual_information_linear(&b), Err(Error::Dimension(_))));
    }

    #[test]
    fn span_examples() {
        let x = m(&["100", "010"], 3);
        assert!(x.in_row_span(&BitVec::from_bit_str("110").unwrap()).unwrap());
        assert!(!x.in_row_span(&BitVec::from_bit_str("001").unwrap()).unwrap());
        let e = m(&[], 3);
        assert!(e.in_row_span(&BitVec::zeros(3)).unwrap());
        assert!(matches!(x.in_row_span(&BitVec::zeros(2)), Err(Error::Dimension(_))));
    }

    #[test]
    fn hex_layout() {
        let v = BitVec::from_bit_str("110").unwrap();
        assert_eq!(v.to_hex(), "c");
        let v = BitVec::from_bit_str("000010001").unwrap();
        assert_eq!(v.to_hex(), "088");
        assert_eq!(BitVec::from_hex("088", 9).unwrap(), v);
        assert!(BitVec::from_hex("1", 3).is_err());
        assert!(BitVec::from_hex("zz", 8).is_err());
    }

    #[test]
    fn matrix_file_permutes_columns() {
        let x = m(&["110", "001"], 3);
        let mut file = MatrixFile::from(&x);
        // reverse column order in the file
        file.labels.reverse();
        file.rows = vec!["6".into(), "8".into()];
        let back = file.into_matrix(x.space().clone()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn wide_rows_cross_word_boundaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let space = Arc::new(ColumnSpace::indexed(150));
        let a = BitMatrix::random(space.clone(), 40, &mut rng);
        let b = BitMatrix::random(space, 40, &mut rng);
        let s = a.stack(&b).unwrap();
        assert!(s.rank() <= a.rank() + b.rank());
        for r in s.rows() {
            assert!(s.in_row_span(r).unwrap());
        }
    }

    #[test]
    fn rank_on_matches_restrict() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let space = Arc::new(ColumnSpace::indexed(9));
        for _ in 0..50 {
            let x = BitMatrix::random(space.clone(), 5, &mut rng);
            let mask = BitVec::random(9, &mut rng);
            let keep: Vec<ColumnLabel> = mask.iter_ones().map(|i| space.label(i).clone()).collect();
            assert_eq!(x.rank_on(&mask), x.restrict_columns(&keep).unwrap().rank());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix_strategy() -> impl Strategy<Value = (usize, Vec<Vec<bool>>)> {
            (1usize..20).prop_flat_map(|p| (Just(p), prop::collection::vec(prop::collection::vec(any::<bool>(), p), 0..10)))
        }

        fn build(p: usize, rows: &[Vec<bool>]) -> BitMatrix {
            BitMatrix::new(
                Arc::new(ColumnSpace::indexed(p)),
                rows.iter().map(|r| BitVec::from_bools(r)).collect(),
            )
            .unwrap()
        }

        proptest! {
            #[test]
            fn rank_invariant_under_row_ops((p, rows) in matrix_strategy(), swaps in prop::collection::vec((0usize..10, 0usize..10), 0..20)) {
                let base = build(p, &rows);
                let mut rows2: Vec<BitVec> = base.rows().to_vec();
                let n = rows2.len();
                for (a, b) in swaps {
                    if n < 2 { break; }
                    let (a, b) = (a % n, b % n);
                    if a == b { continue; }
                    if (a + b) % 2 == 0 {
                        rows2.swap(a, b);
                    } else {
                        let src = rows2[b].clone();
                        rows2[a].xor_assign(&src);
                    }
                }
                let moved = BitMatrix::new(base.space().clone(), rows2).unwrap();
                prop_assert_eq!(base.rank(), moved.rank());
                prop_assert!(base.rank() <= base.row_count().min(p));
            }

            #[test]
            fn stacked_rank_subadditive((p, rows) in matrix_strategy(), split in 0usize..10) {
                let full = build(p, &rows);
                let k = split.min(rows.len());
                let a = build(p, &rows[..k]);
                let b = BitMatrix::new(a.space().clone(), full.rows()[k..].to_vec()).unwrap();
                let joint = a.stack(&b).unwrap().rank();
                prop_assert!(joint <= a.rank() + b.rank());
                prop_assert_eq!(a.mutual_information_linear(&b).unwrap(), a.rank() + b.rank() - joint);
            }

            #[test]
            fn restriction_is_monotone((p, rows) in matrix_strategy(), seed in any::<u64>()) {
                let x = build(p, &rows);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = BitVec::random(p, &mut rng);
                let t = s.and(&BitVec::random(p, &mut rng));
                prop_assert!(x.rank_on(&t) <= x.rank_on(&s));
            }

            #[test]
            fn hex_round_trip(bits in prop::collection::vec(any::<bool>(), 0..130)) {
                let v = BitVec::from_bools(&bits);
                prop_assert_eq!(BitVec::from_hex(&v.to_hex(), bits.len()).unwrap(), v);
            }
        }
    }
}
