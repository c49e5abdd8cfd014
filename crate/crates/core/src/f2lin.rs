//! Linear algebra over GF(2) on rows packed into 64-bit words.

use crate::error::Inconsistent;

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A fixed-length vector over GF(2).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Parses a string such as `"0110"`; any other character than `0`/`1` panics.
    pub fn from_str_bits(s: &str) -> Self {
        let bits: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => false,
                '1' => true,
                other => panic!("invalid bit character {other:?}"),
            })
            .collect();
        BitVec::from_bits(&bits)
    }

    pub fn from_ones(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVec::zeros(len);
        for i in ones {
            v.set(i, true);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if b {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len);
        xor_words(&mut self.words, &other.words);
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len);
        dot_words(&self.words, &other.words)
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        first_one(&self.words)
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl std::fmt::Display for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (a, b) in dst.iter_mut().zip(src) {
        *a ^= b;
    }
}

fn dot_words(a: &[u64], b: &[u64]) -> bool {
    a.iter()
        .zip(b)
        .fold(0u32, |acc, (x, y)| acc ^ (x & y).count_ones())
        & 1
        == 1
}

fn first_one(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
}

fn bit(words: &[u64], i: usize) -> bool {
    (words[i / WORD] >> (i % WORD)) & 1 == 1
}

/// Row-major matrix over GF(2) with a fixed column count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    width: usize,
    stride: usize,
    nrows: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn new(width: usize) -> Self {
        BitMatrix {
            width,
            stride: words_for(width),
            nrows: 0,
            data: Vec::new(),
        }
    }

    pub fn from_rows<'a>(width: usize, rows: impl IntoIterator<Item = &'a BitVec>) -> Self {
        let mut m = BitMatrix::new(width);
        for r in rows {
            m.push_row(r);
        }
        m
    }

    /// Builds from strings like `["1010", "0110"]`.
    pub fn from_strs(width: usize, rows: &[&str]) -> Self {
        let rows: Vec<BitVec> = rows.iter().map(|s| BitVec::from_str_bits(s)).collect();
        BitMatrix::from_rows(width, &rows)
    }

    pub fn push_row(&mut self, row: &BitVec) {
        assert_eq!(row.len(), self.width, "row width mismatch");
        self.data.extend_from_slice(row.words());
        self.nrows += 1;
    }

    /// Appends a row given by its set columns (0-based).
    pub fn push_ones(&mut self, ones: impl IntoIterator<Item = usize>) {
        let start = self.data.len();
        self.data.resize(start + self.stride, 0);
        for c in ones {
            assert!(c < self.width);
            self.data[start + c / WORD] ^= 1 << (c % WORD);
        }
        self.nrows += 1;
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> BitVec {
        BitVec {
            len: self.width,
            words: self.row_words(i).to_vec(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(j < self.width);
        bit(self.row_words(i), j)
    }

    pub fn rows(&self) -> impl Iterator<Item = BitVec> + '_ {
        (0..self.nrows).map(|i| self.row(i))
    }

    /// `M y` over GF(2).
    pub fn mul_vec(&self, y: &BitVec) -> BitVec {
        assert_eq!(y.len(), self.width);
        let mut out = BitVec::zeros(self.nrows);
        for i in 0..self.nrows {
            out.set(i, dot_words(self.row_words(i), y.words()));
        }
        out
    }
}

/// `[matrix | rhs]` over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSystem {
    pub matrix: BitMatrix,
    pub rhs: BitVec,
}

impl BitSystem {
    pub fn new(matrix: BitMatrix, rhs: BitVec) -> Self {
        assert_eq!(matrix.nrows(), rhs.len(), "rhs length must equal row count");
        BitSystem { matrix, rhs }
    }

    pub fn empty(width: usize) -> Self {
        BitSystem::new(BitMatrix::new(width), BitVec::zeros(0))
    }

    pub fn is_satisfied_by(&self, y: &BitVec) -> bool {
        self.matrix.mul_vec(y) == self.rhs
    }
}

/// Working copy of an augmented matrix; the right-hand side occupies column
/// `width`.
struct Elimination {
    width: usize,
    stride: usize,
    nrows: usize,
    data: Vec<u64>,
    pivots: Vec<usize>,
}

impl Elimination {
    fn new(m: &BitMatrix, rhs: Option<&BitVec>) -> Self {
        let stride = words_for(m.width + 1);
        let mut data = vec![0u64; m.nrows * stride];
        for i in 0..m.nrows {
            let row = &mut data[i * stride..(i + 1) * stride];
            row[..m.stride].copy_from_slice(m.row_words(i));
            if rhs.is_some_and(|b| b.get(i)) {
                row[m.width / WORD] |= 1 << (m.width % WORD);
            }
        }
        Elimination {
            width: m.width,
            stride,
            nrows: m.nrows,
            data,
            pivots: Vec::new(),
        }
    }

    fn has(&self, r: usize, c: usize) -> bool {
        bit(&self.data[r * self.stride..(r + 1) * self.stride], c)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for k in 0..self.stride {
                self.data.swap(a * self.stride + k, b * self.stride + k);
            }
        }
    }

    /// `row[dst] ^= row[src]`, starting at the word holding column `from`.
    fn xor_row(&mut self, dst: usize, src: usize, from: usize) {
        let s = self.stride;
        let start = from / WORD;
        let (lo, hi) = if dst < src { (dst, src) } else { (src, dst) };
        let (head, tail) = self.data.split_at_mut(hi * s);
        let (d, sr) = if dst < src {
            (&mut head[lo * s..(lo + 1) * s], &tail[..s])
        } else {
            (&mut tail[..s], &head[lo * s..(lo + 1) * s] as &[u64])
        };
        xor_words(&mut d[start..], &sr[start..]);
    }

    /// Gauss-Jordan over the coefficient columns. With `full = false` only rows
    /// below each pivot are cleared, which is enough for the rank.
    fn reduce(&mut self, full: bool) -> usize {
        let mut rank = 0;
        for col in 0..self.width {
            if rank == self.nrows {
                break;
            }
            let Some(p) = (rank..self.nrows).find(|&r| self.has(r, col)) else {
                continue;
            };
            self.swap_rows(rank, p);
            let lo = if full { 0 } else { rank + 1 };
            for r in lo..self.nrows {
                if r != rank && self.has(r, col) {
                    self.xor_row(r, rank, col);
                }
            }
            self.pivots.push(col);
            rank += 1;
        }
        rank
    }
}

/// Dimension of the row span over GF(2).
pub fn f2_rank(m: &BitMatrix) -> usize {
    Elimination::new(m, None).reduce(false)
}

/// Finds a solution with every free variable set to 0.
pub fn f2_solve(sys: &BitSystem) -> Result<BitVec, Inconsistent> {
    let width = sys.matrix.width();
    let mut e = Elimination::new(&sys.matrix, Some(&sys.rhs));
    let rank = e.reduce(true);
    if (rank..e.nrows).any(|r| e.has(r, width)) {
        return Err(Inconsistent);
    }
    let mut y = BitVec::zeros(width);
    for (r, &col) in e.pivots.iter().enumerate() {
        y.set(col, e.has(r, width));
    }
    Ok(y)
}

/// Whether `v` lies in the row span of `m`.
pub fn f2_in_span(m: &BitMatrix, v: &BitVec) -> bool {
    assert_eq!(v.len(), m.width(), "vector width mismatch");
    let mut basis = F2Basis::new(m.width());
    for r in m.rows() {
        basis.insert(r);
    }
    basis.contains(v)
}

/// Incrementally maintained echelon basis, keyed by each vector's lowest set
/// bit.
#[derive(Debug, Clone)]
pub struct F2Basis {
    width: usize,
    by_lead: Vec<Option<BitVec>>,
    rank: usize,
}

impl F2Basis {
    pub fn new(width: usize) -> Self {
        F2Basis {
            width,
            by_lead: vec![None; width],
            rank: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn reduce(&self, mut v: BitVec) -> (BitVec, Option<usize>) {
        while let Some(lead) = v.first_one() {
            match &self.by_lead[lead] {
                Some(b) => v.xor_assign(b),
                None => return (v, Some(lead)),
            }
        }
        (v, None)
    }

    /// Adds `v` to the basis; returns whether the span grew.
    pub fn insert(&mut self, v: BitVec) -> bool {
        assert_eq!(v.len(), self.width);
        match self.reduce(v) {
            (r, Some(lead)) => {
                self.by_lead[lead] = Some(r);
                self.rank += 1;
                true
            }
            (_, None) => false,
        }
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.width);
        self.reduce(v.clone()).1.is_none()
    }
}
