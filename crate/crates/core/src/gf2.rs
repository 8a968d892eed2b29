//! Linear algebra over the two-element field.
//!
//! Vectors are packed into 64-bit words, bit `i` of a vector living in word
//! `i / 64` at position `i % 64`. Up to 256 bits are stored inline; longer
//! vectors (the ambient dimension may go up to 4096) spill to the heap.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;
use smallvec::SmallVec;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// Largest ambient dimension accepted by the generators.
pub const MAX_DIM: usize = 4096;

type Words = SmallVec<[u64; 4]>;

fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A fixed-length bit vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Vector {
    len: usize,
    words: Words,
}

impl Gf2Vector {
    pub fn zeros(len: usize) -> Self {
        Gf2Vector {
            len,
            words: SmallVec::from_elem(0, word_count(len)),
        }
    }

    /// Uniformly random vector of `F_2^len`.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = rng.random();
        }
        v.mask_tail();
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Parses a string of `0`/`1` characters; character `i` is bit `i`.
    pub fn parse_bits(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Malformed(format!("bit string contains {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits))
    }

    /// The vector whose bits are the binary digits of `index`
    /// (bit `i` of the vector is bit `i` of the integer).
    pub fn from_index(len: usize, index: u64) -> Self {
        let mut v = Self::zeros(len);
        if let Some(w) = v.words.first_mut() {
            *w = index;
        }
        v.mask_tail();
        v
    }

    /// Integer value of the vector when it fits in 64 bits.
    pub fn to_index(&self) -> Option<u64> {
        if self.words.iter().skip(1).any(|&w| w != 0) {
            return None;
        }
        Some(self.words.first().copied().unwrap_or(0))
    }

    fn mask_tail(&mut self) {
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

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if bit {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &Gf2Vector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= b;
        }
    }

    /// Inner product over GF(2). Lengths must agree.
    #[inline]
    pub fn dot(&self, other: &Gf2Vector) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn lowest_set_bit(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD_BITS + w.trailing_zeros() as usize)
    }

    pub fn highest_set_bit(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD_BITS + (WORD_BITS - 1 - w.leading_zeros() as usize))
    }

    /// Big-endian hex of the integer value, `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u8;
            for b in 0..4 {
                let i = 4 * d + b;
                if i < self.len && self.get(i) {
                    nibble |= 1 << b;
                }
            }
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<Self> {
        let mut v = Self::zeros(len);
        for (pos, c) in hex.chars().rev().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::Malformed(format!("invalid hex digit {c:?}")))?;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let i = 4 * pos + b;
                    if i >= len {
                        return Err(Error::Malformed(format!("hex value {hex} exceeds {len} bits")));
                    }
                    v.set(i, true);
                }
            }
        }
        Ok(v)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if self.len != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: self.len,
            });
        }
        Ok(())
    }
}

/// Orders vectors by integer value (most significant bit first).
impl Ord for Gf2Vector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for Gf2Vector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            let s: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
            write!(f, "Gf2Vector({s})")
        } else {
            write!(f, "Gf2Vector[{}](0x{})", self.len, self.to_hex())
        }
    }
}

/// A linear functional `x -> w . x` on `F_2^d`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct LinearHypothesis {
    pub w: Gf2Vector,
}

impl LinearHypothesis {
    pub fn new(w: Gf2Vector) -> Self {
        LinearHypothesis { w }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    #[inline]
    pub fn eval(&self, x: &Gf2Vector) -> bool {
        self.w.dot(x)
    }
}

/// GF(2) inner product of the functional's coefficients with `x`.
pub fn eval_linear(h: &LinearHypothesis, x: &Gf2Vector) -> Result<bool> {
    x.check_len(h.dim())?;
    Ok(h.eval(x))
}

/// A subspace basis in reduced row-echelon form.
///
/// Each row's pivot is its lowest set bit, no other row has that bit set,
/// and rows are sorted by strictly increasing pivot.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Gf2Basis {
    dim: usize,
    rows: Vec<Gf2Vector>,
    pivots: Vec<usize>,
}

impl Gf2Basis {
    pub fn empty(dim: usize) -> Self {
        Gf2Basis {
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Basis of the span of `vectors` (dependent vectors are absorbed).
    pub fn span_of(dim: usize, vectors: &[Gf2Vector]) -> Result<Self> {
        let mut b = Self::empty(dim);
        for v in vectors {
            b.insert(v.clone())?;
        }
        Ok(b)
    }

    /// Adds `v` to the spanning set; returns `true` when the rank grew.
    pub fn insert(&mut self, mut v: Gf2Vector) -> Result<bool> {
        v.check_len(self.dim)?;
        self.reduce(&mut v);
        let Some(p) = v.lowest_set_bit() else {
            return Ok(false);
        };
        for row in self.rows.iter_mut() {
            if row.get(p) {
                row.xor_assign(&v);
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, v);
        Ok(true)
    }

    fn reduce(&self, v: &mut Gf2Vector) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(row);
            }
        }
    }

    pub fn contains(&self, v: &Gf2Vector) -> Result<bool> {
        v.check_len(self.dim)?;
        let mut r = v.clone();
        self.reduce(&mut r);
        Ok(r.is_zero())
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Gf2Vector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// All `2^rank` members of the span, in Gray-code order starting at 0.
    pub fn span_elements(&self) -> Vec<Gf2Vector> {
        assert!(self.rank() < 32, "span too large to enumerate");
        let n = 1usize << self.rank();
        let mut out = Vec::with_capacity(n);
        let mut cur = Gf2Vector::zeros(self.dim);
        out.push(cur.clone());
        for i in 1..n {
            cur.xor_assign(&self.rows[i.trailing_zeros() as usize]);
            out.push(cur.clone());
        }
        out
    }

    pub fn to_hex_rows(&self) -> Vec<String> {
        self.rows.iter().map(Gf2Vector::to_hex).collect()
    }

    /// Rebuilds a basis from hex rows; rows must be independent.
    pub fn from_hex_rows(dim: usize, rows: &[String]) -> Result<Self> {
        let mut b = Self::empty(dim);
        for r in rows {
            if !b.insert(Gf2Vector::from_hex(dim, r)?)? {
                return Err(Error::Malformed("basis rows are linearly dependent".into()));
            }
        }
        Ok(b)
    }
}

/// `dim(Span(vectors))`.
pub fn gf2_rank(vectors: &[Gf2Vector]) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Ok(0);
    };
    let mut b = Gf2Basis::empty(first.len());
    for v in vectors {
        b.insert(v.clone())?;
    }
    Ok(b.rank())
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Label {
    Determined(bool),
    Undetermined,
}

/// Span of labelled instances under a realizable linear labelling.
///
/// Kept in reduced row-echelon form alongside the XOR of labels for each
/// row, so label queries and consistency checks cost one reduction.
#[derive(Clone, Debug)]
pub struct LabeledSpan {
    basis: Gf2Basis,
    labels: Vec<bool>,
}

impl LabeledSpan {
    pub fn new(dim: usize) -> Self {
        LabeledSpan {
            basis: Gf2Basis::empty(dim),
            labels: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    fn reduce(&self, v: &mut Gf2Vector, y: &mut bool) {
        for ((row, &p), &l) in self.basis.rows.iter().zip(&self.basis.pivots).zip(&self.labels) {
            if v.get(p) {
                v.xor_assign(row);
                *y ^= l;
            }
        }
    }

    /// Records the example `(x, y)`. Fails if it contradicts earlier ones.
    pub fn insert(&mut self, x: &Gf2Vector, y: bool) -> Result<bool> {
        x.check_len(self.dim())?;
        let mut v = x.clone();
        let mut label = y;
        self.reduce(&mut v, &mut label);
        let Some(p) = v.lowest_set_bit() else {
            return if label { Err(Error::Inconsistent) } else { Ok(false) };
        };
        for (row, l) in self.basis.rows.iter_mut().zip(self.labels.iter_mut()) {
            if row.get(p) {
                row.xor_assign(&v);
                *l ^= label;
            }
        }
        let at = self.basis.pivots.partition_point(|&q| q < p);
        self.basis.pivots.insert(at, p);
        self.basis.rows.insert(at, v);
        self.labels.insert(at, label);
        Ok(true)
    }

    /// Reduced basis rows with their implied labels.
    pub fn labeled_rows(&self) -> impl Iterator<Item = (&Gf2Vector, bool)> {
        self.basis.rows.iter().zip(self.labels.iter().copied())
    }

    pub fn solve(&self, query: &Gf2Vector) -> Result<Label> {
        query.check_len(self.dim())?;
        let mut v = query.clone();
        let mut label = false;
        self.reduce(&mut v, &mut label);
        Ok(if v.is_zero() {
            Label::Determined(label)
        } else {
            Label::Undetermined
        })
    }

    /// The consistent functional with the smallest integer index.
    ///
    /// The consistent set is `h0 + N` with `h0` the pivot-only solution and
    /// `N` the annihilator of the span; reducing `h0` greedily against an
    /// echelon basis of `N` keyed by highest bit clears every high bit that
    /// can be cleared.
    pub fn min_index_solution(&self) -> LinearHypothesis {
        let dim = self.dim();
        let mut h = Gf2Vector::zeros(dim);
        for (&p, &l) in self.basis.pivots.iter().zip(&self.labels) {
            h.set(p, l);
        }
        let mut is_pivot = vec![false; dim];
        for &p in &self.basis.pivots {
            is_pivot[p] = true;
        }
        // Annihilator basis in echelon form keyed by highest set bit.
        let mut null: Vec<Option<Gf2Vector>> = vec![None; dim];
        for f in (0..dim).filter(|&f| !is_pivot[f]) {
            let mut n = Gf2Vector::zeros(dim);
            n.set(f, true);
            for (row, &p) in self.basis.rows.iter().zip(&self.basis.pivots) {
                if row.get(f) {
                    n.set(p, true);
                }
            }
            while let Some(top) = n.highest_set_bit() {
                match &null[top] {
                    Some(existing) => n.xor_assign(existing),
                    None => {
                        null[top] = Some(n);
                        break;
                    }
                }
            }
        }
        for top in (0..dim).rev() {
            if let Some(n) = &null[top] {
                if h.get(top) {
                    h.xor_assign(n);
                }
            }
        }
        LinearHypothesis::new(h)
    }
}

/// Label of `query` implied by `observed`, if it lies in their span.
pub fn gf2_solve_label(observed: &[(Gf2Vector, bool)], query: &Gf2Vector) -> Result<Label> {
    let mut span = LabeledSpan::new(query.len());
    for (x, y) in observed {
        span.insert(x, *y)?;
    }
    span.solve(query)
}

/// Samples bases of `dims.len()` subspaces of `F_2^d` whose union is
/// linearly independent, uniformly over all such tuples.
///
/// Each basis vector is drawn uniformly from `F_2^d` and rejected when it
/// falls in the span of every vector accepted so far, across all subspaces.
pub fn sample_independent_subspaces<R: Rng + ?Sized>(d: usize, dims: &[usize], rng: &mut R) -> Result<Vec<Gf2Basis>> {
    let total: usize = dims.iter().sum();
    if total > d {
        return Err(Error::InfeasibleDimensions {
            requested: total,
            ambient: d,
        });
    }
    if d > MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "ambient dimension {d} exceeds {MAX_DIM}"
        )));
    }
    let mut global = Gf2Basis::empty(d);
    let mut out = Vec::with_capacity(dims.len());
    for &dim in dims {
        let mut accepted = Vec::with_capacity(dim);
        while accepted.len() < dim {
            let v = Gf2Vector::random(d, rng);
            if global.insert(v.clone())? {
                accepted.push(v);
            }
        }
        out.push(Gf2Basis::span_of(d, &accepted)?);
    }
    debug_assert_eq!(global.rank(), total);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn v(s: &str) -> Gf2Vector {
        Gf2Vector::parse_bits(s).unwrap()
    }

    // Brute-force span: closure of {0} under XOR with each vector.
    fn span_set(vectors: &[Gf2Vector], d: usize) -> HashSet<u64> {
        let mut set: HashSet<u64> = [0].into_iter().collect();
        for x in vectors {
            let xi = x.to_index().unwrap();
            let add: Vec<u64> = set.iter().map(|s| s ^ xi).collect();
            set.extend(add);
        }
        assert!(set.len() <= 1 << d);
        set
    }

    #[test]
    fn rank_examples() {
        assert_eq!(gf2_rank(&[]).unwrap(), 0);
        assert_eq!(gf2_rank(&[v("100"), v("010"), v("110")]).unwrap(), 2);
        assert_eq!(
            gf2_rank(&[v("100"), v("0100")]),
            Err(Error::DimensionMismatch { expected: 3, found: 4 })
        );
    }

    #[test]
    fn rank_matches_span_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let d = rng.random_range(1..=10);
            let n = rng.random_range(0..=50);
            let vs: Vec<_> = (0..n).map(|_| Gf2Vector::random(d, &mut rng)).collect();
            let size = span_set(&vs, d).len();
            assert_eq!(1usize << gf2_rank(&vs).unwrap(), size);
        }
    }

    #[test]
    fn solve_label_examples() {
        let obs = vec![(v("100"), true), (v("010"), false)];
        assert_eq!(gf2_solve_label(&obs, &v("110")).unwrap(), Label::Determined(true));
        let obs = vec![(v("100"), true)];
        assert_eq!(gf2_solve_label(&obs, &v("010")).unwrap(), Label::Undetermined);
        let bad = vec![(v("100"), true), (v("010"), true), (v("110"), true)];
        assert_eq!(gf2_solve_label(&bad, &v("001")), Err(Error::Inconsistent));
    }

    #[test]
    fn full_rank_sample_recovers_planted_functional() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [1usize, 5, 17, 70, 130] {
            let hstar = LinearHypothesis::new(Gf2Vector::random(d, &mut rng));
            let mut span = LabeledSpan::new(d);
            let mut obs = Vec::new();
            while span.rank() < d {
                let x = Gf2Vector::random(d, &mut rng);
                let y = hstar.eval(&x);
                span.insert(&x, y).unwrap();
                obs.push((x, y));
            }
            for _ in 0..20 {
                let q = Gf2Vector::random(d, &mut rng);
                assert_eq!(gf2_solve_label(&obs, &q).unwrap(), Label::Determined(hstar.eval(&q)));
            }
            assert_eq!(span.min_index_solution(), hstar);
        }
    }

    #[test]
    fn min_index_solution_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let d = rng.random_range(1..=9);
            let hstar = LinearHypothesis::new(Gf2Vector::random(d, &mut rng));
            let n = rng.random_range(0..=d + 2);
            let xs: Vec<_> = (0..n).map(|_| Gf2Vector::random(d, &mut rng)).collect();
            let mut span = LabeledSpan::new(d);
            for x in &xs {
                span.insert(x, hstar.eval(x)).unwrap();
            }
            let brute = (0..1u64 << d)
                .map(|i| Gf2Vector::from_index(d, i))
                .find(|w| xs.iter().all(|x| w.dot(x) == hstar.eval(x)))
                .unwrap();
            assert_eq!(span.min_index_solution().w, brute);
        }
    }

    #[test]
    fn eval_linear_examples() {
        let h = LinearHypothesis::new(v("110"));
        assert!(eval_linear(&h, &v("100")).unwrap());
        assert!(!eval_linear(&h, &v("110")).unwrap());
        let zero = LinearHypothesis::new(v("000"));
        assert!(!eval_linear(&zero, &v("111")).unwrap());
        assert!(eval_linear(&h, &v("1000")).is_err());
    }

    #[test]
    fn hex_round_trip_and_layout() {
        assert_eq!(v("1000").to_hex(), "1");
        assert_eq!(v("00001").to_hex(), "10");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [1, 7, 64, 67, 300] {
            let x = Gf2Vector::random(d, &mut rng);
            assert_eq!(Gf2Vector::from_hex(d, &x.to_hex()).unwrap(), x);
        }
        assert!(Gf2Vector::from_hex(3, "f").is_err());
    }

    #[test]
    fn ordering_is_integer_order() {
        let a = Gf2Vector::from_index(10, 300);
        let b = Gf2Vector::from_index(10, 513);
        assert!(a < b);
        let mut big = Gf2Vector::zeros(130);
        big.set(129, true);
        let mut small = Gf2Vector::zeros(130);
        small.set(0, true);
        small.set(100, true);
        assert!(small < big);
    }

    #[test]
    fn basis_is_reduced_echelon() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let vs: Vec<_> = (0..12).map(|_| Gf2Vector::random(20, &mut rng)).collect();
        let b = Gf2Basis::span_of(20, &vs).unwrap();
        assert!(b.pivots().windows(2).all(|w| w[0] < w[1]));
        for (i, row) in b.rows().iter().enumerate() {
            assert_eq!(row.lowest_set_bit(), Some(b.pivots()[i]));
            for (j, &p) in b.pivots().iter().enumerate() {
                assert_eq!(row.get(p), i == j);
            }
        }
        assert_eq!(b.rank(), gf2_rank(&vs).unwrap());
        for x in &vs {
            assert!(b.contains(x).unwrap());
        }
    }

    #[test]
    fn span_elements_are_distinct_members() {
        let b = Gf2Basis::span_of(6, &[v("110000"), v("011000"), v("000011")]).unwrap();
        let elems = b.span_elements();
        assert_eq!(elems.len(), 8);
        assert!(elems[0].is_zero());
        let distinct: HashSet<_> = elems.iter().cloned().collect();
        assert_eq!(distinct.len(), 8);
        assert!(elems.iter().all(|e| b.contains(e).unwrap()));
    }

    #[test]
    fn independent_subspaces_rank_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let full = sample_independent_subspaces(4, &[4], &mut rng).unwrap();
        assert_eq!(full[0].rank(), 4);
        for _ in 0..100 {
            let bs = sample_independent_subspaces(8, &[2, 3], &mut rng).unwrap();
            assert_eq!(bs[0].rank(), 2);
            assert_eq!(bs[1].rank(), 3);
            let all: Vec<_> = bs.iter().flat_map(|b| b.rows().to_vec()).collect();
            assert_eq!(gf2_rank(&all).unwrap(), 5);
        }
        assert_eq!(
            sample_independent_subspaces(4, &[3, 2], &mut rng).unwrap_err(),
            Error::InfeasibleDimensions {
                requested: 5,
                ambient: 4
            }
        );
    }

    #[test]
    fn one_dim_generator_is_uniform() {
        // Chi-square against the uniform law on the 63 nonzero vectors.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 10_000;
        let mut counts = [0usize; 64];
        for _ in 0..draws {
            let bs = sample_independent_subspaces(6, &[1, 1], &mut rng).unwrap();
            counts[bs[0].rows()[0].to_index().unwrap() as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        let expected = draws as f64 / 63.0;
        let chi2: f64 = counts[1..]
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 62 degrees of freedom; the 0.999 quantile is about 103.4.
        assert!(chi2 < 103.4, "chi2 = {chi2}");
        let sigma = (expected * (1.0 - 1.0 / 63.0)).sqrt();
        for &c in &counts[1..] {
            assert!((c as f64 - expected).abs() <= 4.0 * sigma);
        }
    }
}
