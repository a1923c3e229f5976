//! Dyadic indices, level ranges and the weighted coefficient space.

use std::fmt;

use crate::error::{Error, Result};

/// Finest level any range may reach; keeps coordinate counts addressable.
pub const MAX_LEVEL: u32 = 24;

/// Weight `2^{-k}` attached to every coordinate of level `k`.
#[inline]
pub fn level_weight(k: u32) -> f64 {
    (-(k as f64)).exp2()
}

/// Level/position pair `(k, j)` addressing the Haar function supported on
/// `[(j-1) 2^-k, j 2^-k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicIndex {
    k: u32,
    j: u64,
}

impl DyadicIndex {
    pub fn new(k: u32, j: u64) -> Result<Self> {
        if k > MAX_LEVEL {
            return Err(Error::Parameter(format!("level {k} exceeds {MAX_LEVEL}")));
        }
        if j == 0 || j > (1u64 << k) {
            return Err(Error::Parameter(format!(
                "position {j} outside 1..={} at level {k}",
                1u64 << k
            )));
        }
        Ok(Self { k, j })
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn j(&self) -> u64 {
        self.j
    }

    /// Closed support `[left, right]`.
    pub fn support(&self) -> (f64, f64) {
        let h = level_weight(self.k);
        ((self.j - 1) as f64 * h, self.j as f64 * h)
    }

    pub fn midpoint(&self) -> f64 {
        let (a, b) = self.support();
        0.5 * (a + b)
    }

    /// Index of the level-`k` cell containing `t`, using half-open cells
    /// `[(j-1) 2^-k, j 2^-k)` with `t = 1` assigned to the last cell.
    pub fn containing(k: u32, t: f64) -> Self {
        let count = 1u64 << k;
        let j = ((t * count as f64).floor() as i64 + 1).clamp(1, count as i64) as u64;
        Self { k, j }
    }

    pub fn supports_disjoint(&self, other: &Self) -> bool {
        let (a, b) = self.support();
        let (c, d) = other.support();
        b <= c || d <= a
    }
}

impl fmt::Display for DyadicIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k, self.j)
    }
}

/// Inclusive band of levels `k0..=k1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LevelRange {
    k0: u32,
    k1: u32,
}

impl LevelRange {
    pub fn new(k0: u32, k1: u32) -> Result<Self> {
        if k0 > k1 {
            return Err(Error::Parameter(format!("k0 = {k0} exceeds k1 = {k1}")));
        }
        if k1 > MAX_LEVEL {
            return Err(Error::Capacity(format!("k1 = {k1} exceeds {MAX_LEVEL}")));
        }
        Ok(Self { k0, k1 })
    }

    #[inline]
    pub fn k0(&self) -> u32 {
        self.k0
    }

    #[inline]
    pub fn k1(&self) -> u32 {
        self.k1
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<u32> {
        self.k0..=self.k1
    }

    pub fn level_count(&self) -> usize {
        (self.k1 - self.k0 + 1) as usize
    }

    /// Total coordinate count `2^{k1+1} - 2^{k0}`.
    pub fn dim(&self) -> usize {
        (1usize << (self.k1 + 1)) - (1usize << self.k0)
    }

    /// Level of the dyadic grid on which every profile in this range is
    /// piecewise linear.
    pub fn cell_level(&self) -> u32 {
        self.k1 + 1
    }

    pub fn contains_level(&self, k: u32) -> bool {
        self.k0 <= k && k <= self.k1
    }

    /// Offset of the first level-`k` coordinate in the flat layout.
    #[inline]
    pub fn level_offset(&self, k: u32) -> usize {
        debug_assert!(self.contains_level(k));
        (1usize << k) - (1usize << self.k0)
    }

    pub fn flat_index(&self, idx: DyadicIndex) -> Result<usize> {
        if !self.contains_level(idx.k) {
            return Err(Error::Shape(format!(
                "level {} outside range {}..={}",
                idx.k, self.k0, self.k1
            )));
        }
        Ok(self.level_offset(idx.k) + (idx.j - 1) as usize)
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn index_at(&self, flat: usize) -> DyadicIndex {
        let k = (flat + (1usize << self.k0)).ilog2();
        let j = (flat - self.level_offset(k)) as u64 + 1;
        DyadicIndex { k, j }
    }

    /// Weight of every flat coordinate, level by level.
    pub fn weights(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for k in self.levels() {
            out.extend(std::iter::repeat_n(level_weight(k), 1usize << k));
        }
        out
    }

    pub fn indices(&self) -> impl Iterator<Item = DyadicIndex> + '_ {
        self.levels()
            .flat_map(|k| (1..=(1u64 << k)).map(move |j| DyadicIndex { k, j }))
    }
}

impl fmt::Display for LevelRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.k0, self.k1)
    }
}

/// Element of the weighted coefficient space over a [`LevelRange`].
///
/// Coordinates are stored as contiguous per-level blocks ordered by
/// increasing level, positions ascending within a level.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefVector {
    range: LevelRange,
    coords: Vec<f64>,
}

impl CoefVector {
    pub fn new(range: LevelRange, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != range.dim() {
            return Err(Error::Shape(format!(
                "{} coordinates supplied, range {range} needs {}",
                coords.len(),
                range.dim()
            )));
        }
        Ok(Self { range, coords })
    }

    pub fn zeros(range: LevelRange) -> Self {
        Self { range, coords: vec![0.0; range.dim()] }
    }

    pub fn unit(range: LevelRange, idx: DyadicIndex) -> Result<Self> {
        let mut v = Self::zeros(range);
        let at = range.flat_index(idx)?;
        v.coords[at] = 1.0;
        Ok(v)
    }

    pub fn from_fn(range: LevelRange, mut f: impl FnMut(DyadicIndex) -> f64) -> Self {
        let coords = range.indices().map(&mut f).collect();
        Self { range, coords }
    }

    #[inline]
    pub fn range(&self) -> LevelRange {
        self.range
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    pub fn get(&self, idx: DyadicIndex) -> Result<f64> {
        Ok(self.coords[self.range.flat_index(idx)?])
    }

    pub fn level(&self, k: u32) -> Result<&[f64]> {
        if !self.range.contains_level(k) {
            return Err(Error::Shape(format!("level {k} outside range {}", self.range)));
        }
        let off = self.range.level_offset(k);
        Ok(&self.coords[off..off + (1usize << k)])
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.range != other.range {
            return Err(Error::Shape(format!(
                "ranges differ: {} vs {}",
                self.range, other.range
            )));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect();
        Ok(Self { range: self.range, coords })
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Self) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.coords.iter_mut().for_each(|c| *c *= alpha);
    }

    /// Sum over levels of `2^{-k} * sum_j g(x_{k,j})`, accumulated per level
    /// then combined in ascending `k`.
    fn weighted_level_sum(&self, mut g: impl FnMut(usize, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for k in self.range.levels() {
            let off = self.range.level_offset(k);
            let len = 1usize << k;
            let s: f64 = (off..off + len).map(|i| g(i, self.coords[i])).sum();
            total += level_weight(k) * s;
        }
        total
    }
}

/// `<x, y>_w = sum_k 2^{-k} sum_j x_{k,j} y_{k,j}`.
pub fn weighted_inner(x: &CoefVector, y: &CoefVector) -> Result<f64> {
    x.check_same(y)?;
    Ok(x.weighted_level_sum(|i, xi| xi * y.coords[i]))
}

/// `||x||_{p,w} = (sum_k 2^{-k} sum_j |x_{k,j}|^p)^{1/p}` for finite `p >= 1`.
pub fn weighted_norm(x: &CoefVector, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("norm exponent p = {p} must be finite and >= 1")));
    }
    let s = if p == 2.0 {
        x.weighted_level_sum(|_, v| v * v)
    } else {
        x.weighted_level_sum(|_, v| v.abs().powf(p))
    };
    Ok(s.powf(1.0 / p))
}

/// `2^{-k} sum_j |x_{k,j}|^q`: the `q`-th power of the `L_q` norm of the
/// level-`k` pack when `x` holds Haar coefficients.
pub fn pack_lq_norm_q(x: &CoefVector, k: u32, q: f64) -> Result<f64> {
    if !(q > 2.0) || !q.is_finite() {
        return Err(Error::Parameter(format!("pack exponent q = {q} must lie in (2, inf)")));
    }
    let level = x.level(k)?;
    Ok(level_weight(k) * level.iter().map(|v| v.abs().powf(q)).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn range(k0: u32, k1: u32) -> LevelRange {
        LevelRange::new(k0, k1).unwrap()
    }

    #[test]
    fn index_validation() {
        assert!(DyadicIndex::new(3, 0).is_err());
        assert!(DyadicIndex::new(3, 9).is_err());
        assert!(DyadicIndex::new(3, 8).is_ok());
        let idx = DyadicIndex::new(2, 3).unwrap();
        assert_eq!(idx.support(), (0.5, 0.75));
    }

    #[test]
    fn same_level_supports_disjoint() {
        for j in 1..8 {
            let a = DyadicIndex::new(3, j).unwrap();
            let b = DyadicIndex::new(3, j + 1).unwrap();
            assert!(a.supports_disjoint(&b));
        }
        let coarse = DyadicIndex::new(1, 1).unwrap();
        let fine = DyadicIndex::new(4, 3).unwrap();
        assert!(!coarse.supports_disjoint(&fine));
    }

    #[test]
    fn containing_cell() {
        assert_eq!(DyadicIndex::containing(2, 0.0).j(), 1);
        assert_eq!(DyadicIndex::containing(2, 0.25).j(), 2);
        assert_eq!(DyadicIndex::containing(2, 1.0).j(), 4);
        assert_eq!(DyadicIndex::containing(0, 1.0).j(), 1);
    }

    #[test]
    fn range_dimension_and_layout() {
        let r = range(2, 4);
        assert_eq!(r.dim(), 32 - 4);
        assert_eq!(r.weights().len(), r.dim());
        for (flat, idx) in r.indices().enumerate() {
            assert_eq!(r.flat_index(idx).unwrap(), flat);
            assert_eq!(r.index_at(flat), idx);
        }
        assert!(LevelRange::new(3, 2).is_err());
    }

    #[test]
    fn coordinate_count_is_checked() {
        assert!(CoefVector::new(range(1, 2), vec![0.0; 5]).is_err());
        assert!(CoefVector::new(range(1, 2), vec![0.0; 6]).is_ok());
    }

    #[test]
    fn unit_inner_and_norms() {
        let r = range(1, 4);
        let idx = DyadicIndex::new(3, 5).unwrap();
        let e = CoefVector::unit(r, idx).unwrap();
        assert_eq!(weighted_inner(&e, &e).unwrap(), 0.125);
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            let expect = (-3.0_f64 / p).exp2();
            assert!((weighted_norm(&e, p).unwrap() - expect).abs() < 1e-15);
        }
        let z = CoefVector::zeros(r);
        assert_eq!(weighted_inner(&z, &e).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_ranges_rejected() {
        let a = CoefVector::zeros(range(1, 3));
        let b = CoefVector::zeros(range(1, 4));
        assert!(matches!(weighted_inner(&a, &b), Err(Error::Shape(_))));
        assert!(a.sub(&b).is_err());
    }

    #[test]
    fn norm_exponent_validated() {
        let a = CoefVector::zeros(range(0, 1));
        assert!(matches!(weighted_norm(&a, 0.5), Err(Error::Parameter(_))));
        assert!(weighted_norm(&a, f64::INFINITY).is_err());
    }

    #[test]
    fn pack_norm_examples() {
        let r = range(0, 2);
        let mut x = CoefVector::zeros(r);
        x.as_mut_slice()[0] = 2.0;
        assert_eq!(pack_lq_norm_q(&x, 0, 4.0).unwrap(), 16.0);

        let idx = DyadicIndex::new(2, 3).unwrap();
        let e = CoefVector::unit(r, idx).unwrap();
        for q in [2.5, 3.0, 4.0, 8.0] {
            assert_eq!(pack_lq_norm_q(&e, 2, q).unwrap(), 0.25);
        }
        assert!(matches!(pack_lq_norm_q(&e, 3, 4.0), Err(Error::Shape(_))));
        assert!(pack_lq_norm_q(&e, 2, 2.0).is_err());
    }

    #[test]
    fn weighted_inner_matches_double_sum() {
        let r = range(2, 5);
        let x = CoefVector::from_fn(r, |i| (i.k() as f64 * 0.7 + i.j() as f64).sin());
        let y = CoefVector::from_fn(r, |i| (i.j() as f64 * 1.3 - i.k() as f64).cos());
        let mut brute = 0.0;
        for k in 2..=5u32 {
            for j in 1..=(1u64 << k) {
                let idx = DyadicIndex::new(k, j).unwrap();
                brute += 2f64.powi(-(k as i32)) * x.get(idx).unwrap() * y.get(idx).unwrap();
            }
        }
        assert!((weighted_inner(&x, &y).unwrap() - brute).abs() < 1e-13);
        let n2 = weighted_norm(&x, 2.0).unwrap();
        assert!((n2 * n2 - weighted_inner(&x, &x).unwrap()).abs() < 1e-13);
    }
}
