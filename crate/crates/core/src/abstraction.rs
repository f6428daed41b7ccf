//! Grid abstraction of a bounded continuous state space.
//!
//! A [`Granularity`] splits each dimension `[L_i, U_i]` into unit intervals
//! of diameter `d_i` (the last one truncated at `U_i`). An
//! [`AbstractState`] is one grid cell, identified by its index vector and,
//! for hashing, by a row-major [`CellId`].
//!
//! Cell boundaries are always computed as `L_i + k * d_i`, by a single
//! function, so that [`Granularity::abstract_of`], [`Granularity::concretize`]
//! and [`Granularity::cover`] agree bit-for-bit on where faces lie.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Row-major linearization of an abstract state's index vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId(pub u64);

/// A vector of closed intervals, one per state dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox {
    intervals: Vec<Interval>,
}

impl IntervalBox {
    pub fn new(intervals: Vec<Interval>) -> Self {
        IntervalBox { intervals }
    }

    pub fn from_pairs(pairs: &[[f64; 2]]) -> Result<Self> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, &[lo, hi])| {
                if lo <= hi {
                    Ok(Interval::new(lo, hi))
                } else {
                    Err(Error::Config(format!(
                        "interval {i} of box has lower {lo} above upper {hi}"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(IntervalBox::new)
    }

    pub fn point(s: &[f64]) -> Self {
        IntervalBox::new(s.iter().map(|&x| Interval::point(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn intervals_mut(&mut self) -> &mut [Interval] {
        &mut self.intervals
    }

    pub fn into_intervals(self) -> Vec<Interval> {
        self.intervals
    }

    pub fn contains_point(&self, s: &[f64]) -> bool {
        s.len() == self.dim() && self.intervals.iter().zip(s).all(|(iv, &x)| iv.contains(x))
    }

    pub fn contains_box(&self, other: &IntervalBox) -> bool {
        self.dim() == other.dim()
            && self
                .intervals
                .iter()
                .zip(&other.intervals)
                .all(|(a, b)| a.contains_interval(b))
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        self.intervals.iter().map(|iv| iv.lo).collect()
    }

    pub fn upper_corner(&self) -> Vec<f64> {
        self.intervals.iter().map(|iv| iv.hi).collect()
    }

    /// Endpoints flattened as `(l_1, u_1, ..., l_n, u_n)`.
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals.iter().flat_map(|iv| [iv.lo, iv.hi]).collect()
    }
}

impl fmt::Display for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

/// A grid cell, by index vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbstractState {
    index: Vec<u64>,
}

impl AbstractState {
    pub fn new(index: Vec<u64>) -> Self {
        AbstractState { index }
    }

    pub fn index(&self) -> &[u64] {
        &self.index
    }
}

/// Per-dimension bounds and unit-interval diameters of the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GranularitySpec", into = "GranularitySpec")]
pub struct Granularity {
    lower: Vec<f64>,
    upper: Vec<f64>,
    diameters: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
}

/// Serialized form: counts are recomputed on load.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GranularitySpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub diameters: Vec<f64>,
}

impl TryFrom<GranularitySpec> for Granularity {
    type Error = Error;
    fn try_from(s: GranularitySpec) -> Result<Self> {
        Granularity::new(&s.lower, &s.upper, &s.diameters)
    }
}

impl From<Granularity> for GranularitySpec {
    fn from(g: Granularity) -> Self {
        GranularitySpec {
            lower: g.lower,
            upper: g.upper,
            diameters: g.diameters,
        }
    }
}

/// `ceil(range / d)`, except that a ratio within rounding noise of an
/// integer is taken as that integer (0.6 - -1.2 over 0.01 is 180, not 181).
fn cell_count(range: f64, d: f64) -> f64 {
    let r = range / d;
    let k = r.round();
    if (r - k).abs() <= 1e-9 * r.max(1.0) {
        k.max(1.0)
    } else {
        r.ceil()
    }
}

impl Granularity {
    pub fn new(lower: &[f64], upper: &[f64], diameters: &[f64]) -> Result<Self> {
        let n = lower.len();
        if n == 0 {
            return Err(Error::dims("lower bounds", 1, 0));
        }
        if upper.len() != n {
            return Err(Error::dims("upper bounds", n, upper.len()));
        }
        if diameters.len() != n {
            return Err(Error::dims("diameters", n, diameters.len()));
        }
        let mut counts = Vec::with_capacity(n);
        let mut total: u64 = 1;
        for i in 0..n {
            let (l, u, d) = (lower[i], upper[i], diameters[i]);
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::EmptyRange {
                    dim: i,
                    lower: l,
                    upper: u,
                });
            }
            // d slightly above the range (by rounding) still means one cell
            if !(d.is_finite() && d > 0.0 && d <= (u - l) * (1.0 + 1e-12)) {
                return Err(Error::NonPositiveDiameter { dim: i, value: d });
            }
            let c = cell_count(u - l, d);
            if c >= u64::MAX as f64 {
                return Err(Error::StateSpaceOverflow);
            }
            let mut c = c as u64;
            while c > 1 && l + (c - 1) as f64 * d >= u {
                c -= 1;
            }
            counts.push(c);
            total = total.checked_mul(c).ok_or(Error::StateSpaceOverflow)?;
        }
        // u64::MAX is reserved for the sink state
        if total == u64::MAX {
            return Err(Error::StateSpaceOverflow);
        }
        Ok(Granularity {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            diameters: diameters.to_vec(),
            counts,
            total,
        })
    }

    /// Same bounds, different diameters.
    pub fn with_diameters(&self, diameters: &[f64]) -> Result<Self> {
        Granularity::new(&self.lower, &self.upper, diameters)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn diameters(&self) -> &[f64] {
        &self.diameters
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_states(&self) -> u64 {
        self.total
    }

    pub fn bounds(&self) -> IntervalBox {
        IntervalBox::new(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(&l, &u)| Interval::new(l, u))
                .collect(),
        )
    }

    /// Same grid geometry (bounds and diameters), compared exactly.
    pub fn same_grid(&self, other: &Granularity) -> bool {
        self.lower == other.lower && self.upper == other.upper && self.diameters == other.diameters
    }

    #[inline]
    fn face(&self, i: usize, k: u64) -> f64 {
        if k >= self.counts[i] {
            self.upper[i]
        } else {
            self.lower[i] + k as f64 * self.diameters[i]
        }
    }

    /// Cell index of `x` in dimension `i`; `x` must lie in `[L_i, U_i]`.
    #[inline]
    fn index_in_dim(&self, i: usize, x: f64) -> u64 {
        let last = self.counts[i] - 1;
        let raw = ((x - self.lower[i]) / self.diameters[i]).floor();
        let mut k = if raw <= 0.0 { 0 } else { (raw as u64).min(last) };
        // Snap to the faces as `face` computes them.
        while k > 0 && x < self.face(i, k) {
            k -= 1;
        }
        while k < last && x >= self.face(i, k + 1) {
            k += 1;
        }
        k
    }

    pub fn in_bounds(&self, s: &[f64]) -> bool {
        s.len() == self.dim()
            && s.iter()
                .enumerate()
                .all(|(i, &x)| self.lower[i] <= x && x <= self.upper[i])
    }

    /// The cell containing `s`. Points on a shared face go to the
    /// higher-index cell, except `s_i = U_i`, which goes to the last cell.
    pub fn abstract_of(&self, s: &[f64]) -> Result<AbstractState> {
        if s.len() != self.dim() {
            return Err(Error::dims("state", self.dim(), s.len()));
        }
        let mut index = Vec::with_capacity(s.len());
        for (i, &x) in s.iter().enumerate() {
            if !(self.lower[i] <= x && x <= self.upper[i]) {
                return Err(Error::OutOfBounds {
                    dim: i,
                    value: x,
                    lower: self.lower[i],
                    upper: self.upper[i],
                });
            }
            index.push(self.index_in_dim(i, x));
        }
        Ok(AbstractState { index })
    }

    pub fn concretize(&self, a: &AbstractState) -> IntervalBox {
        IntervalBox::new(
            a.index
                .iter()
                .enumerate()
                .map(|(i, &k)| Interval::new(self.face(i, k), self.face(i, k + 1)))
                .collect(),
        )
    }

    pub fn is_valid(&self, a: &AbstractState) -> bool {
        a.index.len() == self.dim() && a.index.iter().zip(&self.counts).all(|(&k, &c)| k < c)
    }

    pub fn cell_id(&self, a: &AbstractState) -> CellId {
        let mut id = 0u64;
        for (&k, &c) in a.index.iter().zip(&self.counts) {
            id = id * c + k;
        }
        CellId(id)
    }

    pub fn state_of(&self, id: CellId) -> AbstractState {
        let mut rest = id.0;
        let mut index = vec![0u64; self.dim()];
        for i in (0..self.dim()).rev() {
            index[i] = rest % self.counts[i];
            rest /= self.counts[i];
        }
        AbstractState { index }
    }

    /// Inclusive per-dimension index ranges of the cells whose closed boxes
    /// meet `v` (after clipping `v` to the bounds). Touching faces count.
    pub fn cover_ranges(&self, v: &IntervalBox) -> Result<Vec<(u64, u64)>> {
        if v.dim() != self.dim() {
            return Err(Error::dims("box", self.dim(), v.dim()));
        }
        let mut ranges = Vec::with_capacity(self.dim());
        for (i, iv) in v.intervals().iter().enumerate() {
            let lo = iv.lo.max(self.lower[i]);
            let hi = iv.hi.min(self.upper[i]);
            // NaN endpoints compare false and land here too
            if lo.partial_cmp(&hi).is_none_or(|o| o.is_gt()) {
                return Err(Error::EmptyIntersection);
            }
            let mut kmin = self.index_in_dim(i, lo);
            if kmin > 0 && self.face(i, kmin) == lo {
                kmin -= 1;
            }
            let kmax = self.index_in_dim(i, hi);
            ranges.push((kmin, kmax));
        }
        Ok(ranges)
    }

    /// All cells meeting `v`, in row-major order.
    pub fn cover(&self, v: &IntervalBox) -> Result<Vec<AbstractState>> {
        let ranges = self.cover_ranges(v)?;
        Ok(CoverIter::new(ranges).collect())
    }

    /// Like [`Granularity::cover`], yielding linear ids in increasing order.
    pub fn cover_ids(&self, v: &IntervalBox) -> Result<Vec<CellId>> {
        let ranges = self.cover_ranges(v)?;
        Ok(CoverIter::new(ranges).map(|a| self.cell_id(&a)).collect())
    }
}

/// Row-major enumeration of a product of index ranges.
struct CoverIter {
    ranges: Vec<(u64, u64)>,
    cur: Option<Vec<u64>>,
}

impl CoverIter {
    fn new(ranges: Vec<(u64, u64)>) -> Self {
        let cur = Some(ranges.iter().map(|r| r.0).collect());
        CoverIter { ranges, cur }
    }
}

impl Iterator for CoverIter {
    type Item = AbstractState;

    fn next(&mut self) -> Option<AbstractState> {
        let cur = self.cur.as_mut()?;
        let out = AbstractState::new(cur.clone());
        let mut i = self.ranges.len();
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            if cur[i] < self.ranges[i].1 {
                cur[i] += 1;
                break;
            }
            cur[i] = self.ranges[i].0;
        }
        Some(out)
    }
}
