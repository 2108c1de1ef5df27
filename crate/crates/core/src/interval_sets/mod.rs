//! Intervals and finite interval unions inside `[0, 1]`.
//!
//! Intervals carry an exact rational center and a half-length that is either
//! an exact rational or a [`LogLength`]. Set algebra runs on rational
//! endpoints; log-domain radii enter it through a dyadic approximation that
//! never underflows. Single endpoints are treated as measure-zero: the open
//! flag is recorded but set operations only guarantee measure-level equality.

mod log_length;
pub mod rational;
mod schedule;

use std::cmp::Ordering;
use std::f64::consts::LN_2;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

pub use log_length::{log_add_exp, log_sum_exp, LogLength};
pub use rational::Rational;
pub use schedule::{schedule_radius, RadiusSchedule};

use crate::error::{Error, Result};
use rational::{ln_rational, ratio, to_decimal_string, to_f64};

/// Endpoint comparisons fall back to exact arithmetic when the double
/// approximations are closer than this.
const FAST_COMPARE_MARGIN: f64 = 1e-12;

const DECIMAL_DIGITS: usize = 60;

/// An interval given by its center and half-length.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    center: Rational,
    center_f64: f64,
    log_half: LogLength,
    exact_half: Option<Rational>,
    closed: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum End {
    Lo,
    Hi,
}

impl Interval {
    /// Open interval with a log-domain half-length.
    pub fn open(center: Rational, half_length: LogLength) -> Self {
        let center_f64 = to_f64(&center);
        Interval { center, center_f64, log_half: half_length, exact_half: None, closed: false }
    }

    /// Open interval with an exact rational half-length.
    pub fn open_exact(center: Rational, half_length: Rational) -> Result<Self> {
        if !half_length.is_positive() {
            return Err(Error::InvalidLength(format!("half-length must be positive, got {half_length}")));
        }
        let log_half = LogLength::from_log(ln_rational(&half_length).min(0.0))?;
        let center_f64 = to_f64(&center);
        Ok(Interval { center, center_f64, log_half, exact_half: Some(half_length), closed: false })
    }

    /// Open interval `(lo, hi)` with exact endpoints.
    pub fn from_endpoints(lo: Rational, hi: Rational) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidArgument(format!("empty interval ({lo}, {hi})")));
        }
        let two = Rational::from_integer(BigInt::from(2));
        let center = (&lo + &hi) / &two;
        let half = (hi - lo) / two;
        Self::open_exact(center, half)
    }

    /// The unit interval `(0, 1)`.
    pub fn unit() -> Self {
        Self::from_endpoints(ratio(0, 1), ratio(1, 1)).expect("unit interval")
    }

    pub fn with_closed(mut self, closed: bool) -> Self {
        self.closed = closed;
        self
    }

    pub fn center(&self) -> &Rational {
        &self.center
    }

    pub fn center_f64(&self) -> f64 {
        self.center_f64
    }

    pub fn log_half_length(&self) -> LogLength {
        self.log_half
    }

    /// Natural log of the full length.
    pub fn log_length(&self) -> f64 {
        self.log_half.log() + LN_2
    }

    /// Half-length as a double; zero when it underflows.
    pub fn half_f64(&self) -> f64 {
        match &self.exact_half {
            Some(h) => to_f64(h),
            None => self.log_half.length(),
        }
    }

    pub fn exact_half_length(&self) -> Option<&Rational> {
        self.exact_half.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact_half.is_some()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Half-length as a rational: exact when available, dyadic otherwise.
    pub fn half_rational(&self) -> Rational {
        match &self.exact_half {
            Some(h) => h.clone(),
            None => self.log_half.to_dyadic(),
        }
    }

    pub fn lo(&self) -> Rational {
        &self.center - self.half_rational()
    }

    pub fn hi(&self) -> Rational {
        &self.center + self.half_rational()
    }

    pub fn lo_f64(&self) -> f64 {
        self.center_f64 - self.half_f64()
    }

    pub fn hi_f64(&self) -> f64 {
        self.center_f64 + self.half_f64()
    }

    pub fn length_rational(&self) -> Rational {
        self.half_rational() * Rational::from_integer(BigInt::from(2))
    }

    fn end_f64(&self, end: End) -> f64 {
        match end {
            End::Lo => self.lo_f64(),
            End::Hi => self.hi_f64(),
        }
    }

    fn end_exact(&self, end: End) -> Rational {
        match end {
            End::Lo => self.lo(),
            End::Hi => self.hi(),
        }
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo_f64() < x && x < self.hi_f64()
    }
}

fn cmp_end(a: &Interval, ea: End, b: &Interval, eb: End) -> Ordering {
    let x = a.end_f64(ea);
    let y = b.end_f64(eb);
    if (x - y).abs() > FAST_COMPARE_MARGIN {
        return x.partial_cmp(&y).unwrap_or(Ordering::Equal);
    }
    a.end_exact(ea).cmp(&b.end_exact(eb))
}

/// `a` lies entirely to the left of `b` (touching allowed).
pub(crate) fn precedes(a: &Interval, b: &Interval) -> bool {
    cmp_end(a, End::Hi, b, End::Lo) != Ordering::Greater
}

/// Orders two intervals by right endpoint.
pub(crate) fn cmp_hi(a: &Interval, b: &Interval) -> Ordering {
    cmp_end(a, End::Hi, b, End::Hi)
}

/// Orders two intervals by left endpoint.
pub(crate) fn cmp_lo(a: &Interval, b: &Interval) -> Ordering {
    cmp_end(a, End::Lo, b, End::Lo)
}

/// Intersection of two intervals. A piece contained in the other is returned
/// unchanged so that log-domain radii survive.
pub fn intersect_intervals(a: &Interval, b: &Interval) -> Option<Interval> {
    if precedes(a, b) || precedes(b, a) {
        return None;
    }
    let lo = cmp_end(a, End::Lo, b, End::Lo);
    let hi = cmp_end(a, End::Hi, b, End::Hi);
    if lo != Ordering::Greater && hi != Ordering::Less {
        return Some(b.clone());
    }
    if lo != Ordering::Less && hi != Ordering::Greater {
        return Some(a.clone());
    }
    let lo = if lo == Ordering::Greater { a.lo() } else { b.lo() };
    let hi = if hi == Ordering::Less { a.hi() } else { b.hi() };
    Interval::from_endpoints(lo, hi).ok()
}

/// A finite union of pairwise disjoint intervals, sorted left to right.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalUnion {
    pieces: Vec<Interval>,
}

impl IntervalUnion {
    /// Validates that the pieces are sorted and pairwise disjoint.
    pub fn new(pieces: Vec<Interval>) -> Result<Self> {
        for (k, w) in pieces.windows(2).enumerate() {
            if !precedes(&w[0], &w[1]) {
                return Err(Error::InvalidArgument(format!("pieces {k} and {} overlap or are out of order", k + 1)));
            }
        }
        Ok(IntervalUnion { pieces })
    }

    pub fn empty() -> Self {
        IntervalUnion { pieces: Vec::new() }
    }

    pub fn unit() -> Self {
        IntervalUnion { pieces: vec![Interval::unit()] }
    }

    pub fn single(piece: Interval) -> Self {
        IntervalUnion { pieces: vec![piece] }
    }

    /// Union of arbitrary (possibly overlapping, unsorted) intervals.
    pub fn from_overlapping(mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(|a, b| cmp_end(a, End::Lo, b, End::Lo));
        let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match out.last_mut() {
                Some(last) if cmp_end(&iv, End::Lo, last, End::Hi) != Ordering::Greater => {
                    if cmp_end(&iv, End::Hi, last, End::Hi) == Ordering::Greater {
                        *last = Interval::from_endpoints(last.lo(), iv.hi()).expect("nonempty merge");
                    }
                }
                _ => out.push(iv),
            }
        }
        IntervalUnion { pieces: out }
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn into_pieces(self) -> Vec<Interval> {
        self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Lebesgue measure as a rational (exact when every piece is exact).
    pub fn total_length(&self) -> Rational {
        self.pieces.iter().fold(Rational::zero(), |acc, p| acc + p.length_rational())
    }

    /// Natural log of the Lebesgue measure.
    pub fn log_total_length(&self) -> f64 {
        log_sum_exp(self.pieces.iter().map(Interval::log_length))
    }

    pub fn is_exact(&self) -> bool {
        self.pieces.iter().all(Interval::is_exact)
    }

    /// Lossy `(lo, hi)` pairs for plotting.
    pub fn to_f64_endpoints(&self) -> Vec<(f64, f64)> {
        self.pieces.iter().map(|p| (p.lo_f64(), p.hi_f64())).collect()
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.pieces.iter().any(|p| p.contains_f64(x))
    }

    pub fn intersect(&self, other: &IntervalUnion) -> IntervalUnion {
        let (a, b) = (&self.pieces, &other.pieces);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            if precedes(&a[i], &b[j]) {
                i += 1;
                continue;
            }
            if precedes(&b[j], &a[i]) {
                j += 1;
                continue;
            }
            if let Some(piece) = intersect_intervals(&a[i], &b[j]) {
                out.push(piece);
            }
            if cmp_end(&a[i], End::Hi, &b[j], End::Hi) == Ordering::Less {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalUnion { pieces: out }
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut all = self.pieces.clone();
        all.extend(other.pieces.iter().cloned());
        Self::from_overlapping(all)
    }

    pub fn is_disjoint_from(&self, other: &IntervalUnion) -> bool {
        self.intersect(other).is_empty()
    }
}

/// Level `n`: `n` open intervals of length `exp(r)` centered at `(2i+1)/(2n)`.
pub fn make_uniform_level(n: u64, r: LogLength) -> Result<IntervalUnion> {
    if n == 0 {
        return Err(Error::InvalidArgument("level index must be positive".into()));
    }
    if !(r.log() < -(n as f64).ln()) {
        return Err(Error::OverlappingLevel { n, log_r: r.log() });
    }
    let half = r.half();
    let den = 2 * n as i64;
    let pieces = (0..n as i64).map(|i| Interval::open(ratio(2 * i + 1, den), half)).collect();
    Ok(IntervalUnion { pieces })
}

/// Same as [`make_uniform_level`] with an exact rational length, as needed by
/// the dyadic constructions.
pub fn make_uniform_level_exact(n: u64, r: &Rational) -> Result<IntervalUnion> {
    if n == 0 {
        return Err(Error::InvalidArgument("level index must be positive".into()));
    }
    if !r.is_positive() {
        return Err(Error::InvalidLength(format!("length must be positive, got {r}")));
    }
    let n_rat = Rational::from_integer(BigInt::from(n));
    if &n_rat * r >= Rational::from_integer(BigInt::from(1)) {
        return Err(Error::OverlappingLevel { n, log_r: ln_rational(r) });
    }
    let half = r / Rational::from_integer(BigInt::from(2));
    let den = 2 * n as i64;
    let pieces =
        (0..n as i64).map(|i| Interval::open_exact(ratio(2 * i + 1, den), half.clone())).collect::<Result<Vec<_>>>()?;
    Ok(IntervalUnion { pieces })
}

/// `a` minus the closure of `b`.
pub fn set_difference_closed(a: &IntervalUnion, b: &IntervalUnion) -> IntervalUnion {
    let bp = &b.pieces;
    let mut start = 0;
    let mut out = Vec::new();
    for piece in &a.pieces {
        while start < bp.len() && precedes(&bp[start], piece) {
            start += 1;
        }
        let mut k = start;
        let mut cursor: Option<Rational> = None;
        let mut touched = false;
        while k < bp.len() && !precedes(piece, &bp[k]) {
            touched = true;
            let lo = cursor.clone().unwrap_or_else(|| piece.lo());
            let b_lo = bp[k].lo();
            if b_lo > lo {
                out.push(Interval::from_endpoints(lo, b_lo).expect("nonempty gap"));
            }
            let b_hi = bp[k].hi();
            cursor = Some(match cursor {
                Some(c) if c > b_hi => c,
                _ => b_hi,
            });
            k += 1;
        }
        if !touched {
            out.push(piece.clone());
            continue;
        }
        let lo = cursor.expect("touched implies cursor");
        let hi = piece.hi();
        if lo < hi {
            out.push(Interval::from_endpoints(lo, hi).expect("nonempty tail"));
        }
    }
    IntervalUnion { pieces: out }
}

/// `k`-th output is the `k`-th input minus every earlier input.
pub fn disjointify(intervals: &[Interval]) -> Vec<IntervalUnion> {
    let mut covered = IntervalUnion::empty();
    let mut out = Vec::with_capacity(intervals.len());
    for iv in intervals {
        let single = IntervalUnion::single(iv.clone());
        out.push(set_difference_closed(&single, &covered));
        covered = covered.union(&single);
    }
    out
}

fn check_levels(p: u64, q: u64) -> Result<(i128, i128)> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidArgument("levels must be positive".into()));
    }
    if p == q {
        return Err(Error::InvalidArgument(format!("center gaps need distinct levels, got p = q = {p}")));
    }
    Ok((p as i128, q as i128))
}

/// `min |(2i+1)q - (2j+1)p|` over all index pairs, optionally skipping zeros.
fn min_numerator_gap(p: i128, q: i128, skip_zero: bool) -> i128 {
    // |(2i+1)/(2p) - (2j+1)/(2q)| = |(2i+1)q - (2j+1)p| / (2pq)
    let mut best = i128::MAX;
    for i in 0..p {
        let x = (2 * i + 1) * q;
        let j0 = (x / p - 1).div_euclid(2);
        for j in (j0 - 1)..=(j0 + 2) {
            if !(0..q).contains(&j) {
                continue;
            }
            let d = (x - (2 * j + 1) * p).abs();
            if d == 0 && skip_zero {
                continue;
            }
            best = best.min(d);
        }
    }
    best
}

/// Minimum distance between a center of level `p` and a center of level `q`.
///
/// Two odd levels always share the center `1/2`, so this is zero whenever
/// `p` and `q` are both odd; see [`min_offcenter_gap`].
pub fn min_center_gap(p: u64, q: u64) -> Result<Rational> {
    let (p, q) = check_levels(p, q)?;
    Ok(Rational::new(BigInt::from(min_numerator_gap(p, q, false)), BigInt::from(2 * p * q)))
}

/// Minimum distance between non-coincident centers of levels `p` and `q`.
/// At least `1/(2pq)`.
pub fn min_offcenter_gap(p: u64, q: u64) -> Result<Rational> {
    let (p, q) = check_levels(p, q)?;
    Ok(Rational::new(BigInt::from(min_numerator_gap(p, q, true)), BigInt::from(2 * p * q)))
}

/// Number of centers shared by levels `p` and `q`.
pub fn shared_centers(p: u64, q: u64) -> u64 {
    let g = num_integer::gcd(p, q);
    if (p / g) % 2 == 1 && (q / g) % 2 == 1 {
        g
    } else {
        0
    }
}

/// How two uniform levels intersect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelOverlap {
    Disjoint,
    /// Only concentric interval pairs meet; carries the number of such pairs.
    ConcentricOnly(u64),
    Overlapping,
}

/// Classifies the intersection of levels `p` and `q` with lengths
/// `exp(log_rp)` and `exp(log_rq)`, decided in the log domain.
pub fn level_overlap(p: u64, log_rp: f64, q: u64, log_rq: f64) -> Result<LevelOverlap> {
    let gap = min_offcenter_gap(p, q)?;
    if !(ln_rational(&gap) > log_add_exp(log_rp, log_rq) - LN_2) {
        return Ok(LevelOverlap::Overlapping);
    }
    Ok(match shared_centers(p, q) {
        0 => LevelOverlap::Disjoint,
        k => LevelOverlap::ConcentricOnly(k),
    })
}

/// Whether levels `p` and `q` are disjoint as sets.
pub fn levels_disjoint(p: u64, log_rp: f64, q: u64, log_rq: f64) -> Result<bool> {
    Ok(level_overlap(p, log_rp, q, log_rq)? == LevelOverlap::Disjoint)
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    center_num: String,
    center_den: String,
    log_half_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    half_length_num: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    half_length_den: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<String>,
    #[serde(default)]
    closed: bool,
}

impl From<&Interval> for IntervalRepr {
    fn from(iv: &Interval) -> Self {
        let (hn, hd, left, right) = match &iv.exact_half {
            Some(h) => (
                Some(h.numer().to_string()),
                Some(h.denom().to_string()),
                Some(to_decimal_string(&iv.lo(), DECIMAL_DIGITS)),
                Some(to_decimal_string(&iv.hi(), DECIMAL_DIGITS)),
            ),
            None => (None, None, None, None),
        };
        IntervalRepr {
            center_num: iv.center.numer().to_string(),
            center_den: iv.center.denom().to_string(),
            log_half_length: iv.log_half.log(),
            half_length_num: hn,
            half_length_den: hd,
            left,
            right,
            closed: iv.closed,
        }
    }
}

impl TryFrom<IntervalRepr> for Interval {
    type Error = Error;

    fn try_from(r: IntervalRepr) -> Result<Self> {
        let center = rational::rational_from_parts(&r.center_num, &r.center_den)?;
        let iv = match (r.half_length_num, r.half_length_den) {
            (Some(n), Some(d)) => Interval::open_exact(center, rational::rational_from_parts(&n, &d)?)?,
            _ => Interval::open(center, LogLength::from_log(r.log_half_length)?),
        };
        Ok(iv.with_closed(r.closed))
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IntervalRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = IntervalRepr::deserialize(d)?;
        Interval::try_from(repr).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct UnionRepr {
    pieces: Vec<Interval>,
}

impl Serialize for IntervalUnion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        UnionRepr { pieces: self.pieces.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntervalUnion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = UnionRepr::deserialize(d)?;
        IntervalUnion::new(repr.pieces).map_err(serde::de::Error::custom)
    }
}
