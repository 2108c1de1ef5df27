use serde::{Deserialize, Serialize};

use super::kernel::{exact_pair_energy, graded_integral, kernel_antiderivative, PairGeometry};
use super::self_energy_const;
use crate::error::{Error, Result};
use crate::interval_sets::rational::to_f64;
use crate::interval_sets::Interval;
use crate::measures::StepMeasure;

/// Cap `C` of the kernel `min(-log|x - y|, C)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TruncationLevel(f64);

impl TruncationLevel {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("truncation level must be positive and finite, got {c}")));
        }
        Ok(TruncationLevel(c))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for TruncationLevel {
    type Error = Error;

    fn try_from(c: f64) -> Result<Self> {
        TruncationLevel::new(c)
    }
}

impl From<TruncationLevel> for f64 {
    fn from(c: TruncationLevel) -> f64 {
        c.0
    }
}

/// Second antiderivative of `(-log|t| - C)_+`, vanishing with its derivative
/// for `|t| >= eps`. Valid on either side of 0.
fn excess_p2(t: f64, c: f64, eps: f64) -> f64 {
    let a = t.abs();
    if a >= eps {
        return 0.0;
    }
    -kernel_antiderivative(t) - 0.5 * c * t * t - eps * a + 0.25 * eps * eps
}

/// First antiderivative of `(-log|t| - C)_+`, odd, equal to `±eps` for `|t| >= eps`.
fn excess_p1(t: f64, c: f64, eps: f64) -> f64 {
    let a = t.abs();
    let v = if a >= eps {
        eps
    } else if a == 0.0 {
        0.0
    } else {
        a * (1.0 - c - a.ln())
    };
    v.copysign(t)
}

/// Mean of `(-log|x - y| - C)_+` over `x` uniform on `[-lx, 0]` and `y`
/// uniform on `[gap, gap + ly]`.
fn pair_excess(lx: f64, ly: f64, gap: f64, c: f64, eps: f64) -> f64 {
    if gap >= eps {
        return 0.0;
    }
    let (big, small) = if lx >= ly { (lx, ly) } else { (ly, lx) };
    let v = if small >= 1e-3 * eps {
        let p = |t: f64| excess_p2(t, c, eps);
        let s = p(-gap) - p(-lx - gap) - p(-gap - ly) + p(-lx - gap - ly);
        s / (lx * ly)
    } else {
        // Big piece on [-big, 0], small one on [gap, gap + small]; the inner
        // integral over the big piece is exact.
        let h = |y: f64| (excess_p1(y + big, c, eps) - excess_p1(y, c, eps)) / big;
        if small == 0.0 {
            h(gap)
        } else {
            let sing = [0.0, -big, eps, eps - big, -eps, -eps - big];
            graded_integral(&h, gap, gap + small, &sing, 60) / small
        }
    };
    v.max(0.0)
}

/// `int int min(-log|x - y|, C) dmu dmu` for a step measure.
pub fn truncated_energy(mu: &StepMeasure, c: TruncationLevel) -> Result<f64> {
    let c = c.value();
    let eps = (-c).exp();
    let log_eps = -c;
    let pieces: Vec<(&Interval, f64)> = mu.pieces().iter().zip(mu.piece_masses()).filter(|(_, w)| *w > 0.0).collect();
    let mut total = 0.0;
    for &(p, w) in &pieces {
        let log_len = p.log_length();
        let t = if log_len <= log_eps {
            c
        } else {
            let r = (log_eps - log_len).exp();
            self_energy_const(p) - (2.0 * r - 0.5 * r * r)
        };
        total += w * w * t;
    }
    let mut cross = 0.0;
    for (i, &(pi, wi)) in pieces.iter().enumerate() {
        let mut row = 0.0;
        for &(pj, wj) in &pieces[i + 1..] {
            let m = exact_pair_energy(PairGeometry::of(pi, pj));
            let gap_f = pj.lo_f64() - pi.hi_f64();
            let t = if gap_f > eps + 1e-12 {
                m
            } else {
                let gap = to_f64(&(pj.lo() - pi.hi())).max(0.0);
                let (lx, ly) = (pi.log_length().exp(), pj.log_length().exp());
                if gap + lx + ly <= eps {
                    c
                } else {
                    m - pair_excess(lx, ly, gap, c, eps)
                }
            };
            row += wj * t;
        }
        cross += wi * row;
    }
    Ok(total + 2.0 * cross)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{energy, EvalPolicy};
    use crate::interval_sets::rational::from_f64;
    use crate::interval_sets::IntervalUnion;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::from_endpoints(from_f64(lo).unwrap(), from_f64(hi).unwrap()).unwrap()
    }

    fn lv(c: f64) -> TruncationLevel {
        TruncationLevel::new(c).unwrap()
    }

    #[test]
    fn large_cap_recovers_energy() {
        let mu = StepMeasure::uniform(IntervalUnion::unit()).unwrap();
        assert!((truncated_energy(&mu, lv(40.0)).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn small_cap_tends_to_zero() {
        let mu = StepMeasure::uniform(IntervalUnion::unit()).unwrap();
        assert!(truncated_energy(&mu, lv(1e-9)).unwrap().abs() < 1e-8);
        let two = StepMeasure::uniform(IntervalUnion::new(vec![iv(0.0, 0.2), iv(0.6, 1.0)]).unwrap()).unwrap();
        assert!(truncated_energy(&two, lv(1e-9)).unwrap().abs() < 1e-7);
    }

    #[test]
    fn split_pieces_match_whole() {
        // Touching pieces exercise the cross correction.
        let whole = StepMeasure::uniform(IntervalUnion::unit()).unwrap();
        let cuts = [0.0, 0.3, 0.31, 0.7, 1.0];
        let split =
            StepMeasure::lebesgue(IntervalUnion::new(cuts.windows(2).map(|w| iv(w[0], w[1])).collect()).unwrap());
        for c in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let a = truncated_energy(&whole, lv(c)).unwrap();
            let b = truncated_energy(&split, lv(c)).unwrap();
            assert!((a - b).abs() < 1e-12, "C = {c}: {a} {b}");
        }
    }

    #[test]
    fn tiny_neighbour_matches_refined_split() {
        // A piece far shorter than eps next to a long one.
        let c: f64 = 3.0;
        let eps = (-c).exp();
        let a = StepMeasure::lebesgue(IntervalUnion::new(vec![iv(0.0, 0.5), iv(0.5, 0.5 + 1e-7 * eps)]).unwrap());
        let mu = a.normalized().unwrap();
        let t = truncated_energy(&mu, lv(c)).unwrap();
        let e = energy(&mu, EvalPolicy::Exact).unwrap().total();
        assert!(t <= e);
        let whole = StepMeasure::uniform(IntervalUnion::single(iv(0.0, 0.5 + 1e-7 * eps))).unwrap();
        let tw = truncated_energy(&whole, lv(c)).unwrap();
        assert!((t - tw).abs() < 1e-9, "{t} {tw}");
    }

    #[test]
    fn monotone_and_bounded() {
        let mu = StepMeasure::new(
            IntervalUnion::new(vec![iv(0.0, 0.1), iv(0.1, 0.15), iv(0.4, 0.41), iv(0.9, 1.0)]).unwrap(),
            vec![1.0, 3.0, 20.0, 2.0],
        )
        .unwrap()
        .normalized()
        .unwrap();
        let e = energy(&mu, EvalPolicy::Exact).unwrap().total();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=6 {
            let t = truncated_energy(&mu, lv((1 << k) as f64)).unwrap();
            assert!(t >= prev && t <= e + 1e-12);
            prev = t;
        }
    }
}
