//! Mutual energy of two uniform interval measures.

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval_sets::rational::{ln_rational, to_f64};
use crate::interval_sets::{log_add_exp, Interval};

/// `G(t) = t^2/2 log|t| - 3/4 t^2`, with `G'' = log|t|`.
pub fn kernel_antiderivative(t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    t * t * (0.5 * t.abs().ln() - 0.75)
}

/// `t log|t| - t`, the first antiderivative of `log|t|`.
pub fn log_antiderivative(t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    t * (t.abs().ln() - 1.0)
}

/// `int_a^b int_c^d log|x - y| dy dx`.
pub fn log_rect_integral(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let g = kernel_antiderivative;
    g(b - c) - g(a - c) - g(b - d) + g(a - d)
}

/// How pairwise interval interactions are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EvalPolicy {
    Exact,
    PointCharge,
    /// Point charges when `rho` is below the threshold, exact otherwise.
    Auto {
        threshold: f64,
    },
}

pub const DEFAULT_AUTO_THRESHOLD: f64 = 1e-8;

impl Default for EvalPolicy {
    fn default() -> Self {
        EvalPolicy::Auto { threshold: DEFAULT_AUTO_THRESHOLD }
    }
}

impl EvalPolicy {
    pub fn auto(threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidArgument(format!("auto threshold must lie in (0, 1), got {threshold}")));
        }
        Ok(EvalPolicy::Auto { threshold })
    }
}

impl fmt::Display for EvalPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalPolicy::Exact => write!(f, "exact"),
            EvalPolicy::PointCharge => write!(f, "point_charge"),
            EvalPolicy::Auto { threshold } => write!(f, "auto({threshold:e})"),
        }
    }
}

/// Two intervals by half-lengths and center distance, all in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub log_ha: f64,
    pub log_hb: f64,
    /// Center distance; `-inf` for concentric intervals.
    pub log_d: f64,
}

/// Center distances below this are recomputed from the exact centers.
const EXACT_DISTANCE_BELOW: f64 = 1e-4;

impl PairGeometry {
    pub fn of(a: &Interval, b: &Interval) -> Self {
        let d = (a.center_f64() - b.center_f64()).abs();
        let log_d = if d >= EXACT_DISTANCE_BELOW {
            d.ln()
        } else {
            let q = a.center() - b.center();
            if q == num_traits::Zero::zero() {
                f64::NEG_INFINITY
            } else {
                ln_rational(&num_traits::Signed::abs(&q))
            }
        };
        PairGeometry { log_ha: a.log_half_length().log(), log_hb: b.log_half_length().log(), log_d }
    }

    /// `rho = (h_a + h_b) / D` in log form.
    pub fn log_rho(&self) -> f64 {
        log_add_exp(self.log_ha, self.log_hb) - self.log_d
    }
}

/// Distance of `q` from a center, as a double (for callers that already
/// hold the exact difference).
pub fn log_distance(q: &crate::interval_sets::Rational) -> f64 {
    if *q == num_traits::Zero::zero() {
        return f64::NEG_INFINITY;
    }
    let v = to_f64(q).abs();
    if v >= EXACT_DISTANCE_BELOW {
        v.ln()
    } else {
        ln_rational(&num_traits::Signed::abs(q))
    }
}

/// Certified point-charge error `min(2, -log(1 - rho))`.
pub fn point_charge_error(log_rho: f64) -> f64 {
    let rho = log_rho.exp();
    if rho >= 1.0 {
        return 2.0;
    }
    (-(-rho).ln_1p()).min(2.0)
}

/// `(value, certified_error)` for the mutual energy of the uniform
/// probability measures on two intervals.
pub fn pair_energy(g: PairGeometry, policy: EvalPolicy) -> Result<(f64, f64)> {
    let log_rho = g.log_rho();
    let point = match policy {
        EvalPolicy::Exact => false,
        EvalPolicy::PointCharge => true,
        EvalPolicy::Auto { threshold } => log_rho < threshold.ln(),
    };
    if !point {
        return Ok((exact_pair_energy(g), 0.0));
    }
    let rho = log_rho.exp();
    if (rho - 1.0).abs() <= 1e-12 {
        return Err(Error::Geometry { rho });
    }
    if rho > 1.0 {
        return Err(Error::Policy(format!("point charges need disjoint intervals, rho = {rho}")));
    }
    Ok((-g.log_d, point_charge_error(log_rho)))
}

/// Self energy `-log L + 3/2` of the uniform measure on an interval.
pub fn self_energy_from_log_half(log_half: f64) -> f64 {
    -(log_half + LN_2) + 1.5
}

const TAYLOR_RHO: f64 = 0.5;
const COMPARABLE_RATIO: f64 = 1e-3;

/// Exact mutual energy, stable for every relative size and distance.
pub fn exact_pair_energy(g: PairGeometry) -> f64 {
    let (lha, lhb) = if g.log_ha <= g.log_hb { (g.log_ha, g.log_hb) } else { (g.log_hb, g.log_ha) };
    if g.log_d == f64::NEG_INFINITY && lha == lhb {
        return self_energy_from_log_half(lha);
    }
    let log_rho = log_add_exp(lha, lhb) - g.log_d;
    if log_rho <= TAYLOR_RHO.ln() {
        let alpha = (lha - g.log_d).exp();
        let beta = (lhb - g.log_d).exp();
        return -g.log_d + separated_gap(alpha, beta);
    }
    // Unit scale: the largest of the two half-lengths and the distance is 1.
    let log_s = lhb.max(g.log_d);
    let small = (lha - log_s).exp();
    let big = (lhb - log_s).exp();
    let delta = (g.log_d - log_s).exp();
    if small >= COMPARABLE_RATIO {
        let s = log_rect_integral(-big, big, delta - small, delta + small);
        return -log_s - s / (4.0 * big * small);
    }
    -log_s - average_log_potential(big, delta, small)
}

/// `sum_j E[(V - U)^{2j}] / (2j)` for `U`, `V` uniform on `[-alpha, alpha]`
/// and `[-beta, beta]`; the series for `-E log|1 + V - U|`.
pub fn separated_gap(alpha: f64, beta: f64) -> f64 {
    const MAX_TERMS: usize = 120;
    let (a2, b2) = (alpha * alpha, beta * beta);
    let mut ap = [0.0f64; MAX_TERMS + 1];
    let mut bp = [0.0f64; MAX_TERMS + 1];
    ap[0] = 1.0;
    bp[0] = 1.0;
    let mut total = 0.0;
    for j in 1..=MAX_TERMS {
        ap[j] = ap[j - 1] * a2;
        bp[j] = bp[j - 1] * b2;
        let mut moment = 0.0;
        let mut binom = 1.0;
        let n = 2 * j;
        for i in 0..=j {
            moment += binom * ap[i] / (2 * i + 1) as f64 * bp[j - i] / (2 * (j - i) + 1) as f64;
            if i < j {
                let k = 2 * i;
                binom *= ((n - k) * (n - k - 1)) as f64 / ((k + 1) * (k + 2)) as f64;
            }
        }
        let term = moment / n as f64;
        total += term;
        if term <= 1e-17 * total || total == 0.0 {
            break;
        }
    }
    total
}

/// Average over `y` uniform on `[delta - small, delta + small]` of the
/// average of `log|y - x|` over `x` uniform on `[-big, big]`.
fn average_log_potential(big: f64, delta: f64, small: f64) -> f64 {
    let f = |y: f64| (log_antiderivative(y + big) - log_antiderivative(y - big)) / (2.0 * big);
    if small == 0.0 {
        return f(delta);
    }
    let lo = delta - small;
    let hi = delta + small;
    graded_integral(&f, lo, hi, &[-big, big], 60) / (hi - lo)
}

/// Composite Gauss-Legendre integral refined geometrically toward the
/// points where `f` has a logarithmic singularity in its derivative.
pub(crate) fn graded_integral(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, sing: &[f64], depth: u32) -> f64 {
    let w = hi - lo;
    if w <= 0.0 {
        return 0.0;
    }
    if let Some(&s) = sing.iter().find(|&&s| s > lo && s < hi) {
        return graded_integral(f, lo, s, sing, depth) + graded_integral(f, s, hi, sing, depth);
    }
    let dist = sing.iter().map(|&s| (s - lo).abs().min((s - hi).abs())).fold(f64::INFINITY, f64::min);
    if dist >= w || depth == 0 {
        return gauss_legendre_integral(f, lo, hi, 16);
    }
    let mid = 0.5 * (lo + hi);
    graded_integral(f, lo, mid, sing, depth - 1) + graded_integral(f, mid, hi, sing, depth - 1)
}

pub(crate) fn gauss_legendre_integral(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    gauss_legendre(n).iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

const MAX_NODES: usize = 64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    static CACHE: [OnceLock<Vec<(f64, f64)>>; MAX_NODES + 1] = [const { OnceLock::new() }; MAX_NODES + 1];
    assert!((1..=MAX_NODES).contains(&n), "unsupported Gauss-Legendre order {n}");
    CACHE[n].get_or_init(|| {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 1 { x } else { p1 };
                let pm1 = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        out.reverse();
        out
    })
}
