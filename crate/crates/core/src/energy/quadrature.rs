//! Independent quadrature for `-log|x - y|` over products of intervals.
//!
//! Used only to cross-check the closed forms. Rectangles touching the
//! diagonal are split at every endpoint; diagonal squares go through the
//! Duffy map `u = s t`, off-diagonal rectangles through `u = c - x`,
//! `v = y - c`. Both are integrated with tensor Gauss-Legendre rules on
//! panels graded geometrically toward the singular corner, refined until
//! two successive rules agree.

use rayon::prelude::*;

use super::kernel::gauss_legendre;
use crate::error::{Error, Result};
use crate::measures::StepMeasure;

const MIN_LENGTH: f64 = 1e-6;
const GRADING: f64 = 0.15;
const TOLERANCE: f64 = 1e-11;

/// `(node, weight)` pairs on `[lo, hi]`, graded toward `lo` with `levels`
/// geometric panels, `n` points each.
fn graded_rule(lo: f64, hi: f64, levels: usize, n: usize) -> Vec<(f64, f64)> {
    let w = hi - lo;
    let mut cuts = vec![lo];
    for k in (1..=levels).rev() {
        cuts.push(lo + w * GRADING.powi(k as i32));
    }
    cuts.push(hi);
    let gl = gauss_legendre(n);
    let mut out = Vec::with_capacity((levels + 1) * n);
    for c in cuts.windows(2) {
        let (half, mid) = (0.5 * (c[1] - c[0]), 0.5 * (c[1] + c[0]));
        out.extend(gl.iter().map(|&(x, wt)| (mid + half * x, wt * half)));
    }
    out
}

/// Mean of `-log|x - y|` over `[0, l]^2`.
fn diagonal_mean(l: f64, levels: usize, n: usize) -> f64 {
    // (2 / l^2) int_0^l int_0^1 -log(s t) s dt ds
    let s_rule = graded_rule(0.0, l, levels, n);
    let t_rule = graded_rule(0.0, 1.0, levels, n);
    let mut total = 0.0;
    for &(s, ws) in &s_rule {
        let inner: f64 = t_rule.iter().map(|&(t, wt)| -wt * (s * t).ln()).sum();
        total += ws * s * inner;
    }
    2.0 * total / (l * l)
}

/// Mean of `-log(y - x)` over `x` in a piece of length `lx` ending at 0 and
/// `y` in `[gap, gap + ly]`.
fn offdiagonal_mean(lx: f64, ly: f64, gap: f64, levels: usize, n: usize) -> f64 {
    let levels = if gap >= lx.max(ly) { 0 } else { levels };
    let u_rule = graded_rule(gap, gap + lx, levels, n);
    let v_rule = graded_rule(0.0, ly, levels, n);
    let mut total = 0.0;
    for &(u, wu) in &u_rule {
        let inner: f64 = v_rule.iter().map(|&(v, wv)| -wv * (u + v).ln()).sum();
        total += wu * inner;
    }
    total / (lx * ly)
}

fn adaptive(f: impl Fn(usize, usize) -> f64) -> Result<f64> {
    let schedule = [(6, 10), (10, 14), (14, 20), (20, 24), (28, 32), (36, 40)];
    let mut prev = f(schedule[0].0, schedule[0].1);
    for &(levels, n) in &schedule[1..] {
        let next = f(levels, n);
        if (next - prev).abs() <= TOLERANCE * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::OracleFailure(format!("no convergence, last value {prev}")))
}

/// Mean of `-log|x - y|` over `[a, b] x [c, d]`.
pub fn quadrature_rect(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    if !(b - a >= MIN_LENGTH && d - c >= MIN_LENGTH) {
        return Err(Error::InvalidArgument(format!(
            "quadrature oracle needs lengths >= {MIN_LENGTH}, got {} and {}",
            b - a,
            d - c
        )));
    }
    if b <= c {
        return adaptive(|l, n| offdiagonal_mean(b - a, d - c, c - b, l, n));
    }
    if d <= a {
        return adaptive(|l, n| offdiagonal_mean(d - c, b - a, a - d, l, n));
    }
    if a == c && b == d {
        return adaptive(|l, n| diagonal_mean(b - a, l, n));
    }
    // Overlap: split both intervals at every endpoint.
    let mut cuts = vec![a, b, c, d];
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let parts = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
        cuts.windows(2).filter(|w| w[0] >= lo && w[1] <= hi).map(|w| (w[0], w[1])).collect()
    };
    let (xs, ys) = (parts(a, b), parts(c, d));
    let mut total = 0.0;
    for &(x0, x1) in &xs {
        for &(y0, y1) in &ys {
            let m = if (x0, x1) == (y0, y1) {
                adaptive(|l, n| diagonal_mean(x1 - x0, l, n))?
            } else if x1 <= y0 {
                adaptive(|l, n| offdiagonal_mean(x1 - x0, y1 - y0, y0 - x1, l, n))?
            } else {
                adaptive(|l, n| offdiagonal_mean(y1 - y0, x1 - x0, x0 - y1, l, n))?
            };
            total += m * (x1 - x0) * (y1 - y0);
        }
    }
    Ok(total / ((b - a) * (d - c)))
}

/// `I(mu, nu)` by quadrature. Every piece must be at least `1e-6` long.
pub fn quadrature_oracle(mu: &StepMeasure, nu: &StepMeasure) -> Result<f64> {
    let a: Vec<(f64, f64, f64)> =
        mu.pieces().iter().zip(mu.piece_masses()).map(|(p, w)| (p.lo_f64(), p.hi_f64(), w)).collect();
    let b: Vec<(f64, f64, f64)> =
        nu.pieces().iter().zip(nu.piece_masses()).map(|(p, w)| (p.lo_f64(), p.hi_f64(), w)).collect();
    let rows: Vec<f64> = a
        .par_iter()
        .map(|&(x0, x1, wx)| {
            let mut s = 0.0;
            for &(y0, y1, wy) in &b {
                if wx > 0.0 && wy > 0.0 {
                    s += wx * wy * quadrature_rect(x0, x1, y0, y1)?;
                }
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(rows.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_sets::IntervalUnion;

    #[test]
    fn unit_square() {
        let v = quadrature_rect(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!((v - 1.5).abs() < 1e-8, "{v}");
        let mu = StepMeasure::uniform(IntervalUnion::unit()).unwrap();
        assert!((quadrature_oracle(&mu, &mu).unwrap() - 1.5).abs() < 1e-8);
    }

    #[test]
    fn half_interval_scaling() {
        let v = quadrature_rect(0.0, 0.5, 0.0, 0.5).unwrap();
        assert!((v - (2f64.ln() + 1.5)).abs() < 1e-8);
    }

    #[test]
    fn touching_and_overlapping() {
        // [0, 1] split in two halves reproduces 1.5.
        let ll = quadrature_rect(0.0, 0.5, 0.0, 0.5).unwrap();
        let lr = quadrature_rect(0.0, 0.5, 0.5, 1.0).unwrap();
        assert!((0.5 * ll + 0.5 * lr - 1.5).abs() < 1e-8);
        // Overlapping rectangles: [0,1] against [0.25,0.75] by symmetry of pieces.
        let o = quadrature_rect(0.0, 1.0, 0.25, 0.75).unwrap();
        let parts = 0.25 * quadrature_rect(0.0, 0.25, 0.25, 0.75).unwrap()
            + 0.5 * quadrature_rect(0.25, 0.75, 0.25, 0.75).unwrap()
            + 0.25 * quadrature_rect(0.75, 1.0, 0.25, 0.75).unwrap();
        assert!((o - parts).abs() < 1e-10);
    }

    #[test]
    fn rejects_tiny_pieces() {
        assert!(quadrature_rect(0.0, 1e-7, 0.5, 0.6).is_err());
    }
}
