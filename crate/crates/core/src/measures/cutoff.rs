use serde::{Deserialize, Serialize};

use super::{ArcsineReference, StepMeasure};
use crate::error::{Error, Result};
use crate::interval_sets::rational::{from_f64, Rational};
use crate::interval_sets::{Interval, IntervalUnion};

/// Base density of a cut-off family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutoffBase {
    Arcsine(ArcsineReference),
    Step(StepMeasure),
}

/// Densities that agree with the base away from the piece endpoints and
/// ramp linearly to zero over a distance `delta` at each endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffFamily {
    delta: f64,
    base: CutoffBase,
}

impl CutoffFamily {
    pub fn new(delta: f64, base: CutoffBase) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidCutoff { delta, limit: 0.5 });
        }
        let log_shortest = match &base {
            CutoffBase::Arcsine(r) => r.length().ln(),
            CutoffBase::Step(mu) => mu.pieces().iter().map(Interval::log_length).fold(f64::INFINITY, f64::min),
        };
        let log_limit = log_shortest - std::f64::consts::LN_2;
        if !(delta.ln() < log_limit) {
            return Err(Error::InvalidCutoff { delta, limit: log_limit.exp() });
        }
        Ok(CutoffFamily { delta, base })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn base(&self) -> &CutoffBase {
        &self.base
    }

    /// The continuous cut-off density at `x`.
    pub fn value(&self, x: f64) -> f64 {
        let d = self.delta;
        match &self.base {
            CutoffBase::Arcsine(r) => ramp(x, r.a, r.b, d, r.density(r.a + d), r.density(r.b - d), |y| r.density(y)),
            CutoffBase::Step(mu) => {
                for (p, ld) in mu.pieces().iter().zip(mu.log_densities()) {
                    if p.contains_f64(x) {
                        let f = ld.exp();
                        return ramp(x, p.lo_f64(), p.hi_f64(), d, f, f, |_| f);
                    }
                }
                0.0
            }
        }
    }

    /// Step approximation with `resolution` pieces on each ramp, before
    /// normalization. Its mass is the normalizer `Z_delta`.
    pub fn raw_step(&self, resolution: usize) -> Result<StepMeasure> {
        if resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be positive".into()));
        }
        let d = from_f64(self.delta)?;
        let mut pieces = Vec::new();
        let mut dens = Vec::new();
        match &self.base {
            CutoffBase::Arcsine(r) => {
                let (a, b) = (from_f64(r.a)?, from_f64(r.b)?);
                push_ramp(&mut pieces, &mut dens, &a, &d, resolution, r.density(r.a + self.delta), true)?;
                let (t0, t1) = (r.theta(r.a + self.delta), r.theta(r.b - self.delta));
                let mut cuts = vec![&a + &d];
                for k in 1..resolution {
                    cuts.push(from_f64(r.point_at(t0 + (t1 - t0) * k as f64 / resolution as f64))?);
                }
                cuts.push(&b - &d);
                for w in cuts.windows(2) {
                    let piece = Interval::from_endpoints(w[0].clone(), w[1].clone())?;
                    let mid = 0.5 * (piece.lo_f64() + piece.hi_f64());
                    pieces.push(piece);
                    dens.push(r.density(mid));
                }
                push_ramp(&mut pieces, &mut dens, &b, &d, resolution, r.density(r.b - self.delta), false)?;
            }
            CutoffBase::Step(mu) => {
                for (p, ld) in mu.pieces().iter().zip(mu.log_densities()) {
                    let f = ld.exp();
                    let (lo, hi) = (p.lo(), p.hi());
                    push_ramp(&mut pieces, &mut dens, &lo, &d, resolution, f, true)?;
                    pieces.push(Interval::from_endpoints(&lo + &d, &hi - &d)?);
                    dens.push(f);
                    push_ramp(&mut pieces, &mut dens, &hi, &d, resolution, f, false)?;
                }
            }
        }
        StepMeasure::new(IntervalUnion::new(pieces)?, dens)
    }

    /// `Z_delta` at the given resolution.
    pub fn normalizer(&self, resolution: usize) -> Result<f64> {
        Ok(self.raw_step(resolution)?.total_mass())
    }
}

fn ramp(x: f64, a: f64, b: f64, d: f64, fa: f64, fb: f64, inner: impl Fn(f64) -> f64) -> f64 {
    if x <= a || x >= b {
        0.0
    } else if x < a + d {
        (x - a) / d * fa
    } else if x > b - d {
        (b - x) / d * fb
    } else {
        inner(x)
    }
}

/// Pushes `resolution` midpoint-valued pieces of a linear ramp. The ramp
/// rises from `edge` when `rising`, and falls to `edge` otherwise.
fn push_ramp(
    pieces: &mut Vec<Interval>,
    dens: &mut Vec<f64>,
    edge: &Rational,
    d: &Rational,
    resolution: usize,
    top: f64,
    rising: bool,
) -> Result<()> {
    let res = Rational::from_integer(resolution.into());
    let start = if rising { edge.clone() } else { edge - d };
    for k in 0..resolution {
        let kr = Rational::from_integer(k.into());
        let lo = &start + d * &kr / &res;
        let hi = &start + d * Rational::from_integer((k + 1).into()) / &res;
        let t = (k as f64 + 0.5) / resolution as f64;
        pieces.push(Interval::from_endpoints(lo, hi)?);
        dens.push(if rising { t } else { 1.0 - t } * top);
    }
    Ok(())
}

/// Normalized step approximation of the cut-off density.
pub fn cutoff_step_density(c: &CutoffFamily, resolution: usize) -> Result<StepMeasure> {
    c.raw_step(resolution)?.normalized()
}
