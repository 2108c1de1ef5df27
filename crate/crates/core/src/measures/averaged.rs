use serde::{Deserialize, Serialize};

use super::{primes_in_window, PrimeWindow, StepMeasure, MASS_TOLERANCE};
use crate::error::{Error, Result};
use crate::interval_sets::{
    level_overlap, make_uniform_level, schedule_radius, IntervalUnion, LevelOverlap, LogLength, RadiusSchedule,
};

/// Convex weights indexed like the primes of a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidArgument(format!("weights must be finite and nonnegative, got {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidArgument(format!("weights sum to {sum}, expected 1")));
        }
        Ok(WeightVector(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("empty weight vector".into()));
        }
        Ok(WeightVector(vec![1.0 / n as f64; n]))
    }

    /// All mass on entry `index`.
    pub fn concentrated(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::InvalidArgument(format!("index {index} out of range for {n} weights")));
        }
        let mut w = vec![0.0; n];
        w[index] = 1.0;
        Ok(WeightVector(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightVector::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Vec<f64> {
        w.0
    }
}

/// One level of an averaged re-distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedComponent {
    pub n: u64,
    pub log_r: LogLength,
    pub weight: f64,
    pub measure: StepMeasure,
}

/// `sum_n p_n R(mu | V_n)` over the primes of a window, kept as a weighted
/// mixture. Odd levels share the interval centered at `1/2`, so the
/// components are not always disjoint and the mixture is the exact object.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedMeasure {
    pub window: PrimeWindow,
    pub components: Vec<AveragedComponent>,
}

impl AveragedMeasure {
    pub fn total_mass(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.measure.total_mass()).sum()
    }

    /// Total number of pieces over all components.
    pub fn piece_count(&self) -> usize {
        self.components.iter().map(|c| c.measure.len()).sum()
    }

    /// Union of the component supports.
    pub fn support(&self) -> IntervalUnion {
        let all = self.components.iter().flat_map(|c| c.measure.pieces().iter().cloned()).collect();
        IntervalUnion::from_overlapping(all)
    }

    /// Single step measure; fails when two components overlap.
    pub fn to_step_measure(&self) -> Result<StepMeasure> {
        let parts: Vec<(f64, &StepMeasure)> = self.components.iter().map(|c| (c.weight, &c.measure)).collect();
        StepMeasure::combine(&parts)
    }
}

/// Averaged re-distribution of `mu` over the prime levels of window `m`.
///
/// Levels must meet at most in concentric pairs; any other overlap is a
/// disjointness violation. Zero-weight levels are dropped from the mixture
/// but still need positive mass.
pub fn averaged_redistribute(
    mu: &StepMeasure,
    m: u64,
    s: &RadiusSchedule,
    w: &WeightVector,
) -> Result<AveragedMeasure> {
    let window = primes_in_window(m)?;
    if w.len() != window.count() {
        return Err(Error::InvalidArgument(format!("{} weights for a window of {} primes", w.len(), window.count())));
    }
    let radii = window.primes.iter().map(|&n| schedule_radius(s, n)).collect::<Result<Vec<_>>>()?;
    for (i, (&p, rp)) in window.primes.iter().zip(&radii).enumerate() {
        for (&q, rq) in window.primes.iter().zip(&radii).skip(i + 1) {
            if level_overlap(p, rp.log(), q, rq.log())? == LevelOverlap::Overlapping {
                return Err(Error::DisjointnessViolation { p, q });
            }
        }
    }
    let mut components = Vec::new();
    for ((&n, &r), &weight) in window.primes.iter().zip(&radii).zip(w.as_slice()) {
        let level = make_uniform_level(n, r)?;
        let measure = mu.redistribute(&level).map_err(|_| Error::ZeroMass(format!("mu(V_{n}) = 0")))?;
        if weight > 0.0 {
            components.push(AveragedComponent { n, log_r: r, weight, measure });
        }
    }
    Ok(AveragedMeasure { window, components })
}
