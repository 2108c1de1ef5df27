//! Piecewise-constant measures on interval unions and the operators acting on
//! them.

mod arcsine;
mod averaged;
mod cutoff;
mod primes;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use arcsine::{arcsine_reference, ArcsineReference};
pub use averaged::{averaged_redistribute, AveragedComponent, AveragedMeasure, WeightVector};
pub use cutoff::{cutoff_step_density, CutoffBase, CutoffFamily};
pub use primes::{primes_in_window, PrimeWindow};

use crate::error::{Error, Result};
use crate::interval_sets::{cmp_hi, cmp_lo, intersect_intervals, log_sum_exp, precedes, Interval, IntervalUnion};

/// Tolerance on the total mass of a probability measure.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A measure with constant density on each piece of an interval union.
///
/// Densities are stored as natural logs; `-inf` means zero density. The
/// normalized measure of a union of tiny intervals has densities far above
/// `f64::MAX`, which the log form represents without trouble.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMeasure {
    support: IntervalUnion,
    log_density: Vec<f64>,
}

impl StepMeasure {
    pub fn new(support: IntervalUnion, densities: Vec<f64>) -> Result<Self> {
        if let Some(d) = densities.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(Error::InvalidArgument(format!("density must be finite and nonnegative, got {d}")));
        }
        Self::from_log_densities(support, densities.iter().map(|d| d.ln()).collect())
    }

    pub fn from_log_densities(support: IntervalUnion, log_density: Vec<f64>) -> Result<Self> {
        if support.len() != log_density.len() {
            return Err(Error::InvalidArgument(format!(
                "{} pieces but {} densities",
                support.len(),
                log_density.len()
            )));
        }
        if let Some(d) = log_density.iter().find(|d| d.is_nan() || **d == f64::INFINITY) {
            return Err(Error::InvalidArgument(format!("invalid log density {d}")));
        }
        Ok(StepMeasure { support, log_density })
    }

    /// Normalized Lebesgue measure on `support`.
    pub fn uniform(support: IntervalUnion) -> Result<Self> {
        let log_total = support.log_total_length();
        if log_total == f64::NEG_INFINITY {
            return Err(Error::ZeroMass("uniform measure on an empty set".into()));
        }
        let n = support.len();
        Self::from_log_densities(support, vec![-log_total; n])
    }

    /// Lebesgue measure restricted to `support` (density 1).
    pub fn lebesgue(support: IntervalUnion) -> Self {
        let n = support.len();
        StepMeasure { support, log_density: vec![0.0; n] }
    }

    pub fn support(&self) -> &IntervalUnion {
        &self.support
    }

    pub fn pieces(&self) -> &[Interval] {
        self.support.pieces()
    }

    pub fn len(&self) -> usize {
        self.log_density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_density.is_empty()
    }

    pub fn log_densities(&self) -> &[f64] {
        &self.log_density
    }

    /// Densities as doubles; may be `inf` on extremely short pieces.
    pub fn densities(&self) -> Vec<f64> {
        self.log_density.iter().map(|d| d.exp()).collect()
    }

    pub fn log_piece_mass(&self, i: usize) -> f64 {
        let d = self.log_density[i];
        if d == f64::NEG_INFINITY {
            return d;
        }
        d + self.support.pieces()[i].log_length()
    }

    pub fn log_piece_masses(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.log_piece_mass(i)).collect()
    }

    pub fn piece_masses(&self) -> Vec<f64> {
        self.log_piece_masses().into_iter().map(f64::exp).collect()
    }

    pub fn log_total_mass(&self) -> f64 {
        log_sum_exp(self.log_piece_masses())
    }

    pub fn total_mass(&self) -> f64 {
        self.log_total_mass().exp()
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= MASS_TOLERANCE
    }

    /// Scales the measure to total mass 1.
    pub fn normalized(&self) -> Result<Self> {
        let log_total = self.log_total_mass();
        if log_total == f64::NEG_INFINITY {
            return Err(Error::ZeroMass("cannot normalize a zero measure".into()));
        }
        Ok(self.scaled_log(-log_total))
    }

    /// Multiplies every density by `exp(log_factor)`.
    pub fn scaled_log(&self, log_factor: f64) -> Self {
        StepMeasure {
            support: self.support.clone(),
            log_density: self.log_density.iter().map(|d| d + log_factor).collect(),
        }
    }

    /// Restriction to `y`, with zero-density pieces dropped.
    pub fn restrict(&self, y: &IntervalUnion) -> Self {
        let a = self.support.pieces();
        let b = y.pieces();
        let (mut i, mut j) = (0, 0);
        let mut pieces = Vec::new();
        let mut dens = Vec::new();
        while i < a.len() && j < b.len() {
            if precedes(&a[i], &b[j]) {
                i += 1;
                continue;
            }
            if precedes(&b[j], &a[i]) {
                j += 1;
                continue;
            }
            if self.log_density[i] > f64::NEG_INFINITY {
                if let Some(p) = intersect_intervals(&a[i], &b[j]) {
                    pieces.push(p);
                    dens.push(self.log_density[i]);
                }
            }
            if cmp_hi(&a[i], &b[j]) == Ordering::Less {
                i += 1;
            } else {
                j += 1;
            }
        }
        StepMeasure { support: IntervalUnion::new(pieces).expect("restriction keeps order"), log_density: dens }
    }

    /// `log mu(y)`.
    pub fn log_mass_of(&self, y: &IntervalUnion) -> f64 {
        self.restrict(y).log_total_mass()
    }

    /// Conditional measure `mu|_Y / mu(Y)`.
    pub fn redistribute(&self, y: &IntervalUnion) -> Result<Self> {
        let restricted = self.restrict(y);
        if restricted.support == self.support && self.is_probability() {
            return Ok(self.clone());
        }
        let log_mass = restricted.log_total_mass();
        if log_mass == f64::NEG_INFINITY {
            return Err(Error::ZeroMass("mu(Y) = 0".into()));
        }
        Ok(restricted.scaled_log(-log_mass))
    }

    /// `sum w_k mu_k` for measures with pairwise disjoint supports.
    pub fn combine(parts: &[(f64, &StepMeasure)]) -> Result<Self> {
        let mut items: Vec<(Interval, f64)> = Vec::new();
        for (w, mu) in parts {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidArgument(format!("weight must be finite and nonnegative, got {w}")));
            }
            if *w == 0.0 {
                continue;
            }
            let lw = w.ln();
            for (p, d) in mu.pieces().iter().zip(&mu.log_density) {
                items.push((p.clone(), d + lw));
            }
        }
        items.sort_by(|a, b| cmp_lo(&a.0, &b.0));
        let (pieces, dens): (Vec<_>, Vec<_>) = items.into_iter().unzip();
        let support = IntervalUnion::new(pieces)
            .map_err(|e| Error::InvalidArgument(format!("supports are not disjoint: {e}")))?;
        Ok(StepMeasure { support, log_density: dens })
    }

    /// Density at `x` (zero off the support).
    pub fn density_at(&self, x: f64) -> f64 {
        self.pieces().iter().position(|p| p.contains_f64(x)).map_or(0.0, |i| self.log_density[i].exp())
    }
}

#[derive(Serialize, Deserialize)]
struct StepMeasureRepr {
    pieces: Vec<Interval>,
    density: Vec<Option<f64>>,
    #[serde(default)]
    log_density: Option<Vec<Option<f64>>>,
    #[serde(default)]
    mass: Option<f64>,
}

impl Serialize for StepMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let finite = |v: f64| v.is_finite().then_some(v);
        StepMeasureRepr {
            pieces: self.support.pieces().to_vec(),
            density: self.log_density.iter().map(|d| finite(d.exp())).collect(),
            log_density: Some(self.log_density.iter().map(|&d| finite(d)).collect()),
            mass: Some(self.total_mass()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = StepMeasureRepr::deserialize(d)?;
        let support = IntervalUnion::new(r.pieces).map_err(D::Error::custom)?;
        // null log density means zero density
        let log_density = match r.log_density {
            Some(ld) => ld.into_iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect(),
            None => r
                .density
                .into_iter()
                .map(|v| v.ok_or_else(|| D::Error::custom("density must be a number")).map(f64::ln))
                .collect::<std::result::Result<Vec<_>, _>>()?,
        };
        StepMeasure::from_log_densities(support, log_density).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_sets::rational::{from_f64, ratio};
    use crate::interval_sets::{make_uniform_level, LogLength};

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::from_endpoints(from_f64(lo).unwrap(), from_f64(hi).unwrap()).unwrap()
    }

    #[test]
    fn uniform_on_unit_is_unchanged() {
        let mu = StepMeasure::uniform(IntervalUnion::unit()).unwrap();
        assert_eq!(mu.redistribute(&IntervalUnion::unit()).unwrap(), mu);
    }

    #[test]
    fn redistribute_onto_level_two() {
        let mu = StepMeasure::uniform(IntervalUnion::unit()).unwrap();
        let y = make_uniform_level(2, LogLength::from_length(0.1).unwrap()).unwrap();
        let r = mu.redistribute(&y).unwrap();
        assert_eq!(r.len(), 2);
        for d in r.densities() {
            assert!((d - 5.0).abs() < 1e-12);
        }
        assert!(r.is_probability());
    }

    #[test]
    fn redistribute_half_supported_density() {
        let support = IntervalUnion::new(vec![iv(0.0, 0.5), iv(0.5, 1.0)]).unwrap();
        let mu = StepMeasure::new(support, vec![2.0, 0.0]).unwrap();
        let y = IntervalUnion::single(iv(0.4, 0.6));
        let r = mu.redistribute(&y).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.pieces()[0].lo(), from_f64(0.4).unwrap());
        assert_eq!(r.pieces()[0].hi(), ratio(1, 2));
        assert!((r.densities()[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_mass_is_an_error() {
        let support = IntervalUnion::new(vec![iv(0.0, 0.5), iv(0.5, 1.0)]).unwrap();
        let mu = StepMeasure::new(support, vec![2.0, 0.0]).unwrap();
        let y = IntervalUnion::single(iv(0.6, 0.7));
        assert!(matches!(mu.redistribute(&y), Err(Error::ZeroMass(_))));
    }

    #[test]
    fn tiny_levels_do_not_underflow() {
        let mu = StepMeasure::uniform(IntervalUnion::unit()).unwrap();
        let y = make_uniform_level(100, LogLength::from_log(-1000.0).unwrap()).unwrap();
        let r = mu.redistribute(&y).unwrap();
        assert!((r.log_total_mass()).abs() < 1e-12);
        assert!((r.log_densities()[0] - (1000.0 - 100f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn projection_is_exact() {
        let support = IntervalUnion::new(vec![iv(0.0, 0.3), iv(0.3, 1.0)]).unwrap();
        let mu = StepMeasure::new(support, vec![0.5, 1.2]).unwrap().normalized().unwrap();
        let y = IntervalUnion::new(vec![iv(0.1, 0.35), iv(0.5, 0.9)]).unwrap();
        let once = mu.redistribute(&y).unwrap();
        assert_eq!(once.redistribute(&y).unwrap(), once);
    }

    #[test]
    fn combine_disjoint_parts() {
        let a = StepMeasure::uniform(IntervalUnion::single(iv(0.0, 0.25))).unwrap();
        let b = StepMeasure::uniform(IntervalUnion::single(iv(0.5, 1.0))).unwrap();
        let c = StepMeasure::combine(&[(0.5, &b), (0.5, &a)]).unwrap();
        assert!(c.is_probability());
        assert_eq!(c.len(), 2);
        assert!((c.densities()[0] - 2.0).abs() < 1e-12);
        assert!(StepMeasure::combine(&[(0.5, &a), (0.5, &a)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let y = make_uniform_level(3, LogLength::from_log(-800.0).unwrap()).unwrap();
        let mu = StepMeasure::uniform(y).unwrap();
        let s = serde_json::to_string(&mu).unwrap();
        assert!(s.contains("\"mass\""));
        let back: StepMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, mu);
        let plain = r#"{"pieces":[{"center_num":"1","center_den":"2","log_half_length":-0.6931471805599453,
            "half_length_num":"1","half_length_den":"2"}],"density":[1.0]}"#;
        let m: StepMeasure = serde_json::from_str(plain).unwrap();
        assert!(m.is_probability());
    }
}
