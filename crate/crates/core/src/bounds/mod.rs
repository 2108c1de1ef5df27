//! One-sided bounds on energy and capacity.
//!
//! Every probability measure on a union of intervals of lengths `r_k < 1`
//! has energy at least `1 / sum_k 1/|log r_k|`, so the capacity of the union
//! is at most `exp` of minus that.

mod measuring;
mod ursell;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use measuring::{h_volume_upper, MeasuringFunction};
pub use ursell::{loglog_witness, ursell_schedule, UrsellRow, UrsellSchedule};

use crate::error::{Error, Result};
use crate::interval_sets::{LogLength, RadiusSchedule};

/// Lengths of the intervals of a finite cover, with optional left endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverDescription {
    pub lengths: Vec<LogLength>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<f64>>,
}

impl CoverDescription {
    pub fn new(lengths: Vec<LogLength>) -> Result<Self> {
        let c = CoverDescription { lengths, positions: None };
        c.validate()?;
        Ok(c)
    }

    pub fn with_positions(mut self, positions: Vec<f64>) -> Result<Self> {
        if positions.len() != self.lengths.len() {
            return Err(Error::InvalidArgument(format!(
                "{} positions for {} lengths",
                positions.len(),
                self.lengths.len()
            )));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    /// Checks a cover read from outside (JSON).
    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() {
            return Err(Error::InvalidArgument("empty cover".into()));
        }
        if let Some(k) = self.lengths.iter().position(|r| !(r.log() < 0.0)) {
            return Err(Error::InvalidLength(format!("cover length {k} is not below 1")));
        }
        if self.positions.as_ref().is_some_and(|p| p.len() != self.lengths.len()) {
            return Err(Error::InvalidArgument("positions and lengths differ in count".into()));
        }
        Ok(())
    }

    /// `sum_k 1/|log r_k|`.
    pub fn series(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.lengths.iter().map(|r| 1.0 / r.abs_log()).sum())
    }
}

/// `1 / sum_k 1/|log r_k|`.
pub fn cs_lower_energy_bound(cover: &CoverDescription) -> Result<f64> {
    Ok(1.0 / cover.series()?)
}

/// `exp(-cs_lower_energy_bound)`, clamped to `[0, 1]`.
pub fn capacity_upper_bound(cover: &CoverDescription) -> Result<f64> {
    Ok(capacity_from_series(cover.series()?))
}

/// Capacity bound for a given series value; an infinite series gives the
/// vacuous bound 1.
pub fn capacity_from_series(series: f64) -> f64 {
    if series.is_infinite() {
        return 1.0;
    }
    if series <= 0.0 {
        return 0.0;
    }
    (-1.0 / series).exp().clamp(0.0, 1.0)
}

/// Energy and capacity bounds derived from one series value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub energy_lower_bound: f64,
    pub capacity_upper_bound: f64,
    pub series_value: f64,
    pub converged: bool,
}

impl BoundReport {
    pub fn from_series(series_value: f64, converged: bool) -> Self {
        let energy_lower_bound = if series_value > 0.0 { 1.0 / series_value } else { f64::INFINITY };
        BoundReport {
            energy_lower_bound,
            capacity_upper_bound: capacity_from_series(series_value),
            series_value,
            converged,
        }
    }

    pub fn for_cover(cover: &CoverDescription) -> Result<Self> {
        Ok(Self::from_series(cover.series()?, true))
    }
}

/// Partial sum of `sum_{n >= m} n^(1 - alpha)` with an integral-test bracket
/// on the full tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSeries {
    pub m: u64,
    pub terms: u64,
    pub partial_sum: f64,
    pub lower: f64,
    /// `+inf` when the series diverges.
    pub upper: f64,
    pub converged: bool,
}

impl TailSeries {
    /// Report built from the upper end of the bracket, so the capacity
    /// bound stays a true bound.
    pub fn report(&self) -> BoundReport {
        BoundReport::from_series(self.upper, self.converged)
    }
}

/// Tail `sum_{n >= m} n / |log r_n|` of the cover by all levels `n >= m`,
/// for `r_n = exp(-n^alpha)`.
pub fn tail_series(s: &RadiusSchedule, m: u64, terms: u64) -> Result<TailSeries> {
    let RadiusSchedule::PowerExp { alpha } = *s else {
        return Err(Error::InvalidArgument(format!("tail series needs a power schedule, got {s}")));
    };
    if m == 0 || terms == 0 {
        return Err(Error::InvalidArgument("m and terms must be positive".into()));
    }
    let e = 1.0 - alpha;
    // Summed from the small end up.
    let partial_sum: f64 = (m..m + terms).rev().map(|n| (n as f64).powf(e)).sum();
    let big_n = (m + terms) as f64;
    let converged = alpha > 2.0;
    let (lower, upper) = if converged {
        // int_N^inf x^(1-alpha) dx <= sum_{n >= N} n^(1-alpha) <= N^(1-alpha) + int_N^inf.
        let integral = big_n.powf(2.0 - alpha) / (alpha - 2.0);
        (partial_sum + integral, partial_sum + integral + big_n.powf(e))
    } else {
        (partial_sum, f64::INFINITY)
    };
    Ok(TailSeries { m, terms, partial_sum, lower, upper, converged })
}

/// Capacity of `limsup V_n` for `r_n = exp(-n^alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    ZeroCapacity,
    FullCapacity,
    OpenBoundary,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::ZeroCapacity => "zero_capacity",
            Phase::FullCapacity => "full_capacity",
            Phase::OpenBoundary => "open_boundary",
        })
    }
}

pub fn phase_classify(alpha: f64) -> Result<Phase> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    Ok(if alpha > 2.0 {
        Phase::ZeroCapacity
    } else if alpha < 2.0 {
        Phase::FullCapacity
    } else {
        Phase::OpenBoundary
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ll(x: f64) -> LogLength {
        LogLength::from_log(x).unwrap()
    }

    #[test]
    fn two_intervals_of_length_e_minus_two() {
        let c = CoverDescription::new(vec![ll(-2.0), ll(-2.0)]).unwrap();
        assert_eq!(cs_lower_energy_bound(&c).unwrap(), 1.0);
        assert!((capacity_upper_bound(&c).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn single_interval_bound_below_self_energy() {
        let c = CoverDescription::new(vec![ll(-7.5)]).unwrap();
        let b = cs_lower_energy_bound(&c).unwrap();
        assert!((b - 7.5).abs() < 1e-15);
        assert!(b < 7.5 + 1.5);
    }

    #[test]
    fn rejects_bad_covers() {
        assert!(CoverDescription::new(vec![]).is_err());
        assert!(CoverDescription::new(vec![ll(0.0)]).is_err());
        let json = r#"{"lengths": [-1.0, 0.0]}"#;
        let c: CoverDescription = serde_json::from_str(json).unwrap();
        assert!(c.series().is_err());
    }

    #[test]
    fn adding_an_interval_never_raises_the_bound() {
        let mut lengths = vec![ll(-3.0), ll(-10.0)];
        let mut prev = cs_lower_energy_bound(&CoverDescription::new(lengths.clone()).unwrap()).unwrap();
        for k in 0..20 {
            lengths.push(ll(-1.0 - k as f64));
            let b = cs_lower_energy_bound(&CoverDescription::new(lengths.clone()).unwrap()).unwrap();
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn zeta_two_bracket() {
        let s = RadiusSchedule::power_exp(3.0).unwrap();
        let t = tail_series(&s, 1, 10_000).unwrap();
        let z2 = PI * PI / 6.0;
        assert!(t.converged && t.lower <= z2 && z2 <= t.upper, "{t:?}");
        assert!(t.upper - t.lower < 1e-6);
        let cap = t.report().capacity_upper_bound;
        assert!((cap - (-6.0 / (PI * PI)).exp()).abs() < 1e-6);
    }

    #[test]
    fn tail_from_ten() {
        let s = RadiusSchedule::power_exp(3.0).unwrap();
        let t = tail_series(&s, 10, 100_000).unwrap();
        // zeta(2) - H_9^(2)
        let head: f64 = (1..10).map(|n| 1.0 / (n * n) as f64).sum();
        let exact = PI * PI / 6.0 - head;
        assert!(t.lower <= exact && exact <= t.upper);
        assert!((exact - 0.10516633).abs() < 1e-7);
    }

    #[test]
    fn harmonic_diverges() {
        let s = RadiusSchedule::power_exp(2.0).unwrap();
        let t = tail_series(&s, 1, 1000).unwrap();
        assert!(!t.converged && t.upper.is_infinite());
        assert_eq!(t.report().capacity_upper_bound, 1.0);
        assert!(tail_series(&RadiusSchedule::GeometricDyadic, 1, 10).is_err());
    }

    #[test]
    fn capacity_bound_falls_with_m() {
        let s = RadiusSchedule::power_exp(3.0).unwrap();
        let caps: Vec<f64> = [1, 2, 5, 10, 100]
            .iter()
            .map(|&m| tail_series(&s, m, 10_000).unwrap().report().capacity_upper_bound)
            .collect();
        assert!(caps.windows(2).all(|w| w[1] < w[0]), "{caps:?}");
        assert!(caps[4] <= 1e-40);
    }

    #[test]
    fn phases() {
        assert_eq!(phase_classify(3.0).unwrap(), Phase::ZeroCapacity);
        assert_eq!(phase_classify(1.5).unwrap(), Phase::FullCapacity);
        assert_eq!(phase_classify(2.0).unwrap(), Phase::OpenBoundary);
        assert!(phase_classify(0.0).is_err());
        assert_eq!(serde_json::to_string(&Phase::OpenBoundary).unwrap(), "\"open_boundary\"");
    }

    #[test]
    fn report_json() {
        let r = BoundReport::from_series(0.5, true);
        let v = serde_json::to_value(r).unwrap();
        assert_eq!(v["energy_lower_bound"], 2.0);
        assert_eq!(serde_json::from_value::<BoundReport>(v).unwrap(), r);
    }
}
