use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::log_length::LogLength;
use crate::error::{Error, Result};

/// The map `n -> r_n` giving the length of every interval of level `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusSchedule {
    /// `r_n = exp(-n^alpha)`.
    PowerExp { alpha: f64 },
    /// `r_n = exp(-n^beta)` with `beta < 1` (subexponential decay).
    SubexpRoot { beta: f64 },
    /// `r_n = 2^-n`.
    GeometricDyadic,
    /// Explicit table of `log r_n`. No interpolation between entries.
    Custom { table: BTreeMap<u64, f64> },
}

impl RadiusSchedule {
    pub fn power_exp(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        Ok(RadiusSchedule::PowerExp { alpha })
    }

    pub fn subexp_root(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidArgument(format!("beta must lie in (0, 1), got {beta}")));
        }
        Ok(RadiusSchedule::SubexpRoot { beta })
    }

    /// `log r_n` without the disjointness check.
    pub fn raw_log_radius(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("level index must be positive".into()));
        }
        let nf = n as f64;
        Ok(match self {
            RadiusSchedule::PowerExp { alpha } => -nf.powf(*alpha),
            RadiusSchedule::SubexpRoot { beta } => -nf.powf(*beta),
            RadiusSchedule::GeometricDyadic => -nf * LN_2,
            RadiusSchedule::Custom { table } => *table.get(&n).ok_or(Error::ScheduleLookup(n))?,
        })
    }

    /// Whether level `n` of this schedule has its `n` intervals pairwise disjoint.
    pub fn fits(&self, n: u64) -> bool {
        self.raw_log_radius(n).is_ok_and(|lr| lr < -(n as f64).ln())
    }
}

/// `log r_n` for level `n`, rejecting radii that would make the level's
/// intervals overlap (`r_n >= 1/n`).
pub fn schedule_radius(s: &RadiusSchedule, n: u64) -> Result<LogLength> {
    let log_r = s.raw_log_radius(n)?;
    if !(log_r < -(n as f64).ln()) {
        return Err(Error::OverlappingLevel { n, log_r });
    }
    LogLength::from_log(log_r)
}

impl fmt::Display for RadiusSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusSchedule::PowerExp { alpha } => write!(f, "power:{alpha}"),
            RadiusSchedule::SubexpRoot { beta } => write!(f, "subexp:{beta}"),
            RadiusSchedule::GeometricDyadic => write!(f, "dyadic"),
            RadiusSchedule::Custom { table } => write!(f, "custom[{} entries]", table.len()),
        }
    }
}

/// Parses `power:A`, `subexp:B` or `dyadic`.
impl FromStr for RadiusSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "dyadic" {
            return Ok(RadiusSchedule::GeometricDyadic);
        }
        let (kind, value) = s.split_once(':').ok_or_else(|| Error::InvalidInput(format!("unknown schedule {s:?}")))?;
        let value: f64 =
            value.parse().map_err(|e| Error::InvalidInput(format!("bad schedule parameter in {s:?}: {e}")))?;
        match kind {
            "power" | "powerexp" => Self::power_exp(value),
            "subexp" => Self::subexp_root(value),
            _ => Err(Error::InvalidInput(format!("unknown schedule kind {kind:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_exp_is_exact() {
        let s = RadiusSchedule::power_exp(3.0).unwrap();
        assert_eq!(schedule_radius(&s, 10).unwrap().log(), -1000.0);
        let s = RadiusSchedule::power_exp(1.5).unwrap();
        let r = schedule_radius(&s, 100).unwrap();
        assert_eq!(r.log(), -1000.0);
        assert_eq!(r.length(), 0.0);
    }

    #[test]
    fn dyadic_radius() {
        let r = schedule_radius(&RadiusSchedule::GeometricDyadic, 4).unwrap();
        assert!((r.log() + 2.772_588_722_239_781).abs() < 1e-15);
    }

    #[test]
    fn custom_lookup() {
        let mut table = BTreeMap::new();
        table.insert(3, -5.0);
        let s = RadiusSchedule::Custom { table };
        assert_eq!(schedule_radius(&s, 3).unwrap().log(), -5.0);
        assert!(matches!(schedule_radius(&s, 4), Err(Error::ScheduleLookup(4))));
    }

    #[test]
    fn overlapping_levels_rejected() {
        // n^0.1 < log n for moderate n.
        let s = RadiusSchedule::power_exp(0.1).unwrap();
        assert!(matches!(schedule_radius(&s, 100), Err(Error::OverlappingLevel { n: 100, .. })));
        assert!(RadiusSchedule::subexp_root(1.0).is_err());
    }

    #[test]
    fn parse_round_trip() {
        let s: RadiusSchedule = "subexp:0.5".parse().unwrap();
        assert_eq!(s, RadiusSchedule::SubexpRoot { beta: 0.5 });
        assert_eq!(s.to_string().parse::<RadiusSchedule>().unwrap(), s);
        assert!("foo:1".parse::<RadiusSchedule>().is_err());
    }
}
