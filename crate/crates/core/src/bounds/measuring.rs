use std::fmt;
use std::sync::Arc;

use super::CoverDescription;
use crate::error::{Error, Result};

type LogFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A gauge `h`: positive and increasing near 0.
///
/// Built-in gauges are evaluated through `ell = log|log r|`, which stays
/// finite for radii like `exp(-exp(4096))`.
#[derive(Clone)]
pub enum MeasuringFunction {
    /// `h_0(r) = 1/|log r|`.
    LogMeasure,
    /// `1 / (|log r| log|log r|)`, defined for `r < 1/e`.
    LogLog,
    /// `r^s`.
    Power { s: f64 },
    /// `h` given as a function of `log r`.
    Custom { name: String, h: LogFn },
}

impl fmt::Debug for MeasuringFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MeasuringFunction({self})")
    }
}

impl fmt::Display for MeasuringFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasuringFunction::LogMeasure => write!(f, "1/|log r|"),
            MeasuringFunction::LogLog => write!(f, "1/(|log r| log|log r|)"),
            MeasuringFunction::Power { s } => write!(f, "r^{s}"),
            MeasuringFunction::Custom { name, .. } => write!(f, "{name}"),
        }
    }
}

impl MeasuringFunction {
    pub fn custom(name: impl Into<String>, h: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        MeasuringFunction::Custom { name: name.into(), h: Arc::new(h) }
    }

    fn invalid(&self, at: String) -> Error {
        Error::InvalidMeasuringFunction(format!("{self} is not positive at {at}"))
    }

    /// `log h(r)` where `|log r| = exp(ell)`.
    pub fn log_h_ext(&self, ell: f64) -> Result<f64> {
        let v = match self {
            MeasuringFunction::LogMeasure => -ell,
            MeasuringFunction::LogLog => {
                if !(ell > 0.0) {
                    return Err(self.invalid(format!("log|log r| = {ell}")));
                }
                -ell - ell.ln()
            }
            MeasuringFunction::Power { s } => -s * ell.exp(),
            MeasuringFunction::Custom { h, .. } => {
                let x = h(-ell.exp());
                if !(x > 0.0) {
                    return Err(self.invalid(format!("log|log r| = {ell}")));
                }
                x.ln()
            }
        };
        if v.is_nan() || v == f64::INFINITY {
            return Err(self.invalid(format!("log|log r| = {ell}")));
        }
        Ok(v)
    }

    /// `h(r)` from `log r < 0`.
    pub fn eval(&self, log_r: f64) -> Result<f64> {
        if !(log_r < 0.0) {
            return Err(Error::InvalidLength(format!("measuring functions need r < 1, got log r = {log_r}")));
        }
        let v = match self {
            MeasuringFunction::Custom { h, .. } => h(log_r),
            _ => self.log_h_ext((-log_r).ln())?.exp(),
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(self.invalid(format!("log r = {log_r}")));
        }
        Ok(v)
    }

    /// Checks positivity and monotonicity at the given radii.
    pub fn check_on(&self, log_rs: &[f64]) -> Result<()> {
        let mut pts: Vec<(f64, f64)> = log_rs.iter().map(|&x| Ok((x, self.eval(x)?))).collect::<Result<_>>()?;
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = pts.windows(2).find(|w| w[1].1 < w[0].1) {
            return Err(Error::InvalidMeasuringFunction(format!(
                "{self} decreases between log r = {} and {}",
                w[0].0, w[1].0
            )));
        }
        Ok(())
    }
}

/// `sum_j h(r_j)` over the cover.
pub fn h_volume_upper(cover: &CoverDescription, h: &MeasuringFunction) -> Result<f64> {
    cover.validate()?;
    cover.lengths.iter().map(|r| h.eval(r.log())).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::cs_lower_energy_bound;
    use crate::interval_sets::{make_uniform_level, LogLength};

    #[test]
    fn log_measure_matches_series() {
        let c = CoverDescription::new(vec![LogLength::from_log(-2.0).unwrap(); 2]).unwrap();
        let v = h_volume_upper(&c, &MeasuringFunction::LogMeasure).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert!((1.0 / v - cs_lower_energy_bound(&c).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn identity_gives_total_length() {
        let r = LogLength::from_length(0.01).unwrap();
        let level = make_uniform_level(30, r).unwrap();
        let c = CoverDescription::new(
            level.pieces().iter().map(|p| LogLength::from_log(p.log_length()).unwrap()).collect(),
        )
        .unwrap();
        let v = h_volume_upper(&c, &MeasuringFunction::Power { s: 1.0 }).unwrap();
        assert!((v - 0.3).abs() < 1e-13);
    }

    #[test]
    fn builtins_agree_with_direct_formulas() {
        let lr = -50.0f64;
        let h = MeasuringFunction::LogLog.eval(lr).unwrap();
        assert!((h - 1.0 / (50.0 * 50f64.ln())).abs() < 1e-16);
        let c = MeasuringFunction::custom("loglog", |lr: f64| 1.0 / (-lr * (-lr).ln()));
        assert!((c.eval(lr).unwrap() - h).abs() < 1e-16);
        assert!((c.log_h_ext(3.0).unwrap() - MeasuringFunction::LogLog.log_h_ext(3.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_and_decreasing() {
        let bad = MeasuringFunction::custom("zero", |_| 0.0);
        assert!(matches!(bad.eval(-1.0), Err(Error::InvalidMeasuringFunction(_))));
        let dec = MeasuringFunction::custom("decreasing", |lr: f64| -lr);
        assert!(dec.check_on(&[-1.0, -2.0, -3.0]).is_err());
        assert!(MeasuringFunction::LogMeasure.check_on(&[-1.0, -2.0, -300.0]).is_ok());
        assert!(MeasuringFunction::LogLog.eval(-0.5).is_err());
    }
}
