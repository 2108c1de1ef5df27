use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::MeasuringFunction;
use crate::error::{Error, Result};

/// Below this `log(|log r| / h)` the count `n_j` is formed as an integer.
const EXACT_LOG_LIMIT: f64 = 100.0 * LN_2;

/// One level `(n_j, r_j)` of the schedule. Radii are stored as
/// `ell = log|log r_j|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrsellRow {
    pub j: usize,
    pub log_abs_log_r: f64,
    pub log_n: f64,
    /// `n_j` itself when it fits in 64 bits.
    pub n: Option<u64>,
    /// `log(n_j h(r_j))`, required below `-j log 2`.
    pub log_volume: f64,
    /// `log(n_j / |log r_j|)`, required above `j log 2`.
    pub log_density: f64,
}

impl UrsellRow {
    pub fn volume_ok(&self) -> bool {
        self.log_volume < -(self.j as f64) * LN_2
    }

    pub fn density_ok(&self) -> bool {
        self.log_density > self.j as f64 * LN_2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrsellSchedule {
    pub gauge: String,
    pub rows: Vec<UrsellRow>,
    /// `(j, reason)` for levels where rounding broke an inequality.
    pub rejected: Vec<(usize, String)>,
    /// Partial sums of `n_j h(r_j)` over accepted rows.
    pub volume_partial_sums: Vec<f64>,
}

impl UrsellSchedule {
    /// Recomputes both inequalities for every row from `h` and the stored
    /// counts.
    pub fn verify(&self, h: &MeasuringFunction) -> Result<bool> {
        for row in &self.rows {
            let log_h = h.log_h_ext(row.log_abs_log_r)?;
            let log_n = match row.n {
                Some(n) => (n as f64).ln(),
                None => row.log_n,
            };
            let j = row.j as f64;
            if !(log_n + log_h < -j * LN_2 && log_n - row.log_abs_log_r > j * LN_2) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `log|log r_j|` for `r_j = exp(-exp(4^(j+1) + 1))`, `j = 1..=count`.
///
/// With `h = 1/(|log r| log|log r|)` this gives `h(r_j) |log r_j| =
/// 1/(4^(j+1) + 1) < 4^(-j-1)`.
pub fn loglog_witness(count: usize) -> Vec<f64> {
    (1..=count).map(|j| 4f64.powi(j as i32 + 1) + 1.0).collect()
}

/// Levels `n_j = floor(sqrt(|log r_j| / h(r_j)))` along a witness sequence
/// `witness[j - 1] = log|log r_j|`, `j = 1..=count`.
pub fn ursell_schedule(h: &MeasuringFunction, witness: &[f64], count: usize) -> Result<UrsellSchedule> {
    if witness.len() < count {
        return Err(Error::InvalidArgument(format!("witness has {} terms, {count} requested", witness.len())));
    }
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    let mut volume_partial_sums = Vec::new();
    let mut volume = 0.0;
    for (idx, &ell) in witness[..count].iter().enumerate() {
        let j = idx + 1;
        let log_h = h.log_h_ext(ell).map_err(|e| Error::Precondition { j, detail: e.to_string() })?;
        let premise = log_h + ell;
        let limit = -((j + 1) as f64) * 4f64.ln();
        // Strict, with room for rounding in the log evaluation.
        if !(premise < limit - 1e-12 * limit.abs()) {
            return Err(Error::Precondition {
                j,
                detail: format!("h(r_j)|log r_j| = exp({premise}) is not below 4^-(j+1) = exp({limit})"),
            });
        }
        let log_x = ell - log_h;
        let (n, log_n) = if log_x < EXACT_LOG_LIMIT {
            let n = (0.5 * log_x).exp().floor() as u64;
            (Some(n), if n == 0 { f64::NEG_INFINITY } else { (n as f64).ln() })
        } else {
            (None, 0.5 * log_x)
        };
        let row = UrsellRow { j, log_abs_log_r: ell, log_n, n, log_volume: log_n + log_h, log_density: log_n - ell };
        if !row.volume_ok() {
            rejected.push((j, format!("n_j h(r_j) = exp({}) is not below 2^-{j}", row.log_volume)));
            continue;
        }
        if !row.density_ok() {
            rejected.push((j, format!("n_j/|log r_j| = exp({}) is not above 2^{j}", row.log_density)));
            continue;
        }
        volume += row.log_volume.exp();
        volume_partial_sums.push(volume);
        rows.push(row);
    }
    Ok(UrsellSchedule { gauge: h.to_string(), rows, rejected, volume_partial_sums })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loglog_gauge_gives_five_rows() {
        let h = MeasuringFunction::LogLog;
        let s = ursell_schedule(&h, &loglog_witness(5), 5).unwrap();
        assert_eq!(s.rows.len(), 5, "{:?}", s.rejected);
        assert!(s.rows.iter().all(|r| r.volume_ok() && r.density_ok()));
        assert!(s.verify(&h).unwrap());
        assert!(*s.volume_partial_sums.last().unwrap() < 1.0);
        // j = 1: |log r| = e^17, n = floor(e^17 sqrt(17)).
        let n1 = s.rows[0].n.unwrap();
        let expect = (17f64.exp() * 17f64.sqrt()).floor() as u64;
        assert!(n1.abs_diff(expect) <= 1);
        assert!(s.rows[4].n.is_none());
    }

    #[test]
    fn unshifted_witness_sits_on_the_boundary() {
        let w: Vec<f64> = (1..=3).map(|j| 4f64.powi(j + 1)).collect();
        let err = ursell_schedule(&MeasuringFunction::LogLog, &w, 3).unwrap_err();
        assert!(matches!(err, Error::Precondition { j: 1, .. }));
    }

    #[test]
    fn log_measure_has_no_witness() {
        let err = ursell_schedule(&MeasuringFunction::LogMeasure, &loglog_witness(5), 5).unwrap_err();
        assert!(matches!(err, Error::Precondition { j: 1, .. }), "{err}");
    }

    #[test]
    fn tampered_row_fails_verification() {
        let h = MeasuringFunction::LogLog;
        let mut s = ursell_schedule(&h, &loglog_witness(3), 3).unwrap();
        s.rows[2].log_n += 10.0;
        assert!(!s.verify(&h).unwrap());
    }
}
