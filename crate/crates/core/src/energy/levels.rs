use rayon::prelude::*;

use super::kernel::{pair_energy, self_energy_from_log_half, EvalPolicy, PairGeometry};
use super::{energy, mutual_energy, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::interval_sets::LogLength;
use crate::measures::AveragedMeasure;

fn check_fits(n: u64, r: LogLength) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("level index must be positive".into()));
    }
    if !(r.log() < -(n as f64).ln()) {
        return Err(Error::OverlappingLevel { n, log_r: r.log() });
    }
    Ok(())
}

/// Energy of the normalized Lebesgue measure on level `n`, in `O(n)`.
///
/// Pair interactions depend only on the index distance `k`, which occurs
/// `n - k` times in each order.
pub fn uniform_level_energy_fast(n: u64, r: LogLength, policy: EvalPolicy) -> Result<EnergyBreakdown> {
    check_fits(n, r)?;
    let log_half = r.log() - std::f64::consts::LN_2;
    let nf = n as f64;
    let self_part = self_energy_from_log_half(log_half) / nf;
    let log_n = nf.ln();
    let terms: Vec<(f64, f64)> = (1..n)
        .into_par_iter()
        .map(|k| {
            let g = PairGeometry { log_ha: log_half, log_hb: log_half, log_d: (k as f64).ln() - log_n };
            let (v, e) = pair_energy(g, policy)?;
            let mult = 2.0 * (n - k) as f64 / (nf * nf);
            Ok((mult * v, mult * e))
        })
        .collect::<Result<_>>()?;
    Ok(EnergyBreakdown {
        self_part,
        cross_part: terms.iter().map(|t| t.0).sum(),
        certified_error: terms.iter().map(|t| t.1).sum(),
        policy,
    })
}

/// `I(mu_p, mu_q)` for the normalized Lebesgue measures on levels `p` and
/// `q`, with center distances `|(2i+1)q - (2j+1)p| / (2pq)` taken exactly.
pub fn level_pair_energy(p: u64, rp: LogLength, q: u64, rq: LogLength, policy: EvalPolicy) -> Result<(f64, f64)> {
    check_fits(p, rp)?;
    check_fits(q, rq)?;
    if p == q {
        if rp != rq {
            return Err(Error::InvalidArgument(format!("level {p} given with two radii")));
        }
        let e = uniform_level_energy_fast(p, rp, policy)?;
        return Ok((e.total(), e.certified_error));
    }
    let (lha, lhb) = (rp.log() - std::f64::consts::LN_2, rq.log() - std::f64::consts::LN_2);
    let log_den = (2.0 * p as f64 * q as f64).ln();
    let (pi, qi) = (p as i128, q as i128);
    let rows: Vec<(f64, f64)> = (0..pi)
        .into_par_iter()
        .map(|i| {
            let x = (2 * i + 1) * qi;
            let mut value = 0.0;
            let mut err = 0.0;
            for j in 0..qi {
                let k = (x - (2 * j + 1) * pi).abs();
                let log_d = if k == 0 { f64::NEG_INFINITY } else { (k as f64).ln() - log_den };
                let (v, e) = pair_energy(PairGeometry { log_ha: lha, log_hb: lhb, log_d }, policy)?;
                value += v;
                err += e;
            }
            Ok((value, err))
        })
        .collect::<Result<_>>()?;
    let scale = 1.0 / (p as f64 * q as f64);
    Ok((scale * rows.iter().map(|r| r.0).sum::<f64>(), scale * rows.iter().map(|r| r.1).sum::<f64>()))
}

/// `I(mu^m) = sum p_n^2 I(mu_n) + sum_{n != n'} p_n p_n' I(mu_n, mu_n')`.
///
/// The self part is the diagonal-piece block `sum p_n^2 S(mu_n)`; all other
/// interactions, within and across levels, form the cross part.
pub fn averaged_energy(avg: &AveragedMeasure, policy: EvalPolicy) -> Result<EnergyBreakdown> {
    let c = &avg.components;
    let mut self_part = 0.0;
    let mut cross_part = 0.0;
    let mut err = 0.0;
    for (a, ca) in c.iter().enumerate() {
        let e = energy(&ca.measure, policy)?;
        let w2 = ca.weight * ca.weight;
        self_part += w2 * e.self_part;
        cross_part += w2 * e.cross_part;
        err += w2 * e.certified_error;
        for cb in &c[a + 1..] {
            let (v, ve) = mutual_energy(&ca.measure, &cb.measure, policy)?;
            cross_part += 2.0 * ca.weight * cb.weight * v;
            err += 2.0 * ca.weight * cb.weight * ve;
        }
    }
    Ok(EnergyBreakdown { self_part, cross_part, certified_error: err, policy })
}
