//! Logarithmic energy of step measures.
//!
//! Every pair of pieces is an interaction between two uniform interval
//! measures, evaluated by [`kernel::pair_energy`]. Sums over pieces run in a
//! fixed order so results are reproducible bit for bit, including under
//! parallel evaluation.

pub mod kernel;
mod levels;
mod quadrature;
mod truncated;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kernel::{
    exact_pair_energy, kernel_antiderivative, log_antiderivative, pair_energy, point_charge_error,
    self_energy_from_log_half, EvalPolicy, PairGeometry, DEFAULT_AUTO_THRESHOLD,
};
pub use levels::{averaged_energy, level_pair_energy, uniform_level_energy_fast};
pub use quadrature::{quadrature_oracle, quadrature_rect};
pub use truncated::{truncated_energy, TruncationLevel};

use crate::error::Result;
use crate::interval_sets::Interval;
use crate::measures::StepMeasure;

/// Energy split into the diagonal (self) and off-diagonal (cross) blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub self_part: f64,
    pub cross_part: f64,
    pub certified_error: f64,
    pub policy: EvalPolicy,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.self_part + self.cross_part
    }
}

#[derive(Serialize, Deserialize)]
struct BreakdownRepr {
    #[serde(rename = "self")]
    self_part: f64,
    #[serde(rename = "cross")]
    cross_part: f64,
    total: f64,
    certified_error: f64,
    policy: EvalPolicy,
}

impl Serialize for EnergyBreakdown {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BreakdownRepr {
            self_part: self.self_part,
            cross_part: self.cross_part,
            total: self.total(),
            certified_error: self.certified_error,
            policy: self.policy,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EnergyBreakdown {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = BreakdownRepr::deserialize(d)?;
        Ok(EnergyBreakdown {
            self_part: r.self_part,
            cross_part: r.cross_part,
            certified_error: r.certified_error,
            policy: r.policy,
        })
    }
}

/// Mutual energy of the uniform probability measures on two intervals.
pub fn mutual_energy_const(a: &Interval, b: &Interval, policy: EvalPolicy) -> Result<(f64, f64)> {
    pair_energy(PairGeometry::of(a, b), policy)
}

/// `-log L + 3/2` for the uniform measure on an interval of length `L`.
pub fn self_energy_const(a: &Interval) -> f64 {
    self_energy_from_log_half(a.log_half_length().log())
}

/// Pieces with positive mass, as `(piece, mass)`.
fn weighted_pieces(mu: &StepMeasure) -> Vec<(&Interval, f64)> {
    mu.pieces().iter().zip(mu.piece_masses()).filter(|(_, w)| *w > 0.0).collect()
}

/// Diagonal block `sum_i w_i^2 (-log L_i + 3/2)`.
pub fn energy_self_part(mu: &StepMeasure) -> f64 {
    weighted_pieces(mu).iter().map(|(p, w)| w * w * self_energy_const(p)).sum()
}

/// `I(mu)` with its self/cross split.
pub fn energy(mu: &StepMeasure, policy: EvalPolicy) -> Result<EnergyBreakdown> {
    let pieces = weighted_pieces(mu);
    let self_part = pieces.iter().map(|(p, w)| w * w * self_energy_const(p)).sum();
    let rows: Vec<(f64, f64)> = (0..pieces.len())
        .into_par_iter()
        .map(|i| {
            let (pi, wi) = pieces[i];
            let mut value = 0.0;
            let mut err = 0.0;
            for &(pj, wj) in &pieces[i + 1..] {
                let (v, e) = mutual_energy_const(pi, pj, policy)?;
                value += wi * wj * v;
                err += wi * wj * e;
            }
            Ok((value, err))
        })
        .collect::<Result<_>>()?;
    let cross_part = 2.0 * rows.iter().map(|r| r.0).sum::<f64>();
    let certified_error = 2.0 * rows.iter().map(|r| r.1).sum::<f64>();
    Ok(EnergyBreakdown { self_part, cross_part, certified_error, policy })
}

/// Deterministic total order on measures, used to make the mutual energy
/// symmetric bit for bit.
fn canonical_cmp(a: &StepMeasure, b: &StepMeasure) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        for ((pa, da), (pb, db)) in
            a.pieces().iter().zip(a.log_densities()).zip(b.pieces().iter().zip(b.log_densities()))
        {
            let ord = pa
                .center_f64()
                .total_cmp(&pb.center_f64())
                .then(pa.log_half_length().log().total_cmp(&pb.log_half_length().log()))
                .then(da.total_cmp(db));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    })
}

/// `I(mu, nu)` as `(value, certified_error)`. Pieces of the two measures may
/// overlap.
pub fn mutual_energy(mu: &StepMeasure, nu: &StepMeasure, policy: EvalPolicy) -> Result<(f64, f64)> {
    let (first, second) = if canonical_cmp(mu, nu) == Ordering::Greater { (nu, mu) } else { (mu, nu) };
    let a = weighted_pieces(first);
    let b = weighted_pieces(second);
    let rows: Vec<(f64, f64)> = a
        .par_iter()
        .map(|&(pi, wi)| {
            let mut value = 0.0;
            let mut err = 0.0;
            for &(pj, wj) in &b {
                let g = PairGeometry::of(pi, pj);
                let (v, e) = if g.log_d == f64::NEG_INFINITY && g.log_ha == g.log_hb {
                    (self_energy_const(pi), 0.0)
                } else {
                    pair_energy(g, policy)?
                };
                value += wi * wj * v;
                err += wi * wj * e;
            }
            Ok((value, err))
        })
        .collect::<Result<_>>()?;
    Ok((rows.iter().map(|r| r.0).sum(), rows.iter().map(|r| r.1).sum()))
}
