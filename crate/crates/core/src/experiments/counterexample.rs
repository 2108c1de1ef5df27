use std::f64::consts::LN_2;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::table::{Cell, ResultTable};
use crate::energy::{energy, uniform_level_energy_fast, EvalPolicy};
use crate::error::{Error, Result};
use crate::interval_sets::rational::{pow2_neg, ratio, to_f64};
use crate::interval_sets::{make_uniform_level_exact, set_difference_closed, IntervalUnion, LogLength, Rational};
use crate::measures::StepMeasure;

/// Levels above this are not built.
pub const MAX_LEVEL: u64 = 1 << 12;

/// `n_1` a power of two, `n_k = 2^(n_(k-1) + 1)`, `r_n = 2^-n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    pub n1: u64,
    pub depth: usize,
}

impl Default for CounterexampleParams {
    fn default() -> Self {
        CounterexampleParams { n1: 8, depth: 2 }
    }
}

impl CounterexampleParams {
    /// `n_1, ..., n_K`.
    pub fn levels(&self) -> Result<Vec<u64>> {
        if self.n1 < 2 || !self.n1.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("n1 must be a power of two >= 2, got {}", self.n1)));
        }
        if self.depth == 0 {
            return Err(Error::InvalidArgument("depth must be positive".into()));
        }
        let mut out = vec![self.n1];
        while out.len() < self.depth {
            let prev = *out.last().unwrap();
            if prev + 1 > MAX_LEVEL.trailing_zeros() as u64 {
                return Err(Error::InvalidArgument(format!(
                    "n_{} = 2^{} exceeds the supported level {MAX_LEVEL}",
                    out.len() + 1,
                    prev + 1
                )));
            }
            out.push(1 << (prev + 1));
        }
        Ok(out)
    }
}

/// Exact quantities for one `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleStep {
    pub k: usize,
    pub n: u64,
    pub b: IntervalUnion,
    pub leb_x: Rational,
    pub leb_v: Rational,
    pub leb_v_cap_x: Rational,
    /// `nu_k°(B_k) = leb(B_k) / leb(V_{n_k})`.
    pub nu_b: Rational,
    pub disjoint: bool,
    /// `I(nu_k°)` for the uniform measure on `V_{n_k}`.
    pub energy_circ: f64,
    /// Energy of the uniform probability measure on `B_k`.
    pub energy_direct: f64,
}

impl CounterexampleStep {
    pub fn factorization_holds(&self) -> bool {
        self.leb_v_cap_x == &self.leb_x * &self.leb_v
    }

    /// `I(nu_k°) - 3/2 - log 2`.
    pub fn o1(&self) -> f64 {
        self.energy_circ - 1.5 - LN_2
    }

    /// `I(nu_k°) / nu_k°(B_k)^2`.
    pub fn energy_bound(&self) -> f64 {
        let nu = to_f64(&self.nu_b);
        self.energy_circ / (nu * nu)
    }

    /// `4 (3/2 + log 2 + o(1))`.
    pub fn limit(&self) -> f64 {
        4.0 * (1.5 + LN_2 + self.o1())
    }
}

/// Builds `B_k = V_{n_k} minus the closures of the earlier levels` with exact
/// dyadic endpoints and checks the block factorization of `leb(V_{n_k} ∩ X_k)`.
pub fn counterexample_steps(params: &CounterexampleParams) -> Result<Vec<CounterexampleStep>> {
    let ns = params.levels()?;
    let mut earlier = IntervalUnion::empty();
    let mut bs: Vec<IntervalUnion> = Vec::new();
    let mut out = Vec::new();
    for (idx, &n) in ns.iter().enumerate() {
        let r = pow2_neg(n);
        let v = make_uniform_level_exact(n, &r)?;
        let leb_x = Rational::one() - earlier.total_length();
        let leb_v = v.total_length();
        let leb_v_cap_x = &leb_v - v.intersect(&earlier).total_length();
        let b = set_difference_closed(&v, &earlier);
        if b.is_empty() {
            return Err(Error::ZeroMass(format!("B_{} is empty", idx + 1)));
        }
        let nu_b = b.total_length() / &leb_v;
        let disjoint = bs.iter().all(|prev| prev.is_disjoint_from(&b));
        let log_r = LogLength::from_log(-(n as f64) * LN_2)?;
        let energy_circ = uniform_level_energy_fast(n, log_r, EvalPolicy::default())?.total();
        let energy_direct = energy(&StepMeasure::uniform(b.clone())?, EvalPolicy::default())?.total();
        out.push(CounterexampleStep {
            k: idx + 1,
            n,
            b: b.clone(),
            leb_x,
            leb_v,
            leb_v_cap_x,
            nu_b,
            disjoint,
            energy_circ,
            energy_direct,
        });
        earlier = earlier.union(&v);
        bs.push(b);
    }
    Ok(out)
}

pub const COUNTEREXAMPLE_COLUMNS: [&str; 18] = [
    "k",
    "n_k",
    "pieces",
    "leb_x",
    "leb_v",
    "leb_v_cap_x",
    "nu_circ_b",
    "energy_nu_circ",
    "o1",
    "energy_nu_bound",
    "energy_nu_direct",
    "limit",
    "pass_disjoint",
    "pass_factorization",
    "pass_nu_equals_leb_x",
    "pass_half",
    "pass_bound",
    "pass_direct",
];

/// Exact checks of the disjoint-sets construction; every `pass_*` flag is an
/// exact rational comparison except the two energy inequalities.
pub fn run_counterexample_check(params: &CounterexampleParams) -> Result<ResultTable> {
    let steps = counterexample_steps(params)?;
    let mut t = ResultTable::new("counterexample", &COUNTEREXAMPLE_COLUMNS);
    t.meta(
        "statement",
        "disjoint open sets B_k with capacity bounded below; leb(V_{n_k} ∩ X_k) = leb(X_k) leb(V_{n_k})",
    );
    t.meta(
        "scale",
        "n_1 is scaled down from 2^10, which would force n_2 = 2^1025; the dyadic block argument does not depend on n_1",
    );
    t.meta("o1", "I(nu_k°) - 3/2 - log 2, computed");
    t.set_config(params)?;
    let half = ratio(1, 2);
    for s in &steps {
        if !s.factorization_holds() {
            return Err(Error::InvalidInput(format!("block factorization fails at k = {}", s.k)));
        }
        t.push(vec![
            Cell::Int(s.k as i64),
            Cell::Int(s.n as i64),
            Cell::Int(s.b.len() as i64),
            Cell::rational(&s.leb_x),
            Cell::rational(&s.leb_v),
            Cell::rational(&s.leb_v_cap_x),
            Cell::rational(&s.nu_b),
            Cell::Real(s.energy_circ),
            Cell::Real(s.o1()),
            Cell::Real(s.energy_bound()),
            Cell::Real(s.energy_direct),
            Cell::Real(s.limit()),
            Cell::Flag(s.disjoint),
            Cell::Flag(s.factorization_holds()),
            Cell::Flag(s.nu_b == s.leb_x),
            Cell::Flag(s.nu_b >= half),
            Cell::Flag(s.energy_bound() <= s.limit()),
            Cell::Flag(s.energy_direct <= s.energy_bound() * (1.0 + 1e-12)),
        ])?;
    }
    Ok(t)
}
