use logcap::bounds::{cs_lower_energy_bound, tail_series, CoverDescription};
use logcap::energy::{
    energy, exact_pair_energy, mutual_energy, point_charge_error, truncated_energy, EvalPolicy, PairGeometry,
    TruncationLevel,
};
use logcap::interval_sets::rational::from_f64;
use logcap::interval_sets::{make_uniform_level, Interval, IntervalUnion, LogLength, RadiusSchedule};
use logcap::measures::StepMeasure;
use num_traits::Zero;
use proptest::prelude::*;

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::from_endpoints(from_f64(lo).unwrap(), from_f64(hi).unwrap()).unwrap()
}

/// Disjoint pieces in `[0, 1]` from relative lengths and gaps.
fn layout(parts: &[(f64, f64)], tail_gap: f64) -> Vec<Interval> {
    let total: f64 = parts.iter().map(|(l, g)| l + g).sum::<f64>() + tail_gap;
    let mut x = 0.0;
    let mut out = Vec::new();
    for (l, g) in parts {
        x += g / total;
        let hi = x + l / total;
        out.push(iv(x, hi));
        x = hi;
    }
    out
}

fn step_measure() -> impl Strategy<Value = StepMeasure> {
    (prop::collection::vec((0.01f64..1.0, 0.001f64..1.0, 0.1f64..5.0), 1..6), 0.0f64..1.0).prop_map(|(parts, tail)| {
        let geo: Vec<(f64, f64)> = parts.iter().map(|(l, g, _)| (*l, *g)).collect();
        let dens: Vec<f64> = parts.iter().map(|p| p.2).collect();
        StepMeasure::new(IntervalUnion::new(layout(&geo, tail)).unwrap(), dens).unwrap().normalized().unwrap()
    })
}

fn interval_union() -> impl Strategy<Value = IntervalUnion> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..0.3), 0..6).prop_map(|raw| {
        IntervalUnion::from_overlapping(raw.into_iter().map(|(lo, len)| iv(lo, (lo + len + 1e-3).min(1.0))).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn intersection_is_commutative_and_smaller(a in interval_union(), b in interval_union()) {
        let ab = a.intersect(&b);
        prop_assert_eq!(&ab, &b.intersect(&a));
        prop_assert!(ab.total_length() <= a.total_length());
        prop_assert!(ab.total_length() <= b.total_length());
        let u = a.union(&b);
        prop_assert_eq!(u.total_length() + ab.total_length(), a.total_length() + b.total_length());
        if a.is_disjoint_from(&b) {
            prop_assert!(ab.total_length().is_zero());
        }
    }

    #[test]
    fn redistribution_is_a_probability(mu in step_measure(), n in 1u64..40, log_r in -12.0f64..-5.0) {
        let v = make_uniform_level(n, LogLength::from_log(log_r).unwrap()).unwrap();
        if let Ok(nu) = mu.redistribute(&v) {
            prop_assert!((nu.total_mass() - 1.0).abs() < 1e-12);
            prop_assert!(nu.support().pieces().iter().all(|p| v.contains_f64(p.center_f64())));
        }
    }

    #[test]
    fn mutual_energy_is_symmetric(a in step_measure(), b in step_measure()) {
        let ab = mutual_energy(&a, &b, EvalPolicy::Exact).unwrap().0;
        let ba = mutual_energy(&b, &a, EvalPolicy::Exact).unwrap().0;
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
    }

    #[test]
    fn probability_energy_is_positive(mu in step_measure()) {
        let e = energy(&mu, EvalPolicy::Exact).unwrap();
        prop_assert!(e.total() > 0.0);
        prop_assert!(e.self_part > 0.0);
    }

    #[test]
    fn pair_energy_within_point_charge_sandwich(
        l1 in -9.0f64..-1.5, l2 in -9.0f64..-1.5, gap in -9.0f64..-1.0,
    ) {
        let (a, b) = (l1.exp(), l2.exp());
        let g = gap.exp();
        let p = iv(0.0, a);
        let q = iv(a + g, a + g + b);
        let geo = PairGeometry::of(&p, &q);
        let v = exact_pair_energy(geo);
        let lo = -geo.log_d;
        prop_assert!(v >= lo - 1e-12 && v <= lo + point_charge_error(geo.log_rho()) + 1e-12);
    }

    #[test]
    fn cs_bound_is_below_energy(mu in step_measure()) {
        let lengths: Vec<LogLength> = mu.pieces().iter().map(|p| LogLength::from_log(p.log_length()).unwrap()).collect();
        let bound = cs_lower_energy_bound(&CoverDescription::new(lengths).unwrap()).unwrap();
        let e = energy(&mu, EvalPolicy::Exact).unwrap().total();
        prop_assert!(bound <= e + 1e-12, "{} > {}", bound, e);
    }

    #[test]
    fn truncation_is_monotone(mu in step_measure(), c1 in 0.5f64..5.0, dc in 0.1f64..5.0) {
        let small = truncated_energy(&mu, TruncationLevel::new(c1).unwrap()).unwrap();
        let large = truncated_energy(&mu, TruncationLevel::new(c1 + dc).unwrap()).unwrap();
        let full = energy(&mu, EvalPolicy::Exact).unwrap().total();
        prop_assert!(small <= large + 1e-12);
        prop_assert!(large <= full + 1e-9);
    }

    #[test]
    fn tail_bracket_contains_longer_sums(alpha in 2.1f64..4.0, m in 1u64..50, terms in 10u64..200) {
        let s = RadiusSchedule::power_exp(alpha).unwrap();
        let short = tail_series(&s, m, terms).unwrap();
        let long = tail_series(&s, m, terms * 50).unwrap();
        prop_assert!(short.lower <= long.upper * (1.0 + 1e-12));
        prop_assert!(long.lower >= short.partial_sum);
        prop_assert!(long.partial_sum <= short.upper * (1.0 + 1e-12));
        prop_assert!(long.lower <= short.upper * (1.0 + 1e-12));
    }
}
