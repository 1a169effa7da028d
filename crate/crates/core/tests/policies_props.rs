//! Guarantee formulas and structural properties of the constructed calendars.

mod common;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use serde_json::json;
use statcal::eval::{exact_expected_revenue, Substitution};
use statcal::lp::{build_cdlp_n, build_cdlp_s, build_dlp_s, two_price_support};
use statcal::model::build_instance;
use statcal::policies::{
    delta_apx, delta_apx_exact, lp_sol_policy, nonstationary_threshold_policy, poisson_floor, reservation_delta,
    stationary_randomized_policy, DeterministicCalendar, RandomizedCalendar,
};
use statcal::Instance;

#[test]
fn delta_apx_is_non_increasing_in_horizon() {
    for b in 1..=10u64 {
        let mut prev = f64::INFINITY;
        for t in b..=200 {
            let d = delta_apx(t, b as f64).unwrap();
            assert!(d <= prev + 1e-12, "b={b}, T={t}: {d} > {prev}");
            assert!(d >= poisson_floor(b as f64) - 1e-12, "b={b}, T={t} below the Poisson floor");
            prev = d;
        }
    }
}

#[test]
fn delta_apx_known_values() {
    assert_eq!(delta_apx_exact::<BigRational>(2, 1).unwrap(), statcal::scalar::ratio(3, 4));
    assert_eq!(delta_apx_exact::<BigRational>(3, 2).unwrap(), statcal::scalar::ratio(23, 27));
    assert!((poisson_floor(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    assert!((delta_apx(10_000, 1.0).unwrap() - poisson_floor(1.0)).abs() < 1e-3);
}

proptest! {
    #[test]
    fn delta_apx_agrees_across_scalars(t in 1u64..=40, b in 1u64..=40) {
        prop_assume!(b <= t);
        let float = delta_apx(t, b as f64).unwrap();
        let exact = delta_apx_exact::<BigRational>(t, b).unwrap().to_f64().unwrap();
        let single = delta_apx_exact::<f32>(t, b).unwrap() as f64;
        prop_assert!((float - exact).abs() <= 1e-12);
        prop_assert!((single - exact).abs() <= 1e-4);
    }

    #[test]
    fn reservation_delta_is_a_probability(b in 6.0f64..1e7) {
        let d = reservation_delta(b);
        prop_assert!(d > 0.0 && d < 1.0);
    }

    /// A single price with q = b/T makes the stationary bound an equality.
    #[test]
    fn single_price_instances_are_tight(t in 1usize..=12, b in 1u32..=12) {
        prop_assume!(b as usize <= t);
        let q = f64::from(b) / t as f64;
        let inst = build_instance(&common::pricing_config(&[1.0], t, f64::from(b), json!([[q]]), true)).unwrap();
        let opt = build_cdlp_s(&inst).unwrap().solve().unwrap().objective;
        let cal = DeterministicCalendar::new(vec![1; t]).to_randomized();
        let v = exact_expected_revenue(&inst, &cal, Substitution::Static).unwrap();
        prop_assert!((v - delta_apx(t as u64, f64::from(b)).unwrap() * opt).abs() <= 1e-12);
    }

    #[test]
    fn lp_policies_are_distributions(inst in common::ranked_instance(5)) {
        let s = build_cdlp_s(&inst).unwrap().solve().unwrap();
        let n = build_cdlp_n(&inst).unwrap().solve().unwrap();
        for cal in [
            lp_sol_policy(&s, &inst).unwrap(),
            stationary_randomized_policy(&s, &inst).unwrap(),
            lp_sol_policy(&n, &inst).unwrap(),
            nonstationary_threshold_policy(&n, &inst).unwrap(),
        ] {
            assert_distribution(&cal, &inst)?;
        }
    }

    #[test]
    fn two_price_support_is_ordered(inst in stationary_bernoulli()) {
        let sol = build_dlp_s(&inst).unwrap().solve().unwrap();
        let sup = two_price_support(&sol).unwrap();
        prop_assert!(sup.x_high >= 0.0 && sup.x_low >= 0.0);
        prop_assert!(sup.x_high + sup.x_low <= 1.0 + 1e-9);
        prop_assert!(inst.prices()[sup.high] >= inst.prices()[sup.low]);
    }

    /// Moving a higher price one period earlier never loses revenue.
    #[test]
    fn swapping_an_ascending_pair_never_hurts(
        (inst, mut cal, t, hi, lo) in stationary_bernoulli()
            .prop_filter("needs two prices and two periods", |i| i.n_prices() >= 2 && i.horizon() >= 2)
            .prop_flat_map(|inst| {
                let (m, len) = (inst.n_prices(), inst.horizon());
                (Just(inst), prop::collection::vec(0..m, len), 0..len - 1, 0..m - 1, 1..m)
            })
    ) {
        prop_assume!(hi < lo);
        // prices are sorted high to low: index `lo` is the cheaper one
        cal[t] = lo;
        cal[t + 1] = hi;
        let to_cal = |prices: &[usize]| {
            let idx = prices.iter().map(|&j| inst.family().singleton(0, j).unwrap()).collect();
            DeterministicCalendar::new(idx).to_randomized()
        };
        let mut swapped = cal.clone();
        swapped.swap(t, t + 1);
        let before = exact_expected_revenue(&inst, &to_cal(&cal), Substitution::Static).unwrap();
        let after = exact_expected_revenue(&inst, &to_cal(&swapped), Substitution::Static).unwrap();
        prop_assert!(after >= before - 1e-12, "{before} -> {after}");
    }
}

fn assert_distribution(cal: &RandomizedCalendar, inst: &Instance) -> Result<(), TestCaseError> {
    prop_assert_eq!(cal.horizon(), inst.horizon());
    for t in 0..cal.horizon() {
        let total: f64 = cal.period(t).iter().map(|e| e.1).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9, "period {t} sums to {total}");
        prop_assert!(cal.period(t).iter().all(|&(s, z)| s < inst.family().len() && z >= 0.0));
    }
    Ok(())
}

/// Stationary single-item Bernoulli instance, T ≤ 8.
fn stationary_bernoulli() -> impl Strategy<Value = Instance> {
    (1usize..=3, 1usize..=8, 1u32..=4)
        .prop_flat_map(|(m, t, b)| (common::prices(m), Just(t), Just(b), prop::collection::vec(1u32..=10, m)))
        .prop_map(|(p, t, b, q)| {
            let q: Vec<f64> = q.into_iter().map(|x| f64::from(x) / 10.0).collect();
            let b = f64::from(b).min(t as f64);
            build_instance(&common::pricing_config(&p, t, b, json!([q]), true)).unwrap()
        })
}
