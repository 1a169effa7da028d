//! Structural invariants of families, choice models and demand laws.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statcal::model::{check_substitutability, check_truncation_ratio, default_c_grid, DemandKind};
use statcal::{AssortmentFamily, DemandDistribution, FamilySpec};

fn family_spec(n: usize, m: usize) -> impl Strategy<Value = FamilySpec> {
    prop_oneof![
        Just(FamilySpec::AllSubsets),
        (0..=n).prop_map(|k| FamilySpec::Capacity { k }),
        (
            prop::collection::vec(prop::collection::vec(0..m, 0..=m), n),
            prop::option::of(0..=n)
        )
            .prop_map(|(prices, capacity)| FamilySpec::AllowedPrices { prices, capacity }),
    ]
}

proptest! {
    #[test]
    fn enumerated_families_are_downward_closed(
        (n, m, spec) in (1usize..=3, 1usize..=3).prop_flat_map(|(n, m)| (Just(n), Just(m), family_spec(n, m)))
    ) {
        let fam = AssortmentFamily::enumerate(n, m, &spec).unwrap();
        prop_assert!(fam.check_downward_closed().is_ok());
        prop_assert!(fam.get(0).is_empty());
        for (k, a) in fam.iter().enumerate() {
            prop_assert!(!a.has_repeated_item());
            prop_assert_eq!(fam.index_of(a), Some(k));
        }
        // canonical order
        let list: Vec<_> = fam.iter().cloned().collect();
        let mut sorted = list.clone();
        sorted.sort();
        prop_assert_eq!(list, sorted);
    }

    #[test]
    fn ranked_lists_are_single_purchase_and_substitutable(inst in common::ranked_instance(3)) {
        for s in 0..inst.family().len() {
            let total: f64 = inst.law(0, s).means().iter().sum();
            prop_assert!(total <= 1.0 + 1e-12);
        }
        let v = check_substitutability(inst.choice(), inst.family(), 0).unwrap();
        prop_assert!(v.is_empty(), "{:?}", v);
    }

    #[test]
    fn bernoulli_demand_passes_truncation(a in 1u32..=100, b in 1u32..=100, scale in 1u32..=10) {
        let (a, b) = (f64::from(a) / 100.0, f64::from(b) / 100.0);
        let (d1, d2) = (DemandDistribution::bernoulli(a).unwrap(), DemandDistribution::bernoulli(b).unwrap());
        prop_assert!(check_truncation_ratio(&d1, &d2, &default_c_grid(&d1, &d2)).unwrap().passed);
        // {0, s} demand at a common scale behaves the same way
        let s = f64::from(scale) / 10.0;
        let two = |p: f64| DemandDistribution::finite(vec![(0.0, 1.0 - p), (s, p)]).unwrap();
        let (d1, d2) = (two(a), two(b));
        prop_assert!(check_truncation_ratio(&d1, &d2, &default_c_grid(&d1, &d2)).unwrap().passed);
    }

    #[test]
    fn distributions_are_normalized(n in 1u32..=12, beta in 0.0f64..=1.0, lambda in 0.1f64..5.0) {
        // the 64-cell midpoint grid only approximates the exponential's mean
        for (kind, tol) in [
            (DemandKind::ScaledBinomial { n, beta }, 1e-12),
            (DemandKind::TruncatedExponential { lambda, grid: 64 }, 1e-3),
        ] {
            let d = DemandDistribution::from_kind(kind).unwrap();
            let mass: f64 = d.atoms().iter().map(|a| a.1).sum();
            prop_assert!((mass - 1.0).abs() <= 1e-12);
            prop_assert!(d.atoms().iter().all(|a| (0.0..=1.0).contains(&a.0) && a.1 > 0.0));
            prop_assert!((d.mean() - d.closed_form_mean()).abs() <= tol);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Marginal means agree with the joint sampler within 4σ over 10^5 draws.
    #[test]
    fn sampler_marginals_match_means(inst in common::ranked_instance(1), seed in any::<u64>()) {
        const DRAWS: usize = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for s in 0..inst.family().len() {
            let law = inst.law(0, s);
            let mut sums = vec![0.0; law.products().len()];
            for _ in 0..DRAWS {
                law.sample(&mut rng, &mut out);
                for (acc, x) in sums.iter_mut().zip(&out) {
                    *acc += x;
                }
            }
            for (k, &q) in law.means().iter().enumerate() {
                let sigma = (q * (1.0 - q) / DRAWS as f64).sqrt();
                let est = sums[k] / DRAWS as f64;
                prop_assert!((est - q).abs() <= 4.0 * sigma + 1e-12, "product {k}: {est} vs {q}");
            }
        }
    }
}
