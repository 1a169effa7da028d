//! Random small instances shared by the property tests.
#![allow(dead_code)]

use proptest::prelude::*;
use serde_json::json;
use statcal::model::build_instance;
use statcal::{Instance, InstanceConfig};

/// Strictly decreasing prices drawn from 1..=20.
pub fn prices(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::sample::subsequence((1..=20).collect::<Vec<u32>>(), m)
        .prop_map(|mut v| {
            v.reverse();
            v.into_iter().map(f64::from).collect()
        })
}

/// Ranked lists over `n` items and `m` prices; weights normalized to 1.
pub fn lists(n: usize, m: usize) -> impl Strategy<Value = Vec<(f64, Vec<(usize, usize)>)>> {
    prop::collection::vec((1u32..=5, prop::collection::vec((0..n, 0..m), 0..=3)), 1..=4).prop_map(|raw| {
        let total: u32 = raw.iter().map(|r| r.0).sum();
        raw.into_iter()
            .map(|(w, mut order)| {
                let mut seen = Vec::new();
                order.retain(|p| {
                    let fresh = !seen.contains(p);
                    seen.push(*p);
                    fresh
                });
                (f64::from(w) / f64::from(total), order)
            })
            .collect()
    })
}

pub fn ranked_config(
    prices: &[f64],
    horizon: usize,
    inventories: &[f64],
    lists: &[(f64, Vec<(usize, usize)>)],
) -> InstanceConfig {
    let lists: Vec<_> = lists
        .iter()
        .map(|(p, order)| json!({"probability": p, "order": order}))
        .collect();
    serde_json::from_value(json!({
        "items": inventories.len(),
        "prices": prices,
        "horizon": horizon,
        "inventories": inventories,
        "assortment_family": {"kind": "all-subsets"},
        "choice_model": {"variant": "ranked-list", "lists": lists},
        "stationary": true,
    }))
    .unwrap()
}

/// Stationary ranked-list instance: n ≤ 2 items, m ≤ 3 prices, T ≤ `max_t`, b ≤ 3.
pub fn ranked_instance(max_t: usize) -> impl Strategy<Value = Instance> {
    (1usize..=2, 1usize..=3, 1..=max_t)
        .prop_flat_map(|(n, m, t)| {
            (
                prices(m),
                Just(t),
                prop::collection::vec(1u32..=3, n),
                lists(n, m),
            )
        })
        .prop_map(|(p, t, b, l)| {
            let b: Vec<f64> = b.into_iter().map(|b| f64::from(b).min(t as f64)).collect();
            build_instance(&ranked_config(&p, t, &b, &l)).unwrap()
        })
}

pub fn pricing_config(prices: &[f64], horizon: usize, b: f64, rows: serde_json::Value, stationary: bool) -> InstanceConfig {
    serde_json::from_value(json!({
        "items": 1,
        "prices": prices,
        "horizon": horizon,
        "inventories": [b],
        "assortment_family": {"kind": "all-subsets"},
        "choice_model": {"variant": "pricing", "demand": rows},
        "stationary": stationary,
    }))
    .unwrap()
}

/// Single-item Bernoulli pricing instance, one demand row per period.
pub fn pricing_instance(max_t: usize) -> impl Strategy<Value = Instance> {
    (1usize..=3, 1..=max_t, 1u32..=3)
        .prop_flat_map(|(m, t, b)| {
            (
                prices(m),
                Just(t),
                Just(b),
                prop::collection::vec(prop::collection::vec(0u32..=10, m), t),
            )
        })
        .prop_map(|(p, t, b, rows)| {
            let rows: Vec<Vec<f64>> = rows
                .into_iter()
                .map(|r| r.into_iter().map(|q| f64::from(q) / 10.0).collect())
                .collect();
            let b = f64::from(b).min(t as f64);
            build_instance(&pricing_config(&p, t, b, json!(rows), false)).unwrap()
        })
}

/// A deterministic calendar as family indices.
pub fn calendar_indices(inst: &Instance) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..inst.family().len(), inst.horizon())
}
