use cae_core::confidence::{eells, keynes, LeafAssignments};
use cae_core::testing::{random_case, GenConfig};
use cae_core::{build_graph, propagate, ArgumentGraph, BigRational, Method, PropagationOptions, Scalar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph(seed: u64, cfg: &GenConfig) -> ArgumentGraph {
    build_graph(random_case(&mut ChaCha8Rng::seed_from_u64(seed), cfg)).unwrap()
}

fn opts() -> PropagationOptions {
    PropagationOptions::default()
}

fn tops(g: &ArgumentGraph, a: &LeafAssignments<f64>) -> (f64, f64) {
    let p = propagate(g, a, Method::Product, &opts()).unwrap();
    let s = propagate(g, a, Method::SumOfDoubts, &opts()).unwrap();
    (p.top(g), s.top(g))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn sum_of_doubts_never_exceeds_product(seed in any::<u64>()) {
        let g = graph(seed, &GenConfig::default());
        let p = propagate(&g, g.assignments(), Method::Product, &opts()).unwrap();
        let s = propagate(&g, g.assignments(), Method::SumOfDoubts, &opts()).unwrap();
        for (node, sv) in &s.per_node {
            prop_assert!(*sv <= p.per_node[node] + 1e-12, "{}: {} > {}", node, sv, p.per_node[node]);
        }
    }

    #[test]
    fn raising_an_input_never_lowers_any_claim(seed in any::<u64>(), bump in 0.0f64..1.0) {
        let g = graph(seed, &GenConfig::default());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let a = g.assignments();
        let keys: Vec<_> = a.posterior.keys().chain(a.warrant_conf.keys()).cloned().collect();
        let node = &keys[rng.random_range(0..keys.len())];
        let old = *a.get(node).unwrap();
        let mut raised = a.clone();
        raised.set(node, old + (1.0 - old) * bump).unwrap();
        for m in [Method::Product, Method::SumOfDoubts] {
            let before = propagate(&g, a, m, &opts()).unwrap();
            let after = propagate(&g, &raised, m, &opts()).unwrap();
            for (n, v) in &before.per_node {
                prop_assert!(after.per_node[n] >= *v - 1e-12, "{} {}", m, n);
            }
        }
    }

    #[test]
    fn values_stay_in_unit_interval(seed in any::<u64>()) {
        let g = graph(seed, &GenConfig::default());
        for m in [Method::Product, Method::SumOfDoubts] {
            let v = propagate(&g, g.assignments(), m, &opts()).unwrap();
            prop_assert!(v.per_node.values().all(|x| (0.0..=1.0).contains(x)));
            if m == Method::Product {
                prop_assert!(v.raw_per_node.values().all(|x| (0.0..=1.0).contains(x)));
            } else {
                prop_assert!(v.raw_per_node.values().all(|x| *x <= 1.0));
            }
        }
    }

    #[test]
    fn keynes_and_eells_agree_in_sign(prior in 1e-6f64..=1.0, posterior in 1e-6f64..=1.0) {
        let k = keynes(prior, posterior).unwrap();
        let e = eells(prior, posterior);
        prop_assert_eq!(k.partial_cmp(&0.0), e.partial_cmp(&0.0));
        prop_assert!((-1.0..=1.0).contains(&e));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    /// With total doubt at most 1 neither method clamps, and the gap
    /// between product and sum-of-doubts shrinks as every doubt is scaled
    /// toward 0.
    #[test]
    fn method_gap_shrinks_toward_certainty(seed in any::<u64>()) {
        let cfg = GenConfig { unsupported_leaves: false, ..Default::default() };
        let g = graph(seed, &cfg);
        let base = g.assignments();
        let total: f64 = base.posterior.values().chain(base.warrant_conf.values()).map(|x| 1.0 - x).sum();
        let norm = if total > 1.0 { 1.0 / total } else { 1.0 };
        let scaled = |t: f64| {
            let mut a = base.clone();
            a.posterior.values_mut().chain(a.warrant_conf.values_mut()).for_each(|x| *x = 1.0 - t * norm * (1.0 - *x));
            a
        };
        let mut last = f64::INFINITY;
        for step in (0..=10).rev() {
            let t = f64::from(step) / 10.0;
            let (p, s) = tops(&g, &scaled(t));
            let raw_s = propagate(&g, &scaled(t), Method::SumOfDoubts, &opts()).unwrap().raw_per_node[&g.top_claim().id];
            prop_assert!(raw_s >= -1e-12, "sum of doubts clamped at t={}", t);
            let gap = p - s;
            prop_assert!(gap >= -1e-12);
            prop_assert!(gap <= last + 1e-12, "gap grew at t={}: {} > {}", t, gap, last);
            last = gap;
        }
        prop_assert!(last.abs() < 1e-12);
    }

    #[test]
    fn exact_and_float_agree(seed in any::<u64>()) {
        let g = graph(seed, &GenConfig::default());
        let exact: LeafAssignments<BigRational> = g.assignments().convert().unwrap();
        for m in [Method::Product, Method::SumOfDoubts] {
            let f = propagate(&g, g.assignments(), m, &opts()).unwrap();
            let q = propagate(&g, &exact, m, &opts()).unwrap();
            for (n, v) in &f.per_node {
                prop_assert!((q.per_node[n].as_f64() - v).abs() < 1e-9, "{} {}", m, n);
            }
        }
    }
}
