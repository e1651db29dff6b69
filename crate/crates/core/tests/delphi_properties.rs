use cae_core::delphi::{
    assign_roles, calibration, credible_interval, run_session, DelphiConfig, Panel, SimulatedBackend,
};
use proptest::prelude::*;

fn panel(n: usize) -> Panel {
    let roles: Vec<String> = ["Economist", "Engineer", "Ethicist"].iter().map(|s| s.to_string()).collect();
    assign_roles(n, &roles).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sessions_are_reproducible_and_bounded(
        seed in any::<u64>(),
        centre in 0.0f64..=1.0,
        noise in 0.0f64..0.4,
        pull in 0.0f64..=1.0,
        n in 1usize..20,
        max_rounds in 1usize..7,
    ) {
        let backend = SimulatedBackend { centre, noise, pull };
        let cfg = DelphiConfig { seed, max_rounds, ..Default::default() };
        let s = run_session("scenario", &panel(n), &cfg, &backend);
        let again = run_session("scenario", &panel(n), &cfg, &backend);
        match (s, again) {
            (Ok(s), Ok(again)) => {
                prop_assert_eq!(s.transcript(), again.transcript());
                prop_assert!(!s.rounds.is_empty() && s.rounds.len() <= max_rounds);
                let last = s.final_round();
                let lo = last.responses.values().copied().fold(f64::INFINITY, f64::min);
                let hi = last.responses.values().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(lo <= s.final_estimate && s.final_estimate <= hi);
                prop_assert!((s.weights.values().sum::<f64>() - 1.0).abs() < 1e-9);
                if let Some(r) = s.consensus_reached_at {
                    prop_assert_eq!(r, s.rounds.len());
                    prop_assert!(s.rounds[r - 1].std < cfg.consensus_sigma);
                }
                for (i, r) in s.rounds.iter().enumerate() {
                    prop_assert_eq!(r.index, i + 1);
                    prop_assert!(r.responses.values().all(|v| (0.0..=1.0).contains(v)));
                }
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            _ => prop_assert!(false, "same inputs gave different outcomes"),
        }
    }

    #[test]
    fn interval_brackets_posterior_mean(p in 0.0f64..=1.0, k in 0.0f64..500.0, level in 0.5f64..0.999) {
        let (lo, hi) = credible_interval(p, k, level).unwrap();
        let mean = (1.0 + p * k) / (2.0 + k);
        prop_assert!(lo <= mean && mean <= hi);
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
    }

    #[test]
    fn interval_narrows_with_more_pseudo_counts(p in 0.0f64..=1.0, k in 1.0f64..200.0, extra in 1.0f64..200.0) {
        let (a, b) = credible_interval(p, k, 0.95).unwrap();
        let (c, d) = credible_interval(p, k + extra, 0.95).unwrap();
        prop_assert!(d - c < b - a);
    }

    #[test]
    fn brier_is_minimised_by_the_outcomes(
        outcomes in prop::collection::vec(0u8..=1, 1..20),
        idx in any::<prop::sample::Index>(),
        delta in 0.001f64..1.0,
    ) {
        let truth: Vec<f64> = outcomes.iter().map(|&o| f64::from(o)).collect();
        prop_assert_eq!(calibration(&truth, &outcomes).unwrap(), 0.0);
        let mut off = truth.clone();
        let i = idx.index(off.len());
        off[i] = if outcomes[i] == 1 { 1.0 - delta } else { delta };
        prop_assert!(calibration(&off, &outcomes).unwrap() > 0.0);
    }
}
