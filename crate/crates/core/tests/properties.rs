use proptest::prelude::*;

use pbv_core::simulator::{run_circuit_with, OraclePath, DEFAULT_MAX_QUBITS};
use pbv_core::{rq_profile, BitString, KeySet};

fn keysets() -> impl Strategy<Value = KeySet> {
    (1usize..=5)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(0u64..(1 << n), 1..=(1usize << n).min(6))))
        .prop_map(|(n, values)| {
            KeySet::new(values.into_iter().map(|v| BitString::from_value(v, n).unwrap()).collect())
                .unwrap()
        })
}

proptest! {
    #[test]
    fn paths_agree(keys in keysets()) {
        let g = run_circuit_with(&keys, OraclePath::Gate, DEFAULT_MAX_QUBITS).unwrap();
        let f = run_circuit_with(&keys, OraclePath::Fast, DEFAULT_MAX_QUBITS).unwrap();
        prop_assert!(g.state.max_abs_diff(&f.state) < 1e-10);
    }

    #[test]
    fn marginal_is_key_multiplicity(keys in keysets()) {
        let out = run_circuit_with(&keys, OraclePath::Gate, DEFAULT_MAX_QUBITS).unwrap();
        let dist = out.exact_distribution().unwrap();
        let k = keys.len() as f64;
        for x in 0..1u64 << keys.width() {
            let b = keys.keys().iter().filter(|s| s.value() == x).count() as f64;
            prop_assert!((dist.probability(x) - b / k).abs() < 1e-10);
        }
    }

    #[test]
    fn distinct_keys_give_uniform_superposition(keys in keysets()) {
        prop_assume!(keys.all_distinct());
        let out = run_circuit_with(&keys, OraclePath::Fast, DEFAULT_MAX_QUBITS).unwrap();
        let data = out.data_register_amplitudes().unwrap();
        let amp = 1.0 / (keys.len() as f64).sqrt();
        for (x, a) in data.iter().enumerate() {
            let want = if keys.keys().iter().any(|s| s.value() == x as u64) { amp } else { 0.0 };
            prop_assert!((a.norm() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn profile_counts_bounded_by_k(keys in keysets()) {
        let p = rq_profile(&keys);
        prop_assert_eq!(p.width(), keys.width());
        prop_assert!(p.counts().iter().all(|&r| r <= keys.len()));
    }
}
