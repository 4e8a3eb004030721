use qpv_core::montecarlo::{compare, cross_check, simulate, simulate_resolved, simulate_sequential, RunConfig};
use qpv_core::protocols::sym_antisym_protocol;
use qpv_core::strategies::{evaluate_strategy_exact, locc_xor};

#[test]
fn identical_configs_give_identical_stats() {
    let cfg = RunConfig::new("bell", "loqc-bell-cloner", 50_000, 42).with_chunks(5);
    let a = simulate(&cfg).unwrap();
    let b = simulate(&cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn parallel_matches_sequential_chunk_policy() {
    for chunks in [1, 3, 16] {
        let cfg = RunConfig::new("sym-antisym-2", "locc-xor-2", 30_001, 9).with_chunks(chunks);
        assert_eq!(simulate(&cfg).unwrap(), simulate_sequential(&cfg).unwrap());
    }
}

#[test]
fn chunk_count_changes_stream() {
    let a = simulate(&RunConfig::new("sym-antisym", "locc-xor", 20_000, 1).with_chunks(2)).unwrap();
    let b = simulate(&RunConfig::new("sym-antisym", "locc-xor", 20_000, 1).with_chunks(3)).unwrap();
    assert_ne!(a.counts, b.counts);
}

#[test]
fn teleport_conclusive_rounds_are_always_correct() {
    let cfg = RunConfig::new("qpv-generic", "teleport-guess", 10_000_000, 3).with_params(2, 2);
    let s = simulate(&cfg).unwrap();
    assert!(s.counts.conclusive > 0);
    assert_eq!(s.counts.successes, s.counts.conclusive);
    assert!(s.conclusive.contains(1.0 / 8.0));
}

#[test]
fn xor_and_bell_guess_cross_check() {
    for (p, s) in [("sym-antisym", "locc-xor"), ("bell", "locc-bell-guess")] {
        let c = cross_check(&RunConfig::new(p, s, 200_000, 17)).unwrap();
        assert!(c.passed(), "{p}/{s}: {:?}", c.flags);
    }
}

#[test]
fn mislabeled_strategy_is_flagged() {
    // XOR samples checked against exact values of a different attack.
    let spec = sym_antisym_protocol();
    let cfg = RunConfig::new("sym-antisym", "locc-xor", 100_000, 5);
    let stats = simulate_resolved(&cfg, &spec, &locc_xor()).unwrap();
    let mut wrong = evaluate_strategy_exact(&spec, &locc_xor()).unwrap();
    wrong.success = 0.5;
    wrong.local_success_a = 0.5;
    let flags = compare(&stats, &wrong);
    assert!(flags.iter().any(|f| f.quantity == "success"));
    assert!(flags.iter().any(|f| f.quantity == "local_a"));
    let right = evaluate_strategy_exact(&spec, &locc_xor()).unwrap();
    assert!(compare(&stats, &right).is_empty());
}

#[test]
fn stats_invariants() {
    let s = simulate(&RunConfig::new("bell", "loqc-bell-forward", 40_000, 8)).unwrap();
    let c = s.counts;
    assert!(c.successes <= c.agreements && c.agreements <= c.conclusive && c.conclusive <= c.total);
    for iv in [s.success, s.conclusive, s.conditional, s.local_a, s.local_b] {
        assert!(0.0 <= iv.lo && iv.lo <= iv.rate && iv.rate <= iv.hi && iv.hi <= 1.0);
    }
}
