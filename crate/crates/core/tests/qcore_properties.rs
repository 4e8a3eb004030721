use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qpv_core::montecarlo::{wilson_interval, z_for_confidence};
use qpv_core::qcore::{
    bell_state, coherent_information, random_local_unitary, rng_from_seed, sample_povm, supports_orthogonal,
    von_neumann_entropy, werner_twirl, BellLabel, DensityMatrix, Operator, Povm,
};
use rand::Rng;
use rand_distr::StandardNormal;

fn ginibre(n: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = rng_from_seed(seed);
    DMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn random_state(dims: &[usize], seed: u64) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let g = ginibre(n, seed);
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(Operator::new(m / tr, dims.to_vec()).unwrap().hermitian_part()).unwrap()
}

fn random_operator(dims: &[usize], seed: u64) -> Operator {
    let n: usize = dims.iter().product();
    Operator::new(ginibre(n, seed), dims.to_vec()).unwrap()
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..4, 1..4).prop_filter("size", |d| d.iter().product::<usize>() <= 27)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_keeps_trace(dims in dims_strategy(), seed in any::<u64>(), mask in any::<u8>()) {
        let op = random_operator(&dims, seed);
        let mut keep: Vec<usize> = (0..dims.len()).filter(|i| mask >> i & 1 == 1).collect();
        if keep.is_empty() {
            keep.push(0);
        }
        let reduced = op.partial_trace(&keep).unwrap();
        prop_assert!((reduced.trace() - op.trace()).norm() < 1e-10 * (1.0 + op.trace().norm()));
    }

    #[test]
    fn partial_transpose_is_an_involution(dims in dims_strategy(), seed in any::<u64>(), sys in 0usize..3) {
        let op = random_operator(&dims, seed);
        let sys = sys % dims.len();
        let twice = op.partial_transpose(sys).unwrap().partial_transpose(sys).unwrap();
        prop_assert!(twice.max_abs_diff(&op) == 0.0);
    }

    #[test]
    fn kron_is_associative(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let a = random_operator(&[2], s1);
        let b = random_operator(&[3], s2);
        let c = random_operator(&[2], s3);
        let left = a.kron(&b).kron(&c);
        let right = a.kron(&b.kron(&c));
        prop_assert_eq!(left.dims(), right.dims());
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn entropy_bounds_and_unitary_invariance(d in 2usize..5, seed in any::<u64>()) {
        let rho = random_state(&[d], seed);
        let s = von_neumann_entropy(&rho).unwrap();
        prop_assert!(s >= -1e-12 && s <= (d as f64).log2() + 1e-12);
        let mut rng = rng_from_seed(seed ^ 0x5555);
        let u = random_local_unitary(d, &mut rng).unwrap();
        let rotated = DensityMatrix::new(rho.conjugate_by(&u).unwrap().hermitian_part()).unwrap();
        prop_assert!((von_neumann_entropy(&rotated).unwrap() - s).abs() < 1e-8);
    }

    #[test]
    fn coherent_information_is_bounded(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let rho = random_state(&[da, db], seed);
        let ic = coherent_information(&rho).unwrap();
        prop_assert!(ic <= (da as f64).log2() + 1e-9);
        // Swapping roles: S(A) - S(AB), so the two differ by S(B) - S(A).
        let swapped = DensityMatrix::new(rho.permute_factors(&[1, 0]).unwrap()).unwrap();
        let ic_swapped = coherent_information(&swapped).unwrap();
        let sa = von_neumann_entropy(&rho.partial_trace(&[0]).unwrap()).unwrap();
        let sb = von_neumann_entropy(&rho.partial_trace(&[1]).unwrap()).unwrap();
        prop_assert!((ic - ic_swapped - (sb - sa)).abs() < 1e-9);
        prop_assert_eq!((ic - ic_swapped).abs() < 1e-9, (sa - sb).abs() < 1e-9);
    }

    #[test]
    fn twirl_is_idempotent(seed in any::<u64>()) {
        let rho = random_state(&[2, 2], seed);
        let once = werner_twirl(&rho).unwrap();
        let twice = werner_twirl(&once).unwrap();
        prop_assert!(twice.max_abs_diff(&once) < 1e-10);
    }
}

#[test]
fn twirl_commutes_with_u_tensor_u() {
    let twirled = werner_twirl(&random_state(&[2, 2], 11)).unwrap();
    let mut rng = rng_from_seed(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let u = random_local_unitary(2, &mut rng).unwrap();
        let uu = u.kron(&u);
        let commutator = &uu.matmul(&twirled).unwrap() - &twirled.matmul(&uu).unwrap();
        worst = worst.max(commutator.frobenius_norm());
    }
    assert!(worst <= 1e-7, "commutator norm {worst}");
}

#[test]
fn sampling_frequencies_match_born_rule() {
    let rho = random_state(&[2, 2], 5);
    let povm = Povm::bell_basis();
    let probs = povm.probabilities(&rho).unwrap();
    let mut rng = rng_from_seed(99);
    let n = 1_000_000u64;
    let mut counts = vec![0u64; povm.len()];
    for _ in 0..n {
        counts[sample_povm(&rho, &povm, &mut rng).unwrap()] += 1;
    }
    let z = z_for_confidence(0.999);
    for (c, p) in counts.iter().zip(&probs) {
        let (lo, hi) = wilson_interval(*c, n, z);
        assert!(lo <= *p && *p <= hi, "p = {p}, interval ({lo}, {hi})");
    }
}

#[test]
fn orthogonal_support_examples() {
    let phi = DensityMatrix::new(bell_state(BellLabel::PHI_PLUS)).unwrap();
    let psi = DensityMatrix::new(bell_state(BellLabel::PSI_MINUS)).unwrap();
    assert!(supports_orthogonal(&phi, &psi).unwrap());
    let rho = random_state(&[2, 2], 3);
    assert!(!supports_orthogonal(&rho, &rho).unwrap());
    assert!(supports_orthogonal(&phi, &DensityMatrix::maximally_mixed(&[2])).is_err());
}
