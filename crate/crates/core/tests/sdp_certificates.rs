use proptest::prelude::*;
use qpv_core::protocols::{bell_protocol, sym_antisym_protocol, sym_antisym_two_round};
use qpv_core::qcore::rational::ratio;
use qpv_core::qcore::{random_local_unitary, rng_from_seed, Operator};
use qpv_core::sdp::{
    closed_form_certificates, build, solve, solve_with_loss, verify_dual, verify_dual_exact, verify_primal,
    CertificateCase, DualCertificate, SdpProblem,
};

/// Separable measurement: rotated product basis, outcomes grouped by `assign`.
fn product_povm(p: &SdpProblem, seed: u64, assign: &[usize]) -> Vec<Operator> {
    let mut rng = rng_from_seed(seed);
    let mut local = Vec::new();
    for &d in p.dims() {
        local.push(random_local_unitary(d, &mut rng).unwrap());
    }
    let u = local.iter().skip(1).fold(local[0].clone(), |acc, x| acc.kron(x));
    let n: usize = p.dims().iter().product();
    let mut out = vec![Operator::zeros(p.dims()); p.len()];
    for i in 0..n {
        let proj = Operator::matrix_unit(i, i, p.dims()).conjugate_by(&u).unwrap();
        let slot = assign[i % assign.len()] % p.len();
        out[slot] = &out[slot] + &proj;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weak_duality_single_round(seed in any::<u64>(), assign in prop::collection::vec(0usize..2, 4)) {
        let p = build(&sym_antisym_protocol()).unwrap();
        let povm = product_povm(&p, seed, &assign);
        let primal = verify_primal(&p, &povm).unwrap();
        prop_assert!(primal.feasible);
        let dual = verify_dual(&p, &closed_form_certificates(CertificateCase::Single).to_float()).unwrap();
        prop_assert!(primal.value <= dual.bound + 1e-9);
    }

    #[test]
    fn weak_duality_bell(seed in any::<u64>(), assign in prop::collection::vec(0usize..4, 4)) {
        let p = build(&bell_protocol()).unwrap();
        let povm = product_povm(&p, seed, &assign);
        let primal = verify_primal(&p, &povm).unwrap();
        prop_assert!(primal.feasible);
        prop_assert!(primal.value <= 0.5 + 1e-9);
    }
}

#[test]
fn weak_duality_two_round_against_solver() {
    let p = build(&sym_antisym_two_round()).unwrap();
    let sol = solve(&p, 1e-6).unwrap();
    let dual = verify_dual(&p, &sol.certificate).unwrap();
    assert!(dual.valid);
    for seed in 0..8 {
        let povm = product_povm(&p, seed, &[0, 1, 1, 0, 1]);
        let primal = verify_primal(&p, &povm).unwrap();
        assert!(primal.feasible);
        assert!(primal.value <= dual.bound + 1e-9);
    }
}

#[test]
fn solver_meets_closed_form_certificates() {
    for (spec, which, target) in [
        (sym_antisym_protocol(), CertificateCase::Single, ratio(5, 6)),
        (sym_antisym_two_round(), CertificateCase::TwoRound, ratio(17, 18)),
    ] {
        let p = build(&spec).unwrap();
        let cert = closed_form_certificates(which);
        let exact = verify_dual_exact(&p, &cert).unwrap();
        assert!(exact.valid);
        assert_eq!(exact.bound, target);
        let sol = solve(&p, 1e-7).unwrap();
        assert!((sol.value - exact.bound_f64()).abs() <= 1e-5);
        let check = verify_primal(&p, &sol.povm).unwrap();
        assert!(check.feasible, "{:?}", check.residuals);
        assert!(check.value <= exact.bound_f64() + 1e-9);
    }
}

#[test]
fn certificate_json_round_trip() {
    let c = closed_form_certificates(CertificateCase::TwoRound).to_float();
    let text = serde_json::to_string(&c.to_json()).unwrap();
    let back = DualCertificate::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert!(back.y.max_abs_diff(&c.y) == 0.0);
    let p = build(&sym_antisym_two_round()).unwrap();
    assert!(verify_dual(&p, &back).unwrap().valid);
}

#[test]
fn dimension_mismatch_is_an_error() {
    let p = build(&sym_antisym_protocol()).unwrap();
    let wrong = vec![Operator::identity(&[2, 2, 2]), Operator::zeros(&[2, 2, 2])];
    assert!(verify_primal(&p, &wrong).is_err());
    let cert = DualCertificate {
        y: Operator::identity(&[2]),
        q: vec![Operator::zeros(&[2]); 2],
    };
    assert!(verify_dual(&p, &cert).is_err());
    let exact = closed_form_certificates(CertificateCase::TwoRound);
    assert!(verify_dual_exact(&p, &exact).is_err());
}

#[test]
fn loss_sweep_on_bell_is_flat() {
    let p = build(&bell_protocol()).unwrap();
    for eta in [0.25, 0.5, 0.75, 1.0] {
        let l = solve_with_loss(&p, eta, 1e-6).unwrap();
        assert!(l.reconstruction);
        assert!((l.conditional_value - 0.5).abs() <= 1e-4, "eta {eta}: {}", l.conditional_value);
    }
}

#[test]
fn loss_sweep_never_loses_to_full_transmission() {
    let p = build(&sym_antisym_protocol()).unwrap();
    let full = solve(&p, 1e-6).unwrap().value;
    let lossy = solve_with_loss(&p, 0.5, 1e-6).unwrap();
    assert!(lossy.conditional_value >= full - 1e-5);
    assert!(lossy.conditional_value <= lossy.conditional_upper + 1e-9);
}
