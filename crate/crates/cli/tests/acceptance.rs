//! Acceptance gate. One PASS/FAIL line per criterion; exits nonzero on any failure.
//!
//! Each check goes through the library directly instead of the `paper-suite`
//! code path, except the last one which exercises the binary end to end.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qpv_core::bounds::{
    cloning_bound, cloning_bound_exact, entanglement_cost, hashing_alpha_root, qc_success_upper, teleport_fidelity,
    werner_entropy,
};
use qpv_core::montecarlo::{cross_check, simulate, wilson_interval, z_for_confidence, RunConfig};
use qpv_core::protocols::{bell_protocol, protocol_by_name, sym_antisym_protocol, sym_antisym_two_round, ProtocolParams};
use qpv_core::qcore::rational::ratio;
use qpv_core::qcore::{
    bell_state, entropy_of_spectrum, random_density_matrix, random_local_unitary, rng_from_seed, sample_povm,
    supports_orthogonal, werner_twirl, BellLabel, DensityMatrix, Povm,
};
use qpv_core::sdp::{self, closed_form_certificates, verify_dual_exact, CertificateCase};
use qpv_core::strategies::{
    evaluate_strategy_exact, locc_bell_computational_guess, locc_xor, locc_xor_two_round, loqc_exchange,
    post_exchange_state, teleport_guess_attack, Strategy, SHIPPED_PAIRS,
};

type Check = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Check);

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn sdp_single_round() -> Check {
    let t = Instant::now();
    let p = sdp::build(&sym_antisym_protocol()).map_err(err)?;
    let value = sdp::solve(&p, 1e-7).map_err(err)?.value;
    let exact = verify_dual_exact(&p, &closed_form_certificates(CertificateCase::Single)).map_err(err)?;
    let elapsed = t.elapsed();
    let ok = (value - 5.0 / 6.0).abs() <= 1e-5
        && exact.valid
        && exact.bound == ratio(5, 6)
        && elapsed < Duration::from_secs(5);
    Ok((ok, format!("value {value:.9}, certificate {} in {:.2?}", exact.bound_string(), elapsed)))
}

fn sdp_two_round() -> Check {
    let t = Instant::now();
    let p = sdp::build(&sym_antisym_two_round()).map_err(err)?;
    let value = sdp::solve(&p, 1e-7).map_err(err)?.value;
    let cert = closed_form_certificates(CertificateCase::TwoRound);
    let exact = verify_dual_exact(&p, &cert).map_err(err)?;
    let spectrum = cert.q[1].to_operator().eigenvalues().map_err(err)?;
    let elapsed = t.elapsed();
    let in_set = spectrum
        .iter()
        .all(|l| [0.0, 1.0 / 18.0, 1.0 / 9.0].iter().any(|t| (l - t).abs() <= 1e-9));
    let ok = p.dims().iter().product::<usize>() == 16
        && (value - 17.0 / 18.0).abs() <= 1e-5
        && exact.valid
        && exact.bound == ratio(17, 18)
        && in_set
        && elapsed < Duration::from_secs(60);
    Ok((
        ok,
        format!("value {value:.9}, certificate {}, Q1 spectrum ok {in_set} in {:.2?}", exact.bound_string(), elapsed),
    ))
}

fn bell_optimum() -> Check {
    let p = sdp::build(&bell_protocol()).map_err(err)?;
    let value = sdp::solve(&p, 1e-7).map_err(err)?.value;
    let mut ok = p.len() == 4 && (value - 0.5).abs() <= 1e-4;
    let mut sweep = Vec::new();
    for eta in [0.25, 0.5, 0.75, 1.0] {
        let v = sdp::solve_with_loss(&p, eta, 1e-6).map_err(err)?.conditional_value;
        ok &= (v - 0.5).abs() <= 1e-3;
        sweep.push(format!("{v:.6}"));
    }
    Ok((ok, format!("value {value:.6}, loss sweep [{}]", sweep.join(", "))))
}

fn strategy_exactness() -> Check {
    let xor = evaluate_strategy_exact(&sym_antisym_protocol(), &locc_xor()).map_err(err)?.success;
    let two = evaluate_strategy_exact(&sym_antisym_two_round(), &locc_xor_two_round()).map_err(err)?.success;
    let guess = evaluate_strategy_exact(&bell_protocol(), &locc_bell_computational_guess()).map_err(err)?.success;
    let exch = evaluate_strategy_exact(&sym_antisym_two_round(), &loqc_exchange()).map_err(err)?.success;
    let gap = exch - two;
    let eps = 4.0 * f64::EPSILON;
    let ok = (xor - 5.0 / 6.0).abs() <= eps
        && (two - 17.0 / 18.0).abs() <= eps
        && (guess - 0.5).abs() <= eps
        && (exch - 1.0).abs() <= eps
        && (gap - 1.0 / 18.0).abs() <= eps;
    Ok((ok, format!("xor {xor} two-round {two} guess {guess} exchange {exch} separation {gap}")))
}

fn inside(k: u64, n: u64, x: f64) -> bool {
    let (lo, hi) = wilson_interval(k, n, z_for_confidence(0.999));
    lo - 1e-12 <= x && x <= hi + 1e-12
}

fn monte_carlo() -> Check {
    let t = Instant::now();
    let mut ok = true;
    let mut flags = 0;
    for (p, s, d, k) in SHIPPED_PAIRS {
        let c = cross_check(&RunConfig::new(p, s, 1_000_000, 1).with_params(d, k)).map_err(err)?;
        let n = c.stats.counts.total;
        ok &= n == 1_000_000
            && inside(c.stats.counts.successes, n, c.exact.success)
            && inside(c.stats.counts.conclusive, n, c.exact.conclusive);
        flags += c.flags.len();
    }
    let elapsed = t.elapsed();
    ok &= flags == 0 && elapsed < Duration::from_secs(120);
    Ok((ok, format!("{} pairs, {flags} flags in {:.2?}", SHIPPED_PAIRS.len(), elapsed)))
}

fn hashing_chain() -> Check {
    let a = hashing_alpha_root(0.5).map_err(err)?;
    let residual = (1.0 - werner_entropy(a).map_err(err)? - 0.5).abs();
    let qc = qc_success_upper(a).map_err(err)?;
    let ok = residual <= 1e-8 && a <= 0.902 && (0.925..=0.926).contains(&qc);
    Ok((ok, format!("alpha* {a:.10} residual {residual:e} qc upper {qc:.10}")))
}

fn cloning_chain() -> Check {
    let mut ok = cloning_bound_exact(2).map_err(err)? == ratio(3, 4) && cloning_bound(2).map_err(err)? == 0.75;
    for d in [2usize, 3, 4] {
        let df = d as f64;
        ok &= teleport_fidelity(1.0, d).map_err(err)? == 1.0;
        ok &= (teleport_fidelity(1.0 / (df * df), d).map_err(err)? - 1.0 / df).abs() <= 1e-15;
    }
    Ok((ok, "cloning bound 3/4, teleport fidelity endpoints for d = 2, 3, 4".into()))
}

fn loss_attack() -> Check {
    let mut ok = true;
    let mut rates = Vec::new();
    for (d, k) in [(2usize, 1usize), (2, 2), (3, 2)] {
        let spec = protocol_by_name("qpv-generic", ProtocolParams { d, k }).map_err(err)?;
        let e = evaluate_strategy_exact(&spec, &teleport_guess_attack(d, k).map_err(err)?).map_err(err)?;
        let s = simulate(&RunConfig::new("qpv-generic", "teleport-guess", 1_000_000, 11).with_params(d, k))
            .map_err(err)?;
        let target = 1.0 / (k * d * d) as f64;
        ok &= e.conditional == 1.0
            && s.counts.successes == s.counts.conclusive
            && inside(s.counts.conclusive, s.counts.total, target);
        rates.push(format!("{:.5}", s.conclusive.rate));
    }
    for n in [0u64, 1, 7, 1000] {
        ok &= entanglement_cost(n, 2).map_err(err)? == n as f64;
    }
    Ok((ok, format!("conclusive rates [{}] vs 1/4, 1/8, 1/18", rates.join(", "))))
}

fn properties() -> Check {
    let mut rng = rng_from_seed(2024);
    let mut ok = true;
    for _ in 0..25 {
        let rho = random_density_matrix(&[3, 2], &mut rng).map_err(err)?;
        let back = rho.partial_transpose(0).map_err(err)?.partial_transpose(0).map_err(err)?;
        ok &= back.max_abs_diff(&rho) == 0.0;
        ok &= (rho.partial_trace(&[1]).map_err(err)?.trace().re - 1.0).abs() < 1e-12;
        let s = entropy_of_spectrum(&rho.eigenvalues().map_err(err)?);
        ok &= (-1e-12..=6f64.log2() + 1e-12).contains(&s);
    }

    let twirled = werner_twirl(&random_density_matrix(&[2, 2], &mut rng).map_err(err)?).map_err(err)?;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let u = random_local_unitary(2, &mut rng).map_err(err)?;
        let uu = u.kron(&u);
        let c = &uu.matmul(&twirled).map_err(err)? - &twirled.matmul(&uu).map_err(err)?;
        worst = worst.max(c.frobenius_norm());
    }
    ok &= worst <= 1e-7;

    let rho = random_density_matrix(&[2, 2], &mut rng).map_err(err)?;
    let povm = Povm::bell_basis();
    let probs = povm.probabilities(&rho).map_err(err)?;
    let n = 1_000_000u64;
    let mut counts = vec![0u64; povm.len()];
    for _ in 0..n {
        counts[sample_povm(&rho, &povm, &mut rng).map_err(err)?] += 1;
    }
    ok &= counts.iter().zip(&probs).all(|(c, p)| inside(*c, n, *p));

    let phi = DensityMatrix::new(bell_state(BellLabel::PHI_PLUS)).map_err(err)?;
    let psi = DensityMatrix::new(bell_state(BellLabel::PSI_MINUS)).map_err(err)?;
    let Strategy::Attack(exchange) = loqc_exchange() else {
        return Err("exchange strategy is not an attack".into());
    };
    let spec = sym_antisym_two_round();
    let member = spec.members().iter().position(|m| m.label == 1).ok_or("no antisymmetric member")?;
    let pair = post_exchange_state(&exchange, &spec, member).map_err(err)?;
    let product = pair.partial_trace(&[0]).map_err(err)?.kron(&pair.partial_trace(&[1]).map_err(err)?);
    let orth = [
        supports_orthogonal(&phi, &psi).map_err(err)?,
        supports_orthogonal(&rho, &rho).map_err(err)?,
        supports_orthogonal(&pair, &product).map_err(err)?,
    ];
    ok &= orth == [true, false, false];
    Ok((ok, format!("twirl commutator {worst:e}, orthogonality {orth:?}")))
}

fn reproducibility() -> Check {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_qpv-lab"))
            .args(["paper-suite", "--json", "--seed", "5"])
            .env_remove("QPV_LAB_OUT")
            .output()
            .map_err(err)
    };
    let a = run()?;
    let b = run()?;
    let ok = a.status.success() && b.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;
    Ok((ok, format!("{} bytes, identical {}", a.stdout.len(), a.stdout == b.stdout)))
}

fn main() -> ExitCode {
    let checks: [Criterion; 10] = [
        ("sdp single-round optimum", sdp_single_round),
        ("sdp two-round optimum", sdp_two_round),
        ("bell ppt optimum", bell_optimum),
        ("strategy exactness", strategy_exactness),
        ("monte carlo consistency", monte_carlo),
        ("hashing bound chain", hashing_chain),
        ("cloning chain", cloning_chain),
        ("loss attack", loss_attack),
        ("property suites", properties),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in checks.iter().enumerate() {
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !ok {
            failed += 1;
        }
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
