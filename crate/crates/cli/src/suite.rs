//! The full battery of reproduction checks behind `paper-suite`.

use std::time::{Duration, Instant};

use qpv_core::bounds::{
    cloning_bound, cloning_bound_exact, entanglement_cost, hashing_alpha_root, qc_success_upper, teleport_fidelity,
    werner_entropy,
};
use qpv_core::montecarlo::{cross_check, simulate, simulate_sequential, CrossCheck, RunConfig};
use qpv_core::protocols::{bell_protocol, protocol_by_name, sym_antisym_protocol, sym_antisym_two_round, ProtocolParams};
use qpv_core::qcore::rational::ratio;
use qpv_core::qcore::{
    bell_state, derive_seed, entropy_of_spectrum, random_density_matrix, random_local_unitary, rng_from_seed,
    sample_povm, supports_orthogonal, werner_twirl, BellLabel, DensityMatrix, Povm,
};
use qpv_core::sdp::{self, closed_form_certificates, verify_dual_exact, CertificateCase};
use qpv_core::strategies::{
    evaluate_strategy_exact, locc_bell_computational_guess, locc_xor, locc_xor_two_round, loqc_exchange,
    post_exchange_state, teleport_guess_attack, Strategy, SHIPPED_PAIRS,
};
use qpv_core::montecarlo::{wilson_interval, z_for_confidence};
use serde_json::{json, Value};

use crate::args::SuiteArgs;
use crate::commands::{Failure, Outcome};
use crate::report::{fmt_num, rational_json, ReportBundle};

pub struct Item {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub measured: Value,
    pub summary: String,
    pub elapsed: Duration,
}

fn timed<T>(f: impl FnOnce() -> Result<T, Failure>) -> Result<(T, Duration), Failure> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, t.elapsed()))
}

fn sdp_item(id: usize, name: &'static str, two_round: bool, limit: Duration) -> Result<Item, Failure> {
    let (spec, which, target) = if two_round {
        (sym_antisym_two_round(), CertificateCase::TwoRound, ratio(17, 18))
    } else {
        (sym_antisym_protocol(), CertificateCase::Single, ratio(5, 6))
    };
    let ((value, exact, spectrum_ok), elapsed) = timed(|| {
        let p = sdp::build(&spec)?;
        let sol = sdp::solve(&p, 1e-7)?;
        let cert = closed_form_certificates(which);
        let exact = verify_dual_exact(&p, &cert)?;
        let mut spectrum_ok = true;
        if two_round {
            for l in cert.q[1].to_operator().eigenvalues()? {
                spectrum_ok &= [0.0, 1.0 / 18.0, 1.0 / 9.0].iter().any(|t| (l - t).abs() <= 1e-9);
            }
        }
        Ok((sol.value, exact, spectrum_ok))
    })?;
    let target_f = exact.bound_f64();
    let passed = (value - target_f).abs() <= 1e-5 && exact.valid && exact.bound == target && spectrum_ok && elapsed < limit;
    Ok(Item {
        id,
        name,
        passed,
        measured: json!({
            "solver_value": value,
            "certificate_valid": exact.valid,
            "certificate_bound": rational_json(&exact.bound),
            "q1_spectrum_ok": spectrum_ok,
        }),
        summary: format!(
            "value {} certificate {} ({:.2}s)",
            fmt_num(value),
            exact.bound_string(),
            elapsed.as_secs_f64()
        ),
        elapsed,
    })
}

fn bell_item() -> Result<Item, Failure> {
    let p = sdp::build(&bell_protocol())?;
    let value = sdp::solve(&p, 1e-7)?.value;
    let mut sweep = Vec::new();
    for eta in [0.25, 0.5, 0.75, 1.0] {
        sweep.push((eta, sdp::solve_with_loss(&p, eta, 1e-6)?.conditional_value));
    }
    let passed = (value - 0.5).abs() <= 1e-4 && sweep.iter().all(|(_, v)| (v - 0.5).abs() <= 1e-3);
    Ok(Item {
        id: 3,
        name: "bell-ppt-optimum",
        passed,
        measured: json!({
            "four_outcome_value": value,
            "loss_sweep": sweep.iter().map(|(e, v)| json!({"eta": e, "conditional": v})).collect::<Vec<_>>(),
            "reconstruction": true,
        }),
        summary: format!(
            "value {} sweep [{}]",
            fmt_num(value),
            sweep.iter().map(|(_, v)| fmt_num(*v)).collect::<Vec<_>>().join(", ")
        ),
        elapsed: Duration::ZERO,
    })
}

fn exactness_item() -> Result<Item, Failure> {
    let xor = evaluate_strategy_exact(&sym_antisym_protocol(), &locc_xor())?.success;
    let two = evaluate_strategy_exact(&sym_antisym_two_round(), &locc_xor_two_round())?.success;
    let guess = evaluate_strategy_exact(&bell_protocol(), &locc_bell_computational_guess())?.success;
    let exch = evaluate_strategy_exact(&sym_antisym_two_round(), &loqc_exchange())?.success;
    let eps = 1e-14;
    let separation = exch - two;
    let passed = (xor - 5.0 / 6.0).abs() < eps
        && (two - 17.0 / 18.0).abs() < eps
        && (guess - 0.5).abs() < eps
        && (exch - 1.0).abs() < eps
        && (separation - 1.0 / 18.0).abs() < eps;
    Ok(Item {
        id: 4,
        name: "strategy-exactness",
        passed,
        measured: json!({
            "locc_xor": xor,
            "locc_xor_two_round": two,
            "locc_bell_guess": guess,
            "loqc_exchange": exch,
            "loqc_locc_separation": separation,
        }),
        summary: format!(
            "xor {} two-round {} guess {} exchange {} separation {}",
            fmt_num(xor),
            fmt_num(two),
            fmt_num(guess),
            fmt_num(exch),
            fmt_num(separation)
        ),
        elapsed: Duration::ZERO,
    })
}

fn monte_carlo_runs(args: &SuiteArgs) -> Result<(Vec<CrossCheck>, Duration), Failure> {
    let rounds = if args.quick { 10_000 } else { 1_000_000 };
    timed(|| {
        SHIPPED_PAIRS
            .iter()
            .map(|(p, s, d, k)| {
                let cfg = RunConfig::new(p, s, rounds, args.seed).with_params(*d, *k).with_chunks(args.chunks);
                Ok(cross_check(&cfg)?)
            })
            .collect()
    })
}

fn monte_carlo_item(runs: &[CrossCheck], elapsed: Duration) -> Item {
    let flags: usize = runs.iter().map(|c| c.flags.len()).sum();
    Item {
        id: 5,
        name: "monte-carlo-consistency",
        passed: flags == 0 && elapsed < Duration::from_secs(120),
        measured: json!({
            "pairs": runs.iter().map(|c| json!({
                "protocol": c.config.protocol,
                "strategy": c.config.strategy,
                "d": c.config.d,
                "k": c.config.k,
                "rounds": c.config.rounds,
                "success_rate": c.stats.success.rate,
                "exact_success": c.exact.success,
                "flags": c.flags.len(),
            })).collect::<Vec<_>>(),
            "total_flags": flags,
        }),
        summary: format!("{} pairs, {flags} flags ({:.1}s)", runs.len(), elapsed.as_secs_f64()),
        elapsed,
    }
}

fn hashing_item() -> Result<Item, Failure> {
    let a = hashing_alpha_root(0.5)?;
    let residual = (1.0 - werner_entropy(a)? - 0.5).abs();
    let qc = qc_success_upper(a)?;
    let qc_quoted = qc_success_upper(0.902)?;
    let passed = residual <= 1e-8 && a <= 0.902 && (0.925..=0.926).contains(&qc);
    Ok(Item {
        id: 6,
        name: "hashing-bound-chain",
        passed,
        measured: json!({
            "alpha_star": a,
            "root_residual": residual,
            "qc_success_upper": qc,
            "qc_success_upper_at_0_902": qc_quoted,
        }),
        summary: format!("alpha* {} qc upper {} (at 0.902: {})", fmt_num(a), fmt_num(qc), fmt_num(qc_quoted)),
        elapsed: Duration::ZERO,
    })
}

fn cloning_item() -> Result<Item, Failure> {
    let exact = cloning_bound_exact(2)?;
    let mut ok = exact == ratio(3, 4) && cloning_bound(2)? == 0.75;
    let mut fids = Vec::new();
    for d in [2usize, 3, 4] {
        let perfect = teleport_fidelity(1.0, d)?;
        let classical = teleport_fidelity(1.0 / (d * d) as f64, d)?;
        ok &= perfect == 1.0 && (classical - 1.0 / d as f64).abs() < 1e-15;
        fids.push(json!({"d": d, "perfect": perfect, "classical": classical}));
    }
    Ok(Item {
        id: 7,
        name: "cloning-chain",
        passed: ok,
        measured: json!({ "cloning_bound_2": rational_json(&exact), "teleport_fidelity": fids }),
        summary: format!("cloning bound {}", rational_json(&exact)["exact"].as_str().unwrap_or("")),
        elapsed: Duration::ZERO,
    })
}

fn loss_attack_item(runs: &[CrossCheck]) -> Result<Item, Failure> {
    let mut ok = true;
    let mut measured = Vec::new();
    for (d, k) in [(2usize, 1usize), (2, 2), (3, 2)] {
        let spec = protocol_by_name("qpv-generic", ProtocolParams { d, k })?;
        let e = evaluate_strategy_exact(&spec, &teleport_guess_attack(d, k)?)?;
        let target = 1.0 / (k * d * d) as f64;
        let run = runs
            .iter()
            .find(|c| c.config.strategy == "teleport-guess" && c.config.d == d && c.config.k == k)
            .ok_or_else(|| Failure::Usage(format!("no teleport run for d={d} k={k}")))?;
        let inside = run.stats.conclusive.contains(target);
        ok &= e.conditional == 1.0 && inside;
        measured.push(json!({
            "d": d, "k": k,
            "exact_conditional": e.conditional,
            "conclusive_rate": run.stats.conclusive.rate,
            "threshold": target,
            "inside_interval": inside,
        }));
    }
    for n in [0u64, 1, 10, 1000] {
        ok &= entanglement_cost(n, 2)? == n as f64;
    }
    Ok(Item {
        id: 8,
        name: "loss-attack",
        passed: ok,
        measured: json!({ "teleport": measured }),
        summary: format!("{} parameter sets", measured.len()),
        elapsed: Duration::ZERO,
    })
}

fn properties_item(args: &SuiteArgs) -> Result<Item, Failure> {
    let mut rng = rng_from_seed(derive_seed(args.seed, 9));
    let mut ok = true;
    let mut worst_involution = 0.0f64;
    let mut worst_trace = 0.0f64;
    let mut entropy_ok = true;
    for _ in 0..20 {
        let rho = random_density_matrix(&[2, 3], &mut rng)?;
        let back = rho.partial_transpose(1)?.partial_transpose(1)?;
        worst_involution = worst_involution.max(back.max_abs_diff(&rho));
        worst_trace = worst_trace.max((rho.partial_trace(&[0])?.trace().re - 1.0).abs());
        let s = entropy_of_spectrum(&rho.eigenvalues()?);
        entropy_ok &= (-1e-12..=6f64.log2() + 1e-12).contains(&s);
    }
    ok &= worst_involution == 0.0 && worst_trace < 1e-12 && entropy_ok;

    let twirled = werner_twirl(&random_density_matrix(&[2, 2], &mut rng)?)?;
    let mut worst_commutator = 0.0f64;
    for _ in 0..100 {
        let u = random_local_unitary(2, &mut rng)?;
        let uu = u.kron(&u);
        let c = &uu.matmul(&twirled)? - &twirled.matmul(&uu)?;
        worst_commutator = worst_commutator.max(c.frobenius_norm());
    }
    ok &= worst_commutator <= 1e-7;

    let rho = random_density_matrix(&[2, 2], &mut rng)?;
    let povm = Povm::bell_basis();
    let probs = povm.probabilities(&rho)?;
    let n = if args.quick { 10_000u64 } else { 1_000_000 };
    let mut counts = vec![0u64; povm.len()];
    for _ in 0..n {
        counts[sample_povm(&rho, &povm, &mut rng)?] += 1;
    }
    let z = z_for_confidence(0.999);
    let freq_ok = counts.iter().zip(&probs).all(|(c, p)| {
        let (lo, hi) = wilson_interval(*c, n, z);
        lo <= *p && *p <= hi
    });
    ok &= freq_ok;

    let phi = DensityMatrix::new(bell_state(BellLabel::PHI_PLUS))?;
    let psi = DensityMatrix::new(bell_state(BellLabel::PSI_MINUS))?;
    let Strategy::Attack(exchange) = loqc_exchange() else {
        unreachable!("exchange is an attack")
    };
    let spec = sym_antisym_two_round();
    let member = spec.members().iter().position(|m| m.label == 1).expect("antisymmetric member");
    let pair = post_exchange_state(&exchange, &spec, member)?;
    let product = pair.partial_trace(&[0])?.kron(&pair.partial_trace(&[1])?);
    let orth = [
        supports_orthogonal(&phi, &psi)?,
        supports_orthogonal(&rho, &rho)?,
        supports_orthogonal(&pair, &product)?,
    ];
    ok &= orth == [true, false, false];

    Ok(Item {
        id: 9,
        name: "property-suites",
        passed: ok,
        measured: json!({
            "partial_transpose_involution_error": worst_involution,
            "partial_trace_error": worst_trace,
            "entropy_in_range": entropy_ok,
            "twirl_commutator": worst_commutator,
            "povm_frequencies_ok": freq_ok,
            "povm_samples": n,
            "supports_orthogonal": orth,
        }),
        summary: format!("twirl commutator {:e}, frequencies ok {freq_ok}", worst_commutator),
        elapsed: Duration::ZERO,
    })
}

fn determinism_item(args: &SuiteArgs) -> Result<Item, Failure> {
    let cfg = RunConfig::new("bell", "loqc-bell-cloner", 20_000, args.seed).with_chunks(args.chunks);
    let a = serde_json::to_string(&simulate(&cfg)?).expect("stats serialize");
    let b = serde_json::to_string(&simulate(&cfg)?).expect("stats serialize");
    let c = serde_json::to_string(&simulate_sequential(&cfg)?).expect("stats serialize");
    let passed = a == b && a == c;
    Ok(Item {
        id: 10,
        name: "reproducibility",
        passed,
        measured: json!({ "repeat_identical": a == b, "sequential_identical": a == c }),
        summary: format!("repeat identical {}, sequential identical {}", a == b, a == c),
        elapsed: Duration::ZERO,
    })
}

pub fn run_items(args: &SuiteArgs) -> Result<Vec<Item>, Failure> {
    let mut items = vec![
        sdp_item(1, "sdp-single-round", false, Duration::from_secs(5))?,
        sdp_item(2, "sdp-two-round", true, Duration::from_secs(60))?,
        bell_item()?,
        exactness_item()?,
    ];
    let (runs, elapsed) = monte_carlo_runs(args)?;
    items.push(monte_carlo_item(&runs, elapsed));
    items.push(hashing_item()?);
    items.push(cloning_item()?);
    items.push(loss_attack_item(&runs)?);
    items.push(properties_item(args)?);
    items.push(determinism_item(args)?);
    Ok(items)
}

pub fn cmd_paper_suite(args: &SuiteArgs) -> Result<Outcome, Failure> {
    let config = json!({ "seed": args.seed, "quick": args.quick, "chunks": args.chunks });
    let mut bundle = ReportBundle::new("paper-suite", config, Some(args.seed));
    let items = run_items(args)?;
    let mut lines = Vec::new();
    for it in &items {
        let status = if it.passed { "PASS" } else { "FAIL" };
        lines.push(format!("{status} {:>2} {:<26} {}", it.id, it.name, it.summary));
        bundle.push(
            it.name,
            json!({ "id": it.id, "passed": it.passed, "measured": it.measured }),
        );
    }
    bundle.passed = items.iter().all(|i| i.passed);
    let mut out = Outcome::new("paper-suite", bundle);
    out.lines = lines;
    Ok(out)
}
