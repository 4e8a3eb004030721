use std::fs;

use qpv_core::bounds::all_bounds;
use qpv_core::montecarlo::{cross_check, simulate, RunConfig};
use qpv_core::protocols::{protocol_by_name, ProtocolParams, ProtocolSpec, PROTOCOL_NAMES};
use qpv_core::sdp::{
    self, closed_form_certificates, verify_dual, verify_dual_exact, verify_primal, CertificateCase, DualCertificate,
    DualCertificateJson,
};
use qpv_core::strategies::{strategy_by_name, StrategyParams, SHIPPED_PAIRS, STRATEGY_NAMES};
use qpv_core::QpvError;
use serde_json::{json, Value};

use crate::args::{BoundsArgs, ProtocolArgs, SdpCommand, SimulateArgs};
use crate::report::{config_hash, fmt_num, rational_json, ReportBundle};

/// Why a command could not produce a report.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<QpvError> for Failure {
    fn from(e: QpvError) -> Self {
        match e {
            QpvError::SdpNotConverged { .. } | QpvError::EigenNotConverged { .. } => Failure::Numerical(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// A finished command: the bundle, a text summary and any CSV rows.
pub struct Outcome {
    pub name: String,
    pub bundle: ReportBundle,
    pub lines: Vec<String>,
    pub csv_rows: Vec<Vec<String>>,
}

impl Outcome {
    pub fn new(name: &str, bundle: ReportBundle) -> Self {
        Self {
            name: name.to_string(),
            bundle,
            lines: Vec::new(),
            csv_rows: Vec::new(),
        }
    }
}

fn resolve(p: &ProtocolArgs) -> Result<ProtocolSpec, Failure> {
    Ok(protocol_by_name(&p.protocol, ProtocolParams { d: p.d, k: p.k })?)
}

fn protocol_config(p: &ProtocolArgs) -> Value {
    json!({ "protocol": p.protocol, "d": p.d, "k": p.k })
}

pub fn cmd_bounds(args: &BoundsArgs) -> Result<Outcome, Failure> {
    let mut bundle = ReportBundle::new("bounds", json!({ "d": args.d, "k": args.k }), None);
    let mut lines = Vec::new();
    for &d in &args.d {
        for &k in &args.k {
            let reports = all_bounds(d, k)?;
            lines.push(format!("d = {d}, k = {k}"));
            for r in &reports {
                let params: Vec<String> = r.parameters.iter().map(|(n, v)| format!("{n}={}", fmt_num(*v))).collect();
                lines.push(format!(
                    "  {:<24} {:<28} {:<16} {}",
                    r.name,
                    params.join(" "),
                    fmt_num(r.value),
                    r.exact.as_deref().unwrap_or("")
                ));
            }
            bundle.push("bounds", json!({ "d": d, "k": k, "reports": reports }));
        }
    }
    let mut out = Outcome::new("bounds", bundle);
    out.lines = lines;
    Ok(out)
}

pub fn cmd_sdp(cmd: &SdpCommand) -> Result<Outcome, Failure> {
    match cmd {
        SdpCommand::Solve { protocol, tol } => sdp_solve(protocol, *tol),
        SdpCommand::VerifyCert { protocol, cert } => {
            let spec = resolve(protocol)?;
            let problem = sdp::build(&spec)?;
            let mut bundle = ReportBundle::new("sdp verify-cert", protocol_config(protocol), None);
            let mut lines = Vec::new();
            let passed = match cert {
                Some(path) => {
                    let text = fs::read_to_string(path)?;
                    let json: DualCertificateJson =
                        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    let c = DualCertificate::from_json(&json)?;
                    let check = verify_dual(&problem, &c)?;
                    lines.push(format!("valid: {}  bound: {}", check.valid, fmt_num(check.bound)));
                    bundle.push("float_check", &check);
                    check.valid
                }
                None => {
                    let which = match spec.name() {
                        "sym-antisym" => CertificateCase::Single,
                        "sym-antisym-2" => CertificateCase::TwoRound,
                        other => {
                            return Err(Failure::Usage(format!(
                                "no closed-form certificate for '{other}'; pass --cert FILE"
                            )))
                        }
                    };
                    let c = closed_form_certificates(which);
                    let exact = verify_dual_exact(&problem, &c)?;
                    let float = verify_dual(&problem, &c.to_float())?;
                    lines.push(format!(
                        "exact: valid {}  bound {} ({})",
                        exact.valid,
                        exact.bound_string(),
                        fmt_num(exact.bound_f64())
                    ));
                    lines.push(format!("float: valid {}  bound {}", float.valid, fmt_num(float.bound)));
                    bundle.push(
                        "exact_check",
                        json!({
                            "valid": exact.valid,
                            "bound": rational_json(&exact.bound),
                            "constraints_psd": exact.constraints_psd,
                            "q_psd": exact.q_psd,
                        }),
                    );
                    bundle.push("float_check", &float);
                    let spectra: Vec<Vec<f64>> =
                        c.to_float().q.iter().map(|q| q.eigenvalues()).collect::<Result<_, _>>()?;
                    bundle.push("q_spectra", spectra);
                    exact.valid && float.valid
                }
            };
            bundle.passed = passed;
            let mut out = Outcome::new("sdp-verify-cert", bundle);
            out.lines = lines;
            Ok(out)
        }
        SdpCommand::LossSweep { protocol, eta, tol } => {
            let spec = resolve(protocol)?;
            let problem = sdp::build(&spec)?;
            let mut config = protocol_config(protocol);
            config["eta"] = json!(eta);
            config["tol"] = json!(tol);
            let mut bundle = ReportBundle::new("sdp loss-sweep", config, None);
            let mut lines = vec![format!("{:<8} {:<16} {:<16} best a", "eta", "conditional", "upper")];
            for &e in eta {
                let s = sdp::solve_with_loss(&problem, e, *tol)?;
                lines.push(format!(
                    "{:<8} {:<16} {:<16} {}",
                    fmt_num(e),
                    fmt_num(s.conditional_value),
                    fmt_num(s.conditional_upper),
                    fmt_num(s.best_a)
                ));
                bundle.push("loss_point", &s);
            }
            lines.push("(fixed-conclusive-rate sweep is a reconstruction)".into());
            let mut out = Outcome::new("sdp-loss-sweep", bundle);
            out.lines = lines;
            Ok(out)
        }
    }
}

fn sdp_solve(protocol: &ProtocolArgs, tol: f64) -> Result<Outcome, Failure> {
    let spec = resolve(protocol)?;
    let problem = sdp::build(&spec)?;
    let mut config = protocol_config(protocol);
    config["tol"] = json!(tol);
    let mut bundle = ReportBundle::new("sdp solve", config, None);
    let sol = sdp::solve(&problem, tol)?;
    let primal = verify_primal(&problem, &sol.povm)?;
    let dual = verify_dual(&problem, &sol.certificate)?;
    bundle.push(
        "solution",
        json!({
            "protocol": spec.name(),
            "outcomes": problem.len(),
            "value": sol.value,
            "upper_bound": sol.upper_bound,
            "gap": sol.gap(),
            "iterations": sol.iterations,
            "residuals": sol.residuals,
            "primal_feasible": primal.feasible,
            "dual_valid": dual.valid,
            // More than two hypotheses goes beyond the two-state form.
            "multi_outcome_generalization": problem.len() > 2,
        }),
    );
    bundle.passed = primal.feasible && dual.valid;
    let mut out = Outcome::new("sdp-solve", bundle);
    out.lines = vec![
        format!("value        {}", fmt_num(sol.value)),
        format!("upper bound  {}", fmt_num(sol.upper_bound)),
        format!("iterations   {}", sol.iterations),
        format!(
            "residuals    completeness {:e}  psd {:e}  ppt {:e}",
            sol.residuals.completeness, sol.residuals.psd, sol.residuals.ppt
        ),
        format!("primal feasible {}  dual valid {}", primal.feasible, dual.valid),
    ];
    Ok(out)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Outcome, Failure> {
    let cfg = RunConfig::new(&args.protocol.protocol, &args.strategy, args.rounds, args.seed)
        .with_params(args.protocol.d, args.protocol.k)
        .with_chunks(args.chunks);
    let hash = config_hash(&cfg);
    let mut bundle = ReportBundle::new("simulate", serde_json::to_value(&cfg).expect("config"), Some(args.seed));
    let (stats, flags) = if args.cross_check {
        let c = cross_check(&cfg)?;
        bundle.push("exact", c.exact);
        bundle.push("flags", &c.flags);
        bundle.passed = c.passed();
        (c.stats, Some(c.flags))
    } else {
        (simulate(&cfg)?, None)
    };
    bundle.push("config_hash", &hash);
    bundle.push("stats", &stats);
    let mut lines = vec![
        format!("config {hash}"),
        format!(
            "success     {}  [{}, {}]",
            fmt_num(stats.success.rate),
            fmt_num(stats.success.lo),
            fmt_num(stats.success.hi)
        ),
        format!(
            "conclusive  {}  [{}, {}]",
            fmt_num(stats.conclusive.rate),
            fmt_num(stats.conclusive.lo),
            fmt_num(stats.conclusive.hi)
        ),
        format!("conditional {}", fmt_num(stats.conditional.rate)),
        format!("local A {}  local B {}", fmt_num(stats.local_a.rate), fmt_num(stats.local_b.rate)),
    ];
    if let Some(f) = &flags {
        lines.push(format!("cross-check flags: {}", f.len()));
        for x in f {
            lines.push(format!("  {} exact {} outside [{}, {}]", x.quantity, x.exact, x.lo, x.hi));
        }
    }
    let row = vec![
        hash,
        cfg.protocol.clone(),
        cfg.strategy.clone(),
        cfg.rounds.to_string(),
        cfg.seed.to_string(),
        fmt_num(stats.success.rate),
        fmt_num(stats.conclusive.rate),
        fmt_num(stats.conditional.rate),
        fmt_num(stats.success.lo),
        fmt_num(stats.success.hi),
    ];
    let mut out = Outcome::new("simulate", bundle);
    out.lines = lines;
    out.csv_rows.push(row);
    Ok(out)
}

pub fn cmd_list() -> Result<Outcome, Failure> {
    let mut bundle = ReportBundle::new("list", json!({}), None);
    let mut lines = vec!["protocols:".to_string()];
    let mut protocols = Vec::new();
    for name in PROTOCOL_NAMES {
        let spec = protocol_by_name(name, ProtocolParams::default())?;
        lines.push(format!("  {name:<16} dims {:?}  labels {}", spec.dims(), spec.labels().join(",")));
        protocols.push(json!({ "name": name, "dims": spec.dims(), "labels": spec.labels() }));
    }
    lines.push("strategies:".into());
    let mut strategies = Vec::new();
    for name in STRATEGY_NAMES {
        let s = strategy_by_name(name, StrategyParams::default())?;
        let kind = if s.classical_only() { "classical" } else { "quantum" };
        lines.push(format!("  {name:<20} {kind}"));
        strategies.push(s.describe());
    }
    lines.push("shipped pairs:".into());
    let pairs: Vec<Value> = SHIPPED_PAIRS
        .iter()
        .map(|(p, s, d, k)| {
            lines.push(format!("  {p:<16} {s:<20} d={d} k={k}"));
            json!({ "protocol": p, "strategy": s, "d": d, "k": k })
        })
        .collect();
    bundle.push("protocols", protocols);
    bundle.push("strategies", strategies);
    bundle.push("shipped_pairs", pairs);
    let mut out = Outcome::new("list", bundle);
    out.lines = lines;
    Ok(out)
}
