//! Seeded round-by-round simulation.
//!
//! Rounds are split into a fixed number of chunks; chunk `c` draws from a
//! ChaCha20 stream seeded with `derive_seed(seed, c)`. The chunk policy
//! alone fixes the random stream, so results do not depend on how many
//! threads execute the chunks.
//!
//! Attacks are sampled by sequential measurement: a Kraus branch of the
//! split, then attacker A's outcome, then the post-measurement state
//! `sqrt(E_a) V / sqrt(p_a)` is handed to attacker B. Exact evaluation
//! instead sums joint probabilities, so the two routes share no
//! arithmetic beyond the branch matrices.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{QpvError, Result};
use crate::protocols::{protocol_by_name, ProtocolParams, ProtocolSpec};
use crate::qcore::{derive_seed, rng_from_seed, DiscreteSampler, Operator, QpvRng};
use crate::strategies::{
    check_attack_layout, check_teleport, evaluate_strategy_exact, exchange_branches, prover_povm, psd_sqrt,
    strategy_by_name, AttackStrategy, ExactEvaluation, Matrix, ProverStrategy, Strategy, StrategyParams,
    TeleportGuess,
};
use rand::Rng;

/// Confidence level of every reported interval.
pub const CONFIDENCE: f64 = 0.999;
/// Probabilities below this are treated as exact zeros when building samplers.
const ZERO_PROB: f64 = 1e-14;
const EXACT_SLACK: f64 = 1e-12;

/// Two-sided standard normal quantile for confidence `level`.
pub fn z_for_confidence(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

/// Wilson score interval for `successes` out of `total`.
pub fn wilson_interval(successes: u64, total: u64, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let den = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / den;
    let half = z / den * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let hi = if successes == total { 1.0 } else { (centre + half).clamp(p, 1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RunConfig {
    pub protocol: String,
    pub strategy: String,
    pub rounds: u64,
    pub seed: u64,
    pub thread_chunks: usize,
    pub d: usize,
    pub k: usize,
}

impl RunConfig {
    pub fn new(protocol: &str, strategy: &str, rounds: u64, seed: u64) -> Self {
        Self {
            protocol: protocol.to_string(),
            strategy: strategy.to_string(),
            rounds,
            seed,
            thread_chunks: 8,
            d: 2,
            k: 1,
        }
    }

    pub fn with_params(mut self, d: usize, k: usize) -> Self {
        self.d = d;
        self.k = k;
        self
    }

    pub fn with_chunks(mut self, chunks: usize) -> Self {
        self.thread_chunks = chunks;
        self
    }

    fn resolve(&self) -> Result<(ProtocolSpec, Strategy)> {
        if self.rounds == 0 {
            return Err(QpvError::InvalidArgument("rounds must be at least 1".into()));
        }
        if self.thread_chunks == 0 {
            return Err(QpvError::InvalidArgument("thread_chunks must be at least 1".into()));
        }
        let spec = protocol_by_name(&self.protocol, ProtocolParams { d: self.d, k: self.k })?;
        let strategy = strategy_by_name(&self.strategy, StrategyParams { d: self.d, k: self.k })?;
        Ok((spec, strategy))
    }

    /// Rounds assigned to chunk `c`.
    pub fn chunk_rounds(&self, c: usize) -> u64 {
        let n = self.thread_chunks as u64;
        self.rounds / n + u64::from((c as u64) < self.rounds % n)
    }
}

/// Raw counts; addition is the reduction over chunks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub total: u64,
    pub conclusive: u64,
    pub agreements: u64,
    pub successes: u64,
    pub local_a: u64,
    pub local_b: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;
    fn add(self, o: Tally) -> Tally {
        Tally {
            total: self.total + o.total,
            conclusive: self.conclusive + o.conclusive,
            agreements: self.agreements + o.agreements,
            successes: self.successes + o.successes,
            local_a: self.local_a + o.local_a,
            local_b: self.local_b + o.local_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateInterval {
    pub rate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl RateInterval {
    fn new(k: u64, n: u64, z: f64) -> Self {
        let (lo, hi) = wilson_interval(k, n, z);
        Self {
            rate: if n == 0 { 0.0 } else { k as f64 / n as f64 },
            lo,
            hi,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialStats {
    pub counts: Tally,
    pub success: RateInterval,
    pub conclusive: RateInterval,
    /// Successes among conclusive rounds.
    pub conditional: RateInterval,
    /// Per-attacker correctness ignoring agreement.
    pub local_a: RateInterval,
    pub local_b: RateInterval,
}

impl TrialStats {
    pub fn from_tally(t: Tally) -> Self {
        let z = z_for_confidence(CONFIDENCE);
        Self {
            counts: t,
            success: RateInterval::new(t.successes, t.total, z),
            conclusive: RateInterval::new(t.conclusive, t.total, z),
            conditional: RateInterval::new(t.successes, t.conclusive, z),
            local_a: RateInterval::new(t.local_a, t.total, z),
            local_b: RateInterval::new(t.local_b, t.total, z),
        }
    }

    pub fn success_rate(&self) -> f64 {
        self.success.rate
    }

    pub fn conclusive_rate(&self) -> f64 {
        self.conclusive.rate
    }

    pub fn conditional_rate(&self) -> f64 {
        self.conditional.rate
    }
}

/// Answers of one round: the true label and what each side declared.
struct Round {
    label: usize,
    a: Option<usize>,
    b: Option<usize>,
}

impl Tally {
    fn record(&mut self, r: Round) {
        self.total += 1;
        self.local_a += u64::from(r.a == Some(r.label));
        self.local_b += u64::from(r.b == Some(r.label));
        if let (Some(a), Some(b)) = (r.a, r.b) {
            self.conclusive += 1;
            if a == b {
                self.agreements += 1;
                self.successes += u64::from(a == r.label);
            }
        }
    }
}

fn sampler(probs: &[f64]) -> Result<DiscreteSampler> {
    let cleaned: Vec<f64> = probs.iter().map(|&p| if p.abs() < ZERO_PROB { 0.0 } else { p }).collect();
    DiscreteSampler::new(&cleaned)
}

/// A's sampler for one branch, then B's sampler per A outcome.
type BranchSamplers = (DiscreteSampler, Vec<Option<DiscreteSampler>>);

enum Simulator {
    Prover {
        members: DiscreteSampler,
        labels: Vec<usize>,
        outcomes: Vec<DiscreteSampler>,
        answers: Vec<Option<usize>>,
    },
    Attack {
        members: DiscreteSampler,
        labels: Vec<usize>,
        /// Per member: branch sampler and, per branch, A's sampler and B's
        /// sampler per A outcome.
        trees: Vec<(DiscreteSampler, Vec<BranchSamplers>)>,
        rule_a: Vec<Vec<Option<usize>>>,
        rule_b: Vec<Vec<Option<usize>>>,
    },
    Teleport {
        hypotheses: DiscreteSampler,
        corrections: usize,
        k: usize,
        fidelity0: f64,
    },
}

fn member_sampler(spec: &ProtocolSpec) -> Result<(DiscreteSampler, Vec<usize>)> {
    let priors: Vec<f64> = spec.members().iter().map(|m| m.prior).collect();
    Ok((sampler(&priors)?, spec.members().iter().map(|m| m.label).collect()))
}

fn build_prover(spec: &ProtocolSpec, p: &ProverStrategy) -> Result<Simulator> {
    let povm = prover_povm(p, spec)?;
    if p.answer_map.len() != povm.len() {
        return Err(QpvError::Incompatible {
            strategy: p.name.clone(),
            protocol: spec.name().to_string(),
            reason: "answer map is not total".into(),
        });
    }
    let (members, labels) = member_sampler(spec)?;
    let outcomes = spec
        .members()
        .iter()
        .map(|m| {
            let rho = Operator::projector(&m.ket, spec.dims())?;
            sampler(&povm.probabilities(&rho)?)
        })
        .collect::<Result<_>>()?;
    Ok(Simulator::Prover {
        members,
        labels,
        outcomes,
        answers: p.answer_map.clone(),
    })
}

fn build_attack(spec: &ProtocolSpec, attack: &AttackStrategy) -> Result<Simulator> {
    check_attack_layout(attack, spec)?;
    let parts = attack.parts();
    let sqrt_a: Vec<Matrix> = parts.final_a.elements().iter().map(psd_sqrt).collect::<Result<_>>()?;
    let f_t: Vec<Matrix> = parts.final_b.elements().iter().map(|f| f.matrix().transpose()).collect();
    let (members, labels) = member_sampler(spec)?;
    let mut trees = Vec::new();
    for m in spec.members() {
        let branches = exchange_branches(attack, spec, &m.ket);
        let weights: Vec<f64> = branches.iter().map(|b| b.weight).collect();
        let mut per_branch = Vec::new();
        for br in &branches {
            let v = br.state.scale(1.0 / br.weight.sqrt());
            let mut p_a = Vec::new();
            let mut b_samplers = Vec::new();
            for s in &sqrt_a {
                let collapsed = s * &v;
                let pa = collapsed.norm_squared();
                p_a.push(pa);
                if pa < ZERO_PROB {
                    b_samplers.push(None);
                    continue;
                }
                let post = collapsed.scale(1.0 / pa.sqrt());
                // B holds the column system; post^dag post is its reduced state transposed.
                let rho_b = post.adjoint() * &post;
                let p_b: Vec<f64> = f_t.iter().map(|ft| (ft * &rho_b).trace().re).collect();
                b_samplers.push(Some(sampler(&p_b)?));
            }
            per_branch.push((sampler(&p_a)?, b_samplers));
        }
        trees.push((sampler(&weights)?, per_branch));
    }
    Ok(Simulator::Attack {
        members,
        labels,
        trees,
        rule_a: parts.rule_a.clone(),
        rule_b: parts.rule_b.clone(),
    })
}

fn build_teleport(spec: &ProtocolSpec, t: &TeleportGuess) -> Result<Simulator> {
    check_teleport(spec, t)?;
    let priors: Vec<f64> = spec.hypotheses().iter().map(|h| h.prior).collect();
    Ok(Simulator::Teleport {
        hypotheses: sampler(&priors)?,
        corrections: t.d * t.d,
        k: t.k,
        fidelity0: t.honest_fidelity(0),
    })
}

impl Simulator {
    fn new(spec: &ProtocolSpec, strategy: &Strategy) -> Result<Self> {
        match strategy {
            Strategy::Prover(p) => build_prover(spec, p),
            Strategy::Attack(a) => build_attack(spec, a),
            Strategy::TeleportGuess(t) => build_teleport(spec, t),
        }
    }

    fn round(&self, rng: &mut QpvRng) -> Round {
        match self {
            Simulator::Prover {
                members,
                labels,
                outcomes,
                answers,
            } => {
                let m = members.sample(rng);
                let ans = answers[outcomes[m].sample(rng)];
                Round {
                    label: labels[m],
                    a: ans,
                    b: ans,
                }
            }
            Simulator::Attack {
                members,
                labels,
                trees,
                rule_a,
                rule_b,
            } => {
                let m = members.sample(rng);
                let (branches, per_branch) = &trees[m];
                let (a_sampler, b_samplers) = &per_branch[branches.sample(rng)];
                let a = a_sampler.sample(rng);
                let b = b_samplers[a].as_ref().expect("sampled outcome has weight").sample(rng);
                let r = rng.random_range(0..rule_a.len());
                Round {
                    label: labels[m],
                    a: rule_a[r][a],
                    b: rule_b[r][b],
                }
            }
            Simulator::Teleport {
                hypotheses,
                corrections,
                k,
                fidelity0,
            } => {
                let f = hypotheses.sample(rng);
                let c = rng.random_range(0..*corrections);
                let g = rng.random_range(0..*k);
                let answer = if c == 0 && g == f {
                    // The verifier's test on the teleported system passes
                    // with the correction-free fidelity.
                    let u: f64 = rng.random();
                    Some(if u < *fidelity0 { f } else { (f + 1) % (*k).max(2) })
                } else {
                    None
                };
                Round {
                    label: f,
                    a: answer,
                    b: answer,
                }
            }
        }
    }

    fn run_chunk(&self, seed: u64, chunk: usize, rounds: u64) -> Tally {
        let mut rng = rng_from_seed(derive_seed(seed, chunk as u64));
        let mut t = Tally::default();
        for _ in 0..rounds {
            t.record(self.round(&mut rng));
        }
        t
    }
}

/// Simulates with chunks executed on the rayon pool.
pub fn simulate(cfg: &RunConfig) -> Result<TrialStats> {
    let (spec, strategy) = cfg.resolve()?;
    simulate_resolved(cfg, &spec, &strategy)
}

/// Simulates an already constructed pair; the names in `cfg` are only echoed.
pub fn simulate_resolved(cfg: &RunConfig, spec: &ProtocolSpec, strategy: &Strategy) -> Result<TrialStats> {
    if cfg.rounds == 0 || cfg.thread_chunks == 0 {
        return Err(QpvError::InvalidArgument("rounds and chunks must be positive".into()));
    }
    let sim = Simulator::new(spec, strategy)?;
    let tally = (0..cfg.thread_chunks)
        .into_par_iter()
        .map(|c| sim.run_chunk(cfg.seed, c, cfg.chunk_rounds(c)))
        .reduce(Tally::default, |a, b| a + b);
    Ok(TrialStats::from_tally(tally))
}

/// Same chunk policy as [`simulate`], executed in order on one thread.
pub fn simulate_sequential(cfg: &RunConfig) -> Result<TrialStats> {
    let (spec, strategy) = cfg.resolve()?;
    let sim = Simulator::new(&spec, &strategy)?;
    let tally = (0..cfg.thread_chunks)
        .map(|c| sim.run_chunk(cfg.seed, c, cfg.chunk_rounds(c)))
        .fold(Tally::default(), |a, b| a + b);
    Ok(TrialStats::from_tally(tally))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flag {
    pub quantity: String,
    pub exact: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Quantities whose exact value falls outside the simulated interval.
pub fn compare(stats: &TrialStats, exact: &ExactEvaluation) -> Vec<Flag> {
    let mut flags = Vec::new();
    let mut check = |name: &str, iv: &RateInterval, x: f64| {
        // Exact sums can land an ulp outside [0, 1].
        if !(iv.lo - EXACT_SLACK <= x && x <= iv.hi + EXACT_SLACK) {
            flags.push(Flag {
                quantity: name.to_string(),
                exact: x,
                lo: iv.lo,
                hi: iv.hi,
            });
        }
    };
    check("success", &stats.success, exact.success);
    check("conclusive", &stats.conclusive, exact.conclusive);
    if stats.counts.conclusive > 0 {
        check("conditional", &stats.conditional, exact.conditional);
    }
    check("local_a", &stats.local_a, exact.local_success_a);
    check("local_b", &stats.local_b, exact.local_success_b);
    flags
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub config: RunConfig,
    pub stats: TrialStats,
    pub exact: ExactEvaluation,
    pub flags: Vec<Flag>,
}

impl CrossCheck {
    pub fn passed(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Simulation against exact evaluation of the same pair.
pub fn cross_check(cfg: &RunConfig) -> Result<CrossCheck> {
    let (spec, strategy) = cfg.resolve()?;
    let exact = evaluate_strategy_exact(&spec, &strategy)?;
    let stats = simulate_resolved(cfg, &spec, &strategy)?;
    Ok(CrossCheck {
        config: cfg.clone(),
        flags: compare(&stats, &exact),
        stats,
        exact,
    })
}
