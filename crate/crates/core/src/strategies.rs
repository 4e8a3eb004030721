//! Honest provers and attackers with exact evaluation.
//!
//! An attack is one simultaneous exchange: each attacker splits the local
//! input into a kept and a sent register, the sent registers cross, and each
//! attacker measures (kept, received). Answers come from per-attacker rule
//! tables indexed by a shared random value, so the answers of A depend only
//! on A's outcome and vice versa.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{QpvError, Result};
use crate::protocols::{ProtocolSpec, ANTISYMMETRIC, SYMMETRIC};
use crate::qcore::operator::Layout;
use crate::qcore::{hermitian_eigen, BellLabel, DensityMatrix, Operator, Povm, MAX_DIM};

pub type Matrix = DMatrix<C64>;

const CHANNEL_TOL: f64 = 1e-10;
const CLASSICAL_TOL: f64 = 1e-10;

fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Reorders the tensor factors of a ket: output factor `k` is input
/// factor `order[k]`.
pub(crate) fn permute_ket(v: &[C64], dims: &[usize], order: &[usize]) -> Vec<C64> {
    let f = dims.len();
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let old = Layout::new(dims);
    let new = Layout::new(&new_dims);
    let mut nd = vec![0usize; f];
    let mut od = vec![0usize; f];
    (0..v.len())
        .map(|idx| {
            new.digits(idx, &mut nd);
            for (k, &o) in order.iter().enumerate() {
                od[o] = nd[k];
            }
            v[old.flat(&od)]
        })
        .collect()
}

/// A channel from one attacker's input to (kept, sent) registers, given by
/// rectangular Kraus operators whose output index is `kept * sent_dim + sent`.
#[derive(Debug, Clone)]
pub struct SplitChannel {
    kraus: Vec<Matrix>,
    in_dims: Vec<usize>,
    kept_dims: Vec<usize>,
    sent_dims: Vec<usize>,
}

impl SplitChannel {
    pub fn new(kraus: Vec<Matrix>, in_dims: Vec<usize>, kept_dims: Vec<usize>, sent_dims: Vec<usize>) -> Result<Self> {
        let n_in = product(&in_dims);
        let n_out = product(&kept_dims) * product(&sent_dims);
        if kraus.is_empty() {
            return Err(QpvError::InvalidChannel("no Kraus operators".into()));
        }
        if let Some(k) = kraus.iter().find(|k| k.shape() != (n_out, n_in)) {
            return Err(QpvError::InvalidChannel(format!(
                "Kraus operator has shape {:?}, expected ({n_out}, {n_in})",
                k.shape()
            )));
        }
        let ch = Self {
            kraus,
            in_dims,
            kept_dims,
            sent_dims,
        };
        let err = ch.completeness_error();
        if err > CHANNEL_TOL {
            return Err(QpvError::InvalidChannel(format!(
                "sum K^dag K deviates from identity by {err:e}"
            )));
        }
        Ok(ch)
    }

    /// Keeps the input factors listed in `keep` (in that order) and sends
    /// the remaining ones. An empty side is a dimension-1 register.
    pub fn route(in_dims: &[usize], keep: &[usize]) -> Result<Self> {
        if let Some(&bad) = keep.iter().find(|&&k| k >= in_dims.len()) {
            return Err(QpvError::IndexOutOfRange {
                index: bad,
                factors: in_dims.len(),
            });
        }
        let send: Vec<usize> = (0..in_dims.len()).filter(|i| !keep.contains(i)).collect();
        let order: Vec<usize> = keep.iter().chain(&send).copied().collect();
        let n = product(in_dims);
        let mut k = Matrix::zeros(n, n);
        let new_dims: Vec<usize> = order.iter().map(|&o| in_dims[o]).collect();
        let old = Layout::new(in_dims);
        let new = Layout::new(&new_dims);
        let (mut od, mut nd) = (vec![0; in_dims.len()], vec![0; in_dims.len()]);
        for i in 0..n {
            old.digits(i, &mut od);
            for (pos, &o) in order.iter().enumerate() {
                nd[pos] = od[o];
            }
            k[(new.flat(&nd), i)] = C64::new(1.0, 0.0);
        }
        let side = |idx: &[usize]| -> Vec<usize> {
            if idx.is_empty() {
                vec![1]
            } else {
                idx.iter().map(|&i| in_dims[i]).collect()
            }
        };
        Self::new(vec![k], in_dims.to_vec(), side(keep), side(&send))
    }

    /// Keeps the whole input and sends nothing.
    pub fn keep_all(in_dims: &[usize]) -> Result<Self> {
        Self::route(in_dims, &(0..in_dims.len()).collect::<Vec<_>>())
    }

    /// Sends the whole input and keeps nothing.
    pub fn send_all(in_dims: &[usize]) -> Result<Self> {
        Self::route(in_dims, &[])
    }

    /// Computational-basis measurement; the outcome is kept and a copy sent.
    pub fn measure_and_copy(in_dims: &[usize]) -> Self {
        let n = product(in_dims);
        let kraus = (0..n)
            .map(|x| {
                let mut k = Matrix::zeros(n * n, n);
                k[(x * n + x, x)] = C64::new(1.0, 0.0);
                k
            })
            .collect();
        Self {
            kraus,
            in_dims: in_dims.to_vec(),
            kept_dims: in_dims.to_vec(),
            sent_dims: in_dims.to_vec(),
        }
    }

    /// Optimal symmetric universal qubit cloner (Buzek-Hillery); the two
    /// clones are the kept and the sent register. Each clone has fidelity
    /// 5/6 with a pure input.
    pub fn universal_cloner() -> Self {
        let a = (2.0f64 / 3.0).sqrt();
        let b = (1.0f64 / 6.0).sqrt();
        let c = |x: f64| C64::new(x, 0.0);
        // Output basis |00>, |01>, |10>, |11>; columns are |0>, |1>.
        let mut k0 = Matrix::zeros(4, 2);
        k0[(0, 0)] = c(a);
        k0[(1, 1)] = c(b);
        k0[(2, 1)] = c(b);
        let mut k1 = Matrix::zeros(4, 2);
        k1[(1, 0)] = c(b);
        k1[(2, 0)] = c(b);
        k1[(3, 1)] = c(a);
        Self {
            kraus: vec![k0, k1],
            in_dims: vec![2],
            kept_dims: vec![2],
            sent_dims: vec![2],
        }
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn kept_dims(&self) -> &[usize] {
        &self.kept_dims
    }

    pub fn sent_dims(&self) -> &[usize] {
        &self.sent_dims
    }

    pub fn in_dim(&self) -> usize {
        product(&self.in_dims)
    }

    pub fn kept_dim(&self) -> usize {
        product(&self.kept_dims)
    }

    pub fn sent_dim(&self) -> usize {
        product(&self.sent_dims)
    }

    /// `max |sum K^dag K - I|`.
    pub fn completeness_error(&self) -> f64 {
        let n = self.in_dim();
        let mut sum = Matrix::zeros(n, n);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        sum -= Matrix::identity(n, n);
        sum.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Whether every Kraus image of the basis states and of the
    /// superpositions `(|i> + |j>)/sqrt2`, `(|i> + i|j>)/sqrt2` has a diagonal
    /// reduced state on the sent register.
    pub fn sends_classical(&self) -> bool {
        let n = self.in_dim();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut tests: Vec<Vec<C64>> = Vec::new();
        for i in 0..n {
            let mut v = vec![C64::new(0.0, 0.0); n];
            v[i] = C64::new(1.0, 0.0);
            tests.push(v);
            for j in i + 1..n {
                for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    let mut v = vec![C64::new(0.0, 0.0); n];
                    v[i] = C64::new(s, 0.0);
                    v[j] = phase * s;
                    tests.push(v);
                }
            }
        }
        let (kd, sd) = (self.kept_dim(), self.sent_dim());
        tests.iter().all(|t| {
            let t = Matrix::from_column_slice(n, 1, t);
            self.kraus.iter().all(|k| {
                let w = k * &t;
                let mut off = 0.0;
                for s1 in 0..sd {
                    for s2 in 0..sd {
                        if s1 == s2 {
                            continue;
                        }
                        let z: C64 = (0..kd).map(|x| w[x * sd + s1] * w[x * sd + s2].conj()).sum();
                        off += z.norm();
                    }
                }
                off <= CLASSICAL_TOL
            })
        })
    }

    /// `sum_k K rho K^dag` on factors `kept_dims ++ sent_dims`.
    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.side() != self.in_dim() {
            return Err(QpvError::DimensionMismatch(format!(
                "channel input {:?} vs state {:?}",
                self.in_dims,
                rho.dims()
            )));
        }
        let n_out = self.kept_dim() * self.sent_dim();
        if n_out > MAX_DIM {
            return Err(QpvError::DimensionMismatch(format!("channel output {n_out} exceeds {MAX_DIM}")));
        }
        let mut out = Matrix::zeros(n_out, n_out);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        let mut dims = self.kept_dims.clone();
        dims.extend_from_slice(&self.sent_dims);
        Operator::new(out, dims)
    }
}

/// Per-attacker answer tables: `rule[r][outcome]` is the label announced
/// for shared random value `r` (`None` is the loss symbol).
pub type AnswerRule = Vec<Vec<Option<usize>>>;

/// Ingredients of an [`AttackStrategy`]; validated by [`AttackStrategy::new`].
#[derive(Debug, Clone)]
pub struct AttackParts {
    pub name: String,
    pub split_a: SplitChannel,
    pub split_b: SplitChannel,
    /// Acts on `kept_a ⊗ sent_b`.
    pub final_a: Povm,
    /// Acts on `sent_a ⊗ kept_b`.
    pub final_b: Povm,
    pub rule_a: AnswerRule,
    pub rule_b: AnswerRule,
    pub classical_only: bool,
}

#[derive(Debug, Clone)]
pub struct AttackStrategy {
    parts: AttackParts,
}

impl AttackStrategy {
    pub fn new(parts: AttackParts) -> Result<Self> {
        let AttackParts {
            split_a,
            split_b,
            final_a,
            final_b,
            rule_a,
            rule_b,
            ..
        } = &parts;
        let side_a = split_a.kept_dim() * split_b.sent_dim();
        let side_b = split_a.sent_dim() * split_b.kept_dim();
        if final_a.elements()[0].side() != side_a || final_b.elements()[0].side() != side_b {
            return Err(QpvError::DimensionMismatch(format!(
                "final measurements act on {} and {}, registers have {side_a} and {side_b}",
                final_a.elements()[0].side(),
                final_b.elements()[0].side()
            )));
        }
        if rule_a.is_empty() || rule_a.len() != rule_b.len() {
            return Err(QpvError::InvalidArgument(
                "answer rules need the same positive number of shared random values".into(),
            ));
        }
        let total = |rule: &AnswerRule, m: &Povm| rule.iter().all(|row| row.len() == m.len());
        if !total(rule_a, final_a) || !total(rule_b, final_b) {
            return Err(QpvError::InvalidArgument("answer rule is not total on outcomes".into()));
        }
        if parts.classical_only && !(split_a.sends_classical() && split_b.sends_classical()) {
            return Err(QpvError::InvalidChannel(format!(
                "'{}' is marked classical but sends a quantum register",
                parts.name
            )));
        }
        Ok(Self { parts })
    }

    pub fn name(&self) -> &str {
        &self.parts.name
    }

    pub fn parts(&self) -> &AttackParts {
        &self.parts
    }

    pub fn classical_only(&self) -> bool {
        self.parts.classical_only
    }

    pub fn shared_randomness(&self) -> usize {
        self.parts.rule_a.len()
    }

    /// Local label measurement of one attacker: outcomes grouped by label
    /// and averaged over the shared randomness.
    pub fn label_operators(&self, attacker_a: bool, n_labels: usize) -> Vec<Operator> {
        let (povm, rule) = if attacker_a {
            (&self.parts.final_a, &self.parts.rule_a)
        } else {
            (&self.parts.final_b, &self.parts.rule_b)
        };
        let dims = povm.dims().to_vec();
        let mut out = vec![Operator::zeros(&dims); n_labels];
        let w = 1.0 / rule.len() as f64;
        for row in rule {
            for (o, label) in row.iter().enumerate() {
                if let Some(l) = label {
                    out[*l] = &out[*l] + &povm.elements()[o].scale(w);
                }
            }
        }
        out
    }
}

/// Honest measurement applied by the prover on the full input.
#[derive(Debug, Clone)]
pub struct ProverStrategy {
    pub name: String,
    pub povm: Povm,
    pub answer_map: Vec<Option<usize>>,
}

/// Teleport-and-guess attack on `QPV(d_A, d_B, f)` with a maximally
/// entangled resource of local dimension `d` and `k` possible answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TeleportGuess {
    pub d: usize,
    pub k: usize,
}

impl TeleportGuess {
    /// Teleportation byproduct for correction index `c`:
    /// `X^(c mod d) Z^(c div d)`.
    pub fn byproduct(&self, c: usize) -> Matrix {
        let d = self.d;
        let omega = |p: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * p as f64 / d as f64);
        let (x, z) = (c % d, c / d);
        Matrix::from_fn(d, d, |i, j| {
            if i == (j + x) % d {
                omega((j * z) % d)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Probability that the honest operation applied to the uncorrected
    /// teleported input gives the right answer: `|Tr W_c|^2 / d^2`.
    pub fn honest_fidelity(&self, c: usize) -> f64 {
        let w = self.byproduct(c);
        (w.trace() / self.d as f64).norm_sqr()
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Strategy {
    Prover(ProverStrategy),
    Attack(AttackStrategy),
    TeleportGuess(TeleportGuess),
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyJson {
    pub name: String,
    pub kind: &'static str,
    pub classical_only: bool,
    pub parameters: BTreeMap<String, usize>,
}

impl Strategy {
    pub fn name(&self) -> String {
        match self {
            Strategy::Prover(p) => p.name.clone(),
            Strategy::Attack(a) => a.name().to_string(),
            Strategy::TeleportGuess(_) => "teleport-guess".into(),
        }
    }

    pub fn classical_only(&self) -> bool {
        matches!(self, Strategy::Attack(a) if a.classical_only())
    }

    pub fn describe(&self) -> StrategyJson {
        let mut parameters = BTreeMap::new();
        let kind = match self {
            Strategy::Prover(p) => {
                parameters.insert("outcomes".into(), p.povm.len());
                "prover"
            }
            Strategy::Attack(a) => {
                parameters.insert("shared_randomness".into(), a.shared_randomness());
                parameters.insert("kraus_a".into(), a.parts.split_a.kraus.len());
                parameters.insert("kraus_b".into(), a.parts.split_b.kraus.len());
                "attack"
            }
            Strategy::TeleportGuess(t) => {
                parameters.insert("d".into(), t.d);
                parameters.insert("k".into(), t.k);
                "lossy-attack"
            }
        };
        StrategyJson {
            name: self.name(),
            kind,
            classical_only: self.classical_only(),
            parameters,
        }
    }
}

pub fn honest_bell_measurement() -> Strategy {
    Strategy::Prover(ProverStrategy {
        name: "honest-bell".into(),
        povm: Povm::bell_basis(),
        answer_map: (0..4).map(Some).collect(),
    })
}

pub fn honest_swap_test() -> Strategy {
    Strategy::Prover(ProverStrategy {
        name: "honest-swap".into(),
        povm: Povm::swap_test(),
        answer_map: vec![Some(SYMMETRIC), Some(ANTISYMMETRIC)],
    })
}

fn xor_bits(o: usize) -> usize {
    (o >> 1) ^ (o & 1)
}

/// Both attackers measure in the computational basis, exchange the bits and
/// answer "antisymmetric" iff they differ.
pub fn locc_xor() -> Strategy {
    let split = SplitChannel::measure_and_copy(&[2]);
    let rule: AnswerRule = vec![(0..4).map(|o| Some(xor_bits(o))).collect()];
    Strategy::Attack(
        AttackStrategy::new(AttackParts {
            name: "locc-xor".into(),
            split_a: split.clone(),
            split_b: split,
            final_a: Povm::computational(&[2, 2]),
            final_b: Povm::computational(&[2, 2]),
            rule_a: rule.clone(),
            rule_b: rule,
            classical_only: true,
        })
        .expect("locc-xor is well formed"),
    )
}

/// Two-round variant: "antisymmetric" only if both pairs gave unequal bits.
pub fn locc_xor_two_round() -> Strategy {
    let split = SplitChannel::measure_and_copy(&[2, 2]);
    // Outcome bits (x_pair1, x_pair2, y_pair1, y_pair2) for both attackers.
    let answer = |o: usize| {
        let both_differ = ((o >> 3) ^ (o >> 1)) & 1 == 1 && ((o >> 2) ^ o) & 1 == 1;
        Some(if both_differ { ANTISYMMETRIC } else { SYMMETRIC })
    };
    let rule: AnswerRule = vec![(0..16).map(answer).collect()];
    Strategy::Attack(
        AttackStrategy::new(AttackParts {
            name: "locc-xor-2".into(),
            split_a: split.clone(),
            split_b: split,
            final_a: Povm::computational(&[2, 2, 2, 2]),
            final_b: Povm::computational(&[2, 2, 2, 2]),
            rule_a: rule.clone(),
            rule_b: rule,
            classical_only: true,
        })
        .expect("locc-xor-2 is well formed"),
    )
}

/// Computational measurement identifies {Phi+, Phi-} versus {Psi+, Psi-};
/// a shared random bit picks the member of the pair.
pub fn locc_bell_computational_guess() -> Strategy {
    let split = SplitChannel::measure_and_copy(&[2]);
    let rule: AnswerRule = (0..2)
        .map(|r| (0..4).map(|o| Some(2 * xor_bits(o) + r)).collect())
        .collect();
    Strategy::Attack(
        AttackStrategy::new(AttackParts {
            name: "locc-bell-guess".into(),
            split_a: split.clone(),
            split_b: split,
            final_a: Povm::computational(&[2, 2]),
            final_b: Povm::computational(&[2, 2]),
            rule_a: rule.clone(),
            rule_b: rule,
            classical_only: true,
        })
        .expect("locc-bell-guess is well formed"),
    )
}

fn loqc_exchange_parts(classical_only: bool) -> Result<AttackStrategy> {
    // A holds qubits (pair 1, pair 2) and keeps pair 1; B holds (pair 1,
    // pair 2) and keeps pair 2. Each ends with a complete pair.
    let to_sym = |o: usize| Some(if o == BellLabel::PSI_MINUS.index() { ANTISYMMETRIC } else { SYMMETRIC });
    let rule: AnswerRule = vec![(0..4).map(to_sym).collect()];
    AttackStrategy::new(AttackParts {
        name: "loqc-exchange".into(),
        split_a: SplitChannel::route(&[2, 2], &[0])?,
        split_b: SplitChannel::route(&[2, 2], &[1])?,
        final_a: Povm::bell_basis(),
        final_b: Povm::bell_basis(),
        rule_a: rule.clone(),
        rule_b: rule,
        classical_only,
    })
}

/// Quantum-communication attack on the two-round protocol: swap one qubit
/// each so that both attackers hold a whole pair, then Bell-measure.
pub fn loqc_exchange() -> Strategy {
    Strategy::Attack(loqc_exchange_parts(false).expect("loqc-exchange is well formed"))
}

/// The same construction flagged as classical; rejected by validation.
pub fn loqc_exchange_as_classical() -> Result<AttackStrategy> {
    loqc_exchange_parts(true)
}

/// A keeps its qubit, B forwards its qubit to A. A Bell-measures; B,
/// holding nothing, guesses with the shared randomness.
pub fn loqc_bell_forward() -> Strategy {
    Strategy::Attack(
        AttackStrategy::new(AttackParts {
            name: "loqc-bell-forward".into(),
            split_a: SplitChannel::keep_all(&[2]).expect("valid"),
            split_b: SplitChannel::send_all(&[2]).expect("valid"),
            final_a: Povm::bell_basis(),
            final_b: Povm::computational(&[1]),
            rule_a: (0..4).map(|_| (0..4).map(Some).collect()).collect(),
            rule_b: (0..4).map(|r| vec![Some(r)]).collect(),
            classical_only: false,
        })
        .expect("loqc-bell-forward is well formed"),
    )
}

/// Both attackers clone their qubit, keep one clone and send the other, and
/// Bell-measure the two clones they end up with.
pub fn loqc_bell_cloner() -> Strategy {
    let rule: AnswerRule = vec![(0..4).map(Some).collect()];
    Strategy::Attack(
        AttackStrategy::new(AttackParts {
            name: "loqc-bell-cloner".into(),
            split_a: SplitChannel::universal_cloner(),
            split_b: SplitChannel::universal_cloner(),
            final_a: Povm::bell_basis(),
            final_b: Povm::bell_basis(),
            rule_a: rule.clone(),
            rule_b: rule,
            classical_only: false,
        })
        .expect("loqc-bell-cloner is well formed"),
    )
}

pub fn teleport_guess_attack(d: usize, k: usize) -> Result<Strategy> {
    if d == 0 || k == 0 {
        return Err(QpvError::InvalidArgument(format!(
            "teleport attack needs d, k >= 1, got d={d} k={k}"
        )));
    }
    Ok(Strategy::TeleportGuess(TeleportGuess { d, k }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyParams {
    pub d: usize,
    pub k: usize,
}

impl Default for StrategyParams {
    fn default() -> Self {
        Self { d: 2, k: 1 }
    }
}

pub const STRATEGY_NAMES: [&str; 9] = [
    "honest-bell",
    "honest-swap",
    "locc-xor",
    "locc-xor-2",
    "locc-bell-guess",
    "loqc-exchange",
    "loqc-bell-forward",
    "loqc-bell-cloner",
    "teleport-guess",
];

pub fn strategy_by_name(name: &str, params: StrategyParams) -> Result<Strategy> {
    Ok(match name {
        "honest-bell" => honest_bell_measurement(),
        "honest-swap" => honest_swap_test(),
        "locc-xor" => locc_xor(),
        "locc-xor-2" => locc_xor_two_round(),
        "locc-bell-guess" => locc_bell_computational_guess(),
        "loqc-exchange" => loqc_exchange(),
        "loqc-bell-forward" => loqc_bell_forward(),
        "loqc-bell-cloner" => loqc_bell_cloner(),
        "teleport-guess" => teleport_guess_attack(params.d, params.k)?,
        _ => {
            return Err(QpvError::UnknownName {
                kind: "strategy",
                name: name.to_string(),
            })
        }
    })
}

/// Every (protocol, strategy) pair the tool ships, with the generic
/// protocol's `(d, k)` where relevant.
pub const SHIPPED_PAIRS: [(&str, &str, usize, usize); 13] = [
    ("bell", "honest-bell", 2, 1),
    ("sym-antisym", "honest-swap", 2, 1),
    ("sym-antisym-2", "honest-swap", 2, 1),
    ("sym-antisym", "locc-xor", 2, 1),
    ("sym-antisym-2", "locc-xor-2", 2, 1),
    ("bell", "locc-bell-guess", 2, 1),
    ("sym-antisym-2", "loqc-exchange", 2, 1),
    ("bell", "loqc-bell-forward", 2, 1),
    ("bell", "loqc-bell-cloner", 2, 1),
    ("qpv-generic", "teleport-guess", 2, 1),
    ("qpv-generic", "teleport-guess", 2, 2),
    ("qpv-generic", "teleport-guess", 3, 2),
    ("qpv-generic", "teleport-guess", 1, 4),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactEvaluation {
    pub success: f64,
    /// Probability that both answers are conclusive.
    pub conclusive: f64,
    /// `success / conclusive`, zero when nothing is conclusive.
    pub conditional: f64,
    /// Probability of identical conclusive answers.
    pub agreement: f64,
    pub local_success_a: f64,
    pub local_success_b: f64,
}

fn incompatible(strategy: &str, spec: &ProtocolSpec, reason: impl Into<String>) -> QpvError {
    QpvError::Incompatible {
        strategy: strategy.to_string(),
        protocol: spec.name().to_string(),
        reason: reason.into(),
    }
}

/// Prover measurement extended by identities when the protocol has extra
/// trailing factors (the SWAP test on the first pair of two rounds).
pub(crate) fn prover_povm(p: &ProverStrategy, spec: &ProtocolSpec) -> Result<Povm> {
    if spec.generic().is_some() {
        return Err(incompatible(&p.name, spec, "protocol is abstract"));
    }
    if p.answer_map.iter().flatten().any(|&l| l >= spec.labels().len()) {
        return Err(incompatible(&p.name, spec, "answer map uses an unknown label"));
    }
    let pd = p.povm.dims();
    let sd = spec.dims();
    if pd == sd {
        Ok(p.povm.clone())
    } else if sd.len() > pd.len() && &sd[..pd.len()] == pd {
        Ok(p.povm.padded(&sd[pd.len()..]))
    } else {
        Err(incompatible(&p.name, spec, format!("measurement dims {pd:?} vs input dims {sd:?}")))
    }
}

/// One Kraus branch of a pure member after the exchange: the unnormalized
/// state as a matrix with rows indexing `kept_a ⊗ sent_b` and columns
/// indexing `sent_a ⊗ kept_b`.
pub(crate) struct Branch {
    pub(crate) weight: f64,
    pub(crate) state: Matrix,
}

pub(crate) fn check_attack_layout(attack: &AttackStrategy, spec: &ProtocolSpec) -> Result<()> {
    let p = attack.parts();
    let in_a: usize = spec.a_side().iter().map(|&i| spec.dims()[i]).product();
    let in_b: usize = spec.b_side().iter().map(|&i| spec.dims()[i]).product();
    if spec.members().is_empty() {
        return Err(incompatible(attack.name(), spec, "protocol has no concrete input ensemble"));
    }
    if in_a != p.split_a.in_dim() || in_b != p.split_b.in_dim() {
        return Err(incompatible(
            attack.name(),
            spec,
            format!(
                "attack expects inputs of dimension ({}, {}), protocol delivers ({in_a}, {in_b})",
                p.split_a.in_dim(),
                p.split_b.in_dim()
            ),
        ));
    }
    let n_labels = spec.labels().len();
    let bad = p.rule_a.iter().chain(&p.rule_b).flatten().flatten().any(|&l| l >= n_labels);
    if bad {
        return Err(incompatible(attack.name(), spec, "answer rule uses an unknown label"));
    }
    Ok(())
}

/// Unnormalized post-exchange branches of one input ket (already in the
/// protocol's factor order).
pub(crate) fn exchange_branches(attack: &AttackStrategy, spec: &ProtocolSpec, ket: &[C64]) -> Vec<Branch> {
    let p = attack.parts();
    let order: Vec<usize> = spec.a_side().iter().chain(spec.b_side()).copied().collect();
    let psi = permute_ket(ket, spec.dims(), &order);
    let (in_a, in_b) = (p.split_a.in_dim(), p.split_b.in_dim());
    let psi = Matrix::from_fn(in_a, in_b, |i, j| psi[i * in_b + j]);
    let (ka, sa) = (p.split_a.kept_dim(), p.split_a.sent_dim());
    let (kb, sb) = (p.split_b.kept_dim(), p.split_b.sent_dim());
    let mut out = Vec::new();
    for ka_op in p.split_a.kraus() {
        let left = ka_op * &psi;
        for kb_op in p.split_b.kraus() {
            let w = &left * kb_op.transpose();
            let weight = w.norm_squared();
            if weight < 1e-300 {
                continue;
            }
            let mut v = Matrix::zeros(ka * sb, sa * kb);
            for xa in 0..ka {
                for ya in 0..sa {
                    for xb in 0..kb {
                        for yb in 0..sb {
                            v[(xa * sb + yb, ya * kb + xb)] = w[(xa * sa + ya, xb * sb + yb)];
                        }
                    }
                }
            }
            out.push(Branch { weight, state: v });
        }
    }
    out
}

/// Attacker A's registers (`kept_a ⊗ sent_b`) after the exchange on one
/// ensemble member, summed over Kraus branches.
pub fn post_exchange_state(attack: &AttackStrategy, spec: &ProtocolSpec, member: usize) -> Result<DensityMatrix> {
    check_attack_layout(attack, spec)?;
    let m = spec.members().get(member).ok_or_else(|| {
        QpvError::InvalidArgument(format!("member {member} of {}", spec.members().len()))
    })?;
    let p = attack.parts();
    let dims = vec![p.split_a.kept_dim(), p.split_b.sent_dim()];
    let n: usize = dims.iter().product();
    let mut rho = Matrix::zeros(n, n);
    for br in exchange_branches(attack, spec, &m.ket) {
        rho += &br.state * br.state.adjoint();
    }
    DensityMatrix::new(Operator::new(rho, dims)?.hermitian_part())
}

/// Exact success statistics by density-matrix propagation.
pub fn evaluate_strategy_exact(spec: &ProtocolSpec, strategy: &Strategy) -> Result<ExactEvaluation> {
    match strategy {
        Strategy::Prover(p) => evaluate_prover(spec, p),
        Strategy::Attack(a) => evaluate_attack(spec, a),
        Strategy::TeleportGuess(t) => evaluate_teleport(spec, t),
    }
}

fn finish(success: f64, conclusive: f64, agreement: f64, la: f64, lb: f64) -> ExactEvaluation {
    ExactEvaluation {
        success,
        conclusive,
        conditional: if conclusive > 0.0 { success / conclusive } else { 0.0 },
        agreement,
        local_success_a: la,
        local_success_b: lb,
    }
}

fn evaluate_prover(spec: &ProtocolSpec, p: &ProverStrategy) -> Result<ExactEvaluation> {
    let povm = prover_povm(p, spec)?;
    if p.answer_map.len() != povm.len() {
        return Err(incompatible(&p.name, spec, "answer map is not total"));
    }
    let (mut success, mut conclusive) = (0.0, 0.0);
    for h in spec.hypotheses() {
        for (prob, answer) in povm.probabilities(&h.state)?.iter().zip(&p.answer_map) {
            if let Some(l) = answer {
                conclusive += h.prior * prob;
                if *l == h.label {
                    success += h.prior * prob;
                }
            }
        }
    }
    Ok(finish(success, conclusive, conclusive, success, success))
}

/// `Tr[M F^T]` for square complex matrices.
fn trace_with_transpose(m: &Matrix, f: &Matrix) -> f64 {
    m.iter().zip(f.iter()).map(|(a, b)| (a * b).re).sum()
}

fn evaluate_attack(spec: &ProtocolSpec, attack: &AttackStrategy) -> Result<ExactEvaluation> {
    check_attack_layout(attack, spec)?;
    let p = attack.parts();
    let n_r = attack.shared_randomness() as f64;
    let (mut success, mut conclusive, mut agreement, mut la, mut lb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for member in spec.members() {
        let n_a = p.final_a.len();
        let n_b = p.final_b.len();
        let mut joint = vec![0.0; n_a * n_b];
        for branch in exchange_branches(attack, spec, &member.ket) {
            let v = &branch.state;
            for (a, e) in p.final_a.elements().iter().enumerate() {
                let m = v.adjoint() * e.matrix() * v;
                for (b, f) in p.final_b.elements().iter().enumerate() {
                    joint[a * n_b + b] += trace_with_transpose(&m, f.matrix());
                }
            }
        }
        for a in 0..n_a {
            for b in 0..n_b {
                let w = member.prior * joint[a * n_b + b] / n_r;
                for (row_a, row_b) in p.rule_a.iter().zip(&p.rule_b) {
                    let (ans_a, ans_b) = (row_a[a], row_b[b]);
                    if ans_a == Some(member.label) {
                        la += w;
                    }
                    if ans_b == Some(member.label) {
                        lb += w;
                    }
                    if ans_a.is_some() && ans_b.is_some() {
                        conclusive += w;
                        if ans_a == ans_b {
                            agreement += w;
                            if ans_a == Some(member.label) {
                                success += w;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(finish(success, conclusive, agreement, la, lb))
}

pub(crate) fn check_teleport(spec: &ProtocolSpec, t: &TeleportGuess) -> Result<()> {
    let g = spec
        .generic()
        .ok_or_else(|| incompatible("teleport-guess", spec, "needs a generic QPV(d_A, d_B, f) protocol"))?;
    if g.d() > t.d {
        return Err(incompatible(
            "teleport-guess",
            spec,
            format!("resource dimension {} is below d = {}", t.d, g.d()),
        ));
    }
    if g.k != t.k {
        return Err(incompatible(
            "teleport-guess",
            spec,
            format!("attack guesses among {} values, protocol has k = {}", t.k, g.k),
        ));
    }
    Ok(())
}

fn evaluate_teleport(spec: &ProtocolSpec, t: &TeleportGuess) -> Result<ExactEvaluation> {
    check_teleport(spec, t)?;
    let corrections = t.d * t.d;
    let p_c = 1.0 / corrections as f64;
    let p_g = 1.0 / t.k as f64;
    let (mut success, mut conclusive) = (0.0, 0.0);
    for c in 0..corrections {
        let fid = t.honest_fidelity(c);
        for h in spec.hypotheses() {
            for guess in 0..t.k {
                // Both attackers learn c and the true f after the exchange
                // and answer only when no correction is pending and the
                // guess was right.
                if c == 0 && guess == h.label {
                    let w = p_c * h.prior * p_g;
                    conclusive += w;
                    success += w * fid;
                }
            }
        }
    }
    Ok(finish(success, conclusive, conclusive, success, success))
}

/// Remote-preparation experiment behind the cloning argument on Bell
/// discrimination: three halves of `|Phi+>` pairs (registers A, B, C) are
/// split with A's channel on A and B's channel on B and C; A's label
/// measurement on its registers and B's on (A's sent part, C's kept part)
/// steer the verifier-side pairs. Returns the Pauli-corrected states on
/// `V_A V_B` and `V_A V_C`, whose entangled fractions are the two local
/// success probabilities.
pub fn cloning_experiment(attack: &AttackStrategy) -> Result<(DensityMatrix, DensityMatrix)> {
    let p = attack.parts();
    if p.split_a.in_dims() != [2] || p.split_b.in_dims() != [2] {
        return Err(QpvError::InvalidArgument(format!(
            "'{}' does not act on single-qubit inputs",
            attack.name()
        )));
    }
    let g_a = attack.label_operators(true, 4);
    let g_b = attack.label_operators(false, 4);
    // Register order per branch: [V_A, kept_x, sent_x, V_Y, kept_y, sent_y].
    let steer = |first: &SplitChannel, second: &SplitChannel, measured: [usize; 2], labels: &[Operator]| {
        let dims = [2, first.kept_dim(), first.sent_dim(), 2, second.kept_dim(), second.sent_dim()];
        let rest: Vec<usize> = (0..6).filter(|i| ![0, 3].contains(i) && !measured.contains(i)).collect();
        let order = [vec![0, 3], measured.to_vec(), rest.clone()].concat();
        let n_s: usize = measured.iter().map(|&i| dims[i]).product();
        let n_r: usize = rest.iter().map(|&i| dims[i]).product();
        let mut corrected = Matrix::zeros(4, 4);
        let half = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        for k1 in first.kraus() {
            let m1 = k1.transpose() * half;
            for k2 in second.kraus() {
                let m2 = k2.transpose() * half;
                let ket = kron_rows(&m1, &m2);
                let ket = permute_ket(&ket, &dims, &order);
                for (label, g) in labels.iter().enumerate() {
                    let gt = g.matrix().transpose();
                    let mut rho = Matrix::zeros(4, 4);
                    for r in 0..n_r {
                        let n = Matrix::from_fn(4, n_s, |x, s| ket[(x * n_s + s) * n_r + r]);
                        rho += &n * &gt * n.adjoint();
                    }
                    let u = BellLabel::new(label).expect("four labels").pauli();
                    let u = Operator::identity(&[2]).kron(&u);
                    corrected += u.matrix().adjoint() * rho * u.matrix();
                }
            }
        }
        corrected
    };
    let vab = steer(&p.split_a, &p.split_b, [1, 5], &g_a);
    let vac = steer(&p.split_a, &p.split_b, [2, 4], &g_b);
    let as_state = |m: Matrix| -> Result<DensityMatrix> { DensityMatrix::new(Operator::new(m, vec![2, 2])?.hermitian_part()) };
    Ok((as_state(vab)?, as_state(vac)?))
}

/// Ket of `m1 ⊗ m2` where each matrix is `(V, out)` amplitudes, flattened
/// in the order `[V_1, out_1, V_2, out_2]`.
fn kron_rows(m1: &Matrix, m2: &Matrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(m1.len() * m2.len());
    for i in 0..m1.nrows() {
        for j in 0..m1.ncols() {
            for k in 0..m2.nrows() {
                for l in 0..m2.ncols() {
                    out.push(m1[(i, j)] * m2[(k, l)]);
                }
            }
        }
    }
    out
}

/// Square root of a PSD operator through its eigendecomposition.
pub(crate) fn psd_sqrt(op: &Operator) -> Result<Matrix> {
    let e = hermitian_eigen(op)?;
    Ok(e.reconstruct_with(|l| l.max(0.0).sqrt(), op.dims()).into_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{bell_protocol, generic_qpv, sym_antisym_protocol, sym_antisym_two_round};
    use crate::qcore::{bell_state, entangled_fraction, supports_orthogonal};

    fn exact(spec: &ProtocolSpec, s: &Strategy) -> ExactEvaluation {
        evaluate_strategy_exact(spec, s).unwrap()
    }

    #[test]
    fn honest_strategies() {
        assert!((exact(&bell_protocol(), &honest_bell_measurement()).success - 1.0).abs() < 1e-14);
        assert!((exact(&sym_antisym_protocol(), &honest_swap_test()).success - 1.0).abs() < 1e-14);
        assert!((exact(&sym_antisym_two_round(), &honest_swap_test()).success - 1.0).abs() < 1e-14);

        let Strategy::Prover(p) = honest_bell_measurement() else { unreachable!() };
        let probs = p.povm.probabilities(&bell_state(BellLabel::PHI_MINUS)).unwrap();
        assert!((probs[1] - 1.0).abs() < 1e-15);
        let mixed = Operator::identity(&[2, 2]).scale(0.25);
        for q in p.povm.probabilities(&mixed).unwrap() {
            assert!((q - 0.25).abs() < 1e-15);
        }

        let Strategy::Prover(s) = honest_swap_test() else { unreachable!() };
        let ket01 = [0.0, 1.0, 0.0, 0.0].map(|x| C64::new(x, 0.0));
        let probs = s.povm.probabilities(&Operator::projector(&ket01, &[2, 2]).unwrap()).unwrap();
        assert!((probs[ANTISYMMETRIC] - 0.5).abs() < 1e-15);
        for b in [BellLabel::PHI_PLUS, BellLabel::PHI_MINUS, BellLabel::PSI_PLUS] {
            assert!((s.povm.probabilities(&bell_state(b)).unwrap()[SYMMETRIC] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn locc_xor_values() {
        let e = exact(&sym_antisym_protocol(), &locc_xor());
        assert!((e.success - 5.0 / 6.0).abs() < 1e-14);
        assert!((e.agreement - 1.0).abs() < 1e-14);

        let Strategy::Attack(a) = locc_xor() else { unreachable!() };
        let spec = sym_antisym_protocol();
        // On Psi- the two bits always differ; on Phi+ they always agree.
        for (b, want) in [(BellLabel::PSI_MINUS, ANTISYMMETRIC), (BellLabel::PHI_PLUS, SYMMETRIC)] {
            let branches = exchange_branches(&a, &spec, &b.ket());
            for br in branches {
                for (o, e) in a.parts().final_a.elements().iter().enumerate() {
                    let p = (br.state.adjoint() * e.matrix() * &br.state).trace().re;
                    if p > 1e-12 {
                        assert_eq!(a.parts().rule_a[0][o], Some(want));
                    }
                }
            }
        }
    }

    #[test]
    fn two_round_values() {
        let spec = sym_antisym_two_round();
        let xor2 = exact(&spec, &locc_xor_two_round());
        assert!((xor2.success - 17.0 / 18.0).abs() < 1e-14);
        let loqc = exact(&spec, &loqc_exchange());
        assert!((loqc.success - 1.0).abs() < 1e-14);
        assert!((loqc.agreement - 1.0).abs() < 1e-14);
        assert!((loqc.success - xor2.success - 1.0 / 18.0).abs() < 1e-14);
        assert!(loqc_exchange_as_classical().is_err());
    }

    #[test]
    fn two_round_error_only_on_double_psi_plus() {
        let spec = sym_antisym_two_round();
        let Strategy::Attack(a) = locc_xor_two_round() else { unreachable!() };
        let mut antisym_mass = 0.0;
        for m in spec.members() {
            let mut p_anti = 0.0;
            for br in exchange_branches(&a, &spec, &m.ket) {
                for (o, e) in a.parts().final_a.elements().iter().enumerate() {
                    if a.parts().rule_a[0][o] == Some(ANTISYMMETRIC) {
                        p_anti += (br.state.adjoint() * e.matrix() * &br.state).trace().re;
                    }
                }
            }
            if m.label == ANTISYMMETRIC {
                assert!((p_anti - 1.0).abs() < 1e-14);
            } else if m.name == "Psi+Psi+" {
                assert!((p_anti - 1.0).abs() < 1e-14);
                antisym_mass += m.prior;
            } else {
                assert!(p_anti.abs() < 1e-14, "{}", m.name);
            }
        }
        assert!((antisym_mass - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn bell_guess_values() {
        let e = exact(&bell_protocol(), &locc_bell_computational_guess());
        assert!((e.success - 0.5).abs() < 1e-14);
        assert!((e.agreement - 1.0).abs() < 1e-14);
        assert!((e.conditional - 0.5).abs() < 1e-14);
    }

    #[test]
    fn layout_mismatch_is_rejected() {
        assert!(evaluate_strategy_exact(&sym_antisym_protocol(), &loqc_exchange()).is_err());
        assert!(evaluate_strategy_exact(&bell_protocol(), &locc_xor_two_round()).is_err());
        let generic = generic_qpv(2, 2, 1).unwrap();
        assert!(evaluate_strategy_exact(&generic, &locc_xor()).is_err());
        assert!(evaluate_strategy_exact(&generic, &honest_bell_measurement()).is_err());
        assert!(evaluate_strategy_exact(&bell_protocol(), &teleport_guess_attack(2, 1).unwrap()).is_err());
        // Resource too small for the input dimension.
        let wide = generic_qpv(3, 2, 1).unwrap();
        assert!(evaluate_strategy_exact(&wide, &teleport_guess_attack(2, 1).unwrap()).is_err());
    }

    #[test]
    fn classical_validation() {
        assert!(SplitChannel::measure_and_copy(&[2]).sends_classical());
        assert!(SplitChannel::measure_and_copy(&[2, 2]).sends_classical());
        assert!(SplitChannel::keep_all(&[2]).unwrap().sends_classical());
        assert!(!SplitChannel::send_all(&[2]).unwrap().sends_classical());
        assert!(!SplitChannel::route(&[2, 2], &[0]).unwrap().sends_classical());
        assert!(!SplitChannel::universal_cloner().sends_classical());
        for s in STRATEGY_NAMES {
            if let Strategy::Attack(a) = strategy_by_name(s, StrategyParams::default()).unwrap() {
                assert!(a.parts().split_a.completeness_error() < 1e-10);
                assert!(a.parts().split_b.completeness_error() < 1e-10);
            }
        }
        let bad = SplitChannel::new(vec![Matrix::identity(2, 2) * C64::new(0.5, 0.0)], vec![2], vec![2], vec![1]);
        assert!(bad.is_err());
    }

    #[test]
    fn teleport_guess_exact_grid() {
        for d in 1..=3 {
            for k in 1..=4 {
                let spec = generic_qpv(d, d, k).unwrap();
                let e = exact(&spec, &teleport_guess_attack(d, k).unwrap());
                assert!((e.conclusive - 1.0 / (k * d * d) as f64).abs() < 1e-12);
                assert!((e.conditional - 1.0).abs() < 1e-12, "d={d} k={k}");
            }
        }
        assert!(teleport_guess_attack(0, 1).is_err());
        // Only the trivial byproduct leaves the input intact.
        let t = TeleportGuess { d: 3, k: 1 };
        assert!((t.honest_fidelity(0) - 1.0).abs() < 1e-14);
        assert!((1..9).all(|c| t.honest_fidelity(c) < 1e-14));
    }

    #[test]
    fn teleportation_circuit_d2() {
        // Input qubit X, resource Phi+ on (R, B). Each Bell outcome on (X, R)
        // has probability 1/4 and leaves B with the input up to that
        // outcome's Pauli; the Phi+ outcome needs no correction.
        let psi = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let input = Operator::projector(&psi, &[2]).unwrap();
        let state = input.kron(&bell_state(BellLabel::PHI_PLUS));
        for b in BellLabel::ALL {
            let m = bell_state(b).kron(&Operator::identity(&[2]));
            let post = m.matmul(&state).unwrap().matmul(&m).unwrap();
            let prob = post.trace().re;
            assert!((prob - 0.25).abs() < 1e-14);
            let out = post.partial_trace(&[2]).unwrap().scale(1.0 / prob);
            let corrected = out.conjugate_by(&b.pauli()).unwrap();
            assert!(corrected.max_abs_diff(&input) < 1e-12, "{b}");
            if b != BellLabel::PHI_PLUS {
                assert!(out.max_abs_diff(&input) > 0.1, "{b} needs a correction");
            }
        }
    }

    #[test]
    fn cloner_copies_with_fidelity_five_sixths() {
        let cloner = SplitChannel::universal_cloner();
        for ket in [[1.0, 0.0], [0.6, 0.8]] {
            let psi = ket.map(|x| C64::new(x, 0.0));
            let rho = Operator::projector(&psi, &[2]).unwrap();
            let out = cloner.apply(&rho).unwrap();
            for keep in [0, 1] {
                let clone = out.partial_trace(&[keep]).unwrap();
                assert!((clone.trace_product(&rho) - 5.0 / 6.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cloning_experiment_matches_local_success() {
        let spec = bell_protocol();
        for name in ["locc-bell-guess", "loqc-bell-forward", "loqc-bell-cloner"] {
            let Strategy::Attack(a) = strategy_by_name(name, StrategyParams::default()).unwrap() else {
                unreachable!()
            };
            let e = evaluate_strategy_exact(&spec, &Strategy::Attack(a.clone())).unwrap();
            let (vab, vac) = cloning_experiment(&a).unwrap();
            let fa = entangled_fraction(&vab, 2).unwrap();
            let fb = entangled_fraction(&vac, 2).unwrap();
            assert!((fa - e.local_success_a).abs() < 1e-12, "{name}: {fa} vs {}", e.local_success_a);
            assert!((fb - e.local_success_b).abs() < 1e-12, "{name}: {fb} vs {}", e.local_success_b);
        }
    }

    #[test]
    fn exchanged_registers_are_correlated() {
        // Attacker A's pair after loqc-exchange on the antisymmetric input
        // is entangled, so it is not orthogonal to the product of its
        // marginals.
        let Strategy::Attack(a) = loqc_exchange() else { unreachable!() };
        let spec = sym_antisym_two_round();
        let idx = spec.members().iter().position(|m| m.label == ANTISYMMETRIC).unwrap();
        let rho = post_exchange_state(&a, &spec, idx).unwrap();
        assert_eq!(rho.dims(), &[2, 2]);
        let product = rho.partial_trace(&[0]).unwrap().kron(&rho.partial_trace(&[1]).unwrap());
        assert!(!supports_orthogonal(&rho, &product).unwrap());
    }

    #[test]
    fn registry_and_description() {
        for name in STRATEGY_NAMES {
            let s = strategy_by_name(name, StrategyParams::default()).unwrap();
            assert_eq!(s.describe().name, name);
        }
        assert!(strategy_by_name("nope", StrategyParams::default()).is_err());
        assert!(locc_xor().classical_only());
        assert!(!loqc_exchange().classical_only());
    }

    #[test]
    fn permute_ket_roundtrip() {
        let v: Vec<C64> = (0..12).map(|i| C64::new(i as f64, 0.0)).collect();
        let dims = [2, 3, 2];
        let p = permute_ket(&v, &dims, &[2, 0, 1]);
        let back = permute_ket(&p, &[2, 2, 3], &[1, 2, 0]);
        assert_eq!(v, back);
        // |a b c> = |0 2 1> sits at 2*2 + 1 = 5 and moves to |c a b> = 1*6 + 2 = 8.
        assert_eq!(p[8], v[5]);
    }
}
