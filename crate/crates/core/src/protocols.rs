//! QPV protocols as input ensembles plus honest measurements.
//!
//! The purified form of Bell-state discrimination, where the verifiers keep
//! EPR halves and check the answer with their own Bell measurement, has the
//! same prover-side ensemble as [`bell_protocol`]; attacks are evaluated on
//! this direct form.

use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{QpvError, Result};
use crate::qcore::rational::{ratio, RationalMatrix};
use crate::qcore::{BellLabel, DensityMatrix, Operator, OperatorJson, Povm};

pub const SYMMETRIC: usize = 0;
pub const ANTISYMMETRIC: usize = 1;

/// One pure state of the input ensemble.
#[derive(Debug, Clone)]
pub struct PureEnsembleMember {
    pub name: String,
    pub label: usize,
    pub prior: f64,
    pub ket: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub label: usize,
    pub prior: f64,
    pub state: DensityMatrix,
    /// Exact prior and state when every member is a rational projector.
    pub exact: Option<(BigRational, RationalMatrix)>,
}

/// Prover-side measurement on the full input plus an answer per outcome
/// (`None` for an inconclusive outcome).
#[derive(Debug, Clone)]
pub struct HonestMeasurement {
    pub povm: Povm,
    pub answer_map: Vec<Option<usize>>,
}

/// Parameters of the abstract `QPV(d_A, d_B, f)` family. Only `k = |Im f|`
/// enters any computation, so no concrete `f` is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenericQpv {
    pub d_a: usize,
    pub d_b: usize,
    pub k: usize,
}

impl GenericQpv {
    /// `d = max(d_A, d_B)`.
    pub fn d(&self) -> usize {
        self.d_a.max(self.d_b)
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    name: String,
    dims: Vec<usize>,
    a_side: Vec<usize>,
    b_side: Vec<usize>,
    labels: Vec<String>,
    members: Vec<PureEnsembleMember>,
    hypotheses: Vec<Hypothesis>,
    honest: Option<HonestMeasurement>,
    generic: Option<GenericQpv>,
    honest_success: Option<f64>,
}

impl ProtocolSpec {
    fn from_members(
        name: &str,
        dims: Vec<usize>,
        a_side: Vec<usize>,
        labels: Vec<String>,
        members: Vec<PureEnsembleMember>,
        exact_members: Option<Vec<(BigRational, RationalMatrix)>>,
        honest: Option<HonestMeasurement>,
    ) -> Result<Self> {
        let b_side: Vec<usize> = (0..dims.len()).filter(|i| !a_side.contains(i)).collect();
        if a_side.is_empty() || b_side.is_empty() || a_side.iter().any(|&i| i >= dims.len()) {
            return Err(QpvError::InvalidArgument(format!(
                "A-side {a_side:?} is not a valid cut of dims {dims:?}"
            )));
        }
        let total: f64 = members.iter().map(|m| m.prior).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(QpvError::InvalidArgument(format!("priors sum to {total}")));
        }
        let mut hypotheses = Vec::new();
        for label in 0..labels.len() {
            let idx: Vec<usize> = (0..members.len()).filter(|&i| members[i].label == label).collect();
            if idx.is_empty() {
                continue;
            }
            let prior: f64 = idx.iter().map(|&i| members[i].prior).sum();
            let mut acc = Operator::zeros(&dims);
            for &i in &idx {
                let proj = Operator::projector(&members[i].ket, &dims)?;
                acc = &acc + &proj.scale(members[i].prior / prior);
            }
            let exact = exact_members.as_ref().map(|ex| {
                let p: BigRational = idx.iter().fold(BigRational::zero(), |a, &i| a + &ex[i].0);
                let mut s = RationalMatrix::zeros(&dims);
                for &i in &idx {
                    s = s.add(&ex[i].1.scale(&(&ex[i].0 / &p))).expect("same dims");
                }
                (p, s)
            });
            hypotheses.push(Hypothesis {
                label,
                prior,
                state: DensityMatrix::new(acc)?,
                exact,
            });
        }
        let mut spec = Self {
            name: name.to_string(),
            dims,
            a_side,
            b_side,
            labels,
            members,
            hypotheses,
            honest,
            generic: None,
            honest_success: None,
        };
        if spec.honest.is_some() {
            spec.honest_success = Some(honest_success(&spec)?);
        }
        Ok(spec)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Factors delivered from the A-side verifier.
    pub fn a_side(&self) -> &[usize] {
        &self.a_side
    }

    pub fn b_side(&self) -> &[usize] {
        &self.b_side
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn members(&self) -> &[PureEnsembleMember] {
        &self.members
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn honest_measurement(&self) -> Option<&HonestMeasurement> {
        self.honest.as_ref()
    }

    pub fn generic(&self) -> Option<&GenericQpv> {
        self.generic.as_ref()
    }

    pub fn recorded_honest_success(&self) -> Option<f64> {
        self.honest_success
    }

    /// `sum_h prior_h rho_h`.
    pub fn average_state(&self) -> Result<DensityMatrix> {
        let parts: Vec<(f64, &DensityMatrix)> =
            self.hypotheses.iter().map(|h| (h.prior, &h.state)).collect();
        DensityMatrix::mixture(&parts)
    }

    pub fn to_json(&self) -> ProtocolJson {
        ProtocolJson {
            name: self.name.clone(),
            dims: self.dims.clone(),
            a_side: self.a_side.clone(),
            b_side: self.b_side.clone(),
            labels: self.labels.clone(),
            priors: self.hypotheses.iter().map(|h| h.prior).collect(),
            states: self.hypotheses.iter().map(|h| h.state.to_json()).collect(),
            honest_success: self.honest_success,
            generic: self.generic,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolJson {
    pub name: String,
    pub dims: Vec<usize>,
    pub a_side: Vec<usize>,
    pub b_side: Vec<usize>,
    pub labels: Vec<String>,
    pub priors: Vec<f64>,
    pub states: Vec<OperatorJson>,
    pub honest_success: Option<f64>,
    pub generic: Option<GenericQpv>,
}

fn bell_member(b: BellLabel, label: usize, prior: f64) -> PureEnsembleMember {
    PureEnsembleMember {
        name: b.name().to_string(),
        label,
        prior,
        ket: b.ket(),
    }
}

fn kron_ket(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Bell-state discrimination: one of the four Bell states, uniformly.
pub fn bell_protocol() -> ProtocolSpec {
    let members = BellLabel::ALL
        .iter()
        .map(|&b| bell_member(b, b.index(), 0.25))
        .collect();
    let exact = BellLabel::ALL
        .iter()
        .map(|&b| (ratio(1, 4), RationalMatrix::bell_projector(b)))
        .collect();
    let honest = HonestMeasurement {
        povm: Povm::bell_basis(),
        answer_map: (0..4).map(Some).collect(),
    };
    ProtocolSpec::from_members(
        "bell",
        vec![2, 2],
        vec![0],
        BellLabel::ALL.iter().map(|b| b.name().to_string()).collect(),
        members,
        Some(exact),
        Some(honest),
    )
    .expect("bell protocol is well formed")
}

fn sym_labels() -> Vec<String> {
    vec!["symmetric".into(), "antisymmetric".into()]
}

const SYMMETRIC_BELL: [BellLabel; 3] = [BellLabel::PHI_PLUS, BellLabel::PHI_MINUS, BellLabel::PSI_PLUS];

/// Symmetric (uniform over Phi+, Phi-, Psi+) versus antisymmetric (Psi-),
/// each with probability 1/2.
pub fn sym_antisym_protocol() -> ProtocolSpec {
    let mut members: Vec<PureEnsembleMember> = SYMMETRIC_BELL
        .iter()
        .map(|&b| bell_member(b, SYMMETRIC, 1.0 / 6.0))
        .collect();
    members.push(bell_member(BellLabel::PSI_MINUS, ANTISYMMETRIC, 0.5));
    let mut exact: Vec<_> = SYMMETRIC_BELL
        .iter()
        .map(|&b| (ratio(1, 6), RationalMatrix::bell_projector(b)))
        .collect();
    exact.push((ratio(1, 2), RationalMatrix::bell_projector(BellLabel::PSI_MINUS)));
    let honest = HonestMeasurement {
        povm: Povm::swap_test(),
        answer_map: vec![Some(SYMMETRIC), Some(ANTISYMMETRIC)],
    };
    ProtocolSpec::from_members(
        "sym-antisym",
        vec![2, 2],
        vec![0],
        sym_labels(),
        members,
        Some(exact),
        Some(honest),
    )
    .expect("sym/antisym protocol is well formed")
}

/// Two parallel sym/antisym rounds, both symmetric (each drawn
/// independently from the three symmetric Bell states) or both Psi-.
/// Factors are `[A1, B1, A2, B2]`; A holds qubits {0, 2}.
pub fn sym_antisym_two_round() -> ProtocolSpec {
    let mut members = Vec::new();
    let mut exact = Vec::new();
    for &b1 in &SYMMETRIC_BELL {
        for &b2 in &SYMMETRIC_BELL {
            members.push(PureEnsembleMember {
                name: format!("{b1}{b2}"),
                label: SYMMETRIC,
                prior: 1.0 / 18.0,
                ket: kron_ket(&b1.ket(), &b2.ket()),
            });
            exact.push((
                ratio(1, 18),
                RationalMatrix::bell_projector(b1).kron(&RationalMatrix::bell_projector(b2)),
            ));
        }
    }
    let s = BellLabel::PSI_MINUS;
    members.push(PureEnsembleMember {
        name: format!("{s}{s}"),
        label: ANTISYMMETRIC,
        prior: 0.5,
        ket: kron_ket(&s.ket(), &s.ket()),
    });
    let singlet = RationalMatrix::bell_projector(s);
    exact.push((ratio(1, 2), singlet.kron(&singlet)));
    let honest = HonestMeasurement {
        povm: Povm::swap_test().padded(&[2, 2]),
        answer_map: vec![Some(SYMMETRIC), Some(ANTISYMMETRIC)],
    };
    ProtocolSpec::from_members(
        "sym-antisym-2",
        vec![2, 2, 2, 2],
        vec![0, 2],
        sym_labels(),
        members,
        Some(exact),
        Some(honest),
    )
    .expect("two-round protocol is well formed")
}

/// Abstract `QPV(d_A, d_B, f)` with `k = |Im f|`. The quantum inputs are
/// halves of maximally entangled pairs, so the prover-side hypothesis state
/// is maximally mixed; the label is the value of `f`, uniform over `k`.
pub fn generic_qpv(d_a: usize, d_b: usize, k: usize) -> Result<ProtocolSpec> {
    if d_a == 0 || d_b == 0 || k == 0 {
        return Err(QpvError::InvalidArgument(format!(
            "generic QPV needs positive parameters, got d_a={d_a} d_b={d_b} k={k}"
        )));
    }
    let dims = vec![d_a, d_b];
    let state = DensityMatrix::maximally_mixed(&dims);
    let hypotheses = (0..k)
        .map(|f| Hypothesis {
            label: f,
            prior: 1.0 / k as f64,
            state: state.clone(),
            exact: None,
        })
        .collect();
    Ok(ProtocolSpec {
        name: "qpv-generic".into(),
        dims,
        a_side: vec![0],
        b_side: vec![1],
        labels: (0..k).map(|f| format!("f={f}")).collect(),
        members: Vec::new(),
        hypotheses,
        honest: None,
        generic: Some(GenericQpv { d_a, d_b, k }),
        honest_success: None,
    })
}

/// `sum_h prior_h Tr[Pi_{answer = label_h} rho_h]`.
pub fn honest_success(spec: &ProtocolSpec) -> Result<f64> {
    let honest = spec
        .honest
        .as_ref()
        .ok_or_else(|| QpvError::AbstractProtocol(spec.name.clone()))?;
    let mut total = 0.0;
    for h in &spec.hypotheses {
        let probs = honest.povm.probabilities(&h.state)?;
        total += h.prior
            * probs
                .iter()
                .zip(&honest.answer_map)
                .filter(|(_, a)| **a == Some(h.label))
                .map(|(p, _)| p)
                .sum::<f64>();
    }
    Ok(total)
}

/// Parameters for registry lookups of parametrized protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolParams {
    pub d: usize,
    pub k: usize,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self { d: 2, k: 1 }
    }
}

pub const PROTOCOL_NAMES: [&str; 4] = ["bell", "sym-antisym", "sym-antisym-2", "qpv-generic"];

pub fn protocol_by_name(name: &str, params: ProtocolParams) -> Result<ProtocolSpec> {
    match name {
        "bell" => Ok(bell_protocol()),
        "sym-antisym" => Ok(sym_antisym_protocol()),
        "sym-antisym-2" => Ok(sym_antisym_two_round()),
        "qpv-generic" => generic_qpv(params.d, params.d, params.k),
        _ => Err(QpvError::UnknownName {
            kind: "protocol",
            name: name.to_string(),
        }),
    }
}

/// Exact hypotheses `(prior, state)` when every hypothesis has one.
pub fn exact_hypotheses(spec: &ProtocolSpec) -> Option<Vec<(BigRational, RationalMatrix)>> {
    spec.hypotheses.iter().map(|h| h.exact.clone()).collect()
}

/// Sum of exact priors; used to assert exact normalization.
pub fn exact_prior_total(spec: &ProtocolSpec) -> Option<BigRational> {
    exact_hypotheses(spec).map(|hs| hs.iter().fold(BigRational::zero(), |a, (p, _)| a + p))
}

/// True when the exact priors sum to exactly one.
pub fn exact_priors_normalized(spec: &ProtocolSpec) -> bool {
    exact_prior_total(spec).is_some_and(|t| t.is_one())
}
