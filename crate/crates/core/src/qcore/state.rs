//! Density matrices, POVMs and the named states and measurements used by
//! the protocols.

use std::fmt;
use std::ops::Deref;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{QpvError, Result};
use crate::qcore::operator::{Operator, HERMITIAN_TOL, PSD_TOL, TRACE_TOL};

/// Entrywise completeness tolerance for POVMs.
pub const POVM_COMPLETENESS_TOL: f64 = 1e-10;

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let dev = op.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(QpvError::InvalidState(format!(
                "not Hermitian (deviation {dev:e})"
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QpvError::InvalidState(format!("trace {tr} != 1")));
        }
        let values = op.eigenvalues()?;
        let top = *values.last().unwrap();
        if values[0] < -PSD_TOL * top.abs() {
            return Err(QpvError::InvalidState(format!(
                "negative eigenvalue {:e}",
                values[0]
            )));
        }
        Ok(Self(op))
    }

    pub fn pure(ket: &[C64], dims: &[usize]) -> Result<Self> {
        Self::new(Operator::projector(ket, dims)?)
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        Self(Operator::identity(dims).scale(1.0 / n as f64))
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(self.0.kron(&other.0))
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        Ok(DensityMatrix(self.0.partial_trace(keep)?))
    }

    /// Convex combination with weights that sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix> {
        let first = parts
            .first()
            .ok_or_else(|| QpvError::InvalidArgument("empty mixture".into()))?;
        let mut acc = Operator::zeros(first.1.dims());
        for (w, rho) in parts {
            rho.check_same_dims(&acc)?;
            acc = &acc + &rho.scale(*w);
        }
        DensityMatrix::new(acc)
    }
}

impl Deref for DensityMatrix {
    type Target = Operator;
    fn deref(&self) -> &Operator {
        &self.0
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let op = Operator::deserialize(d)?;
        DensityMatrix::new(op).map_err(serde::de::Error::custom)
    }
}

/// A measurement. When `has_inconclusive` is set, the last element is the
/// designated loss outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Povm {
    elements: Vec<Operator>,
    has_inconclusive: bool,
}

impl Povm {
    pub fn new(elements: Vec<Operator>, has_inconclusive: bool) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| QpvError::InvalidPovm("no elements".into()))?;
        let mut sum = Operator::zeros(first.dims());
        for (i, e) in elements.iter().enumerate() {
            e.check_same_dims(first)
                .map_err(|err| QpvError::InvalidPovm(format!("element {i}: {err}")))?;
            if !e.is_hermitian(HERMITIAN_TOL) || !e.is_psd()? {
                return Err(QpvError::InvalidPovm(format!("element {i} is not PSD")));
            }
            sum = &sum + e;
        }
        let dev = sum.max_abs_diff(&Operator::identity(first.dims()));
        if dev > POVM_COMPLETENESS_TOL {
            return Err(QpvError::InvalidPovm(format!(
                "elements sum to identity only within {dev:e}"
            )));
        }
        Ok(Self {
            elements,
            has_inconclusive,
        })
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn has_inconclusive(&self) -> bool {
        self.has_inconclusive
    }

    pub fn dims(&self) -> &[usize] {
        self.elements[0].dims()
    }

    /// `Tr[E_i rho]` for every element.
    pub fn probabilities(&self, rho: &Operator) -> Result<Vec<f64>> {
        rho.check_same_dims(&self.elements[0])?;
        Ok(self.elements.iter().map(|e| e.trace_product(rho)).collect())
    }

    /// Extends every element by an identity on trailing factors.
    pub fn padded(&self, trailing: &[usize]) -> Povm {
        let id = Operator::identity(trailing);
        Povm {
            elements: self.elements.iter().map(|e| e.kron(&id)).collect(),
            has_inconclusive: self.has_inconclusive,
        }
    }

    /// Projective measurement in the computational basis of `dims`.
    pub fn computational(dims: &[usize]) -> Povm {
        let n: usize = dims.iter().product();
        Povm {
            elements: (0..n).map(|i| Operator::matrix_unit(i, i, dims)).collect(),
            has_inconclusive: false,
        }
    }

    /// Bell-basis measurement on two qubits, outcomes ordered as [`BellLabel`].
    pub fn bell_basis() -> Povm {
        Povm {
            elements: BellLabel::ALL.iter().map(|&b| bell_state(b)).collect(),
            has_inconclusive: false,
        }
    }

    /// SWAP test on two qubits: outcome 0 symmetric, 1 antisymmetric.
    pub fn swap_test() -> Povm {
        let id = Operator::identity(&[2, 2]);
        let swap = swap_operator(2);
        Povm {
            elements: vec![(&id + &swap).scale(0.5), (&id - &swap).scale(0.5)],
            has_inconclusive: false,
        }
    }
}

impl<'de> Deserialize<'de> for Povm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            elements: Vec<Operator>,
            has_inconclusive: bool,
        }
        let raw = Raw::deserialize(d)?;
        Povm::new(raw.elements, raw.has_inconclusive).map_err(serde::de::Error::custom)
    }
}

/// The four Bell states, in the order Phi+, Phi-, Psi+, Psi-.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BellLabel(u8);

impl BellLabel {
    pub const PHI_PLUS: BellLabel = BellLabel(0);
    pub const PHI_MINUS: BellLabel = BellLabel(1);
    pub const PSI_PLUS: BellLabel = BellLabel(2);
    pub const PSI_MINUS: BellLabel = BellLabel(3);
    pub const ALL: [BellLabel; 4] = [
        Self::PHI_PLUS,
        Self::PHI_MINUS,
        Self::PSI_PLUS,
        Self::PSI_MINUS,
    ];

    pub fn new(index: usize) -> Result<Self> {
        if index < 4 {
            Ok(BellLabel(index as u8))
        } else {
            Err(QpvError::InvalidArgument(format!(
                "Bell label {index} not in 0..4"
            )))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Unnormalized-sign ket with entries in {0, +-1}; divide by sqrt(2).
    pub fn signs(self) -> [i8; 4] {
        match self.0 {
            0 => [1, 0, 0, 1],
            1 => [1, 0, 0, -1],
            2 => [0, 1, 1, 0],
            _ => [0, 1, -1, 0],
        }
    }

    pub fn ket(self) -> Vec<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        self.signs()
            .iter()
            .map(|&x| C64::new(f64::from(x) * s, 0.0))
            .collect()
    }

    /// The Pauli `U_i` with `(I (x) U_i)|Phi+> = |Bell_i>` up to a global phase.
    pub fn pauli(self) -> Operator {
        let rows: [[f64; 4]; 1] = [match self.0 {
            0 => [1.0, 0.0, 0.0, 1.0],
            1 => [1.0, 0.0, 0.0, -1.0],
            2 => [0.0, 1.0, 1.0, 0.0],
            _ => [0.0, -1.0, 1.0, 0.0], // XZ = -iY
        }];
        let r = rows[0];
        Operator::from_real_rows(&[vec![r[0], r[1]], vec![r[2], r[3]]], vec![2])
            .expect("2x2 Pauli")
    }

    pub fn name(self) -> &'static str {
        ["Phi+", "Phi-", "Psi+", "Psi-"][self.0 as usize]
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Projector onto a Bell state, dims `[2, 2]`.
pub fn bell_state(label: BellLabel) -> Operator {
    Operator::projector(&label.ket(), &[2, 2]).expect("4-dim ket")
}

/// The operator exchanging two `d`-dimensional factors.
pub fn swap_operator(d: usize) -> Operator {
    let mut out = Operator::zeros(&[d, d]);
    for i in 0..d {
        for j in 0..d {
            out = &out + &Operator::matrix_unit(i * d + j, j * d + i, &[d, d]);
        }
    }
    out
}

/// `|Phi+> = sum_i |ii> / sqrt(d)`.
pub fn max_entangled_ket(d: usize) -> Vec<C64> {
    let amp = 1.0 / (d as f64).sqrt();
    (0..d * d)
        .map(|idx| {
            if idx / d == idx % d {
                C64::new(amp, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect()
}
