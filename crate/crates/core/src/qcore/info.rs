//! Entropies, overlaps and the Werner twirl.

use crate::error::{QpvError, Result};
use crate::qcore::operator::Operator;
use crate::qcore::state::{bell_state, max_entangled_ket, BellLabel, DensityMatrix};

const ENTROPY_CUTOFF: f64 = 1e-12;
const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let values = rho.eigenvalues()?;
    Ok(entropy_of_spectrum(&values))
}

/// `-sum l log2 l` over eigenvalues above the cutoff, clamped at zero.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    let s: f64 = values
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum();
    s.max(0.0)
}

/// Werner twirl of a two-qubit state:
/// `a P- + (1 - a)(I - P-)/3` with `a = <Psi-|rho|Psi->`.
pub fn werner_twirl(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dims() != [2, 2] {
        return Err(QpvError::DimensionMismatch(format!(
            "Werner twirl needs dims [2, 2], got {:?}",
            rho.dims()
        )));
    }
    let singlet = bell_state(BellLabel::PSI_MINUS);
    let a = singlet.trace_product(rho);
    let rest = &Operator::identity(&[2, 2]) - &singlet;
    DensityMatrix::new(&singlet.scale(a) + &rest.scale((1.0 - a) / 3.0))
}

/// Overlap with `sum_i |ii> / sqrt(d)`.
pub fn entangled_fraction(rho: &DensityMatrix, d: usize) -> Result<f64> {
    if rho.dims() != [d, d] {
        return Err(QpvError::DimensionMismatch(format!(
            "entangled fraction needs dims [{d}, {d}], got {:?}",
            rho.dims()
        )));
    }
    let phi = Operator::projector(&max_entangled_ket(d), &[d, d])?;
    Ok(phi.trace_product(rho).clamp(0.0, 1.0))
}

/// `S(B) - S(AB)` for a state on two factors.
pub fn coherent_information(rho: &DensityMatrix) -> Result<f64> {
    if rho.dims().len() != 2 {
        return Err(QpvError::DimensionMismatch(format!(
            "coherent information needs a bipartite state, got dims {:?}",
            rho.dims()
        )));
    }
    let rho_b = rho.partial_trace(&[1])?;
    Ok(von_neumann_entropy(&rho_b)? - von_neumann_entropy(rho)?)
}

/// Whether two states have orthogonal supports, i.e. `Tr[rho sigma] ~ 0`.
/// For PSD operators this is exactly the condition under which both can be
/// identified with certainty and without an inconclusive outcome.
pub fn supports_orthogonal(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<bool> {
    rho.check_same_dims(sigma)?;
    Ok(rho.trace_product(sigma) <= ORTHOGONALITY_TOL)
}
