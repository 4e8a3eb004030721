//! Exact real-rational matrices for certificate checking.
//!
//! Every matrix the certificates need (Bell projectors, the sym/antisym
//! states, their partial transposes and tensor products) is real with
//! rational entries, so exact checks run over `BigRational`.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{QpvError, Result};
use crate::qcore::operator::{Layout, Operator};
use crate::qcore::state::BellLabel;

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Formats as `p/q` (or `p` for integers).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    dims: Vec<usize>,
    n: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            n,
            data: vec![BigRational::zero(); n * n],
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let mut out = Self::zeros(dims);
        for i in 0..out.n {
            out.data[i * out.n + i] = BigRational::one();
        }
        out
    }

    /// `scale * table`, table given row-major as small integers.
    pub fn from_integers(table: &[&[i64]], scale: BigRational, dims: &[usize]) -> Result<Self> {
        let mut out = Self::zeros(dims);
        if table.len() != out.n || table.iter().any(|r| r.len() != out.n) {
            return Err(QpvError::DimensionMismatch(format!(
                "integer table does not match dims {dims:?}"
            )));
        }
        for (i, row) in table.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                out.data[i * out.n + j] = &scale * BigRational::from_integer(BigInt::from(v));
            }
        }
        Ok(out)
    }

    /// Exact Bell projector: entries are `sign_i sign_j / 2`.
    pub fn bell_projector(label: BellLabel) -> Self {
        let s = label.signs();
        let mut out = Self::zeros(&[2, 2]);
        for i in 0..4 {
            for j in 0..4 {
                out.data[i * 4 + j] = ratio(i64::from(s[i] * s[j]), 2);
            }
        }
        out
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.n + j]
    }

    pub fn trace(&self) -> BigRational {
        (0..self.n).fold(BigRational::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self {
            dims: self.dims.clone(),
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&BigRational, &BigRational) -> BigRational) -> Result<Self> {
        if self.dims != other.dims {
            return Err(QpvError::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(Self {
            dims: self.dims.clone(),
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let n = self.n * other.n;
        let mut data = vec![BigRational::zero(); n * n];
        for i in 0..self.n {
            for j in 0..self.n {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.n {
                    for l in 0..other.n {
                        data[(i * other.n + k) * n + (j * other.n + l)] = a * other.get(k, l);
                    }
                }
            }
        }
        Self { dims, n, data }
    }

    pub fn partial_transpose_many(&self, systems: &[usize]) -> Result<Self> {
        if let Some(&bad) = systems.iter().find(|&&s| s >= self.dims.len()) {
            return Err(QpvError::IndexOutOfRange {
                index: bad,
                factors: self.dims.len(),
            });
        }
        let layout = Layout::new(&self.dims);
        let f = self.dims.len();
        let mut out = Self::zeros(&self.dims);
        let (mut rd, mut cd) = (vec![0; f], vec![0; f]);
        for r in 0..self.n {
            for c in 0..self.n {
                layout.digits(r, &mut rd);
                layout.digits(c, &mut cd);
                for &s in systems {
                    std::mem::swap(&mut rd[s], &mut cd[s]);
                }
                out.data[layout.flat(&rd) * self.n + layout.flat(&cd)] = self.get(r, c).clone();
            }
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Exact PSD test by symmetric Gaussian elimination. A zero pivot is
    /// admissible only when its whole remaining row vanishes.
    pub fn is_psd(&self) -> bool {
        if !self.is_symmetric() {
            return false;
        }
        let n = self.n;
        let mut a = self.data.clone();
        for k in 0..n {
            let pivot = a[k * n + k].clone();
            if pivot.is_negative() {
                return false;
            }
            if pivot.is_zero() {
                if (k + 1..n).any(|j| !a[k * n + j].is_zero()) {
                    return false;
                }
                continue;
            }
            for i in k + 1..n {
                if a[i * n + k].is_zero() {
                    continue;
                }
                let factor = &a[i * n + k] / &pivot;
                for j in k + 1..n {
                    if a[k * n + j].is_zero() {
                        continue;
                    }
                    let delta = &factor * &a[k * n + j];
                    a[i * n + j] -= delta;
                }
            }
        }
        true
    }

    pub fn to_operator(&self) -> Operator {
        let data = DMatrix::from_fn(self.n, self.n, |i, j| C64::new(rational_to_f64(self.get(i, j)), 0.0));
        Operator::new(data, self.dims.clone()).expect("rational matrix dims are valid")
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format_rational(self.get(i, j))).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_projectors_match_float_versions() {
        for b in BellLabel::ALL {
            let exact = RationalMatrix::bell_projector(b).to_operator();
            assert!(exact.max_abs_diff(&crate::qcore::state::bell_state(b)) < 1e-15);
            assert_eq!(RationalMatrix::bell_projector(b).trace(), BigRational::one());
        }
    }

    #[test]
    fn exact_psd_test() {
        let psd = RationalMatrix::from_integers(&[&[2, 1], &[1, 2]], ratio(1, 3), &[2]).unwrap();
        assert!(psd.is_psd());
        let indefinite = RationalMatrix::from_integers(&[&[1, 2], &[2, 1]], ratio(1, 1), &[2]).unwrap();
        assert!(!indefinite.is_psd());
        // Zero pivot with a non-zero coupling is indefinite.
        let zero_pivot = RationalMatrix::from_integers(&[&[0, 1], &[1, 5]], ratio(1, 1), &[2]).unwrap();
        assert!(!zero_pivot.is_psd());
        let singular = RationalMatrix::from_integers(&[&[1, 1], &[1, 1]], ratio(1, 1), &[2]).unwrap();
        assert!(singular.is_psd());
        let asym = RationalMatrix::from_integers(&[&[1, 1], &[0, 1]], ratio(1, 1), &[2]).unwrap();
        assert!(!asym.is_psd());
    }

    #[test]
    fn phi_plus_partial_transpose_is_half_swap() {
        let pt = RationalMatrix::bell_projector(BellLabel::PHI_PLUS)
            .partial_transpose_many(&[1])
            .unwrap();
        let half_swap = RationalMatrix::from_integers(
            &[&[1, 0, 0, 0], &[0, 0, 1, 0], &[0, 1, 0, 0], &[0, 0, 0, 1]],
            ratio(1, 2),
            &[2, 2],
        )
        .unwrap();
        assert_eq!(pt, half_swap);
        assert!(!pt.is_psd());
    }

    #[test]
    fn formatting() {
        assert_eq!(format_rational(&ratio(10, 12)), "5/6");
        assert_eq!(format_rational(&ratio(4, 2)), "2");
    }
}
