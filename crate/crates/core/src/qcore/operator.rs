//! Dense complex operators on tensor-product spaces.
//!
//! Factor ordering follows the Kronecker convention: factor 0 is the most
//! significant digit of a row/column index.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{QpvError, Result};
use crate::qcore::eigen::{hermitian_eigen, HermitianEigen};

/// Largest total dimension any operator may have.
pub const MAX_DIM: usize = 64;

/// Hermiticity tolerance for density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Relative PSD tolerance: `lambda_min >= -PSD_TOL * max(1, lambda_max)`.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    data: DMatrix<C64>,
    dims: Vec<usize>,
}

impl Operator {
    pub fn new(data: DMatrix<C64>, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(QpvError::DimensionMismatch(format!(
                "factor list {dims:?} must be non-empty with positive entries"
            )));
        }
        let side: usize = dims.iter().product();
        if data.nrows() != data.ncols() || data.nrows() != side {
            return Err(QpvError::DimensionMismatch(format!(
                "{}x{} matrix does not match factor dims {dims:?}",
                data.nrows(),
                data.ncols()
            )));
        }
        if side > MAX_DIM {
            return Err(QpvError::DimensionMismatch(format!(
                "total dimension {side} exceeds cap {MAX_DIM}"
            )));
        }
        Ok(Self { data, dims })
    }

    /// Builds an operator from a row-major real table.
    pub fn from_real_rows(rows: &[Vec<f64>], dims: Vec<usize>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(QpvError::DimensionMismatch("ragged rows".into()));
        }
        let data = DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0));
        Self::new(data, dims)
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self {
            data: DMatrix::zeros(n, n),
            dims: dims.to_vec(),
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self {
            data: DMatrix::identity(n, n),
            dims: dims.to_vec(),
        }
    }

    /// The projector `|psi><psi|`.
    pub fn projector(ket: &[C64], dims: &[usize]) -> Result<Self> {
        let n = ket.len();
        let data = DMatrix::from_fn(n, n, |i, j| ket[i] * ket[j].conj());
        Self::new(data, dims.to_vec())
    }

    /// `|i><j|` on the given factors.
    pub fn matrix_unit(i: usize, j: usize, dims: &[usize]) -> Self {
        let mut out = Self::zeros(dims);
        out.data[(i, j)] = C64::new(1.0, 0.0);
        out
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    /// Same matrix, different factor bookkeeping.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        Self::new(self.data.clone(), dims)
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.adjoint(),
            dims: self.dims.clone(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            data: self.data.transpose(),
            dims: self.dims.clone(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            data: &self.data * C64::new(s, 0.0),
            dims: self.dims.clone(),
        }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self {
            data: &self.data * s,
            dims: self.dims.clone(),
        }
    }

    /// `(H + H^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self {
            data: (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0),
            dims: self.dims.clone(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.side();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Real part of the Hilbert-Schmidt inner product `Tr[A^dag B]`.
    pub fn inner(&self, other: &Operator) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// `Re Tr[A B]` without forming the product.
    pub fn trace_product(&self, other: &Operator) -> f64 {
        let n = self.side();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.data[(i, k)] * other.data[(k, i)];
            }
        }
        acc.re
    }

    /// Matrix product; both operands must share the same factor layout.
    pub fn matmul(&self, other: &Operator) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(Self {
            data: &self.data * &other.data,
            dims: self.dims.clone(),
        })
    }

    /// `U rho U^dag`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<Self> {
        self.check_same_dims(u)?;
        Ok(Self {
            data: &u.data * &self.data * u.data.adjoint(),
            dims: self.dims.clone(),
        })
    }

    pub fn check_same_dims(&self, other: &Operator) -> Result<()> {
        if self.dims != other.dims {
            return Err(QpvError::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    fn check_factor(&self, index: usize) -> Result<()> {
        if index >= self.dims.len() {
            return Err(QpvError::IndexOutOfRange {
                index,
                factors: self.dims.len(),
            });
        }
        Ok(())
    }

    /// Tensor product; factor lists concatenate.
    pub fn kron(&self, other: &Operator) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            data: self.data.kronecker(&other.data),
            dims,
        }
    }

    /// Traces out every factor not listed in `keep`. Kept factors retain
    /// their original relative order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(QpvError::InvalidArgument(
                "partial trace needs at least one kept factor".into(),
            ));
        }
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        for &k in &keep_sorted {
            self.check_factor(k)?;
        }
        let traced: Vec<usize> = (0..self.dims.len())
            .filter(|i| !keep_sorted.contains(i))
            .collect();
        let kept_dims: Vec<usize> = keep_sorted.iter().map(|&i| self.dims[i]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&i| self.dims[i]).collect();
        let nk: usize = kept_dims.iter().product();
        let nt: usize = traced_dims.iter().product();

        let layout = Layout::new(&self.dims);
        let mut out = DMatrix::<C64>::zeros(nk, nk);
        let mut digits = vec![0usize; self.dims.len()];
        for a in 0..nk {
            for b in 0..nk {
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..nt {
                    layout.scatter(&mut digits, &keep_sorted, &kept_dims, a);
                    layout.scatter(&mut digits, &traced, &traced_dims, t);
                    let row = layout.flat(&digits);
                    layout.scatter(&mut digits, &keep_sorted, &kept_dims, b);
                    let col = layout.flat(&digits);
                    acc += self.data[(row, col)];
                }
                out[(a, b)] = acc;
            }
        }
        Self::new(out, kept_dims)
    }

    /// Transposes a single tensor factor.
    pub fn partial_transpose(&self, sys: usize) -> Result<Self> {
        self.partial_transpose_many(&[sys])
    }

    /// Transposes every listed factor.
    pub fn partial_transpose_many(&self, systems: &[usize]) -> Result<Self> {
        for &s in systems {
            self.check_factor(s)?;
        }
        let layout = Layout::new(&self.dims);
        let n = self.side();
        let mut out = DMatrix::<C64>::zeros(n, n);
        let mut rd = vec![0usize; self.dims.len()];
        let mut cd = vec![0usize; self.dims.len()];
        for r in 0..n {
            layout.digits(r, &mut rd);
            for c in 0..n {
                layout.digits(c, &mut cd);
                let (mut r2, mut c2) = (rd.clone(), cd.clone());
                for &s in systems {
                    std::mem::swap(&mut r2[s], &mut c2[s]);
                }
                out[(layout.flat(&r2), layout.flat(&c2))] = self.data[(r, c)];
            }
        }
        Ok(Self {
            data: out,
            dims: self.dims.clone(),
        })
    }

    /// Reorders tensor factors: output factor `k` is input factor `order[k]`.
    pub fn permute_factors(&self, order: &[usize]) -> Result<Self> {
        let f = self.dims.len();
        let mut seen = vec![false; f];
        if order.len() != f {
            return Err(QpvError::InvalidArgument(format!(
                "permutation {order:?} has wrong length for {f} factors"
            )));
        }
        for &o in order {
            self.check_factor(o)?;
            if seen[o] {
                return Err(QpvError::InvalidArgument(format!(
                    "permutation {order:?} repeats factor {o}"
                )));
            }
            seen[o] = true;
        }
        let new_dims: Vec<usize> = order.iter().map(|&o| self.dims[o]).collect();
        let old = Layout::new(&self.dims);
        let new = Layout::new(&new_dims);
        let n = self.side();
        let map: Vec<usize> = (0..n)
            .map(|idx| {
                let mut nd = vec![0usize; f];
                new.digits(idx, &mut nd);
                let mut od = vec![0usize; f];
                for (k, &o) in order.iter().enumerate() {
                    od[o] = nd[k];
                }
                old.flat(&od)
            })
            .collect();
        let data = DMatrix::from_fn(n, n, |i, j| self.data[(map[i], map[j])]);
        Ok(Self {
            data,
            dims: new_dims,
        })
    }

    /// Merges consecutive factors into groups of the given sizes, e.g.
    /// `[2,2,2,2]` grouped by `[2,2]` becomes `[4,4]`.
    pub fn group_factors(&self, group_sizes: &[usize]) -> Result<Self> {
        if group_sizes.iter().sum::<usize>() != self.dims.len() {
            return Err(QpvError::InvalidArgument(format!(
                "grouping {group_sizes:?} does not cover {} factors",
                self.dims.len()
            )));
        }
        let mut dims = Vec::with_capacity(group_sizes.len());
        let mut at = 0;
        for &g in group_sizes {
            dims.push(self.dims[at..at + g].iter().product());
            at += g;
        }
        self.with_dims(dims)
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        hermitian_eigen(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigen(self)?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// Projection onto the PSD cone in Frobenius norm.
    pub fn psd_projection(&self) -> Result<Self> {
        let e = hermitian_eigen(&self.hermitian_part())?;
        Ok(e.reconstruct_with(|l| l.max(0.0), &self.dims))
    }

    /// PSD test with the relative tolerance used throughout the crate.
    pub fn is_psd(&self) -> Result<bool> {
        let v = self.eigenvalues()?;
        let top = v.last().copied().unwrap_or(0.0);
        Ok(v[0] >= -PSD_TOL * top.abs().max(1.0))
    }

    pub fn to_json(&self) -> OperatorJson {
        let n = self.side();
        OperatorJson {
            dims: self.dims.clone(),
            re: (0..n)
                .map(|i| (0..n).map(|j| self.data[(i, j)].re).collect())
                .collect(),
            im: (0..n)
                .map(|i| (0..n).map(|j| self.data[(i, j)].im).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &OperatorJson) -> Result<Self> {
        let n = json.re.len();
        if json.im.len() != n
            || json.re.iter().chain(json.im.iter()).any(|r| r.len() != n)
        {
            return Err(QpvError::DimensionMismatch(
                "re/im tables must be square and equally sized".into(),
            ));
        }
        let data = DMatrix::from_fn(n, n, |i, j| C64::new(json.re[i][j], json.im[i][j]));
        Self::new(data, json.dims.clone())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dims, rhs.dims, "operator dims differ");
        Operator {
            data: &self.data + &rhs.data,
            dims: self.dims.clone(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dims, rhs.dims, "operator dims differ");
        Operator {
            data: &self.data - &rhs.data,
            dims: self.dims.clone(),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dims, rhs.dims, "operator dims differ");
        Operator {
            data: &self.data * &rhs.data,
            dims: self.dims.clone(),
        }
    }
}

/// Wire format: `{dims: [..], re: [[..]], im: [[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl Serialize for Operator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = OperatorJson::deserialize(d)?;
        Operator::from_json(&json).map_err(serde::de::Error::custom)
    }
}

/// Mixed-radix index arithmetic over a factor list.
pub(crate) struct Layout {
    strides: Vec<usize>,
    dims: Vec<usize>,
}

impl Layout {
    pub(crate) fn new(dims: &[usize]) -> Self {
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Self {
            strides,
            dims: dims.to_vec(),
        }
    }

    pub(crate) fn digits(&self, mut idx: usize, out: &mut [usize]) {
        for (k, &s) in self.strides.iter().enumerate() {
            out[k] = idx / s;
            idx %= s;
        }
        debug_assert!(out.iter().zip(&self.dims).all(|(d, n)| d < n));
    }

    pub(crate) fn flat(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    /// Writes the mixed-radix expansion of `idx` over `sub_dims` into the
    /// positions `positions` of `digits`.
    fn scatter(&self, digits: &mut [usize], positions: &[usize], sub_dims: &[usize], mut idx: usize) {
        for k in (0..positions.len()).rev() {
            digits[positions[k]] = idx % sub_dims[k];
            idx /= sub_dims[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn pauli_x() -> Operator {
        Operator::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], vec![2]).unwrap()
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(Operator::new(DMatrix::zeros(4, 4), vec![2, 3]).is_err());
        assert!(Operator::new(DMatrix::zeros(4, 4), vec![]).is_err());
        assert!(Operator::new(DMatrix::zeros(3, 4), vec![3]).is_err());
        assert!(Operator::new(DMatrix::zeros(65, 65), vec![65]).is_err());
    }

    #[test]
    fn kron_identity_and_bit_flip() {
        let i2 = Operator::identity(&[2]);
        let i4 = i2.kron(&i2);
        assert_eq!(i4.dims(), &[2, 2]);
        assert_eq!(i4.max_abs_diff(&Operator::identity(&[2, 2])), 0.0);

        let xx = pauli_x().kron(&pauli_x());
        // XX|00> = |11>: column 0 has its only entry in row 3.
        assert_eq!(xx.get(3, 0), c(1.0));
        assert_eq!((0..4).filter(|&r| xx.get(r, 0).norm() > 0.0).count(), 1);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = Operator::from_real_rows(&[vec![0.7, 0.1], vec![0.1, 0.3]], vec![2]).unwrap();
        let b = Operator::from_real_rows(
            &[vec![0.2, 0.0, 0.1], vec![0.0, 0.5, 0.0], vec![0.1, 0.0, 0.3]],
            vec![3],
        )
        .unwrap();
        let ab = a.kron(&b);
        assert!(ab.partial_trace(&[0]).unwrap().max_abs_diff(&a) < 1e-15);
        assert!(ab.partial_trace(&[1]).unwrap().max_abs_diff(&b) < 1e-15);
        assert!(matches!(
            ab.partial_trace(&[2]),
            Err(QpvError::IndexOutOfRange { index: 2, .. })
        ));
        assert!(ab.partial_trace(&[]).is_err());
    }

    #[test]
    fn permute_swaps_kron_order() {
        let a = Operator::from_real_rows(&[vec![0.7, 0.1], vec![0.1, 0.3]], vec![2]).unwrap();
        let b = Operator::from_real_rows(
            &[vec![0.2, 0.0, 0.1], vec![0.0, 0.5, 0.0], vec![0.1, 0.0, 0.3]],
            vec![3],
        )
        .unwrap();
        let swapped = a.kron(&b).permute_factors(&[1, 0]).unwrap();
        assert_eq!(swapped.dims(), &[3, 2]);
        assert!(swapped.max_abs_diff(&b.kron(&a)) < 1e-15);
        assert!(a.kron(&b).permute_factors(&[0, 0]).is_err());
    }

    #[test]
    fn partial_transpose_of_product_transposes_one_side() {
        let a = Operator::from_real_rows(&[vec![0.7, 0.1], vec![0.1, 0.3]], vec![2]).unwrap();
        let mut b = Operator::zeros(&[2]);
        b.data[(0, 0)] = c(0.5);
        b.data[(1, 1)] = c(0.5);
        b.data[(0, 1)] = C64::new(0.0, 0.25);
        b.data[(1, 0)] = C64::new(0.0, -0.25);
        let pt = a.kron(&b).partial_transpose(1).unwrap();
        assert!(pt.max_abs_diff(&a.kron(&b.transpose())) < 1e-15);
        assert!(pt.is_psd().unwrap());
        assert!(a.kron(&b).partial_transpose(2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut op = Operator::identity(&[2, 2]);
        op.data[(0, 3)] = C64::new(0.25, -0.5);
        let text = serde_json::to_string(&op).unwrap();
        assert!(text.contains("\"dims\":[2,2]"));
        let back: Operator = serde_json::from_str(&text).unwrap();
        assert_eq!(back, op);
    }
}
