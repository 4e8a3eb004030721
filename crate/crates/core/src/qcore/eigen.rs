//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot entry with a diagonal
//! unitary, then applies a real Givens rotation. Sweeps stop once the
//! off-diagonal Frobenius mass drops below `1e-13 * ||H||_F`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{QpvError, Result};
use crate::qcore::operator::Operator;

const OFF_DIAGONAL_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;
const INPUT_HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues in ascending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    /// `V f(Lambda) V^dag`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64, dims: &[usize]) -> Operator {
        let n = self.values.len();
        let mut out = DMatrix::<C64>::zeros(n, n);
        for (k, &l) in self.values.iter().enumerate() {
            let w = f(l);
            if w == 0.0 {
                continue;
            }
            let col = self.vectors.column(k);
            for i in 0..n {
                let vi = col[i] * w;
                for j in 0..n {
                    out[(i, j)] += vi * col[j].conj();
                }
            }
        }
        Operator::new(out, dims.to_vec()).expect("eigenbasis matches operator dims")
    }

    pub fn reconstruct(&self, dims: &[usize]) -> Operator {
        self.reconstruct_with(|l| l, dims)
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k).iter().copied().collect()
    }
}

pub fn hermitian_eigen(h: &Operator) -> Result<HermitianEigen> {
    let scale = h.max_abs().max(1.0);
    let deviation = h.hermiticity_deviation();
    if deviation > INPUT_HERMITIAN_TOL * scale {
        return Err(QpvError::NotHermitian { deviation });
    }
    let n = h.side();
    let m = h.matrix();
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    let (values, v) = jacobi(&mut a, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, k| v[i * n + order[k]]);
    Ok(HermitianEigen {
        values: sorted_values,
        vectors,
    })
}

fn off_diagonal_mass(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Diagonalizes the row-major Hermitian matrix `a` in place. Returns the
/// (unsorted) diagonal and the accumulated unitary, row-major.
fn jacobi(a: &mut [C64], n: usize) -> Result<(Vec<f64>, Vec<C64>)> {
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = OFF_DIAGONAL_TOL * norm;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_mass(a, n);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(QpvError::EigenNotConverged { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE || r < 1e-300 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Skip rotations that cannot change the diagonal in floating point.
                if sweeps > 4 && r * 1e18 < app.abs().min(aqq.abs()) {
                    a[p * n + q] = C64::new(0.0, 0.0);
                    a[q * n + p] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / r; // e^{i phi}
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Column transform U restricted to (p, q):
                // [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                let ph_conj = phase.conj();
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = ph_conj * (-s);
                let g_qq = ph_conj * c;

                // A <- A U
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * g_pp + akq * g_qp;
                    a[k * n + q] = akp * g_pq + akq * g_qq;
                }
                // A <- U^dag A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[q * n + k] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = C64::new(a[q * n + q].re, 0.0);
                // V <- V U
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * g_pp + vkq * g_qp;
                    v[k * n + q] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i * n + i].re).collect();
    Ok((values, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;

    fn random_hermitian(entries: &[(f64, f64)], n: usize) -> Operator {
        let mut m = DMatrix::<C64>::zeros(n, n);
        let mut it = entries.iter().cycle();
        for i in 0..n {
            for j in i..n {
                let &(re, im) = it.next().unwrap();
                if i == j {
                    m[(i, i)] = C64::new(re, 0.0);
                } else {
                    m[(i, j)] = C64::new(re, im);
                    m[(j, i)] = C64::new(re, -im);
                }
            }
        }
        Operator::new(m, vec![n]).unwrap()
    }

    #[test]
    fn identity_and_pauli_z() {
        let e = hermitian_eigen(&Operator::identity(&[3])).unwrap();
        assert!(e.values.iter().all(|&l| (l - 1.0).abs() < 1e-15));

        let z = Operator::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]], vec![2]).unwrap();
        let e = hermitian_eigen(&z).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn pauli_y_has_complex_eigenvectors() {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 1)] = C64::new(0.0, -1.0);
        m[(1, 0)] = C64::new(0.0, 1.0);
        let y = Operator::new(m, vec![2]).unwrap();
        let e = hermitian_eigen(&y).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        assert!(e.reconstruct(&[2]).max_abs_diff(&y) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Operator::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]], vec![2]).unwrap();
        assert!(matches!(hermitian_eigen(&m), Err(QpvError::NotHermitian { .. })));
    }

    proptest! {
        #[test]
        fn reconstruction_and_orthonormality(
            n in 1usize..12,
            entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 78),
        ) {
            let h = random_hermitian(&entries, n);
            let e = hermitian_eigen(&h).unwrap();
            let norm = h.frobenius_norm().max(1e-300);
            prop_assert!(e.reconstruct(&[n]).max_abs_diff(&h) <= 1e-9 * norm.max(1.0));
            let gram = e.vectors.adjoint() * &e.vectors;
            let id = DMatrix::<C64>::identity(n, n);
            prop_assert!((gram - id).iter().all(|z| z.norm() < 1e-10));
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));

            // Independent route: nalgebra's tridiagonal QR eigensolver.
            let mut reference: Vec<f64> =
                SymmetricEigen::new(h.matrix().clone()).eigenvalues.iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            for (a, b) in e.values.iter().zip(&reference) {
                prop_assert!((a - b).abs() < 1e-9 * norm.max(1.0));
            }
        }
    }
}
