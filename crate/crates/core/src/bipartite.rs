//! Tensor-product structure on `C^k ⊗ C^n` (left factor major).

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::eigen::hermitian_eigs;
use crate::error::{Error, Result};
use crate::matrix::{norm, Matrix, C64, ZERO};

fn check_bipartite(m: &Matrix, k: usize, n: usize) -> Result<()> {
    if m.rows() != k * n || m.cols() != k * n {
        return Err(Error::DimensionMismatch {
            context: "bipartite operator",
            expected: k * n,
            found: if m.rows() != k * n { m.rows() } else { m.cols() },
        });
    }
    Ok(())
}

/// `(id_k ⊗ Tr_n)(M)`, a `k × k` matrix.
pub fn partial_trace_right(m: &Matrix, k: usize, n: usize) -> Result<Matrix> {
    check_bipartite(m, k, n)?;
    Ok(Matrix::from_fn(k, k, |i, j| {
        (0..n).map(|a| m[(i * n + a, j * n + a)]).sum()
    }))
}

/// `(Tr_k ⊗ id_n)(M)`, an `n × n` matrix.
pub fn partial_trace_left(m: &Matrix, k: usize, n: usize) -> Result<Matrix> {
    check_bipartite(m, k, n)?;
    Ok(Matrix::from_fn(n, n, |a, b| {
        (0..k).map(|i| m[(i * n + a, i * n + b)]).sum()
    }))
}

/// Reshapes `x ∈ C^k ⊗ C^n` into the `k × n` matrix `X[i][j] = x[i·n + j]`.
pub fn vector_to_matrix(x: &[C64], k: usize, n: usize) -> Result<Matrix> {
    if x.len() != k * n {
        return Err(Error::DimensionMismatch {
            context: "bipartite vector",
            expected: k * n,
            found: x.len(),
        });
    }
    Ok(Matrix::from_vec_unchecked(k, n, x.to_vec()))
}

/// `Tr_n[x x*] = X X*` computed from the `k × n` reshape.
pub fn reduced_state_right(x: &[C64], k: usize, n: usize) -> Result<Matrix> {
    let xm = vector_to_matrix(x, k, n)?;
    Ok(xm.mul_adjoint(&xm))
}

/// `Tr_k[x x*] = Xᵀ conj(X)`.
pub fn reduced_state_left(x: &[C64], k: usize, n: usize) -> Result<Matrix> {
    let xm = vector_to_matrix(x, k, n)?;
    Ok(xm.transpose().mul_mat(&xm.conj()))
}

pub fn tensor_vectors(u: &[C64], v: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for &a in u {
        for &b in v {
            out.push(a * b);
        }
    }
    out
}

/// `x = Σ coefficients[i] · left[i] ⊗ right[i]`.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left: Vec<Vec<C64>>,
    pub right: Vec<Vec<C64>>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Squared coefficients, the spectrum of either reduced state.
    pub fn weights(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c * c).collect()
    }

    pub fn reconstruct(&self) -> Vec<C64> {
        let k = self.left.first().map_or(0, Vec::len);
        let n = self.right.first().map_or(0, Vec::len);
        let mut x = alloc::vec![ZERO; k * n];
        for ((c, e), f) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            for (i, &ei) in e.iter().enumerate() {
                for (j, &fj) in f.iter().enumerate() {
                    x[i * n + j] += ei * fj * *c;
                }
            }
        }
        x
    }
}

const SCHMIDT_DROP: f64 = 1e-14;
const UNIT_TOL: f64 = 1e-12;

/// Schmidt decomposition of a unit vector on `C^k ⊗ C^n`.
///
/// Left vectors come from the eigenvectors of `X X*`; coefficients and right
/// vectors are read off the rows of `E* X`, so the reconstruction is exact up
/// to rounding even for nearly vanishing coefficients.
pub fn schmidt(x: &[C64], k: usize, n: usize) -> Result<SchmidtDecomposition> {
    let nrm = norm(x);
    if (nrm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnitVector { norm: nrm });
    }
    let xm = vector_to_matrix(x, k, n)?;
    let es = hermitian_eigs(&xm.mul_adjoint(&xm))?;
    let mut coefficients = Vec::new();
    let mut left = Vec::new();
    let mut right: Vec<Vec<C64>> = Vec::new();
    for i in 0..k {
        let e = es.vector(i);
        // row g = e* X, so X = Σ e g
        let g: Vec<C64> = (0..n)
            .map(|j| (0..k).map(|r| e[r].conj() * xm[(r, j)]).sum())
            .collect();
        let c = norm(&g);
        if c > SCHMIDT_DROP {
            coefficients.push(c);
            right.push(g.iter().map(|z| z / c).collect());
            left.push(e);
        }
    }
    let mut order: Vec<usize> = (0..coefficients.len()).collect();
    order.sort_by(|&i, &j| coefficients[j].total_cmp(&coefficients[i]));
    Ok(SchmidtDecomposition {
        coefficients: order.iter().map(|&i| coefficients[i]).collect(),
        left: order.iter().map(|&i| left[i].clone()).collect(),
        right: order.iter().map(|&i| right[i].clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::hermitian_eigenvalues;
    use crate::random::{random_hermitian, sample_pure_state, SeededRng};
    use alloc::vec;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn basis(dim: usize, i: usize) -> Vec<C64> {
        let mut v = vec![ZERO; dim];
        v[i] = C64::new(1.0, 0.0);
        v
    }

    /// Partial trace by explicit index sums over product-basis matrix units.
    fn index_sum_right(m: &Matrix, k: usize, n: usize) -> Matrix {
        let mut out = Matrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let mut acc = ZERO;
                for a in 0..n {
                    let bra = tensor_vectors(&basis(k, i), &basis(n, a));
                    let ket = tensor_vectors(&basis(k, j), &basis(n, a));
                    let mk = m.matvec(&ket);
                    acc += crate::matrix::dot(&bra, &mk);
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    #[test]
    fn product_operator_factorizes() {
        let mut rng = SeededRng::new(1, 0);
        let a = random_hermitian(3, &mut rng);
        let b = random_hermitian(4, &mut rng);
        let ab = a.kron(&b);
        let right = partial_trace_right(&ab, 3, 4).unwrap();
        assert!(right.max_abs_diff(&a.scale(b.trace())) < 1e-12);
        let left = partial_trace_left(&ab, 3, 4).unwrap();
        assert!(left.max_abs_diff(&b.scale(a.trace())) < 1e-12);
    }

    #[test]
    fn maximally_entangled_and_identity() {
        let s = FRAC_1_SQRT_2;
        let x = vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
        let p = Matrix::outer(&x);
        let r = partial_trace_right(&p, 2, 2).unwrap();
        assert!(r.max_abs_diff(&Matrix::identity(2).scale_real(0.5)) < 1e-15);
        let l = partial_trace_left(&Matrix::identity(6), 2, 3).unwrap();
        assert!(l.max_abs_diff(&Matrix::identity(3).scale_real(2.0)) < 1e-15);
    }

    #[test]
    fn random_partial_trace_matches_index_sum() {
        let mut rng = SeededRng::new(2, 0);
        let m = random_hermitian(12, &mut rng);
        let fast = partial_trace_right(&m, 3, 4).unwrap();
        assert!(fast.max_abs_diff(&index_sum_right(&m, 3, 4)) < 1e-12);
        assert!((fast.trace() - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            partial_trace_right(&Matrix::identity(5), 2, 3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pure_state_marginals_share_spectrum() {
        let mut rng = SeededRng::new(3, 0);
        let x = sample_pure_state(15, &mut rng);
        let p = Matrix::outer(&x);
        let r = hermitian_eigenvalues(&partial_trace_right(&p, 3, 5).unwrap()).unwrap();
        let l = hermitian_eigenvalues(&partial_trace_left(&p, 3, 5).unwrap()).unwrap();
        for i in 0..3 {
            assert!((r[i] - l[i]).abs() < 1e-12);
        }
        assert!(l[3..].iter().all(|v| v.abs() < 1e-12));
        let fast = reduced_state_left(&x, 3, 5).unwrap();
        assert!(fast.max_abs_diff(&partial_trace_left(&p, 3, 5).unwrap()) < 1e-14);
    }

    #[test]
    fn schmidt_examples() {
        let x = tensor_vectors(&basis(2, 0), &basis(3, 0));
        let sd = schmidt(&x, 2, 3).unwrap();
        assert_eq!(sd.rank(), 1);
        assert!((sd.coefficients[0] - 1.0).abs() < 1e-15);

        let s = FRAC_1_SQRT_2;
        let mut x = vec![ZERO; 4];
        x[0] = C64::new(s, 0.0);
        x[3] = C64::new(s, 0.0);
        let sd = schmidt(&x, 2, 2).unwrap();
        assert_eq!(sd.rank(), 2);
        for c in &sd.coefficients {
            assert!((c - s).abs() < 1e-14);
        }
        assert!(matches!(
            schmidt(&[C64::new(2.0, 0.0)], 1, 1),
            Err(Error::NotUnitVector { .. })
        ));
    }

    #[test]
    fn schmidt_random_consistency() {
        let mut rng = SeededRng::new(4, 0);
        for (k, n) in [(2, 5), (4, 3), (3, 3)] {
            let x = sample_pure_state(k * n, &mut rng);
            let sd = schmidt(&x, k, n).unwrap();
            let total: f64 = sd.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let back = sd.reconstruct();
            let err = back.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            assert!(err < 1e-10);
            let spectrum = hermitian_eigenvalues(&reduced_state_right(&x, k, n).unwrap()).unwrap();
            for (w, s) in sd.weights().iter().zip(&spectrum) {
                assert!((w - s).abs() < 1e-10);
            }
            for (i, f) in sd.right.iter().enumerate() {
                for (j, g) in sd.right.iter().enumerate() {
                    let ip = crate::matrix::dot(f, g);
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - C64::new(target, 0.0)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn duality_with_tensor_identity() {
        let mut rng = SeededRng::new(5, 0);
        let m = random_hermitian(6, &mut rng);
        let a = random_hermitian(2, &mut rng);
        let lhs = partial_trace_right(&m, 2, 3).unwrap().trace_product(&a);
        let rhs = m.trace_product(&a.kron(&Matrix::identity(3)));
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
