//! Density matrices and entropy functionals (natural logarithm).

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::eigen::{hermitian_eigenvalues, hermitian_eigs};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, C64};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues in `[-NEG_CLIP, 0)` are treated as rounding noise.
pub const NEG_CLIP: f64 = 1e-10;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Matrix,
}

impl DensityMatrix {
    /// Strict constructor: rejects anything outside the tolerances.
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotDensityMatrix { reason: "not square" });
        }
        if matrix.hermitian_defect() > HERMITIAN_TOL {
            return Err(Error::NotDensityMatrix { reason: "not Hermitian" });
        }
        if (matrix.trace().re - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotDensityMatrix { reason: "trace differs from one" });
        }
        let min = hermitian_eigenvalues(&matrix)?
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -NEG_CLIP {
            return Err(Error::NotDensityMatrix { reason: "negative eigenvalue" });
        }
        Ok(DensityMatrix { matrix })
    }

    /// Hermitizes, clips eigenvalues in `[-1e-10, 0)` to zero and rescales
    /// to unit trace. Larger negative eigenvalues or a vanishing trace are
    /// errors.
    pub fn normalize(matrix: &Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotDensityMatrix { reason: "not square" });
        }
        let scale = matrix.max_abs().max(1.0);
        if matrix.hermitian_defect() > 1e-10 * scale {
            return Err(Error::NotDensityMatrix { reason: "not Hermitian" });
        }
        let h = matrix.hermitian_part();
        let tr = h.trace().re;
        if !(tr > 0.0) {
            return Err(Error::NotDensityMatrix { reason: "non-positive trace" });
        }
        let h = h.scale_real(1.0 / tr);
        let es = hermitian_eigs(&h)?;
        let min = es.values.last().copied().unwrap_or(0.0);
        if min < -NEG_CLIP {
            return Err(Error::NotDensityMatrix { reason: "negative eigenvalue" });
        }
        if min >= 0.0 {
            return Ok(DensityMatrix { matrix: h });
        }
        let clipped: Vec<f64> = es.values.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let mut rebuilt = crate::eigen::EigenSystem {
            values: clipped.iter().map(|v| v / total).collect(),
            vectors: es.vectors,
        }
        .reconstruct();
        rebuilt = rebuilt.hermitian_part();
        Ok(DensityMatrix { matrix: rebuilt })
    }

    pub fn pure(x: &[C64]) -> Result<Self> {
        let n = crate::matrix::norm(x);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitVector { norm: n });
        }
        Ok(DensityMatrix {
            matrix: Matrix::outer(x),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: Matrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        let total: f64 = p.iter().sum();
        if p.iter().any(|&x| x < 0.0) || (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotDensityMatrix { reason: "diagonal is not a probability vector" });
        }
        Ok(DensityMatrix {
            matrix: Matrix::from_real_diagonal(p),
        })
    }

    pub(crate) fn from_trusted(matrix: Matrix) -> Self {
        DensityMatrix { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    /// Eigenvalues in non-increasing order.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `Tr[self · other]`, real for Hermitian arguments.
    pub fn overlap(&self, other: &Matrix) -> f64 {
        self.matrix.trace_product(other).re
    }
}

/// `-Σ λ log λ` over the spectrum; non-positive eigenvalues contribute zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_of_spectrum(&rho.spectrum()?))
}

pub fn entropy_of_spectrum(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Rényi entropy of order `p >= 1`; `p = 1` is von Neumann and
/// `p = ∞` gives `-log λ_max`.
pub fn renyi_entropy(rho: &DensityMatrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidOrder { p });
    }
    Ok(renyi_of_spectrum(&rho.spectrum()?, p))
}

pub fn renyi_of_spectrum(spectrum: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return entropy_of_spectrum(spectrum);
    }
    if p.is_infinite() {
        let max = spectrum.iter().copied().fold(0.0, f64::max);
        return (-max.ln()).max(0.0);
    }
    let s: f64 = spectrum.iter().filter(|&&l| l > 0.0).map(|&l| l.powf(p)).sum();
    (s.ln() / (1.0 - p)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, SeededRng};

    #[test]
    fn entropy_examples() {
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((von_neumann_entropy(&mixed).unwrap() - 4f64.ln()).abs() < 1e-14);
        let pure = DensityMatrix::pure(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-14);
        let d = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        let expected = -0.7 * 0.7f64.ln() - 0.3 * 0.3f64.ln();
        assert!((von_neumann_entropy(&d).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn renyi_examples() {
        let mixed = DensityMatrix::maximally_mixed(3);
        for p in [1.0, 1.5, 2.0, 7.0, f64::INFINITY] {
            assert!((renyi_entropy(&mixed, p).unwrap() - 3f64.ln()).abs() < 1e-13);
        }
        let pure = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!(renyi_entropy(&pure, 2.0).unwrap().abs() < 1e-14);
        let d = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        assert!((renyi_entropy(&d, 2.0).unwrap() + 0.58f64.ln()).abs() < 1e-14);
        assert!((renyi_entropy(&d, f64::INFINITY).unwrap() + 0.7f64.ln()).abs() < 1e-14);
        assert_eq!(renyi_entropy(&d, 0.5), Err(Error::InvalidOrder { p: 0.5 }));
    }

    #[test]
    fn renyi_non_increasing_and_bounded() {
        let mut rng = SeededRng::new(9, 0);
        for dim in [2, 3, 5] {
            let rho = random_density(dim, &mut rng);
            let s = von_neumann_entropy(&rho).unwrap();
            assert!(s >= 0.0 && s <= (dim as f64).ln() + 1e-12);
            let orders = [1.0, 1.2, 2.0, 3.0, 10.0, f64::INFINITY];
            let values: Vec<f64> = orders.iter().map(|&p| renyi_entropy(&rho, p).unwrap()).collect();
            assert!(values.windows(2).all(|w| w[0] >= w[1] - 1e-12), "{values:?}");
        }
    }

    #[test]
    fn normalization_clips_small_negatives() {
        let m = Matrix::from_real_diagonal(&[1.0 + 5e-11, -5e-11]);
        let rho = DensityMatrix::normalize(&m).unwrap();
        assert!(rho.spectrum().unwrap().iter().all(|&v| v >= 0.0));
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        let bad = Matrix::from_real_diagonal(&[1.1, -0.1]);
        assert!(DensityMatrix::normalize(&bad).is_err());
        assert!(DensityMatrix::new(Matrix::from_real_diagonal(&[0.5, 0.6])).is_err());
    }
}
