//! Tensor products `Ξ ⊗ Ψ` with an entanglement-breaking `Ξ`.
//!
//! Inputs `b ∈ C^p ⊗ C^N` put Ξ's input first (`p = dim`, index `x·N + y`).
//! The matrix `B ∈ M_{N,p}` pairs with `b` through `B[y][x] = b[x·N + y]`,
//! so that `Tr_p[bb* (M ⊗ I_N)] = B Mᵀ B*` and
//! `(Ξ ⊗ Ψ)(bb*) = Σ_i σ_i ⊗ Ψ(B M_iᵀ B*)`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::channel::{validate_povm, Channel, EbChannel};
use crate::eigen::{hermitian_eigenvalues, hermitian_eigs};
use crate::error::{Error, Result};
use crate::matrix::{norm, Matrix, C64, ONE, ZERO};
use crate::state::DensityMatrix;

/// `B` with `B[y][x] = b[x·N + y]` for `b ∈ C^p ⊗ C^N`.
pub fn input_matrix(b: &[C64], p: usize, n: usize) -> Result<Matrix> {
    if b.len() != p * n {
        return Err(Error::DimensionMismatch {
            context: "bipartite input vector",
            expected: p * n,
            found: b.len(),
        });
    }
    Ok(Matrix::from_fn(n, p, |y, x| b[x * n + y]))
}

fn check_unit(b: &[C64]) -> Result<()> {
    let nrm = norm(b);
    if (nrm - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnitVector { norm: nrm });
    }
    Ok(())
}

/// `B M_iᵀ B*` for every POVM element.
fn conditional_blocks(xi: &EbChannel, b: &Matrix) -> Vec<Matrix> {
    xi.povm()
        .iter()
        .map(|m| b.mul_mat(&m.transpose()).mul_adjoint(b).hermitian_part())
        .collect()
}

fn sum_of_products(xi: &EbChannel, psi: &Channel, blocks: &[Matrix]) -> Result<Matrix> {
    let (q, k) = (xi.states()[0].dim(), psi.output_dim());
    let mut out = Matrix::zeros(q * k, q * k);
    for (s, g) in xi.states().iter().zip(blocks) {
        out.add_scaled(ONE, &s.matrix().kron(&psi.apply(g)?));
    }
    Ok(out)
}

/// `(Ξ ⊗ Ψ)(bb*)` from the closed form, without building the product channel.
pub fn eb_tensor_output(xi: &EbChannel, psi: &Channel, b: &[C64]) -> Result<DensityMatrix> {
    check_unit(b)?;
    let bm = input_matrix(b, xi.povm()[0].rows(), psi.input_dim())?;
    let out = sum_of_products(xi, psi, &conditional_blocks(xi, &bm))?;
    DensityMatrix::normalize(&out)
}

/// `(Φ₁ ⊗ Φ₂)(X)` for any two channels, applying `Φ₁ ⊗ id` and then
/// `id ⊗ Φ₂` block by block.
pub fn apply_tensor_product(left: &Channel, right: &Channel, x: &Matrix) -> Result<Matrix> {
    let d2 = right.input_dim();
    let y = left.apply_with_identity(x, d2)?;
    let (q, k) = (left.output_dim(), right.output_dim());
    let mut out = Matrix::zeros(q * k, q * k);
    for a in 0..q {
        for c in 0..q {
            let block = Matrix::from_fn(d2, d2, |i, j| y[(a * d2 + i, c * d2 + j)]);
            let z = right.apply(&block)?;
            for i in 0..k {
                for j in 0..k {
                    out[(a * k + i, c * k + j)] = z[(i, j)];
                }
            }
        }
    }
    Ok(out)
}

/// `(Ξ ⊗ Ψ)(bb*) = Σ_k r_k Σ_i p_i^(k) σ_i ⊗ Ψ(ρ^(k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct EbTensorDecomposition {
    /// `r_k = Tr[B M_kᵀ B*]`, summing to one.
    pub weights: Vec<f64>,
    /// `p^(k)`, the point mass on outcome `k`.
    pub ensembles: Vec<Vec<f64>>,
    /// `ρ^(k) = B M_kᵀ B* / r_k`; the maximally mixed placeholder when `r_k = 0`.
    pub states: Vec<DensityMatrix>,
    /// Unit vectors `v_k` with `Ξ(v_k v_k*) = σ_k`, the top eigenvectors of `M_k`.
    pub witnesses: Vec<Vec<C64>>,
}

impl EbTensorDecomposition {
    pub fn reconstruct(&self, xi: &EbChannel, psi: &Channel) -> Result<Matrix> {
        let (q, k) = (xi.states()[0].dim(), psi.output_dim());
        let mut out = Matrix::zeros(q * k, q * k);
        for ((r, p), rho) in self.weights.iter().zip(&self.ensembles).zip(&self.states) {
            if *r == 0.0 {
                continue;
            }
            let mut mix = Matrix::zeros(q, q);
            for (pi, s) in p.iter().zip(xi.states()) {
                mix.add_scaled(C64::new(*pi, 0.0), s.matrix());
            }
            out.add_scaled(C64::new(*r, 0.0), &mix.kron(&psi.apply(rho.matrix())?));
        }
        Ok(out)
    }
}

const NORM_ONE_TOL: f64 = 1e-10;
const ZERO_WEIGHT: f64 = 1e-15;

/// Decomposes `(Ξ ⊗ Ψ)(bb*)` into products of points `σ_k` and `Ψ(ρ^(k))`,
/// which requires every POVM element to have operator norm one.
pub fn eb_tensor_decompose(xi: &EbChannel, psi: &Channel, b: &[C64]) -> Result<EbTensorDecomposition> {
    check_unit(b)?;
    let l = xi.outcomes();
    let mut witnesses = Vec::with_capacity(l);
    for (index, m) in xi.povm().iter().enumerate() {
        let es = hermitian_eigs(m)?;
        if (es.values[0] - 1.0).abs() > NORM_ONE_TOL {
            return Err(Error::HypothesisViolated { index, norm: es.values[0] });
        }
        witnesses.push(es.vector(0));
    }
    let bm = input_matrix(b, xi.povm()[0].rows(), psi.input_dim())?;
    let blocks = conditional_blocks(xi, &bm);
    let n = psi.input_dim();
    let mut weights = Vec::with_capacity(l);
    let mut states = Vec::with_capacity(l);
    for g in blocks {
        let r = g.trace().re;
        if r > ZERO_WEIGHT {
            weights.push(r);
            states.push(DensityMatrix::normalize(&g)?);
        } else {
            weights.push(0.0);
            states.push(DensityMatrix::maximally_mixed(n));
        }
    }
    let ensembles = (0..l)
        .map(|k| (0..l).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
        .collect();
    Ok(EbTensorDecomposition {
        weights,
        ensembles,
        states,
        witnesses,
    })
}

/// The pinching map on `C^l` written as an entanglement-breaking channel.
pub fn pinching_as_eb(l: usize) -> Result<EbChannel> {
    if l == 0 {
        return Err(Error::OutOfRange { what: "pinching dimension" });
    }
    let units: Vec<Matrix> = (0..l)
        .map(|i| Matrix::from_fn(l, l, |r, c| if r == i && c == i { ONE } else { ZERO }))
        .collect();
    let states = units.iter().map(|u| DensityMatrix::new(u.clone())).collect::<Result<Vec<_>>>()?;
    EbChannel::new(units, states)
}

/// Block eigenvalues for `P·Γ = (M_1ᵀ, …, M_lᵀ)` with
/// `P = λI + (1-λ)ψψ*` and flat `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub lambda: f64,
    /// Smallest eigenvalue of each centered block `M_iᵀ - I/l`. These sum to
    /// zero as matrices, so one is negative unless all `M_i = I/l`.
    pub centered_min_eigenvalues: Vec<f64>,
    /// Smallest eigenvalue of each block of the exact solution
    /// `Γ = P⁻¹(M_iᵀ)`, i.e. `(M_iᵀ - I/l)/λ + I/l`.
    pub exact_min_eigenvalues: Vec<f64>,
    /// Some centered block has an eigenvalue below `-1e-12`.
    pub has_negative_block: bool,
}

pub fn matrix_eq_positivity_probe(povm: &[Matrix], lambda: f64) -> Result<PositivityReport> {
    if lambda == 0.0 {
        return Err(Error::SingularP);
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::OutOfRange { what: "lambda (need 0 < lambda <= 1)" });
    }
    validate_povm(povm)?;
    let l = povm.len() as f64;
    let n = povm[0].rows();
    let flat = Matrix::identity(n).scale_real(1.0 / l);
    let mut centered_min = Vec::with_capacity(povm.len());
    let mut exact_min = Vec::with_capacity(povm.len());
    for m in povm {
        let centered = &m.transpose() - &flat;
        let c = hermitian_eigenvalues(&centered.hermitian_part())?;
        let cmin = *c.last().expect("non-empty spectrum");
        centered_min.push(cmin);
        exact_min.push(cmin / lambda + 1.0 / l);
    }
    let has_negative_block = centered_min.iter().any(|&v| v < -1e-12);
    Ok(PositivityReport {
        lambda,
        centered_min_eigenvalues: centered_min,
        exact_min_eigenvalues: exact_min,
        has_negative_block,
    })
}
