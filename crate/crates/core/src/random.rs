//! Seeded samplers: Haar unitaries and isometries, random channels, states.
//!
//! Every sampler draws from a [`SeededRng`], a ChaCha8 stream selected by
//! `(master_seed, stream_index)`. Two generators with the same pair produce
//! the same sequence, so trials can run on any thread in any order.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{Channel, MixedUnitaryChannel, StinespringChannel, WeightVector};
use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, normalize, Matrix, C64};
use crate::state::DensityMatrix;

#[derive(Debug, Clone)]
pub struct SeededRng {
    master_seed: u64,
    stream_index: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_index);
        SeededRng {
            master_seed,
            stream_index,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1), 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` (bound > 0), by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }

    /// Standard complex Gaussian, `E|z|² = 1`, via one Box–Muller pair.
    pub fn complex_gaussian(&mut self) -> C64 {
        let r = (-self.uniform().ln()).sqrt();
        let theta = 2.0 * PI * self.uniform();
        C64::from_polar(r, theta)
    }

    /// Standard real Gaussian.
    pub fn gaussian(&mut self) -> f64 {
        self.complex_gaussian().re * core::f64::consts::SQRT_2
    }

    pub fn gaussian_vector(&mut self, len: usize) -> Vec<C64> {
        (0..len).map(|_| self.complex_gaussian()).collect()
    }
}

/// Orthonormalizes `cols` Gaussian columns of length `rows` by modified
/// Gram–Schmidt with a second pass. The implicit triangular factor has a
/// positive real diagonal, which is the phase fix that makes the result
/// Haar distributed.
fn gaussian_orthonormal_columns(rows: usize, cols: usize, rng: &mut SeededRng) -> Vec<Vec<C64>> {
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(cols);
    for _ in 0..cols {
        let mut v = rng.gaussian_vector(rows);
        loop {
            let before = crate::matrix::norm(&v);
            for _pass in 0..2 {
                for u in &q {
                    let c = dot(u, &v);
                    axpy(-c, u, &mut v);
                }
            }
            let after = normalize(&mut v);
            // Only a near-dependent draw (probability zero) needs a redraw.
            if after > 1e-8 * before {
                break;
            }
            v = rng.gaussian_vector(rows);
        }
        q.push(v);
    }
    q
}

/// Haar-distributed `n × n` unitary.
pub fn haar_unitary(n: usize, rng: &mut SeededRng) -> Matrix {
    Matrix::from_columns(&gaussian_orthonormal_columns(n, n, rng))
}

/// First `cols` columns of a Haar unitary of size `rows`.
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut SeededRng) -> Result<Matrix> {
    if cols > rows || cols == 0 {
        return Err(Error::DimensionMismatch {
            context: "isometry columns",
            expected: rows,
            found: cols,
        });
    }
    Ok(Matrix::from_columns(&gaussian_orthonormal_columns(rows, cols, rng)))
}

/// Uniformly distributed unit vector in `C^dim`.
pub fn sample_pure_state(dim: usize, rng: &mut SeededRng) -> Vec<C64> {
    loop {
        let mut x = rng.gaussian_vector(dim);
        if normalize(&mut x) > 0.0 {
            return x;
        }
    }
}

/// Mixed-unitary channel with `weights.len()` i.i.d. Haar unitaries of size `n`.
pub fn sample_mixed_unitary_channel(
    weights: &WeightVector,
    n: usize,
    rng: &mut SeededRng,
) -> Result<Channel> {
    if weights.len() < 2 {
        return Err(Error::BadWeights);
    }
    let unitaries = (0..weights.len()).map(|_| haar_unitary(n, rng)).collect();
    Ok(Channel::MixedUnitary(MixedUnitaryChannel::new_unchecked(
        weights.clone(),
        unitaries,
    )))
}

/// Channel `C^N -> C^k` whose isometry `C^N -> C^k ⊗ C^n` is Haar random.
pub fn sample_stinespring_channel(
    k: usize,
    n: usize,
    input_dim: usize,
    rng: &mut SeededRng,
) -> Result<Channel> {
    let v = haar_isometry(k * n, input_dim, rng)?;
    Ok(Channel::Stinespring(StinespringChannel::new(v, k, n)?))
}

/// Random Stinespring regime: output dimension `k`, input dimension
/// `N(n) = max(1, round(t·n·k))` for each environment size in `n_grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct StinespringRegime {
    pub k: usize,
    pub t: f64,
    pub n_grid: Vec<usize>,
}

impl StinespringRegime {
    pub fn new(k: usize, t: f64, n_grid: Vec<usize>) -> Result<Self> {
        if k == 0 || !(t > 0.0 && t < 1.0) {
            return Err(Error::OutOfRange { what: "Stinespring regime (k, t)" });
        }
        if n_grid.iter().any(|&n| n == 0) {
            return Err(Error::OutOfRange { what: "environment dimension" });
        }
        Ok(StinespringRegime { k, t, n_grid })
    }

    pub fn input_dim(&self, n: usize) -> usize {
        let kn = self.k * n;
        ((self.t * kn as f64).round() as usize).clamp(1, kn)
    }

    pub fn sample(&self, n: usize, rng: &mut SeededRng) -> Result<Channel> {
        sample_stinespring_channel(self.k, n, self.input_dim(n), rng)
    }
}

/// `(G + G*)/2` for a complex Ginibre matrix `G`.
pub fn random_hermitian(n: usize, rng: &mut SeededRng) -> Matrix {
    let g = Matrix::from_vec_unchecked(n, n, rng.gaussian_vector(n * n));
    g.hermitian_part()
}

/// Full-rank density matrix `G G* / Tr[G G*]` (Hilbert–Schmidt measure).
pub fn random_density(n: usize, rng: &mut SeededRng) -> DensityMatrix {
    let g = Matrix::from_vec_unchecked(n, n, rng.gaussian_vector(n * n));
    let p = g.mul_adjoint(&g).hermitian_part();
    let tr = p.trace().re;
    DensityMatrix::from_trusted(p.scale_real(1.0 / tr))
}

/// Projective measurement with `l` outcomes on `C^dim`: the columns of a
/// Haar unitary are split into `l` contiguous groups of near-equal size and
/// each group's projector is one element. Every element has norm one.
pub fn random_projective_povm(dim: usize, l: usize, rng: &mut SeededRng) -> Result<Vec<Matrix>> {
    if l == 0 || l > dim {
        return Err(Error::OutOfRange { what: "number of POVM outcomes" });
    }
    let u = gaussian_orthonormal_columns(dim, dim, rng);
    let mut povm = Vec::with_capacity(l);
    let mut start = 0;
    for i in 0..l {
        let size = dim / l + usize::from(i < dim % l);
        let mut m = Matrix::zeros(dim, dim);
        for col in &u[start..start + size] {
            m.add_scaled(C64::new(1.0, 0.0), &Matrix::outer(col));
        }
        povm.push(m.hermitian_part());
        start += size;
    }
    Ok(povm)
}

/// Uniform (flat Dirichlet) probability vector with strictly positive entries.
pub fn random_weights(k: usize, rng: &mut SeededRng) -> Result<WeightVector> {
    let e: Vec<f64> = (0..k).map(|_| -rng.uniform().ln()).collect();
    let total: f64 = e.iter().sum();
    WeightVector::new(e.iter().map(|x| x / total).collect())
}

/// Random pure state as a density matrix.
pub fn random_pure_density(dim: usize, rng: &mut SeededRng) -> DensityMatrix {
    let x = sample_pure_state(dim, rng);
    DensityMatrix::from_trusted(Matrix::outer(&x))
}

/// Random unit vector of `C^dim` with real non-negative entries.
pub fn random_positive_unit(dim: usize, rng: &mut SeededRng) -> Vec<f64> {
    let mut a: Vec<f64> = (0..dim).map(|_| rng.gaussian().abs()).collect();
    let n = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        return e;
    }
    a.iter_mut().for_each(|x| *x /= n);
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Mean and standard error of a sample.
    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn determinism_and_streams() {
        let a: Vec<u64> = {
            let mut r = SeededRng::new(42, 3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = SeededRng::new(42, 3);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = SeededRng::new(42, 4);
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
        let u1 = haar_unitary(5, &mut SeededRng::new(1, 1));
        let u2 = haar_unitary(5, &mut SeededRng::new(1, 1));
        assert_eq!(u1, u2);
    }

    #[test]
    fn unitarity_and_isometry() {
        let mut rng = SeededRng::new(7, 0);
        for n in [1, 2, 5, 33] {
            let u = haar_unitary(n, &mut rng);
            assert!(u.isometry_defect() <= 1e-10);
            assert!(u.adjoint().isometry_defect() <= 1e-10);
        }
        let u = haar_unitary(1, &mut rng);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
        let v = haar_isometry(12, 5, &mut rng).unwrap();
        assert_eq!((v.rows(), v.cols()), (12, 5));
        assert!(v.isometry_defect() <= 1e-10);
        assert!(haar_isometry(3, 4, &mut rng).is_err());
    }

    #[test]
    fn haar_first_moment() {
        let mut rng = SeededRng::new(11, 0);
        let n = 10;
        let xs: Vec<f64> = (0..2000).map(|_| haar_unitary(n, &mut rng)[(0, 0)].norm_sqr()).collect();
        let (mean, se) = mean_se(&xs);
        assert!((mean - 0.1).abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn haar_trace_moment() {
        for (i, n) in [5usize, 10, 20].into_iter().enumerate() {
            let mut rng = SeededRng::new(12, i as u64);
            let xs: Vec<f64> = (0..2000).map(|_| haar_unitary(n, &mut rng).trace().norm_sqr()).collect();
            let (mean, se) = mean_se(&xs);
            assert!((mean - 1.0).abs() <= 3.0 * se, "n {n}: mean {mean}, se {se}");
        }
    }

    #[test]
    fn pure_state_moment() {
        let mut rng = SeededRng::new(13, 0);
        let xs: Vec<f64> = (0..4000).map(|_| sample_pure_state(8, &mut rng)[0].norm_sqr()).collect();
        let (mean, se) = mean_se(&xs);
        assert!((mean - 0.125).abs() <= 3.0 * se, "mean {mean}, se {se}");
        let x = sample_pure_state(1, &mut rng);
        assert!((x[0].norm() - 1.0).abs() < 1e-15);
        let y = sample_pure_state(17, &mut rng);
        assert!((crate::matrix::norm(&y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regime_rounding() {
        let r = StinespringRegime::new(2, 0.3, alloc::vec![1, 400]).unwrap();
        assert_eq!(r.input_dim(400), 240);
        assert_eq!(r.input_dim(1), 1);
        assert!(StinespringRegime::new(2, 1.0, alloc::vec![1]).is_err());
    }

    #[test]
    fn projective_povm_is_complete() {
        let mut rng = SeededRng::new(14, 0);
        let povm = random_projective_povm(5, 3, &mut rng).unwrap();
        let mut sum = Matrix::zeros(5, 5);
        for m in &povm {
            assert!(m.mul_mat(m).max_abs_diff(m) < 1e-12);
            sum.add_scaled(C64::new(1.0, 0.0), m);
        }
        assert!(sum.max_abs_diff(&Matrix::identity(5)) < 1e-12);
    }

    #[test]
    fn weights_are_valid() {
        let mut rng = SeededRng::new(15, 0);
        for k in 2..8 {
            let w = random_weights(k, &mut rng).unwrap();
            assert!(w.as_slice().iter().all(|&x| x > 0.0));
        }
    }
}
